//! Integrals of Π f̂_i(u_i) over boxes [0, σ_i] cut by linear inequalities and
//! optionally restricted to a unit-coefficient hyperplane.
//!
//! Up to five free dimensions the integral is computed by nested
//! Gauss–Legendre quadrature whose panel breakpoints are the projections of
//! the vertices of the current slice polytope, so every panel sees a smooth
//! (for polynomial profiles: polynomial) integrand and the rule is exact.
//! Six dimensions use randomly shifted Halton points.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::combinat::IndexSet;
use crate::error::{Error, Result};
use crate::quad::GaussLegendre;
use crate::testfn::TestFunction;

pub const MAX_DIMS: usize = 6;
const FEAS_TOL: f64 = 1e-12;
const NESTED_MAX_DIMS: usize = 5;

/// Σ_{i∈I} u_i ≤ Σ_{j∈Iᶜ} u_j − 1.
#[derive(Clone, Debug, PartialEq)]
pub struct ShiftedInequality {
    pub lhs: IndexSet,
    pub rhs: IndexSet,
}

/// Σ_{i∈P} u_i = Σ_{j∈Q} u_j.
#[derive(Clone, Debug, PartialEq)]
pub struct Hyperplane {
    pub positive: IndexSet,
    pub negative: IndexSet,
}

/// c₀ + Σ c_i u_i over global variable indices.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct AffineWeight {
    pub constant: f64,
    pub coeffs: Vec<(usize, f64)>,
}

#[derive(Clone, Debug)]
pub struct ConstrainedRegion {
    pub dims: IndexSet,
    pub inequalities: Vec<ShiftedInequality>,
    pub hyperplane: Option<Hyperplane>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RegionIntegral {
    pub value: f64,
    /// Estimated absolute error (0 for the exact nested rule on polynomials).
    pub error: f64,
}

impl ConstrainedRegion {
    pub fn new(
        dims: IndexSet,
        inequalities: Vec<ShiftedInequality>,
        hyperplane: Option<Hyperplane>,
    ) -> Result<Self> {
        for c in &inequalities {
            if c.lhs.iter().chain(c.rhs.iter()).any(|i| !dims.contains(i)) {
                return Err(Error::Domain("inequality uses a variable outside dims".into()));
            }
        }
        if let Some(h) = &hyperplane {
            if h.positive.iter().any(|i| h.negative.contains(i)) {
                return Err(Error::Domain("hyperplane sides must be disjoint".into()));
            }
            if h.positive.is_empty() {
                return Err(Error::Domain("hyperplane needs a variable to eliminate".into()));
            }
            if h.positive.iter().chain(h.negative.iter()).any(|i| !dims.contains(i)) {
                return Err(Error::Domain("hyperplane uses a variable outside dims".into()));
            }
        }
        Ok(ConstrainedRegion { dims, inequalities, hyperplane })
    }
}

// Σ a_i x_i ≤ b over local variables.
#[derive(Clone, Debug)]
struct Lin {
    a: Vec<f64>,
    b: f64,
}

struct Problem<'a> {
    d: usize,
    upper: Vec<f64>,
    cons: Vec<Lin>,
    fns: Vec<&'a TestFunction>,
    // eliminated variable: f̂_e(c0 + Σ c_i x_i)
    elim: Option<(&'a TestFunction, f64, Vec<f64>)>,
    weight: Option<(f64, Vec<f64>)>,
}

impl Problem<'_> {
    fn integrand(&self, x: &[f64]) -> f64 {
        let mut v = 1.0;
        for (f, &xi) in self.fns.iter().zip(x) {
            v *= f.fhat(xi);
        }
        if let Some((f, c0, c)) = &self.elim {
            let u = c0 + c.iter().zip(x).map(|(a, b)| a * b).sum::<f64>();
            v *= f.fhat(u);
        }
        if let Some((c0, c)) = &self.weight {
            v *= c0 + c.iter().zip(x).map(|(a, b)| a * b).sum::<f64>();
        }
        v
    }

    fn feasible(&self, x: &[f64]) -> bool {
        self.cons
            .iter()
            .all(|c| c.a.iter().zip(x).map(|(a, b)| a * b).sum::<f64>() <= c.b + FEAS_TOL)
            && x.iter().zip(&self.upper).all(|(xi, s)| *xi >= -FEAS_TOL && *xi <= s + FEAS_TOL)
    }
}

/// ∫ over the region of Π_{i∈dims} f̂_i(u_i) · weight(u).
/// `fns[i]` is the test function for global index i.
pub fn constrained_integral(
    region: &ConstrainedRegion,
    fns: &[TestFunction],
    weight: Option<&AffineWeight>,
) -> Result<RegionIntegral> {
    let dims: Vec<usize> = region.dims.elements().to_vec();
    if dims.iter().any(|&i| i >= fns.len()) {
        return Err(Error::Domain("region variable without a test function".into()));
    }
    // analytic emptiness: every constraint needs Σ_{Iᶜ} σ > 1
    for c in &region.inequalities {
        if c.rhs.iter().map(|j| fns[j].sigma()).sum::<f64>() <= 1.0 {
            return Ok(RegionIntegral { value: 0.0, error: 0.0 });
        }
    }
    let (free, elim_var): (Vec<usize>, Option<usize>) = match &region.hyperplane {
        Some(h) => {
            let e = h.positive.elements()[0];
            (dims.iter().copied().filter(|&i| i != e).collect(), Some(e))
        }
        None => (dims.clone(), None),
    };
    let d = free.len();
    if d > MAX_DIMS {
        return Err(Error::Capacity(format!("{d} free dimensions exceed the limit of {MAX_DIMS}")));
    }
    let local = |g: usize| free.iter().position(|&x| x == g);
    // global linear form → (constant, local coefficients), substituting u_e
    let mut elim_form: Option<(f64, Vec<f64>)> = None;
    if let (Some(h), Some(e)) = (&region.hyperplane, elim_var) {
        let mut c = vec![0.0; d];
        for j in h.negative.iter() {
            c[local(j).unwrap()] += 1.0;
        }
        for j in h.positive.iter().filter(|&j| j != e) {
            c[local(j).unwrap()] -= 1.0;
        }
        elim_form = Some((0.0, c));
    }
    let lower = |terms: &[(usize, f64)], c0: f64| -> (f64, Vec<f64>) {
        let mut a = vec![0.0; d];
        let mut k = c0;
        for &(g, w) in terms {
            match local(g) {
                Some(l) => a[l] += w,
                None => {
                    let (ec, ea) = elim_form.as_ref().expect("eliminated variable");
                    k += w * ec;
                    for (x, y) in a.iter_mut().zip(ea) {
                        *x += w * y;
                    }
                }
            }
        }
        (k, a)
    };
    let mut cons = Vec::new();
    for c in &region.inequalities {
        let mut terms: Vec<(usize, f64)> = c.lhs.iter().map(|i| (i, 1.0)).collect();
        terms.extend(c.rhs.iter().map(|j| (j, -1.0)));
        let (k, a) = lower(&terms, 0.0);
        cons.push(Lin { a, b: -1.0 - k });
    }
    let mut elim = None;
    if let (Some(e), Some((c0, c))) = (elim_var, &elim_form) {
        // 0 ≤ u_e ≤ σ_e
        cons.push(Lin { a: c.iter().map(|x| -x).collect(), b: *c0 });
        cons.push(Lin { a: c.clone(), b: fns[e].sigma() - c0 });
        elim = Some((&fns[e], *c0, c.clone()));
    }
    let weight = weight.map(|w| lower(&w.coeffs, w.constant));
    let prob = Problem {
        d,
        upper: free.iter().map(|&i| fns[i].sigma()).collect(),
        cons,
        fns: free.iter().map(|&i| &fns[i]).collect(),
        elim,
        weight,
    };
    if d == 0 {
        let v = if prob.feasible(&[]) { prob.integrand(&[]) } else { 0.0 };
        return Ok(RegionIntegral { value: v, error: 0.0 });
    }
    if d <= NESTED_MAX_DIMS {
        let poly = prob.fns.iter().all(|f| f.profile().is_polynomial())
            && prob.elim.as_ref().map_or(true, |(f, _, _)| f.profile().is_polynomial());
        let order = if poly {
            let deg: usize = prob.fns.iter().map(|f| f.profile().degree().unwrap()).sum::<usize>()
                + prob.elim.as_ref().map_or(0, |(f, _, _)| f.profile().degree().unwrap())
                + 1
                + d;
            deg / 2 + 2
        } else {
            24
        };
        let gl = GaussLegendre::new(order);
        let mut x = vec![0.0; d];
        let v = nested(&prob, &gl, 0, &mut x);
        Ok(RegionIntegral { value: v, error: if poly { 0.0 } else { 1e-12 * v.abs() } })
    } else {
        Ok(quasi_monte_carlo(&prob))
    }
}

// Vertices of {y : slice constraints} in the trailing variables x[k..]; returns
// the sorted distinct y_0 coordinates.
fn slice_vertex_coords(p: &Problem, k: usize, x: &[f64]) -> Vec<f64> {
    let r = p.d - k;
    // slice constraints as (a over r vars, b)
    let mut rows: Vec<(Vec<f64>, f64)> = Vec::new();
    for c in &p.cons {
        let fixed: f64 = c.a[..k].iter().zip(&x[..k]).map(|(a, b)| a * b).sum();
        rows.push((c.a[k..].to_vec(), c.b - fixed));
    }
    for i in 0..r {
        let mut lo = vec![0.0; r];
        lo[i] = -1.0;
        rows.push((lo, 0.0));
        let mut hi = vec![0.0; r];
        hi[i] = 1.0;
        rows.push((hi, p.upper[k + i]));
    }
    let m = rows.len();
    let mut out = Vec::new();
    let mut idx: Vec<usize> = (0..r).collect();
    loop {
        if let Some(y) = solve_rows(&rows, &idx, r) {
            let ok = rows.iter().all(|(a, b)| a.iter().zip(&y).map(|(p, q)| p * q).sum::<f64>() <= b + 1e-10);
            if ok {
                out.push(y[0]);
            }
        }
        // next combination
        let mut i = r;
        let mut moved = false;
        while i > 0 {
            i -= 1;
            if idx[i] < m - r + i {
                idx[i] += 1;
                for j in i + 1..r {
                    idx[j] = idx[j - 1] + 1;
                }
                moved = true;
                break;
            }
        }
        if !moved {
            break;
        }
    }
    out.sort_by(|a, b| a.partial_cmp(b).unwrap());
    out.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
    out
}

fn solve_rows(rows: &[(Vec<f64>, f64)], idx: &[usize], r: usize) -> Option<Vec<f64>> {
    let mut m: Vec<Vec<f64>> = idx
        .iter()
        .map(|&i| {
            let mut row = rows[i].0.clone();
            row.push(rows[i].1);
            row
        })
        .collect();
    for col in 0..r {
        let piv = (col..r).max_by(|&a, &b| m[a][col].abs().partial_cmp(&m[b][col].abs()).unwrap())?;
        if m[piv][col].abs() < 1e-12 {
            return None;
        }
        m.swap(col, piv);
        for row in 0..r {
            if row != col {
                let f = m[row][col] / m[col][col];
                if f != 0.0 {
                    for c in col..=r {
                        m[row][c] -= f * m[col][c];
                    }
                }
            }
        }
    }
    Some((0..r).map(|i| m[i][r] / m[i][i]).collect())
}

// Interval for the last variable given all others.
fn last_interval(p: &Problem, x: &[f64]) -> Option<(f64, f64)> {
    let k = p.d - 1;
    let mut lo: f64 = 0.0;
    let mut hi = p.upper[k];
    for c in &p.cons {
        let rest: f64 = c.a[..k].iter().zip(&x[..k]).map(|(a, b)| a * b).sum();
        let a = c.a[k];
        let b = c.b - rest;
        if a > 0.0 {
            hi = hi.min(b / a);
        } else if a < 0.0 {
            lo = lo.max(b / a);
        } else if b < -FEAS_TOL {
            return None;
        }
    }
    (hi > lo).then_some((lo, hi))
}

fn nested(p: &Problem, gl: &GaussLegendre, k: usize, x: &mut [f64]) -> f64 {
    if k + 1 == p.d {
        let Some((lo, hi)) = last_interval(p, x) else { return 0.0 };
        let mut s = 0.0;
        gl.for_each_on(lo, hi, |t, w| {
            x[k] = t;
            s += w * p.integrand(x);
        });
        return s;
    }
    let br = slice_vertex_coords(p, k, x);
    if br.len() < 2 {
        return 0.0;
    }
    let mut s = 0.0;
    for win in br.windows(2) {
        let (a, b) = (win[0], win[1]);
        gl.for_each_on(a, b, |t, w| {
            x[k] = t;
            s += w * nested(p, gl, k + 1, x);
        });
    }
    s
}

fn radical_inverse(mut i: u64, base: u64) -> f64 {
    let mut f = 1.0;
    let mut r = 0.0;
    while i > 0 {
        f /= base as f64;
        r += f * (i % base) as f64;
        i /= base;
    }
    r
}

// Randomly shifted Halton points; error from the spread across shifts.
fn quasi_monte_carlo(p: &Problem) -> RegionIntegral {
    const PRIMES: [u64; 6] = [2, 3, 5, 7, 11, 13];
    const SHIFTS: usize = 16;
    const POINTS: u64 = 1 << 15;
    let vol: f64 = p.upper.iter().product();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut est = Vec::with_capacity(SHIFTS);
    let mut x = vec![0.0; p.d];
    for _ in 0..SHIFTS {
        let shift: Vec<f64> = (0..p.d).map(|_| rng.gen::<f64>()).collect();
        let mut s = 0.0;
        for i in 1..=POINTS {
            for j in 0..p.d {
                let u = (radical_inverse(i, PRIMES[j]) + shift[j]).fract();
                x[j] = u * p.upper[j];
            }
            if p.feasible(&x) {
                s += p.integrand(&x);
            }
        }
        est.push(vol * s / POINTS as f64);
    }
    let mean = est.iter().sum::<f64>() / SHIFTS as f64;
    let var = est.iter().map(|e| (e - mean).powi(2)).sum::<f64>() / (SHIFTS - 1) as f64;
    RegionIntegral { value: mean, error: (var / SHIFTS as f64).sqrt() }
}
