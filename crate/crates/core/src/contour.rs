//! Contour-integral route to the n-level density and the lemma verifiers.
//!
//! On the line Re z = δ write z = δ − iπx/N; then
//! (1/2πi)∫_{(δ)} g(z) f(Niz/π) dz = (1/2N)∫_ℝ g(δ − iπx/N) f(x + iy) dx
//! with y = Nδ/π. Every kernel g built from z, z'/z and e^{−2Nz} is 2N-periodic
//! in x, so the line integral folds onto one period against the periodized
//! test function, where the trapezoid rule converges geometrically (rate set
//! by the distance y of the nearest pole). Grids are doubled until two
//! successive levels agree.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::closedform::{double_shift_integral, single_shift_integral};
use crate::combinat::{FourWaySplit, IndexSet};
use crate::error::{domain, Error, Result};
use crate::estimate::{DensityEstimate, Method};
use crate::periodize::{bandwidth, periodized_samples, Periodization};
use crate::quad::{self, GaussLegendre};
use crate::testfn::{integral_abs_u_pair, TestFunction, TestFunctionProduct};

pub const DEFAULT_DELTA_SCALE: f64 = 0.5;
const MAX_LOG2_1D: u32 = 18;
const MAX_LOG2_2D: u32 = 14;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ContourSpec {
    /// Per-variable line offsets, strictly increasing.
    pub deltas: Vec<f64>,
    /// Half-height of the generic vertical line (tapered over [T/2, T]).
    pub truncation_t: f64,
    /// Starting node count for the generic vertical line.
    pub nodes_per_line: usize,
    /// Target absolute accuracy.
    pub tol: f64,
    pub periodization: Periodization,
}

impl ContourSpec {
    pub fn new(deltas: Vec<f64>, truncation_t: f64, nodes_per_line: usize) -> Result<Self> {
        if deltas.is_empty() || deltas[0] <= 0.0 || deltas.windows(2).any(|w| w[1] <= w[0]) {
            return domain("deltas must be positive and strictly increasing");
        }
        if !(truncation_t >= 10.0) {
            return domain("truncation_T must be at least 10");
        }
        if nodes_per_line < 64 {
            return domain("nodes_per_line must be at least 64");
        }
        Ok(ContourSpec { deltas, truncation_t, nodes_per_line, tol: 1e-10, periodization: Periodization::FourierSeries })
    }

    /// δ_i = c·i/N for i = 1..m; T = 50/(Nδ₁) capped at 500.
    pub fn for_n(n_half: usize, m: usize, c: f64) -> Result<Self> {
        if n_half == 0 || m == 0 || !(c > 0.0) {
            return domain("need N ≥ 1, at least one variable and c > 0");
        }
        let n = n_half as f64;
        let deltas: Vec<f64> = (1..=m).map(|i| c * i as f64 / n).collect();
        let t = (50.0 / (n * deltas[0])).clamp(10.0, 500.0);
        Self::new(deltas, t, 256)
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn with_periodization(mut self, p: Periodization) -> Self {
        self.periodization = p;
        self
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LineIntegral {
    pub value: C64,
    pub error: f64,
}

// C∞ step: 1 on [0, ½], 0 from 1 on.
fn taper(s: f64) -> f64 {
    if s <= 0.5 {
        return 1.0;
    }
    if s >= 1.0 {
        return 0.0;
    }
    let t = 2.0 * (s - 0.5);
    let psi = |x: f64| if x <= 0.0 { 0.0 } else { (-1.0 / x).exp() };
    let a = psi(1.0 - t);
    a / (a + psi(t))
}

fn tapered_line(g: &dyn Fn(C64) -> C64, delta: f64, t_max: f64, nodes: usize) -> C64 {
    let gl = GaussLegendre::new(16);
    let panels = (nodes / 16).max(1);
    let h = 2.0 * t_max / panels as f64;
    let mut s = C64::new(0.0, 0.0);
    for p in 0..panels {
        let a = -t_max + p as f64 * h;
        gl.for_each_on(a, a + h, |t, w| {
            let wt = taper(t.abs() / t_max);
            if wt > 0.0 {
                s += g(C64::new(delta, t)) * (w * wt);
            }
        });
    }
    s / (2.0 * PI)
}

/// (1/2πi)∫_{δ−iT}^{δ+iT} g(z) dz with a smooth cutoff over T/2 ≤ |Im z| ≤ T.
/// Nodes double from `nodes_per_line` until two levels agree; a tail check
/// compares against cutoff 3T/4.
pub fn vertical_line_integral(g: &dyn Fn(C64) -> C64, delta: f64, spec: &ContourSpec) -> Result<LineIntegral> {
    let t = spec.truncation_t;
    let mut nodes = spec.nodes_per_line.max(64);
    let mut prev = tapered_line(g, delta, t, nodes);
    loop {
        nodes *= 2;
        let cur = tapered_line(g, delta, t, nodes);
        let diff = (cur - prev).norm();
        if diff <= spec.tol * cur.norm().max(1.0) {
            let short = tapered_line(g, delta, 0.75 * t, nodes);
            let tail = (cur - short).norm();
            if tail > 10.0 * spec.tol * cur.norm().max(1.0) {
                return Err(Error::Truncation(format!(
                    "integrand does not decay on the line: cutoff change {tail:.3e}"
                )));
            }
            return Ok(LineIntegral { value: cur, error: diff + tail });
        }
        if nodes > 1 << 22 {
            return Err(Error::Numerical { what: "vertical line quadrature not converged".into(), achieved: diff });
        }
        prev = cur;
    }
}

/// One vertical line sampled on a uniform grid of one kernel period.
#[derive(Clone, Debug)]
pub struct LineGrid {
    pub delta: f64,
    /// e^{z_k} at the nodes z_k = δ − iπx_k/N.
    pub ez: Vec<C64>,
    /// e^{−2N z_k}
    pub decay: Vec<C64>,
    /// Periodized f(x_k + iy) times the node weight (1/2N)(P/L).
    pub fw: Vec<C64>,
}

impl LineGrid {
    pub fn new(f: &TestFunction, n_half: usize, delta: f64, l: usize, method: Periodization) -> Result<Self> {
        let n = n_half as f64;
        let period = 2.0 * n;
        let y = n * delta / PI;
        let fp = periodized_samples(f, period, y, l, method)?;
        let w = period / l as f64 / (2.0 * n);
        let mut ez = Vec::with_capacity(l);
        let mut decay = Vec::with_capacity(l);
        for k in 0..l {
            let x = k as f64 * period / l as f64;
            let z = C64::new(delta, -PI * x / n);
            ez.push(z.exp());
            decay.push((-2.0 * n * z).exp());
        }
        Ok(LineGrid { delta, ez, decay, fw: fp.into_iter().map(|v| v * w).collect() })
    }

    pub fn len(&self) -> usize {
        self.ez.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ez.is_empty()
    }
}

// Kernel pieces as functions of e^x.
#[inline]
fn zl(e: C64) -> C64 {
    // z'/z(x) = −1/(e^x − 1)
    -(e - 1.0).inv()
}
#[inline]
fn zlp(e: C64) -> C64 {
    // (z'/z)'(x) = e^x/(e^x − 1)²
    let d = e - 1.0;
    e / (d * d)
}
#[inline]
fn zz(e: C64) -> C64 {
    // z(x) = e^x/(e^x − 1)
    e / (e - 1.0)
}

/// J*_{q}({z}) for one variable.
pub fn j_star_one(n_half: usize, z: C64, q: usize) -> C64 {
    let e = z.exp();
    let mut s = zl(e * e);
    if q >= 2 {
        s -= (-2.0 * n_half as f64 * z).exp() * zz((e * e).inv());
    }
    s
}

/// J*_{q}({z₁, z₂}) written out shell by shell.
pub fn j_star_two(n_half: usize, z1: C64, z2: C64, q: usize) -> C64 {
    let n = n_half as f64;
    let (e1, e2) = (z1.exp(), z2.exp());
    let d1 = (-2.0 * n * z1).exp();
    let d2 = (-2.0 * n * z2).exp();
    two_from_exps(e1, e2, d1, d2, q)
}

#[inline]
fn two_from_exps(e1: C64, e2: C64, d1: C64, d2: C64, q: usize) -> C64 {
    let h1 = zl(e1 * e1);
    let h2 = zl(e2 * e2);
    let es = e1 * e2;
    let mut s = h1 * h2 + zlp(es);
    if q >= 2 {
        let et = e2 / e1; // e^{z₂−z₁}
        // D = {1}: −e^{−2Nz₁} z(−2z₁) [z'/z(2z₂) + z'/z(z₂−z₁) − z'/z(z₂+z₁)]
        s -= d1 * zz((e1 * e1).inv()) * (h2 + zl(et) - zl(es));
        s -= d2 * zz((e2 * e2).inv()) * (h1 + zl(et.inv()) - zl(es));
        if q >= 3 {
            // z(s)z(−s)/(z(t)z(−t)) = (2 − e^t − e^{−t}) / (2 − e^s − e^{−s})
            let ratio = (2.0 - et - et.inv()) / (2.0 - es - es.inv());
            s += d1 * d2 * zz((e1 * e1).inv()) * zz((e2 * e2).inv()) * ratio;
        }
    }
    s
}

fn start_level(fns: &[&TestFunction], n_half: usize) -> u32 {
    let period = 2.0 * n_half as f64;
    let band = fns.iter().map(|f| bandwidth(f, period)).max().unwrap_or(0);
    let need = (2 * band + 2).max(8 * n_half).max(64);
    need.next_power_of_two().trailing_zeros()
}

// Doubles L from 2^start until successive values agree within tol.
fn converge(
    start: u32,
    max: u32,
    tol: f64,
    mut eval: impl FnMut(usize) -> Result<C64>,
) -> Result<LineIntegral> {
    let mut prev = eval(1 << start)?;
    for lg in start + 1..=max {
        let cur = eval(1 << lg)?;
        let diff = (cur - prev).norm();
        if diff <= tol * cur.norm().max(1.0) {
            return Ok(LineIntegral { value: cur, error: diff });
        }
        prev = cur;
    }
    Err(Error::Numerical { what: "periodic trapezoid rule not converged".into(), achieved: f64::NAN })
}

/// One term of the (Q, M) decomposition.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ContourTerm {
    pub q: IndexSet,
    pub value: f64,
    pub error: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ContourResult {
    pub estimate: DensityEstimate,
    pub truncation_q: usize,
    pub terms: Vec<ContourTerm>,
}

/// (2N/2πi)∫_{(−δ)} f(Niz/π) dz on the periodic grid; equals ∫f.
pub fn m_term(f: &TestFunction, n_half: usize, delta: f64, method: Periodization) -> Result<f64> {
    let l = 1usize << start_level(&[f], n_half);
    let g = LineGrid::new(f, n_half, -delta, l, method)?;
    let s: C64 = g.fw.iter().sum();
    Ok((2.0 * n_half as f64 * s).re)
}

/// The n-level statistic at finite N for n ≤ 2 with J* truncated to shells
/// |D| < q, q the support class of the product.
pub fn n_level_contour(n_half: usize, product: &TestFunctionProduct, spec: &ContourSpec) -> Result<DensityEstimate> {
    Ok(n_level_contour_detailed(n_half, product, spec, None)?.estimate)
}

/// As [`n_level_contour`], optionally overriding the truncation order.
pub fn n_level_contour_detailed(
    n_half: usize,
    product: &TestFunctionProduct,
    spec: &ContourSpec,
    q_override: Option<usize>,
) -> Result<ContourResult> {
    let n = product.n();
    if n == 0 || n > 2 {
        return domain(format!("contour evaluation supports n = 1, 2; got {n}"));
    }
    if n_half == 0 {
        return domain("N must be positive");
    }
    if spec.deltas.len() < n {
        return domain("need one delta per variable");
    }
    let q = match q_override {
        Some(q) => q,
        None => product.support_class().ok_or_else(|| Error::Domain("total support ≥ 3".into()))? as usize,
    };
    let fs = product.factors();
    let mut terms = Vec::new();
    let m_vals: Vec<f64> =
        fs.iter().map(|f| m_term(f, n_half, spec.deltas[0], spec.periodization)).collect::<Result<_>>()?;
    let q1: Vec<LineIntegral> = fs
        .iter()
        .enumerate()
        .map(|(i, f)| one_variable(n_half, f, spec.deltas[i], q, spec))
        .collect::<Result<_>>()?;
    if n == 1 {
        terms.push(ContourTerm { q: IndexSet::empty(), value: m_vals[0], error: 0.0 });
        terms.push(ContourTerm { q: IndexSet::range(1), value: 2.0 * q1[0].value.re, error: 2.0 * q1[0].error });
    } else {
        terms.push(ContourTerm { q: IndexSet::empty(), value: m_vals[0] * m_vals[1], error: 0.0 });
        for i in 0..2 {
            let other = m_vals[1 - i];
            terms.push(ContourTerm {
                q: IndexSet::single(i),
                value: 2.0 * q1[i].value.re * other,
                error: 2.0 * q1[i].error * other.abs(),
            });
        }
        let both = two_variable(n_half, &fs[0], &fs[1], spec.deltas[0], spec.deltas[1], q, spec)?;
        terms.push(ContourTerm { q: IndexSet::range(2), value: 4.0 * both.value.re, error: 4.0 * both.error });
    }
    let value = terms.iter().map(|t| t.value).sum();
    let error = terms.iter().map(|t| t.error).sum();
    Ok(ContourResult {
        estimate: DensityEstimate { value, std_error: error, n, n_half, method: Method::Contour, samples: 0 },
        truncation_q: q,
        terms,
    })
}

// (1/2πi)∫_{(δ)} J*_q({z}) f dz
fn one_variable(n_half: usize, f: &TestFunction, delta: f64, q: usize, spec: &ContourSpec) -> Result<LineIntegral> {
    converge(start_level(&[f], n_half), MAX_LOG2_1D, spec.tol, |l| {
        let g = LineGrid::new(f, n_half, delta, l, spec.periodization)?;
        let mut s = C64::new(0.0, 0.0);
        for k in 0..l {
            let e = g.ez[k];
            let mut v = zl(e * e);
            if q >= 2 {
                v -= g.decay[k] * zz((e * e).inv());
            }
            s += v * g.fw[k];
        }
        Ok(s)
    })
}

// (1/2πi)²∫∫ J*_q({z₁,z₂}) f₁ f₂ dz₁ dz₂
fn two_variable(
    n_half: usize,
    f1: &TestFunction,
    f2: &TestFunction,
    d1: f64,
    d2: f64,
    q: usize,
    spec: &ContourSpec,
) -> Result<LineIntegral> {
    converge(start_level(&[f1, f2], n_half), MAX_LOG2_2D, spec.tol, |l| {
        let g1 = LineGrid::new(f1, n_half, d1, l, spec.periodization)?;
        let g2 = LineGrid::new(f2, n_half, d2, l, spec.periodization)?;
        let mut s = C64::new(0.0, 0.0);
        for i in 0..l {
            let mut row = C64::new(0.0, 0.0);
            for j in 0..l {
                row += two_from_exps(g1.ez[i], g2.ez[j], g1.decay[i], g2.decay[j], q) * g2.fw[j];
            }
            s += row * g1.fw[i];
        }
        Ok(s)
    })
}

/// Contour value for a list of δ scales c (δ_i = c·i/N).
pub fn delta_sweep(n_half: usize, product: &TestFunctionProduct, scales: &[f64]) -> Result<Vec<(f64, f64)>> {
    scales
        .iter()
        .map(|&c| {
            let spec = ContourSpec::for_n(n_half, product.n(), c)?;
            Ok((c, n_level_contour(n_half, product, &spec)?.value))
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Lemma verification

#[derive(Clone, Debug)]
pub enum LemmaInput {
    /// 4/(2πi)²∬ (z'/z)'(z₁+z₂) f₁f₂ → 2∫|u| f̂₁f̂₂
    One { f1: TestFunction, f2: TestFunction },
    /// 2/(2πi)∫ z'/z(2z) f → −½∫f̂
    Two { f: TestFunction },
    /// 2N/(2πi)∫_{(−δ)} f = ∫f
    Three { f: TestFunction },
    /// single-shift lemma over disjoint A ∪ B = {0..m−1}, |B| ≥ 1
    Four { fns: Vec<TestFunction>, a: IndexSet, b: IndexSet },
    /// double-shift lemma over disjoint A₁ ∪ B₁ ∪ A₂ ∪ B₂ = {0..m−1}
    Five { fns: Vec<TestFunction>, a1: IndexSet, b1: IndexSet, a2: IndexSet, b2: IndexSet },
}

impl LemmaInput {
    pub fn number(&self) -> u8 {
        match self {
            LemmaInput::One { .. } => 1,
            LemmaInput::Two { .. } => 2,
            LemmaInput::Three { .. } => 3,
            LemmaInput::Four { .. } => 4,
            LemmaInput::Five { .. } => 5,
        }
    }

    fn fns(&self) -> Vec<&TestFunction> {
        match self {
            LemmaInput::One { f1, f2 } => vec![f1, f2],
            LemmaInput::Two { f } | LemmaInput::Three { f } => vec![f],
            LemmaInput::Four { fns, .. } | LemmaInput::Five { fns, .. } => fns.iter().collect(),
        }
    }

    fn params(&self) -> serde_json::Value {
        let profiles: Vec<_> = self.fns().iter().map(|f| f.profile().clone()).collect();
        let mut v = serde_json::json!({ "profiles": profiles });
        match self {
            LemmaInput::Four { a, b, .. } => {
                v["a"] = serde_json::json!(a);
                v["b"] = serde_json::json!(b);
            }
            LemmaInput::Five { a1, b1, a2, b2, .. } => {
                v["a1"] = serde_json::json!(a1);
                v["b1"] = serde_json::json!(b1);
                v["a2"] = serde_json::json!(a2);
                v["b2"] = serde_json::json!(b2);
            }
            _ => {}
        }
        v
    }

    fn validate(&self) -> Result<()> {
        let cover = |sets: &[&IndexSet], m: usize| -> Result<()> {
            let mut seen = vec![false; m];
            for s in sets {
                for i in s.iter() {
                    if i >= m || seen[i] {
                        return domain("lemma index sets must partition 0..m");
                    }
                    seen[i] = true;
                }
            }
            if seen.iter().any(|x| !x) {
                return domain("lemma index sets must cover every test function");
            }
            Ok(())
        };
        match self {
            LemmaInput::Four { fns, a, b } => {
                if b.is_empty() {
                    return domain("B must be nonempty");
                }
                cover(&[a, b], fns.len())
            }
            LemmaInput::Five { fns, a1, b1, a2, b2 } => {
                if b1.is_empty() || b2.is_empty() {
                    return domain("B₁ and B₂ must be nonempty");
                }
                cover(&[a1, b1, a2, b2], fns.len())
            }
            _ => Ok(()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LemmaPoint {
    #[serde(rename = "N")]
    pub n_half: usize,
    pub lhs: f64,
    pub error: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LemmaReport {
    pub lemma: u8,
    pub params: serde_json::Value,
    pub per_n: Vec<LemmaPoint>,
    pub extrapolated: f64,
    pub rhs: f64,
    /// |extrapolated − rhs| / |rhs| (absolute when rhs vanishes).
    pub rel_dev: f64,
    /// Same against the largest-N raw value.
    pub rel_dev_raw: f64,
    /// RHS region empty or RHS ≈ 0: a valid but weak check.
    pub weak: bool,
}

#[derive(Clone, Debug)]
pub struct LemmaOptions {
    pub n_schedule: Vec<usize>,
    pub delta_scale: f64,
    pub tol: f64,
    pub periodization: Periodization,
}

impl Default for LemmaOptions {
    fn default() -> Self {
        LemmaOptions {
            n_schedule: vec![16, 32, 64],
            delta_scale: DEFAULT_DELTA_SCALE,
            tol: 1e-11,
            periodization: Periodization::FourierSeries,
        }
    }
}

/// Finite-N LHS of a lemma.
pub fn lemma_lhs(input: &LemmaInput, n_half: usize, spec: &ContourSpec) -> Result<LineIntegral> {
    input.validate()?;
    let fns = input.fns();
    if spec.deltas.len() < fns.len() {
        return domain("need one delta per variable");
    }
    let pm = spec.periodization;
    let start = start_level(&fns, n_half);
    match input {
        LemmaInput::One { f1, f2 } => converge(start, MAX_LOG2_2D, spec.tol, |l| {
            let g1 = LineGrid::new(f1, n_half, spec.deltas[0], l, pm)?;
            let g2 = LineGrid::new(f2, n_half, spec.deltas[1], l, pm)?;
            let mut s = C64::new(0.0, 0.0);
            for i in 0..l {
                let mut row = C64::new(0.0, 0.0);
                for j in 0..l {
                    row += zlp(g1.ez[i] * g2.ez[j]) * g2.fw[j];
                }
                s += row * g1.fw[i];
            }
            Ok(4.0 * s)
        }),
        LemmaInput::Two { f } => converge(start, MAX_LOG2_1D, spec.tol, |l| {
            let g = LineGrid::new(f, n_half, spec.deltas[0], l, pm)?;
            let s: C64 = (0..l).map(|k| zl(g.ez[k] * g.ez[k]) * g.fw[k]).sum();
            Ok(2.0 * s)
        }),
        LemmaInput::Three { f } => Ok(LineIntegral {
            value: C64::new(m_term(f, n_half, spec.deltas[0], pm)?, 0.0),
            error: 0.0,
        }),
        LemmaInput::Four { fns, a, b } => converge(start, MAX_LOG2_2D, spec.tol, |l| {
            let grids: Vec<LineGrid> = fns
                .iter()
                .enumerate()
                .map(|(i, f)| LineGrid::new(f, n_half, spec.deltas[i], l, pm))
                .collect::<Result<_>>()?;
            let mut total = C64::new(0.0, 0.0);
            for d in b.iter() {
                let others = b.minus(&IndexSet::single(d));
                let inner = shift_factors(&grids, d, a, &others);
                let gd = &grids[d];
                let mut s = C64::new(0.0, 0.0);
                for k in 0..l {
                    let e2 = gd.ez[k] * gd.ez[k];
                    s += -gd.decay[k] * zz(e2.inv()) * inner[k] * gd.fw[k];
                }
                total += 2.0 * s;
            }
            Ok(total)
        }),
        LemmaInput::Five { fns, a1, b1, a2, b2 } => converge(start, MAX_LOG2_2D, spec.tol, |l| {
            let grids: Vec<LineGrid> = fns
                .iter()
                .enumerate()
                .map(|(i, f)| LineGrid::new(f, n_half, spec.deltas[i], l, pm))
                .collect::<Result<_>>()?;
            let mut total = C64::new(0.0, 0.0);
            for d in b1.iter() {
                let inner_d = shift_factors(&grids, d, a1, &b1.minus(&IndexSet::single(d)));
                for g in b2.iter() {
                    let inner_g = shift_factors(&grids, g, a2, &b2.minus(&IndexSet::single(g)));
                    let (gd, gg) = (&grids[d], &grids[g]);
                    let mut s = C64::new(0.0, 0.0);
                    for i in 0..l {
                        let ed = gd.ez[i];
                        let ad = gd.decay[i] * zz((ed * ed).inv()) * inner_d[i] * gd.fw[i];
                        let mut row = C64::new(0.0, 0.0);
                        for j in 0..l {
                            let eg = gg.ez[j];
                            let es = ed * eg;
                            let et = ed / eg;
                            let ratio = (2.0 - et - et.inv()) / (2.0 - es - es.inv());
                            row += gg.decay[j] * zz((eg * eg).inv()) * ratio * inner_g[j] * gg.fw[j];
                        }
                        s += ad * row;
                    }
                    total += 4.0 * s;
                }
            }
            Ok(total)
        }),
    }
}

// For each node of line `d`: Π_{i∈A} (−2)∫ z'/z(z_i+z_d) f_i · Π_{j∈B'} 2∫ z'/z(z_j−z_d) f_j.
fn shift_factors(grids: &[LineGrid], d: usize, a: &IndexSet, b: &IndexSet) -> Vec<C64> {
    let gd = &grids[d];
    let l = gd.len();
    let mut out = vec![C64::new(1.0, 0.0); l];
    for i in a.iter() {
        let gi = &grids[i];
        for k in 0..l {
            let mut s = C64::new(0.0, 0.0);
            for m in 0..l {
                s += zl(gi.ez[m] * gd.ez[k]) * gi.fw[m];
            }
            out[k] *= -2.0 * s;
        }
    }
    for j in b.iter() {
        let gj = &grids[j];
        for k in 0..l {
            let inv = gd.ez[k].inv();
            let mut s = C64::new(0.0, 0.0);
            for m in 0..l {
                s += zl(gj.ez[m] * inv) * gj.fw[m];
            }
            out[k] *= 2.0 * s;
        }
    }
    out
}

/// N → ∞ value of a lemma from the Fourier side.
pub fn lemma_rhs(input: &LemmaInput) -> Result<f64> {
    input.validate()?;
    match input {
        LemmaInput::One { f1, f2 } => Ok(2.0 * integral_abs_u_pair(f1, f2)?),
        LemmaInput::Two { f } => Ok(-0.5 * f.integral_fhat()),
        LemmaInput::Three { f } => Ok(f.integral_f()),
        LemmaInput::Four { fns, a, b } => {
            let m = fns.len() as i32;
            let sign = if b.len() % 2 == 0 { 1.0 } else { -1.0 };
            Ok(-0.5 * 2f64.powi(m) * sign * single_shift_integral(fns, a, b)?.value)
        }
        LemmaInput::Five { fns, a1, b1, a2, b2 } => {
            let m = fns.len() as i32;
            let sign = if (b1.len() + b2.len()) % 2 == 0 { 1.0 } else { -1.0 };
            let split = FourWaySplit { i1: a1.clone(), i1c: b1.clone(), i2: a2.clone(), i2c: b2.clone() };
            Ok(2f64.powi(m) * sign * double_shift_integral(fns, &split)?.value)
        }
    }
}

/// LHS at each N of the schedule, Richardson extrapolation in 1/N, and the RHS.
pub fn verify_lemma(input: &LemmaInput, opts: &LemmaOptions) -> Result<LemmaReport> {
    input.validate()?;
    if opts.n_schedule.is_empty() {
        return domain("empty N schedule");
    }
    let m = input.fns().len().max(2);
    let rhs = lemma_rhs(input)?;
    let mut per_n = Vec::new();
    for &n in &opts.n_schedule {
        let spec = ContourSpec::for_n(n, m, opts.delta_scale)?
            .with_tol(opts.tol)
            .with_periodization(opts.periodization);
        let v = lemma_lhs(input, n, &spec)?;
        per_n.push(LemmaPoint { n_half: n, lhs: v.value.re, error: v.error });
    }
    let hs: Vec<f64> = per_n.iter().map(|p| 1.0 / p.n_half as f64).collect();
    let vals: Vec<f64> = per_n.iter().map(|p| p.lhs).collect();
    let extrapolated = if input.number() == 3 { *vals.last().unwrap() } else { quad::richardson(&hs, &vals) };
    let weak = rhs.abs() < 1e-12;
    let scale = if weak { 1.0 } else { rhs.abs() };
    let devs: Vec<f64> = vals.iter().map(|v| (v - rhs).abs()).collect();
    let floor = 1e-9 * scale;
    if devs.windows(2).any(|w| w[1] > floor && w[1] > 1.5 * w[0]) {
        return Err(Error::Numerical {
            what: format!("lemma {} LHS moves away from the limit as N grows", input.number()),
            achieved: *devs.last().unwrap(),
        });
    }
    Ok(LemmaReport {
        lemma: input.number(),
        params: input.params(),
        per_n,
        extrapolated,
        rhs,
        rel_dev: (extrapolated - rhs).abs() / scale,
        rel_dev_raw: devs.last().unwrap() / scale,
        weak,
    })
}
