//! One-dimensional quadrature primitives: Gauss–Legendre rules, graded
//! composite meshes, adaptive Gauss–Kronrod and Richardson extrapolation.

use std::collections::BinaryHeap;
use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Gauss–Legendre rule on [-1, 1].
#[derive(Clone, Debug)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    /// Nodes by Newton iteration on P_n from the Chebyshev initial guess.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss-Legendre order must be positive");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = (n + 1) / 2;
        for i in 0..m {
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        GaussLegendre { nodes, weights }
    }

    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    /// Maps the rule to [a, b], calling `push(x, w)` for every node.
    #[inline]
    pub fn for_each_on(&self, a: f64, b: f64, mut push: impl FnMut(f64, f64)) {
        let h = 0.5 * (b - a);
        let c = 0.5 * (b + a);
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            push(c + h * x, h * w);
        }
    }

    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        let mut s = 0.0;
        self.for_each_on(a, b, |x, w| s += w * f(x));
        s
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// A narrow feature (peak) of an integrand at `at` with characteristic width.
#[derive(Clone, Copy, Debug)]
pub struct Feature {
    pub at: f64,
    pub width: f64,
}

/// Panel breakpoints on [a, b]: geometric grading towards each feature
/// (down to a quarter of its width) and no panel longer than `h_max`.
pub fn graded_breakpoints(a: f64, b: f64, features: &[Feature], h_max: f64) -> Vec<f64> {
    let mut pts = vec![a, b];
    for ft in features {
        if ft.width <= 0.0 {
            continue;
        }
        let reach = h_max.max(ft.width);
        if ft.at < a - reach || ft.at > b + reach {
            continue;
        }
        if ft.at > a && ft.at < b {
            pts.push(ft.at);
        }
        let mut d = 0.25 * ft.width;
        while d < h_max {
            for p in [ft.at - d, ft.at + d] {
                if p > a && p < b {
                    pts.push(p);
                }
            }
            d *= 2.0;
        }
    }
    pts.sort_by(|x, y| x.partial_cmp(y).unwrap());
    let tol = 1e-12 * (b - a).abs().max(1.0);
    pts.dedup_by(|x, y| (*x - *y).abs() <= tol);
    let mut out = Vec::with_capacity(pts.len() * 2);
    out.push(pts[0]);
    for w in pts.windows(2) {
        let len = w[1] - w[0];
        let k = (len / h_max).ceil().max(1.0) as usize;
        for j in 1..=k {
            out.push(w[0] + len * j as f64 / k as f64);
        }
    }
    out
}

/// Composite Gauss–Legendre quadrature nodes and weights over a breakpoint list.
pub fn composite_nodes(breaks: &[f64], rule: &GaussLegendre) -> (Vec<f64>, Vec<f64>) {
    let mut xs = Vec::with_capacity(breaks.len() * rule.order());
    let mut ws = Vec::with_capacity(breaks.len() * rule.order());
    for w in breaks.windows(2) {
        rule.for_each_on(w[0], w[1], |x, wt| {
            xs.push(x);
            ws.push(wt);
        });
    }
    (xs, ws)
}

// Gauss–Kronrod 7/15 abscissae and weights.
const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

fn gk15<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut resk = fc * WGK[7];
    let mut resg = fc * WG[3];
    for j in 0..7 {
        let dx = h * XGK[j];
        let s = f(c - dx) + f(c + dx);
        resk += WGK[j] * s;
        if j % 2 == 1 {
            resg += WG[j / 2] * s;
        }
    }
    (resk * h, ((resk - resg) * h).abs())
}

struct Seg {
    a: f64,
    b: f64,
    val: f64,
    err: f64,
}
impl PartialEq for Seg {
    fn eq(&self, o: &Self) -> bool {
        self.err == o.err
    }
}
impl Eq for Seg {}
impl PartialOrd for Seg {
    fn partial_cmp(&self, o: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(o))
    }
}
impl Ord for Seg {
    fn cmp(&self, o: &Self) -> std::cmp::Ordering {
        self.err.total_cmp(&o.err)
    }
}

/// Result of an adaptive integration.
#[derive(Clone, Copy, Debug)]
pub struct QuadResult {
    pub value: f64,
    pub error: f64,
    pub evaluations: usize,
}

/// Globally adaptive Gauss–Kronrod (7/15) on [a, b], optionally pre-split at
/// known breakpoints.
pub fn adaptive<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    breaks: &[f64],
    abs_tol: f64,
    rel_tol: f64,
) -> Result<QuadResult> {
    if a == b {
        return Ok(QuadResult { value: 0.0, error: 0.0, evaluations: 0 });
    }
    let (lo, hi, sign) = if a < b { (a, b, 1.0) } else { (b, a, -1.0) };
    let mut cuts: Vec<f64> = breaks.iter().copied().filter(|x| *x > lo && *x < hi).collect();
    cuts.push(lo);
    cuts.push(hi);
    cuts.sort_by(|x, y| x.partial_cmp(y).unwrap());
    cuts.dedup();
    let mut heap = BinaryHeap::new();
    let mut total = 0.0;
    let mut err = 0.0;
    let mut evals = 0;
    for w in cuts.windows(2) {
        let (v, e) = gk15(&mut f, w[0], w[1]);
        evals += 15;
        total += v;
        err += e;
        heap.push(Seg { a: w[0], b: w[1], val: v, err: e });
    }
    let max_segments = 20_000;
    while err > abs_tol.max(rel_tol * total.abs()) {
        if heap.len() >= max_segments {
            return Err(Error::Numerical {
                what: "adaptive quadrature did not converge".into(),
                achieved: err,
            });
        }
        let s = heap.pop().unwrap();
        let m = 0.5 * (s.a + s.b);
        if m <= s.a || m >= s.b {
            return Err(Error::Numerical {
                what: "adaptive quadrature interval underflow".into(),
                achieved: err,
            });
        }
        let (v1, e1) = gk15(&mut f, s.a, m);
        let (v2, e2) = gk15(&mut f, m, s.b);
        evals += 30;
        total += v1 + v2 - s.val;
        err += e1 + e2 - s.err;
        heap.push(Seg { a: s.a, b: m, val: v1, err: e1 });
        heap.push(Seg { a: m, b: s.b, val: v2, err: e2 });
    }
    // Re-sum for a clean total.
    let value: f64 = heap.iter().map(|s| s.val).sum();
    let error: f64 = heap.iter().map(|s| s.err).sum();
    Ok(QuadResult { value: sign * value, error, evaluations: evals })
}

/// Polynomial extrapolation to h = 0 through (h_i, v_i) (Neville's scheme).
pub fn richardson(hs: &[f64], values: &[f64]) -> f64 {
    assert_eq!(hs.len(), values.len());
    let n = hs.len();
    let mut p = values.to_vec();
    for k in 1..n {
        for i in 0..n - k {
            p[i] = (hs[i] * p[i + 1] - hs[i + k] * p[i]) / (hs[i] - hs[i + k]);
        }
    }
    p[0]
}

/// Sum with pairwise (cascade) summation; order-deterministic.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= 16 {
        return xs.iter().sum();
    }
    let m = xs.len() / 2;
    pairwise_sum(&xs[..m]) + pairwise_sum(&xs[m..])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gl_integrates_polynomials_exactly() {
        let r = GaussLegendre::new(8);
        let v = r.integrate(0.0, 2.0, |x| x.powi(15));
        assert!((v - 2f64.powi(16) / 16.0).abs() < 1e-10);
        let w: f64 = r.weights.iter().sum();
        assert!((w - 2.0).abs() < 1e-14);
    }

    #[test]
    fn adaptive_handles_kink() {
        let r = adaptive(|x: f64| (x - 0.3).abs(), 0.0, 1.0, &[], 1e-12, 0.0).unwrap();
        assert!((r.value - (0.045 + 0.245)).abs() < 1e-11);
    }

    #[test]
    fn richardson_removes_linear_and_quadratic_terms() {
        let hs = [1.0 / 16.0, 1.0 / 32.0, 1.0 / 64.0];
        let v: Vec<f64> = hs.iter().map(|h| 2.0 + 3.0 * h - 5.0 * h * h).collect();
        assert!((richardson(&hs, &v) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn graded_mesh_respects_bounds() {
        let br = graded_breakpoints(-4.0, 4.0, &[Feature { at: 0.0, width: 0.01 }], 0.5);
        assert_eq!(br[0], -4.0);
        assert_eq!(*br.last().unwrap(), 4.0);
        assert!(br.windows(2).all(|w| w[1] > w[0] && w[1] - w[0] <= 0.5 + 1e-12));
        assert!(br.iter().any(|x| x.abs() < 0.01));
    }
}
