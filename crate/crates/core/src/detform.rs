//! Determinantal baseline: the USp(2N) correlation kernel, its scaled limit,
//! and quadrature of the one- and two-level statistics for small n.
//!
//! The statistics here are the same folded quantities the sampler measures:
//! a factor f enters through F(θ) = Σ_{|k|≤K} f(Nθ/π + 2Nk), and every
//! eigenangle on [0, π] is counted twice (for ±θ).

use std::f64::consts::PI;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::estimate::{DensityEstimate, Method};
use crate::haar::DEFAULT_K_MAX;
use crate::quad::{self, GaussLegendre};
use crate::testfn::TestFunction;

pub const MAX_N_ONE_LEVEL: usize = 128;
pub const MAX_N_PAIR: usize = 64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelVariant {
    FiniteN,
    ScaledLimit,
}

/// Sign between the two sine terms of the limiting kernel.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SignConvention {
    /// S(y−x) + S(y+x): the sign as sometimes printed; [`sign_audit`] shows
    /// it is not the limit of the finite-N kernel.
    Plus,
    #[default]
    StandardMinus,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KernelSpec {
    pub variant: KernelVariant,
    pub n_half: usize,
    pub sign_convention: SignConvention,
}

impl KernelSpec {
    pub fn finite(n_half: usize) -> Result<Self> {
        if n_half == 0 {
            return domain("finite-N kernel needs N ≥ 1");
        }
        Ok(KernelSpec { variant: KernelVariant::FiniteN, n_half, sign_convention: SignConvention::default() })
    }

    pub fn limit(sign_convention: SignConvention) -> Self {
        KernelSpec { variant: KernelVariant::ScaledLimit, n_half: 0, sign_convention }
    }
}

/// S_M(x) = sin(Mx/2) / (2π sin(x/2)), continuous at x ∈ 2πℤ.
pub fn s_kernel(m: usize, x: f64) -> f64 {
    let mf = m as f64;
    let k = (x / (2.0 * PI)).round();
    let t = x - 2.0 * PI * k;
    if t.abs() < 1e-5 {
        // sign (−1)^{k(M−1)} of the limit; series in t about the singular point
        let sign = if (k as i64 * (m as i64 - 1)) % 2 == 0 { 1.0 } else { -1.0 };
        return sign * mf * (1.0 - (mf * mf - 1.0) * t * t / 24.0) / (2.0 * PI);
    }
    (0.5 * mf * x).sin() / (2.0 * PI * (0.5 * x).sin())
}

/// sin(πx)/(πx)
pub fn sine_kernel(x: f64) -> f64 {
    let y = PI * x;
    if y.abs() < 1e-4 {
        1.0 - y * y / 6.0
    } else {
        y.sin() / y
    }
}

/// Finite N: S_{2N+1}(y−x) − S_{2N+1}(y+x) on [0, π]².
/// Scaled limit: S(y−x) ∓ S(y+x) with S the sine kernel.
pub fn kernel(spec: &KernelSpec, x: f64, y: f64) -> f64 {
    match spec.variant {
        KernelVariant::FiniteN => {
            let m = 2 * spec.n_half + 1;
            s_kernel(m, y - x) - s_kernel(m, y + x)
        }
        KernelVariant::ScaledLimit => {
            let s = match spec.sign_convention {
                SignConvention::Plus => 1.0,
                SignConvention::StandardMinus => -1.0,
            };
            sine_kernel(y - x) + s * sine_kernel(y + x)
        }
    }
}

/// det[K(x_i, x_j)] — the n-point correlation function.
pub fn correlation(spec: &KernelSpec, points: &[f64]) -> f64 {
    let n = points.len();
    let m = DMatrix::from_fn(n, n, |i, j| kernel(spec, points[i], points[j]));
    m.determinant()
}

/// ∫₀^π K(θ, θ) dθ; equals N for the finite kernel.
pub fn kernel_trace(n_half: usize) -> Result<f64> {
    let spec = KernelSpec::finite(n_half)?;
    let breaks: Vec<f64> = (1..4 * n_half).map(|i| PI * i as f64 / (4 * n_half) as f64).collect();
    Ok(quad::adaptive(|t| kernel(&spec, t, t), 0.0, PI, &breaks, 1e-12, 1e-13)?.value)
}

fn folded(f: &TestFunction, n_half: usize, k_max: usize, theta: f64) -> f64 {
    let n = n_half as f64;
    let x = n * theta / PI;
    let mut s = f.eval_real(x);
    for k in 1..=k_max {
        let sh = 2.0 * n * k as f64;
        s += f.eval_real(x + sh) + f.eval_real(x - sh);
    }
    s
}

fn panel_breaks(n_half: usize, per_unit: usize) -> Vec<f64> {
    let m = per_unit * n_half;
    (1..m).map(|i| PI * i as f64 / m as f64).collect()
}

/// ∫₀^π f(Nθ/π) K(θ,θ) dθ — the unfolded one-level density.
pub fn one_level_raw(n_half: usize, f: &TestFunction) -> Result<f64> {
    check_n(n_half, MAX_N_ONE_LEVEL)?;
    let spec = KernelSpec::finite(n_half)?;
    let n = n_half as f64;
    let r = quad::adaptive(
        |t| f.eval_real(n * t / PI) * kernel(&spec, t, t),
        0.0,
        PI,
        &panel_breaks(n_half, 2),
        1e-9,
        1e-12,
    )?;
    Ok(r.value)
}

/// The folded one-level statistic 2∫₀^π F(θ) K(θ,θ) dθ, directly comparable
/// with the Monte Carlo estimate using the same number of images.
pub fn one_level_finite_n(n_half: usize, f: &TestFunction) -> Result<DensityEstimate> {
    one_level_finite_n_with(n_half, f, DEFAULT_K_MAX)
}

pub fn one_level_finite_n_with(n_half: usize, f: &TestFunction, k_max: usize) -> Result<DensityEstimate> {
    check_n(n_half, MAX_N_ONE_LEVEL)?;
    let spec = KernelSpec::finite(n_half)?;
    let r = quad::adaptive(
        |t| folded(f, n_half, k_max, t) * kernel(&spec, t, t),
        0.0,
        PI,
        &panel_breaks(n_half, 2),
        1e-9,
        1e-12,
    )?;
    Ok(DensityEstimate {
        value: 2.0 * r.value,
        std_error: 2.0 * r.error,
        n: 1,
        n_half,
        method: Method::Determinantal,
        samples: 0,
    })
}

/// N → ∞ limit of [`one_level_raw`]: ∫₀^∞ f(x)(1 ∓ sin2πx/2πx) dx, evaluated on
/// the Fourier side as ½f̂(0) ∓ ¼∫_{−1}^{1} f̂.
pub fn one_level_limit_raw(f: &TestFunction, sign: SignConvention) -> Result<f64> {
    let hi = f.sigma().min(1.0);
    let central = 2.0 * quad::adaptive(|u| f.fhat(u), 0.0, hi, &[], 1e-14, 1e-14)?.value;
    let s = match sign {
        SignConvention::Plus => 1.0,
        SignConvention::StandardMinus => -1.0,
    };
    Ok(0.5 * f.integral_f() + 0.25 * s * central)
}

fn check_n(n_half: usize, max: usize) -> Result<()> {
    if n_half == 0 || n_half > max {
        return domain(format!("N must be in 1..={max}, got {n_half}"));
    }
    Ok(())
}

// composite Gauss–Legendre on [0, π] resolving the θ-scale π/N
fn theta_nodes(n_half: usize, order: usize) -> (Vec<f64>, Vec<f64>) {
    let mut breaks = vec![0.0];
    breaks.extend(panel_breaks(n_half, 4));
    breaks.push(PI);
    quad::composite_nodes(&breaks, &GaussLegendre::new(order))
}

fn distinct_pair_on(n_half: usize, f1: &TestFunction, f2: &TestFunction, k_max: usize, order: usize) -> f64 {
    let spec = KernelSpec { variant: KernelVariant::FiniteN, n_half, sign_convention: SignConvention::default() };
    let (t, w) = theta_nodes(n_half, order);
    let g1: Vec<f64> = t.iter().map(|&x| folded(f1, n_half, k_max, x)).collect();
    let g2: Vec<f64> = t.iter().map(|&x| folded(f2, n_half, k_max, x)).collect();
    let diag: Vec<f64> = t.iter().map(|&x| kernel(&spec, x, x)).collect();
    let m = 2 * n_half + 1;
    let mut rows = Vec::with_capacity(t.len());
    for i in 0..t.len() {
        let mut s = 0.0;
        for j in 0..t.len() {
            let k = s_kernel(m, t[j] - t[i]) - s_kernel(m, t[j] + t[i]);
            s += w[j] * g2[j] * (diag[i] * diag[j] - k * k);
        }
        rows.push(w[i] * g1[i] * s);
    }
    4.0 * quad::pairwise_sum(&rows)
}

/// 4∫∫_{[0,π]²} F₁(x)F₂(y) det₂K dx dy: the part of the two-level statistic
/// from distinct eigenangles.
pub fn distinct_pair_density_finite_n(n_half: usize, f1: &TestFunction, f2: &TestFunction) -> Result<f64> {
    distinct_pair_with(n_half, f1, f2, DEFAULT_K_MAX)
}

pub fn distinct_pair_with(n_half: usize, f1: &TestFunction, f2: &TestFunction, k_max: usize) -> Result<f64> {
    check_n(n_half, MAX_N_PAIR)?;
    let a = distinct_pair_on(n_half, f1, f2, k_max, 10);
    let b = distinct_pair_on(n_half, f1, f2, k_max, 14);
    let dev = (a - b).abs();
    if dev > 1e-7 * b.abs().max(1.0) {
        return Err(Error::Numerical { what: "pair quadrature not converged".into(), achieved: dev });
    }
    Ok(b)
}

/// Distinct-pair part plus the coincident (diagonal) part 4∫F₁F₂K(θ,θ)dθ.
/// The diagonal uses the product of the folded functions, not the fold of
/// f₁f₂, because every eigenangle contributes F₁(θ)F₂(θ) to the statistic.
pub fn full_pair_from_distinct(n_half: usize, f1: &TestFunction, f2: &TestFunction) -> Result<DensityEstimate> {
    full_pair_with(n_half, f1, f2, DEFAULT_K_MAX)
}

pub fn full_pair_with(n_half: usize, f1: &TestFunction, f2: &TestFunction, k_max: usize) -> Result<DensityEstimate> {
    let distinct = distinct_pair_with(n_half, f1, f2, k_max)?;
    let spec = KernelSpec::finite(n_half)?;
    let diag = quad::adaptive(
        |t| folded(f1, n_half, k_max, t) * folded(f2, n_half, k_max, t) * kernel(&spec, t, t),
        0.0,
        PI,
        &panel_breaks(n_half, 2),
        1e-10,
        1e-12,
    )?;
    Ok(DensityEstimate {
        value: distinct + 4.0 * diag.value,
        std_error: 4.0 * diag.error,
        n: 2,
        n_half,
        method: Method::Determinantal,
        samples: 0,
    })
}

/// Largest deviation, over a grid x ∈ [0.05, 3], between the scaled finite-N
/// diagonal (π/N)K_N(πx/N, πx/N) and each candidate limit diagonal.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SignAudit {
    pub n_half: usize,
    pub plus: f64,
    pub standard_minus: f64,
}

pub fn sign_audit(n_half: usize) -> Result<SignAudit> {
    let fin = KernelSpec::finite(n_half)?;
    let plus = KernelSpec::limit(SignConvention::Plus);
    let minus = KernelSpec::limit(SignConvention::StandardMinus);
    let n = n_half as f64;
    let (mut dp, mut dm) = (0.0f64, 0.0f64);
    for i in 0..60 {
        let x = 0.05 * (i + 1) as f64;
        let t = PI * x / n;
        let scaled = PI / n * kernel(&fin, t, t);
        dp = dp.max((scaled - kernel(&plus, x, x)).abs());
        dm = dm.max((scaled - kernel(&minus, x, x)).abs());
    }
    Ok(SignAudit { n_half, plus: dp, standard_minus: dm })
}
