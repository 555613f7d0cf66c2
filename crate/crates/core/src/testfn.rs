//! Admissible test functions: even, real, compactly supported Fourier
//! transforms with entire, closed-form physical-side evaluation.
//!
//! Convention: f̂(u) = ∫ f(x) e^{2πixu} dx, so f(x) = ∫ f̂(u) e^{-2πixu} du.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::quad::{self, GaussLegendre};
use crate::special::sinc;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProfileKind {
    Triangle,
    RaisedCosine,
    PiecewisePolynomial,
}

/// Shape of f̂ on [-σ, σ].
///
/// * triangle: f̂(u) = 1 − |u|/σ
/// * raised-cosine: f̂(u) = ½(1 + cos(πu/σ))
/// * piecewise-polynomial: f̂(u) = Σ_k c_k (1 − |u|/σ)^k, k = 1, 2, …
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FourierProfile {
    pub kind: ProfileKind,
    pub sigma: f64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub coefficients: Vec<f64>,
}

impl FourierProfile {
    pub fn triangle(sigma: f64) -> Self {
        FourierProfile { kind: ProfileKind::Triangle, sigma, coefficients: vec![] }
    }

    pub fn raised_cosine(sigma: f64) -> Self {
        FourierProfile { kind: ProfileKind::RaisedCosine, sigma, coefficients: vec![] }
    }

    pub fn piecewise_polynomial(sigma: f64, coefficients: Vec<f64>) -> Self {
        FourierProfile { kind: ProfileKind::PiecewisePolynomial, sigma, coefficients }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sigma.is_finite() && self.sigma > 0.0) {
            return domain(format!("support half-width must be positive, got {}", self.sigma));
        }
        match self.kind {
            ProfileKind::PiecewisePolynomial => {
                if self.coefficients.is_empty() {
                    return domain("piecewise-polynomial profile needs at least one coefficient");
                }
                if self.coefficients.iter().any(|c| !c.is_finite()) {
                    return domain("non-finite polynomial coefficient");
                }
                if self.coefficients.len() > 24 {
                    return domain("piecewise-polynomial degree above 24 is not supported");
                }
            }
            _ => {
                if !self.coefficients.is_empty() {
                    return domain("coefficients are only meaningful for piecewise-polynomial");
                }
            }
        }
        Ok(())
    }

    /// f̂(u); identically zero for |u| ≥ σ.
    pub fn fhat(&self, u: f64) -> f64 {
        let a = u.abs();
        if a >= self.sigma {
            return 0.0;
        }
        let v = 1.0 - a / self.sigma;
        match self.kind {
            ProfileKind::Triangle => v,
            ProfileKind::RaisedCosine => 0.5 * (1.0 + (PI * a / self.sigma).cos()),
            ProfileKind::PiecewisePolynomial => {
                self.coefficients.iter().rev().fold(0.0, |acc, c| (acc + c) * v)
            }
        }
    }

    pub fn is_polynomial(&self) -> bool {
        !matches!(self.kind, ProfileKind::RaisedCosine)
    }

    /// Polynomial degree of f̂ on [0, σ] (None for raised-cosine).
    pub fn degree(&self) -> Option<usize> {
        match self.kind {
            ProfileKind::Triangle => Some(1),
            ProfileKind::PiecewisePolynomial => Some(self.coefficients.len()),
            ProfileKind::RaisedCosine => None,
        }
    }
}

/// One term coef · e^{iβw} · w^{-p} of an exp-power representation of f.
#[derive(Clone, Copy, Debug)]
pub struct ExpPowerTerm {
    pub coef: C64,
    pub beta: f64,
    pub power: u32,
}

/// Closed-form rule used for f(z).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Evaluator {
    /// σ (sin πσz / πσz)²
    SincSquared,
    /// σ [sinc a + ½ sinc(a−π) + ½ sinc(a+π)], a = 2πσz
    ShiftedSincs,
    /// Exact exp-power sum with a moment Taylor series near 0.
    PolynomialExp,
}

#[derive(Clone, Debug)]
pub struct TestFunction {
    profile: FourierProfile,
    evaluator: Evaluator,
    // monomial coefficients of f̂ on [0, σ] (polynomial kinds)
    mono: Vec<f64>,
    // ∫_0^σ u^{2k} f̂(u) du, k = 0..
    even_moments: Vec<f64>,
    // exact expansion (polynomial kinds)
    exp_terms: Vec<ExpPowerTerm>,
}

pub fn make_triangle(sigma: f64) -> Result<TestFunction> {
    TestFunction::new(FourierProfile::triangle(sigma))
}

pub fn make_raised_cosine(sigma: f64) -> Result<TestFunction> {
    TestFunction::new(FourierProfile::raised_cosine(sigma))
}

pub fn make_piecewise_polynomial(sigma: f64, coefficients: Vec<f64>) -> Result<TestFunction> {
    TestFunction::new(FourierProfile::piecewise_polynomial(sigma, coefficients))
}

const TAYLOR_TERMS: usize = 40;

impl TestFunction {
    pub fn new(profile: FourierProfile) -> Result<Self> {
        profile.validate()?;
        let evaluator = match profile.kind {
            ProfileKind::Triangle => Evaluator::SincSquared,
            ProfileKind::RaisedCosine => Evaluator::ShiftedSincs,
            ProfileKind::PiecewisePolynomial => Evaluator::PolynomialExp,
        };
        let mut tf = TestFunction {
            profile,
            evaluator,
            mono: vec![],
            even_moments: vec![],
            exp_terms: vec![],
        };
        if tf.profile.is_polynomial() {
            tf.build_polynomial_data();
        }
        Ok(tf)
    }

    fn v_coefficients(&self) -> Vec<f64> {
        // coefficients in v = 1 − u/σ, index = power of v
        match self.profile.kind {
            ProfileKind::Triangle => vec![0.0, 1.0],
            _ => {
                let mut c = vec![0.0];
                c.extend_from_slice(&self.profile.coefficients);
                c
            }
        }
    }

    fn build_polynomial_data(&mut self) {
        let s = self.profile.sigma;
        let cv = self.v_coefficients();
        let d = cv.len() - 1;
        // expand Σ c_k (1 − u/σ)^k into powers of u
        let mut mono = vec![0.0; d + 1];
        for (k, &ck) in cv.iter().enumerate() {
            if ck == 0.0 {
                continue;
            }
            let mut binom = 1.0;
            for j in 0..=k {
                mono[j] += ck * binom * (-1.0 / s).powi(j as i32);
                binom = binom * (k - j) as f64 / (j + 1) as f64;
            }
        }
        let mut moments = Vec::with_capacity(TAYLOR_TERMS);
        for k in 0..TAYLOR_TERMS {
            let e = 2 * k;
            let m: f64 = mono
                .iter()
                .enumerate()
                .map(|(i, a)| a * s.powi((i + e + 1) as i32) / (i + e + 1) as f64)
                .sum();
            moments.push(m);
        }
        // derivatives at 0 and σ
        let mut fact = 1.0;
        let mut terms = Vec::new();
        let beta = 2.0 * PI * s;
        let tpi = C64::new(0.0, 2.0 * PI);
        for m in 0..=d {
            if m > 0 {
                fact *= m as f64;
            }
            let p0 = fact * mono[m];
            let ps = fact * cv[m] * (-1.0 / s).powi(m as i32);
            let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
            let pw = (m + 1) as i32;
            let ip = tpi.powi(-pw);
            let im = (-tpi).powi(-pw);
            if ps != 0.0 {
                terms.push(ExpPowerTerm { coef: ip * (sign * ps), beta, power: pw as u32 });
                terms.push(ExpPowerTerm { coef: im * (sign * ps), beta: -beta, power: pw as u32 });
            }
            let c0 = -(ip + im) * (sign * p0);
            if p0 != 0.0 && c0.norm() > 1e-300 {
                terms.push(ExpPowerTerm { coef: c0, beta: 0.0, power: pw as u32 });
            }
        }
        self.mono = mono;
        self.even_moments = moments;
        self.exp_terms = terms;
    }

    pub fn profile(&self) -> &FourierProfile {
        &self.profile
    }

    pub fn evaluator(&self) -> Evaluator {
        self.evaluator
    }

    pub fn sigma(&self) -> f64 {
        self.profile.sigma
    }

    pub fn fhat(&self, u: f64) -> f64 {
        self.profile.fhat(u)
    }

    /// f(z) at complex z.
    pub fn eval(&self, z: C64) -> C64 {
        let s = self.profile.sigma;
        match self.evaluator {
            Evaluator::SincSquared => {
                let t = sinc(z * (PI * s));
                t * t * s
            }
            Evaluator::ShiftedSincs => {
                let a = z * (2.0 * PI * s);
                (sinc(a) + (sinc(a - PI) + sinc(a + PI)) * 0.5) * s
            }
            Evaluator::PolynomialExp => {
                if (z * (2.0 * PI * s)).norm() < 2.0 {
                    let w2 = (z * (2.0 * PI)).powi(2);
                    let mut acc = C64::new(0.0, 0.0);
                    let mut pw = C64::new(1.0, 0.0);
                    let mut fact = 1.0;
                    for (k, m) in self.even_moments.iter().enumerate() {
                        if k > 0 {
                            pw = -pw * w2;
                            fact *= ((2 * k - 1) * (2 * k)) as f64;
                        }
                        acc += pw * (m / fact);
                    }
                    acc * 2.0
                } else {
                    eval_terms(&self.exp_terms, z)
                }
            }
        }
    }

    pub fn eval_real(&self, x: f64) -> f64 {
        self.eval(C64::new(x, 0.0)).re
    }

    /// ∫ f = f̂(0).
    pub fn integral_f(&self) -> f64 {
        self.profile.fhat(0.0)
    }

    /// ∫ f̂ = f(0).
    pub fn integral_fhat(&self) -> f64 {
        let s = self.profile.sigma;
        match self.profile.kind {
            ProfileKind::Triangle | ProfileKind::RaisedCosine => s,
            ProfileKind::PiecewisePolynomial => {
                2.0 * s
                    * self
                        .profile
                        .coefficients
                        .iter()
                        .enumerate()
                        .map(|(i, c)| c / (i + 2) as f64)
                        .sum::<f64>()
            }
        }
    }

    /// Power p of the slowest-decaying term: |f(x+iy)| = O(|x|^{-p}).
    pub fn decay_exponent(&self) -> u32 {
        match self.profile.kind {
            ProfileKind::RaisedCosine => 3,
            _ => self.exp_terms.iter().map(|t| t.power).min().unwrap_or(2),
        }
    }

    /// Exp-power representation f(w) = Σ coef e^{iβw} w^{-p}, valid (to double
    /// precision) for |w| ≥ `min_abs`. Exact for polynomial kinds (w ≠ 0);
    /// for raised-cosine requires min_abs > 1/(2σ).
    pub fn exp_power_terms(&self, min_abs: f64) -> Result<Vec<ExpPowerTerm>> {
        match self.profile.kind {
            ProfileKind::RaisedCosine => {
                let s = self.profile.sigma;
                let a = 4.0 * s * s;
                let ratio = 1.0 / (a * min_abs * min_abs);
                if ratio >= 0.5 {
                    return domain(format!(
                        "asymptotic radius {min_abs} too small for raised-cosine σ={s}"
                    ));
                }
                let kmax = ((1e-18f64).ln() / ratio.ln()).ceil().max(1.0) as u32;
                let beta = 2.0 * PI * s;
                let inv = C64::new(0.0, 1.0 / (4.0 * PI)); // 1/(4πi) = −i/(4π)
                let mut out = Vec::new();
                for k in 0..kmax {
                    let c = a.powi(-(k as i32) - 1);
                    out.push(ExpPowerTerm { coef: inv * c, beta, power: 3 + 2 * k });
                    out.push(ExpPowerTerm { coef: -inv * c, beta: -beta, power: 3 + 2 * k });
                }
                Ok(out)
            }
            _ => Ok(self.exp_terms.clone()),
        }
    }
}

/// Σ coef e^{iβw} w^{-p}.
pub fn eval_terms(terms: &[ExpPowerTerm], w: C64) -> C64 {
    let inv = w.inv();
    let mut acc = C64::new(0.0, 0.0);
    for t in terms {
        acc += t.coef * (C64::new(0.0, t.beta) * w).exp() * inv.powi(t.power as i32);
    }
    acc
}

/// ∫ |u| f̂_a(u) f̂_b(u) du = 2∫_0^{min σ} u f̂_a f̂_b du.
pub fn integral_abs_u_pair(fa: &TestFunction, fb: &TestFunction) -> Result<f64> {
    let hi = fa.sigma().min(fb.sigma());
    match (fa.profile.degree(), fb.profile.degree()) {
        (Some(da), Some(db)) => {
            // polynomial of degree da + db + 1: Gauss–Legendre is exact
            let n = (da + db + 2) / 2 + 1;
            let gl = GaussLegendre::new(n);
            Ok(2.0 * gl.integrate(0.0, hi, |u| u * fa.fhat(u) * fb.fhat(u)))
        }
        _ => {
            let r = quad::adaptive(|u| u * fa.fhat(u) * fb.fhat(u), 0.0, hi, &[], 1e-13, 1e-13)?;
            Ok(2.0 * r.value)
        }
    }
}

/// Ordered list of factors f_1 … f_n with its Fourier support class.
#[derive(Clone, Debug)]
pub struct TestFunctionProduct {
    factors: Vec<TestFunction>,
    total_support: f64,
    support_class: Option<u8>,
}

impl TestFunctionProduct {
    /// Validated product for the analytic methods: n ≥ 1, Σσ < 3.
    pub fn new(factors: Vec<TestFunction>) -> Result<Self> {
        if factors.is_empty() {
            return domain("product needs at least one factor");
        }
        let p = Self::unrestricted(factors);
        if p.support_class.is_none() {
            return domain(format!(
                "total support {} ≥ 3: no implemented formula is valid",
                p.total_support
            ));
        }
        Ok(p)
    }

    /// Any support (Monte Carlo only); support_class is None when Σσ ≥ 3.
    pub fn unrestricted(factors: Vec<TestFunction>) -> Self {
        let total_support: f64 = factors.iter().map(|f| f.sigma()).sum();
        let support_class = if total_support <= 1.0 {
            Some(1)
        } else if total_support <= 2.0 {
            Some(2)
        } else if total_support < 3.0 {
            Some(3)
        } else {
            None
        };
        TestFunctionProduct { factors, total_support, support_class }
    }

    /// The n = 0 product (empty-product conventions).
    pub fn empty() -> Self {
        TestFunctionProduct { factors: vec![], total_support: 0.0, support_class: Some(1) }
    }

    pub fn from_profiles(profiles: &[FourierProfile]) -> Result<Self> {
        let fs = profiles.iter().cloned().map(TestFunction::new).collect::<Result<Vec<_>>>()?;
        Self::new(fs)
    }

    pub fn factors(&self) -> &[TestFunction] {
        &self.factors
    }

    pub fn n(&self) -> usize {
        self.factors.len()
    }

    pub fn total_support(&self) -> f64 {
        self.total_support
    }

    pub fn support_class(&self) -> Option<u8> {
        self.support_class
    }

    pub fn sigmas(&self) -> Vec<f64> {
        self.factors.iter().map(|f| f.sigma()).collect()
    }
}
