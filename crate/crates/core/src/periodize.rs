//! Periodization of a test function along a horizontal line:
//! F(x) = Σ_k f(x + kP + iy), sampled on a uniform grid of one period.
//!
//! Two independent routes: the Fourier series (Poisson summation, exact since
//! f̂ has compact support) and a direct image sum of the complex evaluator
//! with an asymptotic tail.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::special::horizontal_tail;
use crate::testfn::{ExpPowerTerm, TestFunction};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Periodization {
    #[default]
    FourierSeries,
    ImageSum,
}

/// Direct images |k| ≤ this; the rest comes from the exp-power tail.
const DIRECT_IMAGES: i64 = 64;

/// Highest Fourier mode of F: ⌊σP⌋.
pub fn bandwidth(f: &TestFunction, period: f64) -> usize {
    (f.sigma() * period).floor() as usize
}

/// F(jP/L + iy), j = 0..L.
pub fn periodized_samples(
    f: &TestFunction,
    period: f64,
    y: f64,
    l: usize,
    method: Periodization,
) -> Result<Vec<C64>> {
    match method {
        Periodization::FourierSeries => by_fourier_series(f, period, y, l),
        Periodization::ImageSum => by_images(f, period, y, l),
    }
}

fn by_fourier_series(f: &TestFunction, period: f64, y: f64, l: usize) -> Result<Vec<C64>> {
    let m = bandwidth(f, period);
    if l <= 2 * m {
        return domain(format!("{l} samples alias a band of {} modes", 2 * m + 1));
    }
    // F(x) = (1/P) Σ_{|m|≤M} f̂(m/P) e^{−2πmy/P} e^{2πimx/P}
    let mut buf = vec![C64::new(0.0, 0.0); l];
    for k in -(m as i64)..=(m as i64) {
        let u = k as f64 / period;
        let c = f.fhat(u) * (-2.0 * PI * k as f64 * y / period).exp() / period;
        buf[k.rem_euclid(l as i64) as usize] += C64::new(c, 0.0);
    }
    FftPlanner::new().plan_fft_inverse(l).process(&mut buf);
    Ok(buf)
}

fn by_images(f: &TestFunction, period: f64, y: f64, l: usize) -> Result<Vec<C64>> {
    let k0 = DIRECT_IMAGES;
    let min_abs = 0.5 * k0 as f64 * period;
    let terms = f.exp_power_terms(min_abs)?;
    let mut out = Vec::with_capacity(l);
    for j in 0..l {
        let w = C64::new(j as f64 * period / l as f64, y);
        let mut s = C64::new(0.0, 0.0);
        for k in -k0..=k0 {
            s += f.eval(w + period * k as f64);
        }
        // f even: the k < −K₀ images are the k > K₀ images of −w
        s += tail(&terms, w, period, k0) + tail(&terms, -w, period, k0);
        out.push(s);
    }
    Ok(out)
}

// Σ_{k>K₀} f(w + kP) from the exp-power expansion of f.
fn tail(terms: &[ExpPowerTerm], w: C64, period: f64, k0: i64) -> C64 {
    let a = (k0 + 1) as f64;
    let mut total = C64::new(0.0, 0.0);
    for t in terms {
        let theta = wrap(t.beta * period);
        let lead = t.coef * (C64::new(0.0, t.beta) * w).exp();
        let s = if theta.abs() <= 1.0 {
            euler_maclaurin(theta, w, period, t.power, a)
        } else {
            euler_transform(theta, w, period, t.power, a)
        };
        total += lead * s;
    }
    total
}

fn wrap(x: f64) -> f64 {
    let r = x.rem_euclid(2.0 * PI);
    if r > PI {
        r - 2.0 * PI
    } else {
        r
    }
}

// k-th derivative of h(k) = e^{iθk}(w + kP)^{−p} at k = a, for m = 0..=mmax.
fn h_derivatives(theta: f64, w: C64, period: f64, p: u32, a: f64, mmax: usize) -> Vec<C64> {
    let base = w + period * a;
    let e = C64::new(0.0, theta * a).exp();
    // d^j/dk^j (w+kP)^{−p} = (−p)(−p−1)…(−p−j+1) P^j base^{−p−j}
    let mut g = Vec::with_capacity(mmax + 1);
    let mut coef = 1.0;
    for j in 0..=mmax {
        g.push(base.powi(-(p as i32) - j as i32) * coef);
        coef *= -(p as f64 + j as f64) * period;
    }
    let it = C64::new(0.0, theta);
    (0..=mmax)
        .map(|m| {
            let mut s = C64::new(0.0, 0.0);
            let mut binom = 1.0;
            for j in 0..=m {
                s += g[j] * it.powi((m - j) as i32) * binom;
                binom = binom * (m - j) as f64 / (j + 1) as f64;
            }
            e * s
        })
        .collect()
}

// Σ_{k≥a} h(k) = ∫_a^∞ h + h(a)/2 − Σ B_{2j}/(2j)! h^{(2j−1)}(a)
fn euler_maclaurin(theta: f64, w: C64, period: f64, p: u32, a: f64) -> C64 {
    const B: [f64; 4] = [1.0 / 12.0, -1.0 / 720.0, 1.0 / 30240.0, -1.0 / 1209600.0];
    let d = h_derivatives(theta, w, period, p, a, 7);
    let integral = horizontal_tail(theta / period, w + period * a, p)
        * C64::new(0.0, -theta * w.re / period).exp()
        * (theta * w.im / period).exp()
        / period;
    let mut s = integral + d[0] * 0.5;
    for (j, b) in B.iter().enumerate() {
        s -= d[2 * j + 1] * *b;
    }
    s
}

// Σ_{k≥a} ζ^k g(k) = ζ^a/(1−ζ) Σ_j (ζ/(1−ζ))^j Δ^j g(a), ζ = e^{iθ}
fn euler_transform(theta: f64, w: C64, period: f64, p: u32, a: f64) -> C64 {
    const J: usize = 12;
    let zeta = C64::new(0.0, theta).exp();
    let mut diffs: Vec<C64> = (0..=J).map(|k| (w + period * (a + k as f64)).powi(-(p as i32))).collect();
    let r = zeta / (C64::new(1.0, 0.0) - zeta);
    let mut s = C64::new(0.0, 0.0);
    let mut rp = C64::new(1.0, 0.0);
    for j in 0..=J {
        s += rp * diffs[0];
        rp *= r;
        for k in 0..J - j {
            diffs[k] = diffs[k + 1] - diffs[k];
        }
    }
    C64::new(0.0, theta * a).exp() / (C64::new(1.0, 0.0) - zeta) * s
}
