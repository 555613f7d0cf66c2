//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use std::f64::consts::PI;

/// Triangle profile f̂(u) = (1 − |u|/σ)₊.
pub fn tri(sigma: f64, u: f64) -> f64 {
    (1.0 - u.abs() / sigma).max(0.0)
}

/// Finite-N one-level statistic from the trace moments of USp(2N):
/// E[Tr Uᵐ] = −1 for even 1 ≤ m ≤ 2N, 0 for other m ≥ 1. With
/// F(Nθ/π) = Σ_m f̂(m/2N)/(2N) e^{imθ} this gives ∫f − (1/N)Σ_{k=1}^N f̂(k/N).
pub fn one_level_moments(sigma: f64, n_half: usize) -> f64 {
    let n = n_half as f64;
    1.0 - (1..=n_half).map(|k| tri(sigma, k as f64 / n)).sum::<f64>() / n
}

// periodized triangle test function at x (period 2N), as a cosine series
fn periodized(sigma: f64, n_half: usize, x: f64) -> f64 {
    let p = 2.0 * n_half as f64;
    let m = (sigma * p).floor() as i64;
    (-m..=m).map(|k| tri(sigma, k as f64 / p) * (2.0 * PI * k as f64 * x / p).cos()).sum::<f64>() / p
}

/// E[Π_i 2Σ_j F_i(Nθ_j/π)] by brute-force integration over the Weyl density
/// ∝ Π_{j<k}(cos θ_j − cos θ_k)² Π sin² θ_j on [0, π]^N (midpoint rule, exact
/// for these trigonometric polynomials once the grid is fine enough). N ≤ 3.
pub fn weyl_exact(sigmas: &[f64], n_half: usize) -> f64 {
    assert!((1..=3).contains(&n_half));
    let g = 96;
    let th: Vec<f64> = (0..g).map(|i| (i as f64 + 0.5) * PI / g as f64).collect();
    let fvals: Vec<Vec<f64>> = sigmas
        .iter()
        .map(|&s| th.iter().map(|&t| periodized(s, n_half, n_half as f64 * t / PI)).collect())
        .collect();
    let mut num = 0.0;
    let mut den = 0.0;
    let mut idx = vec![0usize; n_half];
    loop {
        let mut w = 1.0;
        for a in 0..n_half {
            w *= th[idx[a]].sin().powi(2);
            for b in a + 1..n_half {
                w *= (th[idx[a]].cos() - th[idx[b]].cos()).powi(2);
            }
        }
        let mut stat = 1.0;
        for fv in &fvals {
            stat *= 2.0 * idx.iter().map(|&i| fv[i]).sum::<f64>();
        }
        num += w * stat;
        den += w;
        let mut k = 0;
        loop {
            if k == n_half {
                return num / den;
            }
            idx[k] += 1;
            if idx[k] < g {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
    }
}

/// Finite-N Lemma 1 LHS: (1/N²) Σ_{k≥1} k f̂₁(k/2N) f̂₂(k/2N), from
/// (z'/z)'(x) = Σ k e^{−kx}.
pub fn lemma1_finite(s1: f64, s2: f64, n_half: usize) -> f64 {
    let n = n_half as f64;
    (1..=(4 * n_half * 4)).map(|k| k as f64 * tri(s1, k as f64 / (2.0 * n)) * tri(s2, k as f64 / (2.0 * n))).sum::<f64>()
        / (n * n)
}

/// Finite-N Lemma 2 LHS: −(1/N) Σ_{k≥1} f̂(k/N).
pub fn lemma2_finite(s: f64, n_half: usize) -> f64 {
    let n = n_half as f64;
    -(1..=(4 * n_half)).map(|k| tri(s, k as f64 / n)).sum::<f64>() / n
}

/// Finite-N Lemma 4 LHS for A = ∅, B = {1}: (1/N) Σ_{j≥1} f̂(1 + j/N).
pub fn lemma4_single_finite(s: f64, n_half: usize) -> f64 {
    let n = n_half as f64;
    (1..=(4 * n_half)).map(|j| tri(s, 1.0 + j as f64 / n)).sum::<f64>() / n
}

/// Least-squares slope of log y against log x.
pub fn loglog_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}
