//! Haar sampling on USp(2N), eigenangles with their periodic extension, and
//! the Monte Carlo n-level estimator.
//!
//! A sample is kept in quaternionic form: an N×N matrix over the quaternions
//! whose columns come from modified Gram–Schmidt on a quaternionic Ginibre
//! draw. Coefficients multiply from the right, which makes the triangular
//! factor's diagonal real and positive, so the orthonormal factor is exactly
//! Haar on Sp(N) ≅ USp(2N) with no phase fix-up.

pub mod quat;

use std::f64::consts::PI;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{domain, Error, Result};
pub use crate::estimate::{DensityEstimate, Method};
use crate::quad::pairwise_sum;
use crate::testfn::{TestFunction, TestFunctionProduct};
use quat::{QMat, Quat};

pub const MAX_N: usize = 256;
pub const DEFAULT_K_MAX: usize = 4;
pub const PAIRING_TOL: f64 = 1e-8;

#[derive(Clone, Debug)]
pub struct SymplecticUnitarySample {
    n_half: usize,
    seed: u64,
    stream: u64,
    q: QMat,
}

/// Deterministic RNG for sample `index` of a run seeded with `seed`.
pub fn substream(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

fn gaussian_quat(rng: &mut ChaCha8Rng) -> Quat {
    Quat([
        rng.sample(StandardNormal),
        rng.sample(StandardNormal),
        rng.sample(StandardNormal),
        rng.sample(StandardNormal),
    ])
}

// Modified Gram–Schmidt on the columns `cols[j]`; None if a column collapses.
fn orthonormalize(cols: &mut [Vec<Quat>]) -> Option<()> {
    for j in 0..cols.len() {
        let (done, rest) = cols.split_at_mut(j);
        let vj = &mut rest[0];
        for qk in done.iter() {
            let mut c = Quat::ZERO;
            for (a, b) in qk.iter().zip(vj.iter()) {
                c += a.conj() * *b;
            }
            for (a, b) in qk.iter().zip(vj.iter_mut()) {
                *b -= *a * c;
            }
        }
        let nrm = vj.iter().map(|q| q.norm_sqr()).sum::<f64>().sqrt();
        if !(nrm > 1e-150) {
            return None;
        }
        for b in vj.iter_mut() {
            *b = b.scale(1.0 / nrm);
        }
    }
    Some(())
}

/// One Haar draw from USp(2N) (substream 0 of `seed`).
pub fn sample_usp(n_half: usize, seed: u64) -> Result<SymplecticUnitarySample> {
    sample_usp_indexed(n_half, seed, 0)
}

/// Haar draw number `index` of the run seeded with `seed`.
pub fn sample_usp_indexed(n_half: usize, seed: u64, index: u64) -> Result<SymplecticUnitarySample> {
    if n_half == 0 || n_half > MAX_N {
        return domain(format!("N must be in 1..={MAX_N}, got {n_half}"));
    }
    let mut rng = substream(seed, index);
    loop {
        let mut cols: Vec<Vec<Quat>> = (0..n_half)
            .map(|_| (0..n_half).map(|_| gaussian_quat(&mut rng)).collect())
            .collect();
        if orthonormalize(&mut cols).is_some() {
            let mut m = QMat::zeros(n_half);
            for (j, col) in cols.iter().enumerate() {
                for (i, q) in col.iter().enumerate() {
                    m.set(i, j, *q);
                }
            }
            return Ok(SymplecticUnitarySample { n_half, seed, stream: index, q: m });
        }
        log::warn!("numerically singular Ginibre draw (seed {seed}, index {index}); resampling");
    }
}

impl SymplecticUnitarySample {
    /// Block-diagonal test matrix with eigenvalues e^{±iθ_j}.
    pub fn from_angles(angles: &[f64]) -> Result<Self> {
        if angles.is_empty() || angles.len() > MAX_N {
            return domain("angle list length must be in 1..=256");
        }
        let n = angles.len();
        let mut q = QMat::zeros(n);
        for (j, &t) in angles.iter().enumerate() {
            q.set(j, j, Quat([t.cos(), t.sin(), 0.0, 0.0]));
        }
        Ok(SymplecticUnitarySample { n_half: n, seed: 0, stream: 0, q })
    }

    /// Reads a 2N×2N complex matrix of the block form [[A, B], [−B̄, Ā]].
    pub fn from_matrix(m: &DMatrix<C64>) -> Result<Self> {
        let n2 = m.nrows();
        if n2 != m.ncols() || n2 % 2 == 1 || n2 == 0 {
            return domain("matrix must be square with even dimension");
        }
        let n = n2 / 2;
        let mut q = QMat::zeros(n);
        for i in 0..n {
            for k in 0..n {
                q.set(i, k, Quat::from_complex_pair(m[(i, k)], m[(i, k + n)]));
            }
        }
        let s = SymplecticUnitarySample { n_half: n, seed: 0, stream: 0, q };
        let back = s.matrix();
        let dev = (&back - m).iter().map(|z| z.norm()).fold(0.0, f64::max);
        if dev > 1e-10 {
            return domain(format!("matrix is not of quaternionic block form (defect {dev:.2e})"));
        }
        Ok(s)
    }

    pub fn n_half(&self) -> usize {
        self.n_half
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream(&self) -> u64 {
        self.stream
    }

    pub fn quaternionic(&self) -> &QMat {
        &self.q
    }

    /// Complex 2N×2N form U = [[A, B], [−B̄, Ā]].
    pub fn matrix(&self) -> DMatrix<C64> {
        let n = self.n_half;
        let mut u = DMatrix::zeros(2 * n, 2 * n);
        for i in 0..n {
            for k in 0..n {
                let (a, b) = self.q.get(i, k).to_complex_pair();
                u[(i, k)] = a;
                u[(i, k + n)] = b;
                u[(i + n, k)] = -b.conj();
                u[(i + n, k + n)] = a.conj();
            }
        }
        u
    }

    /// max |U*U − I|
    pub fn unitarity_defect(&self) -> f64 {
        let u = self.matrix();
        let g = u.adjoint() * &u;
        let id = DMatrix::<C64>::identity(u.nrows(), u.ncols());
        (g - id).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// max |UᵀJU − J| with J = [[0, I], [−I, 0]].
    pub fn symplectic_defect(&self) -> f64 {
        let u = self.matrix();
        let j = skew_form(self.n_half);
        let g = u.transpose() * &j * &u;
        (g - j).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn determinant(&self) -> C64 {
        self.matrix().determinant()
    }

    /// All 2N eigenvalues of the complex form (dense Schur; validation path).
    pub fn eigenvalues(&self) -> Result<Vec<C64>> {
        let u = self.matrix();
        let schur = nalgebra::Schur::try_new(u, 1e-15, 10_000).ok_or_else(|| Error::Numerical {
            what: "Schur decomposition did not converge".into(),
            achieved: f64::NAN,
        })?;
        let ev = schur.eigenvalues().ok_or_else(|| Error::Numerical {
            what: "Schur form is not triangular".into(),
            achieved: f64::NAN,
        })?;
        Ok(ev.iter().copied().collect())
    }
}

pub fn skew_form(n: usize) -> DMatrix<C64> {
    let mut j = DMatrix::zeros(2 * n, 2 * n);
    for i in 0..n {
        j[(i, i + n)] = C64::new(1.0, 0.0);
        j[(i + n, i)] = C64::new(-1.0, 0.0);
    }
    j
}

/// N principal eigenangles, sorted, in [0, π].
#[derive(Clone, Debug, PartialEq)]
pub struct EigenangleSet {
    angles: Vec<f64>,
}

impl EigenangleSet {
    pub fn new(mut angles: Vec<f64>) -> Result<Self> {
        if angles.is_empty() {
            return domain("eigenangle set must be nonempty");
        }
        if angles.iter().any(|t| !(0.0..=PI).contains(t)) {
            return domain("eigenangles must lie in [0, π]");
        }
        angles.sort_by(|a, b| a.partial_cmp(b).unwrap());
        Ok(EigenangleSet { angles })
    }

    pub fn n_half(&self) -> usize {
        self.angles.len()
    }

    pub fn angles(&self) -> &[f64] {
        &self.angles
    }
}

// Householder reduction of a quaternion-Hermitian matrix to real symmetric
// tridiagonal form (diagonal, |subdiagonal|).
fn hermitian_tridiagonal(mut h: QMat) -> (Vec<f64>, Vec<f64>) {
    let n = h.n;
    let mut diag = vec![0.0; n];
    let mut off = vec![0.0; n.saturating_sub(1)];
    let mut v = vec![Quat::ZERO; n];
    let mut p = vec![Quat::ZERO; n];
    for k in 0..n {
        diag[k] = h.get(k, k).re();
        if k + 1 >= n {
            break;
        }
        let m = n - k - 1;
        let alpha = (k + 1..n).map(|i| h.get(i, k).norm_sqr()).sum::<f64>().sqrt();
        off[k] = alpha;
        if m == 1 || alpha == 0.0 {
            continue;
        }
        let x1 = h.get(k + 1, k);
        let a1 = x1.norm_sqr().sqrt();
        let u = if a1 > 0.0 { x1.scale(1.0 / a1) } else { Quat::ONE };
        for (t, i) in (k + 1..n).enumerate() {
            v[t] = h.get(i, k);
        }
        v[0] = u.scale(a1 + alpha);
        let vv: f64 = v[..m].iter().map(|q| q.norm_sqr()).sum();
        let tau = 2.0 / vv;
        // p = τ S v,  S = H[k+1.., k+1..]
        for r in 0..m {
            let row = &h.data[(k + 1 + r) * n + k + 1..(k + 2 + r) * n];
            let mut s = Quat::ZERO;
            for (a, b) in row.iter().zip(&v[..m]) {
                s += *a * *b;
            }
            p[r] = s.scale(tau);
        }
        let vp: f64 = (0..m).map(|r| (v[r].conj() * p[r]).re()).sum();
        let kk = 0.5 * tau * vp;
        for r in 0..m {
            p[r] -= v[r].scale(kk); // p becomes w
        }
        let vc: Vec<Quat> = v[..m].iter().map(|q| q.conj()).collect();
        let wc: Vec<Quat> = p[..m].iter().map(|q| q.conj()).collect();
        for r in 0..m {
            let (vr, wr) = (v[r], p[r]);
            let row = &mut h.data[(k + 1 + r) * n + k + 1..(k + 2 + r) * n];
            for c in 0..m {
                row[c] -= vr * wc[c] + wr * vc[c];
            }
        }
    }
    (diag, off)
}

/// Eigenangles via the quaternion-Hermitian part (Q + Q*)/2, whose N real
/// eigenvalues are cos θ_j. No cross-check.
pub fn eigenangles_fast(sample: &SymplecticUnitarySample) -> EigenangleSet {
    let n = sample.n_half;
    let q = &sample.q;
    let mut h = QMat::zeros(n);
    for i in 0..n {
        for j in 0..n {
            h.set(i, j, (q.get(i, j) + q.get(j, i).conj()).scale(0.5));
        }
    }
    let (d, e) = hermitian_tridiagonal(h);
    let t = DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            d[i]
        } else if i + 1 == j {
            e[i]
        } else if j + 1 == i {
            e[j]
        } else {
            0.0
        }
    });
    let ev = SymmetricEigen::new(t).eigenvalues;
    let mut angles: Vec<f64> = ev.iter().map(|c| c.clamp(-1.0, 1.0).acos()).collect();
    angles.sort_by(|a, b| a.partial_cmp(b).unwrap());
    EigenangleSet { angles }
}

/// Eigenangles, cross-checked against a dense eigen-decomposition: every
/// eigenvalue e^{iφ} of U must match some ±θ_j within 1e−8.
pub fn eigenangles(sample: &SymplecticUnitarySample) -> Result<EigenangleSet> {
    let set = eigenangles_fast(sample);
    let ev = sample.eigenvalues()?;
    let mut phis: Vec<f64> = ev.iter().map(|z| z.arg().abs()).collect();
    phis.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut worst: f64 = 0.0;
    for (j, &t) in set.angles.iter().enumerate() {
        worst = worst.max((phis[2 * j] - t).abs()).max((phis[2 * j + 1] - t).abs());
    }
    if worst > PAIRING_TOL {
        return Err(Error::Numerical {
            what: "eigenvalues do not pair as e^{±iθ}; symplectic structure lost".into(),
            achieved: worst,
        });
    }
    Ok(set)
}

/// θ_j of the periodically extended sequence (j ≠ 0): index r ∈ {±1..±N}
/// plus a shift 2kπ, with θ_{−r} = −θ_r.
pub fn extended_angle(set: &EigenangleSet, j: i64) -> Result<f64> {
    if j == 0 {
        return domain("extended index j must be nonzero");
    }
    if j < 0 {
        return Ok(-extended_angle(set, -j)?);
    }
    let n = set.n_half() as i64;
    let k = (j - 1).div_euclid(2 * n);
    let off = (j - 1).rem_euclid(2 * n);
    let (r, k) = if off < n {
        // r > 0, k ≥ 0: j = r + 2kN
        (j - 2 * k * n, k)
    } else {
        // r < 0, k > 0: j = r + 2kN + 1
        let k = k + 1;
        (j - 2 * k * n - 1, k)
    };
    let base = set.angles[(r.unsigned_abs() - 1) as usize];
    let theta_r = if r > 0 { base } else { -base };
    Ok(theta_r + 2.0 * PI * k as f64)
}

/// Σ over r = ±1..±N and |k| ≤ K_max of f(N(θ_r + 2πk)/π).
pub fn folded_sum(set: &EigenangleSet, f: &TestFunction, k_max: usize) -> f64 {
    let n = set.n_half() as f64;
    let mut s = 0.0;
    for &t in &set.angles {
        let x = n * t / PI;
        let mut acc = f.eval_real(x);
        for k in 1..=k_max {
            let shift = 2.0 * n * k as f64;
            acc += f.eval_real(x + shift) + f.eval_real(x - shift);
        }
        s += acc;
    }
    2.0 * s
}

/// Σ over all n-tuples of extended indices of Π f_i(N θ_{j_i}/π); the summand
/// factorizes so this is a product of one-level sums.
pub fn empirical_n_level(set: &EigenangleSet, product: &TestFunctionProduct, k_max: usize) -> f64 {
    product.factors().iter().map(|f| folded_sum(set, f, k_max)).product()
}

#[derive(Clone, Debug)]
pub struct McOptions {
    pub k_max: usize,
    /// Worker threads; 0 means all available cores.
    pub threads: usize,
}

impl Default for McOptions {
    fn default() -> Self {
        McOptions { k_max: DEFAULT_K_MAX, threads: 0 }
    }
}

/// Monte Carlo estimate of the n-level statistic.
pub fn mc_n_level(
    n_half: usize,
    product: &TestFunctionProduct,
    num_samples: usize,
    seed: u64,
) -> Result<DensityEstimate> {
    Ok(mc_n_level_many(n_half, std::slice::from_ref(product), num_samples, seed, &McOptions::default())?
        .remove(0))
}

/// Several statistics from one shared set of Haar draws.
pub fn mc_n_level_many(
    n_half: usize,
    products: &[TestFunctionProduct],
    num_samples: usize,
    seed: u64,
    opts: &McOptions,
) -> Result<Vec<DensityEstimate>> {
    if num_samples < 2 {
        return domain("Monte Carlo needs at least 2 samples");
    }
    if n_half == 0 || n_half > MAX_N {
        return domain(format!("N must be in 1..={MAX_N}, got {n_half}"));
    }
    let np = products.len();
    let values = for_each_sample(n_half, num_samples, seed, opts.threads, np, |set, out| {
        for (o, p) in out.iter_mut().zip(products) {
            *o = empirical_n_level(set, p, opts.k_max);
        }
    })?;
    Ok((0..np)
        .map(|pi| {
            let col: Vec<f64> = (0..num_samples).map(|s| values[s * np + pi]).collect();
            let (mean, se) = mean_and_se(&col);
            DensityEstimate {
                value: mean,
                std_error: se,
                n: products[pi].n(),
                n_half,
                method: Method::MonteCarlo,
                samples: num_samples,
            }
        })
        .collect())
}

/// Runs `stat` on the eigenangles of samples 0..num_samples; returns the
/// row-major (sample, width) table. Output is independent of thread count.
pub fn for_each_sample<F>(
    n_half: usize,
    num_samples: usize,
    seed: u64,
    threads: usize,
    width: usize,
    stat: F,
) -> Result<Vec<f64>>
where
    F: Fn(&EigenangleSet, &mut [f64]) + Sync,
{
    let threads = if threads == 0 {
        std::thread::available_parallelism().map(|x| x.get()).unwrap_or(1)
    } else {
        threads
    }
    .max(1);
    let mut values = vec![0.0; num_samples * width];
    let chunk = num_samples.div_ceil(threads).max(1);
    let stat = &stat;
    let results: Vec<Result<()>> = std::thread::scope(|scope| {
        let handles: Vec<_> = values
            .chunks_mut(chunk * width.max(1))
            .enumerate()
            .map(|(ci, out)| {
                scope.spawn(move || -> Result<()> {
                    let start = ci * chunk;
                    for (k, row) in out.chunks_mut(width.max(1)).enumerate() {
                        let s = sample_usp_indexed(n_half, seed, (start + k) as u64)?;
                        let set = eigenangles_fast(&s);
                        stat(&set, row);
                    }
                    Ok(())
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("sampling worker panicked")).collect()
    });
    for r in results {
        r?;
    }
    Ok(values)
}

/// Sample mean and standard error (pairwise summation, index order).
pub fn mean_and_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = pairwise_sum(xs) / n;
    let dev: Vec<f64> = xs.iter().map(|x| (x - mean) * (x - mean)).collect();
    let var = pairwise_sum(&dev) / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Exact Haar eigenangles for N ≤ 3 by rejection from the Weyl density
/// ∝ Π_{j<k}(cos θ_j − cos θ_k)² Π_j sin² θ_j on [0, π]^N.
pub fn weyl_rejection_sample(n_half: usize, rng: &mut ChaCha8Rng) -> Result<EigenangleSet> {
    if n_half == 0 || n_half > 3 {
        return domain("Weyl rejection sampler supports 1 ≤ N ≤ 3");
    }
    let bound = 4f64.powi((n_half * (n_half - 1) / 2) as i32);
    loop {
        let th: Vec<f64> = (0..n_half).map(|_| rng.gen::<f64>() * PI).collect();
        let mut w = 1.0;
        for j in 0..n_half {
            w *= th[j].sin().powi(2);
            for k in j + 1..n_half {
                w *= (th[j].cos() - th[k].cos()).powi(2);
            }
        }
        if rng.gen::<f64>() * bound < w {
            return EigenangleSet::new(th);
        }
    }
}
