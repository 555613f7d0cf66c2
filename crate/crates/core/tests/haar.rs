use std::f64::consts::PI;

use symplectic_nlevel::detform::{kernel, KernelSpec};
use symplectic_nlevel::haar::*;
use symplectic_nlevel::stats::{chi_square, ks_test};
use symplectic_nlevel::testfn::*;

fn tri(s: f64) -> TestFunction {
    make_triangle(s).unwrap()
}

#[test]
fn structure_invariants() {
    for &n in &[1usize, 2, 5, 16] {
        for i in 0..40 {
            let s = sample_usp_indexed(n, 3, i).unwrap();
            assert!(s.unitarity_defect() < 1e-10);
            assert!(s.symplectic_defect() < 1e-10);
            assert!((s.determinant() - 1.0).norm() < 1e-8);
            let set = eigenangles(&s).unwrap();
            assert_eq!(set.angles().len(), n);
            assert!(set.angles().windows(2).all(|w| w[0] <= w[1]));
            assert!(set.angles().iter().all(|&t| (0.0..=PI).contains(&t)));
            let fast = eigenangles_fast(&s);
            for (a, b) in set.angles().iter().zip(fast.angles()) {
                assert!((a - b).abs() < 1e-12);
            }
        }
    }
    assert!(sample_usp(0, 1).is_err());
    assert!(sample_usp(MAX_N + 1, 1).is_err());
}

#[test]
fn constructed_inputs() {
    let s = SymplecticUnitarySample::from_angles(&[PI / 3.0, PI / 3.0, PI / 3.0]).unwrap();
    for t in eigenangles(&s).unwrap().angles() {
        assert!((t - PI / 3.0).abs() < 1e-8);
    }
    let s = SymplecticUnitarySample::from_angles(&[2.0, 0.5]).unwrap();
    let set = eigenangles(&s).unwrap();
    assert!((set.angles()[0] - 0.5).abs() < 1e-12 && (set.angles()[1] - 2.0).abs() < 1e-12);
    let m = s.matrix();
    let back = SymplecticUnitarySample::from_matrix(&m).unwrap();
    assert!((back.matrix() - m).norm() < 1e-14);
}

#[test]
fn extended_indexing_follows_the_case_table() {
    let set = EigenangleSet::new(vec![0.5, 2.0]).unwrap();
    assert_eq!(extended_angle(&set, 1).unwrap(), 0.5);
    assert_eq!(extended_angle(&set, 2).unwrap(), 2.0);
    assert_eq!(extended_angle(&set, -1).unwrap(), -0.5);
    // r = −2, k = 1 (index r + 2kN + 1 = 3) and r = −1, k = 1 (index 4)
    assert!((extended_angle(&set, 3).unwrap() - (2.0 * PI - 2.0)).abs() < 1e-15);
    assert!((extended_angle(&set, 4).unwrap() - (2.0 * PI - 0.5)).abs() < 1e-15);
    // r = 1, k = 1 (index 5)
    assert!((extended_angle(&set, 5).unwrap() - (2.0 * PI + 0.5)).abs() < 1e-15);
    assert!(extended_angle(&set, 0).is_err());
    // monotone in j and odd under j → −j, for a Haar draw
    let set = eigenangles(&sample_usp(5, 9).unwrap()).unwrap();
    let seq: Vec<f64> = (1..=60).map(|j| extended_angle(&set, j).unwrap()).collect();
    assert!(seq.windows(2).all(|w| w[0] <= w[1]));
    for j in 1..=60 {
        assert_eq!(extended_angle(&set, -j).unwrap(), -extended_angle(&set, j).unwrap());
    }
    // every (r, k) with |k| ≤ 3 appears once among |j| ≤ 4·2N
    let mut all: Vec<f64> = (1..=40).flat_map(|j| [extended_angle(&set, j).unwrap(), extended_angle(&set, -j).unwrap()]).collect();
    all.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut want: Vec<f64> = Vec::new();
    for k in -4..4 {
        for &t in set.angles() {
            want.push(t + 2.0 * PI * k as f64);
            want.push(-t + 2.0 * PI * (k + 1) as f64);
        }
    }
    want.sort_by(|a, b| a.partial_cmp(b).unwrap());
    for (a, b) in all.iter().zip(&want) {
        assert!((a - b).abs() < 1e-12);
    }
}

#[test]
fn empirical_statistic_examples() {
    let set = EigenangleSet::new(vec![PI / 2.0, PI]).unwrap();
    let p = TestFunctionProduct::new(vec![tri(1.0)]).unwrap();
    assert!(empirical_n_level(&set, &p, 0).abs() < 1e-15);
    let set = eigenangles(&sample_usp(8, 2).unwrap()).unwrap();
    let a = TestFunctionProduct::new(vec![tri(0.7)]).unwrap();
    let b = TestFunctionProduct::new(vec![tri(1.1)]).unwrap();
    let ab = TestFunctionProduct::new(vec![tri(0.7), tri(1.1)]).unwrap();
    let prod = empirical_n_level(&set, &a, 4) * empirical_n_level(&set, &b, 4);
    assert!((empirical_n_level(&set, &ab, 4) - prod).abs() < 1e-14 * prod.abs().max(1.0));
}

#[test]
fn image_truncation_tail_is_bounded() {
    // |f(x)| ≤ 1/(π²σx²): the images beyond K contribute at most
    // 2N · 2 Σ_{k>K} 1/(π²σ(2N(k − ½))²) to the one-level sum.
    let n = 16usize;
    let sigma = 1.0;
    let f = TestFunctionProduct::new(vec![tri(sigma)]).unwrap();
    let nf = n as f64;
    let bound: f64 = 2.0
        * nf
        * 2.0
        * (4..100_000).map(|k| 1.0 / (PI * PI * sigma * (2.0 * nf * (k as f64 - 0.5)).powi(2))).sum::<f64>();
    let mut worst: f64 = 0.0;
    for i in 0..50 {
        let set = eigenangles_fast(&sample_usp_indexed(n, 4, i).unwrap());
        let d = (empirical_n_level(&set, &f, 3) - empirical_n_level(&set, &f, 10)).abs();
        worst = worst.max(d);
    }
    assert!(worst <= bound, "{worst} > {bound}");
}

#[test]
fn one_level_law_n1() {
    let thetas: Vec<f64> = (0..10_000).map(|i| eigenangles_fast(&sample_usp_indexed(1, 5, i).unwrap()).angles()[0]).collect();
    let (_, p) = ks_test(&thetas, |t| (t - t.sin() * t.cos()) / PI);
    assert!(p > 0.01, "KS p = {p}");
}

#[test]
fn one_point_density_n4() {
    let n = 4;
    let bins = 40;
    let samples = 100_000;
    let mut counts = vec![0.0; bins];
    let table = for_each_sample(n, samples, 6, 0, n, |set, row| row.copy_from_slice(set.angles())).unwrap();
    for t in table {
        counts[((t / PI * bins as f64) as usize).min(bins - 1)] += 1.0;
    }
    let spec = KernelSpec::finite(n).unwrap();
    let expected: Vec<f64> = (0..bins)
        .map(|b| {
            let (a, c) = (PI * b as f64 / bins as f64, PI * (b + 1) as f64 / bins as f64);
            let m = 200;
            let h = (c - a) / m as f64;
            let s: f64 = (0..m).map(|i| kernel(&spec, a + (i as f64 + 0.5) * h, a + (i as f64 + 0.5) * h)).sum();
            s * h * samples as f64
        })
        .collect();
    let (_, p) = chi_square(&counts, &expected, bins - 1);
    assert!(p > 0.01, "χ² p = {p}");
}

#[test]
fn trace_moments() {
    // E[Tr U] = 0 and E[Tr U²] = −1 for USp(2N), N ≥ 1
    let n = 16;
    let m = 10_000;
    let table = for_each_sample(n, m, 7, 0, 2, |set, row| {
        row[0] = set.angles().iter().map(|t| 2.0 * t.cos()).sum();
        row[1] = set.angles().iter().map(|t| 2.0 * (2.0 * t).cos()).sum();
    })
    .unwrap();
    let tr1: Vec<f64> = table.iter().step_by(2).copied().collect();
    let tr2: Vec<f64> = table.iter().skip(1).step_by(2).copied().collect();
    let (m1, se1) = mean_and_se(&tr1);
    let (m2, se2) = mean_and_se(&tr2);
    assert!(m1.abs() < 3.0 * se1 + 1e-3, "{m1} ± {se1}");
    assert!((m2 + 1.0).abs() < 3.0 * se2 + 1e-3, "{m2} ± {se2}");
}

#[test]
fn weyl_rejection_agrees_with_qr_sampler() {
    let mut rng = substream(8, 0);
    let w: Vec<f64> = (0..4000).map(|_| weyl_rejection_sample(3, &mut rng).unwrap().angles()[0]).collect();
    let q: Vec<f64> = (0..4000).map(|i| eigenangles_fast(&sample_usp_indexed(3, 8, i).unwrap()).angles()[0]).collect();
    // two-sample KS through the empirical CDF of the rejection draws
    let mut ws = w.clone();
    ws.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let ecdf = |x: f64| ws.partition_point(|&v| v <= x) as f64 / ws.len() as f64;
    let (d, _) = ks_test(&q, ecdf);
    // critical value at α = 0.001 for equal sizes: 1.95·sqrt(2/n)
    assert!(d < 1.95 * (2.0 / 4000.0f64).sqrt(), "D = {d}");
    assert!(weyl_rejection_sample(4, &mut rng).is_err());
}

#[test]
fn monte_carlo_contract() {
    let p = TestFunctionProduct::new(vec![tri(0.9)]).unwrap();
    let est = mc_n_level(32, &p, 20_000, 11).unwrap();
    assert!((est.value - 0.55).abs() <= 3.0 * est.std_error + 0.5 / 32.0, "{est:?}");
    assert_eq!(est.samples, 20_000);
    let two = mc_n_level(8, &p, 2, 1).unwrap();
    assert!(two.std_error.is_finite() && two.std_error > 0.0);
    assert!(mc_n_level(8, &p, 1, 1).is_err());
    let a = mc_n_level(8, &p, 500, 42).unwrap();
    let b = mc_n_level(8, &p, 500, 42).unwrap();
    assert_eq!(a.value.to_bits(), b.value.to_bits());
    let opts1 = McOptions { threads: 1, ..Default::default() };
    let opts3 = McOptions { threads: 3, ..Default::default() };
    let c = mc_n_level_many(8, std::slice::from_ref(&p), 500, 42, &opts1).unwrap();
    let d = mc_n_level_many(8, std::slice::from_ref(&p), 500, 42, &opts3).unwrap();
    assert_eq!(c[0].value.to_bits(), d[0].value.to_bits());
    assert_eq!(c[0].value.to_bits(), a.value.to_bits());
}
