mod common;

use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use symplectic_nlevel::combinat::IndexSet;
use symplectic_nlevel::contour::*;
use symplectic_nlevel::jstar::j_star_trunc;
use symplectic_nlevel::periodize::Periodization;
use symplectic_nlevel::testfn::*;
use symplectic_nlevel::Error;

fn tri(s: f64) -> TestFunction {
    make_triangle(s).unwrap()
}

fn product(sigmas: &[f64]) -> TestFunctionProduct {
    TestFunctionProduct::new(sigmas.iter().map(|&s| tri(s)).collect()).unwrap()
}

fn contour_value(n: usize, sigmas: &[f64]) -> f64 {
    let spec = ContourSpec::for_n(n, sigmas.len(), DEFAULT_DELTA_SCALE).unwrap();
    n_level_contour(n, &product(sigmas), &spec).unwrap().value
}

#[test]
fn vertical_line_recovers_residue() {
    // (1/2πi)∫ e^{2πz}/z dz = 1
    let spec = ContourSpec::new(vec![0.1], 200.0, 256).unwrap().with_tol(1e-9);
    let g = |z: C64| (2.0 * std::f64::consts::PI * z).exp() / z;
    let r = vertical_line_integral(&g, 0.1, &spec).unwrap();
    assert!((r.value - 1.0).norm() < 1e-6, "{:?}", r);
    // entire with Gaussian decay on vertical lines: 1/(2√π) for every δ
    let h = |z: C64| (z * z).exp();
    for d in [0.1, 0.7] {
        let r = vertical_line_integral(&h, d, &spec).unwrap();
        assert!((r.value.re - 0.5 / std::f64::consts::PI.sqrt()).abs() < 1e-9, "{:?}", r);
    }
}

#[test]
fn vertical_line_reports_missing_decay() {
    let spec = ContourSpec::new(vec![0.1], 50.0, 256).unwrap();
    let g = |_z: C64| C64::new(1.0, 0.0);
    assert!(matches!(vertical_line_integral(&g, 0.1, &spec), Err(Error::Truncation(_))));
    // algebraic decay is not enough at this tolerance either
    let h = |z: C64| 1.0 / (z * z * (z + 2.0));
    let tight = spec.with_tol(1e-10);
    assert!(matches!(vertical_line_integral(&h, 0.5, &tight), Err(Error::Truncation(_))));
}

#[test]
fn spec_validation() {
    assert!(ContourSpec::new(vec![], 100.0, 256).is_err());
    assert!(ContourSpec::new(vec![0.2, 0.1], 100.0, 256).is_err());
    assert!(ContourSpec::new(vec![0.1], 1.0, 256).is_err());
    assert!(ContourSpec::new(vec![0.1], 100.0, 8).is_err());
    let s = ContourSpec::for_n(32, 2, 0.5).unwrap();
    assert_eq!(s.deltas.len(), 2);
    assert!(s.deltas[0] < s.deltas[1]);
    assert!(s.truncation_t <= 500.0);
}

#[test]
fn specialized_kernels_match_general_sum() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..20 {
        let n = rng.gen_range(2..12);
        let z1 = C64::new(rng.gen_range(0.05..0.6), rng.gen_range(-3.0..3.0));
        let z2 = C64::new(rng.gen_range(0.05..0.6), rng.gen_range(-3.0..3.0));
        for q in 1..=3 {
            let a = j_star_one(n, z1, q);
            let b = j_star_trunc(n, &[z1], q).unwrap();
            assert!((a - b).norm() <= 1e-10 * b.norm().max(1.0), "n=1 q={q}: {a} vs {b}");
            let a = j_star_two(n, z1, z2, q);
            let b = j_star_trunc(n, &[z1, z2], q).unwrap();
            assert!((a - b).norm() <= 1e-10 * b.norm().max(1.0), "n=2 q={q}: {a} vs {b}");
        }
    }
}

#[test]
fn one_level_matches_trace_moment_oracle() {
    for &s in &[0.3, 0.9, 1.5, 2.5] {
        for &n in &[4usize, 16, 64] {
            let v = contour_value(n, &[s]);
            let exact = common::one_level_moments(s, n);
            assert!((v - exact).abs() < 1e-9, "σ={s} N={n}: {v} vs {exact}");
        }
    }
    // the spec's reference numbers for σ = 0.9
    for (n, e) in [(16, 0.5807291667), (32, 0.5655381944), (64, 0.5577799479)] {
        assert!((contour_value(n, &[0.9]) - e).abs() < 1e-9);
    }
}

#[test]
fn image_sum_periodization_agrees() {
    let p = product(&[1.3]);
    for &n in &[8usize, 32] {
        let a = ContourSpec::for_n(n, 1, 0.5).unwrap();
        let b = a.clone().with_periodization(Periodization::ImageSum);
        let va = n_level_contour(n, &p, &a).unwrap().value;
        let vb = n_level_contour(n, &p, &b).unwrap().value;
        assert!((va - vb).abs() < 1e-9, "{va} vs {vb}");
    }
}

#[test]
fn two_level_matches_weyl_integration() {
    for &(ref s, n) in &[(vec![0.3, 0.3], 2usize), (vec![1.4, 1.4], 2), (vec![0.8, 1.1], 3), (vec![1.2, 1.6], 3)] {
        let v = contour_value(n, s);
        let exact = common::weyl_exact(s, n);
        assert!((v - exact).abs() < 1e-8, "σ={s:?} N={n}: {v} vs {exact}");
    }
}

#[test]
fn shift_invariance_in_delta() {
    for sig in [vec![0.9], vec![1.2, 0.7]] {
        let sweep = delta_sweep(16, &product(&sig), &[0.3, 0.5, 0.8, 1.0]).unwrap();
        let first = sweep[0].1;
        for (c, v) in &sweep {
            assert!((v - first).abs() < 1e-6, "c={c}: {v} vs {first}");
        }
    }
}

#[test]
fn truncated_kernel_equals_untruncated() {
    for sig in [vec![0.9], vec![0.4, 0.5], vec![0.8, 0.9]] {
        let p = product(&sig);
        let n = 32;
        let spec = ContourSpec::for_n(n, p.n(), 0.5).unwrap();
        let t = n_level_contour_detailed(n, &p, &spec, None).unwrap();
        let full = n_level_contour_detailed(n, &p, &spec, Some(p.n() + 1)).unwrap();
        assert!(t.truncation_q <= full.truncation_q);
        assert!((t.estimate.value - full.estimate.value).abs() < 1e-4);
    }
}

#[test]
fn terms_sum_to_total() {
    let p = product(&[1.1, 0.6]);
    let spec = ContourSpec::for_n(16, 2, 0.5).unwrap();
    let r = n_level_contour_detailed(16, &p, &spec, None).unwrap();
    assert_eq!(r.terms.len(), 4);
    let s: f64 = r.terms.iter().map(|t| t.value).sum();
    assert!((s - r.estimate.value).abs() < 1e-12);
    // the M = {1,2} term is ∫f₁∫f₂ = 1
    assert!((r.terms[0].value - 1.0).abs() < 1e-12);
}

#[test]
fn rejects_unsupported_products() {
    let p = product(&[0.5, 0.5, 0.5]);
    let spec = ContourSpec::for_n(16, 3, 0.5).unwrap();
    assert!(matches!(n_level_contour(16, &p, &spec), Err(Error::Domain(_))));
    let p = product(&[0.5]);
    assert!(n_level_contour(0, &p, &spec).is_err());
}

#[test]
fn lemma_lhs_matches_finite_n_series() {
    for &n in &[8usize, 16] {
        let spec = ContourSpec::for_n(n, 2, 0.5).unwrap();
        let l1 = lemma_lhs(&LemmaInput::One { f1: tri(1.0), f2: tri(0.7) }, n, &spec).unwrap().value.re;
        assert!((l1 - common::lemma1_finite(1.0, 0.7, n)).abs() < 1e-10);
        let l2 = lemma_lhs(&LemmaInput::Two { f: tri(1.3) }, n, &spec).unwrap().value.re;
        assert!((l2 - common::lemma2_finite(1.3, n)).abs() < 1e-10);
        let l4 = lemma_lhs(
            &LemmaInput::Four { fns: vec![tri(1.5)], a: IndexSet::empty(), b: IndexSet::single(0) },
            n,
            &spec,
        )
        .unwrap()
        .value
        .re;
        assert!((l4 - common::lemma4_single_finite(1.5, n)).abs() < 1e-10);
    }
}

#[test]
fn lemma_four_symmetric_under_relabeling() {
    let n = 8;
    let spec = ContourSpec::for_n(n, 3, 0.5).unwrap();
    let a = LemmaInput::Four {
        fns: vec![tri(0.3), tri(0.5), tri(1.6)],
        a: IndexSet::new(vec![0, 1]).unwrap(),
        b: IndexSet::single(2),
    };
    let b = LemmaInput::Four {
        fns: vec![tri(0.5), tri(0.3), tri(1.6)],
        a: IndexSet::new(vec![0, 1]).unwrap(),
        b: IndexSet::single(2),
    };
    let va = lemma_lhs(&a, n, &spec).unwrap().value;
    let vb = lemma_lhs(&b, n, &spec).unwrap().value;
    assert!((va - vb).norm() < 1e-12 * va.norm().max(1e-3), "{va} vs {vb}");
    let spec2 = ContourSpec::for_n(n, 2, 0.5).unwrap();
    let c = LemmaInput::Four { fns: vec![tri(1.2), tri(0.9)], a: IndexSet::empty(), b: IndexSet::range(2) };
    let d = LemmaInput::Four { fns: vec![tri(0.9), tri(1.2)], a: IndexSet::empty(), b: IndexSet::range(2) };
    let vc = lemma_lhs(&c, n, &spec2).unwrap().value;
    let vd = lemma_lhs(&d, n, &spec2).unwrap().value;
    assert!((vc - vd).norm() < 1e-12 * vc.norm().max(1e-3), "{vc} vs {vd}");
}

#[test]
fn lemma_reports() {
    let opts = LemmaOptions::default();
    let r1 = verify_lemma(&LemmaInput::One { f1: tri(1.0), f2: tri(1.0) }, &opts).unwrap();
    assert!((r1.rhs - 1.0 / 3.0).abs() < 1e-12);
    assert!(r1.rel_dev <= 1e-3);
    let r2 = verify_lemma(&LemmaInput::Two { f: tri(1.0) }, &opts).unwrap();
    assert!((r2.rhs + 0.5).abs() < 1e-12);
    assert!(r2.rel_dev <= 1e-3);
    let r3 = verify_lemma(&LemmaInput::Three { f: tri(0.8) }, &opts).unwrap();
    for p in &r3.per_n {
        assert!((p.lhs - 1.0).abs() < 1e-9);
    }
    let r4 = verify_lemma(&LemmaInput::Four { fns: vec![tri(1.5)], a: IndexSet::empty(), b: IndexSet::single(0) }, &opts)
        .unwrap();
    assert!((r4.rhs - 1.0 / 12.0).abs() < 1e-12);
    assert!(r4.rel_dev <= 1e-2);
    assert!(!r4.weak);
    let json = serde_json::to_value(&r4).unwrap();
    for key in ["lemma", "params", "per_n", "extrapolated", "rhs", "rel_dev"] {
        assert!(json.get(key).is_some(), "missing {key}");
    }
    assert_eq!(json["per_n"].as_array().unwrap().len(), 3);
}

#[test]
fn empty_region_lemma_flagged_weak() {
    let opts = LemmaOptions { n_schedule: vec![8, 16], ..Default::default() };
    let r = verify_lemma(&LemmaInput::Four { fns: vec![tri(0.8)], a: IndexSet::empty(), b: IndexSet::single(0) }, &opts)
        .unwrap();
    assert!(r.weak);
    assert!(r.rhs == 0.0);
    assert!(r.extrapolated.abs() < 1e-10);
}

#[test]
fn lemma_input_validation() {
    let bad = LemmaInput::Four { fns: vec![tri(1.5)], a: IndexSet::single(0), b: IndexSet::empty() };
    assert!(matches!(lemma_rhs(&bad), Err(Error::Domain(_))));
    let overlap = LemmaInput::Four { fns: vec![tri(1.5), tri(0.5)], a: IndexSet::single(0), b: IndexSet::single(0) };
    assert!(lemma_rhs(&overlap).is_err());
}
