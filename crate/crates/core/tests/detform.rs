mod common;

use std::f64::consts::PI;

use common::{loglog_slope, one_level_moments};
use symplectic_nlevel::closedform::rubinstein_rhs;
use symplectic_nlevel::detform::*;
use symplectic_nlevel::testfn::{make_raised_cosine, make_triangle, TestFunctionProduct};

#[test]
fn s_kernel_examples() {
    for m in [1usize, 3, 5, 9] {
        assert!((s_kernel(m, 0.0) - m as f64 / (2.0 * PI)).abs() < 1e-15);
        assert!((s_kernel(m, 2.0 * PI) - m as f64 / (2.0 * PI)).abs() < 1e-13);
        // continuity through the removable point
        assert!((s_kernel(m, 2e-5) - s_kernel(m, 0.0)).abs() < 1e-8);
    }
    assert!((s_kernel(5, PI) - 1.0 / (2.0 * PI)).abs() < 1e-15);
    // even M flips sign at 2π
    assert!((s_kernel(4, 2.0 * PI) + 4.0 / (2.0 * PI)).abs() < 1e-13);
}

#[test]
fn kernel_examples() {
    let k1 = KernelSpec::finite(1).unwrap();
    assert!((kernel(&k1, PI / 2.0, PI / 2.0) - 4.0 / (2.0 * PI)).abs() < 1e-14);
    let lim = KernelSpec::limit(SignConvention::StandardMinus);
    assert!(kernel(&lim, 0.0, 0.0).abs() < 1e-15);
    for x in [0.1, 0.37, 1.0, 2.5] {
        let want = 1.0 - (2.0 * PI * x).sin() / (2.0 * PI * x);
        assert!((kernel(&lim, x, x) - want).abs() < 1e-14);
    }
    assert!(KernelSpec::finite(0).is_err());
}

#[test]
fn kernel_is_symmetric_and_vanishes_at_endpoints() {
    let k = KernelSpec::finite(5).unwrap();
    for &(x, y) in &[(0.3, 1.2), (2.0, 0.7), (PI / 3.0, 2.9)] {
        assert!((kernel(&k, x, y) - kernel(&k, y, x)).abs() < 1e-14);
        assert!(kernel(&k, 0.0, y).abs() < 1e-14);
    }
    // coincident points make the two-point determinant vanish
    assert!(correlation(&k, &[0.8, 0.8]).abs() < 1e-12);
    assert!(correlation(&k, &[0.8, 1.9]) >= 0.0);
}

#[test]
fn trace_equals_n() {
    for n in [1usize, 4, 16, 64] {
        assert!((kernel_trace(n).unwrap() - n as f64).abs() < 1e-8, "N={n}");
    }
}

#[test]
fn sign_audit_separates_conventions() {
    let a = sign_audit(128).unwrap();
    assert!(a.standard_minus < 2e-2, "{a:?}");
    assert!(a.plus > 0.5, "{a:?}");
}

#[test]
fn one_level_matches_moment_oracle() {
    let f = make_triangle(0.9).unwrap();
    for n in [2usize, 8, 32] {
        // f(x) ≤ 1/(π²σx²) bounds the dropped images by ~1/(π²σNK)
        let k = 400;
        let d = one_level_finite_n_with(n, &f, k).unwrap();
        let want = one_level_moments(0.9, n);
        let tail = 2.0 / (PI * PI * 0.9 * n as f64 * k as f64);
        assert!((d.value - want).abs() < tail + 1e-7, "N={n}: {} vs {want}", d.value);
    }
}

#[test]
fn one_level_limit_proxy() {
    let f = make_triangle(0.9).unwrap();
    let lim = one_level_limit_raw(&f, SignConvention::StandardMinus).unwrap();
    assert!((lim - 0.275).abs() < 1e-12);
    for n in [64usize, 128] {
        assert!((one_level_raw(n, &f).unwrap() - lim).abs() < 2e-2);
    }
    assert!(one_level_raw(129, &f).is_err());
}

#[test]
fn one_level_converges_at_rate_one_over_n() {
    let f = make_triangle(0.9).unwrap();
    let ns = [16.0, 32.0, 64.0];
    let devs: Vec<f64> =
        ns.iter().map(|&n| (one_level_finite_n_with(n as usize, &f, 400).unwrap().value - 0.55).abs()).collect();
    let slope = -loglog_slope(&ns, &devs);
    assert!((0.6..=1.4).contains(&slope), "slope {slope} from {devs:?}");
}

#[test]
fn distinct_never_exceeds_full() {
    let f = make_triangle(0.6).unwrap();
    let g = make_raised_cosine(0.5).unwrap();
    for n in [2usize, 6, 12] {
        let d = distinct_pair_density_finite_n(n, &f, &g).unwrap();
        let full = full_pair_from_distinct(n, &f, &g).unwrap().value;
        assert!(d <= full, "N={n}");
    }
    assert!(distinct_pair_density_finite_n(65, &f, &f).is_err());
}

#[test]
fn full_pair_against_pairing_form() {
    let f = make_triangle(0.3).unwrap();
    let limit = rubinstein_rhs(&TestFunctionProduct::new(vec![f.clone(), f.clone()]).unwrap()).unwrap().total;
    let v = full_pair_from_distinct(64, &f, &f).unwrap().value;
    assert!((v - limit).abs() < 2e-2, "{v} vs {limit}");
}
