use std::f64::consts::PI;

use symplectic_nlevel::periodize::*;
use symplectic_nlevel::testfn::{make_raised_cosine, make_triangle, TestFunction};

fn max_dev(f: &TestFunction, period: f64, y: f64, l: usize) -> f64 {
    let a = periodized_samples(f, period, y, l, Periodization::FourierSeries).unwrap();
    let b = periodized_samples(f, period, y, l, Periodization::ImageSum).unwrap();
    a.iter().zip(&b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

#[test]
fn routes_agree() {
    for f in [make_triangle(0.9).unwrap(), make_raised_cosine(1.3).unwrap()] {
        for (p, y) in [(8.0, 0.0), (8.0, 0.6), (32.0, 2.0)] {
            let l = 2 * bandwidth(&f, p) + 8;
            let d = max_dev(&f, p, y, l);
            assert!(d < 1e-9, "σ={} P={p} y={y}: {d}", f.sigma());
        }
    }
}

#[test]
fn mean_is_the_zero_mode() {
    // (1/L)Σ F(jP/L + iy) = f̂(0)/P
    let f = make_triangle(1.1).unwrap();
    let (p, y) = (12.0, 0.4);
    let v = periodized_samples(&f, p, y, 64, Periodization::FourierSeries).unwrap();
    let mean = v.iter().sum::<num_complex::Complex64>() / 64.0;
    assert!((mean.re - 1.0 / p).abs() < 1e-14 && mean.im.abs() < 1e-14);
}

#[test]
fn direct_cosine_series() {
    let s = 0.7;
    let f = make_triangle(s).unwrap();
    let p = 10.0;
    let l = 32;
    let v = periodized_samples(&f, p, 0.0, l, Periodization::FourierSeries).unwrap();
    for (j, val) in v.iter().enumerate() {
        let x = j as f64 * p / l as f64;
        let m = (s * p).floor() as i64;
        let want: f64 = (-m..=m)
            .map(|k| (1.0 - (k as f64 / p).abs() / s).max(0.0) * (2.0 * PI * k as f64 * x / p).cos())
            .sum::<f64>()
            / p;
        assert!((val.re - want).abs() < 1e-14 && val.im.abs() < 1e-14);
    }
}

#[test]
fn aliasing_is_refused() {
    let f = make_triangle(0.9).unwrap();
    let m = bandwidth(&f, 20.0);
    assert_eq!(m, 18);
    assert!(periodized_samples(&f, 20.0, 0.0, 2 * m, Periodization::FourierSeries).is_err());
    assert!(periodized_samples(&f, 20.0, 0.0, 2 * m + 1, Periodization::FourierSeries).is_ok());
}
