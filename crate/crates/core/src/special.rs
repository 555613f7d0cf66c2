//! Small special-function kit: complex sinc and the generalized exponential
//! integral used for tails of exp-power series.

use num_complex::Complex64 as C64;

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// sin(z)/z, Taylor-expanded for |z| < 1e-4.
pub fn sinc(z: C64) -> C64 {
    if z.norm() < 1e-4 {
        let z2 = z * z;
        // 1 - z²/3! + z⁴/5! - z⁶/7! + z⁸/9! - z¹⁰/11!
        let mut s = C64::new(1.0, 0.0);
        let mut t = C64::new(1.0, 0.0);
        for k in 1..6 {
            t = -t * z2 / ((2 * k) as f64 * (2 * k + 1) as f64);
            s += t;
        }
        s
    } else {
        z.sin() / z
    }
}

/// e^z E_p(z) for integer p ≥ 1 and z off the closed negative real axis.
pub fn expint_scaled(p: u32, z: C64) -> C64 {
    assert!(p >= 1);
    if z.norm() <= 1.0 {
        expint_series(p, z) * z.exp()
    } else {
        expint_cf_scaled(p, z)
    }
}

fn expint_series(p: u32, z: C64) -> C64 {
    let pm1 = (p - 1) as i64;
    let mut psi = -EULER_GAMMA;
    let mut fact = 1.0;
    for m in 1..p {
        psi += 1.0 / m as f64;
        fact *= m as f64;
    }
    let mz = -z;
    let lead = mz.powi(pm1 as i32) / fact * (-z.ln() + psi);
    let mut sum = C64::new(0.0, 0.0);
    let mut pow = C64::new(1.0, 0.0); // (-z)^k / k!
    for k in 0..200i64 {
        if k != pm1 {
            let term = pow / (k - pm1) as f64;
            sum += term;
            if k > pm1 && term.norm() < 1e-18 * sum.norm().max(1e-300) {
                break;
            }
        }
        pow = pow * mz / (k + 1) as f64;
    }
    lead - sum
}

// Modified Lentz evaluation of the continued fraction for E_p.
fn expint_cf_scaled(p: u32, z: C64) -> C64 {
    let pm1 = (p - 1) as f64;
    let tiny = 1e-300;
    let mut b = z + (p as f64);
    let mut c = C64::new(1.0 / tiny, 0.0);
    let mut d = C64::new(1.0, 0.0) / b;
    let mut h = d;
    for i in 1..10_000 {
        let an = -(i as f64) * (pm1 + i as f64);
        b += 2.0;
        d = C64::new(1.0, 0.0) / (d * an + b);
        c = b + c.inv() * an;
        let del = c * d;
        h *= del;
        if (del - 1.0).norm() < 1e-16 {
            break;
        }
    }
    h
}

/// ∫_{w0}^{w0+∞} e^{iκw} w^{-p} dw along the horizontal ray from w0 with
/// Re w0 > 0. For κ = 0 requires p ≥ 2.
pub fn horizontal_tail(kappa: f64, w0: C64, p: u32) -> C64 {
    let scale = w0.powf(1.0 - p as f64);
    if kappa == 0.0 {
        assert!(p >= 2);
        return scale / (p as f64 - 1.0);
    }
    let z = C64::new(0.0, -kappa) * w0;
    scale * expint_scaled(p, z) * (C64::new(0.0, kappa) * w0).exp()
}
