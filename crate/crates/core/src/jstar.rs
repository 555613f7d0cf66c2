//! The combinatorial ratio kernel J*(A) for USp(2N): a sum over subsets D ⊆ A
//! of an exponential/z-function prefactor times pair/singleton partitions of
//! A∖D weighted by H_D block factors, plus its support truncation and the
//! regrouped forms used to derive the closed formulas.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::combinat::{
    even_subsets, four_way_splits_with_nonempty, pair_singleton_partitions, perfect_matchings,
    proper_even_subsets, subsets, Block, IndexSet,
};
use crate::error::{Error, Result};

/// Distance below which an argument is treated as sitting on a pole.
pub const POLE_GUARD: f64 = 1e-12;
/// Minimum separation of pairwise sums α+β from the pole set.
pub const PAIR_GUARD: f64 = 1e-8;
const LAURENT_RADIUS: f64 = 1e-4;

// x reduced modulo 2πi to the strip |Im| ≤ π.
fn reduce(x: C64) -> C64 {
    let k = (x.im / (2.0 * PI)).round();
    C64::new(x.re, x.im - 2.0 * PI * k)
}

fn check_pole(x: C64, guard: f64, what: &str) -> Result<C64> {
    let r = reduce(x);
    if r.norm() < guard {
        return Err(Error::Singularity(format!("{what}: argument {x} is on a pole of z")));
    }
    Ok(r)
}

/// z(x) = 1/(1 − e^{−x}).
pub fn z_func(x: C64) -> Result<C64> {
    check_pole(x, POLE_GUARD, "z")?;
    Ok((C64::new(1.0, 0.0) - (-x).exp()).inv())
}

/// 1/z(x) = 1 − e^{−x}; entire.
pub fn z_inv(x: C64) -> C64 {
    C64::new(1.0, 0.0) - (-x).exp()
}

/// z'/z(x) = −1/(e^x − 1).
pub fn z_log_deriv(x: C64) -> Result<C64> {
    let r = check_pole(x, POLE_GUARD, "z'/z")?;
    if r.norm() < LAURENT_RADIUS {
        let r2 = r * r;
        return Ok(-r.inv() + 0.5 - r / 12.0 + r * r2 / 720.0);
    }
    let one = C64::new(1.0, 0.0);
    Ok(if x.re > 0.0 {
        let e = (-x).exp();
        -e / (one - e)
    } else {
        -(x.exp() - one).inv()
    })
}

/// (z'/z)'(x) = e^x/(e^x − 1)².
pub fn z_log_deriv_prime(x: C64) -> Result<C64> {
    let r = check_pole(x, POLE_GUARD, "(z'/z)'")?;
    if r.norm() < LAURENT_RADIUS {
        let r2 = r * r;
        return Ok(r2.inv() - 1.0 / 12.0 + r2 / 240.0);
    }
    let one = C64::new(1.0, 0.0);
    Ok(if x.re > 0.0 {
        let e = (-x).exp();
        e / ((one - e) * (one - e))
    } else {
        let e = x.exp();
        e / ((e - one) * (e - one))
    })
}

/// H_D(W) for a block W of size 0, 1 or 2.
pub fn h_factor(d: &[C64], w: &[C64]) -> Result<C64> {
    match w.len() {
        0 => Ok(C64::new(1.0, 0.0)),
        1 => {
            let a = w[0];
            let mut s = z_log_deriv(2.0 * a)?;
            for &dv in d {
                s += z_log_deriv(a - dv)? - z_log_deriv(a + dv)?;
            }
            Ok(s)
        }
        2 => {
            let s = w[0] + w[1];
            check_pole(s, PAIR_GUARD, "pair sum α+β")?;
            z_log_deriv_prime(s)
        }
        k => Err(Error::Domain(format!("H_D block of size {k}"))),
    }
}

/// The square-root prefactor for D (without e^{−2NΣd}):
/// (−1)^{|D|} Π_d z(−2d) Π_{α<β} z(α+β) z(−α−β) / (z(α−β) z(β−α)).
///
/// The radicand is the exact square of this product, so it is used as the
/// (single-valued) root for every |D|; for |D| ≤ 2 it is the familiar form.
pub fn yz_prefactor(d: &[C64]) -> Result<C64> {
    let mut p = C64::new(if d.len() % 2 == 0 { 1.0 } else { -1.0 }, 0.0);
    for &a in d {
        p *= z_func(-2.0 * a)?;
    }
    for i in 0..d.len() {
        for j in i + 1..d.len() {
            let s = d[i] + d[j];
            let t = d[i] - d[j];
            check_pole(s, PAIR_GUARD, "pair sum d+g")?;
            // z(s)z(−s) / (z(t)z(−t)) = (1−e^{−t})(1−e^{t}) / ((1−e^{−s})(1−e^{s}))
            p *= z_inv(t) * z_inv(-t) / (z_inv(s) * z_inv(-s));
        }
    }
    Ok(p)
}

fn partition_sum(a: &[C64], d: &[C64], rest: &IndexSet) -> Result<C64> {
    let mut total = C64::new(0.0, 0.0);
    for part in pair_singleton_partitions(rest) {
        let mut prod = C64::new(1.0, 0.0);
        for b in &part.blocks {
            prod *= match *b {
                Block::Single(i) => h_factor(d, &[a[i]])?,
                Block::Pair(i, j) => h_factor(d, &[a[i], a[j]])?,
            };
        }
        total += prod;
    }
    Ok(total)
}

/// Contribution of the single subset D (indices into `a`).
pub fn j_star_term(n_half: usize, a: &[C64], d_idx: &IndexSet) -> Result<C64> {
    let all = IndexSet::range(a.len());
    let rest = all.minus(d_idx);
    let d: Vec<C64> = d_idx.iter().map(|i| a[i]).collect();
    let sum_d: C64 = d.iter().sum();
    let pref = (-2.0 * n_half as f64 * sum_d).exp() * yz_prefactor(&d)?;
    Ok(pref * partition_sum(a, &d, &rest)?)
}

/// Sum of all terms with |D| = k.
pub fn j_star_shell(n_half: usize, a: &[C64], k: usize) -> Result<C64> {
    let all = IndexSet::range(a.len());
    let mut s = C64::new(0.0, 0.0);
    for d in subsets(&all).filter(|d| d.len() == k) {
        s += j_star_term(n_half, a, &d)?;
    }
    Ok(s)
}

/// J*(A), all subsets D.
pub fn j_star(n_half: usize, a: &[C64]) -> Result<C64> {
    j_star_trunc(n_half, a, a.len() + 1)
}

/// J*_q(A): only subsets with |D| < q.
pub fn j_star_trunc(n_half: usize, a: &[C64], q: usize) -> Result<C64> {
    let mut s = C64::new(0.0, 0.0);
    for k in 0..q.min(a.len() + 1) {
        s += j_star_shell(n_half, a, k)?;
    }
    Ok(s)
}

/// How the |D| = 2 shell's (d, g) sum is read in the regrouped expansions.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PairSum {
    /// Each two-element D once (the subset sum of the definition).
    #[default]
    Unordered,
    /// Ordered pairs d ≠ g, as the expanded three-shell formula is printed.
    Ordered,
}

impl PairSum {
    fn weight(self) -> f64 {
        match self {
            PairSum::Unordered => 0.5,
            PairSum::Ordered => 1.0,
        }
    }
}

fn matching_sum(z: &[C64], s: &IndexSet) -> Result<C64> {
    let mut tot = C64::new(0.0, 0.0);
    for m in perfect_matchings(s)? {
        let mut p = C64::new(1.0, 0.0);
        for &(a, b) in &m.pairs {
            p *= h_factor(&[], &[z[a], z[b]])?;
        }
        tot += p;
    }
    Ok(tot)
}

// Σ_{d∈Ic} (−e^{−2Nz_d} z(−2z_d)) Π_{i∈I} −z'/z(z_i+z_d) Π_{j∈Ic∖d} z'/z(z_j−z_d)
fn single_d_block(n_half: usize, z: &[C64], i: &IndexSet, ic: &IndexSet) -> Result<C64> {
    let mut tot = C64::new(0.0, 0.0);
    for d in ic.iter() {
        tot += attach(z, i, ic, d)? * (-2.0 * n_half as f64 * z[d]).exp() * yz_prefactor(&[z[d]])?;
    }
    Ok(tot)
}

fn attach(z: &[C64], i: &IndexSet, ic: &IndexSet, d: usize) -> Result<C64> {
    let mut p = C64::new(1.0, 0.0);
    for k in i.iter() {
        p *= -z_log_deriv(z[k] + z[d])?;
    }
    for j in ic.iter().filter(|&j| j != d) {
        p *= z_log_deriv(z[j] - z[d])?;
    }
    Ok(p)
}

/// Regrouped two-shell expansion (H_∅ singletons pulled out, S₂/S₃/I sums).
pub fn j2_grouped(n_half: usize, z: &[C64]) -> Result<C64> {
    j3_grouped_impl(n_half, z, None)
}

/// Regrouped three-shell expansion (adds the S₄ / four-way-split block).
pub fn j3_grouped(n_half: usize, z: &[C64], pairs: PairSum) -> Result<C64> {
    j3_grouped_impl(n_half, z, Some(pairs))
}

fn j3_grouped_impl(n_half: usize, z: &[C64], pairs: Option<PairSum>) -> Result<C64> {
    let q = IndexSet::range(z.len());
    let mut total = C64::new(0.0, 0.0);
    for s2 in subsets(&q) {
        let s2c = q.minus(&s2);
        let mut outer = C64::new(1.0, 0.0);
        for l in s2c.iter() {
            outer *= z_log_deriv(2.0 * z[l])?;
        }
        let mut bracket = C64::new(0.0, 0.0);
        if s2.len() % 2 == 0 {
            bracket += matching_sum(z, &s2)?;
        }
        for s3 in proper_even_subsets(&s2) {
            let s3c = s2.minus(&s3);
            let mut inner = C64::new(0.0, 0.0);
            for i in subsets(&s3c) {
                let ic = s3c.minus(&i);
                if ic.is_empty() {
                    continue;
                }
                inner += single_d_block(n_half, z, &i, &ic)?;
            }
            bracket += matching_sum(z, &s3)? * inner;
        }
        if let Some(ps) = pairs {
            for s4 in proper_even_subsets(&s2) {
                let s4c = s2.minus(&s4);
                let mut inner = C64::new(0.0, 0.0);
                for sp in four_way_splits_with_nonempty(&s4c) {
                    for d in sp.i1c.iter() {
                        for g in sp.i2c.iter() {
                            let e = (-2.0 * n_half as f64 * (z[d] + z[g])).exp();
                            inner += e
                                * yz_prefactor(&[z[d], z[g]])?
                                * attach(z, &sp.i1, &sp.i1c, d)?
                                * attach(z, &sp.i2, &sp.i2c, g)?;
                        }
                    }
                }
                bracket += matching_sum(z, &s4)? * inner * ps.weight();
            }
        }
        total += outer * bracket;
    }
    Ok(total)
}

/// The three-shell expansion written with explicit H_{d}, H_{d,g} factors:
/// Σ_R H_∅… + Σ_d (…) + Σ_{(d,g)} (…), pair sum read per `pairs`.
pub fn j3_expanded(n_half: usize, z: &[C64], pairs: PairSum) -> Result<C64> {
    let q = IndexSet::range(z.len());
    let shell = |dvals: &[C64], rest: &IndexSet| -> Result<C64> {
        let mut tot = C64::new(0.0, 0.0);
        for r in even_subsets(rest) {
            let rc = rest.minus(&r);
            let mut p = matching_sum(z, &r)?;
            for l in rc.iter() {
                p *= h_factor(dvals, &[z[l]])?;
            }
            tot += p;
        }
        Ok(tot)
    };
    let mut total = shell(&[], &q)?;
    for d in 0..z.len() {
        let rest = q.minus(&IndexSet::from(&[d][..]));
        let e = (-2.0 * n_half as f64 * z[d]).exp();
        total += e * yz_prefactor(&[z[d]])? * shell(&[z[d]], &rest)?;
    }
    for d in 0..z.len() {
        for g in 0..z.len() {
            if d == g || (pairs == PairSum::Unordered && g < d) {
                continue;
            }
            let rest = q.minus(&IndexSet::from(&[d, g][..]));
            let e = (-2.0 * n_half as f64 * (z[d] + z[g])).exp();
            total += e * yz_prefactor(&[z[d], z[g]])? * shell(&[z[d], z[g]], &rest)?;
        }
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn laurent_branch_is_continuous() {
        for &x in &[C64::new(1.0001e-4, 0.0), C64::new(0.0, 0.99e-4), C64::new(-7e-5, 7e-5)] {
            let lo = z_log_deriv(x).unwrap();
            let hi = -(x.exp() - 1.0).inv();
            assert!((lo - hi).norm() < 1e-9 * lo.norm());
            let lo2 = z_log_deriv_prime(x).unwrap();
            let hi2 = x.exp() / ((x.exp() - 1.0) * (x.exp() - 1.0));
            assert!((lo2 - hi2).norm() < 1e-6 * lo2.norm());
        }
    }

    #[test]
    fn periodic_poles_are_detected() {
        assert!(z_func(C64::new(0.0, 2.0 * PI)).is_err());
        assert!(z_log_deriv(C64::new(1e-13, -4.0 * PI)).is_err());
        assert!(z_func(C64::new(0.0, PI)).is_ok());
    }
}
