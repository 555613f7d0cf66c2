//! N → ∞ limits of the n-level density for restricted Fourier support:
//! the pairing form (total support ≤ 1), the single-shift form (< 2) and the
//! double-shift form (< 3). Every constrained integral goes through
//! [`crate::region::constrained_integral`] and is memoized by its index sets.

use std::collections::HashMap;

use serde::Serialize;

use crate::combinat::{
    four_way_splits_with_nonempty, perfect_matchings, proper_even_subsets, subsets,
    FourWaySplit, IndexSet, Matching,
};
use crate::error::{domain, Result};
use crate::region::{
    constrained_integral, AffineWeight, ConstrainedRegion, Hyperplane, RegionIntegral,
    ShiftedInequality,
};
use crate::testfn::{integral_abs_u_pair, TestFunction, TestFunctionProduct};

/// How the double-shift block counts the two orderings of a shift pair.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PairCounting {
    /// Both orderings of every four-way split, as the formula is written.
    AsPrinted,
    /// Each unordered shift pair once (double-shift block halved). Agrees
    /// with the N → ∞ extrapolation of the exact finite-N contour values.
    #[default]
    Unordered,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ClosedFormOptions {
    pub pair_counting: PairCounting,
    /// Combinatorial cost guard for the double-shift form.
    pub max_n: usize,
}

impl Default for ClosedFormOptions {
    fn default() -> Self {
        ClosedFormOptions { pair_counting: PairCounting::Unordered, max_n: 5 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TermKind {
    Pairing { matching: Matching },
    SingleShift { s3: IndexSet, matching: Matching, i: IndexSet, ic: IndexSet },
    DoubleShift { s4: IndexSet, matching: Matching, split: FourWaySplit },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TermDescriptor {
    pub q: IndexSet,
    pub m: IndexSet,
    pub s2: IndexSet,
    #[serde(flatten)]
    pub kind: TermKind,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Term {
    pub descriptor: TermDescriptor,
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ClosedFormBreakdown {
    pub total: f64,
    /// Accumulated quadrature error bound (0 when every integral is exact).
    pub error: f64,
    /// Nonzero terms only; empty regions are dropped.
    pub terms: Vec<Term>,
}

impl ClosedFormBreakdown {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

fn mask(s: &IndexSet) -> u32 {
    s.iter().fold(0, |m, i| m | (1 << i))
}

struct Evaluator<'a> {
    fns: &'a [TestFunction],
    int_f: Vec<f64>,
    int_fhat: Vec<f64>,
    abs_pair: Vec<Vec<f64>>,
    single: HashMap<(u32, u32), RegionIntegral>,
    double: HashMap<[u32; 4], RegionIntegral>,
}

impl<'a> Evaluator<'a> {
    fn new(fns: &'a [TestFunction]) -> Result<Self> {
        let n = fns.len();
        let mut abs_pair = vec![vec![0.0; n]; n];
        for a in 0..n {
            for b in a + 1..n {
                let v = integral_abs_u_pair(&fns[a], &fns[b])?;
                abs_pair[a][b] = v;
                abs_pair[b][a] = v;
            }
        }
        Ok(Evaluator {
            fns,
            int_f: fns.iter().map(|f| f.integral_f()).collect(),
            int_fhat: fns.iter().map(|f| f.integral_fhat()).collect(),
            abs_pair,
            single: HashMap::new(),
            double: HashMap::new(),
        })
    }

    fn matching_weight(&self, m: &Matching) -> f64 {
        m.pairs.iter().map(|&(a, b)| self.abs_pair[a][b]).product()
    }

    fn single_shift(&mut self, i: &IndexSet, ic: &IndexSet) -> Result<RegionIntegral> {
        let key = (mask(i), mask(ic));
        if let Some(v) = self.single.get(&key) {
            return Ok(*v);
        }
        let v = single_shift_integral(self.fns, i, ic)?;
        self.single.insert(key, v);
        Ok(v)
    }

    fn double_shift(&mut self, s: &FourWaySplit) -> Result<RegionIntegral> {
        let key = [mask(&s.i1), mask(&s.i1c), mask(&s.i2), mask(&s.i2c)];
        if let Some(v) = self.double.get(&key) {
            return Ok(*v);
        }
        let v = double_shift_integral(self.fns, s)?;
        self.double.insert(key, v);
        Ok(v)
    }
}

/// ∫ Π f̂ over u ≥ 0 with Σ_I u ≤ Σ_{Iᶜ} u − 1 (`fns` indexed globally).
pub fn single_shift_integral(fns: &[TestFunction], i: &IndexSet, ic: &IndexSet) -> Result<RegionIntegral> {
    let region = ConstrainedRegion::new(
        i.union(ic),
        vec![ShiftedInequality { lhs: i.clone(), rhs: ic.clone() }],
        None,
    )?;
    constrained_integral(&region, fns, None)
}

/// ¼·∫_R Π f̂ − ∫_{R∩H} (−Σ_{I₂}u + Σ_{I₂ᶜ}u − 1) Π f̂, where R is the double
/// constraint region and H the hyperplane Σ_{I₁ᶜ∪I₂} u = Σ_{I₁∪I₂ᶜ} u.
pub fn double_shift_integral(fns: &[TestFunction], s: &FourWaySplit) -> Result<RegionIntegral> {
    let sum_sigma = |x: &IndexSet| x.iter().map(|j| fns[j].sigma()).sum::<f64>();
    if sum_sigma(&s.i1c) <= 1.0 || sum_sigma(&s.i2c) <= 1.0 {
        return Ok(RegionIntegral { value: 0.0, error: 0.0 });
    }
    let dims = s.i1.union(&s.i1c).union(&s.i2).union(&s.i2c);
    let ineqs = vec![
        ShiftedInequality { lhs: s.i1.clone(), rhs: s.i1c.clone() },
        ShiftedInequality { lhs: s.i2.clone(), rhs: s.i2c.clone() },
    ];
    let plain = ConstrainedRegion::new(dims.clone(), ineqs.clone(), None)?;
    let plain = constrained_integral(&plain, fns, None)?;
    let hyper = Hyperplane { positive: s.i1c.union(&s.i2), negative: s.i1.union(&s.i2c) };
    let sliced = ConstrainedRegion::new(dims, ineqs, Some(hyper))?;
    let mut coeffs: Vec<(usize, f64)> = s.i2.iter().map(|j| (j, -1.0)).collect();
    coeffs.extend(s.i2c.iter().map(|j| (j, 1.0)));
    let w = AffineWeight { constant: -1.0, coeffs };
    let delta = constrained_integral(&sliced, fns, Some(&w))?;
    Ok(RegionIntegral {
        value: 0.25 * plain.value - delta.value,
        error: 0.25 * plain.error + delta.error,
    })
}

struct Acc {
    terms: Vec<Term>,
    error: f64,
}

impl Acc {
    fn push(&mut self, descriptor: TermDescriptor, value: f64, error: f64) {
        self.error += error;
        if value != 0.0 {
            self.terms.push(Term { descriptor, value });
        }
    }
}

fn evaluate(product: &TestFunctionProduct, q_order: u8, opts: ClosedFormOptions) -> Result<ClosedFormBreakdown> {
    let n = product.n();
    let all = IndexSet::range(n);
    let mut ev = Evaluator::new(product.factors())?;
    let mut acc = Acc { terms: Vec::new(), error: 0.0 };
    let double_scale = match opts.pair_counting {
        PairCounting::AsPrinted => 1.0,
        PairCounting::Unordered => 0.5,
    };
    for q in subsets(&all) {
        let m = all.minus(&q);
        let pre_m: f64 = m.iter().map(|i| ev.int_f[i]).product();
        for s2 in subsets(&q) {
            let s2c = q.minus(&s2);
            let pre = pre_m
                * s2c.iter().map(|l| -0.5 * ev.int_fhat[l]).product::<f64>();
            let desc = |kind: TermKind| TermDescriptor { q: q.clone(), m: m.clone(), s2: s2.clone(), kind };
            if s2.len() % 2 == 0 {
                let scale = pre * 2f64.powi(s2.len() as i32 / 2);
                for mt in perfect_matchings(&s2)? {
                    let v = scale * ev.matching_weight(&mt);
                    acc.push(desc(TermKind::Pairing { matching: mt }), v, 0.0);
                }
            }
            if q_order >= 2 {
                for s3 in proper_even_subsets(&s2) {
                    let s3c = s2.minus(&s3);
                    let scale = pre * -0.5 * 2f64.powi(s3.len() as i32 / 2) * 2f64.powi(s3c.len() as i32);
                    let matchings = perfect_matchings(&s3)?;
                    for i in subsets(&s3c) {
                        let ic = s3c.minus(&i);
                        if ic.is_empty() {
                            continue;
                        }
                        let r = ev.single_shift(&i, &ic)?;
                        if r.value == 0.0 && r.error == 0.0 {
                            continue;
                        }
                        let sign = if ic.len() % 2 == 0 { 1.0 } else { -1.0 };
                        for mt in &matchings {
                            let c = scale * sign * ev.matching_weight(mt);
                            acc.push(
                                desc(TermKind::SingleShift {
                                    s3: s3.clone(),
                                    matching: mt.clone(),
                                    i: i.clone(),
                                    ic: ic.clone(),
                                }),
                                c * r.value,
                                c.abs() * r.error,
                            );
                        }
                    }
                }
            }
            if q_order >= 3 {
                for s4 in proper_even_subsets(&s2) {
                    let s4c = s2.minus(&s4);
                    let scale = pre
                        * double_scale
                        * 2f64.powi(s4.len() as i32 / 2)
                        * 2f64.powi(s4c.len() as i32);
                    let matchings = perfect_matchings(&s4)?;
                    for split in four_way_splits_with_nonempty(&s4c) {
                        let r = ev.double_shift(&split)?;
                        if r.value == 0.0 && r.error == 0.0 {
                            continue;
                        }
                        let sign = if (split.i1c.len() + split.i2c.len()) % 2 == 0 { 1.0 } else { -1.0 };
                        for mt in &matchings {
                            let c = scale * sign * ev.matching_weight(mt);
                            acc.push(
                                desc(TermKind::DoubleShift {
                                    s4: s4.clone(),
                                    matching: mt.clone(),
                                    split: split.clone(),
                                }),
                                c * r.value,
                                c.abs() * r.error,
                            );
                        }
                    }
                }
            }
        }
    }
    let total = acc.terms.iter().map(|t| t.value).sum();
    Ok(ClosedFormBreakdown { total, error: acc.error, terms: acc.terms })
}

/// Pairing form, valid for total support ≤ 1.
pub fn rubinstein_rhs(product: &TestFunctionProduct) -> Result<ClosedFormBreakdown> {
    if product.total_support() > 1.0 {
        return domain(format!("pairing form needs total support ≤ 1, got {}", product.total_support()));
    }
    evaluate(product, 1, ClosedFormOptions::default())
}

/// Single-shift form, valid for total support < 2.
pub fn gao_rhs(product: &TestFunctionProduct) -> Result<ClosedFormBreakdown> {
    if product.total_support() >= 2.0 {
        return domain(format!("single-shift form needs total support < 2, got {}", product.total_support()));
    }
    evaluate(product, 2, ClosedFormOptions::default())
}

/// Double-shift form, valid for total support < 3.
pub fn support3_rhs(product: &TestFunctionProduct) -> Result<ClosedFormBreakdown> {
    support3_rhs_with(product, ClosedFormOptions::default())
}

pub fn support3_rhs_with(product: &TestFunctionProduct, opts: ClosedFormOptions) -> Result<ClosedFormBreakdown> {
    if product.total_support() >= 3.0 {
        return domain(format!("double-shift form needs total support < 3, got {}", product.total_support()));
    }
    if product.n() > opts.max_n {
        return domain(format!("n = {} exceeds the cost guard max_n = {}", product.n(), opts.max_n));
    }
    evaluate(product, 3, opts)
}

/// The form matching the product's support class.
pub fn closed_form_auto(product: &TestFunctionProduct) -> Result<(crate::Method, ClosedFormBreakdown)> {
    use crate::Method;
    match product.support_class() {
        Some(1) => Ok((Method::ClosedFormQ1, rubinstein_rhs(product)?)),
        Some(2) => Ok((Method::ClosedFormQ2, gao_rhs(product)?)),
        Some(_) => Ok((Method::ClosedFormQ3, support3_rhs(product)?)),
        None => domain(format!("total support {} ≥ 3", product.total_support())),
    }
}
