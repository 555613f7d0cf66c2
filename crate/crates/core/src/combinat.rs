//! Enumerators for the set-combinatorial sums: subsets, splits, perfect
//! matchings, pair/singleton partitions and constrained four-way splits.
//!
//! Subset-like enumerations are streamed; matchings and pair/singleton
//! partitions are small (≤ 764 objects for 8 elements) and are returned whole.
//! Ordering is canonical: by size, then lexicographic.

use serde::Serialize;

use crate::error::{domain, Result};

/// Sorted set of distinct indices.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct IndexSet(Vec<usize>);

impl IndexSet {
    pub fn new(mut elems: Vec<usize>) -> Result<Self> {
        elems.sort_unstable();
        if elems.windows(2).any(|w| w[0] == w[1]) {
            return domain("index set has duplicate elements");
        }
        Ok(IndexSet(elems))
    }

    pub fn empty() -> Self {
        IndexSet(Vec::new())
    }

    pub fn single(i: usize) -> Self {
        IndexSet(vec![i])
    }

    /// {0, …, n−1}
    pub fn range(n: usize) -> Self {
        IndexSet((0..n).collect())
    }

    // `elems` must already be sorted and distinct
    fn from_sorted(elems: Vec<usize>) -> Self {
        IndexSet(elems)
    }

    pub fn elements(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, x: usize) -> bool {
        self.0.binary_search(&x).is_ok()
    }

    /// Elements of `self` not in `other`.
    pub fn minus(&self, other: &IndexSet) -> IndexSet {
        IndexSet(self.0.iter().copied().filter(|x| !other.contains(*x)).collect())
    }

    pub fn union(&self, other: &IndexSet) -> IndexSet {
        let mut v = self.0.clone();
        v.extend(other.0.iter().copied().filter(|x| !self.contains(*x)));
        v.sort_unstable();
        IndexSet(v)
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().copied()
    }
}

impl From<&[usize]> for IndexSet {
    fn from(s: &[usize]) -> Self {
        let mut v = s.to_vec();
        v.sort_unstable();
        v.dedup();
        IndexSet(v)
    }
}

/// Streaming iterator over the subsets of a set, by size then lexicographic.
pub struct Subsets {
    elems: Vec<usize>,
    sizes: Vec<usize>,
    size_pos: usize,
    idx: Vec<usize>,
    fresh: bool,
}

impl Subsets {
    fn with_sizes(s: &IndexSet, sizes: Vec<usize>) -> Self {
        Subsets { elems: s.0.clone(), sizes, size_pos: 0, idx: Vec::new(), fresh: true }
    }
}

impl Iterator for Subsets {
    type Item = IndexSet;

    fn next(&mut self) -> Option<IndexSet> {
        let n = self.elems.len();
        loop {
            let k = *self.sizes.get(self.size_pos)?;
            if self.fresh {
                self.fresh = false;
                self.idx = (0..k).collect();
            } else {
                // advance to the next k-combination
                let mut i = k;
                let mut advanced = false;
                while i > 0 {
                    i -= 1;
                    if self.idx[i] < n - k + i {
                        self.idx[i] += 1;
                        for j in i + 1..k {
                            self.idx[j] = self.idx[j - 1] + 1;
                        }
                        advanced = true;
                        break;
                    }
                }
                if !advanced {
                    self.size_pos += 1;
                    self.fresh = true;
                    continue;
                }
            }
            return Some(IndexSet::from_sorted(self.idx.iter().map(|&i| self.elems[i]).collect()));
        }
    }
}

/// All 2^|s| subsets.
pub fn subsets(s: &IndexSet) -> Subsets {
    Subsets::with_sizes(s, (0..=s.len()).collect())
}

/// All subsets of even size (∅ included).
pub fn even_subsets(s: &IndexSet) -> Subsets {
    Subsets::with_sizes(s, (0..=s.len()).step_by(2).collect())
}

/// Even-size subsets other than `s` itself (∅ included).
pub fn proper_even_subsets(s: &IndexSet) -> Subsets {
    Subsets::with_sizes(s, (0..s.len()).step_by(2).collect())
}

/// All ordered pairs (Q, M) with Q ∪ M = s, Q ∩ M = ∅.
pub fn two_way_splits(s: &IndexSet) -> impl Iterator<Item = (IndexSet, IndexSet)> + '_ {
    subsets(s).map(move |q| {
        let m = s.minus(&q);
        (q, m)
    })
}

/// Set of unordered pairs covering an even-size set; each pair is (a, b), a < b.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct Matching {
    pub pairs: Vec<(usize, usize)>,
}

/// All (|s|−1)!! perfect matchings.
pub fn perfect_matchings(s: &IndexSet) -> Result<Vec<Matching>> {
    if s.len() % 2 == 1 {
        return domain(format!("perfect matchings need an even-size set, got {}", s.len()));
    }
    let mut out = Vec::new();
    let mut cur = Vec::new();
    matchings_rec(s.elements(), &mut cur, &mut out);
    Ok(out)
}

fn matchings_rec(rest: &[usize], cur: &mut Vec<(usize, usize)>, out: &mut Vec<Matching>) {
    if rest.is_empty() {
        out.push(Matching { pairs: cur.clone() });
        return;
    }
    let a = rest[0];
    for i in 1..rest.len() {
        let mut remaining: Vec<usize> = rest[1..i].to_vec();
        remaining.extend_from_slice(&rest[i + 1..]);
        cur.push((a, rest[i]));
        matchings_rec(&remaining, cur, out);
        cur.pop();
    }
}

/// A block of size one or two.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Block {
    Single(usize),
    Pair(usize, usize),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct PairSingletonPartition {
    pub blocks: Vec<Block>,
}

/// All partitions into blocks of size ≤ 2 (involution numbers many).
pub fn pair_singleton_partitions(s: &IndexSet) -> Vec<PairSingletonPartition> {
    let mut out = Vec::new();
    let mut cur = Vec::new();
    psp_rec(s.elements(), &mut cur, &mut out);
    out
}

fn psp_rec(rest: &[usize], cur: &mut Vec<Block>, out: &mut Vec<PairSingletonPartition>) {
    if rest.is_empty() {
        out.push(PairSingletonPartition { blocks: cur.clone() });
        return;
    }
    let a = rest[0];
    cur.push(Block::Single(a));
    psp_rec(&rest[1..], cur, out);
    cur.pop();
    for i in 1..rest.len() {
        let mut remaining: Vec<usize> = rest[1..i].to_vec();
        remaining.extend_from_slice(&rest[i + 1..]);
        cur.push(Block::Pair(a, rest[i]));
        psp_rec(&remaining, cur, out);
        cur.pop();
    }
}

/// An ordered split (I₁, I₁ᶜ, I₂, I₂ᶜ) of a set into four disjoint blocks.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct FourWaySplit {
    pub i1: IndexSet,
    pub i1c: IndexSet,
    pub i2: IndexSet,
    pub i2c: IndexSet,
}

/// Streaming enumeration of all four-way splits with I₁ᶜ and I₂ᶜ nonempty.
pub fn four_way_splits_with_nonempty(s: &IndexSet) -> impl Iterator<Item = FourWaySplit> + '_ {
    let n = s.len();
    let total: u64 = if n < 2 { 0 } else { 4u64.pow(n as u32) };
    (0..total).filter_map(move |mut code| {
        let mut blocks: [Vec<usize>; 4] = Default::default();
        for &e in s.elements() {
            blocks[(code % 4) as usize].push(e);
            code /= 4;
        }
        if blocks[1].is_empty() || blocks[3].is_empty() {
            return None;
        }
        let [a, b, c, d] = blocks;
        Some(FourWaySplit {
            i1: IndexSet::from_sorted(a),
            i1c: IndexSet::from_sorted(b),
            i2: IndexSet::from_sorted(c),
            i2c: IndexSet::from_sorted(d),
        })
    })
}

/// Involution number I(m): count of pair/singleton partitions of m elements.
pub fn involution_number(m: usize) -> u64 {
    let (mut a, mut b) = (1u64, 1u64);
    for k in 1..m {
        let c = b + k as u64 * a;
        a = b;
        b = c;
    }
    b
}

/// (m − 1)!! for even m (1 for m = 0).
pub fn double_factorial_odd(m: usize) -> u64 {
    (1..m).step_by(2).map(|x| x as u64).product()
}
