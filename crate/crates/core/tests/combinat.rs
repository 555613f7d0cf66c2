use std::collections::HashSet;

use symplectic_nlevel::combinat::*;

fn set(v: &[usize]) -> IndexSet {
    IndexSet::new(v.to_vec()).unwrap()
}

#[test]
fn index_set_invariants() {
    assert!(IndexSet::new(vec![1, 1]).is_err());
    assert_eq!(set(&[5, 1, 3]).elements(), &[1, 3, 5]);
    assert_eq!(set(&[1, 2, 3]).minus(&set(&[2])), set(&[1, 3]));
    assert_eq!(set(&[1]).union(&set(&[0])), set(&[0, 1]));
}

#[test]
fn two_way_split_counts() {
    assert_eq!(two_way_splits(&set(&[1])).count(), 2);
    assert_eq!(two_way_splits(&set(&[1, 2, 3])).count(), 8);
    let e: Vec<_> = two_way_splits(&IndexSet::empty()).collect();
    assert_eq!(e, vec![(IndexSet::empty(), IndexSet::empty())]);
    for m in 0..=8 {
        let s = IndexSet::range(m);
        let all: HashSet<_> = two_way_splits(&s).collect();
        assert_eq!(all.len(), 1 << m);
        for (q, r) in &all {
            assert_eq!(q.union(r), s);
            assert_eq!(q.len() + r.len(), m);
        }
    }
}

#[test]
fn even_subsets_of_the_worked_example() {
    let got: HashSet<IndexSet> = even_subsets(&set(&[1, 2, 5, 7])).collect();
    let want: HashSet<IndexSet> =
        [vec![], vec![1, 2], vec![1, 5], vec![1, 7], vec![2, 5], vec![2, 7], vec![5, 7], vec![1, 2, 5, 7]]
            .into_iter()
            .map(|v| set(&v))
            .collect();
    assert_eq!(got, want);
    assert_eq!(even_subsets(&IndexSet::empty()).collect::<Vec<_>>(), vec![IndexSet::empty()]);
    assert_eq!(proper_even_subsets(&set(&[1, 2])).collect::<Vec<_>>(), vec![IndexSet::empty()]);
    assert_eq!(subsets(&IndexSet::range(5)).count(), 32);
}

#[test]
fn matchings_of_the_worked_example() {
    let ms = perfect_matchings(&set(&[1, 2, 5, 7])).unwrap();
    let got: HashSet<Vec<(usize, usize)>> = ms.into_iter().map(|m| m.pairs).collect();
    let want: HashSet<Vec<(usize, usize)>> =
        [vec![(1, 5), (2, 7)], vec![(1, 7), (2, 5)], vec![(1, 2), (5, 7)]].into_iter().collect();
    assert_eq!(got, want);
    assert_eq!(perfect_matchings(&IndexSet::empty()).unwrap().len(), 1);
    assert!(perfect_matchings(&set(&[1, 2, 3])).is_err());
    for m in (0..=8).step_by(2) {
        let ms = perfect_matchings(&IndexSet::range(m)).unwrap();
        assert_eq!(ms.len() as u64, double_factorial_odd(m));
        let uniq: HashSet<_> = ms.iter().collect();
        assert_eq!(uniq.len(), ms.len());
        for mt in &ms {
            let mut cover: Vec<usize> = mt.pairs.iter().flat_map(|&(a, b)| [a, b]).collect();
            cover.sort();
            assert_eq!(cover, (0..m).collect::<Vec<_>>());
        }
    }
    assert_eq!(double_factorial_odd(6), 15);
}

// brute force: count involutions of {0..m−1}
fn involutions_brute(m: usize) -> u64 {
    fn rec(free: &mut Vec<bool>) -> u64 {
        let Some(a) = free.iter().position(|&x| x) else { return 1 };
        free[a] = false;
        let mut c = rec(free);
        for b in a + 1..free.len() {
            if free[b] {
                free[b] = false;
                c += rec(free);
                free[b] = true;
            }
        }
        free[a] = true;
        c
    }
    rec(&mut vec![true; m])
}

#[test]
fn pair_singleton_partition_counts() {
    assert_eq!(pair_singleton_partitions(&set(&[1, 2])).len(), 2);
    assert_eq!(pair_singleton_partitions(&IndexSet::empty()).len(), 1);
    let known = [1, 1, 2, 4, 10, 26];
    for (m, &k) in known.iter().enumerate() {
        assert_eq!(involution_number(m), k);
    }
    for m in 0..=8 {
        let ps = pair_singleton_partitions(&IndexSet::range(m));
        assert_eq!(ps.len() as u64, involutions_brute(m));
        let uniq: HashSet<_> = ps.iter().collect();
        assert_eq!(uniq.len(), ps.len());
        for p in &ps {
            let mut cover = Vec::new();
            for b in &p.blocks {
                match *b {
                    Block::Single(a) => cover.push(a),
                    Block::Pair(a, c) => cover.extend([a, c]),
                }
            }
            cover.sort();
            assert_eq!(cover, (0..m).collect::<Vec<_>>());
        }
    }
}

#[test]
fn four_way_splits_match_brute_force() {
    let two: Vec<_> = four_way_splits_with_nonempty(&set(&[1, 2])).collect();
    assert_eq!(two.len(), 2);
    for s in &two {
        assert!(s.i1.is_empty() && s.i2.is_empty());
    }
    assert_eq!(four_way_splits_with_nonempty(&set(&[1])).count(), 0);
    for m in 2..=6 {
        let brute = (0..4u32.pow(m as u32))
            .filter(|&c| {
                let digits: Vec<u32> = (0..m).map(|i| (c / 4u32.pow(i as u32)) % 4).collect();
                digits.contains(&1) && digits.contains(&3)
            })
            .count();
        let s = IndexSet::range(m);
        let got: HashSet<_> = four_way_splits_with_nonempty(&s).collect();
        assert_eq!(got.len(), brute);
        for f in &got {
            assert_eq!(f.i1.union(&f.i1c).union(&f.i2).union(&f.i2c), s);
            assert_eq!(f.i1.len() + f.i1c.len() + f.i2.len() + f.i2c.len(), m);
        }
    }
}
