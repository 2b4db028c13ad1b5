//! Valency types and diameter-four trees, represented as necklaces of black
//! vertex valencies around the central white vertex.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_traits::ToPrimitive;

use crate::algebra::{factorial, Integer};
use crate::error::{Error, Result};

/// Sorted positive valencies `(a_1, ..., a_n)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ValencyType {
    a: Vec<u64>,
}

impl ValencyType {
    /// Builds a type from valencies in any order; they are sorted.
    pub fn new(mut a: Vec<u64>) -> Result<Self> {
        if a.is_empty() {
            return Err(Error::DegenerateInput("empty valency type".into()));
        }
        if a.contains(&0) {
            return Err(Error::DegenerateInput("valencies must be positive".into()));
        }
        a.sort_unstable();
        Ok(ValencyType { a })
    }

    pub fn from_slice(a: &[u64]) -> Result<Self> {
        Self::new(a.to_vec())
    }

    pub fn valencies(&self) -> &[u64] {
        &self.a
    }

    pub fn n(&self) -> usize {
        self.a.len()
    }

    /// The degree `N = a_1 + ... + a_n`.
    pub fn degree(&self) -> u64 {
        self.a.iter().sum()
    }

    /// Number of slots carrying the valency `a_i`.
    pub fn multiplicity(&self, i: usize) -> usize {
        let v = self.a[i];
        self.a.iter().filter(|&&x| x == v).count()
    }

    /// All valencies pairwise distinct.
    pub fn is_generic(&self) -> bool {
        self.a.windows(2).all(|w| w[0] != w[1])
    }

    /// The type with slot `i` removed.
    pub fn omit(&self, i: usize) -> Result<Self> {
        if i >= self.a.len() {
            return Err(Error::InvalidArgument(format!(
                "slot {} out of range",
                i + 1
            )));
        }
        let mut a = self.a.clone();
        a.remove(i);
        Self::new(a)
    }

    fn counts(&self) -> BTreeMap<u64, usize> {
        let mut c = BTreeMap::new();
        for &v in &self.a {
            *c.entry(v).or_insert(0) += 1;
        }
        c
    }
}

impl fmt::Display for ValencyType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.a.iter().map(u64::to_string).collect();
        write!(f, "({})", parts.join(","))
    }
}

impl FromStr for ValencyType {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let a = s
            .trim()
            .trim_start_matches('(')
            .trim_end_matches(')')
            .split(',')
            .map(|t| {
                t.trim()
                    .parse::<u64>()
                    .map_err(|_| Error::InvalidArgument(format!("bad valency '{t}'")))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(a)
    }
}

/// A planar tree class: a necklace in its lexicographically least rotation
/// and the order of its rotational symmetry group.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PlanarTreeClass {
    pub necklace: Vec<u64>,
    pub aut_order: usize,
}

impl PlanarTreeClass {
    pub fn n(&self) -> usize {
        self.necklace.len()
    }
}

fn least_rotation(s: &[u64]) -> Vec<u64> {
    (0..s.len())
        .map(|r| s[r..].iter().chain(&s[..r]).copied().collect::<Vec<_>>())
        .min()
        .unwrap_or_default()
}

fn period(s: &[u64]) -> usize {
    let n = s.len();
    (1..=n)
        .find(|&d| n.is_multiple_of(d) && (0..n).all(|i| s[i] == s[(i + d) % n]))
        .unwrap_or(n)
}

/// Builds the tree class of a cyclic arrangement.
pub fn tree_from_necklace(s: &[u64]) -> PlanarTreeClass {
    PlanarTreeClass {
        necklace: least_rotation(s),
        aut_order: s.len() / period(s),
    }
}

fn next_permutation(v: &mut [u64]) -> bool {
    let n = v.len();
    if n < 2 {
        return false;
    }
    let Some(i) = (0..n - 1).rev().find(|&i| v[i] < v[i + 1]) else {
        return false;
    };
    let j = (i + 1..n).rev().find(|&j| v[j] > v[i]).unwrap();
    v.swap(i, j);
    v[i + 1..].reverse();
    true
}

/// All trees of the type, ordered by canonical necklace.
pub fn enumerate_trees(t: &ValencyType) -> Vec<PlanarTreeClass> {
    let mut v = t.a.clone();
    let mut out = Vec::new();
    loop {
        if least_rotation(&v) == v {
            out.push(tree_from_necklace(&v));
        }
        if !next_permutation(&mut v) {
            break;
        }
    }
    out
}

/// Number of trees of the type by Burnside's lemma over rotations.
pub fn count_trees(t: &ValencyType) -> Integer {
    let n = t.n();
    let counts: Vec<usize> = t.counts().into_values().collect();
    let mut total = Integer::from(0);
    for r in 0..n {
        let g = num_integer::gcd(r, n);
        let cycle = n / g;
        if counts.iter().all(|c| c % cycle == 0) {
            let mut fixed = factorial(g as u64);
            for c in &counts {
                fixed /= factorial((c / cycle) as u64);
            }
            total += fixed;
        }
    }
    total / Integer::from(n)
}

/// Normalized models of a tree: `n / m`.
pub fn normalized_model_count(tree: &PlanarTreeClass) -> usize {
    tree.n() / tree.aut_order
}

/// `a_i`-normalized models of a tree: `n(a_i) / m`, where `n(a_i)` counts
/// the beads equal to `a_i`.
pub fn ai_normalized_model_count(
    tree: &PlanarTreeClass,
    t: &ValencyType,
    i: usize,
) -> Result<usize> {
    let v =
        *t.a.get(i)
            .ok_or_else(|| Error::InvalidArgument(format!("slot {} out of range", i + 1)))?;
    let mult = tree.necklace.iter().filter(|&&x| x == v).count();
    Ok(mult / tree.aut_order)
}

/// Sum over trees of `n / m`, which equals the number of distinct linear
/// arrangements `n! / prod(c_v!)`.
pub fn predicted_normalized_models(t: &ValencyType) -> u64 {
    let mut acc = factorial(t.n() as u64);
    for c in t.counts().values() {
        acc /= factorial(*c as u64);
    }
    acc.to_u64().expect("arrangement count fits in u64")
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeSet;

    fn ty(a: &[u64]) -> ValencyType {
        ValencyType::from_slice(a).unwrap()
    }

    /// Necklaces by materializing every arrangement and collecting the
    /// rotation classes.
    fn brute_necklaces(t: &ValencyType) -> BTreeSet<Vec<u64>> {
        fn rec(rest: &mut Vec<u64>, cur: &mut Vec<u64>, out: &mut BTreeSet<Vec<u64>>) {
            if rest.is_empty() {
                let n = cur.len();
                let class: BTreeSet<Vec<u64>> = (0..n)
                    .map(|r| cur[r..].iter().chain(&cur[..r]).copied().collect())
                    .collect();
                out.insert(class.into_iter().next().unwrap());
                return;
            }
            for i in 0..rest.len() {
                let x = rest.remove(i);
                cur.push(x);
                rec(rest, cur, out);
                cur.pop();
                rest.insert(i, x);
            }
        }
        let mut out = BTreeSet::new();
        rec(&mut t.valencies().to_vec(), &mut Vec::new(), &mut out);
        out
    }

    #[test]
    fn enumerate_examples() {
        let trees = enumerate_trees(&ty(&[1, 2, 3]));
        assert_eq!(trees.len(), 2);
        assert!(trees.iter().all(|t| t.aut_order == 1));
        let trees = enumerate_trees(&ty(&[1, 1, 2, 3]));
        assert_eq!(trees.len(), 3);
        assert!(trees.iter().all(|t| t.aut_order == 1));
        let trees = enumerate_trees(&ty(&[1, 1]));
        assert_eq!(
            trees,
            vec![PlanarTreeClass {
                necklace: vec![1, 1],
                aut_order: 2
            }]
        );
    }

    #[test]
    fn count_examples() {
        assert_eq!(count_trees(&ty(&[3, 8])), Integer::from(1));
        assert_eq!(count_trees(&ty(&[1, 2, 3, 4, 10])), Integer::from(24));
        assert_eq!(count_trees(&ty(&[1, 1, 1, 9, 17])), Integer::from(4));
    }

    #[test]
    fn model_count_examples() {
        let t = ty(&[1, 2, 3]);
        assert_eq!(normalized_model_count(&enumerate_trees(&t)[0]), 3);
        let t11 = ty(&[1, 1]);
        let tree = &enumerate_trees(&t11)[0];
        assert_eq!(normalized_model_count(tree), 1);
        assert_eq!(ai_normalized_model_count(tree, &t11, 0).unwrap(), 1);
        let t = ty(&[1, 1, 2, 3]);
        assert_eq!(normalized_model_count(&enumerate_trees(&t)[0]), 4);
        let t = ty(&[1, 1, 1, 9, 17]);
        let tree = &enumerate_trees(&t)[0];
        assert_eq!(ai_normalized_model_count(tree, &t, 0).unwrap(), 3);
        assert_eq!(ai_normalized_model_count(tree, &t, 4).unwrap(), 1);
    }

    #[test]
    fn distinct_types_give_factorial_counts() {
        for n in 1..=7u64 {
            let t = ValencyType::new((1..=n).collect()).unwrap();
            let expected = factorial(n - 1);
            assert_eq!(count_trees(&t), expected);
            let trees = enumerate_trees(&t);
            assert_eq!(Integer::from(trees.len()), expected);
            assert!(trees.iter().all(|t| t.aut_order == 1));
        }
    }

    #[test]
    fn burnside_matches_materialized_necklaces() {
        let types: &[&[u64]] = &[
            &[1, 1, 1, 1],
            &[1, 1, 2, 2],
            &[1, 1, 1, 2, 2, 2],
            &[1, 1, 2, 2, 3, 3],
            &[1, 1, 1, 1, 2, 2],
            &[2, 2, 2, 2, 2, 2, 2],
            &[1, 1, 1, 2, 2, 3, 3],
            &[1, 2, 2, 3, 3, 3, 3],
        ];
        for a in types {
            let t = ty(a);
            let brute = brute_necklaces(&t);
            let trees = enumerate_trees(&t);
            let listed: BTreeSet<Vec<u64>> = trees.iter().map(|t| t.necklace.clone()).collect();
            assert_eq!(listed.len(), trees.len(), "duplicate necklace for {t}");
            assert_eq!(listed, brute, "{t}");
            assert_eq!(count_trees(&t), Integer::from(brute.len()));
            let total: usize = trees.iter().map(normalized_model_count).sum();
            assert_eq!(total as u64, predicted_normalized_models(&t));
        }
    }

    #[test]
    fn parse_and_display() {
        let t: ValencyType = "3,1,2".parse().unwrap();
        assert_eq!(t.to_string(), "(1,2,3)");
        assert!("1,0".parse::<ValencyType>().is_err());
        assert!("1,x".parse::<ValencyType>().is_err());
    }
}
