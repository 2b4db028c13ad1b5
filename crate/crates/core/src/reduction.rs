//! Divisibility invariants `d`, `d_i`, `d_inf`, prime classification,
//! p-congruence of types, ramification indices and cyclotomic orbit counts.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use rayon::prelude::*;

use crate::algebra::{
    factorial, factorize, is_prime_u64, multiplicative_order, valuation_p, Gf, Integer,
};
use crate::equations::{check_conditions, Model, ModelKind};
use crate::error::{Error, Result};
use crate::trees::ValencyType;

/// Subset enumeration limit.
pub const MAX_SUBSET_N: usize = 20;
/// Exact products are kept only below this many bits.
pub const EXACT_BITS: u64 = 4096;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DVariant {
    Full,
    /// Omit the given 0-based slot.
    Omit(usize),
    /// Proper nonempty subsets only.
    Proper,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DInvariant {
    pub primes: BTreeSet<u64>,
    pub exact: Option<Integer>,
}

impl DInvariant {
    pub fn divisible_by(&self, p: u64) -> bool {
        self.primes.contains(&p)
    }
}

/// Multiset of nonempty subset sums; `proper` drops the full set.
fn subset_sums(a: &[u64], proper: bool) -> BTreeMap<u64, u64> {
    let n = a.len();
    let total = 1u64 << n;
    let split = n.min(8);
    let high_bits = n - split;
    (0..1u64 << split)
        .into_par_iter()
        .map(|low| {
            let mut acc = BTreeMap::new();
            let base: u64 = (0..split).filter(|b| low >> b & 1 == 1).map(|b| a[b]).sum();
            for high in 0..1u64 << high_bits {
                let mask = low | high << split;
                if mask == 0 || (proper && mask == total - 1) {
                    continue;
                }
                let s = base
                    + (0..high_bits)
                        .filter(|b| high >> b & 1 == 1)
                        .map(|b| a[split + b])
                        .sum::<u64>();
                *acc.entry(s).or_insert(0u64) += 1;
            }
            acc
        })
        .reduce(BTreeMap::new, |mut x, y| {
            for (k, v) in y {
                *x.entry(k).or_insert(0) += v;
            }
            x
        })
}

pub fn d_invariant(t: &ValencyType, variant: DVariant) -> Result<DInvariant> {
    if t.n() > MAX_SUBSET_N {
        return Err(Error::SearchTooLarge(format!(
            "{} slots exceed the subset limit {MAX_SUBSET_N}",
            t.n()
        )));
    }
    let (a, proper) = match variant {
        DVariant::Full => (t.valencies().to_vec(), false),
        DVariant::Proper => (t.valencies().to_vec(), true),
        DVariant::Omit(i) => (t.omit(i)?.valencies().to_vec(), false),
    };
    let sums = subset_sums(&a, proper);
    let mut primes = BTreeSet::new();
    let mut bits = 0u64;
    for (&s, &mult) in &sums {
        let f = factorize(&Integer::from(s))?;
        for q in f.factors.keys() {
            primes.insert(u64::try_from(q).expect("prime of a u64 sum"));
        }
        bits = bits.saturating_add(mult.saturating_mul(64 - s.leading_zeros() as u64));
    }
    let exact = (bits <= EXACT_BITS).then(|| {
        sums.iter().fold(Integer::from(1), |acc, (&s, &m)| {
            acc * Integer::from(s).pow(m as u32)
        })
    });
    Ok(DInvariant { primes, exact })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PrimeClass {
    Good,
    /// All 0-based slots `i` with `p | a_i` and `p` not dividing `d_i`.
    AiRegular(Vec<usize>),
    RegularAtInfinity,
    WildUnclassified,
}

impl fmt::Display for PrimeClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PrimeClass::Good => write!(f, "GOOD"),
            PrimeClass::AiRegular(slots) => {
                let s: Vec<String> = slots.iter().map(|i| (i + 1).to_string()).collect();
                write!(f, "AI_REGULAR({})", s.join(","))
            }
            PrimeClass::RegularAtInfinity => write!(f, "REGULAR_AT_INFINITY"),
            PrimeClass::WildUnclassified => write!(f, "WILD_UNCLASSIFIED"),
        }
    }
}

pub fn classify_prime(t: &ValencyType, p: u64) -> Result<PrimeClass> {
    if !is_prime_u64(p) {
        return Err(Error::InvalidArgument(format!("{p} is not prime")));
    }
    if !d_invariant(t, DVariant::Full)?.divisible_by(p) {
        return Ok(PrimeClass::Good);
    }
    let mut slots = Vec::new();
    for (i, &a) in t.valencies().iter().enumerate() {
        if a % p == 0 && t.n() > 1 && !d_invariant(t, DVariant::Omit(i))?.divisible_by(p) {
            slots.push(i);
        }
    }
    if !slots.is_empty() {
        return Ok(PrimeClass::AiRegular(slots));
    }
    if t.degree().is_multiple_of(p) && !d_invariant(t, DVariant::Proper)?.divisible_by(p) {
        return Ok(PrimeClass::RegularAtInfinity);
    }
    Ok(PrimeClass::WildUnclassified)
}

#[derive(Clone, Debug)]
pub struct ReductionReport {
    pub valency_type: ValencyType,
    pub d: DInvariant,
    pub d_omit: Vec<DInvariant>,
    pub d_proper: DInvariant,
    /// Classification and, for regular primes, ramification data.
    pub primes: Vec<(u64, PrimeClass, Option<RamificationIndex>)>,
}

/// Invariants of `t` plus the classification of every prime dividing `d`.
pub fn reduction_report(t: &ValencyType) -> Result<ReductionReport> {
    let d = d_invariant(t, DVariant::Full)?;
    let d_omit = (0..t.n())
        .map(|i| d_invariant(t, DVariant::Omit(i)))
        .collect::<Result<Vec<_>>>()?;
    let d_proper = d_invariant(t, DVariant::Proper)?;
    let mut primes = Vec::new();
    for &p in &d.primes {
        let class = classify_prime(t, p)?;
        let ram = match &class {
            PrimeClass::AiRegular(slots) => Some(combinatorial_ramification_index(
                t,
                Locus::Zero(slots[0]),
                p,
            )?),
            PrimeClass::RegularAtInfinity => {
                Some(combinatorial_ramification_index(t, Locus::Infinity, p)?)
            }
            _ => None,
        };
        primes.push((p, class, ram));
    }
    Ok(ReductionReport {
        valency_type: t.clone(),
        d,
        d_omit,
        d_proper,
        primes,
    })
}

/// Least `h` with `p^h > n`.
pub fn h_p(n: u64, p: u64) -> u32 {
    let mut h = 0;
    let mut q: u128 = 1;
    while q <= n as u128 {
        q *= p as u128;
        h += 1;
    }
    h
}

/// A permutation `sigma` (0-based, `a_i -> b_{sigma(i)}`) with
/// `a_i = b_{sigma(i)} mod p^h`, `h = h_p(n)`. The strict variant also
/// requires `a_i = a_j` iff `b_{sigma(i)} = b_{sigma(j)}`.
pub fn p_congruent(t1: &ValencyType, t2: &ValencyType, p: u64, strict: bool) -> Option<Vec<usize>> {
    let n = t1.n();
    if n != t2.n() {
        return None;
    }
    let m = (p as u128).pow(h_p(n as u64, p));
    let (a, b) = (t1.valencies(), t2.valencies());
    if !strict {
        let mut pool: BTreeMap<u128, Vec<usize>> = BTreeMap::new();
        for (j, &v) in b.iter().enumerate().rev() {
            pool.entry(v as u128 % m).or_default().push(j);
        }
        return a
            .iter()
            .map(|&v| pool.get_mut(&(v as u128 % m)).and_then(Vec::pop))
            .collect();
    }
    // Match blocks of equal values by (residue, block size).
    let blocks = |v: &[u64]| -> BTreeMap<u64, Vec<usize>> {
        let mut out: BTreeMap<u64, Vec<usize>> = BTreeMap::new();
        for (i, &x) in v.iter().enumerate() {
            out.entry(x).or_default().push(i);
        }
        out
    };
    let (ba, bb) = (blocks(a), blocks(b));
    let mut pool: BTreeMap<(u128, usize), Vec<&Vec<usize>>> = BTreeMap::new();
    for (&v, slots) in bb.iter().rev() {
        pool.entry((v as u128 % m, slots.len()))
            .or_default()
            .push(slots);
    }
    let mut sigma = vec![usize::MAX; n];
    for (&v, slots) in &ba {
        let target = pool.get_mut(&(v as u128 % m, slots.len()))?.pop()?;
        for (&i, &j) in slots.iter().zip(target) {
            sigma[i] = j;
        }
    }
    Some(sigma)
}

fn is_admissible(t1: &ValencyType, t2: &ValencyType, p: u64, perm: &[usize]) -> bool {
    let n = t1.n();
    if n != t2.n() || perm.len() != n {
        return false;
    }
    let mut seen = vec![false; n];
    for &j in perm {
        if j >= n || std::mem::replace(&mut seen[j], true) {
            return false;
        }
    }
    let m = (p as u128).pow(h_p(n as u64, p));
    (0..n).all(|i| t1.valencies()[i] as u128 % m == t2.valencies()[perm[i]] as u128 % m)
}

/// Replaces the exponent of root `i` by `b_{perm(i)}`; the result is a
/// standard model of the target type, sorted by exponent.
pub fn transport_model(
    model: &Model<Gf>,
    target: &ValencyType,
    perm: &[usize],
) -> Result<Model<Gf>> {
    let p = model
        .roots
        .first()
        .map(|r| r.context().characteristic())
        .ok_or_else(|| Error::DegenerateInput("empty model".into()))?;
    let source = ValencyType::new(model.exponents.clone())?;
    if model.exponents != source.valencies() {
        return Err(Error::InvalidArgument(
            "model exponents must be sorted".into(),
        ));
    }
    if !is_admissible(&source, target, p, perm) {
        return Err(Error::BadPermutation(format!(
            "{perm:?} is not admissible for {source} -> {target} at p = {p}"
        )));
    }
    let mut pairs: Vec<(u64, Gf)> = model
        .roots
        .iter()
        .enumerate()
        .map(|(i, x)| (target.valencies()[perm[i]], x.clone()))
        .collect();
    pairs.sort_by(|x, y| x.0.cmp(&y.0).then_with(|| x.1.cmp(&y.1)));
    let (exps, roots) = pairs.into_iter().unzip();
    let out = Model::new(exps, roots, ModelKind::Standard)?;
    if !check_conditions(&out)?.i {
        return Err(Error::InternalInconsistency(
            "transported model fails condition i".into(),
        ));
    }
    Ok(out)
}

/// A strictly p-congruent type with `a_i <= n p^h`: each value is reduced
/// to its residue in `1..=p^h`, and values sharing a residue are separated
/// by multiples of `p^h`.
pub fn normalize_exponents(t: &ValencyType, p: u64) -> Result<ValencyType> {
    let n = t.n();
    let m = p
        .checked_pow(h_p(n as u64, p))
        .ok_or_else(|| Error::InvalidArgument("modulus overflow".into()))?;
    let mut used: BTreeMap<u64, u64> = BTreeMap::new();
    let mut assigned: BTreeMap<u64, u64> = BTreeMap::new();
    let mut out = Vec::with_capacity(n);
    for &a in t.valencies() {
        let v = *assigned.entry(a).or_insert_with(|| {
            let r = match a % m {
                0 => m,
                r => r,
            };
            let k = used.entry(r).or_insert(0);
            *k += 1;
            r + (*k - 1) * m
        });
        out.push(v);
    }
    ValencyType::new(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Locus {
    /// The 0-based slot `i`.
    Zero(usize),
    Infinity,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RamificationIndex {
    pub locus: Locus,
    pub e: u64,
    pub n0: u64,
    pub h: u32,
    /// Sizes of the classes of equal valencies.
    pub classes: Vec<u64>,
}

fn class_sizes(a: &[u64]) -> Vec<u64> {
    let mut c: BTreeMap<u64, u64> = BTreeMap::new();
    for &v in a {
        *c.entry(v).or_insert(0) += 1;
    }
    c.into_values().collect()
}

pub fn combinatorial_ramification_index(
    t: &ValencyType,
    locus: Locus,
    p: u64,
) -> Result<RamificationIndex> {
    let n = t.n() as u64;
    let class = classify_prime(t, p)?;
    let (classes, n0, h) = match locus {
        Locus::Zero(i) => {
            if !matches!(&class, PrimeClass::AiRegular(s) if s.contains(&i)) {
                return Err(Error::NotRegular(format!(
                    "p = {p} is not regular at slot {} of {t}",
                    i + 1
                )));
            }
            let classes = class_sizes(t.omit(i)?.valencies());
            let n0 = classes.iter().fold(0, |g, &c| num_integer::gcd(g, c));
            let h = valuation_p(&Integer::from(t.valencies()[i]), p).unwrap();
            (classes, n0, h)
        }
        Locus::Infinity => {
            if class != PrimeClass::RegularAtInfinity {
                return Err(Error::NotRegular(format!(
                    "p = {p} is not regular at infinity for {t}"
                )));
            }
            let classes = class_sizes(t.valencies());
            let mut n0 = 0;
            for (i, &ci) in classes.iter().enumerate() {
                n0 = num_integer::gcd(n0, ci * (ci - 1));
                for &cj in &classes[i + 1..] {
                    n0 = num_integer::gcd(n0, ci * cj);
                }
            }
            let h = valuation_p(&Integer::from(t.degree()), p).unwrap();
            (classes, n0, h)
        }
    };
    let e = (n - 1) / num_integer::gcd(n - 1, h as u64 * n0);
    Ok(RamificationIndex {
        locus,
        e,
        n0,
        h,
        classes,
    })
}

/// `(n-1)! / ord_n(p)` for generic types p-congruent to `(1,...,1)`.
pub fn cyclotomic_orbit_count(t: &ValencyType, p: u64) -> Result<Integer> {
    let n = t.n() as u64;
    if !t.is_generic() {
        return Err(Error::NotApplicable(format!("{t} is not generic")));
    }
    if n.is_multiple_of(p) {
        return Err(Error::NotApplicable(format!("p = {p} divides n = {n}")));
    }
    let ones = ValencyType::new(vec![1; n as usize])?;
    if p_congruent(t, &ones, p, false).is_none() {
        return Err(Error::NotApplicable(format!(
            "{t} is not {p}-congruent to the all-ones type"
        )));
    }
    let ord = multiplicative_order(p, n).expect("p coprime to n");
    Ok(factorial(n - 1) / Integer::from(ord))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RamificationBound {
    pub locus: Locus,
    pub lower: u64,
    pub upper: u64,
    pub totally_determined: bool,
}

/// The index `e` (which divides the ramification index of primes above `p`
/// in the field of moduli) and the upper bound `(n-1)/gcd(n-1,h)`.
pub fn ramification_bound_report(t: &ValencyType, p: u64) -> Result<RamificationBound> {
    let locus = match classify_prime(t, p)? {
        PrimeClass::AiRegular(slots) => Locus::Zero(slots[0]),
        PrimeClass::RegularAtInfinity => Locus::Infinity,
        other => return Err(Error::NotRegular(format!("p = {p} is {other} for {t}"))),
    };
    let r = combinatorial_ramification_index(t, locus, p)?;
    let n = t.n() as u64;
    let upper = (n - 1) / num_integer::gcd(n - 1, r.h as u64);
    Ok(RamificationBound {
        locus,
        lower: r.e,
        upper,
        totally_determined: r.e == upper,
    })
}
