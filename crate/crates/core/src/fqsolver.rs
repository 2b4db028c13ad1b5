//! Exhaustive search for models over `F_{p^k}`, grouping into trees and
//! Frobenius orbits.
//!
//! Search: with `x_n = 1`, enumerate `x_1, ..., x_{n-3}`; `psi_1 = 0` makes
//! `x_{n-1}` affine in `u = x_{n-2}`, and `psi_2 = 0` is then a quadratic in
//! `u`. The remaining equations are checked on each candidate, and every
//! survivor is re-verified against all four conditions.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use rayon::prelude::*;

use crate::algebra::{binomial, is_prime_u64, Gf, GfContext, Integer};
use crate::equations::{check_conditions, Model, ModelKind};
use crate::error::{Error, Result};
use crate::trees::{predicted_normalized_models, ValencyType};

pub const MAX_N: usize = 6;
pub const MAX_FIELD: u64 = 1 << 16;
/// Upper bound on `q^{n-3}`, the number of enumerated prefixes.
pub const MAX_WORK: u64 = 1 << 28;
pub const DEFAULT_K_MAX: usize = 8;

/// Tuple of root encodings aligned with the sorted type, roots sorted inside
/// each block of equal valencies.
pub type Tuple = Vec<u32>;

fn ensure_tame(t: &ValencyType, p: u64) -> Result<()> {
    if !is_prime_u64(p) {
        return Err(Error::InvalidArgument(format!("{p} is not prime")));
    }
    let n = t.n() as u64;
    if n.is_multiple_of(p)
        || t.degree().is_multiple_of(p)
        || t.valencies().iter().any(|a| a % p == 0)
    {
        return Err(Error::WildPrime(format!(
            "p = {p} divides n * a_1 ... a_n * N for {t}"
        )));
    }
    Ok(())
}

fn check_bounds(t: &ValencyType, p: u64, k: usize) -> Result<u64> {
    let n = t.n();
    if n > MAX_N {
        return Err(Error::SearchTooLarge(format!("n = {n} exceeds {MAX_N}")));
    }
    let q = p
        .checked_pow(k as u32)
        .filter(|&q| q <= MAX_FIELD)
        .ok_or_else(|| Error::SearchTooLarge(format!("{p}^{k} exceeds {MAX_FIELD}")))?;
    let work = (0..n.saturating_sub(3)).try_fold(1u64, |acc, _| acc.checked_mul(q));
    match work {
        Some(w) if w <= MAX_WORK => Ok(q),
        _ => Err(Error::SearchTooLarge(format!(
            "{q}^{} prefixes exceed the work budget {MAX_WORK}",
            n - 3
        ))),
    }
}

/// Sorts roots within blocks of equal valencies.
pub fn canonical(t: &ValencyType, roots: &[u32]) -> Tuple {
    let a = t.valencies();
    let mut out = roots.to_vec();
    let mut s = 0;
    while s < a.len() {
        let e = (s..a.len()).find(|&i| a[i] != a[s]).unwrap_or(a.len());
        out[s..e].sort_unstable();
        s = e;
    }
    out
}

/// Precomputed field data for the inner loop.
struct Searcher<'a> {
    f: &'a GfContext,
    t: &'a ValencyType,
    a: Vec<u32>,
    c2: Vec<u32>,
    use_phi: bool,
    /// `C(a_i, k)` for `k < n`.
    binoms: Vec<Vec<u32>>,
    /// Artin-Schreier table: `w` with `w^2 + w = r`, or `u32::MAX`.
    artin_schreier: Vec<u32>,
}

impl<'a> Searcher<'a> {
    fn new(f: &'a GfContext, t: &'a ValencyType) -> Self {
        let p = f.characteristic();
        let a = t
            .valencies()
            .iter()
            .map(|&x| f.from_i64((x % p) as i64))
            .collect();
        let c2 = t
            .valencies()
            .iter()
            .map(|&x| f.from_integer(&binomial(x, 2)))
            .collect();
        let mut artin_schreier = Vec::new();
        if p == 2 {
            artin_schreier = vec![u32::MAX; f.order() as usize];
            for w in 0..f.order() {
                let r = f.add(f.mul(w, w), w);
                let slot = &mut artin_schreier[r as usize];
                if *slot == u32::MAX {
                    *slot = w;
                }
            }
        }
        let n = t.n() as u64;
        let binoms = t
            .valencies()
            .iter()
            .map(|&x| {
                (0..n.min(x + 1))
                    .map(|k| f.from_integer(&binomial(x, k)))
                    .collect()
            })
            .collect();
        Searcher {
            f,
            t,
            a,
            c2,
            use_phi: p > n,
            binoms,
            artin_schreier,
        }
    }

    fn sqrt(&self, d: u32) -> Option<u32> {
        let f = self.f;
        if d == 0 {
            return Some(0);
        }
        let l = f.log(d)?;
        let ord = f.order() - 1;
        if f.characteristic() == 2 {
            // Squaring is bijective; halve the log modulo the odd order.
            let half = (l as u64 * (ord as u64).div_ceil(2)) % ord as u64;
            return Some(f.exp(half));
        }
        (l % 2 == 0).then(|| f.exp((l / 2) as u64))
    }

    /// Roots of `A u^2 + B u + C`; `None` means every `u` is a root.
    fn quadratic(&self, qa: u32, qb: u32, qc: u32) -> Option<Vec<u32>> {
        let f = self.f;
        if qa == 0 {
            if qb == 0 {
                return if qc == 0 { None } else { Some(Vec::new()) };
            }
            return Some(vec![f.mul(f.neg(qc), f.inv(qb).unwrap())]);
        }
        let ia = f.inv(qa).unwrap();
        if f.characteristic() == 2 {
            if qb == 0 {
                return Some(vec![self.sqrt(f.mul(qc, ia)).unwrap()]);
            }
            // u = (B/A) w with w^2 + w = CA/B^2.
            let ib = f.inv(qb).unwrap();
            let r = f.mul(f.mul(qc, qa), f.mul(ib, ib));
            let w = self.artin_schreier[r as usize];
            if w == u32::MAX {
                return Some(Vec::new());
            }
            let s = f.mul(qb, ia);
            return Some(vec![f.mul(s, w), f.mul(s, f.add(w, 1))]);
        }
        let four = f.from_i64(4);
        let disc = f.sub(f.mul(qb, qb), f.mul(four, f.mul(qa, qc)));
        let Some(s) = self.sqrt(disc) else {
            return Some(Vec::new());
        };
        let i2a = f.inv(f.mul(f.from_i64(2), qa)).unwrap();
        let nb = f.neg(qb);
        let mut r = vec![f.mul(f.add(nb, s), i2a)];
        if s != 0 {
            r.push(f.mul(f.sub(nb, s), i2a));
        }
        Some(r)
    }

    /// Checks equations `3..n-1` on a full tuple.
    fn rest_vanishes(&self, x: &[u32]) -> bool {
        let f = self.f;
        let n = x.len();
        if n <= 3 {
            return true;
        }
        if self.use_phi {
            (3..n as u64).all(|m| {
                x.iter()
                    .zip(&self.a)
                    .fold(0, |acc, (&xi, &ai)| f.add(acc, f.mul(ai, f.pow(xi, m))))
                    == 0
            })
        } else {
            let len = n;
            let mut acc = vec![0u32; len];
            acc[0] = 1;
            for (&xi, bs) in x.iter().zip(&self.binoms) {
                let mut series = Vec::with_capacity(len);
                let mut pw = 1u32;
                for &b in bs {
                    series.push(f.mul(b, pw));
                    pw = f.mul(pw, xi);
                }
                let mut next = vec![0u32; len];
                for (i, &u) in acc.iter().enumerate() {
                    if u == 0 {
                        continue;
                    }
                    for (j, &v) in series.iter().enumerate() {
                        if i + j >= len {
                            break;
                        }
                        next[i + j] = f.add(next[i + j], f.mul(u, v));
                    }
                }
                acc = next;
            }
            acc[3..].iter().all(|&c| c == 0)
        }
    }

    /// Completes a prefix `x_1..x_{n-3}` (plus `x_n = 1`) into solutions.
    fn complete(&self, prefix: &[u32], l: u32, qk: u32, out: &mut BTreeSet<Tuple>) {
        let f = self.f;
        let n = self.t.n();
        let (iu, iv) = (n - 3, n - 2);
        let (au, av) = (self.a[iu], self.a[iv]);
        let (cu, cv) = (self.c2[iu], self.c2[iv]);
        let inv_av = f.inv(av).unwrap();
        let alpha = f.neg(f.mul(l, inv_av));
        let beta = f.neg(f.mul(au, inv_av));
        let auav = f.mul(au, av);
        let qa = f.add(f.add(cu, f.mul(cv, f.mul(beta, beta))), f.mul(auav, beta));
        let two = f.from_i64(2);
        let qb = f.add(
            f.mul(two, f.mul(cv, f.mul(alpha, beta))),
            f.mul(auav, alpha),
        );
        let qc = f.sub(f.add(f.mul(cv, f.mul(alpha, alpha)), qk), f.mul(l, l));
        let candidates: Vec<u32> = match self.quadratic(qa, qb, qc) {
            Some(r) => r,
            None => (1..f.order()).collect(),
        };
        let mut x = prefix.to_vec();
        x.extend([0, 0, 1]);
        for u in candidates {
            let v = f.add(alpha, f.mul(beta, u));
            if u == 0
                || v == 0
                || u == v
                || u == 1
                || v == 1
                || prefix.contains(&u)
                || prefix.contains(&v)
            {
                continue;
            }
            x[iu] = u;
            x[iv] = v;
            if self.rest_vanishes(&x) {
                out.insert(canonical(self.t, &x));
            }
        }
    }

    fn enumerate(&self, prefix: &mut Vec<u32>, l: u32, qk: u32, out: &mut BTreeSet<Tuple>) {
        let n = self.t.n();
        if prefix.len() == n - 3 {
            self.complete(prefix, l, qk, out);
            return;
        }
        let f = self.f;
        let slot = prefix.len();
        let (a, c) = (self.a[slot], self.c2[slot]);
        for x in 2..f.order() {
            if prefix.contains(&x) {
                continue;
            }
            let nq = f.add(f.add(qk, f.mul(c, f.mul(x, x))), f.mul(f.mul(a, x), l));
            let nl = f.add(l, f.mul(a, x));
            prefix.push(x);
            self.enumerate(prefix, nl, nq, out);
            prefix.pop();
        }
    }

    fn solve(&self) -> BTreeSet<Tuple> {
        let f = self.f;
        let n = self.t.n();
        let mut out = BTreeSet::new();
        match n {
            1 => {
                out.insert(vec![1]);
            }
            2 => {
                // a_1 x_1 + a_2 = 0
                let x = f.mul(f.neg(self.a[1]), f.inv(self.a[0]).unwrap());
                if x != 0 && x != 1 {
                    out.insert(vec![x, 1]);
                }
            }
            3 => self.complete(&[], self.a[2], self.c2[2], &mut out),
            _ => {
                let (l0, q0) = (self.a[n - 1], self.c2[n - 1]);
                let (a, c) = (self.a[0], self.c2[0]);
                let parts: Vec<BTreeSet<Tuple>> = (2..f.order())
                    .into_par_iter()
                    .map(|x| {
                        let mut local = BTreeSet::new();
                        let nq = f.add(f.add(q0, f.mul(c, f.mul(x, x))), f.mul(f.mul(a, x), l0));
                        let nl = f.add(l0, f.mul(a, x));
                        self.enumerate(&mut vec![x], nl, nq, &mut local);
                        local
                    })
                    .collect();
                for part in parts {
                    out.extend(part);
                }
            }
        }
        out
    }
}

fn to_model(f: &Arc<GfContext>, t: &ValencyType, x: &[u32], kind: ModelKind) -> Model<Gf> {
    Model {
        exponents: t.valencies().to_vec(),
        roots: x.iter().map(|&v| f.elem(v)).collect(),
        kind,
    }
}

fn verify(f: &Arc<GfContext>, t: &ValencyType, x: &[u32]) -> Result<()> {
    let m = to_model(f, t, x, ModelKind::Normalized);
    let r = check_conditions(&m)?;
    let p = f.characteristic();
    // Power sums are not equivalent in characteristic at most n.
    let ok = if p > t.n() as u64 {
        r.all()
    } else {
        r.i && r.ii && r.iv
    };
    if !ok {
        return Err(Error::InternalInconsistency(format!(
            "search produced a tuple failing {r:?}: {m}"
        )));
    }
    Ok(())
}

/// Canonical tuples of all models with `x_n = 1` over `field`.
pub fn solve_tuples(t: &ValencyType, field: &Arc<GfContext>) -> Result<Vec<Tuple>> {
    let p = field.characteristic();
    ensure_tame(t, p)?;
    check_bounds(t, p, field.degree())?;
    let s = Searcher::new(field, t);
    let tuples: Vec<Tuple> = s.solve().into_iter().collect();
    for x in &tuples {
        verify(field, t, x)?;
    }
    Ok(tuples)
}

/// All models of `t` over `F_{p^k}` normalized with `x_n = 1`.
pub fn solve_over_fq(t: &ValencyType, p: u64, k: usize) -> Result<Vec<Model<Gf>>> {
    ensure_tame(t, p)?;
    check_bounds(t, p, k)?;
    let field = GfContext::new(p, k)?;
    let tuples = solve_tuples(t, &field)?;
    Ok(tuples
        .iter()
        .map(|x| to_model(&field, t, x, ModelKind::Normalized))
        .collect())
}

/// All normalized models obtained from `x` by rescaling with each `x_j^{-1}`.
pub fn rescalings(f: &GfContext, t: &ValencyType, x: &[u32]) -> BTreeSet<Tuple> {
    x.iter()
        .map(|&xj| {
            let inv = f.inv(xj).unwrap();
            let y: Vec<u32> = x.iter().map(|&v| f.mul(v, inv)).collect();
            canonical(t, &y)
        })
        .collect()
}

pub fn frobenius_tuple(f: &GfContext, t: &ValencyType, x: &[u32]) -> Tuple {
    let y: Vec<u32> = x.iter().map(|&v| f.frobenius(v)).collect();
    canonical(t, &y)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TreeReport {
    /// Indices into `OrbitReport::models`.
    pub models: Vec<usize>,
    pub aut_order: usize,
    pub splitting_degree: usize,
    pub moduli_degree: usize,
    pub orbit: usize,
}

#[derive(Clone, Debug)]
pub struct OrbitReport {
    pub valency_type: ValencyType,
    pub p: u64,
    pub k_searched: usize,
    pub complete: bool,
    /// Why the search stopped short, when it did.
    pub note: Option<String>,
    pub predicted_models: u64,
    pub field: Arc<GfContext>,
    /// All normalized models, canonical and sorted.
    pub models: Vec<Tuple>,
    pub trees: Vec<TreeReport>,
    /// Tree indices grouped by Frobenius orbit.
    pub orbits: Vec<Vec<usize>>,
}

impl OrbitReport {
    pub fn model(&self, i: usize) -> Model<Gf> {
        to_model(
            &self.field,
            &self.valency_type,
            &self.models[i],
            ModelKind::Normalized,
        )
    }

    pub fn orbit_sizes(&self) -> Vec<usize> {
        self.orbits.iter().map(Vec::len).collect()
    }

    /// Degree over `F_p` of the field generated by the roots of model `i`.
    pub fn model_splitting_degree(&self, i: usize) -> usize {
        self.models[i]
            .iter()
            .map(|&v| self.field.element_degree(v))
            .fold(1, num_integer::lcm)
    }

    /// Whether Frobenius maps the model set into itself.
    pub fn frobenius_closed(&self) -> bool {
        let set: BTreeSet<&Tuple> = self.models.iter().collect();
        self.models
            .iter()
            .all(|x| set.contains(&frobenius_tuple(&self.field, &self.valency_type, x)))
    }
}

fn build_report(
    t: &ValencyType,
    field: &Arc<GfContext>,
    tuples: &[Tuple],
) -> (Vec<Tuple>, Vec<TreeReport>, Vec<Vec<usize>>) {
    let f: &GfContext = field;
    let mut classes: BTreeMap<Tuple, BTreeSet<Tuple>> = BTreeMap::new();
    for x in tuples {
        let r = rescalings(f, t, x);
        let key = r.iter().next().unwrap().clone();
        classes.entry(key).or_default().extend(r);
    }
    let models: Vec<Tuple> = classes
        .values()
        .flatten()
        .cloned()
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let index: BTreeMap<&Tuple, usize> = models.iter().enumerate().map(|(i, m)| (m, i)).collect();
    let keys: Vec<&Tuple> = classes.keys().collect();
    let key_index: BTreeMap<&Tuple, usize> =
        keys.iter().enumerate().map(|(i, k)| (*k, i)).collect();
    let n = t.n();
    let mut trees: Vec<TreeReport> = classes
        .iter()
        .map(|(key, ms)| TreeReport {
            models: ms.iter().map(|m| index[m]).collect(),
            aut_order: n / ms.len(),
            splitting_degree: key
                .iter()
                .map(|&v| f.element_degree(v))
                .fold(1, num_integer::lcm),
            moduli_degree: 0,
            orbit: 0,
        })
        .collect();
    let tree_of = |x: &Tuple| -> usize {
        let r = rescalings(f, t, x);
        key_index[r.iter().next().unwrap()]
    };
    let mut orbit_of = vec![usize::MAX; trees.len()];
    let mut orbits = Vec::new();
    for start in 0..trees.len() {
        if orbit_of[start] != usize::MAX {
            continue;
        }
        let mut orbit = vec![start];
        orbit_of[start] = orbits.len();
        let mut cur = keys[start].clone();
        loop {
            cur = frobenius_tuple(f, t, &cur);
            let j = tree_of(&cur);
            if j == start {
                break;
            }
            orbit_of[j] = orbits.len();
            orbit.push(j);
            cur = keys[j].clone();
        }
        orbit.sort_unstable();
        orbits.push(orbit);
    }
    for (i, tr) in trees.iter_mut().enumerate() {
        tr.orbit = orbit_of[i];
        tr.moduli_degree = orbits[orbit_of[i]].len();
    }
    (models, trees, orbits)
}

/// Searches `F_{p^k}` for `k = 1, 2, ...` until the normalized model count
/// reaches the count predicted from the trees, or `k_max` is hit.
pub fn orbit_report(t: &ValencyType, p: u64, k_max: usize) -> Result<OrbitReport> {
    ensure_tame(t, p)?;
    check_bounds(t, p, 1)?;
    let predicted = predicted_normalized_models(t);
    let mut last: Option<(usize, Arc<GfContext>, Vec<Tuple>)> = None;
    let mut note = None;
    let mut complete = false;
    for k in 1..=k_max.max(1) {
        if let Err(e) = check_bounds(t, p, k) {
            note = Some(e.to_string());
            break;
        }
        let field = GfContext::new(p, k)?;
        let tuples = solve_tuples(t, &field)?;
        let (models, _, _) = build_report(t, &field, &tuples);
        let count = models.len() as u64;
        last = Some((k, field, tuples));
        // With n <= 3 every solution is quadratic over F_p.
        let saturated_small = (t.n() <= 2 && k >= 1) || (t.n() == 3 && k >= 2);
        if count == predicted || (saturated_small && count <= predicted) {
            complete = true;
            break;
        }
    }
    let (k, field, tuples) = last.expect("at least one field searched");
    let (models, trees, orbits) = build_report(t, &field, &tuples);
    if !complete && note.is_none() {
        note = Some(format!(
            "found {} of {predicted} normalized models by k = {k}",
            models.len()
        ));
    }
    Ok(OrbitReport {
        valency_type: t.clone(),
        p,
        k_searched: k,
        complete,
        note,
        predicted_models: predicted,
        field,
        models,
        trees,
        orbits,
    })
}

#[derive(Clone, Debug)]
pub struct Char2Census {
    pub nonempty: bool,
    pub models: Vec<Model<Gf>>,
}

/// Models of `(a,b,c)` over `F_4` (all odd valencies).
pub fn char2_abc_census(a: u64, b: u64, c: u64) -> Result<Char2Census> {
    if a.is_multiple_of(2) || b.is_multiple_of(2) || c.is_multiple_of(2) {
        return Err(Error::WildPrime("even valency in characteristic 2".into()));
    }
    let t = ValencyType::new(vec![a, b, c])?;
    let models = solve_over_fq(&t, 2, 2)?;
    Ok(Char2Census {
        nonempty: !models.is_empty(),
        models,
    })
}

/// Exponents `a_i` (least positive residues of
/// `u prod_{j != i}(1 - x_i/x_j)^{-1}` modulo `p`) making the given roots
/// a model over `F_p`; returned sorted by exponent.
pub fn construct_fp_split_model(p: u64, xs: &[i64], u: i64) -> Result<(Model<Gf>, ValencyType)> {
    if !is_prime_u64(p) {
        return Err(Error::InvalidArgument(format!("{p} is not prime")));
    }
    if xs.is_empty() || xs.len() as u64 >= p {
        return Err(Error::InvalidArgument("need 1 <= n < p roots".into()));
    }
    let f = GfContext::new(p, 1)?;
    let x: Vec<u32> = xs.iter().map(|&v| f.from_i64(v)).collect();
    let uu = f.from_i64(u);
    if uu == 0 {
        return Err(Error::DegenerateInput("u must be a unit".into()));
    }
    for (i, &xi) in x.iter().enumerate() {
        if xi == 0 || x[..i].contains(&xi) {
            return Err(Error::DegenerateInput(
                "roots must be distinct and nonzero".into(),
            ));
        }
    }
    let mut pairs = Vec::new();
    for (i, &xi) in x.iter().enumerate() {
        let mut prod = 1u32;
        for (j, &xj) in x.iter().enumerate() {
            if i != j {
                prod = f.mul(prod, f.sub(1, f.mul(xi, f.inv(xj).unwrap())));
            }
        }
        let inv = f
            .inv(prod)
            .ok_or_else(|| Error::DegenerateInput("vanishing product".into()))?;
        let ai = f.mul(uu, inv);
        if ai == 0 {
            return Err(Error::DegenerateInput(format!(
                "residue for slot {} is 0",
                i + 1
            )));
        }
        pairs.push((ai as u64, xi));
    }
    pairs.sort();
    let t = ValencyType::new(pairs.iter().map(|&(a, _)| a).collect())?;
    let model = Model::new(
        pairs.iter().map(|&(a, _)| a).collect(),
        pairs.iter().map(|&(_, xi)| f.elem(xi)).collect(),
        ModelKind::Standard,
    )?;
    Ok((model, t))
}

/// `-abc(a+b+c)` modulo `p` is a nonzero square.
pub fn is_square_mod(v: &Integer, p: u64) -> Result<bool> {
    let f = GfContext::new(p, 1)?;
    let r = f.from_integer(v);
    Ok(r != 0 && !f.nth_roots(r, 2).is_empty())
}

/// The `F_p`-rational models among a report's normalized models.
pub fn rational_models(report: &OrbitReport) -> Vec<usize> {
    (0..report.models.len())
        .filter(|&i| report.model_splitting_degree(i) == 1)
        .collect()
}
