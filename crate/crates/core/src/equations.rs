//! Models `beta(X) = prod (1 - x_i X)^{a_i}` over a coefficient ring, the
//! power-sum systems `psi` and `phi`, and the four equivalent conditions
//! characterizing models of diameter-four trees.

use std::fmt;

use crate::algebra::{binomial, Polynomial, Ring};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ModelKind {
    Standard,
    Normalized,
    /// Root in the given (0-based) slot equals 1.
    AiNormalized(usize),
    Kummer,
    Canonical,
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModelKind::Standard => write!(f, "STANDARD"),
            ModelKind::Normalized => write!(f, "NORMALIZED"),
            ModelKind::AiNormalized(i) => write!(f, "AI_NORMALIZED({})", i + 1),
            ModelKind::Kummer => write!(f, "KUMMER"),
            ModelKind::Canonical => write!(f, "CANONICAL"),
        }
    }
}

/// Exponents and roots in aligned order, plus a kind tag.
#[derive(Clone, Debug, PartialEq)]
pub struct Model<R> {
    pub exponents: Vec<u64>,
    pub roots: Vec<R>,
    pub kind: ModelKind,
}

impl<R: Ring> Model<R> {
    /// Builds a model, checking distinct unit roots and the kind invariant
    /// (except `Canonical`, which depends on the ring; see the lifting
    /// module).
    pub fn new(exponents: Vec<u64>, roots: Vec<R>, kind: ModelKind) -> Result<Self> {
        let m = Self::from_parts(exponents, roots, kind)?;
        m.check_distinct_units()?;
        let one_at = |i: usize| m.roots.get(i).is_some_and(|x| x.is_one());
        match kind {
            ModelKind::Normalized if !m.roots.iter().any(|x| x.is_one()) => Err(Error::NotAModel(
                "normalized model needs a root equal to 1".into(),
            )),
            ModelKind::AiNormalized(i) if !one_at(i) => {
                Err(Error::NotAModel(format!("root in slot {} is not 1", i + 1)))
            }
            ModelKind::Kummer if !phi(m.n() as u64, &m).is_one() => {
                Err(Error::NotAModel("Kummer model needs phi_n = 1".into()))
            }
            _ => Ok(m),
        }
    }

    /// Builds a model checking only shapes.
    pub fn from_parts(exponents: Vec<u64>, roots: Vec<R>, kind: ModelKind) -> Result<Self> {
        if exponents.len() != roots.len() || roots.is_empty() {
            return Err(Error::InvalidArgument(
                "exponents and roots must align".into(),
            ));
        }
        if exponents.contains(&0) {
            return Err(Error::DegenerateInput("exponents must be positive".into()));
        }
        Ok(Model {
            exponents,
            roots,
            kind,
        })
    }

    pub fn n(&self) -> usize {
        self.roots.len()
    }

    pub fn degree(&self) -> u64 {
        self.exponents.iter().sum()
    }

    fn like(&self) -> &R {
        &self.roots[0]
    }

    pub fn check_distinct_units(&self) -> Result<()> {
        for (i, x) in self.roots.iter().enumerate() {
            if !x.is_unit() {
                return Err(Error::NotAModel(format!("root {} is not a unit", i + 1)));
            }
            for y in &self.roots[i + 1..] {
                if x == y {
                    return Err(Error::NotAModel("repeated root".into()));
                }
            }
        }
        Ok(())
    }

    /// The model `beta(x_j^{-1} X)`, normalized at slot `j`.
    pub fn rescaled(&self, j: usize) -> Result<Self> {
        let inv = self.roots[j]
            .inverse()
            .ok_or_else(|| Error::NotAModel(format!("root {} is not a unit", j + 1)))?;
        let roots = self.roots.iter().map(|x| x.clone() * &inv).collect();
        Ok(Model {
            exponents: self.exponents.clone(),
            roots,
            kind: ModelKind::Normalized,
        })
    }

    /// Scales every root by `c`.
    pub fn scaled(&self, c: &R, kind: ModelKind) -> Self {
        let roots = self.roots.iter().map(|x| x.clone() * c).collect();
        Model {
            exponents: self.exponents.clone(),
            roots,
            kind,
        }
    }

    /// Reorders slots: slot `k` of the result is slot `perm[k]` of `self`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        let mut seen = vec![false; self.n()];
        if perm.len() != self.n()
            || perm
                .iter()
                .any(|&p| p >= self.n() || std::mem::replace(&mut seen[p], true))
        {
            return Err(Error::BadPermutation(
                "not a permutation of the slots".into(),
            ));
        }
        Ok(Model {
            exponents: perm.iter().map(|&p| self.exponents[p]).collect(),
            roots: perm.iter().map(|&p| self.roots[p].clone()).collect(),
            kind: self.kind,
        })
    }

    pub fn with_kind(mut self, kind: ModelKind) -> Self {
        self.kind = kind;
        self
    }

    pub fn map_roots<S: Ring>(&self, f: impl Fn(&R) -> S) -> Model<S> {
        Model {
            exponents: self.exponents.clone(),
            roots: self.roots.iter().map(f).collect(),
            kind: self.kind,
        }
    }
}

impl<R: Ring> fmt::Display for Model<R> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (a, x) in self.exponents.iter().zip(&self.roots) {
            let s = x.to_string();
            let factor = if x.is_one() {
                "1 - X".to_string()
            } else if s == "-1" {
                "1 + X".to_string()
            } else if let Some(rest) = s.strip_prefix('-') {
                if rest.contains(['+', '-', ' ']) {
                    format!("1 + ({rest})X")
                } else {
                    format!("1 + {rest}X")
                }
            } else if s.contains(['+', '-', ' ']) {
                format!("1 - ({s})X")
            } else {
                format!("1 - {s}X")
            };
            if *a == 1 {
                write!(f, "({factor})")?;
            } else {
                write!(f, "({factor})^{a}")?;
            }
        }
        Ok(())
    }
}

fn binomial_series<R: Ring>(x: &R, a: u64, len: usize, sign: bool) -> Vec<R> {
    let top = (a as usize).min(len.saturating_sub(1));
    let mut out = Vec::with_capacity(top + 1);
    let mut pw = x.one_like();
    let step = if sign { -x.clone() } else { x.clone() };
    for k in 0..=top {
        out.push(x.from_integer_like(&binomial(a, k as u64)) * &pw);
        pw = pw * &step;
    }
    out
}

pub(crate) fn truncated_product<R: Ring>(m: &Model<R>, len: usize, sign: bool) -> Vec<R> {
    let like = m.like();
    let mut acc = vec![like.zero_like(); len];
    acc[0] = like.one_like();
    for (x, &a) in m.roots.iter().zip(&m.exponents) {
        let s = binomial_series(x, a, len, sign);
        let mut next = vec![like.zero_like(); len];
        for (i, u) in acc.iter().enumerate() {
            if u.is_zero() {
                continue;
            }
            for (j, v) in s.iter().enumerate() {
                if i + j >= len {
                    break;
                }
                next[i + j] = next[i + j].clone() + &(u.clone() * v);
            }
        }
        acc = next;
    }
    acc
}

/// The expanded polynomial `prod (1 - x_i X)^{a_i}`.
pub fn expand<R: Ring>(m: &Model<R>) -> Polynomial<R> {
    Polynomial::new(truncated_product(m, m.degree() as usize + 1, true))
}

/// `psi_1, ..., psi_upto` (index 0 of the result is `psi_1`).
pub fn psi_all<R: Ring>(m: &Model<R>, upto: usize) -> Vec<R> {
    truncated_product(m, upto + 1, false)
        .into_iter()
        .skip(1)
        .collect()
}

/// `psi_m = sum over k_1+...+k_n = m of prod C(a_i, k_i) x_i^{k_i}`.
pub fn psi<R: Ring>(m_index: usize, m: &Model<R>) -> R {
    truncated_product(m, m_index + 1, false).pop().unwrap()
}

/// `phi_m = sum a_i x_i^m`.
pub fn phi<R: Ring>(m_index: u64, m: &Model<R>) -> R {
    m.roots
        .iter()
        .zip(&m.exponents)
        .fold(m.like().zero_like(), |acc, (x, &a)| {
            acc + &(x.pow(m_index) * &x.from_u64_like(a))
        })
}

/// Outcome of the four conditions, each evaluated independently.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ConditionReport {
    /// `v_0(beta - 1) = n`.
    pub i: bool,
    /// `psi_1 = ... = psi_{n-1} = 0`.
    pub ii: bool,
    /// `phi_1 = ... = phi_{n-1} = 0`.
    pub iii: bool,
    /// `a_i prod_{j != i}(x_j - x_i) = N prod_{j != i} x_j` for every `i`.
    pub iv: bool,
}

impl ConditionReport {
    pub fn all(&self) -> bool {
        self.i && self.ii && self.iii && self.iv
    }
}

pub fn check_conditions<R: Ring>(m: &Model<R>) -> Result<ConditionReport> {
    m.check_distinct_units()?;
    let n = m.n();
    let like = m.like();
    let beta = truncated_product(m, n + 1, true);
    let i = beta[1..n].iter().all(Ring::is_zero) && !beta[n].is_zero();
    let ii = psi_all(m, n - 1).iter().all(Ring::is_zero);
    let iii = (1..n as u64).all(|k| phi(k, m).is_zero());
    let big_n = like.from_u64_like(m.degree());
    let iv = (0..n).all(|a| {
        let xa = &m.roots[a];
        let (mut lhs, mut rhs) = (like.from_u64_like(m.exponents[a]), big_n.clone());
        for (b, xb) in m.roots.iter().enumerate() {
            if a != b {
                lhs = lhs * &(xb.clone() - xa);
                rhs = rhs * xb;
            }
        }
        lhs == rhs
    });
    Ok(ConditionReport { i, ii, iii, iv })
}

/// `beta' = (-1)^n x_1...x_n N X^{n-1} prod (1 - x_i X)^{a_i - 1}`.
pub fn derivative_identity_check<R: Ring>(m: &Model<R>) -> bool {
    let lhs = expand(m).derivative();
    let like = m.like();
    let mut c = m
        .roots
        .iter()
        .fold(like.from_u64_like(m.degree()), |acc, x| acc * x);
    if m.n() % 2 == 1 {
        c = -c;
    }
    let reduced = Model {
        exponents: m.exponents.iter().map(|a| a - 1).collect(),
        roots: m.roots.clone(),
        kind: m.kind,
    };
    // Exponent 0 factors are 1; expand handles them through binomial(0, 0).
    let rest = Polynomial::new(truncated_product(
        &reduced,
        reduced.exponents.iter().sum::<u64>() as usize + 1,
        true,
    ));
    let rhs = &Polynomial::monomial(c, m.n() - 1) * &rest;
    lhs == rhs
}

/// `t(beta) = (-1)^{n-1} x_1...x_n N`, checked against `phi_n`.
pub fn kummer_invariant<R: Ring>(m: &Model<R>) -> Result<R> {
    let like = m.like();
    let mut t = m
        .roots
        .iter()
        .fold(like.from_u64_like(m.degree()), |acc, x| acc * x);
    if m.n().is_multiple_of(2) {
        t = -t;
    }
    let phin = phi(m.n() as u64, m);
    if t != phin {
        return Err(Error::InternalInconsistency(format!(
            "closed form {t} differs from phi_n = {phin}; the roots do not solve the phi system"
        )));
    }
    Ok(t)
}

/// `sum_i y_i prod_{j != i}(1 - x_j X) = X^{n-1}` with
/// `y_i = prod_{j != i}(x_i - x_j)^{-1}`.
pub fn partial_fraction_identity_check<R: Ring>(roots: &[R]) -> Result<bool> {
    let Some(like) = roots.first() else {
        return Err(Error::DegenerateInput("no roots".into()));
    };
    let n = roots.len();
    let mut sum = Polynomial::zero();
    for (i, xi) in roots.iter().enumerate() {
        let mut d = like.one_like();
        let mut prod = Polynomial::one_like(like);
        for (j, xj) in roots.iter().enumerate() {
            if i != j {
                d = d * &(xi.clone() - xj);
                prod = &prod * &Polynomial::new(vec![like.one_like(), -xj.clone()]);
            }
        }
        let y = d
            .inverse()
            .ok_or_else(|| Error::NotAModel("root difference is not invertible".into()))?;
        sum = &sum + &prod.scale(&y);
    }
    Ok(sum == Polynomial::monomial(like.one_like(), n - 1))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{Fp, Integer, Rational};
    use proptest::prelude::*;

    fn q(v: i64) -> Rational {
        Rational::from_integer(Integer::from(v))
    }

    fn fp(v: i64, p: u64) -> Fp {
        Fp::new(v, p).unwrap()
    }

    fn m12() -> Model<Rational> {
        Model::new(vec![1, 2], vec![q(2), q(-1)], ModelKind::Standard).unwrap()
    }

    /// Example model over F_11 of type (1,2,3,4,10).
    pub(crate) fn model_f11() -> Model<Fp> {
        let roots = [3, 1, 5, 2, 6].iter().map(|&x| fp(x, 11)).collect();
        Model::new(vec![1, 2, 3, 4, 10], roots, ModelKind::Normalized).unwrap()
    }

    /// psi_m by enumerating compositions k_1 + ... + k_n = m.
    fn psi_by_compositions(m_index: usize, m: &Model<Rational>) -> Rational {
        fn rec(i: usize, left: usize, m: &Model<Rational>, acc: Rational, out: &mut Rational) {
            if i == m.n() {
                if left == 0 {
                    *out = out.clone() + acc;
                }
                return;
            }
            for k in 0..=left {
                let c = Rational::from_integer(binomial(m.exponents[i], k as u64));
                let term = acc.clone() * c * Ring::pow(&m.roots[i], k as u64);
                rec(i + 1, left - k, m, term, out);
            }
        }
        let mut out = q(0);
        rec(0, m_index, m, q(1), &mut out);
        out
    }

    #[test]
    fn expand_examples() {
        assert_eq!(
            expand(&m12()),
            Polynomial::from_i64(&[1, 0, -3, -2]).to_rational()
        );
        let single = Model::new(vec![1], vec![q(1)], ModelKind::Normalized).unwrap();
        assert_eq!(
            expand(&single),
            Polynomial::from_i64(&[1, -1]).to_rational()
        );
        let beta = expand(&model_f11());
        let one = Polynomial::one_like(&fp(1, 11));
        assert_eq!((&beta - &one).valuation_at_zero(), Some(5));
    }

    #[test]
    fn psi_phi_examples() {
        let m = m12();
        assert_eq!(psi(1, &m), q(0));
        assert_eq!(phi(1, &m), q(0));
        assert_eq!(phi(2, &m), q(6));
        let sym = Model::new(vec![1, 1], vec![q(1), q(-1)], ModelKind::Normalized).unwrap();
        assert_eq!(psi(1, &sym), q(0));
    }

    #[test]
    fn conditions_examples() {
        let r = check_conditions(&m12()).unwrap();
        assert!(r.all());
        let r = check_conditions(&model_f11()).unwrap();
        assert!(r.all());
        assert_eq!(model_f11().degree() % 11, 9);
        let bad = Model::from_parts(vec![1, 2], vec![q(1), q(1)], ModelKind::Standard).unwrap();
        assert!(matches!(check_conditions(&bad), Err(Error::NotAModel(_))));
        assert!(Model::new(vec![1, 2], vec![q(1), q(1)], ModelKind::Standard).is_err());
    }

    #[test]
    fn abc_system_with_unit_third_root() {
        // (1,2,3): ax + by + c = 0 and ax^2 + by^2 + c = 0 over F_7.
        let p = 7;
        let mut found = 0;
        for x in 1..p {
            for y in 1..p {
                let m = Model::from_parts(
                    vec![1, 2, 3],
                    vec![fp(x, p as u64), fp(y, p as u64), fp(1, p as u64)],
                    ModelKind::Normalized,
                )
                .unwrap();
                if m.check_distinct_units().is_ok() && phi(1, &m).is_zero() && phi(2, &m).is_zero()
                {
                    found += 1;
                    assert!(check_conditions(&m).unwrap().all());
                }
            }
        }
        // -abc(a+b+c) = -36 = 6 mod 7 is not a square, so no F_7 solutions.
        assert_eq!(found, 0);
    }

    #[test]
    fn derivative_identity_examples() {
        assert!(derivative_identity_check(&m12()));
        assert_eq!(
            expand(&m12()).derivative(),
            Polynomial::from_i64(&[0, -6, -6]).to_rational()
        );
        let single = Model::new(vec![1], vec![q(1)], ModelKind::Normalized).unwrap();
        assert!(derivative_identity_check(&single));
        assert!(derivative_identity_check(&model_f11()));
    }

    #[test]
    fn kummer_invariant_examples() {
        assert_eq!(kummer_invariant(&m12()).unwrap(), q(6));
        for (a, b) in [(1i64, 2i64), (2, 3), (3, 7)] {
            let m = Model::new(
                vec![a as u64, b as u64],
                vec![q(b), q(-a)],
                ModelKind::Standard,
            )
            .unwrap();
            assert_eq!(kummer_invariant(&m).unwrap(), q(a * b * (a + b)));
        }
        let not_solution = Model::new(vec![1, 2], vec![q(3), q(5)], ModelKind::Standard).unwrap();
        assert!(matches!(
            kummer_invariant(&not_solution),
            Err(Error::InternalInconsistency(_))
        ));
    }

    #[test]
    fn kummer_kind_requires_unit_phi() {
        // Scale the (1,2) model by c with c^2 * 6 = 1.
        let c = q(6).recip();
        let m = m12().scaled(&c, ModelKind::Standard);
        assert_ne!(phi(2, &m), q(1));
        assert!(Model::new(m.exponents.clone(), m.roots.clone(), ModelKind::Kummer).is_err());
        let p = 19;
        let c = fp(1, p);
        let base = m12().map_roots(|x| {
            let n = x.numer().clone() % Integer::from(p);
            Fp::new(i64::try_from(n).unwrap(), p).unwrap()
        });
        let t = kummer_invariant(&base).unwrap();
        let roots = crate::algebra::GfContext::new(p, 1)
            .unwrap()
            .nth_roots(t.inverse().unwrap().value() as u32, 2);
        assert!(!roots.is_empty());
        let s = fp(roots[0] as i64, p);
        let k = base.scaled(&(s * c), ModelKind::Standard);
        assert!(Model::new(k.exponents.clone(), k.roots.clone(), ModelKind::Kummer).is_ok());
    }

    #[test]
    fn partial_fraction_examples() {
        assert!(partial_fraction_identity_check(&[q(1), q(-1)]).unwrap());
        assert!(partial_fraction_identity_check(&[q(5)]).unwrap());
        let roots: Vec<Fp> = [1, 2, 3].iter().map(|&x| fp(x, 7)).collect();
        assert!(partial_fraction_identity_check(&roots).unwrap());
        let bad: Vec<Fp> = [1, 8].iter().map(|&x| fp(x, 7)).collect();
        assert!(matches!(
            partial_fraction_identity_check(&bad),
            Err(Error::NotAModel(_))
        ));
    }

    #[test]
    fn display_of_model() {
        assert_eq!(m12().to_string(), "(1 - 2X)(1 + X)^2");
        assert_eq!(
            model_f11().to_string(),
            "(1 - 3X)(1 - X)^2(1 - 5X)^3(1 - 2X)^4(1 - 6X)^10"
        );
    }

    fn random_model() -> impl Strategy<Value = Model<Rational>> {
        (1usize..=4)
            .prop_flat_map(|n| {
                (
                    prop::collection::vec(1u64..=5, n),
                    prop::collection::vec((-9i64..=9).prop_filter("nonzero", |x| *x != 0), n),
                )
            })
            .prop_map(|(a, x)| {
                Model::from_parts(a, x.into_iter().map(q).collect(), ModelKind::Standard).unwrap()
            })
    }

    proptest! {
        #[test]
        fn psi_matches_signed_coefficients(m in random_model()) {
            let beta = expand(&m);
            let psis = psi_all(&m, m.degree() as usize);
            for (k, s) in psis.iter().enumerate() {
                let c = beta.coeff(k + 1).cloned().unwrap_or_else(|| q(0));
                let signed = if (k + 1) % 2 == 1 { -c } else { c };
                prop_assert_eq!(s, &signed);
            }
            for k in 1..=m.degree().min(5) as usize {
                prop_assert_eq!(psi(k, &m), psi_by_compositions(k, &m));
            }
        }

        #[test]
        fn psi_one_is_phi_one(m in random_model()) {
            prop_assert_eq!(psi(1, &m), phi(1, &m));
        }
    }
}
