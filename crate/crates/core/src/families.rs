//! Closed forms for the types `(a,b)`, `(a,b,c)` and `(1,...,1,a,b)`.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use num_traits::{ToPrimitive, Zero};

use crate::algebra::{
    binomial, factorial, factorize, is_prime_u64, Factorization, GfContext, Integer, Polynomial,
    QuotientContext, QuotientElem, Rational, Ring,
};
use crate::equations::{Model, ModelKind};
use crate::error::{Error, Result};

fn q(v: i64) -> Rational {
    Rational::from_integer(Integer::from(v))
}

/// The standard model `(1 - bX)^a (1 + aX)^b` of type `(a,b)`.
pub fn family_ab(a: u64, b: u64) -> Result<Model<Rational>> {
    if a == 0 || a >= b {
        return Err(Error::InvalidArgument(format!(
            "need 0 < a < b, got ({a},{b})"
        )));
    }
    Model::new(
        vec![a, b],
        vec![q(b as i64), q(-(a as i64))],
        ModelKind::Standard,
    )
}

/// `-abc(a+b+c)`: the trees of type `(a,b,c)` are defined over
/// `Q(sqrt(-abc(a+b+c)))`.
pub fn family_abc_disc(a: u64, b: u64, c: u64) -> Integer {
    -(Integer::from(a) * b * c * (a + b + c))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AbcCase {
    /// `p` does not divide `D`; `galois_orbit` when the discriminant is not
    /// a square mod `p`.
    SplitAsChar0 { galois_orbit: bool },
    /// `p` divides `d`: no models over the algebraic closure.
    Empty,
    /// `p` divides `D` but not `d`: a single tree, rational over `F_p`.
    UniqueRational,
}

impl fmt::Display for AbcCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AbcCase::SplitAsChar0 { galois_orbit: true } => write!(f, "SPLIT_AS_CHAR0(orbit)"),
            AbcCase::SplitAsChar0 {
                galois_orbit: false,
            } => write!(f, "SPLIT_AS_CHAR0(rational)"),
            AbcCase::Empty => write!(f, "EMPTY"),
            AbcCase::UniqueRational => write!(f, "UNIQUE_RATIONAL"),
        }
    }
}

pub fn family_abc_fp_trichotomy(a: u64, b: u64, c: u64, p: u64) -> Result<AbcCase> {
    if !is_prime_u64(p) {
        return Err(Error::InvalidArgument(format!("{p} is not prime")));
    }
    let prod = Integer::from(6u32) * a * b * c * (a + b + c);
    if Zero::is_zero(&(&prod % p)) {
        return Err(Error::WildPrime(format!("p = {p} divides 6abc(a+b+c)")));
    }
    let (s1, s2, s3) = (a + b, b + c, c + a);
    let big_d = Integer::from(s1) * s2 * s3;
    let g = |x: u64, y: u64| num_integer::gcd(x, y);
    let small_d = Integer::from(g(s1, s2)) * g(s2, s3) * g(s3, s1);
    if Zero::is_zero(&(&small_d % p)) {
        return Ok(AbcCase::Empty);
    }
    if Zero::is_zero(&(&big_d % p)) {
        return Ok(AbcCase::UniqueRational);
    }
    let f = GfContext::new(p, 1)?;
    let r = f.from_integer(&family_abc_disc(a, b, c));
    Ok(AbcCase::SplitAsChar0 {
        galois_orbit: f.nth_roots(r, 2).is_empty(),
    })
}

/// `sum_{k<n} C(a+k-1, a-1) C(b+n-2-k, b-1) X^k`.
pub fn family_ones_ab_hpoly(n: u64, a: u64, b: u64) -> Result<Polynomial<Integer>> {
    if n < 3 || !(1 < a && a < b) {
        return Err(Error::InvalidArgument(format!(
            "need n >= 3 and 1 < a < b, got ({n},{a},{b})"
        )));
    }
    Ok(Polynomial::new(
        (0..n)
            .map(|k| binomial(a + k - 1, a - 1) * binomial(b + n - 2 - k, b - 1))
            .collect(),
    ))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RegularityConstants {
    pub c: Integer,
    pub c_factors: Factorization,
    pub u: Option<Integer>,
    pub u_factors: Option<Factorization>,
}

/// `c(n,a) = (n-2)!(a+n-2)!/(a-1)!`.
pub fn regularity_c(n: u64, a: u64) -> Result<Integer> {
    if n < 2 || a < 1 {
        return Err(Error::InvalidArgument("need n >= 2, a >= 1".into()));
    }
    Ok(factorial(n - 2) * factorial(a + n - 2) / factorial(a - 1))
}

/// `u(n,a,b) = (n-2)!(a+n-2)!(b+n-2)!(a+b+n-3)! / ((a-1)!(b-1)!(a+b-1)!)`.
pub fn regularity_u(n: u64, a: u64, b: u64) -> Result<Integer> {
    if n < 3 || a < 1 || b < 1 {
        return Err(Error::InvalidArgument("need n >= 3, a, b >= 1".into()));
    }
    let num =
        factorial(n - 2) * factorial(a + n - 2) * factorial(b + n - 2) * factorial(a + b + n - 3);
    let den = factorial(a - 1) * factorial(b - 1) * factorial(a + b - 1);
    Ok(num / den)
}

/// `c(n,a)` and, when `b` is given with `1 < a < b`, `u(n,a,b)`.
pub fn family_regularity_constants(n: u64, a: u64, b: Option<u64>) -> Result<RegularityConstants> {
    if a <= 1 {
        return Err(Error::InvalidArgument("need a > 1".into()));
    }
    let c = regularity_c(n, a)?;
    let c_factors = factorize(&c)?;
    let (u, u_factors) = match b {
        Some(b) if b > a => {
            let u = regularity_u(n, a, b)?;
            let f = factorize(&u)?;
            (Some(u), Some(f))
        }
        Some(_) => return Err(Error::InvalidArgument("need a < b".into())),
        None => (None, None),
    };
    Ok(RegularityConstants {
        c,
        c_factors,
        u,
        u_factors,
    })
}

/// Complex roots of an integer polynomial by Aberth iteration, ordered by
/// real part then imaginary part.
pub fn approximate_roots(h: &Polynomial<Integer>) -> Vec<Complex64> {
    let c: Vec<f64> = h
        .coeffs()
        .iter()
        .map(|x| x.to_f64().unwrap_or(f64::NAN))
        .collect();
    let d = c.len().saturating_sub(1);
    if d == 0 {
        return Vec::new();
    }
    let eval = |z: Complex64| -> (Complex64, Complex64) {
        let (mut v, mut dv) = (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0));
        for &ci in c.iter().rev() {
            dv = dv * z + v;
            v = v * z + ci;
        }
        (v, dv)
    };
    let radius = 1.0 + c[..d].iter().map(|x| (x / c[d]).abs()).fold(0.0, f64::max);
    let mut z: Vec<Complex64> = (0..d)
        .map(|k| {
            Complex64::from_polar(
                radius * 0.5,
                0.4 + std::f64::consts::TAU * k as f64 / d as f64,
            )
        })
        .collect();
    for _ in 0..500 {
        let mut moved = 0.0f64;
        for i in 0..d {
            let (v, dv) = eval(z[i]);
            if v.norm() == 0.0 {
                continue;
            }
            let ratio = v / dv;
            let repulsion: Complex64 = (0..d)
                .filter(|&j| j != i)
                .map(|j| 1.0 / (z[i] - z[j]))
                .sum();
            let step = ratio / (1.0 - ratio * repulsion);
            z[i] -= step;
            moved = moved.max(step.norm());
        }
        if moved < 1e-15 {
            break;
        }
    }
    z.sort_by(|x, y| x.re.total_cmp(&y.re).then(x.im.total_cmp(&y.im)));
    z
}

/// The normalized model of type `(1,...,1,a,b)` with `x_n = 1` and
/// `x_{n-1} = x` a root of the h-polynomial, held exactly in `Q[x]/(h)`.
#[derive(Clone, Debug)]
pub struct OnesAbModel {
    pub n: u64,
    pub a: u64,
    pub b: u64,
    pub h: Polynomial<Integer>,
    pub field: Arc<QuotientContext>,
    /// `beta(X)` with coefficients in `Q[x]/(h)`.
    pub beta: Polynomial<QuotientElem>,
    /// `beta' = u X^{n-1} (1 - xX)^{a-1} (1 - X)^{b-1}`.
    pub u: QuotientElem,
    /// Degree `n-2` factor whose roots are the remaining `x_j^{-1}`.
    pub cofactor: Polynomial<QuotientElem>,
    pub root_index: usize,
    pub root_approx: Complex64,
}

impl OnesAbModel {
    /// The remaining roots `x_1, ..., x_{n-2}` at the chosen embedding.
    pub fn approximate_other_roots(&self) -> Vec<Complex64> {
        let x = self.root_approx;
        let eval_q = |e: &QuotientElem| -> Complex64 {
            e.representative()
                .coeffs()
                .iter()
                .rev()
                .fold(Complex64::new(0.0, 0.0), |acc, c| {
                    acc * x + c.to_f64().unwrap_or(f64::NAN)
                })
        };
        // The cofactor is prod (1 - x_j X); reverse it for prod (X - x_j).
        let mut rev: Vec<Complex64> = self.cofactor.coeffs().iter().map(eval_q).collect();
        rev.reverse();
        let d = rev.len() - 1;
        if d == 0 {
            return Vec::new();
        }
        let lead = rev[d];
        let monic: Vec<Complex64> = rev.iter().map(|c| c / lead).collect();
        let companion = |z: Complex64| {
            monic
                .iter()
                .rev()
                .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c)
        };
        let mut z: Vec<Complex64> = (0..d)
            .map(|k| Complex64::from_polar(1.0, 0.7 + std::f64::consts::TAU * k as f64 / d as f64))
            .collect();
        for _ in 0..500 {
            for i in 0..d {
                let zi = z[i];
                let den: Complex64 = (0..d).filter(|&j| j != i).map(|j| zi - z[j]).product();
                z[i] = zi - companion(zi) / den;
            }
        }
        z.sort_by(|p, q| p.re.total_cmp(&q.re).then(p.im.total_cmp(&q.im)));
        z
    }

    /// `|beta(1)|` and `|beta(1/x)|` at the chosen embedding.
    pub fn numeric_residuals(&self) -> (f64, f64) {
        let x = self.root_approx;
        let coeffs: Vec<Complex64> = self
            .beta
            .coeffs()
            .iter()
            .map(|e| {
                e.representative()
                    .coeffs()
                    .iter()
                    .rev()
                    .fold(Complex64::new(0.0, 0.0), |acc, c| {
                        acc * x + c.to_f64().unwrap_or(f64::NAN)
                    })
            })
            .collect();
        let eval = |z: Complex64| {
            coeffs
                .iter()
                .rev()
                .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c)
        };
        (eval(Complex64::new(1.0, 0.0)).norm(), eval(1.0 / x).norm())
    }
}

fn qpoly_one(ctx: &Arc<QuotientContext>) -> QuotientElem {
    ctx.from_rational(q(1))
}

/// `(1 - cX)^e` over `Q[x]/(h)`.
fn linear_power(c: &QuotientElem, e: u64) -> Polynomial<QuotientElem> {
    Polynomial::new(vec![c.one_like(), -c.clone()]).pow(e)
}

pub fn family_ones_ab_model(n: u64, a: u64, b: u64, root_index: usize) -> Result<OnesAbModel> {
    let h = family_ones_ab_hpoly(n, a, b)?;
    let roots = approximate_roots(&h);
    let root_approx = *roots.get(root_index).ok_or_else(|| {
        Error::BadRoot(format!(
            "root index {root_index} out of range 0..{}",
            roots.len()
        ))
    })?;
    let field = QuotientContext::new(&h.to_rational())?;
    let x = field.generator();
    let one = qpoly_one(&field);
    // t^{n-1} (1 - xt)^{a-1} (1 - t)^{b-1}
    let integrand = &(&Polynomial::monomial(one.clone(), (n - 1) as usize)
        * &linear_power(&x, a - 1))
        * &linear_power(&one, b - 1);
    let mut prim = vec![one.zero_like()];
    for (k, c) in integrand.coeffs().iter().enumerate() {
        let inv = one
            .from_u64_like(k as u64 + 1)
            .inverse()
            .expect("nonzero integer");
        prim.push(c.clone() * &inv);
    }
    let prim = Polynomial::new(prim);
    let at_one = prim.coeffs().iter().fold(one.zero_like(), |acc, c| acc + c);
    let u = -(at_one
        .inverse()
        .ok_or_else(|| Error::DegenerateInput("the integral at 1 is not invertible".into()))?);
    let beta = &Polynomial::constant(one.clone()) + &prim.scale(&u);
    let known = &linear_power(&x, a) * &linear_power(&one, b);
    let (cofactor, rem) = beta
        .div_rem(&known)
        .ok_or_else(|| Error::DegenerateInput("x is not a unit modulo h".into()))?;
    if !rem.is_zero() || cofactor.degree() != Some((n - 2) as usize) {
        return Err(Error::InternalInconsistency(format!(
            "beta is not divisible by (1 - X)^{b} (1 - xX)^{a}"
        )));
    }
    Ok(OnesAbModel {
        n,
        a,
        b,
        h,
        field,
        beta,
        u,
        cofactor,
        root_index,
        root_approx,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::equations::{check_conditions, kummer_invariant};
    use crate::fqsolver::orbit_report;
    use crate::reduction::{d_invariant, DVariant};
    use crate::trees::{count_trees, ValencyType};

    #[test]
    fn ab_models() {
        for (a, b) in [(1, 2), (2, 3), (3, 7), (4, 9)] {
            let m = family_ab(a, b).unwrap();
            assert!(check_conditions(&m).unwrap().all());
            let k = kummer_invariant(&m).unwrap();
            assert_eq!(k, q((a * b * (a + b)) as i64));
        }
        let m = family_ab(1, 2).unwrap();
        assert_eq!(m.to_string(), "(1 - 2X)(1 + X)^2");
        assert!(family_ab(3, 3).is_err());
    }

    #[test]
    fn abc_disc_examples() {
        assert_eq!(family_abc_disc(1, 2, 3), Integer::from(-36));
        assert_eq!(family_abc_disc(1, 1, 1), Integer::from(-3));
        assert_eq!(family_abc_disc(2, 3, 4), Integer::from(-216));
        assert_eq!(
            family_abc_fp_trichotomy(2, 3, 4, 11).unwrap(),
            AbcCase::SplitAsChar0 {
                galois_orbit: false
            }
        );
    }

    #[test]
    fn trichotomy_matches_solver() {
        for a in 1..=5u64 {
            for b in a + 1..=6 {
                for c in b + 1..=7 {
                    for p in [5u64, 7, 11, 13] {
                        let Ok(case) = family_abc_fp_trichotomy(a, b, c, p) else {
                            continue;
                        };
                        let t = ValencyType::new(vec![a, b, c]).unwrap();
                        let r = orbit_report(&t, p, 2).unwrap();
                        match case {
                            AbcCase::Empty => assert!(r.trees.is_empty()),
                            AbcCase::UniqueRational => {
                                assert_eq!(r.trees.len(), 1);
                                assert_eq!(r.trees[0].splitting_degree, 1);
                            }
                            AbcCase::SplitAsChar0 { galois_orbit } => {
                                assert_eq!(r.trees.len(), 2);
                                assert_eq!(
                                    r.orbits.len() == 1,
                                    galois_orbit,
                                    "({a},{b},{c}) p={p}"
                                );
                            }
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn hpoly_examples() {
        let h = family_ones_ab_hpoly(5, 9, 17).unwrap();
        assert_eq!(h, Polynomial::from_i64(&[4845, 8721, 6885, 2805, 495]));
        for a in 2..20u64 {
            for b in a + 1..=20 {
                let h = family_ones_ab_hpoly(3, a, b).unwrap();
                let want = [b * (b + 1) / 2, a * b, a * (a + 1) / 2];
                assert_eq!(h.coeffs(), &want.map(Integer::from)[..]);
            }
        }
        for n in 3..=8u64 {
            let h = family_ones_ab_hpoly(n, 3, 5).unwrap();
            assert_eq!(h.degree(), Some(n as usize - 1));
            assert_eq!(h.coeffs()[0], binomial(5 + n - 2, 4));
            assert_eq!(h.leading().unwrap(), &binomial(3 + n - 2, 2));
        }
    }

    #[test]
    fn constants_examples() {
        let r = family_regularity_constants(5, 2, Some(77)).unwrap();
        assert_eq!(r.c, Integer::from(720));
        assert_eq!(r.c_factors.to_string(), "2^4 * 3^2 * 5");
        assert_eq!(
            r.u_factors.unwrap().to_string(),
            "2^13 * 3^7 * 5^3 * 7 * 11 * 13 * 79^2"
        );
        // The degree-77 instance (1,1,1,2,72).
        let r = family_regularity_constants(5, 2, Some(72)).unwrap();
        assert_eq!(
            r.u_factors.unwrap().to_string(),
            "2^11 * 3^6 * 5^5 * 19 * 37^2 * 73"
        );
    }

    #[test]
    fn c_support_matches_subset_sums() {
        for n in 3..=6u64 {
            for a in 2..=8u64 {
                let c = regularity_c(n, a).unwrap();
                let cs: Vec<u64> = factorize(&c)
                    .unwrap()
                    .primes()
                    .iter()
                    .map(|p| p.to_u64().unwrap())
                    .collect();
                let mut ones = vec![1; n as usize - 2];
                ones.push(a);
                let d = d_invariant(&ValencyType::new(ones).unwrap(), DVariant::Full).unwrap();
                assert_eq!(
                    cs,
                    d.primes.iter().copied().collect::<Vec<_>>(),
                    "n={n} a={a}"
                );
            }
        }
    }

    #[test]
    fn u_support_matches_proper_subset_sums() {
        for n in 3..=6u64 {
            for a in 2..=5u64 {
                for b in a + 1..=12 {
                    let u = regularity_u(n, a, b).unwrap();
                    let us: Vec<u64> = factorize(&u)
                        .unwrap()
                        .primes()
                        .iter()
                        .map(|p| p.to_u64().unwrap())
                        .collect();
                    let mut t = vec![1; n as usize - 2];
                    t.extend([a, b]);
                    let d = d_invariant(&ValencyType::new(t).unwrap(), DVariant::Proper).unwrap();
                    assert_eq!(
                        us,
                        d.primes.iter().copied().collect::<Vec<_>>(),
                        "n={n} a={a} b={b}"
                    );
                }
            }
        }
    }

    #[test]
    fn ones_ab_model_quartic() {
        let t = ValencyType::from_slice(&[1, 1, 1, 9, 17]).unwrap();
        assert_eq!(count_trees(&t), Integer::from(4));
        for i in 0..4 {
            let m = family_ones_ab_model(5, 9, 17, i).unwrap();
            assert_eq!(m.cofactor.degree(), Some(3));
            let (r1, rx) = m.numeric_residuals();
            assert!(r1 < 1e-6 && rx < 1e-6, "{r1} {rx}");
        }
        assert!(matches!(
            family_ones_ab_model(5, 9, 17, 4),
            Err(Error::BadRoot(_))
        ));
    }

    #[test]
    fn ones_ab_model_three_is_abc_family() {
        for (a, b) in [(2u64, 3u64), (2, 5), (3, 4), (4, 7)] {
            let m = family_ones_ab_model(3, a, b, 0).unwrap();
            // cofactor = 1 - yX
            let y = -m.cofactor.coeffs()[1].clone();
            let x = m.field.generator();
            let model = Model::from_parts(
                vec![1, a, b],
                vec![y, x, m.field.from_rational(q(1))],
                ModelKind::Normalized,
            )
            .unwrap();
            assert!(check_conditions(&model).unwrap().all());
        }
    }
}
