//! Dense univariate polynomials over any [`Ring`], coefficients stored low
//! to high with no trailing zeros.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_traits::Zero;

use super::{format_poly, Integer, Rational, Ring};
use crate::error::{Error, Result};

#[derive(Clone, PartialEq, Debug)]
pub struct Polynomial<R> {
    coeffs: Vec<R>,
}

impl<R: Ring> Polynomial<R> {
    pub fn new(mut coeffs: Vec<R>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        Polynomial { coeffs }
    }

    pub fn zero() -> Self {
        Polynomial { coeffs: Vec::new() }
    }

    pub fn constant(c: R) -> Self {
        Self::new(vec![c])
    }

    /// `c X^d`.
    pub fn monomial(c: R, d: usize) -> Self {
        let mut v = vec![c.zero_like(); d];
        v.push(c);
        Self::new(v)
    }

    pub fn coeffs(&self) -> &[R] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<R> {
        self.coeffs
    }

    /// Coefficient of `X^i`, `None` beyond the degree.
    pub fn coeff(&self, i: usize) -> Option<&R> {
        self.coeffs.get(i)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree, `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn leading(&self) -> Option<&R> {
        self.coeffs.last()
    }

    /// Index of the first nonzero coefficient; `None` stands for infinity.
    pub fn valuation_at_zero(&self) -> Option<usize> {
        self.coeffs.iter().position(|c| !c.is_zero())
    }

    pub fn derivative(&self) -> Self {
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, c)| c.clone() * &c.from_u64_like(i as u64))
                .collect(),
        )
    }

    /// Horner evaluation.
    pub fn eval(&self, x: &R) -> R {
        let mut acc = x.zero_like();
        for c in self.coeffs.iter().rev() {
            acc = acc * x + c;
        }
        acc
    }

    pub fn scale(&self, c: &R) -> Self {
        Self::new(self.coeffs.iter().map(|a| a.clone() * c).collect())
    }

    pub fn map<S: Ring>(&self, f: impl Fn(&R) -> S) -> Polynomial<S> {
        Polynomial::new(self.coeffs.iter().map(f).collect())
    }

    /// Truncation modulo `X^len`.
    pub fn truncate(&self, len: usize) -> Self {
        Self::new(self.coeffs.iter().take(len).cloned().collect())
    }

    pub fn pow(&self, mut e: u64) -> Self {
        let Some(c0) = self.coeffs.first() else {
            return Self::zero();
        };
        let mut acc = Self::constant(c0.one_like());
        let mut base = self.clone();
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    /// Division with remainder by a polynomial whose leading coefficient is
    /// a unit. Returns `None` when it is not.
    pub fn div_rem(&self, d: &Self) -> Option<(Self, Self)> {
        let dd = d.degree()?;
        let inv = d.leading()?.inverse()?;
        let Some(n) = self.degree() else {
            return Some((Self::zero(), Self::zero()));
        };
        if n < dd {
            return Some((Self::zero(), self.clone()));
        }
        let mut r = self.coeffs.clone();
        let mut q = vec![inv.zero_like(); n - dd + 1];
        for k in (0..=n - dd).rev() {
            let c = r[k + dd].clone() * &inv;
            if !c.is_zero() {
                for (j, dj) in d.coeffs.iter().enumerate() {
                    r[k + j] = r[k + j].clone() - &(c.clone() * dj);
                }
            }
            q[k] = c;
        }
        r.truncate(dd);
        Some((Self::new(q), Self::new(r)))
    }
}

impl<R: Ring> fmt::Display for Polynomial<R> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", format_poly(&self.coeffs, "X", |c| c.is_zero()))
    }
}

impl<'a, R: Ring> Add<&'a Polynomial<R>> for &'a Polynomial<R> {
    type Output = Polynomial<R>;
    fn add(self, rhs: &'a Polynomial<R>) -> Polynomial<R> {
        let (long, short) = if self.coeffs.len() >= rhs.coeffs.len() {
            (self, rhs)
        } else {
            (rhs, self)
        };
        let mut v = long.coeffs.clone();
        for (a, b) in v.iter_mut().zip(&short.coeffs) {
            *a = a.clone() + b;
        }
        Polynomial::new(v)
    }
}

impl<'a, R: Ring> Sub<&'a Polynomial<R>> for &'a Polynomial<R> {
    type Output = Polynomial<R>;
    fn sub(self, rhs: &'a Polynomial<R>) -> Polynomial<R> {
        self + &(-rhs)
    }
}

impl<R: Ring> Neg for &Polynomial<R> {
    type Output = Polynomial<R>;
    fn neg(self) -> Polynomial<R> {
        Polynomial {
            coeffs: self.coeffs.iter().map(|c| -c.clone()).collect(),
        }
    }
}

impl<'a, R: Ring> Mul<&'a Polynomial<R>> for &'a Polynomial<R> {
    type Output = Polynomial<R>;
    fn mul(self, rhs: &'a Polynomial<R>) -> Polynomial<R> {
        if self.is_zero() || rhs.is_zero() {
            return Polynomial::zero();
        }
        let z = self.coeffs[0].zero_like();
        let mut v = vec![z; self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().enumerate() {
                v[i + j] = v[i + j].clone() + &(a.clone() * b);
            }
        }
        Polynomial::new(v)
    }
}

macro_rules! owned_ops {
    ($($tr:ident $m:ident),*) => {$(
        impl<R: Ring> $tr for Polynomial<R> {
            type Output = Polynomial<R>;
            fn $m(self, rhs: Polynomial<R>) -> Polynomial<R> {
                (&self).$m(&rhs)
            }
        }
    )*};
}
owned_ops!(Add add, Sub sub, Mul mul);

impl<R: Ring> Neg for Polynomial<R> {
    type Output = Polynomial<R>;
    fn neg(self) -> Polynomial<R> {
        -&self
    }
}

impl Polynomial<Integer> {
    pub fn from_i64(coeffs: &[i64]) -> Self {
        Self::new(coeffs.iter().map(|&c| Integer::from(c)).collect())
    }

    pub fn to_rational(&self) -> Polynomial<Rational> {
        self.map(|c| Rational::from_integer(c.clone()))
    }
}

fn resultant_over_field<R: Ring>(f: &Polynomial<R>, g: &Polynomial<R>) -> Option<R> {
    let (Some(df), Some(dg)) = (f.degree(), g.degree()) else {
        return None;
    };
    let lc = g.leading().unwrap().clone();
    if dg == 0 {
        return Some(lc.pow(df as u64));
    }
    let (_, r) = f.div_rem(g)?;
    let Some(dr) = r.degree() else {
        return Some(lc.zero_like());
    };
    let mut acc = lc.pow((df - dr) as u64) * &resultant_over_field(g, &r)?;
    if df * dg % 2 == 1 {
        acc = -acc;
    }
    Some(acc)
}

/// Resultant of two integer polynomials, computed by the Euclidean
/// remainder sequence over the rationals. Zero if either is zero.
pub fn resultant(f: &Polynomial<Integer>, g: &Polynomial<Integer>) -> Integer {
    match resultant_over_field(&f.to_rational(), &g.to_rational()) {
        Some(r) => {
            debug_assert!(r.is_integer());
            r.to_integer()
        }
        None => Integer::zero(),
    }
}

/// `disc(f) = (-1)^{d(d-1)/2} Res(f, f') / lc(f)`.
pub fn discriminant(f: &Polynomial<Integer>) -> Result<Integer> {
    let d = match f.degree() {
        Some(d) if d >= 1 => d,
        _ => return Err(Error::DegenerateInput("discriminant of a constant".into())),
    };
    let r = resultant(f, &f.derivative());
    let q = r / f.leading().unwrap();
    Ok(if (d * (d - 1) / 2) % 2 == 1 { -q } else { q })
}

impl<R: Ring> Polynomial<R> {
    /// The constant polynomial one in the context of `like`.
    pub fn one_like(like: &R) -> Self {
        Self::constant(like.one_like())
    }
}

impl<R: Ring> Polynomial<R> {
    /// Monic greatest common divisor over a field.
    pub fn gcd(&self, other: &Self) -> Self {
        let (mut a, mut b) = (self.clone(), other.clone());
        while !b.is_zero() {
            let (_, r) = a.div_rem(&b).expect("field coefficients are invertible");
            a = b;
            b = r;
        }
        match a.leading() {
            Some(l) if !l.is_one() => {
                let inv = l.inverse().expect("field coefficients are invertible");
                a.scale(&inv)
            }
            _ => a,
        }
    }

    /// `self^e mod m` for `m` with unit leading coefficient.
    pub fn pow_mod(&self, mut e: u64, m: &Self) -> Self {
        let like = m.leading().expect("nonzero modulus");
        let mut acc = Self::one_like(like).div_rem(m).unwrap().1;
        let mut base = self.div_rem(m).unwrap().1;
        while e > 0 {
            if e & 1 == 1 {
                acc = (&acc * &base).div_rem(m).unwrap().1;
            }
            e >>= 1;
            if e > 0 {
                base = (&base * &base).div_rem(m).unwrap().1;
            }
        }
        acc
    }
}
