//! Exact arithmetic in `Q[x]/(h)`.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use super::{format_poly, Integer, Polynomial, Rational, Ring};
use crate::error::{Error, Result};

#[derive(Debug)]
pub struct QuotientContext {
    h: Polynomial<Rational>,
}

impl QuotientContext {
    /// The ring `Q[x]/(h)`; `h` is made monic.
    pub fn new(h: &Polynomial<Rational>) -> Result<Arc<Self>> {
        let lead = match h.degree() {
            Some(d) if d >= 1 => h.leading().unwrap().clone(),
            _ => return Err(Error::DegenerateInput("quotient by a constant".into())),
        };
        Ok(Arc::new(QuotientContext {
            h: h.scale(&lead.recip()),
        }))
    }

    pub fn modulus(&self) -> &Polynomial<Rational> {
        &self.h
    }

    pub fn elem(self: &Arc<Self>, c: &Polynomial<Rational>) -> QuotientElem {
        let (_, r) = c.div_rem(&self.h).expect("monic modulus");
        QuotientElem {
            ctx: Arc::clone(self),
            c: r,
        }
    }

    /// The class of `x`.
    pub fn generator(self: &Arc<Self>) -> QuotientElem {
        self.elem(&Polynomial::monomial(Rational::from_integer(1.into()), 1))
    }

    pub fn from_rational(self: &Arc<Self>, q: Rational) -> QuotientElem {
        self.elem(&Polynomial::constant(q))
    }
}

#[derive(Clone)]
pub struct QuotientElem {
    ctx: Arc<QuotientContext>,
    c: Polynomial<Rational>,
}

impl QuotientElem {
    /// Canonical representative of degree below `deg h`.
    pub fn representative(&self) -> &Polynomial<Rational> {
        &self.c
    }

    fn with(&self, c: Polynomial<Rational>) -> Self {
        self.ctx.elem(&c)
    }
}

impl fmt::Debug for QuotientElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for QuotientElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}",
            format_poly(self.c.coeffs(), "x", |c: &Rational| {
                num_traits::Zero::is_zero(c)
            })
        )
    }
}

impl PartialEq for QuotientElem {
    fn eq(&self, other: &Self) -> bool {
        self.c == other.c
    }
}

macro_rules! quotient_ops {
    ($($tr:ident $m:ident),*) => {$(
        impl<'a> $tr<&'a QuotientElem> for QuotientElem {
            type Output = QuotientElem;
            fn $m(self, rhs: &'a QuotientElem) -> QuotientElem {
                let c = (&self.c).$m(&rhs.c);
                self.with(c)
            }
        }
        impl $tr for QuotientElem {
            type Output = QuotientElem;
            fn $m(self, rhs: QuotientElem) -> QuotientElem {
                self.$m(&rhs)
            }
        }
    )*};
}
quotient_ops!(Add add, Sub sub, Mul mul);

impl Neg for QuotientElem {
    type Output = QuotientElem;
    fn neg(self) -> QuotientElem {
        QuotientElem {
            c: -&self.c,
            ctx: self.ctx,
        }
    }
}

impl Ring for QuotientElem {
    fn zero_like(&self) -> Self {
        self.with(Polynomial::zero())
    }
    fn one_like(&self) -> Self {
        self.ctx.from_rational(Rational::from_integer(1.into()))
    }
    fn from_integer_like(&self, n: &Integer) -> Self {
        self.ctx.from_rational(Rational::from_integer(n.clone()))
    }
    fn is_zero(&self) -> bool {
        self.c.is_zero()
    }
    /// Inverse by the extended Euclidean algorithm; `None` when the class
    /// shares a factor with the modulus.
    fn inverse(&self) -> Option<Self> {
        let (mut r0, mut r1) = (self.ctx.h.clone(), self.c.clone());
        let one = Polynomial::constant(Rational::from_integer(1.into()));
        let (mut t0, mut t1) = (Polynomial::zero(), one);
        while !r1.is_zero() {
            let (q, r) = r0.div_rem(&r1)?;
            let t = &t0 - &(&q * &t1);
            r0 = std::mem::replace(&mut r1, r);
            t0 = std::mem::replace(&mut t1, t);
        }
        if r0.degree() != Some(0) {
            return None;
        }
        let inv = r0.leading().unwrap().recip();
        Some(self.with(t0.scale(&inv)))
    }
}
