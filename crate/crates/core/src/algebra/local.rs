//! Truncated local rings `O / p^M O` where `O` is the ring of integers of a
//! tower: an unramified extension of degree `k` of the p-adic integers,
//! optionally followed by a pure extension `T^e = -c` with `v_p(c) = h` and
//! `gcd(e, h) = 1`.
//!
//! An element is a vector of `e` unramified digits `u_j` (coefficient of
//! `T^j`), each a polynomial of degree `< k` in the unramified generator with
//! coefficients modulo `p^M`. Valuations are measured in units where
//! `v(p) = e`, so the uniformizer has valuation 1.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use num_integer::Integer as _;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::{valuation_p, Gf, GfContext, Integer, Ring};
use crate::error::{Error, Result};

const MAX_NEWTON_STEPS: usize = 256;

pub struct LocalContext {
    p: u64,
    prec: u32,
    k: usize,
    e: u32,
    h: u32,
    c: Integer,
    pm: Integer,
    g: Vec<Integer>,
    residue: Arc<GfContext>,
    frob_gen: Vec<Integer>,
}

impl fmt::Debug for LocalContext {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "O(p={}, k={}, e={}, c={}, M={})",
            self.p, self.k, self.e, self.c, self.prec
        )
    }
}

impl LocalContext {
    /// Unramified ring of degree `k`, modulus the lift of the residue field
    /// modulus, precision `p^M`.
    pub fn unramified(residue: &Arc<GfContext>, prec: u32) -> Result<Arc<Self>> {
        Self::build(residue, prec, 1, Integer::zero(), 0)
    }

    /// Pure extension `T^e = -c` over the unramified ring with residue
    /// field `residue`.
    pub fn pure(residue: &Arc<GfContext>, prec: u32, e: u32, c: &Integer) -> Result<Arc<Self>> {
        if e == 0 {
            return Err(Error::InvalidArgument(
                "ramification degree must be positive".into(),
            ));
        }
        let p = residue.characteristic();
        let h = valuation_p(c, p)
            .ok_or_else(|| Error::DegenerateInput("twist constant is zero".into()))?;
        if e > 1 && num_integer::gcd(e, h) != 1 {
            return Err(Error::UnsupportedRamification(format!(
                "T^{e} = -({c}) with v_{p} = {h} is not pure (gcd(e, h) = {})",
                num_integer::gcd(e, h)
            )));
        }
        Self::build(residue, prec, e, c.clone(), h)
    }

    fn build(residue: &Arc<GfContext>, prec: u32, e: u32, c: Integer, h: u32) -> Result<Arc<Self>> {
        if prec == 0 {
            return Err(Error::InvalidArgument("precision must be positive".into()));
        }
        let p = residue.characteristic();
        let k = residue.degree();
        let pm = Integer::from(p).pow(prec);
        let g = residue
            .modulus()
            .iter()
            .map(|&x| Integer::from(x))
            .collect();
        let mut ctx = LocalContext {
            p,
            prec,
            k,
            e,
            h,
            c,
            pm,
            g,
            residue: Arc::clone(residue),
            frob_gen: Vec::new(),
        };
        ctx.frob_gen = ctx.frobenius_of_generator()?;
        Ok(Arc::new(ctx))
    }

    pub fn prime(&self) -> u64 {
        self.p
    }

    pub fn precision(&self) -> u32 {
        self.prec
    }

    pub fn residue_degree(&self) -> usize {
        self.k
    }

    pub fn ramification(&self) -> u32 {
        self.e
    }

    /// `v_p(c)` for the pure extension, `0` when unramified.
    pub fn twist_valuation(&self) -> u32 {
        self.h
    }

    pub fn twist_constant(&self) -> &Integer {
        &self.c
    }

    pub fn modulus_power(&self) -> &Integer {
        &self.pm
    }

    pub fn residue_field(&self) -> &Arc<GfContext> {
        &self.residue
    }

    /// Valuation of `p^M`, i.e. the precision in uniformizer units.
    pub fn precision_valuation(&self) -> u32 {
        self.e * self.prec
    }

    fn len(&self) -> usize {
        self.e as usize * self.k
    }

    fn reduce(&self, x: &Integer) -> Integer {
        x.mod_floor(&self.pm)
    }

    fn u_mul(&self, a: &[Integer], b: &[Integer]) -> Vec<Integer> {
        let k = self.k;
        let mut prod = vec![Integer::zero(); 2 * k - 1];
        for (i, x) in a.iter().enumerate() {
            if Zero::is_zero(x) {
                continue;
            }
            for (j, y) in b.iter().enumerate() {
                prod[i + j] += x * y;
            }
        }
        for d in (k..prod.len()).rev() {
            let c = std::mem::take(&mut prod[d]);
            if Zero::is_zero(&c) {
                continue;
            }
            for j in 0..k {
                prod[d - k + j] -= &c * &self.g[j];
            }
        }
        prod.truncate(k);
        prod.iter().map(|x| self.reduce(x)).collect()
    }

    fn u_eval_generator_poly(&self, coeffs: &[Integer], at: &[Integer]) -> Vec<Integer> {
        let mut acc = vec![Integer::zero(); self.k];
        for c in coeffs.iter().rev() {
            acc = self.u_mul(&acc, at);
            acc[0] = self.reduce(&(&acc[0] + c));
        }
        acc
    }

    /// Image of the unramified generator under the Frobenius lift: the root
    /// of the modulus congruent to `t^p`, refined by Newton iteration.
    fn frobenius_of_generator(&self) -> Result<Vec<Integer>> {
        let k = self.k;
        if k == 1 {
            return Ok(vec![Integer::zero()]);
        }
        let mut t = vec![Integer::zero(); k];
        t[1] = Integer::one();
        let mut r = vec![Integer::one()];
        r.resize(k, Integer::zero());
        for _ in 0..self.p {
            r = self.u_mul(&r, &t);
        }
        let dg: Vec<Integer> = self
            .g
            .iter()
            .enumerate()
            .skip(1)
            .map(|(i, c)| c * Integer::from(i))
            .collect();
        for _ in 0..MAX_NEWTON_STEPS {
            let num = self.u_eval_generator_poly(&self.g, &r);
            if num.iter().all(Zero::is_zero) {
                return Ok(r);
            }
            let den = self.u_eval_generator_poly(&dg, &r);
            let inv = self.u_inverse(&den).ok_or_else(|| {
                Error::InternalInconsistency("modulus derivative is not a unit".into())
            })?;
            let step = self.u_mul(&num, &inv);
            r = r
                .iter()
                .zip(&step)
                .map(|(a, b)| self.reduce(&(a - b)))
                .collect();
        }
        Err(Error::InternalInconsistency(
            "Frobenius lift did not converge".into(),
        ))
    }

    fn u_residue(&self, u: &[Integer]) -> u32 {
        let p = Integer::from(self.p);
        let d: Vec<u64> = u
            .iter()
            .map(|x| x.mod_floor(&p).to_u64().unwrap())
            .collect();
        self.residue.from_digits(&d)
    }

    fn u_from_residue(&self, r: u32) -> Vec<Integer> {
        self.residue
            .digits(r)
            .into_iter()
            .map(Integer::from)
            .collect()
    }

    fn u_inverse(&self, u: &[Integer]) -> Option<Vec<Integer>> {
        let r = self.residue.inv(self.u_residue(u))?;
        let mut y = self.u_from_residue(r);
        let mut two = vec![Integer::zero(); self.k];
        two[0] = Integer::from(2);
        for _ in 0..MAX_NEWTON_STEPS {
            let uy = self.u_mul(u, &y);
            let corr: Vec<Integer> = two
                .iter()
                .zip(&uy)
                .map(|(a, b)| self.reduce(&(a - b)))
                .collect();
            let next = self.u_mul(&y, &corr);
            if next == y {
                return Some(y);
            }
            y = next;
        }
        None
    }

    fn wrap(self: &Arc<Self>, d: Vec<Integer>) -> LocalElem {
        LocalElem {
            ctx: Arc::clone(self),
            d,
        }
    }

    pub fn zero(self: &Arc<Self>) -> LocalElem {
        self.wrap(vec![Integer::zero(); self.len()])
    }

    pub fn from_integer(self: &Arc<Self>, n: &Integer) -> LocalElem {
        let mut d = vec![Integer::zero(); self.len()];
        d[0] = self.reduce(n);
        self.wrap(d)
    }

    pub fn one(self: &Arc<Self>) -> LocalElem {
        self.from_integer(&Integer::one())
    }

    /// The adjoined element `T` with `T^e = -c`.
    pub fn generator(self: &Arc<Self>) -> LocalElem {
        if self.e == 1 {
            return self.from_integer(&-&self.c);
        }
        let mut d = vec![Integer::zero(); self.len()];
        d[self.k] = Integer::one();
        self.wrap(d)
    }

    /// Digit-wise lift of a residue: coordinates in `[0, p)`.
    pub fn lift_residue(self: &Arc<Self>, r: u32) -> LocalElem {
        let mut d = vec![Integer::zero(); self.len()];
        for (slot, v) in d.iter_mut().zip(self.u_from_residue(r)) {
            *slot = v;
        }
        self.wrap(d)
    }

    /// Teichmüller representative of a residue: the unique root of unity
    /// (or zero) reducing to it.
    pub fn teichmuller(self: &Arc<Self>, r: u32) -> LocalElem {
        let mut x = self.lift_residue(r);
        let q = self.residue.order() as u64;
        for _ in 0..self.prec {
            x = x.pow(q);
        }
        x
    }

    /// Builds an element from unramified digits: `digits[j][l]` is the
    /// coefficient of `T^j t^l`.
    pub fn from_digits(self: &Arc<Self>, digits: &[Vec<Integer>]) -> Result<LocalElem> {
        let mut d = vec![Integer::zero(); self.len()];
        if digits.len() > self.e as usize || digits.iter().any(|u| u.len() > self.k) {
            return Err(Error::InvalidArgument("too many local digits".into()));
        }
        for (j, u) in digits.iter().enumerate() {
            for (l, c) in u.iter().enumerate() {
                d[j * self.k + l] = self.reduce(c);
            }
        }
        Ok(self.wrap(d))
    }
}

/// Element of a truncated local ring.
#[derive(Clone)]
pub struct LocalElem {
    ctx: Arc<LocalContext>,
    d: Vec<Integer>,
}

impl LocalElem {
    pub fn context(&self) -> &Arc<LocalContext> {
        &self.ctx
    }

    fn digit(&self, j: usize) -> &[Integer] {
        let k = self.ctx.k;
        &self.d[j * k..(j + 1) * k]
    }

    /// Digits `[T^j][t^l]` with coefficients in `[0, p^M)`.
    pub fn digits(&self) -> Vec<Vec<Integer>> {
        (0..self.ctx.e as usize)
            .map(|j| self.digit(j).to_vec())
            .collect()
    }

    /// Flat coefficient list, `T`-major.
    pub fn coefficients(&self) -> &[Integer] {
        &self.d
    }

    /// Valuation with `v(p) = e`; `None` when the element vanishes to the
    /// working precision.
    pub fn valuation(&self) -> Option<u32> {
        let (e, h, p) = (self.ctx.e, self.ctx.h, self.ctx.p);
        (0..e as usize)
            .filter_map(|j| {
                self.digit(j)
                    .iter()
                    .filter_map(|c| valuation_p(c, p))
                    .min()
                    .map(|v| e * v + j as u32 * h)
            })
            .min()
    }

    /// Image in the residue field.
    pub fn residue(&self) -> u32 {
        self.ctx.u_residue(self.digit(0))
    }

    pub fn residue_gf(&self) -> Gf {
        self.ctx.residue.elem(self.residue())
    }

    /// Coefficient-wise Frobenius lift on the unramified part, fixing `T`.
    pub fn frobenius(&self) -> LocalElem {
        let ctx = &self.ctx;
        let mut d = Vec::with_capacity(self.d.len());
        for j in 0..ctx.e as usize {
            d.extend(ctx.u_eval_generator_poly(self.digit(j), &ctx.frob_gen));
        }
        ctx.wrap(d)
    }

    /// Exact quotient by `T`. The constant digit must be divisible by `c`
    /// up to a unit; `p^h` of precision is lost in the top digit.
    pub fn div_by_t(&self) -> Result<LocalElem> {
        let ctx = &self.ctx;
        let (e, k) = (ctx.e as usize, ctx.k);
        let u0 = self.digit(0);
        let ph = Integer::from(ctx.p).pow(ctx.h);
        if u0.iter().any(|c| !Zero::is_zero(&(c % &ph))) {
            return Err(Error::ValuationMismatch(
                "element is not divisible by T".into(),
            ));
        }
        let unit = -(&ctx.c / &ph);
        let unit_inv = unit.extended_gcd(&ctx.pm).x.mod_floor(&ctx.pm);
        if !Zero::is_zero(&(&unit * &unit_inv - Integer::one()).mod_floor(&ctx.pm)) {
            return Err(Error::InternalInconsistency(
                "twist constant has no unit part".into(),
            ));
        }
        let mut d = vec![Integer::zero(); e * k];
        for j in 1..e {
            d[(j - 1) * k..j * k].clone_from_slice(self.digit(j));
        }
        for l in 0..k {
            d[(e - 1) * k + l] = ctx.reduce(&(&u0[l] / &ph * &unit_inv));
        }
        Ok(ctx.wrap(d))
    }
}

impl fmt::Debug for LocalElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for LocalElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let ctx = &self.ctx;
        let mut terms = Vec::new();
        for j in 0..ctx.e as usize {
            let u = self.digit(j);
            if u.iter().all(Zero::is_zero) {
                continue;
            }
            let body = if ctx.k == 1 {
                u[0].to_string()
            } else {
                super::format_poly(u, "t", |c: &Integer| Zero::is_zero(c))
            };
            terms.push(match j {
                0 => body,
                1 if ctx.k > 1 => format!("({body})T"),
                1 => format!("{body}T"),
                _ if ctx.k > 1 => format!("({body})T^{j}"),
                _ => format!("{body}T^{j}"),
            });
        }
        if terms.is_empty() {
            return write!(f, "0 (mod {}^{})", ctx.p, ctx.prec);
        }
        write!(f, "{} (mod {}^{})", terms.join(" + "), ctx.p, ctx.prec)
    }
}

impl PartialEq for LocalElem {
    fn eq(&self, other: &Self) -> bool {
        self.d == other.d
    }
}

impl Add<&LocalElem> for LocalElem {
    type Output = LocalElem;
    fn add(mut self, rhs: &LocalElem) -> LocalElem {
        for (a, b) in self.d.iter_mut().zip(&rhs.d) {
            *a += b;
            if *a >= self.ctx.pm {
                *a -= &self.ctx.pm;
            }
        }
        self
    }
}

impl Sub<&LocalElem> for LocalElem {
    type Output = LocalElem;
    fn sub(mut self, rhs: &LocalElem) -> LocalElem {
        for (a, b) in self.d.iter_mut().zip(&rhs.d) {
            *a -= b;
            if a.is_negative() {
                *a += &self.ctx.pm;
            }
        }
        self
    }
}

impl Neg for LocalElem {
    type Output = LocalElem;
    fn neg(mut self) -> LocalElem {
        for a in self.d.iter_mut() {
            if !Zero::is_zero(a) {
                *a = &self.ctx.pm - &*a;
            }
        }
        self
    }
}

impl Mul<&LocalElem> for LocalElem {
    type Output = LocalElem;
    fn mul(self, rhs: &LocalElem) -> LocalElem {
        let ctx = &self.ctx;
        let (e, k) = (ctx.e as usize, ctx.k);
        let mut acc = vec![Integer::zero(); e * k];
        let minus_c = -&ctx.c;
        for i in 0..e {
            let a = self.digit(i);
            if a.iter().all(Zero::is_zero) {
                continue;
            }
            for j in 0..e {
                let b = rhs.digit(j);
                if b.iter().all(Zero::is_zero) {
                    continue;
                }
                let mut prod = ctx.u_mul(a, b);
                let mut s = i + j;
                if s >= e {
                    s -= e;
                    for x in prod.iter_mut() {
                        *x *= &minus_c;
                    }
                }
                for l in 0..k {
                    acc[s * k + l] += &prod[l];
                }
            }
        }
        let d = acc.iter().map(|x| ctx.reduce(x)).collect();
        ctx.wrap(d)
    }
}

macro_rules! local_owned {
    ($($tr:ident $m:ident),*) => {$(
        impl $tr for LocalElem {
            type Output = LocalElem;
            fn $m(self, rhs: LocalElem) -> LocalElem {
                self.$m(&rhs)
            }
        }
    )*};
}
local_owned!(Add add, Sub sub, Mul mul);

impl Ring for LocalElem {
    fn zero_like(&self) -> Self {
        self.ctx.zero()
    }
    fn one_like(&self) -> Self {
        self.ctx.one()
    }
    fn from_integer_like(&self, n: &Integer) -> Self {
        self.ctx.from_integer(n)
    }
    fn is_zero(&self) -> bool {
        self.d.iter().all(Zero::is_zero)
    }
    fn inverse(&self) -> Option<Self> {
        let ctx = &self.ctx;
        let r = ctx.residue.inv(self.residue())?;
        let mut y = ctx.lift_residue(r);
        let two = ctx.from_integer(&Integer::from(2));
        for _ in 0..MAX_NEWTON_STEPS {
            let next = y.clone() * &(two.clone() - &(self.clone() * &y));
            if next == y {
                return Some(y);
            }
            y = next;
        }
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng as _, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_elem(ctx: &Arc<LocalContext>, rng: &mut ChaCha8Rng) -> LocalElem {
        let pm = ctx.modulus_power().clone();
        let digits: Vec<Vec<Integer>> = (0..ctx.ramification())
            .map(|_| {
                (0..ctx.residue_degree())
                    .map(|_| {
                        // Bias toward high valuations.
                        let shift = rng.gen_range(0..4u32);
                        let v =
                            Integer::from(rng.gen::<u64>()) * Integer::from(ctx.prime()).pow(shift);
                        v.mod_floor(&pm)
                    })
                    .collect()
            })
            .collect();
        ctx.from_digits(&digits).unwrap()
    }

    fn contexts() -> Vec<Arc<LocalContext>> {
        let f5 = GfContext::new(5, 1).unwrap();
        let f9 = GfContext::new(3, 2).unwrap();
        let f4 = GfContext::new(2, 2).unwrap();
        vec![
            LocalContext::unramified(&f5, 10).unwrap(),
            LocalContext::unramified(&f9, 8).unwrap(),
            LocalContext::pure(&f5, 8, 3, &Integer::from(5)).unwrap(),
            LocalContext::pure(&f4, 12, 3, &Integer::from(-4 * 3)).unwrap(),
            LocalContext::pure(&f9, 8, 4, &Integer::from(27 * 2)).unwrap(),
        ]
    }

    #[test]
    fn valuation_axioms_random() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for ctx in contexts() {
            let cap = ctx.precision_valuation();
            for _ in 0..200 {
                let a = random_elem(&ctx, &mut rng);
                let b = random_elem(&ctx, &mut rng);
                let (Some(va), Some(vb)) = (a.valuation(), b.valuation()) else {
                    continue;
                };
                match (a.clone() * &b).valuation() {
                    Some(v) => assert_eq!(v, va + vb, "{ctx:?}"),
                    None => assert!(va + vb >= cap),
                }
                if let Some(vs) = (a.clone() + &b).valuation() {
                    assert!(vs >= va.min(vb));
                    if va != vb {
                        assert_eq!(vs, va.min(vb));
                    }
                }
            }
        }
    }

    #[test]
    fn generator_satisfies_twist() {
        for ctx in contexts().into_iter().skip(2) {
            let t = ctx.generator();
            let lhs = t.pow(ctx.ramification() as u64) + &ctx.from_integer(ctx.twist_constant());
            assert!(lhs.is_zero());
            assert_eq!(t.valuation(), Some(ctx.twist_valuation()));
        }
    }

    #[test]
    fn inverse_of_units() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for ctx in contexts() {
            for _ in 0..50 {
                let a = random_elem(&ctx, &mut rng);
                if a.residue() == 0 {
                    assert!(a.inverse().is_none());
                    continue;
                }
                assert!((a.clone() * &a.inverse().unwrap()).is_one());
            }
        }
    }

    #[test]
    fn residue_map_is_a_homomorphism() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for ctx in contexts() {
            let f = ctx.residue_field().clone();
            for _ in 0..100 {
                let a = random_elem(&ctx, &mut rng);
                let b = random_elem(&ctx, &mut rng);
                assert_eq!((a.clone() * &b).residue(), f.mul(a.residue(), b.residue()));
                assert_eq!((a.clone() + &b).residue(), f.add(a.residue(), b.residue()));
            }
        }
    }

    #[test]
    fn frobenius_lift_is_a_ring_map_of_order_k() {
        let f9 = GfContext::new(3, 2).unwrap();
        let ctx = LocalContext::unramified(&f9, 6).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..50 {
            let a = random_elem(&ctx, &mut rng);
            let b = random_elem(&ctx, &mut rng);
            assert_eq!((a.clone() * &b).frobenius(), a.frobenius() * &b.frobenius());
            assert_eq!(a.frobenius().frobenius(), a);
            assert_eq!(a.frobenius().residue(), f9.frobenius(a.residue()));
        }
    }

    #[test]
    fn teichmuller_is_root_of_unity() {
        let f9 = GfContext::new(3, 2).unwrap();
        let ctx = LocalContext::unramified(&f9, 8).unwrap();
        for r in 1..9 {
            let w = ctx.teichmuller(r);
            assert_eq!(w.residue(), r);
            assert!(w.pow(8).is_one());
        }
    }

    #[test]
    fn division_by_generator() {
        let f5 = GfContext::new(5, 1).unwrap();
        let ctx = LocalContext::pure(&f5, 8, 3, &Integer::from(10)).unwrap();
        let t = ctx.generator();
        let x = ctx.from_integer(&Integer::from(7)) + &(t.clone() * &t);
        let y = (x.clone() * &t).div_by_t().unwrap();
        // The top digit loses one power of p.
        let diff = (y - &x).valuation();
        assert!(diff.is_none_or(|v| v >= ctx.precision_valuation() - 3));
        assert!(ctx.one().div_by_t().is_err());
    }

    #[test]
    fn impure_twist_rejected() {
        let f3 = GfContext::new(3, 1).unwrap();
        let err = LocalContext::pure(&f3, 8, 2, &Integer::from(9)).unwrap_err();
        assert_eq!(err.tag(), "UNSUPPORTED_RAMIFICATION");
    }
}
