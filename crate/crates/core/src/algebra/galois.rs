//! Finite fields `F_{p^k}` in polynomial basis over a lex-first monic
//! irreducible modulus. Elements are encoded as integers `sum c_i p^i`;
//! multiplication and addition go through discrete-log and Zech tables.

use std::cmp::Ordering;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use num_integer::Integer as _;
use num_traits::ToPrimitive;

use super::{factorize, format_poly, is_prime_u64, Fp, Integer, Polynomial, Ring};
use crate::error::{Error, Result};

/// Largest field order for which log tables are built.
pub const MAX_FIELD_ORDER: u64 = 1 << 20;

const NONE: u32 = u32::MAX;

/// Whether `f` (degree `k >= 1`) is irreducible over `F_p`: no common factor
/// with `X^{p^i} - X` for `i <= k/2`.
pub fn is_irreducible(f: &Polynomial<Fp>) -> bool {
    let Some(k) = f.degree() else {
        return false;
    };
    if k == 0 {
        return false;
    }
    let lead = f.leading().unwrap();
    let p = lead.modulus();
    let x = Polynomial::monomial(lead.one_like(), 1);
    let mut xp = x.clone();
    for _ in 0..k / 2 {
        xp = xp.pow_mod(p, f);
        let g = f.gcd(&(&xp - &x));
        if g.degree() != Some(0) {
            return false;
        }
    }
    true
}

/// First monic irreducible polynomial of degree `k` over `F_p`, scanning
/// the coefficient vectors `(c_0, ..., c_{k-1})` in lexicographic order
/// with `c_0` most significant.
pub fn find_irreducible(p: u64, k: usize) -> Result<Polynomial<Fp>> {
    if !is_prime_u64(p) {
        return Err(Error::InvalidArgument(format!("{p} is not prime")));
    }
    if k == 0 {
        return Err(Error::InvalidArgument(
            "field degree must be positive".into(),
        ));
    }
    let mut digits = vec![0u64; k];
    loop {
        let mut coeffs: Vec<Fp> = digits.iter().map(|&c| Fp::from_residue(c, p)).collect();
        coeffs.push(Fp::from_residue(1, p));
        let f = Polynomial::new(coeffs);
        if is_irreducible(&f) {
            return Ok(f);
        }
        // Increment with c_0 as the most significant digit.
        let mut i = k;
        loop {
            if i == 0 {
                return Err(Error::InternalInconsistency(format!(
                    "no irreducible of degree {k} over F_{p}"
                )));
            }
            i -= 1;
            digits[i] += 1;
            if digits[i] < p {
                break;
            }
            digits[i] = 0;
        }
    }
}

fn mulmod_digits(a: &[u64], b: &[u64], modulus: &[u64], p: u64) -> Vec<u64> {
    let k = modulus.len() - 1;
    let mut prod = vec![0u64; 2 * k];
    for (i, &x) in a.iter().enumerate() {
        if x == 0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate() {
            prod[i + j] = (prod[i + j] + x * y) % p;
        }
    }
    for d in (k..prod.len()).rev() {
        let c = prod[d];
        if c == 0 {
            continue;
        }
        for j in 0..=k {
            let t = c * modulus[j] % p;
            prod[d - k + j] = (prod[d - k + j] + p - t) % p;
        }
    }
    prod.truncate(k);
    prod
}

/// Arithmetic context for `F_{p^k}`. Shared read-only behind an `Arc`.
pub struct GfContext {
    p: u64,
    k: usize,
    q: u32,
    modulus: Vec<u64>,
    exp: Vec<u32>,
    log: Vec<u32>,
    zech: Vec<u32>,
    minus_one_log: u32,
}

impl fmt::Debug for GfContext {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GF({}^{})", self.p, self.k)
    }
}

impl GfContext {
    pub fn new(p: u64, k: usize) -> Result<Arc<Self>> {
        let q = p
            .checked_pow(k as u32)
            .filter(|&q| q <= MAX_FIELD_ORDER)
            .ok_or_else(|| {
                Error::SearchTooLarge(format!("field order {p}^{k} exceeds {MAX_FIELD_ORDER}"))
            })?;
        let modulus = find_irreducible(p, k)?;
        let modulus: Vec<u64> = modulus.coeffs().iter().map(|c| c.value()).collect();
        let order = q - 1;
        let to_digits = |mut v: u64| {
            let mut d = vec![0u64; k];
            for slot in d.iter_mut() {
                *slot = v % p;
                v /= p;
            }
            d
        };
        let from_digits = |d: &[u64]| d.iter().rev().fold(0u64, |acc, &c| acc * p + c);
        let pow_digits = |base: &[u64], mut e: u64| {
            let mut acc = to_digits(1);
            let mut b = base.to_vec();
            while e > 0 {
                if e & 1 == 1 {
                    acc = mulmod_digits(&acc, &b, &modulus, p);
                }
                b = mulmod_digits(&b, &b, &modulus, p);
                e >>= 1;
            }
            acc
        };
        let prime_factors: Vec<u64> = if order == 1 {
            Vec::new()
        } else {
            factorize(&Integer::from(order))?
                .primes()
                .iter()
                .map(|r| r.to_u64().unwrap())
                .collect()
        };
        let one = to_digits(1);
        let generator = (1..q)
            .map(to_digits)
            .find(|g| {
                prime_factors
                    .iter()
                    .all(|&r| pow_digits(g, order / r) != one)
            })
            .ok_or_else(|| Error::InternalInconsistency("no primitive element".into()))?;

        let mut exp = Vec::with_capacity(order as usize);
        let mut log = vec![NONE; q as usize];
        let mut cur = one.clone();
        for i in 0..order {
            let v = from_digits(&cur);
            if log[v as usize] != NONE {
                return Err(Error::InternalInconsistency(
                    "generator order too small".into(),
                ));
            }
            log[v as usize] = i as u32;
            exp.push(v as u32);
            cur = mulmod_digits(&cur, &generator, &modulus, p);
        }
        let zech = (0..order as usize)
            .map(|i| {
                let v = exp[i] as u64;
                let c0 = v % p;
                let w = v - c0 + (c0 + 1) % p;
                if w == 0 {
                    NONE
                } else {
                    log[w as usize]
                }
            })
            .collect();
        let minus_one_log = if p == 2 { 0 } else { (order / 2) as u32 };
        Ok(Arc::new(GfContext {
            p,
            k,
            q: q as u32,
            modulus,
            exp,
            log,
            zech,
            minus_one_log,
        }))
    }

    pub fn characteristic(&self) -> u64 {
        self.p
    }

    pub fn degree(&self) -> usize {
        self.k
    }

    pub fn order(&self) -> u32 {
        self.q
    }

    /// The modulus coefficients, low to high, monic.
    pub fn modulus(&self) -> &[u64] {
        &self.modulus
    }

    /// Discrete log with respect to the table generator; `None` for zero.
    #[inline]
    pub fn log(&self, a: u32) -> Option<u32> {
        (a != 0).then(|| self.log[a as usize])
    }

    #[inline]
    pub fn exp(&self, i: u64) -> u32 {
        self.exp[(i % (self.q as u64 - 1)) as usize]
    }

    /// The table generator.
    pub fn generator(&self) -> u32 {
        self.exp(1)
    }

    #[inline]
    pub fn mul(&self, a: u32, b: u32) -> u32 {
        if a == 0 || b == 0 {
            return 0;
        }
        let s = self.log[a as usize] as u64 + self.log[b as usize] as u64;
        self.exp(s)
    }

    #[inline]
    pub fn add(&self, a: u32, b: u32) -> u32 {
        if a == 0 {
            return b;
        }
        if b == 0 {
            return a;
        }
        let ord = self.q - 1;
        let (la, lb) = (self.log[a as usize], self.log[b as usize]);
        let d = if lb >= la { lb - la } else { lb + ord - la };
        let z = self.zech[d as usize];
        if z == NONE {
            0
        } else {
            self.exp(la as u64 + z as u64)
        }
    }

    #[inline]
    pub fn neg(&self, a: u32) -> u32 {
        if a == 0 || self.p == 2 {
            a
        } else {
            self.exp(self.log[a as usize] as u64 + self.minus_one_log as u64)
        }
    }

    #[inline]
    pub fn sub(&self, a: u32, b: u32) -> u32 {
        self.add(a, self.neg(b))
    }

    #[inline]
    pub fn inv(&self, a: u32) -> Option<u32> {
        (a != 0).then(|| {
            let ord = self.q - 1;
            self.exp(((ord - self.log[a as usize]) % ord) as u64)
        })
    }

    pub fn pow(&self, a: u32, e: u64) -> u32 {
        if e == 0 {
            return 1;
        }
        if a == 0 {
            return 0;
        }
        let ord = (self.q - 1) as u64;
        self.exp((self.log[a as usize] as u64 * (e % ord)) % ord)
    }

    /// The `p`-power Frobenius.
    pub fn frobenius(&self, a: u32) -> u32 {
        self.pow(a, self.p)
    }

    /// Image of an integer under `Z -> F_p -> F_q`.
    pub fn from_i64(&self, n: i64) -> u32 {
        (n as i128).rem_euclid(self.p as i128) as u32
    }

    /// Image of the residue of an arbitrary integer.
    pub fn from_integer(&self, n: &Integer) -> u32 {
        n.mod_floor(&Integer::from(self.p)).to_u32().unwrap()
    }

    /// Coordinates in the polynomial basis, low to high.
    pub fn digits(&self, mut a: u32) -> Vec<u64> {
        let mut d = vec![0u64; self.k];
        for slot in d.iter_mut() {
            *slot = a as u64 % self.p;
            a /= self.p as u32;
        }
        d
    }

    pub fn from_digits(&self, d: &[u64]) -> u32 {
        d.iter()
            .rev()
            .fold(0u64, |acc, &c| acc * self.p + c % self.p) as u32
    }

    /// Degree over `F_p` of the smallest subfield containing `a`.
    pub fn element_degree(&self, a: u32) -> usize {
        let mut b = self.frobenius(a);
        let mut d = 1;
        while b != a {
            b = self.frobenius(b);
            d += 1;
        }
        d
    }

    /// All `y` with `y^n = a`, sorted by encoding.
    pub fn nth_roots(&self, a: u32, n: u64) -> Vec<u32> {
        let Some(la) = self.log(a) else {
            return vec![0];
        };
        let ord = (self.q - 1) as u64;
        let g = num_integer::gcd(n, ord);
        if !(la as u64).is_multiple_of(g) {
            return Vec::new();
        }
        // Solve (n/g) j = la/g mod ord/g.
        let m = ord / g;
        let j0 = if m == 1 {
            0
        } else {
            let inv = Integer::from((n / g) % m)
                .extended_gcd(&Integer::from(m))
                .x
                .mod_floor(&Integer::from(m))
                .to_u64()
                .unwrap();
            ((la as u64 / g) % m) as u128 * inv as u128 % m as u128
        } as u64;
        let mut out: Vec<u32> = (0..g).map(|t| self.exp(j0 + t * m)).collect();
        out.sort_unstable();
        out
    }

    pub fn elem(self: &Arc<Self>, v: u32) -> Gf {
        debug_assert!(v < self.q);
        Gf {
            ctx: Arc::clone(self),
            v,
        }
    }

    /// Renders an element in the polynomial basis with generator `a`.
    pub fn format(&self, v: u32) -> String {
        if self.k == 1 {
            return v.to_string();
        }
        format_poly(&self.digits(v), "a", |c| *c == 0)
    }
}

/// Element of `F_{p^k}` bound to its context.
#[derive(Clone)]
pub struct Gf {
    ctx: Arc<GfContext>,
    v: u32,
}

impl Gf {
    pub fn context(&self) -> &Arc<GfContext> {
        &self.ctx
    }

    /// Integer encoding of the polynomial-basis coordinates.
    pub fn encoding(&self) -> u32 {
        self.v
    }

    pub fn digits(&self) -> Vec<u64> {
        self.ctx.digits(self.v)
    }

    pub fn frobenius(&self) -> Gf {
        self.with(self.ctx.frobenius(self.v))
    }

    pub fn element_degree(&self) -> usize {
        self.ctx.element_degree(self.v)
    }

    fn with(&self, v: u32) -> Gf {
        Gf {
            ctx: Arc::clone(&self.ctx),
            v,
        }
    }

    fn same_field(&self, other: &Gf) -> bool {
        Arc::ptr_eq(&self.ctx, &other.ctx)
            || (self.ctx.p == other.ctx.p && self.ctx.k == other.ctx.k)
    }
}

/// All solutions of `y^n = e` in the field of `e`.
pub fn nth_root(e: &Gf, n: u64) -> Result<Vec<Gf>> {
    if e.v == 0 {
        return Err(Error::DegenerateInput("root of zero".into()));
    }
    if n == 0 {
        return Err(Error::InvalidArgument("root index must be positive".into()));
    }
    Ok(e.ctx
        .nth_roots(e.v, n)
        .into_iter()
        .map(|v| e.with(v))
        .collect())
}

impl fmt::Debug for Gf {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.ctx.format(self.v))
    }
}

impl fmt::Display for Gf {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.ctx.format(self.v))
    }
}

impl PartialEq for Gf {
    fn eq(&self, other: &Gf) -> bool {
        self.v == other.v && self.same_field(other)
    }
}

impl Eq for Gf {}

impl Hash for Gf {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.v.hash(state);
    }
}

impl PartialOrd for Gf {
    fn partial_cmp(&self, other: &Gf) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Gf {
    fn cmp(&self, other: &Gf) -> Ordering {
        self.v.cmp(&other.v)
    }
}

macro_rules! gf_binop {
    ($tr:ident $m:ident) => {
        impl $tr for Gf {
            type Output = Gf;
            fn $m(self, rhs: Gf) -> Gf {
                debug_assert!(self.same_field(&rhs));
                let v = self.ctx.$m(self.v, rhs.v);
                Gf { ctx: self.ctx, v }
            }
        }
        impl<'a> $tr<&'a Gf> for Gf {
            type Output = Gf;
            fn $m(self, rhs: &'a Gf) -> Gf {
                debug_assert!(self.same_field(rhs));
                let v = self.ctx.$m(self.v, rhs.v);
                Gf { ctx: self.ctx, v }
            }
        }
    };
}
gf_binop!(Add add);
gf_binop!(Sub sub);
gf_binop!(Mul mul);

impl Neg for Gf {
    type Output = Gf;
    fn neg(self) -> Gf {
        let v = self.ctx.neg(self.v);
        Gf { ctx: self.ctx, v }
    }
}

impl Ring for Gf {
    fn zero_like(&self) -> Self {
        self.with(0)
    }
    fn one_like(&self) -> Self {
        self.with(1)
    }
    fn from_integer_like(&self, n: &Integer) -> Self {
        self.with(self.ctx.from_integer(n))
    }
    fn from_i64_like(&self, n: i64) -> Self {
        self.with(self.ctx.from_i64(n))
    }
    fn from_u64_like(&self, n: u64) -> Self {
        self.with((n % self.ctx.p) as u32)
    }
    fn is_zero(&self) -> bool {
        self.v == 0
    }
    fn inverse(&self) -> Option<Self> {
        self.ctx.inv(self.v).map(|v| self.with(v))
    }
    fn pow(&self, e: u64) -> Self {
        self.with(self.ctx.pow(self.v, e))
    }
}
