//! Exact arithmetic kernels: integers and rationals, prime and extension
//! finite fields, truncated local rings, dense univariate polynomials,
//! small dense linear algebra and integer factorization.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_traits::{One, Signed, Zero};

pub mod factor;
pub mod galois;
pub mod linalg;
pub mod local;
pub mod poly;
pub mod prime_field;
pub mod quotient;

pub use factor::{factorize, is_prime, is_prime_u64, Factorization};
pub use galois::{find_irreducible, nth_root, Gf, GfContext};
pub use local::{LocalContext, LocalElem};
pub use poly::{discriminant, resultant, Polynomial};
pub use prime_field::Fp;
pub use quotient::{QuotientContext, QuotientElem};

/// Arbitrary-precision signed integer.
pub type Integer = num_bigint::BigInt;
/// Exact rational number in lowest terms with positive denominator.
pub type Rational = num_rational::BigRational;

/// A commutative ring with identity whose elements carry their own context
/// (modulus, precision, ...). Constants are produced "like" an existing
/// element so that context-bearing types need no global state.
pub trait Ring:
    Clone
    + PartialEq
    + fmt::Debug
    + fmt::Display
    + Send
    + Sync
    + Sized
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
    + for<'a> Add<&'a Self, Output = Self>
    + for<'a> Sub<&'a Self, Output = Self>
    + for<'a> Mul<&'a Self, Output = Self>
{
    fn zero_like(&self) -> Self;
    fn one_like(&self) -> Self;
    fn from_integer_like(&self, n: &Integer) -> Self;
    fn is_zero(&self) -> bool;
    /// Multiplicative inverse, `None` when the element is not a unit.
    fn inverse(&self) -> Option<Self>;

    fn from_i64_like(&self, n: i64) -> Self {
        self.from_integer_like(&Integer::from(n))
    }

    fn from_u64_like(&self, n: u64) -> Self {
        self.from_integer_like(&Integer::from(n))
    }

    fn is_one(&self) -> bool {
        *self == self.one_like()
    }

    fn is_unit(&self) -> bool {
        self.inverse().is_some()
    }

    fn pow(&self, mut e: u64) -> Self {
        let mut base = self.clone();
        let mut acc = self.one_like();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * &base;
            }
            e >>= 1;
            if e > 0 {
                base = base.clone() * &base;
            }
        }
        acc
    }
}

impl Ring for Rational {
    fn zero_like(&self) -> Self {
        Rational::zero()
    }
    fn one_like(&self) -> Self {
        Rational::one()
    }
    fn from_integer_like(&self, n: &Integer) -> Self {
        Rational::from_integer(n.clone())
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn inverse(&self) -> Option<Self> {
        if Zero::is_zero(self) {
            None
        } else {
            Some(self.recip())
        }
    }
}

impl Ring for Integer {
    fn zero_like(&self) -> Self {
        Integer::zero()
    }
    fn one_like(&self) -> Self {
        Integer::one()
    }
    fn from_integer_like(&self, n: &Integer) -> Self {
        n.clone()
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn inverse(&self) -> Option<Self> {
        if One::is_one(&self.abs()) {
            Some(self.clone())
        } else {
            None
        }
    }
}

/// Binomial coefficient `C(m, k)`, zero for `k > m`.
pub fn binomial(m: u64, k: u64) -> Integer {
    if k > m {
        return Integer::zero();
    }
    let k = k.min(m - k);
    let mut acc = Integer::one();
    for i in 0..k {
        acc = acc * Integer::from(m - i) / Integer::from(i + 1);
    }
    acc
}

/// `n!` as an exact integer.
pub fn factorial(n: u64) -> Integer {
    (1..=n).fold(Integer::one(), |acc, i| acc * Integer::from(i))
}

/// p-adic valuation of a nonzero integer; `None` for zero.
pub fn valuation_p(n: &Integer, p: u64) -> Option<u32> {
    if Zero::is_zero(n) {
        return None;
    }
    let p = Integer::from(p);
    let mut v = 0;
    let mut m = n.clone();
    while Zero::is_zero(&(&m % &p)) {
        m /= &p;
        v += 1;
    }
    Some(v)
}

/// Modular exponentiation on machine words.
pub fn pow_mod_u64(base: u64, mut e: u64, m: u64) -> u64 {
    if m == 1 {
        return 0;
    }
    let mut acc: u128 = 1;
    let m128 = m as u128;
    let mut b = (base % m) as u128;
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * b % m128;
        }
        b = b * b % m128;
        e >>= 1;
    }
    acc as u64
}

/// Multiplicative order of `a` modulo `n`; `None` when `gcd(a, n) != 1`.
pub fn multiplicative_order(a: u64, n: u64) -> Option<u64> {
    if n == 1 {
        return Some(1);
    }
    if num_integer::gcd(a % n, n) != 1 {
        return None;
    }
    let mut x = a % n;
    let mut k = 1;
    while x != 1 {
        x = ((x as u128 * a as u128) % n as u128) as u64;
        k += 1;
    }
    Some(k)
}

/// Renders a sequence of coefficients (low to high) as `c_d X^d + ... + c_0`.
pub(crate) fn format_poly<T: fmt::Display>(
    coeffs: &[T],
    var: &str,
    is_zero: impl Fn(&T) -> bool,
) -> String {
    let mut out = String::new();
    for (i, c) in coeffs.iter().enumerate().rev() {
        if is_zero(c) {
            continue;
        }
        let mut s = c.to_string();
        let neg = s.starts_with('-');
        if neg {
            s.remove(0);
        }
        if s.contains(['+', '-', ' ']) {
            s = format!("({s})");
        }
        if out.is_empty() {
            if neg {
                out.push('-');
            }
        } else {
            out.push_str(if neg { " - " } else { " + " });
        }
        match i {
            0 => out.push_str(&s),
            _ => {
                if s != "1" {
                    out.push_str(&s);
                }
                out.push_str(var);
                if i > 1 {
                    out.push('^');
                    out.push_str(&i.to_string());
                }
            }
        }
    }
    if out.is_empty() {
        out.push('0');
    }
    out
}
