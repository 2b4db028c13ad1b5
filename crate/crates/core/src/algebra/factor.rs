//! Primality testing and integer factorization: trial division by small
//! primes, then Brent's variant of Pollard rho on the cofactor.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::Sign;
use num_integer::Integer as _;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::{pow_mod_u64, Integer};
use crate::error::{Error, Result};

const TRIAL_BOUND: u64 = 10_000;
const MR_BASES_U64: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];

fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

/// Deterministic Miller-Rabin for the full `u64` range.
pub fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for &p in &MR_BASES_U64 {
        if n.is_multiple_of(p) {
            return n == p;
        }
    }
    let s = (n - 1).trailing_zeros();
    let d = (n - 1) >> s;
    'witness: for &a in &MR_BASES_U64 {
        let mut x = pow_mod_u64(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Primality of an arbitrary integer: deterministic below `2^64`, a
/// Miller-Rabin test with fixed bases above.
pub fn is_prime(n: &Integer) -> bool {
    if n.sign() != Sign::Plus {
        return false;
    }
    if let Some(small) = n.to_u64() {
        return is_prime_u64(small);
    }
    let one = Integer::one();
    let nm1 = n - &one;
    let mut d = nm1.clone();
    let mut s = 0u32;
    while d.is_even() {
        d >>= 1;
        s += 1;
    }
    'witness: for &a in MR_BASES_U64
        .iter()
        .chain([41u64, 43, 47, 53, 59, 61, 67, 71].iter())
    {
        let mut x = Integer::from(a).modpow(&d, n);
        if x.is_one() || x == nm1 {
            continue;
        }
        for _ in 1..s {
            x = (&x * &x) % n;
            if x == nm1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Prime factorization of `|m|` as an ordered map prime -> exponent.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Factorization {
    pub factors: BTreeMap<Integer, u32>,
}

impl Factorization {
    pub fn primes(&self) -> Vec<Integer> {
        self.factors.keys().cloned().collect()
    }

    pub fn exponent(&self, p: u64) -> u32 {
        self.factors.get(&Integer::from(p)).copied().unwrap_or(0)
    }

    pub fn product(&self) -> Integer {
        self.factors.iter().fold(Integer::one(), |acc, (p, &e)| {
            acc * num_traits::pow(p.clone(), e as usize)
        })
    }

    fn insert(&mut self, p: Integer, e: u32) {
        *self.factors.entry(p).or_insert(0) += e;
    }
}

impl fmt::Display for Factorization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.factors.is_empty() {
            return write!(f, "1");
        }
        let parts: Vec<String> = self
            .factors
            .iter()
            .map(|(p, &e)| {
                if e == 1 {
                    p.to_string()
                } else {
                    format!("{p}^{e}")
                }
            })
            .collect();
        write!(f, "{}", parts.join(" * "))
    }
}

/// Factors `|m|` into primes.
pub fn factorize(m: &Integer) -> Result<Factorization> {
    if m.is_zero() {
        return Err(Error::DegenerateInput("cannot factor zero".into()));
    }
    let mut out = Factorization::default();
    let mut rest = m.abs();
    let mut d = 2u64;
    while d <= TRIAL_BOUND {
        let dd = Integer::from(d);
        if &dd * &dd > rest {
            break;
        }
        let mut e = 0;
        while (&rest % &dd).is_zero() {
            rest /= &dd;
            e += 1;
        }
        if e > 0 {
            out.insert(dd, e);
        }
        d += if d == 2 { 1 } else { 2 };
    }
    if !rest.is_one() {
        let mut stack = vec![rest];
        while let Some(n) = stack.pop() {
            if n.is_one() {
                continue;
            }
            if is_prime(&n) {
                out.insert(n, 1);
                continue;
            }
            if let Some((root, k)) = perfect_power(&n) {
                for _ in 0..k {
                    stack.push(root.clone());
                }
                continue;
            }
            let f = find_factor(&n);
            let g = &n / &f;
            stack.push(f);
            stack.push(g);
        }
    }
    Ok(out)
}

/// `Some((m, k))` with `m^k = n` for the least `k >= 2`; `None` when `n` is
/// not a perfect power.
fn perfect_power(n: &Integer) -> Option<(Integer, u32)> {
    let bits = n.bits() as u32;
    (2..=bits).find_map(|k| {
        let m = n.nth_root(k);
        (num_traits::pow(m.clone(), k as usize) == *n).then_some((m, k))
    })
}

fn find_factor(n: &Integer) -> Integer {
    if let Some(small) = n.to_u64() {
        return Integer::from(find_factor_u64(small));
    }
    if n.is_even() {
        return Integer::from(2);
    }
    let mut c = Integer::one();
    loop {
        if let Some(f) = brent_big(n, &c) {
            return f;
        }
        c += 1;
    }
}

fn find_factor_u64(n: u64) -> u64 {
    if n.is_multiple_of(2) {
        return 2;
    }
    let mut c = 1;
    loop {
        if let Some(f) = brent_u64(n, c) {
            return f;
        }
        c += 1;
    }
}

fn brent_u64(n: u64, c: u64) -> Option<u64> {
    let f = |x: u64| (mul_mod(x, x, n) + c) % n;
    let (mut y, mut r, mut q, m) = (2u64, 1u64, 1u64, 128u64);
    let mut g = 1;
    let mut x = y;
    let mut ys = y;
    while g == 1 {
        x = y;
        for _ in 0..r {
            y = f(y);
        }
        let mut k = 0;
        while k < r && g == 1 {
            ys = y;
            for _ in 0..m.min(r - k) {
                y = f(y);
                q = mul_mod(q, x.abs_diff(y), n);
            }
            g = num_integer::gcd(q, n);
            k += m;
        }
        r *= 2;
    }
    if g == n {
        loop {
            ys = f(ys);
            g = num_integer::gcd(x.abs_diff(ys), n);
            if g > 1 {
                break;
            }
        }
    }
    (g != n).then_some(g)
}

fn brent_big(n: &Integer, c: &Integer) -> Option<Integer> {
    let f = |x: &Integer| (x * x + c) % n;
    let m = 128u64;
    let mut y = Integer::from(2);
    let mut r = 1u64;
    let mut q = Integer::one();
    let mut g = Integer::one();
    let mut x = y.clone();
    let mut ys = y.clone();
    while g.is_one() {
        x = y.clone();
        for _ in 0..r {
            y = f(&y);
        }
        let mut k = 0;
        while k < r && g.is_one() {
            ys = y.clone();
            for _ in 0..m.min(r - k) {
                y = f(&y);
                q = (q * (&x - &y).abs()) % n;
            }
            g = q.gcd(n);
            k += m;
        }
        r *= 2;
    }
    if &g == n {
        loop {
            ys = f(&ys);
            g = (&x - &ys).abs().gcd(n);
            if !g.is_one() {
                break;
            }
        }
    }
    (&g != n).then_some(g)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute_is_prime(n: u64) -> bool {
        n >= 2
            && (2..)
                .take_while(|d| d * d <= n)
                .all(|d| !n.is_multiple_of(d))
    }

    #[test]
    fn primality_matches_trial_division() {
        for n in 0..5000u64 {
            assert_eq!(is_prime_u64(n), brute_is_prime(n), "n = {n}");
        }
    }

    #[test]
    fn strong_pseudoprimes_rejected() {
        // Strong pseudoprimes to several small bases.
        for n in [
            2047u64,
            1373653,
            25326001,
            3215031751,
            2152302898747,
            3474749660383,
        ] {
            assert!(!is_prime_u64(n), "{n}");
        }
        assert!(is_prime_u64(18446744073709551557));
    }

    #[test]
    fn factor_examples() {
        let f = factorize(&Integer::from(720)).unwrap();
        assert_eq!(f.to_string(), "2^4 * 3^2 * 5");
        assert!(factorize(&Integer::one()).unwrap().factors.is_empty());
        assert!(matches!(
            factorize(&Integer::zero()),
            Err(Error::DegenerateInput(_))
        ));
        let f = factorize(&Integer::from(-84)).unwrap();
        assert_eq!(f.product(), Integer::from(84));
    }

    #[test]
    fn factors_products_of_large_primes() {
        let p = Integer::from(1_000_000_007u64);
        let q = Integer::from(998_244_353u64);
        let r = Integer::from(18446744073709551557u64);
        let n = &p * &q * &r * &r;
        let f = factorize(&n).unwrap();
        assert_eq!(f.factors.get(&r), Some(&2));
        assert_eq!(f.factors.get(&p), Some(&1));
        assert_eq!(f.product(), n);
    }
}
