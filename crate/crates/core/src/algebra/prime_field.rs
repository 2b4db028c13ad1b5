use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_integer::Integer as _;
use num_traits::ToPrimitive;

use super::{pow_mod_u64, Integer, Ring};
use crate::error::{Error, Result};

/// Element of the prime field `F_p`, stored as a residue in `[0, p)`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, PartialOrd, Ord)]
pub struct Fp {
    p: u64,
    v: u64,
}

impl Fp {
    /// Builds a residue, checking that `p` is prime.
    pub fn new(v: i64, p: u64) -> Result<Self> {
        if !super::is_prime_u64(p) {
            return Err(Error::InvalidArgument(format!("{p} is not prime")));
        }
        Ok(Self::new_unchecked(v, p))
    }

    pub(crate) fn new_unchecked(v: i64, p: u64) -> Self {
        let v = (v as i128).rem_euclid(p as i128) as u64;
        Fp { p, v }
    }

    pub(crate) fn from_residue(v: u64, p: u64) -> Self {
        Fp { p, v: v % p }
    }

    pub fn modulus(&self) -> u64 {
        self.p
    }

    pub fn value(&self) -> u64 {
        self.v
    }
}

impl fmt::Display for Fp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.v)
    }
}

impl Add for Fp {
    type Output = Fp;
    fn add(self, rhs: Fp) -> Fp {
        debug_assert_eq!(self.p, rhs.p);
        let s = self.v as u128 + rhs.v as u128;
        Fp {
            p: self.p,
            v: (s % self.p as u128) as u64,
        }
    }
}

impl Sub for Fp {
    type Output = Fp;
    fn sub(self, rhs: Fp) -> Fp {
        debug_assert_eq!(self.p, rhs.p);
        let v = if self.v >= rhs.v {
            self.v - rhs.v
        } else {
            self.p - (rhs.v - self.v)
        };
        Fp { p: self.p, v }
    }
}

impl Mul for Fp {
    type Output = Fp;
    fn mul(self, rhs: Fp) -> Fp {
        debug_assert_eq!(self.p, rhs.p);
        Fp {
            p: self.p,
            v: ((self.v as u128 * rhs.v as u128) % self.p as u128) as u64,
        }
    }
}

impl Neg for Fp {
    type Output = Fp;
    fn neg(self) -> Fp {
        Fp {
            p: self.p,
            v: if self.v == 0 { 0 } else { self.p - self.v },
        }
    }
}

impl<'a> Add<&'a Fp> for Fp {
    type Output = Fp;
    fn add(self, rhs: &'a Fp) -> Fp {
        self + *rhs
    }
}

impl<'a> Sub<&'a Fp> for Fp {
    type Output = Fp;
    fn sub(self, rhs: &'a Fp) -> Fp {
        self - *rhs
    }
}

impl<'a> Mul<&'a Fp> for Fp {
    type Output = Fp;
    fn mul(self, rhs: &'a Fp) -> Fp {
        self * *rhs
    }
}

impl Ring for Fp {
    fn zero_like(&self) -> Self {
        Fp { p: self.p, v: 0 }
    }
    fn one_like(&self) -> Self {
        Fp {
            p: self.p,
            v: 1 % self.p,
        }
    }
    fn from_integer_like(&self, n: &Integer) -> Self {
        let r = n.mod_floor(&Integer::from(self.p));
        Fp {
            p: self.p,
            v: r.to_u64().expect("residue fits in u64"),
        }
    }
    fn from_i64_like(&self, n: i64) -> Self {
        let r = (n as i128).rem_euclid(self.p as i128) as u64;
        Fp { p: self.p, v: r }
    }
    fn from_u64_like(&self, n: u64) -> Self {
        Fp {
            p: self.p,
            v: n % self.p,
        }
    }
    fn is_zero(&self) -> bool {
        self.v == 0
    }
    fn inverse(&self) -> Option<Self> {
        if self.v == 0 {
            None
        } else {
            Some(Fp {
                p: self.p,
                v: pow_mod_u64(self.v, self.p - 2, self.p),
            })
        }
    }
    fn pow(&self, e: u64) -> Self {
        Fp {
            p: self.p,
            v: pow_mod_u64(self.v, e, self.p),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_composite_modulus() {
        assert!(Fp::new(1, 15).is_err());
        assert!(Fp::new(3, 13).is_ok());
    }

    #[test]
    fn negative_inputs_reduce() {
        let x = Fp::new(-3, 11).unwrap();
        assert_eq!(x.value(), 8);
        assert_eq!((x + Fp::new(3, 11).unwrap()).value(), 0);
    }

    #[test]
    fn inverse_of_every_unit() {
        let p = 31;
        for v in 1..p {
            let x = Fp::from_residue(v, p);
            assert!((x * x.inverse().unwrap()).is_one());
        }
        assert!(Fp::from_residue(0, p).inverse().is_none());
    }
}
