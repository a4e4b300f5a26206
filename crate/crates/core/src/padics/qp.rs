//! Capped absolute-precision elements of Q_p.
//!
//! A value is stored as `unit * p^val`, known modulo `p^prec`. The unit is
//! reduced into `[0, p^(prec - val))` and is prime to `p`. Zero is tracked:
//! it carries `unit = 0` and `val = prec`, meaning "congruent to 0 mod p^prec".

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};

use super::PadicError;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Qp {
    p: u64,
    val: i64,
    unit: BigInt,
    prec: i64,
}

pub(crate) fn pow_p(p: u64, e: i64) -> BigInt {
    debug_assert!(e >= 0);
    num_traits::pow(BigInt::from(p), e as usize)
}

/// Splits `n != 0` into `(v_p(n), n / p^v)`.
pub(crate) fn split_p(p: u64, n: &BigInt) -> (i64, BigInt) {
    let bp = BigInt::from(p);
    let mut v = 0;
    let mut m = n.clone();
    loop {
        let (q, r) = m.div_rem(&bp);
        if !r.is_zero() {
            return (v, m);
        }
        m = q;
        v += 1;
    }
}

fn inv_mod(a: &BigInt, m: &BigInt) -> BigInt {
    let e = a.extended_gcd(m);
    debug_assert!(e.gcd.is_one());
    e.x.mod_floor(m)
}

impl Qp {
    fn normalize(p: u64, val: i64, raw: BigInt, prec: i64) -> Qp {
        if val >= prec || raw.is_zero() {
            return Qp::zero(p, prec);
        }
        let (v, u) = split_p(p, &raw);
        let val = val + v;
        if val >= prec {
            return Qp::zero(p, prec);
        }
        let unit = u.mod_floor(&pow_p(p, prec - val));
        Qp { p, val, unit, prec }
    }

    /// The tracked zero, known to be `0 mod p^prec`.
    pub fn zero(p: u64, prec: i64) -> Qp {
        Qp { p, val: prec, unit: BigInt::zero(), prec }
    }

    pub fn one(p: u64, prec: i64) -> Qp {
        Qp::from_int(p, &BigInt::one(), prec)
    }

    pub fn from_int(p: u64, n: &BigInt, prec: i64) -> Qp {
        Qp::normalize(p, 0, n.clone(), prec)
    }

    pub fn from_i64(p: u64, n: i64, prec: i64) -> Qp {
        Qp::from_int(p, &BigInt::from(n), prec)
    }

    /// Embeds an exact rational, known modulo `p^prec`.
    pub fn from_rational(p: u64, r: &BigRational, prec: i64) -> Qp {
        if r.is_zero() {
            return Qp::zero(p, prec);
        }
        let (vn, un) = split_p(p, r.numer());
        let (vd, ud) = split_p(p, r.denom());
        let val = vn - vd;
        if val >= prec {
            return Qp::zero(p, prec);
        }
        let modulus = pow_p(p, prec - val);
        let unit = (un * inv_mod(&ud.mod_floor(&modulus), &modulus)).mod_floor(&modulus);
        Qp { p, val, unit, prec }
    }

    pub fn prime(&self) -> u64 {
        self.p
    }

    /// Absolute precision: the value is known modulo `p^prec`.
    pub fn precision(&self) -> i64 {
        self.prec
    }

    /// Valuation; for the tracked zero this is its precision.
    pub fn valuation(&self) -> i64 {
        self.val
    }

    pub fn unit(&self) -> &BigInt {
        &self.unit
    }

    pub fn is_zero(&self) -> bool {
        self.unit.is_zero()
    }

    pub fn is_unit(&self) -> bool {
        !self.is_zero() && self.val == 0
    }

    /// Base-p digits of the unit part, least significant first.
    pub fn unit_digits(&self) -> Vec<u64> {
        let bp = BigInt::from(self.p);
        let mut digits = Vec::new();
        let mut m = self.unit.clone();
        for _ in 0..(self.prec - self.val) {
            let (q, r) = m.div_rem(&bp);
            digits.push(r.to_u64_digits().1.first().copied().unwrap_or(0));
            m = q;
        }
        digits
    }

    /// Canonical integer representative in `[0, p^prec)` for integral values.
    pub fn to_integer(&self) -> Option<BigInt> {
        if self.val < 0 {
            return None;
        }
        if self.is_zero() {
            return Some(BigInt::zero());
        }
        Some(&self.unit * pow_p(self.p, self.val))
    }

    /// Exact rational `unit * p^val` (the canonical representative).
    pub fn to_rational(&self) -> BigRational {
        if self.val >= 0 {
            BigRational::from_integer(&self.unit * pow_p(self.p, self.val))
        } else {
            BigRational::new(self.unit.clone(), pow_p(self.p, -self.val))
        }
    }

    /// Reduces the precision to `prec` (no-op if already lower).
    pub fn truncate(&self, prec: i64) -> Qp {
        if prec >= self.prec {
            return self.clone();
        }
        Qp::normalize(self.p, self.val, self.unit.clone(), prec)
    }

    /// Shifts precision up, treating the current representative as exact.
    pub fn lift_exact(&self, prec: i64) -> Qp {
        Qp::normalize(self.p, self.val, self.unit.clone(), prec)
    }

    fn check(&self, other: &Qp) {
        assert_eq!(self.p, other.p, "mixing different primes");
    }

    pub fn add(&self, other: &Qp) -> Qp {
        self.check(other);
        let prec = self.prec.min(other.prec);
        let v = self.val.min(other.val);
        if v >= prec {
            return Qp::zero(self.p, prec);
        }
        let a = &self.unit * pow_p(self.p, self.val - v);
        let b = &other.unit * pow_p(self.p, other.val - v);
        Qp::normalize(self.p, v, a + b, prec)
    }

    pub fn neg(&self) -> Qp {
        Qp::normalize(self.p, self.val, -&self.unit, self.prec)
    }

    pub fn sub(&self, other: &Qp) -> Qp {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Qp) -> Qp {
        self.check(other);
        let prec = (self.val + other.prec).min(other.val + self.prec);
        Qp::normalize(self.p, self.val + other.val, &self.unit * &other.unit, prec)
    }

    pub fn mul_int(&self, n: &BigInt) -> Qp {
        if n.is_zero() {
            return Qp::zero(self.p, self.prec);
        }
        let (v, _) = split_p(self.p, n);
        Qp::normalize(self.p, self.val, &self.unit * n, self.prec + v)
    }

    /// Multiplication by `p^e`.
    pub fn shift(&self, e: i64) -> Qp {
        Qp { p: self.p, val: self.val + e, unit: self.unit.clone(), prec: self.prec + e }
    }

    pub fn inverse(&self) -> Result<Qp, PadicError> {
        if self.is_zero() {
            return Err(PadicError::DivisionByZero);
        }
        let rel = self.prec - self.val;
        let modulus = pow_p(self.p, rel);
        let unit = inv_mod(&self.unit, &modulus);
        Ok(Qp { p: self.p, val: -self.val, unit, prec: rel - self.val })
    }

    pub fn div(&self, other: &Qp) -> Result<Qp, PadicError> {
        Ok(self.mul(&other.inverse()?))
    }

    pub fn pow(&self, e: u64) -> Qp {
        let mut result = Qp::one(self.p, self.prec.max(1) + self.val.abs() * e as i64 + 1);
        let mut base = self.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                result = result.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        result
    }

    /// Congruence at the common precision.
    pub fn agrees_with(&self, other: &Qp) -> bool {
        self.sub(other).is_zero()
    }

    /// True when the known digits certify a nonzero value.
    pub fn is_provably_nonzero(&self) -> bool {
        !self.is_zero()
    }
}

impl fmt::Display for Qp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "O({}^{})", self.p, self.prec);
        }
        write!(f, "{}*{}^{} + O({}^{})", self.unit, self.p, self.val, self.p, self.prec)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, prec: i64) -> Qp {
        Qp::from_i64(5, n, prec)
    }

    #[test]
    fn tracked_zero() {
        let z = q(25, 2);
        assert!(z.is_zero());
        assert_eq!(z.precision(), 2);
        assert_eq!(z.valuation(), 2);
    }

    #[test]
    fn precision_propagation_mul() {
        // 5 * (unit mod 5^3) is known mod 5^4
        let a = q(5, 10);
        let b = q(7, 3);
        assert_eq!(a.mul(&b).precision(), 4);
    }

    #[test]
    fn rational_embedding_and_inverse() {
        let r = BigRational::new(BigInt::from(3), BigInt::from(10));
        let x = Qp::from_rational(5, &r, 6);
        assert_eq!(x.valuation(), -1);
        let back = x.mul(&q(10, 7));
        assert!(back.agrees_with(&q(3, 6)));
        let inv = q(3, 6).inverse().unwrap();
        assert!(inv.mul(&q(3, 6)).agrees_with(&q(1, 6)));
        assert!(q(0, 4).inverse().is_err());
    }

    #[test]
    fn truncation_commutes_with_addition() {
        let a = q(1234567, 12);
        let b = q(-98765, 12);
        assert_eq!(a.add(&b).truncate(5), a.truncate(5).add(&b.truncate(5)));
    }
}
