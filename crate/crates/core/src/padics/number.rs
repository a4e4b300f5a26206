use std::fmt;

use num_bigint::BigInt;
use num_rational::{BigRational, Ratio};

use super::qp::Qp;
use super::PadicError;

/// Valuations and precisions are rationals with denominator 1 or 2.
pub type Valuation = Ratio<i64>;

/// An element `re + im * pi` of Q_p or of Q_p(pi) with `pi^2 = -p`.
///
/// Unramified numbers have `im = None`. Valuations are handled internally in
/// half-units, where `v(pi) = 1`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PadicNumber {
    re: Qp,
    im: Option<Qp>,
}

fn half(x: i64) -> Valuation {
    Ratio::new(x, 2)
}

impl PadicNumber {
    pub fn from_qp(x: Qp) -> Self {
        PadicNumber { re: x, im: None }
    }

    pub fn ramified(re: Qp, im: Qp) -> Self {
        PadicNumber { re, im: Some(im) }
    }

    pub fn zero(p: u64, prec: i64) -> Self {
        Self::from_qp(Qp::zero(p, prec))
    }

    pub fn one(p: u64, prec: i64) -> Self {
        Self::from_qp(Qp::one(p, prec))
    }

    pub fn from_int(p: u64, n: &BigInt, prec: i64) -> Self {
        Self::from_qp(Qp::from_int(p, n, prec))
    }

    pub fn from_i64(p: u64, n: i64, prec: i64) -> Self {
        Self::from_qp(Qp::from_i64(p, n, prec))
    }

    pub fn from_rational(p: u64, r: &BigRational, prec: i64) -> Self {
        Self::from_qp(Qp::from_rational(p, r, prec))
    }

    /// The uniformizer `pi` with `pi^2 = -p`, exact to precision `prec`.
    pub fn uniformizer(p: u64, prec: i64) -> Self {
        Self::ramified(Qp::zero(p, prec), Qp::one(p, prec))
    }

    pub fn prime(&self) -> u64 {
        self.re.prime()
    }

    pub fn ramification(&self) -> u8 {
        if self.im.is_some() {
            2
        } else {
            1
        }
    }

    pub fn real_part(&self) -> &Qp {
        &self.re
    }

    pub fn pi_part(&self) -> Option<&Qp> {
        self.im.as_ref()
    }

    /// Valuation in half-units.
    pub(crate) fn val2(&self) -> i64 {
        let r = 2 * self.re.valuation();
        match &self.im {
            Some(b) => r.min(2 * b.valuation() + 1),
            None => r,
        }
    }

    /// Precision in half-units.
    pub(crate) fn prec2(&self) -> i64 {
        let r = 2 * self.re.precision();
        match &self.im {
            Some(b) => r.min(2 * b.precision() + 1),
            None => r,
        }
    }

    /// Valuation; for a tracked zero this equals the precision.
    pub fn valuation(&self) -> Valuation {
        half(self.val2())
    }

    pub fn precision(&self) -> Valuation {
        half(self.prec2())
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.as_ref().map_or(true, Qp::is_zero)
    }

    /// True when `v < precision`, i.e. the known digits certify nonvanishing.
    pub fn is_provably_nonzero(&self) -> bool {
        !self.is_zero()
    }

    fn promote(&self) -> (Qp, Qp) {
        let im = self
            .im
            .clone()
            .unwrap_or_else(|| Qp::zero(self.prime(), self.re.precision() + 1));
        (self.re.clone(), im)
    }

    fn tidy(re: Qp, im: Option<Qp>) -> Self {
        PadicNumber { re, im }
    }

    pub fn add(&self, other: &Self) -> Self {
        match (&self.im, &other.im) {
            (None, None) => Self::from_qp(self.re.add(&other.re)),
            _ => {
                let (a, b) = self.promote();
                let (c, d) = other.promote();
                Self::tidy(a.add(&c), Some(b.add(&d)))
            }
        }
    }

    pub fn neg(&self) -> Self {
        Self::tidy(self.re.neg(), self.im.as_ref().map(Qp::neg))
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Self) -> Self {
        match (&self.im, &other.im) {
            (None, None) => Self::from_qp(self.re.mul(&other.re)),
            (None, Some(d)) => Self::tidy(self.re.mul(&other.re), Some(self.re.mul(d))),
            (Some(b), None) => Self::tidy(self.re.mul(&other.re), Some(b.mul(&other.re))),
            (Some(b), Some(d)) => {
                // (a + b pi)(c + d pi) = ac - p bd + (ad + bc) pi
                let a = &self.re;
                let c = &other.re;
                let re = a.mul(c).sub(&b.mul(d).shift(1));
                let im = a.mul(d).add(&b.mul(c));
                Self::tidy(re, Some(im))
            }
        }
    }

    pub fn mul_int(&self, n: &BigInt) -> Self {
        Self::tidy(self.re.mul_int(n), self.im.as_ref().map(|b| b.mul_int(n)))
    }

    pub fn scale(&self, x: &Qp) -> Self {
        Self::tidy(self.re.mul(x), self.im.as_ref().map(|b| b.mul(x)))
    }

    /// Norm down to Q_p: `a^2 + p b^2`.
    fn norm(&self) -> Qp {
        match &self.im {
            None => self.re.mul(&self.re),
            Some(b) => self.re.mul(&self.re).add(&b.mul(b).shift(1)),
        }
    }

    pub fn inverse(&self) -> Result<Self, PadicError> {
        if self.is_zero() {
            return Err(PadicError::DivisionByZero);
        }
        match &self.im {
            None => Ok(Self::from_qp(self.re.inverse()?)),
            Some(b) => {
                let n_inv = self.norm().inverse()?;
                Ok(Self::tidy(self.re.mul(&n_inv), Some(b.neg().mul(&n_inv))))
            }
        }
    }

    pub fn div(&self, other: &Self) -> Result<Self, PadicError> {
        Ok(self.mul(&other.inverse()?))
    }

    pub fn pow(&self, e: u64) -> Self {
        let mut result: Option<Self> = None;
        let mut base = self.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                result = Some(match result {
                    None => base.clone(),
                    Some(r) => r.mul(&base),
                });
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        result.unwrap_or_else(|| Self::one(self.prime(), self.re.precision()))
    }

    /// Lowers precision (in the same units as [`PadicNumber::precision`]).
    pub fn truncate(&self, prec: Valuation) -> Self {
        let p2 = (prec * 2).floor().to_integer();
        let re_prec = (p2 + 1).div_euclid(2);
        let im_prec = p2.div_euclid(2);
        Self::tidy(self.re.truncate(re_prec), self.im.as_ref().map(|b| b.truncate(im_prec)))
    }

    pub fn agrees_with(&self, other: &Self) -> bool {
        self.sub(other).is_zero()
    }

    /// Valuation of `self - other`, capped by the shared precision.
    pub fn distance_valuation(&self, other: &Self) -> Valuation {
        self.sub(other).valuation()
    }
}

impl fmt::Display for PadicNumber {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.im {
            None => write!(f, "{}", self.re),
            Some(b) => write!(f, "({}) + ({})*pi", self.re, b),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniformizer_squares_to_minus_p() {
        let pi = PadicNumber::uniformizer(5, 10);
        let sq = pi.mul(&pi);
        assert!(sq.agrees_with(&PadicNumber::from_i64(5, -5, 10)));
        assert_eq!(pi.valuation(), Ratio::new(1, 2));
    }

    #[test]
    fn ramified_inverse() {
        let x = PadicNumber::ramified(Qp::from_i64(7, 3, 12), Qp::from_i64(7, 2, 12));
        let y = x.inverse().unwrap();
        assert!(x.mul(&y).agrees_with(&PadicNumber::one(7, 10)));
        let pi = PadicNumber::uniformizer(7, 12);
        let pinv = pi.inverse().unwrap();
        assert_eq!(pinv.valuation(), Ratio::new(-1, 2));
        assert!(pi.mul(&pinv).agrees_with(&PadicNumber::one(7, 10)));
    }

    #[test]
    fn truncate_half_units() {
        let x = PadicNumber::ramified(Qp::from_i64(5, 1, 10), Qp::from_i64(5, 1, 10));
        let t = x.truncate(Ratio::new(7, 2));
        assert_eq!(t.precision(), Ratio::new(7, 2));
    }
}
