use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use super::number::PadicNumber;
use super::PadicError;

/// The quadratic ring `Q[X]/(X^2 - a_p X + p^(k-1))` a Hecke root lives in.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct HeckeContext {
    pub ap: i64,
    pub weight: u32,
    pub p: u64,
}

impl HeckeContext {
    pub fn new(ap: i64, weight: u32, p: u64) -> Self {
        HeckeContext { ap, weight, p }
    }

    /// `p^(k-1)`, the constant term of the Hecke polynomial.
    pub fn norm(&self) -> BigInt {
        num_traits::pow(BigInt::from(self.p), (self.weight - 1) as usize)
    }
}

/// `a + b * alpha` with exact rational coordinates.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct AlphaElement {
    pub a: BigRational,
    pub b: BigRational,
}

impl AlphaElement {
    pub fn zero() -> Self {
        AlphaElement { a: BigRational::zero(), b: BigRational::zero() }
    }

    pub fn one() -> Self {
        Self::rational(BigRational::one())
    }

    pub fn alpha() -> Self {
        AlphaElement { a: BigRational::zero(), b: BigRational::one() }
    }

    pub fn rational(a: BigRational) -> Self {
        AlphaElement { a, b: BigRational::zero() }
    }

    pub fn integer(n: i64) -> Self {
        Self::rational(BigRational::from_integer(BigInt::from(n)))
    }

    pub fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }

    pub fn is_rational(&self) -> bool {
        self.b.is_zero()
    }

    pub fn add(&self, o: &Self) -> Self {
        AlphaElement { a: &self.a + &o.a, b: &self.b + &o.b }
    }

    pub fn sub(&self, o: &Self) -> Self {
        AlphaElement { a: &self.a - &o.a, b: &self.b - &o.b }
    }

    pub fn neg(&self) -> Self {
        AlphaElement { a: -&self.a, b: -&self.b }
    }

    pub fn scale(&self, r: &BigRational) -> Self {
        AlphaElement { a: &self.a * r, b: &self.b * r }
    }

    pub fn mul(&self, o: &Self, ctx: &HeckeContext) -> Self {
        // alpha^2 = ap * alpha - p^(k-1)
        let bb = &self.b * &o.b;
        let ap = BigRational::from_integer(BigInt::from(ctx.ap));
        let nrm = BigRational::from_integer(ctx.norm());
        AlphaElement {
            a: &self.a * &o.a - &bb * nrm,
            b: &self.a * &o.b + &self.b * &o.a + bb * ap,
        }
    }

    /// Conjugate under `alpha -> ap - alpha`.
    pub fn conjugate(&self, ctx: &HeckeContext) -> Self {
        let ap = BigRational::from_integer(BigInt::from(ctx.ap));
        AlphaElement { a: &self.a + &self.b * ap, b: -&self.b }
    }

    /// Field norm `x * conj(x)`, a rational.
    pub fn norm(&self, ctx: &HeckeContext) -> BigRational {
        let prod = self.mul(&self.conjugate(ctx), ctx);
        debug_assert!(prod.b.is_zero());
        prod.a
    }

    pub fn inverse(&self, ctx: &HeckeContext) -> Result<Self, PadicError> {
        let n = self.norm(ctx);
        if n.is_zero() {
            return Err(PadicError::DivisionByZero);
        }
        Ok(self.conjugate(ctx).scale(&n.recip()))
    }

    pub fn pow(&self, e: u32, ctx: &HeckeContext) -> Self {
        let mut r = Self::one();
        for _ in 0..e {
            r = r.mul(self, ctx);
        }
        r
    }

    /// Image under `alpha -> root`, with the rational coordinates known to
    /// absolute precision `prec`.
    pub fn embed(&self, root: &PadicNumber, prec: i64) -> PadicNumber {
        let p = root.prime();
        let a = PadicNumber::from_rational(p, &self.a, prec);
        if self.b.is_zero() {
            return a;
        }
        let b = PadicNumber::from_rational(p, &self.b, prec);
        a.add(&b.mul(root))
    }
}

impl fmt::Display for AlphaElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.b.is_zero() {
            write!(f, "{}", self.a)
        } else {
            write!(f, "{} +alpha* {}", self.a, self.b)
        }
    }
}
