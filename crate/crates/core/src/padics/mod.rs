//! Capped-precision arithmetic in Z_p, Q_p and Q_p(pi) with `pi^2 = -p`,
//! together with the Teichmueller decomposition, Hecke roots and the
//! binomial series for `<x>^s`.

mod alpha;
mod number;
mod qp;

pub use alpha::{AlphaElement, HeckeContext};
pub use number::{PadicNumber, Valuation};
pub use qp::Qp;

pub(crate) use qp::pow_p;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::Ratio;
use num_traits::{Signed, Zero};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PadicError {
    #[error("division by a value indistinguishable from zero")]
    DivisionByZero,
    #[error("p = {0} is not supported here (need an odd prime{1})")]
    UnsupportedPrime(u64, &'static str),
    #[error("{0} is divisible by p = {1}")]
    NotAUnit(String, u64),
    #[error("a_p = {ap} violates the Hasse-Deligne bound for p = {p}, k = {k}")]
    HasseViolation { ap: i64, p: u64, k: u32 },
    #[error("supersingular a_p = {0} != 0 is unsupported")]
    UnsupportedSupersingular(i64),
    #[error("invalid argument: {0}")]
    Invalid(String),
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

fn require_odd_prime(p: u64) -> Result<(), PadicError> {
    if p == 2 || !is_prime(p) {
        return Err(PadicError::UnsupportedPrime(p, ""));
    }
    Ok(())
}

/// Teichmueller lift of `a` modulo `p^n`, by iterating `x -> x^p`.
pub fn teichmuller(a: &BigInt, p: u64, n: i64) -> Result<Qp, PadicError> {
    require_odd_prime(p)?;
    if n < 1 {
        return Err(PadicError::Invalid(format!("precision {n} < 1")));
    }
    if (a % BigInt::from(p)).is_zero() {
        return Err(PadicError::NotAUnit(a.to_string(), p));
    }
    let modulus = pow_p(p, n);
    let exp = BigInt::from(p);
    let mut x = a.mod_floor(&modulus);
    for _ in 0..n {
        x = x.modpow(&exp, &modulus);
    }
    Ok(Qp::from_int(p, &x, n))
}

fn require_zp_unit(x: &Qp) -> Result<BigInt, PadicError> {
    if !x.is_unit() {
        return Err(PadicError::NotAUnit(x.to_string(), x.prime()));
    }
    Ok(x.unit().clone())
}

/// `omega(x)` for a unit `x` of Z_p, at the precision of `x`.
pub fn omega(x: &Qp) -> Result<Qp, PadicError> {
    let u = require_zp_unit(x)?;
    teichmuller(&u, x.prime(), x.precision())
}

/// `<x> = x / omega(x)`, congruent to 1 mod p.
pub fn angle_part(x: &Qp) -> Result<Qp, PadicError> {
    let w = omega(x)?;
    x.div(&w)
}

/// Sum of the base-p digits of `n`.
pub fn digit_sum(mut n: u64, p: u64) -> u64 {
    let mut s = 0;
    while n > 0 {
        s += n % p;
        n /= p;
    }
    s
}

/// `v_p(n!) = (n - sigma_n) / (p - 1)`.
pub fn factorial_valuation(n: u64, p: u64) -> u64 {
    (n - digit_sum(n, p)) / (p - 1)
}

/// `<a>^t = sum_{k < terms} C(t, k) (<a> - 1)^k` for a unit `a` and `t` in Z_p.
///
/// The returned precision is capped by the tail, whose terms have valuation
/// at least `k - v_p(k!) >= (terms (p - 2) + 1) / (p - 1)`.
pub fn binomial_series_power(a: &Qp, t: &Qp, terms: u64) -> Result<Qp, PadicError> {
    let p = a.prime();
    if p < 3 {
        return Err(PadicError::UnsupportedPrime(p, " >= 3"));
    }
    if terms < 1 {
        return Err(PadicError::Invalid("terms must be >= 1".into()));
    }
    if t.valuation() < 0 {
        return Err(PadicError::Invalid(format!("exponent {t} is not in Z_p")));
    }
    let y = angle_part(a)?.sub(&Qp::one(p, a.precision()));
    let tail = Ratio::new((terms * (p - 2) + 1) as i64, (p - 1) as i64).ceil().to_integer();
    let work = a.precision().min(t.precision()).max(tail) + 2;
    let mut term = Qp::one(p, work);
    let mut sum = term.clone();
    for k in 1..terms {
        let kk = BigInt::from(k);
        let factor = t.sub(&Qp::from_int(p, &(&kk - 1), work));
        term = term.mul(&factor).mul(&y);
        term = term.div(&Qp::from_int(p, &kk, work))?;
        sum = sum.add(&term);
    }
    Ok(sum.truncate(tail))
}

/// Which admissible root of the Hecke polynomial to use.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum RootChoice {
    /// The p-adic unit root (ordinary case).
    Unit,
    /// `+p^((k-2)/2) pi` (supersingular, `a_p = 0`).
    Plus,
    /// `-p^((k-2)/2) pi`.
    Minus,
}

impl RootChoice {
    pub fn name(&self) -> &'static str {
        match self {
            RootChoice::Unit => "unit",
            RootChoice::Plus => "plus",
            RootChoice::Minus => "minus",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "unit" => Some(RootChoice::Unit),
            "plus" => Some(RootChoice::Plus),
            "minus" => Some(RootChoice::Minus),
            _ => None,
        }
    }
}

#[derive(Clone, Debug)]
pub struct HeckeRoot {
    pub choice: Option<RootChoice>,
    pub root: PadicNumber,
    pub admissible: bool,
}

fn check_hecke_input(ap: i64, k: u32, p: u64) -> Result<(), PadicError> {
    require_odd_prime(p)?;
    if k < 2 || k % 2 != 0 {
        return Err(PadicError::Invalid(format!("weight {k} must be even and >= 2")));
    }
    // ap^2 <= 4 p^(k-1)
    let lhs = BigInt::from(ap) * BigInt::from(ap);
    let rhs = BigInt::from(4) * pow_p(p, (k - 1) as i64);
    if lhs > rhs {
        return Err(PadicError::HasseViolation { ap, p, k });
    }
    Ok(())
}

/// Hensel lift of the unit root of `X^2 - ap X + p^(k-1)` modulo `p^prec`,
/// doubling the precision at each Newton step.
fn unit_root(ap: i64, k: u32, p: u64, prec: i64) -> Qp {
    let c = pow_p(p, (k - 1) as i64);
    let ap_b = BigInt::from(ap);
    let mut x = ap_b.mod_floor(&BigInt::from(p));
    let mut reached = 1;
    while reached < prec {
        reached = (2 * reached).min(prec);
        let m = pow_p(p, reached);
        let f = &x * &x - &ap_b * &x + &c;
        let df = (BigInt::from(2) * &x - &ap_b).mod_floor(&m);
        let inv = df.extended_gcd(&m).x;
        x = (&x - f * inv).mod_floor(&m);
    }
    Qp::from_int(p, &x, prec)
}

/// The root selected by `choice`, to absolute precision `prec`.
pub fn hecke_root(ctx: &HeckeContext, choice: RootChoice, prec: i64) -> Result<PadicNumber, PadicError> {
    check_hecke_input(ctx.ap, ctx.weight, ctx.p)?;
    let p = ctx.p;
    let ordinary = ctx.ap.rem_euclid(p as i64) != 0;
    match (choice, ordinary) {
        (RootChoice::Unit, true) => Ok(PadicNumber::from_qp(unit_root(ctx.ap, ctx.weight, p, prec))),
        (RootChoice::Plus | RootChoice::Minus, false) if ctx.ap == 0 => {
            let scale = ((ctx.weight - 2) / 2) as i64;
            let sign = if choice == RootChoice::Plus { 1 } else { -1 };
            let coeff = Qp::from_int(p, &(BigInt::from(sign) * pow_p(p, scale)), prec + 1);
            Ok(PadicNumber::ramified(Qp::zero(p, prec + 1), coeff))
        }
        (_, false) if ctx.ap != 0 => Err(PadicError::UnsupportedSupersingular(ctx.ap)),
        _ => Err(PadicError::Invalid(format!(
            "root choice {} does not match a_p = {} at p = {}",
            choice.name(),
            ctx.ap,
            p
        ))),
    }
}

/// Both roots of the Hecke polynomial with their admissibility flags.
pub fn hecke_roots(ap: i64, k: u32, p: u64, prec: i64) -> Result<Vec<HeckeRoot>, PadicError> {
    check_hecke_input(ap, k, p)?;
    let ctx = HeckeContext::new(ap, k, p);
    let bound = Ratio::from_integer((k - 1) as i64);
    if ap.rem_euclid(p as i64) != 0 {
        let alpha = hecke_root(&ctx, RootChoice::Unit, prec)?;
        let beta = PadicNumber::from_i64(p, ap, prec).sub(&alpha);
        let admissible = |x: &PadicNumber| x.valuation() < bound && x.valuation() >= Ratio::zero();
        Ok(vec![
            HeckeRoot { choice: Some(RootChoice::Unit), admissible: admissible(&alpha), root: alpha },
            HeckeRoot { choice: None, admissible: admissible(&beta), root: beta },
        ])
    } else if ap == 0 {
        [RootChoice::Plus, RootChoice::Minus]
            .into_iter()
            .map(|c| {
                let root = hecke_root(&ctx, c, prec)?;
                let v = root.valuation();
                Ok(HeckeRoot { choice: Some(c), admissible: v < bound && !v.is_negative(), root })
            })
            .collect()
    } else {
        Err(PadicError::UnsupportedSupersingular(ap))
    }
}

/// True when `p` divides `ap` (the supersingular case).
pub fn is_supersingular(ap: i64, p: u64) -> bool {
    ap.rem_euclid(p as i64) == 0
}
