//! Floating-point and finite-field oracles: traces of Frobenius by point
//! counting, the rapidly convergent series for `L(E, 1)`, and the real period
//! by the arithmetic-geometric mean. Nothing here feeds the exact pipeline.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_bigint::BigInt;
use thiserror::Error;

use crate::padics::is_prime;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OracleError {
    #[error("singular Weierstrass equation (discriminant 0)")]
    Singular,
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("{0} is a prime of bad reduction")]
    BadReduction(u64),
    #[error("AGM did not converge")]
    AgmDiverged,
    #[error("invalid input: {0}")]
    Invalid(String),
}

/// `y^2 + a1 xy + a3 y = x^3 + a2 x^2 + a4 x + a6` with a user-asserted conductor.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CurveData {
    pub a: [i64; 5],
    pub conductor: u64,
    pub discriminant: BigInt,
}

impl CurveData {
    pub fn new(a: [i64; 5], conductor: u64) -> Result<Self, OracleError> {
        let disc = discriminant(&a);
        if disc == BigInt::from(0) {
            return Err(OracleError::Singular);
        }
        if conductor == 0 {
            return Err(OracleError::Invalid("conductor must be positive".into()));
        }
        // every prime of the conductor must divide the discriminant
        let mut n = conductor;
        let mut q = 2;
        while n > 1 {
            if n % q == 0 {
                if &disc % BigInt::from(q) != BigInt::from(0) {
                    return Err(OracleError::Invalid(format!("{q} | N but not the discriminant")));
                }
                while n % q == 0 {
                    n /= q;
                }
            }
            q += 1;
        }
        Ok(CurveData { a, conductor, discriminant: disc })
    }

    pub fn b_invariants(&self) -> [i64; 4] {
        b_invariants(&self.a)
    }
}

fn b_invariants(a: &[i64; 5]) -> [i64; 4] {
    let [a1, a2, a3, a4, a6] = *a;
    let b2 = a1 * a1 + 4 * a2;
    let b4 = 2 * a4 + a1 * a3;
    let b6 = a3 * a3 + 4 * a6;
    let b8 = a1 * a1 * a6 + 4 * a2 * a6 - a1 * a3 * a4 + a2 * a3 * a3 - a4 * a4;
    [b2, b4, b6, b8]
}

fn discriminant(a: &[i64; 5]) -> BigInt {
    let [b2, b4, b6, b8] = b_invariants(a).map(BigInt::from);
    -&b2 * &b2 * &b8 - BigInt::from(8) * &b4 * &b4 * &b4 - BigInt::from(27) * &b6 * &b6
        + BigInt::from(9) * &b2 * &b4 * &b6
}

fn pow_mod(b: u64, mut e: u64, m: u64) -> u64 {
    let mut r = 1u128;
    let mut b128 = (b % m) as u128;
    let m128 = m as u128;
    while e > 0 {
        if e & 1 == 1 {
            r = r * b128 % m128;
        }
        b128 = b128 * b128 % m128;
        e >>= 1;
    }
    r as u64
}

/// `q + 1 - #E(F_q)` counting every point of the reduced cubic.
fn trace_by_count(curve: &CurveData, q: u64) -> i64 {
    let qi = q as i64;
    let [a1, a2, a3, a4, a6] = curve.a.map(|x| x.rem_euclid(qi));
    let mut affine: i64 = 0;
    if q == 2 {
        for x in 0..2 {
            for y in 0..2 {
                let lhs = y * y + a1 * x * y + a3 * y;
                let rhs = x * x * x + a2 * x * x + a4 * x + a6;
                if (lhs - rhs).rem_euclid(2) == 0 {
                    affine += 1;
                }
            }
        }
    } else {
        for x in 0..qi {
            // (2y + a1 x + a3)^2 = disc(x)
            let l = (a1 * x + a3).rem_euclid(qi);
            let cubic = ((x * x % qi * x) % qi + a2 * x % qi * x % qi + a4 * x + a6).rem_euclid(qi);
            let d = (l * l + 4 * cubic).rem_euclid(qi) as u64;
            affine += if d == 0 {
                1
            } else if pow_mod(d, (q - 1) / 2, q) == 1 {
                2
            } else {
                0
            };
        }
    }
    qi + 1 - (affine + 1)
}

/// Trace of Frobenius at a prime of good reduction.
pub fn a_p(curve: &CurveData, q: u64) -> Result<i64, OracleError> {
    if !is_prime(q) {
        return Err(OracleError::NotPrime(q));
    }
    if &curve.discriminant % BigInt::from(q) == BigInt::from(0) {
        return Err(OracleError::BadReduction(q));
    }
    let t = trace_by_count(curve, q);
    assert!(t * t <= 4 * q as i64, "Hasse bound violated: a_{q} = {t}");
    Ok(t)
}

/// `a_q` for every prime `q < bound` (bad primes included).
pub fn traces_up_to(curve: &CurveData, bound: u64) -> BTreeMap<u64, i64> {
    (2..bound).filter(|&q| is_prime(q)).map(|q| (q, trace_by_count(curve, q))).collect()
}

/// Dirichlet coefficients `a_1 .. a_n` from the prime traces.
pub fn dirichlet_coefficients(curve: &CurveData, n: usize) -> Vec<i64> {
    let traces = traces_up_to(curve, n as u64 + 1);
    let mut an = vec![0i64; n + 1];
    an[1] = 1;
    let mut smallest = vec![0usize; n + 1];
    for i in 2..=n {
        if smallest[i] == 0 {
            let mut j = i;
            while j <= n {
                if smallest[j] == 0 {
                    smallest[j] = i;
                }
                j += i;
            }
        }
    }
    let bad = |q: u64| curve.conductor % q == 0;
    for m in 2..=n {
        let q = smallest[m];
        let mut rest = m;
        let mut k = 0;
        while rest % q == 0 {
            rest /= q;
            k += 1;
        }
        let ap = traces[&(q as u64)];
        // a_{q^k} by the Hecke recursion
        let (mut prev, mut cur) = (1i64, ap);
        for _ in 1..k {
            let next = if bad(q as u64) { ap * cur } else { ap * cur - q as i64 * prev };
            prev = cur;
            cur = next;
        }
        an[m] = cur * an[rest];
    }
    an
}

/// `L(E, 1)` with its tail bound.
#[derive(Clone, Copy, Debug)]
pub struct LValue {
    pub value: f64,
    pub tail_bound: f64,
}

/// `L(E, 1) = (1 + eps) sum a_n / n exp(-2 pi n / sqrt N)` where `eps` is the
/// sign of the functional equation.
pub fn l_value_numeric(curve: &CurveData, terms: usize, root_number: i8) -> Result<LValue, OracleError> {
    if terms < 1000 {
        return Err(OracleError::Invalid(format!("terms = {terms} < 1000")));
    }
    let c = 2.0 * PI / (curve.conductor as f64).sqrt();
    let an = dirichlet_coefficients(curve, terms);
    let mut sum = 0.0;
    for (n, &a) in an.iter().enumerate().skip(1) {
        sum += a as f64 / n as f64 * (-c * n as f64).exp();
    }
    let factor = 1.0 + root_number as f64;
    // |a_n| <= n
    let tail = 2.0 * (-c * (terms as f64 + 1.0)).exp() / (1.0 - (-c).exp());
    Ok(LValue { value: factor * sum, tail_bound: factor * tail })
}

/// Arithmetic-geometric mean.
pub fn agm(a: f64, b: f64) -> Result<f64, OracleError> {
    let (mut a, mut b) = (a, b);
    for _ in 0..100 {
        if (a - b).abs() <= 1e-15 * a.abs() {
            return Ok(a);
        }
        let next = ((a + b) / 2.0, (a * b).sqrt());
        a = next.0;
        b = next.1;
    }
    Err(OracleError::AgmDiverged)
}

fn real_roots_of_cubic(c3: f64, c2: f64, c1: f64, c0: f64) -> Vec<f64> {
    // Newton-polished roots of c3 x^3 + c2 x^2 + c1 x + c0 via the trigonometric/Cardano split
    let (a, b, c) = (c2 / c3, c1 / c3, c0 / c3);
    let q = (a * a - 3.0 * b) / 9.0;
    let r = (2.0 * a * a * a - 9.0 * a * b + 27.0 * c) / 54.0;
    let mut roots = if r * r < q * q * q {
        let theta = (r / (q * q * q).sqrt()).acos();
        let s = -2.0 * q.sqrt();
        vec![
            s * (theta / 3.0).cos() - a / 3.0,
            s * ((theta + 2.0 * PI) / 3.0).cos() - a / 3.0,
            s * ((theta - 2.0 * PI) / 3.0).cos() - a / 3.0,
        ]
    } else {
        let big_a = -r.signum() * (r.abs() + (r * r - q * q * q).sqrt()).cbrt();
        let big_b = if big_a != 0.0 { q / big_a } else { 0.0 };
        vec![big_a + big_b - a / 3.0]
    };
    for x in roots.iter_mut() {
        for _ in 0..3 {
            let f = ((*x + a) * *x + b) * *x + c;
            let df = (3.0 * *x + 2.0 * a) * *x + b;
            if df != 0.0 {
                *x -= f / df;
            }
        }
    }
    roots.sort_by(|u, v| v.partial_cmp(u).unwrap());
    roots
}

/// The least positive real period times the number of real components.
pub fn real_period(curve: &CurveData) -> Result<f64, OracleError> {
    let [b2, b4, b6, _] = curve.b_invariants().map(|x| x as f64);
    // 4x^3 + b2 x^2 + 2 b4 x + b6
    let roots = real_roots_of_cubic(4.0, b2, 2.0 * b4, b6);
    if curve.discriminant > BigInt::from(0) {
        let (e1, e2, e3) = (roots[0], roots[1], roots[2]);
        let w = PI / agm((e1 - e3).sqrt(), (e1 - e2).sqrt())?;
        Ok(2.0 * w)
    } else {
        let e1 = roots[0];
        let a = 3.0 * e1 + b2 / 4.0;
        let b = (3.0 * e1 * e1 + b2 / 2.0 * e1 + b4 / 2.0).sqrt();
        Ok(2.0 * PI / agm(2.0 * b.sqrt(), (2.0 * b + a).sqrt())?)
    }
}

/// Best rational approximation with denominator at most `max_den`.
pub fn nearest_rational(x: f64, max_den: i64) -> (i64, i64) {
    let mut best = (x.round() as i64, 1i64);
    let mut best_err = (x - best.0 as f64).abs();
    for d in 1..=max_den {
        let n = (x * d as f64).round() as i64;
        let e = (x - n as f64 / d as f64).abs();
        if e < best_err - 1e-15 {
            best = (n, d);
            best_err = e;
        }
    }
    best
}

/// Curves used by the acceptance fixtures.
pub mod curves {
    use super::CurveData;

    pub fn e11a1() -> CurveData {
        CurveData::new([0, -1, 1, -10, -20], 11).unwrap()
    }

    pub fn e37a1() -> CurveData {
        CurveData::new([0, 0, 1, -1, 0], 37).unwrap()
    }

    pub fn e14a1() -> CurveData {
        CurveData::new([1, 0, 1, 4, -6], 14).unwrap()
    }
}
