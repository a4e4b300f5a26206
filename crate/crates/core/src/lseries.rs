//! The p-adic L-function `L_p(s) = int <x>^(s-1) dmu` on the `Z_p` line.
//!
//! Writing `<x> = 1 + p x~` gives
//!
//! ```text
//! L_p(s) = sum_k C(s - 1, k) p^k m_k,     m_k = int x~^k dmu,
//! ```
//!
//! and `k! C(s - 1, k) = q_k(s) = (s - 1)(s - 2)...(s - k)`. The Taylor
//! coefficient of `(s - s0)^j` in `q_k` is the integer
//! `e_{k-j}(s0 - 1, ..., s0 - k)`, so the expansion at `s0` is assembled from
//! moments with exact integer weights.
//!
//! Sample points and centers are rational integers, which are dense in `Z_p`
//! and keep every polynomial weight exact.

use std::fmt::Write as _;

use num_bigint::BigInt;
use num_rational::{BigRational, Ratio};
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

use crate::measure::{moments, MeasureError, MeasureTable, MomentVector};
use crate::modsym::{linalg, EigenSymbol};
use crate::padics::{
    angle_part, binomial_series_power, digit_sum, factorial_valuation, PadicError, PadicNumber, Qp, Valuation,
};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LseriesError {
    #[error("p = {0} is too small for series expansion (need p >= 5)")]
    PrimeTooSmall(u64),
    #[error("precision exhausted: {reason}; try levels={levels}, terms={terms}, coeffs={coeffs}")]
    PrecisionExhausted { reason: String, levels: u32, terms: u32, coeffs: usize },
    #[error("functional-equation sign flips between samples (s = {first} gives {sign}, s = {other} needs {other_sign})")]
    SignInconsistent { first: BigInt, sign: i8, other: BigInt, other_sign: i8 },
    #[error("only weight 2 is supported here")]
    WeightNotTwo,
    #[error("psi matrix entry ({0}, {1}) is not p-integral")]
    NonIntegralEntry(usize, usize),
    #[error("invalid argument: {0}")]
    Invalid(String),
    #[error(transparent)]
    Measure(#[from] MeasureError),
    #[error(transparent)]
    Padic(#[from] PadicError),
}

fn val(n: i64) -> Valuation {
    Ratio::from_integer(n)
}

fn int_valuation(n: &BigInt, p: u64) -> Option<i64> {
    if n.is_zero() {
        return None;
    }
    let p = BigInt::from(p);
    let mut n = n.clone();
    let mut v = 0;
    while (&n % &p).is_zero() {
        n /= &p;
        v += 1;
    }
    Some(v)
}

/// A value together with the valuation to which it is certified.
#[derive(Clone, Debug)]
pub struct Certified {
    /// Known modulo `p^floor`.
    pub value: PadicNumber,
    pub floor: Valuation,
}

impl Certified {
    fn new(value: PadicNumber, floor: Valuation) -> Self {
        let floor = floor.min(value.precision());
        Certified { value: value.truncate(floor), floor }
    }

    pub fn is_provably_nonzero(&self) -> bool {
        self.value.is_provably_nonzero()
    }

    pub fn status(&self) -> ZeroStatus {
        if self.is_provably_nonzero() {
            ZeroStatus::Nonzero(self.value.valuation())
        } else {
            ZeroStatus::ConsistentWithZero(self.floor)
        }
    }
}

/// Riemann-sum evaluation of `L_p(s)` at level `m`.
pub fn eval_at(table: &MeasureTable, s: &BigInt, m: u32) -> Result<Certified, LseriesError> {
    let p = table.p;
    let err = table.error_floor(m);
    let work = err.ceil().to_integer().max(1) + m as i64 + 6;
    let values = table.embedded_level(m, work)?;
    let t = Qp::from_int(p, &(s - 1), work + 4);
    let terms = series_terms(work, p);
    let mut acc = PadicNumber::zero(p, work);
    for a in table.units(m) {
        let x = Qp::from_i64(p, a as i64, work + 2);
        let w = binomial_series_power(&x, &t, terms)?;
        acc = acc.add(&values[a as usize].scale(&w));
    }
    Ok(Certified::new(acc, err))
}

/// Number of binomial terms whose tail lies beyond `p^work`.
fn series_terms(work: i64, p: u64) -> u64 {
    let need = (work.max(1) as u64 * (p - 1)).div_ceil(p - 2);
    need + 2
}

/// Where a series came from.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Provenance {
    pub conductor: u64,
    pub level: u32,
    pub terms: u32,
    pub ap: i64,
    pub root: String,
}

/// Truncated Taylor expansion around an integer center with per-coefficient
/// floors.
#[derive(Clone, Debug)]
pub struct PadicPowerSeries {
    pub p: u64,
    pub center: BigInt,
    pub coeffs: Vec<Certified>,
    pub provenance: Provenance,
    /// `v(alpha)` and `c0`, which bound the omitted coefficients.
    pub alpha_valuation: Valuation,
    pub c0: Valuation,
}

/// Coefficients of `q_k(s0 + x) = prod_{i=1..k} (x + s0 - i)` for `k = 0..=k_max`;
/// entry `[k][j]` is `e_{k-j}(s0 - 1, ..., s0 - k)`.
pub fn shifted_falling_factorials(s0: &BigInt, k_max: usize) -> Vec<Vec<BigInt>> {
    let mut rows = vec![vec![BigInt::one()]];
    for k in 1..=k_max {
        let prev = &rows[k - 1];
        let root = s0 - BigInt::from(k);
        let mut next = vec![BigInt::zero(); k + 1];
        for (j, c) in prev.iter().enumerate() {
            next[j + 1] += c;
            next[j] += c * &root;
        }
        rows.push(next);
    }
    rows
}

/// `v(p^k / k!) = ((p - 2) k + sigma_k) / (p - 1)`.
pub fn scaling_valuation(k: u64, p: u64) -> Valuation {
    val(k as i64) - val(factorial_valuation(k, p) as i64)
}

/// Lower bound on `v(c_j (s - s0)^j)` for every omitted index `j >= from`,
/// with `d = v(s - s0)`; uses the moment decay bound.
fn omitted_floor(p: u64, from: usize, d: Valuation, alpha_v: Valuation, c0: Valuation) -> Valuation {
    let j = from as i64;
    d * j + Ratio::new((p as i64 - 3) * j + 1, p as i64 - 1) - alpha_v * 2 - c0
}

pub fn taylor_expand(
    table: &MeasureTable,
    s0: &BigInt,
    coeffs: usize,
    m: u32,
    terms: u32,
) -> Result<PadicPowerSeries, LseriesError> {
    let p = table.p;
    if p < 5 {
        return Err(LseriesError::PrimeTooSmall(p));
    }
    if coeffs == 0 {
        return Err(LseriesError::Invalid("at least one coefficient is required".into()));
    }
    let err = table.error_floor(m);
    let alpha_v = table.alpha_valuation();
    let tail = Ratio::new((p as i64 - 3) * (terms as i64 + 1) + 1, p as i64 - 1) - alpha_v * 2 - table.c0;
    if coeffs > terms as usize + 1 || tail < err {
        let need_terms = ((err + alpha_v * 2 + table.c0) * (p as i64 - 1) / (p as i64 - 3)).ceil().to_integer().max(0)
            as u32;
        return Err(LseriesError::PrecisionExhausted {
            reason: format!("series tail floor {tail} is below the Riemann floor {err} or too few terms"),
            levels: m,
            terms: need_terms.max(terms).max(coeffs as u32),
            coeffs,
        });
    }
    let mv = moments(table, terms, m)?;
    let weights = shifted_falling_factorials(s0, terms as usize);
    let s0_is_root = s0.is_positive() && *s0 <= BigInt::from(terms + 1);
    let mut out = Vec::with_capacity(coeffs);
    for j in 0..coeffs {
        let mut acc = PadicNumber::zero(p, mv.entries[0].precision().ceil().to_integer());
        let mut floor: Option<Valuation> = if j == 0 && s0_is_root { None } else { Some(tail) };
        for k in j..=terms as usize {
            let e = &weights[k][j];
            let Some(ve) = int_valuation(e, p) else { continue };
            let scale = BigRational::new(BigInt::from(p).pow(k as u32) * e, factorial(k));
            let prec = mv.entries[k].precision().ceil().to_integer() + k as i64 + 4;
            let term = mv.entries[k].scale(&Qp::from_rational(p, &scale, prec));
            acc = acc.add(&term);
            let f = scaling_valuation(k as u64, p) + val(ve) + mv.floors[k];
            floor = Some(floor.map_or(f, |g: Valuation| g.min(f)));
        }
        let floor = floor.unwrap_or_else(|| acc.precision());
        out.push(Certified::new(acc, floor));
    }
    Ok(PadicPowerSeries {
        p,
        center: s0.clone(),
        coeffs: out,
        provenance: Provenance {
            conductor: table.level,
            level: m,
            terms,
            ap: table.ctx.ap,
            root: table.root.name().to_string(),
        },
        alpha_valuation: alpha_v,
        c0: table.c0,
    })
}

fn factorial(k: usize) -> BigInt {
    (1..=k).fold(BigInt::one(), |f, i| f * BigInt::from(i))
}

impl PadicPowerSeries {
    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// `sum_j c_j (s - s0)^j`, certified against both the coefficient floors
    /// and the omitted higher coefficients.
    pub fn evaluate(&self, s: &BigInt) -> Certified {
        let p = self.p;
        let h = s - &self.center;
        if h.is_zero() {
            return self.coeffs[0].clone();
        }
        let d = val(int_valuation(&h, p).expect("nonzero"));
        let prec = self.coeffs.iter().map(|c| c.value.precision()).max().unwrap().ceil().to_integer() + 4;
        let hp = Qp::from_int(p, &h, prec + d.to_integer() * self.len() as i64);
        let mut power = Qp::one(p, prec + d.to_integer() * self.len() as i64);
        let mut acc = PadicNumber::zero(p, prec);
        let mut floor = omitted_floor(p, self.len(), d, self.alpha_valuation, self.c0);
        for (j, c) in self.coeffs.iter().enumerate() {
            acc = acc.add(&c.value.scale(&power));
            floor = floor.min(c.floor + d * j as i64);
            power = power.mul(&hp);
        }
        Certified::new(acc, floor)
    }

    /// Re-expands the truncated polynomial around `s1`.
    pub fn recenter(&self, s1: &BigInt) -> PadicPowerSeries {
        let p = self.p;
        let h = s1 - &self.center;
        let d = int_valuation(&h, p).map_or(val(i64::MAX / 4), val);
        let n = self.len();
        let prec = self.coeffs.iter().map(|c| c.value.precision()).max().unwrap().ceil().to_integer() + 4;
        let mut out = Vec::with_capacity(n);
        for i in 0..n {
            let mut acc = PadicNumber::zero(p, prec);
            let mut floor = omitted_floor(p, n, val(0), self.alpha_valuation, self.c0)
                + d * (n as i64 - i as i64);
            for j in i..n {
                let w = binomial(j, i) * h.pow((j - i) as u32);
                acc = acc.add(&self.coeffs[j].value.mul_int(&w));
                let wv = int_valuation(&w, p).map_or(val(i64::MAX / 4), val);
                floor = floor.min(self.coeffs[j].floor + wv);
            }
            out.push(Certified::new(acc, floor));
        }
        PadicPowerSeries { center: s1.clone(), coeffs: out, ..self.clone() }
    }

    /// Canonical text form.
    pub fn export(&self) -> String {
        let mut out = format!(
            "PADICLF-SERIES v1; N={}; p={}; alpha={}:{}; center={};\n",
            self.provenance.conductor, self.p, self.provenance.root, self.provenance.ap, self.center
        );
        for (j, c) in self.coeffs.iter().enumerate() {
            let _ = writeln!(out, "{j} {} {} {}", c.value.valuation(), digits(&c.value), c.floor);
        }
        out
    }
}

fn binomial(n: usize, k: usize) -> BigInt {
    (0..k).fold(BigInt::one(), |acc, i| acc * BigInt::from(n - i) / BigInt::from(i + 1))
}

/// Base-p digits of the unit part; the ramified case lists both coordinates.
pub fn digits(x: &PadicNumber) -> String {
    let fmt = |q: &Qp| {
        let d = q.unit_digits();
        if d.is_empty() {
            "-".to_string()
        } else {
            d.iter().map(u64::to_string).collect::<Vec<_>>().join(" ")
        }
    };
    match x.pi_part() {
        None => fmt(x.real_part()),
        Some(b) => format!("re: {} pi: {}", fmt(x.real_part()), fmt(b)),
    }
}

/// Per-coefficient verdict.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ZeroStatus {
    /// Provably nonzero, with its valuation.
    Nonzero(Valuation),
    /// Zero modulo `p^e`.
    ConsistentWithZero(Valuation),
}

impl std::fmt::Display for ZeroStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ZeroStatus::Nonzero(v) => write!(f, "provably nonzero (valuation {v})"),
            ZeroStatus::ConsistentWithZero(e) => write!(f, "consistent with zero up to p^{e}"),
        }
    }
}

#[derive(Clone, Debug)]
pub struct OrderReport {
    /// `None` means undetermined: every computed coefficient is consistent
    /// with zero, and more levels, terms or coefficients are needed.
    pub order: Option<usize>,
    pub leading: Option<PadicNumber>,
    pub ledger: Vec<ZeroStatus>,
}

pub fn order_of_vanishing(series: &PadicPowerSeries) -> OrderReport {
    let ledger: Vec<ZeroStatus> = series.coeffs.iter().map(Certified::status).collect();
    let order = ledger.iter().position(|s| matches!(s, ZeroStatus::Nonzero(_)));
    OrderReport { order, leading: order.map(|r| series.coeffs[r].value.clone()), ledger }
}

/// One sample of the functional equation `L_p(s) = eps <N>^(1-s) L_p(2-s)`.
#[derive(Clone, Debug)]
pub struct FeSample {
    pub s: BigInt,
    pub residual_valuation: Valuation,
    pub floor: Valuation,
    pub pass: bool,
}

#[derive(Clone, Debug)]
pub struct FeReport {
    /// The sign in the functional equation, `-w_N`.
    pub epsilon: i8,
    pub fricke: i8,
    /// First sample at which the sign was observed (nonzero values).
    pub calibrated_at: Option<BigInt>,
    pub samples: Vec<FeSample>,
}

impl FeReport {
    pub fn pass(&self) -> bool {
        self.samples.iter().all(|s| s.pass)
    }
}

/// `<n>^t` for an integer `n` prime to `p`.
fn angle_power(n: u64, t: &BigInt, p: u64, work: i64) -> Result<Qp, LseriesError> {
    let x = Qp::from_i64(p, n as i64, work + 2);
    let t = Qp::from_int(p, t, work + 4);
    Ok(binomial_series_power(&x, &t, series_terms(work, p))?)
}

pub fn functional_equation_check(
    table: &MeasureTable,
    symbol: &EigenSymbol,
    samples: &[BigInt],
    m: u32,
) -> Result<FeReport, LseriesError> {
    if table.ctx.weight != 2 {
        return Err(LseriesError::WeightNotTwo);
    }
    let p = table.p;
    let fricke = symbol.fricke_sign;
    let default_eps = -fricke;
    let mut eps: Option<(i8, BigInt)> = None;
    let mut rows = Vec::new();
    for s in samples {
        let two_minus = BigInt::from(2) - s;
        let lhs = eval_at(table, s, m)?;
        let rhs0 = eval_at(table, &two_minus, m)?;
        let work = lhs.value.precision().ceil().to_integer().max(rhs0.value.precision().ceil().to_integer()) + 2;
        let factor = angle_power(table.level, &(BigInt::one() - s), p, work)?;
        let rhs = Certified::new(rhs0.value.scale(&factor), rhs0.floor);
        let floor = lhs.floor.min(rhs.floor);
        let residual = |e: i8| {
            let r = if e > 0 { lhs.value.sub(&rhs.value) } else { lhs.value.add(&rhs.value) };
            r.truncate(floor).valuation()
        };
        let sign = match &eps {
            Some((e, _)) => *e,
            None if lhs.is_provably_nonzero() && rhs.is_provably_nonzero() => {
                let e = if residual(1) >= floor { 1 } else { -1 };
                eps = Some((e, s.clone()));
                e
            }
            None => default_eps,
        };
        let rv = residual(sign);
        if rv < floor && residual(-sign) >= floor {
            if let Some((e, first)) = &eps {
                return Err(LseriesError::SignInconsistent {
                    first: first.clone(),
                    sign: *e,
                    other: s.clone(),
                    other_sign: -*e,
                });
            }
        }
        rows.push(FeSample { s: s.clone(), residual_valuation: rv, floor, pass: rv >= floor });
    }
    let epsilon = eps.as_ref().map_or(default_eps, |(e, _)| *e);
    Ok(FeReport { epsilon, fricke, calibrated_at: eps.map(|(_, s)| s), samples: rows })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DecayRow {
    pub k: usize,
    /// Certified lower bound on `v(p^((p-2)k + sigma_k)/(p-1) m_k)`.
    pub observed: Valuation,
    pub bound: Valuation,
    pub margin: Valuation,
    pub pass: bool,
}

#[derive(Clone, Debug)]
pub struct DecayLedger {
    pub rows: Vec<DecayRow>,
    /// Whether margins are non-decreasing for `k > p` (reported, not asserted).
    pub monotone_beyond_p: bool,
}

impl DecayLedger {
    pub fn pass(&self) -> bool {
        self.rows.iter().all(|r| r.pass)
    }

    pub fn first_failure(&self) -> Option<usize> {
        self.rows.iter().find(|r| !r.pass).map(|r| r.k)
    }
}

/// Checks `v(p^((p-2)k + sigma_k)/(p-1) m_k) >= ((p-3)k + sigma_k)/(p-1) - 2 v(alpha) - c0`.
pub fn decay_check(mv: &MomentVector) -> Result<DecayLedger, LseriesError> {
    let p = mv.p;
    if p < 5 {
        return Err(LseriesError::PrimeTooSmall(p));
    }
    let pm1 = p as i64 - 1;
    let rows: Vec<DecayRow> = mv
        .entries
        .iter()
        .zip(mv.floors.iter())
        .enumerate()
        .map(|(k, (m_k, floor))| {
            let sigma = digit_sum(k as u64, p) as i64;
            let v_m = if m_k.is_zero() { *floor } else { m_k.valuation().min(*floor) };
            let observed = scaling_valuation(k as u64, p) + v_m;
            let bound =
                Ratio::new((p as i64 - 3) * k as i64 + sigma, pm1) - mv.alpha_valuation * 2 - mv.c0;
            let margin = observed - bound;
            DecayRow { k, observed, bound, margin, pass: margin >= Ratio::zero() }
        })
        .collect();
    let beyond: Vec<&DecayRow> = rows.iter().filter(|r| r.k as u64 > p).collect();
    let monotone_beyond_p = beyond.windows(2).all(|w| w[1].margin >= w[0].margin);
    Ok(DecayLedger { rows, monotone_beyond_p })
}

/// Elementary symmetric polynomials `e_0..e_n` of `xs`.
pub fn elementary_symmetric(xs: &[BigInt]) -> Vec<BigInt> {
    let mut e = vec![BigInt::one()];
    for x in xs {
        e.push(BigInt::zero());
        for i in (1..e.len()).rev() {
            let prev = e[i - 1].clone();
            e[i] += prev * x;
        }
    }
    e
}

/// `f_n^(j)(s) = j! e_{n-j}(s - 1, ..., s - n)` where `f_n(s) = n! C(s - 1, n)`.
pub fn falling_factorial_derivative(n: usize, j: usize, s: &BigInt) -> BigInt {
    if j > n {
        return BigInt::zero();
    }
    let roots: Vec<BigInt> = (1..=n).map(|i| s - BigInt::from(i)).collect();
    factorial(j) * &elementary_symmetric(&roots)[n - j]
}

/// Outcome of the `c_1 = j + 1` check.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct C1Check {
    /// `c_k` with `f_n^(j)(s + h) = j! sum_k c_k h^k e_{n-j-k}(s - 1, ..., s - n)`.
    pub c: Vec<BigRational>,
    pub pass: bool,
}

/// Expands `f_n^(j)(s + h)` symbolically in `h`, reads off the `c_k`, and
/// checks `c_1 = j + 1` together with the numeric identity at `h = p^t`.
pub fn verify_c1_lemma(n: usize, j: usize, s: &BigInt, p: u64, t: u32) -> Result<C1Check, LseriesError> {
    if !(1 <= j && j < n) {
        return Err(LseriesError::Invalid(format!("need 1 <= j < n, got j = {j}, n = {n}")));
    }
    // f_n(s + h) as a polynomial in h, then its j-th derivative in s.
    let base = shifted_falling_factorials(s, n).pop().expect("n >= 1");
    // d^j/ds^j of sum_i b_i h^i at fixed s equals d^j/dh^j, so shift coefficients.
    let deriv: Vec<BigInt> = (j..=n).map(|i| &base[i] * factorial(i) / factorial(i - j)).collect();
    let roots: Vec<BigInt> = (1..=n).map(|i| s - BigInt::from(i)).collect();
    let e = elementary_symmetric(&roots);
    let jf = factorial(j);
    let mut c = Vec::new();
    for (k, d) in deriv.iter().enumerate() {
        let denom = &jf * &e[n - j - k];
        c.push(if denom.is_zero() { BigRational::zero() } else { BigRational::new(d.clone(), denom) });
    }
    let h = BigInt::from(p).pow(t);
    let lhs = falling_factorial_derivative(n, j, &(s + &h));
    let rhs: BigInt = deriv.iter().enumerate().map(|(k, d)| d * h.pow(k as u32)).sum();
    let expected = BigRational::from_integer(BigInt::from(j + 1));
    let c1_ok = e[n - j - 1].is_zero() || c[1] == expected;
    Ok(C1Check { pass: c1_ok && lhs == rhs, c })
}

/// The truncated matrix `(1/k_i!) q_{k_j}^(k_i)(s0)`, its exact inverse and
/// the product residual.
#[derive(Clone, Debug)]
pub struct PsiInversion {
    pub matrix: Vec<Vec<BigInt>>,
    pub inverse: Vec<Vec<BigInt>>,
    pub residual_is_identity: bool,
    /// Minimal p-adic valuation over all entries of both matrices.
    pub min_valuation: i64,
}

pub fn truncated_psi_inverse(k_indices: &[usize], s0: &BigInt, p: u64) -> Result<PsiInversion, LseriesError> {
    let n = k_indices.len();
    if n == 0 || n > 16 {
        return Err(LseriesError::Invalid(format!("truncation size {n} outside 1..=16")));
    }
    if k_indices.windows(2).any(|w| w[0] >= w[1]) {
        return Err(LseriesError::Invalid("k-indices must be strictly increasing".into()));
    }
    let top = *k_indices.last().unwrap();
    // Entries via the monomial expansion q_k(s) = sum_r (-1)^r e_r(1..k) s^(k-r):
    // (1/k_i!) d^{k_i} s^(k-r) = C(k - r, k_i) s^(k - r - k_i).
    let mut matrix = vec![vec![BigInt::zero(); n]; n];
    for (i, &ki) in k_indices.iter().enumerate() {
        for (jj, &kj) in k_indices.iter().enumerate() {
            if ki > kj {
                continue;
            }
            let ones: Vec<BigInt> = (1..=kj).map(BigInt::from).collect();
            let e = elementary_symmetric(&ones);
            let mut entry = BigRational::zero();
            for r in 0..=(kj - ki) {
                let sign = if r % 2 == 0 { BigInt::one() } else { -BigInt::one() };
                let d = BigRational::from_integer(sign * &e[r] * factorial(kj - r))
                    / BigRational::from_integer(factorial(kj - r - ki) * factorial(ki));
                entry += d * BigRational::from_integer(s0.pow((kj - r - ki) as u32));
            }
            if !entry.is_integer() {
                return Err(LseriesError::NonIntegralEntry(i, jj));
            }
            matrix[i][jj] = entry.to_integer();
        }
    }
    debug_assert!(top <= 64);
    // Unit upper triangular: back substitution stays integral.
    let mut inverse = vec![vec![BigInt::zero(); n]; n];
    for col in 0..n {
        inverse[col][col] = BigInt::one();
        for row in (0..col).rev() {
            let s: BigInt = (row + 1..=col).map(|t| &matrix[row][t] * &inverse[t][col]).sum();
            inverse[row][col] = -s;
        }
    }
    let q = |m: &Vec<Vec<BigInt>>| -> linalg::QMatrix {
        m.iter().map(|r| r.iter().map(|x| BigRational::from_integer(x.clone())).collect()).collect()
    };
    let product = linalg::mat_mul(&q(&matrix), &q(&inverse));
    let residual_is_identity = product == linalg::identity(n);
    let min_valuation = matrix
        .iter()
        .chain(inverse.iter())
        .flatten()
        .filter_map(|x| int_valuation(x, p))
        .min()
        .unwrap_or(0);
    Ok(PsiInversion { matrix, inverse, residual_is_identity, min_valuation })
}

/// `<N>^(1-s)` helper exposed for reports.
pub fn angle_of(n: u64, p: u64, prec: i64) -> Result<Qp, LseriesError> {
    Ok(angle_part(&Qp::from_i64(p, n as i64, prec))?)
}

/// Smallest `K` whose tail floor reaches `target`.
pub fn terms_for_floor(p: u64, target: Valuation, alpha_v: Valuation, c0: Valuation) -> u32 {
    let need = (target + alpha_v * 2 + c0) * (p as i64 - 1) / (p as i64 - 3);
    need.ceil().to_integer().max(1).to_u32().unwrap_or(u32::MAX)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::modsym::{build_space, eigensymbol};
    use num_integer::Integer;
    use crate::padics::RootChoice;
    use std::collections::BTreeMap;

    fn symbol(level: u64, ev: &[(u64, i64)], sign: i8) -> EigenSymbol {
        let space = build_space(level).unwrap();
        let ev: BTreeMap<u64, i64> = ev.iter().copied().collect();
        eigensymbol(&space, &ev, sign).unwrap()
    }

    fn table(level: u64, ev: &[(u64, i64)], ap: i64, n: u32) -> (EigenSymbol, MeasureTable) {
        let sym = symbol(level, ev, 1);
        let root = if ap == 0 { RootChoice::Plus } else { RootChoice::Unit };
        let t = MeasureTable::build(&sym, 5, ap, root, n).unwrap();
        (sym, t)
    }

    fn e11(n: u32) -> (EigenSymbol, MeasureTable) {
        table(11, &[(2, -2), (3, -1)], 1, n)
    }

    fn e37(n: u32) -> (EigenSymbol, MeasureTable) {
        table(37, &[(2, -2), (3, -3)], -2, n)
    }

    fn int(n: i64) -> BigInt {
        BigInt::from(n)
    }

    #[test]
    fn value_at_one_is_total_mass() {
        let (_, t) = e11(3);
        let v = eval_at(&t, &int(1), 3).unwrap();
        let root = t.root_at(40).unwrap();
        let mass = t.total_mass().embed(&root, 20);
        assert!(v.value.sub(&mass).truncate(v.floor).is_zero());
        assert!(v.is_provably_nonzero());
    }

    #[test]
    fn rank_one_vanishes_at_one() {
        let (_, t) = e37(3);
        let v = eval_at(&t, &int(1), 3).unwrap();
        assert!(!v.is_provably_nonzero());
        assert!(v.floor >= val(3));
    }

    #[test]
    fn zero_table_gives_zero() {
        let sym = symbol(11, &[(2, -2)], 1).scaled(&BigRational::zero());
        let t = MeasureTable::build(&sym, 5, 1, RootChoice::Unit, 2).unwrap();
        assert!(!eval_at(&t, &int(7), 2).unwrap().is_provably_nonzero());
        let series = taylor_expand(&t, &int(1), 3, 2, 10).unwrap();
        assert_eq!(order_of_vanishing(&series).order, None);
    }

    #[test]
    fn constant_term_matches_point_value() {
        let (_, t) = e11(3);
        for s0 in [1, 2, 7, -3] {
            let series = taylor_expand(&t, &int(s0), 4, 3, 20).unwrap();
            let direct = eval_at(&t, &int(s0), 3).unwrap();
            let floor = series.coeffs[0].floor.min(direct.floor);
            assert!(series.coeffs[0].value.sub(&direct.value).truncate(floor).is_zero(), "s0 = {s0}");
            let at_center = series.evaluate(&int(s0));
            assert_eq!(at_center.value, series.coeffs[0].value);
        }
    }

    #[test]
    fn derivative_matches_finite_difference() {
        // d/ds <a>^(s-1) at s0 = sum_k p^k/k! x~^k e_{k-1}(s0-1, ..., s0-k)
        let p = 5u64;
        let prec = 30;
        let terms = 60;
        let weights = shifted_falling_factorials(&int(3), terms);
        for a in [2i64, 7, 13, 1234] {
            let x = Qp::from_i64(p, a, prec);
            let tilde = angle_part(&x).unwrap().sub(&Qp::one(p, prec)).shift(-1);
            let mut deriv = Qp::zero(p, prec - 4);
            let mut power = Qp::one(p, prec);
            for k in 1..=terms {
                power = power.mul(&tilde);
                let scale = BigRational::new(BigInt::from(p).pow(k as u32) * &weights[k][1], factorial(k));
                deriv = deriv.add(&power.mul(&Qp::from_rational(p, &scale, prec)));
            }
            for t in 3..=6u32 {
                let h = BigInt::from(p).pow(t);
                let f = |e: &BigInt| {
                    binomial_series_power(&x, &Qp::from_int(p, e, prec), 60).unwrap()
                };
                let quotient = f(&(int(2) + &h)).sub(&f(&int(2))).shift(-(t as i64));
                let diff = quotient.sub(&deriv);
                assert!(diff.is_zero() || diff.valuation() >= t as i64, "a = {a}, t = {t}");
            }
        }
    }

    #[test]
    fn recentering_matches_direct_expansion() {
        let (_, t) = e11(3);
        let at1 = taylor_expand(&t, &int(1), 12, 3, 30).unwrap();
        let at2 = taylor_expand(&t, &int(2), 12, 3, 30).unwrap();
        let moved = at1.recenter(&int(2));
        for (a, b) in moved.coeffs.iter().zip(at2.coeffs.iter()).take(4) {
            let floor = a.floor.min(b.floor);
            assert!(floor >= val(3));
            assert!(a.value.sub(&b.value).truncate(floor).is_zero());
        }
    }

    #[test]
    fn two_paths_agree_near_center() {
        let (_, t) = e11(3);
        let series = taylor_expand(&t, &int(1), 8, 3, 30).unwrap();
        for r in [1i64, 2, -3, 17, 44] {
            let s = int(1 + 5 * r);
            let a = series.evaluate(&s);
            let b = eval_at(&t, &s, 3).unwrap();
            let floor = a.floor.min(b.floor);
            assert!(a.value.sub(&b.value).truncate(floor).is_zero(), "s = {s}");
        }
    }

    #[test]
    fn order_report_on_synthetic_series() {
        let (_, t) = e11(2);
        let mut series = taylor_expand(&t, &int(1), 3, 2, 10).unwrap();
        series.coeffs[0] = Certified::new(PadicNumber::zero(5, 6), val(6));
        series.coeffs[1] = Certified::new(PadicNumber::from_i64(5, 3, 6), val(6));
        let report = order_of_vanishing(&series);
        assert_eq!(report.order, Some(1));
        assert_eq!(report.ledger[0], ZeroStatus::ConsistentWithZero(val(6)));
        assert_eq!(report.ledger[1], ZeroStatus::Nonzero(val(0)));
    }

    #[test]
    fn small_primes_and_short_series_rejected() {
        let sym = symbol(11, &[(2, -2), (3, -1)], 1);
        let t3 = MeasureTable::build(&sym, 3, -1, RootChoice::Unit, 2).unwrap();
        assert_eq!(taylor_expand(&t3, &int(1), 2, 2, 10).unwrap_err(), LseriesError::PrimeTooSmall(3));
        let (_, t) = e11(2);
        assert!(matches!(
            taylor_expand(&t, &int(1), 12, 2, 10),
            Err(LseriesError::PrecisionExhausted { .. })
        ));
        assert!(matches!(taylor_expand(&t, &int(1), 2, 2, 1), Err(LseriesError::PrecisionExhausted { .. })));
    }

    #[test]
    fn functional_equation_signs() {
        let samples = [int(1), int(6), int(-4)];
        let (sym, t) = e11(3);
        let report = functional_equation_check(&t, &sym, &samples, 3).unwrap();
        assert!(report.pass(), "{report:?}");
        assert_eq!(report.epsilon, 1);
        assert_eq!(report.epsilon, -report.fricke);
        let (sym, t) = e37(3);
        let report = functional_equation_check(&t, &sym, &samples, 3).unwrap();
        assert!(report.pass(), "{report:?}");
        assert_eq!(report.epsilon, -1);
        assert_eq!(report.epsilon, -report.fricke);
    }

    #[test]
    fn fricke_symmetry_of_the_distribution() {
        // mu(D(a, p^n)) = -w mu(D(-(N a)^-1, p^n)) exactly
        for (sym, t) in [e11(3), e37(3)] {
            let eps = BigRational::from_integer(int(-sym.fricke_sign as i64));
            for n in 1..=3 {
                let modulus = 5i64.pow(n);
                for a in t.units(n) {
                    let na = BigInt::from(sym.level as i64 * a as i64);
                    let inv = na.modinv(&int(modulus)).unwrap();
                    let b = (-inv).mod_floor(&int(modulus)).to_u64().unwrap();
                    assert_eq!(t.value(a, n), &t.value(b, n).scale(&eps));
                }
            }
        }
    }

    #[test]
    fn decay_ledger() {
        let (_, t) = e11(3);
        let mv = moments(&t, 20, 3).unwrap();
        let ledger = decay_check(&mv).unwrap();
        assert!(ledger.pass());
        assert_eq!(ledger.rows[0].bound, -t.c0);
        let mut bad = mv.clone();
        bad.entries[4] = PadicNumber::from_rational(5, &BigRational::new(int(1), int(5).pow(6)), 10);
        let ledger = decay_check(&bad).unwrap();
        assert_eq!(ledger.first_failure(), Some(4));
    }

    fn poly_eval(coeffs: &[BigInt], s: &BigInt) -> BigInt {
        coeffs.iter().rev().fold(BigInt::zero(), |acc, c| acc * s + c)
    }

    #[test]
    fn falling_factorial_derivatives() {
        for n in 0..=10usize {
            // f_n(s) in the monomial basis, from q_n(0 + x)
            let mut f = shifted_falling_factorials(&int(0), n).pop().unwrap();
            assert_eq!(falling_factorial_derivative(n, n, &int(9)), factorial(n));
            if n >= 1 {
                assert!(falling_factorial_derivative(n, 0, &int(1)).is_zero());
            }
            for j in 0..=n + 1 {
                for s in [int(1), int(-7), int(123), int(5).pow(9) + 3, int(-44)] {
                    assert_eq!(falling_factorial_derivative(n, j, &s), poly_eval(&f, &s), "n={n} j={j}");
                }
                // differentiate symbolically
                f = f.iter().enumerate().skip(1).map(|(i, c)| c * BigInt::from(i)).collect();
            }
        }
    }

    #[test]
    fn shift_identity() {
        for n in 1..=8usize {
            for s in [int(2), int(-5), int(3127)] {
                for t in 1..=3u32 {
                    let h = int(5).pow(t);
                    let roots: Vec<BigInt> = (1..=n).map(|i| &s - BigInt::from(i)).collect();
                    let e = elementary_symmetric(&roots);
                    let rhs: BigInt = (0..=n).map(|j| h.pow(j as u32) * &e[n - j]).sum();
                    assert_eq!(falling_factorial_derivative(n, 0, &(&s + &h)), rhs);
                }
            }
        }
    }

    #[test]
    fn c1_lemma() {
        let check = verify_c1_lemma(2, 1, &int(4), 5, 1).unwrap();
        assert!(check.pass);
        assert_eq!(check.c[1], BigRational::from_integer(int(2)));
        for n in 2..=8 {
            for j in 1..n {
                for s in [int(3), int(5).pow(10) - 2, int(-11)] {
                    assert!(verify_c1_lemma(n, j, &s, 5, 3).unwrap().pass, "n={n} j={j}");
                }
            }
        }
        assert!(verify_c1_lemma(3, 3, &int(1), 5, 1).is_err());
    }

    #[test]
    fn psi_small_cases() {
        let one = truncated_psi_inverse(&[1], &int(1), 5).unwrap();
        assert_eq!(one.matrix, vec![vec![int(1)]]);
        assert_eq!(one.inverse, vec![vec![int(1)]]);
        let four = truncated_psi_inverse(&[1, 2, 3, 4], &int(1), 5).unwrap();
        assert!(four.residual_is_identity);
        assert_eq!(four.inverse[0][1], -four.matrix[0][1].clone());
        let a = &four.matrix;
        assert_eq!(four.inverse[0][2], -&a[0][2] + &a[0][1] * &a[1][2]);
        for i in 0..4 {
            assert_eq!(a[i][i], int(1));
            for j in 0..i {
                assert!(a[i][j].is_zero() && four.inverse[i][j].is_zero());
            }
        }
        // the entries agree with the integer Taylor coefficients of q_k at s0
        let w = shifted_falling_factorials(&int(1), 4);
        for (i, ki) in (1..=4).enumerate() {
            for (j, kj) in (1..=4).enumerate() {
                if ki <= kj {
                    assert_eq!(a[i][j], w[kj][ki]);
                }
            }
        }
        assert!(truncated_psi_inverse(&[2, 2], &int(1), 5).is_err());
    }
}
