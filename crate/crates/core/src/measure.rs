//! The cyclotomic distribution attached to an eigensymbol and an admissible
//! Hecke root:
//!
//! ```text
//! mu(D(a, p^n)) = alpha^-n ( lambda(a / p^n) - alpha^-1 lambda(a / p^(n-1)) )
//! ```
//!
//! Values are stored exactly in `Q(alpha)`; p-adic embedding only happens when
//! integrating. Riemann sums at level `m` carry the error floor
//! `err(m) = m (1 - v(alpha)) - v(alpha) - c0`.

use std::fmt::Write as _;

use num_bigint::BigInt;
use num_rational::{BigRational, Ratio};
use num_traits::{One, Zero};
use thiserror::Error;

use crate::modsym::EigenSymbol;
use crate::padics::{
    angle_part, hecke_root, is_supersingular, AlphaElement, HeckeContext, PadicError, PadicNumber, Qp, RootChoice,
    Valuation,
};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MeasureError {
    #[error("p = {0} divides the level N = {1}")]
    PrimeDividesLevel(u64, u64),
    #[error("root `{0}` is not an admissible root for a_p = {1}")]
    Inadmissible(String, i64),
    #[error("additivity fails at level {level}, residue {residue}")]
    Additivity { level: u32, residue: u64 },
    #[error("level {0} exceeds the table depth {1}")]
    LevelTooDeep(u32, u32),
    #[error("function has {0} values, expected {1}")]
    FunctionShape(usize, usize),
    #[error("supersingular table: divisibility mod p is meaningless")]
    Supersingular,
    #[error("malformed table: {0}")]
    Malformed(String),
    #[error("no data")]
    NoData,
    #[error(transparent)]
    Padic(#[from] PadicError),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum MeasureSource {
    Native,
    External { weight: u32, moment: u32 },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MeasureTable {
    pub level: u64,
    pub p: u64,
    pub ctx: HeckeContext,
    pub root: RootChoice,
    pub source: MeasureSource,
    pub n_max: u32,
    /// `-min v(mu(D(a, p)))`, clamped below at 0.
    pub c0: Valuation,
    /// `levels[n - 1][a]` for `0 <= a < p^n`; entries with `p | a` are zero.
    levels: Vec<Vec<AlphaElement>>,
    /// `lambda(a / p^n)` for `0 <= n <= n_max`, kept for native tables.
    integrals: Option<Vec<Vec<BigRational>>>,
}

fn ppow(p: u64, n: u32) -> u64 {
    p.pow(n)
}

/// Validates that `root` is admissible for `ctx`, returning `v(alpha)`.
pub fn alpha_valuation(ctx: &HeckeContext, root: RootChoice) -> Result<Valuation, MeasureError> {
    let ss = is_supersingular(ctx.ap, ctx.p);
    match (root, ss) {
        (RootChoice::Unit, false) => Ok(Ratio::zero()),
        (RootChoice::Plus | RootChoice::Minus, true) if ctx.ap == 0 => {
            Ok(Ratio::new((ctx.weight - 1) as i64, 2))
        }
        _ => Err(MeasureError::Inadmissible(root.name().to_string(), ctx.ap)),
    }
}

impl MeasureTable {
    /// Builds levels `1..=n_max` from a weight-2 eigensymbol.
    pub fn build(symbol: &EigenSymbol, p: u64, ap: i64, root: RootChoice, n_max: u32) -> Result<Self, MeasureError> {
        if symbol.level % p == 0 {
            return Err(MeasureError::PrimeDividesLevel(p, symbol.level));
        }
        if n_max < 1 {
            return Err(MeasureError::NoData);
        }
        let ctx = HeckeContext::new(ap, 2, p);
        hecke_root(&ctx, root, 1)?;
        alpha_valuation(&ctx, root)?;
        let lambda = |a: u64, n: u32| symbol.eval_path(&BigRational::new(BigInt::from(a), BigInt::from(ppow(p, n))));
        // lambdas[n][a] = lambda(a / p^n), 0 <= a < p^n
        let lambdas: Vec<Vec<BigRational>> = (0..=n_max).map(|n| (0..ppow(p, n)).map(|a| lambda(a, n)).collect()).collect();
        let table = Self::from_lambdas(symbol.level, ctx, root, MeasureSource::Native, &lambdas)?;
        Ok(table)
    }

    /// Builds the table from `lambda(a / p^n)` for `0 <= n <= n_max`.
    pub fn from_lambdas(
        level: u64,
        ctx: HeckeContext,
        root: RootChoice,
        source: MeasureSource,
        lambdas: &[Vec<BigRational>],
    ) -> Result<Self, MeasureError> {
        let p = ctx.p;
        let n_max = lambdas.len() as u32 - 1;
        let alpha_inv = AlphaElement::alpha().inverse(&ctx)?;
        let mut scale = AlphaElement::one();
        let mut levels = Vec::with_capacity(n_max as usize);
        for n in 1..=n_max {
            scale = scale.mul(&alpha_inv, &ctx);
            let prev_mod = ppow(p, n - 1);
            let row: Vec<AlphaElement> = (0..ppow(p, n))
                .map(|a| {
                    if a % p == 0 {
                        return AlphaElement::zero();
                    }
                    let cur = AlphaElement::rational(lambdas[n as usize][a as usize].clone());
                    let prev = AlphaElement::rational(lambdas[(n - 1) as usize][(a % prev_mod) as usize].clone());
                    cur.sub(&prev.mul(&alpha_inv, &ctx)).mul(&scale, &ctx)
                })
                .collect();
            levels.push(row);
        }
        let mut table = Self::from_levels(level, ctx, root, source, levels)?;
        table.integrals = Some(lambdas.to_vec());
        Ok(table)
    }

    fn from_levels(
        level: u64,
        ctx: HeckeContext,
        root: RootChoice,
        source: MeasureSource,
        levels: Vec<Vec<AlphaElement>>,
    ) -> Result<Self, MeasureError> {
        if levels.is_empty() {
            return Err(MeasureError::NoData);
        }
        alpha_valuation(&ctx, root)?;
        let mut table = MeasureTable {
            level,
            p: ctx.p,
            root,
            source,
            n_max: levels.len() as u32,
            c0: Ratio::zero(),
            levels,
            integrals: None,
            ctx,
        };
        table.check_additivity()?;
        table.c0 = table.compute_c0()?;
        Ok(table)
    }

    /// Exact finite additivity at every stored level.
    pub fn check_additivity(&self) -> Result<(), MeasureError> {
        let p = self.p;
        for n in 1..self.n_max {
            let modulus = ppow(p, n);
            for a in (0..modulus).filter(|a| a % p != 0) {
                let mut sum = AlphaElement::zero();
                for b in 0..p {
                    sum = sum.add(self.value(a + b * modulus, n + 1));
                }
                if &sum != self.value(a, n) {
                    return Err(MeasureError::Additivity { level: n, residue: a });
                }
            }
        }
        Ok(())
    }

    fn compute_c0(&self) -> Result<Valuation, MeasureError> {
        let prec = 8;
        let root = self.root_at(prec + 4)?;
        let mut min: Option<Valuation> = None;
        for a in (1..self.p).filter(|a| a % self.p != 0) {
            let v = self.embed_value(a, 1, &root, prec + 4);
            if v.is_zero() {
                continue;
            }
            let val = v.valuation();
            min = Some(min.map_or(val, |m: Valuation| m.min(val)));
        }
        Ok(min.map_or(Ratio::zero(), |m| (-m).max(Ratio::zero())))
    }

    pub fn value(&self, a: u64, n: u32) -> &AlphaElement {
        let levels = &self.levels[(n - 1) as usize];
        &levels[(a % levels.len() as u64) as usize]
    }

    pub fn level_values(&self, n: u32) -> &[AlphaElement] {
        &self.levels[(n - 1) as usize]
    }

    pub fn is_ordinary(&self) -> bool {
        !is_supersingular(self.ctx.ap, self.p)
    }

    pub fn alpha_valuation(&self) -> Valuation {
        alpha_valuation(&self.ctx, self.root).expect("validated at construction")
    }

    /// The chosen Hecke root to absolute precision `prec`.
    pub fn root_at(&self, prec: i64) -> Result<PadicNumber, MeasureError> {
        Ok(hecke_root(&self.ctx, self.root, prec)?)
    }

    /// `mu(D(a, p^n))` embedded with `prec` digits of absolute precision.
    ///
    /// In the ordinary case `a + b alpha` may carry large cancelling
    /// denominators, so the root is lifted far enough to absorb `v(b)`.
    pub fn embed_value(&self, a: u64, n: u32, root: &PadicNumber, prec: i64) -> PadicNumber {
        let x = self.value(a, n);
        if x.b.is_zero() || !self.is_ordinary() {
            return x.embed(root, prec);
        }
        let vb = crate::padics::Qp::from_rational(self.p, &x.b, prec).valuation();
        let need = prec + (-vb).max(0) + 1;
        if root.precision() >= Ratio::from_integer(need) {
            x.embed(root, prec)
        } else {
            let lifted = self.root_at(need).expect("validated root");
            x.embed(&lifted, prec)
        }
    }

    /// All embedded values at level `n` (zero where `p | a`).
    pub fn embedded_level(&self, n: u32, prec: i64) -> Result<Vec<PadicNumber>, MeasureError> {
        if n > self.n_max || n == 0 {
            return Err(MeasureError::LevelTooDeep(n, self.n_max));
        }
        let len = ppow(self.p, n);
        let max_den_val = self.levels[(n - 1) as usize]
            .iter()
            .filter(|x| !x.b.is_zero())
            .map(|x| -Qp::from_rational(self.p, &x.b, 1).valuation())
            .max()
            .unwrap_or(0)
            .max(0);
        let root = self.root_at(prec + max_den_val + 2)?;
        Ok((0..len).map(|a| self.embed_value(a, n, &root, prec)).collect())
    }

    /// Riemann error floor `err(m)` for functions with Lipschitz constant 1.
    pub fn error_floor(&self, m: u32) -> Valuation {
        let va = self.alpha_valuation();
        Ratio::from_integer(m as i64) * (Ratio::one() - va) - va - self.c0
    }

    /// `sum_a f(a) mu(D(a, p^m))` for `f` given on all residues mod `p^m`.
    pub fn riemann_sum(&self, m: u32, f: &[PadicNumber], prec: i64) -> Result<PadicNumber, MeasureError> {
        let expected = ppow(self.p, m) as usize;
        if f.len() != expected {
            return Err(MeasureError::FunctionShape(f.len(), expected));
        }
        let values = self.embedded_level(m, prec)?;
        Ok(dot(self.p, f, &values, prec))
    }

    /// Total mass `mu(Z_p^*)` in `Q(alpha)`.
    pub fn total_mass(&self) -> AlphaElement {
        (1..self.p).fold(AlphaElement::zero(), |s, a| s.add(self.value(a, 1)))
    }

    pub fn units(&self, m: u32) -> impl Iterator<Item = u64> + '_ {
        (0..ppow(self.p, m)).filter(move |a| a % self.p != 0)
    }
}

pub(crate) fn dot(p: u64, f: &[PadicNumber], values: &[PadicNumber], prec: i64) -> PadicNumber {
    let mut acc = PadicNumber::zero(p, prec);
    for (x, v) in f.iter().zip(values.iter()) {
        if v.is_zero() && v.precision() >= Ratio::from_integer(prec) {
            continue;
        }
        acc = acc.add(&x.mul(v));
    }
    acc
}

/// Result of integrating a locally constant function.
#[derive(Clone, Debug)]
pub struct Integral {
    pub value: PadicNumber,
    /// Valuation guaranteed for the difference to the true integral of the
    /// analytic function this sum approximates.
    pub error_floor: Valuation,
}

/// Integrates `f` (one value per residue mod `p^m`) with the certified floor.
pub fn riemann_integral(table: &MeasureTable, m: u32, f: &[PadicNumber], prec: i64) -> Result<Integral, MeasureError> {
    if m > table.n_max {
        return Err(MeasureError::LevelTooDeep(m, table.n_max));
    }
    let value = table.riemann_sum(m, f, prec)?;
    Ok(Integral { value, error_floor: table.error_floor(m) })
}

/// Moments `m_k = int x~^k dmu` with `x~ = (<x> - 1) / p`.
#[derive(Clone, Debug)]
pub struct MomentVector {
    pub entries: Vec<PadicNumber>,
    pub level: u32,
    /// Per-entry error floor; `m_0` is the exact total mass.
    pub floors: Vec<Valuation>,
    pub alpha_valuation: Valuation,
    pub c0: Valuation,
    pub p: u64,
}

/// `x~` for each residue mod `p^m` (zero where `p | a`), to precision `prec`.
pub fn tilde_values(p: u64, m: u32, prec: i64) -> Result<Vec<Qp>, MeasureError> {
    (0..ppow(p, m))
        .map(|a| {
            if a % p == 0 {
                return Ok(Qp::zero(p, prec));
            }
            let x = Qp::from_i64(p, a as i64, prec + 1);
            let angle = angle_part(&x)?;
            Ok(angle.sub(&Qp::one(p, prec + 1)).shift(-1))
        })
        .collect()
}

pub fn moments(table: &MeasureTable, k_max: u32, m: u32) -> Result<MomentVector, MeasureError> {
    if m > table.n_max || m == 0 {
        return Err(MeasureError::LevelTooDeep(m, table.n_max));
    }
    let p = table.p;
    let err = table.error_floor(m);
    let prec = err.ceil().to_integer().max(1) + k_max as i64 / 2 + 8;
    let values = table.embedded_level(m, prec)?;
    let tildes = tilde_values(p, m, prec + 2)?;
    let mut powers: Vec<PadicNumber> = (0..values.len()).map(|_| PadicNumber::one(p, prec + 2)).collect();
    let mut entries = Vec::new();
    let mut floors = Vec::new();
    for k in 0..=k_max {
        if k > 0 {
            for (pw, t) in powers.iter_mut().zip(tildes.iter()) {
                *pw = pw.scale(t);
            }
        }
        entries.push(dot(p, &powers, &values, prec));
        floors.push(if k == 0 { Ratio::from_integer(prec) } else { err - 1 });
    }
    Ok(MomentVector { entries, level: m, floors, alpha_valuation: table.alpha_valuation(), c0: table.c0, p })
}

/// Outcome of the divisibility scan.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ModPReport {
    /// First `(n, a)` in level-then-residue order whose value is a unit.
    pub first_non_divisible: Option<(u32, u64)>,
    pub alpha_congruent_to_one: bool,
    pub levels_scanned: u32,
    /// First `(n, a)` with `lambda(a / p^n)` a p-adic unit, when the table
    /// still carries its modular integrals.
    pub first_non_divisible_integral: Option<(u32, u64)>,
}

pub fn mod_p_scan(table: &MeasureTable) -> Result<ModPReport, MeasureError> {
    if !table.is_ordinary() {
        return Err(MeasureError::Supersingular);
    }
    let root = table.root_at(4)?;
    let alpha_congruent_to_one = root.sub(&PadicNumber::one(table.p, 4)).valuation() >= Ratio::one();
    let mut first_non_divisible = None;
    'scan: for n in 1..=table.n_max {
        let vals = table.embedded_level(n, 2)?;
        for a in table.units(n) {
            if vals[a as usize].valuation() < Ratio::one() {
                first_non_divisible = Some((n, a));
                break 'scan;
            }
        }
    }
    let p = BigInt::from(table.p);
    let unit = |r: &BigRational| !r.is_zero() && (r.numer() % &p != BigInt::zero() || r.denom() % &p == BigInt::zero());
    let first_non_divisible_integral = table.integrals.as_ref().and_then(|rows| {
        (1..=table.n_max).find_map(|n| table.units(n).find(|&a| unit(&rows[n as usize][a as usize])).map(|a| (n, a)))
    });
    Ok(ModPReport { first_non_divisible, alpha_congruent_to_one, levels_scanned: table.n_max, first_non_divisible_integral })
}

pub const MEASURE_HEADER: &str = "PADICLF-MEASURE v1";

fn write_rational(out: &mut String, r: &BigRational) {
    let _ = write!(out, "{}/{}", r.numer(), r.denom());
}

/// Canonical text export.
pub fn export_table(table: &MeasureTable) -> String {
    let (k, j) = match table.source {
        MeasureSource::Native => (2, 0),
        MeasureSource::External { weight, moment } => (weight, moment),
    };
    let mut out = format!(
        "{MEASURE_HEADER}; N={}; k={}; j={}; p={}; ap={}; root={}; levels={}; c0={}\n",
        table.level,
        k,
        j,
        table.p,
        table.ctx.ap,
        table.root.name(),
        table.n_max,
        table.c0
    );
    for n in 1..=table.n_max {
        for a in table.units(n) {
            let v = table.value(a, n);
            let _ = write!(out, "{n} {a} ");
            write_rational(&mut out, &v.a);
            if !v.b.is_zero() {
                out.push_str(" +alpha* ");
                write_rational(&mut out, &v.b);
            }
            out.push('\n');
        }
    }
    out
}

fn malformed<S: Into<String>>(s: S) -> MeasureError {
    MeasureError::Malformed(s.into())
}

fn parse_rational(s: &str) -> Result<BigRational, MeasureError> {
    let (n, d) = s.split_once('/').ok_or_else(|| malformed(format!("`{s}` is not n/d")))?;
    let n: BigInt = n.parse().map_err(|_| malformed(format!("bad numerator `{n}`")))?;
    let d: BigInt = d.parse().map_err(|_| malformed(format!("bad denominator `{d}`")))?;
    if d.is_zero() {
        return Err(malformed("zero denominator"));
    }
    Ok(BigRational::new(n, d))
}

/// Parses and validates an external table.
pub fn import_table(text: &str) -> Result<MeasureTable, MeasureError> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header = lines.next().ok_or(MeasureError::NoData)?;
    let mut fields = header.split(';').map(str::trim);
    if fields.next() != Some(MEASURE_HEADER) {
        return Err(malformed("missing PADICLF-MEASURE v1 header"));
    }
    let mut kv = std::collections::BTreeMap::new();
    for f in fields.filter(|f| !f.is_empty()) {
        let (k, v) = f.split_once('=').ok_or_else(|| malformed(format!("bad header field `{f}`")))?;
        kv.insert(k.trim().to_string(), v.trim().to_string());
    }
    let get = |k: &str| kv.get(k).cloned().ok_or_else(|| malformed(format!("header lacks `{k}`")));
    let num = |k: &str| -> Result<i64, MeasureError> {
        get(k)?.parse::<i64>().map_err(|_| malformed(format!("`{k}` is not an integer")))
    };
    let level = num("N")? as u64;
    let weight = num("k")? as u32;
    let moment = num("j")? as u32;
    let p = num("p")? as u64;
    let ap = num("ap")?;
    let root = RootChoice::parse(&get("root")?).ok_or_else(|| malformed("root must be unit|plus|minus"))?;
    let n_max = num("levels")? as u32;
    let declared_c0: Valuation = get("c0")?.parse().map_err(|_| malformed("bad c0"))?;
    if n_max == 0 {
        return Err(MeasureError::NoData);
    }
    if level % p == 0 {
        return Err(MeasureError::PrimeDividesLevel(p, level));
    }
    if weight < 2 || weight % 2 != 0 || moment > weight - 2 {
        return Err(malformed(format!("weight {weight}, moment {moment} out of range")));
    }
    let ctx = HeckeContext::new(ap, weight, p);
    hecke_root(&ctx, root, 1)?;
    if n_max > 8 || p.checked_pow(n_max).is_none() {
        return Err(malformed("too many levels"));
    }
    let mut levels: Vec<Vec<Option<AlphaElement>>> = (1..=n_max).map(|n| vec![None; ppow(p, n) as usize]).collect();
    for line in lines {
        let parts: Vec<&str> = line.split_whitespace().collect();
        let (n, a, value) = match parts.as_slice() {
            [n, a, x] => (n, a, AlphaElement::rational(parse_rational(x)?)),
            [n, a, x, "+alpha*", y] => (n, a, AlphaElement { a: parse_rational(x)?, b: parse_rational(y)? }),
            _ => return Err(malformed(format!("bad line `{line}`"))),
        };
        let n: u32 = n.parse().map_err(|_| malformed(format!("bad level in `{line}`")))?;
        let a: u64 = a.parse().map_err(|_| malformed(format!("bad residue in `{line}`")))?;
        if n == 0 || n > n_max || a >= ppow(p, n) || a % p == 0 {
            return Err(malformed(format!("cell ({n}, {a}) out of range")));
        }
        levels[(n - 1) as usize][a as usize] = Some(value);
    }
    let mut filled = Vec::with_capacity(levels.len());
    for (i, row) in levels.into_iter().enumerate() {
        let n = i as u32 + 1;
        let mut out = Vec::with_capacity(row.len());
        for (a, cell) in row.into_iter().enumerate() {
            match cell {
                Some(v) => out.push(v),
                None if a as u64 % p == 0 => out.push(AlphaElement::zero()),
                None => return Err(malformed(format!("missing cell ({n}, {a})"))),
            }
        }
        filled.push(out);
    }
    let source = if weight == 2 && moment == 0 {
        MeasureSource::Native
    } else {
        MeasureSource::External { weight, moment }
    };
    let table = MeasureTable::from_levels(level, ctx, root, source, filled)?;
    if table.c0 != declared_c0 {
        return Err(malformed(format!("declared c0 = {declared_c0} but the data give {}", table.c0)));
    }
    Ok(table)
}

/// `true` if the table has every value zero.
pub fn is_zero_table(table: &MeasureTable) -> bool {
    table.levels.iter().all(|row| row.iter().all(AlphaElement::is_zero))
}

/// Smallest valuation among the nonzero level-`n` values.
pub fn min_valuation(table: &MeasureTable, n: u32, prec: i64) -> Result<Option<Valuation>, MeasureError> {
    let vals = table.embedded_level(n, prec)?;
    Ok(vals.iter().filter(|v| !v.is_zero()).map(PadicNumber::valuation).min())
}
