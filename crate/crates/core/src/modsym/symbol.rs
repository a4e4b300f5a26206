use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::linalg::{integer_row, kernel_of_rows, QVec};
use super::p1::P1Index;
use super::space::{heilbronn_merel, lift_to_sl2z, ModularSymbolSpace};
use super::ModsymError;

/// Normalized weight-2 plus or minus eigensymbol of a newform.
///
/// `values[i]` is the value on the Manin symbol of the i-th P^1
/// representative. Values are integers with gcd 1 and the first nonzero one
/// positive.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EigenSymbol {
    pub level: u64,
    pub sign: i8,
    pub values: Vec<BigRational>,
    pub eigenvalues: BTreeMap<u64, i64>,
    pub fricke_sign: i8,
    lookup: SymbolLookup,
}

#[derive(Clone, Debug, PartialEq, Eq)]
struct SymbolLookup {
    level: u64,
    index: Vec<u32>,
}

impl SymbolLookup {
    fn new(p1: &P1Index) -> Self {
        let n = p1.level();
        let mut index = vec![u32::MAX; (n * n) as usize];
        for c in 0..n {
            for d in 0..n {
                if let Some(i) = p1.index(c as i64, d as i64) {
                    index[(c * n + d) as usize] = i as u32;
                }
            }
        }
        SymbolLookup { level: n, index }
    }

    fn get(&self, c: &BigInt, d: &BigInt) -> usize {
        let n = BigInt::from(self.level);
        let c = u64::try_from(c.mod_floor(&n)).unwrap();
        let d = u64::try_from(d.mod_floor(&n)).unwrap();
        let i = self.index[(c * self.level + d) as usize];
        debug_assert!(i != u32::MAX, "non-primitive pair in unimodular path");
        i as usize
    }
}

/// Continued-fraction variant used to split `{oo, r}` into unimodular steps.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ContinuedFraction {
    Floor,
    NearestInteger,
}

/// Convergents `p_j / q_j` of `r`, ending at `r`, with `q_j >= 0` and
/// consecutive pairs unimodular (starting from `1/0`).
pub fn convergents(r: &BigRational, variant: ContinuedFraction) -> Vec<(BigInt, BigInt)> {
    let mut out = Vec::new();
    let (mut a, mut b) = (r.numer().clone(), r.denom().clone());
    let (mut p_prev, mut q_prev) = (BigInt::one(), BigInt::zero());
    let (mut p_pp, mut q_pp) = (BigInt::zero(), BigInt::one());
    let mut eps = BigInt::one();
    loop {
        let (mut quo, mut rem) = a.div_mod_floor(&b);
        if variant == ContinuedFraction::NearestInteger && BigInt::from(2) * &rem > b {
            quo += 1;
            rem -= &b;
        }
        // x = quo + rem / b, next partial quotient uses b / |rem| with sign
        let p = &quo * &p_prev + &eps * &p_pp;
        let q = &quo * &q_prev + &eps * &q_pp;
        let (p, q) = if q.is_negative() { (-p, -q) } else { (p, q) };
        out.push((p.clone(), q.clone()));
        if rem.is_zero() {
            break;
        }
        eps = if rem.is_negative() { -BigInt::one() } else { BigInt::one() };
        p_pp = std::mem::replace(&mut p_prev, p);
        q_pp = std::mem::replace(&mut q_prev, q);
        a = b;
        b = rem.abs();
    }
    out
}

impl EigenSymbol {
    pub(crate) fn from_values(
        p1: &P1Index,
        sign: i8,
        values: Vec<BigRational>,
        eigenvalues: BTreeMap<u64, i64>,
    ) -> Self {
        let mut s = EigenSymbol {
            level: p1.level(),
            sign,
            values,
            eigenvalues,
            fricke_sign: 0,
            lookup: SymbolLookup::new(p1),
        };
        s.fricke_sign = s.compute_fricke().unwrap_or(0);
        s
    }

    /// The symbol multiplied by a rational constant (for synthetic tests).
    pub fn scaled(&self, factor: &BigRational) -> Self {
        let mut s = self.clone();
        for v in s.values.iter_mut() {
            *v = &*v * factor;
        }
        s
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(Zero::is_zero)
    }

    /// Value on the Manin symbol `(c : d)`.
    pub fn manin_value(&self, c: &BigInt, d: &BigInt) -> &BigRational {
        &self.values[self.lookup.get(c, d)]
    }

    /// Value on the path `{oo, r}` as a sum over unimodular steps.
    fn from_infinity(&self, r: &BigRational, variant: ContinuedFraction) -> BigRational {
        let mut total = BigRational::zero();
        let (mut pb, mut qb) = (BigInt::one(), BigInt::zero());
        for (pa, qa) in convergents(r, variant) {
            // {pb/qb, pa/qa} = g{0, oo} with bottom row (det * qa, qb)
            let det = &pa * &qb - &pb * &qa;
            total += self.manin_value(&(&det * &qa), &qb);
            pb = pa;
            qb = qa;
        }
        total
    }

    /// `lambda(r)`: the symbol on the path `{r, oo}`.
    pub fn eval_path(&self, r: &BigRational) -> BigRational {
        -self.from_infinity(r, ContinuedFraction::Floor)
    }

    pub fn eval_path_with(&self, r: &BigRational, variant: ContinuedFraction) -> BigRational {
        -self.from_infinity(r, variant)
    }

    /// Value on `{x, y}` where `None` stands for the cusp at infinity.
    pub fn eval_between(&self, x: Option<&BigRational>, y: Option<&BigRational>) -> BigRational {
        let lam = |z: Option<&BigRational>| z.map_or_else(BigRational::zero, |r| self.eval_path(r));
        lam(x) - lam(y)
    }

    /// Image of a cusp `a/c` under `z -> -1/(N z)`; `None` is infinity.
    fn fricke_image(&self, a: i64, c: i64) -> Option<BigRational> {
        if a == 0 {
            return None;
        }
        if c == 0 {
            return Some(BigRational::zero());
        }
        Some(BigRational::new(BigInt::from(-c), BigInt::from(self.level as i64 * a)))
    }

    fn compute_fricke(&self) -> Result<i8, ModsymError> {
        if self.is_zero() {
            return Err(ModsymError::NotFrickeEigen);
        }
        let n = self.level;
        let p1 = P1Index::new(n);
        let mut w: Option<BigRational> = None;
        for (i, &(c, d)) in p1.representatives().iter().enumerate() {
            let [a, b, c1, d1] = lift_to_sl2z(c, d, n);
            // W_N {b/d, a/c} = {W(b/d), W(a/c)}
            let x = self.fricke_image(b, d1);
            let y = self.fricke_image(a, c1);
            let img = self.eval_between(x.as_ref(), y.as_ref());
            let v = &self.values[i];
            if v.is_zero() {
                if !img.is_zero() {
                    return Err(ModsymError::NotFrickeEigen);
                }
                continue;
            }
            let ratio = img / v;
            match &w {
                None => w = Some(ratio),
                Some(r) if *r != ratio => return Err(ModsymError::NotFrickeEigen),
                _ => {}
            }
        }
        match w {
            Some(r) if r.is_one() => Ok(1),
            Some(r) if r == -BigRational::one() => Ok(-1),
            _ => Err(ModsymError::NotFrickeEigen),
        }
    }

    /// Eigenvalue of W_N acting through `(0, -1; N, 0)` on paths.
    pub fn fricke_sign(&self) -> Result<i8, ModsymError> {
        self.compute_fricke()
    }

    /// Least common denominator of all stored values.
    pub fn denominator(&self) -> BigInt {
        self.values.iter().fold(BigInt::one(), |l, v| l.lcm(v.denom()))
    }

    /// Eigenvalue of `T_q` for a prime `q` not dividing the level, read off
    /// as `phi(T_q x) / phi(x)` on a Manin symbol `x` with `phi(x) != 0`.
    pub fn hecke_eigenvalue(&self, q: u64) -> Result<i64, ModsymError> {
        if !crate::padics::is_prime(q) {
            return Err(ModsymError::NotPrime(q));
        }
        if self.level % q == 0 {
            return Err(ModsymError::PrimeDividesLevel(q, self.level));
        }
        let n = self.level as i64;
        let (c, d) = (0..n)
            .flat_map(|c| (0..n).map(move |d| (c, d)))
            .find(|&(c, d)| {
                c.gcd(&d).gcd(&n) == 1 && !self.manin_value(&BigInt::from(c), &BigInt::from(d)).is_zero()
            })
            .ok_or(ModsymError::EmptyEigenspace)?;
        let x = self.manin_value(&BigInt::from(c), &BigInt::from(d)).clone();
        let image: BigRational = heilbronn_merel(q as i64)
            .iter()
            .map(|&[a, b, cc, dd]| self.manin_value(&BigInt::from(c * a + d * cc), &BigInt::from(c * b + d * dd)))
            .sum();
        let ratio = image / x;
        if !ratio.is_integer() {
            return Err(ModsymError::NotInvariant);
        }
        ratio.to_integer().try_into().map_err(|_| ModsymError::NotInvariant)
    }
}

/// Cuts out the 1-dimensional eigenspace for `eigenvalues` in the `sign` part
/// of the dual space and returns its primitive integral generator.
pub fn eigensymbol(
    space: &ModularSymbolSpace,
    eigenvalues: &BTreeMap<u64, i64>,
    sign: i8,
) -> Result<EigenSymbol, ModsymError> {
    if sign != 1 && sign != -1 {
        return Err(ModsymError::BadSign(sign));
    }
    let dim = space.dimension();
    // functionals phi with phi o T = a phi: rows of (T^t - a) acting on phi
    let mut rows: Vec<QVec> = Vec::new();
    let mut push_constraints = |m: &Vec<QVec>, lambda: BigRational| {
        for j in 0..dim {
            let mut row: QVec = (0..dim).map(|i| m[i][j].clone()).collect();
            row[j] -= &lambda;
            rows.push(row);
        }
    };
    for (&q, &a) in eigenvalues {
        let t = space.hecke_matrix_full(q)?;
        push_constraints(&t, BigRational::from_integer(BigInt::from(a)));
    }
    push_constraints(&space.star_matrix(), BigRational::from_integer(BigInt::from(sign)));
    let ker = kernel_of_rows(&rows, dim);
    match ker.len() {
        0 => return Err(ModsymError::EmptyEigenspace),
        1 => {}
        d => return Err(ModsymError::EigenspaceDimension(d)),
    }
    let phi = &ker[0];
    let n = space.p1().len();
    let raw: QVec = (0..n)
        .map(|i| space.image_of_index(i).iter().zip(phi.iter()).map(|(a, b)| a * b).sum())
        .collect();
    let mut ints = integer_row(&raw);
    if let Some(first) = ints.iter().find(|x| !x.is_zero()) {
        if first.is_negative() {
            for x in ints.iter_mut() {
                *x = -&*x;
            }
        }
    }
    let values = ints.into_iter().map(BigRational::from_integer).collect();
    Ok(EigenSymbol::from_values(space.p1(), sign, values, eigenvalues.clone()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(a: i64, b: i64) -> BigRational {
        BigRational::new(BigInt::from(a), BigInt::from(b))
    }

    fn sym(n: u64, ev: &[(u64, i64)], sign: i8) -> EigenSymbol {
        let s = ModularSymbolSpace::new(n).unwrap();
        eigensymbol(&s, &ev.iter().copied().collect(), sign).unwrap()
    }

    #[test]
    fn convergents_end_at_r_and_are_unimodular() {
        for variant in [ContinuedFraction::Floor, ContinuedFraction::NearestInteger] {
            for (a, b) in [(7, 25), (-13, 5), (0, 1), (5, 1), (355, 113), (-1, 2)] {
                let cs = convergents(&r(a, b), variant);
                let last = cs.last().unwrap();
                assert_eq!(r(a, b), BigRational::new(last.0.clone(), last.1.clone()));
                let mut prev = (BigInt::one(), BigInt::zero());
                for (p, q) in cs {
                    let det = &p * &prev.1 - &prev.0 * &q;
                    assert!(det.abs().is_one(), "{a}/{b}");
                    prev = (p, q);
                }
            }
        }
    }

    #[test]
    fn level_11_plus_symbol() {
        let s = sym(11, &[(2, -2), (3, -1)], 1);
        assert!(!s.eval_path(&r(0, 1)).is_zero());
        assert_eq!(s.fricke_sign, -1);
        for (a, b) in [(1, 3), (2, 7), (-5, 12), (13, 25)] {
            let x = r(a, b);
            assert_eq!(s.eval_path(&x), s.eval_path(&(&x + BigRational::one())));
            assert_eq!(s.eval_path(&x), s.eval_path(&-x.clone()));
            assert_eq!(s.eval_between(Some(&x), None) + s.eval_between(None, Some(&x)), BigRational::zero());
        }
    }

    #[test]
    fn level_11_minus_symbol_is_odd() {
        let s = sym(11, &[(2, -2)], -1);
        assert!(s.eval_path(&r(0, 1)).is_zero());
        let x = r(2, 5);
        assert_eq!(s.eval_path(&x), -s.eval_path(&-x.clone()));
    }

    #[test]
    fn level_37_rank_one() {
        let s = sym(37, &[(2, -2), (3, -3)], 1);
        assert!(s.eval_path(&r(0, 1)).is_zero());
        assert_eq!(s.fricke_sign, 1);
    }

    #[test]
    fn eigenspace_errors() {
        let s = ModularSymbolSpace::new(11).unwrap();
        let bad: BTreeMap<u64, i64> = [(2, 0)].into_iter().collect();
        assert_eq!(eigensymbol(&s, &bad, 1), Err(ModsymError::EmptyEigenspace));
        let none = BTreeMap::new();
        assert!(matches!(eigensymbol(&s, &none, 1), Err(ModsymError::EigenspaceDimension(_))));
    }

    #[test]
    fn hecke_relation_t5_level_11() {
        let s = sym(11, &[(2, -2), (3, -1)], 1);
        for a in 1..5 {
            let lhs: BigRational = (0..5).map(|b| s.eval_path(&r(a + 5 * b, 25))).sum::<BigRational>()
                + s.eval_path(&r(a, 1));
            assert_eq!(lhs, s.eval_path(&r(a, 5)));
        }
    }

    #[test]
    fn eigenvalues_read_off_the_symbol() {
        let s11 = sym(11, &[(2, -2), (3, -1)], 1);
        for (q, a) in [(2, -2), (5, 1), (7, -2), (13, 4), (19, 0)] {
            assert_eq!(s11.hecke_eigenvalue(q).unwrap(), a, "q = {q}");
        }
        assert_eq!(sym(11, &[(2, -2)], -1).hecke_eigenvalue(7).unwrap(), -2);
        let s37 = sym(37, &[(2, -2), (3, -3)], 1);
        assert_eq!(s37.hecke_eigenvalue(5).unwrap(), -2);
        assert_eq!(s11.hecke_eigenvalue(11), Err(ModsymError::PrimeDividesLevel(11, 11)));
    }
}
