use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};

use super::linalg::{coordinates, kernel_of_rows, Echelon, QMatrix, QVec};
use super::p1::P1Index;
use super::ModsymError;

pub const MAX_LEVEL: u64 = 4000;

/// Weight-2 modular symbols for Gamma_0(N) presented by Manin symbols.
///
/// The quotient `M = Q^{P^1} / (two- and three-term relations)` has the
/// free columns of the reduced relation matrix as basis. Matrices are
/// row-major with column `j` holding the image of basis element `j`.
#[derive(Clone, Debug)]
pub struct ModularSymbolSpace {
    p1: P1Index,
    free: Vec<usize>,
    images: Vec<QVec>,
    cuspidal: Vec<QVec>,
    cusps: Vec<(i64, i64)>,
}

/// `[[a, b], [c, d]]` in SL_2(Z) with bottom row congruent to `(c, d)` mod N.
pub fn lift_to_sl2z(c: u64, d: u64, n: u64) -> [i64; 4] {
    if n == 1 {
        return [1, 0, 0, 1];
    }
    let c1 = if c == 0 { n as i64 } else { c as i64 };
    let mut d1 = d as i64;
    while c1.gcd(&d1) != 1 {
        d1 += n as i64;
    }
    let e = d1.extended_gcd(&c1);
    // e.x * d1 + e.y * c1 = 1, so a = e.x, b = -e.y
    [e.x, -e.y, c1, d1]
}

/// Merel's set of matrices `[[a, b], [c, d]]` with `a > b >= 0`, `d > c >= 0`
/// and determinant `n`.
pub fn heilbronn_merel(n: i64) -> Vec<[i64; 4]> {
    let mut out = Vec::new();
    for a in 1..=n {
        for d in 1..=n {
            for b in 0..a {
                for c in 0..d {
                    if a * d - b * c == n {
                        out.push([a, b, c, d]);
                    }
                }
            }
        }
    }
    out
}

fn reduce_cusp(a: i64, c: i64) -> (i64, i64) {
    if c == 0 {
        return (1, 0);
    }
    let g = a.gcd(&c);
    let (a, c) = (a / g, c / g);
    if c < 0 {
        (-a, -c)
    } else {
        (a, c)
    }
}

fn inverse_mod(a: i64, m: i64) -> i64 {
    if m <= 1 {
        return 0;
    }
    a.extended_gcd(&m).x.rem_euclid(m)
}

/// Equivalence of cusps `a1/c1`, `a2/c2` (lowest terms, `c >= 0`) under
/// Gamma_0(N): `s1 c2 = s2 c1 mod gcd(c1 c2, N)` where `a_j s_j = 1 mod c_j`.
pub fn cusps_equivalent(x: (i64, i64), y: (i64, i64), n: i64) -> bool {
    let (a1, c1) = x;
    let (a2, c2) = y;
    let s1 = if c1 == 0 { a1 } else { inverse_mod(a1, c1) };
    let s2 = if c2 == 0 { a2 } else { inverse_mod(a2, c2) };
    let m = (c1 * c2).gcd(&n);
    (s1 * c2 - s2 * c1).rem_euclid(m) == 0
}

impl ModularSymbolSpace {
    pub fn new(level: u64) -> Result<Self, ModsymError> {
        if level == 0 || level > MAX_LEVEL {
            return Err(ModsymError::LevelOutOfRange(level));
        }
        let p1 = P1Index::new(level);
        let n = p1.len();
        let mut rows: Vec<Vec<BigInt>> = Vec::new();
        let unit_row = |entries: &[usize]| {
            let mut r = vec![BigInt::zero(); n];
            for &i in entries {
                r[i] += 1;
            }
            r
        };
        for i in 0..n {
            let (c, d) = p1.rep(i);
            let (c, d) = (c as i64, d as i64);
            let s = p1.index(d, -c).expect("sigma preserves P1");
            rows.push(unit_row(&[i, s]));
            let t1 = p1.index(d, -c - d).expect("tau preserves P1");
            let (tc, td) = p1.rep(t1);
            let t2 = p1.index(td as i64, -(tc as i64) - td as i64).expect("tau preserves P1");
            rows.push(unit_row(&[i, t1, t2]));
        }
        let ech = Echelon::new(rows, n);
        let free = ech.free_columns();
        let dim = free.len();
        let mut images = vec![vec![BigRational::zero(); dim]; n];
        for (k, &f) in free.iter().enumerate() {
            images[f][k] = BigRational::one();
        }
        for (row, &pc) in ech.rows.iter().zip(ech.pivots.iter()) {
            for (k, &f) in free.iter().enumerate() {
                if !row[f].is_zero() {
                    images[pc][k] = -BigRational::new(row[f].clone(), row[pc].clone());
                }
            }
        }
        let mut space = ModularSymbolSpace { p1, free, images, cuspidal: Vec::new(), cusps: Vec::new() };
        space.cuspidal = space.compute_cuspidal();
        Ok(space)
    }

    fn cusp_index(&mut self, a: i64, c: i64) -> usize {
        let x = reduce_cusp(a, c);
        let n = self.level() as i64;
        if let Some(i) = self.cusps.iter().position(|&y| cusps_equivalent(x, y, n)) {
            return i;
        }
        self.cusps.push(x);
        self.cusps.len() - 1
    }

    fn compute_cuspidal(&mut self) -> Vec<QVec> {
        let dim = self.dimension();
        let n = self.level();
        let mut columns: Vec<Vec<(usize, i64)>> = Vec::with_capacity(dim);
        for k in 0..dim {
            let (c, d) = self.p1.rep(self.free[k]);
            let [a, b, c1, d1] = lift_to_sl2z(c, d, n);
            // g{0, oo} = {b/d, a/c}, boundary [a/c] - [b/d]
            let end = self.cusp_index(a, c1);
            let start = self.cusp_index(b, d1);
            columns.push(vec![(end, 1), (start, -1)]);
        }
        let ncusps = self.cusps.len();
        let mut rows = vec![vec![BigRational::zero(); dim]; ncusps];
        for (k, col) in columns.iter().enumerate() {
            for &(i, s) in col {
                rows[i][k] += BigRational::from_integer(BigInt::from(s));
            }
        }
        kernel_of_rows(&rows, dim)
    }

    pub fn level(&self) -> u64 {
        self.p1.level()
    }

    pub fn p1(&self) -> &P1Index {
        &self.p1
    }

    pub fn dimension(&self) -> usize {
        self.free.len()
    }

    pub fn free_generators(&self) -> &[usize] {
        &self.free
    }

    /// Cusps of X_0(N) met by the boundary map, as `(a, c)` for `a/c`.
    pub fn cusps(&self) -> &[(i64, i64)] {
        &self.cusps
    }

    pub fn cuspidal_basis(&self) -> &[QVec] {
        &self.cuspidal
    }

    /// Image in `M` of the Manin symbol `(c : d)`.
    pub fn manin_image(&self, c: i64, d: i64) -> Option<&QVec> {
        self.p1.index(c, d).map(|i| &self.images[i])
    }

    pub fn image_of_index(&self, i: usize) -> &QVec {
        &self.images[i]
    }

    fn matrix_from_action<F>(&self, act: F) -> QMatrix
    where
        F: Fn(i64, i64) -> Vec<(i64, i64, i64)>,
    {
        let dim = self.dimension();
        let mut m = vec![vec![BigRational::zero(); dim]; dim];
        for (k, &f) in self.free.iter().enumerate() {
            let (c, d) = self.p1.rep(f);
            for (coef, c2, d2) in act(c as i64, d as i64) {
                if let Some(img) = self.manin_image(c2, d2) {
                    let coef = BigRational::from_integer(BigInt::from(coef));
                    for (i, x) in img.iter().enumerate() {
                        if !x.is_zero() {
                            m[i][k] += x * &coef;
                        }
                    }
                }
            }
        }
        m
    }

    /// The star involution `(c : d) -> (-c : d)` induced by `z -> -conj(z)`.
    pub fn star_matrix(&self) -> QMatrix {
        self.matrix_from_action(|c, d| vec![(1, -c, d)])
    }

    /// T_q on the whole space M, via Merel's Heilbronn matrices.
    pub fn hecke_matrix_full(&self, q: u64) -> Result<QMatrix, ModsymError> {
        if !crate::padics::is_prime(q) {
            return Err(ModsymError::NotPrime(q));
        }
        if self.level() % q == 0 {
            return Err(ModsymError::PrimeDividesLevel(q, self.level()));
        }
        let hs = heilbronn_merel(q as i64);
        Ok(self.matrix_from_action(|c, d| {
            hs.iter().map(|&[a, b, cc, dd]| (1, c * a + d * cc, c * b + d * dd)).collect()
        }))
    }

    /// Restriction of a matrix on M to an invariant subspace with the given basis.
    pub fn restrict(&self, m: &QMatrix, basis: &[QVec]) -> Result<QMatrix, ModsymError> {
        let k = basis.len();
        let mut out = vec![vec![BigRational::zero(); k]; k];
        for (j, v) in basis.iter().enumerate() {
            let img: QVec = m
                .iter()
                .map(|row| row.iter().zip(v.iter()).map(|(a, b)| a * b).sum())
                .collect();
            let coords = coordinates(basis, &img).ok_or(ModsymError::NotInvariant)?;
            for i in 0..k {
                out[i][j] = coords[i].clone();
            }
        }
        Ok(out)
    }

    /// Matrix of T_q on the cuspidal subspace in its stored basis.
    pub fn hecke_operator(&self, q: u64) -> Result<QMatrix, ModsymError> {
        let full = self.hecke_matrix_full(q)?;
        self.restrict(&full, &self.cuspidal)
    }

    /// Basis of the cuspidal subspace on which star acts by `sign`.
    pub fn cuspidal_sign_basis(&self, sign: i8) -> Vec<QVec> {
        let star = self.star_matrix();
        let dim = self.dimension();
        let k = self.cuspidal.len();
        // sum_j x_j (star - sign) v_j = 0
        let s = BigRational::from_integer(BigInt::from(sign));
        let cols: Vec<QVec> = self
            .cuspidal
            .iter()
            .map(|v| {
                (0..dim)
                    .map(|i| {
                        let sv: BigRational = star[i].iter().zip(v.iter()).map(|(a, b)| a * b).sum();
                        sv - &s * &v[i]
                    })
                    .collect()
            })
            .collect();
        let rows: Vec<QVec> = (0..dim).map(|i| (0..k).map(|j| cols[j][i].clone()).collect()).collect();
        kernel_of_rows(&rows, k)
            .into_iter()
            .map(|x| {
                (0..dim)
                    .map(|i| x.iter().zip(self.cuspidal.iter()).map(|(a, v)| a * &v[i]).sum())
                    .collect()
            })
            .collect()
    }
}
