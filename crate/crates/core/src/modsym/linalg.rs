//! Exact linear algebra over Q using fraction-free row reduction.
//!
//! Rows are kept as primitive integer vectors; a pivot step replaces
//! `row` by `piv * row - row[c] * pivot_row` and divides out the content.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

pub type QVec = Vec<BigRational>;

fn make_primitive(row: &mut [BigInt]) {
    let mut g = BigInt::zero();
    for x in row.iter() {
        if !x.is_zero() {
            g = g.gcd(x);
            if g.is_one() {
                break;
            }
        }
    }
    if g.is_zero() || g.is_one() {
        return;
    }
    for x in row.iter_mut() {
        *x = &*x / &g;
    }
}

/// Clears denominators of a rational row.
pub fn integer_row(row: &[BigRational]) -> Vec<BigInt> {
    let mut l = BigInt::one();
    for x in row {
        l = l.lcm(x.denom());
    }
    let mut out: Vec<BigInt> = row.iter().map(|x| (x * BigRational::from_integer(l.clone())).to_integer()).collect();
    make_primitive(&mut out);
    out
}

/// Reduced echelon form: every pivot column is zero outside its pivot row.
#[derive(Clone, Debug)]
pub struct Echelon {
    pub rows: Vec<Vec<BigInt>>,
    pub pivots: Vec<usize>,
    pub ncols: usize,
}

impl Echelon {
    pub fn new(mut rows: Vec<Vec<BigInt>>, ncols: usize) -> Echelon {
        rows.retain(|r| r.iter().any(|x| !x.is_zero()));
        for r in rows.iter_mut() {
            make_primitive(r);
        }
        let mut pivots = Vec::new();
        let mut rank = 0;
        for col in 0..ncols {
            if rank == rows.len() {
                break;
            }
            // smallest nonzero entry as pivot keeps the numbers small
            let sel = (rank..rows.len())
                .filter(|&i| !rows[i][col].is_zero())
                .min_by(|&a, &b| rows[a][col].abs().cmp(&rows[b][col].abs()));
            let Some(sel) = sel else { continue };
            rows.swap(rank, sel);
            let pivot_row = rows[rank].clone();
            let pv = pivot_row[col].clone();
            for i in 0..rows.len() {
                if i == rank || rows[i][col].is_zero() {
                    continue;
                }
                let f = rows[i][col].clone();
                let g = pv.gcd(&f);
                let (m1, m2) = (&pv / &g, &f / &g);
                for (x, y) in rows[i].iter_mut().zip(pivot_row.iter()) {
                    *x = &*x * &m1 - y * &m2;
                }
                make_primitive(&mut rows[i]);
            }
            pivots.push(col);
            rank += 1;
        }
        rows.truncate(rank);
        for (r, &c) in rows.iter_mut().zip(pivots.iter()) {
            if r[c].is_negative() {
                for x in r.iter_mut() {
                    *x = -&*x;
                }
            }
        }
        Echelon { rows, pivots, ncols }
    }

    pub fn rank(&self) -> usize {
        self.pivots.len()
    }

    pub fn free_columns(&self) -> Vec<usize> {
        let mut is_pivot = vec![false; self.ncols];
        for &c in &self.pivots {
            is_pivot[c] = true;
        }
        (0..self.ncols).filter(|&c| !is_pivot[c]).collect()
    }

    /// Basis of `{x : A x = 0}`, one vector per free column.
    pub fn kernel(&self) -> Vec<QVec> {
        let free = self.free_columns();
        free.iter()
            .map(|&f| {
                let mut v = vec![BigRational::zero(); self.ncols];
                v[f] = BigRational::one();
                for (r, &c) in self.rows.iter().zip(self.pivots.iter()) {
                    if !r[f].is_zero() {
                        v[c] = -BigRational::new(r[f].clone(), r[c].clone());
                    }
                }
                v
            })
            .collect()
    }
}

pub fn kernel_of_rows(rows: &[QVec], ncols: usize) -> Vec<QVec> {
    let int_rows = rows.iter().map(|r| integer_row(r)).collect();
    Echelon::new(int_rows, ncols).kernel()
}

pub fn rank_of_rows(rows: &[QVec], ncols: usize) -> usize {
    let int_rows = rows.iter().map(|r| integer_row(r)).collect();
    Echelon::new(int_rows, ncols).rank()
}

/// Dense rational square matrix helpers (row-major).
pub type QMatrix = Vec<QVec>;

pub fn identity(n: usize) -> QMatrix {
    (0..n)
        .map(|i| (0..n).map(|j| if i == j { BigRational::one() } else { BigRational::zero() }).collect())
        .collect()
}

pub fn mat_mul(a: &QMatrix, b: &QMatrix) -> QMatrix {
    let n = a.len();
    let m = b.first().map_or(0, Vec::len);
    let k = b.len();
    let mut out = vec![vec![BigRational::zero(); m]; n];
    for i in 0..n {
        for l in 0..k {
            if a[i][l].is_zero() {
                continue;
            }
            for j in 0..m {
                if !b[l][j].is_zero() {
                    out[i][j] += &a[i][l] * &b[l][j];
                }
            }
        }
    }
    out
}

pub fn transpose(a: &QMatrix) -> QMatrix {
    let n = a.len();
    let m = a.first().map_or(0, Vec::len);
    (0..m).map(|j| (0..n).map(|i| a[i][j].clone()).collect()).collect()
}

/// Coordinates of `v` in the span of `basis` (vectors), if it lies there.
pub fn coordinates(basis: &[QVec], v: &QVec) -> Option<QVec> {
    let k = basis.len();
    let n = v.len();
    // solve sum_i x_i basis_i = v: augmented columns [basis | -v], kernel with last coord 1
    let rows: Vec<QVec> = (0..n)
        .map(|r| {
            let mut row: QVec = basis.iter().map(|b| b[r].clone()).collect();
            row.push(-v[r].clone());
            row
        })
        .collect();
    let ker = kernel_of_rows(&rows, k + 1);
    let sol = ker.into_iter().find(|x| !x[k].is_zero())?;
    let last = sol[k].clone();
    Some(sol[..k].iter().map(|x| x / &last).collect())
}

/// Inverse of a square matrix by Gauss-Jordan, `None` if singular.
pub fn inverse(a: &QMatrix) -> Option<QMatrix> {
    let n = a.len();
    let mut m: Vec<QVec> = a
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let mut row = r.clone();
            row.extend((0..n).map(|j| if i == j { BigRational::one() } else { BigRational::zero() }));
            row
        })
        .collect();
    for col in 0..n {
        let sel = (col..n).find(|&i| !m[i][col].is_zero())?;
        m.swap(col, sel);
        let pv = m[col][col].clone();
        for x in m[col].iter_mut() {
            *x = &*x / &pv;
        }
        let prow = m[col].clone();
        for i in 0..n {
            if i != col && !m[i][col].is_zero() {
                let f = m[i][col].clone();
                for (x, y) in m[i].iter_mut().zip(prow.iter()) {
                    *x -= &f * y;
                }
            }
        }
    }
    Some(m.into_iter().map(|r| r[n..].to_vec()).collect())
}
