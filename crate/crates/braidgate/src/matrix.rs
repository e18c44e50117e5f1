//! Dense matrices over a square-root tower.
//!
//! Everything here is exact: multiplication, inversion, and equality are
//! all decided in the tower, never through a floating-point detour.  The
//! matrices involved are small (fusion blocks and braid generators), so a
//! plain dense representation with Gauss-Jordan inversion is the right
//! tool; there is no pivoting strategy beyond "find an invertible entry",
//! because exactness makes numerical stability a non-issue.

use std::hash::{Hash, Hasher};
use std::sync::Arc;

use crate::tower::{TowerContext, TowerNumber};

/// A dense `rows x cols` matrix with entries in one tower.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TowerMatrix {
    ctx: Arc<TowerContext>,
    rows: usize,
    cols: usize,
    data: Vec<TowerNumber>,
}

impl Hash for TowerMatrix {
    fn hash<H: Hasher>(&self, state: &mut H) {
        // The context is deliberately not hashed, mirroring `TowerNumber`:
        // matrices compared for equality always live in one tower.
        self.rows.hash(state);
        self.cols.hash(state);
        self.data.hash(state);
    }
}

impl TowerMatrix {
    /// The zero matrix.
    pub fn zero(ctx: &Arc<TowerContext>, rows: usize, cols: usize) -> Self {
        let data = vec![TowerNumber::zero(ctx); rows * cols];
        TowerMatrix {
            ctx: Arc::clone(ctx),
            rows,
            cols,
            data,
        }
    }

    /// The `n x n` identity.
    pub fn identity(ctx: &Arc<TowerContext>, n: usize) -> Self {
        let mut m = TowerMatrix::zero(ctx, n, n);
        for i in 0..n {
            m.set(i, i, TowerNumber::one(ctx));
        }
        m
    }

    /// Builds a matrix entry by entry from a closure.
    pub fn from_fn(
        ctx: &Arc<TowerContext>,
        rows: usize,
        cols: usize,
        mut entry: impl FnMut(usize, usize) -> TowerNumber,
    ) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(entry(i, j));
            }
        }
        TowerMatrix {
            ctx: Arc::clone(ctx),
            rows,
            cols,
            data,
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn context(&self) -> &Arc<TowerContext> {
        &self.ctx
    }

    pub fn at(&self, i: usize, j: usize) -> &TowerNumber {
        assert!(i < self.rows && j < self.cols, "matrix index out of range");
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: TowerNumber) {
        assert!(i < self.rows && j < self.cols, "matrix index out of range");
        self.data[i * self.cols + j] = v;
    }

    /// Entrywise sum; dimensions must match.
    pub fn add(&self, rhs: &Self) -> Self {
        assert_eq!(
            (self.rows, self.cols),
            (rhs.rows, rhs.cols),
            "matrix dimensions do not match"
        );
        let data = self
            .data
            .iter()
            .zip(&rhs.data)
            .map(|(a, b)| a.add(b))
            .collect();
        TowerMatrix {
            ctx: Arc::clone(&self.ctx),
            rows: self.rows,
            cols: self.cols,
            data,
        }
    }

    /// Matrix product; inner dimensions must match.
    pub fn mul(&self, rhs: &Self) -> Self {
        assert_eq!(
            self.cols, rhs.rows,
            "matrix dimensions do not match for multiplication"
        );
        let mut out = TowerMatrix::zero(&self.ctx, self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.at(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..rhs.cols {
                    let b = rhs.at(k, j);
                    if b.is_zero() {
                        continue;
                    }
                    let cur = out.at(i, j).add(&a.mul(b));
                    out.set(i, j, cur);
                }
            }
        }
        out
    }

    /// Scales every entry by `c`.
    pub fn scale(&self, c: &TowerNumber) -> Self {
        let data = self.data.iter().map(|v| v.mul(c)).collect();
        TowerMatrix {
            ctx: Arc::clone(&self.ctx),
            rows: self.rows,
            cols: self.cols,
            data,
        }
    }

    pub fn transpose(&self) -> Self {
        TowerMatrix::from_fn(&self.ctx, self.cols, self.rows, |i, j| {
            self.at(j, i).clone()
        })
    }

    /// Sum of the diagonal entries (the matrix must be square).
    pub fn trace(&self) -> TowerNumber {
        assert_eq!(self.rows, self.cols, "trace of a non-square matrix");
        let mut t = TowerNumber::zero(&self.ctx);
        for i in 0..self.rows {
            t = t.add(self.at(i, i));
        }
        t
    }

    pub fn is_identity(&self) -> bool {
        if self.rows != self.cols {
            return false;
        }
        for i in 0..self.rows {
            for j in 0..self.cols {
                let e = self.at(i, j);
                if i == j {
                    if !e.is_one() {
                        return false;
                    }
                } else if !e.is_zero() {
                    return false;
                }
            }
        }
        true
    }

    /// Exact inverse by Gauss-Jordan elimination, or `None` when the matrix
    /// is singular.  Any row with an invertible entry in the pivot column
    /// may serve as the pivot; the first one found is used.
    pub fn inverse(&self) -> Option<Self> {
        assert_eq!(self.rows, self.cols, "inverse of a non-square matrix");
        let n = self.rows;
        // Augmented rows [A | I], eliminated in place.
        let mut aug: Vec<Vec<TowerNumber>> = (0..n)
            .map(|i| {
                let mut row: Vec<TowerNumber> =
                    (0..n).map(|j| self.at(i, j).clone()).collect();
                for j in 0..n {
                    row.push(if i == j {
                        TowerNumber::one(&self.ctx)
                    } else {
                        TowerNumber::zero(&self.ctx)
                    });
                }
                row
            })
            .collect();
        for col in 0..n {
            // Find a pivot whose entry actually inverts.
            let mut pivot = None;
            for (r, row) in aug.iter().enumerate().skip(col) {
                if row[col].is_zero() {
                    continue;
                }
                if let Ok(inv) = row[col].inv() {
                    pivot = Some((r, inv));
                    break;
                }
            }
            let (r, inv) = pivot?;
            aug.swap(col, r);
            for v in aug[col].iter_mut() {
                *v = v.mul(&inv);
            }
            for r in 0..n {
                if r == col || aug[r][col].is_zero() {
                    continue;
                }
                let factor = aug[r][col].clone();
                for j in 0..2 * n {
                    let delta = factor.mul(&aug[col][j]);
                    aug[r][j] = aug[r][j].sub(&delta);
                }
            }
        }
        let mut out = TowerMatrix::zero(&self.ctx, n, n);
        for i in 0..n {
            for j in 0..n {
                out.set(i, j, aug[i][n + j].clone());
            }
        }
        Some(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cyclo::CycloNumber;
    use num_bigint::BigInt;
    use num_rational::BigRational;

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn identity_is_neutral() {
        let ctx = TowerContext::base(4);
        let i = TowerNumber::from_cyclo(&ctx, CycloNumber::zeta_pow(4, 1));
        let m = TowerMatrix::from_fn(&ctx, 2, 2, |r, c| {
            if r == 0 && c == 1 {
                i.clone()
            } else if r == c {
                TowerNumber::one(&ctx)
            } else {
                TowerNumber::zero(&ctx)
            }
        });
        let e = TowerMatrix::identity(&ctx, 2);
        assert_eq!(m.mul(&e), m);
        assert_eq!(e.mul(&m), m);
        assert!(e.is_identity());
        assert!(!m.is_identity());
    }

    #[test]
    fn unit_upper_triangular_inverse() {
        let ctx = TowerContext::base(4);
        let i = TowerNumber::from_cyclo(&ctx, CycloNumber::zeta_pow(4, 1));
        let mut m = TowerMatrix::identity(&ctx, 2);
        m.set(0, 1, i.clone());
        let inv = m.inverse().expect("unit triangular matrices invert");
        assert!(m.mul(&inv).is_identity());
        assert_eq!(inv.at(0, 1), &i.neg());
    }

    #[test]
    fn permutation_needs_a_row_swap() {
        let ctx = TowerContext::base(4);
        let mut m = TowerMatrix::zero(&ctx, 2, 2);
        m.set(0, 1, TowerNumber::one(&ctx));
        m.set(1, 0, TowerNumber::one(&ctx));
        let inv = m.inverse().expect("permutations invert");
        assert_eq!(inv, m);
        assert!(m.mul(&inv).is_identity());
    }

    #[test]
    fn singular_matrix_has_no_inverse() {
        let ctx = TowerContext::base(4);
        let m = TowerMatrix::from_fn(&ctx, 2, 2, |_, _| TowerNumber::one(&ctx));
        assert!(m.inverse().is_none());
    }

    #[test]
    fn radical_entries_invert_exactly() {
        let base = TowerContext::base(4);
        let two = TowerNumber::from_rational(&base, rat(2, 1));
        let (ctx, sqrt2) = base.with_radical(&two).expect("2 is a unit");
        // [[sqrt2, 1], [1, sqrt2]] has determinant 1.
        let m = TowerMatrix::from_fn(&ctx, 2, 2, |r, c| {
            if r == c {
                sqrt2.clone()
            } else {
                TowerNumber::one(&ctx)
            }
        });
        let inv = m.inverse().expect("determinant is 1");
        assert!(m.mul(&inv).is_identity());
        assert!(inv.mul(&m).is_identity());
        assert_eq!(inv.at(0, 0), &sqrt2);
        assert_eq!(inv.at(0, 1), &TowerNumber::one(&ctx).neg());
    }

    #[test]
    fn transpose_trace_and_scale() {
        let ctx = TowerContext::base(4);
        let m = TowerMatrix::from_fn(&ctx, 2, 3, |r, c| {
            TowerNumber::from_rational(&ctx, rat((3 * r + c) as i64, 1))
        });
        let t = m.transpose();
        assert_eq!(t.rows(), 3);
        assert_eq!(t.cols(), 2);
        assert_eq!(t.at(2, 1), m.at(1, 2));
        let square = m.mul(&t);
        let tr = square.trace();
        // Rows (0,1,2) and (3,4,5): trace of M M^T is 5 + 50.
        assert_eq!(tr, TowerNumber::from_rational(&ctx, rat(55, 1)));
        let doubled = square.scale(&TowerNumber::from_rational(&ctx, rat(2, 1)));
        assert_eq!(doubled.trace(), TowerNumber::from_rational(&ctx, rat(110, 1)));
    }
}
