//! Dense matrices over a coefficient field with exact Gaussian elimination.

use std::fmt;

use thiserror::Error;

use crate::scalar::Coefficient;

#[derive(Clone, PartialEq, Error)]
pub enum LinalgError<C: Coefficient> {
    /// `residual = A·x − y` for the solution of the pivot rows; at least one entry is nonzero.
    #[error("inconsistent linear system")]
    InconsistentSystem { residual: Vec<C> },
    #[error("rank-deficient system: rank {rank} < {cols} unknowns")]
    RankDeficient { rank: usize, cols: usize },
    #[error("dimension mismatch: {0}")]
    Dimension(String),
}

impl<C: Coefficient> fmt::Debug for LinalgError<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::InconsistentSystem { residual } => {
                f.debug_struct("InconsistentSystem").field("residual", residual).finish()
            }
            Self::RankDeficient { rank, cols } => {
                f.debug_struct("RankDeficient").field("rank", rank).field("cols", cols).finish()
            }
            Self::Dimension(s) => f.debug_tuple("Dimension").field(s).finish(),
        }
    }
}

#[derive(Clone, PartialEq, Debug)]
pub struct Matrix<C> {
    rows: usize,
    cols: usize,
    data: Vec<C>,
}

impl<C: Coefficient> Matrix<C> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![C::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = C::one();
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<C>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|row| row.len() == c), "ragged matrix rows");
        Self { rows: r, cols: c, data: rows.into_iter().flatten().collect() }
    }

    /// An `r × c` matrix with explicit shape, so empty dimensions are representable.
    pub fn from_shape(rows: usize, cols: usize, data: Vec<C>) -> Self {
        assert_eq!(data.len(), rows * cols, "data length does not match shape");
        Self { rows, cols, data }
    }

    pub fn from_columns(rows: usize, columns: &[Vec<C>]) -> Self {
        let mut m = Self::zeros(rows, columns.len());
        for (j, col) in columns.iter().enumerate() {
            assert_eq!(col.len(), rows, "column length does not match row count");
            for (i, v) in col.iter().enumerate() {
                m[(i, j)] = v.clone();
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[C] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<C> {
        (0..self.rows).map(|i| self[(i, j)].clone()).collect()
    }

    pub fn to_rows(&self) -> Vec<Vec<C>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)].clone();
            }
        }
        t
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(C::is_zero)
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "matrix product dimension mismatch");
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = &other[(k, j)];
                    if !b.is_zero() {
                        out[(i, j)] = out[(i, j)].clone() + a.clone() * b.clone();
                    }
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, x: &[C]) -> Vec<C> {
        assert_eq!(self.cols, x.len(), "matrix-vector dimension mismatch");
        (0..self.rows)
            .map(|i| {
                self.row(i)
                    .iter()
                    .zip(x)
                    .fold(C::zero(), |acc, (a, b)| acc + a.clone() * b.clone())
            })
            .collect()
    }

    pub fn map<D: Coefficient>(&self, f: impl Fn(&C) -> D) -> Matrix<D> {
        Matrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(f).collect() }
    }

    /// Row echelon form in place; returns the pivot columns (one per pivot row).
    fn eliminate(&mut self, rhs: Option<&mut Vec<C>>) -> Vec<usize> {
        let mut rhs = rhs;
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..self.cols {
            if r == self.rows {
                break;
            }
            let Some(p) = (r..self.rows).find(|&i| !self[(i, c)].is_zero()) else {
                continue;
            };
            if p != r {
                self.swap_rows(p, r);
                if let Some(y) = rhs.as_deref_mut() {
                    y.swap(p, r);
                }
            }
            let inv = C::one() / self[(r, c)].clone();
            for i in (r + 1)..self.rows {
                if self[(i, c)].is_zero() {
                    continue;
                }
                let f = self[(i, c)].clone() * inv.clone();
                for j in c..self.cols {
                    let v = self[(r, j)].clone();
                    if !v.is_zero() {
                        self[(i, j)] = self[(i, j)].clone() - f.clone() * v;
                    }
                }
                if let Some(y) = rhs.as_deref_mut() {
                    y[i] = y[i].clone() - f.clone() * y[r].clone();
                }
            }
            pivots.push(c);
            r += 1;
        }
        pivots
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    pub fn rank(&self) -> usize {
        self.clone().eliminate(None).len()
    }

    /// Pivot columns of the row echelon form, in increasing order.
    pub fn pivot_columns(&self) -> Vec<usize> {
        self.clone().eliminate(None)
    }

    pub fn det(&self) -> C {
        assert_eq!(self.rows, self.cols, "determinant of a non-square matrix");
        let mut m = self.clone();
        let mut sign = false;
        let mut acc = C::one();
        for c in 0..m.cols {
            let Some(p) = (c..m.rows).find(|&i| !m[(i, c)].is_zero()) else {
                return C::zero();
            };
            if p != c {
                m.swap_rows(p, c);
                sign = !sign;
            }
            let inv = C::one() / m[(c, c)].clone();
            acc = acc * m[(c, c)].clone();
            for i in (c + 1)..m.rows {
                if m[(i, c)].is_zero() {
                    continue;
                }
                let f = m[(i, c)].clone() * inv.clone();
                for j in c..m.cols {
                    let v = m[(c, j)].clone();
                    m[(i, j)] = m[(i, j)].clone() - f.clone() * v;
                }
            }
        }
        if sign {
            -acc
        } else {
            acc
        }
    }

    pub fn inverse(&self) -> Option<Self> {
        assert_eq!(self.rows, self.cols, "inverse of a non-square matrix");
        let n = self.rows;
        let cols: Vec<Vec<C>> = (0..n)
            .map(|j| {
                let mut e = vec![C::zero(); n];
                e[j] = C::one();
                solve_linear_exact(self, &e).ok()
            })
            .collect::<Option<_>>()?;
        Some(Self::from_columns(n, &cols))
    }
}

impl<C> std::ops::Index<(usize, usize)> for Matrix<C> {
    type Output = C;
    fn index(&self, (i, j): (usize, usize)) -> &C {
        &self.data[i * self.cols + j]
    }
}

impl<C> std::ops::IndexMut<(usize, usize)> for Matrix<C> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C {
        &mut self.data[i * self.cols + j]
    }
}

/// Solves `A·x = y` exactly. Overdetermined systems must be consistent, and the
/// returned solution then has zero residual on every row.
pub fn solve_linear_exact<C: Coefficient>(a: &Matrix<C>, y: &[C]) -> Result<Vec<C>, LinalgError<C>> {
    if y.len() != a.rows {
        return Err(LinalgError::Dimension(format!("{} rows but right-hand side of length {}", a.rows, y.len())));
    }
    let mut m = a.clone();
    let mut rhs = y.to_vec();
    let pivots = m.eliminate(Some(&mut rhs));
    let rank = pivots.len();
    // back substitution on the pivot rows
    let mut x = vec![C::zero(); a.cols];
    for (r, &c) in pivots.iter().enumerate().rev() {
        let mut v = rhs[r].clone();
        for j in (c + 1)..a.cols {
            if !m[(r, j)].is_zero() {
                v = v - m[(r, j)].clone() * x[j].clone();
            }
        }
        x[c] = v / m[(r, c)].clone();
    }
    let residual: Vec<C> = a.mul_vec(&x).into_iter().zip(y).map(|(ax, yi)| ax - yi.clone()).collect();
    if residual.iter().any(|v| !v.is_zero()) {
        return Err(LinalgError::InconsistentSystem { residual });
    }
    if rank < a.cols {
        return Err(LinalgError::RankDeficient { rank, cols: a.cols });
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{int, rat, Rational};

    fn m(rows: &[&[i64]]) -> Matrix<Rational> {
        Matrix::from_rows(rows.iter().map(|r| r.iter().map(|&v| int(v)).collect()).collect())
    }

    #[test]
    fn identity_solve() {
        let x = solve_linear_exact(&Matrix::identity(2), &[rat(3, 2), int(-7)]).unwrap();
        assert_eq!(x, vec![rat(3, 2), int(-7)]);
    }

    #[test]
    fn hand_elimination() {
        let x = solve_linear_exact(&m(&[&[1, 1], &[1, -1]]), &[int(2), int(0)]).unwrap();
        assert_eq!(x, vec![int(1), int(1)]);
    }

    #[test]
    fn contradiction_carries_residual() {
        match solve_linear_exact(&m(&[&[1], &[1]]), &[int(1), int(2)]) {
            Err(LinalgError::InconsistentSystem { residual }) => {
                assert!(residual.iter().any(|v| *v != int(0)));
            }
            other => panic!("expected InconsistentSystem, got {other:?}"),
        }
    }

    #[test]
    fn rank_deficient() {
        let r = solve_linear_exact(&m(&[&[1, 2], &[2, 4]]), &[int(1), int(2)]);
        assert!(matches!(r, Err(LinalgError::RankDeficient { rank: 1, cols: 2 })));
    }

    #[test]
    fn determinant_and_inverse() {
        let a = m(&[&[2, 1, 0], &[1, 3, 1], &[0, 1, 4]]);
        assert_eq!(a.det(), int(18));
        let inv = a.inverse().unwrap();
        assert_eq!(a.mul(&inv), Matrix::identity(3));
        assert_eq!(m(&[&[0, 1], &[1, 0]]).det(), int(-1));
        assert!(m(&[&[1, 2], &[2, 4]]).inverse().is_none());
    }
}
