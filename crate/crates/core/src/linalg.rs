//! Small dense matrices over a [`Scalar`], with Gauss-Jordan elimination.

use std::fmt;

use crate::scalar::{sup_norm, Scalar};

/// Row-major dense matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

/// Outcome of solving an overdetermined linear system exactly.
#[derive(Clone, Debug, PartialEq)]
pub enum SolveError<T> {
    /// The coefficient matrix has a nontrivial kernel; each vector is one
    /// undetermined direction of the unknowns.
    RankDeficient { rank: usize, missing: Vec<Vec<T>> },
    /// Some equation cannot be satisfied (residual row index reported).
    Inconsistent { row: usize },
}

impl<T: Scalar> Matrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![T::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = T::one();
        }
        m
    }

    /// Builds a matrix from rows; `cols` is needed for the zero-row case.
    pub fn from_rows(rows: Vec<Vec<T>>, cols: usize) -> Self {
        assert!(rows.iter().all(|r| r.len() == cols), "ragged matrix rows");
        let n = rows.len();
        Self {
            rows: n,
            cols,
            data: rows.into_iter().flatten().collect(),
        }
    }

    pub fn from_i64_rows(rows: &[Vec<i64>], cols: usize) -> Self {
        Self::from_rows(
            rows.iter()
                .map(|r| r.iter().map(|&v| T::from_i64(v)).collect())
                .collect(),
            cols,
        )
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn to_rows(&self) -> Vec<Vec<T>> {
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

    pub fn mul(&self, other: &Matrix<T>) -> Matrix<T> {
        assert_eq!(self.cols, other.rows, "matrix shape mismatch");
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let prod = a.clone() * other[(k, j)].clone();
                    out[(i, j)] = out[(i, j)].clone() + prod;
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[T]) -> Vec<T> {
        assert_eq!(self.cols, v.len(), "matrix/vector shape mismatch");
        (0..self.rows)
            .map(|i| {
                self.row(i)
                    .iter()
                    .zip(v)
                    .fold(T::zero(), |acc, (a, b)| acc + a.clone() * b.clone())
            })
            .collect()
    }

    pub fn mul_int_vec(&self, v: &[i64]) -> Vec<T> {
        assert_eq!(self.cols, v.len(), "matrix/vector shape mismatch");
        (0..self.rows)
            .map(|i| {
                self.row(i).iter().zip(v).fold(T::zero(), |acc, (a, &b)| {
                    if b == 0 {
                        acc
                    } else {
                        acc + a.clone() * T::from_i64(b)
                    }
                })
            })
            .collect()
    }

    pub fn sub(&self, other: &Matrix<T>) -> Matrix<T> {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a.clone() - b.clone())
                .collect(),
        }
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> T {
        sup_norm(&self.data)
    }

    /// Induced operator norm for the sup-norm: maximum row ℓ¹ sum.
    pub fn inf_norm(&self) -> T {
        (0..self.rows)
            .map(|i| self.row(i).iter().fold(T::zero(), |acc, x| acc + x.abs()))
            .fold(T::zero(), T::max_of)
    }

    pub fn map<U: Scalar>(&self, f: impl Fn(&T) -> U) -> Matrix<U> {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(f).collect(),
        }
    }

    pub fn to_f64(&self) -> Matrix<f64> {
        self.map(|x| x.as_f64())
    }

    /// Inverse of a square matrix, `None` when singular.
    pub fn inverse(&self) -> Option<Matrix<T>> {
        if self.rows != self.cols {
            return None;
        }
        solve(self, &Matrix::identity(self.rows)).ok()
    }
}

impl<T> std::ops::Index<(usize, usize)> for Matrix<T> {
    type Output = T;

    fn index(&self, (i, j): (usize, usize)) -> &T {
        &self.data[i * self.cols + j]
    }
}

impl<T> std::ops::IndexMut<(usize, usize)> for Matrix<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        &mut self.data[i * self.cols + j]
    }
}

impl<T: Scalar> fmt::Display for Matrix<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for i in 0..self.rows {
            if i > 0 {
                write!(f, "; ")?;
            }
            for (j, x) in self.row(i).iter().enumerate() {
                if j > 0 {
                    write!(f, " ")?;
                }
                write!(f, "{x}")?;
            }
        }
        write!(f, "]")
    }
}

/// Solves `a · x = b` for `x` when the system is consistent and `a` has full
/// column rank. `a` may have more rows than columns.
pub fn solve<T: Scalar>(a: &Matrix<T>, b: &Matrix<T>) -> Result<Matrix<T>, SolveError<T>> {
    assert_eq!(a.rows, b.rows, "right-hand side row count mismatch");
    let (m, n, p) = (a.rows, a.cols, b.cols);
    // augmented [a | b]
    let mut aug: Vec<Vec<T>> = (0..m)
        .map(|i| a.row(i).iter().chain(b.row(i)).cloned().collect())
        .collect();

    let mut pivots = Vec::with_capacity(n);
    let mut r = 0;
    for c in 0..n {
        if r == m {
            break;
        }
        // partial pivoting on magnitude; exact types only need nonzero
        let best = (r..m)
            .filter(|&i| !aug[i][c].is_negligible())
            .max_by(|&i, &j| {
                aug[i][c]
                    .abs()
                    .partial_cmp(&aug[j][c].abs())
                    .unwrap_or(std::cmp::Ordering::Equal)
                    .then(j.cmp(&i))
            });
        let Some(piv) = best else { continue };
        aug.swap(r, piv);
        let inv = T::one() / aug[r][c].clone();
        for x in aug[r].iter_mut() {
            *x = x.clone() * inv.clone();
        }
        for i in 0..m {
            if i == r || aug[i][c].is_zero() {
                continue;
            }
            let factor = aug[i][c].clone();
            let pivot_row = aug[r].clone();
            for (x, y) in aug[i].iter_mut().zip(pivot_row) {
                *x = x.clone() - factor.clone() * y;
            }
        }
        pivots.push(c);
        r += 1;
    }

    if pivots.len() < n {
        let free: Vec<usize> = (0..n).filter(|c| !pivots.contains(c)).collect();
        let missing = free
            .iter()
            .map(|&fc| {
                let mut v = vec![T::zero(); n];
                v[fc] = T::one();
                for (row, &pc) in pivots.iter().enumerate() {
                    v[pc] = -aug[row][fc].clone();
                }
                v
            })
            .collect();
        return Err(SolveError::RankDeficient {
            rank: pivots.len(),
            missing,
        });
    }

    for (i, row) in aug.iter().enumerate().skip(n) {
        if row[n..].iter().any(|x| !x.is_negligible()) {
            return Err(SolveError::Inconsistent { row: i });
        }
    }

    let mut x = Matrix::zeros(n, p);
    for (row, &c) in pivots.iter().enumerate() {
        for j in 0..p {
            x[(c, j)] = aug[row][n + j].clone();
        }
    }
    Ok(x)
}
