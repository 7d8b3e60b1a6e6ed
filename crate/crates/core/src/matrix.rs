//! Small dense row-major matrices.
//!
//! The same container carries `f64` operators and exact `BigRational`
//! operators; products skip zero entries since conditional expectations
//! and band projections are block sparse.

use std::ops::{Add, Mul};

use num_traits::{One, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Clone + Zero> Matrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix { rows, cols, data: vec![T::zero(); rows * cols] }
    }

    pub fn from_rows(rows: Vec<Vec<T>>) -> Result<Self> {
        let n_rows = rows.len();
        let n_cols = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(n_rows * n_cols);
        for (i, row) in rows.into_iter().enumerate() {
            if row.len() != n_cols {
                return Err(Error::Structure(format!(
                    "row {i} has {} entries, expected {n_cols}",
                    row.len()
                )));
            }
            data.extend(row);
        }
        Ok(Matrix { rows: n_rows, cols: n_cols, data })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Matrix { rows, cols, data }
    }

    pub fn transpose(&self) -> Self {
        Matrix::from_fn(self.cols, self.rows, |i, j| self.get(j, i).clone())
    }
}

impl<T: Clone + Zero + One> Matrix<T> {
    pub fn identity(n: usize) -> Self {
        Matrix::from_fn(n, n, |i, j| if i == j { T::one() } else { T::zero() })
    }
}

impl<T> Matrix<T> {
    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &T {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, value: T) {
        self.data[i * self.cols + j] = value;
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn entries(&self) -> &[T] {
        &self.data
    }

    pub fn map<U>(&self, f: impl FnMut(&T) -> U) -> Matrix<U> {
        Matrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(f).collect() }
    }

    pub fn to_rows(&self) -> Vec<Vec<T>>
    where
        T: Clone,
    {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }
}

impl<T> Matrix<T>
where
    T: Clone + Zero,
    for<'a> &'a T: Mul<&'a T, Output = T>,
    T: Add<Output = T>,
{
    /// Matrix product; panics on incompatible shapes.
    pub fn mul(&self, other: &Matrix<T>) -> Matrix<T> {
        assert_eq!(self.cols, other.rows, "incompatible shapes for product");
        let mut out = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for (k, a) in self.row(i).iter().enumerate() {
                if a.is_zero() {
                    continue;
                }
                for (j, b) in other.row(k).iter().enumerate() {
                    if b.is_zero() {
                        continue;
                    }
                    let idx = i * out.cols + j;
                    let acc = std::mem::replace(&mut out.data[idx], T::zero());
                    out.data[idx] = acc + a * b;
                }
            }
        }
        out
    }

    /// `A v`.
    pub fn apply(&self, v: &[T]) -> Vec<T> {
        assert_eq!(self.cols, v.len(), "vector length does not match columns");
        (0..self.rows)
            .map(|i| {
                self.row(i)
                    .iter()
                    .zip(v)
                    .filter(|(a, b)| !a.is_zero() && !b.is_zero())
                    .fold(T::zero(), |acc, (a, b)| acc + a * b)
            })
            .collect()
    }

    /// `Aᵀ w`, the adjoint acting on a weight vector.
    pub fn apply_transpose(&self, w: &[T]) -> Vec<T> {
        assert_eq!(self.rows, w.len(), "vector length does not match rows");
        let mut out = vec![T::zero(); self.cols];
        for (i, wi) in w.iter().enumerate() {
            if wi.is_zero() {
                continue;
            }
            for (j, a) in self.row(i).iter().enumerate() {
                if a.is_zero() {
                    continue;
                }
                let acc = std::mem::replace(&mut out[j], T::zero());
                out[j] = acc + a * wi;
            }
        }
        out
    }
}

impl Matrix<f64> {
    pub fn max_abs_diff(&self, other: &Matrix<f64>) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|a| a.abs()).fold(0.0, f64::max)
    }

    pub fn is_nonnegative(&self) -> bool {
        self.data.iter().all(|&a| a >= 0.0)
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|a| a.is_finite())
    }

    pub fn sub(&self, other: &Matrix<f64>) -> Matrix<f64> {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect(),
        }
    }

    /// Basis of the null space, from the reduced row echelon form with pivot
    /// threshold `tol` (relative to the largest entry).
    pub fn null_space(&self, tol: f64) -> Vec<Vec<f64>> {
        let (m, n) = (self.rows, self.cols);
        let mut a = self.data.clone();
        let scale = self.max_abs().max(1.0);
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..n {
            if r == m {
                break;
            }
            let (p, best) = (r..m)
                .map(|i| (i, a[i * n + c].abs()))
                .fold((r, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
            if best <= tol * scale {
                continue;
            }
            if p != r {
                for j in 0..n {
                    a.swap(p * n + j, r * n + j);
                }
            }
            let piv = a[r * n + c];
            for j in 0..n {
                a[r * n + j] /= piv;
            }
            for i in 0..m {
                if i == r {
                    continue;
                }
                let f = a[i * n + c];
                if f != 0.0 {
                    for j in 0..n {
                        a[i * n + j] -= f * a[r * n + j];
                    }
                }
            }
            pivots.push(c);
            r += 1;
        }
        let free: Vec<usize> = (0..n).filter(|c| !pivots.contains(c)).collect();
        free.iter()
            .map(|&fc| {
                let mut v = vec![0.0; n];
                v[fc] = 1.0;
                for (row, &pc) in pivots.iter().enumerate() {
                    v[pc] = -a[row * n + fc];
                }
                v
            })
            .collect()
    }
}

impl Serialize for Matrix<f64> {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_rows().serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Matrix<f64> {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let rows = Vec::<Vec<f64>>::deserialize(deserializer)?;
        Matrix::from_rows(rows).map_err(serde::de::Error::custom)
    }
}
