//! Small dense linear algebra.
//!
//! The regressions here have a handful of columns, so a row-major `Vec`
//! with Cholesky and partially pivoted LU covers everything that is needed.

use std::ops::{Index, IndexMut};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Row-major dense matrix. Serializes as a list of rows.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<F>>", into = "Vec<Vec<F>>")]
#[serde(bound(serialize = "F: Scalar", deserialize = "F: Scalar"))]
pub struct Matrix<F> {
    rows: usize,
    cols: usize,
    data: Vec<F>,
}

impl<F: Scalar> Matrix<F> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![F::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = F::one();
        }
        m
    }

    pub fn from_diagonal(diag: &[F]) -> Self {
        let mut m = Self::zeros(diag.len(), diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = d;
        }
        m
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<F>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Shape(format!(
                "{} values cannot fill a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Ok(Matrix { rows, cols, data })
    }

    pub fn from_rows(rows: Vec<Vec<F>>) -> Result<Self> {
        let n = rows.len();
        let m = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(n * m);
        for (i, row) in rows.into_iter().enumerate() {
            if row.len() != m {
                return Err(Error::Shape(format!(
                    "row {i} has {} entries, expected {m}",
                    row.len()
                )));
            }
            data.extend(row);
        }
        Ok(Matrix {
            rows: n,
            cols: m,
            data,
        })
    }

    /// Single-column matrix.
    pub fn column(values: &[F]) -> Self {
        Matrix {
            rows: values.len(),
            cols: 1,
            data: values.to_vec(),
        }
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[F] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    #[inline]
    pub fn row_mut(&mut self, i: usize) -> &mut [F] {
        let c = self.cols;
        &mut self.data[i * c..(i + 1) * c]
    }

    pub fn col(&self, j: usize) -> Vec<F> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn as_slice(&self) -> &[F] {
        &self.data
    }

    pub fn to_rows(&self) -> Vec<Vec<F>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    pub fn matmul(&self, other: &Matrix<F>) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::Shape(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for l in 0..self.cols {
                let a = self[(i, l)];
                if a == F::zero() {
                    continue;
                }
                for j in 0..other.cols {
                    out[(i, j)] += a * other[(l, j)];
                }
            }
        }
        Ok(out)
    }

    pub fn matvec(&self, v: &[F]) -> Result<Vec<F>> {
        if self.cols != v.len() {
            return Err(Error::Shape(format!(
                "cannot multiply {}x{} by vector of length {}",
                self.rows,
                self.cols,
                v.len()
            )));
        }
        Ok((0..self.rows).map(|i| dot(self.row(i), v)).collect())
    }

    /// `A' v` without forming the transpose.
    pub fn tr_matvec(&self, v: &[F]) -> Result<Vec<F>> {
        if self.rows != v.len() {
            return Err(Error::Shape(format!(
                "cannot multiply transpose of {}x{} by vector of length {}",
                self.rows,
                self.cols,
                v.len()
            )));
        }
        let mut out = vec![F::zero(); self.cols];
        for (row, &vi) in self.data.chunks_exact(self.cols.max(1)).zip(v) {
            for (o, &a) in out.iter_mut().zip(row) {
                *o += a * vi;
            }
        }
        Ok(out)
    }

    /// `A' A`.
    pub fn gram(&self) -> Self {
        let k = self.cols;
        let mut g = Self::zeros(k, k);
        for row in self.data.chunks_exact(k.max(1)) {
            for a in 0..k {
                let ra = row[a];
                for b in a..k {
                    g[(a, b)] += ra * row[b];
                }
            }
        }
        for a in 0..k {
            for b in 0..a {
                g[(a, b)] = g[(b, a)];
            }
        }
        g
    }

    pub fn add(&self, other: &Matrix<F>) -> Result<Self> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::Shape("matrix sum of different shapes".into()));
        }
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(&a, &b)| a + b)
            .collect();
        Ok(Matrix {
            rows: self.rows,
            cols: self.cols,
            data,
        })
    }

    pub fn scale(&self, s: F) -> Self {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&a| a * s).collect(),
        }
    }

    /// `x' A x` for square `A`.
    pub fn quad_form(&self, x: &[F]) -> F {
        let mut acc = F::zero();
        for i in 0..self.rows {
            acc += x[i] * dot(self.row(i), x);
        }
        acc
    }

    pub fn is_symmetric(&self, tol: F) -> bool {
        if !self.is_square() {
            return false;
        }
        for i in 0..self.rows {
            for j in 0..i {
                let (a, b) = (self[(i, j)], self[(j, i)]);
                let scale = F::one().max(a.abs()).max(b.abs());
                if (a - b).abs() > tol * scale {
                    return false;
                }
            }
        }
        true
    }

    pub fn cholesky(&self) -> Result<Cholesky<F>> {
        Cholesky::new(self)
    }

    /// Determinant via LU with partial pivoting.
    pub fn determinant(&self) -> Result<F> {
        Ok(Lu::new(self)?.determinant())
    }

    /// Solves `A x = b` by LU with partial pivoting.
    pub fn solve(&self, b: &[F]) -> Result<Vec<F>> {
        Lu::new(self)?.solve(b)
    }

    pub fn max_abs(&self) -> F {
        self.data.iter().fold(F::zero(), |m, &a| m.max(a.abs()))
    }
}

impl<F> Index<(usize, usize)> for Matrix<F> {
    type Output = F;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &F {
        &self.data[i * self.cols + j]
    }
}

impl<F> IndexMut<(usize, usize)> for Matrix<F> {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut F {
        &mut self.data[i * self.cols + j]
    }
}

impl<F: Scalar> TryFrom<Vec<Vec<F>>> for Matrix<F> {
    type Error = Error;
    fn try_from(rows: Vec<Vec<F>>) -> Result<Self> {
        Matrix::from_rows(rows)
    }
}

impl<F: Scalar> From<Matrix<F>> for Vec<Vec<F>> {
    fn from(m: Matrix<F>) -> Self {
        m.to_rows()
    }
}

#[inline]
pub fn dot<F: Scalar>(a: &[F], b: &[F]) -> F {
    a.iter().zip(b).fold(F::zero(), |acc, (&x, &y)| acc + x * y)
}

/// Lower-triangular Cholesky factor `L` with `A = L L'`.
#[derive(Clone, Debug)]
pub struct Cholesky<F> {
    lower: Matrix<F>,
}

impl<F: Scalar> Cholesky<F> {
    pub fn new(a: &Matrix<F>) -> Result<Self> {
        if !a.is_square() {
            return Err(Error::Shape("Cholesky of non-square matrix".into()));
        }
        let n = a.rows();
        let mut l = Matrix::zeros(n, n);
        for j in 0..n {
            let mut d = a[(j, j)];
            for p in 0..j {
                d -= l[(j, p)] * l[(j, p)];
            }
            if !(d > F::zero()) || !d.is_finite() {
                return Err(Error::Estimation(format!(
                    "matrix is not positive definite (pivot {j} = {d})"
                )));
            }
            let d = d.sqrt();
            l[(j, j)] = d;
            for i in j + 1..n {
                let mut s = a[(i, j)];
                for p in 0..j {
                    s -= l[(i, p)] * l[(j, p)];
                }
                l[(i, j)] = s / d;
            }
        }
        Ok(Cholesky { lower: l })
    }

    pub fn lower(&self) -> &Matrix<F> {
        &self.lower
    }

    pub fn solve(&self, b: &[F]) -> Vec<F> {
        let l = &self.lower;
        let n = l.rows();
        let mut z = b.to_vec();
        for i in 0..n {
            let mut s = z[i];
            for p in 0..i {
                s -= l[(i, p)] * z[p];
            }
            z[i] = s / l[(i, i)];
        }
        for i in (0..n).rev() {
            let mut s = z[i];
            for p in i + 1..n {
                s -= l[(p, i)] * z[p];
            }
            z[i] = s / l[(i, i)];
        }
        z
    }

    pub fn inverse(&self) -> Matrix<F> {
        let n = self.lower.rows();
        let mut inv = Matrix::zeros(n, n);
        let mut e = vec![F::zero(); n];
        for j in 0..n {
            e.iter_mut().for_each(|v| *v = F::zero());
            e[j] = F::one();
            let col = self.solve(&e);
            for i in 0..n {
                inv[(i, j)] = col[i];
            }
        }
        inv
    }
}

/// LU factorisation with partial pivoting.
#[derive(Clone, Debug)]
pub struct Lu<F> {
    lu: Matrix<F>,
    perm: Vec<usize>,
    sign: F,
    singular: bool,
}

impl<F: Scalar> Lu<F> {
    pub fn new(a: &Matrix<F>) -> Result<Self> {
        if !a.is_square() {
            return Err(Error::Shape("LU of non-square matrix".into()));
        }
        let n = a.rows();
        let mut lu = a.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut sign = F::one();
        let mut singular = false;
        let scale = a.max_abs().max(F::min_positive_value());
        for k in 0..n {
            let (mut p, mut best) = (k, lu[(k, k)].abs());
            for i in k + 1..n {
                if lu[(i, k)].abs() > best {
                    p = i;
                    best = lu[(i, k)].abs();
                }
            }
            if best <= F::epsilon() * scale * F::of_usize(n) {
                singular = true;
                continue;
            }
            if p != k {
                for j in 0..n {
                    let tmp = lu[(k, j)];
                    lu[(k, j)] = lu[(p, j)];
                    lu[(p, j)] = tmp;
                }
                perm.swap(k, p);
                sign = -sign;
            }
            let pivot = lu[(k, k)];
            for i in k + 1..n {
                let f = lu[(i, k)] / pivot;
                lu[(i, k)] = f;
                for j in k + 1..n {
                    let v = lu[(k, j)];
                    lu[(i, j)] -= f * v;
                }
            }
        }
        Ok(Lu {
            lu,
            perm,
            sign,
            singular,
        })
    }

    pub fn is_singular(&self) -> bool {
        self.singular
    }

    pub fn determinant(&self) -> F {
        if self.singular {
            return F::zero();
        }
        (0..self.lu.rows()).fold(self.sign, |d, i| d * self.lu[(i, i)])
    }

    pub fn solve(&self, b: &[F]) -> Result<Vec<F>> {
        let n = self.lu.rows();
        if b.len() != n {
            return Err(Error::Shape("right-hand side length mismatch".into()));
        }
        if self.singular {
            return Err(Error::Estimation("matrix is singular".into()));
        }
        let mut x: Vec<F> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            for p in 0..i {
                let v = x[p];
                x[i] -= self.lu[(i, p)] * v;
            }
        }
        for i in (0..n).rev() {
            for p in i + 1..n {
                let v = x[p];
                x[i] -= self.lu[(i, p)] * v;
            }
            x[i] /= self.lu[(i, i)];
        }
        Ok(x)
    }
}
