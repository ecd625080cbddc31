//! Minimal dense real linear algebra.
//!
//! Everything here is sized for desk-scale problems: row-major storage, a plain
//! Cholesky factorization for the normal equations, and an orthogonal projector
//! onto the null space of a full-row-rank matrix.

use std::ops::{Deref, Index, IndexMut};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative tolerance on the residual of every successful SPD solve.
pub const SOLVE_TOL: f64 = 1e-10;
/// Relative tolerance on symmetry accepted by [`solve_spd`].
pub const SYM_TOL: f64 = 1e-12;
/// Cholesky pivots at or below this fraction of the largest diagonal entry fail.
pub const PIVOT_FLOOR: f64 = 1e-13;

/// A dense vector of finite reals.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Vector(Vec<f64>);

impl Vector {
    pub fn new(entries: Vec<f64>) -> Result<Self> {
        if let Some(i) = entries.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!("vector entry {i}")));
        }
        Ok(Vector(entries))
    }

    /// Wraps entries produced by arithmetic on already-finite data.
    pub(crate) fn from_raw(entries: Vec<f64>) -> Self {
        Vector(entries)
    }

    pub fn zeros(len: usize) -> Self {
        Vector(vec![0.0; len])
    }

    pub fn filled(len: usize, value: f64) -> Self {
        Vector(vec![value; len])
    }

    /// The all-one vector `e`.
    pub fn ones(len: usize) -> Self {
        Self::filled(len, 1.0)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    pub fn dot(&self, other: &[f64]) -> f64 {
        dot(&self.0, other)
    }

    pub fn norm2(&self) -> f64 {
        norm2(&self.0)
    }

    pub fn norm_inf(&self) -> f64 {
        self.0.iter().fold(0.0, |acc, v| acc.max(v.abs()))
    }

    pub fn min(&self) -> f64 {
        self.0.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Vector(self.0.iter().map(|&v| f(v)).collect())
    }

    /// Componentwise combination of two equal-length vectors.
    pub fn zip_map(&self, other: &[f64], f: impl Fn(f64, f64) -> f64) -> Self {
        debug_assert_eq!(self.len(), other.len());
        Vector(self.0.iter().zip(other).map(|(&a, &b)| f(a, b)).collect())
    }

    /// `self + alpha * other`.
    pub fn axpy(&self, alpha: f64, other: &[f64]) -> Self {
        self.zip_map(other, |a, b| a + alpha * b)
    }

    pub fn scaled(&self, alpha: f64) -> Self {
        self.map(|v| alpha * v)
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }
}

impl Deref for Vector {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl Index<usize> for Vector {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl IndexMut<usize> for Vector {
    fn index_mut(&mut self, i: usize) -> &mut f64 {
        &mut self.0[i]
    }
}

impl TryFrom<Vec<f64>> for Vector {
    type Error = Error;

    fn try_from(entries: Vec<f64>) -> Result<Self> {
        Vector::new(entries)
    }
}

impl From<Vector> for Vec<f64> {
    fn from(v: Vector) -> Vec<f64> {
        v.0
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `init + Σ aᵢbᵢ` with error-free transformations, accurate to about one
/// rounding of the exact result.
pub fn accurate_affine<I: IntoIterator<Item = (f64, f64)>>(init: f64, terms: I) -> f64 {
    let (mut sum, mut err) = (init, 0.0);
    for (a, b) in terms {
        let p = a * b;
        let pe = a.mul_add(b, -p);
        let t = sum + p;
        let z = t - sum;
        err += (sum - (t - z)) + (p - z) + pe;
        sum = t;
    }
    sum + err
}

pub fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// A dense row-major matrix of finite reals.
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::ShapeMismatch(format!(
                "{rows}x{cols} matrix needs {} entries, got {}",
                rows * cols,
                data.len()
            )));
        }
        if let Some(i) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!(
                "matrix entry ({}, {})",
                i / cols.max(1),
                i % cols.max(1)
            )));
        }
        Ok(Matrix { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if let Some(r) = rows.iter().position(|row| row.len() != cols) {
            return Err(Error::ShapeMismatch(format!(
                "row {r} has {} entries, expected {cols}",
                rows[r].len()
            )));
        }
        Matrix::new(rows.len(), cols, rows.concat())
    }

    pub fn identity(size: usize) -> Self {
        let mut data = vec![0.0; size * size];
        for i in 0..size {
            data[i * size + i] = 1.0;
        }
        Matrix { rows: size, cols: size, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.data[row * self.cols + col]
    }

    pub fn row(&self, row: usize) -> &[f64] {
        &self.data[row * self.cols..(row + 1) * self.cols]
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.rows).map(|r| self.row(r).to_vec()).collect()
    }

    pub fn column(&self, col: usize) -> Vec<f64> {
        (0..self.rows).map(|r| self.get(r, col)).collect()
    }

    /// `self * x`.
    pub fn mul_vec(&self, x: &[f64]) -> Vector {
        debug_assert_eq!(x.len(), self.cols);
        Vector((0..self.rows).map(|r| dot(self.row(r), x)).collect())
    }

    /// `selfᵀ * y`.
    pub fn tr_mul_vec(&self, y: &[f64]) -> Vector {
        debug_assert_eq!(y.len(), self.rows);
        let mut out = vec![0.0; self.cols];
        for (r, &yr) in y.iter().enumerate() {
            for (o, &a) in out.iter_mut().zip(self.row(r)) {
                *o += a * yr;
            }
        }
        Vector(out)
    }

    /// `self * diag(d)`.
    pub fn scale_columns(&self, d: &[f64]) -> Matrix {
        debug_assert_eq!(d.len(), self.cols);
        let data = self
            .data
            .chunks(self.cols.max(1))
            .flat_map(|row| row.iter().zip(d).map(|(a, s)| a * s))
            .collect();
        Matrix { rows: self.rows, cols: self.cols, data }
    }

    /// `self * diag(d) * selfᵀ`, the weighted Gram matrix of the rows.
    pub fn weighted_gram(&self, d: &[f64]) -> Matrix {
        debug_assert_eq!(d.len(), self.cols);
        let m = self.rows;
        let mut data = vec![0.0; m * m];
        for i in 0..m {
            let ri = self.row(i);
            for j in 0..=i {
                let rj = self.row(j);
                let v: f64 = ri.iter().zip(rj).zip(d).map(|((a, b), w)| a * b * w).sum();
                data[i * m + j] = v;
                data[j * m + i] = v;
            }
        }
        Matrix { rows: m, cols: m, data }
    }

    /// `self * selfᵀ`.
    pub fn gram(&self) -> Matrix {
        self.weighted_gram(&vec![1.0; self.cols])
    }

    /// Column subset as a square or rectangular matrix, in the given order.
    pub fn select_columns(&self, cols: &[usize]) -> Matrix {
        let data = (0..self.rows)
            .flat_map(|r| cols.iter().map(move |&c| self.get(r, c)))
            .collect();
        Matrix { rows: self.rows, cols: cols.len(), data }
    }

    fn max_abs_diagonal(&self) -> f64 {
        (0..self.rows.min(self.cols)).fold(0.0, |acc, i| acc.max(self.get(i, i).abs()))
    }
}

/// Lower-triangular Cholesky factor `L` with `M = L Lᵀ`.
#[derive(Clone, Debug)]
pub struct Cholesky {
    size: usize,
    lower: Vec<f64>,
}

impl Cholesky {
    /// Factors a symmetric matrix, failing on any pivot at or below
    /// `PIVOT_FLOOR * max |M_ii|`. No regularization is applied.
    pub fn factor(m: &Matrix) -> Result<Self> {
        if m.rows != m.cols {
            return Err(Error::ShapeMismatch(format!(
                "cholesky needs a square matrix, got {}x{}",
                m.rows, m.cols
            )));
        }
        let n = m.rows;
        if n == 0 {
            return Err(Error::ShapeMismatch("cholesky of an empty matrix".into()));
        }
        let scale = m.max_abs_diagonal();
        let floor = PIVOT_FLOOR * scale;
        let mut lower = vec![0.0; n * n];
        for j in 0..n {
            let mut pivot = m.get(j, j);
            for k in 0..j {
                pivot -= lower[j * n + k] * lower[j * n + k];
            }
            if !(pivot > floor) {
                return Err(Error::NotPositiveDefinite { index: j, pivot });
            }
            let ljj = pivot.sqrt();
            lower[j * n + j] = ljj;
            for i in j + 1..n {
                let mut v = m.get(i, j);
                for k in 0..j {
                    v -= lower[i * n + k] * lower[j * n + k];
                }
                lower[i * n + j] = v / ljj;
            }
        }
        Ok(Cholesky { size: n, lower })
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn solve(&self, rhs: &[f64]) -> Vector {
        let n = self.size;
        debug_assert_eq!(rhs.len(), n);
        let l = &self.lower;
        let mut z = rhs.to_vec();
        for i in 0..n {
            let mut v = z[i];
            for k in 0..i {
                v -= l[i * n + k] * z[k];
            }
            z[i] = v / l[i * n + i];
        }
        for i in (0..n).rev() {
            let mut v = z[i];
            for k in i + 1..n {
                v -= l[k * n + i] * z[k];
            }
            z[i] = v / l[i * n + i];
        }
        Vector(z)
    }
}

/// Solves `M z = rhs` for symmetric positive-definite `M` via Cholesky.
pub fn solve_spd(m: &Matrix, rhs: &Vector) -> Result<Vector> {
    if m.rows != m.cols || rhs.len() != m.rows {
        return Err(Error::ShapeMismatch(format!(
            "solve_spd: {}x{} matrix with rhs of length {}",
            m.rows,
            m.cols,
            rhs.len()
        )));
    }
    let scale = m.data.iter().fold(0.0f64, |acc, v| acc.max(v.abs())).max(f64::MIN_POSITIVE);
    for i in 0..m.rows {
        for j in 0..i {
            if (m.get(i, j) - m.get(j, i)).abs() > SYM_TOL * scale {
                return Err(Error::NotSymmetric { row: i, col: j });
            }
        }
    }
    Ok(Cholesky::factor(m)?.solve(rhs))
}

/// Orthogonal projector onto `N = {ζ : Ā ζ = 0}` for a full-row-rank `Ā`.
#[derive(Clone, Debug)]
pub struct NullSpaceProjector {
    abar: Matrix,
    gram: Cholesky,
}

impl NullSpaceProjector {
    pub fn new(abar: Matrix) -> Result<Self> {
        let gram = Cholesky::factor(&abar.gram())?;
        Ok(NullSpaceProjector { abar, gram })
    }

    /// `w − Āᵀ(ĀĀᵀ)⁻¹Āw`.
    pub fn project(&self, w: &[f64]) -> Vector {
        let lambda = self.gram.solve(&self.abar.mul_vec(w));
        let row_part = self.abar.tr_mul_vec(&lambda);
        Vector(w.iter().zip(row_part.iter()).map(|(a, b)| a - b).collect())
    }
}

/// Projection of `w` onto the null space of `abar`.
pub fn project_null_space(abar: &Matrix, w: &Vector) -> Result<Vector> {
    if w.len() != abar.cols {
        return Err(Error::ShapeMismatch(format!(
            "projection of length-{} vector with {}x{} matrix",
            w.len(),
            abar.rows,
            abar.cols
        )));
    }
    Ok(NullSpaceProjector::new(abar.clone())?.project(w))
}
