//! Small dense linear algebra.
//!
//! Everything here targets matrices of a few dozen rows at most: the
//! homogeneous parts of the benchmark systems and the augmented generators
//! used for exact reference flows.

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Relative pivot threshold used by [`lin_solve`].
pub const SINGULAR_PIVOT_TOL: f64 = 1e-13;

/// Dense real matrix stored row-major.
#[derive(Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::dims("matrix must have at least one row and column"));
        }
        if data.len() != rows * cols {
            return Err(Error::dims(format!(
                "{} entries supplied for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("matrix entries"));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, |r| r.as_ref().len());
        if rows.iter().any(|r| r.as_ref().len() != ncols) {
            return Err(Error::dims("ragged rows"));
        }
        let data = rows.iter().flat_map(|r| r.as_ref().iter().copied()).collect();
        Self::from_vec(nrows, ncols, data)
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(rows > 0 && cols > 0, "empty matrix");
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    /// Builds a matrix from a closure over `(row, col)`.
    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = Self::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m[(i, j)] = f(i, j);
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

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|v| v * s).collect(),
        }
    }

    /// `self += s * other`; shapes must agree.
    pub fn add_scaled_in_place(&mut self, s: f64, other: &Matrix) {
        assert_eq!(self.shape(), other.shape(), "shape mismatch in add_scaled");
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += s * b;
        }
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Maximum absolute column sum.
    pub fn norm_1(&self) -> f64 {
        (0..self.cols)
            .map(|j| (0..self.rows).map(|i| self[(i, j)].abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&v| v == 0.0)
    }

    pub fn try_mul(&self, other: &Matrix) -> Result<Matrix> {
        if self.cols != other.rows {
            return Err(Error::dims(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for l in 0..self.cols {
                let a = self[(i, l)];
                if a == 0.0 {
                    continue;
                }
                let src = other.row(l);
                let dst = &mut out.data[i * other.cols..(i + 1) * other.cols];
                for (d, s) in dst.iter_mut().zip(src) {
                    *d += a * s;
                }
            }
        }
        Ok(out)
    }

    pub fn try_mul_vec(&self, x: &[f64]) -> Result<Vec<f64>> {
        if self.cols != x.len() {
            return Err(Error::dims(format!(
                "cannot apply {}x{} matrix to vector of length {}",
                self.rows,
                self.cols,
                x.len()
            )));
        }
        Ok((0..self.rows)
            .map(|i| self.row(i).iter().zip(x).map(|(a, b)| a * b).sum())
            .collect())
    }

    /// Matrix-vector product; panics on shape mismatch.
    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        self.try_mul_vec(x).expect("matrix-vector shape mismatch")
    }

    fn same_shape(&self, other: &Matrix, op: &str) -> Result<()> {
        if self.shape() != other.shape() {
            return Err(Error::dims(format!(
                "{op}: {}x{} vs {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        Ok(())
    }

    pub(crate) fn to_nalgebra(&self) -> nalgebra::DMatrix<f64> {
        nalgebra::DMatrix::from_row_slice(self.rows, self.cols, &self.data)
    }
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Matrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            writeln!(f, "  {:?}", self.row(i))?;
        }
        write!(f, "]")
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

impl Mul for &Matrix {
    type Output = Matrix;
    fn mul(self, rhs: &Matrix) -> Matrix {
        self.try_mul(rhs).expect("matrix product shape mismatch")
    }
}

impl Add for &Matrix {
    type Output = Matrix;
    fn add(self, rhs: &Matrix) -> Matrix {
        let mut out = self.clone();
        out.add_scaled_in_place(1.0, rhs);
        out
    }
}

impl Sub for &Matrix {
    type Output = Matrix;
    fn sub(self, rhs: &Matrix) -> Matrix {
        let mut out = self.clone();
        out.add_scaled_in_place(-1.0, rhs);
        out
    }
}

impl Neg for &Matrix {
    type Output = Matrix;
    fn neg(self) -> Matrix {
        self.scaled(-1.0)
    }
}

impl Serialize for Matrix {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_rows().serialize(s)
    }
}

impl<'de> Deserialize<'de> for Matrix {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let rows = Vec::<Vec<f64>>::deserialize(d)?;
        Matrix::from_rows(&rows).map_err(serde::de::Error::custom)
    }
}

/// Canonical symplectic form `J = [[0, I], [-I, 0]]` on a space of even dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct SymplecticForm {
    j: Matrix,
}

impl SymplecticForm {
    pub fn canonical(dimension: usize) -> Result<Self> {
        if dimension == 0 || !dimension.is_multiple_of(2) {
            return Err(Error::invalid(format!(
                "symplectic form needs a positive even dimension, got {dimension}"
            )));
        }
        let d = dimension / 2;
        let mut j = Matrix::zeros(dimension, dimension);
        for i in 0..d {
            j[(i, d + i)] = 1.0;
            j[(d + i, i)] = -1.0;
        }
        Ok(Self { j })
    }

    pub fn dimension(&self) -> usize {
        self.j.rows()
    }

    pub fn matrix(&self) -> &Matrix {
        &self.j
    }

    fn check(&self, m: &Matrix, what: &str) -> Result<()> {
        if m.shape() != self.j.shape() {
            return Err(Error::dims(format!(
                "{what}: {}x{} matrix against a {}-dimensional symplectic form",
                m.rows(),
                m.cols(),
                self.dimension()
            )));
        }
        Ok(())
    }
}

pub fn mat_mul(a: &Matrix, b: &Matrix) -> Result<Matrix> {
    a.try_mul(b)
}

/// Solves `a * x = b` by Gaussian elimination with partial pivoting.
///
/// A pivot smaller than [`SINGULAR_PIVOT_TOL`] times the largest column norm
/// of `a` is reported as [`Error::Singular`].
pub fn lin_solve(a: &Matrix, b: &Matrix) -> Result<Matrix> {
    if !a.is_square() {
        return Err(Error::dims("lin_solve: coefficient matrix is not square"));
    }
    if b.rows() != a.rows() {
        return Err(Error::dims(format!(
            "lin_solve: right-hand side has {} rows, expected {}",
            b.rows(),
            a.rows()
        )));
    }
    let n = a.rows();
    let m = b.cols();
    let scale = (0..n)
        .map(|j| a.column(j).iter().map(|v| v * v).sum::<f64>().sqrt())
        .fold(0.0, f64::max);
    let threshold = SINGULAR_PIVOT_TOL * scale;

    let mut lu = a.clone();
    let mut x = b.clone();
    for col in 0..n {
        let (piv, piv_abs) = (col..n)
            .map(|r| (r, lu[(r, col)].abs()))
            .fold((col, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
        if piv_abs <= threshold || piv_abs == 0.0 {
            return Err(Error::Singular {
                pivot: piv_abs,
                column: col,
            });
        }
        if piv != col {
            for j in 0..n {
                lu.data.swap(col * n + j, piv * n + j);
            }
            for j in 0..m {
                x.data.swap(col * m + j, piv * m + j);
            }
        }
        let p = lu[(col, col)];
        for r in col + 1..n {
            let factor = lu[(r, col)] / p;
            if factor == 0.0 {
                continue;
            }
            for j in col..n {
                lu[(r, j)] -= factor * lu[(col, j)];
            }
            for j in 0..m {
                x[(r, j)] -= factor * x[(col, j)];
            }
        }
    }
    for col in (0..n).rev() {
        let p = lu[(col, col)];
        for j in 0..m {
            let mut acc = x[(col, j)];
            for l in col + 1..n {
                acc -= lu[(col, l)] * x[(l, j)];
            }
            x[(col, j)] = acc / p;
        }
    }
    Ok(x)
}

/// Solves `a * x = b` for a single right-hand side vector.
pub fn lin_solve_vec(a: &Matrix, b: &[f64]) -> Result<Vec<f64>> {
    let rhs = Matrix::from_vec(b.len(), 1, b.to_vec())?;
    Ok(lin_solve(a, &rhs)?.data)
}

// Degree-13 Padé coefficients for scaling and squaring.
const PADE13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];
const THETA13: f64 = 5.371920351148152;

/// Matrix exponential by scaling and squaring with a [13/13] Padé approximant.
pub fn expm(a: &Matrix) -> Result<Matrix> {
    if !a.is_square() {
        return Err(Error::dims("expm: matrix is not square"));
    }
    let n = a.rows();
    let norm = a.norm_1();
    if norm == 0.0 {
        return Ok(Matrix::identity(n));
    }
    let squarings = if norm > THETA13 {
        (norm / THETA13).log2().ceil() as i32
    } else {
        0
    };
    let a = a.scaled(0.5f64.powi(squarings));

    let id = Matrix::identity(n);
    let a2 = &a * &a;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;
    let b = &PADE13;

    let mut inner = a6.scaled(b[13]);
    inner.add_scaled_in_place(b[11], &a4);
    inner.add_scaled_in_place(b[9], &a2);
    let mut odd = &a6 * &inner;
    odd.add_scaled_in_place(b[7], &a6);
    odd.add_scaled_in_place(b[5], &a4);
    odd.add_scaled_in_place(b[3], &a2);
    odd.add_scaled_in_place(b[1], &id);
    let u = &a * &odd;

    let mut inner = a6.scaled(b[12]);
    inner.add_scaled_in_place(b[10], &a4);
    inner.add_scaled_in_place(b[8], &a2);
    let mut v = &a6 * &inner;
    v.add_scaled_in_place(b[6], &a6);
    v.add_scaled_in_place(b[4], &a4);
    v.add_scaled_in_place(b[2], &a2);
    v.add_scaled_in_place(b[0], &id);

    let mut r = lin_solve(&(&v - &u), &(&v + &u))?;
    for _ in 0..squarings {
        r = &r * &r;
    }
    Ok(r)
}

pub fn mat_commutator(a: &Matrix, b: &Matrix) -> Result<Matrix> {
    if !a.is_square() || !b.is_square() {
        return Err(Error::dims("commutator of non-square matrices"));
    }
    a.same_shape(b, "commutator")?;
    Ok(&(a * b) - &(b * a))
}

/// Frobenius norm of `MᵀJM − J`.
pub fn symplectic_defect(m: &Matrix, j: &SymplecticForm) -> Result<f64> {
    j.check(m, "symplectic_defect")?;
    let jm = j.matrix();
    let mtjm = &(&m.transpose() * jm) * m;
    Ok((&mtjm - jm).frobenius_norm())
}

/// Frobenius norm of `AᵀJ + JA`; zero exactly when `A` is Hamiltonian.
pub fn hamiltonian_defect(a: &Matrix, j: &SymplecticForm) -> Result<f64> {
    j.check(a, "hamiltonian_defect")?;
    let jm = j.matrix();
    Ok((&(&a.transpose() * jm) + &(jm * a)).frobenius_norm())
}

/// Largest eigenvalue modulus, from the real Schur form.
pub fn spectral_radius(m: &Matrix) -> Result<f64> {
    if !m.is_square() {
        return Err(Error::dims("spectral_radius: matrix is not square"));
    }
    if m.rows() == 1 {
        return Ok(m[(0, 0)].abs());
    }
    let schur = nalgebra::Schur::try_new(m.to_nalgebra(), f64::EPSILON, 10_000)
        .ok_or(Error::NoConvergence)?;
    Ok(schur
        .complex_eigenvalues()
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max))
}

pub fn vec_norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}
