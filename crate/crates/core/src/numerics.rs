//! Small dense complex linear algebra.
//!
//! Every matrix in the simulator is tiny (at most a few dozen rows), so the
//! routines here favour clarity over blocking or vectorization. Matrices are
//! immutable values: every operation returns a fresh matrix.

use num_complex::Complex64;
use std::fmt;
use thiserror::Error;

/// Complex scalar used throughout the crate.
pub type Complex = Complex64;

/// Errors raised by the linear-algebra routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum NumericsError {
    #[error(
        "{op}: dimension mismatch between {left_rows}x{left_cols} and {right_rows}x{right_cols}"
    )]
    DimensionMismatch {
        op: &'static str,
        left_rows: usize,
        left_cols: usize,
        right_rows: usize,
        right_cols: usize,
    },
    #[error("{op}: expected a square matrix, got {rows}x{cols}")]
    NotSquare {
        op: &'static str,
        rows: usize,
        cols: usize,
    },
    #[error("matrix is not Hermitian positive definite (pivot {index} = {pivot:e})")]
    NotPositiveDefinite { index: usize, pivot: f64 },
    #[error("matrix entries must be finite")]
    NonFinite,
    #[error("entry count {len} does not match shape {rows}x{cols}")]
    BadLength {
        rows: usize,
        cols: usize,
        len: usize,
    },
    #[error("matrix dimensions must be positive, got {rows}x{cols}")]
    EmptyShape { rows: usize, cols: usize },
}

pub type Result<T> = std::result::Result<T, NumericsError>;

/// Dense complex matrix stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex>,
}

impl ComplexMatrix {
    /// Builds a matrix from row-major entries.
    pub fn from_vec(rows: usize, cols: usize, data: Vec<Complex>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(NumericsError::EmptyShape { rows, cols });
        }
        if data.len() != rows * cols {
            return Err(NumericsError::BadLength {
                rows,
                cols,
                len: data.len(),
            });
        }
        if data.iter().any(|z| !z.is_finite()) {
            return Err(NumericsError::NonFinite);
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<Complex>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(NumericsError::BadLength {
                rows: rows.len(),
                cols,
                len: rows.iter().map(Vec::len).sum(),
            });
        }
        Self::from_vec(rows.len(), cols, rows.concat())
    }

    /// Builds a matrix from column-major entries.
    pub fn from_columns(rows: usize, cols: usize, col_major: &[Complex]) -> Result<Self> {
        if col_major.len() != rows * cols {
            return Err(NumericsError::BadLength {
                rows,
                cols,
                len: col_major.len(),
            });
        }
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(col_major[j * rows + i]);
            }
        }
        Self::from_vec(rows, cols, data)
    }

    /// # Panics
    ///
    /// Panics if either dimension is zero.
    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(rows > 0 && cols > 0, "matrix dimensions must be positive");
        Self {
            rows,
            cols,
            data: vec![Complex::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = Complex::new(1.0, 0.0);
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn get(&self, i: usize, j: usize) -> Complex {
        self.data[i * self.cols + j]
    }

    /// Row-major entries.
    pub fn as_slice(&self) -> &[Complex] {
        &self.data
    }

    pub fn column(&self, j: usize) -> Vec<Complex> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    /// Contiguous block of columns `start..start + count`.
    pub fn columns(&self, start: usize, count: usize) -> ComplexMatrix {
        assert!(start + count <= self.cols && count > 0);
        let mut data = Vec::with_capacity(self.rows * count);
        for i in 0..self.rows {
            data.extend_from_slice(
                &self.data[i * self.cols + start..i * self.cols + start + count],
            );
        }
        Self {
            rows: self.rows,
            cols: count,
            data,
        }
    }

    /// Column-major flattening.
    pub fn to_column_major(&self) -> Vec<Complex> {
        (0..self.cols).flat_map(|j| self.column(j)).collect()
    }

    pub fn map(&self, mut f: impl FnMut(Complex) -> Complex) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&z| f(z)).collect(),
        }
    }

    pub fn scale(&self, s: f64) -> Self {
        self.map(|z| z * s)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, "add", |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, "sub", |a, b| a - b)
    }

    fn zip_with(
        &self,
        other: &Self,
        op: &'static str,
        f: impl Fn(Complex, Complex) -> Complex,
    ) -> Result<Self> {
        if self.shape() != other.shape() {
            return Err(self.mismatch(other, op));
        }
        Ok(Self {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }

    fn mismatch(&self, other: &Self, op: &'static str) -> NumericsError {
        NumericsError::DimensionMismatch {
            op,
            left_rows: self.rows,
            left_cols: self.cols,
            right_rows: other.rows,
            right_cols: other.cols,
        }
    }

    fn with_data(rows: usize, cols: usize, data: Vec<Complex>) -> Self {
        debug_assert_eq!(data.len(), rows * cols);
        Self { rows, cols, data }
    }
}

impl fmt::Display for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.rows {
            let row: Vec<String> = (0..self.cols)
                .map(|j| format!("{}", self.get(i, j)))
                .collect();
            writeln!(f, "[{}]", row.join(", "))?;
        }
        Ok(())
    }
}

/// Dense real matrix stored row-major. Used for real-valued equivalent forms.
#[derive(Debug, Clone, PartialEq)]
pub struct RealMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl RealMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(NumericsError::BadLength {
                rows,
                cols,
                len: data.len(),
            });
        }
        Ok(Self { rows, cols, data })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.set(j, i, self.get(i, j));
            }
        }
        t
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(NumericsError::DimensionMismatch {
                op: "matmul",
                left_rows: self.rows,
                left_cols: self.cols,
                right_rows: other.rows,
                right_cols: other.cols,
            });
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a == 0.0 {
                    continue;
                }
                for j in 0..other.cols {
                    out.data[i * other.cols + j] += a * other.get(k, j);
                }
            }
        }
        Ok(out)
    }

    /// `selfᵀ · v`.
    pub fn transpose_mul_vec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(v.len(), self.rows);
        let mut out = vec![0.0; self.cols];
        for i in 0..self.rows {
            let vi = v[i];
            for (j, o) in out.iter_mut().enumerate() {
                *o += self.get(i, j) * vi;
            }
        }
        out
    }
}

/// Complex matrix product `a · b`.
pub fn matmul(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    if a.cols != b.rows {
        return Err(a.mismatch(b, "matmul"));
    }
    let mut data = vec![Complex::new(0.0, 0.0); a.rows * b.cols];
    for i in 0..a.rows {
        let out = &mut data[i * b.cols..(i + 1) * b.cols];
        for k in 0..a.cols {
            let aik = a.get(i, k);
            let brow = &b.data[k * b.cols..(k + 1) * b.cols];
            for (o, &bkj) in out.iter_mut().zip(brow) {
                *o += aik * bkj;
            }
        }
    }
    Ok(ComplexMatrix::with_data(a.rows, b.cols, data))
}

/// Matrix-vector product `a · v`.
pub fn matvec(a: &ComplexMatrix, v: &[Complex]) -> Result<Vec<Complex>> {
    if a.cols != v.len() {
        return Err(NumericsError::DimensionMismatch {
            op: "matvec",
            left_rows: a.rows,
            left_cols: a.cols,
            right_rows: v.len(),
            right_cols: 1,
        });
    }
    Ok((0..a.rows)
        .map(|i| {
            a.data[i * a.cols..(i + 1) * a.cols]
                .iter()
                .zip(v)
                .map(|(&x, &y)| x * y)
                .sum()
        })
        .collect())
}

/// Conjugate transpose.
pub fn hermitian(a: &ComplexMatrix) -> ComplexMatrix {
    let mut data = Vec::with_capacity(a.data.len());
    for j in 0..a.cols {
        for i in 0..a.rows {
            data.push(a.get(i, j).conj());
        }
    }
    ComplexMatrix::with_data(a.cols, a.rows, data)
}

/// Lower-triangular Cholesky factor `L` with `a = L·Lᴴ`. Only the lower
/// triangle of `a` is read.
fn cholesky(a: &ComplexMatrix) -> Result<ComplexMatrix> {
    if a.rows != a.cols {
        return Err(NumericsError::NotSquare {
            op: "cholesky",
            rows: a.rows,
            cols: a.cols,
        });
    }
    let n = a.rows;
    let mut l = vec![Complex::new(0.0, 0.0); n * n];
    for j in 0..n {
        let mut d = a.get(j, j).re;
        for k in 0..j {
            d -= l[j * n + k].norm_sqr();
        }
        if !(d > 0.0) {
            return Err(NumericsError::NotPositiveDefinite { index: j, pivot: d });
        }
        let ljj = d.sqrt();
        l[j * n + j] = Complex::new(ljj, 0.0);
        for i in j + 1..n {
            let mut s = a.get(i, j);
            for k in 0..j {
                s -= l[i * n + k] * l[j * n + k].conj();
            }
            l[i * n + j] = s / ljj;
        }
    }
    Ok(ComplexMatrix::with_data(n, n, l))
}

/// Solves `a · x = b` for Hermitian positive definite `a` via Cholesky.
pub fn solve_hpd(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    if a.rows != b.rows {
        return Err(a.mismatch(b, "solve_hpd"));
    }
    let l = cholesky(a)?;
    let n = a.rows;
    let mut x = b.clone();
    for c in 0..b.cols {
        // L y = b
        for i in 0..n {
            let mut s = x.data[i * b.cols + c];
            for k in 0..i {
                s -= l.get(i, k) * x.data[k * b.cols + c];
            }
            x.data[i * b.cols + c] = s / l.get(i, i).re;
        }
        // Lᴴ x = y
        for i in (0..n).rev() {
            let mut s = x.data[i * b.cols + c];
            for k in i + 1..n {
                s -= l.get(k, i).conj() * x.data[k * b.cols + c];
            }
            x.data[i * b.cols + c] = s / l.get(i, i).re;
        }
    }
    Ok(x)
}

/// Inverse of a Hermitian positive definite matrix.
pub fn inverse_hpd(a: &ComplexMatrix) -> Result<ComplexMatrix> {
    solve_hpd(a, &ComplexMatrix::identity(a.rows))
}

/// `log₂ det(a)` for Hermitian positive definite `a`, from the Cholesky diagonal.
pub fn logdet_hpd(a: &ComplexMatrix) -> Result<f64> {
    let l = cholesky(a)?;
    Ok(2.0 * (0..l.rows).map(|i| l.get(i, i).re.log2()).sum::<f64>())
}

pub fn frobenius_norm_sq(a: &ComplexMatrix) -> f64 {
    a.data.iter().map(|z| z.norm_sqr()).sum()
}

/// Real embedding `[[Re, −Im], [Im, Re]]`, shape `(2·rows)×(2·cols)`.
pub fn real_stack(a: &ComplexMatrix) -> RealMatrix {
    let (r, c) = a.shape();
    let mut out = RealMatrix::zeros(2 * r, 2 * c);
    for i in 0..r {
        for j in 0..c {
            let z = a.get(i, j);
            out.set(i, j, z.re);
            out.set(i, c + j, -z.im);
            out.set(r + i, j, z.im);
            out.set(r + i, c + j, z.re);
        }
    }
    out
}

/// Real-stacked vector `[Re v; Im v]`.
pub fn real_stack_vec(v: &[Complex]) -> Vec<f64> {
    v.iter()
        .map(|z| z.re)
        .chain(v.iter().map(|z| z.im))
        .collect()
}
