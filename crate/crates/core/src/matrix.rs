//! Row-major `f64` matrices with the handful of kernels the GCN needs.
//!
//! Products go through `matrixmultiply::dgemm`; transposed operands are
//! expressed through strides rather than materialized.

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

/// Which operands of a product are transposed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Trans {
    /// `A · B`
    None,
    /// `Aᵀ · B`
    Left,
    /// `A · Bᵀ`
    Right,
}

impl DenseMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        DenseMatrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Contract(format!(
                "matrix data has {} values, expected {rows}x{cols}",
                data.len()
            )));
        }
        Ok(DenseMatrix { rows, cols, data })
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

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    pub fn fill(&mut self, v: f64) {
        self.data.fill(v);
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    /// Error unless every entry is finite; `what` names the tensor.
    pub fn check_finite(&self, what: &str) -> Result<()> {
        if self.is_finite() {
            Ok(())
        } else {
            Err(Error::Contract(format!("non-finite value in {what}")))
        }
    }

    /// `self = alpha * op(a) · op(b) + beta * self`.
    pub fn gemm(&mut self, alpha: f64, a: &DenseMatrix, b: &DenseMatrix, trans: Trans, beta: f64) {
        let (m, k, n, rsa, csa, rsb, csb) = match trans {
            Trans::None => (a.rows, a.cols, b.cols, a.cols, 1, b.cols, 1),
            Trans::Left => (a.cols, a.rows, b.cols, 1, a.cols, b.cols, 1),
            Trans::Right => (a.rows, a.cols, b.rows, a.cols, 1, 1, b.cols),
        };
        let k_b = if trans == Trans::Right { b.cols } else { b.rows };
        assert_eq!(k, k_b, "inner dimensions differ");
        assert_eq!((self.rows, self.cols), (m, n), "output shape mismatch");
        if m == 0 || n == 0 {
            return;
        }
        if k == 0 {
            self.data.iter_mut().for_each(|v| *v *= beta);
            return;
        }
        // SAFETY: shapes and strides were checked against the backing
        // vectors above, and `self` cannot alias `a` or `b` (&mut vs &).
        unsafe {
            matrixmultiply::dgemm(
                m,
                k,
                n,
                alpha,
                a.data.as_ptr(),
                rsa as isize,
                csa as isize,
                b.data.as_ptr(),
                rsb as isize,
                csb as isize,
                beta,
                self.data.as_mut_ptr(),
                self.cols as isize,
                1,
            );
        }
    }

    /// `op(a) · op(b)` as a new matrix.
    pub fn product(a: &DenseMatrix, b: &DenseMatrix, trans: Trans) -> DenseMatrix {
        let (m, n) = match trans {
            Trans::None => (a.rows, b.cols),
            Trans::Left => (a.cols, b.cols),
            Trans::Right => (a.rows, b.rows),
        };
        let mut c = DenseMatrix::zeros(m, n);
        c.gemm(1.0, a, b, trans, 0.0);
        c
    }

    pub fn add_assign(&mut self, other: &DenseMatrix) {
        assert_eq!(self.shape(), other.shape());
        self.data.iter_mut().zip(&other.data).for_each(|(a, b)| *a += b);
    }

    /// Add `bias` (length `cols`) to every row.
    pub fn add_row_vector(&mut self, bias: &[f64]) {
        assert_eq!(bias.len(), self.cols);
        for row in self.data.chunks_exact_mut(self.cols.max(1)) {
            row.iter_mut().zip(bias).for_each(|(a, b)| *a += b);
        }
    }

    /// Reshape without moving data.
    pub fn reshaped(mut self, rows: usize, cols: usize) -> Result<Self> {
        if rows * cols != self.data.len() {
            return Err(Error::Contract(format!(
                "cannot reshape {}x{} into {rows}x{cols}",
                self.rows, self.cols
            )));
        }
        self.rows = rows;
        self.cols = cols;
        Ok(self)
    }
}
