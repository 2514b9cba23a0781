use super::dense::DenseMatrix;
use super::fft::convolve_real;
use super::toeplitz::ToeplitzMatrix;
use crate::error::{Error, Result};

/// m×n Hankel matrix, entry (i, j) = a_{i+j} (0-based), parameters a_0, …, a_{m+n−2}.
#[derive(Debug, Clone, PartialEq)]
pub struct HankelMatrix {
    rows: usize,
    cols: usize,
    antidiagonals: Vec<f64>,
}

impl HankelMatrix {
    pub fn new(rows: usize, cols: usize, antidiagonals: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::Shape(format!("empty {rows}x{cols} Hankel matrix")));
        }
        if antidiagonals.len() != rows + cols - 1 {
            return Err(Error::dim(rows + cols - 1, antidiagonals.len()));
        }
        Ok(HankelMatrix { rows, cols, antidiagonals })
    }

    /// The m×n matrix with ones on the anti-diagonal i + j = k and zeros elsewhere.
    pub fn exchange(rows: usize, cols: usize, k: usize) -> Self {
        let mut antidiagonals = vec![0.0; rows + cols - 1];
        antidiagonals[k] = 1.0;
        HankelMatrix { rows, cols, antidiagonals }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn antidiagonals(&self) -> &[f64] {
        &self.antidiagonals
    }

    pub(crate) fn antidiagonals_mut(&mut self) -> &mut [f64] {
        &mut self.antidiagonals
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.antidiagonals[i + j]
    }

    pub fn matvec_naive(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.cols {
            return Err(Error::dim(self.cols, x.len()));
        }
        let n = self.cols;
        Ok((0..self.rows)
            .map(|i| self.antidiagonals[i..i + n].iter().zip(x).map(|(a, b)| a * b).sum())
            .collect())
    }

    /// Reversing the rows of a Hankel matrix gives a Toeplitz matrix whose
    /// diagonal vector is the reversed anti-diagonal vector.
    pub fn matvec_fft(&self, x: &[f64]) -> Result<Vec<f64>> {
        let mut y = self.row_reversed().matvec_fft(x)?;
        y.reverse();
        Ok(y)
    }

    pub(crate) fn row_reversed(&self) -> ToeplitzMatrix {
        let mut diagonals = self.antidiagonals.clone();
        diagonals.reverse();
        ToeplitzMatrix::new(self.rows, self.cols, diagonals).expect("same parameter count")
    }

    pub fn transpose(&self) -> HankelMatrix {
        HankelMatrix { rows: self.cols, cols: self.rows, antidiagonals: self.antidiagonals.clone() }
    }

    pub fn scale(&self, c: f64) -> HankelMatrix {
        HankelMatrix {
            rows: self.rows,
            cols: self.cols,
            antidiagonals: self.antidiagonals.iter().map(|v| v * c).collect(),
        }
    }

    pub fn to_dense(&self) -> DenseMatrix {
        DenseMatrix::from_fn(self.rows, self.cols, |i, j| self.get(i, j))
    }

    /// Component s = Σ_{i+j=s} g_i z_j, the linear convolution of g and z.
    pub fn param_gradient(&self, g: &[f64], z: &[f64], fast: bool) -> Vec<f64> {
        debug_assert_eq!(g.len(), self.rows);
        debug_assert_eq!(z.len(), self.cols);
        if fast {
            return convolve_real(g, z);
        }
        let mut out = vec![0.0; self.rows + self.cols - 1];
        for (i, gi) in g.iter().enumerate() {
            for (j, zj) in z.iter().enumerate() {
                out[i + j] += gi * zj;
            }
        }
        out
    }

    /// Nearest Hankel matrix in Frobenius norm: averages each anti-diagonal.
    pub fn project(dense: &DenseMatrix) -> HankelMatrix {
        let (m, n) = dense.shape();
        let mut sums = vec![0.0; m + n - 1];
        let mut counts = vec![0usize; m + n - 1];
        for i in 0..m {
            for j in 0..n {
                sums[i + j] += dense.get(i, j);
                counts[i + j] += 1;
            }
        }
        let antidiagonals = sums.iter().zip(&counts).map(|(s, &c)| s / c as f64).collect();
        HankelMatrix { rows: m, cols: n, antidiagonals }
    }

    pub fn from_dense_exact(dense: &DenseMatrix) -> Option<HankelMatrix> {
        let (m, n) = dense.shape();
        let mut antidiagonals = dense.row(0).to_vec();
        antidiagonals.extend((1..m).map(|i| dense.get(i, n - 1)));
        let h = HankelMatrix { rows: m, cols: n, antidiagonals };
        let consistent = (0..m).all(|i| (0..n).all(|j| dense.get(i, j) == h.get(i, j)));
        consistent.then_some(h)
    }
}
