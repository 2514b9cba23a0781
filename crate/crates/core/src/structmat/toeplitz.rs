use num_complex::Complex64;

use super::dense::DenseMatrix;
use super::fft::{convolve_real, fft_in_place, zero_padded, Direction};
use crate::error::{Error, Result};

/// m×n Toeplitz matrix, entry (i, j) = a_{i−j}.
///
/// `diagonals` holds a_{−(n−1)}, …, a_0, …, a_{m−1}, so the value for
/// 0-based (i, j) lives at index `i + n − 1 − j`.
#[derive(Debug, Clone, PartialEq)]
pub struct ToeplitzMatrix {
    rows: usize,
    cols: usize,
    diagonals: Vec<f64>,
}

impl ToeplitzMatrix {
    pub fn new(rows: usize, cols: usize, diagonals: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::Shape(format!("empty {rows}x{cols} Toeplitz matrix")));
        }
        if diagonals.len() != rows + cols - 1 {
            return Err(Error::dim(rows + cols - 1, diagonals.len()));
        }
        Ok(ToeplitzMatrix { rows, cols, diagonals })
    }

    pub fn identity(n: usize) -> Self {
        Self::band(n, n, 1.0)
    }

    /// m×n matrix with `value` on the main diagonal and zeros elsewhere.
    pub fn band(rows: usize, cols: usize, value: f64) -> Self {
        let mut diagonals = vec![0.0; rows + cols - 1];
        diagonals[cols - 1] = value;
        ToeplitzMatrix { rows, cols, diagonals }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn diagonals(&self) -> &[f64] {
        &self.diagonals
    }

    pub(crate) fn diagonals_mut(&mut self) -> &mut [f64] {
        &mut self.diagonals
    }

    /// a_r for r ∈ [−(n−1), m−1].
    pub fn diagonal(&self, r: isize) -> f64 {
        self.diagonals[(r + self.cols as isize - 1) as usize]
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.diagonals[i + self.cols - 1 - j]
    }

    pub fn matvec_naive(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.cols {
            return Err(Error::dim(self.cols, x.len()));
        }
        let n = self.cols;
        Ok((0..self.rows)
            .map(|i| {
                // row i reads diagonals[i + n − 1 − j] for j = 0..n, i.e. a reversed window
                let window = &self.diagonals[i..i + n];
                window.iter().rev().zip(x).map(|(a, b)| a * b).sum()
            })
            .collect())
    }

    /// Circulant embedding of order N = next power of two ≥ m + n − 1.
    /// The circulant's first column is [a_0, …, a_{m−1}, 0, …, 0, a_{−(n−1)}, …, a_{−1}],
    /// so the first m entries of C·[x; 0] are T·x.
    pub fn matvec_fft(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.cols {
            return Err(Error::dim(self.cols, x.len()));
        }
        let (m, n) = (self.rows, self.cols);
        let size = (m + n - 1).next_power_of_two();
        let mut column = vec![Complex64::new(0.0, 0.0); size];
        for k in 0..m {
            column[k].re = self.diagonals[k + n - 1];
        }
        for k in 1..n {
            column[size - k].re = self.diagonals[n - 1 - k];
        }
        let mut xs = zero_padded(x, size);
        fft_in_place(&mut column, Direction::Forward)?;
        fft_in_place(&mut xs, Direction::Forward)?;
        for (c, v) in column.iter_mut().zip(&xs) {
            *c *= v;
        }
        fft_in_place(&mut column, Direction::Inverse)?;
        Ok(column[..m].iter().map(|z| z.re).collect())
    }

    pub fn transpose(&self) -> ToeplitzMatrix {
        let mut diagonals = self.diagonals.clone();
        diagonals.reverse();
        ToeplitzMatrix { rows: self.cols, cols: self.rows, diagonals }
    }

    pub fn scale(&self, c: f64) -> ToeplitzMatrix {
        ToeplitzMatrix {
            rows: self.rows,
            cols: self.cols,
            diagonals: self.diagonals.iter().map(|v| v * c).collect(),
        }
    }

    pub fn to_dense(&self) -> DenseMatrix {
        DenseMatrix::from_fn(self.rows, self.cols, |i, j| self.get(i, j))
    }

    /// Gradient of ⟨g, T z⟩ with respect to the diagonal parameters:
    /// component d = Σ_{i−j=d} g_i z_j.
    pub fn param_gradient(&self, g: &[f64], z: &[f64], fast: bool) -> Vec<f64> {
        let (m, n) = (self.rows, self.cols);
        debug_assert_eq!(g.len(), m);
        debug_assert_eq!(z.len(), n);
        if fast {
            let reversed: Vec<f64> = z.iter().rev().copied().collect();
            return convolve_real(g, &reversed);
        }
        let mut out = vec![0.0; m + n - 1];
        for (i, gi) in g.iter().enumerate() {
            if *gi == 0.0 {
                continue;
            }
            for (j, zj) in z.iter().enumerate() {
                out[i + n - 1 - j] += gi * zj;
            }
        }
        out
    }

    /// Nearest Toeplitz matrix in Frobenius norm: averages each diagonal.
    pub fn project(dense: &DenseMatrix) -> ToeplitzMatrix {
        let (m, n) = dense.shape();
        let mut sums = vec![0.0; m + n - 1];
        let mut counts = vec![0usize; m + n - 1];
        for i in 0..m {
            for j in 0..n {
                sums[i + n - 1 - j] += dense.get(i, j);
                counts[i + n - 1 - j] += 1;
            }
        }
        let diagonals = sums.iter().zip(&counts).map(|(s, &c)| s / c as f64).collect();
        ToeplitzMatrix { rows: m, cols: n, diagonals }
    }

    /// Exact recovery when `dense` is constant along every diagonal.
    pub fn from_dense_exact(dense: &DenseMatrix) -> Option<ToeplitzMatrix> {
        let (m, n) = dense.shape();
        let mut diagonals = vec![0.0; m + n - 1];
        for j in 0..n {
            diagonals[n - 1 - j] = dense.get(0, j);
        }
        for i in 1..m {
            diagonals[i + n - 1] = dense.get(i, 0);
        }
        let t = ToeplitzMatrix { rows: m, cols: n, diagonals };
        let consistent = (0..m).all(|i| (0..n).all(|j| dense.get(i, j) == t.get(i, j)));
        consistent.then_some(t)
    }
}
