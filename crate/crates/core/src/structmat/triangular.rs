use super::dense::DenseMatrix;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Orientation {
    Lower,
    Upper,
}

impl Orientation {
    pub fn flipped(self) -> Orientation {
        match self {
            Orientation::Lower => Orientation::Upper,
            Orientation::Upper => Orientation::Lower,
        }
    }
}

/// Number of stored entries of an m×n triangular matrix.
pub fn triangular_param_count(orientation: Orientation, m: usize, n: usize) -> usize {
    match orientation {
        Orientation::Upper if m >= n => (n + 1) * n / 2,
        Orientation::Upper => (2 * n - m + 1) * m / 2,
        Orientation::Lower if m >= n => (2 * m - n + 1) * n / 2,
        Orientation::Lower => (m + 1) * m / 2,
    }
}

/// Column range stored in row `i`.
#[inline]
fn row_span(orientation: Orientation, cols: usize, i: usize) -> (usize, usize) {
    match orientation {
        Orientation::Upper => (i.min(cols), cols),
        Orientation::Lower => (0, (i + 1).min(cols)),
    }
}

/// Rectangular triangular matrix, stored triangle packed row by row.
#[derive(Debug, Clone, PartialEq)]
pub struct TriangularMatrix {
    rows: usize,
    cols: usize,
    orientation: Orientation,
    packed: Vec<f64>,
    row_offsets: Vec<usize>,
}

impl TriangularMatrix {
    pub fn new(rows: usize, cols: usize, orientation: Orientation, packed: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::Shape(format!("empty {rows}x{cols} triangular matrix")));
        }
        let row_offsets = offsets(orientation, rows, cols);
        let expected = row_offsets[rows];
        if packed.len() != expected {
            return Err(Error::dim(expected, packed.len()));
        }
        Ok(TriangularMatrix { rows, cols, orientation, packed, row_offsets })
    }

    /// Keeps the stored triangle of `dense`, discarding everything else.
    pub fn from_dense_truncated(dense: &DenseMatrix, orientation: Orientation) -> Self {
        let (rows, cols) = dense.shape();
        let row_offsets = offsets(orientation, rows, cols);
        let mut packed = Vec::with_capacity(row_offsets[rows]);
        for i in 0..rows {
            let (lo, hi) = row_span(orientation, cols, i);
            packed.extend_from_slice(&dense.row(i)[lo..hi]);
        }
        TriangularMatrix { rows, cols, orientation, packed, row_offsets }
    }

    /// Like `from_dense_truncated`, but `None` if anything outside the triangle is nonzero.
    pub fn from_dense_exact(dense: &DenseMatrix, orientation: Orientation) -> Option<Self> {
        let (rows, cols) = dense.shape();
        for i in 0..rows {
            let (lo, hi) = row_span(orientation, cols, i);
            let row = dense.row(i);
            if row[..lo].iter().chain(&row[hi..]).any(|v| *v != 0.0) {
                return None;
            }
        }
        Some(Self::from_dense_truncated(dense, orientation))
    }

    pub fn identity(n: usize, orientation: Orientation) -> Self {
        Self::from_dense_truncated(&DenseMatrix::identity(n), orientation)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn orientation(&self) -> Orientation {
        self.orientation
    }

    pub fn packed(&self) -> &[f64] {
        &self.packed
    }

    pub(crate) fn packed_mut(&mut self) -> &mut [f64] {
        &mut self.packed
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (lo, hi) = row_span(self.orientation, self.cols, i);
        if j < lo || j >= hi {
            0.0
        } else {
            self.packed[self.row_offsets[i] + j - lo]
        }
    }

    pub fn matvec_naive(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.cols {
            return Err(Error::dim(self.cols, x.len()));
        }
        Ok((0..self.rows)
            .map(|i| {
                let (lo, hi) = row_span(self.orientation, self.cols, i);
                let stored = &self.packed[self.row_offsets[i]..self.row_offsets[i + 1]];
                stored.iter().zip(&x[lo..hi]).map(|(a, b)| a * b).sum()
            })
            .collect())
    }

    /// Aᵀ y without materializing the transpose.
    pub fn matvec_transpose(&self, y: &[f64]) -> Result<Vec<f64>> {
        if y.len() != self.rows {
            return Err(Error::dim(self.rows, y.len()));
        }
        let mut out = vec![0.0; self.cols];
        for (i, yi) in y.iter().enumerate() {
            let (lo, hi) = row_span(self.orientation, self.cols, i);
            let stored = &self.packed[self.row_offsets[i]..self.row_offsets[i + 1]];
            for (o, a) in out[lo..hi].iter_mut().zip(stored) {
                *o += a * yi;
            }
        }
        Ok(out)
    }

    pub fn transpose(&self) -> TriangularMatrix {
        let t = DenseMatrix::from_fn(self.cols, self.rows, |i, j| self.get(j, i));
        Self::from_dense_truncated(&t, self.orientation.flipped())
    }

    pub fn scale(&self, c: f64) -> TriangularMatrix {
        TriangularMatrix {
            packed: self.packed.iter().map(|v| v * c).collect(),
            ..self.clone()
        }
    }

    pub fn to_dense(&self) -> DenseMatrix {
        DenseMatrix::from_fn(self.rows, self.cols, |i, j| self.get(i, j))
    }

    /// Outer product g ⊗ z restricted to the stored triangle.
    pub fn param_gradient(&self, g: &[f64], z: &[f64]) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.packed.len());
        for (i, gi) in g.iter().enumerate() {
            let (lo, hi) = row_span(self.orientation, self.cols, i);
            out.extend(z[lo..hi].iter().map(|zj| gi * zj));
        }
        out
    }
}

fn offsets(orientation: Orientation, rows: usize, cols: usize) -> Vec<usize> {
    let mut out = Vec::with_capacity(rows + 1);
    let mut acc = 0;
    out.push(0);
    for i in 0..rows {
        let (lo, hi) = row_span(orientation, cols, i);
        acc += hi - lo;
        out.push(acc);
    }
    out
}
