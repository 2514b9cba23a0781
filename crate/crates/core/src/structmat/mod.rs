//! Structured weight matrices: dense, Toeplitz, Hankel and rectangular
//! triangular, behind one tagged type with matvec, transpose, scaling and
//! materialization.
//!
//! All values are immutable once built; every operation returns a new value.

mod dense;
mod embed;
pub mod fft;
mod hankel;
mod toeplitz;
mod triangular;

use std::fmt;

pub use dense::DenseMatrix;
pub(crate) use dense::norm2;
pub use embed::{embed_rows_hankel, embed_rows_toeplitz};
pub use hankel::HankelMatrix;
pub use toeplitz::ToeplitzMatrix;
pub use triangular::{triangular_param_count, Orientation, TriangularMatrix};

use crate::error::{Error, Result};

/// Variant tag of a [`StructuredMatrix`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MatrixKind {
    Dense,
    Toeplitz,
    Hankel,
    Lower,
    Upper,
}

impl MatrixKind {
    pub fn name(self) -> &'static str {
        match self {
            MatrixKind::Dense => "dense",
            MatrixKind::Toeplitz => "toeplitz",
            MatrixKind::Hankel => "hankel",
            MatrixKind::Lower => "lower",
            MatrixKind::Upper => "upper",
        }
    }

    pub fn parse(s: &str) -> Option<MatrixKind> {
        Some(match s {
            "dense" => MatrixKind::Dense,
            "toeplitz" => MatrixKind::Toeplitz,
            "hankel" => MatrixKind::Hankel,
            "lower" => MatrixKind::Lower,
            "upper" => MatrixKind::Upper,
            _ => return None,
        })
    }

    /// Parameter count of an m×n matrix of this kind.
    pub fn param_count(self, m: usize, n: usize) -> usize {
        match self {
            MatrixKind::Dense => m * n,
            MatrixKind::Toeplitz | MatrixKind::Hankel => m + n - 1,
            MatrixKind::Lower => triangular_param_count(Orientation::Lower, m, n),
            MatrixKind::Upper => triangular_param_count(Orientation::Upper, m, n),
        }
    }
}

impl fmt::Display for MatrixKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum StructuredMatrix {
    Dense(DenseMatrix),
    Toeplitz(ToeplitzMatrix),
    Hankel(HankelMatrix),
    Triangular(TriangularMatrix),
}

impl From<DenseMatrix> for StructuredMatrix {
    fn from(m: DenseMatrix) -> Self {
        StructuredMatrix::Dense(m)
    }
}

impl From<ToeplitzMatrix> for StructuredMatrix {
    fn from(m: ToeplitzMatrix) -> Self {
        StructuredMatrix::Toeplitz(m)
    }
}

impl From<HankelMatrix> for StructuredMatrix {
    fn from(m: HankelMatrix) -> Self {
        StructuredMatrix::Hankel(m)
    }
}

impl From<TriangularMatrix> for StructuredMatrix {
    fn from(m: TriangularMatrix) -> Self {
        StructuredMatrix::Triangular(m)
    }
}

impl StructuredMatrix {
    /// Builds a matrix of the given kind from its raw parameter vector.
    pub fn from_params(kind: MatrixKind, rows: usize, cols: usize, params: Vec<f64>) -> Result<Self> {
        Ok(match kind {
            MatrixKind::Dense => DenseMatrix::from_vec(rows, cols, params)?.into(),
            MatrixKind::Toeplitz => ToeplitzMatrix::new(rows, cols, params)?.into(),
            MatrixKind::Hankel => HankelMatrix::new(rows, cols, params)?.into(),
            MatrixKind::Lower => TriangularMatrix::new(rows, cols, Orientation::Lower, params)?.into(),
            MatrixKind::Upper => TriangularMatrix::new(rows, cols, Orientation::Upper, params)?.into(),
        })
    }

    /// Reinterprets `dense` as `kind` if its entries satisfy that structure exactly.
    pub fn from_dense_exact(kind: MatrixKind, dense: &DenseMatrix) -> Option<Self> {
        match kind {
            MatrixKind::Dense => Some(dense.clone().into()),
            MatrixKind::Toeplitz => ToeplitzMatrix::from_dense_exact(dense).map(Into::into),
            MatrixKind::Hankel => HankelMatrix::from_dense_exact(dense).map(Into::into),
            MatrixKind::Lower => TriangularMatrix::from_dense_exact(dense, Orientation::Lower).map(Into::into),
            MatrixKind::Upper => TriangularMatrix::from_dense_exact(dense, Orientation::Upper).map(Into::into),
        }
    }

    pub fn kind(&self) -> MatrixKind {
        match self {
            StructuredMatrix::Dense(_) => MatrixKind::Dense,
            StructuredMatrix::Toeplitz(_) => MatrixKind::Toeplitz,
            StructuredMatrix::Hankel(_) => MatrixKind::Hankel,
            StructuredMatrix::Triangular(t) => match t.orientation() {
                Orientation::Lower => MatrixKind::Lower,
                Orientation::Upper => MatrixKind::Upper,
            },
        }
    }

    pub fn rows(&self) -> usize {
        match self {
            StructuredMatrix::Dense(m) => m.rows(),
            StructuredMatrix::Toeplitz(m) => m.rows(),
            StructuredMatrix::Hankel(m) => m.rows(),
            StructuredMatrix::Triangular(m) => m.rows(),
        }
    }

    pub fn cols(&self) -> usize {
        match self {
            StructuredMatrix::Dense(m) => m.cols(),
            StructuredMatrix::Toeplitz(m) => m.cols(),
            StructuredMatrix::Hankel(m) => m.cols(),
            StructuredMatrix::Triangular(m) => m.cols(),
        }
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows(), self.cols())
    }

    pub fn params(&self) -> &[f64] {
        match self {
            StructuredMatrix::Dense(m) => m.as_slice(),
            StructuredMatrix::Toeplitz(m) => m.diagonals(),
            StructuredMatrix::Hankel(m) => m.antidiagonals(),
            StructuredMatrix::Triangular(m) => m.packed(),
        }
    }

    pub(crate) fn params_mut(&mut self) -> &mut [f64] {
        match self {
            StructuredMatrix::Dense(m) => m.as_mut_slice(),
            StructuredMatrix::Toeplitz(m) => m.diagonals_mut(),
            StructuredMatrix::Hankel(m) => m.antidiagonals_mut(),
            StructuredMatrix::Triangular(m) => m.packed_mut(),
        }
    }

    pub fn param_count(&self) -> usize {
        self.params().len()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        match self {
            StructuredMatrix::Dense(m) => m.get(i, j),
            StructuredMatrix::Toeplitz(m) => m.get(i, j),
            StructuredMatrix::Hankel(m) => m.get(i, j),
            StructuredMatrix::Triangular(m) => m.get(i, j),
        }
    }

    /// Direct summation; triangular variants skip their structural zeros.
    pub fn matvec_naive(&self, x: &[f64]) -> Result<Vec<f64>> {
        match self {
            StructuredMatrix::Dense(m) => m.matvec(x),
            StructuredMatrix::Toeplitz(m) => m.matvec_naive(x),
            StructuredMatrix::Hankel(m) => m.matvec_naive(x),
            StructuredMatrix::Triangular(m) => m.matvec_naive(x),
        }
    }

    /// FFT product for Toeplitz and Hankel; a shape error for the other variants.
    pub fn matvec_fft(&self, x: &[f64]) -> Result<Vec<f64>> {
        match self {
            StructuredMatrix::Toeplitz(m) => m.matvec_fft(x),
            StructuredMatrix::Hankel(m) => m.matvec_fft(x),
            other => Err(Error::Shape(format!("no FFT product for {} matrices", other.kind()))),
        }
    }

    /// `matvec_fft` where available, `matvec_naive` otherwise.
    pub fn matvec(&self, x: &[f64], fast: bool) -> Result<Vec<f64>> {
        match self {
            StructuredMatrix::Toeplitz(_) | StructuredMatrix::Hankel(_) if fast => self.matvec_fft(x),
            _ => self.matvec_naive(x),
        }
    }

    /// Aᵀ y.
    pub fn matvec_transpose(&self, y: &[f64], fast: bool) -> Result<Vec<f64>> {
        match self {
            StructuredMatrix::Dense(m) => {
                if y.len() != m.rows() {
                    return Err(Error::dim(m.rows(), y.len()));
                }
                let mut out = vec![0.0; m.cols()];
                for (i, yi) in y.iter().enumerate() {
                    for (o, a) in out.iter_mut().zip(m.row(i)) {
                        *o += a * yi;
                    }
                }
                Ok(out)
            }
            StructuredMatrix::Triangular(m) => m.matvec_transpose(y),
            other => other.transpose().matvec(y, fast),
        }
    }

    pub fn transpose(&self) -> StructuredMatrix {
        match self {
            StructuredMatrix::Dense(m) => m.transpose().into(),
            StructuredMatrix::Toeplitz(m) => m.transpose().into(),
            StructuredMatrix::Hankel(m) => m.transpose().into(),
            StructuredMatrix::Triangular(m) => m.transpose().into(),
        }
    }

    /// Multiplies every parameter by `c`; the variant is unchanged.
    pub fn scale(&self, c: f64) -> StructuredMatrix {
        match self {
            StructuredMatrix::Dense(m) => m.scale(c).into(),
            StructuredMatrix::Toeplitz(m) => m.scale(c).into(),
            StructuredMatrix::Hankel(m) => m.scale(c).into(),
            StructuredMatrix::Triangular(m) => m.scale(c).into(),
        }
    }

    pub fn to_dense(&self) -> DenseMatrix {
        match self {
            StructuredMatrix::Dense(m) => m.clone(),
            StructuredMatrix::Toeplitz(m) => m.to_dense(),
            StructuredMatrix::Hankel(m) => m.to_dense(),
            StructuredMatrix::Triangular(m) => m.to_dense(),
        }
    }

    /// Gradient of ⟨g, A z⟩ with respect to the stored parameters: the outer
    /// product g ⊗ z folded onto the parameter vector.
    pub fn param_gradient(&self, g: &[f64], z: &[f64], fast: bool) -> Vec<f64> {
        match self {
            StructuredMatrix::Dense(_) => {
                let mut out = Vec::with_capacity(g.len() * z.len());
                for gi in g {
                    out.extend(z.iter().map(|zj| gi * zj));
                }
                out
            }
            StructuredMatrix::Toeplitz(m) => m.param_gradient(g, z, fast),
            StructuredMatrix::Hankel(m) => m.param_gradient(g, z, fast),
            StructuredMatrix::Triangular(m) => m.param_gradient(g, z),
        }
    }

    pub fn operator_norm(&self) -> f64 {
        self.to_dense().operator_norm(100)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn all_variants() -> Vec<StructuredMatrix> {
        vec![
            DenseMatrix::from_rows(&[vec![1.0, -2.0, 0.5], vec![3.0, 4.0, -1.0]]).unwrap().into(),
            ToeplitzMatrix::new(2, 3, vec![1.0, 2.0, 3.0, 4.0]).unwrap().into(),
            HankelMatrix::new(3, 2, vec![1.0, -2.0, 3.0, 0.25]).unwrap().into(),
            TriangularMatrix::new(3, 2, Orientation::Lower, vec![1.0, 2.0, 3.0, 4.0, 5.0]).unwrap().into(),
            TriangularMatrix::new(2, 3, Orientation::Upper, vec![1.0, 2.0, 3.0, 4.0, 5.0]).unwrap().into(),
        ]
    }

    #[test]
    fn transpose_is_involution() {
        for a in all_variants() {
            assert_eq!(a.transpose().transpose(), a, "{}", a.kind());
        }
    }

    #[test]
    fn scale_preserves_variant() {
        for a in all_variants() {
            assert_eq!(a.scale(1.0), a);
            let zero = a.scale(0.0);
            assert_eq!(zero.kind(), a.kind());
            assert!(zero.params().iter().all(|v| *v == 0.0));
        }
        let l = TriangularMatrix::new(2, 2, Orientation::Lower, vec![1.0, 5.0, 2.0]).unwrap();
        let s = StructuredMatrix::from(l).scale(-2.0);
        assert_eq!(s.kind(), MatrixKind::Lower);
        assert_eq!(s.params(), &[-2.0, -10.0, -4.0]);
    }

    #[test]
    fn fft_rejected_for_dense() {
        assert!(all_variants()[0].matvec_fft(&[1.0, 2.0, 3.0]).is_err());
    }

    #[test]
    fn param_counts_match_kind_formula() {
        for a in all_variants() {
            let (m, n) = a.shape();
            assert_eq!(a.param_count(), a.kind().param_count(m, n));
        }
    }

    fn arb_matrix() -> impl Strategy<Value = StructuredMatrix> {
        (1usize..7, 1usize..7, 0usize..5, any::<u64>()).prop_map(|(m, n, k, seed)| {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let kind = [MatrixKind::Dense, MatrixKind::Toeplitz, MatrixKind::Hankel, MatrixKind::Lower, MatrixKind::Upper][k];
            let params = (0..kind.param_count(m, n)).map(|_| rng.gen_range(-2.0..2.0)).collect();
            StructuredMatrix::from_params(kind, m, n, params).unwrap()
        })
    }

    proptest! {
        #[test]
        fn naive_matches_dense(a in arb_matrix(), seed in any::<u64>()) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let x: Vec<f64> = (0..a.cols()).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let want = a.to_dense().matvec(&x).unwrap();
            let got = a.matvec_naive(&x).unwrap();
            let scale = norm2(&want).max(1e-300);
            let diff: Vec<f64> = got.iter().zip(&want).map(|(p, q)| p - q).collect();
            prop_assert!(norm2(&diff) / scale <= 1e-13);
        }

        #[test]
        fn transpose_product_matches_dense(a in arb_matrix(), seed in any::<u64>(), fast in any::<bool>()) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let y: Vec<f64> = (0..a.rows()).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let want = a.to_dense().transpose().matvec(&y).unwrap();
            for got in [a.transpose().matvec(&y, fast).unwrap(), a.matvec_transpose(&y, fast).unwrap()] {
                for (p, q) in got.iter().zip(&want) {
                    prop_assert!((p - q).abs() <= 1e-12);
                }
            }
        }

        #[test]
        fn scale_commutes_with_dense(a in arb_matrix(), c in -3.0f64..3.0) {
            let scaled = a.scale(c);
            prop_assert_eq!(scaled.kind(), a.kind());
            prop_assert_eq!(scaled.to_dense(), a.to_dense().scale(c));
        }
    }
}
