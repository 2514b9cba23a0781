//! Weight-matrix factorizations: pivot-free LU, square padding of rectangular
//! matrices, and least-squares fitting of Toeplitz/Hankel factor chains.

mod factorize;
mod lu;
mod pad;

pub use factorize::{
    hankel_factorize, hankel_factorize_traced, toeplitz_factorize, toeplitz_factorize_traced, FitMethod, FitOptions,
    FitTrace,
};
pub use lu::{lu_approx, LuFactors, PIVOT_FLOOR};
pub use pad::{pad_to_square, pad_to_square_with, Padding, SelectorKind, SelectorSide};

use crate::error::{Error, Result};
use crate::structmat::{DenseMatrix, Orientation, StructuredMatrix, TriangularMatrix};

/// Ordered product of structured factors, `factors[0]` leftmost. Applied to a
/// vector, the last factor acts first.
#[derive(Debug, Clone)]
pub struct FactorChain {
    factors: Vec<StructuredMatrix>,
    target_shape: (usize, usize),
    reconstruction_error: f64,
}

impl FactorChain {
    /// Checks that the factors compose to `target`'s shape and records the
    /// relative Frobenius reconstruction error.
    pub fn new(factors: Vec<StructuredMatrix>, target: &DenseMatrix) -> Result<Self> {
        if factors.is_empty() {
            return Err(Error::Parameter("empty factor chain".into()));
        }
        for pair in factors.windows(2) {
            if pair[0].cols() != pair[1].rows() {
                return Err(Error::dim(pair[0].cols(), pair[1].rows()));
            }
        }
        let shape = (factors[0].rows(), factors[factors.len() - 1].cols());
        if shape != target.shape() {
            return Err(Error::Shape(format!(
                "chain composes to {}x{}, target is {}x{}",
                shape.0,
                shape.1,
                target.rows(),
                target.cols()
            )));
        }
        let mut chain = FactorChain { factors, target_shape: shape, reconstruction_error: 0.0 };
        chain.reconstruction_error = target.relative_error(&chain.product())?;
        Ok(chain)
    }

    pub fn factors(&self) -> &[StructuredMatrix] {
        &self.factors
    }

    pub fn into_factors(self) -> Vec<StructuredMatrix> {
        self.factors
    }

    pub fn len(&self) -> usize {
        self.factors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.factors.is_empty()
    }

    pub fn target_shape(&self) -> (usize, usize) {
        self.target_shape
    }

    pub fn reconstruction_error(&self) -> f64 {
        self.reconstruction_error
    }

    pub fn product(&self) -> DenseMatrix {
        let mut acc = self.factors[0].to_dense();
        for f in &self.factors[1..] {
            acc = acc.matmul(&f.to_dense()).expect("shapes checked at construction");
        }
        acc
    }

    /// Applies the chain to `x`, rightmost factor first.
    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        let mut v = x.to_vec();
        for f in self.factors.iter().rev() {
            v = f.matvec_naive(&v)?;
        }
        Ok(v)
    }
}

/// Triangular factor chain B ≈ L·U for any shape.
///
/// Rectangular inputs are padded to square, factored, and the selector is
/// folded into the adjacent factor: for m > n, U·[I; 0] keeps U's first n
/// columns (still upper); for m < n, [I | 0]·L keeps L's first m rows (still
/// lower). In application order the chain is always upper, then lower.
pub fn lu_chain(b: &DenseMatrix, tol: f64) -> Result<FactorChain> {
    let padding = pad_to_square(b);
    let lu = lu_approx(&padding.square, tol)?;
    let (m, n) = b.shape();
    let factors: Vec<StructuredMatrix> = match padding.side {
        SelectorSide::None => vec![lu.lower.into(), lu.upper.into()],
        SelectorSide::Right => {
            let u = lu.upper.to_dense();
            let truncated = DenseMatrix::from_fn(m, n, |i, j| u.get(i, j));
            vec![lu.lower.into(), TriangularMatrix::from_dense_truncated(&truncated, Orientation::Upper).into()]
        }
        SelectorSide::Left => {
            let l = lu.lower.to_dense();
            let truncated = DenseMatrix::from_fn(m, n, |i, j| l.get(i, j));
            vec![TriangularMatrix::from_dense_truncated(&truncated, Orientation::Lower).into(), lu.upper.into()]
        }
    };
    FactorChain::new(factors, b)
}
