use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::structmat::{DenseMatrix, Orientation, TriangularMatrix};

/// Relative pivot floor: pivots smaller than this times ‖B‖_F count as zero.
pub const PIVOT_FLOOR: f64 = 1e-12;

const PERTURBATION_SEED: u64 = 0x5eed_1u64;

#[derive(Debug, Clone)]
pub struct LuFactors {
    /// Unit lower triangular.
    pub lower: TriangularMatrix,
    pub upper: TriangularMatrix,
    /// Relative size of the diagonal perturbation that made elimination stable.
    pub delta: f64,
    /// ‖B − LU‖_F / ‖B‖_F.
    pub relative_error: f64,
}

/// Pivot-free (Doolittle) LU of a square matrix.
///
/// Row exchanges are never used. When elimination meets a pivot below
/// `PIVOT_FLOOR·‖B‖_F` with a nonzero column beneath it, the matrix is
/// perturbed to B + δ·s·D, where D is a fixed random ±1 diagonal and
/// s = ‖B‖_F/√n, for δ in {0, tol/10, tol, 10·tol, …}. The first δ whose
/// factors reconstruct B to relative error ≤ `tol` is returned.
pub fn lu_approx(b: &DenseMatrix, tol: f64) -> Result<LuFactors> {
    let (m, n) = b.shape();
    if m != n {
        return Err(Error::Shape(format!("LU requires a square matrix, got {m}x{n}")));
    }
    if !(tol > 0.0) {
        return Err(Error::Parameter(format!("tolerance must be positive, got {tol}")));
    }
    let norm = b.frobenius();
    if norm == 0.0 {
        return Ok(LuFactors {
            lower: TriangularMatrix::identity(n, Orientation::Lower),
            upper: TriangularMatrix::from_dense_truncated(b, Orientation::Upper),
            delta: 0.0,
            relative_error: 0.0,
        });
    }

    let mut rng = ChaCha8Rng::seed_from_u64(PERTURBATION_SEED);
    let signs: Vec<f64> = (0..n).map(|_| if rng.gen_bool(0.5) { 1.0 } else { -1.0 }).collect();
    let unit = norm / (n as f64).sqrt();

    let schedule = std::iter::once(0.0).chain((-1..=3).map(|k| tol * 10f64.powi(k)));
    let mut best = (f64::NAN, f64::INFINITY);
    for delta in schedule {
        let mut perturbed = b.clone();
        for (i, s) in signs.iter().enumerate() {
            perturbed.set(i, i, b.get(i, i) + delta * unit * s);
        }
        let Some((lower, upper)) = doolittle(&perturbed, PIVOT_FLOOR * norm) else {
            continue;
        };
        let product = lower.matmul(&upper)?;
        let relative_error = b.relative_error(&product)?;
        if relative_error < best.1 {
            best = (delta, relative_error);
        }
        if relative_error <= tol {
            return Ok(LuFactors {
                lower: TriangularMatrix::from_dense_truncated(&lower, Orientation::Lower),
                upper: TriangularMatrix::from_dense_truncated(&upper, Orientation::Upper),
                delta,
                relative_error,
            });
        }
    }
    Err(Error::Factorization { best_delta: best.0, best_error: best.1 })
}

/// Returns (L, U) with unit-diagonal L, or `None` if a pivot below `floor`
/// would have to be divided by. A small pivot over an all-zero column needs no
/// division and is accepted with zero multipliers.
fn doolittle(a: &DenseMatrix, floor: f64) -> Option<(DenseMatrix, DenseMatrix)> {
    let n = a.rows();
    let mut work = a.clone();
    let mut lower = DenseMatrix::identity(n);
    for k in 0..n {
        let pivot = work.get(k, k);
        let column_empty = (k + 1..n).all(|i| work.get(i, k) == 0.0);
        if column_empty {
            continue;
        }
        if pivot.abs() < floor {
            return None;
        }
        for i in k + 1..n {
            let factor = work.get(i, k) / pivot;
            lower.set(i, k, factor);
            work.set(i, k, 0.0);
            for j in k + 1..n {
                let v = work.get(i, j) - factor * work.get(k, j);
                work.set(i, j, v);
            }
        }
    }
    Some((lower, work))
}
