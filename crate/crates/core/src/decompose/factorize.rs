//! Fits a product of square Toeplitz (or Hankel) factors to a dense matrix.
//!
//! The objective ½‖T₁⋯T_r − B‖²_F / ‖B‖²_F is minimized over the factors'
//! parameter vectors, so every iterate is structured by construction. Two
//! deterministic methods are available:
//!
//! - Levenberg–Marquardt (default): the Jacobian column for parameter d of
//!   factor k is L_k E_d R_k, with prefix product L_k, suffix product R_k and
//!   E_d the 0/1 pattern of diagonal d. Steps are accepted only if they lower
//!   the objective.
//! - Gradient descent with Armijo backtracking: each factor's dense gradient
//!   L_kᵀ (Π − B) R_kᵀ is folded onto its diagonals, which is the exact
//!   parameter gradient because each parameter is shared along one diagonal.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::FactorChain;
use crate::error::{Error, Result};
use crate::structmat::{DenseMatrix, HankelMatrix, StructuredMatrix, ToeplitzMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FitMethod {
    LevenbergMarquardt,
    GradientDescent,
}

#[derive(Debug, Clone)]
pub struct FitOptions {
    pub method: FitMethod,
    pub max_iters: usize,
    /// Initial Armijo trial step.
    pub step: f64,
    pub seed: u64,
    /// Stop as soon as the relative reconstruction error reaches this.
    pub target_rel_error: f64,
    /// Scale of the uniform noise added to the near-identity tail factors.
    pub noise: f64,
    /// Independent restarts; restart k draws noise of scale noise·4^k
    /// (capped at 1). The best fit is kept.
    pub restarts: usize,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions {
            method: FitMethod::LevenbergMarquardt,
            max_iters: 5000,
            step: 1.0,
            seed: 0,
            target_rel_error: 1e-8,
            noise: 1e-2,
            restarts: 32,
        }
    }
}

/// Progress of one fit, for diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct FitTrace {
    pub iterations: usize,
    pub objective: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Structure {
    Toeplitz,
    Hankel,
}

impl Structure {
    #[inline]
    fn index(self, n: usize, i: usize, j: usize) -> usize {
        match self {
            Structure::Toeplitz => i + n - 1 - j,
            Structure::Hankel => i + j,
        }
    }

    fn to_dense(self, n: usize, params: &[f64]) -> DenseMatrix {
        DenseMatrix::from_fn(n, n, |i, j| params[self.index(n, i, j)])
    }

    /// Adjoint of the parameter-to-matrix map.
    fn fold(self, dense: &DenseMatrix) -> Vec<f64> {
        let n = dense.rows();
        let mut out = vec![0.0; 2 * n - 1];
        for i in 0..n {
            for j in 0..n {
                out[self.index(n, i, j)] += dense.get(i, j);
            }
        }
        out
    }

    fn project(self, dense: &DenseMatrix) -> Vec<f64> {
        match self {
            Structure::Toeplitz => ToeplitzMatrix::from_dense_exact(dense)
                .unwrap_or_else(|| ToeplitzMatrix::project(dense))
                .diagonals()
                .to_vec(),
            Structure::Hankel => HankelMatrix::from_dense_exact(dense)
                .unwrap_or_else(|| HankelMatrix::project(dense))
                .antidiagonals()
                .to_vec(),
        }
    }

    /// Parameters of the structured matrix nearest the identity's role:
    /// I for Toeplitz, the exchange J for Hankel.
    fn unit(self, n: usize) -> Vec<f64> {
        let mut p = vec![0.0; 2 * n - 1];
        p[n - 1] = 1.0;
        p
    }

    fn build(self, n: usize, params: Vec<f64>) -> StructuredMatrix {
        match self {
            Structure::Toeplitz => ToeplitzMatrix::new(n, n, params).expect("parameter count").into(),
            Structure::Hankel => HankelMatrix::new(n, n, params).expect("parameter count").into(),
        }
    }
}

/// Fits r Toeplitz factors to the square matrix `b`.
///
/// The first factor starts at the diagonal-averaging projection of `b`, the
/// others at I plus noise, so the initial product is close to the projection.
/// With r = 1 the projection is already the least-squares optimum and is
/// returned directly.
pub fn toeplitz_factorize(b: &DenseMatrix, r: usize, opts: &FitOptions) -> Result<FactorChain> {
    factorize(Structure::Toeplitz, b, r, opts).map(|(c, _)| c)
}

/// Hankel analogue of [`toeplitz_factorize`]. The tail factors start at the
/// exchange matrix J plus noise and the first factor at the projection of
/// B·J^{r−1}, so the initial product again approximates B.
pub fn hankel_factorize(b: &DenseMatrix, r: usize, opts: &FitOptions) -> Result<FactorChain> {
    factorize(Structure::Hankel, b, r, opts).map(|(c, _)| c)
}

/// Same as [`toeplitz_factorize`], also returning the objective trace.
pub fn toeplitz_factorize_traced(b: &DenseMatrix, r: usize, opts: &FitOptions) -> Result<(FactorChain, FitTrace)> {
    factorize(Structure::Toeplitz, b, r, opts)
}

pub fn hankel_factorize_traced(b: &DenseMatrix, r: usize, opts: &FitOptions) -> Result<(FactorChain, FitTrace)> {
    factorize(Structure::Hankel, b, r, opts)
}

fn factorize(structure: Structure, b: &DenseMatrix, r: usize, opts: &FitOptions) -> Result<(FactorChain, FitTrace)> {
    if r < 1 {
        return Err(Error::Parameter("factor count must be at least 1".into()));
    }
    let (m, n) = b.shape();
    if m != n {
        return Err(Error::Shape(format!("factorization needs a square matrix, got {m}x{n}; pad first")));
    }
    let norm = b.frobenius();
    if norm == 0.0 {
        let mut factors = vec![structure.build(n, vec![0.0; 2 * n - 1])];
        factors.extend((1..r).map(|_| structure.build(n, structure.unit(n))));
        return Ok((FactorChain::new(factors, b)?, FitTrace { iterations: 0, objective: vec![0.0] }));
    }

    let mut best: Option<(Vec<Vec<f64>>, FitTrace, f64)> = None;
    for restart in 0..opts.restarts.max(1) {
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed.wrapping_add(restart as u64));
        let noise = (opts.noise * 4f64.powi(restart as i32)).min(1.0);
        let params = initial_params(structure, b, r, noise, &mut rng);
        let (params, trace) = match opts.method {
            FitMethod::LevenbergMarquardt => levenberg_marquardt(structure, b, norm, params, opts),
            FitMethod::GradientDescent => descend(structure, b, norm, params, opts),
        };
        let f = *trace.objective.last().expect("nonempty trace");
        if best.as_ref().map_or(true, |(_, _, bf)| f < *bf) {
            best = Some((params, trace, f));
        }
        if (2.0 * f).sqrt() <= opts.target_rel_error {
            break;
        }
    }
    let (params, trace, _) = best.expect("at least one restart");
    let factors = params.into_iter().map(|p| structure.build(n, p)).collect();
    Ok((FactorChain::new(factors, b)?, trace))
}

fn initial_params(structure: Structure, b: &DenseMatrix, r: usize, noise: f64, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    let n = b.rows();
    let head_target = match structure {
        // J^{r−1} is I for odd r and J for even r; B·J reverses B's columns.
        Structure::Hankel if r % 2 == 0 => DenseMatrix::from_fn(n, n, |i, j| b.get(i, n - 1 - j)),
        _ => b.clone(),
    };
    let mut params = vec![structure.project(&head_target)];
    for _ in 1..r {
        let mut p = structure.unit(n);
        for v in p.iter_mut() {
            *v += rng.gen_range(-noise..=noise);
        }
        params.push(p);
    }
    params
}

/// ½‖Π − B‖²_F / ‖B‖²_F together with the per-factor dense matrices.
fn objective(structure: Structure, b: &DenseMatrix, norm: f64, params: &[Vec<f64>]) -> (f64, Vec<DenseMatrix>) {
    let n = b.rows();
    let dense: Vec<DenseMatrix> = params.iter().map(|p| structure.to_dense(n, p)).collect();
    let product = chain_product(&dense, n);
    let residual = product.sub(b).expect("same shape").frobenius() / norm;
    (0.5 * residual * residual, dense)
}

fn chain_product(dense: &[DenseMatrix], n: usize) -> DenseMatrix {
    dense
        .iter()
        .fold(DenseMatrix::identity(n), |acc, f| acc.matmul(f).expect("square factors"))
}

fn gradient(structure: Structure, b: &DenseMatrix, norm: f64, dense: &[DenseMatrix]) -> Vec<Vec<f64>> {
    let n = b.rows();
    let r = dense.len();
    // prefix[k] = T_1⋯T_k (prefix[0] = I); suffix[k] = T_{k+1}⋯T_r (suffix[r] = I)
    let mut prefix = Vec::with_capacity(r + 1);
    prefix.push(DenseMatrix::identity(n));
    for f in dense {
        let next = prefix.last().unwrap().matmul(f).expect("square");
        prefix.push(next);
    }
    let mut suffix = vec![DenseMatrix::identity(n); r + 1];
    for k in (0..r).rev() {
        suffix[k] = dense[k].matmul(&suffix[k + 1]).expect("square");
    }
    let residual = prefix[r].sub(b).expect("same shape").scale(1.0 / (norm * norm));
    (0..r)
        .map(|k| {
            let g = prefix[k]
                .transpose()
                .matmul(&residual)
                .and_then(|lr| lr.matmul(&suffix[k + 1].transpose()))
                .expect("square");
            structure.fold(&g)
        })
        .collect()
}

fn descend(
    structure: Structure,
    b: &DenseMatrix,
    norm: f64,
    mut params: Vec<Vec<f64>>,
    opts: &FitOptions,
) -> (Vec<Vec<f64>>, FitTrace) {
    const ARMIJO_C: f64 = 1e-4;
    const MAX_HALVINGS: usize = 60;

    let (mut f, mut dense) = objective(structure, b, norm, &params);
    let mut trace = FitTrace { iterations: 0, objective: vec![f] };
    if params.len() == 1 {
        return (params, trace);
    }
    let mut step = opts.step;
    for iter in 0..opts.max_iters {
        if (2.0 * f).sqrt() <= opts.target_rel_error {
            break;
        }
        let grad = gradient(structure, b, norm, &dense);
        let g2: f64 = grad.iter().flatten().map(|g| g * g).sum();
        if g2 == 0.0 {
            break;
        }
        let mut t = step * 2.0;
        let mut accepted = None;
        for _ in 0..MAX_HALVINGS {
            let trial: Vec<Vec<f64>> = params
                .iter()
                .zip(&grad)
                .map(|(p, g)| p.iter().zip(g).map(|(pv, gv)| pv - t * gv).collect())
                .collect();
            let (ft, dt) = objective(structure, b, norm, &trial);
            if ft <= f - ARMIJO_C * t * g2 {
                accepted = Some((trial, ft, dt));
                break;
            }
            t *= 0.5;
        }
        let Some((trial, ft, dt)) = accepted else {
            break;
        };
        params = trial;
        f = ft;
        dense = dt;
        step = t;
        trace.iterations = iter + 1;
        trace.objective.push(f);
    }
    (params, trace)
}

/// d-th structured basis matrix E_d applied on the right of `a`: (a·E_d).
fn times_basis(structure: Structure, a: &DenseMatrix, d: usize) -> DenseMatrix {
    let n = a.rows();
    DenseMatrix::from_fn(n, n, |i, j| {
        // E_d has ones where index(l, j) == d
        let l = match structure {
            Structure::Toeplitz => (d + j + 1).checked_sub(n),
            Structure::Hankel => d.checked_sub(j),
        };
        match l {
            Some(l) if l < n => a.get(i, l),
            _ => 0.0,
        }
    })
}

/// Residual vec(Π − B)/‖B‖ and Jacobian (row-major, residuals × parameters).
fn residual_and_jacobian(
    structure: Structure,
    b: &DenseMatrix,
    norm: f64,
    dense: &[DenseMatrix],
) -> (Vec<f64>, Vec<Vec<f64>>) {
    let n = b.rows();
    let r = dense.len();
    let mut prefix = Vec::with_capacity(r + 1);
    prefix.push(DenseMatrix::identity(n));
    for f in dense {
        let next = prefix.last().unwrap().matmul(f).expect("square");
        prefix.push(next);
    }
    let mut suffix = vec![DenseMatrix::identity(n); r + 1];
    for k in (0..r).rev() {
        suffix[k] = dense[k].matmul(&suffix[k + 1]).expect("square");
    }
    let residual: Vec<f64> = prefix[r].sub(b).expect("same shape").as_slice().iter().map(|v| v / norm).collect();
    let mut columns = Vec::with_capacity(r * (2 * n - 1));
    for k in 0..r {
        for d in 0..2 * n - 1 {
            let col = times_basis(structure, &prefix[k], d).matmul(&suffix[k + 1]).expect("square");
            columns.push(col.as_slice().iter().map(|v| v / norm).collect::<Vec<f64>>());
        }
    }
    (residual, columns)
}

/// Solves (S + λI) x = rhs for symmetric positive semidefinite S by Cholesky.
fn solve_damped(s: &[Vec<f64>], lambda: f64, rhs: &[f64]) -> Option<Vec<f64>> {
    let n = rhs.len();
    let mut l = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..=i {
            let mut sum = s[i][j] + if i == j { lambda } else { 0.0 };
            for k in 0..j {
                sum -= l[i][k] * l[j][k];
            }
            if i == j {
                if sum <= 0.0 {
                    return None;
                }
                l[i][i] = sum.sqrt();
            } else {
                l[i][j] = sum / l[j][j];
            }
        }
    }
    let mut y = vec![0.0; n];
    for i in 0..n {
        let s: f64 = (0..i).map(|k| l[i][k] * y[k]).sum();
        y[i] = (rhs[i] - s) / l[i][i];
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let s: f64 = (i + 1..n).map(|k| l[k][i] * x[k]).sum();
        x[i] = (y[i] - s) / l[i][i];
    }
    Some(x)
}

/// Damped Gauss–Newton step −Jᵀ(JJᵀ + λI)⁻¹ r, computed in whichever of the
/// residual or parameter spaces is smaller.
fn lm_step(residual: &[f64], columns: &[Vec<f64>], lambda: f64) -> Option<Vec<f64>> {
    let m = residual.len();
    let p = columns.len();
    if p >= m {
        let mut jjt = vec![vec![0.0; m]; m];
        for col in columns {
            for i in 0..m {
                if col[i] == 0.0 {
                    continue;
                }
                for j in 0..=i {
                    jjt[i][j] += col[i] * col[j];
                }
            }
        }
        for i in 0..m {
            for j in 0..i {
                jjt[j][i] = jjt[i][j];
            }
        }
        let y = solve_damped(&jjt, lambda, residual)?;
        Some(columns.iter().map(|c| -c.iter().zip(&y).map(|(a, b)| a * b).sum::<f64>()).collect())
    } else {
        let jtj: Vec<Vec<f64>> = columns
            .iter()
            .map(|ci| columns.iter().map(|cj| ci.iter().zip(cj).map(|(a, b)| a * b).sum()).collect())
            .collect();
        let jtr: Vec<f64> = columns.iter().map(|c| c.iter().zip(residual).map(|(a, b)| a * b).sum()).collect();
        let x = solve_damped(&jtj, lambda, &jtr)?;
        Some(x.into_iter().map(|v| -v).collect())
    }
}

fn levenberg_marquardt(
    structure: Structure,
    b: &DenseMatrix,
    norm: f64,
    mut params: Vec<Vec<f64>>,
    opts: &FitOptions,
) -> (Vec<Vec<f64>>, FitTrace) {
    const MAX_REJECTIONS: usize = 40;
    // a run stops once 100 accepted steps improve the objective by less than 1e-6 relative
    const STALL_WINDOW: usize = 100;

    let (mut f, mut dense) = objective(structure, b, norm, &params);
    let mut trace = FitTrace { iterations: 0, objective: vec![f] };
    if params.len() == 1 {
        return (params, trace);
    }
    let width = params[0].len();
    let mut lambda = 1e-3;
    for iter in 0..opts.max_iters {
        if (2.0 * f).sqrt() <= opts.target_rel_error {
            break;
        }
        let (residual, columns) = residual_and_jacobian(structure, b, norm, &dense);
        let mut accepted = None;
        for _ in 0..MAX_REJECTIONS {
            if let Some(step) = lm_step(&residual, &columns, lambda) {
                let trial: Vec<Vec<f64>> = params
                    .iter()
                    .enumerate()
                    .map(|(k, p)| p.iter().enumerate().map(|(d, v)| v + step[k * width + d]).collect())
                    .collect();
                let (ft, dt) = objective(structure, b, norm, &trial);
                if ft < f {
                    accepted = Some((trial, ft, dt));
                    break;
                }
            }
            lambda *= 4.0;
        }
        let Some((trial, ft, dt)) = accepted else {
            break;
        };
        params = trial;
        f = ft;
        dense = dt;
        lambda = (lambda / 3.0).max(1e-12);
        trace.iterations = iter + 1;
        trace.objective.push(f);
        let len = trace.objective.len();
        if len > STALL_WINDOW && f > (1.0 - 1e-6) * trace.objective[len - 1 - STALL_WINDOW] {
            break;
        }
    }
    (params, trace)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn random_dense(n: usize, seed: u64) -> DenseMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        DenseMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0))
    }

    #[test]
    fn toeplitz_input_single_factor_is_exact() {
        let t = ToeplitzMatrix::new(3, 3, vec![0.1, 0.2, 0.3, 0.7, -1.1]).unwrap();
        let chain = toeplitz_factorize(&t.to_dense(), 1, &FitOptions::default()).unwrap();
        assert_eq!(chain.factors().len(), 1);
        assert_eq!(chain.factors()[0], StructuredMatrix::from(t));
        assert_eq!(chain.reconstruction_error(), 0.0);
    }

    #[test]
    fn hankel_input_single_factor_is_exact() {
        let h = HankelMatrix::new(3, 3, vec![0.1, 0.2, 0.3, 0.7, -1.1]).unwrap();
        let chain = hankel_factorize(&h.to_dense(), 1, &FitOptions::default()).unwrap();
        assert_eq!(chain.reconstruction_error(), 0.0);
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let b = random_dense(3, 4);
        let norm = b.frobenius();
        for structure in [Structure::Toeplitz, Structure::Hankel] {
            let mut rng = ChaCha8Rng::seed_from_u64(5);
            let params = initial_params(structure, &b, 3, 0.3, &mut rng);
            let (_, dense) = objective(structure, &b, norm, &params);
            let grad = gradient(structure, &b, norm, &dense);
            let h = 1e-6;
            for k in 0..params.len() {
                for p in 0..params[k].len() {
                    let mut plus = params.clone();
                    plus[k][p] += h;
                    let mut minus = params.clone();
                    minus[k][p] -= h;
                    let fd = (objective(structure, &b, norm, &plus).0 - objective(structure, &b, norm, &minus).0)
                        / (2.0 * h);
                    assert!((fd - grad[k][p]).abs() <= 1e-7 * (1.0 + fd.abs()), "{structure:?} {k} {p}");
                }
            }
        }
    }

    #[test]
    fn objective_never_increases() {
        let b = random_dense(4, 8);
        let opts = FitOptions { max_iters: 300, ..FitOptions::default() };
        for (_, trace) in [
            toeplitz_factorize_traced(&b, 5, &opts).unwrap(),
            hankel_factorize_traced(&b, 5, &opts).unwrap(),
        ] {
            assert!(trace.objective.windows(2).all(|w| w[1] <= w[0]));
        }
    }

    #[test]
    fn parameter_errors() {
        let b = random_dense(3, 1);
        assert!(matches!(toeplitz_factorize(&b, 0, &FitOptions::default()), Err(Error::Parameter(_))));
        let rect = DenseMatrix::zeros(2, 3);
        assert!(matches!(hankel_factorize(&rect, 2, &FitOptions::default()), Err(Error::Shape(_))));
    }
}
