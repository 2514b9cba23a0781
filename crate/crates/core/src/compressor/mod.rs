//! Turns a dense network into one whose weights are all Toeplitz, all Hankel,
//! or alternating upper/lower triangular, within a sup-norm error on a sample
//! cloud.
//!
//! Every weight is replaced by a chain of structured factors. Between two
//! consecutive factors an identity approximation ρ_h is inserted and realized
//! as an extra activation layer; the scalings it needs are folded into the
//! neighbouring factors, which keeps them structured.

mod conv;
mod shallow;

pub use conv::{conv_to_toeplitz, toeplitz_layer_to_conv, Conv1dSpec};
pub use shallow::{restructure_shallow, restructure_shallow_network, ShallowMode, ShallowNet};

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::decompose::{
    hankel_factorize, lu_chain, pad_to_square_with, toeplitz_factorize, FactorChain, FitOptions, SelectorKind,
    SelectorSide,
};
use crate::error::{Error, Result};
use crate::identity_approx::{choose_h, rho_apply, Activation, SampleDomain};
use crate::network::{Layer, Network};
use crate::structmat::{norm2, DenseMatrix, MatrixKind, Orientation, StructuredMatrix, TriangularMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CompressMode {
    Toeplitz,
    Hankel,
    Lu,
}

impl CompressMode {
    pub fn name(self) -> &'static str {
        match self {
            CompressMode::Toeplitz => "toeplitz",
            CompressMode::Hankel => "hankel",
            CompressMode::Lu => "lu",
        }
    }

    pub fn parse(s: &str) -> Option<CompressMode> {
        match s {
            "toeplitz" => Some(CompressMode::Toeplitz),
            "hankel" => Some(CompressMode::Hankel),
            "lu" => Some(CompressMode::Lu),
            _ => None,
        }
    }
}

impl fmt::Display for CompressMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone)]
pub struct CompressOptions {
    /// Largest number of square factors per weight; `None` means 2s + 5 for an
    /// s×s (padded) weight.
    pub factor_budget: Option<usize>,
    /// Relative Frobenius error at which a factor chain is accepted.
    pub weight_tol: f64,
    pub fit: FitOptions,
    /// Held-out cloud for the final measurement. Defaults to uniform samples
    /// in the bounding box of the tuning domain.
    pub validation: Option<SampleDomain>,
    /// Default validation size as a multiple of the tuning size.
    pub validation_factor: usize,
    /// Times the insertion budget is halved after a failed validation.
    pub retries: u32,
    pub seed: u64,
}

impl Default for CompressOptions {
    fn default() -> Self {
        CompressOptions {
            factor_budget: None,
            weight_tol: 1e-6,
            fit: FitOptions { target_rel_error: 1e-6, ..FitOptions::default() },
            validation: None,
            validation_factor: 5,
            retries: 4,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct CompressionReport {
    pub mode: CompressMode,
    pub eps: f64,
    /// Sup error against the dense network on the validation cloud.
    pub achieved_error: f64,
    /// Sup error on the tuning cloud.
    pub tuning_error: f64,
    /// Sup error of the network with exact chain products and no insertions.
    pub factorization_error: f64,
    /// Number of structured factors r_j per original layer.
    pub factor_counts: Vec<usize>,
    /// Chosen h in insertion order; Σ_j (r_j − 1) entries.
    pub h_values: Vec<f64>,
    /// Relative Frobenius error of each weight's chain.
    pub reconstruction_errors: Vec<f64>,
    /// Budget halvings used before validation passed.
    pub attempts: u32,
    pub validation_points: usize,
    pub network: Network,
}

/// Structured factors of one original layer, in application order.
#[derive(Debug, Clone)]
struct LayerPlan {
    factors: Vec<StructuredMatrix>,
    bias: Vec<f64>,
    activation: Option<Activation>,
    reconstruction_error: f64,
}

impl LayerPlan {
    /// F_r ⋯ F_{k+1}: the factors applied after the k-th one.
    fn tail_product(&self, k: usize) -> Option<DenseMatrix> {
        let mut acc: Option<DenseMatrix> = None;
        for f in &self.factors[k..] {
            let d = f.to_dense();
            acc = Some(match acc {
                None => d,
                Some(a) => d.matmul(&a).expect("chain shapes"),
            });
        }
        acc
    }

    fn product(&self) -> DenseMatrix {
        self.tail_product(0).expect("nonempty plan")
    }

    fn insertions(&self) -> usize {
        self.factors.len() - 1
    }
}

/// Largest ‖f(x) − g(x)‖₂ over `points`.
pub fn sup_gap(f: &Network, g: &Network, points: &[Vec<f64>]) -> Result<f64> {
    let mut worst = 0.0f64;
    for x in points {
        let (a, b) = (f.eval(x, false)?, g.eval(x, false)?);
        let diff: Vec<f64> = a.iter().zip(&b).map(|(p, q)| p - q).collect();
        worst = worst.max(norm2(&diff));
    }
    Ok(worst)
}

pub fn compress(
    dense_net: &Network,
    domain: &SampleDomain,
    eps: f64,
    mode: CompressMode,
    opts: &CompressOptions,
) -> Result<CompressionReport> {
    if !(eps > 0.0) {
        return Err(Error::Parameter(format!("eps must be positive, got {eps}")));
    }
    if domain.dim() != dense_net.input_dim() {
        return Err(Error::dim(dense_net.input_dim(), domain.dim()));
    }
    let act = insertion_activation(dense_net)?;
    let plans = plan_layers(dense_net, mode, opts)?;
    let validation = match &opts.validation {
        Some(v) => v.clone(),
        None => bounding_box_sample(domain, opts.validation_factor.max(1) * domain.len(), opts.seed)?,
    };

    let factored = realize_products(&plans)?;
    let factorization_error = sup_gap(dense_net, &factored, domain.points())?;
    if factorization_error > eps / 2.0 {
        let (layer, err) = plans
            .iter()
            .map(|p| p.reconstruction_error)
            .enumerate()
            .fold((0, -1.0), |best, (i, e)| if e > best.1 { (i, e) } else { best });
        return Err(Error::CompressionInfeasible {
            layer,
            reason: format!(
                "factor chains alone give sup error {factorization_error:e} > eps/2 = {:e} \
                 (worst weight reconstruction error {err:e})",
                eps / 2.0
            ),
        });
    }

    let lipschitz = downstream_bounds(&plans);
    let insertions: usize = plans.iter().map(LayerPlan::insertions).sum();
    let mut last_error = f64::INFINITY;
    for attempt in 0..=opts.retries {
        let share = if insertions > 0 { 0.5f64.powi(attempt as i32) * (eps / 2.0) / insertions as f64 } else { 0.0 };
        let h_values = select_h(&plans, &lipschitz, act, domain, share)?;
        let network = assemble(&plans, &h_values, act)?;
        let achieved_error = sup_gap(dense_net, &network, validation.points())?;
        if achieved_error <= eps {
            return Ok(CompressionReport {
                mode,
                eps,
                achieved_error,
                tuning_error: sup_gap(dense_net, &network, domain.points())?,
                factorization_error,
                factor_counts: plans.iter().map(|p| p.factors.len()).collect(),
                h_values,
                reconstruction_errors: plans.iter().map(|p| p.reconstruction_error).collect(),
                attempts: attempt,
                validation_points: validation.len(),
                network,
            });
        }
        last_error = achieved_error;
    }
    Err(Error::CompressionInfeasible {
        layer: dense_net.depth() - 1,
        reason: format!(
            "validation sup error {last_error:e} still exceeds eps {eps:e} after {} budget halvings",
            opts.retries
        ),
    })
}

/// The hidden activation shared by the network's layers.
fn insertion_activation(net: &Network) -> Result<Activation> {
    let act = net
        .layers()
        .iter()
        .find_map(Layer::activation)
        .ok_or_else(|| Error::Parameter("network has no activation to build identity approximations from".into()))?;
    if !act.validate() {
        return Err(Error::Parameter(format!("{act} has no usable smooth point")));
    }
    Ok(act)
}

fn plan_layers(net: &Network, mode: CompressMode, opts: &CompressOptions) -> Result<Vec<LayerPlan>> {
    let mut expected = Orientation::Upper;
    let mut plans = Vec::with_capacity(net.depth());
    for (j, layer) in net.layers().iter().enumerate() {
        let dense = layer.weight().to_dense();
        let factors = match mode {
            CompressMode::Toeplitz => shift_structured_factors(&dense, MatrixKind::Toeplitz, j, opts)?,
            CompressMode::Hankel => shift_structured_factors(&dense, MatrixKind::Hankel, j, opts)?,
            CompressMode::Lu => {
                let f = triangular_factors(&dense, expected, opts).map_err(|e| Error::CompressionInfeasible {
                    layer: j,
                    reason: e.to_string(),
                })?;
                if let Some(StructuredMatrix::Triangular(t)) = f.last() {
                    expected = t.orientation().flipped();
                }
                f
            }
        };
        let mut plan = LayerPlan {
            factors,
            bias: layer.bias().to_vec(),
            activation: layer.activation(),
            reconstruction_error: 0.0,
        };
        plan.reconstruction_error = dense.relative_error(&plan.product())?;
        plans.push(plan);
    }
    Ok(plans)
}

/// Application-order Toeplitz or Hankel factors for one weight, with the
/// padding selector as its own factor when the weight is rectangular.
fn shift_structured_factors(
    dense: &DenseMatrix,
    kind: MatrixKind,
    layer: usize,
    opts: &CompressOptions,
) -> Result<Vec<StructuredMatrix>> {
    if let Some(exact) = StructuredMatrix::from_dense_exact(kind, dense) {
        return Ok(vec![exact]);
    }
    let selector_kind = if kind == MatrixKind::Hankel { SelectorKind::Hankel } else { SelectorKind::Toeplitz };
    let padding = pad_to_square_with(dense, selector_kind);
    let s = padding.square.rows();
    let budget = opts.factor_budget.unwrap_or(2 * s + 5).max(1);
    let fit = FitOptions {
        target_rel_error: opts.weight_tol,
        seed: opts.fit.seed.wrapping_add(1000 * layer as u64),
        ..opts.fit.clone()
    };
    let mut best: Option<FactorChain> = None;
    for r in factor_counts(s, budget) {
        let chain = match kind {
            MatrixKind::Hankel => hankel_factorize(&padding.square, r, &fit)?,
            _ => toeplitz_factorize(&padding.square, r, &fit)?,
        };
        let done = chain.reconstruction_error() <= opts.weight_tol;
        if best.as_ref().map_or(true, |b| chain.reconstruction_error() < b.reconstruction_error()) {
            best = Some(chain);
        }
        if done {
            break;
        }
    }
    let mut factors: Vec<StructuredMatrix> = best.expect("at least one candidate").into_factors();
    factors.reverse();
    match padding.side {
        SelectorSide::None => {}
        SelectorSide::Right => factors.insert(0, padding.selector),
        SelectorSide::Left => factors.push(padding.selector),
    }
    Ok(factors)
}

/// Candidate chain lengths, shortest first: from the parameter-count lower
/// bound ⌈s²/(2s−1)⌉ a few steps up, then the full budget.
fn factor_counts(s: usize, budget: usize) -> Vec<usize> {
    let lower = (s * s).div_ceil(2 * s - 1).max(1);
    let mut out: Vec<usize> = (lower..=lower + 2).chain([2 * lower, budget]).filter(|&r| r <= budget).collect();
    out.sort_unstable();
    out.dedup();
    if out.is_empty() {
        out.push(budget);
    }
    out
}

/// Two triangular factors whose application order starts with `first`.
fn triangular_factors(dense: &DenseMatrix, first: Orientation, opts: &CompressOptions) -> Result<Vec<StructuredMatrix>> {
    if let Some(t) = TriangularMatrix::from_dense_exact(dense, first) {
        return Ok(vec![t.into()]);
    }
    let tol = opts.weight_tol;
    Ok(match first {
        // B = L·U: U acts first.
        Orientation::Upper => {
            let mut f = lu_chain(dense, tol)?.into_factors();
            f.reverse();
            f
        }
        // Bᵀ = L'·U' gives B = U'ᵀ·L'ᵀ: L'ᵀ (upper→lower flip) acts first.
        Orientation::Lower => {
            lu_chain(&dense.transpose(), tol)?.into_factors().iter().map(StructuredMatrix::transpose).collect()
        }
    })
}

fn realize_products(plans: &[LayerPlan]) -> Result<Network> {
    let layers = plans
        .iter()
        .map(|p| Layer::new(p.product().into(), p.bias.clone(), p.activation))
        .collect::<Result<Vec<_>>>()?;
    Network::new(layers)
}

/// Activation gain: Lipschitz constant times √width, or 1 for affine output.
fn activation_gain(act: Option<Activation>, width: usize) -> f64 {
    act.map_or(1.0, |a| a.lipschitz() * (width as f64).sqrt())
}

/// For every insertion, a bound on how much an error at that point can grow
/// before reaching the output, in insertion order.
fn downstream_bounds(plans: &[LayerPlan]) -> Vec<f64> {
    let mut after = vec![1.0; plans.len()];
    for j in (0..plans.len().saturating_sub(1)).rev() {
        let next = &plans[j + 1];
        let rows = next.factors.last().expect("nonempty plan").rows();
        after[j] = after[j + 1] * next.product().operator_norm(100) * activation_gain(next.activation, rows);
    }
    let mut bounds = Vec::new();
    for (j, plan) in plans.iter().enumerate() {
        let rows = plan.factors.last().expect("nonempty plan").rows();
        for k in 1..plan.factors.len() {
            let within = plan.tail_product(k).expect("k < len").operator_norm(100);
            bounds.push(within * activation_gain(plan.activation, rows) * after[j]);
        }
    }
    bounds
}

/// Chooses each h in application order on the pushed-forward tuning cloud.
fn select_h(
    plans: &[LayerPlan],
    lipschitz: &[f64],
    act: Activation,
    domain: &SampleDomain,
    share: f64,
) -> Result<Vec<f64>> {
    let mut cloud: Vec<Vec<f64>> = domain.points().to_vec();
    let mut hs = Vec::with_capacity(lipschitz.len());
    for plan in plans {
        let mut v: Vec<Vec<f64>> = cloud.iter().map(|x| plan.factors[0].matvec_naive(x)).collect::<Result<_>>()?;
        for factor in &plan.factors[1..] {
            let budget = share / lipschitz[hs.len()].max(f64::MIN_POSITIVE);
            let h = choose_h(act, &SampleDomain::new(v.clone())?, budget)?;
            hs.push(h);
            v = v
                .iter()
                .map(|z| factor.matvec_naive(&rho_apply(act, h, z)?))
                .collect::<Result<_>>()?;
        }
        cloud = v
            .into_iter()
            .map(|mut y| {
                for (yi, b) in y.iter_mut().zip(&plan.bias) {
                    *yi += b;
                    if let Some(a) = plan.activation {
                        *yi = a.eval(*yi);
                    }
                }
                y
            })
            .collect();
    }
    Ok(hs)
}

/// Realizes every ρ_h as a scaled activation layer and folds the affine
/// correction into the next factor's scale and bias.
fn assemble(plans: &[LayerPlan], hs: &[f64], act: Activation) -> Result<Network> {
    let a = act.smooth_point();
    let (s0, d0) = (act.eval(a), act.deriv(a));
    let mut layers = Vec::new();
    let mut hi = 0;
    for plan in plans {
        let r = plan.factors.len();
        if r == 1 {
            layers.push(Layer::new(plan.factors[0].clone(), plan.bias.clone(), plan.activation)?);
            continue;
        }
        let mut prev_h = hs[hi];
        let first = &plan.factors[0];
        layers.push(Layer::new(first.scale(prev_h), vec![a; first.rows()], Some(act))?);
        hi += 1;
        for (k, f) in plan.factors[1..].iter().enumerate() {
            let last = k == r - 2;
            let c = if last { 1.0 / (prev_h * d0) } else { hs[hi] / (prev_h * d0) };
            let ones = f.matvec_naive(&vec![1.0; f.cols()])?;
            let base: Vec<f64> = if last { plan.bias.clone() } else { vec![a; f.rows()] };
            let bias = base.iter().zip(&ones).map(|(b, o)| b - c * s0 * o).collect();
            layers.push(Layer::new(f.scale(c), bias, if last { plan.activation } else { Some(act) })?);
            if !last {
                prev_h = hs[hi];
                hi += 1;
            }
        }
    }
    Network::new(layers)
}

/// Uniform samples in the per-coordinate bounding box of `domain`.
pub fn bounding_box_sample(domain: &SampleDomain, count: usize, seed: u64) -> Result<SampleDomain> {
    let dim = domain.dim();
    let mut lo = vec![f64::INFINITY; dim];
    let mut hi = vec![f64::NEG_INFINITY; dim];
    for p in domain.points() {
        for (i, v) in p.iter().enumerate() {
            lo[i] = lo[i].min(*v);
            hi[i] = hi[i].max(*v);
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x7a11_da7e);
    let points = (0..count.max(1))
        .map(|_| (0..dim).map(|i| if hi[i] > lo[i] { rng.gen_range(lo[i]..=hi[i]) } else { lo[i] }).collect())
        .collect();
    SampleDomain::new(points)
}
