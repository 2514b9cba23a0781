//! The ρ_h identity approximator built from a single activation, and the
//! halving search that picks h for a target accuracy on a sample cloud.

mod activation;
mod domain;

pub use activation::Activation;
pub use domain::SampleDomain;

use crate::error::{Error, Result};
use crate::structmat::norm2;

pub type ActivationSpec = Activation;

/// Largest number of halvings tried by [`choose_h`].
pub const MAX_HALVINGS: u32 = 60;

/// ρ_h(x)_i = [σ(h·x_i + a) − σ(a)] / (h·σ′(a)).
pub fn rho_apply(sigma: Activation, h: f64, x: &[f64]) -> Result<Vec<f64>> {
    if h == 0.0 || !h.is_finite() {
        return Err(Error::Parameter(format!("ρ_h needs a finite nonzero h, got {h}")));
    }
    let a = sigma.smooth_point();
    let (s0, d0) = (sigma.eval(a), sigma.deriv(a));
    if d0 == 0.0 {
        return Err(Error::Parameter(format!("{sigma} has zero derivative at its smooth point")));
    }
    let scale = 1.0 / (h * d0);
    Ok(x.iter().map(|&v| (sigma.eval(h * v + a) - s0) * scale).collect())
}

/// Largest sup over the cloud of ‖ρ_h(x) − x‖₂.
pub fn rho_sup_error(sigma: Activation, h: f64, points: &[Vec<f64>]) -> Result<f64> {
    let mut worst = 0.0f64;
    for p in points {
        let r = rho_apply(sigma, h, p)?;
        let diff: Vec<f64> = r.iter().zip(p).map(|(a, b)| a - b).collect();
        worst = worst.max(norm2(&diff));
    }
    Ok(worst)
}

/// First h in 1, 1/2, 1/4, … (at most [`MAX_HALVINGS`] halvings) whose
/// sup error over `domain` is within `eps`.
pub fn choose_h(sigma: Activation, domain: &SampleDomain, eps: f64) -> Result<f64> {
    choose_h_on(sigma, domain.points(), eps)
}

pub(crate) fn choose_h_on(sigma: Activation, points: &[Vec<f64>], eps: f64) -> Result<f64> {
    if !(eps > 0.0) {
        return Err(Error::Parameter(format!("eps must be positive, got {eps}")));
    }
    let mut best = f64::INFINITY;
    let mut h = 1.0;
    for _ in 0..=MAX_HALVINGS {
        let err = rho_sup_error(sigma, h, points)?;
        if err <= eps {
            return Ok(h);
        }
        best = best.min(err);
        h *= 0.5;
    }
    Err(Error::Selection { eps, halvings: MAX_HALVINGS, best_error: best })
}
