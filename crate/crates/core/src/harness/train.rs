use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::data::{Dataset, Samples};
use crate::error::{Error, Result};
use crate::identity_approx::Activation;
use crate::network::{argmax, loss_eval, LossKind, Network, Target};
use crate::structmat::MatrixKind;

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    /// Layer widths, input first.
    pub dims: Vec<usize>,
    /// Weight kind per layer.
    pub kinds: Vec<MatrixKind>,
    pub activation: Activation,
    pub loss: LossKind,
    pub lr: f64,
    pub batch_size: usize,
    pub epochs: usize,
    pub seed: u64,
    /// Multiply the rate by `factor` every `every` epochs.
    pub lr_decay: Option<(f64, usize)>,
    pub fast: bool,
    pub parallel: bool,
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.dims.len() < 2 || self.dims.contains(&0) {
            return Err(Error::Config("widths must list at least two positive sizes".into()));
        }
        if self.kinds.len() != self.dims.len() - 1 {
            return Err(Error::Config(format!("{} layers need {} kinds", self.dims.len() - 1, self.kinds.len())));
        }
        if !(self.lr > 0.0) || !self.lr.is_finite() {
            return Err(Error::Config(format!("learning rate must be positive, got {}", self.lr)));
        }
        if self.batch_size == 0 {
            return Err(Error::Config("batch size must be positive".into()));
        }
        if let Some((factor, every)) = self.lr_decay {
            if !(factor > 0.0) || every == 0 {
                return Err(Error::Config("lr decay needs a positive factor and period".into()));
            }
        }
        Ok(())
    }

    pub fn lr_at(&self, epoch: usize) -> f64 {
        match self.lr_decay {
            Some((factor, every)) => self.lr * factor.powi((epoch / every) as i32),
            None => self.lr,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpochMetrics {
    pub epoch: usize,
    pub lr: f64,
    pub train_loss: f64,
    pub train_score: f64,
    pub test_score: f64,
}

/// Accuracy for class targets, mean squared error otherwise.
pub fn score(net: &Network, samples: &Samples, fast: bool) -> Result<f64> {
    if samples.is_empty() {
        return Ok(0.0);
    }
    let mut total = 0.0;
    for (x, t) in samples.inputs.iter().zip(&samples.targets) {
        let out = net.eval(x, fast)?;
        total += match t {
            Target::Class(c) => f64::from(u8::from(argmax(&out) == *c)),
            Target::Values(_) => loss_eval(LossKind::Mse, &out, t)?.0,
        };
    }
    Ok(total / samples.len() as f64)
}

/// Mini-batch SGD over a seeded shuffle of the training split.
pub fn train(config: &TrainConfig, data: &Dataset) -> Result<(Network, Vec<EpochMetrics>)> {
    config.validate()?;
    if data.train.input_dim() != config.dims[0] {
        return Err(Error::Config(format!("data has {} inputs, network expects {}", data.train.input_dim(), config.dims[0])));
    }
    let net = Network::random(&config.dims, &config.kinds, config.activation, config.seed)?;
    train_from(net, config, data)
}

/// Same as [`train`], starting from `net` instead of a fresh initialization.
pub fn train_from(mut net: Network, config: &TrainConfig, data: &Dataset) -> Result<(Network, Vec<EpochMetrics>)> {
    config.validate()?;
    if net.input_dim() != data.train.input_dim() {
        return Err(Error::Config(format!("data has {} inputs, network expects {}", data.train.input_dim(), net.input_dim())));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed ^ 0x5a17_b00c);
    let mut order: Vec<usize> = (0..data.train.len()).collect();
    let mut log = Vec::with_capacity(config.epochs);
    for epoch in 0..config.epochs {
        let lr = config.lr_at(epoch);
        order.shuffle(&mut rng);
        let mut loss_sum = 0.0;
        for batch in order.chunks(config.batch_size) {
            let xs: Vec<&[f64]> = batch.iter().map(|&i| data.train.inputs[i].as_slice()).collect();
            let ts: Vec<&Target> = batch.iter().map(|&i| &data.train.targets[i]).collect();
            let (loss, grads) = net.batch_gradient(&xs, &ts, config.loss, config.fast, config.parallel)?;
            if !loss.is_finite() {
                return Err(Error::Parameter(format!("loss diverged in epoch {}", epoch + 1)));
            }
            loss_sum += loss * batch.len() as f64;
            net.sgd_step_in_place(&grads, lr)?;
        }
        log.push(EpochMetrics {
            epoch: epoch + 1,
            lr,
            train_loss: loss_sum / data.train.len().max(1) as f64,
            train_score: score(&net, &data.train, config.fast)?,
            test_score: score(&net, &data.test, config.fast)?,
        });
    }
    Ok((net, log))
}

pub const METRICS_HEADER: &str = "epoch,lr,train_loss,train_score,test_score";

pub fn metrics_csv(log: &[EpochMetrics]) -> String {
    let mut out = format!("{METRICS_HEADER}\n");
    for m in log {
        let _ = writeln!(out, "{},{},{},{},{}", m.epoch, m.lr, m.train_loss, m.train_score, m.test_score);
    }
    out
}
