use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LossKind {
    /// Mean over output coordinates of (p − t)².
    Mse,
    /// Softmax cross-entropy against a class index.
    CrossEntropy,
}

impl LossKind {
    pub fn name(self) -> &'static str {
        match self {
            LossKind::Mse => "mse",
            LossKind::CrossEntropy => "cross_entropy",
        }
    }

    pub fn parse(s: &str) -> Option<LossKind> {
        match s {
            "mse" => Some(LossKind::Mse),
            "cross_entropy" | "cross-entropy" | "ce" => Some(LossKind::CrossEntropy),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Target {
    Class(usize),
    Values(Vec<f64>),
}

/// Loss value and its gradient with respect to `prediction`.
pub fn loss_eval(kind: LossKind, prediction: &[f64], target: &Target) -> Result<(f64, Vec<f64>)> {
    match (kind, target) {
        (LossKind::Mse, Target::Values(t)) => {
            if t.len() != prediction.len() {
                return Err(Error::dim(prediction.len(), t.len()));
            }
            let m = prediction.len() as f64;
            let loss = prediction.iter().zip(t).map(|(p, q)| (p - q) * (p - q)).sum::<f64>() / m;
            let grad = prediction.iter().zip(t).map(|(p, q)| 2.0 * (p - q) / m).collect();
            Ok((loss, grad))
        }
        (LossKind::Mse, Target::Class(c)) => {
            let onehot = one_hot(*c, prediction.len())?;
            loss_eval(kind, prediction, &Target::Values(onehot))
        }
        (LossKind::CrossEntropy, Target::Class(c)) => {
            if *c >= prediction.len() {
                return Err(Error::Parameter(format!("class {c} out of range for {} outputs", prediction.len())));
            }
            let probs = softmax(prediction);
            let loss = -log_softmax_at(prediction, *c);
            let mut grad = probs;
            grad[*c] -= 1.0;
            Ok((loss, grad))
        }
        (LossKind::CrossEntropy, Target::Values(_)) => {
            Err(Error::Parameter("cross-entropy needs a class index target".into()))
        }
    }
}

fn one_hot(c: usize, len: usize) -> Result<Vec<f64>> {
    if c >= len {
        return Err(Error::Parameter(format!("class {c} out of range for {len} outputs")));
    }
    let mut v = vec![0.0; len];
    v[c] = 1.0;
    Ok(v)
}

pub fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|v| (v - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / sum).collect()
}

fn log_softmax_at(logits: &[f64], c: usize) -> f64 {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lse = max + logits.iter().map(|v| (v - max).exp()).sum::<f64>().ln();
    logits[c] - lse
}

/// Index of the largest entry; ties go to the lowest index.
pub fn argmax(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, x) in v.iter().enumerate() {
        if *x > v[best] {
            best = i;
        }
    }
    best
}
