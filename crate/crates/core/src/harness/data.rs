use std::f64::consts::PI;
use std::fs;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::network::Target;

const IDX_UBYTE: u8 = 0x08;

#[derive(Debug, Clone, PartialEq)]
pub struct Samples {
    pub inputs: Vec<Vec<f64>>,
    pub targets: Vec<Target>,
}

impl Samples {
    pub fn new(inputs: Vec<Vec<f64>>, targets: Vec<Target>) -> Result<Self> {
        if inputs.len() != targets.len() {
            return Err(Error::Format(format!("{} inputs but {} labels", inputs.len(), targets.len())));
        }
        if let Some(first) = inputs.first() {
            if let Some(bad) = inputs.iter().find(|x| x.len() != first.len()) {
                return Err(Error::dim(first.len(), bad.len()));
            }
        }
        Ok(Samples { inputs, targets })
    }

    pub fn len(&self) -> usize {
        self.inputs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inputs.is_empty()
    }

    pub fn input_dim(&self) -> usize {
        self.inputs.first().map_or(0, Vec::len)
    }

    pub fn take(&self, n: usize) -> Samples {
        let n = n.min(self.len());
        Samples { inputs: self.inputs[..n].to_vec(), targets: self.targets[..n].to_vec() }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub name: String,
    pub train: Samples,
    pub test: Samples,
    /// Number of classes, or `None` for regression.
    pub classes: Option<usize>,
}

/// Raw IDX payload: dimension sizes and unsigned bytes.
fn read_idx(path: &Path, expected_dims: u8) -> Result<(Vec<usize>, Vec<u8>)> {
    let bytes = fs::read(path)?;
    let name = path.display();
    if bytes.len() < 4 {
        return Err(Error::Format(format!("{name}: too short for an IDX header")));
    }
    if bytes[0] != 0 || bytes[1] != 0 || bytes[2] != IDX_UBYTE || bytes[3] != expected_dims {
        return Err(Error::Format(format!(
            "{name}: bad magic {:02x}{:02x}{:02x}{:02x}, expected 000008{expected_dims:02x}",
            bytes[0], bytes[1], bytes[2], bytes[3]
        )));
    }
    let header = 4 + 4 * expected_dims as usize;
    if bytes.len() < header {
        return Err(Error::Format(format!("{name}: truncated header")));
    }
    let dims: Vec<usize> = bytes[4..header]
        .chunks_exact(4)
        .map(|c| u32::from_be_bytes([c[0], c[1], c[2], c[3]]) as usize)
        .collect();
    let total: usize = dims.iter().product();
    if bytes.len() != header + total {
        return Err(Error::Format(format!("{name}: payload is {} bytes, header promises {total}", bytes.len() - header)));
    }
    Ok((dims, bytes[header..].to_vec()))
}

/// Images scaled to [0, 1], one flattened vector per image.
pub fn load_idx_images(path: &Path) -> Result<Vec<Vec<f64>>> {
    let (dims, data) = read_idx(path, 3)?;
    let size = dims[1] * dims[2];
    if size == 0 {
        return Err(Error::Format(format!("{}: empty images", path.display())));
    }
    Ok(data.chunks_exact(size).map(|img| img.iter().map(|&p| p as f64 / 255.0).collect()).collect())
}

pub fn load_idx_labels(path: &Path) -> Result<Vec<u8>> {
    let (_, data) = read_idx(path, 1)?;
    if let Some(bad) = data.iter().find(|&&l| l > 9) {
        return Err(Error::Format(format!("{}: label {bad} outside 0..=9", path.display())));
    }
    Ok(data)
}

/// An image file and its label file as one sample set.
pub fn load_idx(images: &Path, labels: &Path) -> Result<Samples> {
    let inputs = load_idx_images(images)?;
    let labels = load_idx_labels(labels)?;
    if inputs.len() != labels.len() {
        return Err(Error::Format(format!("{} images but {} labels", inputs.len(), labels.len())));
    }
    Samples::new(inputs, labels.into_iter().map(|l| Target::Class(l as usize)).collect())
}

/// Reads `train-*` and `t10k-*` IDX pairs from `dir`.
pub fn load_mnist_dir(dir: &Path) -> Result<Dataset> {
    let train = load_idx(&dir.join("train-images-idx3-ubyte"), &dir.join("train-labels-idx1-ubyte"))?;
    let test = load_idx(&dir.join("t10k-images-idx3-ubyte"), &dir.join("t10k-labels-idx1-ubyte"))?;
    Ok(Dataset { name: "mnist".into(), train, test, classes: Some(10) })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SynthKind {
    Regression,
    TwoSpirals,
}

impl SynthKind {
    pub fn parse(s: &str) -> Option<SynthKind> {
        match s {
            "regression" => Some(SynthKind::Regression),
            "two_spirals" | "two-spirals" | "spirals" => Some(SynthKind::TwoSpirals),
            _ => None,
        }
    }
}

/// Smooth target on R²: a positive and a negative Gaussian bump.
pub fn bumps(x: f64, y: f64) -> f64 {
    let a = ((x - 0.35).powi(2) + (y - 0.25).powi(2)) / 0.18;
    let b = ((x + 0.4).powi(2) + (y + 0.3).powi(2)) / 0.12;
    (-a).exp() - 0.7 * (-b).exp()
}

/// Seeded synthetic set of `n_points` samples split 80/20 into train and test.
pub fn synth_dataset(kind: SynthKind, n_points: usize, seed: u64) -> Result<Dataset> {
    if n_points < 2 {
        return Err(Error::Parameter("need at least two points".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut inputs, mut targets): (Vec<Vec<f64>>, Vec<Target>) = match kind {
        SynthKind::Regression => (0..n_points)
            .map(|_| {
                let (x, y) = (rng.gen_range(-1.0..=1.0), rng.gen_range(-1.0..=1.0));
                (vec![x, y], Target::Values(vec![bumps(x, y)]))
            })
            .unzip(),
        SynthKind::TwoSpirals => (0..n_points)
            .map(|i| {
                let class = i % 2;
                let t = rng.gen_range(0.0..1.0f64).sqrt();
                let angle = 3.0 * PI * t + PI * class as f64;
                let r = t + rng.gen_range(-0.02..0.02);
                (vec![r * angle.cos(), r * angle.sin()], Target::Class(class))
            })
            .unzip(),
    };
    let mut order: Vec<usize> = (0..n_points).collect();
    order.shuffle(&mut rng);
    let cut = (n_points * 4 / 5).clamp(1, n_points - 1);
    let pick = |idx: &[usize], inputs: &mut Vec<Vec<f64>>, targets: &mut Vec<Target>| {
        Samples::new(
            idx.iter().map(|&i| std::mem::take(&mut inputs[i])).collect(),
            idx.iter().map(|&i| targets[i].clone()).collect(),
        )
    };
    let train = pick(&order[..cut], &mut inputs, &mut targets)?;
    let test = pick(&order[cut..], &mut inputs, &mut targets)?;
    let (name, classes) = match kind {
        SynthKind::Regression => ("regression", None),
        SynthKind::TwoSpirals => ("two_spirals", Some(2)),
    };
    Ok(Dataset { name: name.into(), train, test, classes })
}
