use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Finite point cloud standing in for a compact input set.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleDomain {
    points: Vec<Vec<f64>>,
    radius: f64,
}

impl SampleDomain {
    pub fn new(points: Vec<Vec<f64>>) -> Result<Self> {
        let dim = points.first().map(Vec::len).ok_or_else(|| Error::Parameter("empty sample domain".into()))?;
        if dim == 0 {
            return Err(Error::Parameter("zero-dimensional sample points".into()));
        }
        if let Some(bad) = points.iter().find(|p| p.len() != dim) {
            return Err(Error::dim(dim, bad.len()));
        }
        let radius = points.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
        Ok(SampleDomain { points, radius })
    }

    /// `count` points drawn uniformly from the box [lo, hi]^dim.
    pub fn uniform(dim: usize, count: usize, lo: f64, hi: f64, seed: u64) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let points = (0..count).map(|_| (0..dim).map(|_| rng.gen_range(lo..=hi)).collect()).collect();
        Self::new(points)
    }

    /// Tensor grid with `per_axis` evenly spaced values per coordinate.
    pub fn grid(dim: usize, per_axis: usize, lo: f64, hi: f64) -> Result<Self> {
        if per_axis == 0 {
            return Err(Error::Parameter("grid needs at least one point per axis".into()));
        }
        let step = if per_axis > 1 { (hi - lo) / (per_axis - 1) as f64 } else { 0.0 };
        let axis: Vec<f64> = (0..per_axis).map(|k| lo + step * k as f64).collect();
        let total = per_axis.checked_pow(dim as u32).ok_or_else(|| Error::Parameter("grid too large".into()))?;
        let points = (0..total)
            .map(|mut idx| {
                (0..dim)
                    .map(|_| {
                        let v = axis[idx % per_axis];
                        idx /= per_axis;
                        v
                    })
                    .collect()
            })
            .collect();
        Self::new(points)
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn dim(&self) -> usize {
        self.points[0].len()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Max |x_i| over all points and coordinates.
    pub fn radius(&self) -> f64 {
        self.radius
    }
}
