use crate::error::{Error, Result};
use crate::structmat::ToeplitzMatrix;

/// Stride-1 one-channel convolution that reproduces an m×n Toeplitz layer.
///
/// The input of length n is padded with m − 1 zeros on each side and
/// cross-correlated with the kernel, giving exactly m outputs.
#[derive(Debug, Clone, PartialEq)]
pub struct Conv1dSpec {
    pub kernel: Vec<f64>,
    pub input_len: usize,
    pub output_len: usize,
    pub stride: usize,
}

impl Conv1dSpec {
    pub fn padding(&self) -> usize {
        self.output_len - 1
    }

    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.input_len {
            return Err(Error::dim(self.input_len, x.len()));
        }
        let pad = self.padding();
        let mut padded = vec![0.0; pad];
        padded.extend_from_slice(x);
        padded.extend(std::iter::repeat(0.0).take(pad));
        Ok((0..self.output_len)
            .map(|i| self.kernel.iter().zip(&padded[i * self.stride..]).map(|(k, v)| k * v).sum())
            .collect())
    }
}

/// κ = [a_{m−1}, …, a_0, …, a_{1−n}]: the diagonal vector reversed.
pub fn toeplitz_layer_to_conv(t: &ToeplitzMatrix) -> Conv1dSpec {
    let mut kernel = t.diagonals().to_vec();
    kernel.reverse();
    Conv1dSpec { kernel, input_len: t.cols(), output_len: t.rows(), stride: 1 }
}

pub fn conv_to_toeplitz(spec: &Conv1dSpec) -> Result<ToeplitzMatrix> {
    if spec.stride != 1 {
        return Err(Error::Parameter(format!("only stride 1 maps to a Toeplitz matrix, got {}", spec.stride)));
    }
    let mut diagonals = spec.kernel.clone();
    diagonals.reverse();
    ToeplitzMatrix::new(spec.output_len, spec.input_len, diagonals)
}
