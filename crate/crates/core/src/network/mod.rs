//! Feed-forward networks over structured weights with reverse-mode gradients
//! taken directly with respect to the stored parameters.

mod loss;

pub use loss::{argmax, loss_eval, softmax, LossKind, Target};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::identity_approx::Activation;
use crate::structmat::{MatrixKind, StructuredMatrix};

/// One affine map followed by an optional pointwise activation: σ(Ax + b).
#[derive(Debug, Clone, PartialEq)]
pub struct Layer {
    weight: StructuredMatrix,
    bias: Vec<f64>,
    activation: Option<Activation>,
}

impl Layer {
    pub fn new(weight: StructuredMatrix, bias: Vec<f64>, activation: Option<Activation>) -> Result<Self> {
        if bias.len() != weight.rows() {
            return Err(Error::dim(weight.rows(), bias.len()));
        }
        Ok(Layer { weight, bias, activation })
    }

    pub fn weight(&self) -> &StructuredMatrix {
        &self.weight
    }

    pub fn bias(&self) -> &[f64] {
        &self.bias
    }

    pub fn activation(&self) -> Option<Activation> {
        self.activation
    }

    pub fn input_dim(&self) -> usize {
        self.weight.cols()
    }

    pub fn output_dim(&self) -> usize {
        self.weight.rows()
    }

    pub fn weight_param_count(&self) -> usize {
        self.weight.param_count()
    }

    pub fn param_count(&self) -> usize {
        self.weight.param_count() + self.bias.len()
    }

    /// Pre-activation Ax + b.
    pub fn affine(&self, x: &[f64], fast: bool) -> Result<Vec<f64>> {
        let mut y = self.weight.matvec(x, fast)?;
        for (v, b) in y.iter_mut().zip(&self.bias) {
            *v += b;
        }
        Ok(y)
    }

    pub fn apply(&self, x: &[f64], fast: bool) -> Result<Vec<f64>> {
        let mut y = self.affine(x, fast)?;
        if let Some(act) = self.activation {
            y.iter_mut().for_each(|v| *v = act.eval(*v));
        }
        Ok(y)
    }
}

/// Layers composed in order; the last layer is affine only.
#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    layers: Vec<Layer>,
}

pub type NetworkSpec = Network;

/// Inputs z_i and pre-activations y_i = A_i z_i + b_i of every layer.
#[derive(Debug, Clone, PartialEq)]
pub struct GradientTape {
    pub inputs: Vec<Vec<f64>>,
    pub pre_activations: Vec<Vec<f64>>,
    pub output: Vec<f64>,
}

/// Per-layer gradients with respect to the weight parameters and the bias.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub weights: Vec<Vec<f64>>,
    pub biases: Vec<Vec<f64>>,
}

impl Gradients {
    pub fn zeros_like(net: &Network) -> Self {
        Gradients {
            weights: net.layers.iter().map(|l| vec![0.0; l.weight_param_count()]).collect(),
            biases: net.layers.iter().map(|l| vec![0.0; l.bias.len()]).collect(),
        }
    }

    /// self += c·other.
    pub fn add_scaled(&mut self, other: &Gradients, c: f64) {
        let pairs = self.weights.iter_mut().zip(&other.weights).chain(self.biases.iter_mut().zip(&other.biases));
        for (dst, src) in pairs {
            for (d, s) in dst.iter_mut().zip(src) {
                *d += c * s;
            }
        }
    }

    pub fn scale(&mut self, c: f64) {
        for v in self.weights.iter_mut().chain(self.biases.iter_mut()) {
            v.iter_mut().for_each(|x| *x *= c);
        }
    }

    pub fn norm(&self) -> f64 {
        self.weights.iter().chain(&self.biases).flatten().map(|x| x * x).sum::<f64>().sqrt()
    }
}

impl Network {
    pub fn new(layers: Vec<Layer>) -> Result<Self> {
        let last = layers.last().ok_or_else(|| Error::Parameter("network needs at least one layer".into()))?;
        if last.activation.is_some() {
            return Err(Error::Parameter("the output layer must not have an activation".into()));
        }
        for pair in layers.windows(2) {
            if pair[0].output_dim() != pair[1].input_dim() {
                return Err(Error::dim(pair[0].output_dim(), pair[1].input_dim()));
            }
        }
        Ok(Network { layers })
    }

    /// Random network with the given layer widths, weight kinds and hidden
    /// activation. Parameters and biases are uniform on ±1/√fan_in.
    pub fn random(dims: &[usize], kinds: &[MatrixKind], activation: Activation, seed: u64) -> Result<Self> {
        if dims.len() < 2 {
            return Err(Error::Parameter("need at least input and output widths".into()));
        }
        if kinds.len() != dims.len() - 1 {
            return Err(Error::dim(dims.len() - 1, kinds.len()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let last = kinds.len() - 1;
        let layers = kinds
            .iter()
            .enumerate()
            .map(|(i, &kind)| {
                let (rows, cols) = (dims[i + 1], dims[i]);
                if rows == 0 || cols == 0 {
                    return Err(Error::Parameter("layer widths must be positive".into()));
                }
                let bound = 1.0 / (cols as f64).sqrt();
                let params = (0..kind.param_count(rows, cols)).map(|_| rng.gen_range(-bound..=bound)).collect();
                let bias = (0..rows).map(|_| rng.gen_range(-bound..=bound)).collect();
                let weight = StructuredMatrix::from_params(kind, rows, cols, params)?;
                Layer::new(weight, bias, (i != last).then_some(activation))
            })
            .collect::<Result<Vec<_>>>()?;
        Network::new(layers)
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn into_layers(self) -> Vec<Layer> {
        self.layers
    }

    pub fn depth(&self) -> usize {
        self.layers.len()
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].input_dim()
    }

    pub fn output_dim(&self) -> usize {
        self.layers[self.layers.len() - 1].output_dim()
    }

    pub fn param_count(&self) -> usize {
        self.layers.iter().map(Layer::param_count).sum()
    }

    /// Output only, without recording a tape.
    pub fn eval(&self, x: &[f64], fast: bool) -> Result<Vec<f64>> {
        let mut v = x.to_vec();
        for layer in &self.layers {
            v = layer.apply(&v, fast)?;
        }
        Ok(v)
    }

    pub fn forward(&self, x: &[f64], fast: bool) -> Result<(Vec<f64>, GradientTape)> {
        if x.len() != self.input_dim() {
            return Err(Error::dim(self.input_dim(), x.len()));
        }
        let mut tape = GradientTape {
            inputs: Vec::with_capacity(self.layers.len()),
            pre_activations: Vec::with_capacity(self.layers.len()),
            output: Vec::new(),
        };
        let mut z = x.to_vec();
        for layer in &self.layers {
            let y = layer.affine(&z, fast)?;
            let next = match layer.activation {
                Some(act) => y.iter().map(|v| act.eval(*v)).collect(),
                None => y.clone(),
            };
            tape.inputs.push(z);
            tape.pre_activations.push(y);
            z = next;
        }
        tape.output = z.clone();
        Ok((z, tape))
    }

    /// Reverse pass from the gradient of the loss with respect to the output.
    pub fn backward(&self, tape: &GradientTape, loss_grad: &[f64], fast: bool) -> Result<Gradients> {
        let mut grads = Gradients::zeros_like(self);
        self.backward_into(tape, loss_grad, fast, 1.0, &mut grads)?;
        Ok(grads)
    }

    /// Adds c times the gradients of this sample into `acc`.
    pub fn backward_into(
        &self,
        tape: &GradientTape,
        loss_grad: &[f64],
        fast: bool,
        c: f64,
        acc: &mut Gradients,
    ) -> Result<()> {
        if tape.inputs.len() != self.layers.len() || tape.pre_activations.len() != self.layers.len() {
            return Err(Error::dim(self.layers.len(), tape.inputs.len()));
        }
        if loss_grad.len() != self.output_dim() {
            return Err(Error::dim(self.output_dim(), loss_grad.len()));
        }
        let mut g = loss_grad.to_vec();
        for (i, layer) in self.layers.iter().enumerate().rev() {
            let z = &tape.inputs[i];
            if z.len() != layer.input_dim() || tape.pre_activations[i].len() != layer.output_dim() {
                return Err(Error::Shape(format!("tape does not match layer {i}")));
            }
            if let Some(act) = layer.activation {
                for (gv, y) in g.iter_mut().zip(&tape.pre_activations[i]) {
                    *gv *= act.deriv(*y);
                }
            }
            let wg = layer.weight.param_gradient(&g, z, fast);
            for (d, s) in acc.weights[i].iter_mut().zip(&wg) {
                *d += c * s;
            }
            for (d, s) in acc.biases[i].iter_mut().zip(&g) {
                *d += c * s;
            }
            if i > 0 {
                g = layer.weight.matvec_transpose(&g, fast)?;
            }
        }
        Ok(())
    }

    /// p ← p − lr·grad(p) for every stored parameter.
    pub fn sgd_step(&self, grads: &Gradients, lr: f64) -> Result<Network> {
        let mut next = self.clone();
        next.sgd_step_in_place(grads, lr)?;
        Ok(next)
    }

    pub fn sgd_step_in_place(&mut self, grads: &Gradients, lr: f64) -> Result<()> {
        if !(lr > 0.0) {
            return Err(Error::Parameter(format!("learning rate must be positive, got {lr}")));
        }
        if grads.weights.len() != self.layers.len() || grads.biases.len() != self.layers.len() {
            return Err(Error::dim(self.layers.len(), grads.weights.len()));
        }
        for (i, layer) in self.layers.iter_mut().enumerate() {
            let params = layer.weight.params_mut();
            if grads.weights[i].len() != params.len() || grads.biases[i].len() != layer.bias.len() {
                return Err(Error::Shape(format!("gradient does not match layer {i}")));
            }
            for (p, g) in params.iter_mut().zip(&grads.weights[i]) {
                *p -= lr * g;
            }
            for (b, g) in layer.bias.iter_mut().zip(&grads.biases[i]) {
                *b -= lr * g;
            }
        }
        Ok(())
    }

    /// Mean loss and mean gradient over a batch. With `parallel`, samples are
    /// processed on the rayon pool and summed in input order, so the result
    /// does not depend on the worker count.
    pub fn batch_gradient(
        &self,
        inputs: &[&[f64]],
        targets: &[&Target],
        loss: LossKind,
        fast: bool,
        parallel: bool,
    ) -> Result<(f64, Gradients)> {
        if inputs.len() != targets.len() {
            return Err(Error::dim(inputs.len(), targets.len()));
        }
        if inputs.is_empty() {
            return Err(Error::Parameter("empty batch".into()));
        }
        let c = 1.0 / inputs.len() as f64;
        let mut acc = Gradients::zeros_like(self);
        let mut total = 0.0;
        if parallel {
            let per_sample = inputs
                .par_iter()
                .zip(targets.par_iter())
                .map(|(x, t)| {
                    let (out, tape) = self.forward(x, fast)?;
                    let (l, g) = loss_eval(loss, &out, t)?;
                    Ok((l, self.backward(&tape, &g, fast)?))
                })
                .collect::<Result<Vec<_>>>()?;
            for (l, g) in &per_sample {
                total += l;
                acc.add_scaled(g, c);
            }
        } else {
            for (x, t) in inputs.iter().zip(targets) {
                let (out, tape) = self.forward(x, fast)?;
                let (l, g) = loss_eval(loss, &out, t)?;
                total += l;
                self.backward_into(&tape, &g, fast, c, &mut acc)?;
            }
        }
        Ok((total * c, acc))
    }
}
