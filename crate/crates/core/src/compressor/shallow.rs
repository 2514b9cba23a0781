use crate::error::{Error, Result};
use crate::network::{Layer, Network};
use crate::structmat::{
    embed_rows_hankel, embed_rows_toeplitz, DenseMatrix, Orientation, StructuredMatrix, TriangularMatrix,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ShallowMode {
    Toeplitz,
    Hankel,
    Lower,
}

impl ShallowMode {
    pub fn parse(s: &str) -> Option<ShallowMode> {
        match s {
            "toeplitz" => Some(ShallowMode::Toeplitz),
            "hankel" => Some(ShallowMode::Hankel),
            "lower" => Some(ShallowMode::Lower),
            _ => None,
        }
    }
}

/// One-hidden-layer scalar network aᵀσ(Ax + b).
#[derive(Debug, Clone, PartialEq)]
pub struct ShallowNet {
    pub outer: Vec<f64>,
    pub weight: StructuredMatrix,
    pub bias: Vec<f64>,
}

/// Rewrites dᵀσ(Bx + c) as aᵀσ(Ax + b) with A structured. Rows of A that
/// do not carry a row of B get outer weight 0, so the function is unchanged.
pub fn restructure_shallow(d: &[f64], b: &DenseMatrix, c: &[f64], mode: ShallowMode) -> Result<ShallowNet> {
    let (k, n) = b.shape();
    if d.len() != k {
        return Err(Error::dim(k, d.len()));
    }
    if c.len() != k {
        return Err(Error::dim(k, c.len()));
    }
    let (weight, rows): (StructuredMatrix, Vec<usize>) = match mode {
        ShallowMode::Toeplitz => {
            let (t, map) = embed_rows_toeplitz(b);
            (t.into(), map)
        }
        ShallowMode::Hankel => {
            let (h, map) = embed_rows_hankel(b);
            (h.into(), map)
        }
        ShallowMode::Lower => {
            let stacked = DenseMatrix::from_fn(n + k, n, |i, j| if i < n { 0.0 } else { b.get(i - n, j) });
            let lower = TriangularMatrix::from_dense_exact(&stacked, Orientation::Lower)
                .expect("rows below the zero block cover every column");
            (lower.into(), (n..n + k).collect())
        }
    };
    let mut outer = vec![0.0; weight.rows()];
    let mut bias = vec![0.0; weight.rows()];
    for (j, &row) in rows.iter().enumerate() {
        outer[row] = d[j];
        bias[row] = c[j];
    }
    Ok(ShallowNet { outer, weight, bias })
}

/// [`restructure_shallow`] on a two-layer network with one output.
pub fn restructure_shallow_network(net: &Network, mode: ShallowMode) -> Result<Network> {
    let layers = net.layers();
    if layers.len() != 2 || net.output_dim() != 1 {
        return Err(Error::Shape(format!(
            "expected one hidden layer and a scalar output, got {} layers and {} outputs",
            layers.len(),
            net.output_dim()
        )));
    }
    let (hidden, out) = (&layers[0], &layers[1]);
    let d = out.weight().to_dense().row(0).to_vec();
    let s = restructure_shallow(&d, &hidden.weight().to_dense(), hidden.bias(), mode)?;
    let width = s.outer.len();
    Network::new(vec![
        Layer::new(s.weight, s.bias, hidden.activation())?,
        Layer::new(DenseMatrix::from_vec(1, width, s.outer)?.into(), out.bias().to_vec(), None)?,
    ])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::identity_approx::Activation;
    use crate::structmat::MatrixKind;

    #[test]
    fn zero_outer_weights_stay_zero() {
        let b = DenseMatrix::from_rows(&[vec![1.0, 2.0], vec![3.0, 4.0]]).unwrap();
        let s = restructure_shallow(&[0.0, 0.0], &b, &[0.5, 0.5], ShallowMode::Toeplitz).unwrap();
        assert!(s.outer.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn lower_mode_stacks_a_zero_block() {
        let b = DenseMatrix::from_rows(&[vec![1.0, 2.0, 3.0], vec![4.0, 5.0, 6.0]]).unwrap();
        let s = restructure_shallow(&[1.0, -1.0], &b, &[0.1, 0.2], ShallowMode::Lower).unwrap();
        assert_eq!(s.weight.kind(), MatrixKind::Lower);
        let a = s.weight.to_dense();
        assert!((0..3).all(|i| a.row(i).iter().all(|v| *v == 0.0)));
        assert_eq!(a.row(3), b.row(0));
        assert_eq!(s.outer, vec![0.0, 0.0, 0.0, 1.0, -1.0]);
    }

    #[test]
    fn network_form_preserves_outputs() {
        let net = Network::random(&[2, 3, 1], &[MatrixKind::Dense; 2], Activation::Sigmoid, 12).unwrap();
        for mode in [ShallowMode::Toeplitz, ShallowMode::Hankel, ShallowMode::Lower] {
            let out = restructure_shallow_network(&net, mode).unwrap();
            for x in [[0.3, -0.8], [1.5, 2.0], [-1.0, 0.0]] {
                let (p, q) = (net.eval(&x, false).unwrap()[0], out.eval(&x, false).unwrap()[0]);
                assert!((p - q).abs() <= 1e-12, "{mode:?}");
            }
        }
    }

    #[test]
    fn rejects_deep_networks() {
        let net = Network::random(&[2, 3, 3, 1], &[MatrixKind::Dense; 3], Activation::Tanh, 1).unwrap();
        assert!(restructure_shallow_network(&net, ShallowMode::Toeplitz).is_err());
    }
}
