use std::fmt;

/// Scalar activation with a pinned smooth point a where σ′(a) ≠ 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Activation {
    Identity,
    Relu,
    LeakyRelu { slope: f64 },
    Sigmoid,
    Tanh,
}

impl Activation {
    pub const LEAKY_SLOPE: f64 = 0.01;

    pub fn leaky_relu() -> Self {
        Activation::LeakyRelu { slope: Self::LEAKY_SLOPE }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Activation::Identity => "identity",
            Activation::Relu => "relu",
            Activation::LeakyRelu { .. } => "leaky_relu",
            Activation::Sigmoid => "sigmoid",
            Activation::Tanh => "tanh",
        }
    }

    pub fn parse(name: &str) -> Option<Self> {
        Some(match name {
            "identity" | "linear" => Activation::Identity,
            "relu" => Activation::Relu,
            "leaky_relu" | "leaky-relu" => Activation::leaky_relu(),
            "sigmoid" => Activation::Sigmoid,
            "tanh" => Activation::Tanh,
            _ => return None,
        })
    }

    pub fn all() -> [Activation; 5] {
        [Activation::Identity, Activation::Relu, Activation::leaky_relu(), Activation::Sigmoid, Activation::Tanh]
    }

    #[inline]
    pub fn eval(&self, x: f64) -> f64 {
        match *self {
            Activation::Identity => x,
            Activation::Relu => x.max(0.0),
            Activation::LeakyRelu { slope } => {
                if x >= 0.0 {
                    x
                } else {
                    slope * x
                }
            }
            Activation::Sigmoid => {
                if x >= 0.0 {
                    1.0 / (1.0 + (-x).exp())
                } else {
                    let e = x.exp();
                    e / (1.0 + e)
                }
            }
            Activation::Tanh => x.tanh(),
        }
    }

    #[inline]
    pub fn deriv(&self, x: f64) -> f64 {
        match *self {
            Activation::Identity => 1.0,
            Activation::Relu => {
                if x > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::LeakyRelu { slope } => {
                if x >= 0.0 {
                    1.0
                } else {
                    slope
                }
            }
            Activation::Sigmoid => {
                let s = self.eval(x);
                s * (1.0 - s)
            }
            Activation::Tanh => {
                let t = x.tanh();
                1.0 - t * t
            }
        }
    }

    /// Point a with σ′ continuous near a and σ′(a) ≠ 0.
    pub fn smooth_point(&self) -> f64 {
        match self {
            Activation::Identity | Activation::Sigmoid => 0.0,
            Activation::Relu | Activation::LeakyRelu { .. } => 1.0,
            Activation::Tanh => 0.5,
        }
    }

    /// Global Lipschitz constant (sup |σ′|).
    pub fn lipschitz(&self) -> f64 {
        match self {
            Activation::Sigmoid => 0.25,
            _ => 1.0,
        }
    }

    pub fn uniformly_continuous(&self) -> bool {
        true
    }

    /// Checks |σ′(a)| > 0 and that σ′(a) agrees with a central difference of σ.
    pub fn validate(&self) -> bool {
        let a = self.smooth_point();
        let h = 1e-5;
        let fd = (self.eval(a + h) - self.eval(a - h)) / (2.0 * h);
        self.deriv(a).abs() > 0.0 && (fd - self.deriv(a)).abs() <= 1e-6
    }
}

impl fmt::Display for Activation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}
