use rand::distributions::{Distribution, Uniform};
use rand::Rng;

use crate::error::{Error, Result};
use crate::linalg::{Matrix, Tape, Var};
use crate::rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputActivation {
    Sigmoid,
    Linear,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Train,
    Eval,
}

/// Layer widths and activations of a fully connected network. Hidden layers
/// use Leaky-ReLU with slope `alpha`.
#[derive(Debug, Clone, PartialEq)]
pub struct MlpSpec {
    /// Input width, hidden widths, output width.
    pub layer_sizes: Vec<usize>,
    pub alpha: f64,
    pub output: OutputActivation,
    /// Inverted-dropout rate applied after each hidden activation in train mode.
    pub dropout: f64,
}

impl MlpSpec {
    pub fn new(layer_sizes: Vec<usize>, alpha: f64, output: OutputActivation, dropout: f64) -> Result<Self> {
        let spec = Self {
            layer_sizes,
            alpha,
            output,
            dropout,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.layer_sizes.len() < 3 {
            return Err(Error::param("an MLP needs input, at least one hidden, and output layer"));
        }
        if self.layer_sizes.contains(&0) {
            return Err(Error::param("layer widths must be positive"));
        }
        if !(self.alpha > 0.0) {
            return Err(Error::param(format!("leaky-relu slope must be positive, got {}", self.alpha)));
        }
        if !(0.0..1.0).contains(&self.dropout) {
            return Err(Error::param(format!("dropout rate must be in [0, 1), got {}", self.dropout)));
        }
        Ok(())
    }

    pub fn input_width(&self) -> usize {
        self.layer_sizes[0]
    }

    pub fn output_width(&self) -> usize {
        *self.layer_sizes.last().unwrap()
    }

    pub fn n_layers(&self) -> usize {
        self.layer_sizes.len() - 1
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dense {
    pub weight: Matrix,
    /// `1 × out` row vector.
    pub bias: Matrix,
}

/// Weights and biases of every layer. Also used to carry gradients.
#[derive(Debug, Clone, PartialEq)]
pub struct MlpParams {
    pub layers: Vec<Dense>,
}

/// He-style uniform initialization: weights in `±√(6 / fan_in)`, zero biases.
pub fn init_mlp(spec: &MlpSpec, seed: u64) -> MlpParams {
    let mut rng = rng::stream(seed);
    let layers = spec
        .layer_sizes
        .windows(2)
        .map(|w| {
            let (fan_in, fan_out) = (w[0], w[1]);
            let bound = (6.0 / fan_in as f64).sqrt();
            let dist = Uniform::new_inclusive(-bound, bound);
            Dense {
                weight: Matrix::from_fn(fan_in, fan_out, |_, _| dist.sample(&mut rng)),
                bias: Matrix::zeros(1, fan_out),
            }
        })
        .collect();
    MlpParams { layers }
}

impl MlpParams {
    pub fn zeros_like(&self) -> Self {
        Self {
            layers: self
                .layers
                .iter()
                .map(|l| Dense {
                    weight: Matrix::zeros(l.weight.rows(), l.weight.cols()),
                    bias: Matrix::zeros(1, l.bias.cols()),
                })
                .collect(),
        }
    }

    /// Weight and bias matrices in layer order: `w0, b0, w1, b1, ...`.
    pub fn tensors(&self) -> impl Iterator<Item = &Matrix> {
        self.layers.iter().flat_map(|l| [&l.weight, &l.bias])
    }

    pub fn tensors_mut(&mut self) -> impl Iterator<Item = &mut Matrix> {
        self.layers.iter_mut().flat_map(|l| [&mut l.weight, &mut l.bias])
    }

    pub fn n_params(&self) -> usize {
        self.tensors().map(Matrix::len).sum()
    }

    pub fn is_finite(&self) -> bool {
        self.tensors().all(Matrix::is_finite)
    }

    pub fn max_abs(&self) -> f64 {
        self.tensors()
            .flat_map(|m| m.as_slice().iter())
            .fold(0.0, |a, v| a.max(v.abs()))
    }

    pub fn same_shape(&self, other: &MlpParams) -> bool {
        self.layers.len() == other.layers.len()
            && self.tensors().zip(other.tensors()).all(|(a, b)| a.shape() == b.shape())
    }

    pub fn matches(&self, spec: &MlpSpec) -> bool {
        self.layers.len() == spec.n_layers()
            && self.layers.iter().zip(spec.layer_sizes.windows(2)).all(|(l, w)| {
                l.weight.shape() == (w[0], w[1]) && l.bias.shape() == (1, w[1])
            })
    }

    /// Registers every tensor on `tape` as a leaf.
    pub fn bind(&self, tape: &mut Tape) -> MlpVars {
        MlpVars {
            layers: self
                .layers
                .iter()
                .map(|l| (tape.leaf(l.weight.clone()), tape.leaf(l.bias.clone())))
                .collect(),
        }
    }
}

/// Tape handles for bound parameters.
#[derive(Debug, Clone)]
pub struct MlpVars {
    pub layers: Vec<(Var, Var)>,
}

impl MlpVars {
    /// Collects adjoints after `tape.backward`. Unreached tensors get zeros.
    pub fn grads(&self, tape: &Tape) -> MlpParams {
        let get = |v: Var| {
            tape.grad(v).cloned().unwrap_or_else(|| {
                let m = tape.value(v);
                Matrix::zeros(m.rows(), m.cols())
            })
        };
        MlpParams {
            layers: self
                .layers
                .iter()
                .map(|&(w, b)| Dense {
                    weight: get(w),
                    bias: get(b),
                })
                .collect(),
        }
    }

    /// Runs the network on `input`, recording every op on `tape`.
    pub fn forward<R: Rng>(
        &self,
        tape: &mut Tape,
        spec: &MlpSpec,
        input: Var,
        mode: Mode,
        rng: &mut R,
    ) -> Result<Var> {
        let width = tape.value(input).cols();
        if width != spec.input_width() {
            return Err(Error::Shape {
                op: "mlp forward",
                left: tape.value(input).shape(),
                right: (width, spec.input_width()),
            });
        }
        let last = self.layers.len() - 1;
        let mut h = input;
        for (i, &(w, b)) in self.layers.iter().enumerate() {
            let z = tape.matmul(h, w)?;
            let z = tape.add_row(z, b)?;
            if i == last {
                h = match spec.output {
                    OutputActivation::Sigmoid => tape.sigmoid(z),
                    OutputActivation::Linear => z,
                };
            } else {
                h = tape.leaky_relu(z, spec.alpha);
                if mode == Mode::Train && spec.dropout > 0.0 {
                    let keep = 1.0 - spec.dropout;
                    let (r, c) = tape.value(h).shape();
                    let mask = Matrix::from_fn(r, c, |_, _| {
                        if rng.gen::<f64>() < keep {
                            1.0 / keep
                        } else {
                            0.0
                        }
                    });
                    h = tape.mul_const(h, mask)?;
                }
            }
        }
        Ok(h)
    }
}

/// A network together with its layout.
#[derive(Debug, Clone, PartialEq)]
pub struct Mlp {
    pub spec: MlpSpec,
    pub params: MlpParams,
}

impl Mlp {
    pub fn new(spec: MlpSpec, seed: u64) -> Self {
        let params = init_mlp(&spec, seed);
        Self { spec, params }
    }

    /// Plain forward pass; `seed` drives the dropout masks in train mode.
    pub fn forward(&self, batch: &Matrix, mode: Mode, seed: u64) -> Result<Matrix> {
        let mut tape = Tape::new();
        let vars = self.params.bind(&mut tape);
        let x = tape.leaf(batch.clone());
        let mut rng = rng::stream(seed);
        let out = vars.forward(&mut tape, &self.spec, x, mode, &mut rng)?;
        Ok(tape.value(out).clone())
    }
}

/// Binary cross-entropy `−mean[t·ln p + (1−t)·ln(1−p)]` on probabilities.
pub fn bce_loss(tape: &mut Tape, predictions: Var, targets: Var) -> Result<Var> {
    let (p, t) = (tape.value(predictions).shape(), tape.value(targets).shape());
    if p != t {
        return Err(Error::Shape {
            op: "bce_loss",
            left: p,
            right: t,
        });
    }
    let log_p = tape.log(predictions)?;
    let one_minus_p = tape.const_sub(1.0, predictions);
    let log_q = tape.log(one_minus_p)?;
    let one_minus_t = tape.const_sub(1.0, targets);
    let a = tape.mul(targets, log_p)?;
    let b = tape.mul(one_minus_t, log_q)?;
    let s = tape.add(a, b)?;
    let m = tape.mean(s);
    Ok(tape.neg(m))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::LOG_EPSILON;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn spec(sizes: &[usize], dropout: f64) -> MlpSpec {
        MlpSpec::new(sizes.to_vec(), 0.2, OutputActivation::Sigmoid, dropout).unwrap()
    }

    #[test]
    fn same_seed_same_params() {
        let s = spec(&[4, 8, 8, 8, 1], 0.0);
        assert_eq!(init_mlp(&s, 3), init_mlp(&s, 3));
        assert_ne!(init_mlp(&s, 3), init_mlp(&s, 4));
    }

    #[test]
    fn table_one_gan_shapes_chain() {
        let s = spec(&[29, 85, 85, 85, 1], 0.5);
        let p = init_mlp(&s, 0);
        let shapes: Vec<_> = p.layers.iter().map(|l| l.weight.shape()).collect();
        assert_eq!(shapes, vec![(29, 85), (85, 85), (85, 85), (85, 1)]);
        assert!(p.layers.iter().all(|l| l.bias.as_slice().iter().all(|&b| b == 0.0)));
        assert!(p.matches(&s));
    }

    #[test]
    fn init_weights_centred_and_bounded() {
        let s = spec(&[100, 100, 1], 0.0);
        let p = init_mlp(&s, 17);
        let w = &p.layers[0].weight;
        assert_eq!(w.len(), 10_000);
        let bound = (6.0f64 / 100.0).sqrt();
        assert!(w.as_slice().iter().all(|v| v.abs() <= bound));
        // uniform on [-b, b] has variance b²/3
        let se = (bound * bound / 3.0 / w.len() as f64).sqrt();
        assert!(w.mean().abs() < 3.0 * se, "mean {} se {}", w.mean(), se);
    }

    #[test]
    fn invalid_specs_rejected() {
        assert!(MlpSpec::new(vec![3, 1], 0.2, OutputActivation::Linear, 0.0).is_err());
        assert!(MlpSpec::new(vec![3, 4, 1], 0.0, OutputActivation::Linear, 0.0).is_err());
        assert!(MlpSpec::new(vec![3, 4, 1], 0.2, OutputActivation::Linear, 1.0).is_err());
    }

    #[test]
    fn leaky_relu_slope() {
        let mut t = Tape::new();
        let x = t.leaf(Matrix::scalar(-1.0));
        let y = t.leaky_relu(x, 0.2);
        assert!((t.scalar(y) + 0.2).abs() < 1e-15);
    }

    #[test]
    fn zero_dropout_train_equals_eval() {
        let mlp = Mlp::new(spec(&[3, 6, 6, 6, 1], 0.0), 5);
        let x = Matrix::from_fn(4, 3, |r, c| (r as f64 - c as f64) * 0.3);
        assert_eq!(
            mlp.forward(&x, Mode::Train, 1).unwrap(),
            mlp.forward(&x, Mode::Eval, 2).unwrap()
        );
    }

    #[test]
    fn eval_forward_is_pure() {
        let mlp = Mlp::new(spec(&[3, 6, 6, 6, 1], 0.5), 5);
        let x = Matrix::from_fn(4, 3, |r, c| (r * c) as f64 * 0.1);
        assert_eq!(
            mlp.forward(&x, Mode::Eval, 1).unwrap(),
            mlp.forward(&x, Mode::Eval, 99).unwrap()
        );
    }

    #[test]
    fn width_mismatch_is_shape_error() {
        let mlp = Mlp::new(spec(&[3, 4, 1], 0.0), 0);
        assert!(matches!(
            mlp.forward(&Matrix::zeros(2, 5), Mode::Eval, 0),
            Err(Error::Shape { .. })
        ));
    }

    #[test]
    fn inverted_dropout_matches_eval_in_expectation() {
        // Single hidden layer with linear output: the output is linear in the
        // masked activations, so E[train] = eval exactly.
        let s = MlpSpec::new(vec![2, 16, 1], 0.2, OutputActivation::Linear, 0.4).unwrap();
        let mlp = Mlp::new(s, 21);
        let x = Matrix::from_rows(&[[0.7, -1.3]]).unwrap();
        let eval = mlp.forward(&x, Mode::Eval, 0).unwrap().as_slice()[0];
        let draws: Vec<f64> = (0..1000)
            .map(|i| mlp.forward(&x, Mode::Train, 1000 + i).unwrap().as_slice()[0])
            .collect();
        let n = draws.len() as f64;
        let mean = draws.iter().sum::<f64>() / n;
        let var = draws.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / (n - 1.0);
        let se = (var / n).sqrt();
        assert!((mean - eval).abs() < 3.0 * se, "mean {mean} eval {eval} se {se}");
    }

    #[test]
    fn bce_perfect_fit_and_uninformative() {
        let mut t = Tape::new();
        let p = t.leaf(Matrix::from_rows(&[[1.0], [0.0], [1.0]]).unwrap());
        let y = t.leaf(Matrix::from_rows(&[[1.0], [0.0], [1.0]]).unwrap());
        let l = bce_loss(&mut t, p, y).unwrap();
        assert!(t.scalar(l) <= 1e-10);

        let mut t = Tape::new();
        let p = t.leaf(Matrix::filled(5, 1, 0.5));
        let y = t.leaf(Matrix::from_rows(&[[1.0], [0.0], [1.0], [1.0], [0.0]]).unwrap());
        let l = bce_loss(&mut t, p, y).unwrap();
        assert!((t.scalar(l) - std::f64::consts::LN_2).abs() < 1e-10);
    }

    #[test]
    fn bce_matches_direct_summation() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let p = Matrix::from_fn(17, 1, |_, _| rng.gen_range(0.01..0.99));
        let y = Matrix::from_fn(17, 1, |_, _| if rng.gen::<bool>() { 1.0 } else { 0.0 });
        let mut direct = 0.0;
        for (pi, ti) in p.as_slice().iter().zip(y.as_slice()) {
            direct += ti * (pi + LOG_EPSILON).ln() + (1.0 - ti) * (1.0 - pi + LOG_EPSILON).ln();
        }
        direct = -direct / 17.0;
        let mut t = Tape::new();
        let pv = t.leaf(p);
        let yv = t.leaf(y);
        let l = bce_loss(&mut t, pv, yv).unwrap();
        assert!((t.scalar(l) - direct).abs() < 1e-12);
    }

    #[test]
    fn bce_shape_mismatch() {
        let mut t = Tape::new();
        let p = t.leaf(Matrix::zeros(3, 1));
        let y = t.leaf(Matrix::zeros(2, 1));
        assert!(matches!(bce_loss(&mut t, p, y), Err(Error::Shape { .. })));
    }
}
