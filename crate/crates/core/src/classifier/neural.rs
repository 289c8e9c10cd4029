use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Distribution, Recognizer};
use crate::category::{Category, CATEGORY_COUNT};
use crate::error::{Error, Result};
use crate::stroke::{delta_encode, preprocess, EncodedSketch, StrokeSequence, DEFAULT_SPACING};

/// Features per time step: dx, dy, pen lift.
pub const INPUT_WIDTH: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Activation {
    Linear,
    Relu,
}

/// 1-D convolution over time with same padding. Weights are laid out
/// `[out][tap][in]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Conv1d {
    pub input: usize,
    pub output: usize,
    pub kernel: usize,
    pub activation: Activation,
    pub weights: Vec<f32>,
    pub bias: Vec<f32>,
}

/// One direction of an LSTM with gates stacked in input, forget, cell,
/// output order. `w_ih` is `[4H][in]`, `w_hh` is `[4H][H]`.
#[derive(Debug, Clone, PartialEq)]
pub struct LstmDirection {
    pub w_ih: Vec<f32>,
    pub w_hh: Vec<f32>,
    pub bias: Vec<f32>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BiLstm {
    pub input: usize,
    pub hidden: usize,
    pub forward: LstmDirection,
    pub backward: LstmDirection,
}

/// Fully connected layer, weights `[out][in]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dense {
    pub input: usize,
    pub output: usize,
    pub weights: Vec<f32>,
    pub bias: Vec<f32>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Layer {
    Conv1d(Conv1d),
    BiLstm(BiLstm),
    /// Mean over the valid (unpadded) time steps.
    MaskedMeanPool,
    Dense(Dense),
    Softmax,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Shape {
    Sequence(usize),
    Vector(usize),
}

impl Layer {
    fn kind(&self) -> &'static str {
        match self {
            Layer::Conv1d(_) => "conv1d",
            Layer::BiLstm(_) => "bilstm",
            Layer::MaskedMeanPool => "masked_mean_pool",
            Layer::Dense(_) => "dense",
            Layer::Softmax => "softmax",
        }
    }

    fn check_len(what: &str, got: usize, want: usize) -> Result<()> {
        if got != want {
            return Err(Error::ModelFormat(format!(
                "{what} has {got} parameters, expected {want}"
            )));
        }
        Ok(())
    }

    /// Output shape for `input`, or a model-format error.
    fn output_shape(&self, input: Shape) -> Result<Shape> {
        let mismatch = |expected: String| {
            Error::ModelFormat(format!(
                "{} layer expects {expected}, got {input:?}",
                self.kind()
            ))
        };
        match (self, input) {
            (Layer::Conv1d(c), Shape::Sequence(w)) if w == c.input => {
                if c.kernel == 0 || c.output == 0 {
                    return Err(Error::ModelFormat("conv1d with empty kernel".into()));
                }
                Self::check_len("conv1d weights", c.weights.len(), c.output * c.kernel * c.input)?;
                Self::check_len("conv1d bias", c.bias.len(), c.output)?;
                Ok(Shape::Sequence(c.output))
            }
            (Layer::Conv1d(c), _) => Err(mismatch(format!("sequence of width {}", c.input))),
            (Layer::BiLstm(l), Shape::Sequence(w)) if w == l.input => {
                if l.hidden == 0 {
                    return Err(Error::ModelFormat("bilstm with zero hidden size".into()));
                }
                for dir in [&l.forward, &l.backward] {
                    Self::check_len("lstm w_ih", dir.w_ih.len(), 4 * l.hidden * l.input)?;
                    Self::check_len("lstm w_hh", dir.w_hh.len(), 4 * l.hidden * l.hidden)?;
                    Self::check_len("lstm bias", dir.bias.len(), 4 * l.hidden)?;
                }
                Ok(Shape::Sequence(2 * l.hidden))
            }
            (Layer::BiLstm(l), _) => Err(mismatch(format!("sequence of width {}", l.input))),
            (Layer::MaskedMeanPool, Shape::Sequence(w)) => Ok(Shape::Vector(w)),
            (Layer::MaskedMeanPool, _) => Err(mismatch("a sequence".into())),
            (Layer::Dense(d), Shape::Vector(w)) if w == d.input => {
                Self::check_len("dense weights", d.weights.len(), d.output * d.input)?;
                Self::check_len("dense bias", d.bias.len(), d.output)?;
                Ok(Shape::Vector(d.output))
            }
            (Layer::Dense(d), _) => Err(mismatch(format!("vector of width {}", d.input))),
            (Layer::Softmax, Shape::Vector(w)) => Ok(Shape::Vector(w)),
            (Layer::Softmax, _) => Err(mismatch("a vector".into())),
        }
    }
}

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

impl Conv1d {
    fn forward(&self, input: &[Vec<f64>]) -> Vec<Vec<f64>> {
        let steps = input.len() as isize;
        let left = ((self.kernel - 1) / 2) as isize;
        (0..steps)
            .map(|t| {
                (0..self.output)
                    .map(|o| {
                        let mut acc = self.bias[o] as f64;
                        for k in 0..self.kernel {
                            let src = t + k as isize - left;
                            if src < 0 || src >= steps {
                                continue;
                            }
                            let row = &self.weights[(o * self.kernel + k) * self.input..][..self.input];
                            acc += row
                                .iter()
                                .zip(&input[src as usize])
                                .map(|(&w, &x)| w as f64 * x)
                                .sum::<f64>();
                        }
                        match self.activation {
                            Activation::Relu => acc.max(0.0),
                            Activation::Linear => acc,
                        }
                    })
                    .collect()
            })
            .collect()
    }
}

impl LstmDirection {
    fn run(&self, input: &[Vec<f64>], in_width: usize, hidden: usize, reverse: bool) -> Vec<Vec<f64>> {
        let mut h = vec![0.0; hidden];
        let mut c = vec![0.0; hidden];
        let mut gates = vec![0.0; 4 * hidden];
        let mut out = vec![Vec::new(); input.len()];
        let order: Box<dyn Iterator<Item = usize>> = if reverse {
            Box::new((0..input.len()).rev())
        } else {
            Box::new(0..input.len())
        };
        for t in order {
            let x = &input[t];
            for (g, gate) in gates.iter_mut().enumerate() {
                let wi = &self.w_ih[g * in_width..][..in_width];
                let wh = &self.w_hh[g * hidden..][..hidden];
                *gate = self.bias[g] as f64
                    + wi.iter().zip(x).map(|(&w, &v)| w as f64 * v).sum::<f64>()
                    + wh.iter().zip(&h).map(|(&w, &v)| w as f64 * v).sum::<f64>();
            }
            for j in 0..hidden {
                let i = sigmoid(gates[j]);
                let f = sigmoid(gates[hidden + j]);
                let g = gates[2 * hidden + j].tanh();
                let o = sigmoid(gates[3 * hidden + j]);
                c[j] = f * c[j] + i * g;
                h[j] = o * c[j].tanh();
            }
            out[t] = h.clone();
        }
        out
    }
}

impl BiLstm {
    fn forward(&self, input: &[Vec<f64>]) -> Vec<Vec<f64>> {
        let fwd = self.forward.run(input, self.input, self.hidden, false);
        let bwd = self.backward.run(input, self.input, self.hidden, true);
        fwd.into_iter()
            .zip(bwd)
            .map(|(mut f, b)| {
                f.extend(b);
                f
            })
            .collect()
    }
}

impl Dense {
    fn forward(&self, input: &[f64]) -> Vec<f64> {
        (0..self.output)
            .map(|o| {
                self.bias[o] as f64
                    + self.weights[o * self.input..][..self.input]
                        .iter()
                        .zip(input)
                        .map(|(&w, &x)| w as f64 * x)
                        .sum::<f64>()
            })
            .collect()
    }
}

/// A validated layer stack mapping delta-encoded sketches to 23 logits.
#[derive(Debug, Clone, PartialEq)]
pub struct NeuralModel {
    layers: Vec<Layer>,
    /// Category of each logit position.
    categories: Vec<Category>,
}

impl NeuralModel {
    /// Checks that layers chain from the 3-wide step input to a 23-wide
    /// vector and that `categories` names each of the 23 primitives once.
    pub fn new(layers: Vec<Layer>, categories: Vec<Category>) -> Result<Self> {
        let mut seen = [false; CATEGORY_COUNT];
        for c in &categories {
            if std::mem::replace(&mut seen[c.index()], true) {
                return Err(Error::ModelFormat(format!("category `{c}` listed twice")));
            }
        }
        if categories.len() != CATEGORY_COUNT {
            return Err(Error::ModelFormat(format!(
                "manifest lists {} categories, expected {CATEGORY_COUNT}",
                categories.len()
            )));
        }
        let mut shape = Shape::Sequence(INPUT_WIDTH);
        for (i, layer) in layers.iter().enumerate() {
            if matches!(layer, Layer::Softmax) && i + 1 != layers.len() {
                return Err(Error::ModelFormat("softmax must be the last layer".into()));
            }
            shape = layer
                .output_shape(shape)
                .map_err(|e| Error::ModelFormat(format!("layer {i}: {e}")))?;
        }
        if shape != Shape::Vector(CATEGORY_COUNT) {
            return Err(Error::ModelFormat(format!(
                "model output is {shape:?}, expected a vector of width {CATEGORY_COUNT}"
            )));
        }
        Ok(Self { layers, categories })
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn categories(&self) -> &[Category] {
        &self.categories
    }

    /// Pre-softmax scores in canonical category order.
    pub fn logits(&self, encoded: &EncodedSketch) -> Result<[f64; CATEGORY_COUNT]> {
        if encoded.is_empty() {
            return Err(Error::invalid("cannot classify an empty encoding"));
        }
        let mut seq: Vec<Vec<f64>> = encoded.steps.iter().map(|s| s.features().to_vec()).collect();
        let mut vector: Vec<f64> = Vec::new();
        for layer in &self.layers {
            match layer {
                Layer::Conv1d(c) => seq = c.forward(&seq),
                Layer::BiLstm(l) => seq = l.forward(&seq),
                Layer::MaskedMeanPool => {
                    let width = seq[0].len();
                    let n = seq.len() as f64;
                    vector = (0..width).map(|j| seq.iter().map(|r| r[j]).sum::<f64>() / n).collect();
                }
                Layer::Dense(d) => vector = d.forward(&vector),
                // Applied by the caller.
                Layer::Softmax => {}
            }
        }
        let mut out = [0.0; CATEGORY_COUNT];
        for (c, v) in self.categories.iter().zip(vector) {
            out[c.index()] = v;
        }
        Ok(out)
    }

    pub fn classify_encoded(&self, encoded: &EncodedSketch) -> Result<Distribution> {
        Ok(Distribution::softmax(&self.logits(encoded)?))
    }

    /// The default architecture: conv widths 48/64/96 with kernels 5/5/3,
    /// three bidirectional LSTMs of 128 units per direction, mean pool,
    /// dense projection. Parameters drawn uniformly in ±1/sqrt(fan_in).
    pub fn standard_random(seed: u64) -> Self {
        Self::random(&[(48, 5), (64, 5), (96, 3)], &[128, 128, 128], seed)
    }

    /// Randomly initialised model with the given conv `(channels, kernel)`
    /// stack and LSTM hidden sizes.
    pub fn random(convs: &[(usize, usize)], lstms: &[usize], seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut init = |n: usize, fan_in: usize| -> Vec<f32> {
            let a = 1.0 / (fan_in.max(1) as f32).sqrt();
            (0..n).map(|_| rng.gen_range(-a..=a)).collect()
        };
        let mut layers = Vec::new();
        let mut width = INPUT_WIDTH;
        for &(out, kernel) in convs {
            layers.push(Layer::Conv1d(Conv1d {
                input: width,
                output: out,
                kernel,
                activation: Activation::Relu,
                weights: init(out * kernel * width, kernel * width),
                bias: init(out, kernel * width),
            }));
            width = out;
        }
        for &hidden in lstms {
            let mut dir = || LstmDirection {
                w_ih: init(4 * hidden * width, hidden),
                w_hh: init(4 * hidden * hidden, hidden),
                bias: init(4 * hidden, hidden),
            };
            let forward = dir();
            let backward = dir();
            layers.push(Layer::BiLstm(BiLstm {
                input: width,
                hidden,
                forward,
                backward,
            }));
            width = 2 * hidden;
        }
        layers.push(Layer::MaskedMeanPool);
        layers.push(Layer::Dense(Dense {
            input: width,
            output: CATEGORY_COUNT,
            weights: init(CATEGORY_COUNT * width, width),
            bias: init(CATEGORY_COUNT, width),
        }));
        layers.push(Layer::Softmax);
        Self::new(layers, Category::ALL.to_vec()).expect("random model is well formed")
    }
}

/// Runs a [`NeuralModel`] on normalized, resampled, delta-encoded strokes.
#[derive(Debug, Clone)]
pub struct NeuralRecognizer {
    model: NeuralModel,
    spacing: f64,
}

impl NeuralRecognizer {
    pub fn new(model: NeuralModel) -> Self {
        Self {
            model,
            spacing: DEFAULT_SPACING,
        }
    }

    pub fn model(&self) -> &NeuralModel {
        &self.model
    }

    pub fn encode(&self, sketch: &StrokeSequence) -> Result<EncodedSketch> {
        delta_encode(&preprocess(sketch, self.spacing)?)
    }
}

impl Recognizer for NeuralRecognizer {
    fn distribution(&self, sketch: &StrokeSequence) -> Result<Distribution> {
        self.model.classify_encoded(&self.encode(sketch)?)
    }
}
