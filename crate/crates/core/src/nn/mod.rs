//! Minimal dense-network stack: ReLU MLPs with exact reverse-mode
//! gradients. Parameters are stored as f32; reductions accumulate in f64.

mod adam;
mod checkpoint;

pub use adam::{adam_step, AdamState};
pub use checkpoint::{load_mlp, save_mlp};

use rand::Rng;
use serde::{Deserialize, Serialize};

/// Output head applied to the final pre-activation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Head {
    /// Identity.
    Linear,
    /// Elementwise tanh, output in (-1, 1).
    TanhBounded,
    /// Elementwise log-sigmoid, output in (-inf, 0). Used for critics of
    /// levels whose rewards are bounded above by zero.
    LogSigmoid,
}

/// Dense multilayer perceptron with ReLU hidden activations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mlp {
    /// Layer widths, input first: `[in, h1, ..., out]`.
    pub sizes: Vec<usize>,
    /// Row-major `out x in` weight matrix per layer.
    pub weights: Vec<Vec<f32>>,
    /// Bias vector per layer.
    pub biases: Vec<Vec<f32>>,
    pub head: Head,
}

/// Cached activations from one forward pass, sufficient for exact
/// reverse-mode gradients.
#[derive(Debug, Clone)]
pub struct Tape {
    input: Vec<f32>,
    /// Pre-activations of every layer, in order.
    pre: Vec<Vec<f32>>,
    /// Head output (post-activation of the last layer).
    output: Vec<f32>,
}

/// Parameter gradients plus the gradient with respect to the input, which
/// the actor update chains through the critic.
#[derive(Debug, Clone)]
pub struct Gradients {
    pub weights: Vec<Vec<f32>>,
    pub biases: Vec<Vec<f32>>,
    pub input: Vec<f32>,
}

impl Gradients {
    pub fn zeros_like(net: &Mlp) -> Self {
        Self {
            weights: net.weights.iter().map(|w| vec![0.0; w.len()]).collect(),
            biases: net.biases.iter().map(|b| vec![0.0; b.len()]).collect(),
            input: vec![0.0; net.sizes[0]],
        }
    }

    /// Elementwise `self += other * scale` over parameter gradients.
    pub fn accumulate(&mut self, other: &Gradients, scale: f32) {
        for (a, b) in self.weights.iter_mut().zip(&other.weights) {
            for (x, y) in a.iter_mut().zip(b) {
                *x += y * scale;
            }
        }
        for (a, b) in self.biases.iter_mut().zip(&other.biases) {
            for (x, y) in a.iter_mut().zip(b) {
                *x += y * scale;
            }
        }
    }
}

impl Mlp {
    /// Zero-initialized network (mostly useful in tests).
    pub fn zeros(sizes: &[usize], head: Head) -> Self {
        assert!(sizes.len() >= 2, "need at least input and output layer");
        let weights = sizes
            .windows(2)
            .map(|w| vec![0.0; w[0] * w[1]])
            .collect();
        let biases = sizes[1..].iter().map(|&n| vec![0.0; n]).collect();
        Self {
            sizes: sizes.to_vec(),
            weights,
            biases,
            head,
        }
    }

    /// Kaiming-uniform initialization.
    pub fn random<R: Rng>(sizes: &[usize], head: Head, rng: &mut R) -> Self {
        let mut net = Self::zeros(sizes, head);
        for (l, w) in net.weights.iter_mut().enumerate() {
            let fan_in = sizes[l] as f64;
            let limit = (6.0 / fan_in).sqrt();
            for x in w.iter_mut() {
                *x = rng.gen_range(-limit..limit) as f32;
            }
        }
        net
    }

    /// Scale the final layer's weights and biases, e.g. to start a policy
    /// near zero.
    pub fn scale_final_layer(&mut self, scale: f32) {
        for x in self.weights.last_mut().unwrap() {
            *x *= scale;
        }
        for x in self.biases.last_mut().unwrap() {
            *x *= scale;
        }
    }

    pub fn input_dim(&self) -> usize {
        self.sizes[0]
    }

    pub fn output_dim(&self) -> usize {
        *self.sizes.last().unwrap()
    }

    pub fn param_count(&self) -> usize {
        self.weights.iter().map(Vec::len).sum::<usize>()
            + self.biases.iter().map(Vec::len).sum::<usize>()
    }

    /// In-place polyak average toward `source`: after this call with
    /// `rho = 1` the two networks are equal.
    pub fn polyak_from(&mut self, source: &Mlp, rho: f32) {
        for (t, s) in self.weights.iter_mut().zip(&source.weights) {
            for (x, y) in t.iter_mut().zip(s) {
                *x = (1.0 - rho) * *x + rho * y;
            }
        }
        for (t, s) in self.biases.iter_mut().zip(&source.biases) {
            for (x, y) in t.iter_mut().zip(s) {
                *x = (1.0 - rho) * *x + rho * y;
            }
        }
    }
}

fn matvec(w: &[f32], b: &[f32], x: &[f32], out_dim: usize, in_dim: usize, out: &mut Vec<f32>) {
    out.clear();
    for i in 0..out_dim {
        let row = &w[i * in_dim..(i + 1) * in_dim];
        let mut acc = 0.0f64;
        for (wij, xj) in row.iter().zip(x) {
            acc += (*wij as f64) * (*xj as f64);
        }
        out.push((acc + b[i] as f64) as f32);
    }
}

/// Numerically stable log-sigmoid, `log(1 / (1 + exp(-x)))`, strictly
/// negative on all finite inputs.
pub fn log_sigmoid(x: f64) -> f64 {
    // log sigma(x) = -softplus(-x); softplus(t) = max(t, 0) + ln(1 + e^{-|t|})
    let t = -x;
    -(t.max(0.0) + (-t.abs()).exp().ln_1p())
}

fn apply_head(head: Head, pre: &[f32], out: &mut Vec<f32>) {
    out.clear();
    match head {
        Head::Linear => out.extend_from_slice(pre),
        Head::TanhBounded => out.extend(pre.iter().map(|&z| (z as f64).tanh() as f32)),
        Head::LogSigmoid => out.extend(pre.iter().map(|&z| log_sigmoid(z as f64) as f32)),
    }
}

/// Forward pass, returning the output and the tape for `backward`.
pub fn forward(net: &Mlp, input: &[f32]) -> (Vec<f32>, Tape) {
    assert_eq!(input.len(), net.input_dim(), "forward: input dim mismatch");
    assert!(
        input.iter().all(|x| x.is_finite()),
        "forward: non-finite input"
    );
    let layers = net.weights.len();
    let mut pre = Vec::with_capacity(layers);
    let mut x: Vec<f32> = input.to_vec();
    let mut z = Vec::new();
    for l in 0..layers {
        matvec(
            &net.weights[l],
            &net.biases[l],
            &x,
            net.sizes[l + 1],
            net.sizes[l],
            &mut z,
        );
        pre.push(z.clone());
        if l + 1 < layers {
            x.clear();
            x.extend(z.iter().map(|&v| v.max(0.0)));
        }
    }
    let mut output = Vec::new();
    apply_head(net.head, pre.last().unwrap(), &mut output);
    let tape = Tape {
        input: input.to_vec(),
        pre,
        output: output.clone(),
    };
    (output, tape)
}

/// Exact reverse-mode gradients of `sum(output * output_grad)` with
/// respect to every parameter and the input.
pub fn backward(net: &Mlp, tape: &Tape, output_grad: &[f32]) -> Gradients {
    assert_eq!(
        output_grad.len(),
        net.output_dim(),
        "backward: output grad dim mismatch"
    );
    let layers = net.weights.len();
    assert_eq!(tape.pre.len(), layers, "backward: tape does not match net");

    let mut grads = Gradients::zeros_like(net);

    // gradient at the last pre-activation through the head
    let last_pre = &tape.pre[layers - 1];
    let mut delta: Vec<f32> = match net.head {
        Head::Linear => output_grad.to_vec(),
        Head::TanhBounded => output_grad
            .iter()
            .zip(&tape.output)
            .map(|(&g, &y)| {
                let y = y as f64;
                (g as f64 * (1.0 - y * y)) as f32
            })
            .collect(),
        Head::LogSigmoid => output_grad
            .iter()
            .zip(last_pre)
            .map(|(&g, &z)| {
                // d/dz log sigma(z) = sigma(-z)
                let s = 1.0 / (1.0 + (z as f64).exp());
                (g as f64 * s) as f32
            })
            .collect(),
    };

    for l in (0..layers).rev() {
        let in_dim = net.sizes[l];
        let out_dim = net.sizes[l + 1];
        let layer_input: Vec<f32> = if l == 0 {
            tape.input.clone()
        } else {
            tape.pre[l - 1].iter().map(|&v| v.max(0.0)).collect()
        };
        for i in 0..out_dim {
            let di = delta[i];
            grads.biases[l][i] = di;
            let row = &mut grads.weights[l][i * in_dim..(i + 1) * in_dim];
            for (g, xj) in row.iter_mut().zip(&layer_input) {
                *g = di * xj;
            }
        }
        // propagate to the previous layer (or the input)
        let mut prev = vec![0.0f32; in_dim];
        for (j, p) in prev.iter_mut().enumerate() {
            let mut acc = 0.0f64;
            for i in 0..out_dim {
                acc += (net.weights[l][i * in_dim + j] as f64) * (delta[i] as f64);
            }
            *p = acc as f32;
        }
        if l == 0 {
            grads.input = prev;
        } else {
            delta = prev
                .iter()
                .zip(&tape.pre[l - 1])
                .map(|(&d, &z)| if z > 0.0 { d } else { 0.0 })
                .collect();
        }
    }
    grads
}
