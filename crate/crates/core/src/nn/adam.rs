//! Bias-corrected Adam. Moments are kept in f64; parameters stay f32.

use super::{Gradients, Mlp};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AdamState {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub step: u64,
    m_weights: Vec<Vec<f64>>,
    v_weights: Vec<Vec<f64>>,
    m_biases: Vec<Vec<f64>>,
    v_biases: Vec<Vec<f64>>,
}

impl AdamState {
    pub fn new(net: &Mlp, learning_rate: f64) -> Self {
        Self {
            learning_rate,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            step: 0,
            m_weights: net.weights.iter().map(|w| vec![0.0; w.len()]).collect(),
            v_weights: net.weights.iter().map(|w| vec![0.0; w.len()]).collect(),
            m_biases: net.biases.iter().map(|b| vec![0.0; b.len()]).collect(),
            v_biases: net.biases.iter().map(|b| vec![0.0; b.len()]).collect(),
        }
    }
}

/// One Adam update of `net` in place.
pub fn adam_step(net: &mut Mlp, grads: &Gradients, state: &mut AdamState) {
    state.step += 1;
    let t = state.step as i32;
    let lr_t = state.learning_rate * (1.0 - state.beta2.powi(t)).sqrt()
        / (1.0 - state.beta1.powi(t));
    let b1 = state.beta1;
    let b2 = state.beta2;
    let eps = state.epsilon;

    let mut update = |params: &mut [f32], g: &[f32], m: &mut [f64], v: &mut [f64]| {
        for i in 0..params.len() {
            let gi = g[i] as f64;
            assert!(gi.is_finite(), "adam_step: non-finite gradient");
            m[i] = b1 * m[i] + (1.0 - b1) * gi;
            v[i] = b2 * v[i] + (1.0 - b2) * gi * gi;
            params[i] = (params[i] as f64 - lr_t * m[i] / (v[i].sqrt() + eps)) as f32;
        }
    };

    for l in 0..net.weights.len() {
        update(
            &mut net.weights[l],
            &grads.weights[l],
            &mut state.m_weights[l],
            &mut state.v_weights[l],
        );
        update(
            &mut net.biases[l],
            &grads.biases[l],
            &mut state.m_biases[l],
            &mut state.v_biases[l],
        );
    }
}

/// Scalar Adam for single tunable parameters (the entropy temperature).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScalarAdam {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub step: u64,
    m: f64,
    v: f64,
}

impl ScalarAdam {
    pub fn new(learning_rate: f64) -> Self {
        Self {
            learning_rate,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            step: 0,
            m: 0.0,
            v: 0.0,
        }
    }

    pub fn step(&mut self, param: &mut f64, grad: f64) {
        assert!(grad.is_finite(), "scalar adam: non-finite gradient");
        self.step += 1;
        let t = self.step as i32;
        let lr_t = self.learning_rate * (1.0 - self.beta2.powi(t)).sqrt()
            / (1.0 - self.beta1.powi(t));
        self.m = self.beta1 * self.m + (1.0 - self.beta1) * grad;
        self.v = self.beta2 * self.v + (1.0 - self.beta2) * grad * grad;
        *param -= lr_t * self.m / (self.v.sqrt() + self.epsilon);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::{backward, forward, Head};

    #[test]
    fn first_step_moves_by_learning_rate_against_gradient_sign() {
        let mut net = Mlp::zeros(&[1, 1], Head::Linear);
        net.weights[0] = vec![1.0];
        let mut state = AdamState::new(&net, 0.01);
        let mut grads = Gradients::zeros_like(&net);
        grads.weights[0] = vec![0.3];
        adam_step(&mut net, &grads, &mut state);
        // bias-corrected first step is -lr * sign(g) up to epsilon
        let moved = 1.0 - net.weights[0][0];
        assert!((moved - 0.01).abs() < 1e-6, "moved {moved}");
    }

    #[test]
    fn zero_gradients_leave_parameters_unchanged() {
        let mut net = Mlp::zeros(&[2, 2], Head::Linear);
        net.weights[0] = vec![0.5, -0.5, 0.25, 0.75];
        let before = net.clone();
        let mut state = AdamState::new(&net, 0.01);
        let grads = Gradients::zeros_like(&net);
        adam_step(&mut net, &grads, &mut state);
        assert_eq!(net, before);
        assert_eq!(state.step, 1);
    }

    #[test]
    #[should_panic(expected = "non-finite gradient")]
    fn nan_gradient_is_a_hard_error() {
        let mut net = Mlp::zeros(&[1, 1], Head::Linear);
        let mut state = AdamState::new(&net, 0.01);
        let mut grads = Gradients::zeros_like(&net);
        grads.weights[0] = vec![f32::NAN];
        adam_step(&mut net, &grads, &mut state);
    }

    #[test]
    fn minimizes_a_scalar_quadratic() {
        // fit y = w*x to pass through (1, 3): minimum at w = 3
        let mut net = Mlp::zeros(&[1, 1], Head::Linear);
        let mut state = AdamState::new(&net, 0.01);
        for _ in 0..2000 {
            let (y, tape) = forward(&net, &[1.0]);
            let grad_out = 2.0 * (y[0] - 3.0);
            let grads = backward(&net, &tape, &[grad_out]);
            adam_step(&mut net, &grads, &mut state);
        }
        let w = net.weights[0][0] as f64 + net.biases[0][0] as f64;
        assert!((w - 3.0).abs() < 1e-3, "converged to {w}");
    }
}
