//! Soft actor-critic learner used on every level of every hierarchy.
//!
//! Policies output a Gaussian per action dimension, squashed through tanh
//! to the normalized action box [-1, 1]^d. Critics are twin networks with
//! polyak-averaged targets. The entropy temperature is either fixed or
//! tuned toward a target entropy.

use crate::nn::{
    adam_step, backward, forward, load_mlp, save_mlp, AdamState, Gradients, Head, Mlp,
};
use crate::nn::{log_sigmoid, ScalarAdam};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use std::path::Path;

const LOG_STD_MIN: f64 = -20.0;
const LOG_STD_MAX: f64 = 2.0;
const HALF_LN_2PI: f64 = 0.918_938_533_204_672_7;

/// Why a stored transition ended where it did. Decides the bootstrap mask.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TerminalCause {
    /// Ordinary mid-task step.
    Ordinary,
    /// Episode goal achieved; the state is terminal.
    EnvTerminal,
    /// A timed subgoal's remaining time ran out (low level).
    SubgoalExpiry,
    /// The assigned subgoal was achieved (budgeted low level).
    SubgoalAchieved,
    /// A testing transition whose subgoal the lower level missed.
    FailedTest,
    /// Horizon exhausted.
    Truncated,
}

/// Bootstrap mask for a transition: 0 disables bootstrapping, `gamma`
/// keeps it. Failed testing transitions keep their discount so that
/// failing early is never cheaper than failing late; truncation also
/// bootstraps.
pub fn gamma_mask(cause: Option<TerminalCause>, gamma: f64) -> f64 {
    let cause = cause.expect("gamma_mask: transition has no terminal-cause label");
    match cause {
        TerminalCause::EnvTerminal
        | TerminalCause::SubgoalExpiry
        | TerminalCause::SubgoalAchieved => 0.0,
        TerminalCause::Ordinary | TerminalCause::FailedTest | TerminalCause::Truncated => gamma,
    }
}

/// Entropy temperature handling.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "mode")]
pub enum AlphaMode {
    Fixed { value: f64 },
    /// Tune log(alpha) toward a target entropy (defaults to -action_dim).
    Auto {
        init: f64,
        target_entropy: Option<f64>,
    },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct SacConfig {
    pub hidden: Vec<usize>,
    pub learning_rate: f64,
    pub gamma: f64,
    /// Fraction moved toward the main network per update; 1 copies.
    pub polyak: f64,
    pub batch_size: usize,
    /// Gradient updates per environment step (may be fractional).
    pub updates_per_step: f64,
    pub alpha: AlphaMode,
    pub critic_head: Head,
    /// Shrink factor for the policy's final layer at init.
    pub policy_final_scale: f64,
}

impl Default for SacConfig {
    fn default() -> Self {
        Self {
            hidden: vec![256, 256],
            learning_rate: 3e-4,
            gamma: 0.99,
            polyak: 0.005,
            batch_size: 256,
            updates_per_step: 1.0,
            alpha: AlphaMode::Auto {
                init: 0.1,
                target_entropy: None,
            },
            critic_head: Head::Linear,
            policy_final_scale: 0.01,
        }
    }
}

/// Transition as consumed by the learner: everything already assembled
/// into network coordinates, mask already resolved via `gamma_mask`.
#[derive(Debug, Clone)]
pub struct SacTransition {
    pub obs: Vec<f32>,
    pub action: Vec<f32>,
    pub reward: f32,
    pub next_obs: Vec<f32>,
    /// 0 or gamma.
    pub mask: f32,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct SacDiagnostics {
    pub q1_loss: f64,
    pub q2_loss: f64,
    pub policy_loss: f64,
    pub alpha: f64,
    pub mean_q: f64,
    pub mean_entropy: f64,
}

#[derive(Debug, thiserror::Error)]
#[error("non-finite loss in SAC update: q1={q1} q2={q2} policy={policy}")]
pub struct NonFiniteLoss {
    pub q1: f64,
    pub q2: f64,
    pub policy: f64,
}

#[derive(Debug, Clone)]
pub struct SacAgent {
    pub obs_dim: usize,
    pub action_dim: usize,
    pub policy: Mlp,
    pub q1: Mlp,
    pub q2: Mlp,
    pub q1_target: Mlp,
    pub q2_target: Mlp,
    opt_policy: AdamState,
    opt_q1: AdamState,
    opt_q2: AdamState,
    log_alpha: f64,
    opt_alpha: ScalarAdam,
    auto_alpha: bool,
    target_entropy: f64,
    pub gamma: f64,
    pub polyak: f64,
    pub batch_size: usize,
    pub updates_per_step: f64,
}

struct PolicySample {
    /// tanh-squashed action in [-1, 1]^d.
    action: Vec<f64>,
    log_prob: f64,
    pre_squash: Vec<f64>,
    noise: Vec<f64>,
    std: Vec<f64>,
    /// which log-std outputs were clamped (no gradient there)
    clamped: Vec<bool>,
    tape: crate::nn::Tape,
}

impl SacAgent {
    pub fn new<R: Rng>(obs_dim: usize, action_dim: usize, cfg: &SacConfig, rng: &mut R) -> Self {
        let mut policy_sizes = vec![obs_dim];
        policy_sizes.extend(&cfg.hidden);
        policy_sizes.push(2 * action_dim);
        let mut q_sizes = vec![obs_dim + action_dim];
        q_sizes.extend(&cfg.hidden);
        q_sizes.push(1);

        let mut policy = Mlp::random(&policy_sizes, Head::Linear, rng);
        policy.scale_final_layer(cfg.policy_final_scale as f32);
        let q1 = Mlp::random(&q_sizes, cfg.critic_head, rng);
        let q2 = Mlp::random(&q_sizes, cfg.critic_head, rng);
        let q1_target = q1.clone();
        let q2_target = q2.clone();

        let (log_alpha, auto_alpha, target_entropy) = match cfg.alpha {
            AlphaMode::Fixed { value } => (value.max(1e-12).ln(), false, 0.0),
            AlphaMode::Auto {
                init,
                target_entropy,
            } => (
                init.max(1e-12).ln(),
                true,
                target_entropy.unwrap_or(-(action_dim as f64)),
            ),
        };

        Self {
            obs_dim,
            action_dim,
            opt_policy: AdamState::new(&policy, cfg.learning_rate),
            opt_q1: AdamState::new(&q1, cfg.learning_rate),
            opt_q2: AdamState::new(&q2, cfg.learning_rate),
            policy,
            q1,
            q2,
            q1_target,
            q2_target,
            log_alpha,
            opt_alpha: ScalarAdam::new(cfg.learning_rate),
            auto_alpha,
            target_entropy,
            gamma: cfg.gamma,
            polyak: cfg.polyak,
            batch_size: cfg.batch_size,
            updates_per_step: cfg.updates_per_step,
        }
    }

    pub fn alpha(&self) -> f64 {
        self.log_alpha.exp()
    }

    /// Fix the temperature (used by tests and ablations).
    pub fn set_alpha(&mut self, alpha: f64, auto: bool) {
        self.log_alpha = alpha.max(1e-12).ln();
        self.auto_alpha = auto;
    }

    fn sample_policy<R: Rng>(
        &self,
        obs: &[f32],
        deterministic: bool,
        rng: &mut R,
    ) -> PolicySample {
        let (out, tape) = forward(&self.policy, obs);
        let d = self.action_dim;
        let mut action = Vec::with_capacity(d);
        let mut pre_squash = Vec::with_capacity(d);
        let mut noise = Vec::with_capacity(d);
        let mut std = Vec::with_capacity(d);
        let mut clamped = Vec::with_capacity(d);
        let mut log_prob = 0.0;
        for i in 0..d {
            let mean = out[i] as f64;
            let raw_log_std = out[d + i] as f64;
            let log_std = raw_log_std.clamp(LOG_STD_MIN, LOG_STD_MAX);
            clamped.push(raw_log_std < LOG_STD_MIN || raw_log_std > LOG_STD_MAX);
            let sigma = log_std.exp();
            let xi: f64 = if deterministic {
                0.0
            } else {
                rng.sample(StandardNormal)
            };
            let z = mean + sigma * xi;
            let a = z.tanh();
            // log N(z; mean, sigma) - log(1 - tanh(z)^2), the latter in the
            // softplus form for stability
            let log_gauss = -log_std - HALF_LN_2PI - 0.5 * xi * xi;
            let log_det = 2.0 * (std::f64::consts::LN_2 - z - softplus(-2.0 * z));
            log_prob += log_gauss - log_det;
            action.push(a);
            pre_squash.push(z);
            noise.push(xi);
            std.push(sigma);
        }
        PolicySample {
            action,
            log_prob,
            pre_squash,
            noise,
            std,
            clamped,
            tape,
        }
    }

    /// Sample a normalized action in [-1, 1]^d. Deterministic mode returns
    /// tanh of the mean.
    pub fn sample_action<R: Rng>(
        &self,
        obs: &[f32],
        deterministic: bool,
        rng: &mut R,
    ) -> Vec<f32> {
        let s = self.sample_policy(obs, deterministic, rng);
        s.action.iter().map(|&a| a as f32).collect()
    }

    fn critic_value(net: &Mlp, obs: &[f32], action: &[f64]) -> f64 {
        let mut input = Vec::with_capacity(obs.len() + action.len());
        input.extend_from_slice(obs);
        input.extend(action.iter().map(|&a| a as f32));
        forward(net, &input).0[0] as f64
    }

    /// One gradient step on critics, policy, and (if enabled) temperature;
    /// targets polyak-averaged afterwards.
    pub fn update<R: Rng>(
        &mut self,
        batch: &[SacTransition],
        rng: &mut R,
    ) -> Result<SacDiagnostics, NonFiniteLoss> {
        assert!(!batch.is_empty(), "update: empty batch");
        let n = batch.len();
        let inv_n = 1.0 / n as f32;
        let alpha = self.alpha();

        // ---- critic targets ----
        let mut targets = Vec::with_capacity(n);
        for t in batch {
            let y = if t.mask == 0.0 {
                t.reward as f64
            } else {
                let next = self.sample_policy(&t.next_obs, false, rng);
                let q1t = Self::critic_value(&self.q1_target, &t.next_obs, &next.action);
                let q2t = Self::critic_value(&self.q2_target, &t.next_obs, &next.action);
                t.reward as f64 + t.mask as f64 * (q1t.min(q2t) - alpha * next.log_prob)
            };
            targets.push(y);
        }

        // ---- critic update ----
        let mut q1_loss = 0.0;
        let mut q2_loss = 0.0;
        let mut mean_q = 0.0;
        let mut g_q1 = Gradients::zeros_like(&self.q1);
        let mut g_q2 = Gradients::zeros_like(&self.q2);
        let mut input = Vec::with_capacity(self.obs_dim + self.action_dim);
        for (t, &y) in batch.iter().zip(&targets) {
            input.clear();
            input.extend_from_slice(&t.obs);
            input.extend_from_slice(&t.action);

            let (q, tape) = forward(&self.q1, &input);
            let err = q[0] as f64 - y;
            q1_loss += err * err;
            mean_q += q[0] as f64;
            let g = backward(&self.q1, &tape, &[(2.0 * err) as f32 * inv_n]);
            g_q1.accumulate(&g, 1.0);

            let (q, tape) = forward(&self.q2, &input);
            let err = q[0] as f64 - y;
            q2_loss += err * err;
            let g = backward(&self.q2, &tape, &[(2.0 * err) as f32 * inv_n]);
            g_q2.accumulate(&g, 1.0);
        }
        q1_loss /= n as f64;
        q2_loss /= n as f64;
        mean_q /= n as f64;

        // ---- policy update (and temperature statistics) ----
        let mut policy_loss = 0.0;
        let mut mean_log_prob = 0.0;
        let mut g_pi = Gradients::zeros_like(&self.policy);
        for t in batch {
            let s = self.sample_policy(&t.obs, false, rng);
            let q1 = Self::critic_value(&self.q1, &t.obs, &s.action);
            let q2 = Self::critic_value(&self.q2, &t.obs, &s.action);
            let (q_min_net, q_min) = if q1 <= q2 {
                (&self.q1, q1)
            } else {
                (&self.q2, q2)
            };
            policy_loss += alpha * s.log_prob - q_min;
            mean_log_prob += s.log_prob;

            // dQ/da via the critic's input gradient
            input.clear();
            input.extend_from_slice(&t.obs);
            input.extend(s.action.iter().map(|&a| a as f32));
            let (_, qtape) = forward(q_min_net, &input);
            let qg = backward(q_min_net, &qtape, &[1.0]);
            let dq_da = &qg.input[self.obs_dim..];

            // gradients of (alpha * log_prob - q_min) wrt policy outputs
            let d = self.action_dim;
            let mut out_grad = vec![0.0f32; 2 * d];
            for i in 0..d {
                let a = s.action[i];
                let one_m_a2 = 1.0 - a * a;
                // d log_prob / d mean and / d log_std (reparameterized)
                let dlp_dmean = 2.0 * a;
                let dlp_dlogstd = -1.0 + 2.0 * a * s.std[i] * s.noise[i];
                // d action / d mean and / d log_std
                let da_dmean = one_m_a2;
                let da_dlogstd = one_m_a2 * s.std[i] * s.noise[i];
                let dq = dq_da[i] as f64;
                out_grad[i] = ((alpha * dlp_dmean - dq * da_dmean) * inv_n as f64) as f32;
                let g_logstd = (alpha * dlp_dlogstd - dq * da_dlogstd) * inv_n as f64;
                out_grad[d + i] = if s.clamped[i] { 0.0 } else { g_logstd as f32 };
            }
            let g = backward(&self.policy, &s.tape, &out_grad);
            g_pi.accumulate(&g, 1.0);
        }
        policy_loss /= n as f64;
        mean_log_prob /= n as f64;

        if !(q1_loss.is_finite() && q2_loss.is_finite() && policy_loss.is_finite()) {
            return Err(NonFiniteLoss {
                q1: q1_loss,
                q2: q2_loss,
                policy: policy_loss,
            });
        }

        adam_step(&mut self.q1, &g_q1, &mut self.opt_q1);
        adam_step(&mut self.q2, &g_q2, &mut self.opt_q2);
        adam_step(&mut self.policy, &g_pi, &mut self.opt_policy);

        if self.auto_alpha {
            let grad = -(mean_log_prob + self.target_entropy);
            self.opt_alpha.step(&mut self.log_alpha, grad);
            self.log_alpha = self.log_alpha.clamp(-20.0, 5.0);
        }

        self.q1_target.polyak_from(&self.q1, self.polyak as f32);
        self.q2_target.polyak_from(&self.q2, self.polyak as f32);

        Ok(SacDiagnostics {
            q1_loss,
            q2_loss,
            policy_loss,
            alpha: self.alpha(),
            mean_q,
            mean_entropy: -mean_log_prob,
        })
    }

    /// Q estimate of the first critic, for diagnostics.
    pub fn q_value(&self, obs: &[f32], action: &[f32]) -> f64 {
        let action: Vec<f64> = action.iter().map(|&a| a as f64).collect();
        Self::critic_value(&self.q1, obs, &action)
    }

    pub fn save(&self, dir: &Path, prefix: &str) -> std::io::Result<()> {
        std::fs::create_dir_all(dir)?;
        save_mlp(&self.policy, &dir.join(format!("{prefix}_policy")))?;
        save_mlp(&self.q1, &dir.join(format!("{prefix}_q1")))?;
        save_mlp(&self.q2, &dir.join(format!("{prefix}_q2")))?;
        save_mlp(&self.q1_target, &dir.join(format!("{prefix}_q1_target")))?;
        save_mlp(&self.q2_target, &dir.join(format!("{prefix}_q2_target")))?;
        let meta = serde_json::json!({
            "log_alpha": self.log_alpha,
            "auto_alpha": self.auto_alpha,
            "target_entropy": self.target_entropy,
        });
        std::fs::write(
            dir.join(format!("{prefix}_sac.json")),
            serde_json::to_string_pretty(&meta).unwrap(),
        )
    }

    pub fn load(&mut self, dir: &Path, prefix: &str) -> std::io::Result<()> {
        self.policy = load_mlp(&dir.join(format!("{prefix}_policy")))?;
        self.q1 = load_mlp(&dir.join(format!("{prefix}_q1")))?;
        self.q2 = load_mlp(&dir.join(format!("{prefix}_q2")))?;
        self.q1_target = load_mlp(&dir.join(format!("{prefix}_q1_target")))?;
        self.q2_target = load_mlp(&dir.join(format!("{prefix}_q2_target")))?;
        let meta: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(
            dir.join(format!("{prefix}_sac.json")),
        )?)?;
        self.log_alpha = meta["log_alpha"].as_f64().unwrap_or(self.log_alpha);
        Ok(())
    }
}

fn softplus(x: f64) -> f64 {
    x.max(0.0) + (-x.abs()).exp().ln_1p()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn small_cfg() -> SacConfig {
        SacConfig {
            hidden: vec![32, 32],
            learning_rate: 3e-3,
            gamma: 0.95,
            polyak: 0.05,
            batch_size: 32,
            updates_per_step: 1.0,
            alpha: AlphaMode::Fixed { value: 0.05 },
            critic_head: Head::Linear,
            policy_final_scale: 0.01,
        }
    }

    #[test]
    fn gamma_mask_cases() {
        assert_eq!(gamma_mask(Some(TerminalCause::SubgoalExpiry), 0.99), 0.0);
        assert_eq!(gamma_mask(Some(TerminalCause::EnvTerminal), 0.99), 0.0);
        assert_eq!(gamma_mask(Some(TerminalCause::SubgoalAchieved), 0.99), 0.0);
        assert_eq!(gamma_mask(Some(TerminalCause::FailedTest), 0.99), 0.99);
        assert_eq!(gamma_mask(Some(TerminalCause::Ordinary), 0.99), 0.99);
        assert_eq!(gamma_mask(Some(TerminalCause::Truncated), 0.99), 0.99);
    }

    #[test]
    #[should_panic(expected = "no terminal-cause label")]
    fn gamma_mask_rejects_unlabeled() {
        gamma_mask(None, 0.99);
    }

    #[test]
    fn zero_weight_policy_gives_zero_deterministic_action() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mut agent = SacAgent::new(3, 2, &small_cfg(), &mut rng);
        agent.policy = Mlp::zeros(&[3, 32, 32, 4], Head::Linear);
        let a = agent.sample_action(&[0.5, -0.5, 0.2], true, &mut rng);
        assert_eq!(a, vec![0.0, 0.0]);
    }

    #[test]
    fn deterministic_actions_repeat() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let agent = SacAgent::new(4, 2, &small_cfg(), &mut rng);
        let obs = [0.1f32, 0.2, -0.3, 0.4];
        let a = agent.sample_action(&obs, true, &mut rng);
        let b = agent.sample_action(&obs, true, &mut rng);
        assert_eq!(a, b);
    }

    #[test]
    fn empirical_std_matches_policy_std() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut agent = SacAgent::new(2, 1, &small_cfg(), &mut rng);
        // zero net with log-std bias set to ln(0.05); at this scale tanh is
        // essentially the identity
        let mut policy = Mlp::zeros(&[2, 32, 32, 2], Head::Linear);
        policy.biases[2][1] = (0.05f64).ln() as f32;
        agent.policy = policy;
        let obs = [0.0f32, 0.0];
        let n = 10_000;
        let samples: Vec<f64> = (0..n)
            .map(|_| agent.sample_action(&obs, false, &mut rng)[0] as f64)
            .collect();
        let mean: f64 = samples.iter().sum::<f64>() / n as f64;
        let var: f64 = samples.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n as f64;
        let std = var.sqrt();
        assert!(
            (std - 0.05).abs() / 0.05 < 0.05,
            "empirical std {std} vs policy std 0.05"
        );
    }

    #[test]
    fn terminal_target_equals_reward() {
        // mask 0 disables bootstrapping: after many updates on a single
        // terminal transition the critic converges to exactly r
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut cfg = small_cfg();
        cfg.alpha = AlphaMode::Fixed { value: 0.0 };
        let mut agent = SacAgent::new(2, 1, &cfg, &mut rng);
        let t = SacTransition {
            obs: vec![0.3, -0.1],
            action: vec![0.2],
            reward: -2.5,
            next_obs: vec![0.0, 0.0],
            mask: 0.0,
        };
        let batch = vec![t.clone(); 16];
        for _ in 0..800 {
            agent.update(&batch, &mut rng).unwrap();
        }
        let q = agent.q_value(&t.obs, &t.action);
        assert!((q - (-2.5)).abs() < 0.05, "critic fixed point {q}");
    }

    #[test]
    fn log_sigmoid_critic_outputs_are_negative() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let mut cfg = small_cfg();
        cfg.critic_head = Head::LogSigmoid;
        let agent = SacAgent::new(3, 2, &cfg, &mut rng);
        for _ in 0..50 {
            let obs: Vec<f32> = (0..3).map(|_| rng.gen_range(-2.0..2.0)).collect();
            let act: Vec<f32> = (0..2).map(|_| rng.gen_range(-1.0f32..1.0)).collect();
            assert!(agent.q_value(&obs, &act) < 0.0);
        }
        assert!((log_sigmoid(0.0) + std::f64::consts::LN_2).abs() < 1e-12);
    }

    #[test]
    fn polyak_one_makes_targets_equal_main() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut cfg = small_cfg();
        cfg.polyak = 1.0;
        let mut agent = SacAgent::new(2, 1, &cfg, &mut rng);
        let t = SacTransition {
            obs: vec![0.1, 0.1],
            action: vec![0.0],
            reward: -1.0,
            next_obs: vec![0.2, 0.2],
            mask: 0.95,
        };
        agent.update(&vec![t; 8], &mut rng).unwrap();
        assert_eq!(agent.q1, agent.q1_target);
        assert_eq!(agent.q2, agent.q2_target);
    }

    /// Finite-difference check of the policy-loss gradient path through
    /// reparameterized sampling and the critic input gradient.
    #[test]
    fn policy_gradient_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let cfg = small_cfg();
        let agent = SacAgent::new(2, 1, &cfg, &mut rng);
        let obs = [0.4f32, -0.2];
        let alpha = 0.07;
        // freeze the noise
        let xi = 0.31;

        // loss as a function of the two policy outputs (mean, log_std)
        let loss_of = |mean: f64, log_std: f64| -> f64 {
            let sigma = log_std.exp();
            let z = mean + sigma * xi;
            let a = z.tanh();
            let log_gauss = -log_std - HALF_LN_2PI - 0.5 * xi * xi;
            let log_det = 2.0 * (std::f64::consts::LN_2 - z - softplus(-2.0 * z));
            let log_prob = log_gauss - log_det;
            let q = SacAgent::critic_value(&agent.q1, &obs, &[a]);
            alpha * log_prob - q
        };

        let mean = 0.2;
        let log_std = -0.7;
        let eps = 1e-6;
        let d_mean_fd = (loss_of(mean + eps, log_std) - loss_of(mean - eps, log_std)) / (2.0 * eps);
        let d_std_fd = (loss_of(mean, log_std + eps) - loss_of(mean, log_std - eps)) / (2.0 * eps);

        // analytic, as computed inside update()
        let sigma: f64 = log_std.exp();
        let z = mean + sigma * xi;
        let a = z.tanh();
        let one_m_a2 = 1.0 - a * a;
        let input = vec![obs[0], obs[1], a as f32];
        let (_, qtape) = forward(&agent.q1, &input);
        let qg = backward(&agent.q1, &qtape, &[1.0]);
        let dq_da = qg.input[2] as f64;
        let d_mean = alpha * 2.0 * a - dq_da * one_m_a2;
        let d_std = alpha * (-1.0 + 2.0 * a * sigma * xi) - dq_da * one_m_a2 * sigma * xi;

        assert!(
            (d_mean - d_mean_fd).abs() / d_mean_fd.abs().max(1e-6) < 1e-3,
            "mean path: {d_mean} vs {d_mean_fd}"
        );
        assert!(
            (d_std - d_std_fd).abs() / d_std_fd.abs().max(1e-6) < 1e-3,
            "log-std path: {d_std} vs {d_std_fd}"
        );
    }

    #[test]
    fn checkpoint_roundtrip() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let agent = SacAgent::new(3, 2, &small_cfg(), &mut rng);
        let dir = std::env::temp_dir().join("hitslab-sac-ckpt");
        agent.save(&dir, "low").unwrap();
        let mut other = SacAgent::new(3, 2, &small_cfg(), &mut rng);
        other.load(&dir, "low").unwrap();
        assert_eq!(agent.policy, other.policy);
        assert_eq!(agent.q1, other.q1);
        assert_eq!(agent.q2_target, other.q2_target);
    }
}
