//! Replay buffers and hindsight relabeling.
//!
//! The relabeling rules implemented here:
//! - plain hindsight action relabeling (full-state subgoal space): the
//!   stored high-level action becomes the state actually reached;
//! - timed hindsight action relabeling: only the goal component of a
//!   timed subgoal is replaced by the achieved subgoal, the desired time
//!   stays; applied only when the subgoal was missed;
//! - timed hindsight experience replay for the lower level: a future
//!   achieved subgoal n steps ahead becomes the goal, with remaining time
//!   n, and the reward and bootstrap mask are re-derived;
//! - testing transitions: stored unrelabeled, with a penalty on failure
//!   and bootstrapping kept.

use crate::env::{EnvSpec, EpisodeTrace};
use crate::reward::timed_subgoal_reward;
use crate::sac::TerminalCause;
use crate::types::GoalMap;
use rand::Rng;
use serde::{Deserialize, Serialize};

/// Goal-conditioned low-level experience record.
#[derive(Debug, Clone, PartialEq)]
pub struct LowTransition {
    pub obs: Vec<f64>,
    pub action: Vec<f64>,
    pub reward: f64,
    pub next_obs: Vec<f64>,
    pub goal: Vec<f64>,
    /// Remaining time fed to the policy at the step's start.
    pub dt_remaining: f64,
    /// `dt_remaining - 1`, fed at the next step.
    pub dt_next: f64,
    pub cause: TerminalCause,
}

impl LowTransition {
    pub fn validate(&self) {
        assert!(
            (self.dt_next - (self.dt_remaining - 1.0)).abs() < 1e-9,
            "dt_next must be dt_remaining - 1"
        );
    }
}

/// High-level (SMDP) experience record spanning one subgoal interval.
#[derive(Debug, Clone, PartialEq)]
pub struct HighTransition {
    pub state: Vec<f64>,
    /// Goal component of the high-level action.
    pub goal: Vec<f64>,
    /// Time component of the high-level action (timed hierarchies only).
    pub dt: f64,
    pub timed: bool,
    pub reward: f64,
    pub next_state: Vec<f64>,
    /// Transit time in environment steps.
    pub tau: usize,
    pub testing: bool,
    /// f^G of the state at the end of the interval.
    pub achieved_goal: Vec<f64>,
    pub episode_goal: Vec<f64>,
    pub cause: TerminalCause,
}

impl HighTransition {
    pub fn validate(&self) {
        if self.timed {
            assert_eq!(
                self.tau,
                self.dt.ceil().max(1.0) as usize,
                "timed transitions have tau = ceil(dt)"
            );
        }
    }
}

/// Plain hindsight action relabeling, for a full-state subgoal space: the
/// action becomes the next state. Rewards here never depend on the action
/// component, so recomputing the reward against the new action leaves it
/// unchanged.
pub fn relabel_action_plain(t: &HighTransition) -> HighTransition {
    let mut out = t.clone();
    out.goal = t.next_state.clone();
    out.achieved_goal = t.next_state.clone();
    out
}

/// Timed hindsight action relabeling: replace the goal component with the
/// achieved subgoal, keep the desired time. Applied only when the desired
/// subgoal was not achieved.
pub fn relabel_action_timed(t: &HighTransition, subgoal_map: &GoalMap) -> HighTransition {
    if subgoal_map.close(&t.achieved_goal, &t.goal) {
        return t.clone();
    }
    let mut out = t.clone();
    out.goal = t.achieved_goal.clone();
    out
}

/// Testing-transition handling: an achieved test is stored like any other
/// transition; a failed one keeps its original goal, takes the penalty as
/// its reward, and keeps bootstrapping.
pub fn make_testing_transition(
    t: &HighTransition,
    achieved: bool,
    penalty: f64,
) -> HighTransition {
    let mut out = t.clone();
    out.testing = true;
    if !achieved {
        out.reward = penalty;
        out.cause = TerminalCause::FailedTest;
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HerStrategy {
    /// Anchors sampled from the transition's future.
    Future,
    /// Anchors sampled from the whole episode (those not in the future
    /// are skipped).
    Episode,
}

/// Observation the lower level sees, before goal and time conditioning.
pub fn low_obs(spec: &EnvSpec, flat: &[f64]) -> Vec<f64> {
    if spec.low_level_sees_full_state {
        flat.to_vec()
    } else {
        spec.controllable_indices.iter().map(|&i| flat[i]).collect()
    }
}

fn normalize_action(spec: &EnvSpec, action: &[f64]) -> Vec<f64> {
    action
        .iter()
        .zip(&spec.action_bounds)
        .map(|(&a, &(lo, hi))| {
            let c = 0.5 * (lo + hi);
            let h = 0.5 * (hi - lo);
            ((a - c) / h).clamp(-1.0, 1.0)
        })
        .collect()
}

/// Timed hindsight experience replay over a finished episode.
///
/// For each base transition at step t, `k` anchor steps u > t are sampled;
/// the achieved subgoal at u becomes the goal with remaining time u - t.
/// The reward is re-derived (1 exactly when the relabeled time expires on
/// the anchor state) and the bootstrap mask is cut at expiry.
pub fn relabel_her_timed<R: Rng>(
    spec: &EnvSpec,
    trace: &EpisodeTrace,
    strategy: HerStrategy,
    k: usize,
    dt_max: f64,
    rng: &mut R,
) -> Vec<LowTransition> {
    let horizon_cap = dt_max.ceil() as usize;
    let map = &spec.subgoal_map;
    let len = trace.len();
    let mut out = Vec::with_capacity(len * k);
    for t in 0..len {
        let reach = (len - t).min(horizon_cap);
        if reach == 0 {
            continue;
        }
        for _ in 0..k {
            let u = match strategy {
                HerStrategy::Future => t + 1 + rng.gen_range(0..reach),
                HerStrategy::Episode => {
                    let u = rng.gen_range(1..=len);
                    if u <= t || u > t + horizon_cap {
                        continue; // anchor not in this transition's future
                    }
                    u
                }
            };
            let goal = map.achieved(&trace.states[u]);
            let dt_remaining = (u - t) as f64;
            let dt_next = dt_remaining - 1.0;
            let achieved_next = map.achieved(&trace.states[t + 1]);
            let reward = if dt_next.ceil() == 0.0 && map.close(&achieved_next, &goal) {
                1.0
            } else {
                0.0
            };
            let cause = if dt_next.ceil() == 0.0 {
                TerminalCause::SubgoalExpiry
            } else {
                TerminalCause::Ordinary
            };
            out.push(LowTransition {
                obs: low_obs(spec, &trace.states[t]),
                action: normalize_action(spec, &trace.actions[t]),
                reward,
                next_obs: low_obs(spec, &trace.states[t + 1]),
                goal,
                dt_remaining,
                dt_next,
                cause,
            });
        }
    }
    out
}

/// Conventional HER for a budgeted (untimed) low level: future achieved
/// subgoals become goals, with the shortest-path reward re-derived.
pub fn relabel_her_plain<R: Rng>(
    spec: &EnvSpec,
    trace: &EpisodeTrace,
    k: usize,
    rng: &mut R,
) -> Vec<LowTransition> {
    let map = &spec.subgoal_map;
    let len = trace.len();
    let mut out = Vec::with_capacity(len * k);
    for t in 0..len {
        for _ in 0..k {
            let u = t + 1 + rng.gen_range(0..len - t);
            let goal = map.achieved(&trace.states[u]);
            let achieved_next = map.achieved(&trace.states[t + 1]);
            let achieved = map.close(&achieved_next, &goal);
            out.push(LowTransition {
                obs: low_obs(spec, &trace.states[t]),
                action: normalize_action(spec, &trace.actions[t]),
                reward: if achieved { 0.0 } else { -1.0 },
                next_obs: low_obs(spec, &trace.states[t + 1]),
                goal,
                dt_remaining: 0.0,
                dt_next: -1.0,
                cause: if achieved {
                    TerminalCause::SubgoalAchieved
                } else {
                    TerminalCause::Ordinary
                },
            });
        }
    }
    out
}

/// Bernoulli draw for marking an emission as a testing transition.
pub fn is_testing_draw<R: Rng>(rng: &mut R, rate: f64) -> bool {
    rng.gen::<f64>() < rate
}

/// Fixed-capacity ring buffer over packed f32 records with uniform,
/// seeded sampling.
#[derive(Debug, Clone)]
pub struct RingBuffer {
    stride: usize,
    capacity: usize,
    data: Vec<f32>,
    len: usize,
    cursor: usize,
}

impl RingBuffer {
    pub fn new(capacity: usize, stride: usize) -> Self {
        assert!(capacity > 0 && stride > 0);
        Self {
            stride,
            capacity,
            data: Vec::new(),
            len: 0,
            cursor: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn stride(&self) -> usize {
        self.stride
    }

    pub fn push(&mut self, record: &[f32]) {
        assert_eq!(record.len(), self.stride, "record stride mismatch");
        if self.len < self.capacity {
            self.data.extend_from_slice(record);
            self.len += 1;
        } else {
            let at = self.cursor * self.stride;
            self.data[at..at + self.stride].copy_from_slice(record);
        }
        self.cursor = (self.cursor + 1) % self.capacity;
    }

    pub fn get(&self, index: usize) -> &[f32] {
        assert!(index < self.len);
        &self.data[index * self.stride..(index + 1) * self.stride]
    }

    /// I.i.d. uniform indices with replacement over the filled slots.
    pub fn sample_indices<R: Rng>(&self, batch: usize, rng: &mut R) -> Vec<usize> {
        assert!(self.len > 0, "sampling from an empty buffer");
        (0..batch).map(|_| rng.gen_range(0..self.len)).collect()
    }

    pub fn iter(&self) -> impl Iterator<Item = &[f32]> {
        (0..self.len).map(move |i| self.get(i))
    }
}
