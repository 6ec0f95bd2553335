//! Environment interface and the built-in tasks.
//!
//! All tasks share the same shaping: reward -1 per step until the episode
//! goal is achieved (then 0 and terminal); running out the horizon
//! truncates. Dynamics are deterministic given state and action; all
//! randomness enters through `reset(seed)`.

mod drawbridge;
mod grid_platform;
mod paddle_bounce;
mod platforms;
mod reach_point;

pub use drawbridge::{Drawbridge, DrawbridgeParams};
pub use grid_platform::{GridPlatform, GridPlatformParams};
pub use paddle_bounce::{PaddleBounce, PaddleBounceParams};
pub use platforms::{Platforms, PlatformsParams};
pub use reach_point::{ReachPoint, ReachPointParams};

use crate::types::{FactorizedState, GoalMap, TimedSubgoal};
use serde::{Deserialize, Serialize};

/// Static description of an environment.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EnvSpec {
    pub name: String,
    pub state_dim: usize,
    pub action_dim: usize,
    /// Closed per-dimension action intervals.
    pub action_bounds: Vec<(f64, f64)>,
    /// Indices of the flat state forming the directly controllable part.
    pub controllable_indices: Vec<usize>,
    /// Goal map for the episode goal.
    pub env_goal_map: GoalMap,
    /// Goal map for level-0 subgoals.
    pub subgoal_map: GoalMap,
    /// Bounds of the subgoal space, one interval per subgoal coordinate.
    pub subgoal_bounds: Vec<(f64, f64)>,
    /// Maximum episode length in steps.
    pub horizon: usize,
    /// Seconds per step; metadata only.
    pub dt_step: f64,
    /// Per-coordinate divisors applied before states enter a network.
    pub obs_scale: Vec<f64>,
    /// Whether the lower level observes the full state rather than just
    /// the controllable part.
    pub low_level_sees_full_state: bool,
}

impl EnvSpec {
    pub fn validate(&self) {
        assert!(self.horizon > 0, "horizon must be positive");
        assert_eq!(self.action_bounds.len(), self.action_dim);
        assert!(self
            .action_bounds
            .iter()
            .all(|&(lo, hi)| lo < hi && lo.is_finite() && hi.is_finite()));
        assert!(self
            .controllable_indices
            .iter()
            .all(|&i| i < self.state_dim));
        assert!(self.env_goal_map.projection.iter().all(|&i| i < self.state_dim));
        assert!(self.subgoal_map.projection.iter().all(|&i| i < self.state_dim));
        assert_eq!(self.subgoal_bounds.len(), self.subgoal_map.goal_dim());
        assert_eq!(self.obs_scale.len(), self.state_dim);
    }

    /// Split a flat state into its controllable and external parts.
    pub fn split(&self, flat: &[f64], episode_time: usize) -> FactorizedState {
        assert_eq!(flat.len(), self.state_dim);
        let mut controllable = Vec::with_capacity(self.controllable_indices.len());
        let mut external = Vec::with_capacity(self.state_dim - self.controllable_indices.len());
        for (i, &x) in flat.iter().enumerate() {
            if self.controllable_indices.contains(&i) {
                controllable.push(x);
            } else {
                external.push(x);
            }
        }
        FactorizedState {
            controllable,
            external,
            episode_time,
        }
    }

    /// Reassemble a flat state from its factorized form.
    pub fn join(&self, state: &FactorizedState) -> Vec<f64> {
        assert_eq!(state.dim(), self.state_dim);
        let mut flat = vec![0.0; self.state_dim];
        let mut ci = 0;
        let mut ei = 0;
        for (i, slot) in flat.iter_mut().enumerate() {
            if self.controllable_indices.contains(&i) {
                *slot = state.controllable[ci];
                ci += 1;
            } else {
                *slot = state.external[ei];
                ei += 1;
            }
        }
        flat
    }

    /// Clamp an action into bounds. NaN coordinates are a hard error.
    pub fn clamp_action(&self, action: &[f64]) -> Vec<f64> {
        assert_eq!(action.len(), self.action_dim, "action dimension mismatch");
        assert!(
            action.iter().all(|x| !x.is_nan()),
            "NaN in action passed to step"
        );
        action
            .iter()
            .zip(&self.action_bounds)
            .map(|(&a, &(lo, hi))| a.clamp(lo, hi))
            .collect()
    }
}

/// Outcome of one environment step.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StepResult {
    pub next_state: FactorizedState,
    pub reward: f64,
    /// Episode goal achieved.
    pub terminal: bool,
    /// Horizon exhausted without achieving the goal.
    pub truncated: bool,
}

/// Something that happened inside the dynamics and is worth reporting to
/// diagnostics (e.g. a paddle-ball contact).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EnvEvent {
    pub step: usize,
    pub kind: String,
}

/// One subgoal emitted by the higher level during an episode.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SubgoalEmission {
    /// Step index at which the subgoal was emitted.
    pub step: usize,
    pub subgoal: TimedSubgoal,
    pub testing: bool,
}

/// Ordered per-episode record: the substrate for hindsight relabeling and
/// for diagnostics.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct EpisodeTrace {
    /// Flat states, length = episode length + 1.
    pub states: Vec<Vec<f64>>,
    pub actions: Vec<Vec<f64>>,
    pub rewards: Vec<f64>,
    pub subgoal_emissions: Vec<SubgoalEmission>,
    /// Step indices at which emitted subgoals were due.
    pub achievement_times: Vec<usize>,
    pub events: Vec<EnvEvent>,
}

impl EpisodeTrace {
    pub fn len(&self) -> usize {
        self.actions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.actions.is_empty()
    }

    pub fn push_step(&mut self, action: Vec<f64>, reward: f64, next_state: Vec<f64>) {
        self.actions.push(action);
        self.rewards.push(reward);
        self.states.push(next_state);
    }

    pub fn validate(&self) {
        assert_eq!(self.states.len(), self.actions.len() + 1);
        assert_eq!(self.rewards.len(), self.actions.len());
        let n = self.len();
        assert!(self.subgoal_emissions.iter().all(|e| e.step < n));
        assert!(self.achievement_times.iter().all(|&t| t <= n));
        assert!(self
            .subgoal_emissions
            .windows(2)
            .all(|w| w[0].step <= w[1].step));
    }
}

pub trait Environment: Send {
    fn spec(&self) -> &EnvSpec;

    /// Start a new episode, deterministically reproducible from `seed`.
    fn reset(&mut self, seed: u64) -> FactorizedState;

    /// Advance the dynamics by one step.
    fn step(&mut self, action: &[f64]) -> StepResult;

    /// Desired episode goal, fixed per episode after `reset`.
    fn episode_goal(&self) -> &[f64];

    /// Whether a transition from `prev` to `next` achieves episode goal
    /// `goal`. Must be a pure function of its arguments so relabeling can
    /// re-evaluate it from a stored trace.
    fn goal_achieved(&self, _prev_flat: &[f64], next_flat: &[f64], goal: &[f64]) -> bool {
        self.spec().env_goal_map.achieves(next_flat, goal)
    }

    /// Dynamics events since the last call.
    fn take_events(&mut self) -> Vec<EnvEvent> {
        Vec::new()
    }

    /// Indices into `trace.states` whose states qualify as achieved
    /// episode goals for hindsight goal sampling.
    fn her_candidate_steps(&self, trace: &EpisodeTrace) -> Vec<usize> {
        (1..trace.states.len()).collect()
    }
}

/// Shared bookkeeping for the built-in tasks: step counting, the
/// -1/0 reward rule and terminal/truncation flags.
#[derive(Debug, Clone)]
pub(crate) struct EpisodeClock {
    pub t: usize,
    pub done: bool,
}

impl EpisodeClock {
    pub fn new() -> Self {
        Self { t: 0, done: true }
    }

    pub fn start(&mut self) {
        self.t = 0;
        self.done = false;
    }

    /// Advance one step given whether the goal was achieved; returns
    /// (reward, terminal, truncated).
    pub fn tick(&mut self, achieved: bool, horizon: usize) -> (f64, bool, bool) {
        assert!(!self.done, "step called on a finished episode; reset first");
        self.t += 1;
        if achieved {
            self.done = true;
            (0.0, true, false)
        } else if self.t >= horizon {
            self.done = true;
            (-1.0, false, true)
        } else {
            (-1.0, false, false)
        }
    }
}

/// Environments addressable from a config file.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EnvKind {
    Platforms,
    Drawbridge,
    PaddleBounce,
    GridPlatform,
    Reach,
}

impl EnvKind {
    pub fn parse(name: &str) -> Option<Self> {
        match name {
            "platforms" => Some(Self::Platforms),
            "drawbridge" => Some(Self::Drawbridge),
            "paddle_bounce" => Some(Self::PaddleBounce),
            "grid_platform" => Some(Self::GridPlatform),
            "reach" => Some(Self::Reach),
            _ => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Platforms => "platforms",
            Self::Drawbridge => "drawbridge",
            Self::PaddleBounce => "paddle_bounce",
            Self::GridPlatform => "grid_platform",
            Self::Reach => "reach",
        }
    }
}
