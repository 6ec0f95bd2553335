//! A ship sails down a 1-D river toward its end. The sails accelerate it
//! but nothing can slow it down; a drawbridge partway down the river opens
//! at a fixed time, and hitting it while closed stops the ship dead.
//! Optimal behavior is to wait before unfurling so the ship passes the
//! bridge at full speed right after it opens.

use super::{EnvSpec, Environment, EpisodeClock, StepResult};
use crate::types::{FactorizedState, GoalMap};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct DrawbridgeParams {
    /// River length; the goal is the far end.
    pub length: f64,
    pub bridge_position: f64,
    /// Step at which the bridge opens.
    pub opens_at: usize,
    /// Velocity gained per step at full sail.
    pub accel: f64,
    /// Top speed, per step.
    pub max_speed: f64,
    pub goal_tolerance: f64,
    pub horizon: usize,
}

impl Default for DrawbridgeParams {
    fn default() -> Self {
        Self {
            length: 60.0,
            bridge_position: 30.0,
            opens_at: 350,
            accel: 0.001,
            max_speed: 0.2,
            goal_tolerance: 1.0,
            horizon: 1000,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Drawbridge {
    spec: EnvSpec,
    params: DrawbridgeParams,
    position: f64,
    velocity: f64,
    clock: EpisodeClock,
    goal: Vec<f64>,
}

impl Drawbridge {
    pub fn new(params: DrawbridgeParams) -> Self {
        let spec = EnvSpec {
            name: "drawbridge".into(),
            state_dim: 3,
            action_dim: 1,
            action_bounds: vec![(0.0, 1.0)],
            controllable_indices: vec![0, 1],
            env_goal_map: GoalMap::new(vec![0], vec![params.goal_tolerance]),
            subgoal_map: GoalMap::new(vec![0, 1], vec![1.0, 0.02]),
            subgoal_bounds: vec![(0.0, params.length), (0.0, params.max_speed)],
            horizon: params.horizon,
            dt_step: 1.0,
            obs_scale: vec![params.length, params.max_speed, 1.0],
            low_level_sees_full_state: false,
        };
        Self {
            spec,
            goal: vec![params.length],
            params,
            position: 0.0,
            velocity: 0.0,
            clock: EpisodeClock::new(),
        }
    }

    pub fn params(&self) -> &DrawbridgeParams {
        &self.params
    }

    fn bridge_open(&self, t: usize) -> bool {
        t >= self.params.opens_at
    }

    /// Remaining fraction of the opening countdown; the Markov external
    /// coordinate.
    fn countdown(&self, t: usize) -> f64 {
        let remaining = self.params.opens_at.saturating_sub(t);
        remaining as f64 / self.params.opens_at as f64
    }

    fn flat(&self, t: usize) -> Vec<f64> {
        vec![self.position, self.velocity, self.countdown(t)]
    }
}

impl Environment for Drawbridge {
    fn spec(&self) -> &EnvSpec {
        &self.spec
    }

    fn reset(&mut self, _seed: u64) -> FactorizedState {
        self.position = 0.0;
        self.velocity = 0.0;
        self.clock.start();
        self.spec.split(&self.flat(0), 0)
    }

    fn step(&mut self, action: &[f64]) -> StepResult {
        let a = self.spec.clamp_action(action);
        let t_start = self.clock.t;
        self.velocity = (self.velocity + a[0] * self.params.accel).min(self.params.max_speed);
        let mut next = self.position + self.velocity;
        let bridge = self.params.bridge_position;
        if self.position < bridge && next >= bridge && !self.bridge_open(t_start) {
            // losing all momentum against the closed bridge
            next = bridge - 1e-3;
            self.velocity = 0.0;
        }
        self.position = next.min(self.params.length);
        let flat = self.flat(t_start + 1);
        let achieved = self.spec.env_goal_map.achieves(&flat, &self.goal);
        let (reward, terminal, truncated) = self.clock.tick(achieved, self.spec.horizon);
        StepResult {
            next_state: self.spec.split(&flat, self.clock.t),
            reward,
            terminal,
            truncated,
        }
    }

    fn episode_goal(&self) -> &[f64] {
        &self.goal
    }
}

/// Passage time when sailing at full throttle starting at step
/// `start` (and idling before). Returns `None` if the run does not finish
/// within the horizon. Brute-forcing this over `start` gives the optimal
/// open-loop schedule, which the agent tests compare against.
pub fn full_sail_passage_time(params: &DrawbridgeParams, start: usize) -> Option<usize> {
    let mut env = Drawbridge::new(params.clone());
    env.reset(0);
    for t in 0..params.horizon {
        let a = if t >= start { 1.0 } else { 0.0 };
        let r = env.step(&[a]);
        if r.terminal {
            return Some(t + 1);
        }
        if r.truncated {
            return None;
        }
    }
    None
}
