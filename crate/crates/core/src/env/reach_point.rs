//! 1-D reach-point toy task used for smoke tests: move a point to a fixed
//! target a few steps away.

use super::{EnvSpec, Environment, EpisodeClock, StepResult};
use crate::types::{FactorizedState, GoalMap};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct ReachPointParams {
    pub target: f64,
    pub step_size: f64,
    pub tolerance: f64,
    pub horizon: usize,
}

impl Default for ReachPointParams {
    fn default() -> Self {
        Self {
            target: 0.4,
            step_size: 0.1,
            tolerance: 0.05,
            horizon: 50,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ReachPoint {
    spec: EnvSpec,
    params: ReachPointParams,
    x: f64,
    clock: EpisodeClock,
    goal: Vec<f64>,
}

impl ReachPoint {
    pub fn new(params: ReachPointParams) -> Self {
        let spec = EnvSpec {
            name: "reach".into(),
            state_dim: 1,
            action_dim: 1,
            action_bounds: vec![(-1.0, 1.0)],
            controllable_indices: vec![0],
            env_goal_map: GoalMap::new(vec![0], vec![params.tolerance]),
            subgoal_map: GoalMap::new(vec![0], vec![params.tolerance]),
            subgoal_bounds: vec![(-1.0, 1.0)],
            horizon: params.horizon,
            dt_step: 1.0,
            obs_scale: vec![1.0],
            low_level_sees_full_state: false,
        };
        Self {
            spec,
            goal: vec![params.target],
            params,
            x: 0.0,
            clock: EpisodeClock::new(),
        }
    }
}

impl Environment for ReachPoint {
    fn spec(&self) -> &EnvSpec {
        &self.spec
    }

    fn reset(&mut self, _seed: u64) -> FactorizedState {
        self.x = 0.0;
        self.clock.start();
        self.spec.split(&[self.x], 0)
    }

    fn step(&mut self, action: &[f64]) -> StepResult {
        let a = self.spec.clamp_action(action);
        self.x = (self.x + a[0] * self.params.step_size).clamp(-1.0, 1.0);
        let flat = [self.x];
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

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn optimal_policy_takes_four_steps() {
        let mut env = ReachPoint::new(ReachPointParams::default());
        env.reset(0);
        let mut total = 0.0;
        for t in 0..10 {
            let r = env.step(&[1.0]);
            total += r.reward;
            if r.terminal {
                assert_eq!(t + 1, 4);
                assert_eq!(total, -3.0);
                return;
            }
        }
        panic!("target not reached");
    }
}
