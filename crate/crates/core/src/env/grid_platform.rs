//! Tabular world: a 1-D agent on a row of cells plus an external platform
//! phase that cycles independently of everything the agent does. Small
//! enough to enumerate exactly, which is what the stationarity checks
//! need.

use super::{EnvSpec, Environment, EpisodeClock, StepResult};
use crate::types::{FactorizedState, GoalMap};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct GridPlatformParams {
    /// Number of cells.
    pub cells: usize,
    /// Number of platform phases.
    pub phases: usize,
    pub horizon: usize,
}

impl Default for GridPlatformParams {
    fn default() -> Self {
        Self {
            cells: 8,
            phases: 6,
            horizon: 40,
        }
    }
}

#[derive(Debug, Clone)]
pub struct GridPlatform {
    spec: EnvSpec,
    params: GridPlatformParams,
    cell: i64,
    phase: i64,
    clock: EpisodeClock,
    goal: Vec<f64>,
}

impl GridPlatform {
    pub fn new(params: GridPlatformParams) -> Self {
        assert!(params.cells >= 2 && params.phases >= 2);
        let n = params.cells as f64;
        let p = params.phases as f64;
        let spec = EnvSpec {
            name: "grid_platform".into(),
            state_dim: 2,
            action_dim: 1,
            action_bounds: vec![(-2.0, 2.0)],
            controllable_indices: vec![0],
            // the platform is docked at the last cell only at phase 0
            env_goal_map: GoalMap::new(vec![0, 1], vec![0.5, 0.5]),
            subgoal_map: GoalMap::new(vec![0], vec![0.5]),
            subgoal_bounds: vec![(0.0, n - 1.0)],
            horizon: params.horizon,
            dt_step: 1.0,
            obs_scale: vec![n - 1.0, p - 1.0],
            low_level_sees_full_state: false,
        };
        Self {
            spec,
            goal: vec![n - 1.0, 0.0],
            params,
            cell: 0,
            phase: 0,
            clock: EpisodeClock::new(),
        }
    }

    pub fn joint_state_count(&self) -> usize {
        self.params.cells * self.params.phases
    }

    fn flat(&self) -> Vec<f64> {
        vec![self.cell as f64, self.phase as f64]
    }
}

impl Environment for GridPlatform {
    fn spec(&self) -> &EnvSpec {
        &self.spec
    }

    fn reset(&mut self, _seed: u64) -> FactorizedState {
        self.cell = 0;
        self.phase = 0;
        self.clock.start();
        self.spec.split(&self.flat(), 0)
    }

    fn step(&mut self, action: &[f64]) -> StepResult {
        let a = self.spec.clamp_action(action);
        let mv = a[0].round() as i64;
        self.cell = (self.cell + mv).clamp(0, self.params.cells as i64 - 1);
        // the platform phase advances no matter what the agent does
        self.phase = (self.phase + 1) % self.params.phases as i64;
        let flat = self.flat();
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
