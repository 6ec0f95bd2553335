//! Domain value types shared by every level of the hierarchy.

use serde::{Deserialize, Serialize};

/// Environment state split into the part the agent actuates directly and
/// the part it does not.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FactorizedState {
    /// Directly controllable coordinates (the agent).
    pub controllable: Vec<f64>,
    /// External coordinates (everything else in the world).
    pub external: Vec<f64>,
    /// Steps elapsed in the episode. Only the time-augmented baseline
    /// feeds this to a policy.
    pub episode_time: usize,
}

impl FactorizedState {
    pub fn dim(&self) -> usize {
        self.controllable.len() + self.external.len()
    }
}

/// A subgoal plus the desired number of environment steps until it is to
/// be achieved. `dt` is real-valued; expiry is checked with a ceiling
/// rule, so `dt = 2.4` buys three low-level steps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimedSubgoal {
    pub goal: Vec<f64>,
    pub dt: f64,
}

impl TimedSubgoal {
    pub fn new(goal: Vec<f64>, dt: f64) -> Self {
        Self { goal, dt }
    }

    /// Number of low-level steps this subgoal spans.
    pub fn steps(&self) -> usize {
        self.dt.ceil().max(1.0) as usize
    }
}

/// Maps a full environment state to an achieved goal and decides whether
/// an achieved goal is close enough to a desired one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GoalMap {
    /// Indices into the flat state vector that form the achieved goal.
    pub projection: Vec<usize>,
    /// Per-coordinate closed tolerances.
    pub tolerances: Vec<f64>,
    /// Coordinates compared as angles (difference wrapped onto (-pi, pi]).
    pub angular: Vec<bool>,
}

impl GoalMap {
    pub fn new(projection: Vec<usize>, tolerances: Vec<f64>) -> Self {
        let n = projection.len();
        assert_eq!(n, tolerances.len(), "projection/tolerance length mismatch");
        assert!(
            tolerances.iter().all(|&t| t > 0.0),
            "tolerances must be strictly positive"
        );
        Self {
            projection,
            tolerances,
            angular: vec![false; n],
        }
    }

    pub fn with_angular(mut self, angular: Vec<bool>) -> Self {
        assert_eq!(angular.len(), self.projection.len());
        self.angular = angular;
        self
    }

    pub fn goal_dim(&self) -> usize {
        self.projection.len()
    }

    /// f^G: project a flat state onto the achieved goal.
    pub fn achieved(&self, state: &[f64]) -> Vec<f64> {
        self.projection.iter().map(|&i| state[i]).collect()
    }

    /// Tolerance predicate on already-projected goals, honoring angular
    /// coordinates.
    pub fn close(&self, achieved: &[f64], desired: &[f64]) -> bool {
        assert_eq!(achieved.len(), self.goal_dim(), "achieved goal dim mismatch");
        assert_eq!(desired.len(), self.goal_dim(), "desired goal dim mismatch");
        achieved
            .iter()
            .zip(desired)
            .zip(self.tolerances.iter().zip(&self.angular))
            .all(|((&a, &d), (&tol, &ang))| {
                let diff = if ang { wrap_angle(a - d) } else { a - d };
                diff.abs() <= tol
            })
    }

    /// Convenience: project `state` and compare against `desired`.
    pub fn achieves(&self, state: &[f64], desired: &[f64]) -> bool {
        self.close(&self.achieved(state), desired)
    }
}

/// Wrap an angle difference onto (-pi, pi].
pub fn wrap_angle(x: f64) -> f64 {
    use std::f64::consts::PI;
    let two_pi = 2.0 * PI;
    let mut r = x % two_pi;
    if r <= -PI {
        r += two_pi;
    } else if r > PI {
        r -= two_pi;
    }
    r
}

/// Per-level reward parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RewardConfig {
    /// Discount, in [0, 1).
    pub gamma: f64,
    /// Penalty c > 0 charged for emitting a subgoal (level 1 only).
    pub subgoal_penalty: f64,
    /// Reward stored on a failed testing transition (negative).
    pub testing_penalty: f64,
}

impl RewardConfig {
    pub fn new(gamma: f64, subgoal_penalty: f64, testing_penalty: f64) -> Self {
        assert!((0.0..1.0).contains(&gamma), "gamma must be in [0, 1)");
        assert!(subgoal_penalty > 0.0, "subgoal penalty must be positive");
        Self {
            gamma,
            subgoal_penalty,
            testing_penalty,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn goal_map_projects_in_order() {
        let gm = GoalMap::new(vec![2, 0], vec![0.1, 0.1]);
        assert_eq!(gm.achieved(&[1.0, 2.0, 3.0]), vec![3.0, 1.0]);
    }

    #[test]
    fn wrap_angle_range() {
        assert!((wrap_angle(3.0 * PI) - PI).abs() < 1e-12);
        assert!((wrap_angle(-3.0 * PI) - PI).abs() < 1e-12);
        assert!((wrap_angle(0.1) - 0.1).abs() < 1e-15);
        // boundary lands on +pi, not -pi
        assert!(wrap_angle(-PI) > 0.0);
    }

    #[test]
    fn angular_coordinate_compares_wrapped() {
        let gm = GoalMap::new(vec![0], vec![0.2]).with_angular(vec![true]);
        // pi - eps and -pi + eps are 2*eps apart on the circle
        assert!(gm.close(&[PI - 0.05], &[-PI + 0.05]));
        assert!(!gm.close(&[PI - 0.5], &[0.0]));
    }

    #[test]
    fn timed_subgoal_steps_uses_ceiling() {
        assert_eq!(TimedSubgoal::new(vec![0.0], 3.0).steps(), 3);
        assert_eq!(TimedSubgoal::new(vec![0.0], 2.4).steps(), 3);
        assert_eq!(TimedSubgoal::new(vec![0.0], 0.3).steps(), 1);
    }

    #[test]
    #[should_panic(expected = "strictly positive")]
    fn goal_map_rejects_zero_tolerance() {
        let _ = GoalMap::new(vec![0], vec![0.0]);
    }
}
