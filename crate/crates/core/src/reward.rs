//! Reward functions used across the hierarchy.
//!
//! Tolerance boxes are closed: a coordinate exactly on the tolerance
//! boundary counts as achieved.

/// True iff every coordinate of `achieved` lies within the closed
/// tolerance box around `desired`.
pub fn phi(achieved: &[f64], desired: &[f64], tolerances: &[f64]) -> bool {
    assert_eq!(
        achieved.len(),
        desired.len(),
        "phi: achieved/desired dimension mismatch"
    );
    assert_eq!(
        achieved.len(),
        tolerances.len(),
        "phi: tolerance dimension mismatch"
    );
    achieved
        .iter()
        .zip(desired)
        .zip(tolerances)
        .all(|((&a, &d), &tol)| (a - d).abs() <= tol)
}

/// Shortest-path reward: 0 on achievement, -1 otherwise. Used on both
/// levels of the HAC baseline and for environment goals.
pub fn shortest_path_reward(next_state_goal: &[f64], subgoal: &[f64], tolerances: &[f64]) -> f64 {
    if phi(next_state_goal, subgoal, tolerances) {
        0.0
    } else {
        -1.0
    }
}

/// Timed-subgoal reward: 1 exactly when the subgoal is achieved at the
/// desired time (remaining time rounds up to zero), 0 otherwise.
pub fn timed_subgoal_reward(
    next_state_goal: &[f64],
    subgoal: &[f64],
    dt_next: f64,
    tolerances: &[f64],
) -> f64 {
    if dt_next.ceil() == 0.0 && phi(next_state_goal, subgoal, tolerances) {
        1.0
    } else {
        0.0
    }
}

/// High-level reward for one subgoal interval: discounted sum of the
/// environment rewards collected while the lower level was in control,
/// minus the emission penalty c.
pub fn high_level_reward(env_rewards: &[f64], gamma: f64, c: f64) -> f64 {
    assert!(
        !env_rewards.is_empty(),
        "a subgoal interval spans at least one environment step"
    );
    let mut acc = 0.0;
    let mut g = 1.0;
    for &r in env_rewards {
        acc += g * r;
        g *= gamma;
    }
    acc - c
}

/// Discounted return of a reward sequence. Used for evaluation reporting.
pub fn discounted_return(rewards: &[f64], gamma: f64) -> f64 {
    let mut acc = 0.0;
    let mut g = 1.0;
    for &r in rewards {
        acc += g * r;
        g *= gamma;
    }
    acc
}
