//! Paddle-intercept task: a ball is served across the arena, bounces once,
//! and must be returned by a velocity-controlled paddle so that its second
//! ground contact lands inside a goal region sampled per episode.

use super::{EnvEvent, EnvSpec, Environment, EpisodeClock, EpisodeTrace, StepResult};
use crate::types::{FactorizedState, GoalMap};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct PaddleBounceParams {
    pub width: f64,
    /// Paddle workspace.
    pub paddle_x: (f64, f64),
    pub paddle_y: (f64, f64),
    pub paddle_angle: (f64, f64),
    pub paddle_length: f64,
    /// Paddle translation speed (units/s) and angular speed (rad/s) at
    /// full action.
    pub paddle_speed: f64,
    pub paddle_angular_speed: f64,
    /// Restitution against the ground and against the paddle.
    pub ground_restitution: f64,
    pub paddle_restitution: f64,
    /// Serve position and velocity ranges.
    pub serve_pos: (f64, f64),
    pub serve_vx: (f64, f64),
    pub serve_vy: (f64, f64),
    /// Goal-center range on the ground and its half-width.
    pub goal_range: (f64, f64),
    pub goal_tolerance: f64,
    pub gravity: f64,
    pub dt: f64,
    pub horizon: usize,
}

impl Default for PaddleBounceParams {
    fn default() -> Self {
        Self {
            width: 10.0,
            paddle_x: (4.5, 9.0),
            paddle_y: (0.3, 3.0),
            paddle_angle: (-1.2, 1.2),
            paddle_length: 1.2,
            paddle_speed: 2.0,
            paddle_angular_speed: 2.0,
            ground_restitution: 0.75,
            paddle_restitution: 0.85,
            serve_pos: (0.5, 1.5),
            serve_vx: (2.0, 2.6),
            serve_vy: (4.5, 5.5),
            goal_range: (1.0, 3.5),
            goal_tolerance: 0.5,
            gravity: 9.81,
            dt: 0.05,
            horizon: 300,
        }
    }
}

#[derive(Debug, Clone)]
pub struct PaddleBounce {
    spec: EnvSpec,
    params: PaddleBounceParams,
    // paddle
    px: f64,
    py: f64,
    ptheta: f64,
    // ball
    bx: f64,
    by: f64,
    bvx: f64,
    bvy: f64,
    ground_contacts: u32,
    clock: EpisodeClock,
    goal: Vec<f64>,
    events: Vec<EnvEvent>,
}

impl PaddleBounce {
    pub fn new(params: PaddleBounceParams) -> Self {
        let spec = EnvSpec {
            name: "paddle_bounce".into(),
            state_dim: 8,
            action_dim: 3,
            action_bounds: vec![(-1.0, 1.0); 3],
            controllable_indices: vec![0, 1, 2],
            env_goal_map: GoalMap::new(vec![3], vec![params.goal_tolerance]),
            subgoal_map: GoalMap::new(vec![0, 1, 2], vec![0.25, 0.25, 0.2])
                .with_angular(vec![false, false, true]),
            subgoal_bounds: vec![params.paddle_x, params.paddle_y, params.paddle_angle],
            horizon: params.horizon,
            dt_step: params.dt,
            obs_scale: vec![
                params.width,
                params.paddle_y.1,
                params.paddle_angle.1,
                params.width,
                5.0,
                6.0,
                8.0,
                2.0,
            ],
            low_level_sees_full_state: false,
        };
        Self {
            spec,
            params,
            px: 0.0,
            py: 0.0,
            ptheta: 0.0,
            bx: 0.0,
            by: 0.0,
            bvx: 0.0,
            bvy: 0.0,
            ground_contacts: 0,
            clock: EpisodeClock::new(),
            goal: vec![0.0],
            events: Vec::new(),
        }
    }

    pub fn params(&self) -> &PaddleBounceParams {
        &self.params
    }

    fn flat(&self) -> Vec<f64> {
        vec![
            self.px,
            self.py,
            self.ptheta,
            self.bx,
            self.by,
            self.bvx,
            self.bvy,
            self.ground_contacts as f64,
        ]
    }

    /// Second-contact detector on flat states: the `contacts` coordinate
    /// steps from 1 to 2.
    fn is_second_contact(prev: &[f64], next: &[f64]) -> bool {
        prev[7] == 1.0 && next[7] == 2.0
    }
}

impl Environment for PaddleBounce {
    fn spec(&self) -> &EnvSpec {
        &self.spec
    }

    fn reset(&mut self, seed: u64) -> FactorizedState {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = &self.params;
        self.px = 7.0;
        self.py = 1.5;
        self.ptheta = 0.0;
        self.bx = p.serve_pos.0;
        self.by = p.serve_pos.1;
        self.bvx = rng.gen_range(p.serve_vx.0..=p.serve_vx.1);
        self.bvy = rng.gen_range(p.serve_vy.0..=p.serve_vy.1);
        self.ground_contacts = 0;
        self.goal = vec![rng.gen_range(p.goal_range.0..=p.goal_range.1)];
        self.events.clear();
        self.clock.start();
        self.spec.split(&self.flat(), 0)
    }

    fn step(&mut self, action: &[f64]) -> StepResult {
        let a = self.spec.clamp_action(action);
        let p = self.params.clone();

        // paddle: direct velocity control
        let pvx = a[0] * p.paddle_speed;
        let pvy = a[1] * p.paddle_speed;
        self.px = (self.px + pvx * p.dt).clamp(p.paddle_x.0, p.paddle_x.1);
        self.py = (self.py + pvy * p.dt).clamp(p.paddle_y.0, p.paddle_y.1);
        self.ptheta = (self.ptheta + a[2] * p.paddle_angular_speed * p.dt)
            .clamp(p.paddle_angle.0, p.paddle_angle.1);

        // ball relative to the post-move paddle, before the ball moves
        let dir = (self.ptheta.cos(), self.ptheta.sin());
        let normal = (-self.ptheta.sin(), self.ptheta.cos());
        let rel = |bx: f64, by: f64| {
            let dx = bx - self.px;
            let dy = by - self.py;
            (dx * dir.0 + dy * dir.1, dx * normal.0 + dy * normal.1)
        };
        let (along_prev, across_prev) = rel(self.bx, self.by);

        // ball: symplectic Euler
        self.bvy -= p.gravity * p.dt;
        let new_bx = self.bx + self.bvx * p.dt;
        let new_by = self.by + self.bvy * p.dt;
        let (along_new, across_new) = rel(new_bx, new_by);

        // paddle contact: the ball path crossed (or grazed) the paddle
        // plane within the blade span, moving toward the side it came from
        let crossed = across_prev * across_new < 0.0;
        let grazing = across_new.abs() <= 0.08;
        let rvx = self.bvx - pvx;
        let rvy = self.bvy - pvy;
        let vn = rvx * normal.0 + rvy * normal.1;
        let approaching = vn * across_prev.signum() < 0.0;
        let mut hit = false;
        if (crossed || grazing) && approaching && across_prev.abs() > 1e-12 {
            let frac = if crossed {
                across_prev / (across_prev - across_new)
            } else {
                1.0
            };
            let along_hit = along_prev + (along_new - along_prev) * frac;
            if along_hit.abs() <= p.paddle_length / 2.0 {
                hit = true;
                // reflect the relative velocity about the paddle normal
                let coeff = (1.0 + p.paddle_restitution) * vn;
                self.bvx = rvx - coeff * normal.0 + pvx;
                self.bvy = rvy - coeff * normal.1 + pvy;
                // reposition on the incoming side of the blade
                let off = 0.03 * across_prev.signum();
                self.bx = self.px + along_hit * dir.0 + off * normal.0;
                self.by = self.py + along_hit * dir.1 + off * normal.1;
                self.events.push(EnvEvent {
                    step: self.clock.t + 1,
                    kind: "paddle_contact".into(),
                });
            }
        }
        if !hit {
            self.bx = new_bx;
            self.by = new_by;
        }

        // side walls
        if self.bx < 0.0 {
            self.bx = -self.bx;
            self.bvx = -self.bvx * p.ground_restitution;
        } else if self.bx > p.width {
            self.bx = 2.0 * p.width - self.bx;
            self.bvx = -self.bvx * p.ground_restitution;
        }

        // ground bounce
        let mut second_contact = false;
        if self.by <= 0.0 && self.bvy < 0.0 {
            self.by = -self.by;
            self.bvy = -self.bvy * p.ground_restitution;
            self.ground_contacts += 1;
            second_contact = self.ground_contacts == 2;
        }

        let flat = self.flat();
        let achieved = second_contact && self.spec.env_goal_map.achieves(&flat, &self.goal);
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

    fn goal_achieved(&self, prev_flat: &[f64], next_flat: &[f64], goal: &[f64]) -> bool {
        Self::is_second_contact(prev_flat, next_flat)
            && self.spec.env_goal_map.achieves(next_flat, goal)
    }

    fn take_events(&mut self) -> Vec<EnvEvent> {
        std::mem::take(&mut self.events)
    }

    /// Only second-ground-contact states qualify as achieved episode goals.
    fn her_candidate_steps(&self, trace: &EpisodeTrace) -> Vec<usize> {
        (1..trace.states.len())
            .filter(|&i| Self::is_second_contact(&trace.states[i - 1], &trace.states[i]))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn serve_is_reproducible_per_seed() {
        let mut env = PaddleBounce::new(PaddleBounceParams::default());
        let a = env.reset(42);
        let b = env.reset(42);
        assert_eq!(a, b);
        let c = env.reset(43);
        assert_ne!(a.external, c.external);
    }

    #[test]
    fn free_flight_is_energy_consistent() {
        let mut env = PaddleBounce::new(PaddleBounceParams::default());
        env.reset(1);
        let p = env.params.clone();
        let energy = |e: &PaddleBounce| {
            0.5 * (e.bvx * e.bvx + e.bvy * e.bvy) + p.gravity * e.by
        };
        // symplectic Euler: energy error stays bounded by O(dt) per period
        let e0 = energy(&env);
        for _ in 0..10 {
            if env.by < 0.2 {
                break; // stop before the ground bounce
            }
            env.step(&[0.0, 0.0, 0.0]);
        }
        let e1 = energy(&env);
        assert!(
            (e1 - e0).abs() / e0 < 0.05,
            "energy drifted from {e0} to {e1}"
        );
    }

    #[test]
    fn paddle_reflection_obeys_restitution_in_the_paddle_frame() {
        let mut env = PaddleBounce::new(PaddleBounceParams::default());
        env.reset(5);
        let p = env.params.clone();
        // horizontal paddle, ball dropped straight onto it, paddle at rest
        env.ptheta = 0.0;
        env.px = 7.0;
        env.py = 2.0;
        env.bx = 7.0;
        env.by = 2.3;
        env.bvx = 0.0;
        env.bvy = -3.0;
        // one step of free fall brings the ball within contact range
        let mut vin = f64::NAN;
        let mut vout = f64::NAN;
        for _ in 0..10 {
            let before = env.bvy;
            env.step(&[0.0, 0.0, 0.0]);
            if env.bvy > 0.0 {
                vin = before - p.gravity * p.dt; // velocity at impact
                vout = env.bvy;
                break;
            }
        }
        assert!(vout.is_finite(), "no contact happened");
        assert!(
            (vout - p.paddle_restitution * vin.abs()).abs() < 1e-9,
            "|v_out . n| = e |v_in . n|: {vout} vs {}",
            p.paddle_restitution * vin.abs()
        );
    }

    #[test]
    fn second_ground_contact_in_goal_region_terminates() {
        let mut env = PaddleBounce::new(PaddleBounceParams::default());
        env.reset(3);
        // script the episode: let the ball bounce once, then place it so
        // its second contact lands on the goal
        let gx = env.goal[0];
        let mut done = false;
        for _ in 0..env.spec().horizon {
            if env.ground_contacts == 1 && env.by > 0.5 && env.bvy < 0.0 {
                // drop it vertically onto the goal
                env.bx = gx;
                env.bvx = 0.0;
            }
            let r = env.step(&[0.0, 0.0, 0.0]);
            if r.terminal {
                assert_eq!(env.ground_contacts, 2);
                assert!((env.bx - gx).abs() <= env.params.goal_tolerance);
                done = true;
                break;
            }
        }
        assert!(done, "scripted second contact should achieve the goal");
    }

    #[test]
    fn her_candidates_are_exactly_second_contacts() {
        let mut env = PaddleBounce::new(PaddleBounceParams::default());
        let trace = crate::env::tests::rollout(&mut env, 17, 300);
        let candidates = env.her_candidate_steps(&trace);
        assert!(!candidates.is_empty(), "episode should contain a second contact");
        for &i in &candidates {
            assert_eq!(trace.states[i - 1][7], 1.0);
            assert_eq!(trace.states[i][7], 2.0);
        }
        assert!(candidates.len() <= 1, "contacts only cross 2 once");
    }

    #[test]
    fn ball_crosses_paddle_workspace_before_second_contact() {
        // the task must be interceptable: along the unperturbed serve the
        // ball passes through the paddle workspace after its first bounce
        for seed in 0..20 {
            let mut env = PaddleBounce::new(PaddleBounceParams::default());
            env.reset(seed);
            let p = env.params.clone();
            // remove the paddle from the scene
            env.py = p.paddle_y.0;
            env.px = p.paddle_x.1;
            let mut crossed = false;
            for _ in 0..p.horizon {
                // hold the paddle still in a corner
                env.px = p.paddle_x.1;
                env.py = p.paddle_y.0;
                env.ptheta = 0.0;
                env.step(&[0.0, 0.0, 0.0]);
                if env.ground_contacts == 1
                    && env.bx >= p.paddle_x.0
                    && env.bx <= p.paddle_x.1
                    && env.by >= p.paddle_y.0
                    && env.by <= p.paddle_y.1
                {
                    crossed = true;
                    break;
                }
                if env.ground_contacts >= 2 {
                    break;
                }
            }
            assert!(crossed, "seed {seed}: serve never enters the workspace");
        }
    }
}
