use nalgebra::Vector3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::spline::PathCurve;

/// Scripted human: a hand spring pulling toward a scheduled progress target
/// on the path, viscous damping against the hand velocity, a constant bias
/// force, and seeded low-pass filtered noise.
///
/// The progress target advances at `goal_speed` along the arc (a ramp
/// schedule, clamped at the path end) but never runs more than `lead` ahead
/// of the proxy, mimicking a user who paces the exercise but cannot pull
/// from far away. The pull acts along the path chord from the proxy's point
/// to the target; lateral corrections are left to the fixture.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HumanModel {
    /// Hand stiffness toward the progress target, N/m.
    pub k_h: f64,
    /// Hand damping against the end-effector velocity, N·s/m.
    pub d_h: f64,
    /// Intended progress rate along the path, m/s.
    pub goal_speed: f64,
    /// Maximum arc distance the target may run ahead of the proxy, m.
    pub lead: f64,
    /// Constant force, N.
    pub bias: [f64; 3],
    /// Per-component standard deviation of the filtered noise, N.
    pub noise_amplitude: f64,
    /// One-pole low-pass cutoff of the noise, Hz.
    pub noise_cutoff_hz: f64,
}

impl HumanModel {
    /// A passive bystander: no drive, no bias, no noise.
    pub fn inactive() -> Self {
        Self {
            k_h: 0.0,
            d_h: 0.0,
            goal_speed: 0.0,
            lead: 0.0,
            bias: [0.0; 3],
            noise_amplitude: 0.0,
            noise_cutoff_hz: 1.0,
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        if self.k_h < 0.0 || self.d_h < 0.0 {
            return Err("human.k_h and human.d_h must be >= 0".into());
        }
        if self.goal_speed < 0.0 || self.lead < 0.0 {
            return Err("human.goal_speed and human.lead must be >= 0".into());
        }
        if self.noise_amplitude < 0.0 || self.noise_cutoff_hz <= 0.0 {
            return Err("human.noise_amplitude must be >= 0 and noise_cutoff_hz > 0".into());
        }
        Ok(())
    }

    pub fn bias_vector(&self) -> Vector3<f64> {
        Vector3::new(self.bias[0], self.bias[1], self.bias[2])
    }
}

/// Seeded mutable state of the scripted human (noise generator).
#[derive(Debug, Clone)]
pub struct HumanState {
    rng: ChaCha8Rng,
    noise: Vector3<f64>,
}

impl HumanState {
    pub fn new(seed: u64) -> Self {
        Self { rng: ChaCha8Rng::seed_from_u64(seed), noise: Vector3::zeros() }
    }

    /// Advance the one-pole filtered noise by one tick.
    fn next_noise(&mut self, model: &HumanModel, dt: f64) -> Vector3<f64> {
        if model.noise_amplitude == 0.0 {
            return Vector3::zeros();
        }
        let alpha = (-2.0 * std::f64::consts::PI * model.noise_cutoff_hz * dt).exp();
        let gain = model.noise_amplitude * (1.0 - alpha * alpha).sqrt();
        let white = Vector3::new(
            standard_normal(&mut self.rng),
            standard_normal(&mut self.rng),
            standard_normal(&mut self.rng),
        );
        self.noise = alpha * self.noise + gain * white;
        self.noise
    }
}

fn standard_normal(rng: &mut ChaCha8Rng) -> f64 {
    // Box-Muller on uniform draws keeps the dependency surface small
    let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
    let u2: f64 = rng.gen_range(0.0..1.0);
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

/// Force the scripted human applies to the end-effector at time `t`.
pub fn human_force(
    model: &HumanModel,
    _x: &Vector3<f64>,
    xdot: &Vector3<f64>,
    path: &PathCurve,
    s: f64,
    t: f64,
    state: &mut HumanState,
    dt: f64,
) -> Vector3<f64> {
    let total = path.total_length();
    let scheduled = model.goal_speed * t;
    let s_goal = scheduled.min(s + model.lead).min(total);
    let pull = if model.k_h > 0.0 && s_goal > s {
        let chord = path.position(s_goal).expect("goal on path")
            - path.position(s).expect("proxy on path");
        model.k_h * chord
    } else {
        Vector3::zeros()
    };
    pull - model.d_h * xdot + model.bias_vector() + state.next_noise(model, dt)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spline::{BSplineCurve, PathCurve};
    use approx::assert_relative_eq;

    fn straight_path(len: f64) -> PathCurve {
        let curve = BSplineCurve::new(
            1,
            vec![0.0, 0.0, 1.0, 1.0],
            vec![Vector3::zeros(), Vector3::new(len, 0.0, 0.0)],
        )
        .unwrap();
        PathCurve::with_default_table(curve).unwrap()
    }

    fn quiet_model() -> HumanModel {
        HumanModel {
            k_h: 50.0,
            d_h: 10.0,
            goal_speed: 1.0,
            lead: 0.1,
            bias: [0.0; 3],
            noise_amplitude: 0.0,
            noise_cutoff_hz: 1.0,
        }
    }

    #[test]
    fn at_goal_and_rest_force_is_zero() {
        let path = straight_path(2.0);
        let model = quiet_model();
        let mut state = HumanState::new(1);
        // t = 0: scheduled progress is 0, proxy at 0 -> no pull
        let f = human_force(
            &model,
            &Vector3::zeros(),
            &Vector3::zeros(),
            &path,
            0.0,
            0.0,
            &mut state,
            1e-3,
        );
        assert_relative_eq!(f.norm(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn lead_limited_pull_on_straight_path() {
        // goal 0.1 m ahead, k_h = 50 -> 5 N along the tangent
        let path = straight_path(2.0);
        let model = quiet_model();
        let mut state = HumanState::new(1);
        let f = human_force(
            &model,
            &path.position(0.5).unwrap(),
            &Vector3::zeros(),
            &path,
            0.5,
            1e9, // schedule far ahead; the lead cap binds
            &mut state,
            1e-3,
        );
        assert_relative_eq!(f, Vector3::new(5.0, 0.0, 0.0), epsilon = 1e-9);
    }

    #[test]
    fn bias_only_model_pushes_constantly() {
        let path = straight_path(2.0);
        let mut model = HumanModel::inactive();
        model.bias = [0.0, 3.0, 0.0];
        let mut state = HumanState::new(1);
        for t in [0.0, 0.5, 2.0] {
            let f = human_force(
                &model,
                &Vector3::zeros(),
                &Vector3::new(0.3, 0.1, 0.0),
                &path,
                0.2,
                t,
                &mut state,
                1e-3,
            );
            assert_relative_eq!(f, Vector3::new(0.0, 3.0, 0.0), epsilon = 1e-12);
        }
    }

    #[test]
    fn noise_is_deterministic_given_seed() {
        let path = straight_path(2.0);
        let mut model = HumanModel::inactive();
        model.noise_amplitude = 1.0;
        let run = |seed: u64| -> Vec<Vector3<f64>> {
            let mut state = HumanState::new(seed);
            (0..50)
                .map(|k| {
                    human_force(
                        &model,
                        &Vector3::zeros(),
                        &Vector3::zeros(),
                        &path,
                        0.0,
                        k as f64 * 1e-3,
                        &mut state,
                        1e-3,
                    )
                })
                .collect()
        };
        assert_eq!(run(7), run(7));
        assert_ne!(run(7), run(8));
    }

    #[test]
    fn filtered_noise_has_the_requested_scale() {
        let path = straight_path(2.0);
        let mut model = HumanModel::inactive();
        model.noise_amplitude = 2.0;
        model.noise_cutoff_hz = 1.5;
        let mut state = HumanState::new(3);
        let n = 200_000;
        let mut sum_sq = 0.0;
        for k in 0..n {
            let f = human_force(
                &model,
                &Vector3::zeros(),
                &Vector3::zeros(),
                &path,
                0.0,
                k as f64 * 1e-3,
                &mut state,
                1e-3,
            );
            sum_sq += f.x * f.x;
        }
        let std = (sum_sq / n as f64).sqrt();
        assert!((std - 2.0).abs() < 0.2, "noise std {std}");
    }
}
