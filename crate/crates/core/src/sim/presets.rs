//! Ready-made scenarios: the self-intersecting planar demonstration path
//! placed in the 7-DOF arm's workspace, and a default session around it.

use nalgebra::{DVector, Vector3};

use crate::robot::{presets as robot_presets, solve_ik, IkOptions, KinematicChain, TaskPose};
use crate::spline::{fit_smoothing_spline_with, DemoSample, PathCurve};

use super::human::HumanModel;
use super::scenario::{FixtureParams, GainsConfig, Scenario};

/// Demonstration samples tracing a planar figure with one self-intersection
/// (an alpha-shaped loop) in the x-z plane of the workspace.
pub fn alpha_demo_samples() -> Vec<DemoSample> {
    let n = 200;
    let scale = 0.13;
    let center = Vector3::new(0.36, 0.0, 0.46);
    (0..n)
        .map(|i| {
            let v = -1.5 + 3.0 * i as f64 / (n - 1) as f64;
            let xi = scale * (v * v - 1.0);
            let zeta = 0.9 * scale * v * (v * v - 1.0);
            DemoSample {
                t: 0.05 * i as f64,
                position: center + Vector3::new(xi, 0.0, zeta),
            }
        })
        .collect()
}

/// Fit the alpha demonstration into a smooth arc-length path.
pub fn alpha_demo_path() -> PathCurve {
    let samples = alpha_demo_samples();
    let weights = vec![1.0; samples.len()];
    let curve = fit_smoothing_spline_with(&samples, &weights, 1e-5, 3, 60)
        .expect("alpha demo fits");
    PathCurve::with_default_table(curve).expect("alpha demo parameterizes")
}

/// Default scripted human: paces the exercise at a steady rate, pushes
/// sideways with a small constant bias, and adds slow seeded noise.
pub fn default_human() -> HumanModel {
    HumanModel {
        k_h: 400.0,
        d_h: 20.0,
        goal_speed: 0.065,
        lead: 0.05,
        bias: [0.0, 1.5, 0.0],
        noise_amplitude: 1.2,
        noise_cutoff_hz: 1.2,
    }
}

/// Initial configuration with the end-effector on the path start at the
/// constant demonstrated orientation.
pub fn place_at_path_start(
    chain: &KinematicChain,
    path: &PathCurve,
    seed: &DVector<f64>,
) -> Result<(DVector<f64>, nalgebra::UnitQuaternion<f64>), crate::robot::IkError> {
    let orientation = chain.forward_kinematics(seed).orientation;
    let target = TaskPose { position: path.position(0.0).expect("path start"), orientation };
    let q0 = solve_ik(chain, &target, seed, &IkOptions::default())?;
    Ok((q0, orientation))
}

/// Default 7-DOF session on the alpha path.
pub fn default_scenario() -> Scenario {
    let chain = robot_presets::panda_7dof();
    let path = alpha_demo_path();
    let (q0, target_orientation) =
        place_at_path_start(&chain, &path, &robot_presets::panda_home())
            .expect("alpha path start is reachable");
    Scenario {
        chain,
        path,
        fixture: FixtureParams::defaults(),
        gains: GainsConfig::defaults(),
        human: default_human(),
        q0,
        target_orientation,
        dt: 1e-3,
        duration: 20.0,
        seed: 42,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn alpha_path_length_fits_the_session() {
        let path = alpha_demo_path();
        let l = path.total_length();
        assert!((0.7..1.4).contains(&l), "alpha path length {l}");
    }

    #[test]
    fn alpha_path_self_intersects() {
        // distinct arc lengths map to (nearly) the same point
        let path = alpha_demo_path();
        let l = path.total_length();
        let mut best = f64::INFINITY;
        for i in 5..95 {
            let s1 = l * i as f64 / 200.0;
            for j in (i + 20)..195 {
                let s2 = l * j as f64 / 200.0;
                let d = (path.position(s1).unwrap() - path.position(s2).unwrap()).norm();
                if (s2 - s1) > 0.2 * l {
                    best = best.min(d);
                }
            }
        }
        assert!(best < 5e-3, "closest revisit {best}");
    }

    #[test]
    fn default_scenario_validates_and_starts_on_path() {
        let sc = default_scenario();
        sc.validate().unwrap();
        let x0 = sc.chain.forward_kinematics(&sc.q0).position;
        let p0 = sc.path.position(0.0).unwrap();
        assert!((x0 - p0).norm() < 1e-4, "start offset {}", (x0 - p0).norm());
    }
}
