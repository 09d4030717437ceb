//! Built-in chain models: a 7-DOF arm with public kinematic offsets and
//! plausible inertial data, plus small planar chains used as analytic oracles.

use nalgebra::{Isometry3, Matrix3, Translation3, UnitQuaternion, Vector3};

use super::chain::{Joint, KinematicChain, Link};

fn iso(translation: Vector3<f64>, rotation: UnitQuaternion<f64>) -> Isometry3<f64> {
    Isometry3::from_parts(Translation3::from(translation), rotation)
}

fn diag_inertia(mass: f64, extent: f64) -> Matrix3<f64> {
    let i = (mass * extent * extent / 3.0).max(1e-4);
    Matrix3::from_diagonal(&Vector3::new(i, i, i))
}

/// 7-DOF collaborative-arm model. Kinematic offsets follow the public
/// datasheet of a common 7-axis cobot; masses, COMs and inertias are
/// plausible engineering values, not identified parameters.
pub fn panda_7dof() -> KinematicChain {
    // (a_{i-1}, d_i, alpha_{i-1}) in modified DH form
    let dh: [(f64, f64, f64); 7] = [
        (0.0, 0.333, 0.0),
        (0.0, 0.0, -std::f64::consts::FRAC_PI_2),
        (0.0, 0.316, std::f64::consts::FRAC_PI_2),
        (0.0825, 0.0, std::f64::consts::FRAC_PI_2),
        (-0.0825, 0.384, -std::f64::consts::FRAC_PI_2),
        (0.0, 0.0, std::f64::consts::FRAC_PI_2),
        (0.088, 0.0, std::f64::consts::FRAC_PI_2),
    ];
    let limits: [(f64, f64); 7] = [
        (-2.8973, 2.8973),
        (-1.7628, 1.7628),
        (-2.8973, 2.8973),
        (-3.0718, -0.0698),
        (-2.8973, 2.8973),
        (-0.0175, 3.7525),
        (-2.8973, 2.8973),
    ];
    let tau_lim = [87.0, 87.0, 87.0, 87.0, 12.0, 12.0, 12.0];
    let masses = [3.5, 3.5, 2.5, 2.5, 1.7, 1.6, 0.8];
    let tool = iso(Vector3::new(0.0, 0.0, 0.107), UnitQuaternion::identity());

    let mut joints = Vec::with_capacity(7);
    for ((&(a, d, alpha), &(q_min, q_max)), &tau) in
        dh.iter().zip(limits.iter()).zip(tau_lim.iter())
    {
        let origin = iso(Vector3::zeros(), UnitQuaternion::from_axis_angle(&Vector3::x_axis(), alpha))
            * iso(Vector3::new(a, 0.0, d), UnitQuaternion::identity());
        joints.push(Joint { axis: Vector3::z_axis(), origin, q_min, q_max, tau_lim: tau });
    }

    // COM of each link placed halfway toward the next joint origin
    let mut links = Vec::with_capacity(7);
    for i in 0..7 {
        let next = if i + 1 < 7 {
            joints[i + 1].origin.translation.vector
        } else {
            tool.translation.vector
        };
        let com = 0.5 * next;
        links.push(Link {
            mass: masses[i],
            com,
            inertia: diag_inertia(masses[i], com.norm().max(0.06)),
        });
    }

    KinematicChain::new(joints, links, Vector3::new(0.0, 0.0, -9.81), tool).unwrap()
}

/// A comfortable elbow-bent posture well inside the 7-DOF joint limits.
pub fn panda_home() -> nalgebra::DVector<f64> {
    nalgebra::DVector::from_vec(vec![
        0.0,
        -std::f64::consts::FRAC_PI_4,
        0.0,
        -3.0 * std::f64::consts::FRAC_PI_4,
        0.0,
        std::f64::consts::FRAC_PI_2,
        std::f64::consts::FRAC_PI_4,
    ])
}

/// Planar chain in the vertical x-z plane: every joint rotates about +y and
/// every segment extends along local +x. `segments` are (length, mass,
/// torque limit) triples.
pub fn planar_chain(segments: &[(f64, f64, f64)]) -> KinematicChain {
    assert!(!segments.is_empty());
    let mut joints = Vec::with_capacity(segments.len());
    let mut links = Vec::with_capacity(segments.len());
    let mut prev_len = 0.0;
    for &(len, mass, tau_lim) in segments {
        joints.push(Joint {
            axis: Vector3::y_axis(),
            origin: iso(Vector3::new(prev_len, 0.0, 0.0), UnitQuaternion::identity()),
            q_min: -2.9,
            q_max: 2.9,
            tau_lim,
        });
        links.push(Link {
            mass,
            com: Vector3::new(0.5 * len, 0.0, 0.0),
            inertia: diag_inertia(mass, 0.5 * len),
        });
        prev_len = len;
    }
    let tool = iso(Vector3::new(prev_len, 0.0, 0.0), UnitQuaternion::identity());
    KinematicChain::new(joints, links, Vector3::new(0.0, 0.0, -9.81), tool).unwrap()
}

/// Two-link planar arm (lengths `l1`, `l2`), the analytic IK/dynamics oracle.
pub fn planar_two_link(l1: f64, l2: f64) -> KinematicChain {
    planar_chain(&[(l1, 1.2, 50.0), (l2, 0.9, 50.0)])
}

/// Single revolute link about +y with COM at `com_x` and tip at `tip_x`.
pub fn single_link(mass: f64, com_x: f64, tip_x: f64) -> KinematicChain {
    let joints = vec![Joint {
        axis: Vector3::y_axis(),
        origin: Isometry3::identity(),
        q_min: -6.3,
        q_max: 6.3,
        tau_lim: 100.0,
    }];
    let links = vec![Link {
        mass,
        com: Vector3::new(com_x, 0.0, 0.0),
        inertia: Matrix3::from_diagonal(&Vector3::new(1e-3, 1e-3, 1e-3)),
    }];
    let tool = iso(Vector3::new(tip_x, 0.0, 0.0), UnitQuaternion::identity());
    KinematicChain::new(joints, links, Vector3::new(0.0, 0.0, -9.81), tool).unwrap()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn panda_home_pose_is_sane() {
        let chain = panda_7dof();
        let pose = chain.forward_kinematics(&panda_home());
        // in front of the base, raised, within reach
        assert!(pose.position.x > 0.2 && pose.position.x < 0.7);
        assert!(pose.position.z > 0.2 && pose.position.z < 0.8);
        assert!(pose.position.y.abs() < 1e-9);
    }

    #[test]
    fn home_posture_is_within_limits() {
        let chain = panda_7dof();
        for (q, j) in panda_home().iter().zip(chain.joints()) {
            assert!(*q > j.q_min && *q < j.q_max);
        }
    }
}
