use nalgebra::{DMatrix, DVector, Isometry3, Matrix3, Unit, UnitQuaternion, Vector3, Vector6};

use super::RobotError;

/// One revolute joint: a fixed parent-to-joint transform followed by a
/// rotation of `q` about `axis` (axis expressed in the child frame).
#[derive(Debug, Clone)]
pub struct Joint {
    pub axis: Unit<Vector3<f64>>,
    pub origin: Isometry3<f64>,
    pub q_min: f64,
    pub q_max: f64,
    /// Actuator torque limit, N·m.
    pub tau_lim: f64,
}

/// Rigid body attached after a joint. Center of mass and rotational inertia
/// (about the COM) are expressed in the link frame.
#[derive(Debug, Clone)]
pub struct Link {
    pub mass: f64,
    pub com: Vector3<f64>,
    pub inertia: Matrix3<f64>,
}

/// Serial kinematic chain of revolute joints.
#[derive(Debug, Clone)]
pub struct KinematicChain {
    joints: Vec<Joint>,
    links: Vec<Link>,
    /// Gravity acceleration in the base frame, m/s².
    pub gravity: Vector3<f64>,
    /// Fixed transform from the last link frame to the end-effector frame.
    pub tool: Isometry3<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RobotState {
    pub q: DVector<f64>,
    pub qdot: DVector<f64>,
}

impl RobotState {
    pub fn new(q: DVector<f64>, qdot: DVector<f64>) -> Self {
        Self { q, qdot }
    }

    pub fn at_rest(q: DVector<f64>) -> Self {
        let n = q.len();
        Self { q, qdot: DVector::zeros(n) }
    }
}

/// End-effector pose: position plus unit quaternion orientation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TaskPose {
    pub position: Vector3<f64>,
    pub orientation: UnitQuaternion<f64>,
}

/// Per-tick kinematic quantities shared between controller and integrator.
#[derive(Debug, Clone)]
pub struct StateKinematics {
    pub pose: TaskPose,
    /// Geometric Jacobian, 6 x n.
    pub jac: DMatrix<f64>,
    /// End-effector twist (linear, angular).
    pub ee_vel: Vector6<f64>,
}

impl StateKinematics {
    pub fn linear_velocity(&self) -> Vector3<f64> {
        Vector3::new(self.ee_vel[0], self.ee_vel[1], self.ee_vel[2])
    }

    pub fn angular_velocity(&self) -> Vector3<f64> {
        Vector3::new(self.ee_vel[3], self.ee_vel[4], self.ee_vel[5])
    }
}

impl TaskPose {
    pub fn from_isometry(iso: &Isometry3<f64>) -> Self {
        Self { position: iso.translation.vector, orientation: iso.rotation }
    }
}

impl KinematicChain {
    pub fn new(
        joints: Vec<Joint>,
        links: Vec<Link>,
        gravity: Vector3<f64>,
        tool: Isometry3<f64>,
    ) -> Result<Self, RobotError> {
        if joints.is_empty() {
            return Err(RobotError::InvalidChain("chain needs at least one joint".into()));
        }
        if joints.len() != links.len() {
            return Err(RobotError::InvalidChain(format!(
                "joint count {} != link count {}",
                joints.len(),
                links.len()
            )));
        }
        for (i, j) in joints.iter().enumerate() {
            if j.q_min >= j.q_max {
                return Err(RobotError::InvalidChain(format!("joint {i}: q_min >= q_max")));
            }
            if !(j.tau_lim > 0.0) {
                return Err(RobotError::InvalidChain(format!("joint {i}: tau_lim must be > 0")));
            }
        }
        for (i, l) in links.iter().enumerate() {
            if !(l.mass >= 0.0) {
                return Err(RobotError::InvalidChain(format!("link {i}: negative mass")));
            }
            let sym = (l.inertia - l.inertia.transpose()).norm();
            if sym > 1e-9 {
                return Err(RobotError::InvalidChain(format!("link {i}: inertia not symmetric")));
            }
            if l.inertia.symmetric_eigenvalues().iter().any(|&e| e <= 0.0) {
                return Err(RobotError::InvalidChain(format!(
                    "link {i}: inertia not positive definite"
                )));
            }
        }
        Ok(Self { joints, links, gravity, tool })
    }

    pub fn dof(&self) -> usize {
        self.joints.len()
    }

    pub fn joints(&self) -> &[Joint] {
        &self.joints
    }

    pub fn links(&self) -> &[Link] {
        &self.links
    }

    pub fn check_dim(&self, q: &DVector<f64>) -> Result<(), RobotError> {
        if q.len() != self.dof() {
            return Err(RobotError::DimensionMismatch { expected: self.dof(), got: q.len() });
        }
        Ok(())
    }

    /// Torque limits as a vector.
    pub fn tau_limits(&self) -> DVector<f64> {
        DVector::from_iterator(self.dof(), self.joints.iter().map(|j| j.tau_lim))
    }

    /// Mid-range posture (joint centers).
    pub fn centered_posture(&self) -> DVector<f64> {
        DVector::from_iterator(self.dof(), self.joints.iter().map(|j| 0.5 * (j.q_min + j.q_max)))
    }

    /// Clamp a configuration into the joint limits.
    pub fn clamp_to_limits(&self, q: &mut DVector<f64>) {
        for (qi, j) in q.iter_mut().zip(self.joints.iter()) {
            *qi = qi.clamp(j.q_min, j.q_max);
        }
    }

    /// World transforms of every link frame (after the joint rotation).
    pub fn link_transforms(&self, q: &DVector<f64>) -> Vec<Isometry3<f64>> {
        debug_assert_eq!(q.len(), self.dof());
        let mut out = Vec::with_capacity(self.dof());
        let mut t = Isometry3::identity();
        for (joint, &qi) in self.joints.iter().zip(q.iter()) {
            let rot = UnitQuaternion::from_axis_angle(&joint.axis, qi);
            t = t * joint.origin * Isometry3::from_parts(nalgebra::Translation3::identity(), rot);
            out.push(t);
        }
        out
    }

    pub fn ee_transform(&self, q: &DVector<f64>) -> Isometry3<f64> {
        *self.link_transforms(q).last().unwrap() * self.tool
    }

    /// Forward kinematics of the end-effector.
    pub fn forward_kinematics(&self, q: &DVector<f64>) -> TaskPose {
        TaskPose::from_isometry(&self.ee_transform(q))
    }

    /// Geometric Jacobian, 6 x n: rows 0..3 linear, rows 3..6 angular.
    pub fn geometric_jacobian(&self, q: &DVector<f64>) -> DMatrix<f64> {
        let transforms = self.link_transforms(q);
        let p_ee = (transforms.last().unwrap() * self.tool).translation.vector;
        let mut jac = DMatrix::zeros(6, self.dof());
        for (i, (t, joint)) in transforms.iter().zip(self.joints.iter()).enumerate() {
            let z = t.rotation * joint.axis.into_inner();
            let lever = p_ee - t.translation.vector;
            let lin = z.cross(&lever);
            for r in 0..3 {
                jac[(r, i)] = lin[r];
                jac[(r + 3, i)] = z[r];
            }
        }
        jac
    }

    /// End-effector velocity (linear, angular) for a state.
    pub fn ee_velocity(&self, state: &RobotState) -> Vector6<f64> {
        let j = self.geometric_jacobian(&state.q);
        let v = &j * &state.qdot;
        Vector6::from_iterator(v.iter().copied())
    }

    /// Pose, Jacobian and end-effector velocity of a state, computed once.
    pub fn state_kinematics(&self, state: &RobotState) -> StateKinematics {
        let jac = self.geometric_jacobian(&state.q);
        let vel = &jac * &state.qdot;
        StateKinematics {
            pose: self.forward_kinematics(&state.q),
            ee_vel: Vector6::from_iterator(vel.iter().copied()),
            jac,
        }
    }

    /// Velocity-product end-effector acceleration `J̇ q̇` (linear, angular),
    /// i.e. the task acceleration when all joint accelerations are zero and
    /// gravity is ignored.
    pub fn jdot_qdot(&self, q: &DVector<f64>, qdot: &DVector<f64>) -> Vector6<f64> {
        let transforms = self.link_transforms(q);
        let n = self.dof();
        // world-frame propagation of angular velocity/acceleration and the
        // linear acceleration of each frame origin, with qddot = 0
        let mut omega = Vector3::zeros();
        let mut alpha = Vector3::zeros();
        let mut acc = Vector3::zeros();
        let mut prev_p = Vector3::zeros();
        for i in 0..n {
            let p = transforms[i].translation.vector;
            let r = p - prev_p;
            acc += alpha.cross(&r) + omega.cross(&omega.cross(&r));
            let z = transforms[i].rotation * self.joints[i].axis.into_inner();
            alpha += omega.cross(&(z * qdot[i]));
            omega += z * qdot[i];
            prev_p = p;
        }
        let p_ee = (transforms[n - 1] * self.tool).translation.vector;
        let r = p_ee - prev_p;
        acc += alpha.cross(&r) + omega.cross(&omega.cross(&r));
        let mut out = Vector6::zeros();
        for k in 0..3 {
            out[k] = acc[k];
            out[k + 3] = alpha[k];
        }
        out
    }
}
