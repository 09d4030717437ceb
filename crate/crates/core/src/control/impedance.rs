use nalgebra::{DMatrix, DVector, Matrix3, UnitQuaternion, Vector3};

use crate::fixture::{ChannelViolation, ElasticParams, TaskRefs};
use crate::robot::{
    joint_space_dynamics, DynTerms, KinematicChain, RobotState, StateKinematics,
};

use super::{joint_centering_gradient, CenteringForm};

/// Gains of the full controller: the elastic field, the null-space
/// centering gain, and the decoupled orientation PD.
#[derive(Debug, Clone)]
pub struct ControlGains {
    pub elastic: ElasticParams,
    /// Null-space joint-centering gain (>= 0).
    pub k0: f64,
    /// Null-space velocity damping (>= 0). Without it the self-motion of a
    /// redundant arm is undamped and drifts into the joint limits.
    pub nullspace_damping: f64,
    pub orientation_stiffness: f64,
    pub orientation_damping: f64,
    pub centering_form: CenteringForm,
}

impl ControlGains {
    pub fn new(elastic: ElasticParams, k0: f64) -> Self {
        assert!(k0 >= 0.0);
        Self {
            elastic,
            k0,
            nullspace_damping: 4.0,
            orientation_stiffness: 50.0,
            orientation_damping: 5.0,
            centering_form: CenteringForm::Squared,
        }
    }
}

/// Everything one control tick produces, for logging and monitoring.
#[derive(Debug, Clone)]
pub struct ControlOutput {
    pub tau: DVector<f64>,
    /// Translational task-space inertia used this tick.
    pub m_a: Matrix3<f64>,
    pub x: Vector3<f64>,
    pub xdot: Vector3<f64>,
    pub x_tilde_par: Vector3<f64>,
    pub x_tilde_orth: Vector3<f64>,
    pub xdot_tilde: Vector3<f64>,
    pub f_el: Vector3<f64>,
    /// Task inertia was regularized near a singularity.
    pub degraded: bool,
    /// Joints whose torque hit the actuator limit this tick.
    pub saturated: Vec<usize>,
    /// Joint-space dynamics terms of this tick, reusable by the integrator.
    pub terms: DynTerms,
}

/// Cartesian impedance controller with one tick of memory for the
/// finite-difference `Mdot_A`.
#[derive(Debug, Clone)]
pub struct ImpedanceController {
    pub gains: ControlGains,
    /// Fraction of the channel radius treated as a hard fault.
    pub guard_fraction: f64,
    dt: f64,
    prev_m_a: Option<Matrix3<f64>>,
}

impl ImpedanceController {
    pub fn new(gains: ControlGains, dt: f64) -> Self {
        assert!(dt > 0.0);
        Self { gains, guard_fraction: 0.999, dt, prev_m_a: None }
    }

    pub fn reset(&mut self) {
        self.prev_m_a = None;
    }

    /// Convenience wrapper computing the state kinematics internally.
    pub fn compute(
        &mut self,
        chain: &KinematicChain,
        state: &RobotState,
        refs: &TaskRefs,
        target_orientation: &UnitQuaternion<f64>,
    ) -> Result<ControlOutput, ChannelViolation> {
        let kin = chain.state_kinematics(state);
        self.compute_with_kinematics(chain, state, &kin, refs, target_orientation)
    }

    /// One control tick.
    ///
    /// `refs` are the fixture reference kinematics (with the path tangent at
    /// the proxy position) and `target_orientation` the constant demonstrated
    /// orientation. The returned torque realizes the translational impedance
    /// `M_A x̃̈ + (K_D + C_A) x̃̇ + F_el(x̃) = F_h` when applied to the same
    /// model the terms were computed from; the measured human force enters
    /// the loop physically, not through the control law.
    pub fn compute_with_kinematics(
        &mut self,
        chain: &KinematicChain,
        state: &RobotState,
        kin: &StateKinematics,
        refs: &TaskRefs,
        target_orientation: &UnitQuaternion<f64>,
    ) -> Result<ControlOutput, ChannelViolation> {
        let n = chain.dof();
        let terms = joint_space_dynamics(chain, state);
        let x = kin.pose.position;
        let xdot = kin.linear_velocity();
        let omega = kin.angular_velocity();

        // deviation split at the proxy's path point
        let x_tilde = x - refs.x_d;
        let xdot_tilde = xdot - refs.xdot_d;
        let par = refs.tangent * refs.tangent.dot(&x_tilde);
        let orth = x_tilde - par;

        let guard = self.guard_fraction * self.gains.elastic.delta;
        if orth.norm() >= guard {
            return Err(ChannelViolation { norm: orth.norm(), delta: self.gains.elastic.delta });
        }
        let f_el = self.gains.elastic.elastic_force(&par, &orth)?;

        // one factorization of M for everything task-space
        let mass_chol = terms
            .mass
            .clone()
            .cholesky()
            .expect("mass matrix positive definite");
        let minv_jt = mass_chol.solve(&kin.jac.transpose()); // n x 6
        let lambda6_inv = &kin.jac * &minv_jt; // 6 x 6

        // translational task inertia (top-left block) and its FD rate
        let lambda_v_inv = Matrix3::from_fn(|r, c| lambda6_inv[(r, c)]);
        let (m_a, mut degraded) = invert_spd3(&lambda_v_inv);
        let c_a = match self.prev_m_a {
            Some(prev) => (m_a - prev) / (2.0 * self.dt),
            None => Matrix3::zeros(),
        };
        self.prev_m_a = Some(m_a);

        // desired translational acceleration:
        // xddot_d + M_A^-1 (-(K_D + C_A) x̃̇ - F_el)
        let feedback = -(self.gains.elastic.k_d + c_a) * xdot_tilde - f_el;
        let a_v = refs.xddot_d + lambda_v_inv * feedback;

        // decoupled orientation PD at acceleration level
        let e_rot = (target_orientation * kin.pose.orientation.inverse()).scaled_axis();
        let a_w = self.gains.orientation_stiffness * e_rot - self.gains.orientation_damping * omega;

        let mut a6 = DVector::zeros(6);
        for k in 0..3 {
            a6[k] = a_v[k];
            a6[k + 3] = a_w[k];
        }
        a6 -= DVector::from_iterator(6, chain.jdot_qdot(&state.q, &state.qdot).iter().copied());

        // dynamically consistent inverse from the shared factorization
        let (lambda6, pinv_degraded) = invert_spd_dyn(&lambda6_inv);
        degraded |= pinv_degraded;
        let jbar = &minv_jt * &lambda6; // n x 6
        let y = &jbar * a6;

        let mut tau = &terms.mass * y + &terms.coriolis_qdot + &terms.gravity;
        if n > 6 && self.gains.k0 > 0.0 {
            let tau0 = -self.gains.k0
                * joint_centering_gradient(chain, &state.q, self.gains.centering_form);
            let projected = &tau0 - kin.jac.transpose() * (jbar.transpose() * &tau0);
            tau += projected;
        }

        let mut saturated = Vec::new();
        for (i, joint) in chain.joints().iter().enumerate() {
            if tau[i].abs() > joint.tau_lim {
                tau[i] = tau[i].signum() * joint.tau_lim;
                saturated.push(i);
            }
        }

        Ok(ControlOutput {
            tau,
            m_a,
            x,
            xdot,
            x_tilde_par: par,
            x_tilde_orth: orth,
            xdot_tilde,
            f_el,
            degraded,
            saturated,
            terms,
        })
    }
}

/// Invert a symmetric positive definite 3x3 matrix, regularizing (and
/// flagging) when it is close to singular.
fn invert_spd3(a: &Matrix3<f64>) -> (Matrix3<f64>, bool) {
    if let Some(chol) = a.cholesky() {
        let l = chol.l();
        let (mut dmin, mut dmax) = (f64::INFINITY, 0.0_f64);
        for i in 0..3 {
            dmin = dmin.min(l[(i, i)]);
            dmax = dmax.max(l[(i, i)]);
        }
        if dmin > 1e-8 * dmax {
            return (chol.inverse(), false);
        }
    }
    let mu = 1e-6 * a.trace().abs().max(1e-9);
    let reg = a + Matrix3::identity() * mu;
    (reg.cholesky().map(|c| c.inverse()).unwrap_or_else(Matrix3::identity), true)
}

/// Same regularized inversion for the dynamic-size task inertia.
fn invert_spd_dyn(a: &DMatrix<f64>) -> (DMatrix<f64>, bool) {
    let k = a.nrows();
    if let Some(chol) = a.clone().cholesky() {
        let l = chol.l();
        let (mut dmin, mut dmax) = (f64::INFINITY, 0.0_f64);
        for i in 0..k {
            dmin = dmin.min(l[(i, i)]);
            dmax = dmax.max(l[(i, i)]);
        }
        if dmin > 1e-8 * dmax {
            return (chol.inverse(), false);
        }
    }
    let mu = 1e-6 * a.trace().abs().max(1e-9);
    let mut reg = a.clone();
    for d in 0..k {
        reg[(d, d)] += mu;
    }
    (
        reg.cholesky().map(|c| c.inverse()).unwrap_or_else(|| DMatrix::identity(k, k)),
        true,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixture::{ProxyState, VirtualMassParams};
    use crate::robot::{gravity_torque, presets};
    use crate::spline::{BSplineCurve, PathCurve};
    use approx::assert_relative_eq;

    fn straight_path_through(p0: Vector3<f64>, dir: Vector3<f64>, len: f64) -> PathCurve {
        let curve = BSplineCurve::new(
            1,
            vec![0.0, 0.0, 1.0, 1.0],
            vec![p0, p0 + dir.normalize() * len],
        )
        .unwrap();
        PathCurve::with_default_table(curve).unwrap()
    }

    fn default_gains() -> ControlGains {
        ControlGains::new(
            ElasticParams::with_diagonal_damping(2500.0, 500.0, 0.02, [40.0; 3]),
            8.0,
        )
    }

    #[test]
    fn equilibrium_yields_pure_gravity_compensation() {
        let chain = presets::panda_7dof();
        let q0 = presets::panda_home();
        let state = RobotState::at_rest(q0.clone());
        let pose = chain.forward_kinematics(&q0);
        let path = straight_path_through(pose.position, Vector3::x(), 0.5);
        let refs = crate::fixture::reference_kinematics(
            &path,
            &ProxyState::at_start(),
            &VirtualMassParams::new(5.0, 15.0, 0.0),
            0.0,
        );
        let mut ctl = ImpedanceController::new(
            ControlGains { k0: 0.0, ..default_gains() },
            1e-3,
        );
        let out = ctl.compute(&chain, &state, &refs, &pose.orientation).unwrap();
        let g = gravity_torque(&chain, &q0);
        assert!(
            (out.tau - g).norm() < 1e-8,
            "expected pure gravity compensation"
        );
        assert!(out.saturated.is_empty());
        assert!(!out.degraded);
    }

    #[test]
    fn channel_guard_trips_before_the_radius() {
        let chain = presets::panda_7dof();
        let q0 = presets::panda_home();
        let state = RobotState::at_rest(q0.clone());
        let pose = chain.forward_kinematics(&q0);
        // path displaced sideways so the deviation is orthogonal and large
        let p0 = pose.position + Vector3::new(0.0, 0.0201, 0.0);
        let path = straight_path_through(p0, Vector3::x(), 0.5);
        let refs = crate::fixture::reference_kinematics(
            &path,
            &ProxyState::at_start(),
            &VirtualMassParams::new(5.0, 15.0, 0.0),
            0.0,
        );
        let mut ctl = ImpedanceController::new(default_gains(), 1e-3);
        assert!(ctl.compute(&chain, &state, &refs, &pose.orientation).is_err());
    }

    #[test]
    fn torque_saturation_is_reported_and_clamped() {
        let chain = presets::panda_7dof();
        let q0 = presets::panda_home();
        let state = RobotState::at_rest(q0.clone());
        let pose = chain.forward_kinematics(&q0);
        // large tangential error with a stiff spring forces saturation
        let p0 = pose.position - Vector3::new(0.4, 0.0, 0.0);
        let path = straight_path_through(p0, Vector3::x(), 1.0);
        let refs = crate::fixture::reference_kinematics(
            &path,
            &ProxyState::at_start(),
            &VirtualMassParams::new(5.0, 15.0, 0.0),
            0.0,
        );
        let mut gains = default_gains();
        gains.elastic = ElasticParams::with_diagonal_damping(80_000.0, 500.0, 0.02, [40.0; 3]);
        let mut ctl = ImpedanceController::new(gains, 1e-3);
        let out = ctl.compute(&chain, &state, &refs, &pose.orientation).unwrap();
        assert!(!out.saturated.is_empty());
        for (i, joint) in chain.joints().iter().enumerate() {
            assert!(out.tau[i].abs() <= joint.tau_lim + 1e-12);
        }
    }

    #[test]
    fn closed_loop_realizes_target_translational_acceleration() {
        // applying the computed torque to the same model must reproduce
        // the impedance equation's acceleration at this instant
        let chain = presets::panda_7dof();
        let q0 = presets::panda_home();
        let qd0 = DVector::from_vec(vec![0.05, -0.03, 0.04, 0.02, -0.05, 0.03, 0.01]);
        let state = RobotState::new(q0.clone(), qd0);
        let pose = chain.forward_kinematics(&q0);
        let path = straight_path_through(
            pose.position - Vector3::new(0.003, 0.004, 0.0),
            Vector3::x(),
            0.5,
        );
        let mass_params = VirtualMassParams::new(5.0, 15.0, 0.0);
        let proxy = ProxyState { s: 0.002, sdot: 0.01 };
        let refs = crate::fixture::reference_kinematics(&path, &proxy, &mass_params, 0.3);

        let mut ctl = ImpedanceController::new(default_gains(), 1e-3);
        let f_h = Vector3::new(1.0, -2.0, 0.5);
        let out = ctl.compute(&chain, &state, &refs, &pose.orientation).unwrap();

        // plant response
        let jac = chain.geometric_jacobian(&state.q);
        let mut wrench = DVector::zeros(6);
        for k in 0..3 {
            wrench[k] = f_h[k];
        }
        let rhs = &out.tau + jac.transpose() * wrench
            - &out.terms.coriolis_qdot
            - &out.terms.gravity;
        let qddot = out.terms.mass.clone().cholesky().unwrap().solve(&rhs);
        let jdqd = chain.jdot_qdot(&state.q, &state.qdot);
        let xddot = (&jac * qddot + DVector::from_iterator(6, jdqd.iter().copied()))
            .rows(0, 3)
            .into_owned();

        // impedance equation prediction: x̃̈ = M_A^-1 (F_h - K_D x̃̇ - F_el)
        let lambda_inv = out.m_a.try_inverse().unwrap();
        let target = refs.xddot_d
            + lambda_inv
                * (f_h - default_gains().elastic.k_d * out.xdot_tilde - out.f_el);
        for k in 0..3 {
            assert_relative_eq!(xddot[k], target[k], epsilon = 1e-6, max_relative = 1e-6);
        }
    }

    #[test]
    fn null_space_addition_keeps_task_acceleration() {
        // same state, controller with and without k0: identical ee accel
        let chain = presets::panda_7dof();
        let q0 = presets::panda_home();
        let state = RobotState::new(
            q0.clone(),
            DVector::from_vec(vec![0.02, -0.01, 0.03, 0.01, -0.02, 0.02, 0.01]),
        );
        let pose = chain.forward_kinematics(&q0);
        let path = straight_path_through(pose.position, Vector3::x(), 0.5);
        let refs = crate::fixture::reference_kinematics(
            &path,
            &ProxyState::at_start(),
            &VirtualMassParams::new(5.0, 15.0, 0.0),
            0.0,
        );
        let accel_of = |k0: f64| {
            let mut ctl =
                ImpedanceController::new(ControlGains { k0, ..default_gains() }, 1e-3);
            let out = ctl.compute(&chain, &state, &refs, &pose.orientation).unwrap();
            let rhs = &out.tau - &out.terms.coriolis_qdot - &out.terms.gravity;
            let qdd = out.terms.mass.clone().cholesky().unwrap().solve(&rhs);
            let jac = chain.geometric_jacobian(&state.q);
            let jdqd = chain.jdot_qdot(&state.q, &state.qdot);
            (&jac * qdd + DVector::from_iterator(6, jdqd.iter().copied()))
                .rows(0, 3)
                .into_owned()
        };
        let a0 = accel_of(0.0);
        let a1 = accel_of(30.0);
        assert!((a0 - a1).norm() < 1e-8, "null-space torque leaked into the task");
    }
}
