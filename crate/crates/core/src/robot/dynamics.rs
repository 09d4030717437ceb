use nalgebra::{DMatrix, DVector, Matrix3, Vector3, Vector6};

use super::chain::{KinematicChain, RobotState};
use super::RobotError;

/// Joint-space dynamics terms: `M(q) qdd + C(q,qd) qd + g(q) = tau + J^T F`.
#[derive(Debug, Clone)]
pub struct DynTerms {
    pub mass: DMatrix<f64>,
    /// Coriolis/centrifugal torque vector `C(q, qd) qd`.
    pub coriolis_qdot: DVector<f64>,
    pub gravity: DVector<f64>,
}

/// Recursive Newton-Euler inverse dynamics:
/// `tau = M(q) qdd + C(q,qd) qd + g(q)` for the supplied gravity vector.
pub fn rnea(
    chain: &KinematicChain,
    q: &DVector<f64>,
    qdot: &DVector<f64>,
    qddot: &DVector<f64>,
    gravity: &Vector3<f64>,
) -> DVector<f64> {
    let n = chain.dof();
    let joints = chain.joints();
    let links = chain.links();

    // local rotations (parent -> child is rot_to_parent^T) and joint offsets
    let mut rot_to_parent = Vec::with_capacity(n);
    let mut offset = Vec::with_capacity(n);
    for (joint, &qi) in joints.iter().zip(q.iter()) {
        let rot = joint.origin.rotation
            * nalgebra::UnitQuaternion::from_axis_angle(&joint.axis, qi);
        rot_to_parent.push(rot.to_rotation_matrix().into_inner());
        offset.push(joint.origin.translation.vector);
    }

    let mut omega = vec![Vector3::zeros(); n];
    let mut alpha = vec![Vector3::zeros(); n];
    let mut acc = vec![Vector3::zeros(); n];

    let mut omega_prev = Vector3::zeros();
    let mut alpha_prev = Vector3::zeros();
    let mut acc_prev = -gravity;
    for i in 0..n {
        let rt = rot_to_parent[i].transpose();
        let axis = joints[i].axis.into_inner();
        let w_in = rt * omega_prev;
        omega[i] = w_in + axis * qdot[i];
        alpha[i] = rt * alpha_prev + w_in.cross(&(axis * qdot[i])) + axis * qddot[i];
        acc[i] = rt
            * (acc_prev
                + alpha_prev.cross(&offset[i])
                + omega_prev.cross(&omega_prev.cross(&offset[i])));
        omega_prev = omega[i];
        alpha_prev = alpha[i];
        acc_prev = acc[i];
    }

    let mut tau = DVector::zeros(n);
    let mut f_child = Vector3::zeros();
    let mut n_child = Vector3::zeros();
    for i in (0..n).rev() {
        let link = &links[i];
        let a_com = acc[i] + alpha[i].cross(&link.com) + omega[i].cross(&omega[i].cross(&link.com));
        let force = link.mass * a_com;
        let moment =
            link.inertia * alpha[i] + omega[i].cross(&(link.inertia * omega[i]));

        let (f_from_child, n_from_child) = if i + 1 < n {
            let f = rot_to_parent[i + 1] * f_child;
            let nn = rot_to_parent[i + 1] * n_child + offset[i + 1].cross(&f);
            (f, nn)
        } else {
            (Vector3::zeros(), Vector3::zeros())
        };

        let f_total = force + f_from_child;
        let n_total = moment + link.com.cross(&force) + n_from_child;
        tau[i] = joints[i].axis.dot(&n_total);
        f_child = f_total;
        n_child = n_total;
    }
    tau
}

/// Mass matrix by the composite-rigid-body algorithm (world-frame form).
pub fn mass_matrix(chain: &KinematicChain, q: &DVector<f64>) -> DMatrix<f64> {
    let n = chain.dof();
    let transforms = chain.link_transforms(q);
    let links = chain.links();

    let mut axis_w = Vec::with_capacity(n);
    let mut origin_w = Vec::with_capacity(n);
    let mut com_w = Vec::with_capacity(n);
    let mut inertia_w = Vec::with_capacity(n);
    for i in 0..n {
        let rot = transforms[i].rotation.to_rotation_matrix().into_inner();
        axis_w.push(transforms[i].rotation * chain.joints()[i].axis.into_inner());
        origin_w.push(transforms[i].translation.vector);
        com_w.push(transforms[i] * nalgebra::Point3::from(links[i].com));
        inertia_w.push(rot * links[i].inertia * rot.transpose());
    }

    // composite mass / COM / inertia-about-COM of links i..n
    let mut comp_mass = vec![0.0; n];
    let mut comp_com: Vec<Vector3<f64>> = vec![Vector3::zeros(); n];
    let mut comp_inertia: Vec<Matrix3<f64>> = vec![Matrix3::zeros(); n];
    for i in (0..n).rev() {
        let (mut m, mut c, mut ic) =
            (links[i].mass, com_w[i].coords, inertia_w[i]);
        if i + 1 < n {
            let m2 = comp_mass[i + 1];
            let c2 = comp_com[i + 1];
            let total = m + m2;
            let c_new = if total > 0.0 { (m * c + m2 * c2) / total } else { c };
            let shift = |inertia: Matrix3<f64>, mass: f64, d: Vector3<f64>| {
                inertia + mass * (d.norm_squared() * Matrix3::identity() - d * d.transpose())
            };
            ic = shift(ic, m, c - c_new) + shift(comp_inertia[i + 1], m2, c2 - c_new);
            m = total;
            c = c_new;
        }
        comp_mass[i] = m;
        comp_com[i] = c;
        comp_inertia[i] = ic;
    }

    let mut mm = DMatrix::zeros(n, n);
    for i in 0..n {
        // spatial force when joint i accelerates at unit rate
        let r = comp_com[i] - origin_w[i];
        let f = comp_mass[i] * axis_w[i].cross(&r);
        let n_oi = comp_inertia[i] * axis_w[i] + r.cross(&f);
        mm[(i, i)] = axis_w[i].dot(&n_oi);
        for j in 0..i {
            let n_oj = n_oi + (origin_w[i] - origin_w[j]).cross(&f);
            let mji = axis_w[j].dot(&n_oj);
            mm[(j, i)] = mji;
            mm[(i, j)] = mji;
        }
    }
    mm
}

/// Full dynamics terms for a state: mass matrix (CRBA), Coriolis vector and
/// gravity vector (both via Newton-Euler passes).
pub fn joint_space_dynamics(chain: &KinematicChain, state: &RobotState) -> DynTerms {
    let zero = DVector::zeros(chain.dof());
    let gravity = rnea(chain, &state.q, &zero, &zero, &chain.gravity);
    let no_gravity = Vector3::zeros();
    let coriolis = rnea(chain, &state.q, &state.qdot, &zero, &no_gravity);
    DynTerms { mass: mass_matrix(chain, &state.q), coriolis_qdot: coriolis, gravity }
}

/// Gravity torque vector alone.
pub fn gravity_torque(chain: &KinematicChain, q: &DVector<f64>) -> DVector<f64> {
    let zero = DVector::zeros(chain.dof());
    rnea(chain, q, &zero, &zero, &chain.gravity)
}

/// Coriolis matrix from Christoffel symbols of the first kind, with
/// `∂M/∂q_k` by central differences. This factorization makes
/// `Mdot - 2C` skew-symmetric.
pub fn coriolis_matrix(
    chain: &KinematicChain,
    q: &DVector<f64>,
    qdot: &DVector<f64>,
) -> DMatrix<f64> {
    let n = chain.dof();
    let h = 1e-6;
    let mut dm = Vec::with_capacity(n);
    for k in 0..n {
        let mut qp = q.clone();
        let mut qm = q.clone();
        qp[k] += h;
        qm[k] -= h;
        dm.push((mass_matrix(chain, &qp) - mass_matrix(chain, &qm)) / (2.0 * h));
    }
    let mut c = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let mut acc = 0.0;
            for k in 0..n {
                acc += 0.5 * (dm[k][(i, j)] + dm[j][(i, k)] - dm[i][(j, k)]) * qdot[k];
            }
            c[(i, j)] = acc;
        }
    }
    c
}

/// Total kinetic energy `0.5 qd^T M qd`.
pub fn kinetic_energy(chain: &KinematicChain, state: &RobotState) -> f64 {
    let m = mass_matrix(chain, &state.q);
    0.5 * state.qdot.dot(&(&m * &state.qdot))
}

/// Gravitational potential energy; `gravity_torque` is its gradient.
pub fn potential_energy(chain: &KinematicChain, q: &DVector<f64>) -> f64 {
    let transforms = chain.link_transforms(q);
    let mut v = 0.0;
    for (t, link) in transforms.iter().zip(chain.links()) {
        let com_w = t * nalgebra::Point3::from(link.com);
        v -= link.mass * chain.gravity.dot(&com_w.coords);
    }
    v
}

/// Result of one integration step.
#[derive(Debug, Clone)]
pub struct StepOutcome {
    pub state: RobotState,
    /// Joints clamped at a position limit this step (velocity zeroed).
    pub clamped: Vec<usize>,
}

/// Semi-implicit Euler step of the forward dynamics under an actuator torque
/// and an external end-effector wrench (linear force, then moment).
pub fn integrate_dynamics(
    chain: &KinematicChain,
    state: &RobotState,
    tau: &DVector<f64>,
    wrench: &Vector6<f64>,
    dt: f64,
) -> Result<StepOutcome, RobotError> {
    chain.check_dim(&state.q)?;
    let terms = joint_space_dynamics(chain, state);
    let jac = chain.geometric_jacobian(&state.q);
    integrate_with_terms(chain, state, &terms, &jac, tau, wrench, dt)
}

/// Integration step reusing dynamics terms and the Jacobian already computed
/// for this state (they must match `state`).
pub fn integrate_with_terms(
    chain: &KinematicChain,
    state: &RobotState,
    terms: &DynTerms,
    jac: &DMatrix<f64>,
    tau: &DVector<f64>,
    wrench: &Vector6<f64>,
    dt: f64,
) -> Result<StepOutcome, RobotError> {
    let external = jac.transpose() * DVector::from_iterator(6, wrench.iter().copied());
    let rhs = tau + external - &terms.coriolis_qdot - &terms.gravity;
    let qddot = terms
        .mass
        .clone()
        .cholesky()
        .ok_or(RobotError::NonFinite { quantity: "mass matrix" })?
        .solve(&rhs);
    if qddot.iter().any(|a| !a.is_finite()) {
        return Err(RobotError::NonFinite { quantity: "joint acceleration" });
    }
    let mut qdot = &state.qdot + &qddot * dt;
    let mut q = &state.q + &qdot * dt;
    let mut clamped = Vec::new();
    for (i, joint) in chain.joints().iter().enumerate() {
        if q[i] < joint.q_min {
            q[i] = joint.q_min;
            qdot[i] = 0.0;
            clamped.push(i);
        } else if q[i] > joint.q_max {
            q[i] = joint.q_max;
            qdot[i] = 0.0;
            clamped.push(i);
        }
    }
    Ok(StepOutcome { state: RobotState::new(q, qdot), clamped })
}
