use nalgebra::{DMatrix, DVector};

use crate::robot::{dyn_consistent_pinv, KinematicChain};

/// Which joint-centering objective to differentiate.
///
/// `Squared` is the standard distance-from-center objective
/// `w = (1/2n) Σ ((q_i - q̄_i)/(q_iM - q_im))²`; `Literal` is the
/// non-squared variant with a constant gradient.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CenteringForm {
    #[default]
    Squared,
    Literal,
}

/// Gradient of the joint-centering objective `w(q)`.
pub fn joint_centering_gradient(
    chain: &KinematicChain,
    q: &DVector<f64>,
    form: CenteringForm,
) -> DVector<f64> {
    let n = chain.dof() as f64;
    DVector::from_iterator(
        chain.dof(),
        chain.joints().iter().zip(q.iter()).map(|(j, &qi)| {
            let range = j.q_max - j.q_min;
            let center = 0.5 * (j.q_min + j.q_max);
            match form {
                CenteringForm::Squared => (qi - center) / (n * range * range),
                CenteringForm::Literal => 1.0 / (2.0 * n * range),
            }
        }),
    )
}

/// Null-space torque `(I - J^T Jbar^T) tau_0` with `tau_0 = -k0 ∇w(q)`.
///
/// Produces no task-space acceleration: `J M^-1 tau_r = 0`. Returns zeros
/// when the chain has no redundancy for the given task Jacobian.
pub fn nullspace_torque(
    chain: &KinematicChain,
    q: &DVector<f64>,
    mass: &DMatrix<f64>,
    jac: &DMatrix<f64>,
    k0: f64,
    form: CenteringForm,
) -> DVector<f64> {
    let n = chain.dof();
    if jac.nrows() >= n || k0 == 0.0 {
        return DVector::zeros(n);
    }
    let tau0 = -k0 * joint_centering_gradient(chain, q, form);
    let pinv = dyn_consistent_pinv(jac, mass);
    let projector = DMatrix::identity(n, n) - jac.transpose() * pinv.jbar.transpose();
    projector * tau0
}
