use nalgebra::DMatrix;

/// Dynamically consistent generalized inverse `J# = M^-1 J^T (J M^-1 J^T)^-1`
/// together with the task-space inertia `(J M^-1 J^T)^-1`.
#[derive(Debug, Clone)]
pub struct PinvResult {
    pub jbar: DMatrix<f64>,
    /// Task-space (operational) inertia matrix.
    pub task_inertia: DMatrix<f64>,
    /// True when the task inertia was regularized because `J M^-1 J^T`
    /// was close to singular.
    pub degraded: bool,
}

/// Compute the dynamically consistent pseudoinverse of a task Jacobian.
///
/// `J` is k x n, `M` the n x n joint-space mass matrix (positive definite).
/// Near task-space singularities the inverse is damped and flagged.
pub fn dyn_consistent_pinv(j: &DMatrix<f64>, m: &DMatrix<f64>) -> PinvResult {
    let k = j.nrows();
    let minv_jt = m
        .clone()
        .cholesky()
        .expect("mass matrix must be positive definite")
        .solve(&j.transpose());
    let lambda_inv = j * &minv_jt;

    // conditioning probe: smallest vs largest diagonal of the Cholesky factor
    let mut degraded = false;
    let task_inertia = match lambda_inv.clone().cholesky() {
        Some(chol) => {
            let l = chol.l();
            let mut dmin = f64::INFINITY;
            let mut dmax: f64 = 0.0;
            for i in 0..k {
                dmin = dmin.min(l[(i, i)]);
                dmax = dmax.max(l[(i, i)]);
            }
            if dmin <= 1e-8 * dmax {
                degraded = true;
                damped_inverse(&lambda_inv, dmax)
            } else {
                chol.inverse()
            }
        }
        None => {
            degraded = true;
            let scale = lambda_inv.diagonal().amax().max(1e-9);
            damped_inverse(&lambda_inv, scale.sqrt())
        }
    };
    let jbar = &minv_jt * &task_inertia;
    PinvResult { jbar, task_inertia, degraded }
}

fn damped_inverse(lambda_inv: &DMatrix<f64>, scale: f64) -> DMatrix<f64> {
    let k = lambda_inv.nrows();
    let mut reg = lambda_inv.clone();
    let mu = (1e-6 * scale * scale).max(1e-12);
    for d in 0..k {
        reg[(d, d)] += mu;
    }
    reg.cholesky()
        .map(|c| c.inverse())
        .unwrap_or_else(|| DMatrix::identity(k, k) * (1.0 / mu))
}
