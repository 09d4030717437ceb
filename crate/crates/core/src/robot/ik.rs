use nalgebra::{DMatrix, DVector};
use thiserror::Error;

use super::chain::{KinematicChain, TaskPose};

#[derive(Debug, Error)]
pub enum IkError {
    #[error("no IK solution found (position error {pos_err:.3e} m, orientation error {ori_err:.3e} rad)")]
    Unreachable { pos_err: f64, ori_err: f64 },
}

/// Damped-least-squares solver settings. `mask` selects task rows
/// (x, y, z, rx, ry, rz); disabled rows are ignored entirely.
#[derive(Debug, Clone, Copy)]
pub struct IkOptions {
    pub pos_tol: f64,
    pub ori_tol: f64,
    pub damping: f64,
    pub max_iters: usize,
    pub mask: [bool; 6],
}

impl Default for IkOptions {
    fn default() -> Self {
        Self { pos_tol: 1e-5, ori_tol: 1e-4, damping: 1e-3, max_iters: 200, mask: [true; 6] }
    }
}

impl IkOptions {
    /// Position-only task (orientation free).
    pub fn position_only() -> Self {
        Self { mask: [true, true, true, false, false, false], ..Self::default() }
    }

    /// Planar position task in the x-z plane.
    pub fn planar_xz() -> Self {
        Self { mask: [true, false, true, false, false, false], ..Self::default() }
    }
}

fn task_error(chain: &KinematicChain, q: &DVector<f64>, target: &TaskPose) -> (DVector<f64>, f64, f64) {
    let pose = chain.forward_kinematics(q);
    let dp = target.position - pose.position;
    let drot = (target.orientation * pose.orientation.inverse()).scaled_axis();
    let mut e = DVector::zeros(6);
    for k in 0..3 {
        e[k] = dp[k];
        e[k + 3] = drot[k];
    }
    (e, dp.norm(), drot.norm())
}

/// Damped-least-squares inverse kinematics from a seed configuration.
///
/// Iterates `dq = J^T (J J^T + damping^2 I)^-1 e` on the masked task rows,
/// clamping into the joint limits, until position and orientation tolerances
/// are met.
pub fn solve_ik(
    chain: &KinematicChain,
    target: &TaskPose,
    seed: &DVector<f64>,
    opts: &IkOptions,
) -> Result<DVector<f64>, IkError> {
    let n = chain.dof();
    debug_assert_eq!(seed.len(), n);
    let rows: Vec<usize> = (0..6).filter(|&r| opts.mask[r]).collect();
    let pos_rows: Vec<usize> = rows.iter().copied().filter(|&r| r < 3).collect();
    let ori_rows: Vec<usize> = rows.iter().copied().filter(|&r| r >= 3).collect();
    let k = rows.len();

    let mut q = seed.clone();
    chain.clamp_to_limits(&mut q);
    let max_step = 0.5;

    for _ in 0..opts.max_iters {
        let (e6, _, _) = task_error(chain, &q, target);
        let pos_err: f64 =
            pos_rows.iter().map(|&r| e6[r] * e6[r]).sum::<f64>().sqrt();
        let ori_err: f64 =
            ori_rows.iter().map(|&r| e6[r] * e6[r]).sum::<f64>().sqrt();
        let pos_ok = pos_rows.is_empty() || pos_err < opts.pos_tol;
        let ori_ok = ori_rows.is_empty() || ori_err < opts.ori_tol;
        if pos_ok && ori_ok {
            return Ok(q);
        }

        let jac = chain.geometric_jacobian(&q);
        let mut jm = DMatrix::zeros(k, n);
        let mut e = DVector::zeros(k);
        for (row, &r) in rows.iter().enumerate() {
            e[row] = e6[r];
            for c in 0..n {
                jm[(row, c)] = jac[(r, c)];
            }
        }
        let mut jjt = &jm * jm.transpose();
        for d in 0..k {
            jjt[(d, d)] += opts.damping * opts.damping;
        }
        let y = match jjt.cholesky() {
            Some(ch) => ch.solve(&e),
            None => return Err(IkError::Unreachable { pos_err, ori_err }),
        };
        let mut dq = jm.transpose() * y;
        let step = dq.norm();
        if step > max_step {
            dq *= max_step / step;
        }
        q += dq;
        chain.clamp_to_limits(&mut q);
    }
    let (_, pos_err, ori_err) = task_error(chain, &q, target);
    Err(IkError::Unreachable { pos_err, ori_err })
}
