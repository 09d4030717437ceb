//! Torque-level Cartesian impedance control.
//!
//! The controller shapes the end-effector so deviations from the fixture
//! reference obey `M_A x̃̈ + (K_D + C_A) x̃̇ + F_el(x̃) = F_h`, where `M_A` is
//! the task-space inertia of the arm, `C_A = Mdot_A / 2`, and `F_el` is the
//! tangential/barrier elastic field. Orientation is regulated separately by
//! a PD toward the constant demonstrated orientation, and a null-space
//! torque keeps redundant joints near their range centers.

mod impedance;
mod nullspace;

pub use impedance::{ControlGains, ControlOutput, ImpedanceController};
pub use nullspace::{joint_centering_gradient, nullspace_torque, CenteringForm};
