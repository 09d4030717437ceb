//! Path-constrained co-manipulation control stack.
//!
//! The library covers the full pipeline of a guided-exercise robot session:
//!
//! - [`spline`] — smoothing B-spline fits of demonstrated motions and
//!   arc-length parameterized path evaluation.
//! - [`robot`] — serial-manipulator kinematics and dynamics (FK, Jacobians,
//!   Newton-Euler / composite-rigid-body terms, damped-least-squares IK).
//! - [`fixture`] — the admittance guiding virtual fixture: a virtual mass
//!   riding the path, driven by the tangential component of the measured
//!   human force, plus the linear/barrier elastic force field.
//! - [`control`] — torque-level Cartesian impedance control realizing the
//!   fixture dynamics, with null-space joint centering for redundant arms.
//! - [`workspace`] — payload-index workspace maps and exhaustive
//!   trajectory-placement search.
//! - [`sim`] — a deterministic fixed-step closed-loop simulation harness
//!   with a scripted human, passivity monitoring, metrics, and sweeps.

pub mod control;
pub mod fixture;
pub mod robot;
pub mod sim;
pub mod spline;
pub mod workspace;
