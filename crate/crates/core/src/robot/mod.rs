//! Serial-manipulator kinematics and dynamics.
//!
//! Chains are built from revolute joints, each a fixed transform followed by
//! a rotation about an axis expressed in the child frame. Dynamics terms come
//! from recursive Newton-Euler (bias and gravity vectors) and the composite
//! rigid body algorithm (mass matrix).

mod chain;
mod dynamics;
mod ik;
mod pinv;
pub mod presets;
pub mod schema;

pub use chain::{Joint, KinematicChain, Link, RobotState, StateKinematics, TaskPose};
pub use dynamics::{
    coriolis_matrix, gravity_torque, integrate_dynamics, integrate_with_terms,
    joint_space_dynamics, kinetic_energy,
    mass_matrix, potential_energy, rnea, DynTerms, StepOutcome,
};
pub use ik::{solve_ik, IkError, IkOptions};
pub use pinv::{dyn_consistent_pinv, PinvResult};
pub use schema::{chain_from_json, chain_to_json, SCHEMA_VERSION};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum RobotError {
    #[error("invalid chain: {0}")]
    InvalidChain(String),
    #[error("state dimension {got} does not match chain dimension {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("non-finite {quantity} encountered during integration")]
    NonFinite { quantity: &'static str },
    #[error("robot description: {0}")]
    Schema(String),
}
