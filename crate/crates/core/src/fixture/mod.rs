//! Admittance guiding virtual fixture.
//!
//! A virtual point mass rides the path; the tangential component of the
//! measured human force drives it, and the robot tracks its position. The
//! elastic field is linear along the tangent and a barrier in the normal
//! plane, so deviations can never reach the channel radius.

mod elastic;
mod proxy;

pub use elastic::{ChannelViolation, ElasticParams};
pub use proxy::{
    decompose_deviation, proxy_accel, reference_kinematics, step_proxy, tangential_force,
    PathEnd, ProxyState, ProxyStep, TaskRefs, VirtualMassParams,
};
