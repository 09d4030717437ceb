use nalgebra::Vector3;

use crate::spline::PathCurve;

/// Arc-length state of the virtual mass constrained to the path.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProxyState {
    /// Position along the path, m. Always within `[0, total_length]`.
    pub s: f64,
    /// Path velocity, m/s.
    pub sdot: f64,
}

impl ProxyState {
    pub fn at_start() -> Self {
        Self { s: 0.0, sdot: 0.0 }
    }
}

/// Virtual mass dynamics `m s̈ + b ṡ = F∥ + F_virtual`.
#[derive(Debug, Clone, Copy)]
pub struct VirtualMassParams {
    /// Virtual mass, kg (> 0).
    pub mass: f64,
    /// Viscous damping, N·s/m (> 0, required for passivity).
    pub damping: f64,
    /// Constant assist (> 0) or resist (< 0) force along the tangent, N.
    pub virtual_force: f64,
}

impl VirtualMassParams {
    pub fn new(mass: f64, damping: f64, virtual_force: f64) -> Self {
        assert!(mass > 0.0 && damping > 0.0, "virtual mass and damping must be positive");
        Self { mass, damping, virtual_force }
    }
}

/// Which end of the path the proxy was clamped against.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PathEnd {
    Start,
    End,
}

/// Result of one proxy step.
#[derive(Debug, Clone, Copy)]
pub struct ProxyStep {
    pub state: ProxyState,
    /// The acceleration applied this step (zero while held at an endpoint).
    pub accel: f64,
    pub clamped: Option<PathEnd>,
}

/// Tangential component of a force at path position `s`.
pub fn tangential_force(path: &PathCurve, s: f64, force: &Vector3<f64>) -> f64 {
    path.eval_by_arclength(s).expect("s within path domain").tangent.dot(force)
}

/// Proxy acceleration `(F∥ + F_virtual - b ṡ) / m`, with the endpoint
/// constraint active: at a path end with the net drive pushing outward the
/// mass stays put (inelastic stop).
pub fn proxy_accel(
    state: &ProxyState,
    params: &VirtualMassParams,
    f_par: f64,
    total_length: f64,
) -> f64 {
    let drive = f_par + params.virtual_force - params.damping * state.sdot;
    let accel = drive / params.mass;
    let at_start = state.s <= 0.0 && state.sdot <= 0.0 && accel < 0.0;
    let at_end = state.s >= total_length && state.sdot >= 0.0 && accel > 0.0;
    if at_start || at_end {
        0.0
    } else {
        accel
    }
}

/// Semi-implicit Euler step of the proxy with endpoint clamping: leaving
/// `[0, l]` stops the mass dead (kinetic energy is removed, never added).
pub fn step_proxy(
    state: &ProxyState,
    params: &VirtualMassParams,
    f_par: f64,
    dt: f64,
    total_length: f64,
) -> ProxyStep {
    debug_assert!(dt > 0.0);
    let accel = proxy_accel(state, params, f_par, total_length);
    let mut sdot = state.sdot + accel * dt;
    let mut s = state.s + sdot * dt;
    let mut clamped = None;
    if s < 0.0 {
        s = 0.0;
        sdot = 0.0;
        clamped = Some(PathEnd::Start);
    } else if s > total_length {
        s = total_length;
        sdot = 0.0;
        clamped = Some(PathEnd::End);
    }
    ProxyStep { state: ProxyState { s, sdot }, accel, clamped }
}

/// Reference position, velocity, acceleration and the path tangent for the
/// impedance controller, all at the proxy state before stepping.
#[derive(Debug, Clone, Copy)]
pub struct TaskRefs {
    pub x_d: Vector3<f64>,
    pub xdot_d: Vector3<f64>,
    pub xddot_d: Vector3<f64>,
    pub tangent: Vector3<f64>,
}

/// Reference kinematics via the chain rule:
/// `ẋ_d = φ'(s) ṡ`, `ẍ_d = φ''(s) ṡ² + φ'(s) s̈`, with the same `s̈` that
/// `step_proxy` applies for these inputs.
pub fn reference_kinematics(
    path: &PathCurve,
    state: &ProxyState,
    params: &VirtualMassParams,
    f_par: f64,
) -> TaskRefs {
    let p = path.eval_by_arclength(state.s).expect("s within path domain");
    let accel = proxy_accel(state, params, f_par, path.total_length());
    TaskRefs {
        x_d: p.position,
        xdot_d: p.tangent * state.sdot,
        xddot_d: p.second * (state.sdot * state.sdot) + p.tangent * accel,
        tangent: p.tangent,
    }
}

/// Split a deviation into its tangential and orthogonal parts at path
/// position `s`: `par = φ'φ'^T x̃`, `orth = (I - φ'φ'^T) x̃`.
pub fn decompose_deviation(
    path: &PathCurve,
    s: f64,
    x_tilde: &Vector3<f64>,
) -> (Vector3<f64>, Vector3<f64>) {
    let tangent = path.eval_by_arclength(s).expect("s within path domain").tangent;
    let par = tangent * tangent.dot(x_tilde);
    (par, x_tilde - par)
}
