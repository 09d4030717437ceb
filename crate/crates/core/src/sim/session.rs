use nalgebra::Vector6;

use crate::control::ImpedanceController;
use crate::fixture::{reference_kinematics, step_proxy, tangential_force, ProxyState};
use crate::robot::{integrate_with_terms, RobotState};

use super::human::{human_force, HumanState};
use super::scenario::Scenario;
use super::trace::{SimEvent, SimFault, SimTrace, TraceRow};

/// Run one closed-loop session at a fixed control/physics step.
///
/// Per tick: measure the human force, project its tangential component,
/// compute the fixture references at the current proxy state, run the
/// impedance controller, then advance proxy and robot. Faults truncate the
/// trace, which stays inspectable.
pub fn simulate_session(scenario: &Scenario) -> SimTrace {
    scenario.validate().expect("scenario must validate before simulation");
    let chain = &scenario.chain;
    let path = &scenario.path;
    let mass_params = scenario.fixture.mass_params();
    let elastic = scenario.fixture.elastic_params();
    let dt = scenario.dt;
    let ticks = (scenario.duration / dt).round() as usize;

    let mut controller =
        ImpedanceController::new(scenario.gains.control_gains(elastic.clone()), dt);
    let mut robot = RobotState::at_rest(scenario.q0.clone());
    let mut proxy = ProxyState::at_start();
    let mut human = HumanState::new(scenario.seed);

    let mut rows: Vec<TraceRow> = Vec::with_capacity(ticks + 1);
    let mut events: Vec<SimEvent> = Vec::new();
    let mut fault = None;

    for k in 0..=ticks {
        let t = k as f64 * dt;

        // measured interaction force at the current state
        let kin = chain.state_kinematics(&robot);
        let x = kin.pose.position;
        let xdot = kin.linear_velocity();
        let f_h = human_force(&scenario.human, &x, &xdot, path, proxy.s, t, &mut human, dt);

        let f_par = tangential_force(path, proxy.s, &f_h);
        let refs = reference_kinematics(path, &proxy, &mass_params, f_par);

        let out = match controller.compute_with_kinematics(
            chain,
            &robot,
            &kin,
            &refs,
            &scenario.target_orientation,
        ) {
            Ok(out) => out,
            Err(violation) => {
                fault = Some(SimFault::ChannelViolation {
                    t,
                    norm: violation.norm,
                    delta: violation.delta,
                });
                break;
            }
        };
        if out.degraded {
            SimTrace::log_event(&mut events, "degraded_task_inertia".into(), t);
        }
        for &j in &out.saturated {
            SimTrace::log_event(&mut events, format!("torque_saturation_j{j}"), t);
        }

        let potential = elastic
            .elastic_potential(&out.x_tilde_par, &out.x_tilde_orth)
            .expect("guard keeps deviations inside the channel");
        let storage = 0.5 * mass_params.mass * proxy.sdot * proxy.sdot
            + 0.5 * (out.xdot_tilde.transpose() * out.m_a * out.xdot_tilde)[0]
            + potential;

        rows.push(TraceRow {
            t,
            q: robot.q.clone(),
            qdot: robot.qdot.clone(),
            x,
            xdot,
            x_d: refs.x_d,
            s: proxy.s,
            sdot: proxy.sdot,
            f_h,
            f_par,
            dev_par: out.x_tilde_par,
            dev_orth: out.x_tilde_orth,
            f_el: out.f_el,
            tau: out.tau.clone(),
            storage,
            xdot_d: refs.xdot_d,
        });

        if k == ticks {
            break;
        }

        // advance fixture and plant
        let step = step_proxy(&proxy, &mass_params, f_par, dt, path.total_length());
        if let Some(end) = step.clamped {
            SimTrace::log_event(&mut events, format!("proxy_clamp_{end:?}").to_lowercase(), t);
        }
        proxy = step.state;

        let mut wrench = Vector6::zeros();
        for i in 0..3 {
            wrench[i] = f_h[i];
        }
        match integrate_with_terms(chain, &robot, &out.terms, &kin.jac, &out.tau, &wrench, dt) {
            Ok(outcome) => {
                for &j in &outcome.clamped {
                    SimTrace::log_event(&mut events, format!("joint_limit_j{j}"), t);
                }
                robot = outcome.state;
            }
            Err(e) => {
                fault = Some(SimFault::NonFinite { t, what: e.to_string() });
                break;
            }
        }
        if robot.q.iter().chain(robot.qdot.iter()).any(|v| !v.is_finite()) {
            fault = Some(SimFault::NonFinite { t, what: "robot state".into() });
            break;
        }
    }

    SimTrace {
        dt,
        fixture: scenario.fixture.clone(),
        path_length: path.total_length(),
        rows,
        events,
        fault,
    }
}
