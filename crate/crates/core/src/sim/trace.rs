use nalgebra::{DVector, Vector3};

use super::scenario::FixtureParams;

/// One recorded control tick.
#[derive(Debug, Clone)]
pub struct TraceRow {
    pub t: f64,
    pub q: DVector<f64>,
    pub qdot: DVector<f64>,
    pub x: Vector3<f64>,
    pub xdot: Vector3<f64>,
    pub x_d: Vector3<f64>,
    pub s: f64,
    pub sdot: f64,
    pub f_h: Vector3<f64>,
    pub f_par: f64,
    pub dev_par: Vector3<f64>,
    pub dev_orth: Vector3<f64>,
    pub f_el: Vector3<f64>,
    pub tau: DVector<f64>,
    /// Storage function value at this tick, J.
    pub storage: f64,
    /// Reference velocity (kept for the energy monitor; not exported).
    pub xdot_d: Vector3<f64>,
}

impl TraceRow {
    /// Norm of the orthogonal component of the measured force.
    pub fn orth_force_norm(&self) -> f64 {
        (self.f_h.norm_squared() - self.f_par * self.f_par).max(0.0).sqrt()
    }

    pub fn orth_dev_norm(&self) -> f64 {
        self.dev_orth.norm()
    }
}

/// Coalesced event log: first occurrence and total count per kind.
#[derive(Debug, Clone, PartialEq)]
pub struct SimEvent {
    pub kind: String,
    pub first_t: f64,
    pub count: usize,
}

/// A fault terminates the simulation early with a truncated trace.
#[derive(Debug, Clone, PartialEq)]
pub enum SimFault {
    ChannelViolation { t: f64, norm: f64, delta: f64 },
    NonFinite { t: f64, what: String },
}

impl std::fmt::Display for SimFault {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SimFault::ChannelViolation { t, norm, delta } => write!(
                f,
                "channel violation at t={t:.3}s: |dev_orth|={norm:.4} m, delta={delta:.4} m"
            ),
            SimFault::NonFinite { t, what } => {
                write!(f, "non-finite {what} at t={t:.3}s")
            }
        }
    }
}

/// Complete record of one simulated session.
#[derive(Debug, Clone)]
pub struct SimTrace {
    pub dt: f64,
    pub fixture: FixtureParams,
    /// Total arc length of the traversed path, m.
    pub path_length: f64,
    pub rows: Vec<TraceRow>,
    pub events: Vec<SimEvent>,
    pub fault: Option<SimFault>,
}

impl SimTrace {
    pub fn n_joints(&self) -> usize {
        self.rows.first().map_or(0, |r| r.q.len())
    }

    pub fn log_event(events: &mut Vec<SimEvent>, kind: String, t: f64) {
        if let Some(e) = events.iter_mut().find(|e| e.kind == kind) {
            e.count += 1;
        } else {
            events.push(SimEvent { kind, first_t: t, count: 1 });
        }
    }

    /// CSV header matching [`Self::write_csv`].
    pub fn csv_header(&self) -> String {
        let n = self.n_joints();
        let mut cols: Vec<String> = vec!["t".into()];
        let joint_block = |prefix: &str| (0..n).map(move |i| format!("{prefix}{i}")).collect::<Vec<_>>();
        cols.extend(joint_block("q"));
        cols.extend(joint_block("qd"));
        for (name, k) in [("x", 3), ("xd", 3), ("xdes", 3)] {
            cols.extend(["x", "y", "z"].iter().take(k).map(|ax| format!("{name}_{ax}")));
        }
        cols.push("s".into());
        cols.push("sdot".into());
        cols.extend(["x", "y", "z"].iter().map(|ax| format!("fh_{ax}")));
        cols.push("f_par".into());
        cols.extend(["x", "y", "z"].iter().map(|ax| format!("devpar_{ax}")));
        cols.extend(["x", "y", "z"].iter().map(|ax| format!("devorth_{ax}")));
        cols.extend(["x", "y", "z"].iter().map(|ax| format!("fel_{ax}")));
        cols.extend(joint_block("tau"));
        cols.push("storage".into());
        cols.join(",")
    }

    /// Write the trace as CSV with the fixed column order: time, joint
    /// state, task state, reference, proxy, forces, deviations, elastic
    /// force, torques, storage function.
    pub fn write_csv<W: std::io::Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "{}", self.csv_header())?;
        let mut line = String::new();
        for row in &self.rows {
            line.clear();
            push_num(&mut line, row.t);
            for v in row.q.iter().chain(row.qdot.iter()) {
                push_num(&mut line, *v);
            }
            for vec in [&row.x, &row.xdot, &row.x_d] {
                for k in 0..3 {
                    push_num(&mut line, vec[k]);
                }
            }
            push_num(&mut line, row.s);
            push_num(&mut line, row.sdot);
            for k in 0..3 {
                push_num(&mut line, row.f_h[k]);
            }
            push_num(&mut line, row.f_par);
            for vec in [&row.dev_par, &row.dev_orth, &row.f_el] {
                for k in 0..3 {
                    push_num(&mut line, vec[k]);
                }
            }
            for v in row.tau.iter() {
                push_num(&mut line, *v);
            }
            push_num(&mut line, row.storage);
            // drop the leading comma
            writeln!(w, "{}", &line[1..])?;
        }
        Ok(())
    }
}

fn push_num(line: &mut String, v: f64) {
    use std::fmt::Write;
    write!(line, ",{v}").expect("string write");
}
