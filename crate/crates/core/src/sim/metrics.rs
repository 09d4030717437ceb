use serde::Serialize;

use super::trace::SimTrace;

/// Summary statistics of a per-tick scalar.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Distribution {
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
    pub mean: f64,
}

impl Distribution {
    fn from_values(values: &[f64]) -> Self {
        if values.is_empty() {
            return Self { min: 0.0, q1: 0.0, median: 0.0, q3: 0.0, max: 0.0, mean: 0.0 };
        }
        let mut sorted = values.to_vec();
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let quantile = |p: f64| -> f64 {
            let idx = p * (sorted.len() - 1) as f64;
            let lo = idx.floor() as usize;
            let hi = idx.ceil() as usize;
            let frac = idx - lo as f64;
            sorted[lo] * (1.0 - frac) + sorted[hi] * frac
        };
        Self {
            min: sorted[0],
            q1: quantile(0.25),
            median: quantile(0.5),
            q3: quantile(0.75),
            max: *sorted.last().unwrap(),
            mean: values.iter().sum::<f64>() / values.len() as f64,
        }
    }
}

/// Per-run metrics over the active segment of a trace (up to completion when
/// the path end is reached, else the whole trace).
#[derive(Debug, Clone, Serialize)]
pub struct Metrics {
    /// `||x̃⊥||` statistics, m.
    pub orth_dev: Distribution,
    /// `||F⊥||` statistics (orthogonal component of the measured force), N.
    pub orth_force: Distribution,
    /// Peak `||F⊥||`, N.
    pub peak_orth_force: f64,
    /// Signed tangential force statistics, N.
    pub tangential_force: Distribution,
    pub mean_tangential_force: f64,
    pub mean_abs_tangential_force: f64,
    /// First time the proxy reached the path end, if it did.
    pub completion_time: Option<f64>,
    pub max_orth_dev: f64,
    pub faulted: bool,
}

/// Compute metrics from a trace.
///
/// When the run completes the path, statistics cover ticks up to (and
/// including) completion so post-completion idling does not dilute the
/// force averages; deviation extrema still scan the entire trace.
pub fn compute_metrics(trace: &SimTrace) -> Metrics {
    let completion = trace
        .rows
        .iter()
        .find(|r| r.s >= trace.path_length - 1e-4)
        .map(|r| r.t);
    let active: Vec<&super::trace::TraceRow> = match completion {
        Some(tc) => trace.rows.iter().filter(|r| r.t <= tc).collect(),
        None => trace.rows.iter().collect(),
    };

    let orth_dev: Vec<f64> = active.iter().map(|r| r.orth_dev_norm()).collect();
    let orth_force: Vec<f64> = active.iter().map(|r| r.orth_force_norm()).collect();
    let tangential: Vec<f64> = active.iter().map(|r| r.f_par).collect();
    let max_orth_dev_all =
        trace.rows.iter().map(|r| r.orth_dev_norm()).fold(0.0_f64, f64::max);

    let tangential_force = Distribution::from_values(&tangential);
    Metrics {
        orth_dev: Distribution::from_values(&orth_dev),
        orth_force: Distribution::from_values(&orth_force),
        peak_orth_force: orth_force.iter().copied().fold(0.0, f64::max),
        mean_tangential_force: tangential_force.mean,
        mean_abs_tangential_force: if tangential.is_empty() {
            0.0
        } else {
            tangential.iter().map(|f| f.abs()).sum::<f64>() / tangential.len() as f64
        },
        tangential_force,
        completion_time: completion,
        max_orth_dev: max_orth_dev_all,
        faulted: trace.fault.is_some(),
    }
}
