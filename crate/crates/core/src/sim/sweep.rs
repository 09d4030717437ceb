use rayon::prelude::*;
use serde::Serialize;

use super::energy::{passivity_report, EnergyReport};
use super::metrics::{compute_metrics, Metrics};
use super::scenario::{FixtureParams, Scenario};
use super::session::simulate_session;

/// One cell of a parameter sweep: fixture parameters overriding the base
/// scenario. `k_d_diag = None` re-derives the damping from `chi`.
#[derive(Debug, Clone, Serialize)]
pub struct SweepCell {
    pub name: String,
    pub chi: f64,
    pub delta: f64,
    pub m: f64,
    pub b: f64,
    pub f_virtual: f64,
    pub k_d_diag: Option<[f64; 3]>,
}

impl SweepCell {
    pub fn chi_delta(chi: f64, delta: f64) -> Self {
        Self {
            name: format!("chi{chi:.0}_delta{}", (delta * 1000.0).round() as i64),
            chi,
            delta,
            m: 5.0,
            b: 15.0,
            f_virtual: 0.0,
            k_d_diag: None,
        }
    }

    pub fn apply(&self, base: &Scenario) -> Scenario {
        let mut sc = base.clone();
        sc.fixture = FixtureParams {
            m: self.m,
            b: self.b,
            f_virtual: self.f_virtual,
            kappa: base.fixture.kappa,
            chi: self.chi,
            delta: self.delta,
            k_d_diag: self.k_d_diag.unwrap_or_else(|| FixtureParams::default_damping(self.chi)),
        };
        sc
    }
}

/// Outcome of one (cell, repetition) run.
#[derive(Debug, Clone)]
pub struct RunRecord {
    pub cell: String,
    pub rep: usize,
    pub seed: u64,
    pub dt: f64,
    pub metrics: Metrics,
    pub energy: EnergyReport,
    pub fault: Option<String>,
}

/// All runs of a sweep, in deterministic (cell-major, repetition-minor)
/// order regardless of the parallel execution schedule.
#[derive(Debug, Clone)]
pub struct SweepResults {
    pub runs: Vec<RunRecord>,
}

impl SweepResults {
    pub fn cell_runs<'a>(&'a self, name: &'a str) -> impl Iterator<Item = &'a RunRecord> {
        self.runs.iter().filter(move |r| r.cell == name)
    }

    pub fn fault_count(&self) -> usize {
        self.runs.iter().filter(|r| r.fault.is_some()).count()
    }
}

/// Mean of a per-run statistic across one cell's repetitions.
pub fn aggregate_mean<'a, I, F>(runs: I, f: F) -> f64
where
    I: Iterator<Item = &'a RunRecord>,
    F: Fn(&RunRecord) -> f64,
{
    let values: Vec<f64> = runs.map(|r| f(r)).collect();
    assert!(!values.is_empty(), "aggregate over an empty cell");
    values.iter().sum::<f64>() / values.len() as f64
}

/// Run `repetitions` seeded repetitions of every cell. Repetition `r` of
/// every cell shares the seed `base_seed + r`, so cells are seed-matched.
/// Cells run in parallel; output order is deterministic.
pub fn run_sweep(
    base: &Scenario,
    cells: &[SweepCell],
    repetitions: usize,
    base_seed: u64,
) -> SweepResults {
    assert!(repetitions >= 1);
    let jobs: Vec<(usize, usize)> = (0..cells.len())
        .flat_map(|c| (0..repetitions).map(move |r| (c, r)))
        .collect();
    let runs: Vec<RunRecord> = jobs
        .par_iter()
        .map(|&(c, rep)| {
            let cell = &cells[c];
            let mut scenario = cell.apply(base);
            scenario.seed = base_seed + rep as u64;
            let trace = simulate_session(&scenario);
            RunRecord {
                cell: cell.name.clone(),
                rep,
                seed: scenario.seed,
                dt: scenario.dt,
                metrics: compute_metrics(&trace),
                energy: passivity_report(&trace),
                fault: trace.fault.as_ref().map(|f| f.to_string()),
            }
        })
        .collect();
    SweepResults { runs }
}

/// Write sweep results as CSV: one row per run plus one aggregate row per
/// cell (rep = "mean").
pub fn write_results_csv<W: std::io::Write>(
    results: &SweepResults,
    mut w: W,
) -> std::io::Result<()> {
    writeln!(
        w,
        "cell,rep,seed,dt,mean_orth_dev,max_orth_dev,mean_orth_force,peak_orth_force,\
         mean_f_par,mean_abs_f_par,completion_time,max_energy_residual,fault"
    )?;
    let mut cells_seen: Vec<&str> = Vec::new();
    for run in &results.runs {
        if !cells_seen.contains(&run.cell.as_str()) {
            cells_seen.push(&run.cell);
        }
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{},{},{},{},{}",
            run.cell,
            run.rep,
            run.seed,
            run.dt,
            run.metrics.orth_dev.mean,
            run.metrics.max_orth_dev,
            run.metrics.orth_force.mean,
            run.metrics.peak_orth_force,
            run.metrics.mean_tangential_force,
            run.metrics.mean_abs_tangential_force,
            run.metrics.completion_time.map_or(String::from(""), |t| t.to_string()),
            run.energy.max_residual,
            run.fault.as_deref().unwrap_or("")
        )?;
    }
    for cell in cells_seen {
        let mean = |f: &dyn Fn(&RunRecord) -> f64| {
            aggregate_mean(results.cell_runs(cell), |r| f(r))
        };
        writeln!(
            w,
            "{},mean,,,{},{},{},{},{},{},,{},",
            cell,
            mean(&|r| r.metrics.orth_dev.mean),
            mean(&|r| r.metrics.max_orth_dev),
            mean(&|r| r.metrics.orth_force.mean),
            mean(&|r| r.metrics.peak_orth_force),
            mean(&|r| r.metrics.mean_tangential_force),
            mean(&|r| r.metrics.mean_abs_tangential_force),
            mean(&|r| r.energy.max_residual),
        )?;
    }
    Ok(())
}
