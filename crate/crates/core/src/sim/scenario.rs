use nalgebra::{DVector, UnitQuaternion};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::control::{CenteringForm, ControlGains};
use crate::fixture::{ElasticParams, VirtualMassParams};
use crate::robot::KinematicChain;
use crate::spline::PathCurve;

use super::human::HumanModel;

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("invalid scenario: {0}")]
    Invalid(String),
}

/// Virtual-mass and elastic parameters of the fixture, as serialized in
/// simulation configs.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FixtureParams {
    /// Virtual mass, kg.
    pub m: f64,
    /// Virtual damping, N·s/m.
    pub b: f64,
    /// Assistive (> 0) or resistive (< 0) tangential force, N.
    pub f_virtual: f64,
    /// Tangential stiffness, N/m.
    pub kappa: f64,
    /// Orthogonal stiffness at zero deflection, N/m.
    pub chi: f64,
    /// Channel radius, m.
    pub delta: f64,
    /// Diagonal of the Cartesian damping matrix, N·s/m.
    pub k_d_diag: [f64; 3],
}

impl FixtureParams {
    /// Critically-damped default damping for a nominal task inertia.
    pub fn default_damping(chi: f64) -> [f64; 3] {
        let nominal_task_mass = 1.5;
        let d = 2.0 * (chi * nominal_task_mass).sqrt();
        [d, d, d]
    }

    pub fn defaults() -> Self {
        Self {
            m: 5.0,
            b: 15.0,
            f_virtual: 0.0,
            kappa: 2500.0,
            chi: 500.0,
            delta: 0.02,
            k_d_diag: Self::default_damping(500.0),
        }
    }

    pub fn validate(&self) -> Result<(), ScenarioError> {
        let check = |ok: bool, msg: &str| {
            if ok {
                Ok(())
            } else {
                Err(ScenarioError::Invalid(msg.into()))
            }
        };
        check(self.m > 0.0, "fixture.m must be > 0")?;
        check(self.b > 0.0, "fixture.b must be > 0")?;
        check(self.f_virtual.is_finite(), "fixture.f_virtual must be finite")?;
        check(self.kappa > 0.0, "fixture.kappa must be > 0")?;
        check(self.chi > 0.0, "fixture.chi must be > 0")?;
        check(self.delta > 0.0, "fixture.delta must be > 0")?;
        check(self.k_d_diag.iter().all(|&d| d > 0.0), "fixture.k_d_diag must be > 0")?;
        Ok(())
    }

    pub fn mass_params(&self) -> VirtualMassParams {
        VirtualMassParams::new(self.m, self.b, self.f_virtual)
    }

    pub fn elastic_params(&self) -> ElasticParams {
        ElasticParams::with_diagonal_damping(self.kappa, self.chi, self.delta, self.k_d_diag)
    }
}

/// Controller gains outside the elastic field.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GainsConfig {
    pub k0: f64,
    pub orientation_stiffness: f64,
    pub orientation_damping: f64,
    /// Use the literal (non-squared) joint-centering objective.
    #[serde(default)]
    pub literal_centering: bool,
}

impl GainsConfig {
    pub fn defaults() -> Self {
        Self { k0: 8.0, orientation_stiffness: 50.0, orientation_damping: 5.0, literal_centering: false }
    }

    pub fn control_gains(&self, elastic: ElasticParams) -> ControlGains {
        ControlGains {
            elastic,
            k0: self.k0,
            orientation_stiffness: self.orientation_stiffness,
            orientation_damping: self.orientation_damping,
            centering_form: if self.literal_centering {
                CenteringForm::Literal
            } else {
                CenteringForm::Squared
            },
        }
    }
}

/// A fully resolved simulation scenario.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub chain: KinematicChain,
    pub path: PathCurve,
    pub fixture: FixtureParams,
    pub gains: GainsConfig,
    pub human: HumanModel,
    /// Initial configuration; the end-effector should sit at the path start.
    pub q0: DVector<f64>,
    /// Constant demonstrated orientation held by the orientation PD.
    pub target_orientation: UnitQuaternion<f64>,
    pub dt: f64,
    pub duration: f64,
    pub seed: u64,
}

impl Scenario {
    pub fn validate(&self) -> Result<(), ScenarioError> {
        self.fixture.validate()?;
        self.human.validate().map_err(ScenarioError::Invalid)?;
        if !(self.dt > 0.0) {
            return Err(ScenarioError::Invalid("dt must be > 0".into()));
        }
        if !(self.duration > 0.0) {
            return Err(ScenarioError::Invalid("duration must be > 0".into()));
        }
        if self.q0.len() != self.chain.dof() {
            return Err(ScenarioError::Invalid(format!(
                "q0 has {} entries, chain has {} joints",
                self.q0.len(),
                self.chain.dof()
            )));
        }
        if self.gains.k0 < 0.0 {
            return Err(ScenarioError::Invalid("gains.k0 must be >= 0".into()));
        }
        Ok(())
    }
}
