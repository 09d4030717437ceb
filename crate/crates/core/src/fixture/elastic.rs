use nalgebra::{Matrix3, Vector3};
use thiserror::Error;

/// Deviation crossed the virtual channel boundary; the controller must abort.
#[derive(Debug, Clone, Copy, Error)]
#[error("orthogonal deviation {norm:.4} m reached the channel radius {delta:.4} m")]
pub struct ChannelViolation {
    pub norm: f64,
    pub delta: f64,
}

/// Elastic-field parameters: linear stiffness along the tangent, barrier
/// stiffness in the normal plane, and the Cartesian damping matrix.
#[derive(Debug, Clone)]
pub struct ElasticParams {
    /// Tangential stiffness, N/m.
    pub kappa: f64,
    /// Orthogonal stiffness at zero deflection, N/m.
    pub chi: f64,
    /// Channel radius (maximum allowed orthogonal deviation), m.
    pub delta: f64,
    /// Cartesian damping, symmetric positive definite.
    pub k_d: Matrix3<f64>,
}

impl ElasticParams {
    pub fn new(kappa: f64, chi: f64, delta: f64, k_d: Matrix3<f64>) -> Self {
        assert!(kappa > 0.0 && chi > 0.0 && delta > 0.0, "elastic parameters must be positive");
        assert!((k_d - k_d.transpose()).norm() < 1e-9, "K_D must be symmetric");
        assert!(
            k_d.symmetric_eigenvalues().iter().all(|&e| e > 0.0),
            "K_D must be positive definite"
        );
        Self { kappa, chi, delta, k_d }
    }

    pub fn with_diagonal_damping(kappa: f64, chi: f64, delta: f64, d: [f64; 3]) -> Self {
        Self::new(kappa, chi, delta, Matrix3::from_diagonal(&Vector3::new(d[0], d[1], d[2])))
    }

    /// Barrier force magnitude for an orthogonal deflection of norm `z < delta`.
    pub fn barrier_magnitude(&self, z: f64) -> f64 {
        self.chi * self.delta * self.delta * z / (self.delta * self.delta - z * z)
    }

    /// Elastic force for a deviation split into tangential and orthogonal
    /// parts: `kappa * par + chi delta^2 / (delta^2 - |orth|^2) * orth`.
    ///
    /// Fails once the orthogonal deviation reaches the channel radius.
    pub fn elastic_force(
        &self,
        par: &Vector3<f64>,
        orth: &Vector3<f64>,
    ) -> Result<Vector3<f64>, ChannelViolation> {
        let z2 = orth.norm_squared();
        let d2 = self.delta * self.delta;
        if z2 >= d2 {
            return Err(ChannelViolation { norm: z2.sqrt(), delta: self.delta });
        }
        Ok(self.kappa * par + (self.chi * d2 / (d2 - z2)) * orth)
    }

    /// Elastic potential `0.5 kappa |par|^2 + (chi delta^2 / 2) ln(delta^2 /
    /// (delta^2 - |orth|^2))`; `elastic_force` is its exact gradient.
    pub fn elastic_potential(
        &self,
        par: &Vector3<f64>,
        orth: &Vector3<f64>,
    ) -> Result<f64, ChannelViolation> {
        let z2 = orth.norm_squared();
        let d2 = self.delta * self.delta;
        if z2 >= d2 {
            return Err(ChannelViolation { norm: z2.sqrt(), delta: self.delta });
        }
        Ok(0.5 * self.kappa * par.norm_squared() + 0.5 * self.chi * d2 * (d2 / (d2 - z2)).ln())
    }
}
