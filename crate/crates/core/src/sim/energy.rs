use super::trace::SimTrace;

/// Energy bookkeeping of one run against the passivity inequality
/// `S_r(t) - S_r(0) <= ∫ xdot^T F_h dτ`.
#[derive(Debug, Clone)]
pub struct EnergyReport {
    /// Largest positive passivity residual over all trace prefixes, J.
    pub max_residual: f64,
    /// Time at which the largest residual occurred, s.
    pub max_residual_t: f64,
    /// Total supplied energy `∫ xdot^T F_h dt`, J.
    pub supplied: f64,
    /// Energy dissipated by the proxy damping `∫ b sdot² dt`, J.
    pub proxy_dissipation: f64,
    /// Energy dissipated by the Cartesian damping `∫ x̃̇^T K_D x̃̇ dt`, J.
    pub cartesian_dissipation: f64,
    /// Simulated span of the analyzed trace, s.
    pub duration: f64,
}

impl EnergyReport {
    /// Check the residual against a tolerance in joules per simulated second.
    pub fn within_tolerance(&self, tol_per_second: f64) -> bool {
        self.max_residual <= tol_per_second * self.duration.max(1.0)
    }
}

/// Integrate the passivity balance along a trace (trapezoidal rule on the
/// supplied power and the dissipation terms).
pub fn passivity_report(trace: &SimTrace) -> EnergyReport {
    let rows = &trace.rows;
    if rows.len() < 2 {
        return EnergyReport {
            max_residual: 0.0,
            max_residual_t: 0.0,
            supplied: 0.0,
            proxy_dissipation: 0.0,
            cartesian_dissipation: 0.0,
            duration: 0.0,
        };
    }
    let k_d = trace.fixture.elastic_params().k_d;
    let b = trace.fixture.b;
    let s0 = rows[0].storage;

    let mut supplied = 0.0;
    let mut proxy_diss = 0.0;
    let mut cart_diss = 0.0;
    let mut max_residual = 0.0_f64;
    let mut max_residual_t = 0.0;

    let power = |row: &super::trace::TraceRow| row.xdot.dot(&row.f_h);
    let cart = |row: &super::trace::TraceRow| {
        let v = row.xdot - row.xdot_d;
        (v.transpose() * k_d * v)[0]
    };

    for w in rows.windows(2) {
        let dt = w[1].t - w[0].t;
        supplied += 0.5 * dt * (power(&w[0]) + power(&w[1]));
        proxy_diss += 0.5 * dt * b * (w[0].sdot * w[0].sdot + w[1].sdot * w[1].sdot);
        cart_diss += 0.5 * dt * (cart(&w[0]) + cart(&w[1]));
        let residual = w[1].storage - s0 - supplied;
        if residual > max_residual {
            max_residual = residual;
            max_residual_t = w[1].t;
        }
    }

    EnergyReport {
        max_residual,
        max_residual_t,
        supplied,
        proxy_dissipation: proxy_diss,
        cartesian_dissipation: cart_diss,
        duration: rows.last().unwrap().t - rows[0].t,
    }
}
