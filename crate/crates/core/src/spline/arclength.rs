use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use super::{BSplineCurve, SplineError, GL5_NODES, GL5_WEIGHTS};

/// Sampled map between the knot parameter `u` and arc length `s`, with
/// exact `du/ds` slopes stored for monotone cubic inversion.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ArcLengthTable {
    pub u: Vec<f64>,
    pub s: Vec<f64>,
    #[serde(skip)]
    slopes: Vec<f64>,
}

impl ArcLengthTable {
    pub fn total_length(&self) -> f64 {
        *self.s.last().unwrap_or(&0.0)
    }

    /// Invert `s(u)`: monotone cubic Hermite interpolation of `u(s)` using the
    /// exact nodal slopes `du/ds = 1 / ||curve'(u)||`.
    pub fn parameter_at(&self, s: f64) -> Result<f64, SplineError> {
        let total = self.total_length();
        let tol = 1e-9 * total.max(1e-12);
        if !s.is_finite() || s < -tol || s > total + tol {
            return Err(SplineError::OutOfRange { value: s, total });
        }
        let s = s.clamp(0.0, total);
        let k = match self.s.binary_search_by(|x| x.partial_cmp(&s).unwrap()) {
            Ok(i) => return Ok(self.u[i]),
            Err(i) => i.clamp(1, self.s.len() - 1) - 1,
        };
        let h = self.s[k + 1] - self.s[k];
        let t = (s - self.s[k]) / h;
        let (u0, u1) = (self.u[k], self.u[k + 1]);
        let (m0, m1) = (self.slopes[k] * h, self.slopes[k + 1] * h);
        let t2 = t * t;
        let t3 = t2 * t;
        Ok((2.0 * t3 - 3.0 * t2 + 1.0) * u0
            + (t3 - 2.0 * t2 + t) * m0
            + (-2.0 * t3 + 3.0 * t2) * u1
            + (t3 - t2) * m1)
    }

    /// Rebuild the inversion slopes (used after deserialization).
    pub fn restore_slopes(&mut self, curve: &BSplineCurve) -> Result<(), SplineError> {
        if self.u.len() != self.s.len() || self.u.len() < 2 {
            return Err(SplineError::InvalidCurve("arc-length table too short".into()));
        }
        if self.s[0] != 0.0 || self.s.windows(2).any(|w| w[1] <= w[0]) {
            return Err(SplineError::InvalidCurve(
                "arc-length samples must start at 0 and increase strictly".into(),
            ));
        }
        self.slopes = slopes_from_curve(curve, &self.u)?;
        apply_monotone_safeguard(&self.s, &self.u, &mut self.slopes);
        Ok(())
    }
}

fn slopes_from_curve(curve: &BSplineCurve, us: &[f64]) -> Result<Vec<f64>, SplineError> {
    us.iter()
        .map(|&u| {
            let v = curve.speed(u)?;
            if v <= 1e-12 {
                return Err(SplineError::ZeroLengthCurve);
            }
            Ok(1.0 / v)
        })
        .collect()
}

/// Fritsch-Carlson safeguard so the Hermite interpolant stays monotone even
/// where the exact slopes overshoot a short interval.
fn apply_monotone_safeguard(s: &[f64], u: &[f64], slopes: &mut [f64]) {
    for k in 0..s.len() - 1 {
        let secant = (u[k + 1] - u[k]) / (s[k + 1] - s[k]);
        if secant <= 0.0 {
            continue;
        }
        let a = slopes[k] / secant;
        let b = slopes[k + 1] / secant;
        let r = a * a + b * b;
        if r > 9.0 {
            let scale = 3.0 / r.sqrt();
            slopes[k] *= scale;
            slopes[k + 1] *= scale;
        }
    }
}

/// Cumulative arc length by 5-point Gauss-Legendre quadrature on
/// `samples_per_span` subintervals of every knot span.
pub fn build_arclength_table(
    curve: &BSplineCurve,
    samples_per_span: usize,
) -> Result<ArcLengthTable, SplineError> {
    if samples_per_span < 2 {
        return Err(SplineError::InvalidCurve("need at least 2 samples per span".into()));
    }
    let mut u = vec![curve.domain().0];
    for w in curve.breakpoints().windows(2) {
        for i in 1..=samples_per_span {
            u.push(w[0] + (w[1] - w[0]) * i as f64 / samples_per_span as f64);
        }
    }
    let mut s = Vec::with_capacity(u.len());
    s.push(0.0);
    let mut acc = 0.0;
    for w in u.windows(2) {
        let half = 0.5 * (w[1] - w[0]);
        let mid = 0.5 * (w[0] + w[1]);
        let mut seg = 0.0;
        for (node, weight) in GL5_NODES.iter().zip(GL5_WEIGHTS.iter()) {
            seg += weight * half * curve.speed(mid + half * node)?;
        }
        acc += seg;
        s.push(acc);
    }
    if acc <= 1e-12 {
        return Err(SplineError::ZeroLengthCurve);
    }
    if s.windows(2).any(|w| w[1] <= w[0]) {
        return Err(SplineError::ZeroLengthCurve);
    }
    let mut slopes = slopes_from_curve(curve, &u)?;
    apply_monotone_safeguard(&s, &u, &mut slopes);
    Ok(ArcLengthTable { u, s, slopes })
}

/// A B-spline curve together with its arc-length parameterization.
///
/// Evaluation by arc length returns an exactly unit-norm tangent; the second
/// derivative is computed through the chain rule from the curve derivatives,
/// so tangent and second derivative are orthogonal by construction.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PathCurve {
    pub degree: usize,
    pub knots: Vec<f64>,
    pub control_points: Vec<[f64; 3]>,
    pub arclength_table: TableDto,
    #[serde(skip)]
    cache: Option<Cache>,
}

/// Serialized view of the table: parallel `u`/`s` arrays.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TableDto {
    pub u: Vec<f64>,
    pub s: Vec<f64>,
}

#[derive(Debug, Clone)]
struct Cache {
    curve: BSplineCurve,
    table: ArcLengthTable,
}

/// Point, unit tangent and second derivative of a path at an arc length.
#[derive(Debug, Clone, Copy)]
pub struct PathPoint {
    pub position: Vector3<f64>,
    /// `d curve/ds`, unit norm.
    pub tangent: Vector3<f64>,
    /// `d^2 curve/ds^2`; orthogonal to the tangent, norm = curvature.
    pub second: Vector3<f64>,
}

impl PathCurve {
    /// Default arc-length table density per knot span.
    pub const DEFAULT_SAMPLES_PER_SPAN: usize = 32;

    pub fn new(curve: BSplineCurve, samples_per_span: usize) -> Result<Self, SplineError> {
        let table = build_arclength_table(&curve, samples_per_span)?;
        Ok(Self {
            degree: curve.degree(),
            knots: curve.knots().to_vec(),
            control_points: curve.control_points().iter().map(|p| [p.x, p.y, p.z]).collect(),
            arclength_table: TableDto { u: table.u.clone(), s: table.s.clone() },
            cache: Some(Cache { curve, table }),
        })
    }

    pub fn with_default_table(curve: BSplineCurve) -> Result<Self, SplineError> {
        Self::new(curve, Self::DEFAULT_SAMPLES_PER_SPAN)
    }

    /// Rebuild internal state after deserialization; validates invariants.
    pub fn restore(mut self) -> Result<Self, SplineError> {
        let curve = BSplineCurve::new(
            self.degree,
            self.knots.clone(),
            self.control_points.iter().map(|p| Vector3::new(p[0], p[1], p[2])).collect(),
        )?;
        let mut table = ArcLengthTable {
            u: self.arclength_table.u.clone(),
            s: self.arclength_table.s.clone(),
            slopes: Vec::new(),
        };
        table.restore_slopes(&curve)?;
        self.cache = Some(Cache { curve, table });
        Ok(self)
    }

    fn cache(&self) -> &Cache {
        self.cache.as_ref().expect("PathCurve used before restore()")
    }

    pub fn curve(&self) -> &BSplineCurve {
        &self.cache().curve
    }

    pub fn table(&self) -> &ArcLengthTable {
        &self.cache().table
    }

    /// Total path length in meters.
    pub fn total_length(&self) -> f64 {
        self.cache().table.total_length()
    }

    /// Position, exactly-unit tangent and second derivative at arc length `s`.
    pub fn eval_by_arclength(&self, s: f64) -> Result<PathPoint, SplineError> {
        let c = self.cache();
        let u = c.table.parameter_at(s)?;
        let e = c.curve.eval(u, 2)?;
        let speed_sq = e.d1.norm_squared();
        if speed_sq <= 1e-24 {
            return Err(SplineError::ZeroLengthCurve);
        }
        let speed = speed_sq.sqrt();
        let tangent = e.d1 / speed;
        // chain rule with du/ds = 1/|c'| and d2u/ds2 = -(c'·c'')/|c'|^4
        let second = e.d2 / speed_sq - e.d1 * (e.d1.dot(&e.d2) / (speed_sq * speed_sq));
        Ok(PathPoint { position: e.value, tangent, second })
    }

    /// Position only at arc length `s`.
    pub fn position(&self, s: f64) -> Result<Vector3<f64>, SplineError> {
        Ok(self.eval_by_arclength(s)?.position)
    }
}
