use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use super::SplineError;

/// Clamped B-spline curve in R^3.
///
/// Invariants enforced on construction: non-decreasing knots with end
/// multiplicity `degree + 1`, and `knots.len() == control_points.len() +
/// degree + 1`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BSplineCurve {
    degree: usize,
    knots: Vec<f64>,
    control_points: Vec<Vector3<f64>>,
}

/// Value and derivatives of a curve point with respect to the knot parameter.
#[derive(Debug, Clone, Copy)]
pub struct CurveEval {
    pub value: Vector3<f64>,
    pub d1: Vector3<f64>,
    pub d2: Vector3<f64>,
}

impl BSplineCurve {
    pub fn new(
        degree: usize,
        knots: Vec<f64>,
        control_points: Vec<Vector3<f64>>,
    ) -> Result<Self, SplineError> {
        if degree < 1 {
            return Err(SplineError::InvalidCurve("degree must be >= 1".into()));
        }
        if control_points.len() < degree + 1 {
            return Err(SplineError::InvalidCurve(format!(
                "need at least {} control points for degree {}",
                degree + 1,
                degree
            )));
        }
        if knots.len() != control_points.len() + degree + 1 {
            return Err(SplineError::InvalidCurve(format!(
                "knot count {} != control points {} + degree {} + 1",
                knots.len(),
                control_points.len(),
                degree
            )));
        }
        if knots.windows(2).any(|w| w[1] < w[0]) || knots.iter().any(|k| !k.is_finite()) {
            return Err(SplineError::InvalidCurve("knots must be finite and non-decreasing".into()));
        }
        let first = knots[0];
        let last = *knots.last().unwrap();
        if knots[..=degree].iter().any(|&k| k != first)
            || knots[knots.len() - degree - 1..].iter().any(|&k| k != last)
        {
            return Err(SplineError::InvalidCurve(
                "knot vector must be clamped (end multiplicity degree + 1)".into(),
            ));
        }
        if last <= first {
            return Err(SplineError::InvalidCurve("empty knot domain".into()));
        }
        if control_points.iter().any(|p| !p.x.is_finite() || !p.y.is_finite() || !p.z.is_finite()) {
            return Err(SplineError::InvalidCurve("control points must be finite".into()));
        }
        Ok(Self { degree, knots, control_points })
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    pub fn control_points(&self) -> &[Vector3<f64>] {
        &self.control_points
    }

    /// Parameter domain `[u_min, u_max]`.
    pub fn domain(&self) -> (f64, f64) {
        (self.knots[self.degree], self.knots[self.knots.len() - 1 - self.degree])
    }

    /// Distinct knot values spanning the domain (span breakpoints).
    pub fn breakpoints(&self) -> Vec<f64> {
        let (lo, hi) = self.domain();
        let mut out = vec![lo];
        for &k in &self.knots[self.degree..self.knots.len() - self.degree] {
            if k > *out.last().unwrap() && k <= hi {
                out.push(k);
            }
        }
        out
    }

    fn clamp_to_domain(&self, u: f64) -> Result<f64, SplineError> {
        let (lo, hi) = self.domain();
        let tol = 1e-12 * (hi - lo).max(1.0);
        if !u.is_finite() || u < lo - tol || u > hi + tol {
            return Err(SplineError::OutOfDomain { value: u, min: lo, max: hi });
        }
        Ok(u.clamp(lo, hi))
    }

    /// Index `i` of the knot span with `knots[i] <= u < knots[i+1]`.
    fn find_span(&self, u: f64) -> usize {
        let n = self.control_points.len() - 1;
        if u >= self.knots[n + 1] {
            return n;
        }
        let mut lo = self.degree;
        let mut hi = n + 1;
        while hi - lo > 1 {
            let mid = (lo + hi) / 2;
            if u < self.knots[mid] {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        lo
    }

    /// Nonzero basis functions and derivatives at `u` up to `max_order`.
    ///
    /// Returns `(span, ders)` where `ders[k][j]` is the k-th derivative of
    /// basis function `span - degree + j`.
    pub fn basis_with_derivatives(&self, u: f64, max_order: usize) -> (usize, Vec<Vec<f64>>) {
        let p = self.degree;
        let span = self.find_span(u);
        let t = &self.knots;

        // Piegl & Tiller A2.3 (DersBasisFuns).
        let mut ndu = vec![vec![0.0; p + 1]; p + 1];
        let mut left = vec![0.0; p + 1];
        let mut right = vec![0.0; p + 1];
        ndu[0][0] = 1.0;
        for j in 1..=p {
            left[j] = u - t[span + 1 - j];
            right[j] = t[span + j] - u;
            let mut saved = 0.0;
            for r in 0..j {
                ndu[j][r] = right[r + 1] + left[j - r];
                let temp = ndu[r][j - 1] / ndu[j][r];
                ndu[r][j] = saved + right[r + 1] * temp;
                saved = left[j - r] * temp;
            }
            ndu[j][j] = saved;
        }

        let order = max_order.min(p);
        let mut ders = vec![vec![0.0; p + 1]; max_order + 1];
        for j in 0..=p {
            ders[0][j] = ndu[j][p];
        }
        let mut a = vec![vec![0.0; p + 1]; 2];
        for r in 0..=p {
            let mut s1 = 0;
            let mut s2 = 1;
            a[0][0] = 1.0;
            for k in 1..=order {
                let mut d = 0.0;
                let rk = r as isize - k as isize;
                let pk = p - k;
                if r >= k {
                    a[s2][0] = a[s1][0] / ndu[pk + 1][rk as usize];
                    d = a[s2][0] * ndu[rk as usize][pk];
                }
                let j1 = if rk >= -1 { 1 } else { (-rk) as usize };
                let j2 = if r as isize - 1 <= pk as isize { k - 1 } else { p - r };
                for j in j1..=j2 {
                    a[s2][j] =
                        (a[s1][j] - a[s1][j - 1]) / ndu[pk + 1][(rk + j as isize) as usize];
                    d += a[s2][j] * ndu[(rk + j as isize) as usize][pk];
                }
                if r <= pk {
                    a[s2][k] = -a[s1][k - 1] / ndu[pk + 1][r];
                    d += a[s2][k] * ndu[r][pk];
                }
                ders[k][r] = d;
                std::mem::swap(&mut s1, &mut s2);
            }
        }
        let mut factor = p as f64;
        for k in 1..=order {
            for j in 0..=p {
                ders[k][j] *= factor;
            }
            factor *= (p - k) as f64;
        }
        (span, ders)
    }

    /// Evaluate position and derivatives with respect to `u` up to `order` (0..=2).
    pub fn eval(&self, u: f64, order: usize) -> Result<CurveEval, SplineError> {
        let u = self.clamp_to_domain(u)?;
        let (span, ders) = self.basis_with_derivatives(u, order.min(2));
        let mut out =
            CurveEval { value: Vector3::zeros(), d1: Vector3::zeros(), d2: Vector3::zeros() };
        for j in 0..=self.degree {
            let cp = self.control_points[span - self.degree + j];
            out.value += ders[0][j] * cp;
            if order >= 1 {
                out.d1 += ders[1][j] * cp;
            }
            if order >= 2 {
                out.d2 += ders[2][j] * cp;
            }
        }
        Ok(out)
    }

    /// Curve position at `u`.
    pub fn point(&self, u: f64) -> Result<Vector3<f64>, SplineError> {
        Ok(self.eval(u, 0)?.value)
    }

    /// `||d curve/du||` at `u`.
    pub fn speed(&self, u: f64) -> Result<f64, SplineError> {
        Ok(self.eval(u, 1)?.d1.norm())
    }

    /// Integral of `||d^2 curve/du^2||^2` over the domain (bending energy of
    /// the parameterization), by Gauss-Legendre quadrature per span.
    pub fn bending_energy(&self) -> f64 {
        let bps = self.breakpoints();
        let mut total = 0.0;
        for w in bps.windows(2) {
            let (a, b) = (w[0], w[1]);
            let half = 0.5 * (b - a);
            let mid = 0.5 * (a + b);
            for (node, weight) in super::GL5_NODES.iter().zip(super::GL5_WEIGHTS.iter()) {
                let u = mid + half * node;
                let d2 = self.eval(u, 2).expect("in-domain").d2;
                total += weight * half * d2.norm_squared();
            }
        }
        total
    }

    /// Validate invariants after deserialization.
    pub fn validate(self) -> Result<Self, SplineError> {
        Self::new(self.degree, self.knots, self.control_points)
    }
}
