use nalgebra::{DMatrix, Vector3};

use super::{BSplineCurve, SplineError, GL5_NODES, GL5_WEIGHTS};

/// One recorded point of a kinesthetic demonstration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DemoSample {
    /// Time stamp in seconds; must be strictly increasing across a recording.
    pub t: f64,
    /// End-effector position in meters.
    pub position: Vector3<f64>,
}

pub(crate) fn validate_samples(samples: &[DemoSample]) -> Result<(), SplineError> {
    for (i, s) in samples.iter().enumerate() {
        if !s.t.is_finite() || !s.position.iter().all(|c| c.is_finite()) {
            return Err(SplineError::NonFiniteSample { index: i });
        }
        if i > 0 && s.t <= samples[i - 1].t {
            return Err(SplineError::NonIncreasingTimestamps { index: i });
        }
    }
    Ok(())
}

/// Chord-length parameter sites in `[0, 1]` for a point sequence.
///
/// Errors if the samples are all coincident (zero total chord).
pub fn chord_length_sites(points: &[Vector3<f64>]) -> Result<Vec<f64>, SplineError> {
    let mut sites = Vec::with_capacity(points.len());
    let mut acc = 0.0;
    sites.push(0.0);
    for w in points.windows(2) {
        acc += (w[1] - w[0]).norm();
        sites.push(acc);
    }
    if acc <= 0.0 {
        return Err(SplineError::DegenerateSamples);
    }
    for s in &mut sites {
        *s /= acc;
    }
    Ok(sites)
}

/// Clamped knot vector for least-squares fitting with `n_ctrl` control points,
/// interior knots placed by averaging the parameter sites so the collocation
/// matrix stays full rank (Schoenberg-Whitney).
fn fit_knot_vector(sites: &[f64], n_ctrl: usize, degree: usize) -> Vec<f64> {
    let n = sites.len();
    let mut knots = Vec::with_capacity(n_ctrl + degree + 1);
    knots.extend(std::iter::repeat(0.0).take(degree + 1));
    let interior = n_ctrl - degree - 1;
    if n_ctrl == n {
        // interpolation-style averaging of consecutive sites
        for j in 1..=interior {
            let avg: f64 = sites[j..j + degree].iter().sum::<f64>() / degree as f64;
            knots.push(avg);
        }
    } else {
        // quantile placement across the sites
        let d = n as f64 / (n_ctrl - degree) as f64;
        for j in 1..=interior {
            let pos = j as f64 * d;
            let i = (pos.floor() as usize).clamp(1, n - 1);
            let alpha = pos - i as f64;
            knots.push((1.0 - alpha) * sites[i - 1] + alpha * sites[i].min(1.0));
        }
    }
    knots.extend(std::iter::repeat(1.0).take(degree + 1));
    knots
}

/// Gram matrix of second basis derivatives: `P[a][b] = ∫ N_a'' N_b'' du`.
fn second_derivative_penalty(curve_shape: &BSplineCurve) -> DMatrix<f64> {
    let m = curve_shape.control_points().len();
    let p = curve_shape.degree();
    let mut pen = DMatrix::zeros(m, m);
    for w in curve_shape.breakpoints().windows(2) {
        let half = 0.5 * (w[1] - w[0]);
        let mid = 0.5 * (w[0] + w[1]);
        for (node, weight) in GL5_NODES.iter().zip(GL5_WEIGHTS.iter()) {
            let u = mid + half * node;
            let (span, ders) = curve_shape.basis_with_derivatives(u, 2);
            for a in 0..=p {
                for b in 0..=p {
                    pen[(span - p + a, span - p + b)] +=
                        weight * half * ders[2][a] * ders[2][b];
                }
            }
        }
    }
    pen
}

/// Fit a smoothing B-spline with the default control-point count
/// `ceil(n/4) + degree`.
pub fn fit_smoothing_spline(
    samples: &[DemoSample],
    weights: &[f64],
    lambda: f64,
    degree: usize,
) -> Result<BSplineCurve, SplineError> {
    let n_ctrl = (samples.len() + 3) / 4 + degree;
    fit_smoothing_spline_with(samples, weights, lambda, degree, n_ctrl)
}

/// Fit a smoothing B-spline minimizing
/// `sum_j w_j ||curve(u_j) - q_j||^2 + lambda * ∫ ||curve''||^2 du`
/// with a chosen control-point count. Parameter sites are assigned by
/// chord-length parameterization.
pub fn fit_smoothing_spline_with(
    samples: &[DemoSample],
    weights: &[f64],
    lambda: f64,
    degree: usize,
    n_ctrl: usize,
) -> Result<BSplineCurve, SplineError> {
    let n = samples.len();
    if degree < 1 || n < degree + 1 {
        return Err(SplineError::TooFewSamples { needed: degree + 1, got: n, degree });
    }
    validate_samples(samples)?;
    if weights.len() != n || weights.iter().any(|&w| !w.is_finite() || w <= 0.0) {
        return Err(SplineError::InvalidWeights);
    }
    if !lambda.is_finite() || lambda < 0.0 {
        return Err(SplineError::InvalidLambda);
    }
    let n_ctrl = n_ctrl.clamp(degree + 1, n);

    let points: Vec<Vector3<f64>> = samples.iter().map(|s| s.position).collect();
    let sites = chord_length_sites(&points)?;
    let knots = fit_knot_vector(&sites, n_ctrl, degree);

    // Shape-only curve used to evaluate basis functions for assembly.
    let shape =
        BSplineCurve::new(degree, knots.clone(), vec![Vector3::zeros(); n_ctrl])?;

    // Normal equations (A^T W A + lambda P) C = A^T W Q, one RHS per axis.
    let mut normal = DMatrix::zeros(n_ctrl, n_ctrl);
    let mut rhs = DMatrix::zeros(n_ctrl, 3);
    for (j, (&u, sample)) in sites.iter().zip(samples.iter()).enumerate() {
        let (span, ders) = shape.basis_with_derivatives(u, 0);
        let w = weights[j];
        for a in 0..=degree {
            let ia = span - degree + a;
            let na = ders[0][a];
            for b in 0..=degree {
                normal[(ia, span - degree + b)] += w * na * ders[0][b];
            }
            for axis in 0..3 {
                rhs[(ia, axis)] += w * na * sample.position[axis];
            }
        }
    }
    if lambda > 0.0 {
        normal += lambda * second_derivative_penalty(&shape);
    }

    let chol = normal.cholesky().ok_or(SplineError::SingularFit)?;
    let sol = chol.solve(&rhs);
    let control_points: Vec<Vector3<f64>> =
        (0..n_ctrl).map(|i| Vector3::new(sol[(i, 0)], sol[(i, 1)], sol[(i, 2)])).collect();

    BSplineCurve::new(degree, knots, control_points)
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn samples_from_points(points: &[Vector3<f64>]) -> Vec<DemoSample> {
        points
            .iter()
            .enumerate()
            .map(|(i, &p)| DemoSample { t: i as f64 * 0.05, position: p })
            .collect()
    }

    fn circle_arc_samples(n: usize, arc: f64) -> Vec<DemoSample> {
        let pts: Vec<Vector3<f64>> = (0..n)
            .map(|i| {
                let a = arc * i as f64 / (n - 1) as f64;
                Vector3::new(a.cos(), a.sin(), 0.0)
            })
            .collect();
        samples_from_points(&pts)
    }

    #[test]
    fn zero_smoothing_interpolates_collinear_points() {
        let pts: Vec<Vector3<f64>> =
            (0..10).map(|i| Vector3::new(0.1 * i as f64, 0.0, 0.0)).collect();
        let samples = samples_from_points(&pts);
        let weights = vec![1.0; 10];
        let curve = fit_smoothing_spline_with(&samples, &weights, 0.0, 3, 10).unwrap();
        let sites = chord_length_sites(&pts).unwrap();
        for (u, p) in sites.iter().zip(pts.iter()) {
            let fitted = curve.point(*u).unwrap();
            assert!((fitted - p).norm() < 1e-9, "residual {}", (fitted - p).norm());
        }
        // straight segment: second derivative vanishes everywhere
        for &u in &[0.1, 0.35, 0.62, 0.88] {
            assert!(curve.eval(u, 2).unwrap().d2.norm() < 1e-8);
        }
    }

    #[test]
    fn circle_arc_fit_residual_small() {
        let samples = circle_arc_samples(50, std::f64::consts::FRAC_PI_2 * 3.0);
        let weights = vec![1.0; 50];
        let curve = fit_smoothing_spline(&samples, &weights, 0.0, 3).unwrap();
        let pts: Vec<Vector3<f64>> = samples.iter().map(|s| s.position).collect();
        let sites = chord_length_sites(&pts).unwrap();
        let max_resid = sites
            .iter()
            .zip(pts.iter())
            .map(|(&u, p)| (curve.point(u).unwrap() - p).norm())
            .fold(0.0_f64, f64::max);
        assert!(max_resid < 1e-3, "max residual {max_resid}");
    }

    #[test]
    fn smoothing_trades_residual_for_bending() {
        let samples = circle_arc_samples(50, std::f64::consts::FRAC_PI_2 * 3.0);
        let weights = vec![1.0; 50];
        let sharp = fit_smoothing_spline(&samples, &weights, 0.0, 3).unwrap();
        let smooth = fit_smoothing_spline(&samples, &weights, 10.0, 3).unwrap();

        let pts: Vec<Vector3<f64>> = samples.iter().map(|s| s.position).collect();
        let sites = chord_length_sites(&pts).unwrap();
        let sq_resid = |c: &BSplineCurve| -> f64 {
            sites
                .iter()
                .zip(pts.iter())
                .map(|(&u, p)| (c.point(u).unwrap() - p).norm_squared())
                .sum()
        };
        assert!(smooth.bending_energy() < sharp.bending_energy());
        assert!(sq_resid(&smooth) > sq_resid(&sharp));
    }

    #[test]
    fn rejects_degenerate_and_short_inputs() {
        let coincident = samples_from_points(&[Vector3::zeros(); 6]);
        let res = fit_smoothing_spline(&coincident, &[1.0; 6], 0.0, 3);
        assert!(matches!(res, Err(SplineError::DegenerateSamples)));

        let two = samples_from_points(&[Vector3::zeros(), Vector3::x()]);
        let res = fit_smoothing_spline(&two, &[1.0; 2], 0.0, 3);
        assert!(matches!(res, Err(SplineError::TooFewSamples { .. })));
    }

    #[test]
    fn rejects_bad_weights_and_timestamps() {
        let pts: Vec<Vector3<f64>> =
            (0..6).map(|i| Vector3::new(i as f64, 0.0, 0.0)).collect();
        let samples = samples_from_points(&pts);
        assert!(matches!(
            fit_smoothing_spline(&samples, &[1.0; 5], 0.0, 3),
            Err(SplineError::InvalidWeights)
        ));
        assert!(matches!(
            fit_smoothing_spline(&samples, &[0.0; 6], 0.0, 3),
            Err(SplineError::InvalidWeights)
        ));

        let mut bad = samples.clone();
        bad[3].t = bad[2].t;
        assert!(matches!(
            fit_smoothing_spline(&bad, &[1.0; 6], 0.0, 3),
            Err(SplineError::NonIncreasingTimestamps { index: 3 })
        ));
    }
}
