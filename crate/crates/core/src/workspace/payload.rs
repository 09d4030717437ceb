use nalgebra::{DVector, UnitQuaternion, Vector3};

use crate::robot::{gravity_torque, solve_ik, IkOptions, KinematicChain, TaskPose};

/// Jacobian entries below this magnitude cannot transmit vertical load and
/// impose no bound on the index.
const EPS_J: f64 = 1e-6;

/// Payload index of a single configuration, or infeasibility of a grid point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PayloadValue {
    /// Maximum sustainable vertical force, N.
    Feasible(f64),
    /// No IK solution at the queried pose.
    Infeasible,
}

impl PayloadValue {
    pub fn as_option(&self) -> Option<f64> {
        match self {
            PayloadValue::Feasible(v) => Some(*v),
            PayloadValue::Infeasible => None,
        }
    }
}

/// Maximum vertical force sustainable at configuration `q`:
/// `min_i (tau_lim_i - |g_i|) / |J_{3,i}|` over joints with `|J_{3,i}| > eps`.
///
/// Joints whose vertical Jacobian entry vanishes impose no bound; a joint
/// already saturated by gravity alone drives the index to zero. Returns
/// `+inf` when no joint can be loaded vertically.
pub fn payload_index(chain: &KinematicChain, q: &DVector<f64>) -> f64 {
    let g = gravity_torque(chain, q);
    let jac = chain.geometric_jacobian(q);
    let mut bound = f64::INFINITY;
    for (i, joint) in chain.joints().iter().enumerate() {
        let j3 = jac[(2, i)].abs();
        if j3 <= EPS_J {
            continue;
        }
        let headroom = joint.tau_lim - g[i].abs();
        if headroom <= 0.0 {
            return 0.0;
        }
        bound = bound.min(headroom / j3);
    }
    bound
}

/// Axis-aligned position grid with a fixed flange orientation.
#[derive(Debug, Clone)]
pub struct WorkspaceGrid {
    pub min: Vector3<f64>,
    pub max: Vector3<f64>,
    /// Grid step, m (> 0).
    pub resolution: f64,
    pub orientation: UnitQuaternion<f64>,
}

impl WorkspaceGrid {
    pub fn points(&self) -> Vec<Vector3<f64>> {
        let counts = self.axis_counts();
        let mut pts = Vec::with_capacity(counts.0 * counts.1 * counts.2);
        for ix in 0..counts.0 {
            for iy in 0..counts.1 {
                for iz in 0..counts.2 {
                    pts.push(Vector3::new(
                        self.min.x + ix as f64 * self.resolution,
                        self.min.y + iy as f64 * self.resolution,
                        self.min.z + iz as f64 * self.resolution,
                    ));
                }
            }
        }
        pts
    }

    fn axis_counts(&self) -> (usize, usize, usize) {
        let count = |lo: f64, hi: f64| ((hi - lo) / self.resolution + 1.0 + 1e-9).floor() as usize;
        (
            count(self.min.x, self.max.x).max(1),
            count(self.min.y, self.max.y).max(1),
            count(self.min.z, self.max.z).max(1),
        )
    }
}

/// One grid point of a payload map. The solved configuration is kept for
/// diagnostics and for seeding neighboring queries.
#[derive(Debug, Clone)]
pub struct PayloadEntry {
    pub position: Vector3<f64>,
    pub value: PayloadValue,
    pub q: Option<DVector<f64>>,
}

/// A payload map: grid points paired with their payload values.
#[derive(Debug, Clone)]
pub struct PayloadMap {
    pub entries: Vec<PayloadEntry>,
}

impl PayloadMap {
    pub fn feasible_count(&self) -> usize {
        self.entries.iter().filter(|e| matches!(e.value, PayloadValue::Feasible(_))).count()
    }
}

/// Evaluate the payload index at one pose; IK seeded from `seed`.
pub fn payload_at_pose(
    chain: &KinematicChain,
    position: &Vector3<f64>,
    orientation: &UnitQuaternion<f64>,
    seed: &DVector<f64>,
    ik: &IkOptions,
) -> (PayloadValue, Option<DVector<f64>>) {
    let target = TaskPose { position: *position, orientation: *orientation };
    match solve_ik(chain, &target, seed, ik) {
        Ok(q) => {
            let v = payload_index(chain, &q);
            (PayloadValue::Feasible(v), Some(q))
        }
        Err(_) => (PayloadValue::Infeasible, None),
    }
}

/// Map the payload index over a grid at the grid's flange orientation.
///
/// IK at each point is seeded with the nearest previously solved neighbor,
/// falling back to the mid-range posture; unreachable points are recorded as
/// infeasible data, not errors.
pub fn map_workspace(chain: &KinematicChain, grid: &WorkspaceGrid, ik: &IkOptions) -> PayloadMap {
    let mid = chain.centered_posture();
    let mut entries = Vec::new();
    let mut last_solution: Option<DVector<f64>> = None;
    for point in grid.points() {
        let seed = last_solution.clone().unwrap_or_else(|| mid.clone());
        let (value, q) = payload_at_pose(chain, &point, &grid.orientation, &seed, ik);
        // retry from the neutral posture before declaring the point lost
        let (value, q) = if matches!(value, PayloadValue::Infeasible) && last_solution.is_some() {
            payload_at_pose(chain, &point, &grid.orientation, &mid, ik)
        } else {
            (value, q)
        };
        if let Some(ref q) = q {
            last_solution = Some(q.clone());
        }
        entries.push(PayloadEntry { position: point, value, q });
    }
    PayloadMap { entries }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::robot::presets;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};

    /// Brute-force oracle: scan the vertical force upward in steps, checking
    /// the worst-case static torque `|g_i| + |J_{3,i}| F <= tau_lim_i` on
    /// every loadable joint.
    pub(crate) fn payload_scan_oracle(
        chain: &KinematicChain,
        q: &DVector<f64>,
        step: f64,
        cap: f64,
    ) -> f64 {
        let g = gravity_torque(chain, q);
        let jac = chain.geometric_jacobian(q);
        let feasible = |f: f64| {
            chain.joints().iter().enumerate().all(|(i, joint)| {
                let j3 = jac[(2, i)].abs();
                j3 <= EPS_J || g[i].abs() + j3 * f <= joint.tau_lim
            })
        };
        if !feasible(0.0) {
            return 0.0;
        }
        let mut f = 0.0;
        while f + step <= cap && feasible(f + step) {
            f += step;
        }
        f
    }

    #[test]
    fn one_link_closed_form() {
        // 1 m lever, 9.8 gravity so the gravity torque is exactly 4.9 N*m
        let mut chain = presets::single_link(1.0, 0.5, 1.0);
        chain.gravity = Vector3::new(0.0, 0.0, -9.8);
        let json = crate::robot::chain_to_json(&chain);
        let mut desc: crate::robot::schema::RobotDescription = serde_json::from_str(&json).unwrap();
        desc.joints[0].tau_lim = 10.0;
        let chain = desc.into_chain().unwrap();
        let v = payload_index(&chain, &DVector::zeros(1));
        assert_relative_eq!(v, 5.1, epsilon = 1e-12);
    }

    #[test]
    fn zero_gravity_symmetric_case() {
        let mut chain = presets::single_link(1.0, 0.5, 1.0);
        chain.gravity = Vector3::zeros();
        // |J_3| = 1 at q = 0, tau_lim = 100
        let v = payload_index(&chain, &DVector::zeros(1));
        assert_relative_eq!(v, 100.0, epsilon = 1e-12);
    }

    #[test]
    fn unloadable_posture_is_unbounded() {
        // pointing straight down: lever for vertical force vanishes
        let chain = presets::single_link(1.0, 0.5, 1.0);
        let v = payload_index(&chain, &DVector::from_element(1, std::f64::consts::FRAC_PI_2));
        assert!(v.is_infinite());
    }

    #[test]
    fn gravity_saturation_zeroes_the_index() {
        let mut chain = presets::single_link(20.0, 0.5, 1.0);
        let json = crate::robot::chain_to_json(&chain);
        let mut desc: crate::robot::schema::RobotDescription = serde_json::from_str(&json).unwrap();
        desc.joints[0].tau_lim = 9.0; // below the ~98 N*m gravity torque
        chain = desc.into_chain().unwrap();
        assert_eq!(payload_index(&chain, &DVector::zeros(1)), 0.0);
    }

    #[test]
    fn planar_three_link_matches_scan_oracle() {
        let chain = presets::planar_chain(&[(0.5, 2.0, 40.0), (0.4, 1.5, 25.0), (0.3, 1.0, 12.0)]);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2024);
        for _ in 0..100 {
            let q = DVector::from_iterator(3, (0..3).map(|_| rng.gen_range(-1.4..1.4)));
            let index = payload_index(&chain, &q);
            let oracle = payload_scan_oracle(&chain, &q, 0.01, 1e4);
            if index.is_finite() {
                assert!(
                    (index - oracle).abs() <= 0.011,
                    "index {index} vs oracle {oracle} at q = {:?}",
                    q.as_slice()
                );
            }
        }
    }

    #[test]
    fn raising_torque_limits_never_lowers_the_index() {
        let mk = |scale: f64| {
            presets::planar_chain(&[
                (0.5, 2.0, 40.0 * scale),
                (0.4, 1.5, 25.0 * scale),
                (0.3, 1.0, 12.0 * scale),
            ])
        };
        let base = mk(1.0);
        let strong = mk(1.5);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..50 {
            let q = DVector::from_iterator(3, (0..3).map(|_| rng.gen_range(-1.4..1.4)));
            assert!(payload_index(&strong, &q) >= payload_index(&base, &q));
        }
    }

    #[test]
    fn unreachable_grid_is_all_infeasible() {
        let chain = presets::planar_two_link(0.5, 0.4);
        let grid = WorkspaceGrid {
            min: Vector3::new(2.0, 0.0, 0.0),
            max: Vector3::new(2.2, 0.0, 0.2),
            resolution: 0.1,
            orientation: UnitQuaternion::identity(),
        };
        let map = map_workspace(&chain, &grid, &IkOptions::planar_xz());
        assert!(!map.entries.is_empty());
        assert_eq!(map.feasible_count(), 0);
    }

    #[test]
    fn planar_map_matches_per_point_oracle() {
        let chain = presets::planar_two_link(0.5, 0.4);
        let grid = WorkspaceGrid {
            min: Vector3::new(0.3, 0.0, -0.3),
            max: Vector3::new(0.7, 0.0, 0.1),
            resolution: 0.2,
            orientation: UnitQuaternion::identity(),
        };
        let map = map_workspace(&chain, &grid, &IkOptions::planar_xz());
        assert!(map.feasible_count() >= 4, "expected mostly reachable grid");
        for entry in &map.entries {
            if let PayloadValue::Feasible(v) = entry.value {
                // scan oracle at the exact configuration the map solved
                let q = entry.q.as_ref().expect("feasible entries carry a configuration");
                let oracle = payload_scan_oracle(&chain, q, 0.01, 1e4);
                assert!(
                    (v - oracle).abs() <= 0.011,
                    "map {v} vs oracle {oracle} at {:?}",
                    entry.position
                );
            }
        }
    }

    #[test]
    fn orientation_changes_the_map() {
        let chain = presets::panda_7dof();
        let down = UnitQuaternion::from_axis_angle(&Vector3::x_axis(), std::f64::consts::PI);
        let horizontal =
            UnitQuaternion::from_axis_angle(&Vector3::y_axis(), std::f64::consts::FRAC_PI_2);
        let grid_at = |ori: UnitQuaternion<f64>| WorkspaceGrid {
            min: Vector3::new(0.35, -0.1, 0.3),
            max: Vector3::new(0.55, 0.1, 0.5),
            resolution: 0.1,
            orientation: ori,
        };
        let map_down = map_workspace(&chain, &grid_at(down), &IkOptions::default());
        let map_horiz = map_workspace(&chain, &grid_at(horizontal), &IkOptions::default());
        assert!(map_down.feasible_count() > 0);
        assert!(map_horiz.feasible_count() > 0);
        let differs = map_down
            .entries
            .iter()
            .zip(map_horiz.entries.iter())
            .any(|(a, b)| match (&a.value, &b.value) {
                (PayloadValue::Feasible(x), PayloadValue::Feasible(y)) => (x - y).abs() > 1e-3,
                (x, y) => x != y,
            });
        assert!(differs, "orientation must matter for payload capability");
    }
}
