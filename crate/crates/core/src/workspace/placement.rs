use nalgebra::{UnitQuaternion, Vector3};

use crate::robot::{IkOptions, KinematicChain};

use super::payload::{payload_at_pose, PayloadValue};

/// One candidate pose of the trajectory relative to the robot base: a
/// translation in x/y and a rotation about the vertical axis through the
/// trajectory centroid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlacementCandidate {
    pub tx: f64,
    pub ty: f64,
    /// Rotation about +z through the centroid, rad.
    pub theta: f64,
}

impl PlacementCandidate {
    /// Transform trajectory points: rotate about the centroid, then translate.
    pub fn apply(&self, points: &[Vector3<f64>]) -> Vec<Vector3<f64>> {
        let centroid = points.iter().sum::<Vector3<f64>>() / points.len() as f64;
        let rot = UnitQuaternion::from_axis_angle(&Vector3::z_axis(), self.theta);
        points
            .iter()
            .map(|p| centroid + rot * (p - centroid) + Vector3::new(self.tx, self.ty, 0.0))
            .collect()
    }
}

/// Exhaustive search ranges: inclusive linear sweeps per dimension and a
/// list of flange orientations to try.
#[derive(Debug, Clone)]
pub struct PlacementSearch {
    pub tx: Vec<f64>,
    pub ty: Vec<f64>,
    pub theta: Vec<f64>,
    pub orientations: Vec<(String, UnitQuaternion<f64>)>,
}

impl PlacementSearch {
    pub fn is_empty(&self) -> bool {
        self.tx.is_empty() || self.ty.is_empty() || self.theta.is_empty() || self.orientations.is_empty()
    }
}

/// Worst payload index along a placed trajectory, or infeasibility when any
/// point has no IK solution.
pub fn rank_placement(
    chain: &KinematicChain,
    trajectory: &[Vector3<f64>],
    placement: &PlacementCandidate,
    orientation: &UnitQuaternion<f64>,
    ik: &IkOptions,
) -> PayloadValue {
    assert!(!trajectory.is_empty());
    let mid = chain.centered_posture();
    let mut seed = mid.clone();
    let mut worst = f64::INFINITY;
    for point in placement.apply(trajectory) {
        let (value, q) = payload_at_pose(chain, &point, orientation, &seed, ik);
        // continuity seeding failed: retry once from the neutral posture
        let (value, q) = if matches!(value, PayloadValue::Infeasible) && seed != mid {
            payload_at_pose(chain, &point, orientation, &mid, ik)
        } else {
            (value, q)
        };
        match value {
            PayloadValue::Infeasible => return PayloadValue::Infeasible,
            PayloadValue::Feasible(v) => worst = worst.min(v),
        }
        if let Some(q) = q {
            seed = q;
        }
    }
    PayloadValue::Feasible(worst)
}

/// Best placement over the exhaustive search.
#[derive(Debug, Clone)]
pub struct OptimalPlacement {
    pub placement: PlacementCandidate,
    pub orientation_label: String,
    pub orientation: UnitQuaternion<f64>,
    /// Best worst-case payload index, N.
    pub pi_opt: f64,
}

/// Exhaustively scan every (tx, ty, theta, orientation) cell and return the
/// placement maximizing the worst-case payload index. Ties break toward the
/// lowest tx, then ty, then theta, then orientation order; returns `None`
/// when every placement is infeasible.
pub fn optimize_placement(
    chain: &KinematicChain,
    trajectory: &[Vector3<f64>],
    search: &PlacementSearch,
    ik: &IkOptions,
) -> Option<OptimalPlacement> {
    assert!(!search.is_empty(), "empty placement search space");
    let mut best: Option<OptimalPlacement> = None;
    for (label, orientation) in &search.orientations {
        for &theta in &search.theta {
            for &ty in &search.ty {
                for &tx in &search.tx {
                    let candidate = PlacementCandidate { tx, ty, theta };
                    if let PayloadValue::Feasible(pi) =
                        rank_placement(chain, trajectory, &candidate, orientation, ik)
                    {
                        // strict improvement only: earlier cells win ties
                        if best.as_ref().map_or(true, |b| pi > b.pi_opt) {
                            best = Some(OptimalPlacement {
                                placement: candidate,
                                orientation_label: label.clone(),
                                orientation: *orientation,
                                pi_opt: pi,
                            });
                        }
                    }
                }
            }
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::robot::presets;
    use crate::workspace::payload::PayloadValue;

    fn planar_ik() -> IkOptions {
        IkOptions::planar_xz()
    }

    fn arc_points(n: usize) -> Vec<Vector3<f64>> {
        (0..n)
            .map(|i| {
                let a = 0.8 * i as f64 / (n - 1).max(1) as f64;
                Vector3::new(0.45 + 0.1 * a.cos(), 0.0, -0.2 + 0.1 * a.sin())
            })
            .collect()
    }

    #[test]
    fn single_point_trajectory_equals_point_index() {
        let chain = presets::planar_two_link(0.5, 0.4);
        let point = vec![Vector3::new(0.5, 0.0, -0.2)];
        let candidate = PlacementCandidate { tx: 0.0, ty: 0.0, theta: 0.0 };
        let ranked = rank_placement(
            &chain,
            &point,
            &candidate,
            &UnitQuaternion::identity(),
            &planar_ik(),
        );
        let (direct, _) = payload_at_pose(
            &chain,
            &point[0],
            &UnitQuaternion::identity(),
            &chain.centered_posture(),
            &planar_ik(),
        );
        match (ranked, direct) {
            (PayloadValue::Feasible(a), PayloadValue::Feasible(b)) => {
                assert!((a - b).abs() < 1e-6)
            }
            other => panic!("expected feasible pair, got {other:?}"),
        }
    }

    #[test]
    fn out_of_reach_point_makes_placement_infeasible() {
        let chain = presets::planar_two_link(0.5, 0.4);
        let mut traj = arc_points(4);
        traj.push(Vector3::new(3.0, 0.0, 0.0));
        let candidate = PlacementCandidate { tx: 0.0, ty: 0.0, theta: 0.0 };
        assert_eq!(
            rank_placement(&chain, &traj, &candidate, &UnitQuaternion::identity(), &planar_ik()),
            PayloadValue::Infeasible
        );
    }

    #[test]
    fn five_point_trajectory_is_min_of_point_values() {
        let chain = presets::planar_two_link(0.5, 0.4);
        let traj = arc_points(5);
        let candidate = PlacementCandidate { tx: 0.02, ty: 0.0, theta: 0.0 };
        let ranked = rank_placement(
            &chain,
            &traj,
            &candidate,
            &UnitQuaternion::identity(),
            &planar_ik(),
        );
        let mut min_direct = f64::INFINITY;
        for p in candidate.apply(&traj) {
            let (v, _) = payload_at_pose(
                &chain,
                &p,
                &UnitQuaternion::identity(),
                &chain.centered_posture(),
                &planar_ik(),
            );
            min_direct = min_direct.min(v.as_option().expect("reachable"));
        }
        assert!((ranked.as_option().unwrap() - min_direct).abs() < 1e-6);
    }

    #[test]
    fn single_cell_search_returns_that_cell() {
        let chain = presets::planar_two_link(0.5, 0.4);
        let traj = arc_points(3);
        let search = PlacementSearch {
            tx: vec![0.01],
            ty: vec![0.0],
            theta: vec![0.0],
            orientations: vec![("identity".into(), UnitQuaternion::identity())],
        };
        let best = optimize_placement(&chain, &traj, &search, &planar_ik()).unwrap();
        assert_eq!(best.placement, PlacementCandidate { tx: 0.01, ty: 0.0, theta: 0.0 });
        let direct = rank_placement(
            &chain,
            &traj,
            &best.placement,
            &UnitQuaternion::identity(),
            &planar_ik(),
        );
        assert!((best.pi_opt - direct.as_option().unwrap()).abs() < 1e-9);
    }

    #[test]
    fn exhaustive_search_matches_independent_scan() {
        let chain = presets::planar_two_link(0.5, 0.4);
        let traj = arc_points(3);
        let search = PlacementSearch {
            tx: vec![-0.05, 0.0, 0.05],
            ty: vec![0.0],
            theta: vec![0.0, 0.4],
            orientations: vec![("identity".into(), UnitQuaternion::identity())],
        };
        let best = optimize_placement(&chain, &traj, &search, &planar_ik()).unwrap();

        // independent exhaustive oracle over the same cells
        let mut oracle_best: Option<(f64, PlacementCandidate)> = None;
        for &theta in &search.theta {
            for &tx in &search.tx {
                let c = PlacementCandidate { tx, ty: 0.0, theta };
                if let PayloadValue::Feasible(pi) =
                    rank_placement(&chain, &traj, &c, &UnitQuaternion::identity(), &planar_ik())
                {
                    if oracle_best.as_ref().map_or(true, |(b, _)| pi > *b + 1e-12) {
                        oracle_best = Some((pi, c));
                    }
                }
            }
        }
        let (oracle_pi, _) = oracle_best.unwrap();
        assert!((best.pi_opt - oracle_pi).abs() < 1e-9);
    }

    #[test]
    fn tie_break_prefers_the_canonical_cell() {
        let chain = presets::planar_two_link(0.5, 0.4);
        // symmetric trajectory about the x axis: mirrored theta placements tie
        let traj = vec![Vector3::new(0.5, 0.0, -0.15), Vector3::new(0.55, 0.0, -0.15)];
        let search = PlacementSearch {
            tx: vec![0.0],
            ty: vec![-0.02, 0.02],
            theta: vec![0.0],
            orientations: vec![("identity".into(), UnitQuaternion::identity())],
        };
        let best = optimize_placement(&chain, &traj, &search, &planar_ik()).unwrap();
        // the planar chain ignores y, so both cells rank equally:
        // the first-visited (lowest ty) must win
        assert_eq!(best.placement.ty, -0.02);
    }
}
