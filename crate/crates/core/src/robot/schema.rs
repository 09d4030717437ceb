//! Versioned JSON description of a kinematic chain.

use nalgebra::{Isometry3, Matrix3, Translation3, Unit, UnitQuaternion, Vector3};
use serde::{Deserialize, Serialize};

use super::chain::{Joint, KinematicChain, Link};
use super::RobotError;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TransformDto {
    /// Translation x, y, z in meters.
    pub translation: [f64; 3],
    /// Unit quaternion w, x, y, z.
    pub rotation: [f64; 4],
}

impl TransformDto {
    fn from_isometry(iso: &Isometry3<f64>) -> Self {
        let q = iso.rotation.quaternion();
        Self { translation: iso.translation.vector.into(), rotation: [q.w, q.i, q.j, q.k] }
    }

    fn to_isometry(&self, what: &str) -> Result<Isometry3<f64>, RobotError> {
        let [w, x, y, z] = self.rotation;
        let quat = nalgebra::Quaternion::new(w, x, y, z);
        if (quat.norm() - 1.0).abs() > 1e-6 {
            return Err(RobotError::Schema(format!("{what}.rotation is not a unit quaternion")));
        }
        Ok(Isometry3::from_parts(
            Translation3::new(self.translation[0], self.translation[1], self.translation[2]),
            UnitQuaternion::from_quaternion(quat),
        ))
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct JointDto {
    pub axis: [f64; 3],
    pub origin_transform: TransformDto,
    pub q_min: f64,
    pub q_max: f64,
    pub tau_lim: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LinkDto {
    pub mass: f64,
    pub com: [f64; 3],
    /// Row-major 3x3 rotational inertia about the COM.
    pub inertia: [[f64; 3]; 3],
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RobotDescription {
    pub schema_version: u32,
    pub gravity: [f64; 3],
    pub joints: Vec<JointDto>,
    pub links: Vec<LinkDto>,
    pub tool: TransformDto,
}

impl RobotDescription {
    pub fn from_chain(chain: &KinematicChain) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            gravity: chain.gravity.into(),
            joints: chain
                .joints()
                .iter()
                .map(|j| JointDto {
                    axis: j.axis.into_inner().into(),
                    origin_transform: TransformDto::from_isometry(&j.origin),
                    q_min: j.q_min,
                    q_max: j.q_max,
                    tau_lim: j.tau_lim,
                })
                .collect(),
            links: chain
                .links()
                .iter()
                .map(|l| LinkDto {
                    mass: l.mass,
                    com: l.com.into(),
                    inertia: [
                        [l.inertia[(0, 0)], l.inertia[(0, 1)], l.inertia[(0, 2)]],
                        [l.inertia[(1, 0)], l.inertia[(1, 1)], l.inertia[(1, 2)]],
                        [l.inertia[(2, 0)], l.inertia[(2, 1)], l.inertia[(2, 2)]],
                    ],
                })
                .collect(),
            tool: TransformDto::from_isometry(&chain.tool),
        }
    }

    pub fn into_chain(self) -> Result<KinematicChain, RobotError> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(RobotError::Schema(format!(
                "unsupported schema_version {} (expected {})",
                self.schema_version, SCHEMA_VERSION
            )));
        }
        let mut joints = Vec::with_capacity(self.joints.len());
        for (i, j) in self.joints.iter().enumerate() {
            let axis = Vector3::new(j.axis[0], j.axis[1], j.axis[2]);
            if axis.norm() < 1e-9 {
                return Err(RobotError::Schema(format!("joints[{i}].axis is zero")));
            }
            joints.push(Joint {
                axis: Unit::new_normalize(axis),
                origin: j.origin_transform.to_isometry(&format!("joints[{i}].origin_transform"))?,
                q_min: j.q_min,
                q_max: j.q_max,
                tau_lim: j.tau_lim,
            });
        }
        let links = self
            .links
            .iter()
            .map(|l| Link {
                mass: l.mass,
                com: Vector3::new(l.com[0], l.com[1], l.com[2]),
                inertia: Matrix3::from_iterator(
                    // from_iterator fills column-major; inertia is symmetric
                    l.inertia.iter().flatten().copied(),
                ),
            })
            .collect();
        let gravity = Vector3::new(self.gravity[0], self.gravity[1], self.gravity[2]);
        let tool = self.tool.to_isometry("tool")?;
        KinematicChain::new(joints, links, gravity, tool)
    }
}

/// Serialize a chain to pretty JSON.
pub fn chain_to_json(chain: &KinematicChain) -> String {
    serde_json::to_string_pretty(&RobotDescription::from_chain(chain))
        .expect("robot description serializes")
}

/// Parse a chain from JSON, validating the schema version and invariants.
pub fn chain_from_json(json: &str) -> Result<KinematicChain, RobotError> {
    let desc: RobotDescription =
        serde_json::from_str(json).map_err(|e| RobotError::Schema(e.to_string()))?;
    desc.into_chain()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::robot::presets;
    use nalgebra::DVector;

    #[test]
    fn chain_round_trips_through_json() {
        let chain = presets::panda_7dof();
        let json = chain_to_json(&chain);
        let back = chain_from_json(&json).unwrap();
        let q = presets::panda_home();
        let a = chain.forward_kinematics(&q);
        let b = back.forward_kinematics(&q);
        assert!((a.position - b.position).norm() < 1e-12);
        assert_eq!(chain.dof(), back.dof());
        assert_eq!(json, chain_to_json(&back));
    }

    #[test]
    fn wrong_schema_version_is_rejected() {
        let chain = presets::planar_two_link(0.5, 0.4);
        let mut desc = RobotDescription::from_chain(&chain);
        desc.schema_version = 99;
        let json = serde_json::to_string(&desc).unwrap();
        assert!(matches!(chain_from_json(&json), Err(RobotError::Schema(_))));
    }

    #[test]
    fn invalid_quaternion_is_rejected() {
        let chain = presets::planar_two_link(0.5, 0.4);
        let mut desc = RobotDescription::from_chain(&chain);
        desc.tool.rotation = [0.5, 0.5, 0.0, 0.0];
        let json = serde_json::to_string(&desc).unwrap();
        let err = chain_from_json(&json).unwrap_err();
        assert!(err.to_string().contains("tool.rotation"));
    }

    #[test]
    fn dynamics_survive_round_trip() {
        let chain = presets::planar_two_link(0.5, 0.4);
        let back = chain_from_json(&chain_to_json(&chain)).unwrap();
        let q = DVector::from_vec(vec![0.4, -0.9]);
        let g1 = crate::robot::dynamics::gravity_torque(&chain, &q);
        let g2 = crate::robot::dynamics::gravity_torque(&back, &q);
        assert!((g1 - g2).norm() < 1e-14);
    }
}
