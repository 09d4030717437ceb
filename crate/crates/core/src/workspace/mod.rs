//! Payload-index workspace mapping and trajectory-placement optimization.
//!
//! The payload index of a configuration is the largest vertical force the
//! arm can statically resist before any actuator saturates. Mapping it over
//! a position grid at a fixed flange orientation yields a capability map;
//! placements of a discretized trajectory are ranked by the worst payload
//! index along the trajectory and searched exhaustively.

mod payload;
mod placement;

pub use payload::{
    map_workspace, payload_at_pose, payload_index, PayloadEntry, PayloadMap, PayloadValue,
    WorkspaceGrid,
};
pub use placement::{
    optimize_placement, rank_placement, OptimalPlacement, PlacementCandidate, PlacementSearch,
};
