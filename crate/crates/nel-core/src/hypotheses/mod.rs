//! Coarse enumerative pose hypothesis generation.
//!
//! Every pixel with a valid observation casts a vote onto the sphere shell
//! of voxels whose distance to the pixel's camera point matches the predicted
//! object-frame distance between the pixel's most likely surface
//! correspondence and a keypoint. Peaks of the object-center grid give
//! candidate positions; candidate orientations come from a fixed rotation
//! grid and are scored by summing keypoint-grid values.

mod generate;
mod peaks;
mod voting;
mod voxel;

pub use generate::{generate_hypotheses, pixel_correspondences, votes_for_target, HypothesesConfig,
    PixelCorrespondences, PoseHypothesis};
pub use peaks::{top_positions, TopPositions};
pub use voting::{
    brute_force_spherical_vote, shell_membership, spherical_vote, votes_from_observation,
    SphereVote,
};
pub use voxel::{VoxelGrid, VoxelGridSpec};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum HypothesesError {
    #[error("invalid voxel grid spec: {0}")]
    InvalidGrid(String),
    #[error("invalid hypotheses config: {0}")]
    InvalidConfig(String),
}
