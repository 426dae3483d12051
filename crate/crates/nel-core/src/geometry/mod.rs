//! SE(3)/SO(3) math, sampling kernels, rotation-space discretization and ICP.
//!
//! All lengths are millimeters throughout the crate. Operations are pure
//! given an explicit generator; generators are owned per call site and never
//! shared across threads.

mod icp;
mod kernel;
mod nn;
mod pose;
mod rotation_grid;
mod sphere;

pub use icp::{icp_align, icp_align_with_grid, IcpResult};
pub use kernel::{sample_gaussian_vmf, GaussianVmfParams, RotationKernel};
pub use nn::NnGrid;
pub use pose::{quat_geodesic, Pose};
pub use rotation_grid::{build_rotation_grid, RotationGrid};
pub use sphere::fibonacci_sphere;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum GeometryError {
    #[error("point count must be at least 1")]
    EmptyCount,
    #[error("concentration must be positive and finite, got {0}")]
    InvalidConcentration(f64),
    #[error("position sigma must be non-negative, got {0}")]
    InvalidSigma(f64),
    #[error("point set is empty")]
    EmptyPointSet,
}
