//! Software rendering of scene descriptions.
//!
//! [`render`] produces the three products consumed by the likelihood: a
//! point-cloud image (camera frame, mm), a segmentation map (0 = background)
//! and an object-coordinate image, plus an instance map used by proposal
//! machinery. [`unproject`] converts a depth image to a point-cloud image.

mod camera;
mod mesh;
mod mesh_io;
mod raster;
mod scene;
pub mod shapes;

pub use camera::{unproject, CameraIntrinsics};
pub use mesh::TriangleMesh;
pub use mesh_io::{load_mesh, read_mesh, save_mesh, write_mesh};
pub use raster::{render, RenderOutput, NO_INSTANCE};
pub use scene::{ObjectLibrary, SceneDescription, SceneObject};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum RenderError {
    #[error("invalid camera intrinsics: {0}")]
    InvalidCamera(String),
    #[error("mesh validation failed: {0}")]
    InvalidMesh(String),
    #[error("scene references unknown class {0}")]
    UnknownClass(usize),
    #[error("mesh file {path}: {message}")]
    MeshIo { path: String, message: String },
}
