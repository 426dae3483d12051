//! Scene descriptions and the class -> mesh table.

use super::{RenderError, TriangleMesh};
use crate::geometry::Pose;

/// One object instance: a 1-based class id and its camera-frame pose.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SceneObject {
    pub class_id: usize,
    pub pose: Pose,
}

/// The latent state being inferred: an ordered list of object instances.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SceneDescription {
    pub objects: Vec<SceneObject>,
}

impl SceneDescription {
    pub fn empty() -> Self {
        Self { objects: vec![] }
    }

    pub fn new(objects: Vec<SceneObject>) -> Self {
        Self { objects }
    }

    pub fn len(&self) -> usize {
        self.objects.len()
    }

    pub fn is_empty(&self) -> bool {
        self.objects.is_empty()
    }

    /// Copy with one object's pose replaced.
    pub fn with_pose(&self, object_index: usize, pose: Pose) -> Self {
        let mut scene = self.clone();
        scene.objects[object_index].pose = pose;
        scene
    }

    /// Copy with the same rigid delta applied (pre-multiplied) to every pose.
    pub fn with_shared_delta(&self, delta: &Pose) -> Self {
        let objects = self
            .objects
            .iter()
            .map(|o| SceneObject {
                class_id: o.class_id,
                pose: delta.compose(&o.pose),
            })
            .collect();
        Self { objects }
    }
}

/// Meshes indexed by class id; class `k` lives at slot `k - 1`.
#[derive(Debug, Clone)]
pub struct ObjectLibrary {
    meshes: Vec<TriangleMesh>,
}

impl ObjectLibrary {
    pub fn new(meshes: Vec<TriangleMesh>) -> Self {
        Self { meshes }
    }

    pub fn n_classes(&self) -> usize {
        self.meshes.len()
    }

    pub fn mesh(&self, class_id: usize) -> Result<&TriangleMesh, RenderError> {
        if class_id == 0 || class_id > self.meshes.len() {
            return Err(RenderError::UnknownClass(class_id));
        }
        Ok(&self.meshes[class_id - 1])
    }

    pub fn validate_scene(&self, scene: &SceneDescription) -> Result<(), RenderError> {
        for o in &scene.objects {
            self.mesh(o.class_id)?;
        }
        Ok(())
    }
}
