//! Experiment configuration: a TOML file with nested sections. Every field
//! has a default; unknown keys are errors. Any value can be overridden on the
//! command line as `--set section.key=value`.

use super::HarnessError;
use serde::{Deserialize, Serialize};
use std::path::Path;

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    /// Master seed; fully determines every stochastic choice of a run.
    pub seed: u64,
    pub camera: CameraConfig,
    pub classes: Vec<ClassConfig>,
    pub scene: SceneGenConfig,
    pub embed: EmbedFileConfig,
    pub likelihood: LikelihoodFileConfig,
    pub hypotheses: HypothesesFileConfig,
    pub icp: IcpFileConfig,
    pub search: SearchFileConfig,
    pub tracking: Option<TrackingConfig>,
    pub camera_track: Option<CameraTrackConfig>,
    pub output: OutputConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            camera: CameraConfig::default(),
            classes: vec![ClassConfig::default()],
            scene: SceneGenConfig::default(),
            embed: EmbedFileConfig::default(),
            likelihood: LikelihoodFileConfig::default(),
            hypotheses: HypothesesFileConfig::default(),
            icp: IcpFileConfig::default(),
            search: SearchFileConfig::default(),
            tracking: None,
            camera_track: None,
            output: OutputConfig::default(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct CameraConfig {
    pub width: usize,
    pub height: usize,
    pub fx: f64,
    pub fy: f64,
    pub cx: f64,
    pub cy: f64,
}

impl Default for CameraConfig {
    fn default() -> Self {
        Self {
            width: 160,
            height: 120,
            fx: 200.0,
            fy: 200.0,
            cx: 80.0,
            cy: 60.0,
        }
    }
}

/// Shape of a class mesh, either procedural or loaded from a mesh file.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, tag = "kind", rename_all = "kebab-case")]
pub enum ShapeConfig {
    Box {
        size: [f64; 3],
    },
    Cylinder {
        radius: f64,
        height: f64,
        #[serde(default = "default_segments")]
        segments: usize,
        /// Discrete rotational symmetries about the axis declared for the
        /// symmetry-aware surface distance (0 or 1 = none).
        #[serde(default)]
        symmetry_steps: usize,
    },
    Quad {
        size: [f64; 2],
    },
}

fn default_segments() -> usize {
    64
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct ClassConfig {
    /// Procedural shape; ignored when `mesh_file` is set.
    pub shape: Option<ShapeConfig>,
    /// Mesh file in the ASCII format; must exist.
    pub mesh_file: Option<String>,
    /// Key embeddings invariant to rotation about the object z axis.
    pub rotation_invariant: bool,
}

impl Default for ClassConfig {
    fn default() -> Self {
        Self {
            shape: Some(ShapeConfig::Box {
                size: [80.0, 55.0, 40.0],
            }),
            mesh_file: None,
            rotation_invariant: false,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct SceneGenConfig {
    /// Class id of each object instance (1-based).
    pub objects: Vec<usize>,
    /// Number of scenes an `estimate` run generates (scene ids 0..count).
    pub count: usize,
    pub x_range: [f64; 2],
    pub y_range: [f64; 2],
    pub z_range: [f64; 2],
    /// Depth noise standard deviation, mm.
    pub depth_noise_sigma: f64,
    /// Probability that a valid pixel drops to invalid.
    pub dropout: f64,
    pub max_placement_tries: usize,
    /// Required center separation as a multiple of summed bounding radii.
    pub min_separation_factor: f64,
}

impl Default for SceneGenConfig {
    fn default() -> Self {
        Self {
            objects: vec![1],
            count: 1,
            x_range: [-130.0, 130.0],
            y_range: [-90.0, 90.0],
            z_range: [600.0, 880.0],
            depth_noise_sigma: 2.0,
            dropout: 0.02,
            max_placement_tries: 1000,
            min_separation_factor: 1.0,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct EmbedFileConfig {
    pub dim: usize,
    pub class_seed: u64,
    pub query_noise_sigma: f64,
    pub background_seed: u64,
    pub temperature: f64,
    pub samples_per_class: usize,
    pub keypoints: usize,
    pub surface_pool: usize,
}

impl Default for EmbedFileConfig {
    fn default() -> Self {
        Self {
            dim: 12,
            class_seed: 11,
            query_noise_sigma: 0.1,
            background_seed: 13,
            temperature: 20.0,
            samples_per_class: 1024,
            keypoints: 8,
            surface_pool: 4096,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct LikelihoodFileConfig {
    pub ball_radius: f64,
    pub p_background: f64,
    pub epsilon: f64,
    pub patch: [usize; 2],
    /// "valid-depth" or "all".
    pub mask: String,
}

impl Default for LikelihoodFileConfig {
    fn default() -> Self {
        Self {
            ball_radius: 5.0,
            p_background: 1e-9,
            epsilon: 0.1,
            patch: [10, 10],
            mask: "valid-depth".to_string(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct HypothesesFileConfig {
    pub origin: [f64; 3],
    pub dims: [usize; 3],
    pub voxel_diameter: f64,
    pub top_positions: usize,
    pub count: usize,
    pub nms_radius: usize,
    pub rotation_axes: usize,
    pub inplane_rotations: usize,
    /// 0 keeps every orientation in the ranking.
    pub rotations_per_position: usize,
}

impl Default for HypothesesFileConfig {
    fn default() -> Self {
        Self {
            origin: [-350.0, -210.0, 530.0],
            dims: [129, 87, 168],
            voxel_diameter: 5.0,
            top_positions: 64,
            count: 80,
            nms_radius: 10,
            rotation_axes: 200,
            inplane_rotations: 32,
            rotations_per_position: 0,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct IcpFileConfig {
    pub max_iters: usize,
    pub max_corr_dist: f64,
    pub min_visible_pixels: usize,
    pub max_points: usize,
}

impl Default for IcpFileConfig {
    fn default() -> Self {
        Self {
            max_iters: 20,
            max_corr_dist: 20.0,
            min_visible_pixels: 25,
            max_points: 2000,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct SearchFileConfig {
    /// "round-robin" or "random".
    pub object_selection: String,
    pub phases: Vec<PhaseConfig>,
}

impl Default for SearchFileConfig {
    fn default() -> Self {
        Self {
            object_selection: "round-robin".to_string(),
            phases: vec![
                PhaseConfig {
                    kind: "hypotheses".to_string(),
                    proposals: 80,
                    sweeps: 1,
                    position_sigma: 0.0,
                    rotation_kappa: 0.0,
                },
                PhaseConfig {
                    kind: "icp".to_string(),
                    proposals: 8,
                    sweeps: 1,
                    position_sigma: 2.0,
                    rotation_kappa: 2000.0,
                },
                PhaseConfig {
                    kind: "random-walk".to_string(),
                    proposals: 24,
                    sweeps: 2,
                    position_sigma: 4.0,
                    rotation_kappa: 500.0,
                },
                PhaseConfig {
                    kind: "random-walk".to_string(),
                    proposals: 24,
                    sweeps: 2,
                    position_sigma: 1.5,
                    rotation_kappa: 3000.0,
                },
                PhaseConfig {
                    kind: "random-walk".to_string(),
                    proposals: 24,
                    sweeps: 3,
                    position_sigma: 0.6,
                    rotation_kappa: 12000.0,
                },
            ],
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct PhaseConfig {
    /// "hypotheses", "icp" or "random-walk".
    pub kind: String,
    pub proposals: usize,
    pub sweeps: usize,
    /// Kernel for icp/random-walk phases; 0 sigma + 0 kappa means the phase
    /// default (point-mass for icp spread around the aligned pose).
    pub position_sigma: f64,
    pub rotation_kappa: f64,
}

impl Default for PhaseConfig {
    fn default() -> Self {
        Self {
            kind: "random-walk".to_string(),
            proposals: 16,
            sweeps: 1,
            position_sigma: 2.0,
            rotation_kappa: 1000.0,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct PlacedObjectConfig {
    pub class: usize,
    pub position: [f64; 3],
    pub yaw_deg: f64,
}

impl Default for PlacedObjectConfig {
    fn default() -> Self {
        Self {
            class: 1,
            position: [0.0, 0.0, 800.0],
            yaw_deg: 0.0,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct DynamicsKernelConfig {
    pub position_sigma: f64,
    pub rotation_kappa: f64,
    /// Degenerate kernel: keep the pose exactly.
    pub point_mass: bool,
}

impl Default for DynamicsKernelConfig {
    fn default() -> Self {
        Self {
            position_sigma: 5.0,
            rotation_kappa: 3000.0,
            point_mass: false,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct TrackingConfig {
    pub frames: usize,
    pub particles: usize,
    /// Index (into `objects`) of the object whose errors are reported.
    pub target_object: usize,
    /// The target object moves linearly to this position over the sequence.
    pub target_path_to: [f64; 3],
    pub objects: Vec<PlacedObjectConfig>,
    pub dynamics: Vec<DynamicsKernelConfig>,
    pub position_cap: Option<f64>,
}

impl Default for TrackingConfig {
    fn default() -> Self {
        Self {
            frames: 30,
            particles: 400,
            target_object: 0,
            target_path_to: [60.0, 0.0, 800.0],
            objects: vec![
                PlacedObjectConfig {
                    class: 1,
                    position: [-60.0, 0.0, 800.0],
                    yaw_deg: 0.0,
                },
                PlacedObjectConfig {
                    class: 2,
                    position: [0.0, 0.0, 700.0],
                    yaw_deg: 0.0,
                },
            ],
            dynamics: vec![
                DynamicsKernelConfig {
                    position_sigma: 5.0,
                    rotation_kappa: 3000.0,
                    point_mass: false,
                },
                DynamicsKernelConfig {
                    position_sigma: 0.0,
                    rotation_kappa: 0.0,
                    point_mass: true,
                },
            ],
            position_cap: None,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct CameraTrackConfig {
    pub frames: usize,
    /// Per-frame camera drift.
    pub rotation_step_deg: f64,
    pub translation_step_mm: f64,
    /// Cap on the shared per-step delta translation, mm.
    pub position_cap: f64,
    pub objects: Vec<PlacedObjectConfig>,
    pub proposals: usize,
    pub sweeps: usize,
    pub position_sigma: f64,
    pub rotation_kappa: f64,
}

impl Default for CameraTrackConfig {
    fn default() -> Self {
        Self {
            frames: 8,
            rotation_step_deg: 0.8,
            translation_step_mm: 3.0,
            position_cap: 30.0,
            objects: vec![
                PlacedObjectConfig {
                    class: 1,
                    position: [-50.0, 0.0, 750.0],
                    yaw_deg: 0.0,
                },
                PlacedObjectConfig {
                    class: 1,
                    position: [50.0, 20.0, 850.0],
                    yaw_deg: 40.0,
                },
            ],
            proposals: 24,
            sweeps: 3,
            position_sigma: 2.0,
            rotation_kappa: 2000.0,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    pub dir: String,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            dir: "out".to_string(),
        }
    }
}

/// Parse a config from TOML text; unknown keys are errors naming the key.
pub fn parse_config(text: &str) -> Result<ExperimentConfig, HarnessError> {
    toml::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))
}

pub fn load_config(path: &Path) -> Result<ExperimentConfig, HarnessError> {
    load_config_with_overrides(path, &[])
}

/// Load a config applying `--set section.key=value` overrides before
/// deserialization.
pub fn load_config_with_overrides(
    path: &Path,
    overrides: &[(String, String)],
) -> Result<ExperimentConfig, HarnessError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| HarnessError::Config(format!("cannot read config {}: {e}", path.display())))?;
    let mut value: toml::Value = text
        .parse()
        .map_err(|e| HarnessError::Config(format!("{}: {e}", path.display())))?;
    for (key, raw) in overrides {
        apply_override(&mut value, key, raw)?;
    }
    value
        .try_into()
        .map_err(|e: toml::de::Error| HarnessError::Config(e.to_string()))
}

/// Set `key.path=value` inside a parsed TOML document. The raw value is
/// parsed as TOML when possible and falls back to a string.
pub fn apply_override(
    value: &mut toml::Value,
    key_path: &str,
    raw: &str,
) -> Result<(), HarnessError> {
    let parts: Vec<&str> = key_path.split('.').collect();
    if parts.iter().any(|p| p.is_empty()) {
        return Err(HarnessError::Config(format!(
            "invalid override key '{key_path}'"
        )));
    }
    let mut cursor = value;
    for part in &parts[..parts.len() - 1] {
        let table = cursor.as_table_mut().ok_or_else(|| {
            HarnessError::Config(format!("override key '{key_path}': '{part}' is not a table"))
        })?;
        cursor = table
            .entry(part.to_string())
            .or_insert(toml::Value::Table(Default::default()));
    }
    let leaf = parts[parts.len() - 1];
    let parsed: toml::Value = match format!("v = {raw}").parse::<toml::Value>() {
        Ok(t) => t.get("v").cloned().expect("wrapped value"),
        Err(_) => toml::Value::String(raw.to_string()),
    };
    let table = cursor.as_table_mut().ok_or_else(|| {
        HarnessError::Config(format!("override key '{key_path}' does not address a table"))
    })?;
    table.insert(leaf.to_string(), parsed);
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_round_trips_through_toml() {
        let cfg = ExperimentConfig::default();
        let text = toml::to_string(&cfg).unwrap();
        let back = parse_config(&text).unwrap();
        assert_eq!(cfg, back);
    }

    #[test]
    fn unknown_key_is_an_error_naming_it() {
        let err = parse_config("definitely_not_a_key = 3\n").unwrap_err();
        assert!(err.to_string().contains("definitely_not_a_key"));
        let err = parse_config("[likelihood]\nball_radiusx = 5.0\n").unwrap_err();
        assert!(err.to_string().contains("ball_radiusx"), "{err}");
    }

    #[test]
    fn overrides_apply() {
        let mut value: toml::Value = "".parse().unwrap();
        apply_override(&mut value, "seed", "42").unwrap();
        apply_override(&mut value, "likelihood.epsilon", "0.2").unwrap();
        apply_override(&mut value, "scene.objects", "[1, 1]").unwrap();
        let cfg: ExperimentConfig = value.try_into().unwrap();
        assert_eq!(cfg.seed, 42);
        assert_eq!(cfg.likelihood.epsilon, 0.2);
        assert_eq!(cfg.scene.objects, vec![1, 1]);
    }

    #[test]
    fn override_with_unknown_key_fails_at_deserialization() {
        let mut value: toml::Value = "".parse().unwrap();
        apply_override(&mut value, "likelihood.bogus", "1").unwrap();
        let res: Result<ExperimentConfig, _> = value
            .try_into()
            .map_err(|e: toml::de::Error| HarnessError::Config(e.to_string()));
        let err = res.unwrap_err();
        assert!(err.to_string().contains("bogus"));
    }
}
