//! Energy-based mixture likelihood of an observation given rendered scene
//! products.
//!
//! Each unmasked observed pixel contributes the log of
//!
//! ```text
//! p_background + (1 - epsilon)/K * sum over rendered foreground pixels of
//!     depth_kernel(c, c_render; r) * P(correspondence | query)
//! ```
//!
//! where `K` is the number of rendered foreground pixels, the depth kernel is
//! uniform in a radius-r ball, and the correspondence probability is the
//! softmax of query-key dots using precomputed per-pixel log-normalizers.
//! `p_background` bundles the background mixture weight and density
//! (epsilon / B); only the product matters for scoring. The sum over rendered
//! pixels is restricted to a patch centered at the observed pixel, with the
//! rendered maps conceptually zero-padded and padding contributing nothing.

mod eval;
pub mod reference;

pub use eval::{batch_log_likelihood, batch_log_likelihood_seq, log_likelihood};

use crate::embed::QueryMaps;
use crate::grid::Grid2;
use crate::Vec3;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum LikelihoodError {
    #[error("invalid likelihood config: {0}")]
    InvalidConfig(String),
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
}

/// Which pixels of an observation participate when no explicit mask is given.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MaskPolicy {
    /// Pixels with valid (non-sentinel) observed depth. Default.
    #[default]
    ValidDepth,
    /// Every pixel.
    AllPixels,
}

/// Likelihood hyperparameters.
#[derive(Debug, Clone, PartialEq)]
pub struct LikelihoodConfig {
    /// Depth kernel ball radius, mm.
    pub ball_radius: f64,
    /// Per-pixel background density with the background mixture weight
    /// folded in (epsilon / B), mm^-3 scale.
    pub p_background: f64,
    /// Foreground mixture weight is (1 - epsilon) / K.
    pub epsilon: f64,
    /// Patch (rows, cols) of rendered pixels examined around each observed
    /// pixel.
    pub patch: (usize, usize),
    /// Mask policy applied when building observations without an explicit
    /// mask.
    pub mask_policy: MaskPolicy,
}

impl Default for LikelihoodConfig {
    fn default() -> Self {
        Self {
            ball_radius: 5.0,
            p_background: 1e-9,
            epsilon: 0.1,
            patch: (10, 10),
            mask_policy: MaskPolicy::ValidDepth,
        }
    }
}

impl LikelihoodConfig {
    pub fn validate(&self) -> Result<(), LikelihoodError> {
        if !(self.ball_radius > 0.0) {
            return Err(LikelihoodError::InvalidConfig(format!(
                "ball_radius must be > 0, got {}",
                self.ball_radius
            )));
        }
        if !(self.p_background > 0.0) {
            return Err(LikelihoodError::InvalidConfig(format!(
                "p_background must be > 0, got {}",
                self.p_background
            )));
        }
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(LikelihoodError::InvalidConfig(format!(
                "epsilon must be in (0, 1), got {}",
                self.epsilon
            )));
        }
        if self.patch.0 == 0 || self.patch.1 == 0 {
            return Err(LikelihoodError::InvalidConfig(
                "patch must be at least (1, 1)".to_string(),
            ));
        }
        Ok(())
    }
}

/// One observed frame: point-cloud image, query maps and the data mask.
/// Masked-out pixels contribute exactly zero to the log-likelihood.
#[derive(Debug, Clone)]
pub struct Observation {
    pub point_cloud: Grid2<Vec3>,
    pub query_maps: QueryMaps,
    pub data_mask: Grid2<bool>,
}

impl Observation {
    /// Build an observation; without an explicit mask the config policy
    /// decides (valid-depth pixels by default).
    pub fn new(
        point_cloud: Grid2<Vec3>,
        query_maps: QueryMaps,
        data_mask: Option<Grid2<bool>>,
        policy: MaskPolicy,
    ) -> Result<Self, LikelihoodError> {
        if query_maps.height() != point_cloud.height() || query_maps.width() != point_cloud.width()
        {
            return Err(LikelihoodError::ShapeMismatch(format!(
                "query maps {}x{} vs point cloud {}x{}",
                query_maps.height(),
                query_maps.width(),
                point_cloud.height(),
                point_cloud.width()
            )));
        }
        let data_mask = match data_mask {
            Some(m) => {
                if !m.same_shape(&point_cloud) {
                    return Err(LikelihoodError::ShapeMismatch(
                        "data mask shape disagrees with point cloud".to_string(),
                    ));
                }
                m
            }
            None => {
                let mut m = Grid2::filled(point_cloud.height(), point_cloud.width(), true);
                if policy == MaskPolicy::ValidDepth {
                    for i in 0..point_cloud.height() {
                        for j in 0..point_cloud.width() {
                            m.set(i, j, point_cloud.get(i, j).z > 0.0);
                        }
                    }
                }
                m
            }
        };
        Ok(Self {
            point_cloud,
            query_maps,
            data_mask,
        })
    }

    pub fn height(&self) -> usize {
        self.point_cloud.height()
    }

    pub fn width(&self) -> usize {
        self.point_cloud.width()
    }

    pub fn unmasked_count(&self) -> usize {
        self.data_mask.data().iter().filter(|&&m| m).count()
    }
}

/// Uniform density in a radius-r ball around a rendered point, mm^-3.
pub fn depth_kernel(c: &Vec3, c_rendered: &Vec3, r: f64) -> f64 {
    assert!(r > 0.0, "ball radius must be positive");
    if (c - c_rendered).norm_squared() <= r * r {
        3.0 / (4.0 * std::f64::consts::PI * r * r * r)
    } else {
        0.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn depth_kernel_inside_ball() {
        let c = Vec3::new(0.0, 0.0, 0.0);
        let ct = Vec3::new(3.0, 0.0, 0.0);
        let v = depth_kernel(&c, &ct, 5.0);
        assert!((v - 1.9098593171027443e-3).abs() < 1e-12);
    }

    #[test]
    fn depth_kernel_outside_ball() {
        let c = Vec3::new(0.0, 0.0, 0.0);
        let ct = Vec3::new(6.0, 0.0, 0.0);
        assert_eq!(depth_kernel(&c, &ct, 5.0), 0.0);
    }

    #[test]
    fn depth_kernel_boundary_included() {
        let c = Vec3::new(0.0, 0.0, 0.0);
        let ct = Vec3::new(5.0, 0.0, 0.0);
        assert!(depth_kernel(&c, &ct, 5.0) > 0.0);
    }

    #[test]
    fn config_validation() {
        assert!(LikelihoodConfig::default().validate().is_ok());
        let bad = LikelihoodConfig {
            epsilon: 1.0,
            ..LikelihoodConfig::default()
        };
        assert!(bad.validate().is_err());
        let bad = LikelihoodConfig {
            ball_radius: 0.0,
            ..LikelihoodConfig::default()
        };
        assert!(bad.validate().is_err());
    }
}
