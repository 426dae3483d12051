//! Probabilistic render-and-compare engine for 6D object pose estimation and
//! tracking from depth + per-pixel embedding observations.
//!
//! The crate is organized around an inverse-graphics loop:
//!
//! * [`render`] — software rasterizer producing a point-cloud image, a
//!   segmentation map and an object-coordinate image for a scene description;
//! * [`embed`] — surface models with key embeddings, an analytic oracle that
//!   stands in for learned query/key networks, and the correspondence softmax;
//! * [`likelihood`] — energy-based mixture likelihood scoring an observed
//!   point cloud + query maps against rendered scene products;
//! * [`hypotheses`] — coarse enumerative pose hypothesis generation via
//!   spherical voting into voxel accumulators and heuristic scoring;
//! * [`inference`] — greedy stochastic search, SIR particle filtering and a
//!   static-scene camera-tracking mode;
//! * [`harness`] — synthetic scene generation, pose-error metrics, experiment
//!   drivers and result persistence.
//!
//! All data-parallel inner loops go through [`par`], which maps independent
//! elements and collects them in input order. Results are therefore identical
//! for any thread count, and identical to the sequential fallback obtained by
//! building without the `parallel` feature.

pub mod embed;
pub mod geometry;
pub mod grid;
pub mod harness;
pub mod hypotheses;
pub mod inference;
pub mod likelihood;
pub mod par;
pub mod seed;

pub mod render;

/// Camera/object-frame coordinates in millimeters.
pub type Vec3 = nalgebra::Vector3<f64>;
