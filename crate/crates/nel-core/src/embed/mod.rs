//! Surface models, the analytic embedding oracle and the correspondence
//! softmax.
//!
//! Key embeddings map object-frame surface points to unit vectors; query maps
//! carry one embedding per pixel per class. Here both come from a seeded
//! analytic construction rather than learned networks: the estimator under
//! test never sees the ground-truth render the maps were generated from, only
//! the maps and the observed point cloud.

mod blob;
mod oracle;
mod softmax;
mod surface;

pub use blob::{
    load_query_maps, load_surface_model, read_query_maps, read_surface_model, save_query_maps,
    save_surface_model, write_query_maps, write_surface_model,
};
pub use oracle::{key_embed, key_image, make_query_maps, OracleEmbedConfig, QueryMaps};
pub use softmax::{correspondence_log_probs, correspondence_prob, log_sum_exp, StreamingLse};
pub use surface::{farthest_point_sample, surface_point_pool, SurfaceModel};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum EmbedError {
    #[error("sample count {requested} exceeds pool size {pool}")]
    CountExceedsPool { requested: usize, pool: usize },
    #[error("invalid oracle config: {0}")]
    InvalidConfig(String),
    #[error("blob io: {0}")]
    Io(String),
    #[error("blob format: {0}")]
    Format(String),
}
