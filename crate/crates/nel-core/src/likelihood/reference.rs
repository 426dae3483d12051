//! Brute-force reference implementation of the mixture likelihood.
//!
//! Independent oracle: plain linear-space arithmetic, no patch restriction,
//! no log-sum-exp. Every observed pixel sums over every rendered foreground
//! pixel. Used by the oracle-equivalence self-tests and kept deliberately
//! naive.

use super::{LikelihoodConfig, Observation};
use crate::embed::SurfaceModel;
use crate::render::RenderOutput;

/// All-pairs mixture evaluation in linear space.
pub fn reference_log_likelihood(
    obs: &Observation,
    render: &RenderOutput,
    models: &[SurfaceModel],
    cfg: &LikelihoodConfig,
) -> f64 {
    let (h, w) = (obs.height(), obs.width());
    assert_eq!(render.height(), h);
    assert_eq!(render.width(), w);
    let r_sq = cfg.ball_radius * cfg.ball_radius;
    let kernel_value = 3.0 / (4.0 * std::f64::consts::PI * cfg.ball_radius.powi(3));
    let k_fg = render.fg_count;
    let fg_weight = if k_fg > 0 {
        (1.0 - cfg.epsilon) / k_fg as f64
    } else {
        0.0
    };

    // Key embeddings of rendered foreground pixels, in row-major order.
    let mut rendered: Vec<(usize, usize, usize, Vec<f64>)> = Vec::new();
    for ri in 0..h {
        for rj in 0..w {
            let class = *render.segmentation.get(ri, rj) as usize;
            if class > 0 {
                let key = models[class - 1].key_embed_point(render.object_coords.get(ri, rj));
                rendered.push((ri, rj, class, key));
            }
        }
    }

    let mut total = 0.0;
    for i in 0..h {
        for j in 0..w {
            if !obs.data_mask.get(i, j) {
                continue;
            }
            let c = obs.point_cloud.get(i, j);
            let mut fg_sum = 0.0;
            for (ri, rj, class, key) in &rendered {
                let ct = render.point_cloud.get(*ri, *rj);
                if (c - ct).norm_squared() > r_sq {
                    continue;
                }
                let q = obs.query_maps.query(*class, i, j);
                let mut dot = 0.0;
                for k in 0..key.len() {
                    dot += q[k] * key[k];
                }
                let prob = (dot - obs.query_maps.log_normalizer(*class, i, j)).exp();
                fg_sum += kernel_value * prob;
            }
            total += (cfg.p_background + fg_weight * fg_sum).ln();
        }
    }
    total
}
