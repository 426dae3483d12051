//! Patched log-space evaluation of the mixture likelihood.

use super::{LikelihoodConfig, Observation};
use crate::embed::{key_image, StreamingLse, SurfaceModel};
use crate::render::RenderOutput;

/// Log-likelihood of one observation under one render.
///
/// Per-pixel mixtures are accumulated with a max-shifted log-sum-exp in a
/// fixed order (background first, then patch pixels row-major); pixel logs
/// are summed per row and rows are folded in order, so the result is
/// reproducible and independent of thread count.
pub fn log_likelihood(
    obs: &Observation,
    render: &RenderOutput,
    models: &[SurfaceModel],
    cfg: &LikelihoodConfig,
) -> f64 {
    cfg.validate().expect("invalid likelihood config");
    assert_eq!(render.height(), obs.height(), "render/observation height");
    assert_eq!(render.width(), obs.width(), "render/observation width");
    let embed_dim = obs.query_maps.embed_dim();
    let keys = key_image(render, models);

    let row_sums = crate::par::map_range(obs.height(), |i| {
        row_log_likelihood(obs, render, keys.data(), embed_dim, cfg, i)
    });
    row_sums.into_iter().sum()
}

fn row_log_likelihood(
    obs: &Observation,
    render: &RenderOutput,
    keys: &[f64],
    embed_dim: usize,
    cfg: &LikelihoodConfig,
    i: usize,
) -> f64 {
    let (h, w) = (obs.height(), obs.width());
    let (ph, pw) = cfg.patch;
    let r_sq = cfg.ball_radius * cfg.ball_radius;
    let log_bg = cfg.p_background.ln();
    let k_fg = render.fg_count;
    let log_fg_base = if k_fg > 0 {
        ((1.0 - cfg.epsilon) / k_fg as f64).ln()
            + (3.0 / (4.0 * std::f64::consts::PI * cfg.ball_radius.powi(3))).ln()
    } else {
        f64::NEG_INFINITY
    };

    let mut row_sum = 0.0;
    for j in 0..w {
        if !obs.data_mask.get(i, j) {
            continue;
        }
        let c = obs.point_cloud.get(i, j);
        let mut lse = StreamingLse::new();
        lse.push(log_bg);
        if k_fg > 0 {
            // Patch rows [i - ph/2, i + ph - ph/2), matching zero-padding by
            // ph/2 leading rows; out-of-image patch pixels contribute nothing.
            let i0 = i as isize - (ph / 2) as isize;
            let j0 = j as isize - (pw / 2) as isize;
            for di in 0..ph as isize {
                let ri = i0 + di;
                if ri < 0 || ri >= h as isize {
                    continue;
                }
                let ri = ri as usize;
                for dj in 0..pw as isize {
                    let rj = j0 + dj;
                    if rj < 0 || rj >= w as isize {
                        continue;
                    }
                    let rj = rj as usize;
                    let class = *render.segmentation.get(ri, rj) as usize;
                    if class == 0 {
                        continue;
                    }
                    let ct = render.point_cloud.get(ri, rj);
                    if (c - ct).norm_squared() > r_sq {
                        continue;
                    }
                    let q = obs.query_maps.query(class, i, j);
                    let key = &keys[(ri * w + rj) * embed_dim..(ri * w + rj + 1) * embed_dim];
                    let mut dot = 0.0;
                    for k in 0..embed_dim {
                        dot += q[k] * key[k];
                    }
                    let log_corr = dot - obs.query_maps.log_normalizer(class, i, j);
                    lse.push(log_fg_base + log_corr);
                }
            }
        }
        row_sum += lse.value();
    }
    row_sum
}

/// Log-likelihoods of many renders against one observation, element-wise
/// equal (bit-for-bit) to sequential [`log_likelihood`] calls. Evaluation
/// parallelizes across scenes.
pub fn batch_log_likelihood(
    obs: &Observation,
    renders: &[RenderOutput],
    models: &[SurfaceModel],
    cfg: &LikelihoodConfig,
) -> Vec<f64> {
    crate::par::map_slice(renders, |r| log_likelihood(obs, r, models, cfg))
}

/// Sequential twin of [`batch_log_likelihood`]; the oracle path for
/// equivalence tests and the baseline for the parallel benches.
pub fn batch_log_likelihood_seq(
    obs: &Observation,
    renders: &[RenderOutput],
    models: &[SurfaceModel],
    cfg: &LikelihoodConfig,
) -> Vec<f64> {
    renders
        .iter()
        .map(|r| log_likelihood(obs, r, models, cfg))
        .collect()
}
