//! Analytic key/query embedding oracle.
//!
//! Key embeddings are `normalize(W_t * phi(x))` where `phi` stacks scaled
//! coordinates with three fixed sinusoid frequencies per axis and `W_t` is a
//! seeded per-class random matrix. Query maps are generated from a
//! ground-truth render: the pixel's own class gets its (optionally noised)
//! key embedding, every other class and the background get seeded random
//! unit vectors. All queries are scaled by a temperature so the noiseless
//! correspondence softmax is peaked.

use super::surface::SurfaceModel;
use super::{EmbedError, StreamingLse};
use crate::grid::Grid2;
use crate::render::RenderOutput;
use crate::Vec3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use std::collections::BTreeSet;

const FEATURE_DIM: usize = 12;
const FEATURE_SCALE: f64 = 100.0;
const FEATURE_FREQS: [f64; 3] = [0.02, 0.05, 0.11];

/// Configuration of the analytic embedding oracle.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleEmbedConfig {
    /// Embedding dimensionality E.
    pub embed_dim: usize,
    /// Master seed for per-class key models and surface samples.
    pub class_seed: u64,
    /// Tangent-space Gaussian noise applied to foreground queries before
    /// re-normalization; the one knob emulating an imperfect query model.
    pub query_noise_sigma: f64,
    /// Seed for background / off-class query vectors.
    pub background_seed: u64,
    /// Scale applied to all queries; dots land in [-T, T].
    pub temperature: f64,
    /// Surface samples per class (the correspondence support set).
    pub samples_per_class: usize,
    /// Keypoints per class selected by farthest point sampling.
    pub keypoint_count: usize,
    /// Pool size for farthest point sampling.
    pub surface_pool: usize,
    /// Classes whose key embeddings must be invariant to rotation about the
    /// object z axis: the feature map sees (radius, 0, z) instead of (x, y, z).
    /// Used for rotationally symmetric shapes, whose appearance cannot
    /// disambiguate yaw.
    pub rotation_invariant_classes: BTreeSet<usize>,
}

impl Default for OracleEmbedConfig {
    fn default() -> Self {
        Self {
            embed_dim: 12,
            class_seed: 11,
            query_noise_sigma: 0.1,
            background_seed: 13,
            temperature: 20.0,
            samples_per_class: 1024,
            keypoint_count: 8,
            surface_pool: 4096,
            rotation_invariant_classes: BTreeSet::new(),
        }
    }
}

impl OracleEmbedConfig {
    pub fn validate(&self) -> Result<(), EmbedError> {
        if self.embed_dim < 2 {
            return Err(EmbedError::InvalidConfig(format!(
                "embed_dim must be >= 2, got {}",
                self.embed_dim
            )));
        }
        if !(self.query_noise_sigma >= 0.0) {
            return Err(EmbedError::InvalidConfig(format!(
                "query_noise_sigma must be >= 0, got {}",
                self.query_noise_sigma
            )));
        }
        if !(self.temperature > 0.0) {
            return Err(EmbedError::InvalidConfig(format!(
                "temperature must be > 0, got {}",
                self.temperature
            )));
        }
        if self.samples_per_class == 0 || self.keypoint_count == 0 {
            return Err(EmbedError::InvalidConfig(
                "samples_per_class and keypoint_count must be >= 1".to_string(),
            ));
        }
        if self.surface_pool < self.keypoint_count {
            return Err(EmbedError::InvalidConfig(
                "surface_pool must cover keypoint_count".to_string(),
            ));
        }
        Ok(())
    }
}

/// Seeded per-class key model.
#[derive(Debug, Clone)]
pub struct KeyModel {
    weights: Option<Vec<f64>>, // embed_dim x FEATURE_DIM, row-major
    embed_dim: usize,
    rotation_invariant: bool,
}

impl KeyModel {
    pub fn for_class(class_id: usize, cfg: &OracleEmbedConfig) -> Self {
        let seed = crate::seed::derive3(cfg.class_seed, class_id as u64, 0x77);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let weights: Vec<f64> = (0..cfg.embed_dim * FEATURE_DIM)
            .map(|_| StandardNormal.sample(&mut rng))
            .collect();
        Self {
            weights: Some(weights),
            embed_dim: cfg.embed_dim,
            rotation_invariant: cfg.rotation_invariant_classes.contains(&class_id),
        }
    }

    /// Placeholder for models assembled from raw parts; embedding new points
    /// is not available there.
    pub(crate) fn raw(embed_dim: usize) -> Self {
        Self {
            weights: None,
            embed_dim,
            rotation_invariant: false,
        }
    }

    fn features(&self, x: &Vec3) -> [f64; FEATURE_DIM] {
        let p = if self.rotation_invariant {
            Vec3::new((x.x * x.x + x.y * x.y).sqrt(), 0.0, x.z)
        } else {
            *x
        };
        let mut f = [0.0; FEATURE_DIM];
        f[0] = p.x / FEATURE_SCALE;
        f[1] = p.y / FEATURE_SCALE;
        f[2] = p.z / FEATURE_SCALE;
        for (k, freq) in FEATURE_FREQS.iter().enumerate() {
            f[3 + 3 * k] = (freq * p.x).sin();
            f[4 + 3 * k] = (freq * p.y).sin();
            f[5 + 3 * k] = (freq * p.z).sin();
        }
        f
    }

    /// Unit-norm key embedding of an object-frame point.
    pub fn embed(&self, x: &Vec3) -> Vec<f64> {
        let w = self
            .weights
            .as_ref()
            .expect("surface model assembled from raw parts has no key model");
        let f = self.features(x);
        let mut out = vec![0.0; self.embed_dim];
        for e in 0..self.embed_dim {
            let row = &w[e * FEATURE_DIM..(e + 1) * FEATURE_DIM];
            let mut acc = 0.0;
            for k in 0..FEATURE_DIM {
                acc += row[k] * f[k];
            }
            out[e] = acc;
        }
        let norm = out.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm < 1e-12 {
            out[0] = 1.0;
            for v in out.iter_mut().skip(1) {
                *v = 0.0;
            }
        } else {
            for v in out.iter_mut() {
                *v /= norm;
            }
        }
        out
    }
}

/// Unit-norm key embedding for (class, object-frame point); deterministic in
/// all arguments.
pub fn key_embed(class_id: usize, x: &Vec3, cfg: &OracleEmbedConfig) -> Vec<f64> {
    KeyModel::for_class(class_id, cfg).embed(x)
}

/// Per-class query embedding maps with precomputed per-pixel log-normalizers
/// against each class's surface sample set. Immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct QueryMaps {
    height: usize,
    width: usize,
    n_classes: usize,
    embed_dim: usize,
    queries: Vec<f64>,         // [class][pixel][e]
    log_normalizers: Vec<f64>, // [class][pixel]
}

impl QueryMaps {
    pub fn from_parts(
        height: usize,
        width: usize,
        n_classes: usize,
        embed_dim: usize,
        queries: Vec<f64>,
        log_normalizers: Vec<f64>,
    ) -> Self {
        assert_eq!(queries.len(), n_classes * height * width * embed_dim);
        assert_eq!(log_normalizers.len(), n_classes * height * width);
        assert!(
            log_normalizers.iter().all(|v| v.is_finite()),
            "log-normalizers must be finite"
        );
        Self {
            height,
            width,
            n_classes,
            embed_dim,
            queries,
            log_normalizers,
        }
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn n_classes(&self) -> usize {
        self.n_classes
    }

    pub fn embed_dim(&self) -> usize {
        self.embed_dim
    }

    /// Query embedding at pixel (i, j) for a 1-based class id.
    #[inline]
    pub fn query(&self, class_id: usize, i: usize, j: usize) -> &[f64] {
        debug_assert!(class_id >= 1 && class_id <= self.n_classes);
        let pixel = i * self.width + j;
        let base = ((class_id - 1) * self.height * self.width + pixel) * self.embed_dim;
        &self.queries[base..base + self.embed_dim]
    }

    #[inline]
    pub fn log_normalizer(&self, class_id: usize, i: usize, j: usize) -> f64 {
        let pixel = i * self.width + j;
        self.log_normalizers[(class_id - 1) * self.height * self.width + pixel]
    }

    pub fn queries(&self) -> &[f64] {
        &self.queries
    }

    pub fn log_normalizers(&self) -> &[f64] {
        &self.log_normalizers
    }
}

/// Generate oracle query maps from a ground-truth render.
///
/// Foreground pixels get their own class's key embedding with tangent-space
/// Gaussian noise (re-normalized); other classes and the background get unit
/// vectors seeded per (class, pixel). Everything is scaled by the
/// temperature, and per-pixel log-normalizers are computed against each
/// class's sample set.
pub fn make_query_maps<R: Rng + ?Sized>(
    gt_render: &RenderOutput,
    models: &[SurfaceModel],
    cfg: &OracleEmbedConfig,
    rng: &mut R,
) -> Result<QueryMaps, EmbedError> {
    cfg.validate()?;
    let (h, w) = (gt_render.height(), gt_render.width());
    let n_classes = models.len();
    for (k, m) in models.iter().enumerate() {
        if m.class_id() != k + 1 {
            return Err(EmbedError::InvalidConfig(format!(
                "models must be ordered by class id; slot {k} holds class {}",
                m.class_id()
            )));
        }
        if m.embed_dim() != cfg.embed_dim {
            return Err(EmbedError::InvalidConfig(
                "model embed_dim disagrees with config".to_string(),
            ));
        }
    }
    let e = cfg.embed_dim;
    let plane = h * w;
    let mut queries = vec![0.0f64; n_classes * plane * e];

    let key_models: Vec<KeyModel> = (1..=n_classes)
        .map(|c| KeyModel::for_class(c, cfg))
        .collect();

    // Row-major pixel pass; the driver rng only feeds foreground noise so
    // background vectors stay reproducible per (class, pixel).
    for i in 0..h {
        for j in 0..w {
            let seg = *gt_render.segmentation.get(i, j) as usize;
            let pixel = i * w + j;
            for class in 1..=n_classes {
                let base = ((class - 1) * plane + pixel) * e;
                let out = &mut queries[base..base + e];
                if seg == class {
                    let key = key_models[class - 1].embed(gt_render.object_coords.get(i, j));
                    if cfg.query_noise_sigma > 0.0 {
                        perturb_on_sphere(&key, cfg.query_noise_sigma, out, rng);
                    } else {
                        out.copy_from_slice(&key);
                    }
                } else {
                    let seed = crate::seed::derive3(
                        cfg.background_seed,
                        class as u64,
                        pixel as u64,
                    );
                    let mut prng = ChaCha8Rng::seed_from_u64(seed);
                    random_unit(out, &mut prng);
                }
                for v in out.iter_mut() {
                    *v *= cfg.temperature;
                }
            }
        }
    }

    // Log-normalizers, parallel over (class, row) stripes.
    let stripes = crate::par::map_range(n_classes * h, |stripe| {
        let class = stripe / h;
        let i = stripe % h;
        let model = &models[class];
        let mut row = vec![0.0f64; w];
        for j in 0..w {
            let base = (class * plane + i * w + j) * e;
            let q = &queries[base..base + e];
            let mut lse = StreamingLse::new();
            for s in 0..model.len() {
                lse.push(super::softmax::dot(q, model.key_row(s)));
            }
            row[j] = lse.value();
        }
        row
    });
    let mut log_normalizers = Vec::with_capacity(n_classes * plane);
    for row in stripes {
        log_normalizers.extend_from_slice(&row);
    }

    Ok(QueryMaps::from_parts(
        h,
        w,
        n_classes,
        e,
        queries,
        log_normalizers,
    ))
}

fn perturb_on_sphere<R: Rng + ?Sized>(key: &[f64], sigma: f64, out: &mut [f64], rng: &mut R) {
    let e = key.len();
    let mut noise = vec![0.0f64; e];
    for v in noise.iter_mut() {
        *v = StandardNormal.sample(rng);
    }
    // Project onto the tangent space at `key`, then re-normalize.
    let along: f64 = noise.iter().zip(key).map(|(n, k)| n * k).sum();
    for k in 0..e {
        out[k] = key[k] + sigma * (noise[k] - along * key[k]);
    }
    let norm = out.iter().map(|v| v * v).sum::<f64>().sqrt();
    for v in out.iter_mut() {
        *v /= norm;
    }
}

fn random_unit<R: Rng + ?Sized>(out: &mut [f64], rng: &mut R) {
    loop {
        let mut norm_sq = 0.0;
        for v in out.iter_mut() {
            let z: f64 = StandardNormal.sample(rng);
            *v = z;
            norm_sq += z * z;
        }
        if norm_sq > 1e-12 {
            let norm = norm_sq.sqrt();
            for v in out.iter_mut() {
                *v /= norm;
            }
            return;
        }
    }
}

/// Key-embedding image of a render: for every foreground pixel the key
/// embedding of its object coordinate under its class's key model; zeros on
/// background. Row-parallel, deterministic.
pub fn key_image(render: &RenderOutput, models: &[SurfaceModel]) -> Grid2<f64> {
    let (h, w) = (render.height(), render.width());
    let e = models.first().map(|m| m.embed_dim()).unwrap_or(0);
    let rows = crate::par::map_range(h, |i| {
        let mut row = vec![0.0f64; w * e];
        for j in 0..w {
            let seg = *render.segmentation.get(i, j) as usize;
            if seg > 0 {
                let key = models[seg - 1].key_embed_point(render.object_coords.get(i, j));
                row[j * e..(j + 1) * e].copy_from_slice(&key);
            }
        }
        row
    });
    let mut data = Vec::with_capacity(h * w * e);
    for row in rows {
        data.extend_from_slice(&row);
    }
    Grid2::from_vec(h, w * e, data)
}
