//! SIR particle filtering over scene descriptions.

use super::EvalContext;
use crate::embed::log_sum_exp;
use crate::geometry::{sample_gaussian_vmf, GaussianVmfParams, Pose};
use crate::likelihood::Observation;
use crate::render::SceneDescription;
use rand::Rng;

/// Weighted particle set. Log-weights stay normalized:
/// `sum(exp(log_weights)) == 1` within 1e-9.
#[derive(Debug, Clone)]
pub struct ParticleSet {
    pub particles: Vec<SceneDescription>,
    pub log_weights: Vec<f64>,
    pub timestep: usize,
}

impl ParticleSet {
    /// Uniformly weighted set at timestep 0.
    pub fn uniform(particles: Vec<SceneDescription>) -> Self {
        assert!(!particles.is_empty(), "particle set must be non-empty");
        let n = particles.len();
        let lw = -(n as f64).ln();
        Self {
            particles,
            log_weights: vec![lw; n],
            timestep: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.particles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.particles.is_empty()
    }

    pub fn normalize(&mut self) {
        let z = log_sum_exp(&self.log_weights);
        assert!(z.is_finite(), "all particle weights vanished");
        for w in self.log_weights.iter_mut() {
            *w -= z;
        }
    }

    /// Effective sample size `1 / sum(w^2)`.
    pub fn ess(&self) -> f64 {
        let sum_sq: f64 = self.log_weights.iter().map(|lw| (2.0 * lw).exp()).sum();
        1.0 / sum_sq
    }

    /// Weighted standard deviation of one object's position across particles.
    pub fn position_spread(&self, object_index: usize) -> f64 {
        let mut mean = crate::Vec3::zeros();
        for (p, lw) in self.particles.iter().zip(&self.log_weights) {
            mean += lw.exp() * p.objects[object_index].pose.translation();
        }
        let mut var = 0.0;
        for (p, lw) in self.particles.iter().zip(&self.log_weights) {
            var += lw.exp()
                * (p.objects[object_index].pose.translation() - mean).norm_squared();
        }
        var.max(0.0).sqrt()
    }
}

/// Per-object dynamics kernels plus an optional hard cap on the per-step
/// position change (enforced by rejection, clamping to the cap sphere after
/// 100 tries).
#[derive(Debug, Clone)]
pub struct DynamicsParams {
    pub per_object: Vec<GaussianVmfParams>,
    pub position_cap: Option<f64>,
}

impl DynamicsParams {
    pub fn shared(kernel: GaussianVmfParams, n_objects: usize, position_cap: Option<f64>) -> Self {
        Self {
            per_object: vec![kernel; n_objects],
            position_cap,
        }
    }
}

/// Systematic resampling: one uniform draw places a comb of `n` equally
/// spaced pointers over the cumulative weights.
pub fn systematic_resample<R: Rng + ?Sized>(weights: &[f64], rng: &mut R) -> Vec<usize> {
    let n = weights.len();
    let u0: f64 = rng.gen::<f64>() / n as f64;
    let mut indices = Vec::with_capacity(n);
    let mut cumulative = weights[0];
    let mut i = 0usize;
    for k in 0..n {
        let u = u0 + k as f64 / n as f64;
        while cumulative < u && i + 1 < n {
            i += 1;
            cumulative += weights[i];
        }
        indices.push(i);
    }
    indices
}

/// Draw a pose from the dynamics kernel, optionally enforcing the position
/// cap relative to the previous pose.
pub fn propagate_pose<R: Rng + ?Sized>(
    pose: &Pose,
    kernel: &GaussianVmfParams,
    position_cap: Option<f64>,
    rng: &mut R,
) -> Pose {
    match position_cap {
        None => sample_gaussian_vmf(pose, kernel, rng),
        Some(cap) => {
            let mut candidate = sample_gaussian_vmf(pose, kernel, rng);
            for _ in 0..100 {
                if (candidate.translation() - pose.translation()).norm() <= cap {
                    return candidate;
                }
                candidate = sample_gaussian_vmf(pose, kernel, rng);
            }
            let delta = candidate.translation() - pose.translation();
            let clamped = pose.translation() + delta / delta.norm() * cap;
            Pose::new(*candidate.rotation(), clamped)
        }
    }
}

/// One SIR step: systematic resampling by the current weights, propagation
/// through the per-object dynamics, reweighting by the batch log-likelihood
/// of the new observation, and renormalization.
pub fn particle_filter_step<R: Rng + ?Sized>(
    ps: &ParticleSet,
    obs: &Observation,
    ctx: &EvalContext,
    dynamics: &DynamicsParams,
    rng: &mut R,
) -> ParticleSet {
    assert!(!ps.is_empty());
    let weights: Vec<f64> = ps.log_weights.iter().map(|lw| lw.exp()).collect();
    let indices = systematic_resample(&weights, rng);

    // After resampling the implicit weights are uniform (ESS = N).
    let mut propagated = Vec::with_capacity(ps.len());
    for &idx in &indices {
        let mut scene = ps.particles[idx].clone();
        for (o, obj) in scene.objects.iter_mut().enumerate() {
            obj.pose = propagate_pose(
                &obj.pose,
                &dynamics.per_object[o],
                dynamics.position_cap,
                rng,
            );
        }
        propagated.push(scene);
    }

    let logliks = ctx.evaluate_batch(obs, &propagated);
    let z = log_sum_exp(&logliks);
    assert!(z.is_finite(), "all particle likelihoods vanished");
    let log_weights: Vec<f64> = logliks.iter().map(|l| l - z).collect();

    ParticleSet {
        particles: propagated,
        log_weights,
        timestep: ps.timestep + 1,
    }
}

/// The particle with the maximum log-weight; ties go to the lowest index.
pub fn filter_estimate(ps: &ParticleSet) -> &SceneDescription {
    let mut best = 0usize;
    let mut best_w = f64::NEG_INFINITY;
    for (i, &w) in ps.log_weights.iter().enumerate() {
        if w > best_w {
            best_w = w;
            best = i;
        }
    }
    &ps.particles[best]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::render::{SceneDescription, SceneObject};
    use crate::Vec3;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn scene_at(x: f64) -> SceneDescription {
        SceneDescription::new(vec![SceneObject {
            class_id: 1,
            pose: Pose::from_translation(Vec3::new(x, 0.0, 500.0)),
        }])
    }

    #[test]
    fn uniform_set_is_normalized_with_full_ess() {
        let ps = ParticleSet::uniform(vec![scene_at(0.0); 8]);
        let total: f64 = ps.log_weights.iter().map(|w| w.exp()).sum();
        assert!((total - 1.0).abs() < 1e-12);
        assert!((ps.ess() - 8.0).abs() < 1e-9);
    }

    #[test]
    fn systematic_resample_tracks_weights() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let weights = vec![0.7, 0.1, 0.1, 0.1];
        let mut counts = [0usize; 4];
        for _ in 0..200 {
            for idx in systematic_resample(&weights, &mut rng) {
                counts[idx] += 1;
            }
        }
        let total: usize = counts.iter().sum();
        let frac0 = counts[0] as f64 / total as f64;
        assert!((frac0 - 0.7).abs() < 0.05, "fraction {frac0}");
    }

    #[test]
    fn estimate_picks_max_weight_lowest_index() {
        let mut ps = ParticleSet::uniform(vec![scene_at(0.0), scene_at(1.0)]);
        ps.log_weights = vec![0.7f64.ln(), 0.3f64.ln()];
        let est = filter_estimate(&ps);
        assert_eq!(est.objects[0].pose.translation().x, 0.0);
        // Equal weights: index 0 wins.
        ps.log_weights = vec![0.5f64.ln(), 0.5f64.ln()];
        assert_eq!(filter_estimate(&ps).objects[0].pose.translation().x, 0.0);
        // Single particle: itself.
        let single = ParticleSet::uniform(vec![scene_at(9.0)]);
        assert_eq!(filter_estimate(&single).objects[0].pose.translation().x, 9.0);
    }

    #[test]
    fn position_cap_enforced() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let kernel = GaussianVmfParams::new(50.0, 100.0).unwrap();
        let pose = Pose::from_translation(Vec3::new(0.0, 0.0, 500.0));
        for _ in 0..200 {
            let p = propagate_pose(&pose, &kernel, Some(30.0), &mut rng);
            assert!((p.translation() - pose.translation()).norm() <= 30.0 + 1e-9);
        }
    }

    #[test]
    fn point_mass_dynamics_keep_particles_fixed() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let kernel = GaussianVmfParams::point_mass();
        let pose = Pose::from_wxyz(0.9, 0.1, 0.2, -0.3, Vec3::new(1.0, 2.0, 3.0));
        let p = propagate_pose(&pose, &kernel, None, &mut rng);
        assert_eq!(p.translation(), pose.translation());
        assert_eq!(p.wxyz(), pose.wxyz());
    }
}
