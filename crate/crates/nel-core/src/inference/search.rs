//! Greedy stochastic search over scene descriptions.

use super::proposals::{propose_hypotheses, propose_icp, propose_random_walk};
use super::{EvalContext, InferenceError};
use crate::geometry::{GaussianVmfParams, NnGrid, Pose};
use crate::likelihood::Observation;
use crate::render::SceneDescription;
use rand::Rng;
use std::collections::BTreeMap;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProposalKind {
    Hypotheses,
    Icp,
    RandomWalk,
}

/// How the object to update is picked within a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ObjectSelection {
    /// Visit every object once per sweep, in scene order. Default.
    #[default]
    RoundRobin,
    /// Uniformly random object per step.
    Random,
}

/// One phase: a proposal kind applied for `sweeps` passes over the objects,
/// `proposals` candidates per step.
#[derive(Debug, Clone, PartialEq)]
pub struct SearchPhase {
    pub kind: ProposalKind,
    pub proposals: usize,
    pub sweeps: usize,
    /// Sampling kernel for ICP and random-walk phases.
    pub kernel: Option<GaussianVmfParams>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchSchedule {
    pub phases: Vec<SearchPhase>,
    pub object_selection: ObjectSelection,
}

impl SearchSchedule {
    pub fn validate(&self) -> Result<(), InferenceError> {
        if self.phases.is_empty() {
            return Err(InferenceError::InvalidSchedule(
                "schedule needs at least one phase".to_string(),
            ));
        }
        for (i, p) in self.phases.iter().enumerate() {
            if p.proposals == 0 {
                return Err(InferenceError::InvalidSchedule(format!(
                    "phase {i}: proposals must be >= 1"
                )));
            }
            if p.sweeps == 0 {
                return Err(InferenceError::InvalidSchedule(format!(
                    "phase {i}: sweeps must be >= 1"
                )));
            }
            if matches!(p.kind, ProposalKind::RandomWalk) && p.kernel.is_none() {
                return Err(InferenceError::InvalidSchedule(format!(
                    "phase {i}: random-walk phases need a kernel"
                )));
            }
        }
        Ok(())
    }
}

/// One accepted update.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceStep {
    pub step: usize,
    pub object: usize,
    pub previous: f64,
    pub accepted: f64,
}

#[derive(Debug, Clone)]
pub struct SearchOutcome {
    pub scene: SceneDescription,
    pub log_likelihood: f64,
    pub trace: Vec<TraceStep>,
}

/// Hill-climbing search: per step, build candidates for one object, evaluate
/// the substituted scenes in a batch, and adopt the best candidate iff it
/// strictly improves the log-likelihood. The accepted-update trace is
/// strictly increasing by construction.
pub fn stochastic_search<R: Rng + ?Sized>(
    init: &SceneDescription,
    obs: &Observation,
    ctx: &EvalContext,
    schedule: &SearchSchedule,
    hypothesis_sets: &BTreeMap<usize, Vec<Pose>>,
    rng: &mut R,
) -> Result<SearchOutcome, InferenceError> {
    schedule.validate()?;
    let mut scene = init.clone();
    if scene.is_empty() {
        return Ok(SearchOutcome {
            scene,
            log_likelihood: ctx.evaluate(obs, init),
            trace: vec![],
        });
    }
    let mut current = ctx.evaluate(obs, &scene);
    let mut trace = Vec::new();
    let mut step = 0usize;

    // Observed target cloud for ICP proposals, built once.
    let obs_grid = lazy_obs_grid(obs, ctx);

    for phase in &schedule.phases {
        for _ in 0..phase.sweeps {
            for slot in 0..scene.len() {
                let object = match schedule.object_selection {
                    ObjectSelection::RoundRobin => slot,
                    ObjectSelection::Random => rng.gen_range(0..scene.len()),
                };
                step += 1;
                let candidates: Vec<Pose> = match phase.kind {
                    ProposalKind::Hypotheses => {
                        match propose_hypotheses(
                            scene.objects[object].class_id,
                            hypothesis_sets,
                            phase.proposals,
                        ) {
                            Some(c) => c,
                            None => continue,
                        }
                    }
                    ProposalKind::Icp => {
                        let render = ctx.render_scene(&scene);
                        match obs_grid.as_ref() {
                            Some(grid) => match propose_icp(
                                object,
                                &scene,
                                &render,
                                grid,
                                ctx,
                                phase.kernel.as_ref(),
                                phase.proposals,
                                rng,
                            ) {
                                Some(c) => c,
                                None => continue,
                            },
                            None => continue,
                        }
                    }
                    ProposalKind::RandomWalk => propose_random_walk(
                        &scene.objects[object].pose,
                        phase.kernel.as_ref().expect("validated"),
                        phase.proposals,
                        rng,
                    ),
                };
                let scenes: Vec<SceneDescription> = candidates
                    .iter()
                    .map(|p| scene.with_pose(object, *p))
                    .collect();
                let scores = ctx.evaluate_batch(obs, &scenes);
                let (best_idx, best) = argmax(&scores);
                if best > current {
                    trace.push(TraceStep {
                        step,
                        object,
                        previous: current,
                        accepted: best,
                    });
                    scene = scenes.into_iter().nth(best_idx).expect("index in range");
                    current = best;
                }
            }
        }
    }
    Ok(SearchOutcome {
        scene,
        log_likelihood: current,
        trace,
    })
}

pub(crate) fn lazy_obs_grid(obs: &Observation, ctx: &EvalContext) -> Option<NnGrid> {
    let mut points = Vec::new();
    for i in 0..obs.height() {
        for j in 0..obs.width() {
            if *obs.data_mask.get(i, j) && obs.point_cloud.get(i, j).z > 0.0 {
                points.push(*obs.point_cloud.get(i, j));
            }
        }
    }
    if points.is_empty() {
        None
    } else {
        Some(NnGrid::build(&points, ctx.icp.max_corr_dist))
    }
}

/// Index and value of the maximum; ties go to the lowest index.
pub(crate) fn argmax(values: &[f64]) -> (usize, f64) {
    let mut best = 0usize;
    let mut best_v = f64::NEG_INFINITY;
    for (i, &v) in values.iter().enumerate() {
        if v > best_v {
            best_v = v;
            best = i;
        }
    }
    (best, best_v)
}
