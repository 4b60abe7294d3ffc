//! Alternating minimization over the point cloud, the temporal weights and
//! the intra-frame graph.

mod config;
mod lp;
mod metric;
mod system;

pub use config::DenoiseConfig;
pub use lp::solve_temporal_weights;
pub use metric::{metric_gradient, metric_objective, project, LearnedMetric, MetricPair, ProximalGradient};
pub use system::{
    assemble, conjugate_gradient, objective, solve_point_cloud, CsrMatrix, ObjectiveBreakdown, PatchSystem,
};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{estimate_normals_with_index, Frame, NeighborIndex, Sequence, Vec3};
use crate::m2m::{describe_patches, temporal_match, ReferencePatches, TemporalMatch};
use crate::patches::{build_patches, PatchSet};
use crate::stgraph::{
    initial_spatial_weights, reorder_matched_patch, row_features, spatial_connectivity, temporal_weight_init,
    weighted_spatial_graph, FeatureVector, SpatioTemporalGraph, TemporalWeights,
};

/// A denoised previous frame prepared as a temporal reference.
#[derive(Debug, Clone)]
pub struct ReferenceFrame {
    pub frame: Frame,
    pub patches: ReferencePatches,
}

impl ReferenceFrame {
    /// Estimates normals on `frame` and builds its patch descriptors.
    pub fn prepare(frame: &Frame, config: &DenoiseConfig) -> Result<Self> {
        let index = NeighborIndex::new(frame.positions())?;
        let with_normals = estimate_normals_with_index(frame, &index, config.k_plane)?.frame;
        let set = build_patches(&index, config.patch_count(frame.len()), config.k, config.seed)?;
        let normals = with_normals.normals().expect("normals estimated");
        let patches = ReferencePatches::new(set, with_normals.positions(), normals, config.c)?;
        Ok(ReferenceFrame {
            frame: with_normals,
            patches,
        })
    }
}

/// Patches, normals and graphs built on one estimate of the current frame.
#[derive(Debug, Clone)]
pub struct FrameGraphs {
    pub patches: PatchSet,
    pub normals: Vec<Vec3>,
    pub features: Vec<FeatureVector>,
    pub pairs: Vec<(usize, usize)>,
    pub matches: Vec<TemporalMatch>,
    pub reference_rows: Vec<Vec3>,
    pub degenerate_normals: usize,
}

/// Patch construction, spatial connectivity and (with a reference) temporal
/// matching on the estimate `positions`.
pub fn build_frame_graphs(
    positions: &[Vec3],
    reference: Option<&ReferenceFrame>,
    config: &DenoiseConfig,
) -> Result<FrameGraphs> {
    let frame = Frame::new(positions.to_vec())?;
    let index = NeighborIndex::new(positions)?;
    let estimate = estimate_normals_with_index(&frame, &index, config.k_plane)?;
    let normals = estimate.frame.normals().expect("normals estimated").to_vec();
    let patches = build_patches(&index, config.patch_count(positions.len()), config.k, config.seed)?;
    let pairs = spatial_connectivity(&patches, positions, config.k_s)?;
    let features = row_features(&patches, positions, &normals)?;

    let (matches, reference_rows) = match reference {
        Some(reference) => {
            let descriptors = describe_patches(&patches, positions, &normals, config.c)?;
            let matches: Vec<TemporalMatch> = patches
                .patches()
                .par_iter()
                .zip(descriptors.par_iter())
                .enumerate()
                .map(|(l, (p, desc))| {
                    temporal_match(l, desc, &positions[p.center()], &reference.patches, config.xi, config.alpha)
                })
                .collect::<Result<_>>()?;
            let rows = matches
                .iter()
                .flat_map(|m| {
                    reorder_matched_patch(m, &reference.patches.descriptors[m.matched_patch].relative)
                })
                .collect();
            (matches, rows)
        }
        None => (Vec::new(), vec![Vec3::zeros(); patches.row_count()]),
    };
    Ok(FrameGraphs {
        patches,
        normals,
        features,
        pairs,
        matches,
        reference_rows,
        degenerate_normals: estimate.degenerate,
    })
}

/// Squared Frobenius difference per patch between `P` and the reordered reference.
pub fn patch_differences(relative: &[Vec3], reference_rows: &[Vec3], rows_per_patch: usize) -> Vec<f64> {
    relative
        .chunks(rows_per_patch)
        .zip(reference_rows.chunks(rows_per_patch))
        .map(|(p, q)| p.iter().zip(q).map(|(a, b)| (a - b).norm_squared()).sum())
        .collect()
}

/// Pairs for metric learning: feature differences and squared differences
/// of the relative-coordinate rows at the two ends of each spatial edge.
pub fn metric_pairs(pairs: &[(usize, usize)], features: &[FeatureVector], relative: &[Vec3]) -> Vec<MetricPair> {
    pairs
        .iter()
        .map(|&(i, j)| MetricPair {
            feature_diff: features[i].0 - features[j].0,
            signal_diff_sq: (relative[i] - relative[j]).norm_squared(),
        })
        .collect()
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct FrameDiagnostics {
    pub temporal_active: bool,
    pub degenerate_normals: usize,
    /// Trace of the learned factor R (bounded by the config trace bound).
    pub trace_factor: Option<f64>,
    /// Trace of the learned metric M = R^T R.
    pub trace_metric: Option<f64>,
    pub best_iteration: usize,
}

#[derive(Debug, Clone)]
pub struct FrameResult {
    pub frame: Frame,
    pub objective_trace: Vec<ObjectiveBreakdown>,
    pub diagnostics: FrameDiagnostics,
    /// Matches from the last iteration (empty without a reference).
    pub matches: Vec<TemporalMatch>,
}

/// Denoises one frame, optionally against a prepared previous frame.
///
/// Each outer iteration rebuilds normals, patches and the spatio-temporal
/// graph on the current estimate. The first iteration uses the initial
/// weights; later ones update the temporal weights by the LP and the spatial
/// metric by proximal gradient before solving for the points. The loop stops
/// when the objective increases, its relative decrease falls under
/// `outer_tol`, or `outer_max_iters` is reached; the lowest-objective iterate
/// is returned.
pub fn denoise_frame(noisy: &Frame, reference: Option<&ReferenceFrame>, config: &DenoiseConfig) -> Result<FrameResult> {
    config.validate()?;
    let reference = if config.lambda1 > 0.0 { reference } else { None };
    let lambda1 = if reference.is_some() { config.lambda1 } else { 0.0 };
    let lambda2 = config.lambda2;
    let input = noisy.positions();

    let mut current = input.to_vec();
    let mut trace: Vec<ObjectiveBreakdown> = Vec::new();
    let mut best: Option<(f64, Vec<Vec3>, usize)> = None;
    let mut diagnostics = FrameDiagnostics {
        temporal_active: reference.is_some(),
        ..Default::default()
    };
    let mut last_matches = Vec::new();

    for iteration in 0..config.outer_max_iters {
        let step = || -> Result<(Vec<Vec3>, ObjectiveBreakdown, FrameGraphs, Option<LearnedMetric>)> {
            let graphs = build_frame_graphs(&current, reference, config)?;
            let rows = graphs.patches.rows_per_patch();
            let row_points = graphs.patches.row_points();
            let row_centers: Vec<Vec3> = graphs
                .patches
                .patches()
                .iter()
                .flat_map(|p| std::iter::repeat_n(current[p.center()], rows))
                .collect();
            let relative = graphs.patches.relative_rows(&current);

            let (weights, spatial, learned) = if iteration == 0 {
                let weights = if reference.is_some() {
                    temporal_weight_init(&graphs.matches)
                } else {
                    TemporalWeights::zeros(graphs.patches.len())
                };
                (weights, initial_spatial_weights(&graphs.pairs, &graphs.features)?, None)
            } else {
                let weights = if reference.is_some() {
                    let d = patch_differences(&relative, &graphs.reference_rows, rows);
                    TemporalWeights::new(solve_temporal_weights(&d, config.m_prime(graphs.patches.len()))?)?
                } else {
                    TemporalWeights::zeros(graphs.patches.len())
                };
                let pg = ProximalGradient {
                    trace_bound: config.trace_bound,
                    step: config.pg_step,
                    max_iters: config.pg_max_iters,
                    tol: config.pg_tol,
                };
                let learned = pg.learn(&metric_pairs(&graphs.pairs, &graphs.features, &relative))?;
                let spatial = weighted_spatial_graph(&graphs.pairs, &graphs.features, &learned.metric)?;
                (weights, spatial, Some(learned))
            };

            let system = PatchSystem {
                row_weights: weights.expand(rows),
                reference_rows: graphs.reference_rows.clone(),
                row_points,
                row_centers,
                spatial,
            };
            // the data term always anchors to the noisy input; anchoring to the
            // previous iterate lets the estimate drift without bound
            let next = solve_point_cloud(input, &system, lambda1, lambda2, config.cg_tol, config.cg_max_iters)?;
            let value = objective(&next, input, &system, lambda1, lambda2)?;
            Ok((next, value, graphs, learned))
        };
        let (next, value, graphs, learned) = step().map_err(|e| Error::Outer {
            iteration,
            source: Box::new(e),
        })?;

        log::debug!("outer iteration {iteration}: objective {:.6e}", value.total);
        diagnostics.degenerate_normals = graphs.degenerate_normals;
        if let Some(learned) = &learned {
            diagnostics.trace_factor = Some(learned.trace_factor());
            diagnostics.trace_metric = Some(learned.trace_metric());
        }
        let previous = trace.last().map(|o| o.total);
        trace.push(value);
        if previous.is_some_and(|p| value.total > p) {
            break;
        }
        if best.as_ref().is_none_or(|b| value.total < b.0) {
            best = Some((value.total, next.clone(), iteration));
            last_matches = graphs.matches;
        }
        if let Some(p) = previous {
            if p - value.total <= config.outer_tol * p.abs() {
                break;
            }
        }
        current = next;
    }

    let (_, positions, best_iteration) = best.expect("at least one iteration");
    diagnostics.best_iteration = best_iteration;
    Ok(FrameResult {
        frame: Frame::new(positions)?.with_frame_index(noisy.frame_index()),
        objective_trace: trace,
        diagnostics,
        matches: last_matches,
    })
}

/// Denoises every frame in order; frame `t > 0` uses the denoised frame
/// `t - 1` as its temporal reference.
pub fn denoise_sequence(noisy: &Sequence, config: &DenoiseConfig) -> Result<(Sequence, Vec<FrameResult>)> {
    if noisy.is_empty() {
        return Err(Error::invalid("sequence has no frames"));
    }
    let mut results: Vec<FrameResult> = Vec::with_capacity(noisy.len());
    for (t, frame) in noisy.frames().iter().enumerate() {
        let wrap = |e: Error| Error::Frame {
            frame: t,
            source: Box::new(e),
        };
        let reference = match results.last() {
            Some(prev) if config.lambda1 > 0.0 => Some(ReferenceFrame::prepare(&prev.frame, config).map_err(wrap)?),
            _ => None,
        };
        results.push(denoise_frame(frame, reference.as_ref(), config).map_err(wrap)?);
    }
    let mut out = Sequence::new(results.iter().map(|r| r.frame.clone()).collect())?;
    out.name = noisy.name.clone();
    out.units = noisy.units.clone();
    Ok((out, results))
}

/// Builds the spatio-temporal graph for `positions` with initial weights.
pub fn initial_graph(
    positions: &[Vec3],
    reference: Option<&ReferenceFrame>,
    config: &DenoiseConfig,
) -> Result<SpatioTemporalGraph> {
    let graphs = build_frame_graphs(positions, reference, config)?;
    let weights = if reference.is_some() {
        temporal_weight_init(&graphs.matches)
    } else {
        TemporalWeights::zeros(graphs.patches.len())
    };
    Ok(SpatioTemporalGraph {
        spatial: initial_spatial_weights(&graphs.pairs, &graphs.features)?,
        matches: graphs.matches,
        weights,
        reference_rows: graphs.reference_rows,
    })
}
