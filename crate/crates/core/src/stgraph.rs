//! Spatio-temporal graph over patch rows: intra-frame edges between adjacent
//! patches with feature-based weights, and patch-level temporal weights.

use nalgebra::{Matrix6, SymmetricEigen, Vector6};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{NeighborIndex, Vec3, UNIT_TOLERANCE};
use crate::graph::SparseGraph;
use crate::m2m::TemporalMatch;
use crate::patches::{relative_coords, PatchSet};

/// `(x, y, z, n_x, n_y, n_z)` of one patch row.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeatureVector(pub Vector6<f64>);

impl FeatureVector {
    pub fn new(position: &Vec3, normal: &Vec3) -> Result<Self> {
        if (normal.norm() - 1.0).abs() > UNIT_TOLERANCE {
            return Err(Error::invalid("feature normal is not unit length"));
        }
        Ok(FeatureVector(Vector6::new(
            position.x, position.y, position.z, normal.x, normal.y, normal.z,
        )))
    }
}

pub fn row_features(patches: &PatchSet, positions: &[Vec3], normals: &[Vec3]) -> Result<Vec<FeatureVector>> {
    patches
        .row_points()
        .into_iter()
        .map(|i| FeatureVector::new(&positions[i], &normals[i]))
        .collect()
}

/// Row pairs joining each patch to its `k_s` nearest patches (by center).
///
/// Every row of patch `l` is paired with the row of the adjacent patch whose
/// center-relative coordinate is closest. Pairs are unordered `(a, b)` with
/// `a < b`, sorted and deduplicated.
pub fn spatial_connectivity(patches: &PatchSet, positions: &[Vec3], k_s: usize) -> Result<Vec<(usize, usize)>> {
    let m = patches.len();
    if k_s >= m {
        return Err(Error::invalid(format!("k_s = {k_s} must be below the patch count {m}")));
    }
    let rows = patches.rows_per_patch();
    let centers = NeighborIndex::new(&patches.center_positions(positions))?;
    let relative: Vec<Vec<Vec3>> = patches
        .patches()
        .iter()
        .map(|p| relative_coords(p, positions))
        .collect();

    let per_patch: Vec<Vec<(usize, usize)>> = (0..m)
        .into_par_iter()
        .map(|l| {
            let adjacent = centers.knn_of(l, k_s)?;
            let mut pairs = Vec::with_capacity(k_s * rows);
            for m in adjacent {
                for (r, vl) in relative[l].iter().enumerate() {
                    let mut best = (f64::INFINITY, 0);
                    for (s, vm) in relative[m].iter().enumerate() {
                        let d = (vl - vm).norm_squared();
                        if d < best.0 {
                            best = (d, s);
                        }
                    }
                    let (a, b) = (l * rows + r, m * rows + best.1);
                    pairs.push((a.min(b), a.max(b)));
                }
            }
            Ok(pairs)
        })
        .collect::<Result<_>>()?;
    let mut pairs: Vec<(usize, usize)> = per_patch.into_iter().flatten().collect();
    pairs.sort_unstable();
    pairs.dedup();
    Ok(pairs)
}

fn gaussian_graph<F>(node_count: usize, pairs: &[(usize, usize)], features: &[FeatureVector], distance: F) -> Result<SparseGraph>
where
    F: Fn(&Vector6<f64>) -> f64 + Sync,
{
    if features.len() != node_count {
        return Err(Error::DimensionMismatch {
            expected: node_count,
            actual: features.len(),
        });
    }
    let edges: Vec<(usize, usize, f64)> = pairs
        .par_iter()
        .map(|&(i, j)| (i, j, (-distance(&(features[i].0 - features[j].0))).exp()))
        .collect();
    SparseGraph::new(node_count, edges)
}

/// `a_ij = exp(-|f_i - f_j|^2)`.
pub fn initial_spatial_weights(pairs: &[(usize, usize)], features: &[FeatureVector]) -> Result<SparseGraph> {
    gaussian_graph(features.len(), pairs, features, |d| d.norm_squared())
}

/// Smallest eigenvalue allowed for a metric before it counts as indefinite.
pub const PSD_TOLERANCE: f64 = 1e-9;

pub fn check_psd(metric: &Matrix6<f64>) -> Result<()> {
    if (metric - metric.transpose()).abs().max() > 1e-12 * metric.abs().max().max(1.0) {
        return Err(Error::invalid("metric is not symmetric"));
    }
    let min = SymmetricEigen::new(*metric).eigenvalues.min();
    if min < -PSD_TOLERANCE {
        return Err(Error::NotPsd { min_eigenvalue: min });
    }
    Ok(())
}

/// `a_ij = exp(-(f_i - f_j)^T M (f_i - f_j))` for a symmetric PSD metric.
pub fn weighted_spatial_graph(
    pairs: &[(usize, usize)],
    features: &[FeatureVector],
    metric: &Matrix6<f64>,
) -> Result<SparseGraph> {
    check_psd(metric)?;
    gaussian_graph(features.len(), pairs, features, |d| d.dot(&(metric * d)))
}

/// One weight per patch pair, shared by every row of the target patch.
#[derive(Debug, Clone, PartialEq)]
pub struct TemporalWeights(Vec<f64>);

impl TemporalWeights {
    pub fn new(w: Vec<f64>) -> Result<Self> {
        if let Some(x) = w.iter().find(|x| !(0.0..=1.0).contains(*x)) {
            return Err(Error::invalid(format!("temporal weight {x} outside [0, 1]")));
        }
        Ok(TemporalWeights(w))
    }

    pub fn zeros(m: usize) -> Self {
        TemporalWeights(vec![0.0; m])
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Diagonal of the row-space weight matrix.
    pub fn expand(&self, rows_per_patch: usize) -> Vec<f64> {
        self.0
            .iter()
            .flat_map(|&w| std::iter::repeat_n(w, rows_per_patch))
            .collect()
    }
}

/// `w_l = exp(-d_l)` from each match's patch distance.
pub fn temporal_weight_init(matches: &[TemporalMatch]) -> TemporalWeights {
    TemporalWeights(matches.iter().map(|m| (-m.distance).exp()).collect())
}

/// Matched patch rows gathered into target slot order.
pub fn reorder_matched_patch(matched: &TemporalMatch, prev_relative: &[Vec3]) -> Vec<Vec3> {
    matched.point_map.iter().map(|&j| prev_relative[j]).collect()
}

/// Intra-frame graph and temporal correspondence for one frame.
#[derive(Debug, Clone)]
pub struct SpatioTemporalGraph {
    pub spatial: SparseGraph,
    pub matches: Vec<TemporalMatch>,
    pub weights: TemporalWeights,
    /// Reordered previous-frame relative coordinates, stacked in row space.
    pub reference_rows: Vec<Vec3>,
}
