//! Discrete manifold-to-manifold patch distance and temporal patch matching.
//!
//! A patch is summarized by the per-axis mean absolute random-walk Laplacian
//! response of its normal field over an epsilon-neighborhood graph. Two
//! patches sampled from the same surface have the same summary regardless of
//! how the points were sampled or labeled, which makes the distance usable for
//! matching patches across frames that share no point correspondence.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{NeighborIndex, Vec3};
use crate::graph::{build_epsilon_graph, random_walk_laplacian};
use crate::patches::{patch_epsilon, relative_coords, Patch, PatchSet};

/// Per-axis total variation of a patch's normals. All components are >= 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VariationVector(pub Vec3);

impl VariationVector {
    /// Scalar variation (the l1 sum over axes).
    pub fn total(&self) -> f64 {
        self.0.x + self.0.y + self.0.z
    }
}

/// `L_rw n` over the patch's epsilon graph, one row per member slot.
pub fn variation_rows(patch: &Patch, positions: &[Vec3], normals: &[Vec3], epsilon: f64) -> Result<Vec<Vec3>> {
    let pts = patch.positions(positions);
    let graph = build_epsilon_graph(&pts, epsilon)?;
    let n: Vec<Vec3> = patch.members().iter().map(|&i| normals[i]).collect();
    random_walk_laplacian(&graph).apply_vec3(&n)
}

fn mean_abs(rows: &[Vec3]) -> VariationVector {
    let sum = rows.iter().fold(Vec3::zeros(), |acc, r| acc + r.abs());
    VariationVector(sum / rows.len() as f64)
}

pub fn variation_measure(
    patch: &Patch,
    positions: &[Vec3],
    normals: &[Vec3],
    epsilon: f64,
) -> Result<VariationVector> {
    Ok(mean_abs(&variation_rows(patch, positions, normals, epsilon)?))
}

/// l2 norm of the per-axis absolute variation differences.
pub fn patch_distance(a: &VariationVector, b: &VariationVector) -> f64 {
    (a.0 - b.0).norm()
}

/// Everything matching needs to know about one patch.
#[derive(Debug, Clone)]
pub struct PatchDescriptor {
    pub epsilon: f64,
    pub rows: Vec<Vec3>,
    pub variation: VariationVector,
    pub relative: Vec<Vec3>,
}

pub fn describe_patch(patch: &Patch, positions: &[Vec3], normals: &[Vec3], c: f64) -> Result<PatchDescriptor> {
    let epsilon = patch_epsilon(patch, positions, c)?;
    let rows = variation_rows(patch, positions, normals, epsilon)?;
    Ok(PatchDescriptor {
        epsilon,
        variation: mean_abs(&rows),
        rows,
        relative: relative_coords(patch, positions),
    })
}

pub fn describe_patches(
    patches: &PatchSet,
    positions: &[Vec3],
    normals: &[Vec3],
    c: f64,
) -> Result<Vec<PatchDescriptor>> {
    patches
        .patches()
        .par_iter()
        .map(|p| describe_patch(p, positions, normals, c))
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct TemporalMatch {
    pub target_patch: usize,
    pub matched_patch: usize,
    pub distance: f64,
    /// For each target slot, the matched patch slot it corresponds to.
    pub point_map: Vec<usize>,
}

/// The previous (already denoised) frame's patches, ready for lookups.
#[derive(Debug, Clone)]
pub struct ReferencePatches {
    pub patches: PatchSet,
    pub descriptors: Vec<PatchDescriptor>,
    centers: NeighborIndex,
}

impl ReferencePatches {
    pub fn new(patches: PatchSet, positions: &[Vec3], normals: &[Vec3], c: f64) -> Result<Self> {
        if patches.is_empty() {
            return Err(Error::invalid("previous patch set is empty"));
        }
        let descriptors = describe_patches(&patches, positions, normals, c)?;
        let centers = NeighborIndex::new(&patches.center_positions(positions))?;
        Ok(ReferencePatches {
            patches,
            descriptors,
            centers,
        })
    }

    pub fn len(&self) -> usize {
        self.descriptors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.descriptors.is_empty()
    }
}

/// Finds the reference patch with the smallest distance among the `xi`
/// patches whose centers are nearest to `center`, then aligns points.
pub fn temporal_match(
    target_patch: usize,
    target: &PatchDescriptor,
    center: &Vec3,
    reference: &ReferencePatches,
    xi: usize,
    alpha: f64,
) -> Result<TemporalMatch> {
    if reference.is_empty() {
        return Err(Error::invalid("previous patch set is empty"));
    }
    if xi == 0 {
        return Err(Error::invalid("xi must be at least 1"));
    }
    let mut candidates = reference.centers.knn(center, xi.min(reference.len()), None)?;
    candidates.sort_unstable();
    let mut best = (f64::INFINITY, usize::MAX);
    for m in candidates {
        let d = patch_distance(&target.variation, &reference.descriptors[m].variation);
        if d < best.0 || best.1 == usize::MAX {
            best = (d, m);
        }
    }
    let matched = &reference.descriptors[best.1];
    Ok(TemporalMatch {
        target_patch,
        matched_patch: best.1,
        distance: best.0,
        point_map: point_correspondence(alpha, &target.rows, &matched.rows, &target.relative, &matched.relative),
    })
}

/// For each target slot `i`, the slot `j` minimizing
/// `alpha * |rows_t[i] - rows_m[j]|^2 + (1 - alpha) * |rel_t[i] - rel_m[j]|^2`.
/// Ties go to the smallest `j`; the map need not be injective.
pub fn point_correspondence(
    alpha: f64,
    rows_target: &[Vec3],
    rows_matched: &[Vec3],
    rel_target: &[Vec3],
    rel_matched: &[Vec3],
) -> Vec<usize> {
    rows_target
        .iter()
        .zip(rel_target)
        .map(|(rt, vt)| {
            let mut best = (f64::INFINITY, 0);
            for (j, (rm, vm)) in rows_matched.iter().zip(rel_matched).enumerate() {
                let d = alpha * (rt - rm).norm_squared() + (1.0 - alpha) * (vt - vm).norm_squared();
                if d < best.0 {
                    best = (d, j);
                }
            }
            best.1
        })
        .collect()
}
