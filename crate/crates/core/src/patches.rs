//! Patch decomposition of a frame: farthest-point-sampled centers, each with
//! its K nearest neighbors.
//!
//! A patch row is addressed as `patch * (k + 1) + slot`; slot 0 is always the
//! center. The sampling map from rows to points is just `members`, so no
//! sampling or center matrix is materialized.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{farthest_point_sampling, NeighborIndex, Vec3};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Patch {
    /// Center first, then the K nearest neighbors in ascending distance.
    members: Vec<usize>,
}

impl Patch {
    pub fn new(members: Vec<usize>) -> Result<Self> {
        if members.is_empty() {
            return Err(Error::invalid("patch needs at least a center"));
        }
        let mut sorted = members.clone();
        sorted.sort_unstable();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::invalid("patch members must be distinct"));
        }
        Ok(Patch { members })
    }

    pub fn center(&self) -> usize {
        self.members[0]
    }

    pub fn members(&self) -> &[usize] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn positions(&self, positions: &[Vec3]) -> Vec<Vec3> {
        self.members.iter().map(|&i| positions[i]).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PatchSet {
    patches: Vec<Patch>,
    k: usize,
    point_count: usize,
}

impl PatchSet {
    pub fn patches(&self) -> &[Patch] {
        &self.patches
    }

    pub fn len(&self) -> usize {
        self.patches.len()
    }

    pub fn is_empty(&self) -> bool {
        self.patches.is_empty()
    }

    /// Neighbors per patch (rows per patch is `k + 1`).
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn rows_per_patch(&self) -> usize {
        self.k + 1
    }

    pub fn row_count(&self) -> usize {
        self.patches.len() * (self.k + 1)
    }

    pub fn point_count(&self) -> usize {
        self.point_count
    }

    /// Point index behind every patch row.
    pub fn row_points(&self) -> Vec<usize> {
        self.patches
            .iter()
            .flat_map(|p| p.members.iter().copied())
            .collect()
    }

    pub fn centers(&self) -> Vec<usize> {
        self.patches.iter().map(Patch::center).collect()
    }

    pub fn center_positions(&self, positions: &[Vec3]) -> Vec<Vec3> {
        self.patches.iter().map(|p| positions[p.center()]).collect()
    }

    /// `S U - C` stacked over all patches.
    pub fn relative_rows(&self, positions: &[Vec3]) -> Vec<Vec3> {
        self.patches
            .iter()
            .flat_map(|p| relative_coords(p, positions))
            .collect()
    }
}

/// Number of patches for `n` points under the `ratio * N` rule (at least 1).
pub fn patch_count(n: usize, ratio: f64) -> usize {
    ((ratio * n as f64).round() as usize).clamp(1, n.max(1))
}

pub fn build_patches(index: &NeighborIndex, m: usize, k: usize, seed: u64) -> Result<PatchSet> {
    let n = index.len();
    if k + 1 > n {
        return Err(Error::KTooLarge {
            k,
            available: n.saturating_sub(1),
        });
    }
    let centers = farthest_point_sampling(index.points(), m, seed)?;
    let patches = centers
        .par_iter()
        .map(|&c| {
            let mut members = Vec::with_capacity(k + 1);
            members.push(c);
            members.extend(index.knn_of(c, k)?);
            Ok(Patch { members })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(PatchSet {
        patches,
        k,
        point_count: n,
    })
}

/// Member positions relative to the center; row 0 is zero.
pub fn relative_coords(patch: &Patch, positions: &[Vec3]) -> Vec<Vec3> {
    let c = positions[patch.center()];
    patch.members.iter().map(|&i| positions[i] - c).collect()
}

/// Mean nearest-neighbor spacing inside the patch, times `c`.
pub fn patch_epsilon(patch: &Patch, positions: &[Vec3], c: f64) -> Result<f64> {
    if patch.len() < 2 {
        return Err(Error::NeedTwoPoints);
    }
    let pts = patch.positions(positions);
    let sum: f64 = pts
        .iter()
        .enumerate()
        .map(|(i, p)| {
            pts.iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .map(|(_, q)| (q - p).norm_squared())
                .fold(f64::INFINITY, f64::min)
                .sqrt()
        })
        .sum();
    Ok(c * sum / pts.len() as f64)
}
