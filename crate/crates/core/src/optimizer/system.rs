//! The point-cloud subproblem: objective evaluation and the SPD linear system
//! `(I + l1 S^T W S + l2 S^T L S) U = U_noisy + l1 S^T W (C + P_ref) + l2 S^T L C`.

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Vec3;
use crate::graph::{combinatorial_laplacian, SparseGraph};

/// Fixed graph data for one point-cloud update, all in patch-row space.
#[derive(Debug, Clone)]
pub struct PatchSystem {
    /// Point behind each row (the sampling map).
    pub row_points: Vec<usize>,
    /// Center coordinate repeated for each row.
    pub row_centers: Vec<Vec3>,
    /// Reordered previous-frame relative coordinates.
    pub reference_rows: Vec<Vec3>,
    /// Diagonal temporal weights.
    pub row_weights: Vec<f64>,
    /// Intra-frame graph over rows.
    pub spatial: SparseGraph,
}

impl PatchSystem {
    /// A system with no temporal reference (zero weights).
    pub fn spatial_only(row_points: Vec<usize>, row_centers: Vec<Vec3>, spatial: SparseGraph) -> Self {
        let rows = row_points.len();
        PatchSystem {
            row_points,
            row_centers,
            reference_rows: vec![Vec3::zeros(); rows],
            row_weights: vec![0.0; rows],
            spatial,
        }
    }

    pub fn row_count(&self) -> usize {
        self.row_points.len()
    }

    fn check(&self, point_count: usize) -> Result<()> {
        let rows = self.row_count();
        for len in [
            self.row_centers.len(),
            self.reference_rows.len(),
            self.row_weights.len(),
            self.spatial.node_count(),
        ] {
            if len != rows {
                return Err(Error::DimensionMismatch {
                    expected: rows,
                    actual: len,
                });
            }
        }
        if let Some(&p) = self.row_points.iter().find(|&&p| p >= point_count) {
            return Err(Error::DimensionMismatch {
                expected: point_count,
                actual: p + 1,
            });
        }
        Ok(())
    }

    /// `P = S U - C`.
    pub fn relative_rows(&self, u: &[Vec3]) -> Vec<Vec3> {
        self.row_points
            .iter()
            .zip(&self.row_centers)
            .map(|(&i, c)| u[i] - c)
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObjectiveBreakdown {
    pub fidelity: f64,
    pub temporal: f64,
    pub spatial: f64,
    pub total: f64,
}

/// `|U - U_noisy|^2 + l1 tr((P - P_ref)^T W (P - P_ref)) + l2 tr(P^T L P)`.
pub fn objective(
    u: &[Vec3],
    noisy: &[Vec3],
    system: &PatchSystem,
    lambda1: f64,
    lambda2: f64,
) -> Result<ObjectiveBreakdown> {
    if u.len() != noisy.len() {
        return Err(Error::DimensionMismatch {
            expected: noisy.len(),
            actual: u.len(),
        });
    }
    system.check(u.len())?;
    let fidelity: f64 = u.iter().zip(noisy).map(|(a, b)| (a - b).norm_squared()).sum();
    let p = system.relative_rows(u);
    let temporal: f64 = p
        .iter()
        .zip(&system.reference_rows)
        .zip(&system.row_weights)
        .map(|((pr, qr), w)| w * (pr - qr).norm_squared())
        .sum();
    let spatial = combinatorial_laplacian(&system.spatial).trace_form(&p)?;
    Ok(ObjectiveBreakdown {
        fidelity,
        temporal,
        spatial,
        total: fidelity + lambda1 * temporal + lambda2 * spatial,
    })
}

/// Compressed sparse row matrix.
#[derive(Debug, Clone)]
pub struct CsrMatrix {
    n: usize,
    row_start: Vec<usize>,
    cols: Vec<usize>,
    values: Vec<f64>,
}

impl CsrMatrix {
    fn from_triplets(n: usize, mut triplets: Vec<(usize, usize, f64)>) -> Self {
        triplets.sort_unstable_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        let mut row_start = vec![0; n + 1];
        let mut cols = Vec::with_capacity(triplets.len());
        let mut values: Vec<f64> = Vec::with_capacity(triplets.len());
        let mut last = None;
        for (i, j, v) in triplets {
            if last == Some((i, j)) {
                *values.last_mut().expect("merged entry") += v;
            } else {
                cols.push(j);
                values.push(v);
                row_start[i + 1] += 1;
                last = Some((i, j));
            }
        }
        for i in 0..n {
            row_start[i + 1] += row_start[i];
        }
        CsrMatrix {
            n,
            row_start,
            cols,
            values,
        }
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn mul(&self, x: &[f64], out: &mut [f64]) {
        for (i, o) in out.iter_mut().enumerate() {
            let range = self.row_start[i]..self.row_start[i + 1];
            *o = self.cols[range.clone()]
                .iter()
                .zip(&self.values[range])
                .map(|(&j, v)| v * x[j])
                .sum();
        }
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n)
            .map(|i| {
                let range = self.row_start[i]..self.row_start[i + 1];
                self.cols[range.clone()]
                    .iter()
                    .zip(&self.values[range])
                    .filter(|(&j, _)| j == i)
                    .map(|(_, v)| *v)
                    .sum()
            })
            .collect()
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.n, self.n);
        for i in 0..self.n {
            for k in self.row_start[i]..self.row_start[i + 1] {
                m[(i, self.cols[k])] += self.values[k];
            }
        }
        m
    }
}

/// Builds the system matrix and right-hand side of the point-cloud update.
pub fn assemble(
    noisy: &[Vec3],
    system: &PatchSystem,
    lambda1: f64,
    lambda2: f64,
) -> Result<(CsrMatrix, Vec<Vec3>)> {
    let n = noisy.len();
    system.check(n)?;
    let mut triplets: Vec<(usize, usize, f64)> = (0..n).map(|i| (i, i, 1.0)).collect();
    let mut rhs = noisy.to_vec();

    if lambda1 != 0.0 {
        for (rho, &i) in system.row_points.iter().enumerate() {
            let w = system.row_weights[rho];
            if w != 0.0 {
                triplets.push((i, i, lambda1 * w));
                rhs[i] += (system.row_centers[rho] + system.reference_rows[rho]) * (lambda1 * w);
            }
        }
    }
    if lambda2 != 0.0 {
        let lc = combinatorial_laplacian(&system.spatial).apply_vec3(&system.row_centers)?;
        for (rho, &i) in system.row_points.iter().enumerate() {
            rhs[i] += lc[rho] * lambda2;
        }
        for &(a, b, w) in system.spatial.edges() {
            let (i, j) = (system.row_points[a], system.row_points[b]);
            // an edge between two rows of the same point cancels out
            if i != j {
                let v = lambda2 * w;
                triplets.extend([(i, i, v), (j, j, v), (i, j, -v), (j, i, -v)]);
            }
        }
    }
    Ok((CsrMatrix::from_triplets(n, triplets), rhs))
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Jacobi-preconditioned CG from `x0`. Returns the solution and the achieved
/// relative residual `|Ax - b| / |b|`.
pub fn conjugate_gradient(a: &CsrMatrix, b: &[f64], x0: &[f64], tol: f64, max_iters: usize) -> Result<Vec<f64>> {
    let n = a.size();
    let b_norm = dot(b, b).sqrt();
    if b_norm == 0.0 {
        return Ok(vec![0.0; n]);
    }
    let inv_diag: Vec<f64> = a.diagonal().iter().map(|d| 1.0 / d).collect();
    let mut x = x0.to_vec();
    let mut ax = vec![0.0; n];
    a.mul(&x, &mut ax);
    let mut r: Vec<f64> = b.iter().zip(&ax).map(|(bi, ai)| bi - ai).collect();
    let residual = |r: &[f64]| dot(r, r).sqrt() / b_norm;
    if residual(&r) <= tol {
        return Ok(x);
    }
    let mut z: Vec<f64> = r.iter().zip(&inv_diag).map(|(ri, d)| ri * d).collect();
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut ap = vec![0.0; n];
    for iteration in 1..=max_iters {
        a.mul(&p, &mut ap);
        let step = rz / dot(&p, &ap);
        for k in 0..n {
            x[k] += step * p[k];
            r[k] -= step * ap[k];
        }
        if residual(&r) <= tol {
            // confirm against the true residual
            a.mul(&x, &mut ax);
            let true_r: Vec<f64> = b.iter().zip(&ax).map(|(bi, ai)| bi - ai).collect();
            let achieved = residual(&true_r);
            if achieved <= tol {
                return Ok(x);
            }
            r = true_r;
        }
        if iteration == max_iters {
            return Err(Error::CgNotConverged {
                residual: residual(&r),
                iterations: max_iters,
            });
        }
        for k in 0..n {
            z[k] = r[k] * inv_diag[k];
        }
        let rz_next = dot(&r, &z);
        let beta = rz_next / rz;
        rz = rz_next;
        for k in 0..n {
            p[k] = z[k] + beta * p[k];
        }
    }
    unreachable!("loop returns on its last iteration")
}

/// Solves the point-cloud update per coordinate column by CG.
///
/// With both weights zero the system is the identity and the noisy input is
/// returned unchanged.
pub fn solve_point_cloud(
    noisy: &[Vec3],
    system: &PatchSystem,
    lambda1: f64,
    lambda2: f64,
    cg_tol: f64,
    cg_max_iters: usize,
) -> Result<Vec<Vec3>> {
    if lambda1 == 0.0 && lambda2 == 0.0 {
        system.check(noisy.len())?;
        return Ok(noisy.to_vec());
    }
    let (a, rhs) = assemble(noisy, system, lambda1, lambda2)?;
    let columns: Vec<Vec<f64>> = (0..3)
        .into_par_iter()
        .map(|axis| {
            let b: Vec<f64> = rhs.iter().map(|v| v[axis]).collect();
            let x0: Vec<f64> = noisy.iter().map(|v| v[axis]).collect();
            conjugate_gradient(&a, &b, &x0, cg_tol, cg_max_iters)
        })
        .collect::<Result<_>>()?;
    Ok((0..noisy.len())
        .map(|i| Vec3::new(columns[0][i], columns[1][i], columns[2][i]))
        .collect())
}
