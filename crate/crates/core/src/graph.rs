//! Sparse weighted graphs and their Laplacians.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::geometry::{NeighborIndex, Vec3};

/// Undirected weighted graph without self-loops.
///
/// Edges are kept as `(i, j, w)` with `i < j`, sorted; a symmetric adjacency
/// list is built for operator application.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseGraph {
    node_count: usize,
    edges: Vec<(usize, usize, f64)>,
    adjacency: Vec<Vec<(usize, f64)>>,
}

impl SparseGraph {
    /// Builds a graph from an undirected edge list. Endpoint order does not
    /// matter; self-loops, duplicates and negative or non-finite weights are
    /// rejected.
    pub fn new(node_count: usize, edges: impl IntoIterator<Item = (usize, usize, f64)>) -> Result<Self> {
        let mut normalized = Vec::new();
        for (a, b, w) in edges {
            if a == b {
                return Err(Error::InvalidGraph(format!("self-loop at node {a}")));
            }
            if a >= node_count || b >= node_count {
                return Err(Error::InvalidGraph(format!(
                    "edge ({a}, {b}) out of range for {node_count} nodes"
                )));
            }
            if !(w.is_finite() && w >= 0.0) {
                return Err(Error::InvalidGraph(format!("edge ({a}, {b}) has weight {w}")));
            }
            normalized.push((a.min(b), a.max(b), w));
        }
        normalized.sort_by(|x, y| (x.0, x.1).cmp(&(y.0, y.1)));
        if let Some(w) = normalized.windows(2).find(|w| (w[0].0, w[0].1) == (w[1].0, w[1].1)) {
            return Err(Error::InvalidGraph(format!("duplicate edge ({}, {})", w[0].0, w[0].1)));
        }
        let mut adjacency = vec![Vec::new(); node_count];
        for &(i, j, w) in &normalized {
            adjacency[i].push((j, w));
            adjacency[j].push((i, w));
        }
        for row in &mut adjacency {
            row.sort_by_key(|&(j, _)| j);
        }
        Ok(SparseGraph {
            node_count,
            edges: normalized,
            adjacency,
        })
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn edges(&self) -> &[(usize, usize, f64)] {
        &self.edges
    }

    pub fn neighbors(&self, i: usize) -> &[(usize, f64)] {
        &self.adjacency[i]
    }

    pub fn degrees(&self) -> Vec<f64> {
        self.adjacency
            .iter()
            .map(|row| row.iter().map(|&(_, w)| w).sum())
            .collect()
    }

    pub fn to_dense_adjacency(&self) -> DMatrix<f64> {
        let mut a = DMatrix::zeros(self.node_count, self.node_count);
        for &(i, j, w) in &self.edges {
            a[(i, j)] = w;
            a[(j, i)] = w;
        }
        a
    }
}

/// Unweighted graph joining points strictly closer than `epsilon`.
pub fn build_epsilon_graph(points: &[Vec3], epsilon: f64) -> Result<SparseGraph> {
    if !epsilon.is_finite() || epsilon <= 0.0 {
        return Err(Error::invalid(format!("epsilon must be positive and finite, got {epsilon}")));
    }
    let index = NeighborIndex::new(points)?;
    let mut edges = Vec::new();
    for (i, p) in points.iter().enumerate() {
        for j in index.within_radius(p, epsilon, Some(i)) {
            // coincident points are not neighbors
            if j > i && points[j] != *p {
                edges.push((i, j, 1.0));
            }
        }
    }
    SparseGraph::new(points.len(), edges)
}

fn check_rows(expected: usize, actual: usize) -> Result<()> {
    if expected != actual {
        return Err(Error::DimensionMismatch { expected, actual });
    }
    Ok(())
}

/// Combinatorial Laplacian `L = D - A` kept in sparse form.
#[derive(Debug, Clone)]
pub struct Laplacian<'g> {
    graph: &'g SparseGraph,
    degrees: Vec<f64>,
}

pub fn combinatorial_laplacian(graph: &SparseGraph) -> Laplacian<'_> {
    Laplacian {
        degrees: graph.degrees(),
        graph,
    }
}

impl Laplacian<'_> {
    pub fn size(&self) -> usize {
        self.graph.node_count
    }

    /// `L x` for a single column.
    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_rows(self.size(), x.len())?;
        Ok((0..self.size())
            .map(|i| {
                self.graph.adjacency[i]
                    .iter()
                    .fold(self.degrees[i] * x[i], |acc, &(j, w)| acc - w * x[j])
            })
            .collect())
    }

    /// `L X` row-wise for 3-vector signals.
    pub fn apply_vec3(&self, x: &[Vec3]) -> Result<Vec<Vec3>> {
        check_rows(self.size(), x.len())?;
        Ok((0..self.size())
            .map(|i| {
                self.graph.adjacency[i]
                    .iter()
                    .fold(x[i] * self.degrees[i], |acc, &(j, w)| acc - x[j] * w)
            })
            .collect())
    }

    /// `x^T L x = sum over edges of w (x_i - x_j)^2`.
    pub fn quadratic_form(&self, x: &[f64]) -> Result<f64> {
        check_rows(self.size(), x.len())?;
        Ok(self
            .graph
            .edges
            .iter()
            .map(|&(i, j, w)| w * (x[i] - x[j]).powi(2))
            .sum())
    }

    /// `tr(X^T L X)` for 3-vector rows.
    pub fn trace_form(&self, x: &[Vec3]) -> Result<f64> {
        check_rows(self.size(), x.len())?;
        Ok(self
            .graph
            .edges
            .iter()
            .map(|&(i, j, w)| w * (x[i] - x[j]).norm_squared())
            .sum())
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut l = -self.graph.to_dense_adjacency();
        for i in 0..self.size() {
            l[(i, i)] = self.degrees[i];
        }
        l
    }
}

/// Random-walk Laplacian `L_rw = I - D^{-1} A`.
///
/// Rows of isolated nodes (zero degree) are all zero, so the operator maps
/// constants to zero everywhere.
#[derive(Debug, Clone)]
pub struct RwLaplacian<'g> {
    graph: &'g SparseGraph,
    degrees: Vec<f64>,
}

pub fn random_walk_laplacian(graph: &SparseGraph) -> RwLaplacian<'_> {
    RwLaplacian {
        degrees: graph.degrees(),
        graph,
    }
}

impl RwLaplacian<'_> {
    pub fn size(&self) -> usize {
        self.graph.node_count
    }

    pub fn degrees(&self) -> &[f64] {
        &self.degrees
    }

    /// Row `i` is `sum_j (a_ij / d_ii) (f_i - f_j)`, column by column.
    pub fn apply(&self, signal: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        check_rows(self.size(), signal.nrows())?;
        let mut out = DMatrix::zeros(signal.nrows(), signal.ncols());
        for i in 0..self.size() {
            let d = self.degrees[i];
            if d <= 0.0 {
                continue;
            }
            for &(j, w) in &self.graph.adjacency[i] {
                let s = w / d;
                for c in 0..signal.ncols() {
                    out[(i, c)] += s * (signal[(i, c)] - signal[(j, c)]);
                }
            }
        }
        Ok(out)
    }

    pub fn apply_vec3(&self, signal: &[Vec3]) -> Result<Vec<Vec3>> {
        check_rows(self.size(), signal.len())?;
        Ok((0..self.size())
            .map(|i| {
                let d = self.degrees[i];
                if d <= 0.0 {
                    return Vec3::zeros();
                }
                self.graph.adjacency[i]
                    .iter()
                    .fold(Vec3::zeros(), |acc, &(j, w)| acc + (signal[i] - signal[j]) * (w / d))
            })
            .collect())
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let n = self.size();
        let mut m = DMatrix::zeros(n, n);
        for i in 0..n {
            let d = self.degrees[i];
            if d <= 0.0 {
                continue;
            }
            m[(i, i)] = 1.0;
            for &(j, w) in &self.graph.adjacency[i] {
                m[(i, j)] -= w / d;
            }
        }
        m
    }
}
