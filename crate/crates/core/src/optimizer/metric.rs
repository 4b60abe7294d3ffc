//! Mahalanobis metric learning for intra-frame edge weights.
//!
//! Minimizes `F(R) = sum_ij exp(-|R (f_i - f_j)|^2) d_ij` over the factor `R`
//! of `M = R^T R`, constrained to `tr(R) <= C` and non-negative diagonal, by
//! fixed-step proximal gradient.

use nalgebra::{Matrix6, Vector6};
use rayon::prelude::*;

use crate::error::{Error, Result};

/// One spatially connected pair: feature difference and squared difference of
/// the graph signal at the two ends.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricPair {
    pub feature_diff: Vector6<f64>,
    pub signal_diff_sq: f64,
}

/// Pairs per parallel work unit. Partial sums are reduced in chunk order so
/// results do not depend on the thread count.
const CHUNK: usize = 4096;

pub fn metric_objective(pairs: &[MetricPair], r: &Matrix6<f64>) -> f64 {
    let partial: Vec<f64> = pairs
        .par_chunks(CHUNK)
        .map(|chunk| {
            chunk
                .iter()
                .map(|p| (-(r * p.feature_diff).norm_squared()).exp() * p.signal_diff_sq)
                .sum::<f64>()
        })
        .collect();
    partial.iter().sum()
}

/// `-2 sum_ij R δ δ^T exp(-|R δ|^2) d_ij`.
pub fn metric_gradient(pairs: &[MetricPair], r: &Matrix6<f64>) -> Matrix6<f64> {
    // accumulate sum of s * δ δ^T, then multiply by R once
    let partial: Vec<Matrix6<f64>> = pairs
        .par_chunks(CHUNK)
        .map(|chunk| {
            chunk.iter().fold(Matrix6::zeros(), |acc, p| {
                let s = (-(r * p.feature_diff).norm_squared()).exp() * p.signal_diff_sq;
                acc + p.feature_diff * p.feature_diff.transpose() * s
            })
        })
        .collect();
    let scatter = partial.iter().fold(Matrix6::zeros(), |acc, m| acc + m);
    r * scatter * -2.0
}

/// Projection onto `{tr(R) <= C, r_ii >= 0}`: clamp the diagonal at zero,
/// then if the trace still exceeds `C` shrink the diagonal proportionally.
pub fn project(v: &Matrix6<f64>, trace_bound: f64) -> Matrix6<f64> {
    let mut g = *v;
    for i in 0..6 {
        g[(i, i)] = g[(i, i)].max(0.0);
    }
    let trace = g.trace();
    if trace > trace_bound {
        let scale = trace_bound / trace;
        for i in 0..6 {
            g[(i, i)] *= scale;
        }
    }
    g
}

#[derive(Debug, Clone)]
pub struct LearnedMetric {
    pub metric: Matrix6<f64>,
    pub factor: Matrix6<f64>,
    /// Objective at the start and after every accepted iterate.
    pub objective_trace: Vec<f64>,
    pub iterations: usize,
}

impl LearnedMetric {
    pub fn trace_factor(&self) -> f64 {
        self.factor.trace()
    }

    pub fn trace_metric(&self) -> f64 {
        self.metric.trace()
    }
}

#[derive(Debug, Clone, Copy)]
pub struct ProximalGradient {
    pub trace_bound: f64,
    pub step: f64,
    pub max_iters: usize,
    pub tol: f64,
}

impl ProximalGradient {
    pub fn initial_factor(&self) -> Matrix6<f64> {
        Matrix6::identity() * (self.trace_bound / 6.0)
    }

    /// Runs PG from `(C/6) I`. Iterates that raise the objective are not
    /// accepted; three such iterates in a row abort with an error.
    pub fn learn(&self, pairs: &[MetricPair]) -> Result<LearnedMetric> {
        if pairs.is_empty() {
            return Err(Error::invalid("metric learning needs at least one pair"));
        }
        if !(self.trace_bound > 0.0) {
            return Err(Error::invalid("trace bound must be positive"));
        }
        let mut r = self.initial_factor();
        let mut f = metric_objective(pairs, &r);
        let mut best = (f, r);
        let mut trace = vec![f];
        let mut all = vec![f];
        let mut increases = 0;
        let mut iterations = 0;
        for _ in 0..self.max_iters {
            iterations += 1;
            let candidate = project(&(r - metric_gradient(pairs, &r) * self.step), self.trace_bound);
            let f_next = metric_objective(pairs, &candidate);
            all.push(f_next);
            if f_next > f {
                increases += 1;
                if increases >= 3 {
                    return Err(Error::StepSizeTooLarge { trace: all });
                }
            } else {
                increases = 0;
            }
            if f_next <= best.0 {
                best = (f_next, candidate);
                trace.push(f_next);
            }
            let decrease = f - f_next;
            r = candidate;
            let previous = f;
            f = f_next;
            if decrease >= 0.0 && decrease <= self.tol * previous.abs() {
                break;
            }
        }
        let factor = best.1;
        Ok(LearnedMetric {
            metric: factor.transpose() * factor,
            factor,
            objective_trace: trace,
            iterations,
        })
    }
}
