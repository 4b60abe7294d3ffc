//! Point-to-point and point-to-plane error metrics.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Frame, NeighborIndex};
use crate::optimizer::ObjectiveBreakdown;

/// Default GPSNR peak value.
pub const DEFAULT_PEAK: f64 = 5.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub frame: usize,
    pub mse_nn: f64,
    pub mse_index: Option<f64>,
    /// `f64::INFINITY` when the error is exactly zero; serialized as `"inf"`.
    #[serde(with = "decibels")]
    pub gpsnr_db: f64,
    #[serde(default)]
    pub objective_trace: Vec<ObjectiveBreakdown>,
}

mod decibels {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else {
            s.serialize_str(&v.to_string())
        }
    }

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Number(f64),
        Text(String),
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        match Repr::deserialize(d)? {
            Repr::Number(v) => Ok(v),
            Repr::Text(t) => t.parse().map_err(serde::de::Error::custom),
        }
    }
}

fn directed_nn_mse(from: &Frame, to: &NeighborIndex) -> f64 {
    let sum: f64 = from
        .positions()
        .iter()
        .map(|p| to.knn_with_distances(p, 1, None).expect("non-empty index")[0].0)
        .sum();
    sum / from.len() as f64
}

/// Symmetric nearest-neighbor MSE: the mean of both directed mean squared
/// nearest-neighbor distances.
pub fn mse_nn(a: &Frame, b: &Frame) -> Result<f64> {
    let ia = NeighborIndex::new(a.positions())?;
    let ib = NeighborIndex::new(b.positions())?;
    Ok(0.5 * (directed_nn_mse(a, &ib) + directed_nn_mse(b, &ia)))
}

/// Mean squared distance between same-index points.
pub fn mse_index(a: &Frame, b: &Frame) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch {
            expected: a.len(),
            actual: b.len(),
        });
    }
    let sum: f64 = a
        .positions()
        .iter()
        .zip(b.positions())
        .map(|(p, q)| (p - q).norm_squared())
        .sum();
    Ok(sum / a.len() as f64)
}

/// Point-to-plane PSNR of `test` against `reference`, using the reference
/// normals in both directions and the worse of the two directional MSEs.
pub fn gpsnr(test: &Frame, reference: &Frame, peak: f64) -> Result<f64> {
    if !(peak > 0.0) {
        return Err(Error::invalid("peak must be positive"));
    }
    let normals = reference
        .normals()
        .ok_or_else(|| Error::invalid("reference normals are required for GPSNR"))?;
    let ref_index = NeighborIndex::new(reference.positions())?;
    let test_index = NeighborIndex::new(test.positions())?;

    let forward: f64 = test
        .positions()
        .iter()
        .map(|p| {
            let j = ref_index.knn(p, 1, None).expect("non-empty")[0];
            (p - reference.positions()[j]).dot(&normals[j]).powi(2)
        })
        .sum::<f64>()
        / test.len() as f64;
    let backward: f64 = reference
        .positions()
        .iter()
        .zip(normals)
        .map(|(q, n)| {
            let j = test_index.knn(q, 1, None).expect("non-empty")[0];
            (q - test.positions()[j]).dot(n).powi(2)
        })
        .sum::<f64>()
        / reference.len() as f64;
    let mse = forward.max(backward);
    if mse == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(10.0 * (peak * peak / mse).log10())
}

/// All per-frame metrics of `test` against `clean`.
pub fn evaluate_frame(frame: usize, test: &Frame, clean: &Frame, peak: f64) -> Result<MetricsReport> {
    Ok(MetricsReport {
        frame,
        mse_nn: mse_nn(test, clean)?,
        mse_index: (test.len() == clean.len())
            .then(|| mse_index(test, clean))
            .transpose()?,
        gpsnr_db: gpsnr(test, clean, peak)?,
        objective_trace: Vec::new(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Vec3;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn frame(pts: Vec<Vec3>) -> Frame {
        Frame::new(pts).unwrap()
    }

    fn random(n: usize, seed: u64) -> Vec<Vec3> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n).map(|_| Vec3::new(rng.random(), rng.random(), rng.random())).collect()
    }

    #[test]
    fn mse_nn_cases() {
        let a = frame(random(50, 1));
        assert_eq!(mse_nn(&a, &a).unwrap(), 0.0);
        let p = frame(vec![Vec3::zeros()]);
        let q = frame(vec![Vec3::new(0.0, 2.0, 0.0)]);
        assert_eq!(mse_nn(&p, &q).unwrap(), 4.0);
    }

    #[test]
    fn mse_nn_matches_double_scan() {
        let a = frame(random(60, 2));
        let b = frame(random(45, 3));
        let scan = |x: &Frame, y: &Frame| {
            x.positions()
                .iter()
                .map(|p| y.positions().iter().map(|q| (p - q).norm_squared()).fold(f64::INFINITY, f64::min))
                .sum::<f64>()
                / x.len() as f64
        };
        let expected = 0.5 * (scan(&a, &b) + scan(&b, &a));
        assert!((mse_nn(&a, &b).unwrap() - expected).abs() < 1e-15);
        assert_eq!(mse_nn(&a, &b).unwrap(), mse_nn(&b, &a).unwrap());
    }

    #[test]
    fn mse_index_cases() {
        let pts = random(10, 4);
        let a = frame(pts.clone());
        assert_eq!(mse_index(&a, &a).unwrap(), 0.0);
        let mut moved = pts.clone();
        moved[3] += Vec3::x();
        assert!((mse_index(&a, &frame(moved)).unwrap() - 0.1).abs() < 1e-15);
        assert!(mse_index(&a, &frame(random(9, 4))).is_err());

        // well separated: nearest neighbor is the index twin
        let grid: Vec<Vec3> = (0..27)
            .map(|i| Vec3::new((i % 3) as f64, ((i / 3) % 3) as f64, (i / 9) as f64) * 10.0)
            .collect();
        let jitter: Vec<Vec3> = grid.iter().zip(random(27, 5)).map(|(g, r)| g + r * 0.1).collect();
        let (g, j) = (frame(grid), frame(jitter));
        assert!((mse_index(&g, &j).unwrap() - mse_nn(&g, &j).unwrap()).abs() < 1e-15);
    }

    fn plane(n: usize) -> Frame {
        let pts: Vec<Vec3> = (0..n * n)
            .map(|i| Vec3::new((i % n) as f64 * 0.1, (i / n) as f64 * 0.1, 0.0))
            .collect();
        frame(pts).with_normals(vec![Vec3::z(); n * n]).unwrap()
    }

    #[test]
    fn gpsnr_cases() {
        let r = plane(10);
        assert_eq!(gpsnr(&r, &r, 5.0).unwrap(), f64::INFINITY);
        let delta = 0.01;
        let up = frame(r.positions().iter().map(|p| p + Vec3::z() * delta).collect());
        let expected = 10.0 * (25.0 / (delta * delta)).log10();
        assert!((gpsnr(&up, &r, 5.0).unwrap() - expected).abs() < 1e-9);

        let side = frame(r.positions().iter().map(|p| p + Vec3::x() * delta).collect());
        assert!(gpsnr(&side, &r, 5.0).unwrap() > expected + 20.0);
        assert!(gpsnr(&up, &frame(r.positions().to_vec()), 5.0).is_err());
    }

    #[test]
    fn gpsnr_translation_invariant() {
        let r = plane(8);
        let test = frame(r.positions().iter().zip(random(64, 6)).map(|(p, e)| p + e * 0.02).collect());
        let t = Vec3::new(3.0, -1.0, 2.0);
        let r2 = frame(r.positions().iter().map(|p| p + t).collect())
            .with_normals(r.normals().unwrap().to_vec())
            .unwrap();
        let test2 = frame(test.positions().iter().map(|p| p + t).collect());
        let a = gpsnr(&test, &r, 5.0).unwrap();
        let b = gpsnr(&test2, &r2, 5.0).unwrap();
        assert!((a - b).abs() < 1e-9);
    }
}
