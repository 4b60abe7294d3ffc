//! Gaussian noise injection and synthetic deforming-surface sequences.
//!
//! Surfaces are registered by name and evaluated over a square parameter
//! domain; every frame draws a fresh irregular sampling, so consecutive
//! frames share no point correspondence.

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{rng_from_seed, Frame, Sequence, Vec3};

/// A parametric surface deforming over time.
///
/// `sample` maps `(u, v)` in `[-1, 1]^2` and a deformation phase to a point
/// and its unit normal.
pub trait Surface: Send + Sync {
    fn name(&self) -> &'static str;
    fn sample(&self, u: f64, v: f64, amplitude: f64, phase: f64) -> (Vec3, Vec3);
}

/// `z = amplitude * sin(phase)`: a rigidly bobbing plane.
pub struct Plane;

impl Surface for Plane {
    fn name(&self) -> &'static str {
        "plane"
    }

    fn sample(&self, u: f64, v: f64, amplitude: f64, phase: f64) -> (Vec3, Vec3) {
        (Vec3::new(u, v, amplitude * phase.sin()), Vec3::z())
    }
}

/// Cap of a unit-radius sphere centered at the origin whose radius
/// breathes as `1 + amplitude * sin(phase)`.
pub struct SphereCap;

impl Surface for SphereCap {
    fn name(&self) -> &'static str {
        "sphere-cap"
    }

    fn sample(&self, u: f64, v: f64, amplitude: f64, phase: f64) -> (Vec3, Vec3) {
        // (u, v) -> polar angle up to 60 degrees, full azimuth
        let theta = (u + 1.0) * 0.5 * (PI / 3.0);
        let azimuth = (v + 1.0) * PI;
        let dir = Vec3::new(theta.sin() * azimuth.cos(), theta.sin() * azimuth.sin(), theta.cos());
        let radius = 1.0 + amplitude * phase.sin();
        (dir * radius, dir)
    }
}

/// `z = amplitude * sin(pi u + phase) * cos(pi v / 2)`: a travelling wave.
pub struct SinusoidSheet;

impl Surface for SinusoidSheet {
    fn name(&self) -> &'static str {
        "sinusoid-sheet"
    }

    fn sample(&self, u: f64, v: f64, amplitude: f64, phase: f64) -> (Vec3, Vec3) {
        let (su, cu) = (PI * u + phase).sin_cos();
        let (sv, cv) = (0.5 * PI * v).sin_cos();
        let z = amplitude * su * cv;
        let dz_du = amplitude * PI * cu * cv;
        let dz_dv = -amplitude * 0.5 * PI * su * sv;
        (Vec3::new(u, v, z), Vec3::new(-dz_du, -dz_dv, 1.0).normalize())
    }
}

/// `z = amplitude * exp(-(u^2 + v^2) / (2 * 0.25^2))`: a single bump whose
/// curvature grows with the amplitude. The phase is ignored.
pub struct GaussianBump;

impl GaussianBump {
    pub const WIDTH: f64 = 0.25;
}

impl Surface for GaussianBump {
    fn name(&self) -> &'static str {
        "gaussian-bump"
    }

    fn sample(&self, u: f64, v: f64, amplitude: f64, _phase: f64) -> (Vec3, Vec3) {
        let s2 = Self::WIDTH * Self::WIDTH;
        let z = amplitude * (-(u * u + v * v) / (2.0 * s2)).exp();
        let (dz_du, dz_dv) = (-u / s2 * z, -v / s2 * z);
        (Vec3::new(u, v, z), Vec3::new(-dz_du, -dz_dv, 1.0).normalize())
    }
}

const SURFACES: &[&dyn Surface] = &[&Plane, &SphereCap, &SinusoidSheet, &GaussianBump];

pub fn surface_names() -> Vec<&'static str> {
    SURFACES.iter().map(|s| s.name()).collect()
}

pub fn surface_by_name(name: &str) -> Result<&'static dyn Surface> {
    SURFACES
        .iter()
        .copied()
        .find(|s| s.name() == name)
        .ok_or_else(|| Error::invalid(format!("unknown surface `{name}` (known: {})", surface_names().join(", "))))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub surface: String,
    pub points_per_frame: usize,
    pub frames: usize,
    pub amplitude: f64,
    /// Deformation phase advance per frame, radians.
    pub phase_step: f64,
    /// Frame `t` is sampled with seed `seed + t`.
    pub seed: u64,
}

/// Clean frames with analytic normals attached.
pub fn generate_sequence(spec: &SyntheticSpec) -> Result<Sequence> {
    let surface = surface_by_name(&spec.surface)?;
    if spec.points_per_frame == 0 || spec.frames == 0 {
        return Err(Error::invalid("points_per_frame and frames must be positive"));
    }
    let frames = (0..spec.frames)
        .map(|t| {
            sample_surface(
                surface,
                spec.points_per_frame,
                spec.amplitude,
                t as f64 * spec.phase_step,
                spec.seed.wrapping_add(t as u64),
            )
            .map(|f| f.with_frame_index(t))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut seq = Sequence::new(frames)?;
    seq.name = spec.surface.clone();
    Ok(seq)
}

/// `n` uniformly random parameter samples of `surface`.
pub fn sample_surface(surface: &dyn Surface, n: usize, amplitude: f64, phase: f64, seed: u64) -> Result<Frame> {
    let mut rng = rng_from_seed(seed);
    let (positions, normals): (Vec<Vec3>, Vec<Vec3>) = (0..n)
        .map(|_| {
            let u = rng.random_range(-1.0..1.0);
            let v = rng.random_range(-1.0..1.0);
            surface.sample(u, v, amplitude, phase)
        })
        .unzip();
    Frame::new(positions)?.with_normals(normals)
}

/// Adds i.i.d. zero-mean Gaussian noise with standard deviation `sigma` to
/// every coordinate. Normals are dropped.
pub fn add_gaussian_noise(frame: &Frame, sigma: f64, seed: u64) -> Result<Frame> {
    if !(sigma >= 0.0 && sigma.is_finite()) {
        return Err(Error::invalid(format!("sigma {sigma} must be non-negative")));
    }
    let out = if sigma == 0.0 {
        frame.positions().to_vec()
    } else {
        let normal = Normal::new(0.0, sigma).map_err(|e| Error::invalid(e.to_string()))?;
        let mut rng = rng_from_seed(seed);
        frame
            .positions()
            .iter()
            .map(|p| p + Vec3::from_fn(|_, _| normal.sample(&mut rng)))
            .collect()
    };
    Ok(Frame::new(out)?.with_frame_index(frame.frame_index()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(surface: &str, amplitude: f64) -> SyntheticSpec {
        SyntheticSpec {
            surface: surface.into(),
            points_per_frame: 300,
            frames: 3,
            amplitude,
            phase_step: 0.4,
            seed: 10,
        }
    }

    #[test]
    fn plane_normals_are_up() {
        let seq = generate_sequence(&spec("plane", 0.2)).unwrap();
        for f in seq.frames() {
            assert!(f.normals().unwrap().iter().all(|n| *n == Vec3::z()));
        }
    }

    #[test]
    fn zero_amplitude_is_static_but_resampled() {
        let seq = generate_sequence(&spec("sinusoid-sheet", 0.0)).unwrap();
        let f = seq.frames();
        assert!(f.iter().all(|fr| fr.positions().iter().all(|p| p.z == 0.0)));
        assert_ne!(f[0].positions(), f[1].positions());
    }

    #[test]
    fn sphere_normals_are_radial() {
        let seq = generate_sequence(&spec("sphere-cap", 0.1)).unwrap();
        for f in seq.frames() {
            for (p, n) in f.positions().iter().zip(f.normals().unwrap()) {
                assert!((p.normalize() - n).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn analytic_normals_are_perpendicular_to_surface() {
        let h = 1e-6;
        for s in [&SinusoidSheet as &dyn Surface, &GaussianBump] {
            let (p, n) = s.sample(0.3, -0.2, 0.4, 0.7);
            let (pu, _) = s.sample(0.3 + h, -0.2, 0.4, 0.7);
            let (pv, _) = s.sample(0.3, -0.2 + h, 0.4, 0.7);
            assert!(((pu - p) / h).dot(&n).abs() < 1e-5);
            assert!(((pv - p) / h).dot(&n).abs() < 1e-5);
        }
    }

    #[test]
    fn generation_is_reproducible() {
        let s = spec("sinusoid-sheet", 0.3);
        assert_eq!(generate_sequence(&s).unwrap(), generate_sequence(&s).unwrap());
        assert!(generate_sequence(&spec("torus", 0.1)).is_err());
    }

    #[test]
    fn noise_cases() {
        let clean = generate_sequence(&spec("plane", 0.0)).unwrap().frames()[0].clone();
        let same = add_gaussian_noise(&clean, 0.0, 1).unwrap();
        assert_eq!(same.positions(), clean.positions());
        assert!(same.normals().is_none());
        assert_eq!(add_gaussian_noise(&clean, 0.1, 4).unwrap(), add_gaussian_noise(&clean, 0.1, 4).unwrap());
        assert!(add_gaussian_noise(&clean, -0.1, 4).is_err());
    }

    #[test]
    fn noise_has_requested_deviation() {
        let big = SyntheticSpec {
            points_per_frame: 10_000,
            frames: 1,
            ..spec("plane", 0.0)
        };
        let clean = generate_sequence(&big).unwrap().frames()[0].clone();
        let noisy = add_gaussian_noise(&clean, 0.2, 99).unwrap();
        for axis in 0..3 {
            let diffs: Vec<f64> = noisy
                .positions()
                .iter()
                .zip(clean.positions())
                .map(|(a, b)| a[axis] - b[axis])
                .collect();
            let mean = diffs.iter().sum::<f64>() / diffs.len() as f64;
            let var = diffs.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / (diffs.len() - 1) as f64;
            let sd = var.sqrt();
            assert!((0.19..=0.21).contains(&sd), "axis {axis}: {sd}");
        }
    }
}
