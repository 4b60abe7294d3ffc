//! Denoising of dynamic point cloud sequences.
//!
//! Each frame is covered by overlapping patches that are matched to the
//! previous denoised frame with a manifold-to-manifold distance. The frame is
//! then recovered by alternating between a sparse linear solve for the points,
//! a linear program for the temporal edge weights, and metric learning for
//! the intra-frame graph.
//!
//! ```no_run
//! use pcdenoise::{denoise_sequence, DenoiseConfig, Sequence};
//! # fn run(noisy: Sequence) -> pcdenoise::Result<()> {
//! let (denoised, _reports) = denoise_sequence(&noisy, &DenoiseConfig::default())?;
//! # Ok(()) }
//! ```

pub mod error;
pub mod geometry;
pub mod graph;
pub mod io;
pub mod m2m;
pub mod metrics;
pub mod optimizer;
pub mod patches;
pub mod stgraph;
pub mod synth;

pub use error::{Error, Result};
pub use geometry::{Frame, NeighborIndex, Sequence, Vec3};
pub use metrics::{evaluate_frame, gpsnr, mse_index, mse_nn, MetricsReport};
pub use optimizer::{denoise_frame, denoise_sequence, DenoiseConfig, FrameResult, ReferenceFrame};
pub use synth::{add_gaussian_noise, generate_sequence, SyntheticSpec};
