//! Synthetic mmWave radar super-resolution.
//!
//! The crate covers the whole loop from a 2D scene to a scored point cloud:
//!
//! - [`sim`] builds parametric indoor scenes and trajectories, ray-casts a
//!   forward-facing lidar, and synthesizes raw array snapshots from an
//!   8-element radar (sidelobes, specular dropout and mirror ghosts included).
//! - [`dsp`] turns snapshots into range-azimuth heatmaps, normalizes and
//!   sparsifies them, and runs the cell-averaging CFAR baseline.
//! - [`autodiff`] is a small tape-based reverse-mode engine with the layers,
//!   losses and optimizer the network needs, plus finite-difference checking.
//! - [`model`] assembles the asymmetric U-Net, frame stacking, training and
//!   saliency attribution.
//! - [`pointcloud`] converts polar images to Cartesian clouds and computes
//!   Chamfer and modified-Hausdorff distances.
//! - [`harness`] owns the on-disk formats, dataset generation, training and
//!   evaluation runs that the `radarsr` binary exposes.

pub mod autodiff;
pub mod dsp;
pub mod error;
pub mod harness;
pub mod model;
pub mod pointcloud;
pub mod sim;

pub use error::{Error, Result};
