//! Gradient fields, orientation assignment and orientation-histogram descriptors.

mod descriptor;
mod gradient;
mod orientation;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use descriptor::{
    compute_descriptor, descriptor_histogram, normalize_histogram, Descriptor, NormalizedHistogram,
};
pub use gradient::{compute_gradients, GradientField};
pub use orientation::{assign_orientations, orientation_histogram};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FeatureError {
    #[error("gradient field needs at least 3x3 pixels, got {width}x{height}")]
    ImageTooSmall { width: usize, height: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OrientationConfig {
    pub bins: usize,
    /// Gaussian window sigma as a multiple of the keypoint's octave sigma.
    pub window_factor: f64,
    /// Secondary peaks at or above this fraction of the maximum spawn keypoints.
    pub peak_ratio: f64,
    pub smoothing_passes: usize,
}

impl Default for OrientationConfig {
    fn default() -> Self {
        OrientationConfig {
            bins: 36,
            window_factor: 1.5,
            peak_ratio: 0.8,
            smoothing_passes: 3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DescriptorConfig {
    /// Cells per side of the spatial grid.
    pub grid: usize,
    pub bins: usize,
    /// Cell width as a multiple of the keypoint's octave sigma.
    pub cell_factor: f64,
    /// Per-component cap applied between the two normalizations.
    pub clamp: f64,
}

impl Default for DescriptorConfig {
    fn default() -> Self {
        DescriptorConfig {
            grid: 4,
            bins: 8,
            cell_factor: 3.0,
            clamp: 0.2,
        }
    }
}

impl DescriptorConfig {
    pub fn len(&self) -> usize {
        self.grid * self.grid * self.bins
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Wraps an angle into `[0, 2π)` without ever returning `2π` in `f32`.
pub(crate) fn wrap_angle(theta: f64) -> f32 {
    let tau = std::f64::consts::TAU;
    let wrapped = theta.rem_euclid(tau) as f32;
    if !(0.0..std::f32::consts::TAU).contains(&wrapped) {
        0.0
    } else {
        wrapped
    }
}
