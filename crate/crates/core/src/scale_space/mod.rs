//! Gaussian and difference-of-Gaussians scale space, extremum detection and
//! subpixel localization.

mod extrema;
mod kernel;
mod pyramid;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use extrema::{find_extrema, refine_extremum, Extremum, Rejection};
pub use kernel::{convolve, make_kernel, GaussianKernel};
pub use pyramid::{
    auto_octave_count, build_dog_pyramid, build_gaussian_pyramid, decimate, upsample_bilinear,
    DogPyramid, GaussianPyramid, PyramidGeometry,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ScaleSpaceError {
    #[error("gaussian sigma must be positive and finite, got {0}")]
    NonPositiveSigma(f64),
    #[error("image {width}x{height} is too small for {octaves} octave(s); need at least {required} px per side")]
    ImageTooSmall {
        width: usize,
        height: usize,
        octaves: usize,
        required: usize,
    },
    #[error(transparent)]
    Config(#[from] ConfigError),
}

/// A detector parameter outside its valid range.
#[derive(Debug, Error, Clone, PartialEq)]
#[error("{field}: {message}")]
pub struct ConfigError {
    pub field: &'static str,
    pub message: String,
}

impl ConfigError {
    pub(crate) fn new(field: &'static str, message: impl Into<String>) -> Self {
        ConfigError {
            field,
            message: message.into(),
        }
    }
}

/// Pyramid and detector parameters. Thresholds are in the `[0, 1]` pixel domain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ScaleSpaceConfig {
    /// Intervals per octave; each octave holds this many + 3 Gaussian levels.
    pub scales_per_octave: usize,
    /// Blur of the first level of every octave, in that octave's pixels.
    pub sigma0: f64,
    /// Blur already present in the input image.
    pub assumed_blur: f64,
    /// Double the input with bilinear interpolation before building octave 0.
    pub upsample: bool,
    /// `None` selects `floor(log2(min side)) - 2` octaves of the base image.
    pub num_octaves: Option<usize>,
    pub contrast_threshold: f64,
    /// Maximum ratio of principal curvatures accepted by the edge test.
    pub edge_ratio: f64,
    /// Minimum distance of an extremum from any image edge, in octave pixels.
    pub border: usize,
    pub max_refine_steps: usize,
}

impl Default for ScaleSpaceConfig {
    fn default() -> Self {
        ScaleSpaceConfig {
            scales_per_octave: 3,
            sigma0: 1.6,
            assumed_blur: 0.5,
            upsample: true,
            num_octaves: None,
            contrast_threshold: 0.03,
            edge_ratio: 10.0,
            border: 5,
            max_refine_steps: 5,
        }
    }
}

/// Upper bound on `scales_per_octave`; beyond it pyramids only grow memory.
pub const MAX_SCALES_PER_OCTAVE: usize = 16;

impl ScaleSpaceConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.scales_per_octave == 0 || self.scales_per_octave > MAX_SCALES_PER_OCTAVE {
            return Err(ConfigError::new(
                "scales_per_octave",
                format!("must be in 1..={MAX_SCALES_PER_OCTAVE}"),
            ));
        }
        if !(self.assumed_blur.is_finite() && self.assumed_blur >= 0.0) {
            return Err(ConfigError::new("assumed_blur", "must be finite and >= 0"));
        }
        if !(self.sigma0.is_finite() && self.sigma0 > self.assumed_blur && self.sigma0 <= 100.0) {
            return Err(ConfigError::new(
                "sigma0",
                "must be finite, greater than assumed_blur and at most 100",
            ));
        }
        if self.num_octaves == Some(0) {
            return Err(ConfigError::new("num_octaves", "must be at least 1"));
        }
        if !(self.contrast_threshold.is_finite() && self.contrast_threshold > 0.0) {
            return Err(ConfigError::new(
                "contrast_threshold",
                "must be finite and > 0",
            ));
        }
        if !(self.edge_ratio.is_finite() && self.edge_ratio >= 1.0) {
            return Err(ConfigError::new("edge_ratio", "must be finite and >= 1"));
        }
        if self.border == 0 {
            return Err(ConfigError::new("border", "must be at least 1"));
        }
        if self.max_refine_steps == 0 {
            return Err(ConfigError::new("max_refine_steps", "must be at least 1"));
        }
        Ok(())
    }

    /// Pixels of the base (octave 0) image per input pixel.
    pub fn base_scale(&self) -> f64 {
        if self.upsample {
            2.0
        } else {
            1.0
        }
    }
}

/// A localized scale-space feature in input-image coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Keypoint {
    pub x: f32,
    pub y: f32,
    pub octave: usize,
    /// Gaussian/DoG level index within the octave, in `1..=scales_per_octave`.
    pub level: usize,
    /// Absolute blur scale in input pixels.
    pub sigma: f32,
    /// Radians in `[0, 2π)`.
    pub orientation: f32,
    /// Interpolated DoG value at the extremum.
    pub response: f32,
}
