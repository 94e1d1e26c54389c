//! End-to-end detection: pyramid, extrema, refinement, orientation, description.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::features::{
    assign_orientations, compute_descriptor, compute_gradients, Descriptor, DescriptorConfig,
    GradientField, OrientationConfig,
};
use crate::image_io::RasterImage;
use crate::par;
use crate::scale_space::{
    build_dog_pyramid, build_gaussian_pyramid, find_extrema, refine_extremum, ConfigError,
    GaussianPyramid, Keypoint, ScaleSpaceConfig, ScaleSpaceError,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DetectError {
    #[error(transparent)]
    ScaleSpace(#[from] ScaleSpaceError),
    #[error(transparent)]
    Config(#[from] ConfigError),
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SiftConfig {
    pub scale_space: ScaleSpaceConfig,
    pub orientation: OrientationConfig,
    pub descriptor: DescriptorConfig,
}

impl SiftConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        self.scale_space.validate()?;
        let o = &self.orientation;
        if o.bins < 2 {
            return Err(ConfigError::new("orientation.bins", "must be at least 2"));
        }
        if !(o.window_factor.is_finite() && o.window_factor > 0.0) {
            return Err(ConfigError::new("orientation.window_factor", "must be > 0"));
        }
        if !(0.0..=1.0).contains(&o.peak_ratio) {
            return Err(ConfigError::new(
                "orientation.peak_ratio",
                "must be in [0, 1]",
            ));
        }
        let d = &self.descriptor;
        if d.grid == 0 || d.bins == 0 {
            return Err(ConfigError::new(
                "descriptor",
                "grid and bins must be positive",
            ));
        }
        if !(d.cell_factor.is_finite() && d.cell_factor > 0.0) {
            return Err(ConfigError::new("descriptor.cell_factor", "must be > 0"));
        }
        if !(d.clamp > 0.0 && d.clamp <= 1.0) {
            return Err(ConfigError::new("descriptor.clamp", "must be in (0, 1]"));
        }
        Ok(())
    }
}

/// Keypoints with aligned descriptors, sorted by (octave, level, y, x, orientation).
#[derive(Debug, Clone, PartialEq)]
pub struct Features {
    pub keypoints: Vec<Keypoint>,
    pub descriptors: Vec<Descriptor>,
}

/// Gradient fields for levels `1..=s` of every octave; other slots are `None`.
pub fn pyramid_gradients(gp: &GaussianPyramid) -> Vec<Vec<Option<GradientField>>> {
    let s = gp.geometry.scales_per_octave;
    let slots: Vec<(usize, usize)> = gp
        .octaves
        .iter()
        .enumerate()
        .flat_map(|(o, levels)| (0..levels.len()).map(move |l| (o, l)))
        .collect();
    let mut fields = par::map_slice(&slots, |&(o, l)| {
        (1..=s)
            .contains(&l)
            .then(|| compute_gradients(&gp.octaves[o][l]).ok())
            .flatten()
    })
    .into_iter();
    gp.octaves
        .iter()
        .map(|levels| fields.by_ref().take(levels.len()).collect())
        .collect()
}

fn keypoint_order(a: &Keypoint, b: &Keypoint) -> std::cmp::Ordering {
    (a.octave, a.level)
        .cmp(&(b.octave, b.level))
        .then(a.y.total_cmp(&b.y))
        .then(a.x.total_cmp(&b.x))
        .then(a.orientation.total_cmp(&b.orientation))
}

/// Localized keypoints before orientation assignment, sorted and deduplicated.
pub fn localize(gp: &GaussianPyramid, config: &ScaleSpaceConfig) -> Vec<Keypoint> {
    let dog = build_dog_pyramid(gp);
    let extrema = find_extrema(&dog, config);
    let mut refined: Vec<Keypoint> =
        par::map_slice(&extrema, |e| refine_extremum(&dog, e, config).ok())
            .into_iter()
            .flatten()
            .collect();
    refined.sort_by(keypoint_order);
    // Distinct candidates can converge onto the same refined extremum.
    refined.dedup_by(|a, b| keypoint_order(a, b).is_eq() && a.sigma == b.sigma);
    refined
}

/// Orientation assignment and description of already-localized keypoints.
pub fn describe(
    gp: &GaussianPyramid,
    gradients: &[Vec<Option<GradientField>>],
    localized: &[Keypoint],
    config: &SiftConfig,
) -> Features {
    let geometry = &gp.geometry;
    let mut keypoints: Vec<Keypoint> =
        par::map_slice(localized, |kp| match &gradients[kp.octave][kp.level] {
            Some(gf) => assign_orientations(kp, gf, geometry, &config.orientation),
            None => Vec::new(),
        })
        .into_iter()
        .flatten()
        .collect();
    keypoints.sort_by(keypoint_order);

    let descriptors = par::map_slice(&keypoints, |kp| {
        let gf = gradients[kp.octave][kp.level]
            .as_ref()
            .expect("oriented keypoints have a gradient field");
        compute_descriptor(kp, gf, geometry, &config.descriptor)
    });
    Features {
        keypoints,
        descriptors,
    }
}

/// Runs the full pipeline on `image`.
pub fn detect(image: &RasterImage, config: &SiftConfig) -> Result<Features, DetectError> {
    config.validate()?;
    let gp = build_gaussian_pyramid(image, &config.scale_space)?;
    let localized = localize(&gp, &config.scale_space);
    let gradients = pyramid_gradients(&gp);
    Ok(describe(&gp, &gradients, &localized, config))
}
