//! Scale-invariant feature detection, description and matching.
//!
//! The pipeline runs in four stages:
//!
//! 1. [`scale_space`] builds a Gaussian pyramid by repeated separable blurring and
//!    differences adjacent levels into a difference-of-Gaussians (DoG) pyramid.
//! 2. Local extrema of the DoG stack are refined to subpixel accuracy and filtered
//!    for contrast and edge response.
//! 3. [`features`] computes per-level gradient fields and assigns each keypoint one
//!    or more principal orientations.
//! 4. A 4×4×8 orientation-histogram descriptor is extracted in the keypoint's frame.
//!
//! [`matching`] pairs descriptor sets with a nearest/second-nearest ratio test,
//! [`report`] produces the JSON documents shared by the CLI and the HTTP service,
//! and [`keyfile`] reads and writes the plain-text keypoint interchange format.
//!
//! With the default `parallel` feature, row- and keypoint-level loops run on rayon.
//! Results are bit-identical to the sequential build.

pub mod detect;
pub mod features;
pub mod image_io;
pub mod keyfile;
pub mod matching;
mod par;
pub mod report;
pub mod scale_space;

pub use detect::{detect, DetectError, Features, SiftConfig};
pub use features::{Descriptor, DescriptorConfig, GradientField, OrientationConfig};
pub use image_io::{image_dimensions, load_image, save_pgm, ImageError, Plane, RasterImage};
pub use matching::{match_descriptors, Match, MatchConfig, MatchError};
pub use scale_space::{
    ConfigError, DogPyramid, GaussianKernel, GaussianPyramid, Keypoint, ScaleSpaceConfig,
    ScaleSpaceError,
};
