//! Raster types, decoding/encoding and overlay rendering.
//!
//! All pixel values live in `[0, 1]`. 8-bit samples map to `value / 255`; color
//! inputs are reduced to Rec. 601 luma before scaling.

mod pnm;
mod render;

use thiserror::Error;

pub use pnm::{encode_ppm, save_pgm};
pub use render::{render_keypoints, render_matches, RenderError, Rendered};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ImageError {
    #[error("malformed image: {0}")]
    Malformed(String),
    #[error("unsupported image format: {0}")]
    UnsupportedFormat(String),
    #[error("image has a zero dimension ({width}x{height})")]
    ZeroDimension { width: usize, height: usize },
    #[error("pixel buffer holds {actual} values, expected {expected}")]
    LengthMismatch { expected: usize, actual: usize },
    #[error("pixel {index} is {value}, outside [0, 1]")]
    OutOfRange { index: usize, value: f32 },
}

impl ImageError {
    /// Stable machine-readable identifier, used in service error bodies.
    pub fn code(&self) -> &'static str {
        match self {
            ImageError::Malformed(_) | ImageError::LengthMismatch { .. } => "malformed-image",
            ImageError::UnsupportedFormat(_) => "unsupported-format",
            ImageError::ZeroDimension { .. } => "zero-dimension",
            ImageError::OutOfRange { .. } => "malformed-image",
        }
    }
}

/// A row-major grid of `f32` samples without range restrictions.
///
/// Gaussian levels, DoG levels and intermediate convolution results are planes.
#[derive(Debug, Clone, PartialEq)]
pub struct Plane {
    width: usize,
    height: usize,
    data: Vec<f32>,
}

impl Plane {
    pub fn new(width: usize, height: usize, data: Vec<f32>) -> Result<Self, ImageError> {
        if width == 0 || height == 0 {
            return Err(ImageError::ZeroDimension { width, height });
        }
        if data.len() != width * height {
            return Err(ImageError::LengthMismatch {
                expected: width * height,
                actual: data.len(),
            });
        }
        Ok(Plane {
            width,
            height,
            data,
        })
    }

    pub fn filled(width: usize, height: usize, value: f32) -> Self {
        assert!(width > 0 && height > 0, "plane dimensions must be positive");
        Plane {
            width,
            height,
            data: vec![value; width * height],
        }
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> f32) -> Self {
        assert!(width > 0 && height > 0, "plane dimensions must be positive");
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        Plane {
            width,
            height,
            data,
        }
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn data(&self) -> &[f32] {
        &self.data
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f32 {
        self.data[y * self.width + x]
    }

    /// Sample with edge replication for out-of-range coordinates.
    #[inline]
    pub fn get_clamped(&self, x: isize, y: isize) -> f32 {
        let x = x.clamp(0, self.width as isize - 1) as usize;
        let y = y.clamp(0, self.height as isize - 1) as usize;
        self.get(x, y)
    }

    #[inline]
    pub fn row(&self, y: usize) -> &[f32] {
        &self.data[y * self.width..(y + 1) * self.width]
    }

    pub fn into_data(self) -> Vec<f32> {
        self.data
    }

    pub fn map(&self, f: impl Fn(f32) -> f32) -> Plane {
        Plane {
            width: self.width,
            height: self.height,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }
}

/// A validated grayscale image: finite luminance values in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct RasterImage(Plane);

impl RasterImage {
    pub fn new(width: usize, height: usize, pixels: Vec<f32>) -> Result<Self, ImageError> {
        Self::from_plane(Plane::new(width, height, pixels)?)
    }

    pub fn from_plane(plane: Plane) -> Result<Self, ImageError> {
        if let Some((index, &value)) = plane
            .data
            .iter()
            .enumerate()
            .find(|(_, v)| !(v.is_finite() && (0.0..=1.0).contains(*v)))
        {
            return Err(ImageError::OutOfRange { index, value });
        }
        Ok(RasterImage(plane))
    }

    /// Builds an image from `f(x, y)`, clamping each value into `[0, 1]`.
    ///
    /// Non-finite values become 0.
    pub fn from_fn(width: usize, height: usize, f: impl FnMut(usize, usize) -> f32) -> Self {
        let plane = Plane::from_fn(width, height, f).map(|v| {
            if v.is_finite() {
                v.clamp(0.0, 1.0)
            } else {
                0.0
            }
        });
        RasterImage(plane)
    }

    pub fn from_gray8(width: usize, height: usize, samples: &[u8]) -> Result<Self, ImageError> {
        Plane::new(
            width,
            height,
            samples.iter().map(|&s| s as f32 / 255.0).collect(),
        )
        .map(RasterImage)
    }

    pub fn width(&self) -> usize {
        self.0.width
    }

    pub fn height(&self) -> usize {
        self.0.height
    }

    pub fn pixels(&self) -> &[f32] {
        &self.0.data
    }

    pub fn get(&self, x: usize, y: usize) -> f32 {
        self.0.get(x, y)
    }

    pub fn as_plane(&self) -> &Plane {
        &self.0
    }

    /// 8-bit quantization used by every encoder: `round(v * 255)`.
    pub fn to_gray8(&self) -> Vec<u8> {
        self.0.data.iter().map(|&v| quantize(v)).collect()
    }
}

#[inline]
pub(crate) fn quantize(v: f32) -> u8 {
    (v * 255.0).round().clamp(0.0, 255.0) as u8
}

/// Rec. 601 luma of an 8-bit RGB triple, scaled into `[0, 1]`.
#[inline]
pub fn rec601(r: u8, g: u8, b: u8) -> f32 {
    let luma = 0.299 * r as f64 + 0.587 * g as f64 + 0.114 * b as f64;
    ((luma / 255.0) as f32).clamp(0.0, 1.0)
}

/// Reads `(width, height)` from the file header without decoding the raster.
pub fn image_dimensions(bytes: &[u8]) -> Result<(usize, usize), ImageError> {
    if bytes.len() >= 2 && bytes[0] == b'P' && bytes[1] == b'5' {
        return pnm::pgm_dimensions(bytes);
    }
    let reader = image::ImageReader::new(std::io::Cursor::new(bytes))
        .with_guessed_format()
        .map_err(|e| ImageError::Malformed(e.to_string()))?;
    match reader.format() {
        Some(image::ImageFormat::Png | image::ImageFormat::Jpeg) => {}
        _ => return load_image(bytes).map(|img| (img.width(), img.height())),
    }
    let (w, h) = reader
        .into_dimensions()
        .map_err(|e| ImageError::Malformed(e.to_string()))?;
    Ok((w as usize, h as usize))
}

/// Decodes a binary PGM (P5), PNG or JPEG file into a grayscale [`RasterImage`].
pub fn load_image(bytes: &[u8]) -> Result<RasterImage, ImageError> {
    if bytes.len() >= 2 && bytes[0] == b'P' && bytes[1].is_ascii_digit() {
        return match bytes[1] {
            b'5' => pnm::decode_pgm(bytes),
            d => Err(ImageError::UnsupportedFormat(format!(
                "netpbm variant P{} (only binary P5 is accepted)",
                d as char
            ))),
        };
    }

    let format = image::guess_format(bytes)
        .map_err(|_| ImageError::Malformed("unrecognized file signature".into()))?;
    match format {
        image::ImageFormat::Png | image::ImageFormat::Jpeg => {}
        other => {
            return Err(ImageError::UnsupportedFormat(format!("{other:?}")));
        }
    }

    let decoded = image::load_from_memory_with_format(bytes, format)
        .map_err(|e| ImageError::Malformed(e.to_string()))?;
    let (width, height) = (decoded.width() as usize, decoded.height() as usize);
    if width == 0 || height == 0 {
        return Err(ImageError::ZeroDimension { width, height });
    }

    if decoded.color().has_color() {
        let rgb = decoded.to_rgb8();
        let pixels = rgb.pixels().map(|p| rec601(p[0], p[1], p[2])).collect();
        RasterImage::new(width, height, pixels)
    } else {
        let gray = decoded.to_luma8();
        RasterImage::from_gray8(width, height, gray.as_raw())
    }
}
