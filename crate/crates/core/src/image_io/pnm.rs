//! Binary netpbm codecs: PGM (P5) in and out, PPM (P6) out.

use super::{ImageError, RasterImage};

/// Encodes an image as P5 PGM with maxval 255.
pub fn save_pgm(image: &RasterImage) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", image.width(), image.height()).into_bytes();
    out.extend(image.to_gray8());
    out
}

/// Encodes interleaved 8-bit RGB samples as P6 PPM with maxval 255.
pub fn encode_ppm(width: usize, height: usize, rgb: &[u8]) -> Vec<u8> {
    assert_eq!(rgb.len(), width * height * 3, "rgb buffer size mismatch");
    let mut out = format!("P6\n{width} {height}\n255\n").into_bytes();
    out.extend_from_slice(rgb);
    out
}

struct HeaderReader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> HeaderReader<'a> {
    fn skip_whitespace_and_comments(&mut self) {
        while self.pos < self.bytes.len() {
            match self.bytes[self.pos] {
                b'#' => {
                    while self.pos < self.bytes.len() && self.bytes[self.pos] != b'\n' {
                        self.pos += 1;
                    }
                }
                c if c.is_ascii_whitespace() => self.pos += 1,
                _ => break,
            }
        }
    }

    fn number(&mut self, what: &str) -> Result<usize, ImageError> {
        self.skip_whitespace_and_comments();
        let start = self.pos;
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(ImageError::Malformed(format!("PGM header: missing {what}")));
        }
        std::str::from_utf8(&self.bytes[start..self.pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| ImageError::Malformed(format!("PGM header: {what} overflows")))
    }
}

pub(super) fn pgm_dimensions(bytes: &[u8]) -> Result<(usize, usize), ImageError> {
    let mut reader = HeaderReader { bytes, pos: 2 };
    Ok((reader.number("width")?, reader.number("height")?))
}

pub(super) fn decode_pgm(bytes: &[u8]) -> Result<RasterImage, ImageError> {
    if !bytes.starts_with(b"P5") {
        return Err(ImageError::Malformed("missing P5 magic".into()));
    }
    let mut reader = HeaderReader { bytes, pos: 2 };
    let width = reader.number("width")?;
    let height = reader.number("height")?;
    let maxval = reader.number("maxval")?;

    // Exactly one whitespace byte separates the header from the raster.
    match bytes.get(reader.pos) {
        Some(c) if c.is_ascii_whitespace() => reader.pos += 1,
        _ => return Err(ImageError::Malformed("PGM header: truncated".into())),
    }

    if width == 0 || height == 0 {
        return Err(ImageError::ZeroDimension { width, height });
    }
    if maxval == 0 {
        return Err(ImageError::Malformed("PGM maxval is 0".into()));
    }
    if maxval > 255 {
        return Err(ImageError::UnsupportedFormat(format!(
            "16-bit PGM (maxval {maxval})"
        )));
    }

    let count = width
        .checked_mul(height)
        .ok_or_else(|| ImageError::Malformed("PGM dimensions overflow".into()))?;
    let raster = &bytes[reader.pos..];
    if raster.len() < count {
        return Err(ImageError::Malformed(format!(
            "PGM raster truncated: {} of {count} samples",
            raster.len()
        )));
    }
    let samples = &raster[..count];

    if maxval == 255 {
        RasterImage::from_gray8(width, height, samples)
    } else {
        let scale = maxval as f32;
        let pixels = samples
            .iter()
            .map(|&s| (s as f32 / scale).min(1.0))
            .collect();
        RasterImage::new(width, height, pixels)
    }
}
