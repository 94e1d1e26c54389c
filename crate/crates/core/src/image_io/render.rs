//! Keypoint and match overlays, written as P6 PPM.

use thiserror::Error;

use super::{encode_ppm, quantize, RasterImage};
use crate::matching::Match;
use crate::scale_space::Keypoint;

/// Circle radius drawn per unit of keypoint sigma.
const RADIUS_PER_SIGMA: f32 = 2.0;

const CIRCLE_COLOR: [u8; 3] = [0, 255, 0];
const TICK_COLOR: [u8; 3] = [255, 0, 0];
const LINE_PALETTE: [[u8; 3]; 6] = [
    [255, 64, 64],
    [64, 255, 64],
    [64, 160, 255],
    [255, 220, 0],
    [255, 0, 255],
    [0, 255, 255],
];

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RenderError {
    #[error("match {position} references keypoint {index} of {side}, which has {len} keypoints")]
    InvalidMatch {
        position: usize,
        side: &'static str,
        index: usize,
        len: usize,
    },
}

/// An encoded overlay plus the number of keypoints that fell outside the image.
#[derive(Debug, Clone)]
pub struct Rendered {
    pub ppm: Vec<u8>,
    pub skipped: usize,
}

struct Canvas {
    width: usize,
    height: usize,
    rgb: Vec<u8>,
}

impl Canvas {
    fn blank(width: usize, height: usize) -> Self {
        Canvas {
            width,
            height,
            rgb: vec![0; width * height * 3],
        }
    }

    fn blit_gray(&mut self, image: &RasterImage, x0: usize) {
        for y in 0..image.height() {
            for x in 0..image.width() {
                let v = quantize(image.get(x, y));
                let i = 3 * (y * self.width + x0 + x);
                self.rgb[i..i + 3].copy_from_slice(&[v, v, v]);
            }
        }
    }

    fn put(&mut self, x: i64, y: i64, color: [u8; 3]) {
        if x < 0 || y < 0 || x >= self.width as i64 || y >= self.height as i64 {
            return;
        }
        let i = 3 * (y as usize * self.width + x as usize);
        self.rgb[i..i + 3].copy_from_slice(&color);
    }

    fn line(&mut self, (mut x0, mut y0): (i64, i64), (x1, y1): (i64, i64), color: [u8; 3]) {
        let dx = (x1 - x0).abs();
        let dy = -(y1 - y0).abs();
        let sx = if x0 < x1 { 1 } else { -1 };
        let sy = if y0 < y1 { 1 } else { -1 };
        let mut err = dx + dy;
        loop {
            self.put(x0, y0, color);
            if x0 == x1 && y0 == y1 {
                break;
            }
            let e2 = 2 * err;
            if e2 >= dy {
                err += dy;
                x0 += sx;
            }
            if e2 <= dx {
                err += dx;
                y0 += sy;
            }
        }
    }

    // Midpoint circle.
    fn circle(&mut self, cx: i64, cy: i64, r: i64, color: [u8; 3]) {
        let (mut x, mut y, mut d) = (r, 0i64, 1 - r);
        while x >= y {
            for (px, py) in [
                (x, y),
                (y, x),
                (-y, x),
                (-x, y),
                (-x, -y),
                (-y, -x),
                (y, -x),
                (x, -y),
            ] {
                self.put(cx + px, cy + py, color);
            }
            y += 1;
            if d < 0 {
                d += 2 * y + 1;
            } else {
                x -= 1;
                d += 2 * (y - x) + 1;
            }
        }
    }

    fn encode(&self) -> Vec<u8> {
        encode_ppm(self.width, self.height, &self.rgb)
    }
}

fn in_bounds(kp: &Keypoint, width: usize, height: usize) -> bool {
    kp.x.is_finite()
        && kp.y.is_finite()
        && kp.x >= 0.0
        && kp.y >= 0.0
        && kp.x < width as f32
        && kp.y < height as f32
}

/// Draws each keypoint as a circle scaled by sigma with a tick along its orientation.
pub fn render_keypoints(image: &RasterImage, keypoints: &[Keypoint]) -> Rendered {
    let mut canvas = Canvas::blank(image.width(), image.height());
    canvas.blit_gray(image, 0);

    let mut skipped = 0;
    for kp in keypoints {
        if !in_bounds(kp, image.width(), image.height()) {
            skipped += 1;
            continue;
        }
        let radius = (RADIUS_PER_SIGMA * kp.sigma).max(1.0);
        let (cx, cy) = (kp.x.round() as i64, kp.y.round() as i64);
        canvas.circle(cx, cy, radius.round() as i64, CIRCLE_COLOR);
        let tip = (
            (kp.x + radius * kp.orientation.cos()).round() as i64,
            (kp.y + radius * kp.orientation.sin()).round() as i64,
        );
        canvas.line((cx, cy), tip, TICK_COLOR);
    }

    Rendered {
        ppm: canvas.encode(),
        skipped,
    }
}

/// Places `a` and `b` side by side and joins matched keypoints with line segments.
pub fn render_matches(
    a: &RasterImage,
    b: &RasterImage,
    matches: &[Match],
    keypoints_a: &[Keypoint],
    keypoints_b: &[Keypoint],
) -> Result<Vec<u8>, RenderError> {
    for (position, m) in matches.iter().enumerate() {
        if m.index_a >= keypoints_a.len() {
            return Err(RenderError::InvalidMatch {
                position,
                side: "a",
                index: m.index_a,
                len: keypoints_a.len(),
            });
        }
        if m.index_b >= keypoints_b.len() {
            return Err(RenderError::InvalidMatch {
                position,
                side: "b",
                index: m.index_b,
                len: keypoints_b.len(),
            });
        }
    }

    let mut canvas = Canvas::blank(a.width() + b.width(), a.height().max(b.height()));
    canvas.blit_gray(a, 0);
    canvas.blit_gray(b, a.width());

    let offset = a.width() as f32;
    for (i, m) in matches.iter().enumerate() {
        let ka = &keypoints_a[m.index_a];
        let kb = &keypoints_b[m.index_b];
        canvas.line(
            (ka.x.round() as i64, ka.y.round() as i64),
            ((kb.x + offset).round() as i64, kb.y.round() as i64),
            LINE_PALETTE[i % LINE_PALETTE.len()],
        );
    }
    Ok(canvas.encode())
}
