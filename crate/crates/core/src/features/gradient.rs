use super::{wrap_angle, FeatureError};
use crate::image_io::Plane;
use crate::par;

/// Per-pixel central-difference gradient magnitude and direction.
#[derive(Debug, Clone, PartialEq)]
pub struct GradientField {
    width: usize,
    height: usize,
    magnitude: Vec<f32>,
    orientation: Vec<f32>,
}

impl GradientField {
    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn magnitude(&self) -> &[f32] {
        &self.magnitude
    }

    pub fn orientation(&self) -> &[f32] {
        &self.orientation
    }

    #[inline]
    pub fn at(&self, x: usize, y: usize) -> (f32, f32) {
        let i = y * self.width + x;
        (self.magnitude[i], self.orientation[i])
    }

    /// Lookup with coordinates clamped into the field.
    #[inline]
    pub fn at_clamped(&self, x: i64, y: i64) -> (f32, f32) {
        let x = x.clamp(0, self.width as i64 - 1) as usize;
        let y = y.clamp(0, self.height as i64 - 1) as usize;
        self.at(x, y)
    }
}

/// `dx = G(x+1, y) - G(x-1, y)`, `dy = G(x, y+1) - G(x, y-1)`,
/// `m = sqrt(dx² + dy²)`, `θ = atan2(dy, dx)` in `[0, 2π)`.
/// Border neighbors are replicated.
pub fn compute_gradients(level: &Plane) -> Result<GradientField, FeatureError> {
    let (w, h) = (level.width(), level.height());
    if w < 3 || h < 3 {
        return Err(FeatureError::ImageTooSmall {
            width: w,
            height: h,
        });
    }

    let mut packed = vec![(0.0f32, 0.0f32); w * h];
    par::for_each_row(&mut packed, w, |y, row| {
        let up = level.row(y.saturating_sub(1));
        let here = level.row(y);
        let down = level.row((y + 1).min(h - 1));
        for (x, out) in row.iter_mut().enumerate() {
            let dx = here[(x + 1).min(w - 1)] - here[x.saturating_sub(1)];
            let dy = down[x] - up[x];
            *out = (
                (dx * dx + dy * dy).sqrt(),
                wrap_angle((dy as f64).atan2(dx as f64)),
            );
        }
    });

    let (magnitude, orientation) = packed.into_iter().unzip();
    Ok(GradientField {
        width: w,
        height: h,
        magnitude,
        orientation,
    })
}
