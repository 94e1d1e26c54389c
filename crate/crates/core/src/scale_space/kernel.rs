use super::ScaleSpaceError;
use crate::image_io::Plane;
use crate::par;

/// A truncated, normalized 1-D Gaussian. The 2-D kernel is its outer product
/// with itself.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianKernel {
    sigma: f64,
    radius: usize,
    taps: Vec<f32>,
}

impl GaussianKernel {
    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn radius(&self) -> usize {
        self.radius
    }

    pub fn taps(&self) -> &[f32] {
        &self.taps
    }
}

/// Samples `exp(-k² / 2σ²)` for `k` in `-radius..=radius`, `radius = ceil(3σ)`,
/// and normalizes the taps to unit sum.
pub fn make_kernel(sigma: f64) -> Result<GaussianKernel, ScaleSpaceError> {
    if !(sigma.is_finite() && sigma > 0.0) {
        return Err(ScaleSpaceError::NonPositiveSigma(sigma));
    }
    let radius = (3.0 * sigma).ceil() as usize;
    let denom = 2.0 * sigma * sigma;
    let weights: Vec<f64> = (0..=2 * radius)
        .map(|i| {
            let k = i as f64 - radius as f64;
            (-k * k / denom).exp()
        })
        .collect();
    let sum: f64 = weights.iter().sum();
    Ok(GaussianKernel {
        sigma,
        radius,
        taps: weights.iter().map(|w| (w / sum) as f32).collect(),
    })
}

/// Separable convolution: horizontal pass, then vertical pass, each with edge
/// replication. Output has the input's dimensions.
pub fn convolve(image: &Plane, kernel: &GaussianKernel) -> Plane {
    let (w, h) = (image.width(), image.height());
    let r = kernel.radius;
    let taps = &kernel.taps;

    let mut horizontal = vec![0.0f32; w * h];
    par::for_each_row(&mut horizontal, w, |y, out| {
        let src = image.row(y);
        let mut padded = Vec::with_capacity(w + 2 * r);
        padded.extend(std::iter::repeat_n(src[0], r));
        padded.extend_from_slice(src);
        padded.extend(std::iter::repeat_n(src[w - 1], r));
        for (x, o) in out.iter_mut().enumerate() {
            let window = &padded[x..x + taps.len()];
            *o = window.iter().zip(taps).fold(0.0, |acc, (v, t)| acc + v * t);
        }
    });

    let mut vertical = vec![0.0f32; w * h];
    par::for_each_row(&mut vertical, w, |y, out| {
        for (k, &t) in taps.iter().enumerate() {
            let sy = (y as isize + k as isize - r as isize).clamp(0, h as isize - 1) as usize;
            let src = &horizontal[sy * w..(sy + 1) * w];
            for (o, &v) in out.iter_mut().zip(src) {
                *o += v * t;
            }
        }
    });

    Plane::new(w, h, vertical).expect("dimensions preserved")
}
