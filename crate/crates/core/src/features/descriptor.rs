use std::f64::consts::TAU;

use super::{DescriptorConfig, GradientField};
use crate::scale_space::{Keypoint, PyramidGeometry};

/// A normalized orientation-histogram vector, `grid × grid × bins` long
/// (128 with the default 4×4×8 layout). Components are ordered row cell,
/// column cell, orientation bin.
#[derive(Debug, Clone, PartialEq)]
pub struct Descriptor(Vec<f32>);

impl Descriptor {
    /// Wraps raw values; callers promise they are already normalized.
    pub fn from_values(values: Vec<f32>) -> Self {
        Descriptor(values)
    }

    pub fn values(&self) -> &[f32] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn norm(&self) -> f64 {
        self.0
            .iter()
            .map(|&v| (v as f64).powi(2))
            .sum::<f64>()
            .sqrt()
    }

    /// Byte quantization for keypoint files: `min(255, round(512 · v))`.
    pub fn to_bytes(&self) -> Vec<u8> {
        self.0
            .iter()
            .map(|&v| (512.0 * v).round().clamp(0.0, 255.0) as u8)
            .collect()
    }
}

/// The two normalization stages: `clamped` is the unit vector after the
/// per-component cap (before renormalizing), `descriptor` the final result.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalizedHistogram {
    pub clamped: Vec<f32>,
    pub descriptor: Descriptor,
}

/// Accumulates the raw, unnormalized descriptor histogram.
///
/// Every pixel whose keypoint-frame coordinates land in the grid contributes
/// `m · exp(-(u² + v²) / 2(grid/2)²)` (u, v in cell widths), distributed over the
/// neighboring row cell, column cell and orientation bin by trilinear
/// interpolation. Orientations are taken relative to `kp.orientation`. Pixels
/// beyond the field edge read replicated border gradients.
pub fn descriptor_histogram(
    kp: &Keypoint,
    gf: &GradientField,
    geometry: &PyramidGeometry,
    config: &DescriptorConfig,
) -> Vec<f32> {
    let d = config.grid;
    let n = config.bins;
    let (ox, oy, osigma) = geometry.to_octave(kp);
    let cell = config.cell_factor * osigma;
    let half = d as f64 / 2.0;

    let diagonal = ((gf.width().pow(2) + gf.height().pow(2)) as f64).sqrt();
    let radius = (cell * std::f64::consts::SQRT_2 * (d as f64 + 1.0) * 0.5)
        .round()
        .min(diagonal) as i64;
    let (cos_t, sin_t) = ((kp.orientation as f64).cos(), (kp.orientation as f64).sin());
    let weight_denom = 2.0 * half * half;
    let (cx, cy) = (ox.round() as i64, oy.round() as i64);

    // (d + 2)² cells with one guard ring, n orientation bins each.
    let stride = d + 2;
    let mut hist = vec![0.0f64; stride * stride * n];

    for py in cy - radius..=cy + radius {
        for px in cx - radius..=cx + radius {
            let (fx, fy) = (px as f64 - ox, py as f64 - oy);
            // Rotate into the keypoint frame, in cell units.
            let u = (cos_t * fx + sin_t * fy) / cell;
            let v = (-sin_t * fx + cos_t * fy) / cell;
            let cbin = u + half - 0.5;
            let rbin = v + half - 0.5;
            if !(rbin > -1.0 && rbin < d as f64 && cbin > -1.0 && cbin < d as f64) {
                continue;
            }

            let (m, theta) = gf.at_clamped(px, py);
            let relative = (theta as f64 - kp.orientation as f64).rem_euclid(TAU);
            let obin = relative * n as f64 / TAU;
            let weight = (-(u * u + v * v) / weight_denom).exp() * m as f64;

            let (r0, c0, o0) = (rbin.floor(), cbin.floor(), obin.floor());
            let (dr, dc, dobin) = (rbin - r0, cbin - c0, obin - o0);
            let (r0, c0) = ((r0 as i64 + 1) as usize, (c0 as i64 + 1) as usize);
            let o0 = o0 as usize % n;

            for (ri, wr) in [(r0, 1.0 - dr), (r0 + 1, dr)] {
                for (ci, wc) in [(c0, 1.0 - dc), (c0 + 1, dc)] {
                    let base = (ri * stride + ci) * n;
                    let w = weight * wr * wc;
                    hist[base + o0] += w * (1.0 - dobin);
                    hist[base + (o0 + 1) % n] += w * dobin;
                }
            }
        }
    }

    let mut out = Vec::with_capacity(d * d * n);
    for r in 0..d {
        for c in 0..d {
            let base = ((r + 1) * stride + c + 1) * n;
            out.extend(hist[base..base + n].iter().map(|&v| v as f32));
        }
    }
    out
}

fn unit(values: &[f32]) -> Vec<f32> {
    let norm = values
        .iter()
        .map(|&v| (v as f64).powi(2))
        .sum::<f64>()
        .sqrt();
    if norm > 0.0 {
        values.iter().map(|&v| (v as f64 / norm) as f32).collect()
    } else {
        // An all-zero histogram (no gradient anywhere) maps to the uniform unit vector.
        let u = (1.0 / (values.len() as f64).sqrt()) as f32;
        vec![u; values.len()]
    }
}

/// The f32 nearest to a decimal cap such as 0.2 may lie above it.
fn largest_f32_at_most(cap: f64) -> f32 {
    let c = cap as f32;
    if c as f64 > cap && c > 0.0 {
        f32::from_bits(c.to_bits() - 1)
    } else {
        c
    }
}

/// L2-normalizes, caps each component at `clamp`, and renormalizes.
pub fn normalize_histogram(raw: &[f32], clamp: f64) -> NormalizedHistogram {
    let cap = largest_f32_at_most(clamp);
    let clamped: Vec<f32> = unit(raw).into_iter().map(|v| v.min(cap)).collect();
    let descriptor = Descriptor(unit(&clamped));
    NormalizedHistogram {
        clamped,
        descriptor,
    }
}

pub fn compute_descriptor(
    kp: &Keypoint,
    gf: &GradientField,
    geometry: &PyramidGeometry,
    config: &DescriptorConfig,
) -> Descriptor {
    normalize_histogram(
        &descriptor_histogram(kp, gf, geometry, config),
        config.clamp,
    )
    .descriptor
}
