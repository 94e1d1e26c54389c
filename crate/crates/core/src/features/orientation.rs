use std::f64::consts::TAU;

use super::{wrap_angle, GradientField, OrientationConfig};
use crate::scale_space::{Keypoint, PyramidGeometry};

/// Smoothed magnitude-weighted histogram of gradient directions around `kp`.
///
/// Samples come from a disc of radius `3 · window_factor · σ` (octave pixels),
/// weighted by a Gaussian of sigma `window_factor · σ`. Returns `None` when no
/// sample falls inside the field or every weight is zero.
pub fn orientation_histogram(
    kp: &Keypoint,
    gf: &GradientField,
    geometry: &PyramidGeometry,
    config: &OrientationConfig,
) -> Option<Vec<f64>> {
    let bins = config.bins;
    let (ox, oy, osigma) = geometry.to_octave(kp);
    let window_sigma = config.window_factor * osigma;
    let radius = (3.0 * window_sigma).round() as i64;
    let (cx, cy) = (ox.round() as i64, oy.round() as i64);
    let denom = 2.0 * window_sigma * window_sigma;

    let mut hist = vec![0.0f64; bins];
    let mut samples = 0usize;
    for dy in -radius..=radius {
        let y = cy + dy;
        if y < 0 || y >= gf.height() as i64 {
            continue;
        }
        for dx in -radius..=radius {
            let x = cx + dx;
            if x < 0 || x >= gf.width() as i64 || dx * dx + dy * dy > radius * radius {
                continue;
            }
            let (m, theta) = gf.at(x as usize, y as usize);
            let weight = (-((dx * dx + dy * dy) as f64) / denom).exp();
            let bin = (theta as f64 * bins as f64 / TAU).round() as usize % bins;
            hist[bin] += weight * m as f64;
            samples += 1;
        }
    }
    if samples == 0 {
        return None;
    }

    for _ in 0..config.smoothing_passes {
        let prev = hist.clone();
        for i in 0..bins {
            hist[i] = (prev[(i + bins - 1) % bins] + prev[i] + prev[(i + 1) % bins]) / 3.0;
        }
    }

    let max = hist.iter().cloned().fold(0.0, f64::max);
    (max > 0.0).then_some(hist)
}

/// Emits a copy of `kp` for every histogram peak at or above
/// `peak_ratio × max`, with the angle refined by a parabola through the peak
/// bin and its neighbors. Bin `i` is centered on `i · 2π / bins`.
pub fn assign_orientations(
    kp: &Keypoint,
    gf: &GradientField,
    geometry: &PyramidGeometry,
    config: &OrientationConfig,
) -> Vec<Keypoint> {
    let Some(hist) = orientation_histogram(kp, gf, geometry, config) else {
        return Vec::new();
    };
    let bins = hist.len();
    let max = hist.iter().cloned().fold(0.0, f64::max);
    let threshold = config.peak_ratio * max;

    (0..bins)
        .filter_map(|i| {
            let left = hist[(i + bins - 1) % bins];
            let right = hist[(i + 1) % bins];
            let c = hist[i];
            if !(c > left && c > right && c >= threshold) {
                return None;
            }
            let curvature = left - 2.0 * c + right;
            let shift = if curvature != 0.0 {
                0.5 * (left - right) / curvature
            } else {
                0.0
            };
            let angle = (i as f64 + shift) * TAU / bins as f64;
            Some(Keypoint {
                orientation: wrap_angle(angle),
                ..*kp
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::super::compute_gradients;
    use super::*;
    use crate::image_io::Plane;

    fn identity_geometry(width: usize, height: usize) -> PyramidGeometry {
        PyramidGeometry {
            scales_per_octave: 3,
            sigma0: 1.6,
            base_scale: 1.0,
            input_width: width,
            input_height: height,
        }
    }

    fn probe(x: f32, y: f32, sigma: f32) -> Keypoint {
        Keypoint {
            x,
            y,
            octave: 0,
            level: 1,
            sigma,
            orientation: 0.0,
            response: 0.1,
        }
    }

    fn degrees_apart(a: f32, b: f32) -> f32 {
        let d = (a - b).rem_euclid(std::f32::consts::TAU);
        d.min(std::f32::consts::TAU - d).to_degrees()
    }

    #[test]
    fn ramp_has_one_dominant_direction() {
        let n = 41;
        let geometry = identity_geometry(n, n);
        let config = OrientationConfig::default();
        for (ramp, want) in [(1.0f32, 0.0f32), (-1.0, std::f32::consts::PI)] {
            let plane = Plane::from_fn(n, n, |x, _| 0.5 + ramp * 0.01 * x as f32);
            let gf = compute_gradients(&plane).unwrap();
            let out = assign_orientations(&probe(20.0, 20.0, 2.0), &gf, &geometry, &config);
            assert_eq!(out.len(), 1);
            assert!(degrees_apart(out[0].orientation, want) < 5.0, "{out:?}");
        }
    }

    #[test]
    fn opposed_ramps_give_two_peaks() {
        // A tent: intensity falls away from x = 20 on both sides, so gradients
        // point at 0 on the left half and π on the right with equal weight.
        let n = 41;
        let plane = Plane::from_fn(n, n, |x, _| 0.8 - 0.01 * (x as f32 - 20.0).abs());
        let gf = compute_gradients(&plane).unwrap();
        let out = assign_orientations(
            &probe(20.0, 20.0, 2.0),
            &gf,
            &identity_geometry(n, n),
            &OrientationConfig::default(),
        );
        assert_eq!(out.len(), 2, "{out:?}");
        let mut angles: Vec<f32> = out.iter().map(|k| k.orientation.to_degrees()).collect();
        angles.sort_by(f32::total_cmp);
        assert!(degrees_apart(angles[0].to_radians(), 0.0) < 1.0);
        assert!((angles[1] - 180.0).abs() < 1.0);
    }

    #[test]
    fn emitted_peaks_clear_the_ratio() {
        let n = 49;
        let plane = Plane::from_fn(n, n, |x, y| {
            let d2 = (x as f32 - 24.0).powi(2) + (y as f32 - 24.0).powi(2);
            (-d2 / 50.0).exp()
        });
        let gf = compute_gradients(&plane).unwrap();
        let geometry = identity_geometry(n, n);
        let config = OrientationConfig::default();
        let kp = probe(24.0, 24.0, 3.0);
        let hist = orientation_histogram(&kp, &gf, &geometry, &config).unwrap();
        let max = hist.iter().cloned().fold(0.0, f64::max);
        for out in assign_orientations(&kp, &gf, &geometry, &config) {
            let bin = (out.orientation as f64 * 36.0 / TAU).round() as usize % 36;
            assert!(hist[bin] >= 0.8 * max * 0.999);
        }
    }

    #[test]
    fn keypoint_outside_field_emits_nothing() {
        let plane = Plane::from_fn(16, 16, |x, _| x as f32 * 0.01);
        let gf = compute_gradients(&plane).unwrap();
        let out = assign_orientations(
            &probe(200.0, 200.0, 1.0),
            &gf,
            &identity_geometry(16, 16),
            &OrientationConfig::default(),
        );
        assert!(out.is_empty());
    }
}
