//! Independent oracles and synthetic inputs shared by the integration and
//! acceptance suites. Nothing here calls into the code paths it checks.

#![allow(dead_code)]

use std::path::PathBuf;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use siftsvc_core::features::Descriptor;
use siftsvc_core::scale_space::{DogPyramid, Extremum, ScaleSpaceConfig};
use siftsvc_core::{Keypoint, Match, Plane, RasterImage};

pub fn data_dir() -> PathBuf {
    let here = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    let own = here.join("tests/data");
    if own.join("gravel256.pgm").exists() {
        own
    } else {
        here.join("../core/tests/data")
    }
}

pub fn fixture(name: &str) -> RasterImage {
    let bytes = std::fs::read(data_dir().join(name)).expect("fixture present");
    siftsvc_core::load_image(&bytes).expect("fixture decodes")
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn noise_image(width: usize, height: usize, seed: u64) -> RasterImage {
    let mut r = rng(seed);
    RasterImage::from_fn(width, height, |_, _| r.random::<f32>())
}

pub fn noise_plane(width: usize, height: usize, seed: u64) -> Plane {
    let mut r = rng(seed);
    Plane::from_fn(width, height, |_, _| r.random::<f32>())
}

/// Sum of isotropic Gaussian blobs `(cx, cy, sigma, amplitude)` on black.
pub fn blobs(width: usize, height: usize, blobs: &[(f64, f64, f64, f64)]) -> RasterImage {
    RasterImage::from_fn(width, height, |x, y| {
        blobs
            .iter()
            .map(|&(cx, cy, s, a)| {
                let d2 = (x as f64 - cx).powi(2) + (y as f64 - cy).powi(2);
                a * (-d2 / (2.0 * s * s)).exp()
            })
            .sum::<f64>() as f32
    })
}

/// Nine blobs on a 3×3 grid with subpixel centers, one row per sigma in {2, 4, 8}.
pub fn blob_grid() -> (RasterImage, Vec<(f64, f64, f64)>) {
    let mut centers = Vec::new();
    let offsets = [(0.3, 0.7), (0.55, 0.2), (0.8, 0.45)];
    for (row, sigma) in [2.0, 4.0, 8.0].into_iter().enumerate() {
        for (col, (fx, fy)) in offsets.into_iter().enumerate() {
            let cx = 48.0 + 80.0 * col as f64 + fx;
            let cy = 48.0 + 80.0 * row as f64 + fy;
            centers.push((cx, cy, sigma));
        }
    }
    let params: Vec<_> = centers.iter().map(|&(x, y, s)| (x, y, s, 1.0)).collect();
    (blobs(256, 256, &params), centers)
}

/// Structured 96×96 inputs: blobs, checkerboard, rings, gradient wedge, bars.
pub fn structured_images() -> Vec<RasterImage> {
    let n = 96;
    vec![
        blobs(
            n,
            n,
            &[
                (30.0, 30.0, 3.0, 1.0),
                (64.5, 40.2, 5.0, 0.8),
                (45.0, 70.0, 2.0, 0.6),
            ],
        ),
        RasterImage::from_fn(
            n,
            n,
            |x, y| if (x / 12 + y / 12) % 2 == 0 { 0.9 } else { 0.1 },
        ),
        RasterImage::from_fn(n, n, |x, y| {
            let r = ((x as f32 - 48.0).powi(2) + (y as f32 - 48.0).powi(2)).sqrt();
            0.5 + 0.4 * (r * 0.6).cos()
        }),
        RasterImage::from_fn(n, n, |x, y| {
            let a = (y as f32 - 48.0).atan2(x as f32 - 48.0);
            0.5 + 0.45 * (5.0 * a).sin() * (x as f32 / 96.0)
        }),
        RasterImage::from_fn(n, n, |x, y| {
            if (x % 17 < 4) ^ (y % 23 < 3) {
                0.85
            } else {
                0.2
            }
        }),
    ]
}

/// Direct 2-D convolution with the normalized, truncated 2-D Gaussian,
/// evaluated in f64 with edge replication.
pub fn direct_convolve(image: &Plane, sigma: f64) -> Vec<f64> {
    let r = (3.0 * sigma).ceil() as isize;
    let mut kernel = Vec::new();
    let mut sum = 0.0;
    for dy in -r..=r {
        for dx in -r..=r {
            let w = (-((dx * dx + dy * dy) as f64) / (2.0 * sigma * sigma)).exp();
            kernel.push((dx, dy, w));
            sum += w;
        }
    }
    let (w, h) = (image.width() as isize, image.height() as isize);
    let mut out = Vec::with_capacity((w * h) as usize);
    for y in 0..h {
        for x in 0..w {
            let mut acc = 0.0;
            for &(dx, dy, k) in &kernel {
                let sx = (x + dx).clamp(0, w - 1) as usize;
                let sy = (y + dy).clamp(0, h - 1) as usize;
                acc += k * image.data()[sy * w as usize + sx] as f64;
            }
            out.push(acc / sum);
        }
    }
    out
}

/// Exhaustive scan for strict 26-neighbor extrema, restated from the contract.
pub fn brute_force_extrema(dp: &DogPyramid, config: &ScaleSpaceConfig) -> Vec<Extremum> {
    let mut out = Vec::new();
    for (octave, levels) in dp.octaves.iter().enumerate() {
        let (w, h) = (levels[0].width(), levels[0].height());
        for level in 1..=config.scales_per_octave {
            if level + 1 >= levels.len() {
                continue;
            }
            for y in 0..h {
                for x in 0..w {
                    let far_enough = x >= config.border
                        && y >= config.border
                        && x + config.border < w
                        && y + config.border < h;
                    if !far_enough {
                        continue;
                    }
                    let v = levels[level].get(x, y);
                    if (v.abs() as f64) < 0.5 * config.contrast_threshold {
                        continue;
                    }
                    let mut neighbors = Vec::with_capacity(26);
                    for dl in [-1i32, 0, 1] {
                        for dy in [-1i32, 0, 1] {
                            for dx in [-1i32, 0, 1] {
                                if dl == 0 && dy == 0 && dx == 0 {
                                    continue;
                                }
                                let p = &levels[(level as i32 + dl) as usize];
                                neighbors.push(
                                    p.get((x as i32 + dx) as usize, (y as i32 + dy) as usize),
                                );
                            }
                        }
                    }
                    let is_max = neighbors.iter().all(|&n| v > n);
                    let is_min = neighbors.iter().all(|&n| v < n);
                    if is_max || is_min {
                        out.push(Extremum {
                            octave,
                            level,
                            x,
                            y,
                        });
                    }
                }
            }
        }
    }
    out
}

pub fn naive_distance(a: &[f32], b: &[f32]) -> f64 {
    let mut acc = 0.0f64;
    for i in 0..a.len() {
        let d = a[i] as f64 - b[i] as f64;
        acc += d * d;
    }
    acc.sqrt()
}

/// Quadratic-scan ratio-test matcher.
pub fn oracle_matches(a: &[Descriptor], b: &[Descriptor], ratio: f64) -> Vec<Match> {
    let mut out = Vec::new();
    if b.len() < 2 {
        return out;
    }
    for (i, da) in a.iter().enumerate() {
        let dists: Vec<f64> = b
            .iter()
            .map(|db| naive_distance(da.values(), db.values()))
            .collect();
        let mut order: Vec<usize> = (0..b.len()).collect();
        order.sort_by(|&x, &y| dists[x].total_cmp(&dists[y]).then(x.cmp(&y)));
        let (j, nearest, second) = (order[0], dists[order[0]], dists[order[1]]);
        let r = if second > 0.0 { nearest / second } else { 1.0 };
        if r < ratio {
            out.push(Match {
                index_a: i,
                index_b: j,
                distance: nearest,
                ratio: r,
            });
        }
    }
    out
}

pub fn random_descriptors(n: usize, seed: u64) -> Vec<Descriptor> {
    let mut r = rng(seed);
    (0..n)
        .map(|_| {
            let raw: Vec<f32> = (0..128).map(|_| r.random::<f32>()).collect();
            let norm = raw.iter().map(|v| v * v).sum::<f32>().sqrt();
            Descriptor::from_values(raw.iter().map(|v| v / norm).collect())
        })
        .collect()
}

/// Lossless 90° rotation: source `(x, y)` lands at `(h - 1 - y, x)`.
pub fn rotate90(image: &RasterImage) -> RasterImage {
    let (w, h) = (image.width(), image.height());
    RasterImage::from_fn(h, w, |x, y| image.get(y, h - 1 - x))
}

pub fn rotate_point(x: f32, y: f32, height: usize) -> (f32, f32) {
    (height as f32 - 1.0 - y, x)
}

/// 2×2 box downscale; output pixel `(i, j)` is centered on input `(2i + 0.5, 2j + 0.5)`.
pub fn downscale2(image: &RasterImage) -> RasterImage {
    RasterImage::from_fn(image.width() / 2, image.height() / 2, |x, y| {
        (image.get(2 * x, 2 * y)
            + image.get(2 * x + 1, 2 * y)
            + image.get(2 * x, 2 * y + 1)
            + image.get(2 * x + 1, 2 * y + 1))
            / 4.0
    })
}

pub fn nearest(kps: &[Keypoint], x: f32, y: f32) -> Option<(usize, f32)> {
    kps.iter()
        .enumerate()
        .map(|(i, k)| (i, (k.x - x).hypot(k.y - y)))
        .min_by(|a, b| a.1.total_cmp(&b.1))
}

pub fn angle_gap_degrees(a: f32, b: f32) -> f32 {
    let tau = std::f32::consts::TAU;
    let d = (a - b).rem_euclid(tau);
    d.min(tau - d).to_degrees()
}

/// Bilinear resample to an arbitrary size (used to build large test images).
pub fn resample(image: &RasterImage, width: usize, height: usize) -> RasterImage {
    let sx = (image.width() - 1) as f32 / (width - 1) as f32;
    let sy = (image.height() - 1) as f32 / (height - 1) as f32;
    RasterImage::from_fn(width, height, |x, y| {
        let (fx, fy) = (x as f32 * sx, y as f32 * sy);
        let (x0, y0) = (fx.floor() as usize, fy.floor() as usize);
        let (x1, y1) = (
            (x0 + 1).min(image.width() - 1),
            (y0 + 1).min(image.height() - 1),
        );
        let (ax, ay) = (fx - x0 as f32, fy - y0 as f32);
        let top = image.get(x0, y0) * (1.0 - ax) + image.get(x1, y0) * ax;
        let bottom = image.get(x0, y1) * (1.0 - ax) + image.get(x1, y1) * ax;
        top * (1.0 - ay) + bottom * ay
    })
}
