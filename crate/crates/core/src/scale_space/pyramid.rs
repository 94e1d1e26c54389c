use super::kernel::{convolve, make_kernel};
use super::{Keypoint, ScaleSpaceConfig, ScaleSpaceError};
use crate::image_io::{Plane, RasterImage};
use crate::par;

/// Floor applied to the squared seed blur when `sigma0` barely exceeds the
/// effective input blur.
const MIN_SEED_SIGMA_SQ: f64 = 0.01;

/// Shared bookkeeping for converting between input, base and octave coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PyramidGeometry {
    pub scales_per_octave: usize,
    pub sigma0: f64,
    /// Base-image pixels per input pixel (2 when upsampling).
    pub base_scale: f64,
    pub input_width: usize,
    pub input_height: usize,
}

impl PyramidGeometry {
    /// Absolute blur of level `level` in octave `octave`, in base-image pixels.
    pub fn level_sigma(&self, octave: usize, level: f64) -> f64 {
        self.sigma0 * 2f64.powf(octave as f64 + level / self.scales_per_octave as f64)
    }

    /// Input pixels per octave pixel.
    pub fn octave_step(&self, octave: usize) -> f64 {
        2f64.powi(octave as i32) / self.base_scale
    }

    /// Keypoint position and sigma expressed in its octave's pixel grid.
    pub fn to_octave(&self, kp: &Keypoint) -> (f64, f64, f64) {
        let step = self.octave_step(kp.octave);
        (
            kp.x as f64 / step,
            kp.y as f64 / step,
            kp.sigma as f64 / step,
        )
    }
}

#[derive(Debug, Clone)]
pub struct GaussianPyramid {
    pub geometry: PyramidGeometry,
    /// `octaves[o][l]`, `scales_per_octave + 3` levels per octave.
    pub octaves: Vec<Vec<Plane>>,
    /// `sigmas[o][l] = sigma0 * 2^(o + l/s)` in base-image pixels.
    pub sigmas: Vec<Vec<f64>>,
}

#[derive(Debug, Clone)]
pub struct DogPyramid {
    pub geometry: PyramidGeometry,
    /// `octaves[o][l] = G[o][l+1] - G[o][l]`, `scales_per_octave + 2` levels.
    pub octaves: Vec<Vec<Plane>>,
}

/// `floor(log2(min_side)) - 2`, or `None` when that is below one octave.
pub fn auto_octave_count(width: usize, height: usize) -> Option<usize> {
    let min_side = width.min(height);
    if min_side == 0 {
        return None;
    }
    let octaves = min_side.ilog2() as usize;
    (octaves > 2).then(|| octaves - 2)
}

/// 2× bilinear enlargement; output pixel `(i, j)` samples the input at `(i/2, j/2)`.
pub fn upsample_bilinear(image: &Plane) -> Plane {
    let (w, h) = (image.width(), image.height());
    let (ow, oh) = (2 * w, 2 * h);
    let mut out = vec![0.0f32; ow * oh];
    par::for_each_row(&mut out, ow, |oy, row| {
        let y0 = oy / 2;
        let y1 = (y0 + 1).min(h - 1);
        let fy = if oy % 2 == 1 { 0.5 } else { 0.0 };
        let (r0, r1) = (image.row(y0), image.row(y1));
        for (ox, o) in row.iter_mut().enumerate() {
            let x0 = ox / 2;
            let x1 = (x0 + 1).min(w - 1);
            let fx = if ox % 2 == 1 { 0.5 } else { 0.0 };
            let top = r0[x0] + fx * (r0[x1] - r0[x0]);
            let bottom = r1[x0] + fx * (r1[x1] - r1[x0]);
            *o = top + fy * (bottom - top);
        }
    });
    Plane::new(ow, oh, out).expect("positive dimensions")
}

/// Keeps even-indexed rows and columns; output is `floor(w/2) × floor(h/2)`.
pub fn decimate(image: &Plane) -> Plane {
    let (w, h) = (image.width() / 2, image.height() / 2);
    Plane::from_fn(w, h, |x, y| image.get(2 * x, 2 * y))
}

pub fn build_gaussian_pyramid(
    image: &RasterImage,
    config: &ScaleSpaceConfig,
) -> Result<GaussianPyramid, ScaleSpaceError> {
    config.validate()?;
    let s = config.scales_per_octave;

    let base = if config.upsample {
        upsample_bilinear(image.as_plane())
    } else {
        image.as_plane().clone()
    };
    let (bw, bh) = (base.width(), base.height());
    let too_small = |octaves: usize| ScaleSpaceError::ImageTooSmall {
        width: image.width(),
        height: image.height(),
        octaves,
        required: (8usize << (octaves.max(1) - 1)).div_ceil(config.base_scale() as usize),
    };
    let num_octaves = match config.num_octaves {
        Some(n) => {
            let required = 1usize
                .checked_shl(n as u32 - 1)
                .and_then(|v| v.checked_mul(8))
                .ok_or_else(|| too_small(n))?;
            if bw.min(bh) < required {
                return Err(too_small(n));
            }
            n
        }
        None => auto_octave_count(bw, bh).ok_or_else(|| too_small(1))?,
    };

    let geometry = PyramidGeometry {
        scales_per_octave: s,
        sigma0: config.sigma0,
        base_scale: config.base_scale(),
        input_width: image.width(),
        input_height: image.height(),
    };

    // Incremental blur taking level l-1 to level l, in octave pixels.
    let increments: Vec<f64> = (1..s + 3)
        .map(|l| {
            let prev = config.sigma0 * 2f64.powf((l - 1) as f64 / s as f64);
            let next = config.sigma0 * 2f64.powf(l as f64 / s as f64);
            (next * next - prev * prev).sqrt()
        })
        .collect();
    let kernels = increments
        .iter()
        .map(|&sigma| make_kernel(sigma))
        .collect::<Result<Vec<_>, _>>()?;

    let effective_blur = config.assumed_blur * config.base_scale();
    let seed_sigma =
        (config.sigma0 * config.sigma0 - effective_blur * effective_blur).max(MIN_SEED_SIGMA_SQ);
    let mut seed = convolve(&base, &make_kernel(seed_sigma.sqrt())?);

    let mut octaves = Vec::with_capacity(num_octaves);
    for o in 0..num_octaves {
        if o > 0 {
            let prev: &Vec<Plane> = &octaves[o - 1];
            seed = decimate(&prev[s]);
        }
        let mut levels = Vec::with_capacity(s + 3);
        levels.push(seed.clone());
        for kernel in &kernels {
            let next = convolve(levels.last().expect("seeded"), kernel);
            levels.push(next);
        }
        octaves.push(levels);
    }

    let sigmas = (0..num_octaves)
        .map(|o| {
            (0..s + 3)
                .map(|l| geometry.level_sigma(o, l as f64))
                .collect()
        })
        .collect();

    Ok(GaussianPyramid {
        geometry,
        octaves,
        sigmas,
    })
}

pub fn build_dog_pyramid(gp: &GaussianPyramid) -> DogPyramid {
    let octaves = gp
        .octaves
        .iter()
        .map(|levels| {
            let pairs: Vec<(&Plane, &Plane)> = levels.windows(2).map(|w| (&w[0], &w[1])).collect();
            par::map_slice(&pairs, |(lo, hi)| {
                let diff = hi
                    .data()
                    .iter()
                    .zip(lo.data())
                    .map(|(a, b)| a - b)
                    .collect();
                Plane::new(lo.width(), lo.height(), diff).expect("same dimensions")
            })
        })
        .collect();
    DogPyramid {
        geometry: gp.geometry,
        octaves,
    }
}
