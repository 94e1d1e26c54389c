use super::pyramid::DogPyramid;
use super::{Keypoint, ScaleSpaceConfig};
use crate::image_io::Plane;
use crate::par;

/// A raw DoG sample that beats all 26 scale-space neighbors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Extremum {
    pub octave: usize,
    pub level: usize,
    pub x: usize,
    pub y: usize,
}

/// Why refinement discarded a candidate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Rejection {
    LowContrast,
    Edge,
    /// The offset kept pointing outside the sample cell, left the valid region,
    /// or the Hessian was singular.
    Diverged,
}

fn is_strict_extremum(below: &Plane, here: &Plane, above: &Plane, x: usize, y: usize) -> bool {
    let v = here.get(x, y);
    let beats = |p: &Plane, skip_center: bool| {
        (y - 1..=y + 1).all(|ny| {
            (x - 1..=x + 1).all(|nx| {
                (skip_center && nx == x && ny == y)
                    || if v > 0.0 {
                        v > p.get(nx, ny)
                    } else {
                        v < p.get(nx, ny)
                    }
            })
        })
    };
    v != 0.0 && beats(here, true) && beats(below, false) && beats(above, false)
}

/// Scans levels `1..=s` of every octave for strict 26-neighbor extrema with
/// `|D| >= contrast_threshold / 2`, at least `border` pixels from each edge.
///
/// Output is ordered by (octave, level, y, x).
pub fn find_extrema(dp: &DogPyramid, config: &ScaleSpaceConfig) -> Vec<Extremum> {
    let s = config.scales_per_octave;
    let prefilter = (0.5 * config.contrast_threshold) as f32;
    let border = config.border.max(1);

    let mut rows = Vec::new();
    for (octave, levels) in dp.octaves.iter().enumerate() {
        if levels.len() < 3 {
            continue;
        }
        let (w, h) = (levels[0].width(), levels[0].height());
        if w < 2 * border + 1 || h < 2 * border + 1 {
            continue;
        }
        for level in 1..=s.min(levels.len() - 2) {
            for y in border..h - border {
                rows.push((octave, level, y));
            }
        }
    }

    par::map_slice(&rows, |&(octave, level, y)| {
        let levels = &dp.octaves[octave];
        let (below, here, above) = (&levels[level - 1], &levels[level], &levels[level + 1]);
        let w = here.width();
        (border..w - border)
            .filter(|&x| {
                here.get(x, y).abs() >= prefilter && is_strict_extremum(below, here, above, x, y)
            })
            .map(|x| Extremum {
                octave,
                level,
                x,
                y,
            })
            .collect::<Vec<_>>()
    })
    .into_iter()
    .flatten()
    .collect()
}

struct LocalFit {
    value: f64,
    gradient: [f64; 3],
    hessian: [[f64; 3]; 3],
}

fn local_fit(levels: &[Plane], level: usize, x: usize, y: usize) -> LocalFit {
    let (below, here, above) = (&levels[level - 1], &levels[level], &levels[level + 1]);
    let at = |p: &Plane, dx: isize, dy: isize| {
        p.get((x as isize + dx) as usize, (y as isize + dy) as usize) as f64
    };
    let v = at(here, 0, 0);
    let dx = 0.5 * (at(here, 1, 0) - at(here, -1, 0));
    let dy = 0.5 * (at(here, 0, 1) - at(here, 0, -1));
    let ds = 0.5 * (at(above, 0, 0) - at(below, 0, 0));
    let dxx = at(here, 1, 0) + at(here, -1, 0) - 2.0 * v;
    let dyy = at(here, 0, 1) + at(here, 0, -1) - 2.0 * v;
    let dss = at(above, 0, 0) + at(below, 0, 0) - 2.0 * v;
    let dxy = 0.25 * (at(here, 1, 1) - at(here, -1, 1) - at(here, 1, -1) + at(here, -1, -1));
    let dxs = 0.25 * (at(above, 1, 0) - at(above, -1, 0) - at(below, 1, 0) + at(below, -1, 0));
    let dys = 0.25 * (at(above, 0, 1) - at(above, 0, -1) - at(below, 0, 1) + at(below, 0, -1));
    LocalFit {
        value: v,
        gradient: [dx, dy, ds],
        hessian: [[dxx, dxy, dxs], [dxy, dyy, dys], [dxs, dys, dss]],
    }
}

/// Solves `a · x = b` by Cramer's rule; `None` when `a` is (near) singular.
fn solve3(a: &[[f64; 3]; 3], b: [f64; 3]) -> Option<[f64; 3]> {
    let det3 = |m: &[[f64; 3]; 3]| {
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    };
    let det = det3(a);
    let scale = a.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
    if !det.is_finite() || det.abs() <= 1e-12 * scale.powi(3) || scale == 0.0 {
        return None;
    }
    let mut out = [0.0; 3];
    for (col, slot) in out.iter_mut().enumerate() {
        let mut m = *a;
        for row in 0..3 {
            m[row][col] = b[row];
        }
        *slot = det3(&m) / det;
    }
    Some(out)
}

/// Fits a quadratic to the DoG around `loc`, iterating toward the sample whose
/// cell contains the interpolated extremum, then applies the contrast and edge
/// tests. Coordinates of the returned keypoint are in input-image pixels.
pub fn refine_extremum(
    dp: &DogPyramid,
    loc: &Extremum,
    config: &ScaleSpaceConfig,
) -> Result<Keypoint, Rejection> {
    let geometry = &dp.geometry;
    let s = config.scales_per_octave;
    let levels = &dp.octaves[loc.octave];
    let (w, h) = (levels[0].width(), levels[0].height());
    let border = config.border.max(1);

    let (mut level, mut x, mut y) = (loc.level, loc.x, loc.y);
    let mut converged = None;
    for _ in 0..config.max_refine_steps {
        let fit = local_fit(levels, level, x, y);
        let g = fit.gradient;
        let offset = solve3(&fit.hessian, [-g[0], -g[1], -g[2]]).ok_or(Rejection::Diverged)?;
        if offset.iter().all(|o| o.abs() <= 0.5) {
            converged = Some((fit, offset, level, x, y));
            break;
        }
        if offset.iter().any(|o| !o.is_finite() || o.abs() > 1e6) {
            return Err(Rejection::Diverged);
        }
        let nx = x as i64 + offset[0].round() as i64;
        let ny = y as i64 + offset[1].round() as i64;
        let nl = level as i64 + offset[2].round() as i64;
        if nl < 1
            || nl > s as i64
            || nx < border as i64
            || ny < border as i64
            || nx > (w - 1 - border) as i64
            || ny > (h - 1 - border) as i64
        {
            return Err(Rejection::Diverged);
        }
        (level, x, y) = (nl as usize, nx as usize, ny as usize);
    }
    let (fit, offset, level, x, y) = converged.ok_or(Rejection::Diverged)?;

    let g = fit.gradient;
    let response = fit.value + 0.5 * (g[0] * offset[0] + g[1] * offset[1] + g[2] * offset[2]);
    if response.abs() < config.contrast_threshold {
        return Err(Rejection::LowContrast);
    }

    let (dxx, dyy, dxy) = (fit.hessian[0][0], fit.hessian[1][1], fit.hessian[0][1]);
    let trace = dxx + dyy;
    let det = dxx * dyy - dxy * dxy;
    let r = config.edge_ratio;
    if det <= 0.0 || trace * trace * r >= (r + 1.0) * (r + 1.0) * det {
        return Err(Rejection::Edge);
    }

    let step = geometry.octave_step(loc.octave);
    let kx = (x as f64 + offset[0]) * step;
    let ky = (y as f64 + offset[1]) * step;
    let sigma = geometry.level_sigma(loc.octave, level as f64 + offset[2]) / geometry.base_scale;
    let (kx, ky) = (kx as f32, ky as f32);
    if !(kx >= 0.0
        && ky >= 0.0
        && kx < geometry.input_width as f32
        && ky < geometry.input_height as f32)
    {
        return Err(Rejection::Diverged);
    }

    Ok(Keypoint {
        x: kx,
        y: ky,
        octave: loc.octave,
        level,
        sigma: sigma as f32,
        orientation: 0.0,
        response: response as f32,
    })
}
