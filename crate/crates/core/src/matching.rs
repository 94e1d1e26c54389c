//! Brute-force nearest-neighbor matching with the distance-ratio test.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::features::Descriptor;
use crate::par;
use crate::scale_space::ConfigError;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MatchError {
    #[error("descriptor dimensions differ: {0} vs {1}")]
    DimensionMismatch(usize, usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Match {
    pub index_a: usize,
    pub index_b: usize,
    /// Euclidean distance to the nearest neighbor in B.
    pub distance: f64,
    /// Nearest over second-nearest distance.
    pub ratio: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MatchConfig {
    /// Accept when `nearest / second_nearest < ratio_threshold`.
    pub ratio_threshold: f64,
    /// Also require A's match to be B's nearest neighbor in A.
    pub cross_check: bool,
}

impl Default for MatchConfig {
    fn default() -> Self {
        MatchConfig {
            ratio_threshold: 0.8,
            cross_check: false,
        }
    }
}

impl MatchConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(0.0..=1.0).contains(&self.ratio_threshold) {
            return Err(ConfigError::new("ratio_threshold", "must be in [0, 1]"));
        }
        Ok(())
    }
}

/// Euclidean distance, accumulated in `f64`.
pub fn distance(a: &[f32], b: &[f32]) -> Result<f64, MatchError> {
    if a.len() != b.len() {
        return Err(MatchError::DimensionMismatch(a.len(), b.len()));
    }
    Ok(squared(a, b).sqrt())
}

#[inline]
fn squared(a: &[f32], b: &[f32]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(&x, &y)| {
            let d = x as f64 - y as f64;
            d * d
        })
        .sum()
}

/// Nearest and second-nearest squared distances; ties keep the lower index.
fn two_nearest(query: &[f32], set: &[Descriptor]) -> (usize, f64, f64) {
    let (mut best, mut best_d, mut second_d) = (0usize, f64::INFINITY, f64::INFINITY);
    for (j, candidate) in set.iter().enumerate() {
        let d = squared(query, candidate.values());
        if d < best_d {
            second_d = best_d;
            best_d = d;
            best = j;
        } else if d < second_d {
            second_d = d;
        }
    }
    (best, best_d, second_d)
}

fn check_dims(a: &[Descriptor], b: &[Descriptor]) -> Result<(), MatchError> {
    let dim = a.first().or(b.first()).map(Descriptor::len).unwrap_or(0);
    match a.iter().chain(b).find(|d| d.len() != dim) {
        Some(bad) => Err(MatchError::DimensionMismatch(dim, bad.len())),
        None => Ok(()),
    }
}

/// For each descriptor of `set_a`, finds the two nearest in `set_b` and keeps the
/// pair when the distance ratio is below the threshold.
///
/// When both neighbors sit at the same distance the ratio is 1, so exact
/// duplicates in `set_b` never match. Returns an empty list when `set_b` has
/// fewer than two descriptors. Output is sorted by `index_a`.
pub fn match_descriptors(
    set_a: &[Descriptor],
    set_b: &[Descriptor],
    config: &MatchConfig,
) -> Result<Vec<Match>, MatchError> {
    check_dims(set_a, set_b)?;
    if set_b.len() < 2 {
        return Ok(Vec::new());
    }

    let reverse: Option<Vec<usize>> = config.cross_check.then(|| {
        par::map_slice(set_b, |b| {
            if set_a.is_empty() {
                usize::MAX
            } else {
                two_nearest(b.values(), set_a).0
            }
        })
    });

    let candidates = par::map_range(set_a.len(), |i| {
        let (j, nearest, second) = two_nearest(set_a[i].values(), set_b);
        let (nearest, second) = (nearest.sqrt(), second.sqrt());
        let ratio = if second > 0.0 { nearest / second } else { 1.0 };
        (ratio < config.ratio_threshold).then_some(Match {
            index_a: i,
            index_b: j,
            distance: nearest,
            ratio,
        })
    });

    Ok(candidates
        .into_iter()
        .flatten()
        .filter(|m| reverse.as_ref().is_none_or(|r| r[m.index_b] == m.index_a))
        .collect())
}
