//! JSON documents for detect and match results.
//!
//! The CLI (`--format json`) and the HTTP service both serialize through this
//! module, so equal inputs produce byte-identical bodies. Coordinates, scales,
//! angles, responses, descriptor values and distances are rounded to six
//! significant digits unless [`Precision::Full`] is requested.

use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::detect::Features;
use crate::matching::{Match, MatchConfig};
use crate::scale_space::{Keypoint, ScaleSpaceConfig};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum Precision {
    #[default]
    Six,
    Full,
}

impl FromStr for Precision {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "6" | "six" | "default" => Ok(Precision::Six),
            "full" => Ok(Precision::Full),
            other => Err(format!(
                "unknown precision {other:?} (expected \"full\" or \"six\")"
            )),
        }
    }
}

impl Precision {
    pub fn apply(self, v: f64) -> f64 {
        match self {
            Precision::Full => v,
            Precision::Six => round_significant(v),
        }
    }
}

/// Rounds to six significant digits via decimal formatting, so the shortest
/// round-trip representation printed by `serde_json` has at most six digits.
pub fn round_significant(v: f64) -> f64 {
    if !v.is_finite() || v == 0.0 {
        return v;
    }
    format!("{v:.5e}").parse().unwrap_or(v)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KeypointRecord {
    pub x: f64,
    pub y: f64,
    pub sigma: f64,
    pub orientation: f64,
    pub response: f64,
}

impl KeypointRecord {
    pub fn new(kp: &Keypoint, precision: Precision) -> Self {
        KeypointRecord {
            x: precision.apply(kp.x as f64),
            y: precision.apply(kp.y as f64),
            sigma: precision.apply(kp.sigma as f64),
            orientation: precision.apply(kp.orientation as f64),
            response: precision.apply(kp.response as f64),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectResponse {
    pub keypoints: Vec<KeypointRecord>,
    pub descriptors: Vec<Vec<f64>>,
    pub image_width: usize,
    pub image_height: usize,
    pub parameters: ScaleSpaceConfig,
    pub timing_ms: f64,
}

impl DetectResponse {
    pub fn new(
        image_width: usize,
        image_height: usize,
        parameters: &ScaleSpaceConfig,
        features: &Features,
        timing_ms: f64,
        precision: Precision,
    ) -> Self {
        DetectResponse {
            keypoints: features
                .keypoints
                .iter()
                .map(|k| KeypointRecord::new(k, precision))
                .collect(),
            descriptors: features
                .descriptors
                .iter()
                .map(|d| {
                    d.values()
                        .iter()
                        .map(|&v| precision.apply(v as f64))
                        .collect()
                })
                .collect(),
            image_width,
            image_height,
            parameters: *parameters,
            timing_ms: round_timing(timing_ms),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("plain data serializes")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchRecord {
    pub index_a: usize,
    pub index_b: usize,
    pub distance: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchParameters {
    #[serde(flatten)]
    pub detector: ScaleSpaceConfig,
    pub ratio_threshold: f64,
    pub cross_check: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchResponse {
    pub count_a: usize,
    pub count_b: usize,
    pub matches: Vec<MatchRecord>,
    /// Geometry of both keypoint sets so clients can draw the matches.
    pub keypoints_a: Vec<KeypointRecord>,
    pub keypoints_b: Vec<KeypointRecord>,
    pub parameters: MatchParameters,
    pub timing_ms: f64,
}

impl MatchResponse {
    pub fn new(
        a: &Features,
        b: &Features,
        matches: &[Match],
        detector: &ScaleSpaceConfig,
        matcher: &MatchConfig,
        timing_ms: f64,
        precision: Precision,
    ) -> Self {
        let records = |f: &Features| {
            f.keypoints
                .iter()
                .map(|k| KeypointRecord::new(k, precision))
                .collect()
        };
        MatchResponse {
            count_a: a.keypoints.len(),
            count_b: b.keypoints.len(),
            matches: matches
                .iter()
                .map(|m| MatchRecord {
                    index_a: m.index_a,
                    index_b: m.index_b,
                    distance: precision.apply(m.distance),
                    ratio: precision.apply(m.ratio),
                })
                .collect(),
            keypoints_a: records(a),
            keypoints_b: records(b),
            parameters: MatchParameters {
                detector: *detector,
                ratio_threshold: matcher.ratio_threshold,
                cross_check: matcher.cross_check,
            },
            timing_ms: round_timing(timing_ms),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("plain data serializes")
    }
}

fn round_timing(ms: f64) -> f64 {
    (ms * 1000.0).round() / 1000.0
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::Descriptor;

    #[test]
    fn six_significant_digits() {
        assert_eq!(round_significant(0.123456789), 0.123457);
        assert_eq!(round_significant(1234.5678), 1234.57);
        assert_eq!(round_significant(-0.000123456789), -0.000123457);
        assert_eq!(round_significant(0.0), 0.0);
        assert_eq!(
            serde_json::to_string(&round_significant(2.0f32.sqrt() as f64)).unwrap(),
            "1.41421"
        );
    }

    #[test]
    fn empty_detect_document() {
        let features = Features {
            keypoints: vec![],
            descriptors: vec![],
        };
        let doc = DetectResponse::new(
            4,
            3,
            &ScaleSpaceConfig::default(),
            &features,
            1.25,
            Precision::Six,
        );
        let json = doc.to_json();
        assert!(json.starts_with(
            r#"{"keypoints":[],"descriptors":[],"image_width":4,"image_height":3,"parameters":{"#
        ));
        assert!(json.ends_with(r#""timing_ms":1.25}"#));
        let back: DetectResponse = serde_json::from_str(&json).unwrap();
        assert_eq!(back, doc);
    }

    #[test]
    fn precision_full_keeps_f32_values() {
        let kp = Keypoint {
            x: 1.0 / 3.0,
            y: 2.0,
            octave: 0,
            level: 1,
            sigma: 1.6,
            orientation: 0.5,
            response: -0.04,
        };
        let features = Features {
            keypoints: vec![kp],
            descriptors: vec![Descriptor::from_values(vec![0.1; 4])],
        };
        let full = DetectResponse::new(
            4,
            4,
            &ScaleSpaceConfig::default(),
            &features,
            0.0,
            Precision::Full,
        );
        assert_eq!(full.keypoints[0].x, (1.0f32 / 3.0) as f64);
        let six = DetectResponse::new(
            4,
            4,
            &ScaleSpaceConfig::default(),
            &features,
            0.0,
            Precision::Six,
        );
        assert_eq!(six.keypoints[0].x, 0.333333);
        assert!(six.to_json().contains(r#""x":0.333333"#));
    }

    #[test]
    fn match_parameters_flatten() {
        let empty = Features {
            keypoints: vec![],
            descriptors: vec![],
        };
        let doc = MatchResponse::new(
            &empty,
            &empty,
            &[],
            &ScaleSpaceConfig::default(),
            &MatchConfig::default(),
            0.0,
            Precision::Six,
        );
        let json = doc.to_json();
        assert!(json.contains(r#""contrast_threshold":0.03"#));
        assert!(json.contains(r#""ratio_threshold":0.8"#));
        let back: MatchResponse = serde_json::from_str(&json).unwrap();
        assert_eq!(back, doc);
    }
}
