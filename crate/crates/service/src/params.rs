//! Form-field overrides for detector and matcher parameters.

use std::str::FromStr;

use siftsvc_core::{MatchConfig, SiftConfig};

use crate::error::ApiError;

/// Detector fields, named exactly as in `ScaleSpaceConfig`.
pub const DETECTOR_FIELDS: &[&str] = &[
    "scales_per_octave",
    "sigma0",
    "assumed_blur",
    "upsample",
    "num_octaves",
    "contrast_threshold",
    "edge_ratio",
    "border",
    "max_refine_steps",
];

pub const MATCHER_FIELDS: &[&str] = &["ratio_threshold", "cross_check"];

fn parse<T: FromStr>(field: &str, value: &str) -> Result<T, ApiError>
where
    T::Err: std::fmt::Display,
{
    value
        .trim()
        .parse()
        .map_err(|e: T::Err| ApiError::invalid_parameter(field, format!("{value:?}: {e}")))
}

fn parse_bool(field: &str, value: &str) -> Result<bool, ApiError> {
    match value.trim() {
        "true" | "1" | "on" | "yes" => Ok(true),
        "false" | "0" | "off" | "no" => Ok(false),
        other => Err(ApiError::invalid_parameter(
            field,
            format!("{other:?} is not a boolean"),
        )),
    }
}

/// Applies one detector override. Returns `Ok(false)` if `field` is not a detector field.
pub fn apply_detector_field(
    config: &mut SiftConfig,
    field: &str,
    value: &str,
) -> Result<bool, ApiError> {
    let s = &mut config.scale_space;
    match field {
        "scales_per_octave" => s.scales_per_octave = parse(field, value)?,
        "sigma0" => s.sigma0 = parse(field, value)?,
        "assumed_blur" => s.assumed_blur = parse(field, value)?,
        "upsample" => s.upsample = parse_bool(field, value)?,
        "num_octaves" => {
            s.num_octaves = match value.trim() {
                "" | "auto" => None,
                v => Some(parse(field, v)?),
            }
        }
        "contrast_threshold" => s.contrast_threshold = parse(field, value)?,
        "edge_ratio" => s.edge_ratio = parse(field, value)?,
        "border" => s.border = parse(field, value)?,
        "max_refine_steps" => s.max_refine_steps = parse(field, value)?,
        _ => return Ok(false),
    }
    Ok(true)
}

pub fn apply_matcher_field(
    config: &mut MatchConfig,
    field: &str,
    value: &str,
) -> Result<bool, ApiError> {
    match field {
        "ratio_threshold" => config.ratio_threshold = parse(field, value)?,
        "cross_check" => config.cross_check = parse_bool(field, value)?,
        _ => return Ok(false),
    }
    Ok(true)
}

pub fn validate_detector(config: &SiftConfig) -> Result<(), ApiError> {
    config
        .validate()
        .map_err(|e| ApiError::out_of_range(e.field, &e.message))
}

pub fn validate_matcher(config: &MatchConfig) -> Result<(), ApiError> {
    config
        .validate()
        .map_err(|e| ApiError::out_of_range(e.field, &e.message))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn overrides_every_detector_field() {
        let mut c = SiftConfig::default();
        for (f, v) in [
            ("scales_per_octave", "4"),
            ("sigma0", "2.0"),
            ("assumed_blur", "0.4"),
            ("upsample", "false"),
            ("num_octaves", "3"),
            ("contrast_threshold", " 0.05 "),
            ("edge_ratio", "12"),
            ("border", "6"),
            ("max_refine_steps", "4"),
        ] {
            assert!(apply_detector_field(&mut c, f, v).unwrap(), "{f}");
        }
        let s = c.scale_space;
        assert_eq!(
            (
                s.scales_per_octave,
                s.sigma0,
                s.upsample,
                s.num_octaves,
                s.contrast_threshold
            ),
            (4, 2.0, false, Some(3), 0.05)
        );
        assert_eq!(
            (s.edge_ratio, s.border, s.max_refine_steps, s.assumed_blur),
            (12.0, 6, 4, 0.4)
        );
        apply_detector_field(&mut c, "num_octaves", "auto").unwrap();
        assert_eq!(c.scale_space.num_octaves, None);
        assert_eq!(DETECTOR_FIELDS.len(), 9);
    }

    #[test]
    fn unknown_and_malformed_fields() {
        let mut c = SiftConfig::default();
        assert!(!apply_detector_field(&mut c, "gamma", "1").unwrap());
        let err = apply_detector_field(&mut c, "sigma0", "abc").unwrap_err();
        assert_eq!((err.code, err.status.as_u16()), ("invalid-parameter", 422));
        assert!(apply_detector_field(&mut c, "scales_per_octave", "-1").is_err());
        assert!(apply_detector_field(&mut c, "upsample", "maybe").is_err());
    }

    #[test]
    fn range_errors_name_the_field() {
        let mut c = SiftConfig::default();
        apply_detector_field(&mut c, "contrast_threshold", "-0.1").unwrap();
        let err = validate_detector(&c).unwrap_err();
        assert_eq!(err.code, "parameter-out-of-range");
        assert_eq!(err.part.as_deref(), Some("contrast_threshold"));

        let mut m = MatchConfig::default();
        apply_matcher_field(&mut m, "ratio_threshold", "1.5").unwrap();
        assert_eq!(validate_matcher(&m).unwrap_err().status.as_u16(), 422);
        apply_matcher_field(&mut m, "ratio_threshold", "0").unwrap();
        assert!(validate_matcher(&m).is_ok());
        apply_matcher_field(&mut m, "cross_check", "true").unwrap();
        assert!(m.cross_check);
    }
}
