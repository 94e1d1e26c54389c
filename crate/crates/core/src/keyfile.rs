//! Plain-text keypoint files in the layout of the classic SIFT demo binary.
//!
//! ```text
//! <count> <descriptor_dim>
//! <y> <x> <sigma> <orientation>
//!  <descriptor bytes, 20 per line>
//! ...
//! ```
//!
//! Rows list `y` before `x`. Descriptor components are byte-quantized as
//! `min(255, round(512 · v))`. The reader accepts any whitespace layout.

use std::fmt::Write as _;

use thiserror::Error;

use crate::detect::Features;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum KeyFileError {
    #[error("keypoint file ends early: {0}")]
    Truncated(String),
    #[error("bad token {token:?} at {what}")]
    BadToken { token: String, what: String },
    #[error("trailing data after {0} keypoints")]
    TrailingData(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct KeyRecord {
    pub y: f32,
    pub x: f32,
    pub sigma: f32,
    pub orientation: f32,
    pub descriptor: Vec<u8>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct KeypointFile {
    pub descriptor_dim: usize,
    pub records: Vec<KeyRecord>,
}

const BYTES_PER_LINE: usize = 20;

impl KeypointFile {
    pub fn from_features(features: &Features, descriptor_dim: usize) -> Self {
        let records = features
            .keypoints
            .iter()
            .zip(&features.descriptors)
            .map(|(k, d)| KeyRecord {
                y: k.y,
                x: k.x,
                sigma: k.sigma,
                orientation: k.orientation,
                descriptor: d.to_bytes(),
            })
            .collect();
        KeypointFile {
            descriptor_dim,
            records,
        }
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        writeln!(out, "{} {}", self.records.len(), self.descriptor_dim).unwrap();
        for r in &self.records {
            writeln!(
                out,
                "{:.4} {:.4} {:.4} {:.4}",
                r.y, r.x, r.sigma, r.orientation
            )
            .unwrap();
            for chunk in r.descriptor.chunks(BYTES_PER_LINE) {
                for b in chunk {
                    write!(out, " {b}").unwrap();
                }
                out.push('\n');
            }
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self, KeyFileError> {
        let mut tokens = text.split_ascii_whitespace();
        let mut next = |what: &str| {
            tokens
                .next()
                .ok_or_else(|| KeyFileError::Truncated(what.to_string()))
        };
        fn num<T: std::str::FromStr>(token: &str, what: &str) -> Result<T, KeyFileError> {
            token.parse().map_err(|_| KeyFileError::BadToken {
                token: token.to_string(),
                what: what.to_string(),
            })
        }

        let count: usize = num(next("header count")?, "header count")?;
        let descriptor_dim: usize = num(next("header dim")?, "header dim")?;
        let mut records = Vec::with_capacity(count.min(1 << 20));
        for i in 0..count {
            let ctx = |field: &str| format!("keypoint {i} {field}");
            let y = num(next(&ctx("y"))?, &ctx("y"))?;
            let x = num(next(&ctx("x"))?, &ctx("x"))?;
            let sigma = num(next(&ctx("sigma"))?, &ctx("sigma"))?;
            let orientation = num(next(&ctx("orientation"))?, &ctx("orientation"))?;
            let descriptor = (0..descriptor_dim)
                .map(|_| num::<u8>(next(&ctx("descriptor"))?, &ctx("descriptor")))
                .collect::<Result<Vec<_>, _>>()?;
            records.push(KeyRecord {
                y,
                x,
                sigma,
                orientation,
                descriptor,
            });
        }
        if tokens.next().is_some() {
            return Err(KeyFileError::TrailingData(count));
        }
        Ok(KeypointFile {
            descriptor_dim,
            records,
        })
    }
}
