//! One-hot labeler rows appended to signal descriptors.
//!
//! `v1` sets the row of the annotating labeler. `v2` keeps the `v1` rows and
//! adds one row per unordered labeler pair, set for every pair that contains
//! the annotating labeler. Pairs are ordered lexicographically.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SchemeKind {
    None,
    V1,
    V2,
}

impl SchemeKind {
    pub fn as_str(self) -> &'static str {
        match self {
            SchemeKind::None => "none",
            SchemeKind::V1 => "v1",
            SchemeKind::V2 => "v2",
        }
    }
}

impl fmt::Display for SchemeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SchemeKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "none" => Ok(SchemeKind::None),
            "v1" => Ok(SchemeKind::V1),
            "v2" => Ok(SchemeKind::V2),
            other => Err(format!("unknown encoding scheme {other:?}")),
        }
    }
}

/// An encoding scheme bound to a labeler count.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct EncodingScheme {
    pub kind: SchemeKind,
    pub k: usize,
}

impl EncodingScheme {
    pub fn new(kind: SchemeKind, k: usize) -> Self {
        EncodingScheme { kind, k }
    }

    pub fn none() -> Self {
        EncodingScheme {
            kind: SchemeKind::None,
            k: 0,
        }
    }

    pub fn encoded_length(&self) -> usize {
        match self.kind {
            SchemeKind::None => 0,
            SchemeKind::V1 => self.k,
            SchemeKind::V2 => self.k + self.k * self.k.saturating_sub(1) / 2,
        }
    }

    /// Labeler pairs in row order: (0,1), (0,2), ..., (K-2, K-1).
    pub fn pairs(&self) -> Vec<(usize, usize)> {
        (0..self.k)
            .flat_map(|i| (i + 1..self.k).map(move |j| (i, j)))
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DetectionMode {
    Agnostic,
    Voting,
}

impl DetectionMode {
    pub fn as_str(self) -> &'static str {
        match self {
            DetectionMode::Agnostic => "agnostic",
            DetectionMode::Voting => "voting",
        }
    }
}

impl fmt::Display for DetectionMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for DetectionMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "agnostic" => Ok(DetectionMode::Agnostic),
            "voting" => Ok(DetectionMode::Voting),
            other => Err(format!("unknown detection mode {other:?}")),
        }
    }
}

/// Labeler rows for one annotating labeler.
pub fn encode_labeler(labeler: usize, scheme: &EncodingScheme) -> Result<Vec<f64>> {
    if scheme.kind == SchemeKind::None {
        return Ok(Vec::new());
    }
    if labeler >= scheme.k {
        return Err(Error::LabelerOutOfRange {
            index: labeler,
            k: scheme.k,
        });
    }
    let mut rows = vec![0.0; scheme.encoded_length()];
    rows[labeler] = 1.0;
    if scheme.kind == SchemeKind::V2 {
        for (p, (i, j)) in scheme.pairs().into_iter().enumerate() {
            if i == labeler || j == labeler {
                rows[scheme.k + p] = 1.0;
            }
        }
    }
    Ok(rows)
}

fn check_len(features: &[f64], expected: usize) -> Result<()> {
    if features.len() != expected {
        return Err(Error::Dimension {
            expected,
            actual: features.len(),
        });
    }
    Ok(())
}

/// `[signal features | labeler rows]`. `labeler = None` gives all-zero rows,
/// which is how consensus examples are encoded.
pub fn assemble_training_example(
    features: &[f64],
    n_features: usize,
    labeler: Option<usize>,
    scheme: &EncodingScheme,
) -> Result<Vec<f64>> {
    check_len(features, n_features)?;
    let mut out = Vec::with_capacity(n_features + scheme.encoded_length());
    out.extend_from_slice(features);
    match labeler {
        Some(l) => out.extend(encode_labeler(l, scheme)?),
        None => out.resize(n_features + scheme.encoded_length(), 0.0),
    }
    Ok(out)
}

/// Detection-time descriptor with every labeler row set to zero.
pub fn assemble_agnostic(
    features: &[f64],
    n_features: usize,
    scheme: &EncodingScheme,
) -> Result<Vec<f64>> {
    assemble_training_example(features, n_features, None, scheme)
}

/// One descriptor per labeler, each encoded as if that labeler had annotated
/// the event. With `force_v1`, only the single-labeler row is set even under
/// `v2`.
pub fn assemble_voting_set(
    features: &[f64],
    n_features: usize,
    scheme: &EncodingScheme,
    force_v1: bool,
) -> Result<Vec<Vec<f64>>> {
    if scheme.kind == SchemeKind::None {
        return Err(Error::VotingWithoutScheme);
    }
    (0..scheme.k)
        .map(|l| {
            let mut v = assemble_training_example(features, n_features, Some(l), scheme)?;
            if force_v1 {
                for x in &mut v[n_features + scheme.k..] {
                    *x = 0.0;
                }
            }
            Ok(v)
        })
        .collect()
}
