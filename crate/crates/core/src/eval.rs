//! Average precision, imbalanced test sets, multi-labeler evaluation and the
//! per-labeler quality report.
//!
//! AP is step-interpolated with tied scores grouped into one threshold:
//! `AP = sum_k (R_k - R_{k-1}) * P_k` over distinct thresholds in descending
//! order.

use std::collections::HashMap;
use std::io::Write;

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::consensus::{consensus_events, event_centers, AnnotationIndex, CenterKey, FeatureStore};
use crate::encoding::{assemble_agnostic, assemble_voting_set, DetectionMode, SchemeKind};
use crate::error::{Error, Result};
use crate::gbdt::Ensemble;
use crate::signal::{to_sample, DatasetManifest, Polarity, RecordingEntry};
use crate::stats::compensated_mean;
use crate::synth::mix_seed;

/// Name of the AP variant, stored in report metadata.
pub const AP_DEFINITION: &str = "step-interpolated, ties grouped per threshold";

fn check_inputs(scores: &[f64], labels: &[u8]) -> Result<usize> {
    if scores.len() != labels.len() {
        return Err(Error::Dimension {
            expected: scores.len(),
            actual: labels.len(),
        });
    }
    if scores.iter().any(|s| s.is_nan()) {
        return Err(Error::Other("NaN score".into()));
    }
    let n_pos = labels.iter().filter(|&&l| l == 1).count();
    if n_pos == 0 {
        return Err(Error::NoPositives);
    }
    Ok(n_pos)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PRCurve {
    /// Distinct scores, descending.
    pub thresholds: Vec<f64>,
    pub precision: Vec<f64>,
    pub recall: Vec<f64>,
}

/// Precision and recall when predicting positive for `score >= threshold`,
/// at every distinct score.
pub fn pr_curve(scores: &[f64], labels: &[u8]) -> Result<PRCurve> {
    let n_pos = check_inputs(scores, labels)?;
    let mut idx: Vec<usize> = (0..scores.len()).collect();
    idx.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));
    let mut curve = PRCurve {
        thresholds: Vec::new(),
        precision: Vec::new(),
        recall: Vec::new(),
    };
    let (mut tp, mut fp) = (0usize, 0usize);
    let mut i = 0;
    while i < idx.len() {
        let s = scores[idx[i]];
        while i < idx.len() && scores[idx[i]] == s {
            if labels[idx[i]] == 1 {
                tp += 1;
            } else {
                fp += 1;
            }
            i += 1;
        }
        curve.thresholds.push(s);
        curve.precision.push(tp as f64 / (tp + fp) as f64);
        curve.recall.push(tp as f64 / n_pos as f64);
    }
    Ok(curve)
}

pub fn average_precision(scores: &[f64], labels: &[u8]) -> Result<f64> {
    let c = pr_curve(scores, labels)?;
    let mut ap = 0.0;
    let mut prev = 0.0;
    for (r, p) in c.recall.iter().zip(&c.precision) {
        ap += (r - prev) * p;
        prev = *r;
    }
    Ok(ap)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestParams {
    /// Negatives per positive in each negative set.
    pub ratio: usize,
    pub n_sets: usize,
    pub seed: u64,
}

impl Default for TestParams {
    fn default() -> Self {
        TestParams {
            ratio: 20,
            n_sets: 5,
            seed: 0,
        }
    }
}

/// Test examples of one recording under one 3-labeler consensus.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestCell {
    pub recording_id: String,
    pub labelers: Vec<String>,
    pub positives: Vec<CenterKey>,
    pub negative_sets: Vec<Vec<CenterKey>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestSetBundle {
    pub params: TestParams,
    pub cells: Vec<TestCell>,
    /// Recordings or cells left out, with the reason.
    pub warnings: Vec<String>,
}

impl TestSetBundle {
    pub fn keys(&self) -> impl Iterator<Item = &CenterKey> {
        self.cells
            .iter()
            .flat_map(|c| c.positives.iter().chain(c.negative_sets.iter().flatten()))
    }
}

/// All `k`-subsets of `0..n` in lexicographic order.
pub fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(k);
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    rec(0, n, k, &mut cur, &mut out);
    out
}

fn recording_labelers<'a>(manifest: &'a DatasetManifest, entry: &RecordingEntry) -> Vec<&'a str> {
    // manifest order, restricted to labelers of this recording
    manifest
        .labelers
        .iter()
        .map(|l| l.name.as_str())
        .filter(|n| entry.labelers.iter().any(|x| x == n))
        .collect()
}

fn centers_of(entry: &RecordingEntry, events: &[crate::consensus::CroppedEvent], p: Polarity) -> Vec<CenterKey> {
    let n = (entry.duration * entry.fs as f64).round() as usize;
    let mut out: Vec<CenterKey> = events
        .iter()
        .filter(|e| e.polarity == p)
        .flat_map(|e| {
            event_centers(e, entry.fs, n).into_iter().map(|c| CenterKey {
                recording_id: entry.id.clone(),
                channel: e.channel.clone(),
                center: c,
            })
        })
        .collect();
    out.sort();
    out.dedup();
    out
}

/// Builds one cell per (recording, 3-labeler combination). Every consensus
/// positive is kept; each negative set is an independent draw of
/// `ratio * |positives|` consensus-negative centers without replacement.
pub fn build_test_sets(manifest: &DatasetManifest, index: &AnnotationIndex, params: &TestParams) -> Result<TestSetBundle> {
    let mut bundle = TestSetBundle {
        params: params.clone(),
        cells: Vec::new(),
        warnings: Vec::new(),
    };
    for (ri, entry) in manifest.recordings.iter().enumerate() {
        let labelers = recording_labelers(manifest, entry);
        if labelers.len() < 3 {
            bundle.warnings.push(format!(
                "skipped {}: {} labelers, consensus needs 3",
                entry.id,
                labelers.len()
            ));
            continue;
        }
        for (ci, combo) in combinations(labelers.len(), 3).into_iter().enumerate() {
            let names: Vec<&str> = combo.iter().map(|&i| labelers[i]).collect();
            let events = consensus_events(index, entry, &names)?;
            let positives = centers_of(entry, &events, Polarity::Positive);
            if positives.is_empty() {
                bundle.warnings.push(format!(
                    "skipped {} with {:?}: no consensus positives",
                    entry.id, names
                ));
                continue;
            }
            let negatives = centers_of(entry, &events, Polarity::Negative);
            let want = params.ratio * positives.len();
            if negatives.len() < want {
                return Err(Error::InsufficientEvents {
                    context: format!("test recording {} with {:?}", entry.id, names),
                    polarity: Polarity::Negative.as_str(),
                    needed: want,
                    found: negatives.len(),
                });
            }
            let negative_sets = (0..params.n_sets)
                .map(|s| {
                    let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(
                        params.seed,
                        &[ri as u64, ci as u64, s as u64],
                    ));
                    let mut picked = sample(&mut rng, negatives.len(), want).into_vec();
                    picked.sort_unstable();
                    picked.into_iter().map(|i| negatives[i].clone()).collect()
                })
                .collect();
            bundle.cells.push(TestCell {
                recording_id: entry.id.clone(),
                labelers: names.iter().map(|s| s.to_string()).collect(),
                positives,
                negative_sets,
            });
        }
    }
    Ok(bundle)
}

/// Detector score for one descriptor under a detection mode.
pub fn score_features(model: &Ensemble, features: &[f64], mode: DetectionMode) -> Result<f64> {
    let n = model.layout.len();
    match mode {
        DetectionMode::Agnostic => model.predict_proba(&assemble_agnostic(features, n, &model.scheme)?),
        DetectionMode::Voting => {
            let rows = assemble_voting_set(features, n, &model.scheme, false)?;
            let probs: Vec<f64> = rows.iter().map(|r| model.predict_proba(r)).collect::<Result<_>>()?;
            Ok(probs.iter().sum::<f64>() / probs.len() as f64)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecordingAp {
    pub recording_id: String,
    /// Mean AP over negative sets, per labeler combination.
    pub per_combination: Vec<f64>,
    pub ap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectorEval {
    pub mode: DetectionMode,
    pub per_recording: Vec<RecordingAp>,
    pub final_ap: f64,
}

/// Scores every test center and applies the averaging protocol: AP per
/// negative set, mean over sets, mean over labeler combinations of a
/// recording, mean over recordings.
pub fn evaluate_detector(
    model: &Ensemble,
    bundle: &TestSetBundle,
    mode: DetectionMode,
    store: &FeatureStore,
) -> Result<DetectorEval> {
    if model.layout != *store.layout() {
        return Err(Error::Model(format!(
            "model layout (version {}, {} features) differs from the test descriptor layout (version {}, {} features)",
            model.layout.version,
            model.layout.len(),
            store.layout().version,
            store.layout().len()
        )));
    }
    if mode == DetectionMode::Voting && model.scheme.kind == SchemeKind::None {
        return Err(Error::VotingWithoutScheme);
    }
    if bundle.cells.is_empty() {
        return Err(Error::Other("test bundle has no evaluable recordings".into()));
    }
    let mut keys: Vec<&CenterKey> = bundle.keys().collect();
    keys.sort();
    keys.dedup();
    store.prefetch(keys.iter().copied())?;
    let scored: Vec<f64> = keys
        .par_iter()
        .map(|k| score_features(model, &store.features(k)?, mode))
        .collect::<Result<_>>()?;
    let scores: HashMap<&CenterKey, f64> = keys.iter().copied().zip(scored).collect();

    let mut per_rec: Vec<(String, Vec<f64>)> = Vec::new();
    for cell in &bundle.cells {
        let mut set_aps = Vec::with_capacity(cell.negative_sets.len());
        for negs in &cell.negative_sets {
            let s: Vec<f64> = cell.positives.iter().chain(negs).map(|k| scores[k]).collect();
            let mut l = vec![1u8; cell.positives.len()];
            l.resize(s.len(), 0);
            set_aps.push(average_precision(&s, &l)?);
        }
        let ap = compensated_mean(&set_aps).ok_or_else(|| Error::InvalidConfig("no negative sets".into()))?;
        match per_rec.last_mut() {
            Some((id, v)) if *id == cell.recording_id => v.push(ap),
            _ => per_rec.push((cell.recording_id.clone(), vec![ap])),
        }
    }
    let per_recording: Vec<RecordingAp> = per_rec
        .into_iter()
        .map(|(recording_id, per_combination)| RecordingAp {
            ap: compensated_mean(&per_combination).unwrap(),
            recording_id,
            per_combination,
        })
        .collect();
    let final_ap = compensated_mean(&per_recording.iter().map(|r| r.ap).collect::<Vec<_>>()).unwrap();
    Ok(DetectorEval {
        mode,
        per_recording,
        final_ap,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabelerQuality {
    pub recording_id: String,
    pub labeler: String,
    pub precision: f64,
    pub recall: f64,
    /// False when the labeler marked no positive sample against some
    /// reference; precision is then reported as 0.
    pub precision_defined: bool,
    pub n_references: usize,
}

#[derive(Debug, Default, Clone, Copy)]
struct Counts {
    tp: u64,
    fp: u64,
    fn_: u64,
}

fn positive_mask(index: &AnnotationIndex, entry: &RecordingEntry, labeler: &str, channel: &str, b0: usize, b1: usize) -> Result<Vec<bool>> {
    index
        .track(&entry.id, labeler, channel, b0, b1)
        .into_iter()
        .map(|p| p.map(Polarity::is_positive))
        .collect::<Option<Vec<bool>>>()
        .ok_or_else(|| Error::CoverageGap {
            recording: entry.id.clone(),
            labeler: labeler.to_string(),
            channel: channel.to_string(),
            t0: b0 as f64 / entry.fs as f64,
            t1: b1 as f64 / entry.fs as f64,
        })
}

/// Sample-level precision and recall of every labeler of one recording
/// against the majority of each 3-subset of the other labelers, averaged
/// over those subsets.
pub fn labeler_quality_for(manifest: &DatasetManifest, index: &AnnotationIndex, entry: &RecordingEntry) -> Result<Vec<LabelerQuality>> {
    let labelers = recording_labelers(manifest, entry);
    if labelers.len() < 4 {
        return Err(Error::InvalidConfig(format!(
            "labeler quality needs at least 4 labelers on {}, found {}",
            entry.id,
            labelers.len()
        )));
    }
    // per labeler, per (channel, block): positive mask
    let mut masks: Vec<Vec<Vec<bool>>> = Vec::with_capacity(labelers.len());
    for l in &labelers {
        let mut m = Vec::new();
        for ch in &entry.channels {
            for b in &entry.blocks {
                let (b0, b1) = (to_sample(b.t0, entry.fs), to_sample(b.t1, entry.fs));
                m.push(positive_mask(index, entry, l, ch, b0, b1)?);
            }
        }
        masks.push(m);
    }
    let mut out = Vec::with_capacity(labelers.len());
    for (li, name) in labelers.iter().enumerate() {
        let others: Vec<usize> = (0..labelers.len()).filter(|&o| o != li).collect();
        let mut precisions = Vec::new();
        let mut recalls = Vec::new();
        let mut defined = true;
        let combos = combinations(others.len(), 3);
        for combo in &combos {
            let refs: Vec<usize> = combo.iter().map(|&i| others[i]).collect();
            let mut c = Counts::default();
            for (seg, own) in masks[li].iter().enumerate() {
                for (s, &mine) in own.iter().enumerate() {
                    let votes = refs.iter().filter(|&&r| masks[r][seg][s]).count();
                    let truth = votes >= 2;
                    match (mine, truth) {
                        (true, true) => c.tp += 1,
                        (true, false) => c.fp += 1,
                        (false, true) => c.fn_ += 1,
                        (false, false) => {}
                    }
                }
            }
            if c.tp + c.fp == 0 {
                defined = false;
                precisions.push(0.0);
            } else {
                precisions.push(c.tp as f64 / (c.tp + c.fp) as f64);
            }
            recalls.push(if c.tp + c.fn_ == 0 {
                0.0
            } else {
                c.tp as f64 / (c.tp + c.fn_) as f64
            });
        }
        out.push(LabelerQuality {
            recording_id: entry.id.clone(),
            labeler: name.to_string(),
            precision: compensated_mean(&precisions).unwrap(),
            recall: compensated_mean(&recalls).unwrap(),
            precision_defined: defined,
            n_references: combos.len(),
        });
    }
    Ok(out)
}

/// Quality rows for every recording with at least 4 labelers.
pub fn labeler_quality(manifest: &DatasetManifest, index: &AnnotationIndex) -> Result<Vec<LabelerQuality>> {
    let mut out = Vec::new();
    for entry in &manifest.recordings {
        if recording_labelers(manifest, entry).len() >= 4 {
            out.extend(labeler_quality_for(manifest, index, entry)?);
        }
    }
    if out.is_empty() {
        return Err(Error::InvalidConfig(
            "no recording has the 4 labelers a quality report needs".into(),
        ));
    }
    Ok(out)
}

pub fn write_labeler_quality_csv<W: Write>(rows: &[LabelerQuality], mut w: W) -> std::io::Result<()> {
    writeln!(w, "recording,labeler,precision,recall,precision_defined,n_references")?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{},{},{}",
            r.recording_id, r.labeler, r.precision, r.recall, r.precision_defined, r.n_references
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ap_examples() {
        assert_eq!(average_precision(&[0.9, 0.1], &[1, 0]).unwrap(), 1.0);
        let ap = average_precision(&[0.9, 0.8, 0.7], &[0, 1, 1]).unwrap();
        assert!((ap - (0.5 + 2.0 / 3.0) / 2.0).abs() < 1e-15);
        assert_eq!(average_precision(&[0.3, 0.3, 0.9], &[1, 1, 1]).unwrap(), 1.0);
        assert!(matches!(average_precision(&[0.1], &[0]), Err(Error::NoPositives)));
    }

    #[test]
    fn ties_form_one_threshold() {
        // all tied: a single threshold at prevalence
        let s = vec![0.5; 21];
        let mut l = vec![0u8; 21];
        l[3] = 1;
        assert_eq!(average_precision(&s, &l).unwrap(), 1.0 / 21.0);
        let c = pr_curve(&[0.2, 0.9, 0.2], &[1, 0, 0]).unwrap();
        assert_eq!(c.thresholds, vec![0.9, 0.2]);
        assert_eq!(c.recall, vec![0.0, 1.0]);
    }

    #[test]
    fn combination_counts() {
        assert_eq!(combinations(3, 3), vec![vec![0, 1, 2]]);
        assert_eq!(combinations(4, 3).len(), 4);
        assert_eq!(combinations(5, 3).len(), 10);
    }
}
