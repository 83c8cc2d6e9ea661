//! Consensus labels, event centers and training-set sampling for the four
//! labeler-effort scenarios.
//!
//! * A: consensus events of K labelers on shared recordings.
//! * B: the same centers as A, one example per labeler with that labeler's
//!   own polarity.
//! * C: the recordings of A, with each labeler owning a disjoint subset of the
//!   annotated blocks.
//! * D: each labeler owns a disjoint set of recordings.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;
use std::sync::{Arc, RwLock};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::descriptor::{center_bounds, describe_event_with, FeatureLayout};
use crate::encoding::{assemble_training_example, EncodingScheme};
use crate::error::{Error, Result};
use crate::signal::{
    to_sample, to_seconds, Annotation, Block, DatasetManifest, Polarity, Recording, RecordingEntry,
};
use crate::synth::mix_seed;

/// Spacing of negative centers inside a negative event, seconds.
pub const NEGATIVE_GRID_S: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EventSource {
    Consensus,
    Single(usize),
}

impl EventSource {
    pub fn labeler(self) -> Option<usize> {
        match self {
            EventSource::Consensus => None,
            EventSource::Single(l) => Some(l),
        }
    }
}

/// A maximal constant-polarity interval, in samples `[s0, s1)` and seconds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CroppedEvent {
    pub recording_id: String,
    pub channel: String,
    pub t0: f64,
    pub t1: f64,
    pub s0: usize,
    pub s1: usize,
    pub polarity: Polarity,
    pub source: EventSource,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Scenario {
    A,
    B,
    C,
    D,
}

impl Scenario {
    pub const ALL: [Scenario; 4] = [Scenario::A, Scenario::B, Scenario::C, Scenario::D];

    pub fn as_str(self) -> &'static str {
        match self {
            Scenario::A => "A",
            Scenario::B => "B",
            Scenario::C => "C",
            Scenario::D => "D",
        }
    }

    /// Whether training examples carry a labeler identity.
    pub fn is_single_labeler(self) -> bool {
        self != Scenario::A
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Scenario {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_uppercase().as_str() {
            "A" => Ok(Scenario::A),
            "B" => Ok(Scenario::B),
            "C" => Ok(Scenario::C),
            "D" => Ok(Scenario::D),
            other => Err(format!("unknown scenario {other:?} (expected A, B, C or D)")),
        }
    }
}

/// Annotation windows in samples, grouped by (recording, labeler, channel).
#[derive(Debug, Clone, Default)]
pub struct AnnotationIndex {
    windows: HashMap<(String, String, String), Vec<(usize, usize, Polarity)>>,
}

impl AnnotationIndex {
    /// Annotations on recordings missing from the manifest are ignored.
    pub fn new(manifest: &DatasetManifest, annotations: &[Annotation]) -> Self {
        let fs: HashMap<&str, u32> = manifest
            .recordings
            .iter()
            .map(|r| (r.id.as_str(), r.fs))
            .collect();
        let mut windows: HashMap<_, Vec<_>> = HashMap::new();
        for a in annotations {
            let Some(&f) = fs.get(a.recording_id.as_str()) else {
                continue;
            };
            let (s0, s1) = (to_sample(a.t_start, f), to_sample(a.t_end, f));
            if s1 > s0 {
                windows
                    .entry((a.recording_id.clone(), a.labeler.clone(), a.channel.clone()))
                    .or_insert_with(Vec::new)
                    .push((s0, s1, a.polarity()));
            }
        }
        for v in windows.values_mut() {
            v.sort_by_key(|w| (w.0, w.1));
        }
        AnnotationIndex { windows }
    }

    pub fn windows(&self, recording: &str, labeler: &str, channel: &str) -> &[(usize, usize, Polarity)] {
        self.windows
            .get(&(recording.to_string(), labeler.to_string(), channel.to_string()))
            .map_or(&[], Vec::as_slice)
    }

    /// The labeler's polarity at one sample, if a window covers it.
    pub fn polarity_at(&self, recording: &str, labeler: &str, channel: &str, sample: usize) -> Option<Polarity> {
        let w = self.windows(recording, labeler, channel);
        let i = w.partition_point(|x| x.0 <= sample);
        w[..i].iter().rev().find(|x| sample < x.1).map(|x| x.2)
    }

    /// Per-sample polarity over `[b0, b1)`; later windows overwrite earlier ones.
    pub fn track(&self, recording: &str, labeler: &str, channel: &str, b0: usize, b1: usize) -> Vec<Option<Polarity>> {
        let mut t = vec![None; b1 - b0];
        for &(s0, s1, p) in self.windows(recording, labeler, channel) {
            if s1 <= b0 || s0 >= b1 {
                continue;
            }
            for v in &mut t[s0.max(b0) - b0..s1.min(b1) - b0] {
                *v = Some(p);
            }
        }
        t
    }
}

/// Maximal runs of majority polarity over per-labeler tracks of equal length.
/// Returns runs relative to the track start, or the index of the first
/// labeler with an uncovered sample.
pub fn majority_runs(tracks: &[Vec<Option<Polarity>>]) -> Result<Vec<(usize, usize, Polarity)>, usize> {
    let k = tracks.len();
    let n = tracks.first().map_or(0, Vec::len);
    let mut runs: Vec<(usize, usize, Polarity)> = Vec::new();
    for i in 0..n {
        let mut pos = 0;
        for (l, t) in tracks.iter().enumerate() {
            match t[i] {
                Some(Polarity::Positive) => pos += 1,
                Some(Polarity::Negative) => {}
                None => return Err(l),
            }
        }
        let p = if 2 * pos > k {
            Polarity::Positive
        } else {
            Polarity::Negative
        };
        match runs.last_mut() {
            Some(r) if r.2 == p => r.1 = i + 1,
            _ => runs.push((i, i + 1, p)),
        }
    }
    Ok(runs)
}

fn block_samples(b: &Block, fs: u32) -> (usize, usize) {
    (to_sample(b.t0, fs), to_sample(b.t1, fs))
}

fn coverage_gap(entry: &RecordingEntry, labeler: &str, channel: &str, b: &Block) -> Error {
    Error::CoverageGap {
        recording: entry.id.clone(),
        labeler: labeler.to_string(),
        channel: channel.to_string(),
        t0: b.t0,
        t1: b.t1,
    }
}

/// Consensus events of `labelers` over every channel and block of `entry`.
pub fn consensus_events(index: &AnnotationIndex, entry: &RecordingEntry, labelers: &[&str]) -> Result<Vec<CroppedEvent>> {
    if labelers.len() < 3 || labelers.len() % 2 == 0 {
        return Err(Error::InvalidConfig(format!(
            "consensus needs an odd number of at least 3 labelers, got {}",
            labelers.len()
        )));
    }
    let mut out = Vec::new();
    for channel in &entry.channels {
        for b in &entry.blocks {
            let (b0, b1) = block_samples(b, entry.fs);
            let tracks: Vec<_> = labelers
                .iter()
                .map(|l| index.track(&entry.id, l, channel, b0, b1))
                .collect();
            let runs = majority_runs(&tracks).map_err(|l| coverage_gap(entry, labelers[l], channel, b))?;
            out.extend(runs.into_iter().map(|(s0, s1, polarity)| CroppedEvent {
                recording_id: entry.id.clone(),
                channel: channel.clone(),
                t0: to_seconds(b0 + s0, entry.fs),
                t1: to_seconds(b0 + s1, entry.fs),
                s0: b0 + s0,
                s1: b0 + s1,
                polarity,
                source: EventSource::Consensus,
            }));
        }
    }
    Ok(out)
}

/// One labeler's own annotation windows inside `blocks`, clipped to them.
pub fn single_labeler_events(
    index: &AnnotationIndex,
    entry: &RecordingEntry,
    labeler: &str,
    labeler_index: usize,
    blocks: &[Block],
) -> Result<Vec<CroppedEvent>> {
    let mut out = Vec::new();
    for channel in &entry.channels {
        let windows = index.windows(&entry.id, labeler, channel);
        for b in blocks {
            let (b0, b1) = block_samples(b, entry.fs);
            let covered: Vec<(usize, usize)> = windows.iter().map(|w| (w.0, w.1)).collect();
            if !crate::signal::uncovered(&covered, b0, b1).is_empty() {
                return Err(coverage_gap(entry, labeler, channel, b));
            }
            for &(s0, s1, polarity) in windows {
                let (s0, s1) = (s0.max(b0), s1.min(b1));
                if s1 > s0 {
                    out.push(CroppedEvent {
                        recording_id: entry.id.clone(),
                        channel: channel.clone(),
                        t0: to_seconds(s0, entry.fs),
                        t1: to_seconds(s1, entry.fs),
                        s0,
                        s1,
                        polarity,
                        source: EventSource::Single(labeler_index),
                    });
                }
            }
        }
    }
    Ok(out)
}

/// Center samples of an event. Positive events give their midpoint; negative
/// events give a grid every 0.1 s anchored at the event start and staying
/// inside the event. Centers without full descriptor context in a channel of
/// `n_samples` are dropped.
pub fn event_centers(event: &CroppedEvent, fs: u32, n_samples: usize) -> Vec<usize> {
    let Some((lo, hi)) = center_bounds(n_samples, fs) else {
        return Vec::new();
    };
    let ok = |c: usize| c >= lo && c <= hi;
    match event.polarity {
        Polarity::Positive => {
            // rounding may land on the exclusive end of very short events
            let c = to_sample((event.t0 + event.t1) / 2.0, fs).clamp(event.s0, event.s1.max(event.s0 + 1) - 1);
            if ok(c) {
                vec![c]
            } else {
                Vec::new()
            }
        }
        Polarity::Negative => {
            let mut out = Vec::new();
            let mut k = 0usize;
            loop {
                let c = to_sample(event.t0 + k as f64 * NEGATIVE_GRID_S, fs);
                if c >= event.s1 {
                    break;
                }
                if ok(c) {
                    out.push(c);
                }
                k += 1;
            }
            out
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplingParams {
    pub k: usize,
    pub n_rec: usize,
    pub n_pos: usize,
    pub n_neg: usize,
}

impl Default for SamplingParams {
    fn default() -> Self {
        SamplingParams {
            k: 3,
            n_rec: 8,
            n_pos: 100,
            n_neg: 100,
        }
    }
}

impl SamplingParams {
    /// Number of examples the scenario contract produces.
    pub fn expected_len(&self, scenario: Scenario) -> usize {
        let per_group = self.n_rec * (self.n_pos + self.n_neg);
        match scenario {
            Scenario::A => per_group,
            _ => self.k * per_group,
        }
    }
}

/// Signal location of one example.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CenterKey {
    pub recording_id: String,
    pub channel: String,
    pub center: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExampleSpec {
    pub recording_id: String,
    pub channel: String,
    pub source: EventSource,
    pub center: usize,
    pub t_center: f64,
    pub polarity: Polarity,
}

impl ExampleSpec {
    pub fn key(&self) -> CenterKey {
        CenterKey {
            recording_id: self.recording_id.clone(),
            channel: self.channel.clone(),
            center: self.center,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingSetSpec {
    pub scenario: Scenario,
    pub recording_seed: u64,
    pub event_seed: u64,
    pub params: SamplingParams,
    pub labelers: Vec<String>,
    pub negative_grid_s: f64,
    pub negative_grid_anchor: String,
    pub examples: Vec<ExampleSpec>,
}

impl TrainingSetSpec {
    pub fn len(&self) -> usize {
        self.examples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.examples.is_empty()
    }
}

#[derive(Clone, Copy)]
enum Stream {
    Recordings = 1,
    Blocks = 2,
    Events = 3,
}

fn rng_for(seed: u64, stream: Stream, parts: &[u64]) -> ChaCha8Rng {
    let mut all = vec![stream as u64];
    all.extend_from_slice(parts);
    ChaCha8Rng::seed_from_u64(mix_seed(seed, &all))
}

fn n_samples(entry: &RecordingEntry) -> usize {
    (entry.duration * entry.fs as f64).round() as usize
}

/// Candidate (channel, center) pairs of one polarity, in a canonical order.
fn candidates(events: &[CroppedEvent], entry: &RecordingEntry, polarity: Polarity) -> Vec<(String, usize)> {
    let n = n_samples(entry);
    let mut out: Vec<(String, usize)> = events
        .iter()
        .filter(|e| e.polarity == polarity)
        .flat_map(|e| {
            event_centers(e, entry.fs, n)
                .into_iter()
                .map(move |c| (e.channel.clone(), c))
        })
        .collect();
    out.sort();
    out.dedup();
    out
}

/// Shuffles all candidates and takes a prefix, so a larger count always
/// contains the selection of a smaller one for the same seed.
fn take_nested(
    mut cands: Vec<(String, usize)>,
    n: usize,
    rng: &mut ChaCha8Rng,
    context: &str,
    polarity: Polarity,
) -> Result<Vec<(String, usize)>> {
    if cands.len() < n {
        return Err(Error::InsufficientEvents {
            context: context.to_string(),
            polarity: polarity.as_str(),
            needed: n,
            found: cands.len(),
        });
    }
    cands.shuffle(rng);
    cands.truncate(n);
    Ok(cands)
}

/// Samples one scenario realisation. `recording_seed` drives which recordings
/// (and, for C, which blocks per labeler) are used; `event_seed` drives which
/// centers are drawn.
pub fn sample_scenario(
    manifest: &DatasetManifest,
    index: &AnnotationIndex,
    scenario: Scenario,
    params: &SamplingParams,
    recording_seed: u64,
    event_seed: u64,
) -> Result<TrainingSetSpec> {
    let k = params.k;
    if k == 0 || manifest.k() < k {
        return Err(Error::InvalidConfig(format!(
            "scenario {scenario} needs {k} labelers, manifest has {}",
            manifest.k()
        )));
    }
    if matches!(scenario, Scenario::A | Scenario::B) && (k < 3 || k % 2 == 0) {
        return Err(Error::InvalidConfig(format!(
            "scenario {scenario} needs a consensus of an odd number of at least 3 labelers, got K = {k}"
        )));
    }
    let labelers: Vec<&str> = manifest.labelers[..k].iter().map(|l| l.name.as_str()).collect();
    let eligible: Vec<(usize, &RecordingEntry)> = manifest
        .recordings
        .iter()
        .enumerate()
        .filter(|(_, r)| labelers.iter().all(|l| r.labelers.iter().any(|x| x == l)))
        .collect();
    let needed = match scenario {
        Scenario::D => k * params.n_rec,
        _ => params.n_rec,
    };
    if eligible.len() < needed {
        return Err(Error::InvalidConfig(format!(
            "scenario {scenario} needs {needed} recordings annotated by all of {labelers:?}, found {}",
            eligible.len()
        )));
    }
    let mut order = eligible;
    order.shuffle(&mut rng_for(recording_seed, Stream::Recordings, &[]));
    let chosen = &order[..needed];

    let mut examples = Vec::with_capacity(params.expected_len(scenario));
    let mut push = |entry: &RecordingEntry, picks: Vec<(String, usize)>, source: EventSource, polarity: Polarity| {
        for (channel, center) in picks {
            examples.push(ExampleSpec {
                recording_id: entry.id.clone(),
                channel,
                source,
                center,
                t_center: to_seconds(center, entry.fs),
                polarity,
            });
        }
    };
    let draw = |entry: &RecordingEntry,
                ri: usize,
                events: &[CroppedEvent],
                group: u64|
     -> Result<[Vec<(String, usize)>; 2]> {
        let ctx = format!("recording {} group {group}", entry.id);
        let pos = take_nested(
            candidates(events, entry, Polarity::Positive),
            params.n_pos,
            &mut rng_for(event_seed, Stream::Events, &[ri as u64, group, 1]),
            &ctx,
            Polarity::Positive,
        )?;
        let neg = take_nested(
            candidates(events, entry, Polarity::Negative),
            params.n_neg,
            &mut rng_for(event_seed, Stream::Events, &[ri as u64, group, 0]),
            &ctx,
            Polarity::Negative,
        )?;
        Ok([pos, neg])
    };

    match scenario {
        Scenario::A | Scenario::B => {
            for &(ri, entry) in chosen {
                let events = consensus_events(index, entry, &labelers)?;
                let [pos, neg] = draw(entry, ri, &events, u64::MAX)?;
                if scenario == Scenario::A {
                    push(entry, pos, EventSource::Consensus, Polarity::Positive);
                    push(entry, neg, EventSource::Consensus, Polarity::Negative);
                    continue;
                }
                for (channel, center) in pos.into_iter().chain(neg) {
                    for (l, name) in labelers.iter().enumerate() {
                        let p = index
                            .polarity_at(&entry.id, name, &channel, center)
                            .ok_or_else(|| Error::CoverageGap {
                                recording: entry.id.clone(),
                                labeler: name.to_string(),
                                channel: channel.clone(),
                                t0: to_seconds(center, entry.fs),
                                t1: to_seconds(center + 1, entry.fs),
                            })?;
                        push(entry, vec![(channel.clone(), center)], EventSource::Single(l), p);
                    }
                }
            }
        }
        Scenario::C => {
            for &(ri, entry) in chosen {
                let mut blocks: Vec<usize> = (0..entry.blocks.len()).collect();
                blocks.shuffle(&mut rng_for(recording_seed, Stream::Blocks, &[ri as u64]));
                for (l, name) in labelers.iter().enumerate() {
                    let own: Vec<Block> = blocks
                        .iter()
                        .enumerate()
                        .filter(|(pos, _)| pos % k == l)
                        .map(|(_, &b)| entry.blocks[b].clone())
                        .collect();
                    let events = single_labeler_events(index, entry, name, l, &own)?;
                    let [pos, neg] = draw(entry, ri, &events, l as u64)?;
                    push(entry, pos, EventSource::Single(l), Polarity::Positive);
                    push(entry, neg, EventSource::Single(l), Polarity::Negative);
                }
            }
        }
        Scenario::D => {
            for (l, name) in labelers.iter().enumerate() {
                for &(ri, entry) in &chosen[l * params.n_rec..(l + 1) * params.n_rec] {
                    let events = single_labeler_events(index, entry, name, l, &entry.blocks)?;
                    let [pos, neg] = draw(entry, ri, &events, l as u64)?;
                    push(entry, pos, EventSource::Single(l), Polarity::Positive);
                    push(entry, neg, EventSource::Single(l), Polarity::Negative);
                }
            }
        }
    }

    Ok(TrainingSetSpec {
        scenario,
        recording_seed,
        event_seed,
        params: params.clone(),
        labelers: labelers.iter().map(|s| s.to_string()).collect(),
        negative_grid_s: NEGATIVE_GRID_S,
        negative_grid_anchor: "t0".into(),
        examples,
    })
}

/// Descriptor cache over the recordings of one manifest. Safe to share
/// between threads.
pub struct FeatureStore {
    manifest: DatasetManifest,
    layout: FeatureLayout,
    recordings: RwLock<HashMap<String, Arc<Recording>>>,
    cache: RwLock<HashMap<CenterKey, Arc<[f64]>>>,
}

impl FeatureStore {
    pub fn new(manifest: DatasetManifest) -> Self {
        FeatureStore::with_layout(manifest, FeatureLayout::standard())
    }

    pub fn with_layout(manifest: DatasetManifest, layout: FeatureLayout) -> Self {
        FeatureStore {
            manifest,
            layout,
            recordings: RwLock::new(HashMap::new()),
            cache: RwLock::new(HashMap::new()),
        }
    }

    pub fn manifest(&self) -> &DatasetManifest {
        &self.manifest
    }

    pub fn layout(&self) -> &FeatureLayout {
        &self.layout
    }

    fn recording(&self, id: &str) -> Result<Arc<Recording>> {
        if let Some(r) = self.recordings.read().unwrap().get(id) {
            return Ok(r.clone());
        }
        let entry = self
            .manifest
            .recording(id)
            .ok_or_else(|| Error::Other(format!("recording {id} is not in the manifest")))?;
        let rec = Arc::new(self.manifest.load_recording(entry)?);
        let mut w = self.recordings.write().unwrap();
        Ok(w.entry(id.to_string()).or_insert(rec).clone())
    }

    fn compute(&self, key: &CenterKey) -> Result<Arc<[f64]>> {
        let rec = self.recording(&key.recording_id)?;
        let channel = rec.channel(&key.channel).ok_or_else(|| {
            Error::Other(format!("{} has no channel {}", key.recording_id, key.channel))
        })?;
        let fv = describe_event_with(channel, key.center, rec.fs, self.layout.ar_order)
            .map_err(|e| Error::Other(format!("{}/{}: {e}", key.recording_id, key.channel)))?;
        Ok(fv.values.into())
    }

    pub fn features(&self, key: &CenterKey) -> Result<Arc<[f64]>> {
        if let Some(v) = self.cache.read().unwrap().get(key) {
            return Ok(v.clone());
        }
        let v = self.compute(key)?;
        self.cache.write().unwrap().insert(key.clone(), v.clone());
        Ok(v)
    }

    /// Computes missing descriptors for `keys` in parallel.
    pub fn prefetch<'a>(&self, keys: impl IntoIterator<Item = &'a CenterKey>) -> Result<()> {
        let missing: Vec<&CenterKey> = {
            let cache = self.cache.read().unwrap();
            let mut m: Vec<&CenterKey> = keys.into_iter().filter(|k| !cache.contains_key(*k)).collect();
            m.sort();
            m.dedup();
            m
        };
        let computed: Vec<(CenterKey, Arc<[f64]>)> = missing
            .par_iter()
            .map(|k| self.compute(k).map(|v| ((*k).clone(), v)))
            .collect::<Result<_>>()?;
        self.cache.write().unwrap().extend(computed);
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.cache.read().unwrap().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Feature matrix and 0/1 labels for a training set. Consensus examples get
/// all-zero labeler rows; single-labeler examples get their labeler's rows.
pub fn build_training_set(
    spec: &TrainingSetSpec,
    scheme: &EncodingScheme,
    store: &FeatureStore,
) -> Result<(Vec<Vec<f64>>, Vec<u8>)> {
    let keys: Vec<CenterKey> = spec.examples.iter().map(ExampleSpec::key).collect();
    store.prefetch(&keys)?;
    let n_features = store.layout().len();
    let mut x = Vec::with_capacity(keys.len());
    let mut y = Vec::with_capacity(keys.len());
    for (ex, key) in spec.examples.iter().zip(&keys) {
        let f = store.features(key)?;
        x.push(assemble_training_example(&f, n_features, ex.source.labeler(), scheme)?);
        y.push(ex.polarity.label());
    }
    Ok((x, y))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signal::{EventClass, LabelerId, Role};
    use std::path::PathBuf;

    const FS: u32 = 256;

    fn entry(blocks: Vec<Block>) -> RecordingEntry {
        RecordingEntry {
            id: "r".into(),
            header: PathBuf::from("r.json"),
            fs: FS,
            duration: 30.0,
            channels: vec!["c".into()],
            labelers: vec!["a".into(), "b".into(), "c".into()],
            blocks,
        }
    }

    fn manifest(e: RecordingEntry) -> DatasetManifest {
        DatasetManifest {
            role: Role::Train,
            labelers: ["a", "b", "c"]
                .iter()
                .enumerate()
                .map(|(index, n)| LabelerId { index, name: n.to_string() })
                .collect(),
            recordings: vec![e],
            annotations: "x.jsonl".into(),
            base_dir: PathBuf::new(),
        }
    }

    fn ann(labeler: &str, t0: f64, t1: f64, class: EventClass) -> Annotation {
        Annotation {
            recording_id: "r".into(),
            channel: "c".into(),
            labeler: labeler.into(),
            t_start: t0,
            t_end: t1,
            class,
        }
    }

    fn tile(labeler: &str, spans: &[(f64, f64, EventClass)], b0: f64, b1: f64) -> Vec<Annotation> {
        let mut out = Vec::new();
        let mut cur = b0;
        for &(t0, t1, c) in spans {
            if t0 > cur {
                out.push(ann(labeler, cur, t0, EventClass::Artifact));
            }
            out.push(ann(labeler, t0, t1, c));
            cur = t1;
        }
        if b1 > cur {
            out.push(ann(labeler, cur, b1, EventClass::Artifact));
        }
        out
    }

    #[test]
    fn two_overlapping_spikes_crop_to_intersection() {
        let e = entry(vec![Block { t0: 0.0, t1: 1.0 }]);
        let mut anns = tile("a", &[(0.0, 0.5, EventClass::Spike)], 0.0, 1.0);
        anns.extend(tile("b", &[(0.25, 0.75, EventClass::Spike)], 0.0, 1.0));
        anns.extend(tile("c", &[], 0.0, 1.0));
        let idx = AnnotationIndex::new(&manifest(e.clone()), &anns);
        let ev = consensus_events(&idx, &e, &["a", "b", "c"]).unwrap();
        let pos: Vec<_> = ev.iter().filter(|e| e.polarity.is_positive()).collect();
        assert_eq!(pos.len(), 1);
        assert_eq!((pos[0].t0, pos[0].t1), (0.25, 0.5));
    }

    #[test]
    fn majority_of_classes() {
        let e = entry(vec![Block { t0: 0.0, t1: 1.0 }]);
        let spans = |c| vec![ann("x", 0.0, 1.0, c)];
        for (classes, expect) in [
            ([EventClass::Spike, EventClass::Spike, EventClass::Artifact], Polarity::Positive),
            ([EventClass::Spike, EventClass::Artifact, EventClass::Norm], Polarity::Negative),
        ] {
            let mut anns = Vec::new();
            for (l, c) in ["a", "b", "c"].iter().zip(classes) {
                let mut a = spans(c);
                a[0].labeler = l.to_string();
                anns.extend(a);
            }
            let idx = AnnotationIndex::new(&manifest(e.clone()), &anns);
            let ev = consensus_events(&idx, &e, &["a", "b", "c"]).unwrap();
            assert_eq!(ev.len(), 1);
            assert_eq!(ev[0].polarity, expect);
        }
    }

    #[test]
    fn coverage_gap_names_labeler() {
        let e = entry(vec![Block { t0: 0.0, t1: 1.0 }]);
        let mut anns = tile("a", &[], 0.0, 1.0);
        anns.extend(tile("b", &[], 0.0, 1.0));
        anns.push(ann("c", 0.0, 0.5, EventClass::Norm));
        let idx = AnnotationIndex::new(&manifest(e.clone()), &anns);
        match consensus_events(&idx, &e, &["a", "b", "c"]) {
            Err(Error::CoverageGap { labeler, channel, .. }) => {
                assert_eq!(labeler, "c");
                assert_eq!(channel, "c");
            }
            other => panic!("{other:?}"),
        }
    }

    fn ev(t0: f64, t1: f64, p: Polarity) -> CroppedEvent {
        CroppedEvent {
            recording_id: "r".into(),
            channel: "c".into(),
            t0,
            t1,
            s0: to_sample(t0, FS),
            s1: to_sample(t1, FS),
            polarity: p,
            source: EventSource::Consensus,
        }
    }

    #[test]
    fn center_rules() {
        let n = 30 * FS as usize;
        let c = event_centers(&ev(10.2, 10.5, Polarity::Positive), FS, n);
        assert_eq!(c, vec![to_sample(10.35, FS)]);
        let c = event_centers(&ev(10.0, 10.55, Polarity::Negative), FS, n);
        let want: Vec<usize> = (0..6).map(|k| to_sample(10.0 + 0.1 * k as f64, FS)).collect();
        assert_eq!(c, want);
        let c = event_centers(&ev(3.0, 3.04, Polarity::Negative), FS, n);
        assert_eq!(c, vec![to_sample(3.0, FS)]);
        // too close to the start for a full neighbourhood
        assert!(event_centers(&ev(0.1, 0.2, Polarity::Positive), FS, n).is_empty());
    }

    #[test]
    fn scenario_parsing() {
        assert_eq!("c".parse::<Scenario>().unwrap(), Scenario::C);
        assert!("E".parse::<Scenario>().is_err());
        assert_eq!(SamplingParams::default().expected_len(Scenario::A), 1600);
        assert_eq!(SamplingParams::default().expected_len(Scenario::D), 4800);
    }

    #[test]
    fn polarity_lookup() {
        let e = entry(vec![Block { t0: 0.0, t1: 1.0 }]);
        let anns = tile("a", &[(0.25, 0.5, EventClass::Spike)], 0.0, 1.0);
        let idx = AnnotationIndex::new(&manifest(e), &anns);
        assert_eq!(idx.polarity_at("r", "a", "c", 70), Some(Polarity::Positive));
        assert_eq!(idx.polarity_at("r", "a", "c", 10), Some(Polarity::Negative));
        assert_eq!(idx.polarity_at("r", "a", "c", 300), None);
        assert_eq!(idx.polarity_at("r", "b", "c", 10), None);
    }
}
