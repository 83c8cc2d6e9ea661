//! Recordings, annotations and dataset manifests, with their on-disk formats.
//!
//! A recording is stored as a small JSON header next to a channel-major raw
//! file of little-endian `f32` samples. Annotations are JSON Lines, one
//! labeler window per line. A manifest describes one dataset split.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Longest admissible labeler window, in seconds.
pub const MAX_WINDOW_S: f64 = 2.0;

/// Slack used when comparing second-valued times that went through decimal text.
const TIME_EPS: f64 = 1e-9;

/// Converts a time in seconds to the nearest sample index.
pub fn to_sample(t: f64, fs: u32) -> usize {
    let s = (t * fs as f64).round();
    if s <= 0.0 {
        0
    } else {
        s as usize
    }
}

/// Converts a sample index back to seconds.
pub fn to_seconds(sample: usize, fs: u32) -> f64 {
    sample as f64 / fs as f64
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Polarity {
    #[serde(rename = "P")]
    Positive,
    #[serde(rename = "N")]
    Negative,
}

impl Polarity {
    pub fn is_positive(self) -> bool {
        self == Polarity::Positive
    }

    pub fn label(self) -> u8 {
        u8::from(self.is_positive())
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Polarity::Positive => "positive",
            Polarity::Negative => "negative",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventClass {
    Artifact,
    SlowWave,
    SleepSpindle,
    Norm,
    Other,
    SharpWave,
    Spike,
    SharpAndSpikeComplex,
}

impl EventClass {
    pub const ALL: [EventClass; 8] = [
        EventClass::Artifact,
        EventClass::SlowWave,
        EventClass::SleepSpindle,
        EventClass::Norm,
        EventClass::Other,
        EventClass::SharpWave,
        EventClass::Spike,
        EventClass::SharpAndSpikeComplex,
    ];

    pub fn polarity(self) -> Polarity {
        match self {
            EventClass::SharpWave | EventClass::Spike | EventClass::SharpAndSpikeComplex => {
                Polarity::Positive
            }
            _ => Polarity::Negative,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            EventClass::Artifact => "artifact",
            EventClass::SlowWave => "slow_wave",
            EventClass::SleepSpindle => "sleep_spindle",
            EventClass::Norm => "norm",
            EventClass::Other => "other",
            EventClass::SharpWave => "sharp_wave",
            EventClass::Spike => "spike",
            EventClass::SharpAndSpikeComplex => "sharp_and_spike_complex",
        }
    }

    pub fn index(self) -> usize {
        Self::ALL.iter().position(|&c| c == self).unwrap()
    }
}

impl fmt::Display for EventClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for EventClass {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        EventClass::ALL
            .iter()
            .copied()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| format!("unknown event class {s:?}"))
    }
}

/// A labeler's dense index within a manifest's labeler set, plus display name.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LabelerId {
    pub index: usize,
    pub name: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Recording {
    pub id: String,
    pub fs: u32,
    pub channels: Vec<String>,
    /// Channel-major samples in microvolts.
    pub samples: Vec<Vec<f32>>,
}

impl Recording {
    /// Builds a recording and checks its invariants.
    pub fn new(
        id: impl Into<String>,
        fs: u32,
        channels: Vec<String>,
        samples: Vec<Vec<f32>>,
    ) -> Result<Self> {
        let rec = Recording {
            id: id.into(),
            fs,
            channels,
            samples,
        };
        rec.validate()?;
        Ok(rec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.fs == 0 {
            return Err(Error::InvalidRecording("sampling rate must be positive".into()));
        }
        if self.channels.is_empty() || self.channels.len() != self.samples.len() {
            return Err(Error::InvalidRecording(format!(
                "{} channel names for {} sample rows",
                self.channels.len(),
                self.samples.len()
            )));
        }
        let n = self.samples[0].len();
        if n == 0 {
            return Err(Error::InvalidRecording("recording has no samples".into()));
        }
        for (name, row) in self.channels.iter().zip(&self.samples) {
            if row.len() != n {
                return Err(Error::InvalidRecording(format!(
                    "channel {name} has {} samples, expected {n}",
                    row.len()
                )));
            }
            if let Some(i) = row.iter().position(|v| !v.is_finite()) {
                return Err(Error::InvalidRecording(format!(
                    "channel {name} has a non-finite sample at index {i}"
                )));
            }
        }
        Ok(())
    }

    pub fn n_samples(&self) -> usize {
        self.samples.first().map_or(0, Vec::len)
    }

    pub fn duration(&self) -> f64 {
        self.n_samples() as f64 / self.fs as f64
    }

    pub fn channel_index(&self, name: &str) -> Option<usize> {
        self.channels.iter().position(|c| c == name)
    }

    pub fn channel(&self, name: &str) -> Option<&[f32]> {
        self.channel_index(name).map(|i| self.samples[i].as_slice())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecordingHeader {
    pub id: String,
    pub fs: u32,
    pub channels: Vec<String>,
    pub n_samples: usize,
    pub dtype: String,
    pub raw_file: String,
}

fn raw_path_for(header_path: &Path) -> PathBuf {
    header_path.with_extension("f32")
}

/// Writes `rec` as `<path>` (JSON header) plus a sibling `.f32` raw file.
pub fn save_recording(rec: &Recording, path: impl AsRef<Path>) -> Result<()> {
    rec.validate()?;
    let path = path.as_ref();
    let raw_path = raw_path_for(path);
    let raw_name = raw_path
        .file_name()
        .and_then(|n| n.to_str())
        .ok_or_else(|| Error::InvalidRecording(format!("bad header path {}", path.display())))?
        .to_string();
    let header = RecordingHeader {
        id: rec.id.clone(),
        fs: rec.fs,
        channels: rec.channels.clone(),
        n_samples: rec.n_samples(),
        dtype: "f32le".into(),
        raw_file: raw_name,
    };
    let text = serde_json::to_string_pretty(&header).map_err(|e| Error::json("header", e))?;
    fs::write(path, text).map_err(|e| Error::io(path, e))?;

    let file = fs::File::create(&raw_path).map_err(|e| Error::io(&raw_path, e))?;
    let mut w = BufWriter::new(file);
    for row in &rec.samples {
        for v in row {
            w.write_all(&v.to_le_bytes()).map_err(|e| Error::io(&raw_path, e))?;
        }
    }
    w.flush().map_err(|e| Error::io(&raw_path, e))?;
    Ok(())
}

pub fn load_recording(path: impl AsRef<Path>) -> Result<Recording> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let header: RecordingHeader =
        serde_json::from_str(&text).map_err(|e| Error::json(path.display().to_string(), e))?;
    if header.dtype != "f32le" {
        return Err(Error::InvalidRecording(format!(
            "unsupported dtype {:?}",
            header.dtype
        )));
    }
    if header.fs == 0 {
        return Err(Error::InvalidRecording("sampling rate must be positive".into()));
    }
    let raw_path = path
        .parent()
        .unwrap_or_else(|| Path::new("."))
        .join(&header.raw_file);
    let bytes = fs::read(&raw_path).map_err(|e| Error::io(&raw_path, e))?;
    let expected = (header.channels.len() * header.n_samples * 4) as u64;
    if bytes.len() as u64 != expected {
        return Err(Error::SizeMismatch {
            path: raw_path,
            expected,
            actual: bytes.len() as u64,
        });
    }
    let values: Vec<f32> = bytes
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]))
        .collect();
    let samples = if header.n_samples == 0 {
        vec![Vec::new(); header.channels.len()]
    } else {
        values.chunks(header.n_samples).map(<[f32]>::to_vec).collect()
    };
    Recording::new(header.id, header.fs, header.channels, samples)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Annotation {
    pub recording_id: String,
    pub channel: String,
    pub labeler: String,
    pub t_start: f64,
    pub t_end: f64,
    pub class: EventClass,
}

impl Annotation {
    pub fn polarity(&self) -> Polarity {
        self.class.polarity()
    }

    pub fn duration(&self) -> f64 {
        self.t_end - self.t_start
    }

    fn check(&self) -> std::result::Result<(), String> {
        if !self.t_start.is_finite() || !self.t_end.is_finite() {
            return Err("non-finite time".into());
        }
        if self.t_start < 0.0 {
            return Err(format!("t_start {} is negative", self.t_start));
        }
        if self.t_end <= self.t_start {
            return Err(format!(
                "t_end {} must exceed t_start {}",
                self.t_end, self.t_start
            ));
        }
        if self.duration() > MAX_WINDOW_S + TIME_EPS {
            return Err(format!(
                "window lasts {:.3} s, longer than the {MAX_WINDOW_S} s limit on event windows",
                self.duration()
            ));
        }
        Ok(())
    }
}

pub fn load_annotations(path: impl AsRef<Path>) -> Result<Vec<Annotation>> {
    let path = path.as_ref();
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    parse_annotations(BufReader::new(file))
}

/// Parses JSON Lines annotations from any reader. Blank lines are skipped.
pub fn parse_annotations<R: BufRead>(reader: R) -> Result<Vec<Annotation>> {
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line_no = i + 1;
        let line = line.map_err(|e| Error::InvalidAnnotation {
            line: line_no,
            reason: e.to_string(),
        })?;
        if line.trim().is_empty() {
            continue;
        }
        let ann: Annotation =
            serde_json::from_str(&line).map_err(|e| Error::InvalidAnnotation {
                line: line_no,
                reason: e.to_string(),
            })?;
        ann.check().map_err(|reason| Error::InvalidAnnotation {
            line: line_no,
            reason,
        })?;
        out.push(ann);
    }
    Ok(out)
}

pub fn save_annotations(annotations: &[Annotation], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    for a in annotations {
        let line = serde_json::to_string(a).map_err(|e| Error::json("annotation", e))?;
        writeln!(w, "{line}").map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Train,
    Test,
}

/// An annotated time interval `[t0, t1]` in seconds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Block {
    pub t0: f64,
    pub t1: f64,
}

impl Block {
    pub fn contains(&self, t0: f64, t1: f64) -> bool {
        t0 >= self.t0 - TIME_EPS && t1 <= self.t1 + TIME_EPS
    }

    pub fn duration(&self) -> f64 {
        self.t1 - self.t0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecordingEntry {
    pub id: String,
    /// Header path, relative to the manifest's directory.
    pub header: PathBuf,
    pub fs: u32,
    pub duration: f64,
    pub channels: Vec<String>,
    /// Names of the labelers that annotated this recording.
    pub labelers: Vec<String>,
    pub blocks: Vec<Block>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub role: Role,
    pub labelers: Vec<LabelerId>,
    pub recordings: Vec<RecordingEntry>,
    /// JSON Lines annotation file, relative to the manifest's directory.
    pub annotations: PathBuf,
    #[serde(skip)]
    pub base_dir: PathBuf,
}

impl DatasetManifest {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut m: DatasetManifest =
            serde_json::from_str(&text).map_err(|e| Error::json(path.display().to_string(), e))?;
        m.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        m.check_labelers()?;
        Ok(m)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let text = serde_json::to_string_pretty(self).map_err(|e| Error::json("manifest", e))?;
        fs::write(path, text).map_err(|e| Error::io(path, e))
    }

    fn check_labelers(&self) -> Result<()> {
        for (i, l) in self.labelers.iter().enumerate() {
            if l.index != i {
                return Err(Error::InvalidConfig(format!(
                    "labeler {} has index {}, expected dense index {i}",
                    l.name, l.index
                )));
            }
        }
        let names: BTreeSet<_> = self.labelers.iter().map(|l| &l.name).collect();
        if names.len() != self.labelers.len() {
            return Err(Error::InvalidConfig("duplicate labeler names".into()));
        }
        Ok(())
    }

    pub fn k(&self) -> usize {
        self.labelers.len()
    }

    pub fn labeler_index(&self, name: &str) -> Option<usize> {
        self.labelers.iter().position(|l| l.name == name)
    }

    pub fn recording(&self, id: &str) -> Option<&RecordingEntry> {
        self.recordings.iter().find(|r| r.id == id)
    }

    pub fn header_path(&self, entry: &RecordingEntry) -> PathBuf {
        self.base_dir.join(&entry.header)
    }

    pub fn annotations_path(&self) -> PathBuf {
        self.base_dir.join(&self.annotations)
    }

    pub fn load_annotations(&self) -> Result<Vec<Annotation>> {
        load_annotations(self.annotations_path())
    }

    pub fn load_recording(&self, entry: &RecordingEntry) -> Result<Recording> {
        load_recording(self.header_path(entry))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverageGapReport {
    pub recording: String,
    pub labeler: String,
    pub channel: String,
    pub block: usize,
    pub t0: f64,
    pub t1: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    /// Annotations that reference an unknown recording, channel or labeler.
    pub dangling: Vec<String>,
    /// Annotations not contained in any annotated block.
    pub out_of_block: Vec<String>,
    /// Annotations extending past the recording's end.
    pub out_of_range: Vec<String>,
    /// Blocks lying outside the recording.
    pub bad_blocks: Vec<String>,
    /// Uncovered stretches inside an assigned (labeler, channel, block).
    pub coverage_gaps: Vec<CoverageGapReport>,
    /// A labeler's own windows overlapping each other.
    pub overlaps: Vec<String>,
}

impl ValidationReport {
    pub fn is_empty(&self) -> bool {
        self.dangling.is_empty()
            && self.out_of_block.is_empty()
            && self.out_of_range.is_empty()
            && self.bad_blocks.is_empty()
            && self.coverage_gaps.is_empty()
            && self.overlaps.is_empty()
    }
}

/// Checks annotations against the manifest. Never fails; problems are reported.
pub fn validate_manifest(manifest: &DatasetManifest, annotations: &[Annotation]) -> ValidationReport {
    let mut report = ValidationReport::default();
    let labeler_names: BTreeSet<&str> = manifest.labelers.iter().map(|l| l.name.as_str()).collect();

    for entry in &manifest.recordings {
        for (bi, b) in entry.blocks.iter().enumerate() {
            if b.t0 < -TIME_EPS || b.t1 > entry.duration + TIME_EPS || b.t1 <= b.t0 {
                report.bad_blocks.push(format!(
                    "{} block {bi} [{}, {}] outside [0, {}]",
                    entry.id, b.t0, b.t1, entry.duration
                ));
            }
        }
        for l in &entry.labelers {
            if !labeler_names.contains(l.as_str()) {
                report
                    .dangling
                    .push(format!("{} assigns unknown labeler {l}", entry.id));
            }
        }
    }

    // (recording, labeler, channel) -> sample intervals
    let mut grouped: BTreeMap<(&str, &str, &str), Vec<(usize, usize)>> = BTreeMap::new();
    for (i, a) in annotations.iter().enumerate() {
        let Some(entry) = manifest.recording(&a.recording_id) else {
            report
                .dangling
                .push(format!("annotation {i}: unknown recording {}", a.recording_id));
            continue;
        };
        if !entry.labelers.iter().any(|l| l == &a.labeler) {
            report.dangling.push(format!(
                "annotation {i}: labeler {} not assigned to {}",
                a.labeler, a.recording_id
            ));
            continue;
        }
        if !entry.channels.iter().any(|c| c == &a.channel) {
            report.dangling.push(format!(
                "annotation {i}: unknown channel {} in {}",
                a.channel, a.recording_id
            ));
            continue;
        }
        if a.t_end > entry.duration + TIME_EPS {
            report.out_of_range.push(format!(
                "annotation {i}: ends at {} past recording end {}",
                a.t_end, entry.duration
            ));
        }
        if !entry.blocks.iter().any(|b| b.contains(a.t_start, a.t_end)) {
            report.out_of_block.push(format!(
                "annotation {i}: [{}, {}] on {}/{} lies outside every block",
                a.t_start, a.t_end, a.recording_id, a.channel
            ));
        }
        grouped
            .entry((&a.recording_id, &a.labeler, &a.channel))
            .or_default()
            .push((to_sample(a.t_start, entry.fs), to_sample(a.t_end, entry.fs)));
    }

    for entry in &manifest.recordings {
        for labeler in &entry.labelers {
            for channel in &entry.channels {
                let mut intervals = grouped
                    .get(&(entry.id.as_str(), labeler.as_str(), channel.as_str()))
                    .cloned()
                    .unwrap_or_default();
                intervals.sort_unstable();
                for w in intervals.windows(2) {
                    if w[1].0 < w[0].1 {
                        report.overlaps.push(format!(
                            "{}/{}/{}: windows starting at samples {} and {} overlap",
                            entry.id, labeler, channel, w[0].0, w[1].0
                        ));
                    }
                }
                for (bi, b) in entry.blocks.iter().enumerate() {
                    let (s0, s1) = (to_sample(b.t0, entry.fs), to_sample(b.t1, entry.fs));
                    for (g0, g1) in uncovered(&intervals, s0, s1) {
                        report.coverage_gaps.push(CoverageGapReport {
                            recording: entry.id.clone(),
                            labeler: labeler.clone(),
                            channel: channel.clone(),
                            block: bi,
                            t0: to_seconds(g0, entry.fs),
                            t1: to_seconds(g1, entry.fs),
                        });
                    }
                }
            }
        }
    }
    report
}

/// Sub-ranges of `[s0, s1)` not covered by the sorted half-open `intervals`.
pub(crate) fn uncovered(intervals: &[(usize, usize)], s0: usize, s1: usize) -> Vec<(usize, usize)> {
    let mut gaps = Vec::new();
    let mut cursor = s0;
    for &(a, b) in intervals {
        if b <= cursor || a >= s1 {
            continue;
        }
        if a > cursor {
            gaps.push((cursor, a.min(s1)));
        }
        cursor = cursor.max(b);
        if cursor >= s1 {
            break;
        }
    }
    if cursor < s1 {
        gaps.push((cursor, s1));
    }
    gaps
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ann(t0: f64, t1: f64, class: EventClass) -> Annotation {
        Annotation {
            recording_id: "r0".into(),
            channel: "c0".into(),
            labeler: "L0".into(),
            t_start: t0,
            t_end: t1,
            class,
        }
    }

    fn manifest() -> DatasetManifest {
        DatasetManifest {
            role: Role::Train,
            labelers: vec![LabelerId {
                index: 0,
                name: "L0".into(),
            }],
            recordings: vec![RecordingEntry {
                id: "r0".into(),
                header: "r0.json".into(),
                fs: 256,
                duration: 20.0,
                channels: vec!["c0".into()],
                labelers: vec!["L0".into()],
                blocks: vec![Block { t0: 5.0, t1: 8.0 }],
            }],
            annotations: "ann.jsonl".into(),
            base_dir: PathBuf::new(),
        }
    }

    #[test]
    fn polarity_has_three_positive_classes() {
        let positives = EventClass::ALL
            .iter()
            .filter(|c| c.polarity().is_positive())
            .count();
        assert_eq!(positives, 3);
        assert_eq!(EventClass::SleepSpindle.polarity(), Polarity::Negative);
        assert_eq!(EventClass::Spike.polarity(), Polarity::Positive);
    }

    #[test]
    fn class_strings_round_trip() {
        for c in EventClass::ALL {
            assert_eq!(c.as_str().parse::<EventClass>().unwrap(), c);
            let json = serde_json::to_string(&c).unwrap();
            assert_eq!(json, format!("\"{}\"", c.as_str()));
        }
    }

    #[test]
    fn parses_a_spike_line() {
        let line = r#"{"recording_id":"r0","channel":"c0","labeler":"L0","t_start":1.0,"t_end":1.3,"class":"spike"}"#;
        let anns = parse_annotations(line.as_bytes()).unwrap();
        assert_eq!(anns.len(), 1);
        assert_eq!(anns[0].polarity(), Polarity::Positive);
    }

    #[test]
    fn rejects_long_windows_and_bad_input() {
        let long = r#"{"recording_id":"r0","channel":"c0","labeler":"L0","t_start":1.0,"t_end":3.5,"class":"norm"}"#;
        let err = parse_annotations(long.as_bytes()).unwrap_err().to_string();
        assert!(err.contains("2 s limit"), "{err}");

        let reversed = r#"{"recording_id":"r0","channel":"c0","labeler":"L0","t_start":1.0,"t_end":1.0,"class":"norm"}"#;
        assert!(parse_annotations(reversed.as_bytes()).is_err());

        let unknown = r#"{"recording_id":"r0","channel":"c0","labeler":"L0","t_start":1.0,"t_end":1.2,"class":"blink"}"#;
        assert!(parse_annotations(unknown.as_bytes()).is_err());

        let broken = "{\"recording_id\":";
        assert!(matches!(
            parse_annotations(broken.as_bytes()),
            Err(Error::InvalidAnnotation { line: 1, .. })
        ));
    }

    #[test]
    fn recording_invariants() {
        assert!(Recording::new("r", 0, vec!["a".into()], vec![vec![0.0; 4]]).is_err());
        assert!(Recording::new("r", 256, vec!["a".into()], vec![vec![]]).is_err());
        assert!(Recording::new("r", 256, vec!["a".into()], vec![vec![f32::NAN]]).is_err());
        assert!(Recording::new(
            "r",
            256,
            vec!["a".into(), "b".into()],
            vec![vec![0.0; 4], vec![0.0; 3]]
        )
        .is_err());
        let rec = Recording::new("r", 256, vec!["a".into(), "b".into()], vec![vec![0.0; 2560]; 2])
            .unwrap();
        assert_eq!(rec.duration(), 10.0);
    }

    #[test]
    fn consistent_manifest_validates_clean() {
        let m = manifest();
        let anns = vec![
            ann(5.0, 6.5, EventClass::Norm),
            ann(6.5, 6.7, EventClass::Spike),
            ann(6.7, 8.0, EventClass::Artifact),
        ];
        let report = validate_manifest(&m, &anns);
        assert!(report.is_empty(), "{report:?}");
    }

    #[test]
    fn flags_out_of_block_and_gaps() {
        let m = manifest();
        let anns = vec![
            ann(5.0, 6.5, EventClass::Norm),
            ann(7.0, 8.0, EventClass::Norm),
            ann(12.0, 12.5, EventClass::Spike),
        ];
        let report = validate_manifest(&m, &anns);
        assert_eq!(report.out_of_block.len(), 1);
        assert_eq!(report.coverage_gaps.len(), 1);
        let gap = &report.coverage_gaps[0];
        assert_eq!((gap.t0, gap.t1), (6.5, 7.0));
    }

    #[test]
    fn flags_dangling_references() {
        let m = manifest();
        let mut a = ann(5.0, 8.0 - 1.5, EventClass::Norm);
        a.labeler = "L9".into();
        let mut b = ann(5.0, 6.0, EventClass::Norm);
        b.recording_id = "nope".into();
        let report = validate_manifest(&m, &[a, b]);
        assert_eq!(report.dangling.len(), 2);
    }

    #[test]
    fn uncovered_ranges() {
        assert_eq!(uncovered(&[(0, 5), (7, 10)], 0, 10), vec![(5, 7)]);
        assert_eq!(uncovered(&[], 3, 6), vec![(3, 6)]);
        assert_eq!(uncovered(&[(0, 4), (2, 12)], 1, 10), vec![]);
    }
}
