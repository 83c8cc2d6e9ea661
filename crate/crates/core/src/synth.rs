//! Seeded synthetic EEG with injected events and simulated labelers.
//!
//! Backgrounds are 1/f^exponent noise plus an amplitude-modulated alpha
//! rhythm. Events are parameterized waveforms placed by a Poisson process per
//! channel. Simulated labelers keep, relabel and jitter true events according
//! to a [`LabelerStyle`], add spurious spikes, and tile the rest of every
//! annotated block with negative windows of at most 2 s.
//!
//! The labeler noise model is a stand-in: it is not fitted to any clinical
//! annotation data.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fs;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, Poisson};
use rayon::prelude::*;
use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::descriptor::{central_len, neighbourhood_len};
use crate::error::{Error, Result};
use crate::signal::{
    save_annotations, save_recording, to_sample, to_seconds, Annotation, Block, DatasetManifest,
    EventClass, LabelerId, Recording, RecordingEntry, Role, MAX_WINDOW_S,
};

/// SplitMix64 finalizer; used to derive independent seeds from a base seed.
pub fn mix_seed(base: u64, parts: &[u64]) -> u64 {
    let mut z = base;
    for &p in parts {
        z = z.wrapping_add(0x9E37_79B9_7F4A_7C15).wrapping_add(p);
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^= z >> 31;
    }
    z
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Background {
    /// Spectral exponent of the noise (1 = pink).
    pub exponent: f64,
    pub noise_rms_uv: f64,
    pub alpha_amplitude_uv: f64,
    pub alpha_hz: f64,
}

impl Default for Background {
    fn default() -> Self {
        Background {
            exponent: 1.0,
            noise_rms_uv: 20.0,
            alpha_amplitude_uv: 10.0,
            alpha_hz: 10.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthConfig {
    pub fs: u32,
    pub duration_s: f64,
    pub n_channels: usize,
    pub background: Background,
    /// Events per minute on each channel.
    pub event_rate_per_min: f64,
    /// Probability of each generated class; must sum to 1.
    pub class_mix: BTreeMap<EventClass, f64>,
    /// Uniform peak-amplitude range per class, in microvolts.
    pub amplitude_uv: BTreeMap<EventClass, [f64; 2]>,
}

impl Default for SynthConfig {
    fn default() -> Self {
        use EventClass::*;
        SynthConfig {
            fs: 256,
            duration_s: 60.0,
            n_channels: 4,
            background: Background::default(),
            event_rate_per_min: 12.0,
            class_mix: BTreeMap::from([
                (Spike, 0.25),
                (SharpWave, 0.15),
                (SharpAndSpikeComplex, 0.1),
                (SlowWave, 0.2),
                (SleepSpindle, 0.1),
                (Artifact, 0.1),
                (Other, 0.1),
            ]),
            amplitude_uv: BTreeMap::from([
                (Spike, [30.0, 120.0]),
                (SharpWave, [30.0, 100.0]),
                (SharpAndSpikeComplex, [40.0, 120.0]),
                (SlowWave, [40.0, 120.0]),
                (SleepSpindle, [15.0, 40.0]),
                (Artifact, [60.0, 200.0]),
                (Other, [20.0, 50.0]),
            ]),
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidConfig(m));
        if self.fs == 0 {
            return bad("fs must be positive".into());
        }
        if !(self.duration_s > 0.0) || self.n_channels == 0 {
            return bad("duration and channel count must be positive".into());
        }
        if !(self.event_rate_per_min >= 0.0) || !self.event_rate_per_min.is_finite() {
            return bad("event rate must be non-negative".into());
        }
        let b = &self.background;
        if !(b.noise_rms_uv >= 0.0 && b.alpha_amplitude_uv >= 0.0 && b.exponent.is_finite()) {
            return bad("background parameters must be non-negative".into());
        }
        let total: f64 = self.class_mix.values().sum();
        if self.class_mix.values().any(|&p| !(p >= 0.0)) || (total - 1.0).abs() > 1e-9 {
            return bad(format!("class_mix must be a probability vector (sums to {total})"));
        }
        for (&c, &p) in &self.class_mix {
            if p > 0.0 && c == EventClass::Norm {
                return bad("norm is a filler class and cannot be generated".into());
            }
            if p > 0.0 {
                match self.amplitude_uv.get(&c) {
                    Some([lo, hi]) if *lo >= 0.0 && lo <= hi => {}
                    _ => return bad(format!("missing or invalid amplitude range for {c}")),
                }
            }
        }
        let longest = self
            .class_mix
            .iter()
            .filter(|(_, &p)| p > 0.0)
            .map(|(&c, _)| duration_range(c).1)
            .fold(0.0, f64::max);
        if longest > self.duration_s {
            return bad("recording shorter than the longest event".into());
        }
        Ok(())
    }

    pub fn n_samples(&self) -> usize {
        (self.duration_s * self.fs as f64).round() as usize
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruthEvent {
    pub channel: String,
    pub t_center: f64,
    pub duration: f64,
    pub class: EventClass,
    pub amplitude_uv: f64,
}

impl GroundTruthEvent {
    pub fn t_start(&self) -> f64 {
        self.t_center - self.duration / 2.0
    }

    pub fn t_end(&self) -> f64 {
        self.t_center + self.duration / 2.0
    }
}

/// Duration range in seconds of each generated class.
pub fn duration_range(class: EventClass) -> (f64, f64) {
    match class {
        EventClass::Spike => (0.02, 0.07),
        EventClass::SharpWave => (0.07, 0.2),
        EventClass::SharpAndSpikeComplex => (0.25, 0.45),
        EventClass::SlowWave => (0.2, 0.5),
        EventClass::SleepSpindle => (0.5, 1.5),
        EventClass::Artifact => (0.15, 0.6),
        EventClass::Other => (0.15, 0.3),
        EventClass::Norm => (0.2, 2.0),
    }
}

fn unit_ricker(r: f64) -> f64 {
    (1.0 - r * r) * (-0.5 * r * r).exp()
}

fn gauss(t: f64, sd: f64) -> f64 {
    (-0.5 * (t / sd).powi(2)).exp()
}

/// Event waveform shape, `t` relative to the event center. `phase` in
/// `[0, 1)` fixes per-event randomness (spindle frequency, etc.).
fn waveform(class: EventClass, t: f64, d: f64, phase: f64) -> f64 {
    match class {
        // Ricker pulse with zero crossings at +-d/2
        EventClass::Spike => unit_ricker(t / (d / 2.0)),
        // steep rise, slower decay, small opposite after-wave
        EventClass::SharpWave => {
            let peak = -d / 6.0;
            let main = if t < peak {
                gauss(t - peak, d / 8.0)
            } else {
                gauss(t - peak, d / 3.5)
            };
            main - 0.3 * gauss(t - d / 2.0, d / 4.0)
        }
        // spike followed by an opposite-sign slow wave
        EventClass::SharpAndSpikeComplex => {
            let spike_at = -d / 2.0 + 0.04;
            let spike = unit_ricker((t - spike_at) / 0.015);
            let (w0, w1) = (spike_at + 0.04, d / 2.0);
            let slow = if t >= w0 && t <= w1 {
                -0.7 * (PI * (t - w0) / (w1 - w0)).sin()
            } else {
                0.0
            };
            spike + slow
        }
        EventClass::SlowWave => {
            if t.abs() <= d / 2.0 {
                (PI * (t + d / 2.0) / d).sin()
            } else {
                0.0
            }
        }
        EventClass::SleepSpindle => {
            if t.abs() <= d / 2.0 {
                let f = 12.0 + 2.0 * phase;
                let env = 0.5 - 0.5 * (2.0 * PI * (t + d / 2.0) / d).cos();
                env * (2.0 * PI * f * t).sin()
            } else {
                0.0
            }
        }
        // electrode pop: abrupt onset, exponential decay
        EventClass::Artifact => {
            let t0 = t + d / 2.0;
            if t0 < 0.0 {
                0.0
            } else {
                (1.0 - (-t0 / 0.004).exp()) * (-t0 / (d / 4.0)).exp()
            }
        }
        // short arciform burst around 9-11 Hz
        EventClass::Other => {
            if t.abs() <= d / 2.0 {
                let f = 9.0 + 2.0 * phase;
                let env = 0.5 - 0.5 * (2.0 * PI * (t + d / 2.0) / d).cos();
                env * (2.0 * PI * f * t).cos().abs().powf(0.7) * (2.0 * PI * f * t).cos().signum()
            } else {
                0.0
            }
        }
        EventClass::Norm => 0.0,
    }
}

/// Half-extent, in seconds, beyond which a class waveform is negligible.
fn support(class: EventClass, d: f64) -> f64 {
    match class {
        EventClass::Spike => 2.5 * d,
        EventClass::SharpWave => d,
        _ => d / 2.0 + 0.02,
    }
}

fn pink_noise(n: usize, exponent: f64, rms: f64, rng: &mut ChaCha8Rng) -> Vec<f64> {
    if n == 0 || rms == 0.0 {
        return vec![0.0; n];
    }
    let normal = Normal::new(0.0, 1.0).unwrap();
    let mut buf: Vec<Complex<f64>> = (0..n)
        .map(|_| Complex::new(normal.sample(rng), 0.0))
        .collect();
    let mut planner = FftPlanner::new();
    planner.plan_fft_forward(n).process(&mut buf);
    for (k, v) in buf.iter_mut().enumerate() {
        let kk = k.min(n - k);
        *v = if kk == 0 {
            Complex::new(0.0, 0.0)
        } else {
            *v * (kk as f64).powf(-exponent / 2.0)
        };
    }
    planner.plan_fft_inverse(n).process(&mut buf);
    let x: Vec<f64> = buf.iter().map(|c| c.re).collect();
    let cur = (x.iter().map(|v| v * v).sum::<f64>() / n as f64).sqrt();
    if cur == 0.0 {
        return x;
    }
    x.into_iter().map(|v| v * rms / cur).collect()
}

fn choose_class(mix: &BTreeMap<EventClass, f64>, u: f64) -> EventClass {
    let mut acc = 0.0;
    let mut last = EventClass::Spike;
    for (&c, &p) in mix {
        if p <= 0.0 {
            continue;
        }
        acc += p;
        last = c;
        if u < acc {
            return c;
        }
    }
    last
}

fn channel_names(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("ch{i:02}")).collect()
}

/// Generates one recording and its ground-truth events. The result is a
/// pure function of `(config, seed)`.
pub fn generate_recording(
    config: &SynthConfig,
    seed: u64,
) -> Result<(Recording, Vec<GroundTruthEvent>)> {
    config.validate()?;
    let fs = config.fs as f64;
    let n = config.n_samples();
    let names = channel_names(config.n_channels);
    let mut samples = Vec::with_capacity(config.n_channels);
    let mut events = Vec::new();

    for (ci, name) in names.iter().enumerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(seed, &[ci as u64]));
        let bg = &config.background;
        let mut x = pink_noise(n, bg.exponent, bg.noise_rms_uv, &mut rng);
        if bg.alpha_amplitude_uv > 0.0 {
            let f = bg.alpha_hz * rng.gen_range(0.9..1.1);
            let ph = rng.gen_range(0.0..2.0 * PI);
            let mod_ph = rng.gen_range(0.0..2.0 * PI);
            for (i, v) in x.iter_mut().enumerate() {
                let t = i as f64 / fs;
                let env = 0.6 + 0.4 * (2.0 * PI * 0.1 * t + mod_ph).sin();
                *v += bg.alpha_amplitude_uv * env * (2.0 * PI * f * t + ph).sin();
            }
        }

        let mean = config.event_rate_per_min * config.duration_s / 60.0;
        let count = if mean > 0.0 {
            Poisson::new(mean).unwrap().sample(&mut rng) as usize
        } else {
            0
        };
        let mut channel_events = Vec::with_capacity(count);
        for _ in 0..count {
            let class = choose_class(&config.class_mix, rng.gen::<f64>());
            let (dlo, dhi) = duration_range(class);
            let d = rng.gen_range(dlo..=dhi);
            let [alo, ahi] = config.amplitude_uv[&class];
            let amp = if ahi > alo { rng.gen_range(alo..=ahi) } else { alo };
            let sign = if rng.gen::<bool>() { 1.0 } else { -1.0 };
            let phase = rng.gen::<f64>();
            let tc = rng.gen_range(d / 2.0..=config.duration_s - d / 2.0);
            let ext = support(class, d);
            let i0 = to_sample((tc - ext).max(0.0), config.fs);
            let i1 = to_sample(tc + ext, config.fs).min(n);
            for (i, v) in x.iter_mut().enumerate().take(i1).skip(i0) {
                let t = i as f64 / fs - tc;
                *v += sign * amp * waveform(class, t, d, phase);
            }
            channel_events.push(GroundTruthEvent {
                channel: name.clone(),
                t_center: tc,
                duration: d,
                class,
                amplitude_uv: amp,
            });
        }
        channel_events.sort_by(|a, b| a.t_center.total_cmp(&b.t_center));
        events.extend(channel_events);
        samples.push(x.into_iter().map(|v| v as f32).collect());
    }
    let rec = Recording::new(format!("synth_{seed:016x}"), config.fs, names, samples)?;
    Ok((rec, events))
}

/// Annotation habits of a simulated labeler.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabelerStyle {
    /// Probability of annotating a true event of each class (default 1).
    #[serde(default)]
    pub recall: BTreeMap<EventClass, f64>,
    /// Spurious spike windows per minute of annotated signal.
    #[serde(default)]
    pub false_positive_rate: f64,
    /// Standard deviation of window boundary placement error, seconds.
    #[serde(default)]
    pub boundary_jitter_sd: f64,
    /// Row-stochastic relabeling of kept events; missing rows are identity.
    #[serde(default)]
    pub class_confusion: BTreeMap<EventClass, BTreeMap<EventClass, f64>>,
    /// Events with peak amplitude below this are never noticed.
    #[serde(default)]
    pub amplitude_floor_uv: f64,
}

impl Default for LabelerStyle {
    fn default() -> Self {
        LabelerStyle::perfect()
    }
}

impl LabelerStyle {
    /// Keeps every event, exact boundaries, no relabeling, no spurious windows.
    pub fn perfect() -> Self {
        LabelerStyle {
            recall: BTreeMap::new(),
            false_positive_rate: 0.0,
            boundary_jitter_sd: 0.0,
            class_confusion: BTreeMap::new(),
            amplitude_floor_uv: 0.0,
        }
    }

    pub fn recall_of(&self, c: EventClass) -> f64 {
        self.recall.get(&c).copied().unwrap_or(1.0)
    }

    pub fn validate(&self) -> Result<()> {
        for (c, &r) in &self.recall {
            if !(0.0..=1.0).contains(&r) {
                return Err(Error::InvalidConfig(format!("recall for {c} is {r}")));
            }
        }
        if !(self.false_positive_rate >= 0.0) || !(self.boundary_jitter_sd >= 0.0) {
            return Err(Error::InvalidConfig(
                "false-positive rate and jitter must be non-negative".into(),
            ));
        }
        for (c, row) in &self.class_confusion {
            let s: f64 = row.values().sum();
            if row.values().any(|&p| !(p >= 0.0)) || (s - 1.0).abs() > 1e-9 {
                return Err(Error::InvalidConfig(format!(
                    "confusion row for {c} sums to {s}"
                )));
            }
        }
        Ok(())
    }

    fn relabel(&self, c: EventClass, u: f64) -> EventClass {
        match self.class_confusion.get(&c) {
            Some(row) => choose_class(row, u),
            None => c,
        }
    }
}

/// Places `intervals` (half-open sample ranges) into `occupied`, keeping only
/// the parts not already covered. Both vectors stay sorted and disjoint.
fn free_parts(occupied: &[(usize, usize)], s0: usize, s1: usize) -> Vec<(usize, usize)> {
    crate::signal::uncovered(occupied, s0, s1)
}

fn insert_sorted(occupied: &mut Vec<(usize, usize)>, iv: (usize, usize)) {
    let pos = occupied.partition_point(|o| o.0 < iv.0);
    occupied.insert(pos, iv);
}

/// Simulates one labeler's annotations over `blocks` of `recording`.
pub fn simulate_labeler(
    truth: &[GroundTruthEvent],
    style: &LabelerStyle,
    recording: &Recording,
    blocks: &[Block],
    labeler: &str,
    seed: u64,
) -> Result<Vec<Annotation>> {
    style.validate()?;
    let fs = recording.fs;
    let max_len = to_sample(MAX_WINDOW_S, fs);
    let jitter = if style.boundary_jitter_sd > 0.0 {
        Some(Normal::new(0.0, style.boundary_jitter_sd).unwrap())
    } else {
        None
    };
    let mut out = Vec::new();

    for (ci, channel) in recording.channels.iter().enumerate() {
        let chan_truth: Vec<&GroundTruthEvent> =
            truth.iter().filter(|e| &e.channel == channel).collect();
        for (bi, block) in blocks.iter().enumerate() {
            let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(seed, &[ci as u64, bi as u64]));
            let (b0, b1) = (to_sample(block.t0, fs), to_sample(block.t1, fs));
            let mut marked: Vec<(usize, usize, EventClass)> = Vec::new();

            for e in &chan_truth {
                if e.t_end() <= block.t0 || e.t_start() >= block.t1 {
                    continue;
                }
                // draw every random number up front so the stream does not
                // depend on which branch is taken
                let keep_u = rng.gen::<f64>();
                let class_u = rng.gen::<f64>();
                let (j0, j1) = match &jitter {
                    Some(n) => (n.sample(&mut rng), n.sample(&mut rng)),
                    None => (0.0, 0.0),
                };
                if e.amplitude_uv < style.amplitude_floor_uv || keep_u >= style.recall_of(e.class) {
                    continue;
                }
                let class = style.relabel(e.class, class_u);
                let s0 = to_sample((e.t_start() + j0).max(0.0), fs).clamp(b0, b1);
                let mut s1 = to_sample((e.t_end() + j1).max(0.0), fs).clamp(b0, b1);
                s1 = s1.min(s0 + max_len);
                if s1 > s0 {
                    marked.push((s0, s1, class));
                }
            }

            let block_min = (b1 - b0) as f64 / fs as f64 / 60.0;
            let n_fp = if style.false_positive_rate > 0.0 {
                Poisson::new(style.false_positive_rate * block_min)
                    .unwrap()
                    .sample(&mut rng) as usize
            } else {
                0
            };
            for _ in 0..n_fp {
                let d = rng.gen_range(0.04..0.1);
                let len = to_sample(d, fs).max(1);
                if b1 - b0 <= len {
                    continue;
                }
                let s0 = rng.gen_range(b0..b1 - len);
                marked.push((s0, s0 + len, EventClass::Spike));
            }

            // positives take precedence, then labeled negatives fill what is left
            marked.sort_by_key(|&(s0, s1, c)| (!c.polarity().is_positive(), s0, s1));
            let mut occupied: Vec<(usize, usize)> = Vec::new();
            let mut windows: Vec<(usize, usize, EventClass)> = Vec::new();
            for (s0, s1, class) in marked {
                for (a, b) in free_parts(&occupied, s0, s1) {
                    insert_sorted(&mut occupied, (a, b));
                    windows.push((a, b, class));
                }
            }
            for (a, b) in free_parts(&occupied, b0, b1) {
                let mut cur = a;
                while b - cur > max_len {
                    let len = rng.gen_range(max_len / 4..=max_len);
                    windows.push((cur, cur + len, EventClass::Norm));
                    cur += len;
                }
                if b > cur {
                    windows.push((cur, b, EventClass::Norm));
                }
            }
            windows.sort_by_key(|w| (w.0, w.1));
            out.extend(windows.into_iter().map(|(s0, s1, class)| Annotation {
                recording_id: recording.id.clone(),
                channel: channel.clone(),
                labeler: labeler.to_string(),
                t_start: to_seconds(s0, fs),
                t_end: to_seconds(s1, fs),
                class,
            }));
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NamedStyle {
    pub name: String,
    pub style: LabelerStyle,
}

/// Shape of a generated train/test dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetPlan {
    pub recording: SynthConfig,
    pub n_train: usize,
    pub n_test: usize,
    /// All labelers; the first `train_labelers` annotate every recording.
    pub labelers: Vec<NamedStyle>,
    pub train_labelers: usize,
    /// Number of test recordings that also get one extra labeler each
    /// (cycling through the labelers beyond `train_labelers`).
    pub extra_labeled_test_recordings: usize,
    pub train_blocks: usize,
    pub test_blocks: usize,
    pub block_s: f64,
}

/// Default simulated labelers. The first three annotate everything; the
/// last two only appear on some test recordings.
///
/// * `L0` reads sharp edges of slow waves as sharp waves.
/// * `L1` overlooks spikes below 60 uV and places loose boundaries.
/// * `L2` mistakes electrode pops for spikes.
/// * `L3`, `L4` are moderately noisy extra readers.
pub fn default_labelers() -> Vec<NamedStyle> {
    use EventClass::*;
    let named = |name: &str, style: LabelerStyle| NamedStyle {
        name: name.to_string(),
        style,
    };
    vec![
        named(
            "L0",
            LabelerStyle {
                recall: BTreeMap::from([(Spike, 0.95), (SharpWave, 0.9), (SharpAndSpikeComplex, 0.95)]),
                false_positive_rate: 0.5,
                boundary_jitter_sd: 0.015,
                class_confusion: BTreeMap::from([(SlowWave, BTreeMap::from([(SlowWave, 0.5), (SharpWave, 0.5)]))]),
                amplitude_floor_uv: 0.0,
            },
        ),
        named(
            "L1",
            LabelerStyle {
                recall: BTreeMap::from([(Spike, 0.9), (SharpWave, 0.85), (SharpAndSpikeComplex, 0.9)]),
                false_positive_rate: 0.2,
                boundary_jitter_sd: 0.03,
                class_confusion: BTreeMap::new(),
                amplitude_floor_uv: 60.0,
            },
        ),
        named(
            "L2",
            LabelerStyle {
                recall: BTreeMap::from([(Spike, 0.95), (SharpWave, 0.9), (SharpAndSpikeComplex, 0.95)]),
                false_positive_rate: 0.5,
                boundary_jitter_sd: 0.015,
                class_confusion: BTreeMap::from([(Artifact, BTreeMap::from([(Artifact, 0.6), (Spike, 0.4)]))]),
                amplitude_floor_uv: 0.0,
            },
        ),
        named(
            "L3",
            LabelerStyle {
                recall: BTreeMap::from([(Spike, 0.85), (SharpWave, 0.8), (SharpAndSpikeComplex, 0.9)]),
                false_positive_rate: 1.0,
                boundary_jitter_sd: 0.02,
                class_confusion: BTreeMap::new(),
                amplitude_floor_uv: 0.0,
            },
        ),
        named(
            "L4",
            LabelerStyle {
                recall: BTreeMap::from([(Spike, 0.9), (SharpWave, 0.75), (SharpAndSpikeComplex, 0.9)]),
                false_positive_rate: 0.5,
                boundary_jitter_sd: 0.025,
                class_confusion: BTreeMap::from([(Other, BTreeMap::from([(Other, 0.7), (SharpWave, 0.3)]))]),
                amplitude_floor_uv: 40.0,
            },
        ),
    ]
}

impl Default for DatasetPlan {
    fn default() -> Self {
        DatasetPlan {
            recording: SynthConfig {
                duration_s: 180.0,
                n_channels: 16,
                event_rate_per_min: 40.0,
                ..SynthConfig::default()
            },
            n_train: 24,
            n_test: 6,
            labelers: default_labelers(),
            train_labelers: 3,
            extra_labeled_test_recordings: 4,
            train_blocks: 15,
            test_blocks: 4,
            block_s: 10.0,
        }
    }
}

impl DatasetPlan {
    pub fn validate(&self) -> Result<()> {
        self.recording.validate()?;
        for l in &self.labelers {
            l.style.validate()?;
        }
        if self.train_labelers == 0 || self.train_labelers > self.labelers.len() {
            return Err(Error::InvalidConfig(format!(
                "train_labelers = {} with {} labelers",
                self.train_labelers,
                self.labelers.len()
            )));
        }
        if self.extra_labeled_test_recordings > 0 && self.labelers.len() == self.train_labelers {
            return Err(Error::InvalidConfig(
                "extra test labelers requested but none defined".into(),
            ));
        }
        if !(self.block_s > 0.0) || self.block_s > self.recording.duration_s {
            return Err(Error::InvalidConfig("invalid block duration".into()));
        }
        for n in [self.train_blocks, self.test_blocks] {
            block_layout(&self.recording, n, self.block_s, 0)?;
        }
        Ok(())
    }
}

/// Context margin around blocks so every block sample admits a descriptor.
fn context_margin(fs: u32) -> f64 {
    (neighbourhood_len(fs) + central_len(fs)) as f64 / fs as f64 + 0.05
}

/// Places `n` non-overlapping blocks, one in each equal slot of the usable span.
pub fn block_layout(config: &SynthConfig, n: usize, block_s: f64, seed: u64) -> Result<Vec<Block>> {
    if n == 0 {
        return Ok(Vec::new());
    }
    let margin = context_margin(config.fs);
    let usable = config.duration_s - 2.0 * margin;
    let slot = usable / n as f64;
    if slot < block_s {
        return Err(Error::InvalidConfig(format!(
            "{n} blocks of {block_s} s do not fit in a {} s recording",
            config.duration_s
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let q = |t: f64| to_seconds(to_sample(t, config.fs), config.fs);
    Ok((0..n)
        .map(|i| {
            let slack = slot - block_s;
            let off = if slack > 0.0 { rng.gen_range(0.0..slack) } else { 0.0 };
            let t0 = q(margin + i as f64 * slot + off);
            Block {
                t0,
                t1: q(t0 + block_s),
            }
        })
        .collect())
}

/// Paths and manifests of a generated dataset.
#[derive(Debug, Clone)]
pub struct GeneratedDataset {
    pub train: DatasetManifest,
    pub test: DatasetManifest,
    pub train_path: PathBuf,
    pub test_path: PathBuf,
}

struct GeneratedRecording {
    entry: RecordingEntry,
    annotations: Vec<Annotation>,
    truth: Vec<GroundTruthEvent>,
}

/// Writes `n_train + n_test` recordings, per-labeler annotations, ground
/// truth and one manifest per split under `out_dir`.
pub fn generate_dataset(plan: &DatasetPlan, seed: u64, out_dir: &Path) -> Result<GeneratedDataset> {
    plan.validate()?;
    let rec_dir = out_dir.join("recordings");
    fs::create_dir_all(&rec_dir).map_err(|e| Error::io(&rec_dir, e))?;
    let n_total = plan.n_train + plan.n_test;
    let k = plan.train_labelers;
    let extras: Vec<usize> = (k..plan.labelers.len()).collect();

    let generated: Vec<GeneratedRecording> = (0..n_total)
        .into_par_iter()
        .map(|i| -> Result<GeneratedRecording> {
            let is_train = i < plan.n_train;
            let id = if is_train {
                format!("train_{i:03}")
            } else {
                format!("test_{:03}", i - plan.n_train)
            };
            let (mut rec, truth) = generate_recording(&plan.recording, mix_seed(seed, &[1, i as u64]))?;
            rec.id = id.clone();
            let n_blocks = if is_train { plan.train_blocks } else { plan.test_blocks };
            let blocks = block_layout(&plan.recording, n_blocks, plan.block_s, mix_seed(seed, &[2, i as u64]))?;
            let mut labelers: Vec<usize> = (0..k).collect();
            if !is_train && i - plan.n_train < plan.extra_labeled_test_recordings {
                labelers.push(extras[(i - plan.n_train) % extras.len()]);
            }
            let mut annotations = Vec::new();
            for &l in &labelers {
                let named = &plan.labelers[l];
                annotations.extend(simulate_labeler(
                    &truth,
                    &named.style,
                    &rec,
                    &blocks,
                    &named.name,
                    mix_seed(seed, &[3, i as u64, l as u64]),
                )?);
            }
            let header = PathBuf::from("recordings").join(format!("{id}.json"));
            save_recording(&rec, out_dir.join(&header))?;
            Ok(GeneratedRecording {
                entry: RecordingEntry {
                    id,
                    header,
                    fs: rec.fs,
                    duration: rec.duration(),
                    channels: rec.channels.clone(),
                    labelers: labelers.iter().map(|&l| plan.labelers[l].name.clone()).collect(),
                    blocks,
                },
                annotations,
                truth,
            })
        })
        .collect::<Result<_>>()?;

    let (train_recs, test_recs) = generated.split_at(plan.n_train);
    let write_split = |recs: &[GeneratedRecording], role: Role, name: &str, labelers: &[NamedStyle]| -> Result<(DatasetManifest, PathBuf)> {
        let ann_file = format!("{name}_annotations.jsonl");
        let anns: Vec<Annotation> = recs.iter().flat_map(|r| r.annotations.iter().cloned()).collect();
        save_annotations(&anns, out_dir.join(&ann_file))?;
        let truth_path = out_dir.join(format!("{name}_truth.jsonl"));
        let mut truth_lines = String::new();
        for r in recs {
            for e in &r.truth {
                let v = serde_json::json!({"recording_id": r.entry.id, "event": e});
                truth_lines.push_str(&v.to_string());
                truth_lines.push('\n');
            }
        }
        fs::write(&truth_path, truth_lines).map_err(|e| Error::io(&truth_path, e))?;
        let manifest = DatasetManifest {
            role,
            labelers: labelers
                .iter()
                .enumerate()
                .map(|(index, l)| LabelerId { index, name: l.name.clone() })
                .collect(),
            recordings: recs.iter().map(|r| r.entry.clone()).collect(),
            annotations: PathBuf::from(ann_file),
            base_dir: out_dir.to_path_buf(),
        };
        let path = out_dir.join(format!("{name}.json"));
        manifest.save(&path)?;
        Ok((manifest, path))
    };
    let (train, train_path) = write_split(train_recs, Role::Train, "train", &plan.labelers[..k])?;
    let (test, test_path) = write_split(test_recs, Role::Test, "test", &plan.labelers)?;
    Ok(GeneratedDataset {
        train,
        test,
        train_path,
        test_path,
    })
}
