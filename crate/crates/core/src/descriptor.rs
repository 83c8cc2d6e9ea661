//! Single-channel event descriptor.
//!
//! An event at a center sample is described by a central window of 0.2 s and
//! two adjacent 0.8 s neighbourhood windows, `[left][central][right]`. The
//! feature groups, in layout order, are:
//!
//! 1. autoregressive prediction-error anomaly score (1)
//! 2. band log-powers: central, neighbourhood and their difference (3 x 8)
//! 3. Teager-Kaiser energy: central, neighbourhood and quotient (3)
//! 4. waveform-length quotient (1)
//! 5. Ricker wavelet coefficient statistics of the neighbourhood-standardized
//!    central window, 5 scales x (mean, sd, skewness, min, max) (25)
//! 6. lag-1 difference statistics of the central window (5)

use std::cell::RefCell;
use std::f64::consts::PI;
use std::io::Write;

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stats::summary5;

pub const LAYOUT_VERSION: u32 = 1;
pub const N_FEATURES: usize = 59;
pub const CENTRAL_S: f64 = 0.2;
pub const NEIGHBOURHOOD_S: f64 = 0.8;
pub const BAND_EDGES_HZ: [f64; 9] = [0.5, 2.0, 4.0, 8.0, 12.0, 16.0, 24.0, 32.0, 64.0];
pub const CWT_SCALES: [f64; 5] = [1.0, 2.0, 4.0, 8.0, 16.0];
pub const DEFAULT_AR_ORDER: usize = 8;

const LOG_POWER_FLOOR: f64 = 1e-12;
const QUOTIENT_GUARD: f64 = 1e-12;
const RMS_FLOOR: f64 = 1e-8;
const SD_FLOOR: f64 = 1e-8;
const RIDGE: f64 = 1e-6;
const STAT_NAMES: [&str; 5] = ["mean", "sd", "skew", "min", "max"];

/// Named, versioned order of the descriptor values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureLayout {
    pub version: u32,
    pub ar_order: usize,
    pub band_edges_hz: Vec<f64>,
    pub cwt_scales: Vec<f64>,
    pub names: Vec<String>,
}

impl FeatureLayout {
    pub fn standard() -> Self {
        Self::with_ar_order(DEFAULT_AR_ORDER)
    }

    pub fn with_ar_order(ar_order: usize) -> Self {
        let bands: Vec<String> = BAND_EDGES_HZ
            .windows(2)
            .map(|w| format!("{}_{}", w[0], w[1]))
            .collect();
        let mut names = vec!["anomaly".to_string()];
        for group in ["central", "nbhd", "quotient"] {
            names.extend(bands.iter().map(|b| format!("fft_{group}_{b}")));
        }
        names.extend(
            ["teager_central", "teager_nbhd", "teager_quotient", "wl_quotient"].map(String::from),
        );
        for s in CWT_SCALES {
            names.extend(STAT_NAMES.iter().map(|st| format!("cwt_s{s}_{st}")));
        }
        names.extend(STAT_NAMES.iter().map(|st| format!("diff_{st}")));
        debug_assert_eq!(names.len(), N_FEATURES);
        FeatureLayout {
            version: LAYOUT_VERSION,
            ar_order,
            band_edges_hz: BAND_EDGES_HZ.to_vec(),
            cwt_scales: CWT_SCALES.to_vec(),
            names,
        }
    }

    /// Layout of arbitrary numeric columns `f0, f1, ...` (version 0), for
    /// models trained outside the EEG descriptor.
    pub fn generic(n: usize) -> Self {
        FeatureLayout {
            version: 0,
            ar_order: 0,
            band_edges_hz: Vec::new(),
            cwt_scales: Vec::new(),
            names: (0..n).map(|i| format!("f{i}")).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn position(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }
}

impl Default for FeatureLayout {
    fn default() -> Self {
        Self::standard()
    }
}

/// Descriptor values in [`FeatureLayout`] order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub layout_version: u32,
    pub values: Vec<f64>,
}

impl FeatureVector {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

pub fn central_len(fs: u32) -> usize {
    (CENTRAL_S * fs as f64).round() as usize
}

pub fn neighbourhood_len(fs: u32) -> usize {
    (NEIGHBOURHOOD_S * fs as f64).round() as usize
}

/// Smallest and largest admissible center sample for a channel of `len` samples.
pub fn center_bounds(len: usize, fs: u32) -> Option<(usize, usize)> {
    let c = central_len(fs);
    let nb = neighbourhood_len(fs);
    let half = c / 2;
    let min = nb + half;
    let total = 2 * nb + c;
    if len < total {
        return None;
    }
    Some((min, len - total + min))
}

/// The three contiguous windows around one center sample.
#[derive(Debug, Clone, PartialEq)]
pub struct WindowTriplet {
    pub fs: u32,
    pub left: Vec<f64>,
    pub central: Vec<f64>,
    pub right: Vec<f64>,
}

impl WindowTriplet {
    /// Builds a triplet from explicit windows.
    pub fn from_parts(fs: u32, left: Vec<f64>, central: Vec<f64>, right: Vec<f64>) -> Self {
        WindowTriplet {
            fs,
            left,
            central,
            right,
        }
    }

    /// Left and right neighbourhoods concatenated.
    pub fn neighbourhood(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(self.left.len() + self.right.len());
        v.extend_from_slice(&self.left);
        v.extend_from_slice(&self.right);
        v
    }

    fn contiguous(&self) -> Vec<f64> {
        let mut v = self.left.clone();
        v.extend_from_slice(&self.central);
        v.extend_from_slice(&self.right);
        v
    }

    pub fn scaled(&self, a: f64) -> Self {
        let s = |w: &[f64]| w.iter().map(|x| x * a).collect();
        WindowTriplet {
            fs: self.fs,
            left: s(&self.left),
            central: s(&self.central),
            right: s(&self.right),
        }
    }
}

/// Cuts `[left][central][right]` around `center`; the center sits at
/// position `floor(len/2)` of the central window.
pub fn extract_windows(channel: &[f32], center: usize, fs: u32) -> Result<WindowTriplet> {
    let c = central_len(fs);
    let nb = neighbourhood_len(fs);
    let half = c / 2;
    let context_err = || {
        let (min, max) = center_bounds(channel.len(), fs).unwrap_or((nb + half, 0));
        Error::Context {
            center,
            min,
            max,
            len: channel.len(),
        }
    };
    if center < nb + half {
        return Err(context_err());
    }
    let start = center - half;
    if start + c + nb > channel.len() {
        return Err(context_err());
    }
    let grab = |a: usize, b: usize| channel[a..b].iter().map(|&v| v as f64).collect();
    Ok(WindowTriplet {
        fs,
        left: grab(start - nb, start),
        central: grab(start, start + c),
        right: grab(start + c, start + c + nb),
    })
}

/// Solves `a x = b` by Gaussian elimination with partial pivoting.
/// Returns `None` when a pivot is numerically zero.
fn solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    let scale = a
        .iter()
        .enumerate()
        .map(|(i, r)| r[i].abs())
        .fold(0.0_f64, f64::max);
    if scale == 0.0 || !scale.is_finite() {
        return None;
    }
    let tol = scale * 1e-12;
    for col in 0..n {
        let pivot = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[pivot][col].abs() <= tol {
            return None;
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            if f == 0.0 {
                continue;
            }
            for k in col..n {
                a[row][k] -= f * a[col][k];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let s: f64 = (i + 1..n).map(|k| a[i][k] * x[k]).sum();
        x[i] = (b[i] - s) / a[i][i];
    }
    x.iter().all(|v| v.is_finite()).then_some(x)
}

/// Least-squares AR(`order`) predictor with intercept, fit on the given
/// segments. Regression rows never straddle two segments.
fn fit_ar(segments: &[&[f64]], order: usize) -> Vec<f64> {
    let p = order + 1;
    let mut ata = vec![vec![0.0; p]; p];
    let mut atb = vec![0.0; p];
    let mut row = vec![0.0; p];
    for seg in segments {
        for n in order..seg.len() {
            row[0] = 1.0;
            for k in 1..=order {
                row[k] = seg[n - k];
            }
            for i in 0..p {
                atb[i] += row[i] * seg[n];
                for j in 0..p {
                    ata[i][j] += row[i] * row[j];
                }
            }
        }
    }
    if let Some(coef) = solve(ata.clone(), atb.clone()) {
        return coef;
    }
    let mut ridged = ata;
    for (i, r) in ridged.iter_mut().enumerate() {
        r[i] += RIDGE;
    }
    solve(ridged, atb).unwrap_or_else(|| vec![0.0; p])
}

fn ar_predict(coef: &[f64], history: &[f64], n: usize) -> f64 {
    let order = coef.len() - 1;
    coef[0] + (1..=order).map(|k| coef[k] * history[n - k]).sum::<f64>()
}

/// RMS one-step prediction error over the central window divided by the
/// in-sample RMS error over the neighbourhood, for an AR model fit on the
/// neighbourhood.
pub fn anomaly_score(t: &WindowTriplet, order: usize) -> f64 {
    let coef = fit_ar(&[&t.left, &t.right], order);
    let mut nb_sq = 0.0;
    let mut nb_n = 0usize;
    for seg in [&t.left, &t.right] {
        for n in order..seg.len() {
            let e = seg[n] - ar_predict(&coef, seg, n);
            nb_sq += e * e;
            nb_n += 1;
        }
    }
    let all = t.contiguous();
    let start = t.left.len();
    let mut c_sq = 0.0;
    for n in start..start + t.central.len() {
        let e = all[n] - ar_predict(&coef, &all, n);
        c_sq += e * e;
    }
    let c_rms = (c_sq / t.central.len().max(1) as f64).sqrt();
    let nb_rms = if nb_n == 0 {
        0.0
    } else {
        (nb_sq / nb_n as f64).sqrt()
    };
    c_rms / nb_rms.max(RMS_FLOOR)
}

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn hann(len: usize) -> Vec<f64> {
    if len == 1 {
        return vec![1.0];
    }
    (0..len)
        .map(|n| 0.5 - 0.5 * (2.0 * PI * n as f64 / (len - 1) as f64).cos())
        .collect()
}

/// FFT length used for a window of `len` samples: the next power of two, at least 64.
pub fn fft_len(len: usize) -> usize {
    len.next_power_of_two().max(64)
}

/// Hann-windowed one-sided power spectrum, zero-padded to `n_fft` points and
/// normalized so the bins sum to the window-weighted mean square of the
/// signal. Returns `(frequency, power)` per bin.
pub fn power_spectrum(x: &[f64], fs: u32, n_fft: usize) -> Vec<(f64, f64)> {
    assert!(n_fft >= x.len(), "n_fft shorter than the window");
    let w = hann(x.len());
    let w_energy: f64 = w.iter().map(|v| v * v).sum();
    let mut buf: Vec<Complex<f64>> = x
        .iter()
        .zip(&w)
        .map(|(v, wi)| Complex::new(v * wi, 0.0))
        .chain(std::iter::repeat(Complex::new(0.0, 0.0)))
        .take(n_fft)
        .collect();
    PLANNER.with(|p| p.borrow_mut().plan_fft_forward(n_fft).process(&mut buf));
    let norm = n_fft as f64 * w_energy;
    (0..=n_fft / 2)
        .map(|k| {
            let factor = if k == 0 || k == n_fft / 2 { 1.0 } else { 2.0 };
            let freq = k as f64 * fs as f64 / n_fft as f64;
            (freq, factor * buf[k].norm_sqr() / norm)
        })
        .collect()
}

/// Log power summed over bins with frequency in each `[lo, hi)` band.
pub fn band_log_powers(x: &[f64], fs: u32, n_fft: usize) -> [f64; 8] {
    let spectrum = power_spectrum(x, fs, n_fft);
    let mut out = [0.0; 8];
    for (b, w) in BAND_EDGES_HZ.windows(2).enumerate() {
        let p: f64 = spectrum
            .iter()
            .filter(|(f, _)| *f >= w[0] && *f < w[1])
            .map(|(_, p)| p)
            .sum();
        out[b] = (p + LOG_POWER_FLOOR).ln();
    }
    out
}

/// 24 values: central band log-powers, neighbourhood band log-powers, and
/// their per-band difference. Both spectra share the FFT length of the
/// neighbourhood, so every band holds bins in both.
pub fn fft_band_features(t: &WindowTriplet) -> [f64; 24] {
    let nbhd_signal = t.neighbourhood();
    let n_fft = fft_len(nbhd_signal.len().max(t.central.len()));
    let central = band_log_powers(&t.central, t.fs, n_fft);
    let nbhd = band_log_powers(&nbhd_signal, t.fs, n_fft);
    let mut out = [0.0; 24];
    for b in 0..8 {
        out[b] = central[b];
        out[8 + b] = nbhd[b];
        out[16 + b] = central[b] - nbhd[b];
    }
    out
}

/// Teager-Kaiser energy `x[n]^2 - x[n-1] x[n+1]` at every interior sample.
pub fn teager_kaiser(x: &[f64]) -> Vec<f64> {
    if x.len() < 3 {
        return Vec::new();
    }
    x.windows(3).map(|w| w[1] * w[1] - w[0] * w[2]).collect()
}

fn mean_or_zero(v: &[f64]) -> f64 {
    if v.is_empty() {
        0.0
    } else {
        v.iter().sum::<f64>() / v.len() as f64
    }
}

/// (central mean, neighbourhood mean, central / neighbourhood) Teager energy.
pub fn teager_features(t: &WindowTriplet) -> [f64; 3] {
    let central = mean_or_zero(&teager_kaiser(&t.central));
    let mut nb = teager_kaiser(&t.left);
    nb.extend(teager_kaiser(&t.right));
    let nbhd = mean_or_zero(&nb);
    [central, nbhd, central / (nbhd + QUOTIENT_GUARD)]
}

pub fn waveform_length(x: &[f64]) -> f64 {
    x.windows(2).map(|w| (w[1] - w[0]).abs()).sum()
}

/// Per-step waveform length of the central window over that of the neighbourhood.
pub fn waveform_length_quotient(t: &WindowTriplet) -> f64 {
    let steps = |x: &[f64]| x.len().saturating_sub(1);
    let central = waveform_length(&t.central) / steps(&t.central).max(1) as f64;
    let nb_steps = (steps(&t.left) + steps(&t.right)).max(1) as f64;
    let nbhd = (waveform_length(&t.left) + waveform_length(&t.right)) / nb_steps;
    central / (nbhd + QUOTIENT_GUARD)
}

/// Ricker ("Mexican hat") wavelet with width parameter `a` samples.
pub fn ricker(t: f64, a: f64) -> f64 {
    let amp = 2.0 / ((3.0 * a).sqrt() * PI.powf(0.25));
    let r = t / a;
    amp * (1.0 - r * r) * (-0.5 * r * r).exp()
}

/// Central window standardized by the neighbourhood mean and sd.
pub fn standardize_central(t: &WindowTriplet) -> Vec<f64> {
    let nb = t.neighbourhood();
    let n = nb.len().max(1) as f64;
    let mu = nb.iter().sum::<f64>() / n;
    let var = nb.iter().map(|v| (v - mu) * (v - mu)).sum::<f64>() / n;
    let sd = var.sqrt().max(SD_FLOOR);
    t.central.iter().map(|v| (v - mu) / sd).collect()
}

/// Same-length convolution of `x` (zero outside) with a Ricker wavelet.
pub fn ricker_transform(x: &[f64], a: f64) -> Vec<f64> {
    let n = x.len();
    if n == 0 {
        return Vec::new();
    }
    // kernel[d + n - 1] = ricker(d) for d in -(n-1)..=(n-1)
    let kernel: Vec<f64> = (0..2 * n - 1)
        .map(|j| ricker(j as f64 - (n - 1) as f64, a))
        .collect();
    (0..n)
        .map(|i| {
            (0..n)
                .map(|m| x[m] * kernel[i + n - 1 - m])
                .sum::<f64>()
        })
        .collect()
}

/// (mean, sd, skewness, min, max) of Ricker coefficients for each scale.
pub fn cwt_stats(t: &WindowTriplet) -> [f64; 25] {
    let z = standardize_central(t);
    let mut out = [0.0; 25];
    for (i, &a) in CWT_SCALES.iter().enumerate() {
        let coef = ricker_transform(&z, a);
        out[i * 5..i * 5 + 5].copy_from_slice(&summary5(&coef));
    }
    out
}

/// (mean, sd, skewness, min, max) of lag-1 differences in the central window.
pub fn diff_stats(t: &WindowTriplet) -> [f64; 5] {
    let d: Vec<f64> = t.central.windows(2).map(|w| w[1] - w[0]).collect();
    summary5(&d)
}

/// Describes an already extracted triplet.
pub fn describe_triplet(t: &WindowTriplet, ar_order: usize) -> FeatureVector {
    let mut values = Vec::with_capacity(N_FEATURES);
    values.push(anomaly_score(t, ar_order));
    values.extend(fft_band_features(t));
    values.extend(teager_features(t));
    values.push(waveform_length_quotient(t));
    values.extend(cwt_stats(t));
    values.extend(diff_stats(t));
    debug_assert_eq!(values.len(), N_FEATURES);
    FeatureVector {
        layout_version: LAYOUT_VERSION,
        values,
    }
}

/// Describes the event centered at `center` on one channel.
pub fn describe_event(channel: &[f32], center: usize, fs: u32) -> Result<FeatureVector> {
    describe_event_with(channel, center, fs, DEFAULT_AR_ORDER)
}

pub fn describe_event_with(
    channel: &[f32],
    center: usize,
    fs: u32,
    ar_order: usize,
) -> Result<FeatureVector> {
    let t = extract_windows(channel, center, fs)?;
    Ok(describe_triplet(&t, ar_order))
}

/// Writes a feature matrix as CSV with the layout names as header.
pub fn write_feature_csv<W: Write>(
    layout: &FeatureLayout,
    rows: &[Vec<f64>],
    mut out: W,
) -> std::io::Result<()> {
    writeln!(out, "{}", layout.names.join(","))?;
    for r in rows {
        let line: Vec<String> = r.iter().map(|v| v.to_string()).collect();
        writeln!(out, "{}", line.join(","))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn channel_from(f: impl Fn(usize) -> f64, n: usize) -> Vec<f32> {
        (0..n).map(|i| f(i) as f32).collect()
    }

    #[test]
    fn layout_has_59_unique_names() {
        let l = FeatureLayout::standard();
        assert_eq!(l.len(), N_FEATURES);
        let mut names = l.names.clone();
        names.sort();
        names.dedup();
        assert_eq!(names.len(), N_FEATURES);
        assert_eq!(l.position("teager_quotient"), Some(27));
        assert_eq!(l.position("wl_quotient"), Some(28));
    }

    #[test]
    fn window_arithmetic_at_256_hz() {
        let ch = channel_from(|i| i as f64, 1000);
        let t = extract_windows(&ch, 230, 256).unwrap();
        assert_eq!((t.left.len(), t.central.len(), t.right.len()), (205, 51, 205));
        assert_eq!(t.left[0], 0.0);
        assert_eq!(t.left[204], 204.0);
        assert_eq!(t.central[0], 205.0);
        assert_eq!(t.central[25], 230.0);
        assert_eq!(t.central[50], 255.0);
        assert_eq!(t.right[0], 256.0);
        assert_eq!(t.right[204], 460.0);
    }

    #[test]
    fn insufficient_context_is_an_error() {
        let ch = vec![0.0_f32; 1000];
        assert!(matches!(
            extract_windows(&ch, 100, 256),
            Err(Error::Context { min: 230, .. })
        ));
        assert!(extract_windows(&ch, 229, 256).is_err());
        // last admissible center: 1000 - 461 + 230
        assert!(extract_windows(&ch, 769, 256).is_ok());
        assert!(extract_windows(&ch, 770, 256).is_err());
        assert_eq!(center_bounds(1000, 256), Some((230, 769)));
    }

    #[test]
    fn window_rounding_at_512_hz() {
        assert_eq!(central_len(512), 102);
        assert_eq!(neighbourhood_len(512), 410);
        let ch = channel_from(|i| i as f64, 2000);
        let t = extract_windows(&ch, 600, 512).unwrap();
        // even central length: center at floor(102/2) = 51
        assert_eq!(t.central[51], 600.0);
    }

    #[test]
    fn zero_signal_degenerate_values() {
        let ch = vec![0.0_f32; 600];
        let t = extract_windows(&ch, 300, 256).unwrap();
        assert_eq!(anomaly_score(&t, 8), 0.0);
        let fft = fft_band_features(&t);
        for v in &fft[..16] {
            assert_eq!(*v, LOG_POWER_FLOOR.ln());
        }
        for v in &fft[16..] {
            assert_eq!(*v, 0.0);
        }
        assert_eq!(cwt_stats(&t), [0.0; 25]);
        assert_eq!(teager_features(&t), [0.0; 3]);
        assert_eq!(diff_stats(&t), [0.0; 5]);
    }

    #[test]
    fn teager_of_constant_is_zero() {
        let t = WindowTriplet::from_parts(256, vec![3.0; 205], vec![3.0; 51], vec![3.0; 205]);
        assert_eq!(teager_features(&t), [0.0, 0.0, 0.0]);
    }

    #[test]
    fn teager_quotient_scales_with_square_amplitude() {
        let w = PI / 4.0;
        let tone = |range: std::ops::Range<usize>, a: f64| -> Vec<f64> {
            range.map(|n| a * (w * n as f64).cos()).collect()
        };
        let t = WindowTriplet::from_parts(256, tone(0..205, 1.0), tone(205..256, 2.0), tone(256..461, 1.0));
        let [c, nb, q] = teager_features(&t);
        assert!((c - 2.0).abs() < 1e-9);
        assert!((nb - 0.5).abs() < 1e-9);
        assert!((q - 4.0).abs() < 1e-9);
    }

    #[test]
    fn diff_stats_cases() {
        let ramp = |s: f64| WindowTriplet::from_parts(
            256,
            vec![0.0; 205],
            (0..51).map(|n| s * n as f64).collect(),
            vec![0.0; 205],
        );
        let [m, sd, sk, lo, hi] = diff_stats(&ramp(0.5));
        assert_eq!((m, sd, sk, lo, hi), (0.5, 0.0, 0.0, 0.5, 0.5));

        let alt = WindowTriplet::from_parts(
            256,
            vec![0.0; 205],
            (0..51).map(|n| if n % 2 == 0 { 1.0 } else { -1.0 }).collect(),
            vec![0.0; 205],
        );
        let [m, sd, _, lo, hi] = diff_stats(&alt);
        assert_eq!(m, 0.0);
        assert!((sd - 2.0).abs() < 1e-12);
        assert_eq!((lo, hi), (-2.0, 2.0));
    }

    #[test]
    fn waveform_length_cases() {
        let alt: Vec<f64> = (0..51).map(|n| if n % 2 == 0 { 1.0 } else { -1.0 }).collect();
        let eps: Vec<f64> = (0..205).map(|n| 1e-6 * (n % 2) as f64).collect();
        let t = WindowTriplet::from_parts(256, eps.clone(), alt, eps);
        assert!(waveform_length_quotient(&t) > 1e5);

        let noisy: Vec<f64> = (0..205).map(|n| ((n * 7919) % 13) as f64).collect();
        let flat = WindowTriplet::from_parts(256, noisy.clone(), vec![2.0; 51], noisy);
        assert_eq!(waveform_length_quotient(&flat), 0.0);
    }

    #[test]
    fn impulse_response_peaks_at_ricker_value() {
        let mut central = vec![0.0; 51];
        central[25] = 1.0;
        // neighbourhood with zero mean and unit population sd
        let nb: Vec<f64> = (0..205).map(|n| if n % 2 == 0 { 1.0 } else { -1.0 }).collect();
        let mut right = nb.clone();
        right[204] = -1.0;
        let t = WindowTriplet::from_parts(256, nb, central, right);
        let z = standardize_central(&t);
        let coef = ricker_transform(&z, 4.0);
        let max = coef.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let expected = z[25] * ricker(0.0, 4.0);
        assert!((max - expected).abs() < 1e-12, "{max} vs {expected}");
    }

    #[test]
    fn ricker_peak_value() {
        let a = 4.0_f64;
        let peak = 2.0 / ((3.0 * a).sqrt() * PI.powf(0.25));
        assert_eq!(ricker(0.0, a), peak);
        assert!(ricker(a, a).abs() < 1e-15);
    }

    #[test]
    fn describe_is_deterministic_and_finite() {
        let ch = channel_from(|i| (i as f64 * 0.37).sin() * 20.0 + (i % 7) as f64, 1200);
        let a = describe_event(&ch, 600, 256).unwrap();
        let b = describe_event(&ch, 600, 256).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), N_FEATURES);
        assert!(a.values.iter().all(|v| v.is_finite()));
    }

    #[test]
    fn csv_header_matches_layout() {
        let l = FeatureLayout::standard();
        let mut buf = Vec::new();
        write_feature_csv(&l, &[vec![0.0; 59]], &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let header = text.lines().next().unwrap();
        assert!(header.starts_with("anomaly,fft_central_0.5_2,"));
        assert_eq!(header.split(',').count(), 59);
    }
}
