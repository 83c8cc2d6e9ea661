use serde::{Deserialize, Serialize};

/// A chosen split: rows with `x < threshold` go left.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitInfo {
    pub feature: usize,
    pub threshold: f64,
    pub gain: f64,
}

/// Second-order split gain with L2 leaf regularizer `lambda` and split
/// penalty `gamma`.
#[inline]
pub fn split_gain(gl: f64, hl: f64, gr: f64, hr: f64, lambda: f64, gamma: f64) -> f64 {
    let g = gl + gr;
    let h = hl + hr;
    0.5 * (gl * gl / (hl + lambda) + gr * gr / (hr + lambda) - g * g / (h + lambda)) - gamma
}

/// Threshold between two consecutive distinct sorted values such that
/// `lo < t <= hi`.
#[inline]
pub(crate) fn midpoint(lo: f64, hi: f64) -> f64 {
    let m = lo + (hi - lo) * 0.5;
    if m > lo {
        m
    } else {
        hi
    }
}

/// Scans rows (already sorted by `values`) and returns the best split among
/// midpoints. Only candidates with strictly greater gain replace the current
/// best, so the lowest threshold wins ties.
pub(crate) fn scan_sorted(
    sorted_values: impl Iterator<Item = (f64, f64, f64)>,
    g_total: f64,
    h_total: f64,
    lambda: f64,
    gamma: f64,
    mut best: Option<(f64, f64)>,
) -> Option<(f64, f64)> {
    let mut gl = 0.0;
    let mut hl = 0.0;
    let mut prev: Option<f64> = None;
    for (v, g, h) in sorted_values {
        if let Some(p) = prev {
            if v > p {
                let hr = h_total - hl;
                if hl + lambda > 0.0 && hr + lambda > 0.0 {
                    let gain = split_gain(gl, hl, g_total - gl, hr, lambda, gamma);
                    if best.map_or(true, |(_, b)| gain > b) {
                        best = Some((midpoint(p, v), gain));
                    }
                }
            }
        }
        gl += g;
        hl += h;
        prev = Some(v);
    }
    best
}

/// Best split of a single feature column; `None` if no candidate has positive gain.
pub fn best_split(
    feature_column: &[f64],
    g: &[f64],
    h: &[f64],
    lambda: f64,
    gamma: f64,
) -> Option<SplitInfo> {
    let mut idx: Vec<usize> = (0..feature_column.len()).collect();
    idx.sort_by(|&a, &b| feature_column[a].total_cmp(&feature_column[b]).then(a.cmp(&b)));
    let g_total: f64 = g.iter().sum();
    let h_total: f64 = h.iter().sum();
    let it = idx.iter().map(|&i| (feature_column[i], g[i], h[i]));
    scan_sorted(it, g_total, h_total, lambda, gamma, None)
        .filter(|&(_, gain)| gain > 0.0)
        .map(|(threshold, gain)| SplitInfo {
            feature: 0,
            threshold,
            gain,
        })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gbdt::logistic_grad_hess;

    fn gh(labels: &[u8]) -> (Vec<f64>, Vec<f64>) {
        labels.iter().map(|&y| logistic_grad_hess(0.0, y)).unzip()
    }

    #[test]
    fn four_point_example() {
        let (g, h) = gh(&[0, 0, 1, 1]);
        let s = best_split(&[1.0, 2.0, 3.0, 4.0], &g, &h, 1.0, 0.0).unwrap();
        assert_eq!(s.threshold, 2.5);
        let expected = 0.5 * (1.0 / 1.5 + 1.0 / 1.5);
        assert!((s.gain - expected).abs() < 1e-15);
        assert!((s.gain - 0.6667).abs() < 1e-4);
    }

    #[test]
    fn no_split_for_pure_or_constant() {
        let (g, h) = gh(&[1, 1, 1, 1]);
        assert!(best_split(&[1.0, 2.0, 3.0, 4.0], &g, &h, 1.0, 0.0).is_none());
        let (g, h) = gh(&[0, 1, 0, 1]);
        assert!(best_split(&[5.0; 4], &g, &h, 1.0, 0.0).is_none());
    }

    #[test]
    fn gamma_suppresses_weak_splits() {
        let (g, h) = gh(&[0, 0, 1, 1]);
        assert!(best_split(&[1.0, 2.0, 3.0, 4.0], &g, &h, 1.0, 1.0).is_none());
    }

    #[test]
    fn midpoint_stays_between_adjacent_floats() {
        let lo = 1.0_f64;
        let hi = f64::from_bits(lo.to_bits() + 1);
        let t = midpoint(lo, hi);
        assert!(lo < t && t <= hi);
        assert_eq!(midpoint(1.0, 2.0), 1.5);
    }
}
