use std::collections::BTreeSet;

/// Fraction of the squared-signal maximum a peak must exceed.
pub const PEAK_THRESHOLD_FRACTION: f64 = 0.6;

/// R-peak candidates: local maxima of the squared mean-removed signal above
/// `0.6 · max`, kept strongest-first so that accepted peaks are at least one
/// refractory period apart. Returned sorted ascending.
pub fn detect_r_peaks(lead: &[f32], sample_rate_hz: f64, refractory_ms: f64) -> Vec<usize> {
    if lead.len() < 2 {
        return Vec::new();
    }
    let mean = lead.iter().map(|&v| v as f64).sum::<f64>() / lead.len() as f64;
    let energy: Vec<f64> = lead.iter().map(|&v| (v as f64 - mean).powi(2)).collect();
    let peak = energy.iter().cloned().fold(0.0, f64::max);
    if peak <= 0.0 {
        return Vec::new();
    }
    let threshold = PEAK_THRESHOLD_FRACTION * peak;
    let last = energy.len() - 1;
    let mut candidates: Vec<usize> = (0..energy.len())
        .filter(|&i| {
            energy[i] > threshold
                && (i == 0 || energy[i] > energy[i - 1])
                && (i == last || energy[i] >= energy[i + 1])
        })
        .collect();
    candidates.sort_by(|&a, &b| energy[b].total_cmp(&energy[a]).then(a.cmp(&b)));

    let refractory = ((refractory_ms / 1000.0) * sample_rate_hz).round().max(1.0) as usize;
    let mut accepted = BTreeSet::new();
    for i in candidates {
        let before = accepted.range(..i).next_back().copied();
        let after = accepted.range(i..).next().copied();
        let clear_before = before.is_none_or(|b: usize| i - b >= refractory);
        let clear_after = after.is_none_or(|a: usize| a - i >= refractory);
        if clear_before && clear_after {
            accepted.insert(i);
        }
    }
    accepted.into_iter().collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RhythmStats {
    /// 0 when fewer than two peaks were found.
    pub heart_rate_bpm: f64,
    pub rr_std_ms: f64,
}

pub fn rhythm_stats(peaks: &[usize], sample_rate_hz: f64) -> RhythmStats {
    if peaks.len() < 2 {
        return RhythmStats {
            heart_rate_bpm: 0.0,
            rr_std_ms: 0.0,
        };
    }
    let rr_ms: Vec<f64> = peaks
        .windows(2)
        .map(|w| (w[1] - w[0]) as f64 * 1000.0 / sample_rate_hz)
        .collect();
    let mean = rr_ms.iter().sum::<f64>() / rr_ms.len() as f64;
    let var = rr_ms.iter().map(|r| (r - mean).powi(2)).sum::<f64>() / rr_ms.len() as f64;
    RhythmStats {
        heart_rate_bpm: 60_000.0 / mean,
        rr_std_ms: var.sqrt(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn flat_signal_has_no_peaks() {
        assert!(detect_r_peaks(&[0.0; 1000], 500.0, 200.0).is_empty());
        assert!(detect_r_peaks(&[3.0; 1000], 500.0, 200.0).is_empty());
    }

    #[test]
    fn pulse_train_every_second() {
        let mut x = vec![0.0f32; 5000];
        let spikes: Vec<usize> = (0..5000).step_by(500).collect();
        for &i in &spikes {
            x[i] = 1.0;
        }
        let peaks = detect_r_peaks(&x, 500.0, 200.0);
        assert_eq!(peaks, spikes);
        let stats = rhythm_stats(&peaks, 500.0);
        assert!((stats.heart_rate_bpm - 60.0).abs() < 1e-12);
        assert_eq!(stats.rr_std_ms, 0.0);
    }

    #[test]
    fn single_spike_gives_zero_rate() {
        let mut x = vec![0.0f32; 1000];
        x[400] = 2.0;
        let peaks = detect_r_peaks(&x, 500.0, 200.0);
        assert_eq!(peaks, vec![400]);
        assert_eq!(rhythm_stats(&peaks, 500.0).heart_rate_bpm, 0.0);
    }

    #[test]
    fn refractory_suppresses_weaker_neighbour() {
        let mut x = vec![0.0f32; 1000];
        x[100] = 1.0;
        x[150] = 0.9; // 100 ms later, inside the refractory window
        x[400] = 1.0;
        assert_eq!(detect_r_peaks(&x, 500.0, 200.0), vec![100, 400]);
    }

    proptest! {
        #[test]
        fn peaks_sorted_and_separated(
            x in proptest::collection::vec(-5.0f32..5.0, 2..400),
            fs in 50.0f64..1000.0,
            refractory in 10.0f64..400.0,
        ) {
            let peaks = detect_r_peaks(&x, fs, refractory);
            let min_gap = ((refractory / 1000.0) * fs).round().max(1.0) as usize;
            for w in peaks.windows(2) {
                prop_assert!(w[0] < w[1]);
                prop_assert!(w[1] - w[0] >= min_gap);
            }
            prop_assert!(peaks.iter().all(|&i| i < x.len()));
        }
    }
}
