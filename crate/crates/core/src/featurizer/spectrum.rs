use std::f64::consts::PI;

/// Fraction of one-sided non-DC spectral power in each `[lo, hi)` band.
///
/// Bin `k` (1 ≤ k ≤ L/2) sits at `k · fs / L`. Band bins are summed by direct
/// DFT; the denominator comes from Parseval, so only in-band bins are
/// evaluated. A signal with no AC power yields all zeros.
pub fn relative_band_powers(x: &[f32], sample_rate_hz: f64, edges_hz: &[f64]) -> Vec<f64> {
    let n = x.len();
    let n_bands = edges_hz.len().saturating_sub(1);
    if n < 2 || n_bands == 0 {
        return vec![0.0; n_bands];
    }
    let mean = x.iter().map(|&v| v as f64).sum::<f64>() / n as f64;
    let centered: Vec<f64> = x.iter().map(|&v| v as f64 - mean).collect();

    let energy: f64 = centered.iter().map(|v| v * v).sum();
    // Parseval: sum over k=1..L-1 of |X_k|^2 = L * energy (X_0 = 0 after centering).
    // The one-sided half counts the Nyquist bin once.
    let total = if n.is_multiple_of(2) {
        let nyq: f64 = centered
            .iter()
            .enumerate()
            .map(|(i, v)| if i % 2 == 0 { *v } else { -*v })
            .sum();
        (n as f64 * energy + nyq * nyq) / 2.0
    } else {
        n as f64 * energy / 2.0
    };
    if total <= 0.0 {
        return vec![0.0; n_bands];
    }

    let twiddles: Vec<(f64, f64)> = (0..n)
        .map(|m| {
            let a = 2.0 * PI * m as f64 / n as f64;
            (a.cos(), a.sin())
        })
        .collect();
    let bin_power = |k: usize| {
        let (mut re, mut im) = (0.0, 0.0);
        let mut idx = 0usize;
        for v in &centered {
            let (c, s) = twiddles[idx];
            re += v * c;
            im -= v * s;
            idx += k;
            if idx >= n {
                idx -= n;
            }
        }
        re * re + im * im
    };

    let bin_hz = sample_rate_hz / n as f64;
    edges_hz
        .windows(2)
        .map(|band| {
            let first = (band[0] / bin_hz).ceil().max(1.0) as usize;
            let power: f64 = (first..=n / 2)
                .take_while(|&k| (k as f64) * bin_hz < band[1])
                .filter(|&k| (k as f64) * bin_hz >= band[0])
                .map(bin_power)
                .sum();
            power / total
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Reference: every one-sided bin by naive DFT with fresh trig calls.
    fn oracle_band_fractions(x: &[f64], fs: f64, edges: &[f64]) -> Vec<f64> {
        let n = x.len();
        let mean = x.iter().sum::<f64>() / n as f64;
        let power: Vec<f64> = (0..=n / 2)
            .map(|k| {
                let (mut re, mut im) = (0.0, 0.0);
                for (t, v) in x.iter().enumerate() {
                    let a = 2.0 * PI * (k * t) as f64 / n as f64;
                    re += (v - mean) * a.cos();
                    im -= (v - mean) * a.sin();
                }
                re * re + im * im
            })
            .collect();
        let total: f64 = power[1..].iter().sum();
        edges
            .windows(2)
            .map(|b| {
                (1..=n / 2)
                    .filter(|&k| {
                        let f = k as f64 * fs / n as f64;
                        f >= b[0] && f < b[1]
                    })
                    .map(|k| power[k])
                    .sum::<f64>()
                    / total
            })
            .collect()
    }

    const EDGES: [f64; 6] = [0.5, 4.0, 8.0, 15.0, 30.0, 45.0];

    #[test]
    fn ten_hz_sine_lands_in_8_to_15_band() {
        let fs = 500.0;
        let x: Vec<f64> = (0..1000)
            .map(|t| (2.0 * PI * 10.0 * t as f64 / fs).sin())
            .collect();
        let want = oracle_band_fractions(&x, fs, &EDGES);
        let xf: Vec<f32> = x.iter().map(|&v| v as f32).collect();
        let got = relative_band_powers(&xf, fs, &EDGES);
        assert!(got[2] > 0.9, "{got:?}");
        // f32 input quantization is the only difference from the oracle.
        for (g, w) in got.iter().zip(&want) {
            assert!((g - w).abs() < 1e-6, "{got:?} vs {want:?}");
        }
    }

    #[test]
    fn matches_oracle_on_odd_length_noise() {
        let fs = 137.0;
        let x: Vec<f64> = (0..301)
            .map(|t| ((t * 7919 % 113) as f64 / 113.0 - 0.5) + (t as f64 * 0.3).sin())
            .collect();
        let want = oracle_band_fractions(&x, fs, &EDGES);
        let xf: Vec<f32> = x.iter().map(|&v| v as f32).collect();
        let got = relative_band_powers(&xf, fs, &EDGES);
        for (g, w) in got.iter().zip(&want) {
            assert!((g - w).abs() < 1e-6, "{got:?} vs {want:?}");
        }
    }

    #[test]
    fn even_length_parseval_denominator_matches_oracle() {
        // Energy at Nyquist exercises the one-sided correction.
        let fs = 100.0;
        let x: Vec<f64> = (0..64)
            .map(|t| if t % 2 == 0 { 1.0 } else { -1.0 } + (t as f64 * 0.9).cos())
            .collect();
        let edges = [0.5, 10.0, 49.0, 50.1];
        let want = oracle_band_fractions(&x, fs, &edges);
        let xf: Vec<f32> = x.iter().map(|&v| v as f32).collect();
        let got = relative_band_powers(&xf, fs, &edges);
        for (g, w) in got.iter().zip(&want) {
            assert!((g - w).abs() < 1e-6, "{got:?} vs {want:?}");
        }
    }

    #[test]
    fn constant_signal_has_no_band_power() {
        assert_eq!(relative_band_powers(&[2.0; 100], 500.0, &EDGES), vec![0.0; 5]);
    }
}
