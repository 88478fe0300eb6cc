use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{invalid, Result, SkgError};

/// Complex baseband samples at a fixed rate.
#[derive(Debug, Clone, PartialEq)]
pub struct Waveform {
    pub samples: Vec<Complex64>,
    /// Hz.
    pub sample_rate: f64,
    /// Seconds; one signal period `T`.
    pub duration: f64,
}

impl Waveform {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn mean_power(&self) -> f64 {
        if self.samples.is_empty() {
            return 0.0;
        }
        self.samples.iter().map(|s| s.norm_sqr()).sum::<f64>() / self.samples.len() as f64
    }
}

/// Linear-FM chirp sweeping `[-bandwidth/2, +bandwidth/2]` over `duration`.
pub fn gen_chirp(bandwidth: f64, duration: f64, sample_rate: f64) -> Result<Waveform> {
    if !(bandwidth.is_finite() && bandwidth >= 0.0) {
        return Err(invalid("bandwidth", "must be >= 0"));
    }
    if !(duration.is_finite() && duration > 0.0) {
        return Err(invalid("duration", "must be > 0"));
    }
    if !(sample_rate.is_finite() && sample_rate >= 2.0 * bandwidth && sample_rate > 0.0) {
        return Err(SkgError::BelowNyquist {
            sample_rate,
            bandwidth,
        });
    }
    let n = (duration * sample_rate).round() as usize;
    let rate = bandwidth / duration;
    let samples = (0..n)
        .map(|i| {
            let t = i as f64 / sample_rate;
            // instantaneous frequency rate·t − B/2
            let phase = PI * (rate * t * t - bandwidth * t);
            Complex64::from_polar(1.0, phase)
        })
        .collect();
    Ok(Waveform {
        samples,
        sample_rate,
        duration,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rustfft::FftPlanner;

    #[test]
    fn zero_bandwidth_is_dc() {
        let w = gen_chirp(0.0, 1e-6, 1e9).unwrap();
        assert_eq!(w.len(), 1000);
        assert!(w.samples.iter().all(|s| *s == Complex64::new(1.0, 0.0)));
    }

    #[test]
    fn paper_chirp_is_unit_modulus() {
        let w = gen_chirp(250e6, 10e-6, 1e9).unwrap();
        assert_eq!(w.len(), 10_000);
        assert!(w.samples.iter().all(|s| (s.norm() - 1.0).abs() < 1e-12));
    }

    #[test]
    fn below_nyquist_rejected() {
        assert!(matches!(
            gen_chirp(250e6, 1e-6, 400e6),
            Err(SkgError::BelowNyquist { .. })
        ));
    }

    #[test]
    fn spectrum_is_flat_over_swept_band() {
        // periodogram averaged over 1 MHz-wide bands
        let (bw, fs) = (250e6, 1e9);
        let mut s = gen_chirp(bw, 40e-6, fs).unwrap().samples;
        let n = s.len();
        FftPlanner::new().plan_fft_forward(n).process(&mut s);
        let psd: Vec<f64> = s.iter().map(|c| c.norm_sqr()).collect();
        let bin_hz = fs / n as f64;
        let per_band = (1e6 / bin_hz).round() as usize;
        let edge = 10e6; // Fresnel ripple near the sweep edges
        let mut levels = Vec::new();
        let mut f = -bw / 2.0 + edge;
        while f + 1e6 <= bw / 2.0 - edge {
            let start = ((f / bin_hz).round() as isize).rem_euclid(n as isize) as usize;
            let avg = (0..per_band).map(|j| psd[(start + j) % n]).sum::<f64>() / per_band as f64;
            levels.push(10.0 * avg.log10());
            f += 1e6;
        }
        let mean = levels.iter().sum::<f64>() / levels.len() as f64;
        assert!(levels.iter().all(|l| (l - mean).abs() < 3.0));
    }
}
