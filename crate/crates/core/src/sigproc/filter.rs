use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{invalid, Result, SkgError};

/// Linear-phase FIR low-pass filter with unit DC gain.
#[derive(Debug, Clone, PartialEq)]
pub struct FilterSpec {
    /// Hz; `bandwidth / 2`.
    pub cutoff: f64,
    /// Hz; the filter bandwidth `B_w`.
    pub bandwidth: f64,
    pub sample_rate: f64,
    pub num_taps: usize,
    pub impulse_response: Vec<f64>,
}

fn blackman(n: usize, len: usize) -> f64 {
    let x = 2.0 * PI * n as f64 / (len - 1) as f64;
    0.42 - 0.5 * x.cos() + 0.08 * (2.0 * x).cos()
}

/// Blackman-windowed sinc with cut-off `bandwidth / 2`, normalised so the taps
/// sum to one.
pub fn design_lowpass(bandwidth: f64, sample_rate: f64, num_taps: usize) -> Result<FilterSpec> {
    if !(sample_rate.is_finite() && sample_rate > 0.0) {
        return Err(invalid("sample_rate", "must be > 0"));
    }
    if !(bandwidth.is_finite() && bandwidth > 0.0) {
        return Err(invalid("bandwidth", "must be > 0"));
    }
    let cutoff = bandwidth / 2.0;
    if cutoff >= sample_rate / 2.0 {
        return Err(invalid(
            "bandwidth",
            format!(
                "cut-off {cutoff} Hz is not below Nyquist {} Hz",
                sample_rate / 2.0
            ),
        ));
    }
    if num_taps < 3 || num_taps.is_multiple_of(2) {
        return Err(invalid(
            "num_taps",
            format!("{num_taps} must be odd and >= 3"),
        ));
    }
    let fc = cutoff / sample_rate;
    let mid = (num_taps / 2) as f64;
    let mut h: Vec<f64> = (0..num_taps)
        .map(|n| {
            let m = n as f64 - mid;
            let sinc = if m == 0.0 {
                2.0 * fc
            } else {
                (2.0 * PI * fc * m).sin() / (PI * m)
            };
            sinc * blackman(n, num_taps)
        })
        .collect();
    let dc: f64 = h.iter().sum();
    h.iter_mut().for_each(|v| *v /= dc);
    Ok(FilterSpec {
        cutoff,
        bandwidth,
        sample_rate,
        num_taps,
        impulse_response: h,
    })
}

fn check_len(len: usize, taps: usize) -> Result<()> {
    if len < taps {
        return Err(SkgError::FrameTooShort { frame: len, taps });
    }
    Ok(())
}

/// RSS of one frame: mean of `|g * y|²` over the samples where the filter is
/// fully inside the frame (the first `num_taps − 1` outputs are transients).
///
/// Direct-form reference implementation; [`RssMeter`] computes the same value
/// through the FFT.
pub fn measure_rss(y: &[Complex64], f: &FilterSpec) -> Result<f64> {
    let taps = f.num_taps;
    check_len(y.len(), taps)?;
    let g = &f.impulse_response;
    let valid = y.len() - taps + 1;
    let total: f64 = (taps - 1..y.len())
        .map(|n| {
            let window = &y[n + 1 - taps..=n];
            // g[k] multiplies y[n-k]
            window
                .iter()
                .rev()
                .zip(g)
                .map(|(s, &c)| s * c)
                .sum::<Complex64>()
                .norm_sqr()
        })
        .sum();
    Ok(total / valid as f64)
}

/// Smallest `m >= n` whose only prime factors are 2, 3 and 5.
pub(crate) fn fast_len(n: usize) -> usize {
    let mut m = n.max(1);
    loop {
        let mut r = m;
        for p in [2, 3, 5] {
            while r.is_multiple_of(p) {
                r /= p;
            }
        }
        if r == 1 {
            return m;
        }
        m += 1;
    }
}

/// FFT implementation of [`measure_rss`] for a fixed frame length, reusing
/// plans and buffers across frames.
#[derive(Clone)]
pub struct RssMeter {
    frame_len: usize,
    taps: usize,
    spectrum: Vec<Complex64>,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    buf: Vec<Complex64>,
    scratch: Vec<Complex64>,
}

impl RssMeter {
    pub fn new(f: &FilterSpec, frame_len: usize) -> Result<Self> {
        check_len(frame_len, f.num_taps)?;
        let n = fast_len(frame_len + f.num_taps - 1);
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(n);
        let inverse = planner.plan_fft_inverse(n);
        let mut spectrum = vec![Complex64::new(0.0, 0.0); n];
        for (s, &g) in spectrum.iter_mut().zip(&f.impulse_response) {
            *s = Complex64::new(g / n as f64, 0.0);
        }
        forward.process(&mut spectrum);
        let scratch_len = forward
            .get_inplace_scratch_len()
            .max(inverse.get_inplace_scratch_len());
        Ok(Self {
            frame_len,
            taps: f.num_taps,
            spectrum,
            forward,
            inverse,
            buf: vec![Complex64::new(0.0, 0.0); n],
            scratch: vec![Complex64::new(0.0, 0.0); scratch_len],
        })
    }

    pub fn measure(&mut self, y: &[Complex64]) -> Result<f64> {
        if y.len() != self.frame_len {
            return Err(SkgError::LengthMismatch(y.len(), self.frame_len));
        }
        self.buf[..y.len()].copy_from_slice(y);
        self.buf[y.len()..]
            .iter_mut()
            .for_each(|v| *v = Complex64::new(0.0, 0.0));
        self.forward
            .process_with_scratch(&mut self.buf, &mut self.scratch);
        for (b, g) in self.buf.iter_mut().zip(&self.spectrum) {
            *b *= g;
        }
        self.inverse
            .process_with_scratch(&mut self.buf, &mut self.scratch);
        let valid = &self.buf[self.taps - 1..self.frame_len];
        Ok(valid.iter().map(|v| v.norm_sqr()).sum::<f64>() / valid.len() as f64)
    }
}
