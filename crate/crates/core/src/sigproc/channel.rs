use num_complex::Complex64;
use rand::Rng;

use super::Waveform;
use crate::chanmodel::{complex_normal, CirRealization};
use crate::error::{invalid, Result};

/// Tap delays rounded to whole samples, with gains of coincident taps summed.
pub(crate) fn quantize_taps(
    h: &CirRealization,
    sample_rate: f64,
    len: usize,
) -> Result<Vec<(usize, Complex64)>> {
    let mut taps: Vec<(usize, Complex64)> = Vec::with_capacity(h.gains.len());
    for (&g, &d) in h.gains.iter().zip(&h.delays) {
        if !(d.is_finite() && d >= 0.0) {
            return Err(invalid(
                "delay",
                format!("{d} s is not a non-negative number"),
            ));
        }
        let shift = ((d * sample_rate).round() as u64 % len as u64) as usize;
        match taps.iter_mut().find(|(s, _)| *s == shift) {
            Some((_, acc)) => *acc += g,
            None => taps.push((shift, g)),
        }
    }
    Ok(taps)
}

/// `out[n] = Σ g_k x[(n − d_k) mod N]`.
pub(crate) fn cyclic_taps_into(
    x: &[Complex64],
    taps: &[(usize, Complex64)],
    out: &mut [Complex64],
) {
    let n = x.len();
    out.iter_mut().for_each(|o| *o = Complex64::new(0.0, 0.0));
    for &(shift, g) in taps {
        let (head, tail) = out.split_at_mut(shift);
        for (o, s) in tail.iter_mut().zip(&x[..n - shift]) {
            *o += g * s;
        }
        for (o, s) in head.iter_mut().zip(&x[n - shift..]) {
            *o += g * s;
        }
    }
}

/// Passes one period of a periodically transmitted waveform through the
/// multipath channel.
///
/// Delays are rounded to the nearest sample. Because the transmit signal is
/// periodic with period `x.duration`, a delay longer than the frame wraps
/// around instead of falling off the end.
pub fn apply_channel(x: &Waveform, h: &CirRealization) -> Result<Waveform> {
    if x.is_empty() {
        return Err(invalid("x", "empty waveform"));
    }
    let taps = quantize_taps(h, x.sample_rate, x.len())?;
    let mut out = vec![Complex64::new(0.0, 0.0); x.len()];
    cyclic_taps_into(&x.samples, &taps, &mut out);
    Ok(Waveform {
        samples: out,
        sample_rate: x.sample_rate,
        duration: x.duration,
    })
}

/// Per-component noise standard deviation for a given SNR; `None` when the
/// SNR is `+inf` (noiseless).
pub(crate) fn noise_sigma(signal_power: f64, snr_db: f64) -> Option<f64> {
    if snr_db == f64::INFINITY {
        return None;
    }
    Some((signal_power / 10f64.powf(snr_db / 10.0) / 2.0).sqrt())
}

pub(crate) fn add_noise_into<R: Rng + ?Sized>(y: &mut [Complex64], sigma: f64, rng: &mut R) {
    for s in y.iter_mut() {
        *s += complex_normal(rng, sigma);
    }
}

/// Adds complex white Gaussian noise with per-sample variance
/// `2σ_w² = mean(|y|²) / 10^(snr_db/10)`. `snr_db = +inf` returns `y`
/// unchanged.
pub fn add_awgn<R: Rng + ?Sized>(y: &Waveform, snr_db: f64, rng: &mut R) -> Result<Waveform> {
    if y.is_empty() {
        return Err(invalid("y", "empty waveform"));
    }
    if snr_db.is_nan() {
        return Err(invalid("snr_db", "NaN"));
    }
    let mut out = y.clone();
    if let Some(sigma) = noise_sigma(y.mean_power(), snr_db) {
        add_noise_into(&mut out.samples, sigma, rng);
    }
    Ok(out)
}
