//! Direct Monte Carlo sampling of the RSS power models.
//!
//! Each path gain is drawn individually and paths are summed coherently
//! inside their delay bin, so these samplers share no algebra with the
//! closed-form densities in [`crate::analytic`] and serve as their oracle.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::analytic::{NoiseFrameSpec, Resolution};
use crate::chanmodel::complex_normal;
use crate::error::{invalid, Result};
use crate::rng::{substream, tag};

/// Paths per delay bin; the LoS path is in the first bin.
pub fn bin_sizes(res: &Resolution) -> Vec<usize> {
    match res {
        Resolution::Unresolved { paths } => vec![*paths],
        Resolution::FullyResolved { paths } => vec![1; *paths],
        Resolution::Hybrid { bins } => bins.clone(),
    }
}

/// One draw of the channel power `Σ_bins |Σ_paths g|²`.
pub fn sample_channel_power<R: Rng + ?Sized>(
    bins: &[usize],
    nu: f64,
    sigma: f64,
    rng: &mut R,
) -> f64 {
    bins.iter()
        .enumerate()
        .map(|(b, &n)| {
            let mut acc = if b == 0 {
                Complex64::new(nu, 0.0)
            } else {
                Complex64::default()
            };
            for _ in 0..n {
                acc += complex_normal(rng, sigma);
            }
            acc.norm_sqr()
        })
        .sum()
}

/// One draw of the frame noise power: the sample variance of `C` real
/// `N(0, 2σ_w²)` samples.
pub fn sample_noise_power<R: Rng + ?Sized>(spec: &NoiseFrameSpec, rng: &mut R) -> f64 {
    let sd = spec.sigma_w * std::f64::consts::SQRT_2;
    let (mut mean, mut m2) = (0.0, 0.0);
    for i in 0..spec.samples {
        let x: f64 = sd * rng.sample::<f64, _>(StandardNormal);
        let d = x - mean;
        mean += d / (i + 1) as f64;
        m2 += d * (x - mean);
    }
    m2 / (spec.samples - 1) as f64
}

fn check(res: &Resolution, nu: f64, sigma: f64, n: usize) -> Result<Vec<usize>> {
    let bins = bin_sizes(res);
    if bins.is_empty() || bins.contains(&0) {
        return Err(invalid(
            "resolution",
            "every bin must hold at least one path",
        ));
    }
    if !(nu.is_finite() && nu >= 0.0) {
        return Err(invalid("nu", format!("{nu} is not >= 0")));
    }
    if !(sigma.is_finite() && sigma > 0.0) {
        return Err(invalid("sigma", format!("{sigma} is not > 0")));
    }
    if n == 0 {
        return Err(invalid("n", "at least one sample is required"));
    }
    Ok(bins)
}

/// `n` channel-power draws from the substream `(seed, MONTE_CARLO)`.
pub fn sample_channel_powers(
    res: &Resolution,
    nu: f64,
    sigma: f64,
    n: usize,
    seed: u64,
) -> Result<Vec<f64>> {
    let bins = check(res, nu, sigma, n)?;
    let mut rng = substream(seed, &[tag::MONTE_CARLO, 0]);
    Ok((0..n)
        .map(|_| sample_channel_power(&bins, nu, sigma, &mut rng))
        .collect())
}

/// `n` total RSS draws, channel power plus independent frame noise power.
pub fn sample_total_powers(
    res: &Resolution,
    nu: f64,
    sigma: f64,
    noise: &NoiseFrameSpec,
    n: usize,
    seed: u64,
) -> Result<Vec<f64>> {
    let noise = NoiseFrameSpec::new(noise.samples, noise.sigma_w)?;
    let mut out = sample_channel_powers(res, nu, sigma, n, seed)?;
    let mut rng = substream(seed, &[tag::MONTE_CARLO, 1]);
    for p in &mut out {
        *p += sample_noise_power(&noise, &mut rng);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::{noise_power_pdf, total_power_pdf};
    use crate::stats::{ks_one_sample, mean, variance};

    #[test]
    fn bin_layouts() {
        assert_eq!(bin_sizes(&Resolution::Unresolved { paths: 3 }), vec![3]);
        assert_eq!(
            bin_sizes(&Resolution::FullyResolved { paths: 3 }),
            vec![1, 1, 1]
        );
        assert_eq!(
            bin_sizes(&Resolution::Hybrid { bins: vec![2, 1] }),
            vec![2, 1]
        );
    }

    #[test]
    fn channel_mean_power() {
        let s = sample_channel_powers(
            &Resolution::Hybrid { bins: vec![3, 2] },
            10.0,
            2.0,
            40_000,
            5,
        )
        .unwrap();
        let want = 100.0 + 2.0 * 5.0 * 4.0;
        assert!((mean(&s) / want - 1.0).abs() < 0.01);
    }

    #[test]
    fn noise_power_moments() {
        let spec = NoiseFrameSpec::new(50, 1.5).unwrap();
        let mut rng = substream(3, &[0]);
        let s: Vec<f64> = (0..40_000)
            .map(|_| sample_noise_power(&spec, &mut rng))
            .collect();
        assert!((mean(&s) / 4.5 - 1.0).abs() < 0.01);
        let want_var = 8.0 * 1.5f64.powi(4) / 49.0;
        assert!((variance(&s) / want_var - 1.0).abs() < 0.05);
    }

    #[test]
    fn agrees_with_analytic_density() {
        let noise = NoiseFrameSpec::new(200, 5.0).unwrap();
        let npdf = noise_power_pdf(&noise).unwrap();
        for res in [
            Resolution::Unresolved { paths: 6 },
            Resolution::FullyResolved { paths: 6 },
            Resolution::Hybrid {
                bins: vec![3, 2, 1],
            },
        ] {
            let chan = res.channel_pdf(20.0, 5.0).unwrap();
            let total = total_power_pdf(&chan, &npdf).unwrap();
            let s = sample_total_powers(&res, 20.0, 5.0, &noise, 5_000, 17).unwrap();
            let d = ks_one_sample(&s, total.cdf_fn());
            // the hybrid density is a moment match, not exact
            assert!(d < 0.035, "{res:?}: D = {d}");
        }
    }

    #[test]
    fn rejects_bad_arguments() {
        let r = Resolution::Unresolved { paths: 2 };
        assert!(sample_channel_powers(&r, 1.0, 0.0, 10, 1).is_err());
        assert!(sample_channel_powers(&r, -1.0, 1.0, 10, 1).is_err());
        assert!(sample_channel_powers(&r, 1.0, 1.0, 0, 1).is_err());
        assert!(
            sample_channel_powers(&Resolution::Hybrid { bins: vec![1, 0] }, 1.0, 1.0, 10, 1)
                .is_err()
        );
    }
}
