//! Tapped-delay-line multipath profiles and random channel draws.
//!
//! A [`TapProfile`] is the statistical description: one LoS tap (Rician) at
//! the smallest delay followed by diffuse Rayleigh taps, with powers
//! normalised to unit total. [`draw_cir`] turns a profile into one
//! [`CirRealization`], i.e. the complex tap gains of one coherence interval.

use std::path::Path;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result, SkgError};

const BUNDLED_TDL_E: &str = include_str!("../profiles/tdl_e.json");

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tap {
    /// Seconds.
    pub delay: f64,
    /// Linear mean power.
    pub power: f64,
    pub is_los: bool,
}

/// Normalised multipath profile.
///
/// Invariants: exactly one LoS tap and it has the smallest delay, delays are
/// non-negative and strictly increasing, powers are positive and sum to one.
#[derive(Debug, Clone, PartialEq)]
pub struct TapProfile {
    taps: Vec<Tap>,
    rms_delay_spread: f64,
    k_factor_db: f64,
}

/// RMS delay spread of a power-delay profile (powers need not be normalised).
pub fn rms_delay_spread(delays: &[f64], powers: &[f64]) -> f64 {
    let total: f64 = powers.iter().sum();
    let mean = delays.iter().zip(powers).map(|(d, p)| d * p).sum::<f64>() / total;
    let second = delays
        .iter()
        .zip(powers)
        .map(|(d, p)| (d - mean) * (d - mean) * p)
        .sum::<f64>()
        / total;
    second.max(0.0).sqrt()
}

impl TapProfile {
    /// Validates, sorts by delay and normalises the powers.
    pub fn new(mut taps: Vec<Tap>) -> Result<Self> {
        if taps.is_empty() {
            return Err(SkgError::InvalidProfile("no taps".into()));
        }
        for t in &taps {
            if !(t.delay.is_finite() && t.delay >= 0.0) {
                return Err(SkgError::InvalidProfile(format!(
                    "delay {} s is not a non-negative number",
                    t.delay
                )));
            }
            if !(t.power.is_finite() && t.power > 0.0) {
                return Err(SkgError::InvalidProfile(format!(
                    "tap power {} is not positive",
                    t.power
                )));
            }
        }
        match taps.iter().filter(|t| t.is_los).count() {
            0 => return Err(SkgError::InvalidProfile("missing LoS tap".into())),
            1 => {}
            n => {
                return Err(SkgError::InvalidProfile(format!(
                    "{n} LoS taps, expected one"
                )))
            }
        }
        taps.sort_by(|a, b| a.delay.total_cmp(&b.delay));
        if let Some(w) = taps.windows(2).find(|w| w[0].delay == w[1].delay) {
            return Err(SkgError::InvalidProfile(format!(
                "duplicate delay {} s",
                w[0].delay
            )));
        }
        if !taps[0].is_los {
            return Err(SkgError::InvalidProfile(
                "the LoS tap must have the smallest delay".into(),
            ));
        }
        let total: f64 = taps.iter().map(|t| t.power).sum();
        for t in &mut taps {
            t.power /= total;
        }
        Ok(Self::from_sorted(taps))
    }

    fn from_sorted(taps: Vec<Tap>) -> Self {
        let delays: Vec<f64> = taps.iter().map(|t| t.delay).collect();
        let powers: Vec<f64> = taps.iter().map(|t| t.power).collect();
        let los = taps[0].power;
        let diffuse: f64 = powers[1..].iter().sum();
        let k_factor_db = if taps.len() == 1 {
            f64::INFINITY
        } else {
            10.0 * (los / diffuse).log10()
        };
        Self {
            rms_delay_spread: rms_delay_spread(&delays, &powers),
            k_factor_db,
            taps,
        }
    }

    /// The TDL-E profile shipped with the crate (nominal 100 ns delay spread).
    pub fn tdl_e() -> Self {
        Self::from_json_str(BUNDLED_TDL_E).expect("bundled TDL-E profile is valid")
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let file: ProfileFile = serde_json::from_str(s)?;
        let entries = match file {
            ProfileFile::Bare(t) => t,
            ProfileFile::Named { taps, .. } => taps,
        };
        Self::new(entries.iter().map(TapEntry::to_tap).collect())
    }

    pub fn taps(&self) -> &[Tap] {
        &self.taps
    }

    /// Number of multipath components L.
    pub fn len(&self) -> usize {
        self.taps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.taps.is_empty()
    }

    /// RMS delay spread T_m in seconds.
    pub fn rms_delay_spread(&self) -> f64 {
        self.rms_delay_spread
    }

    /// LoS power over total diffuse power, in dB (+inf for a single tap).
    pub fn k_factor_db(&self) -> f64 {
        self.k_factor_db
    }

    pub fn los_power(&self) -> f64 {
        self.taps[0].power
    }

    pub fn delays(&self) -> Vec<f64> {
        self.taps.iter().map(|t| t.delay).collect()
    }

    pub fn powers(&self) -> Vec<f64> {
        self.taps.iter().map(|t| t.power).collect()
    }

    /// See [`scale_profile`].
    pub fn scaled(&self, target_ds: f64, target_k_db: f64) -> Result<Self> {
        scale_profile(self, target_ds, target_k_db)
    }

    pub fn to_entries(&self) -> Vec<TapEntry> {
        self.taps
            .iter()
            .map(|t| TapEntry {
                delay_ns: t.delay * 1e9,
                power_db: 10.0 * t.power.log10(),
                los: t.is_los,
            })
            .collect()
    }
}

/// One row of a tap-profile config file.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct TapEntry {
    pub delay_ns: f64,
    pub power_db: f64,
    pub los: bool,
}

impl TapEntry {
    fn to_tap(&self) -> Tap {
        Tap {
            delay: self.delay_ns * 1e-9,
            power: 10f64.powf(self.power_db / 10.0),
            is_los: self.los,
        }
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum ProfileFile {
    Bare(Vec<TapEntry>),
    Named {
        #[allow(dead_code)]
        name: Option<String>,
        taps: Vec<TapEntry>,
    },
}

/// Reads a JSON tap-profile file: either an array of
/// `{delay_ns, power_db, los}` rows or an object with a `taps` array.
pub fn load_tap_profile(path: impl AsRef<Path>) -> Result<TapProfile> {
    TapProfile::from_json_str(&std::fs::read_to_string(path)?)
}

/// Retargets the delay spread and K-factor of a profile.
///
/// The LoS power becomes `K/(1+K)` and the diffuse taps share the remaining
/// `1/(1+K)` in their original proportions. All delays are then multiplied by
/// one scalar so that the RMS delay spread of the *new* power profile equals
/// `target_ds`. Note that a large K concentrates power at the LoS delay, so the
/// diffuse taps must spread much further out to keep the same RMS spread.
pub fn scale_profile(p: &TapProfile, target_ds: f64, target_k_db: f64) -> Result<TapProfile> {
    if !(target_ds.is_finite() && target_ds >= 0.0) {
        return Err(invalid("target_ds", format!("{target_ds} s is not >= 0")));
    }
    if p.len() == 1 {
        if target_ds > 0.0 {
            return Err(invalid(
                "target_ds",
                "a single-tap profile has zero delay spread",
            ));
        }
        if target_k_db.is_finite() {
            return Err(invalid(
                "target_k_db",
                "a single-tap profile has no diffuse power",
            ));
        }
        return Ok(p.clone());
    }
    if !target_k_db.is_finite() {
        return Err(invalid("target_k_db", "must be finite"));
    }
    if target_ds == 0.0 {
        return Err(invalid(
            "target_ds",
            "zero delay spread would merge distinct taps",
        ));
    }

    let k = 10f64.powf(target_k_db / 10.0);
    let diffuse: f64 = p.taps[1..].iter().map(|t| t.power).sum();
    let mut taps = p.taps.clone();
    taps[0].power = k / (1.0 + k);
    for t in &mut taps[1..] {
        t.power = t.power / diffuse / (1.0 + k);
    }

    let delays: Vec<f64> = taps.iter().map(|t| t.delay).collect();
    let powers: Vec<f64> = taps.iter().map(|t| t.power).collect();
    let current = rms_delay_spread(&delays, &powers);
    let factor = target_ds / current;
    for t in &mut taps {
        t.delay *= factor;
    }
    Ok(TapProfile::from_sorted(taps))
}

/// Parameters of the LoS complex Gaussian `N(ν cos θ, σ²) + i N(ν sin θ, σ²)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LosGainSpec {
    pub nu: f64,
    pub theta: f64,
    pub sigma: f64,
}

impl LosGainSpec {
    pub fn new(nu: f64, theta: f64, sigma: f64) -> Result<Self> {
        if !(nu.is_finite() && nu >= 0.0) {
            return Err(invalid("nu", "must be >= 0"));
        }
        if !(sigma.is_finite() && sigma > 0.0) {
            return Err(invalid("sigma", "must be > 0"));
        }
        Ok(Self { nu, theta, sigma })
    }
}

/// How tap gains are drawn from a profile.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GainModel {
    /// Tap powers come from the profile. The LoS tap is purely specular,
    /// `sqrt(P_los) e^{iθ}`, and each diffuse tap is `CN(0, P_n)`.
    Profile { theta: f64 },
    /// Every path has per-component variance `σ²`; the LoS path adds the mean
    /// `ν e^{iθ}`. Profile powers are ignored, only delays are used.
    Explicit(LosGainSpec),
}

impl Default for GainModel {
    fn default() -> Self {
        GainModel::Profile { theta: 0.0 }
    }
}

impl GainModel {
    /// Deterministic part and per-component standard deviation of tap `i`.
    fn tap_law(&self, p: &TapProfile, i: usize) -> (Complex64, f64) {
        match *self {
            GainModel::Profile { theta } => {
                let t = &p.taps[i];
                if t.is_los {
                    (Complex64::from_polar(t.power.sqrt(), theta), 0.0)
                } else {
                    (Complex64::new(0.0, 0.0), (t.power / 2.0).sqrt())
                }
            }
            GainModel::Explicit(spec) => {
                let mean = if p.taps[i].is_los {
                    Complex64::from_polar(spec.nu, spec.theta)
                } else {
                    Complex64::new(0.0, 0.0)
                };
                (mean, spec.sigma)
            }
        }
    }
}

/// One random channel impulse response: gains `α_n e^{-iφ_n}` at delays `τ_n`.
#[derive(Debug, Clone, PartialEq)]
pub struct CirRealization {
    pub gains: Vec<Complex64>,
    /// Seconds, non-negative and increasing.
    pub delays: Vec<f64>,
}

impl CirRealization {
    pub fn total_power(&self) -> f64 {
        self.gains.iter().map(|g| g.norm_sqr()).sum()
    }
}

pub(crate) fn complex_normal<R: Rng + ?Sized>(rng: &mut R, sigma: f64) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(sigma * re, sigma * im)
}

/// Draws tap gains for one coherence interval.
pub fn draw_cir<R: Rng + ?Sized>(p: &TapProfile, model: &GainModel, rng: &mut R) -> CirRealization {
    let gains = (0..p.len())
        .map(|i| {
            let (mean, sigma) = model.tap_law(p, i);
            if sigma == 0.0 {
                mean
            } else {
                mean + complex_normal(rng, sigma)
            }
        })
        .collect();
    CirRealization {
        gains,
        delays: p.delays(),
    }
}

/// Alice and Bob see the same channel within a coherence interval.
pub fn draw_reciprocal_pair<R: Rng + ?Sized>(
    p: &TapProfile,
    model: &GainModel,
    rng: &mut R,
) -> (CirRealization, CirRealization) {
    let h = draw_cir(p, model, rng);
    (h.clone(), h)
}

/// Eve's channel. With `rho == 0` this is an independent [`draw_cir`]; with
/// `rho > 0` the random part of each tap is mixed with Alice's,
/// `ρ·(g_A − μ) + sqrt(1−ρ²)·(g_fresh − μ)`, which keeps the per-tap law.
pub fn draw_eve<R: Rng + ?Sized>(
    p: &TapProfile,
    model: &GainModel,
    alice: &CirRealization,
    rho: f64,
    rng: &mut R,
) -> Result<CirRealization> {
    if !(0.0..=1.0).contains(&rho) {
        return Err(invalid("rho_e", format!("{rho} is outside [0, 1]")));
    }
    let fresh = draw_cir(p, model, rng);
    if rho == 0.0 {
        return Ok(fresh);
    }
    let keep = (1.0 - rho * rho).sqrt();
    let gains = (0..p.len())
        .map(|i| {
            let (mean, _) = model.tap_law(p, i);
            mean + (alice.gains[i] - mean) * rho + (fresh.gains[i] - mean) * keep
        })
        .collect();
    Ok(CirRealization {
        gains,
        delays: fresh.delays,
    })
}
