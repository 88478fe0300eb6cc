//! Sweep configuration file (TOML).

use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use skg_core::chanmodel::{GainModel, TapProfile};
use skg_core::mi::{DEFAULT_ALPHA, DEFAULT_K};
use skg_core::sigproc::{SimSettings, SweepPoint};

use crate::error::{io_err, CliError, Result};

/// A K-factor entry: a value in dB or `"native"` for the profile's own.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum KFactor {
    Db(f64),
    Native(NativeTag),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NativeTag {
    Native,
}

impl KFactor {
    pub fn db(self) -> Option<f64> {
        match self {
            KFactor::Db(v) => Some(v),
            KFactor::Native(_) => None,
        }
    }
}

impl fmt::Display for KFactor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            KFactor::Db(v) => write!(f, "{v}"),
            KFactor::Native(_) => f.write_str("native"),
        }
    }
}

/// Simulation front-end settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimConfig {
    pub sample_rate_hz: f64,
    pub frame_duration_s: f64,
    pub chirp_bandwidth_hz: f64,
    pub filter_taps: usize,
    /// Correlation of Eve's tap gains with Alice's.
    pub rho_e: f64,
    pub los_phase_rad: f64,
}

impl Default for SimConfig {
    fn default() -> Self {
        let s = SimSettings::default();
        SimConfig {
            sample_rate_hz: s.sample_rate,
            frame_duration_s: s.frame_duration,
            chirp_bandwidth_hz: s.chirp_bandwidth,
            filter_taps: s.filter_taps,
            rho_e: s.rho_e,
            los_phase_rad: 0.0,
        }
    }
}

impl SimConfig {
    pub fn settings(&self) -> SimSettings {
        SimSettings {
            sample_rate: self.sample_rate_hz,
            frame_duration: self.frame_duration_s,
            chirp_bandwidth: self.chirp_bandwidth_hz,
            filter_taps: self.filter_taps,
            rho_e: self.rho_e,
            gain_model: GainModel::Profile {
                theta: self.los_phase_rad,
            },
        }
    }
}

/// The experiment grid and estimator settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    pub bw_mhz: Vec<f64>,
    pub ds_ns: Vec<f64>,
    pub k_db: Vec<KFactor>,
    pub snr_db: Vec<f64>,
    pub n_frames: usize,
    pub n_seeds: usize,
    pub seed: u64,
    /// Neighbor count of the MI estimator.
    pub k: usize,
    /// LNC threshold; 0 disables the correction.
    pub alpha: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub profile_path: Option<PathBuf>,
    pub output_dir: PathBuf,
    pub sim: SimConfig,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            bw_mhz: vec![50.0, 100.0, 200.0, 300.0, 400.0],
            ds_ns: vec![50.0],
            k_db: vec![KFactor::Db(30.0)],
            snr_db: (0..=11).map(|i| 3.0 * i as f64).collect(),
            n_frames: 5000,
            n_seeds: 10,
            seed: 1,
            k: DEFAULT_K,
            alpha: DEFAULT_ALPHA,
            profile_path: None,
            output_dir: PathBuf::from("out"),
            sim: SimConfig::default(),
        }
    }
}

impl SweepConfig {
    pub fn from_toml_str(s: &str) -> Result<Self> {
        let cfg: SweepConfig = toml::from_str(s)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(io_err(path))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        Ok(toml::to_string(self)?)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(CliError::Config(m));
        for (name, list) in [
            ("bw_mhz", &self.bw_mhz),
            ("ds_ns", &self.ds_ns),
            ("snr_db", &self.snr_db),
        ] {
            if list.is_empty() {
                return bad(format!("{name} must not be empty"));
            }
            if list.iter().any(|v| v.is_nan()) {
                return bad(format!("{name} contains NaN"));
            }
        }
        if self.k_db.is_empty() {
            return bad("k_db must not be empty".into());
        }
        if self
            .k_db
            .iter()
            .any(|k| k.db().is_some_and(|v| !v.is_finite()))
        {
            return bad("k_db values must be finite".into());
        }
        if self.bw_mhz.iter().any(|&b| !(b > 0.0 && b.is_finite())) {
            return bad("bw_mhz values must be > 0".into());
        }
        if self.ds_ns.iter().any(|&d| !(d >= 0.0 && d.is_finite())) {
            return bad("ds_ns values must be >= 0".into());
        }
        if self.n_seeds == 0 {
            return bad("n_seeds must be >= 1".into());
        }
        if self.k == 0 {
            return bad("k must be >= 1".into());
        }
        if self.n_frames <= self.k {
            return bad(format!(
                "n_frames ({}) must exceed k ({})",
                self.n_frames, self.k
            ));
        }
        if !(0.0..1.0).contains(&self.alpha) {
            return bad(format!("alpha {} is not in [0, 1)", self.alpha));
        }
        if !(0.0..=1.0).contains(&self.sim.rho_e) {
            return bad(format!("rho_e {} is not in [0, 1]", self.sim.rho_e));
        }
        Ok(())
    }

    pub fn profile(&self) -> Result<TapProfile> {
        match &self.profile_path {
            Some(p) => Ok(skg_core::chanmodel::load_tap_profile(p)?),
            None => Ok(TapProfile::tdl_e()),
        }
    }

    /// All grid points in `bw × ds × k × snr` order.
    pub fn points(&self) -> Vec<SweepPoint> {
        let mut out = Vec::new();
        for &bw in &self.bw_mhz {
            for &ds in &self.ds_ns {
                for k in &self.k_db {
                    for &snr in &self.snr_db {
                        out.push(SweepPoint {
                            bandwidth: bw * 1e6,
                            delay_spread: ds * 1e-9,
                            k_db: k.db(),
                            snr_db: snr,
                        });
                    }
                }
            }
        }
        out
    }
}
