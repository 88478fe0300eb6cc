//! Experiment sweeps: simulate every grid point for several seeds, estimate
//! the MI between the RSS sequences and assemble the key-rate bounds.

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use skg_core::chanmodel::TapProfile;
use skg_core::mi::{Correction, MiEstimator};
use skg_core::rng::{derive_seed, tag};
use skg_core::sigproc::{simulate_rss_dataset, SimSettings, SweepPoint};
use skg_core::skg::skg_bounds;
use skg_core::stats::{mean, pearson, std_dev};

use crate::config::{KFactor, SweepConfig};
use crate::error::{io_err, CliError, Result};

/// Version string embedded in every output row.
pub const VERSION: &str = env!("SKG_VERSION");

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RowKind {
    Detail,
    Aggregate,
}

/// One output row. MI and rates are in bits per observation; `*_std`
/// columns are only filled on aggregate rows (sample std across seeds).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub kind: RowKind,
    pub bw_hz: f64,
    pub ds_s: f64,
    /// Requested K-factor (`native` keeps the profile's own).
    pub k_setting: String,
    /// Effective K-factor of the simulated profile, dB.
    pub k_db: f64,
    pub snr_db: f64,
    /// Dataset seed for detail rows, master seed for aggregate rows.
    pub seed: u64,
    pub seed_index: Option<usize>,
    pub n_seeds: usize,
    pub n_frames: usize,
    pub mi_k: usize,
    pub alpha: f64,
    pub rho_e: f64,
    pub i_ab: f64,
    pub i_ae: f64,
    pub skg_lower: f64,
    pub skg_upper: f64,
    pub i_ab_std: Option<f64>,
    pub i_ae_std: Option<f64>,
    pub skg_lower_std: Option<f64>,
    pub corr_ab: f64,
    pub corr_ae: f64,
    /// Number of seeds whose lower bound was clamped at zero.
    pub clamped: usize,
    pub version: String,
}

/// Sweep output, sorted by grid parameters with detail rows before the
/// aggregate row of each point.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SweepTable {
    pub rows: Vec<SweepRow>,
}

impl SweepTable {
    pub fn details(&self) -> impl Iterator<Item = &SweepRow> {
        self.rows.iter().filter(|r| r.kind == RowKind::Detail)
    }

    pub fn aggregates(&self) -> impl Iterator<Item = &SweepRow> {
        self.rows.iter().filter(|r| r.kind == RowKind::Aggregate)
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = std::fs::File::create(path).map_err(io_err(path))?;
        let mut w = csv::Writer::from_writer(file);
        for r in &self.rows {
            w.serialize(r)?;
        }
        w.flush().map_err(io_err(path))?;
        Ok(())
    }

    pub fn read_csv(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = std::fs::File::open(path).map_err(io_err(path))?;
        let mut r = csv::Reader::from_reader(file);
        let rows = r
            .deserialize()
            .collect::<std::result::Result<Vec<SweepRow>, _>>()?;
        Ok(SweepTable { rows })
    }

    fn sort(&mut self) {
        self.rows.sort_by(|a, b| {
            a.bw_hz
                .total_cmp(&b.bw_hz)
                .then(a.ds_s.total_cmp(&b.ds_s))
                .then(a.k_db.total_cmp(&b.k_db))
                .then(a.snr_db.total_cmp(&b.snr_db))
                .then(a.kind.cmp(&b.kind))
                .then(a.seed_index.cmp(&b.seed_index))
        });
    }
}

/// Seed of one `(point, seed index)` task, derived from the parameter values
/// so that adding grid points leaves existing points unchanged.
pub fn point_seed(master: u64, point: &SweepPoint, seed_index: usize) -> u64 {
    let k = point.k_db.map_or(u64::MAX, f64::to_bits);
    derive_seed(
        master,
        &[
            tag::SWEEP,
            point.bandwidth.to_bits(),
            point.delay_spread.to_bits(),
            k,
            point.snr_db.to_bits(),
            seed_index as u64,
        ],
    )
}

fn describe(p: &SweepPoint) -> String {
    let k = p.k_db.map_or("native".to_string(), |k| format!("{k} dB"));
    format!(
        "bw={} MHz ds={} ns K={k} snr={} dB",
        p.bandwidth / 1e6,
        p.delay_spread * 1e9,
        p.snr_db
    )
}

struct Task {
    point: SweepPoint,
    k_setting: KFactor,
    seed_index: usize,
}

/// Simulates and evaluates one `(point, seed index)` pair.
pub fn run_point(
    profile: &TapProfile,
    point: &SweepPoint,
    settings: &SimSettings,
    cfg: &SweepConfig,
    seed_index: usize,
) -> Result<SweepRow> {
    let seed = point_seed(cfg.seed, point, seed_index);
    let wrap = |source| CliError::Point {
        point: describe(point),
        source,
    };
    let ds = simulate_rss_dataset(profile, point, settings, cfg.n_frames, seed).map_err(wrap)?;
    let est = MiEstimator {
        k: cfg.k,
        correction: Correction::Lnc { alpha: cfg.alpha },
        seed: derive_seed(seed, &[tag::JITTER]),
        ..Default::default()
    };
    let i_ab = est.estimate(&ds.p_a, &ds.p_b).map_err(wrap)?;
    let i_ae = est.estimate(&ds.p_a, &ds.p_e).map_err(wrap)?;
    let b = skg_bounds(&i_ab, &i_ae);
    Ok(SweepRow {
        kind: RowKind::Detail,
        bw_hz: point.bandwidth,
        ds_s: point.delay_spread,
        k_setting: point.k_db.map_or("native".into(), |k| k.to_string()),
        k_db: ds.meta.k_db,
        snr_db: point.snr_db,
        seed,
        seed_index: Some(seed_index),
        n_seeds: cfg.n_seeds,
        n_frames: cfg.n_frames,
        mi_k: cfg.k,
        alpha: cfg.alpha,
        rho_e: settings.rho_e,
        i_ab: b.i_ab,
        i_ae: b.i_ae,
        skg_lower: b.lower,
        skg_upper: b.upper,
        i_ab_std: None,
        i_ae_std: None,
        skg_lower_std: None,
        corr_ab: pearson(&ds.p_a, &ds.p_b),
        corr_ae: pearson(&ds.p_a, &ds.p_e),
        clamped: usize::from(b.clamped),
        version: VERSION.to_string(),
    })
}

fn sd(v: &[f64]) -> f64 {
    if v.len() < 2 {
        0.0
    } else {
        std_dev(v)
    }
}

fn aggregate(rows: &[SweepRow], master: u64) -> SweepRow {
    let col = |f: fn(&SweepRow) -> f64| rows.iter().map(f).collect::<Vec<_>>();
    let (ab, ae, lo) = (col(|r| r.i_ab), col(|r| r.i_ae), col(|r| r.skg_lower));
    let first = &rows[0];
    SweepRow {
        kind: RowKind::Aggregate,
        seed: master,
        seed_index: None,
        i_ab: mean(&ab),
        i_ae: mean(&ae),
        skg_lower: mean(&lo),
        skg_upper: mean(&ab),
        i_ab_std: Some(sd(&ab)),
        i_ae_std: Some(sd(&ae)),
        skg_lower_std: Some(sd(&lo)),
        corr_ab: mean(&col(|r| r.corr_ab)),
        corr_ae: mean(&col(|r| r.corr_ae)),
        clamped: rows.iter().map(|r| r.clamped).sum(),
        ..first.clone()
    }
}

/// Runs the full grid. Output does not depend on the number of threads.
pub fn run_sweep(cfg: &SweepConfig) -> Result<SweepTable> {
    cfg.validate()?;
    let profile = cfg.profile()?;
    let settings = cfg.sim.settings();
    let mut tasks = Vec::new();
    for &bw in &cfg.bw_mhz {
        for &ds in &cfg.ds_ns {
            for &k in &cfg.k_db {
                for &snr in &cfg.snr_db {
                    let point = SweepPoint {
                        bandwidth: bw * 1e6,
                        delay_spread: ds * 1e-9,
                        k_db: k.db(),
                        snr_db: snr,
                    };
                    for seed_index in 0..cfg.n_seeds {
                        tasks.push(Task {
                            point,
                            k_setting: k,
                            seed_index,
                        });
                    }
                }
            }
        }
    }
    let details: Vec<SweepRow> = tasks
        .par_iter()
        .map(|t| {
            let mut row = run_point(&profile, &t.point, &settings, cfg, t.seed_index)?;
            row.k_setting = t.k_setting.to_string();
            Ok(row)
        })
        .collect::<Result<_>>()?;

    let mut rows = Vec::with_capacity(details.len() + details.len() / cfg.n_seeds);
    for chunk in details.chunks(cfg.n_seeds) {
        rows.push(aggregate(chunk, cfg.seed));
        rows.extend_from_slice(chunk);
    }
    let mut table = SweepTable { rows };
    table.sort();
    Ok(table)
}

/// Writes `sweep.csv` and the effective configuration into the output
/// directory and returns the CSV path.
pub fn write_outputs(cfg: &SweepConfig, table: &SweepTable) -> Result<PathBuf> {
    let dir = &cfg.output_dir;
    std::fs::create_dir_all(dir).map_err(io_err(dir))?;
    let cfg_path = dir.join("config.toml");
    std::fs::write(&cfg_path, cfg.to_toml_string()?).map_err(io_err(&cfg_path))?;
    let csv_path = dir.join("sweep.csv");
    table.write_csv(&csv_path)?;
    Ok(csv_path)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny() -> SweepConfig {
        SweepConfig {
            bw_mhz: vec![100.0],
            ds_ns: vec![50.0],
            k_db: vec![KFactor::Db(10.0)],
            snr_db: vec![20.0],
            n_frames: 300,
            n_seeds: 1,
            ..Default::default()
        }
    }

    #[test]
    fn smallest_sweep_has_two_rows() {
        let t = run_sweep(&tiny()).unwrap();
        assert_eq!(t.details().count(), 1);
        assert_eq!(t.aggregates().count(), 1);
        let agg = t.aggregates().next().unwrap();
        let det = t.details().next().unwrap();
        assert_eq!(agg.i_ab, det.i_ab);
        assert_eq!(agg.i_ab_std, Some(0.0));
        assert!(det.skg_lower <= det.skg_upper);
        assert_eq!(det.version, VERSION);
    }

    #[test]
    fn adding_points_keeps_existing_results() {
        let a = run_sweep(&tiny()).unwrap();
        let mut cfg = tiny();
        cfg.snr_db = vec![10.0, 20.0];
        let b = run_sweep(&cfg).unwrap();
        let pick = |t: &SweepTable| t.details().find(|r| r.snr_db == 20.0).unwrap().clone();
        assert_eq!(pick(&a), pick(&b));
    }

    #[test]
    fn aggregate_statistics() {
        let mut cfg = tiny();
        cfg.n_seeds = 3;
        let t = run_sweep(&cfg).unwrap();
        let vals: Vec<f64> = t.details().map(|r| r.i_ab).collect();
        let agg = t.aggregates().next().unwrap();
        assert_eq!(vals.len(), 3);
        assert!((agg.i_ab - mean(&vals)).abs() < 1e-15);
        assert!((agg.i_ab_std.unwrap() - std_dev(&vals)).abs() < 1e-15);
        assert_eq!(t.rows.last().unwrap().kind, RowKind::Aggregate);
    }

    #[test]
    fn csv_round_trip() {
        let t = run_sweep(&tiny()).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("s.csv");
        t.write_csv(&p).unwrap();
        assert_eq!(SweepTable::read_csv(&p).unwrap(), t);
    }

    #[test]
    fn invalid_point_is_identified() {
        let mut cfg = tiny();
        cfg.bw_mhz = vec![2000.0];
        let err = run_sweep(&cfg).unwrap_err().to_string();
        assert!(err.contains("bw=2000 MHz"), "{err}");
    }
}
