use std::io::{BufRead, Write};
use std::path::Path;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::channel::{add_noise_into, cyclic_taps_into, noise_sigma, quantize_taps};
use super::{design_lowpass, gen_chirp, RssMeter, Waveform};
use crate::chanmodel::{draw_eve, draw_reciprocal_pair, GainModel, TapProfile};
use crate::error::{invalid, Result, SkgError};
use crate::rng::{substream, tag};

/// One point of the experiment grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    /// Receiver filter bandwidth `B_w`, Hz.
    pub bandwidth: f64,
    /// Target RMS delay spread, s.
    pub delay_spread: f64,
    /// Target K-factor in dB; `None` keeps the profile's own K-factor.
    pub k_db: Option<f64>,
    /// `+inf` disables receiver noise.
    pub snr_db: f64,
}

/// Fixed simulation knobs shared by all grid points.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimSettings {
    pub sample_rate: f64,
    /// Frame (= chirp period) duration in seconds.
    pub frame_duration: f64,
    pub chirp_bandwidth: f64,
    pub filter_taps: usize,
    /// Correlation of Eve's tap gains with Alice's.
    pub rho_e: f64,
    pub gain_model: GainModel,
}

impl Default for SimSettings {
    fn default() -> Self {
        Self {
            sample_rate: 1e9,
            frame_duration: 10e-6,
            chirp_bandwidth: 250e6,
            filter_taps: 257,
            rho_e: 0.0,
            gain_model: GainModel::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RssMeta {
    pub bandwidth: f64,
    pub delay_spread: f64,
    /// Effective K-factor of the simulated profile, dB.
    pub k_db: f64,
    pub snr_db: f64,
    pub seed: u64,
    pub n_frames: usize,
    pub sample_rate: f64,
    pub frame_duration: f64,
    pub chirp_bandwidth: f64,
    pub filter_taps: usize,
    pub rho_e: f64,
}

/// Frame-aligned RSS observations of Alice, Bob and Eve.
#[derive(Debug, Clone, PartialEq)]
pub struct RssDataset {
    pub p_a: Vec<f64>,
    pub p_b: Vec<f64>,
    pub p_e: Vec<f64>,
    pub meta: RssMeta,
}

#[derive(Serialize, Deserialize)]
struct Row {
    frame: usize,
    p_a: f64,
    p_b: f64,
    p_e: f64,
}

impl RssDataset {
    pub fn len(&self) -> usize {
        self.p_a.len()
    }

    pub fn is_empty(&self) -> bool {
        self.p_a.is_empty()
    }

    /// CSV with `#`-prefixed `key=value` metadata lines followed by
    /// `frame,p_a,p_b,p_e`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        let meta = serde_json::to_value(&self.meta)?;
        if let serde_json::Value::Object(map) = meta {
            for (k, v) in map {
                writeln!(w, "# {k}={v}")?;
            }
        }
        let mut csv = csv::Writer::from_writer(w);
        for i in 0..self.len() {
            csv.serialize(Row {
                frame: i,
                p_a: self.p_a[i],
                p_b: self.p_b[i],
                p_e: self.p_e[i],
            })?;
        }
        csv.flush()?;
        Ok(())
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let f = std::io::BufWriter::new(std::fs::File::create(path)?);
        self.write_csv(f)
    }

    pub fn read_csv<R: BufRead>(mut r: R) -> Result<Self> {
        let mut meta = serde_json::Map::new();
        let mut body = String::new();
        let mut line = String::new();
        while r.read_line(&mut line)? > 0 {
            match line.strip_prefix('#') {
                Some(kv) => {
                    if let Some((k, v)) = kv.trim().split_once('=') {
                        meta.insert(k.to_string(), serde_json::from_str(v)?);
                    }
                }
                None => body.push_str(&line),
            }
            line.clear();
        }
        let meta: RssMeta = serde_json::from_value(serde_json::Value::Object(meta))?;
        let mut ds = RssDataset {
            p_a: Vec::new(),
            p_b: Vec::new(),
            p_e: Vec::new(),
            meta,
        };
        for row in csv::Reader::from_reader(body.as_bytes()).deserialize() {
            let row: Row = row?;
            ds.p_a.push(row.p_a);
            ds.p_b.push(row.p_b);
            ds.p_e.push(row.p_e);
        }
        Ok(ds)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::read_csv(std::io::BufReader::new(std::fs::File::open(path)?))
    }
}

/// Precomputed state for simulating frames at one grid point.
struct FrameSimulator {
    profile: TapProfile,
    chirp: Waveform,
    meter: RssMeter,
    snr_db: f64,
    settings: SimSettings,
    seed: u64,
}

struct Scratch {
    meter: RssMeter,
    y_ab: Vec<Complex64>,
    y_e: Vec<Complex64>,
    noisy: Vec<Complex64>,
}

impl FrameSimulator {
    fn scratch(&self) -> Scratch {
        let n = self.chirp.len();
        Scratch {
            meter: self.meter.clone(),
            y_ab: vec![Complex64::new(0.0, 0.0); n],
            y_e: vec![Complex64::new(0.0, 0.0); n],
            noisy: vec![Complex64::new(0.0, 0.0); n],
        }
    }

    fn rss(&self, s: &mut Scratch, eve: bool, rng: &mut crate::rng::SimRng) -> Result<f64> {
        let clean = if eve { &s.y_e } else { &s.y_ab };
        s.noisy.copy_from_slice(clean);
        let power = clean.iter().map(|v| v.norm_sqr()).sum::<f64>() / clean.len() as f64;
        if let Some(sigma) = noise_sigma(power, self.snr_db) {
            add_noise_into(&mut s.noisy, sigma, rng);
        }
        s.meter.measure(&s.noisy)
    }

    fn frame(&self, s: &mut Scratch, index: usize) -> Result<[f64; 3]> {
        let mut rng = substream(self.seed, &[tag::FRAME, index as u64]);
        let model = &self.settings.gain_model;
        let (h_a, _h_b) = draw_reciprocal_pair(&self.profile, model, &mut rng);
        let h_e = draw_eve(&self.profile, model, &h_a, self.settings.rho_e, &mut rng)?;

        let fs = self.chirp.sample_rate;
        let n = self.chirp.len();
        cyclic_taps_into(
            &self.chirp.samples,
            &quantize_taps(&h_a, fs, n)?,
            &mut s.y_ab,
        );
        cyclic_taps_into(
            &self.chirp.samples,
            &quantize_taps(&h_e, fs, n)?,
            &mut s.y_e,
        );

        // h_b == h_a, so Bob differs from Alice only through his own noise
        let p_a = self.rss(s, false, &mut rng)?;
        let p_b = self.rss(s, false, &mut rng)?;
        let p_e = self.rss(s, true, &mut rng)?;
        Ok([p_a, p_b, p_e])
    }
}

/// Simulates `n_frames` independent channel coherence intervals and returns
/// the RSS seen by Alice, Bob and Eve in each.
///
/// Frame `i` draws all of its randomness from the sub-stream `(seed, i)`, so
/// the output is identical for any number of worker threads.
pub fn simulate_rss_dataset(
    profile: &TapProfile,
    point: &SweepPoint,
    settings: &SimSettings,
    n_frames: usize,
    seed: u64,
) -> Result<RssDataset> {
    if n_frames == 0 {
        return Err(invalid("n_frames", "must be >= 1"));
    }
    if point.snr_db.is_nan() {
        return Err(invalid("snr_db", "NaN"));
    }
    let k_db = point.k_db.unwrap_or(profile.k_factor_db());
    let scaled = if profile.len() == 1 {
        profile.scaled(point.delay_spread, f64::INFINITY)?
    } else {
        profile.scaled(point.delay_spread, k_db)?
    };
    let chirp = gen_chirp(
        settings.chirp_bandwidth,
        settings.frame_duration,
        settings.sample_rate,
    )?;
    let filter = design_lowpass(point.bandwidth, settings.sample_rate, settings.filter_taps)?;
    let meter = RssMeter::new(&filter, chirp.len())?;
    let sim = FrameSimulator {
        profile: scaled,
        chirp,
        meter,
        snr_db: point.snr_db,
        settings: *settings,
        seed,
    };

    let rows: Vec<[f64; 3]> = (0..n_frames)
        .into_par_iter()
        .map_init(|| sim.scratch(), |s, i| sim.frame(s, i))
        .collect::<Result<_>>()?;

    let meta = RssMeta {
        bandwidth: point.bandwidth,
        delay_spread: point.delay_spread,
        k_db: sim.profile.k_factor_db(),
        snr_db: point.snr_db,
        seed,
        n_frames,
        sample_rate: settings.sample_rate,
        frame_duration: settings.frame_duration,
        chirp_bandwidth: settings.chirp_bandwidth,
        filter_taps: settings.filter_taps,
        rho_e: settings.rho_e,
    };
    let ds = RssDataset {
        p_a: rows.iter().map(|r| r[0]).collect(),
        p_b: rows.iter().map(|r| r[1]).collect(),
        p_e: rows.iter().map(|r| r[2]).collect(),
        meta,
    };
    if ds
        .p_a
        .iter()
        .chain(&ds.p_b)
        .chain(&ds.p_e)
        .any(|&p| !(p > 0.0))
    {
        return Err(SkgError::InvalidParameter {
            name: "point",
            reason: "simulation produced a non-positive RSS".into(),
        });
    }
    Ok(ds)
}
