//! Distribution and trend figures.

use std::path::{Path, PathBuf};

use skg_core::analytic::{noise_power_pdf, total_power_pdf, GridPdf, NoiseFrameSpec, Resolution};
use skg_core::generative::sample_total_powers;
use skg_core::rng::{substream, tag};
use skg_core::stats::{ks_two_sample, mean};

use crate::error::{io_err, CliError, Result};
use crate::svg::{Chart, Series, Style};
use crate::sweep::{RowKind, SweepRow, SweepTable};

/// Parameters of the total-power distribution figures.
#[derive(Debug, Clone, PartialEq)]
pub struct DistParams {
    pub paths: usize,
    pub nu: f64,
    pub sigmas: Vec<f64>,
    pub hybrid_bins: Vec<usize>,
    /// Samples per frame `C` of the noise-power model.
    pub noise_samples: usize,
    /// Noise standard deviation; `None` uses the channel `σ`.
    pub sigma_w: Option<f64>,
    pub mc_samples: usize,
    pub seed: u64,
}

impl Default for DistParams {
    fn default() -> Self {
        DistParams {
            paths: 14,
            nu: 100.0,
            sigmas: vec![5.0, 10.0],
            hybrid_bins: vec![3, 5, 4, 2],
            noise_samples: 10_000,
            sigma_w: None,
            mc_samples: 100_000,
            seed: 1,
        }
    }
}

impl DistParams {
    /// The three resolution cases with their file-name stems.
    pub fn cases(&self) -> Vec<(&'static str, Resolution)> {
        vec![
            ("unresolved", Resolution::Unresolved { paths: self.paths }),
            ("resolved", Resolution::FullyResolved { paths: self.paths }),
            (
                "hybrid",
                Resolution::Hybrid {
                    bins: self.hybrid_bins.clone(),
                },
            ),
        ]
    }
}

/// Analytic density and Monte Carlo comparison for one case and `σ`.
#[derive(Debug, Clone)]
pub struct CaseEvaluation {
    pub pdf: GridPdf,
    pub mc_samples: Vec<f64>,
    /// Two-sample KS distance between the Monte Carlo draws and an equally
    /// sized sample drawn from the analytic density by inverse CDF.
    pub ks: f64,
}

pub fn evaluate_case(
    res: &Resolution,
    nu: f64,
    sigma: f64,
    noise: &NoiseFrameSpec,
    n: usize,
    seed: u64,
) -> Result<CaseEvaluation> {
    let chan = res.channel_pdf(nu, sigma)?;
    let pdf = total_power_pdf(&chan, &noise_power_pdf(noise)?)?;
    let mc_samples = sample_total_powers(res, nu, sigma, noise, n, seed)?;
    let drawn = pdf.sample(&mut substream(seed, &[tag::MONTE_CARLO, 2]), n);
    let ks = ks_two_sample(&mc_samples, &drawn);
    Ok(CaseEvaluation {
        pdf,
        mc_samples,
        ks,
    })
}

/// One rendered curve of a distribution figure.
#[derive(Debug, Clone, PartialEq)]
pub struct DistCurve {
    pub case: String,
    pub sigma: f64,
    pub ks: f64,
    pub analytic_mean: f64,
    pub mc_mean: f64,
    pub csv: PathBuf,
    pub svg: PathBuf,
}

fn histogram(samples: &[f64], lo: f64, hi: f64, bins: usize) -> Vec<(f64, f64)> {
    let w = (hi - lo) / bins as f64;
    let mut counts = vec![0usize; bins];
    for &s in samples {
        if s >= lo && s < hi {
            counts[((s - lo) / w) as usize % bins] += 1;
        }
    }
    let n = samples.len() as f64;
    let mut pts: Vec<(f64, f64)> = counts
        .iter()
        .enumerate()
        .map(|(i, &c)| (lo + i as f64 * w, c as f64 / (n * w)))
        .collect();
    pts.push((hi, pts.last().map_or(0.0, |p| p.1)));
    pts
}

fn write_pdf_csv(pdf: &GridPdf, path: &Path) -> Result<()> {
    let file = std::fs::File::create(path).map_err(io_err(path))?;
    let mut w = csv::Writer::from_writer(file);
    w.write_record(["x", "density"])?;
    for (i, d) in pdf.density.iter().enumerate() {
        w.write_record([format!("{:e}", pdf.x(i)), format!("{d:e}")])?;
    }
    w.flush().map_err(io_err(path))?;
    Ok(())
}

/// Renders the analytic total-power densities of the three resolution cases
/// with Monte Carlo histograms. Writes `dist_<case>_sigma<σ>.csv` and
/// `dist_<case>.svg` into `out_dir`.
pub fn emit_dist_figures(params: &DistParams, out_dir: &Path) -> Result<Vec<DistCurve>> {
    std::fs::create_dir_all(out_dir).map_err(io_err(out_dir))?;
    let mut out = Vec::new();
    for (ci, (name, res)) in params.cases().into_iter().enumerate() {
        let svg_path = out_dir.join(format!("dist_{name}.svg"));
        let mut chart = Chart {
            title: format!(
                "Total RSS power, {name} multipath (L={}, nu={})",
                res.total_paths(),
                params.nu
            ),
            x_label: "total power".into(),
            y_label: "density".into(),
            ..Default::default()
        };
        for (si, &sigma) in params.sigmas.iter().enumerate() {
            let noise = NoiseFrameSpec::new(params.noise_samples, params.sigma_w.unwrap_or(sigma))?;
            let seed = skg_core::rng::derive_seed(params.seed, &[ci as u64, si as u64]);
            let ev = evaluate_case(&res, params.nu, sigma, &noise, params.mc_samples, seed)?;
            let csv_path = out_dir.join(format!("dist_{name}_sigma{sigma}.csv"));
            write_pdf_csv(&ev.pdf, &csv_path)?;

            let lo = ev.pdf.quantile(1e-4);
            let hi = ev.pdf.quantile(1.0 - 1e-4);
            let step = ((hi - lo) / 400.0).max(ev.pdf.dx);
            let curve: Vec<(f64, f64)> = (0..=((hi - lo) / step) as usize)
                .map(|i| {
                    let x = lo + i as f64 * step;
                    (x, ev.pdf.value_at(x))
                })
                .collect();
            chart.series.push(Series {
                label: format!("analytic, sigma={sigma}"),
                points: curve,
                style: Style::Line,
            });
            chart.series.push(Series {
                label: format!("Monte Carlo, sigma={sigma}"),
                points: histogram(&ev.mc_samples, lo, hi, 80),
                style: Style::Step,
            });
            chart
                .notes
                .push(format!("KS(sigma={sigma}) = {:.4}", ev.ks));
            out.push(DistCurve {
                case: name.to_string(),
                sigma,
                ks: ev.ks,
                analytic_mean: ev.pdf.mean(),
                mc_mean: mean(&ev.mc_samples),
                csv: csv_path,
                svg: svg_path.clone(),
            });
        }
        std::fs::write(&svg_path, chart.render()?).map_err(io_err(&svg_path))?;
    }
    Ok(out)
}

fn unique(vals: impl Iterator<Item = f64>) -> Vec<f64> {
    let mut v: Vec<f64> = vals.collect();
    v.sort_by(f64::total_cmp);
    v.dedup();
    v
}

fn unique_str<'a>(vals: impl Iterator<Item = &'a str>) -> Vec<&'a str> {
    let mut v: Vec<&str> = vals.collect();
    v.sort_by(|a, b| match (a.parse::<f64>(), b.parse::<f64>()) {
        (Ok(x), Ok(y)) => x.total_cmp(&y),
        (Ok(_), Err(_)) => std::cmp::Ordering::Greater,
        (Err(_), Ok(_)) => std::cmp::Ordering::Less,
        _ => a.cmp(b),
    });
    v.dedup();
    v
}

/// Compact decimal rendering that hides unit-conversion round-off.
fn short(v: f64) -> String {
    let s = format!("{v:.6}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".into()
    } else {
        s.to_string()
    }
}

fn curve(rows: &[&SweepRow], x: fn(&SweepRow) -> f64) -> Vec<(f64, f64)> {
    let mut p: Vec<(f64, f64)> = rows.iter().map(|r| (x(r), r.i_ab)).collect();
    p.sort_by(|a, b| a.0.total_cmp(&b.0));
    p
}

/// Builds the trend charts from the aggregate rows of a sweep.
pub fn trend_charts(table: &SweepTable) -> Result<Vec<(String, Chart)>> {
    let agg: Vec<&SweepRow> = table
        .rows
        .iter()
        .filter(|r| r.kind == RowKind::Aggregate)
        .collect();
    if agg.is_empty() {
        return Err(CliError::Input("sweep table has no aggregate rows".into()));
    }
    let bws = unique(agg.iter().map(|r| r.bw_hz));
    let dss = unique(agg.iter().map(|r| r.ds_s));
    let ks = unique_str(agg.iter().map(|r| r.k_setting.as_str()));
    let mhz = |v: f64| short(v / 1e6);
    let ns = |v: f64| short(v * 1e9);
    let mut charts = Vec::new();

    for &ds in &dss {
        for &k in &ks {
            let mut chart = Chart {
                title: format!("I(A;B) vs SNR, DS={} ns, K={k}", ns(ds)),
                x_label: "SNR (dB)".into(),
                y_label: "I(A;B) (bits)".into(),
                ..Default::default()
            };
            for &bw in &bws {
                let rows: Vec<&SweepRow> = agg
                    .iter()
                    .copied()
                    .filter(|r| r.ds_s == ds && r.k_setting == k && r.bw_hz == bw)
                    .collect();
                if !rows.is_empty() {
                    chart.series.push(Series {
                        label: format!("BW={} MHz", mhz(bw)),
                        points: curve(&rows, |r| r.snr_db),
                        style: Style::Line,
                    });
                }
            }
            if !chart.series.is_empty() {
                charts.push((format!("mi_snr_by_bw_ds{}_k{k}.svg", ns(ds)), chart));
            }
        }
    }

    if dss.len() > 1 {
        for &bw in &bws {
            for &k in &ks {
                let mut chart = Chart {
                    title: format!("I(A;B) vs SNR, BW={} MHz, K={k}", mhz(bw)),
                    x_label: "SNR (dB)".into(),
                    y_label: "I(A;B) (bits)".into(),
                    ..Default::default()
                };
                for &ds in &dss {
                    let rows: Vec<&SweepRow> = agg
                        .iter()
                        .copied()
                        .filter(|r| r.ds_s == ds && r.k_setting == k && r.bw_hz == bw)
                        .collect();
                    if !rows.is_empty() {
                        chart.series.push(Series {
                            label: format!("DS={} ns", ns(ds)),
                            points: curve(&rows, |r| r.snr_db),
                            style: Style::Line,
                        });
                    }
                }
                if chart.series.len() > 1 {
                    charts.push((format!("mi_snr_by_ds_bw{}_k{k}.svg", mhz(bw)), chart));
                }
            }
        }
    }

    if ks.len() > 1 {
        let snr = *unique(agg.iter().map(|r| r.snr_db)).last().unwrap();
        let mut chart = Chart {
            title: format!("I(A;B) vs K-factor, SNR={snr} dB"),
            x_label: "K (dB)".into(),
            y_label: "I(A;B) (bits)".into(),
            ..Default::default()
        };
        for &bw in &bws {
            for &ds in &dss {
                let rows: Vec<&SweepRow> = agg
                    .iter()
                    .copied()
                    .filter(|r| r.snr_db == snr && r.ds_s == ds && r.bw_hz == bw)
                    .collect();
                if rows.len() > 1 {
                    chart.series.push(Series {
                        label: format!("BW={} MHz, DS={} ns", mhz(bw), ns(ds)),
                        points: curve(&rows, |r| r.k_db),
                        style: Style::Line,
                    });
                }
            }
        }
        if !chart.series.is_empty() {
            charts.push((format!("mi_k_snr{snr}.svg"), chart));
        }
    }
    Ok(charts)
}

/// Reads a sweep CSV and writes the trend SVGs into `out_dir`.
pub fn emit_trend_figures(csv_path: &Path, out_dir: &Path) -> Result<Vec<PathBuf>> {
    let table = SweepTable::read_csv(csv_path)?;
    let charts = trend_charts(&table)?;
    std::fs::create_dir_all(out_dir).map_err(io_err(out_dir))?;
    let mut paths = Vec::new();
    for (name, chart) in charts {
        let path = out_dir.join(name);
        std::fs::write(&path, chart.render()?).map_err(io_err(&path))?;
        paths.push(path);
    }
    Ok(paths)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sweep::VERSION;

    fn row(kind: RowKind, bw: f64, ds: f64, k: &str, snr: f64, mi: f64) -> SweepRow {
        SweepRow {
            kind,
            bw_hz: bw * 1e6,
            ds_s: ds * 1e-9,
            k_setting: k.into(),
            k_db: k.parse().unwrap_or(9.5),
            snr_db: snr,
            seed: 1,
            seed_index: None,
            n_seeds: 1,
            n_frames: 100,
            mi_k: 5,
            alpha: 0.25,
            rho_e: 0.0,
            i_ab: mi,
            i_ae: 0.0,
            skg_lower: mi,
            skg_upper: mi,
            i_ab_std: Some(0.0),
            i_ae_std: Some(0.0),
            skg_lower_std: Some(0.0),
            corr_ab: 0.9,
            corr_ae: 0.0,
            clamped: 0,
            version: VERSION.into(),
        }
    }

    fn table() -> SweepTable {
        let mut rows = Vec::new();
        for bw in [50.0, 100.0, 200.0] {
            for snr in [0.0, 10.0, 20.0] {
                rows.push(row(RowKind::Aggregate, bw, 50.0, "30", snr, snr / bw));
                rows.push(row(RowKind::Detail, bw, 50.0, "30", snr, snr / bw));
            }
        }
        SweepTable { rows }
    }

    #[test]
    fn one_curve_per_bandwidth() {
        let charts = trend_charts(&table()).unwrap();
        assert_eq!(charts.len(), 1);
        assert_eq!(charts[0].0, "mi_snr_by_bw_ds50_k30.svg");
        assert_eq!(charts[0].1.series.len(), 3);
        assert_eq!(charts[0].1.series[0].points.len(), 3);
    }

    #[test]
    fn k_and_ds_charts_when_varied() {
        let mut t = table();
        t.rows
            .push(row(RowKind::Aggregate, 50.0, 100.0, "30", 20.0, 0.1));
        t.rows
            .push(row(RowKind::Aggregate, 50.0, 50.0, "native", 20.0, 0.3));
        let names: Vec<String> = trend_charts(&t).unwrap().into_iter().map(|c| c.0).collect();
        assert!(
            names.contains(&"mi_snr_by_ds_bw50_k30.svg".to_string()),
            "{names:?}"
        );
        assert!(names.contains(&"mi_k_snr20.svg".to_string()), "{names:?}");
    }

    #[test]
    fn empty_aggregates_are_rejected() {
        let mut t = table();
        t.rows.retain(|r| r.kind == RowKind::Detail);
        assert!(trend_charts(&t).is_err());
        let dir = tempfile::tempdir().unwrap();
        let csv = dir.path().join("s.csv");
        t.write_csv(&csv).unwrap();
        let out = dir.path().join("figs");
        assert!(emit_trend_figures(&csv, &out).is_err());
        assert!(!out.exists() || std::fs::read_dir(&out).unwrap().next().is_none());
    }

    #[test]
    fn trend_svgs_are_deterministic() {
        let dir = tempfile::tempdir().unwrap();
        let csv = dir.path().join("s.csv");
        table().write_csv(&csv).unwrap();
        let a = emit_trend_figures(&csv, &dir.path().join("a")).unwrap();
        let b = emit_trend_figures(&csv, &dir.path().join("b")).unwrap();
        assert_eq!(a.len(), b.len());
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(std::fs::read(x).unwrap(), std::fs::read(y).unwrap());
        }
    }

    #[test]
    fn small_dist_figures() {
        let dir = tempfile::tempdir().unwrap();
        let params = DistParams {
            paths: 4,
            sigmas: vec![5.0],
            hybrid_bins: vec![2, 1, 1],
            noise_samples: 50,
            mc_samples: 4000,
            ..Default::default()
        };
        let curves = emit_dist_figures(&params, dir.path()).unwrap();
        assert_eq!(curves.len(), 3);
        for c in &curves {
            assert!(c.ks < 0.05, "{}: {}", c.case, c.ks);
            assert!((c.mc_mean / c.analytic_mean - 1.0).abs() < 0.02);
            assert!(c.csv.exists() && c.svg.exists());
        }
    }

    #[test]
    fn histogram_is_a_density() {
        let s: Vec<f64> = (0..1000).map(|i| i as f64 / 1000.0).collect();
        let h = histogram(&s, 0.0, 1.0, 10);
        let area: f64 = h.windows(2).map(|w| w[0].1 * (w[1].0 - w[0].0)).sum();
        assert!((area - 1.0).abs() < 1e-12);
    }
}
