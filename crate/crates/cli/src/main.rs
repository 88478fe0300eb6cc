use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use skg_cli::config::SweepConfig;
use skg_cli::figures::{emit_dist_figures, emit_trend_figures, DistParams};
use skg_cli::sweep::{run_sweep, write_outputs, VERSION};
use skg_core::mi::{Correction, MiEstimator};
use skg_core::sigproc::{simulate_rss_dataset, SweepPoint};
use skg_core::skg::skg_bounds;

#[derive(Parser)]
#[command(name = "skgsim", version = VERSION, about = "RSS-based secret key generation simulator")]
struct Cli {
    #[command(flatten)]
    global: GlobalOpts,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct GlobalOpts {
    /// TOML configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Master seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output file or directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Frames (RSS samples) per dataset.
    #[arg(long, global = true)]
    frames: Option<usize>,
    /// Neighbor count of the MI estimator.
    #[arg(long, global = true)]
    k: Option<usize>,
    /// LNC threshold (0 disables the correction).
    #[arg(long, global = true)]
    alpha: Option<f64>,
    /// Worker threads.
    #[arg(long, global = true)]
    jobs: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate one grid point and write the RSS dataset as CSV.
    Simulate {
        #[arg(long)]
        bw_mhz: f64,
        #[arg(long, default_value_t = 50.0)]
        ds_ns: f64,
        /// K-factor in dB; the profile's own when omitted.
        #[arg(long)]
        k_db: Option<f64>,
        #[arg(long, default_value_t = 33.0)]
        snr_db: f64,
    },
    /// Analytic total-power densities with Monte Carlo overlays.
    Dist {
        /// Monte Carlo samples per curve.
        #[arg(long, default_value_t = 100_000)]
        samples: usize,
        /// Noise standard deviation (defaults to the channel sigma).
        #[arg(long)]
        sigma_w: Option<f64>,
    },
    /// Estimate MI from a CSV with two (A, B) or three (A, B, E) columns.
    Mi { input: PathBuf },
    /// Run the configured parameter sweep.
    Sweep,
    /// Render trend figures from a sweep CSV.
    Plot { input: Option<PathBuf> },
}

fn load_config(g: &GlobalOpts) -> anyhow::Result<SweepConfig> {
    let mut cfg = match &g.config {
        Some(p) => SweepConfig::load(p)?,
        None => SweepConfig::default(),
    };
    if let Some(s) = g.seed {
        cfg.seed = s;
    }
    if let Some(n) = g.frames {
        cfg.n_frames = n;
    }
    if let Some(k) = g.k {
        cfg.k = k;
    }
    if let Some(a) = g.alpha {
        cfg.alpha = a;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn read_columns(path: &Path) -> anyhow::Result<Vec<Vec<f64>>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_path(path)
        .with_context(|| format!("reading {}", path.display()))?;
    let mut records = rdr.records();
    let mut cols: Vec<Vec<f64>> = Vec::new();
    let mut keep: Vec<usize> = Vec::new();
    let mut first = true;
    for rec in &mut records {
        let rec = rec?;
        if first {
            first = false;
            if rec.iter().any(|f| f.parse::<f64>().is_err()) {
                keep = (0..rec.len())
                    .filter(|&i| !rec[i].eq_ignore_ascii_case("frame"))
                    .collect();
                cols = vec![Vec::new(); keep.len()];
                continue;
            }
            keep = (0..rec.len()).collect();
            cols = vec![Vec::new(); keep.len()];
        }
        for (c, &i) in keep.iter().enumerate() {
            let field = rec.get(i).context("ragged CSV row")?;
            cols[c].push(
                field
                    .parse()
                    .with_context(|| format!("bad number '{field}'"))?,
            );
        }
    }
    if !(2..=3).contains(&cols.len()) {
        bail!("expected 2 or 3 data columns, found {}", cols.len());
    }
    Ok(cols)
}

fn main() -> anyhow::Result<()> {
    let cli = Cli::parse();
    let g = &cli.global;
    if let Some(j) = g.jobs {
        rayon::ThreadPoolBuilder::new()
            .num_threads(j)
            .build_global()?;
    }
    match &cli.command {
        Command::Simulate {
            bw_mhz,
            ds_ns,
            k_db,
            snr_db,
        } => {
            let cfg = load_config(g)?;
            let point = SweepPoint {
                bandwidth: bw_mhz * 1e6,
                delay_spread: ds_ns * 1e-9,
                k_db: *k_db,
                snr_db: *snr_db,
            };
            let ds = simulate_rss_dataset(
                &cfg.profile()?,
                &point,
                &cfg.sim.settings(),
                cfg.n_frames,
                cfg.seed,
            )?;
            let out = g.out.clone().unwrap_or_else(|| PathBuf::from("rss.csv"));
            ds.save(&out)?;
            println!("wrote {} frames to {}", ds.len(), out.display());
        }
        Command::Dist { samples, sigma_w } => {
            let params = DistParams {
                mc_samples: *samples,
                sigma_w: *sigma_w,
                seed: g.seed.unwrap_or(1),
                ..Default::default()
            };
            let out = g.out.clone().unwrap_or_else(|| PathBuf::from("figures"));
            for c in emit_dist_figures(&params, &out)? {
                println!(
                    "case={} sigma={} ks={:.5} analytic_mean={:.4} mc_mean={:.4} svg={}",
                    c.case,
                    c.sigma,
                    c.ks,
                    c.analytic_mean,
                    c.mc_mean,
                    c.svg.display()
                );
            }
        }
        Command::Mi { input } => {
            let cfg = load_config(g)?;
            let cols = read_columns(input)?;
            let est = MiEstimator {
                k: cfg.k,
                correction: Correction::Lnc { alpha: cfg.alpha },
                seed: cfg.seed,
                ..Default::default()
            };
            let ab = est.estimate(&cols[0], &cols[1])?;
            println!("n_samples={}", ab.n_samples);
            println!("k={}", ab.k);
            println!("alpha={}", cfg.alpha);
            println!("jitter={}", ab.jitter);
            println!("i_ab_nats={}", ab.nats);
            println!("i_ab_bits={}", ab.bits);
            println!("i_ab_raw_nats={}", ab.raw_nats);
            println!("i_ab_degenerate={}", ab.degenerate);
            if cols.len() == 3 {
                let ae = est.estimate(&cols[0], &cols[2])?;
                let b = skg_bounds(&ab, &ae);
                println!("i_ae_nats={}", ae.nats);
                println!("i_ae_bits={}", ae.bits);
                println!("i_ae_raw_nats={}", ae.raw_nats);
                println!("skg_lower_bits={}", b.lower);
                println!("skg_upper_bits={}", b.upper);
                println!("skg_lower_clamped={}", b.clamped);
            }
            println!("version={VERSION}");
        }
        Command::Sweep => {
            let mut cfg = load_config(g)?;
            if let Some(o) = &g.out {
                cfg.output_dir = o.clone();
            }
            let table = run_sweep(&cfg)?;
            let path = write_outputs(&cfg, &table)?;
            for r in table.aggregates() {
                println!(
                    "bw={}MHz ds={}ns K={} snr={}dB i_ab={:.4}±{:.4} i_ae={:.4} skg_lower={:.4} skg_upper={:.4}",
                    r.bw_hz / 1e6,
                    r.ds_s * 1e9,
                    r.k_setting,
                    r.snr_db,
                    r.i_ab,
                    r.i_ab_std.unwrap_or(0.0),
                    r.i_ae,
                    r.skg_lower,
                    r.skg_upper
                );
            }
            println!("wrote {}", path.display());
        }
        Command::Plot { input } => {
            let base = g.out.clone().unwrap_or_else(|| PathBuf::from("out"));
            let input = input.clone().unwrap_or_else(|| base.join("sweep.csv"));
            for p in emit_trend_figures(&input, &base)? {
                println!("wrote {}", p.display());
            }
        }
    }
    Ok(())
}
