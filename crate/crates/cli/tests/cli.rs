//! End-to-end runs of the `skgsim` binary.

use std::path::Path;
use std::process::{Command, Output};

fn skgsim(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_skgsim"))
        .args(args)
        .current_dir(cwd)
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    assert!(
        o.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&o.stderr)
    );
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn value(text: &str, key: &str) -> String {
    text.lines()
        .find_map(|l| l.strip_prefix(&format!("{key}=")))
        .unwrap_or_else(|| panic!("{key} missing in\n{text}"))
        .to_string()
}

#[test]
fn simulate_then_estimate() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let out = skgsim(
        &[
            "simulate", "--bw-mhz", "200", "--frames", "400", "--seed", "3", "--out", "rss.csv",
        ],
        d,
    );
    stdout(&out);
    let text = std::fs::read_to_string(d.join("rss.csv")).unwrap();
    assert!(text.lines().any(|l| l == "frame,p_a,p_b,p_e"));
    assert_eq!(text.lines().filter(|l| !l.starts_with('#')).count(), 401);

    let mi = stdout(&skgsim(&["mi", "rss.csv", "--k", "4", "--alpha", "0.2"], d));
    assert_eq!(value(&mi, "n_samples"), "400");
    assert_eq!(value(&mi, "k"), "4");
    let ab: f64 = value(&mi, "i_ab_bits").parse().unwrap();
    let lower: f64 = value(&mi, "skg_lower_bits").parse().unwrap();
    let upper: f64 = value(&mi, "skg_upper_bits").parse().unwrap();
    assert!(
        ab > 1.0,
        "reciprocal RSS at native K should share information"
    );
    assert!(0.0 <= lower && lower <= upper && upper == ab);
}

#[test]
fn mi_on_plain_two_column_csv() {
    let dir = tempfile::tempdir().unwrap();
    let rows: String = (0..200)
        .map(|i| format!("{},{}\n", i, (i * 7919) % 200))
        .collect();
    std::fs::write(dir.path().join("xy.csv"), rows).unwrap();
    let mi = stdout(&skgsim(&["mi", "xy.csv"], dir.path()));
    assert!(value(&mi, "i_ab_nats").parse::<f64>().unwrap() >= 0.0);
    assert!(!mi.contains("skg_lower_bits"));
}

#[test]
fn mi_rejects_wrong_column_count() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("one.csv"), "1\n2\n3\n").unwrap();
    assert!(!skgsim(&["mi", "one.csv"], dir.path()).status.success());
}

const TINY: &str = "bw_mhz = [100]\nds_ns = [50]\nk_db = [10]\nsnr_db = [20, 30]\nn_frames = 200\nn_seeds = 2\nseed = 9\n";

#[test]
fn sweep_is_thread_count_independent_and_plots() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    std::fs::write(d.join("cfg.toml"), TINY).unwrap();
    stdout(&skgsim(
        &[
            "sweep", "--config", "cfg.toml", "--out", "one", "--jobs", "1",
        ],
        d,
    ));
    stdout(&skgsim(
        &[
            "sweep", "--config", "cfg.toml", "--out", "two", "--jobs", "2",
        ],
        d,
    ));
    let a = std::fs::read_to_string(d.join("one/sweep.csv")).unwrap();
    let b = std::fs::read_to_string(d.join("two/sweep.csv")).unwrap();
    assert_eq!(a, b);
    // 2 points x (2 seeds + 1 aggregate) + header
    assert_eq!(a.lines().count(), 7);
    let header = a.lines().next().unwrap();
    for col in [
        "bw_hz",
        "ds_s",
        "k_db",
        "snr_db",
        "seed",
        "i_ab",
        "i_ae",
        "skg_lower",
        "skg_upper",
        "version",
    ] {
        assert!(
            header.split(',').any(|c| c == col),
            "{col} missing from {header}"
        );
    }
    let echoed = std::fs::read_to_string(d.join("one/config.toml")).unwrap();
    assert!(echoed.contains("n_frames = 200"));

    let plot = stdout(&skgsim(&["plot", "--out", "one"], d));
    assert!(plot.contains("mi_snr_by_bw_ds50_k10.svg"));
    let svg = std::fs::read_to_string(d.join("one/mi_snr_by_bw_ds50_k10.svg")).unwrap();
    assert!(svg.contains("<svg") && svg.contains("BW=100 MHz"));
}

#[test]
fn invalid_config_fails() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("bad.toml"), "n_seeds = 0\n").unwrap();
    let o = skgsim(&["sweep", "--config", "bad.toml"], dir.path());
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("n_seeds"));
}

#[test]
fn plot_without_aggregates_fails() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    std::fs::write(d.join("cfg.toml"), TINY).unwrap();
    stdout(&skgsim(&["sweep", "--config", "cfg.toml", "--out", "s"], d));
    let csv = std::fs::read_to_string(d.join("s/sweep.csv")).unwrap();
    let details: String = csv
        .lines()
        .filter(|l| !l.starts_with("aggregate"))
        .map(|l| format!("{l}\n"))
        .collect();
    std::fs::write(d.join("details.csv"), details).unwrap();
    let o = skgsim(&["plot", "details.csv", "--out", "figs"], d);
    assert!(!o.status.success());
    assert!(!d.join("figs").exists());
}
