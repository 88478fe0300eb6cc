//! k-nearest-neighbor mutual information estimation between two scalar
//! sample vectors.
//!
//! [`mi_ksg`] is the Kraskov–Stögbauer–Grassberger estimator (first
//! algorithm, max-norm). [`mi_lnc`] adds the local non-uniformity
//! correction, which replaces the axis-aligned neighborhood volume by a
//! local-PCA volume wherever the neighbors lie on a thin, tilted manifold.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result, SkgError};
use crate::rng::{substream, tag};

/// Default neighbor count.
pub const DEFAULT_K: usize = 5;
/// Default LNC threshold for two-dimensional joint spaces.
pub const DEFAULT_ALPHA: f64 = 0.25;
/// Tie-breaking jitter amplitude relative to each variable's standard deviation.
pub const DEFAULT_JITTER: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Correction {
    None,
    Lnc { alpha: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MiEstimate {
    /// Reported estimate in nats, clamped at zero.
    pub nats: f64,
    pub bits: f64,
    /// Unclamped estimate in nats.
    pub raw_nats: f64,
    pub k: usize,
    pub correction: Correction,
    pub n_samples: usize,
    /// Number of neighborhoods the LNC correction was applied to.
    pub corrected_points: usize,
    /// Set when an input vector is constant; the estimate is then zero.
    pub degenerate: bool,
    pub jitter: f64,
}

impl MiEstimate {
    fn from_raw(raw: f64, cfg: &MiEstimator, n: usize, corrected: usize, degenerate: bool) -> Self {
        let nats = raw.max(0.0);
        MiEstimate {
            nats,
            bits: nats / std::f64::consts::LN_2,
            raw_nats: raw,
            k: cfg.k,
            correction: cfg.correction,
            n_samples: n,
            corrected_points: corrected,
            degenerate,
            jitter: cfg.jitter,
        }
    }
}

/// Estimator configuration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MiEstimator {
    pub k: usize,
    pub correction: Correction,
    pub jitter: f64,
    pub seed: u64,
}

impl Default for MiEstimator {
    fn default() -> Self {
        MiEstimator {
            k: DEFAULT_K,
            correction: Correction::Lnc {
                alpha: DEFAULT_ALPHA,
            },
            jitter: DEFAULT_JITTER,
            seed: 0,
        }
    }
}

/// KSG estimate with the default jitter seed.
pub fn mi_ksg(a: &[f64], b: &[f64], k: usize) -> Result<MiEstimate> {
    MiEstimator {
        k,
        correction: Correction::None,
        ..Default::default()
    }
    .estimate(a, b)
}

/// KSG estimate plus local non-uniformity correction. `alpha = 0` disables
/// the correction.
pub fn mi_lnc(a: &[f64], b: &[f64], k: usize, alpha: f64) -> Result<MiEstimate> {
    MiEstimator {
        k,
        correction: Correction::Lnc { alpha },
        ..Default::default()
    }
    .estimate(a, b)
}

/// Mutual information of a bivariate Gaussian with correlation `rho`.
pub fn gaussian_mi_oracle(rho: f64) -> Result<f64> {
    if !(rho.abs() < 1.0) {
        return Err(invalid("rho", format!("|{rho}| is not < 1")));
    }
    Ok(0.5 * (1.0 / (1.0 - rho * rho)).ln())
}

/// `ψ(1..=n)`.
fn digamma_table(n: usize) -> Vec<f64> {
    const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
    let mut t = Vec::with_capacity(n + 1);
    t.push(f64::NAN);
    let mut v = -EULER_GAMMA;
    for i in 1..=n {
        t.push(v);
        v += 1.0 / i as f64;
    }
    t
}

fn mean_std(x: &[f64]) -> (f64, f64) {
    let m = x.iter().sum::<f64>() / x.len() as f64;
    (
        m,
        (x.iter().map(|v| (v - m).powi(2)).sum::<f64>() / x.len() as f64).sqrt(),
    )
}

fn lex_cmp(a: &[f64], b: &[f64]) -> std::cmp::Ordering {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.total_cmp(y))
        .find(|o| o.is_ne())
        .unwrap_or(std::cmp::Ordering::Equal)
}

struct Neighbors {
    eps: f64,
    idx: Vec<usize>,
}

impl MiEstimator {
    pub fn estimate(&self, a: &[f64], b: &[f64]) -> Result<MiEstimate> {
        let k = self.k;
        if a.len() != b.len() {
            return Err(SkgError::LengthMismatch(a.len(), b.len()));
        }
        let n = a.len();
        if k == 0 {
            return Err(invalid("k", "must be >= 1"));
        }
        if n <= k {
            return Err(SkgError::TooFewSamples { n, k });
        }
        if a.iter().chain(b).any(|v| !v.is_finite()) {
            return Err(invalid("samples", "all values must be finite"));
        }
        if let Correction::Lnc { alpha } = self.correction {
            if !(0.0..1.0).contains(&alpha) {
                return Err(invalid("alpha", format!("{alpha} is not in [0, 1)")));
            }
        }
        if !(self.jitter.is_finite() && self.jitter >= 0.0) {
            return Err(invalid("jitter", format!("{} is not >= 0", self.jitter)));
        }
        let (ma, sa) = mean_std(a);
        let (mb, sb) = mean_std(b);
        if sa == 0.0 || sb == 0.0 {
            return Ok(MiEstimate::from_raw(0.0, self, n, 0, true));
        }

        // Standardize so the estimate is invariant to affine rescaling, and
        // order the pair so it depends on the unordered pair {a, b} only.
        let (a, b, (ma, sa), (mb, sb)) = if lex_cmp(a, b).is_le() {
            (a, b, (ma, sa), (mb, sb))
        } else {
            (b, a, (mb, sb), (ma, sa))
        };
        let mut rng = substream(self.seed, &[tag::JITTER]);
        let mut standardized = |v: &[f64], m: f64, s: f64| -> Vec<f64> {
            v.iter()
                .map(|x| (x - m) / s + self.jitter * (rng.random::<f64>() - 0.5))
                .collect()
        };
        let x = standardized(a, ma, sa);
        let y = standardized(b, mb, sb);

        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&i, &j| x[i].total_cmp(&x[j]).then(i.cmp(&j)));
        let mut pos = vec![0; n];
        for (p, &i) in order.iter().enumerate() {
            pos[i] = p;
        }
        let xs: Vec<f64> = order.iter().map(|&i| x[i]).collect();
        let mut ys = y.clone();
        ys.sort_by(f64::total_cmp);

        let psi = digamma_table(n + 1);
        let alpha = match self.correction {
            Correction::Lnc { alpha } if alpha > 0.0 => Some(alpha),
            _ => None,
        };

        let per_point: Vec<(f64, Option<f64>)> = (0..n)
            .into_par_iter()
            .map(|i| {
                let nb = knn(i, k, &x, &y, &order, &pos);
                let nx = count_within(&xs, x[i], nb.eps);
                let ny = count_within(&ys, y[i], nb.eps);
                let term = psi[nx + 1] + psi[ny + 1];
                let corr = alpha.and_then(|al| lnc_correction(i, &nb.idx, &x, &y, al));
                (term, corr)
            })
            .collect();

        let mean_term = per_point.iter().map(|p| p.0).sum::<f64>() / n as f64;
        let mut raw = psi[k] + psi[n] - mean_term;
        let corrections: Vec<f64> = per_point.iter().filter_map(|p| p.1).collect();
        if !corrections.is_empty() {
            raw += corrections.iter().sum::<f64>() / n as f64;
        }
        Ok(MiEstimate::from_raw(raw, self, n, corrections.len(), false))
    }
}

/// The `k` nearest neighbors of point `i` in max-norm, found by walking
/// outwards along the x-sorted order until the x gap alone exceeds the
/// current k-th distance.
fn knn(i: usize, k: usize, x: &[f64], y: &[f64], order: &[usize], pos: &[usize]) -> Neighbors {
    let n = x.len();
    let p = pos[i];
    let mut best: Vec<(f64, usize)> = Vec::with_capacity(k + 1);
    let (mut lo, mut hi) = (p, p + 1);
    loop {
        let left = (lo > 0).then(|| (x[i] - x[order[lo - 1]], lo - 1));
        let right = (hi < n).then(|| (x[order[hi]] - x[i], hi));
        let (dx, q) = match (left, right) {
            (Some(l), Some(r)) => {
                if l.0 <= r.0 {
                    lo -= 1;
                    l
                } else {
                    hi += 1;
                    r
                }
            }
            (Some(l), None) => {
                lo -= 1;
                l
            }
            (None, Some(r)) => {
                hi += 1;
                r
            }
            (None, None) => break,
        };
        if best.len() == k && dx >= best[k - 1].0 {
            break;
        }
        let j = order[q];
        let d = dx.max((y[j] - y[i]).abs());
        if best.len() < k || d < best[k - 1].0 {
            let at = best.partition_point(|e| e.0 <= d);
            best.insert(at, (d, j));
            best.truncate(k);
        }
    }
    Neighbors {
        eps: best[k - 1].0,
        idx: best.into_iter().map(|e| e.1).collect(),
    }
}

/// Number of entries `v` with `|v − c| < eps`, excluding the point itself.
fn count_within(sorted: &[f64], c: f64, eps: f64) -> usize {
    let lo = sorted.partition_point(|&v| v <= c - eps);
    let hi = sorted.partition_point(|&v| v < c + eps);
    (hi - lo).saturating_sub(1)
}

/// `log V_rect − log V_pca` for the neighborhood of point `i`, when the PCA
/// volume is smaller than `alpha` times the bounding-box volume.
fn lnc_correction(i: usize, idx: &[usize], x: &[f64], y: &[f64], alpha: f64) -> Option<f64> {
    let pts: Vec<(f64, f64)> = idx.iter().map(|&j| (x[j] - x[i], y[j] - y[i])).collect();
    let k = idx.len() as f64;
    let (mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0);
    let (mut ex, mut ey) = (0.0f64, 0.0f64);
    for &(dx, dy) in &pts {
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
        ex = ex.max(dx.abs());
        ey = ey.max(dy.abs());
    }
    let (sxx, syy, sxy) = (sxx / k, syy / k, sxy / k);
    if ex == 0.0 || ey == 0.0 {
        return None;
    }
    let log_rect = ex.ln() + ey.ln();

    // principal axis angle of the 2x2 scatter matrix
    let u = sxx - syy;
    let w = 2.0 * sxy;
    let r = u.hypot(w);
    let (c, s) = if r == 0.0 {
        (1.0, 0.0)
    } else {
        let c = ((1.0 + u / r) / 2.0).sqrt();
        let s = ((1.0 - u / r) / 2.0).sqrt();
        (c, if w < 0.0 { -s } else { s })
    };
    let (mut e1, mut e2) = (0.0f64, 0.0f64);
    for &(dx, dy) in &pts {
        e1 = e1.max((c * dx + s * dy).abs());
        e2 = e2.max((c * dy - s * dx).abs());
    }
    if e1 == 0.0 || e2 == 0.0 {
        return None;
    }
    let log_pca = e1.ln() + e2.ln();
    (log_pca < log_rect + alpha.ln()).then_some(log_rect - log_pca)
}
