use super::density::{gamma_pdf, ncx2_pdf};
use super::grid::{convolve_pdfs, GridPdf};
use crate::error::{invalid, Result};

/// Default number of grid points per density.
pub const GRID_POINTS: usize = 1 << 14;
/// Grids extend this many standard deviations past the mean.
pub const GRID_SPAN_STDS: f64 = 12.0;

/// A channel-power density on a normalized axis together with the factor
/// mapping it to physical power units.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerPdf {
    pub normalized: GridPdf,
    pub scale: f64,
}

impl PowerPdf {
    /// Density in physical power units.
    pub fn physical(&self) -> Result<GridPdf> {
        self.normalized.scaled(self.scale)
    }

    pub fn mean(&self) -> f64 {
        self.normalized.mean() * self.scale
    }

    pub fn variance(&self) -> f64 {
        self.normalized.variance() * self.scale * self.scale
    }
}

fn check_channel(paths: usize, nu: f64, sigma: f64) -> Result<()> {
    if paths == 0 {
        return Err(invalid("paths", "at least one path is required"));
    }
    if !(nu.is_finite() && nu >= 0.0) {
        return Err(invalid("nu", format!("{nu} is not >= 0")));
    }
    if !(sigma.is_finite() && sigma > 0.0) {
        return Err(invalid("sigma", format!("{sigma} is not > 0")));
    }
    Ok(())
}

fn ncx2_grid(dof: f64, lambda: f64) -> Result<GridPdf> {
    let mean = dof + lambda;
    let std = (2.0 * (dof + 2.0 * lambda)).sqrt();
    let end = mean + GRID_SPAN_STDS * std;
    let dx = end / (GRID_POINTS - 1) as f64;
    GridPdf::from_fn(0.0, dx, GRID_POINTS, |x| ncx2_pdf(x, dof, lambda))
}

fn gamma_grid(shape: f64, scale: f64) -> Result<GridPdf> {
    let mean = shape * scale;
    let std = shape.sqrt() * scale;
    let lo = (mean - GRID_SPAN_STDS * std).max(0.0);
    let hi = mean + GRID_SPAN_STDS * std;
    let dx = (hi - lo) / (GRID_POINTS - 1) as f64;
    GridPdf::from_fn(lo, dx, GRID_POINTS, |x| gamma_pdf(x, shape, scale))
}

/// All `paths` components fall in one delay bin and add coherently:
/// `P = Lσ²·χ²(2, ν²/(Lσ²))`.
pub fn chan_pdf_unresolved(paths: usize, nu: f64, sigma: f64) -> Result<PowerPdf> {
    check_channel(paths, nu, sigma)?;
    let s = paths as f64 * sigma * sigma;
    Ok(PowerPdf {
        normalized: ncx2_grid(2.0, nu * nu / s)?,
        scale: s,
    })
}

/// Every component occupies its own bin and powers add:
/// `P = σ²·χ²(2L, ν²/σ²)`.
pub fn chan_pdf_fully_resolved(paths: usize, nu: f64, sigma: f64) -> Result<PowerPdf> {
    check_channel(paths, nu, sigma)?;
    let s = sigma * sigma;
    Ok(PowerPdf {
        normalized: ncx2_grid(2.0 * paths as f64, nu * nu / s)?,
        scale: s,
    })
}

/// Grouping of paths into `M` resolvable delay bins; the LoS path sits in
/// the first bin.
#[derive(Debug, Clone, PartialEq)]
pub struct HybridBins {
    sizes: Vec<usize>,
    nu: f64,
    sigma: f64,
}

impl HybridBins {
    pub fn new(sizes: Vec<usize>, nu: f64, sigma: f64) -> Result<Self> {
        if sizes.is_empty() {
            return Err(invalid("bins", "at least one bin is required"));
        }
        if sizes.contains(&0) {
            return Err(invalid("bins", "every bin must hold at least one path"));
        }
        check_channel(sizes.iter().sum(), nu, sigma)?;
        Ok(HybridBins { sizes, nu, sigma })
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn total_paths(&self) -> usize {
        self.sizes.iter().sum()
    }

    /// Moment-matched Gamma `(shape, scale)` for the diffuse bins `2..M`,
    /// in physical units, or `None` when there is a single bin.
    ///
    /// Bin `i` holds `L_i` coherently summed diffuse paths, so its power is
    /// exponential with mean `2L_iσ²`; the sum of these is matched by a
    /// Gamma with the same mean and variance.
    pub fn diffuse_gamma(&self) -> Option<(f64, f64)> {
        let s2 = self.sigma * self.sigma;
        let (sum, sum_sq) = self.sizes[1..]
            .iter()
            .map(|&l| 2.0 * l as f64)
            .fold((0.0, 0.0), |(a, b), m| (a + m, b + m * m));
        if self.sizes.len() < 2 {
            return None;
        }
        Some((sum * sum / sum_sq, s2 * sum_sq / sum))
    }
}

/// LoS bin (noncentral χ² with 2 degrees of freedom, scaled by `L₁`)
/// convolved with the moment-matched Gamma of the diffuse bins.
pub fn chan_pdf_hybrid(bins: &HybridBins) -> Result<PowerPdf> {
    let s2 = bins.sigma * bins.sigma;
    let l1 = bins.sizes[0] as f64;
    let los = ncx2_grid(2.0, bins.nu * bins.nu / (l1 * s2))?.scaled(l1)?;
    let normalized = match bins.diffuse_gamma() {
        None => los,
        Some((shape, scale)) => convolve_pdfs(&los, &gamma_grid(shape, scale / s2)?)?,
    };
    Ok(PowerPdf {
        normalized,
        scale: s2,
    })
}

/// Number of resolvable delay bins for excess delay `tm` and resolution
/// `t = 1/B_w`: `max(1, ⌈tm/t⌉)`.
pub fn resolvable_bins(tm: f64, t: f64) -> Result<usize> {
    if !(t.is_finite() && t > 0.0) {
        return Err(invalid("resolution", format!("{t} is not > 0")));
    }
    if !(tm.is_finite() && tm >= 0.0) {
        return Err(invalid("excess_delay", format!("{tm} is not >= 0")));
    }
    Ok(((tm / t) * (1.0 - 1e-12)).ceil().max(1.0) as usize)
}

/// How the multipath components of a channel resolve at the receiver.
#[derive(Debug, Clone, PartialEq)]
pub enum Resolution {
    Unresolved { paths: usize },
    FullyResolved { paths: usize },
    Hybrid { bins: Vec<usize> },
}

impl Resolution {
    pub fn total_paths(&self) -> usize {
        match self {
            Resolution::Unresolved { paths } | Resolution::FullyResolved { paths } => *paths,
            Resolution::Hybrid { bins } => bins.iter().sum(),
        }
    }

    /// Channel-power density for LoS amplitude `nu` and per-dimension
    /// diffuse standard deviation `sigma`.
    pub fn channel_pdf(&self, nu: f64, sigma: f64) -> Result<PowerPdf> {
        match self {
            Resolution::Unresolved { paths } => chan_pdf_unresolved(*paths, nu, sigma),
            Resolution::FullyResolved { paths } => chan_pdf_fully_resolved(*paths, nu, sigma),
            Resolution::Hybrid { bins } => {
                chan_pdf_hybrid(&HybridBins::new(bins.clone(), nu, sigma)?)
            }
        }
    }
}

/// Noise power averaged over a frame of `samples` complex samples with
/// per-dimension standard deviation `sigma_w`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseFrameSpec {
    pub samples: usize,
    pub sigma_w: f64,
}

impl NoiseFrameSpec {
    pub fn new(samples: usize, sigma_w: f64) -> Result<Self> {
        if samples < 2 {
            return Err(invalid("samples", "a frame needs at least two samples"));
        }
        if !(sigma_w.is_finite() && sigma_w > 0.0) {
            return Err(invalid("sigma_w", format!("{sigma_w} is not > 0")));
        }
        Ok(NoiseFrameSpec { samples, sigma_w })
    }

    /// `(shape, scale)` of the frame noise power: the unbiased sample
    /// variance of `C` real `N(0, 2σ_w²)` samples, `Γ((C−1)/2, 4σ_w²/(C−1))`.
    pub fn gamma_params(&self) -> (f64, f64) {
        let dof = (self.samples - 1) as f64;
        (dof / 2.0, 4.0 * self.sigma_w * self.sigma_w / dof)
    }
}

/// Density of the frame noise power.
pub fn noise_power_pdf(spec: &NoiseFrameSpec) -> Result<GridPdf> {
    let spec = NoiseFrameSpec::new(spec.samples, spec.sigma_w)?;
    let (shape, scale) = spec.gamma_params();
    gamma_grid(shape, scale)
}

/// Total RSS density: physical channel power convolved with frame noise power.
pub fn total_power_pdf(chan: &PowerPdf, noise: &GridPdf) -> Result<GridPdf> {
    convolve_pdfs(&chan.physical()?, noise)
}
