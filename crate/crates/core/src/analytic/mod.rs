//! Semi-analytic RSS power distributions.
//!
//! Channel power depends on how the multipath components resolve at the
//! receiver: all in one delay bin (noncentral χ² with 2 degrees of freedom),
//! each in its own bin (noncentral χ² with 2L degrees of freedom), or a hybrid
//! of `M` bins where the LoS bin is combined with a moment-matched Gamma for
//! the diffuse bins. Noise power over a frame of `C` samples is Gamma, and
//! the total RSS density is the numerical convolution of the two.
//!
//! All densities are carried as [`GridPdf`]s on uniform grids.

mod density;
mod grid;
mod power;

pub use density::{chi2_pdf, gamma_pdf, ncx2_pdf};
pub use grid::{convolve_pdfs, GridPdf};
pub use power::{
    chan_pdf_fully_resolved, chan_pdf_hybrid, chan_pdf_unresolved, noise_power_pdf,
    resolvable_bins, total_power_pdf, HybridBins, NoiseFrameSpec, PowerPdf, Resolution,
    GRID_POINTS, GRID_SPAN_STDS,
};
