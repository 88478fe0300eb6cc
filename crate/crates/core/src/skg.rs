//! Secret-key rate bounds from mutual information estimates.
//!
//! The achievable rate satisfies `I(A;B) − I(A;E) ≤ R ≤ I(A;B)`.

use serde::{Deserialize, Serialize};

use crate::mi::MiEstimate;

/// Rate bounds in bits per observation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateBounds {
    pub lower: f64,
    pub upper: f64,
    pub i_ab: f64,
    pub i_ae: f64,
    /// `I(A;E) > I(A;B)`: the lower bound is vacuous and reported as zero.
    pub clamped: bool,
    /// The two estimates came from different sample counts.
    pub sample_mismatch: bool,
}

/// Bounds from the two reported (clamped, in bits) estimates.
pub fn skg_bounds(i_ab: &MiEstimate, i_ae: &MiEstimate) -> RateBounds {
    let mut b = rate_bounds(i_ab.bits, i_ae.bits);
    b.sample_mismatch = i_ab.n_samples != i_ae.n_samples;
    b
}

/// Bounds from raw MI values in bits.
pub fn rate_bounds(i_ab: f64, i_ae: f64) -> RateBounds {
    let diff = i_ab - i_ae;
    RateBounds {
        lower: diff.max(0.0),
        upper: i_ab,
        i_ab,
        i_ae,
        clamped: diff < 0.0,
        sample_mismatch: false,
    }
}
