//! Transmit chirp, channel, receiver noise and the RSS front end.
//!
//! The received frame at each node is `x ⊛ h + w`, where the chirp `x` is
//! transmitted back-to-back so one frame holds exactly one chirp period and
//! the channel acts as a cyclic convolution. The RSS is the time average of
//! `|g * y|²` after a unit-gain low-pass filter `g` with cut-off `B_w/2`.

mod channel;
mod dataset;
mod filter;
mod waveform;

pub use channel::{add_awgn, apply_channel};
pub use dataset::{simulate_rss_dataset, RssDataset, RssMeta, SimSettings, SweepPoint};
pub(crate) use filter::fast_len;
pub use filter::{design_lowpass, measure_rss, FilterSpec, RssMeter};
pub use waveform::{gen_chirp, Waveform};
