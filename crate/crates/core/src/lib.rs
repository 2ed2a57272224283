//! Analytical and simulation toolkit for a single-user, single-target
//! integrated sensing and communication (ISAC) link.
//!
//! The crate is organised bottom-up:
//!
//! - [`specfun`]: Gaussian Q, incomplete gamma, Bessel I, Marcum Q,
//!   non-central chi-square sampling and quadrature nodes.
//! - [`scenario`]: geometry, COST-Hata path loss and the link budget.
//! - [`rate`]: achievable rates and their inversions.
//! - [`detectors`]: closed-form false-alarm / detection probabilities for the
//!   five detector scenarios, thresholds and ROC sweeps.
//! - [`montecarlo`]: waveform generation, decision statistics and empirical
//!   ROC estimation used to validate the closed forms.
//! - [`allocator`]: minimum transmit power for the eight sensing /
//!   communication cases.
//!
//! With the default `parallel` feature, Monte-Carlo trials and ROC grids are
//! evaluated with rayon. Results are bit-identical to the sequential path.

pub mod allocator;
pub mod detectors;
pub mod error;
pub mod montecarlo;
pub mod parallel;
pub mod rate;
pub mod scenario;
pub mod specfun;

pub use error::{IsacError, Result};
