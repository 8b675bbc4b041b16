//! fringefit: phase estimation for interferometric count data.
//!
//! The crate models an interferometer read out either through four output
//! ports (two phase quadratures) or through a two-beam scan over an
//! auxiliary phase shifter.  It provides:
//!
//! * closed-form estimators for four-port exposures ([`estimators::nfm_four_port`],
//!   [`estimators::poisson_four_port`]),
//! * the DFT fringe estimator and a constrained Poisson maximum-likelihood
//!   fit for scan data ([`estimators::dft_estimate`], [`estimators::poisson_maxlik`]),
//! * a deterministic Monte-Carlo simulator ([`simulator::run_batch`]), and
//! * a harness that scores estimator efficiency via circular-window hit
//!   frequencies ([`harness::delta_e_curve`]).
//!
//! The `fringefit` binary wires these into a CSV pipeline; see [`cli`].

pub mod cli;
pub mod error;
pub mod estimators;
pub mod harness;
pub mod model;
pub mod simulator;

pub use error::{Error, Result};
