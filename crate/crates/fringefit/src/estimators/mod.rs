//! Phase estimators and their likelihood machinery.
//!
//! The four-port exposures get closed-form estimators: a normalized-fringe
//! moment formula for the continuous read-out model and the analytic
//! maximum-likelihood solution for counted data.  Fringe scans get the
//! discrete-Fourier-transform estimator (exact maximum likelihood under
//! additive Gaussian noise) and a constrained numerical maximizer of the
//! Poisson log-likelihood.

mod dft;
mod four_port;
mod loglik;
mod maxlik;

pub use dft::{dft_estimate, dft_estimate_real};
pub use four_port::{nfm_four_port, poisson_four_port};
pub use loglik::{
    gaussian_four_port_loglik, poisson_fringe_loglik, poisson_fringe_loglik_grad,
};
pub use maxlik::{
    poisson_maxlik, profile_phase_loglik, Initializer, LogLikCurve, OptimizerReport,
};
