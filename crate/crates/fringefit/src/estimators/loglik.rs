//! Log-likelihood functions for both detection models.
//!
//! The Poisson fringe log-likelihood drops the constant `ln(n!)` terms, so
//! values are comparable across parameters for a fixed sample but are not
//! log-probabilities.  Zero-mean positions follow the usual conventions:
//! a zero count contributes nothing beyond the `-mean` term, while a
//! positive count facing a zero mean sends the log-likelihood to `-inf`
//! (and makes the gradient undefined).

use crate::error::{Error, Result};
use crate::model::{
    mean_four_port, FourPortParams, FourPortSample, FringeSample, SetupParams,
};
use std::f64::consts::PI;

/// Gaussian log-density of a four-port exposure: independent channels with
/// the model means and a common noise sigma.
pub fn gaussian_four_port_loglik(params: &FourPortParams, sample: &FourPortSample) -> f64 {
    let means = mean_four_port(params);
    let values = sample.values();
    let sigma = params.noise_sigma();
    let mut ss = 0.0;
    for (x, m) in values.iter().zip(means) {
        let r = x - m;
        ss += r * r;
    }
    -0.5 * ss / (sigma * sigma) - 4.0 * sigma.ln() - 2.0 * (2.0 * PI).ln()
}

/// Poisson log-likelihood of a fringe scan (without `ln(n!)` terms).
pub fn poisson_fringe_loglik(params: &SetupParams, sample: &FringeSample) -> f64 {
    loglik_raw(
        params.mean_o(),
        params.mean_h(),
        params.amplitude(),
        params.phase(),
        sample,
    )
}

/// Gradient of [`poisson_fringe_loglik`] with respect to
/// `(mean_o, mean_h, amplitude, phase)`.
///
/// Errors with [`Error::UndefinedGradient`] when any position has a zero
/// model mean facing a positive count.
pub fn poisson_fringe_loglik_grad(params: &SetupParams, sample: &FringeSample) -> Result<[f64; 4]> {
    let (ll, grad) = loglik_grad_raw(
        params.mean_o(),
        params.mean_h(),
        params.amplitude(),
        params.phase(),
        sample,
    );
    if ll == f64::NEG_INFINITY {
        return Err(Error::UndefinedGradient);
    }
    Ok(grad)
}

// ── raw kernels (shared with the numerical maximizer) ───────────────────────

/// Log-likelihood at raw parameter values; feasibility is the caller's job,
/// but nonpositive means are handled by the zero-mean conventions.
pub(crate) fn loglik_raw(a: f64, b: f64, v: f64, theta: f64, sample: &FringeSample) -> f64 {
    let mut ll = 0.0;
    for ((&no, &nh), &d) in sample
        .counts_o()
        .iter()
        .zip(sample.counts_h())
        .zip(sample.grid().shifts())
    {
        let m = v * (theta + d).cos();
        ll += term(no, (a + m).max(0.0)) + term(nh, (b - m).max(0.0));
        if ll == f64::NEG_INFINITY {
            return ll;
        }
    }
    ll
}

#[inline]
fn term(n: u64, mean: f64) -> f64 {
    if n == 0 {
        -mean
    } else if mean <= 0.0 {
        f64::NEG_INFINITY
    } else {
        n as f64 * mean.ln() - mean
    }
}

/// Log-likelihood and its gradient in `(a, b, v, theta)`.  When the value is
/// `-inf` the gradient slot is unusable.
pub(crate) fn loglik_grad_raw(
    a: f64,
    b: f64,
    v: f64,
    theta: f64,
    sample: &FringeSample,
) -> (f64, [f64; 4]) {
    let mut ll = 0.0;
    let mut ga = 0.0;
    let mut gb = 0.0;
    let mut gv = 0.0;
    let mut gt = 0.0;
    for ((&no, &nh), &d) in sample
        .counts_o()
        .iter()
        .zip(sample.counts_h())
        .zip(sample.grid().shifts())
    {
        let (sin, cos) = (theta + d).sin_cos();
        let mo = (a + v * cos).max(0.0);
        let mh = (b - v * cos).max(0.0);
        let (lo, ro) = term_ratio(no, mo);
        let (lh, rh) = term_ratio(nh, mh);
        if lo == f64::NEG_INFINITY || lh == f64::NEG_INFINITY {
            return (f64::NEG_INFINITY, [0.0; 4]);
        }
        ll += lo + lh;
        ga += ro - 1.0;
        gb += rh - 1.0;
        gv += cos * ((ro - 1.0) - (rh - 1.0));
        gt += v * sin * ((rh - 1.0) - (ro - 1.0));
    }
    (ll, [ga, gb, gv, gt])
}

/// Term value plus the count/mean ratio used by every gradient component.
#[inline]
fn term_ratio(n: u64, mean: f64) -> (f64, f64) {
    if n == 0 {
        (-mean, 0.0)
    } else if mean <= 0.0 {
        (f64::NEG_INFINITY, 0.0)
    } else {
        let nf = n as f64;
        (nf * mean.ln() - mean, nf / mean)
    }
}

/// Log-likelihood in Cartesian fringe coordinates `(a, b, u, w)` with
/// `u = v * cos(theta)` and `w = v * sin(theta)`.  Every position mean
/// `a + u * cos(delta_j) - w * sin(delta_j)` is linear in these, so the
/// log-likelihood is concave.
pub(crate) fn loglik_cart(a: f64, b: f64, u: f64, w: f64, sample: &FringeSample) -> f64 {
    let mut ll = 0.0;
    for ((&no, &nh), &d) in sample
        .counts_o()
        .iter()
        .zip(sample.counts_h())
        .zip(sample.grid().shifts())
    {
        let (s, c) = d.sin_cos();
        let m = u * c - w * s;
        ll += term(no, (a + m).max(0.0)) + term(nh, (b - m).max(0.0));
        if ll == f64::NEG_INFINITY {
            return ll;
        }
    }
    ll
}

/// Value and gradient of [`loglik_cart`] in `(a, b, u, w)`.
pub(crate) fn loglik_grad_cart(
    a: f64,
    b: f64,
    u: f64,
    w: f64,
    sample: &FringeSample,
) -> (f64, [f64; 4]) {
    let mut ll = 0.0;
    let mut ga = 0.0;
    let mut gb = 0.0;
    let mut gu = 0.0;
    let mut gw = 0.0;
    for ((&no, &nh), &d) in sample
        .counts_o()
        .iter()
        .zip(sample.counts_h())
        .zip(sample.grid().shifts())
    {
        let (s, c) = d.sin_cos();
        let m = u * c - w * s;
        let (lo, ro) = term_ratio(no, (a + m).max(0.0));
        let (lh, rh) = term_ratio(nh, (b - m).max(0.0));
        if lo == f64::NEG_INFINITY || lh == f64::NEG_INFINITY {
            return (f64::NEG_INFINITY, [0.0; 4]);
        }
        ll += lo + lh;
        let diff = (ro - 1.0) - (rh - 1.0);
        ga += ro - 1.0;
        gb += rh - 1.0;
        gu += c * diff;
        gw -= s * diff;
    }
    (ll, [ga, gb, gu, gw])
}

/// Log-likelihood in the nuisance parameters at a frozen phase, using a
/// precomputed `cos(theta + delta_j)` table.
pub(crate) fn loglik_fixed_phase(a: f64, b: f64, v: f64, cos: &[f64], sample: &FringeSample) -> f64 {
    let mut ll = 0.0;
    for ((&no, &nh), &c) in sample
        .counts_o()
        .iter()
        .zip(sample.counts_h())
        .zip(cos)
    {
        let m = v * c;
        ll += term(no, (a + m).max(0.0)) + term(nh, (b - m).max(0.0));
        if ll == f64::NEG_INFINITY {
            return ll;
        }
    }
    ll
}

/// Value and nuisance gradient `(d/da, d/db, d/dv)` at a frozen phase.
pub(crate) fn loglik_grad_fixed_phase(
    a: f64,
    b: f64,
    v: f64,
    cos: &[f64],
    sample: &FringeSample,
) -> (f64, [f64; 3]) {
    let mut ll = 0.0;
    let mut ga = 0.0;
    let mut gb = 0.0;
    let mut gv = 0.0;
    for ((&no, &nh), &c) in sample
        .counts_o()
        .iter()
        .zip(sample.counts_h())
        .zip(cos)
    {
        let m = v * c;
        let (lo, ro) = term_ratio(no, (a + m).max(0.0));
        let (lh, rh) = term_ratio(nh, (b - m).max(0.0));
        if lo == f64::NEG_INFINITY || lh == f64::NEG_INFINITY {
            return (f64::NEG_INFINITY, [0.0; 3]);
        }
        ll += lo + lh;
        ga += ro - 1.0;
        gb += rh - 1.0;
        gv += c * ((ro - 1.0) - (rh - 1.0));
    }
    (ll, [ga, gb, gv])
}
