//! Monte-Carlo comparison of the two fringe estimators.
//!
//! An estimate scores a hit when its phase lies within a circular window
//! centered on the truth (window width is the full arc, so a hit means
//! `circular_distance <= width / 2`).  Uninformative estimates are credited
//! with the uniform guessing probability `width / 2*pi` in frequencies but
//! never count as hits in integer scores.  All reductions are either integer
//! counts or compensated sums, so results do not depend on schedule order.

use crate::error::{Error, Result};
use crate::estimators::{dft_estimate, poisson_maxlik, OptimizerReport};
use crate::model::{FringeSample, PhaseEstimate};
use rayon::prelude::*;
use std::f64::consts::TAU;

/// Shorter arc between two angles; always in `[0, pi]`.
pub fn circular_distance(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(TAU);
    d.min(TAU - d)
}

fn kahan<I: IntoIterator<Item = f64>>(xs: I) -> f64 {
    let mut sum = 0.0;
    let mut carry = 0.0;
    for x in xs {
        let y = x - carry;
        let t = sum + y;
        carry = (t - sum) - y;
        sum = t;
    }
    sum
}

/// Ascending grid of window widths, each in `(0, 2*pi]`.
#[derive(Debug, Clone, PartialEq)]
pub struct WindowGrid {
    widths: Vec<f64>,
}

impl WindowGrid {
    pub fn new(widths: Vec<f64>) -> Result<Self> {
        if widths.is_empty() {
            return Err(Error::EmptyInput("window grid"));
        }
        for pair in widths.windows(2) {
            if pair[1] <= pair[0] {
                return Err(Error::InvalidParams(
                    "window widths must be strictly ascending".into(),
                ));
            }
        }
        if let Some(&w) = widths.iter().find(|w| !w.is_finite() || **w <= 0.0 || **w > TAU) {
            return Err(Error::InvalidWindow(w));
        }
        Ok(Self { widths })
    }

    /// `count` equidistant widths `2*pi*k / count`, `k = 1..=count`.
    pub fn uniform(count: usize) -> Result<Self> {
        if count == 0 {
            return Err(Error::EmptyInput("window grid"));
        }
        Self::new((1..=count).map(|k| TAU * k as f64 / count as f64).collect())
    }

    /// The same grid with one more width spliced in (ignored if present).
    pub fn with_extra(mut self, width: f64) -> Result<Self> {
        if !width.is_finite() || width <= 0.0 || width > TAU {
            return Err(Error::InvalidWindow(width));
        }
        if !self.widths.contains(&width) {
            self.widths.push(width);
            self.widths.sort_by(|a, b| a.partial_cmp(b).unwrap());
        }
        Ok(self)
    }

    pub fn widths(&self) -> &[f64] {
        &self.widths
    }

    pub fn len(&self) -> usize {
        self.widths.len()
    }

    pub fn is_empty(&self) -> bool {
        self.widths.is_empty()
    }
}

/// Fraction of estimates falling inside the window, with uninformative
/// estimates credited at the guessing rate.
pub fn hit_frequency(estimates: &[PhaseEstimate], truth: f64, width: f64) -> Result<f64> {
    if estimates.is_empty() {
        return Err(Error::EmptyInput("estimate list"));
    }
    if !width.is_finite() || width <= 0.0 || width > TAU {
        return Err(Error::InvalidWindow(width));
    }
    let mut hits = 0u64;
    let mut blind = 0u64;
    for e in estimates {
        match e.phase() {
            Some(phase) => {
                if circular_distance(phase, truth) <= 0.5 * width {
                    hits += 1;
                }
            }
            None => blind += 1,
        }
    }
    Ok((hits as f64 + blind as f64 * (width / TAU)) / estimates.len() as f64)
}

/// Hit-frequency curves of both estimators over a window grid, plus their
/// difference (count-model minus Gaussian-model frequency).
#[derive(Debug, Clone, PartialEq)]
pub struct DeltaECurve {
    pub windows: WindowGrid,
    pub f_gauss: Vec<f64>,
    pub f_poisson: Vec<f64>,
    pub delta_e: Vec<f64>,
    /// Per-window ensemble scatter; present only on aggregated curves.
    pub errbar: Option<Vec<f64>>,
    /// Samples whose numerical fit did not converge.
    pub nonconverged: usize,
}

/// DFT estimates for a batch, in sample order.
pub fn dft_batch(samples: &[FringeSample]) -> Vec<PhaseEstimate> {
    samples.par_iter().map(dft_estimate).collect()
}

/// Poisson maximum-likelihood estimates for a batch, in sample order.
pub fn maxlik_batch(samples: &[FringeSample]) -> Vec<(PhaseEstimate, OptimizerReport)> {
    samples.par_iter().map(|s| poisson_maxlik(s)).collect()
}

/// Run both estimators over a batch and build the hit-frequency curves.
pub fn delta_e_curve(
    samples: &[FringeSample],
    truth: f64,
    windows: &WindowGrid,
) -> Result<DeltaECurve> {
    if samples.is_empty() {
        return Err(Error::EmptyInput("sample list"));
    }
    let gauss = dft_batch(samples);
    let fits = maxlik_batch(samples);
    let nonconverged = fits.iter().filter(|(_, r)| !r.converged).count();
    let poisson: Vec<PhaseEstimate> = fits.into_iter().map(|(e, _)| e).collect();
    delta_e_from_estimates(&gauss, &poisson, truth, windows, nonconverged)
}

/// Build the curves from precomputed per-sample estimates.
pub fn delta_e_from_estimates(
    gauss: &[PhaseEstimate],
    poisson: &[PhaseEstimate],
    truth: f64,
    windows: &WindowGrid,
    nonconverged: usize,
) -> Result<DeltaECurve> {
    if gauss.len() != poisson.len() {
        return Err(Error::DataMismatch(format!(
            "estimate lists differ in length ({} vs {})",
            gauss.len(),
            poisson.len()
        )));
    }
    let mut f_gauss = Vec::with_capacity(windows.len());
    let mut f_poisson = Vec::with_capacity(windows.len());
    let mut delta_e = Vec::with_capacity(windows.len());
    for &w in windows.widths() {
        let fg = hit_frequency(gauss, truth, w)?;
        let fp = hit_frequency(poisson, truth, w)?;
        f_gauss.push(fg);
        f_poisson.push(fp);
        delta_e.push(fp - fg);
    }
    Ok(DeltaECurve {
        windows: windows.clone(),
        f_gauss,
        f_poisson,
        delta_e,
        errbar: None,
        nonconverged,
    })
}

/// Integer hit-score difference (count-model hits minus Gaussian-model hits)
/// at a single window width; uninformative estimates never score.
pub fn score_difference(samples: &[FringeSample], truth: f64, width: f64) -> Result<i64> {
    if samples.is_empty() {
        return Err(Error::EmptyInput("sample list"));
    }
    if !width.is_finite() || width <= 0.0 || width > TAU {
        return Err(Error::InvalidWindow(width));
    }
    let gauss = dft_batch(samples);
    let fits = maxlik_batch(samples);
    let half = 0.5 * width;
    let count = |es: &mut dyn Iterator<Item = PhaseEstimate>| -> i64 {
        es.filter(|e| {
            e.phase()
                .map(|p| circular_distance(p, truth) <= half)
                .unwrap_or(false)
        })
        .count() as i64
    };
    let hits_g = count(&mut gauss.into_iter());
    let hits_p = count(&mut fits.into_iter().map(|(e, _)| e));
    Ok(hits_p - hits_g)
}

/// Average a set of per-run curves over a shared window grid.  The errbar
/// is the sample standard deviation of `delta_e` across runs.
pub fn ensemble_stats(curves: &[DeltaECurve]) -> Result<DeltaECurve> {
    let first = curves.first().ok_or(Error::EmptyInput("curve list"))?;
    if curves.iter().any(|c| c.windows != first.windows) {
        return Err(Error::WindowMismatch);
    }
    let runs = curves.len() as f64;
    let k = first.windows.len();
    let mut f_gauss = Vec::with_capacity(k);
    let mut f_poisson = Vec::with_capacity(k);
    let mut delta_e = Vec::with_capacity(k);
    let mut errbar = Vec::with_capacity(k);
    for i in 0..k {
        f_gauss.push(kahan(curves.iter().map(|c| c.f_gauss[i])) / runs);
        f_poisson.push(kahan(curves.iter().map(|c| c.f_poisson[i])) / runs);
        let mean = kahan(curves.iter().map(|c| c.delta_e[i])) / runs;
        delta_e.push(mean);
        let spread = if curves.len() > 1 {
            (kahan(curves.iter().map(|c| (c.delta_e[i] - mean).powi(2))) / (runs - 1.0)).sqrt()
        } else {
            0.0
        };
        errbar.push(spread);
    }
    Ok(DeltaECurve {
        windows: first.windows.clone(),
        f_gauss,
        f_poisson,
        delta_e,
        errbar: Some(errbar),
        nonconverged: curves.iter().map(|c| c.nonconverged).sum(),
    })
}

/// Histogram of normalized visibilities from informative estimates.
#[derive(Debug, Clone, PartialEq)]
pub struct VisibilityHistogram {
    /// `bins + 1` ascending edges spanning `[0, max]`; the top edge is
    /// inclusive.
    pub bin_edges: Vec<f64>,
    pub counts: Vec<u64>,
    /// Mean of the binned values.
    pub mean: f64,
    /// Generating normalized visibility, carried for reporting.
    pub true_value: f64,
}

/// Bin the normalized visibilities of all informative estimates.  Estimates
/// without a defined normalized visibility (zero o-beam mean) are skipped.
pub fn visibility_histogram(
    estimates: &[PhaseEstimate],
    true_value: f64,
    bins: usize,
) -> Result<VisibilityHistogram> {
    if bins == 0 {
        return Err(Error::InvalidParams("histogram needs at least one bin".into()));
    }
    let values: Vec<f64> = estimates
        .iter()
        .filter(|e| e.is_informative())
        .filter_map(|e| e.normalized_visibility())
        .collect();
    if values.is_empty() {
        return Err(Error::EmptyInput("no informative estimates to bin"));
    }
    let max = values.iter().cloned().fold(0.0_f64, f64::max);
    // All-zero visibilities still get a well-formed (if arbitrary) span.
    let hi = if max > 0.0 { max } else { 1.0 };
    let mut counts = vec![0u64; bins];
    for &v in &values {
        let idx = ((v / hi * bins as f64) as usize).min(bins - 1);
        counts[idx] += 1;
    }
    let bin_edges = (0..=bins).map(|k| hi * k as f64 / bins as f64).collect();
    let mean = kahan(values.iter().cloned()) / values.len() as f64;
    Ok(VisibilityHistogram {
        bin_edges,
        counts,
        mean,
        true_value,
    })
}
