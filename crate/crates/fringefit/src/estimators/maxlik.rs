//! Numerical maximum-likelihood fit of the Poisson fringe model.
//!
//! The fit runs in the Cartesian fringe coordinates `(mean_o, mean_h, u, w)`
//! with `u = amplitude * cos(phase)` and `w = amplitude * sin(phase)`.
//! Every position mean is linear in these, so the Poisson log-likelihood is
//! concave, and the feasible set `{mean_o >= 0, mean_h >= 0,
//! hypot(u, w) <= min(mean_o, mean_h)}` is a convex cone: a point with a
//! vanishing projected gradient is the global constrained maximum.
//!
//! The maximizer is projected gradient ascent preconditioned by the
//! diagonal of the Fisher information, with an Armijo backtracking line
//! search and the exact Euclidean projection onto the cone.  Results are
//! reported in the polar parameters `(mean_o, mean_h, amplitude, phase)`
//! with the phase reduced to `[0, 2*pi)`.

use crate::error::{Error, Result};
use crate::estimators::dft::dft_estimate;
use crate::estimators::loglik::{
    loglik_cart, loglik_fixed_phase, loglik_grad_cart, loglik_grad_fixed_phase, loglik_raw,
};
use crate::model::{FringeSample, PhaseEstimate};
use std::f64::consts::TAU;

/// Hard cap on ascent iterations per fit (all phases combined).
const MAX_ITERS: usize = 10_000;
/// Stop once both the log-likelihood gain and the parameter step fall
/// below these thresholds.
const F_TOL: f64 = 1e-10;
const X_TOL: f64 = 1e-8;
/// Number of points in the profiled phase sweep.
const SCAN_POINTS: usize = 128;
/// Armijo sufficient-increase coefficient.
const ARMIJO: f64 = 1e-4;

/// How the numerical fit was seeded.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Initializer {
    /// From the closed-form DFT estimate.
    Dft,
    /// From a coarse phase grid, used when the DFT moment vanishes.
    GridFallback,
}

/// Outcome bookkeeping for one numerical fit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimizerReport {
    /// Stopping rule met within budget and the first-order optimality
    /// (projected-gradient) residual passed its tolerance.
    pub converged: bool,
    /// Ascent iterations spent across all phases of the fit.
    pub iterations: usize,
    pub final_loglik: f64,
    pub initializer: Initializer,
}

/// Profile log-likelihood of the phase over an equidistant grid.
#[derive(Debug, Clone, PartialEq)]
pub struct LogLikCurve {
    /// Grid phases in `[0, 2*pi)`.
    pub phases: Vec<f64>,
    /// Log-likelihood maximized over the nuisance parameters at each phase.
    pub values: Vec<f64>,
}

/// Exact Euclidean projection onto
/// `{(a, b, v): a >= 0, b >= 0, 0 <= v <= min(a, b)}`.
///
/// When the amplitude cap binds, the projection couples the coordinates;
/// the three possible active sets (`v = a`, `v = b`, `v = a = b`) are all
/// closed-form, so the nearest feasible candidate is picked directly.
fn project_nuisance(p: f64, q: f64, w: f64) -> [f64; 3] {
    let a0 = p.max(0.0);
    let b0 = q.max(0.0);
    if w <= 0.0 {
        return [a0, b0, 0.0];
    }
    if w <= a0.min(b0) {
        return [a0, b0, w];
    }
    let mut best = [f64::NAN; 3];
    let mut best_d = f64::INFINITY;
    let mut consider = |a: f64, b: f64, v: f64| {
        if v <= a.min(b) * (1.0 + 1e-12) + 1e-300 {
            let d = (a - p) * (a - p) + (b - q) * (b - q) + (v - w) * (v - w);
            if d < best_d {
                best_d = d;
                best = [a, b, v];
            }
        }
    };
    let ta = (0.5 * (p + w)).max(0.0);
    consider(ta, b0, ta);
    let tb = (0.5 * (q + w)).max(0.0);
    consider(a0, tb, tb);
    let tc = ((p + q + w) / 3.0).max(0.0);
    consider(tc, tc, tc);
    let [a, b, v] = best;
    [a, b, v.min(a).min(b).max(0.0)]
}

fn project(x: [f64; 4]) -> [f64; 4] {
    let [a, b, v] = project_nuisance(x[0], x[1], x[2]);
    [a, b, v, x[3]]
}

/// Exact Euclidean projection in the Cartesian coordinates: the nearest
/// point of the cone keeps the direction of `(u, w)` and shrinks its norm,
/// so the problem reduces to the three-variable projection above.
fn project_cart(x: [f64; 4]) -> [f64; 4] {
    let r0 = x[2].hypot(x[3]);
    let [a, b, r] = project_nuisance(x[0], x[1], r0);
    if r0 > 0.0 && r > 0.0 {
        let k = r / r0;
        [a, b, x[2] * k, x[3] * k]
    } else {
        [a, b, 0.0, 0.0]
    }
}

/// Evaluation context: the concave Cartesian model, or the model at a
/// frozen phase (with its cosine table precomputed; slot 3 is inert).
enum Objective<'a> {
    Cart(&'a FringeSample),
    FixedPhase(&'a FringeSample, Vec<f64>),
}

impl Objective<'_> {
    fn value(&self, x: [f64; 4]) -> f64 {
        match self {
            Objective::Cart(s) => loglik_cart(x[0], x[1], x[2], x[3], s),
            Objective::FixedPhase(s, cos) => loglik_fixed_phase(x[0], x[1], x[2], cos, s),
        }
    }

    fn value_grad(&self, x: [f64; 4]) -> (f64, [f64; 4]) {
        match self {
            Objective::Cart(s) => loglik_grad_cart(x[0], x[1], x[2], x[3], s),
            Objective::FixedPhase(s, cos) => {
                let (f, g) = loglik_grad_fixed_phase(x[0], x[1], x[2], cos, s);
                (f, [g[0], g[1], g[2], 0.0])
            }
        }
    }

    fn project(&self, x: [f64; 4]) -> [f64; 4] {
        match self {
            Objective::Cart(_) => project_cart(x),
            Objective::FixedPhase(..) => project(x),
        }
    }

    /// Diagonal of the expected (Fisher) information at `x`.  Used to
    /// precondition the gradient, which keeps the step count low on
    /// high-count samples where the raw gradient is badly scaled.
    fn metric(&self, x: [f64; 4]) -> [f64; 4] {
        let mut fisher = [0.0_f64; 4];
        match self {
            Objective::Cart(sample) => {
                let [a, b, u, w] = x;
                for &shift in sample.grid().shifts() {
                    let (s, c) = shift.sin_cos();
                    let m = u * c - w * s;
                    let wo = 1.0 / (a + m).max(1e-12);
                    let wh = 1.0 / (b - m).max(1e-12);
                    fisher[0] += wo;
                    fisher[1] += wh;
                    fisher[2] += c * c * (wo + wh);
                    fisher[3] += s * s * (wo + wh);
                }
            }
            Objective::FixedPhase(sample, cos) => {
                let [a, b, v, _] = x;
                for &c in cos.iter().take(sample.grid().count()) {
                    let wo = 1.0 / (a + v * c).max(1e-12);
                    let wh = 1.0 / (b - v * c).max(1e-12);
                    fisher[0] += wo;
                    fisher[1] += wh;
                    fisher[2] += c * c * (wo + wh);
                }
                // The phase is frozen; its gradient entry is zero anyway.
                fisher[3] = 1.0;
            }
        }
        let top = fisher.iter().fold(0.0_f64, |m, &c| m.max(c));
        let floor = (1e-12 * top).max(1e-300);
        fisher.map(|f| f.max(floor))
    }
}

struct Ascent {
    x: [f64; 4],
    loglik: f64,
    iterations: usize,
    /// Both stopping thresholds were met (or no feasible ascent step exists).
    stopped: bool,
}

/// Smallest trial step worth attempting before a direction is written off.
const STEP_FLOOR: f64 = 1e-18;

/// One Armijo trial along the projected arc `x + step * d`.  Returns the
/// accepted point and value, or `None` when the trial fails the test.
fn armijo_trial(
    obj: &Objective,
    x: [f64; 4],
    f: f64,
    g: [f64; 4],
    d: [f64; 4],
    step: f64,
) -> Option<([f64; 4], f64)> {
    let y = obj.project([
        x[0] + step * d[0],
        x[1] + step * d[1],
        x[2] + step * d[2],
        x[3] + step * d[3],
    ]);
    let fy = obj.value(y);
    let dx = [y[0] - x[0], y[1] - x[1], y[2] - x[2], y[3] - x[3]];
    let gdx: f64 = g.iter().zip(dx).map(|(gi, di)| gi * di).sum();
    if fy.is_finite() && fy >= f && fy >= f + ARMIJO * gdx {
        Some((y, fy))
    } else {
        None
    }
}

/// Projected gradient ascent with two trial directions per iteration: the
/// Fisher-preconditioned gradient (fast on badly scaled high-count samples)
/// and, when that trial fails, the plain gradient.  The plain arc under the
/// exact Euclidean projection always makes first-order progress away from a
/// constrained maximum, which keeps the preconditioned direction from
/// stalling where the constraint cone couples the coordinates.
fn ascend(obj: &Objective, x0: [f64; 4], f_tol: f64, x_tol: f64, max_iters: usize) -> Ascent {
    let mut x = obj.project(x0);
    let (mut f, mut g) = obj.value_grad(x);
    debug_assert!(f > f64::NEG_INFINITY, "ascent must start at a finite point");
    let mut metric = obj.metric(x);
    let mut step_pre = 1.0_f64;
    let mut step_raw = 1.0_f64;
    let mut iterations = 0;
    let mut stopped = false;
    while iterations < max_iters {
        iterations += 1;
        let mut accepted = None;
        if step_pre >= STEP_FLOOR {
            let d = [
                g[0] / metric[0],
                g[1] / metric[1],
                g[2] / metric[2],
                g[3] / metric[3],
            ];
            match armijo_trial(obj, x, f, g, d, step_pre) {
                Some(hit) => {
                    accepted = Some(hit);
                    step_pre = (step_pre * 2.0).min(1e6);
                }
                None => step_pre *= 0.25,
            }
        }
        if accepted.is_none() && step_raw >= STEP_FLOOR {
            match armijo_trial(obj, x, f, g, g, step_raw) {
                Some(hit) => {
                    accepted = Some(hit);
                    step_raw = (step_raw * 2.0).min(1e6);
                    // The terrain may ease after the plain step digs out of
                    // a corner, so give the fast direction another chance.
                    step_pre = step_pre.max(1e-6);
                }
                None => step_raw *= 0.25,
            }
        }
        match accepted {
            Some((y, fy)) => {
                let df = fy - f;
                let dxn = (0..4).fold(0.0_f64, |m, k| m.max((y[k] - x[k]).abs()));
                x = y;
                let (nf, ng) = obj.value_grad(x);
                f = nf;
                g = ng;
                metric = obj.metric(x);
                if df < f_tol && dxn < x_tol {
                    stopped = true;
                    break;
                }
            }
            None => {
                if step_pre < STEP_FLOOR && step_raw < STEP_FLOOR {
                    // No feasible improving step left at this point.
                    stopped = true;
                    break;
                }
            }
        }
    }
    Ascent {
        x,
        loglik: f,
        iterations,
        stopped,
    }
}

/// First-order optimality residual in the Cartesian coordinates: the length
/// (per unit step) of the projected gradient displacement.  By concavity it
/// is zero exactly at the global constrained maximum.
fn optimality_residual(sample: &FringeSample, z: [f64; 4]) -> f64 {
    let (_, g) = loglik_grad_cart(z[0], z[1], z[2], z[3], sample);
    let gnorm = g.iter().fold(0.0_f64, |m, c| m.max(c.abs()));
    let alpha = 1e-7 / (1.0 + gnorm);
    let y = project_cart([
        z[0] + alpha * g[0],
        z[1] + alpha * g[1],
        z[2] + alpha * g[2],
        z[3] + alpha * g[3],
    ]);
    let dxn = (0..4).fold(0.0_f64, |m, k| m.max((y[k] - z[k]).abs()));
    dxn / alpha
}

fn optimality_tol(sample: &FringeSample) -> f64 {
    1e-5 * (1.0 + sample.total_counts() as f64)
}

/// Sweep an equidistant phase grid, maximizing over the nuisance parameters
/// at each point (warm-starting each solve from its neighbor).  Returns the
/// profiled values, the per-point nuisance solutions, and iterations spent.
fn sweep_profile(
    sample: &FringeSample,
    phases: &[f64],
    start: [f64; 3],
    f_tol: f64,
    x_tol: f64,
) -> (Vec<f64>, Vec<[f64; 3]>, usize) {
    let mut values = Vec::with_capacity(phases.len());
    let mut args = Vec::with_capacity(phases.len());
    let mut warm = start;
    let mut iterations = 0;
    for &theta in phases {
        let cos: Vec<f64> = sample
            .grid()
            .shifts()
            .iter()
            .map(|d| (theta + d).cos())
            .collect();
        let obj = Objective::FixedPhase(sample, cos);
        let mut x0 = [warm[0], warm[1], warm[2], theta];
        if !obj.value(x0).is_finite() {
            // A boundary warm start can be infeasible for the new phase.
            x0[2] *= 0.5;
            if !obj.value(x0).is_finite() {
                x0[2] = 0.0;
            }
        }
        let res = ascend(&obj, x0, f_tol, x_tol, 2_000);
        iterations += res.iterations;
        warm = [res.x[0], res.x[1], res.x[2]];
        values.push(res.loglik);
        args.push(warm);
    }
    (values, args, iterations)
}

/// Constrained maximum-likelihood fit of the Poisson fringe model.
///
/// Seeded from the DFT estimate (fringe amplitude pulled just inside the
/// feasible region when it sits on the boundary); when the DFT moment
/// vanishes, a coarse phase grid with a trial amplitude picks the seed
/// instead.  The ascent runs in the Cartesian coordinates, where the
/// log-likelihood is concave, so the stationary point it reaches is the
/// global constrained maximum; the fitted log-likelihood never falls below
/// the seed value.  A fitted amplitude of exactly zero leaves the phase
/// undefined and the estimate uninformative.
pub fn poisson_maxlik(sample: &FringeSample) -> (PhaseEstimate, OptimizerReport) {
    let n = sample.grid().count() as f64;
    let mean_o = sample.counts_o().iter().sum::<u64>() as f64 / n;
    let mean_h = sample.counts_h().iter().sum::<u64>() as f64 / n;
    let min_mean = mean_o.min(mean_h);

    if sample.total_counts() == 0 {
        // Likelihood is maximized by switching everything off.
        let report = OptimizerReport {
            converged: true,
            iterations: 0,
            final_loglik: 0.0,
            initializer: Initializer::GridFallback,
        };
        return (PhaseEstimate::uninformative(0.0, 0.0, 0.0), report);
    }
    if min_mean <= 0.0 {
        // One beam never fired: the amplitude cap pins the fringe to zero
        // and the phase carries no information.
        let ll = loglik_raw(mean_o, mean_h, 0.0, 0.0, sample);
        let report = OptimizerReport {
            converged: true,
            iterations: 0,
            final_loglik: ll,
            initializer: Initializer::Dft,
        };
        return (PhaseEstimate::uninformative(mean_o, mean_h, 0.0), report);
    }

    let dft = dft_estimate(sample);
    let (z0, initializer) = match dft.phase() {
        Some(phase) => {
            let v0 = dft.amplitude().min((1.0 - 1e-9) * min_mean);
            let (s0, c0) = phase.sin_cos();
            ([mean_o, mean_h, v0 * c0, v0 * s0], Initializer::Dft)
        }
        None => {
            let v0 = 0.5 * min_mean;
            let mut best = (f64::NEG_INFINITY, 0.0);
            for k in 0..SCAN_POINTS {
                let theta = TAU * k as f64 / SCAN_POINTS as f64;
                let ll = loglik_raw(mean_o, mean_h, v0, theta, sample);
                if ll > best.0 {
                    best = (ll, theta);
                }
            }
            let (s0, c0) = best.1.sin_cos();
            ([mean_o, mean_h, v0 * c0, v0 * s0], Initializer::GridFallback)
        }
    };

    let obj = Objective::Cart(sample);
    let mut best = ascend(&obj, z0, F_TOL, X_TOL, MAX_ITERS);
    let mut iterations = best.iterations;

    // The stopping rule can trip on a stretch of tiny accepted steps before
    // first-order optimality holds; restarting resets the adaptive step.
    let mut residual_ok = optimality_residual(sample, best.x) <= optimality_tol(sample);
    for _ in 0..3 {
        if residual_ok || iterations >= MAX_ITERS {
            break;
        }
        let again = ascend(&obj, best.x, F_TOL, X_TOL, MAX_ITERS - iterations);
        iterations += again.iterations;
        best = again;
        residual_ok = optimality_residual(sample, best.x) <= optimality_tol(sample);
    }

    let [a, b, u, w] = best.x;
    // `hypot` can land one ulp above the cap on rim solutions; the output
    // contract is exact feasibility.
    let v = u.hypot(w).min(a).min(b);
    // Report the log-likelihood at the estimate as published, so it matches
    // a recomputation from the rounded-trip parameters bit for bit.
    let (estimate, final_loglik) = if v > 0.0 {
        let theta = w.atan2(u).rem_euclid(TAU);
        let ll = loglik_raw(a, b, v, theta, sample);
        (PhaseEstimate::informative(theta, a, b, v), ll)
    } else {
        (PhaseEstimate::uninformative(a, b, 0.0), loglik_raw(a, b, 0.0, 0.0, sample))
    };
    let report = OptimizerReport {
        converged: best.stopped && residual_ok && iterations <= MAX_ITERS,
        iterations,
        final_loglik,
        initializer,
    };
    (estimate, report)
}

/// Profile log-likelihood of the phase on `grid_size` equidistant points of
/// `[0, 2*pi)`: at each point the nuisance parameters are maximized out.
pub fn profile_phase_loglik(sample: &FringeSample, grid_size: usize) -> Result<LogLikCurve> {
    if grid_size == 0 {
        return Err(Error::InvalidGrid(0));
    }
    let phases: Vec<f64> = (0..grid_size)
        .map(|k| TAU * k as f64 / grid_size as f64)
        .collect();
    let n = sample.grid().count() as f64;
    let mean_o = sample.counts_o().iter().sum::<u64>() as f64 / n;
    let mean_h = sample.counts_h().iter().sum::<u64>() as f64 / n;
    let min_mean = mean_o.min(mean_h);
    if min_mean <= 0.0 {
        // Amplitude is pinned at zero, so the phase drops out entirely.
        let flat = loglik_raw(mean_o, mean_h, 0.0, 0.0, sample);
        return Ok(LogLikCurve {
            values: vec![flat; grid_size],
            phases,
        });
    }
    let start = [mean_o, mean_h, 0.5 * min_mean];
    let (values, _, _) = sweep_profile(sample, &phases, start, 1e-12, 1e-9);
    Ok(LogLikCurve { phases, values })
}
