//! Interferometer forward models and the data/estimate types shared by the
//! estimators, the simulator, and the comparison harness.
//!
//! Two measurement geometries are covered:
//!
//! * a four-port setup whose channels 3..6 split one fringe into two
//!   phase quadratures (channels 3/4 carry the cosine, 5/6 the sine), and
//! * a two-beam phase-shifter scan where the o- and h-beam intensities
//!   trace complementary fringes over an equidistant grid of aux shifts.
//!
//! All phases live on the circle and are stored reduced to `[0, 2*pi)`.

use crate::error::{Error, Result};
use std::f64::consts::TAU;

/// Reduce an angle to the canonical interval `[0, 2*pi)`.
#[inline]
pub fn wrap_angle(x: f64) -> f64 {
    let w = x.rem_euclid(TAU);
    // rem_euclid can round up to exactly 2*pi for tiny negative inputs.
    if w >= TAU {
        0.0
    } else {
        w
    }
}

// ── four-port geometry ──────────────────────────────────────────────────────

/// Parameters of the four-port measurement: mean total intensity per
/// exposure `N`, fringe visibility `V`, interferometer phase `theta`, and
/// the additive read-out noise level of the continuous detection model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FourPortParams {
    total_intensity: f64,
    visibility: f64,
    phase: f64,
    noise_sigma: f64,
}

impl FourPortParams {
    /// Validates `total_intensity >= 0`, `0 <= visibility <= 1`,
    /// `noise_sigma > 0`; the phase is reduced mod `2*pi`.
    pub fn new(
        total_intensity: f64,
        visibility: f64,
        phase: f64,
        noise_sigma: f64,
    ) -> Result<Self> {
        if !total_intensity.is_finite() || total_intensity < 0.0 {
            return Err(Error::InvalidParams(format!(
                "total intensity must be finite and >= 0, got {total_intensity}"
            )));
        }
        if !visibility.is_finite() || !(0.0..=1.0).contains(&visibility) {
            return Err(Error::InvalidParams(format!(
                "visibility must lie in [0, 1], got {visibility}"
            )));
        }
        if !phase.is_finite() {
            return Err(Error::InvalidParams(format!("phase must be finite, got {phase}")));
        }
        if !noise_sigma.is_finite() || noise_sigma <= 0.0 {
            return Err(Error::InvalidParams(format!(
                "noise sigma must be finite and > 0, got {noise_sigma}"
            )));
        }
        Ok(Self {
            total_intensity,
            visibility,
            phase: wrap_angle(phase),
            noise_sigma,
        })
    }

    pub fn total_intensity(&self) -> f64 {
        self.total_intensity
    }

    pub fn visibility(&self) -> f64 {
        self.visibility
    }

    pub fn phase(&self) -> f64 {
        self.phase
    }

    pub fn noise_sigma(&self) -> f64 {
        self.noise_sigma
    }
}

/// Mean intensities of channels 3..6 for the given four-port parameters.
///
/// Channels 3/4 read the cosine quadrature and channels 5/6 the sine
/// quadrature, with the minus sign on channels 3 and 5:
/// `m3 = N/2 (1 - V cos theta)`, `m4 = N/2 (1 + V cos theta)`,
/// `m5 = N/2 (1 - V sin theta)`, `m6 = N/2 (1 + V sin theta)`.
/// The four means always sum to `2 N` and are each nonnegative.
pub fn mean_four_port(params: &FourPortParams) -> [f64; 4] {
    let half = 0.5 * params.total_intensity;
    let c = params.visibility * params.phase.cos();
    let s = params.visibility * params.phase.sin();
    [
        half * (1.0 - c),
        half * (1.0 + c),
        half * (1.0 - s),
        half * (1.0 + s),
    ]
}

/// One exposure of the four-port detectors, channels 3..6 in order.
///
/// Continuous samples come from the additive-noise read-out model and may
/// be negative; discrete samples are particle counts.
#[derive(Debug, Clone, PartialEq)]
pub enum FourPortSample {
    Continuous([f64; 4]),
    Discrete([u64; 4]),
}

impl FourPortSample {
    /// Channel values as reals, regardless of detection mode.
    pub fn values(&self) -> [f64; 4] {
        match self {
            FourPortSample::Continuous(v) => *v,
            FourPortSample::Discrete(n) => [n[0] as f64, n[1] as f64, n[2] as f64, n[3] as f64],
        }
    }

    /// Channel counts, if this is a discrete sample.
    pub fn counts(&self) -> Option<[u64; 4]> {
        match self {
            FourPortSample::Continuous(_) => None,
            FourPortSample::Discrete(n) => Some(*n),
        }
    }
}

// ── two-beam phase-shifter scan ─────────────────────────────────────────────

/// Parameters of the two-beam fringe scan: per-position mean intensities
/// `I_o`, `I_h` of the two exit beams, the shared fringe amplitude `I_v`,
/// and the interferometer phase.  The o-beam oscillates as
/// `I_o + I_v cos(theta + delta_j)` and the h-beam in counterphase, so the
/// position-wise sum of the two beams is constant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SetupParams {
    mean_o: f64,
    mean_h: f64,
    amplitude: f64,
    phase: f64,
}

impl SetupParams {
    /// Validates nonnegative means and `0 <= amplitude <= min(mean_o, mean_h)`
    /// (so no position can have a negative mean); reduces the phase mod `2*pi`.
    pub fn new(mean_o: f64, mean_h: f64, amplitude: f64, phase: f64) -> Result<Self> {
        if !mean_o.is_finite() || mean_o < 0.0 || !mean_h.is_finite() || mean_h < 0.0 {
            return Err(Error::InvalidParams(format!(
                "beam means must be finite and >= 0, got ({mean_o}, {mean_h})"
            )));
        }
        if !amplitude.is_finite() || amplitude < 0.0 || amplitude > mean_o.min(mean_h) {
            return Err(Error::InvalidParams(format!(
                "fringe amplitude must lie in [0, min of beam means], got {amplitude} \
                 with means ({mean_o}, {mean_h})"
            )));
        }
        if !phase.is_finite() {
            return Err(Error::InvalidParams(format!("phase must be finite, got {phase}")));
        }
        Ok(Self {
            mean_o,
            mean_h,
            amplitude,
            phase: wrap_angle(phase),
        })
    }

    pub fn mean_o(&self) -> f64 {
        self.mean_o
    }

    pub fn mean_h(&self) -> f64 {
        self.mean_h
    }

    pub fn amplitude(&self) -> f64 {
        self.amplitude
    }

    pub fn phase(&self) -> f64 {
        self.phase
    }
}

/// Grid of auxiliary phase-shifter positions.
#[derive(Debug, Clone, PartialEq)]
pub struct AuxShiftGrid {
    shifts: Vec<f64>,
}

impl AuxShiftGrid {
    /// The standard scan grid: `count` equidistant shifts `2*pi*j / count`.
    pub fn equidistant(count: usize) -> Result<Self> {
        if count < 2 {
            return Err(Error::InvalidGrid(count));
        }
        let shifts = (0..count)
            .map(|j| TAU * j as f64 / count as f64)
            .collect();
        Ok(Self { shifts })
    }

    /// A grid with explicit shift values.  The scan pipeline only ever uses
    /// equidistant grids; this exists for the two-position quadrature
    /// arrangement `{0, pi/2}` that maps a four-port exposure onto a fringe.
    pub fn from_shifts(shifts: Vec<f64>) -> Result<Self> {
        if shifts.len() < 2 {
            return Err(Error::InvalidGrid(shifts.len()));
        }
        if shifts.iter().any(|s| !s.is_finite()) {
            return Err(Error::InvalidParams("shift values must be finite".into()));
        }
        Ok(Self { shifts })
    }

    pub fn count(&self) -> usize {
        self.shifts.len()
    }

    pub fn shifts(&self) -> &[f64] {
        &self.shifts
    }
}

/// Mean o- and h-beam intensities at every grid position.
pub fn mean_two_port(params: &SetupParams, grid: &AuxShiftGrid) -> (Vec<f64>, Vec<f64>) {
    let mut mean_o = Vec::with_capacity(grid.count());
    let mut mean_h = Vec::with_capacity(grid.count());
    for &d in grid.shifts() {
        let m = params.amplitude * (params.phase + d).cos();
        mean_o.push(params.mean_o + m);
        mean_h.push(params.mean_h - m);
    }
    (mean_o, mean_h)
}

/// Counted fringe scan: one count per beam per grid position.
#[derive(Debug, Clone, PartialEq)]
pub struct FringeSample {
    counts_o: Vec<u64>,
    counts_h: Vec<u64>,
    grid: AuxShiftGrid,
}

impl FringeSample {
    /// Both count lists must have exactly one entry per grid position.
    pub fn new(counts_o: Vec<u64>, counts_h: Vec<u64>, grid: AuxShiftGrid) -> Result<Self> {
        if counts_o.len() != grid.count() || counts_h.len() != grid.count() {
            return Err(Error::DataMismatch(format!(
                "count lists ({}, {}) do not match grid size {}",
                counts_o.len(),
                counts_h.len(),
                grid.count()
            )));
        }
        Ok(Self {
            counts_o,
            counts_h,
            grid,
        })
    }

    pub fn counts_o(&self) -> &[u64] {
        &self.counts_o
    }

    pub fn counts_h(&self) -> &[u64] {
        &self.counts_h
    }

    pub fn grid(&self) -> &AuxShiftGrid {
        &self.grid
    }

    /// Total number of detected particles in both beams.
    pub fn total_counts(&self) -> u64 {
        self.counts_o.iter().sum::<u64>() + self.counts_h.iter().sum::<u64>()
    }
}

// ── estimates ───────────────────────────────────────────────────────────────

/// Whether an estimator could extract a phase from the sample at all.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EstimateStatus {
    Informative,
    Uninformative,
}

/// Result of fitting the two-beam fringe model to one scan.
///
/// `phase` is present exactly when the estimate is informative.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseEstimate {
    phase: Option<f64>,
    mean_o: f64,
    mean_h: f64,
    amplitude: f64,
    status: EstimateStatus,
}

impl PhaseEstimate {
    pub fn informative(phase: f64, mean_o: f64, mean_h: f64, amplitude: f64) -> Self {
        Self {
            phase: Some(wrap_angle(phase)),
            mean_o,
            mean_h,
            amplitude,
            status: EstimateStatus::Informative,
        }
    }

    pub fn uninformative(mean_o: f64, mean_h: f64, amplitude: f64) -> Self {
        Self {
            phase: None,
            mean_o,
            mean_h,
            amplitude,
            status: EstimateStatus::Uninformative,
        }
    }

    pub fn phase(&self) -> Option<f64> {
        self.phase
    }

    pub fn mean_o(&self) -> f64 {
        self.mean_o
    }

    pub fn mean_h(&self) -> f64 {
        self.mean_h
    }

    pub fn amplitude(&self) -> f64 {
        self.amplitude
    }

    pub fn status(&self) -> EstimateStatus {
        self.status
    }

    pub fn is_informative(&self) -> bool {
        self.status == EstimateStatus::Informative
    }

    /// Fringe amplitude relative to the o-beam mean, when defined.
    pub fn normalized_visibility(&self) -> Option<f64> {
        if self.mean_o > 0.0 {
            Some(self.amplitude / self.mean_o)
        } else {
            None
        }
    }
}

/// Result of fitting the four-port model to one exposure.
#[derive(Debug, Clone, PartialEq)]
pub struct FourPortEstimate {
    phase: Option<f64>,
    total_intensity: f64,
    visibility: f64,
    status: EstimateStatus,
}

impl FourPortEstimate {
    pub fn informative(phase: f64, total_intensity: f64, visibility: f64) -> Self {
        Self {
            phase: Some(wrap_angle(phase)),
            total_intensity,
            visibility,
            status: EstimateStatus::Informative,
        }
    }

    pub fn uninformative(total_intensity: f64, visibility: f64) -> Self {
        Self {
            phase: None,
            total_intensity,
            visibility,
            status: EstimateStatus::Uninformative,
        }
    }

    pub fn phase(&self) -> Option<f64> {
        self.phase
    }

    pub fn total_intensity(&self) -> f64 {
        self.total_intensity
    }

    pub fn visibility(&self) -> f64 {
        self.visibility
    }

    pub fn status(&self) -> EstimateStatus {
        self.status
    }

    pub fn is_informative(&self) -> bool {
        self.status == EstimateStatus::Informative
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn assert_close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "{a} vs {b} (tol {tol})");
    }

    #[test]
    fn equidistant_grid_values() {
        let g = AuxShiftGrid::equidistant(4).unwrap();
        let want = [0.0, FRAC_PI_2, PI, 3.0 * FRAC_PI_2];
        for (got, want) in g.shifts().iter().zip(want) {
            assert_close(*got, want, 1e-15);
        }
        assert_eq!(g.count(), 4);
    }

    #[test]
    fn grid_rejects_fewer_than_two_positions() {
        assert!(matches!(AuxShiftGrid::equidistant(1), Err(Error::InvalidGrid(1))));
        assert!(matches!(AuxShiftGrid::equidistant(0), Err(Error::InvalidGrid(0))));
        assert!(AuxShiftGrid::from_shifts(vec![0.0]).is_err());
    }

    #[test]
    fn four_port_means_at_cosine_extreme() {
        let p = FourPortParams::new(4.0, 1.0, 0.0, 1.0).unwrap();
        let m = mean_four_port(&p);
        assert_close(m[0], 0.0, 1e-12);
        assert_close(m[1], 4.0, 1e-12);
        assert_close(m[2], 2.0, 1e-12);
        assert_close(m[3], 2.0, 1e-12);
    }

    #[test]
    fn four_port_means_at_sine_extreme() {
        let p = FourPortParams::new(2.0, 1.0, FRAC_PI_2, 1.0).unwrap();
        let m = mean_four_port(&p);
        assert_close(m[0], 1.0, 1e-12);
        assert_close(m[1], 1.0, 1e-12);
        assert_close(m[2], 0.0, 1e-12);
        assert_close(m[3], 2.0, 1e-12);
    }

    #[test]
    fn four_port_params_are_validated() {
        assert!(FourPortParams::new(-1.0, 0.5, 0.0, 1.0).is_err());
        assert!(FourPortParams::new(1.0, 1.5, 0.0, 1.0).is_err());
        assert!(FourPortParams::new(1.0, 0.5, 0.0, 0.0).is_err());
        assert!(FourPortParams::new(1.0, 0.5, f64::NAN, 1.0).is_err());
    }

    #[test]
    fn two_port_means_trace_complementary_fringes() {
        let p = SetupParams::new(2.21, 6.33, 1.03, 4.83).unwrap();
        let g = AuxShiftGrid::equidistant(8).unwrap();
        let (mo, mh) = mean_two_port(&p, &g);
        for (&o, &h) in mo.iter().zip(&mh) {
            assert!((1.18..=3.24).contains(&o), "o mean {o} outside fringe range");
            assert!((5.30..=7.36).contains(&h), "h mean {h} outside fringe range");
            // h-beam modulation mirrors the o-beam exactly.
            assert_close(o - 2.21, -(h - 6.33), 1e-12);
        }
        // Over a full equidistant scan the modulation averages out.
        let avg_o = mo.iter().sum::<f64>() / mo.len() as f64;
        assert_close(avg_o, 2.21, 1e-12);
        // The scan reaches close to the fringe extremes somewhere.
        let peak = mo
            .iter()
            .map(|o| (o - 2.21).abs())
            .fold(0.0_f64, f64::max);
        assert!(peak > 0.9 && peak <= 1.03 + 1e-12, "peak modulation {peak}");
    }

    #[test]
    fn setup_params_amplitude_bound() {
        assert!(SetupParams::new(2.0, 1.0, 1.5, 0.0).is_err());
        assert!(SetupParams::new(2.0, 1.0, 1.0, 0.0).is_ok());
        assert!(SetupParams::new(2.0, 1.0, -0.1, 0.0).is_err());
        assert!(SetupParams::new(0.0, 0.0, 0.0, 0.0).is_ok());
    }

    #[test]
    fn phases_are_reduced_to_canonical_interval() {
        let p = SetupParams::new(1.0, 1.0, 0.5, 4.83 + TAU).unwrap();
        assert_close(p.phase(), 4.83, 1e-12);
        let q = FourPortParams::new(1.0, 0.5, -0.5, 1.0).unwrap();
        assert_close(q.phase(), TAU - 0.5, 1e-12);
        assert_eq!(wrap_angle(-1e-300), 0.0);
        assert_eq!(wrap_angle(0.0), 0.0);
    }

    #[test]
    fn fringe_sample_checks_lengths() {
        let g = AuxShiftGrid::equidistant(4).unwrap();
        assert!(FringeSample::new(vec![1, 2, 3], vec![1, 2, 3, 4], g.clone()).is_err());
        let s = FringeSample::new(vec![1, 2, 3, 4], vec![0, 0, 1, 1], g).unwrap();
        assert_eq!(s.total_counts(), 12);
    }

    #[test]
    fn normalized_visibility_needs_positive_o_mean() {
        let e = PhaseEstimate::informative(1.0, 2.0, 4.0, 0.5);
        assert_close(e.normalized_visibility().unwrap(), 0.25, 1e-15);
        let z = PhaseEstimate::informative(1.0, 0.0, 4.0, 0.0);
        assert!(z.normalized_visibility().is_none());
    }

    proptest! {
        #[test]
        fn four_port_means_sum_to_twice_total(
            n in 0.0..50.0f64,
            v in 0.0..=1.0f64,
            th in -10.0..10.0f64,
        ) {
            let p = FourPortParams::new(n, v, th, 1.0).unwrap();
            let m = mean_four_port(&p);
            prop_assert!(m.iter().all(|&x| x >= -1e-12));
            let sum: f64 = m.iter().sum();
            prop_assert!((sum - 2.0 * n).abs() <= 1e-9f64.max(2.0 * n * 1e-12));
        }

        #[test]
        fn two_port_means_stay_nonnegative_and_periodic(
            io in 0.0..20.0f64,
            frac in 0.0..=1.0f64,
            th in -10.0..10.0f64,
            n in 2usize..12,
        ) {
            let ih = 1.5 * io + 0.1;
            let iv = frac * io.min(ih);
            let p = SetupParams::new(io, ih, iv, th).unwrap();
            let q = SetupParams::new(io, ih, iv, th + TAU).unwrap();
            let g = AuxShiftGrid::equidistant(n).unwrap();
            let (mo, mh) = mean_two_port(&p, &g);
            let (qo, _) = mean_two_port(&q, &g);
            for j in 0..n {
                prop_assert!(mo[j] >= -1e-12 && mh[j] >= -1e-12);
                prop_assert!((mo[j] - qo[j]).abs() <= 1e-9);
            }
        }

        #[test]
        fn rotating_phase_by_one_step_shifts_positions(
            th in 0.0..TAU,
            n in 2usize..10,
        ) {
            let g = AuxShiftGrid::equidistant(n).unwrap();
            let step = TAU / n as f64;
            let p = SetupParams::new(3.0, 5.0, 1.5, th).unwrap();
            let r = SetupParams::new(3.0, 5.0, 1.5, th + step).unwrap();
            let (mo, _) = mean_two_port(&p, &g);
            let (ro, _) = mean_two_port(&r, &g);
            for j in 0..n {
                prop_assert!((ro[j] - mo[(j + 1) % n]).abs() <= 1e-9);
            }
        }
    }
}
