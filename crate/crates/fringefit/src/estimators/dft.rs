//! Discrete-Fourier-transform fringe estimator.
//!
//! Under additive Gaussian noise the fringe-model likelihood is maximized in
//! closed form by the first Fourier coefficient of the beam difference,
//! `R = sum_j (n_o[j] - n_h[j]) exp(-i delta_j)`: the phase is `arg R`, the
//! per-beam offsets are the plain averages, and the fringe amplitude is
//! `|R| / N` capped by both beam means so the fitted model stays physical.

use crate::model::{AuxShiftGrid, FringeSample, PhaseEstimate};

/// Relative threshold below which the Fourier coefficient counts as zero.
/// Cancellation noise from summing `N` rounded cosines sits many orders of
/// magnitude lower than any genuinely nonzero coefficient.
const ZERO_MOMENT_EPS: f64 = 1e-12;

/// DFT estimate from a counted fringe scan.
pub fn dft_estimate(sample: &FringeSample) -> PhaseEstimate {
    let o: Vec<f64> = sample.counts_o().iter().map(|&n| n as f64).collect();
    let h: Vec<f64> = sample.counts_h().iter().map(|&n| n as f64).collect();
    dft_estimate_real(&o, &h, sample.grid())
}

/// DFT estimate from real-valued per-position beam intensities.
pub fn dft_estimate_real(values_o: &[f64], values_h: &[f64], grid: &AuxShiftGrid) -> PhaseEstimate {
    assert_eq!(values_o.len(), grid.count(), "o-beam values must cover the grid");
    assert_eq!(values_h.len(), grid.count(), "h-beam values must cover the grid");
    let n = grid.count() as f64;
    let mut re = 0.0;
    let mut im = 0.0;
    let mut scale = 0.0;
    for ((&o, &h), &d) in values_o.iter().zip(values_h).zip(grid.shifts()) {
        let diff = o - h;
        re += diff * d.cos();
        im -= diff * d.sin();
        scale += o.abs() + h.abs();
    }
    let mean_o = values_o.iter().sum::<f64>() / n;
    let mean_h = values_h.iter().sum::<f64>() / n;
    let magnitude = re.hypot(im);
    if magnitude <= ZERO_MOMENT_EPS * scale.max(1.0) {
        return PhaseEstimate::uninformative(mean_o, mean_h, 0.0);
    }
    let amplitude = (magnitude / n).min(mean_o).min(mean_h).max(0.0);
    PhaseEstimate::informative(im.atan2(re), mean_o, mean_h, amplitude)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{mean_two_port, EstimateStatus, SetupParams};
    use proptest::prelude::*;
    use std::f64::consts::{PI, TAU};

    fn circ(a: f64, b: f64) -> f64 {
        let d = (a - b).rem_euclid(TAU);
        d.min(TAU - d)
    }

    fn grid(n: usize) -> AuxShiftGrid {
        AuxShiftGrid::equidistant(n).unwrap()
    }

    #[test]
    fn cosine_aligned_counts() {
        let s = FringeSample::new(vec![3, 2, 1, 2], vec![1, 2, 3, 2], grid(4)).unwrap();
        let e = dft_estimate(&s);
        assert!(circ(e.phase().unwrap(), 0.0) <= 1e-12);
        assert!((e.amplitude() - 1.0).abs() <= 1e-12);
        assert!((e.mean_o() - 2.0).abs() <= 1e-12);
        assert!((e.mean_h() - 2.0).abs() <= 1e-12);
    }

    #[test]
    fn flat_scan_is_uninformative() {
        let s = FringeSample::new(vec![4; 6], vec![7; 6], grid(6)).unwrap();
        let e = dft_estimate(&s);
        assert_eq!(e.status(), EstimateStatus::Uninformative);
        assert!(e.phase().is_none());
        assert_eq!(e.amplitude(), 0.0);
        assert!((e.mean_o() - 4.0).abs() <= 1e-12);
    }

    #[test]
    fn noiseless_fringe_recovered_exactly() {
        let p = SetupParams::new(2.21, 6.33, 1.03, 4.83).unwrap();
        let g = grid(8);
        let (mo, mh) = mean_two_port(&p, &g);
        let e = dft_estimate_real(&mo, &mh, &g);
        assert!(circ(e.phase().unwrap(), 4.83) <= 1e-12);
        assert!((e.amplitude() - 1.03).abs() <= 1e-12);
        assert!((e.mean_o() - 2.21).abs() <= 1e-12);
        assert!((e.mean_h() - 6.33).abs() <= 1e-12);
    }

    #[test]
    fn amplitude_capped_by_beam_means() {
        // A single spike gives |R|/n = 2 = mean_o, but the empty h-beam
        // caps the admissible amplitude at zero.
        let s = FringeSample::new(vec![8, 0, 0, 0], vec![0, 0, 0, 0], grid(4)).unwrap();
        let e = dft_estimate(&s);
        assert!(e.is_informative());
        assert_eq!(e.amplitude(), 0.0);
        assert!((e.mean_o() - 2.0).abs() <= 1e-12);
    }

    #[test]
    fn quadrature_pair_matches_moment_estimator() {
        // Two positions {0, pi/2} arrange a four-port exposure as a fringe:
        // the DFT coefficient reduces to (ch4 - ch3) + i (ch6 - ch5).
        let two = AuxShiftGrid::from_shifts(vec![0.0, 0.5 * PI]).unwrap();
        let (i3, i4, i5, i6) = (1.0, 3.0, 2.5, 4.0);
        let e = dft_estimate_real(&[i4, i5], &[i3, i6], &two);
        let nfm = crate::estimators::nfm_four_port(&crate::model::FourPortSample::Continuous(
            [i3, i4, i5, i6],
        ));
        assert!(circ(e.phase().unwrap(), nfm.phase().unwrap()) <= 1e-12);
    }

    proptest! {
        #[test]
        fn cyclic_shift_rotates_phase_by_one_step(
            o in prop::collection::vec(0u64..30, 5),
            h in prop::collection::vec(0u64..30, 5),
        ) {
            let g = grid(5);
            let base = FringeSample::new(o.clone(), h.clone(), g.clone()).unwrap();
            let rot_o: Vec<u64> = (0..5).map(|j| o[(j + 1) % 5]).collect();
            let rot_h: Vec<u64> = (0..5).map(|j| h[(j + 1) % 5]).collect();
            let rot = FringeSample::new(rot_o, rot_h, g.clone()).unwrap();
            let eb = dft_estimate(&base);
            let er = dft_estimate(&rot);
            prop_assume!(eb.is_informative() && eb.amplitude() > 1e-6);
            let step = TAU / 5.0;
            prop_assert!(circ(er.phase().unwrap(), eb.phase().unwrap() + step) <= 1e-9);
            prop_assert!((er.amplitude() - eb.amplitude()).abs() <= 1e-9);
            prop_assert!((er.mean_o() - eb.mean_o()).abs() <= 1e-12);
        }

        #[test]
        fn beam_swap_flips_phase_by_pi(
            o in prop::collection::vec(0u64..30, 6),
            h in prop::collection::vec(0u64..30, 6),
        ) {
            let g = grid(6);
            let base = FringeSample::new(o.clone(), h.clone(), g.clone()).unwrap();
            let swap = FringeSample::new(h, o, g).unwrap();
            let eb = dft_estimate(&base);
            let es = dft_estimate(&swap);
            prop_assume!(eb.is_informative() && eb.amplitude() > 1e-6);
            prop_assert!(circ(es.phase().unwrap(), eb.phase().unwrap() + PI) <= 1e-9);
            prop_assert!((es.mean_o() - eb.mean_h()).abs() <= 1e-12);
            prop_assert!((es.mean_h() - eb.mean_o()).abs() <= 1e-12);
        }

        #[test]
        fn positive_rescaling_preserves_phase(
            o in prop::collection::vec(0.0f64..20.0, 8),
            h in prop::collection::vec(0.0f64..20.0, 8),
            k in 0.01f64..100.0,
        ) {
            let g = grid(8);
            let so: Vec<f64> = o.iter().map(|x| x * k).collect();
            let sh: Vec<f64> = h.iter().map(|x| x * k).collect();
            let eb = dft_estimate_real(&o, &h, &g);
            let es = dft_estimate_real(&so, &sh, &g);
            prop_assume!(eb.is_informative() && eb.amplitude() > 1e-6);
            prop_assert!(circ(es.phase().unwrap(), eb.phase().unwrap()) <= 1e-9);
        }
    }
}
