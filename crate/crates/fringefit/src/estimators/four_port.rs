//! Closed-form estimators for single four-port exposures.

use crate::error::{Error, Result};
use crate::model::{FourPortEstimate, FourPortSample};
use std::f64::consts::TAU;

/// Normalized-fringe-moment estimator for a four-port exposure.
///
/// Builds the complex fringe moment `(ch4 - ch3) + i (ch6 - ch5)` and reads
/// the phase off its argument; the visibility is `2R / sum` clamped to 1 and
/// the total intensity is `sum / 2`.  A vanishing moment or a nonpositive
/// channel sum leaves the phase undefined.
pub fn nfm_four_port(sample: &FourPortSample) -> FourPortEstimate {
    let [i3, i4, i5, i6] = sample.values();
    let c = i4 - i3;
    let s = i6 - i5;
    let r = c.hypot(s);
    let total: f64 = i3 + i4 + i5 + i6;
    if r == 0.0 || total <= 0.0 {
        return FourPortEstimate::uninformative((0.5 * total).max(0.0), 0.0);
    }
    let phase = s.atan2(c);
    let visibility = (2.0 * r / total).min(1.0);
    FourPortEstimate::informative(phase, 0.5 * total, visibility)
}

/// Maximum-likelihood estimator for a counted four-port exposure.
///
/// With quadrature contrasts `c = (n4 - n3) / (n4 + n3)` and
/// `s = (n6 - n5) / (n6 + n5)`, the likelihood over the unit disk of
/// `(V cos theta, V sin theta)` peaks at `(c, s)` whenever that point is
/// feasible; otherwise the maximum sits on the `V = 1` rim and is located
/// by a dense scan plus golden-section refinement (phase resolved to 1e-10).
/// The exposure total is estimated as `sum / 2` in every case.  A quadrature
/// pair with zero total counts leaves the phase undefined, as does a
/// vanishing contrast vector.
pub fn poisson_four_port(sample: &FourPortSample) -> Result<FourPortEstimate> {
    let [n3, n4, n5, n6] = sample
        .counts()
        .ok_or_else(|| {
            Error::DataMismatch("count-model estimator needs a discrete sample".into())
        })?
        .map(|n| n as f64);
    let pair_c = n3 + n4;
    let pair_s = n5 + n6;
    let total_intensity = 0.5 * (pair_c + pair_s);
    if pair_c == 0.0 || pair_s == 0.0 {
        return Ok(FourPortEstimate::uninformative(total_intensity, 0.0));
    }
    let c = (n4 - n3) / pair_c;
    let s = (n6 - n5) / pair_s;
    let r2 = c * c + s * s;
    if r2 == 0.0 {
        return Ok(FourPortEstimate::uninformative(total_intensity, 0.0));
    }
    if r2 <= 1.0 {
        return Ok(FourPortEstimate::informative(
            s.atan2(c),
            total_intensity,
            r2.sqrt(),
        ));
    }
    // Contrast vector outside the disk: the constrained maximum has V = 1.
    let f = |theta: f64| rim_loglik(theta, n3, n4, n5, n6);
    let phase = maximize_on_circle(f);
    Ok(FourPortEstimate::informative(phase, total_intensity, 1.0))
}

/// Phase-dependent part of the count log-likelihood on the `V = 1` rim.
fn rim_loglik(theta: f64, n3: f64, n4: f64, n5: f64, n6: f64) -> f64 {
    let (sin, cos) = theta.sin_cos();
    let mut ll = 0.0;
    for (n, factor) in [
        (n3, 1.0 - cos),
        (n4, 1.0 + cos),
        (n5, 1.0 - sin),
        (n6, 1.0 + sin),
    ] {
        if n > 0.0 {
            if factor <= 0.0 {
                return f64::NEG_INFINITY;
            }
            ll += n * factor.ln();
        }
    }
    ll
}

/// Global maximum of a periodic function on `[0, 2*pi)`: dense scan to find
/// the best bracket, then golden-section refinement inside it.
fn maximize_on_circle(f: impl Fn(f64) -> f64) -> f64 {
    const SCAN: usize = 1024;
    let mut best_k = 0;
    let mut best = f64::NEG_INFINITY;
    for k in 0..SCAN {
        let v = f(TAU * k as f64 / SCAN as f64);
        if v > best {
            best = v;
            best_k = k;
        }
    }
    let step = TAU / SCAN as f64;
    let mut lo = TAU * best_k as f64 / SCAN as f64 - step;
    let mut hi = lo + 2.0 * step;
    // Golden-section search on the bracket; 80 shrinks take the interval
    // far below the 1e-10 phase resolution target.
    let inv_phi = 0.5 * (5.0_f64.sqrt() - 1.0);
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    for _ in 0..80 {
        if f1 >= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = f(x2);
        }
    }
    0.5 * (lo + hi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::EstimateStatus;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn nfm_reads_cosine_quadrature() {
        let e = nfm_four_port(&FourPortSample::Continuous([1.0, 3.0, 2.0, 2.0]));
        assert!(close(e.phase().unwrap(), 0.0, 1e-12));
        assert!(close(e.total_intensity(), 4.0, 1e-12));
        assert!(close(e.visibility(), 0.5, 1e-12));
    }

    #[test]
    fn nfm_reads_sine_quadrature() {
        let e = nfm_four_port(&FourPortSample::Continuous([2.0, 2.0, 1.0, 3.0]));
        assert!(close(e.phase().unwrap(), FRAC_PI_2, 1e-12));
        assert!(close(e.total_intensity(), 4.0, 1e-12));
        assert!(close(e.visibility(), 0.5, 1e-12));
    }

    #[test]
    fn nfm_flat_exposure_is_uninformative() {
        let e = nfm_four_port(&FourPortSample::Continuous([1.0, 1.0, 1.0, 1.0]));
        assert_eq!(e.status(), EstimateStatus::Uninformative);
        assert!(e.phase().is_none());
        assert!(close(e.total_intensity(), 2.0, 1e-12));
        assert_eq!(e.visibility(), 0.0);
    }

    #[test]
    fn nfm_clamps_visibility_at_one() {
        let e = nfm_four_port(&FourPortSample::Continuous([0.0, 20.0, 5.0, 5.0]));
        assert_eq!(e.visibility(), 1.0);
        assert!(close(e.total_intensity(), 15.0, 1e-12));
        assert!(close(e.phase().unwrap(), 0.0, 1e-12));
    }

    #[test]
    fn nfm_nonpositive_sum_is_uninformative() {
        let e = nfm_four_port(&FourPortSample::Continuous([-2.0, 1.0, -1.0, 1.0]));
        assert_eq!(e.status(), EstimateStatus::Uninformative);
        assert_eq!(e.total_intensity(), 0.0);
    }

    #[test]
    fn poisson_interior_solution() {
        let e = poisson_four_port(&FourPortSample::Discrete([1, 3, 1, 3])).unwrap();
        assert!(close(e.phase().unwrap(), FRAC_PI_4, 1e-12));
        assert!(close(e.visibility(), 0.5_f64.sqrt(), 1e-12));
        assert!(close(e.total_intensity(), 4.0, 1e-12));
    }

    #[test]
    fn poisson_disk_edge_without_search() {
        let e = poisson_four_port(&FourPortSample::Discrete([0, 2, 1, 1])).unwrap();
        assert!(close(e.phase().unwrap(), 0.0, 1e-12));
        assert_eq!(e.visibility(), 1.0);
        assert!(close(e.total_intensity(), 2.0, 1e-12));
    }

    #[test]
    fn poisson_rim_search_finds_diagonal() {
        let e = poisson_four_port(&FourPortSample::Discrete([0, 3, 0, 3])).unwrap();
        assert!(close(e.phase().unwrap(), FRAC_PI_4, 1e-8), "phase {:?}", e.phase());
        assert_eq!(e.visibility(), 1.0);
        assert!(close(e.total_intensity(), 3.0, 1e-12));
    }

    #[test]
    fn poisson_zero_quadrature_pair_is_uninformative() {
        let e = poisson_four_port(&FourPortSample::Discrete([0, 0, 2, 3])).unwrap();
        assert_eq!(e.status(), EstimateStatus::Uninformative);
        assert!(close(e.total_intensity(), 2.5, 1e-12));
        let z = poisson_four_port(&FourPortSample::Discrete([0, 0, 0, 0])).unwrap();
        assert_eq!(z.status(), EstimateStatus::Uninformative);
        assert_eq!(z.total_intensity(), 0.0);
    }

    #[test]
    fn poisson_balanced_contrasts_are_uninformative() {
        let e = poisson_four_port(&FourPortSample::Discrete([2, 2, 3, 3])).unwrap();
        assert_eq!(e.status(), EstimateStatus::Uninformative);
        assert_eq!(e.visibility(), 0.0);
    }

    #[test]
    fn poisson_rejects_continuous_samples() {
        assert!(poisson_four_port(&FourPortSample::Continuous([1.0; 4])).is_err());
    }

    /// Count log-likelihood over (theta, V) with the exposure total fixed at
    /// half the channel sum; used as a brute-force cross-check.
    fn grid_argmax(n: [f64; 4]) -> (f64, f64, f64) {
        let ll = |theta: f64, v: f64| {
            let (s, c) = theta.sin_cos();
            let terms = [
                (n[0], 1.0 - v * c),
                (n[1], 1.0 + v * c),
                (n[2], 1.0 - v * s),
                (n[3], 1.0 + v * s),
            ];
            let mut acc = 0.0;
            for (k, factor) in terms {
                if k > 0.0 {
                    if factor <= 0.0 {
                        return f64::NEG_INFINITY;
                    }
                    acc += k * factor.ln();
                }
            }
            acc
        };
        let mut best = (0.0, 0.0, f64::NEG_INFINITY);
        for kt in 0..720 {
            let theta = TAU * kt as f64 / 720.0;
            for kv in 0..100 {
                let v = kv as f64 / 99.0;
                let val = ll(theta, v);
                if val > best.2 {
                    best = (theta, v, val);
                }
            }
        }
        best
    }

    #[test]
    fn poisson_matches_dense_grid_on_mixed_counts() {
        let counts = [2u64, 5, 1, 4];
        let nf = counts.map(|n| n as f64);
        let e = poisson_four_port(&FourPortSample::Discrete(counts)).unwrap();
        let (gt, gv, gll) = grid_argmax(nf);
        let (s, c) = e.phase().unwrap().sin_cos();
        let ell = {
            let v = e.visibility();
            nf[0] * (1.0 - v * c).ln()
                + nf[1] * (1.0 + v * c).ln()
                + nf[2] * (1.0 - v * s).ln()
                + nf[3] * (1.0 + v * s).ln()
        };
        assert!(ell + 1e-9 >= gll, "estimator loglik {ell} below grid {gll}");
        let dist = (e.phase().unwrap() - gt).rem_euclid(TAU);
        let dist = dist.min(TAU - dist);
        assert!(dist <= 1.5 * TAU / 720.0, "phase {dist} off grid argmax");
        assert!((e.visibility() - gv).abs() <= 1.5 / 99.0);
        assert!(close(e.total_intensity(), 6.0, 1e-12));
    }
}
