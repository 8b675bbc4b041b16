//! Monte-Carlo sampling of both detection models.
//!
//! Randomness is counter-based: every sample draws from a fresh ChaCha8
//! stream keyed by `(master_seed, domain, sample_index)`, so batches are
//! reproducible and independent of iteration order or thread count.

use crate::model::{
    mean_four_port, mean_two_port, AuxShiftGrid, FourPortParams, FourPortSample, FringeSample,
    SetupParams,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, Poisson};
use rayon::prelude::*;

const DOMAIN_FRINGE: u64 = 0x6672_696e_6765_0001;

/// Deterministic per-sample random stream.
fn stream(master_seed: u64, domain: u64, index: u64) -> ChaCha8Rng {
    let mut seed = [0u8; 32];
    seed[0..8].copy_from_slice(&master_seed.to_le_bytes());
    seed[8..16].copy_from_slice(&domain.to_le_bytes());
    seed[16..24].copy_from_slice(&index.to_le_bytes());
    seed[24..32].copy_from_slice(&0x6672_6e67_6669_7431_u64.to_le_bytes());
    ChaCha8Rng::from_seed(seed)
}

/// Derive a per-run master seed so ensemble runs never share streams.
pub fn derive_run_seed(master_seed: u64, run: u64) -> u64 {
    fn splitmix64(mut z: u64) -> u64 {
        z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }
    splitmix64(master_seed ^ splitmix64(run.wrapping_add(0xA076_1D64_78BD_642F)))
}

/// Exact Poisson draw; a zero mean yields zero counts.
fn draw_poisson(mean: f64, rng: &mut impl Rng) -> u64 {
    if mean <= 0.0 {
        return 0;
    }
    Poisson::new(mean).expect("positive finite mean").sample(rng) as u64
}

/// One counted fringe scan: independent Poisson counts for both beams at
/// every grid position (o-beam first, then h-beam).
pub fn sample_poisson_fringe(
    params: &SetupParams,
    grid: &AuxShiftGrid,
    rng: &mut impl Rng,
) -> FringeSample {
    let (mo, mh) = mean_two_port(params, grid);
    let counts_o = mo.iter().map(|&m| draw_poisson(m.max(0.0), rng)).collect();
    let counts_h = mh.iter().map(|&m| draw_poisson(m.max(0.0), rng)).collect();
    FringeSample::new(counts_o, counts_h, grid.clone()).expect("means cover the grid")
}

/// One four-port exposure under the additive Gaussian read-out model.
pub fn sample_gaussian_four_port(params: &FourPortParams, rng: &mut impl Rng) -> FourPortSample {
    let noise = Normal::new(0.0, params.noise_sigma()).expect("positive sigma");
    let means = mean_four_port(params);
    FourPortSample::Continuous(means.map(|m| m + noise.sample(rng)))
}

/// One counted four-port exposure.
pub fn sample_poisson_four_port(params: &FourPortParams, rng: &mut impl Rng) -> FourPortSample {
    let means = mean_four_port(params);
    FourPortSample::Discrete(means.map(|m| draw_poisson(m.max(0.0), rng)))
}

/// A reproducible batch of fringe scans.
#[derive(Debug, Clone)]
pub struct BatchSpec {
    pub params: SetupParams,
    pub grid: AuxShiftGrid,
    pub sample_count: usize,
    pub master_seed: u64,
}

/// Generate the batch in parallel.  Sample `i` depends only on
/// `(master_seed, i)`, so the result is identical for any thread count.
pub fn run_batch(spec: &BatchSpec) -> Vec<FringeSample> {
    (0..spec.sample_count)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream(spec.master_seed, DOMAIN_FRINGE, i as u64);
            sample_poisson_fringe(&spec.params, &spec.grid, &mut rng)
        })
        .collect()
}
