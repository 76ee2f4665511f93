//! Entity-block bootstrap. Replicates draw entities with replacement and
//! re-run the estimator; every replicate derives its RNG from the master
//! seed and its own index, so results are bit-reproducible regardless of
//! how the replicates are scheduled.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::frame::RegressionFrame;
use crate::error::{Error, Result};
use crate::stats::sd;

/// SplitMix64 step; decorrelates per-replicate seeds drawn from one master.
pub fn derive_seed(master: u64, idx: u64) -> u64 {
    let mut z = master ^ idx.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(0x243F_6A88_85A3_08D3);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Run `refit` on `reps` entity resamples of `frame`. Each replicate yields
/// a coefficient vector; replicates where the estimator fails (for example a
/// resample that collapses onto one entity) are dropped. Returns the kept
/// replicate vectors in replicate order.
pub fn replicate<F>(frame: &RegressionFrame, reps: usize, seed: u64, refit: F) -> Vec<Vec<f64>>
where
    F: Fn(&RegressionFrame) -> Result<Vec<f64>> + Sync,
{
    (0..reps)
        .into_par_iter()
        .map(|rep| {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, rep as u64));
            let ne = frame.n_entities();
            let draws: Vec<usize> = (0..ne).map(|_| rng.random_range(0..ne)).collect();
            refit(&frame.resample(&draws)).ok()
        })
        .collect::<Vec<Option<Vec<f64>>>>()
        .into_iter()
        .flatten()
        .collect()
}

/// Column-wise standard deviations of replicate coefficient vectors.
/// `None` entries mean the bootstrap could not produce an SE.
pub fn column_sds(replicates: &[Vec<f64>], width: usize) -> Vec<Option<f64>> {
    (0..width)
        .map(|j| {
            let col: Vec<f64> = replicates.iter().map(|r| r[j]).collect();
            sd(&col)
        })
        .collect()
}

/// Guard: a bootstrap that was requested but lost more than half of its
/// replicates is reported as failed rather than silently under-dispersed.
pub fn check_health(reps_requested: usize, reps_kept: usize) -> Result<()> {
    if reps_requested > 0 && reps_kept < (reps_requested / 2).max(2) {
        return Err(Error::BootstrapFailed {
            got: reps_kept,
            want: reps_requested,
        });
    }
    Ok(())
}
