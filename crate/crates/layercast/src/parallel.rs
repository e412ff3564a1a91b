//! Monte Carlo across the rayon pool.
//!
//! Chunks are independent streams of the seed, evaluated in any order and
//! merged in chunk order, so the estimate does not depend on the number of
//! worker threads and matches the sequential core routine exactly.

use layercast_core::montecarlo::{check_samples, chunk_count, estimate_chunk, Moments};
use layercast_core::{Erlang, McEstimate, RealizedDistortion, Result};
use rayon::prelude::*;

pub fn estimate_expected_distortion<S: RealizedDistortion + Sync + ?Sized>(
    model: &Erlang,
    solution: &S,
    b: f64,
    n_samples: u64,
    seed: u64,
) -> Result<McEstimate> {
    check_samples(n_samples)?;
    let parts: Vec<Moments> = (0..chunk_count(n_samples))
        .into_par_iter()
        .map(|k| estimate_chunk(model, solution, b, n_samples, seed, k))
        .collect();
    let total = parts.into_iter().fold(Moments::default(), Moments::merge);
    Ok(McEstimate::from_moments(total, seed))
}
