//! Monte Carlo validation of expected distortion.
//!
//! Samples are drawn in fixed chunks of [`CHUNK_SAMPLES`]; chunk `k` uses
//! its own ChaCha8 stream `k` under the run seed, and chunk moments are
//! merged in chunk order. Any partition of chunks across workers therefore
//! yields the same estimate bit for bit.

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use crate::continuum::ContinuumSolution;
use crate::discrete::DiscreteLayering;
use crate::error::{domain, Result};
use crate::fading::{Erlang, FadingModel};
use crate::math::{exp, log, pow, sqrt};

/// Identifier of the random source, recorded in run metadata.
pub const RNG_ALGORITHM: &str = "chacha8-rand_chacha-0.9/seed_from_u64/stream=chunk";
pub const CHUNK_SAMPLES: u64 = 1 << 16;
pub const MIN_SAMPLES: u64 = 1_000;

pub fn chunk_rng(seed: u64, chunk: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chunk);
    rng
}

// Uniform on (0, 1].
fn open_unit<R: RngCore>(rng: &mut R) -> f64 {
    ((rng.next_u64() >> 11) as f64 + 1.0) * (1.0 / (1u64 << 53) as f64)
}

/// One Erlang gain: the mean of `L` unit exponentials, scaled by `γ̄`.
pub fn sample_gain<R: RngCore>(model: &Erlang, rng: &mut R) -> f64 {
    let l = model.order();
    let sum: f64 = (0..l).map(|_| -log(open_unit(rng))).sum();
    sum * model.mean() / l as f64
}

/// Distortion actually seen by a receiver at a given gain.
pub trait RealizedDistortion {
    fn realized_distortion(&self, b: f64, gain: f64) -> f64;
}

impl RealizedDistortion for DiscreteLayering {
    /// `2^{-b Σ Rᵢ}` over the layers with `γᵢ ≤ γ`.
    fn realized_distortion(&self, b: f64, gain: f64) -> f64 {
        pow(2.0, -b * self.realized_rate_bits(gain))
    }
}

impl RealizedDistortion for ContinuumSolution {
    /// `exp(-b R(γ))` with `R` in nats from the sampled allocation.
    fn realized_distortion(&self, b: f64, gain: f64) -> f64 {
        exp(-b * self.rate_profile().rate(gain))
    }
}

/// Running count, mean and centred second moment (Welford), mergeable.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Moments {
    pub count: u64,
    pub mean: f64,
    pub m2: f64,
}

impl Moments {
    pub fn push(&mut self, x: f64) {
        self.count += 1;
        let delta = x - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (x - self.mean);
    }

    pub fn merge(self, other: Moments) -> Moments {
        if self.count == 0 {
            return other;
        }
        if other.count == 0 {
            return self;
        }
        let count = self.count + other.count;
        let delta = other.mean - self.mean;
        let (na, nb, n) = (self.count as f64, other.count as f64, count as f64);
        Moments {
            count,
            mean: self.mean + delta * nb / n,
            m2: self.m2 + other.m2 + delta * delta * na * nb / n,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub n_samples: u64,
    pub seed: u64,
}

impl McEstimate {
    pub fn from_moments(m: Moments, seed: u64) -> Self {
        let var = if m.count > 1 { m.m2 / (m.count - 1) as f64 } else { 0.0 };
        McEstimate {
            mean: m.mean.clamp(0.0, 1.0),
            std_error: sqrt(var.max(0.0) / m.count as f64),
            n_samples: m.count,
            seed,
        }
    }
}

pub fn chunk_count(n_samples: u64) -> u64 {
    n_samples.div_ceil(CHUNK_SAMPLES)
}

/// Moments of chunk `chunk` out of an `n_samples` run.
pub fn estimate_chunk<S: RealizedDistortion + ?Sized>(
    model: &Erlang,
    solution: &S,
    b: f64,
    n_samples: u64,
    seed: u64,
    chunk: u64,
) -> Moments {
    let start = chunk * CHUNK_SAMPLES;
    let len = CHUNK_SAMPLES.min(n_samples.saturating_sub(start));
    let mut rng = chunk_rng(seed, chunk);
    let mut m = Moments::default();
    for _ in 0..len {
        let g = sample_gain(model, &mut rng);
        m.push(solution.realized_distortion(b, g));
    }
    m
}

pub fn check_samples(n_samples: u64) -> Result<()> {
    if n_samples < MIN_SAMPLES {
        return Err(domain(
            "estimate_expected_distortion",
            alloc::format!("need at least {MIN_SAMPLES} samples, got {n_samples}"),
        ));
    }
    Ok(())
}

/// Sequential estimate of `E[D]` under `solution` for gains drawn from
/// `model`.
pub fn estimate_expected_distortion<S: RealizedDistortion + ?Sized>(
    model: &FadingModel,
    solution: &S,
    b: f64,
    n_samples: u64,
    seed: u64,
) -> Result<McEstimate> {
    let e = model.as_erlang("estimate_expected_distortion")?;
    check_samples(n_samples)?;
    let total = (0..chunk_count(n_samples))
        .map(|k| estimate_chunk(e, solution, b, n_samples, seed, k))
        .fold(Moments::default(), Moments::merge);
    Ok(McEstimate::from_moments(total, seed))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rayleigh_sample_mean() {
        let e = Erlang::new(1, 1.0).unwrap();
        let mut rng = chunk_rng(7, 0);
        let mut m = Moments::default();
        for _ in 0..1_000_000 {
            m.push(sample_gain(&e, &mut rng));
        }
        assert!((m.mean - 1.0).abs() < 4.0 / 1000.0, "{}", m.mean);
    }

    #[test]
    fn erlang_sample_variance() {
        let e = Erlang::new(4, 1.0).unwrap();
        let mut rng = chunk_rng(11, 0);
        let mut m = Moments::default();
        for _ in 0..1_000_000 {
            m.push(sample_gain(&e, &mut rng));
        }
        let var = m.m2 / (m.count - 1) as f64;
        assert!((var - 0.25).abs() < 0.05 * 0.25, "{var}");
    }

    #[test]
    fn fixed_seed_is_deterministic() {
        let e = Erlang::new(2, 1.5).unwrap();
        let a: alloc::vec::Vec<f64> = {
            let mut r = chunk_rng(42, 3);
            (0..100).map(|_| sample_gain(&e, &mut r)).collect()
        };
        let b: alloc::vec::Vec<f64> = {
            let mut r = chunk_rng(42, 3);
            (0..100).map(|_| sample_gain(&e, &mut r)).collect()
        };
        assert_eq!(a, b);
        let mut other = chunk_rng(42, 4);
        assert_ne!(a[0], sample_gain(&e, &mut other));
    }

    #[test]
    fn merge_matches_single_pass() {
        let xs: alloc::vec::Vec<f64> = (0..1000).map(|i| libm::sin(i as f64)).collect();
        let mut all = Moments::default();
        xs.iter().for_each(|&x| all.push(x));
        let (mut a, mut b) = (Moments::default(), Moments::default());
        xs[..300].iter().for_each(|&x| a.push(x));
        xs[300..].iter().for_each(|&x| b.push(x));
        let merged = a.merge(b);
        assert!((merged.mean - all.mean).abs() < 1e-14);
        assert!((merged.m2 - all.m2).abs() < 1e-10);
    }

    #[test]
    fn too_few_samples_rejected() {
        assert!(check_samples(999).is_err());
        assert!(check_samples(1000).is_ok());
    }
}
