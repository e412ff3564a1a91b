//! Thin wrappers over `libm` plus a few log-space helpers.

pub use libm::{exp, expm1, fabs, lgamma, log, log1p, pow, sqrt};

pub const LN_2: f64 = core::f64::consts::LN_2;

/// ln(n!) for small and large n alike.
pub fn ln_factorial(n: u32) -> f64 {
    if n < 2 {
        0.0
    } else {
        lgamma(n as f64 + 1.0)
    }
}

/// Numerically stable ln(Σ exp(xᵢ)).
pub fn log_sum_exp(xs: impl Iterator<Item = f64> + Clone) -> f64 {
    let max = xs.clone().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    let sum: f64 = xs.map(|x| exp(x - max)).sum();
    max + log(sum)
}

pub fn db_to_linear(db: f64) -> f64 {
    pow(10.0, db / 10.0)
}

pub fn linear_to_db(linear: f64) -> f64 {
    10.0 * libm::log10(linear)
}
