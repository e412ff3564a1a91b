//! Reference curves: CSIT lower bound, infinite diversity, the
//! capacity-maximizing power distribution, realized-rate and expected-capacity
//! functionals, and distortion-exponent fitting.

use alloc::format;
use alloc::vec::Vec;

use crate::error::{domain, Error, Result};
use crate::fading::{Erlang, FadingModel};
use crate::math::{exp, fabs, log, log1p, pow};
use crate::quad::{integrate_from_zero, Tolerance};
use crate::roots::brent;

/// Power budget, bandwidth ratio and fading statistics of one link.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelConfig {
    /// Linear transmit power budget P.
    pub power: f64,
    /// Channel uses per source symbol, b = N/K.
    pub bandwidth_ratio: f64,
    pub fading: FadingModel,
}

impl ChannelConfig {
    pub fn new(power: f64, bandwidth_ratio: f64, fading: FadingModel) -> Result<Self> {
        if !(power >= 0.0 && power.is_finite()) {
            return Err(domain(
                "ChannelConfig",
                format!("power {power} must be finite and >= 0"),
            ));
        }
        if !(bandwidth_ratio > 0.0 && bandwidth_ratio.is_finite()) {
            return Err(domain(
                "ChannelConfig",
                format!("bandwidth ratio {bandwidth_ratio} must be > 0"),
            ));
        }
        Ok(ChannelConfig {
            power,
            bandwidth_ratio,
            fading,
        })
    }

    pub fn from_snr_db(snr_db: f64, bandwidth_ratio: f64, fading: FadingModel) -> Result<Self> {
        ChannelConfig::new(crate::math::db_to_linear(snr_db), bandwidth_ratio, fading)
    }
}

/// Expected distortion when the transmitter knows the realized gain and puts
/// all power into the matching layer: `E[(1 + γP)^{-b}]`.
pub fn csit_expected_distortion(config: &ChannelConfig) -> f64 {
    let (p, b) = (config.power, config.bandwidth_ratio);
    match &config.fading {
        FadingModel::Erlang(e) => {
            if p == 0.0 {
                return 1.0;
            }
            let scale = e.mean().min(1.0 / p);
            let tol = Tolerance {
                abs: 1e-15,
                rel: 1e-12,
                ..Tolerance::default()
            };
            integrate_from_zero(|g| e.pdf(g) * pow(1.0 + g * p, -b), scale, e.truncation(), tol).value
        }
        FadingModel::Discrete(d) => d
            .gains()
            .iter()
            .zip(d.probabilities())
            .map(|(g, pr)| pr * pow(1.0 + g * p, -b))
            .sum(),
    }
}

/// Distortion with the gain pinned at its mean: `(1 + γ̄P)^{-b}`.
pub fn infinite_diversity_distortion(config: &ChannelConfig) -> f64 {
    pow(1.0 + config.fading.mean() * config.power, -config.bandwidth_ratio)
}

/// Capacity-maximizing cumulative power `(1 - F(γ) - γf(γ)) / (γ²f(γ))`,
/// clamped at zero above the idle boundary.
pub fn capacity_max_cumulative_power(model: &FadingModel, gain: f64) -> Result<f64> {
    let e = model.as_erlang("capacity_max_cumulative_power")?;
    if !(gain > 0.0) {
        return Err(domain(
            "capacity_max_cumulative_power",
            format!("gain {gain} must be > 0"),
        ));
    }
    let ln_f = e.ln_pdf(gain);
    if ln_f == f64::NEG_INFINITY {
        return Err(domain(
            "capacity_max_cumulative_power",
            format!("density vanishes at {gain}"),
        ));
    }
    Ok(capacity_max_erlang(e, gain))
}

/// Power density `-T'(γ)` of the capacity-maximizing allocation before the
/// budget caps it: `k(γ)(1 - F(γ)) / (γ²f(γ))` with `k = 2/γ + f'/f`, zero
/// above the idle boundary.
pub fn capacity_max_power_density(model: &FadingModel, gain: f64) -> Result<f64> {
    let e = model.as_erlang("capacity_max_power_density")?;
    if !(gain > 0.0) {
        return Err(domain("capacity_max_power_density", format!("gain {gain} must be > 0")));
    }
    if capacity_max_erlang(e, gain) == 0.0 {
        return Ok(0.0);
    }
    let k = 2.0 / gain + e.log_density_slope(gain);
    Ok(k * exp(e.ln_ccdf(gain) - 2.0 * log(gain) - e.ln_pdf(gain)))
}

pub(crate) fn capacity_max_erlang(e: &Erlang, gain: f64) -> f64 {
    let v = exp(e.ln_ccdf(gain) - 2.0 * log(gain) - e.ln_pdf(gain)) - 1.0 / gain;
    v.max(0.0)
}

/// Capacity-maximizing allocation `min(P, U_cap(γ))` sampled on `points`
/// log-spaced gains over `[lo, hi]`, with its own exhaustion boundary added
/// as a node.
pub fn capacity_max_profile(model: &FadingModel, power: f64, lo: f64, hi: f64, points: usize) -> Result<RateProfile> {
    let e = model.as_erlang("capacity_max_profile")?;
    let gamma_o = crate::continuum::solve_gamma_o(model)?.gain;
    let mut nodes = crate::continuum::log_grid(lo, hi, points);
    if power > 0.0 {
        let mut floor = (1e-3 * e.mean()).min(0.5 * gamma_o);
        while capacity_max_erlang(e, floor) <= power && floor > 1e-14 * e.mean() {
            floor *= 0.1;
        }
        if let Ok(edge) = brent(
            |g| capacity_max_erlang(e, g) - power,
            floor,
            gamma_o,
            1e-13,
            "capacity_max_profile",
        ) {
            nodes.push(edge);
        }
    }
    nodes.push(gamma_o);
    nodes.sort_by(f64::total_cmp);
    nodes.dedup();
    let powers = nodes.iter().map(|&g| capacity_max_erlang(e, g).min(power)).collect();
    Ok(RateProfile::new(nodes, powers))
}

/// A cumulative power allocation `T(γ)` sampled at ascending gains, linear
/// between samples and held constant outside them. Repeated gains encode a
/// jump, which is how a finite stack of layers is represented.
///
/// The realized rate `∫₀^γ sρ(s)/(1 + sT(s)) ds` with `ρ = -T'` is evaluated
/// through the integrated-by-parts form
/// `∫₀^γ T/(1 + sT) ds - ln(1 + γT(γ))`, whose integrand stays continuous at
/// the edges of the active region and is exact across jumps.
#[derive(Debug, Clone, PartialEq)]
pub struct RateProfile {
    gains: Vec<f64>,
    power: Vec<f64>,
    // ∫_{g₀}^{gₖ} T/(1+sT) ds
    running: Vec<f64>,
    base: f64,
}

impl RateProfile {
    pub fn new(gains: Vec<f64>, power: Vec<f64>) -> Self {
        assert_eq!(gains.len(), power.len());
        assert!(!gains.is_empty());
        let mut running = Vec::with_capacity(gains.len());
        running.push(0.0);
        for k in 1..gains.len() {
            let cell = cell_integral(gains[k - 1], power[k - 1], gains[k], power[k], gains[k]);
            running.push(running[k - 1] + cell);
        }
        let base = log1p(gains[0] * power[0]);
        RateProfile {
            gains,
            power,
            running,
            base,
        }
    }

    /// Stack of layers at `gains[j]` with cumulative powers `cumulative[j]`.
    pub fn from_layers(gains: &[f64], cumulative: &[f64]) -> Self {
        let m = gains.len();
        let mut g = Vec::with_capacity(2 * m);
        let mut t = Vec::with_capacity(2 * m);
        for j in 0..m {
            g.push(gains[j]);
            t.push(cumulative[j]);
            g.push(gains[j]);
            t.push(if j + 1 < m { cumulative[j + 1] } else { 0.0 });
        }
        RateProfile::new(g, t)
    }

    pub fn gains(&self) -> &[f64] {
        &self.gains
    }

    pub fn cumulative_power(&self) -> &[f64] {
        &self.power
    }

    /// `T(γ)` under the profile's interpolation convention.
    pub fn power_at(&self, gain: f64) -> f64 {
        let k = self.gains.partition_point(|&g| g <= gain);
        if k == 0 {
            return self.power[0];
        }
        if k == self.gains.len() {
            return self.power[k - 1];
        }
        let (a, b) = (k - 1, k);
        lerp(self.gains[a], self.power[a], self.gains[b], self.power[b], gain)
    }

    /// Realized rate in nats at gain `gain`.
    pub fn rate(&self, gain: f64) -> f64 {
        let n = self.gains.len();
        let k = self.gains.partition_point(|&g| g <= gain);
        if k == 0 {
            return 0.0;
        }
        let a = k - 1;
        let partial = if k == n {
            let t = self.power[a];
            log1p((gain - self.gains[a]) * t / (1.0 + self.gains[a] * t))
        } else {
            cell_integral(self.gains[a], self.power[a], self.gains[k], self.power[k], gain)
        };
        let t_here = self.power_at(gain);
        (self.base + self.running[a] + partial - log1p(gain * t_here)).max(0.0)
    }

    /// Total rate once every layer is decodable.
    pub fn total_rate(&self) -> f64 {
        let last = *self.gains.last().expect("nonempty");
        self.rate(last)
    }
}

fn lerp(x0: f64, y0: f64, x1: f64, y1: f64, x: f64) -> f64 {
    if x1 == x0 {
        return y1;
    }
    y0 + (y1 - y0) * (x - x0) / (x1 - x0)
}

// ∫_{s_a}^{upto} T/(1+sT) ds with T linear on [s_a, s_b].
fn cell_integral(sa: f64, ta: f64, sb: f64, tb: f64, upto: f64) -> f64 {
    if upto <= sa {
        return 0.0;
    }
    if ta == tb {
        return log1p((upto - sa) * ta / (1.0 + sa * ta));
    }
    let tu = lerp(sa, ta, sb, tb, upto);
    0.5 * (upto - sa) * (ta / (1.0 + sa * ta) + tu / (1.0 + upto * tu))
}

/// Realized rate (nats) at `gain` under `profile`.
pub fn realized_rate(profile: &RateProfile, gain: f64) -> f64 {
    profile.rate(gain)
}

/// `∫ f(γ) R(γ) dγ` over the truncated support, in nats.
pub fn expected_capacity(model: &FadingModel, profile: &RateProfile) -> Result<f64> {
    let e = model.as_erlang("expected_capacity")?;
    Ok(expected_capacity_erlang(e, profile))
}

pub(crate) fn expected_capacity_erlang(e: &Erlang, profile: &RateProfile) -> f64 {
    let g = profile.gains();
    let mut total = 0.0;
    for w in g.windows(2) {
        if w[1] > w[0] {
            total += crate::quad::panel(|s| e.pdf(s) * profile.rate(s), w[0], w[1]);
        }
    }
    let last = *g.last().expect("nonempty");
    total + profile.total_rate() * e.ccdf(last)
}

/// Least-squares slope of `-ln E[D]` against `ln P` over the upper half of
/// the sweep's log-power range.
pub fn distortion_exponent_fit(points: &[(f64, f64)]) -> Result<f64> {
    let n = points.len();
    let ascending = points.windows(2).all(|w| w[1].0 > w[0].0);
    let valid = points.iter().all(|&(p, d)| p > 0.0 && d > 0.0);
    let span_db = if n >= 2 && valid {
        10.0 * libm::log10(points[n - 1].0 / points[0].0)
    } else {
        0.0
    };
    if n < 4 || !ascending || !valid || span_db < 20.0 - 1e-9 {
        return Err(Error::InsufficientSpan { points: n, span_db });
    }
    let lo = log(points[0].0);
    let hi = log(points[n - 1].0);
    let mid = 0.5 * (lo + hi);
    let upper: Vec<(f64, f64)> = points
        .iter()
        .map(|&(p, d)| (log(p), -log(d)))
        .filter(|&(x, _)| x >= mid - 1e-12 * fabs(mid).max(1.0))
        .collect();
    let k = upper.len() as f64;
    let mx = upper.iter().map(|p| p.0).sum::<f64>() / k;
    let my = upper.iter().map(|p| p.1).sum::<f64>() / k;
    let sxy: f64 = upper.iter().map(|&(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = upper.iter().map(|&(x, _)| (x - mx) * (x - mx)).sum();
    Ok(sxy / sxx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "{a} vs {b} (tol {tol})");
    }

    fn rayleigh(power: f64, b: f64) -> ChannelConfig {
        ChannelConfig::new(power, b, FadingModel::erlang(1, 1.0).unwrap()).unwrap()
    }

    // e·E₁(1) from the convergent series E₁(x) = -γ_E - ln x - Σ (-x)^k/(k k!)
    fn e_times_e1_at_one() -> f64 {
        let euler = 0.577_215_664_901_532_9;
        let mut sum = 0.0;
        let mut fact = 1.0;
        for k in 1..40 {
            fact *= k as f64;
            let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
            sum += sign / (k as f64 * fact);
        }
        core::f64::consts::E * (-euler + sum)
    }

    #[test]
    fn csit_examples() {
        close(csit_expected_distortion(&rayleigh(0.0, 2.0)), 1.0, 0.0);
        let series = e_times_e1_at_one();
        close(series, 0.596_347_362_323_194, 1e-13);
        close(csit_expected_distortion(&rayleigh(1.0, 1.0)), series, 1e-10);
    }

    #[test]
    fn infinite_diversity_examples() {
        close(infinite_diversity_distortion(&rayleigh(1.0, 2.0)), 0.25, 1e-15);
        close(infinite_diversity_distortion(&rayleigh(0.0, 2.0)), 1.0, 0.0);
        close(infinite_diversity_distortion(&rayleigh(9.0, 1.0)), 0.1, 1e-15);
    }

    #[test]
    fn capacity_max_examples() {
        let r = FadingModel::erlang(1, 1.0).unwrap();
        close(capacity_max_cumulative_power(&r, 0.5).unwrap(), 2.0, 1e-13);
        close(capacity_max_cumulative_power(&r, 1.0).unwrap(), 0.0, 1e-13);
        close(capacity_max_cumulative_power(&r, 1.7).unwrap(), 0.0, 0.0);
        let e2 = FadingModel::erlang(2, 1.0).unwrap();
        // independent route from the closed-form cdf and pdf
        let f = e2.pdf(0.5).unwrap();
        let big_f = 1.0 - 2.0 * libm::exp(-1.0);
        close((1.0 - big_f - 0.5 * f) / (0.25 * f), 2.0, 1e-13);
        close(capacity_max_cumulative_power(&e2, 0.5).unwrap(), 2.0, 1e-12);
        assert!(capacity_max_cumulative_power(&e2, 0.0).is_err());
    }

    #[test]
    fn exponent_of_power_law() {
        let pts: Vec<(f64, f64)> = (0..=8)
            .map(|i| {
                let p = libm::pow(10.0, i as f64 * 0.5);
                (p, libm::pow(p, -1.5))
            })
            .collect();
        close(distortion_exponent_fit(&pts).unwrap(), 1.5, 1e-12);
    }

    #[test]
    fn exponent_rejects_short_sweeps() {
        let pts = [(1.0, 0.5), (2.0, 0.4), (4.0, 0.3), (8.0, 0.2)];
        assert!(matches!(
            distortion_exponent_fit(&pts),
            Err(Error::InsufficientSpan { .. })
        ));
        assert!(distortion_exponent_fit(&pts[..3]).is_err());
    }

    #[test]
    fn rate_of_layer_stack_matches_log_sum() {
        let gains = [0.3, 1.0, 3.0];
        let t = [2.0, 0.7, 0.2];
        let profile = RateProfile::from_layers(&gains, &t);
        let r = |j: usize| {
            let above = if j + 1 < 3 { t[j + 1] } else { 0.0 };
            libm::log((1.0 + gains[j] * t[j]) / (1.0 + gains[j] * above))
        };
        close(profile.rate(0.1), 0.0, 1e-15);
        close(profile.rate(0.5), r(0), 1e-12);
        close(profile.rate(2.0), r(0) + r(1), 1e-12);
        close(profile.rate(10.0), r(0) + r(1) + r(2), 1e-12);
        close(profile.rate(100.0), profile.rate(10.0), 1e-15);
    }

    #[test]
    fn zero_power_profile_has_no_capacity() {
        let m = FadingModel::erlang(1, 1.0).unwrap();
        let profile = RateProfile::new(vec![0.1, 1.0, 2.0], vec![0.0; 3]);
        close(expected_capacity(&m, &profile).unwrap(), 0.0, 0.0);
    }
}
