//! Continuum-limit optimal power distribution.
//!
//! With gains condensed into a density, the optimal cumulative power `T*(γ)`
//! has three regions: zero above the idle boundary `γ_o`, the unconstrained
//! profile `U(γ)` on `[γ_P, γ_o]`, and the full budget `P` below the
//! exhaustion boundary `γ_P`. Writing `φ(s) = ln(s² f(s))` and
//! `k(s) = 2/s + f'(s)/f(s)`:
//!
//! * `γ_o` solves `γ f(γ) + F(γ) - 1 = 0`;
//! * `U' = -k/(1+b) (U + 1/γ)`, `U(γ_o) = 0`, integrated in closed form as
//!   `U(γ) = 1/(1+b) ∫_γ^{γ_o} (k(s)/s) e^{(φ(s)-φ(γ))/(1+b)} ds`;
//! * `D' = b/(1+b) k D - f`, `D(γ_o) = γ_o f(γ_o)`, integrated as
//!   `D(γ) = ∫_γ^{γ_o} f(s) e^{β(φ(γ)-φ(s))} ds + γ_o f(γ_o) e^{β(φ(γ)-φ(γ_o))}`
//!   with `β = b/(1+b)`;
//! * `E[D]* = F(γ_P) + D(γ_P)`.
//!
//! The quadrature forms are authoritative; the RK4 forms exist to cross-check
//! them.

use alloc::format;
use alloc::vec::Vec;

use crate::baselines::{ChannelConfig, RateProfile};
use crate::error::{domain, Error, Result};
use crate::fading::{Erlang, FadingModel};
use crate::math::{exp, log, pow};
use crate::ode::integrate_to;
use crate::quad::{integrate, Integral, Tolerance};
use crate::roots::{brent, sign_change_brackets};

/// Output profile resolution.
pub const DEFAULT_GRID_POINTS: usize = 2048;
/// Log-grid size of the sign-change scan for `γ_o`.
pub const GAMMA_O_SCAN_POINTS: usize = 4096;
/// Relative tolerance of the boundary root finders.
pub const ROOT_XTOL: f64 = 1e-12;
/// Step-doubling tolerance of the RK4 cross-check.
pub const ODE_TOL: f64 = 1e-10;

fn quad_tol() -> Tolerance {
    Tolerance {
        abs: 1e-12,
        rel: 1e-10,
        max_intervals: 4000,
    }
}

fn phi(e: &Erlang, s: f64) -> f64 {
    2.0 * log(s) + e.ln_pdf(s)
}

fn kernel(e: &Erlang, s: f64) -> f64 {
    2.0 / s + e.log_density_slope(s)
}

/// `n` log-spaced points covering `[lo, hi]` inclusive.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n < 2 {
        return alloc::vec![lo];
    }
    let (a, b) = (log(lo), log(hi));
    let mut out: Vec<f64> = (0..n).map(|i| exp(a + (b - a) * i as f64 / (n - 1) as f64)).collect();
    out[0] = lo;
    out[n - 1] = hi;
    out
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IdleBoundary {
    pub gain: f64,
    /// Number of sign changes of the root condition on the scan grid.
    pub sign_changes: usize,
}

impl IdleBoundary {
    pub fn is_ambiguous(&self) -> bool {
        self.sign_changes > 1
    }
}

/// Root of `γ f(γ) + F(γ) - 1`: the gain above which no layer gets power.
///
/// Scans a log grid on `[1e-6 γ̄, γ_trunc]` for sign changes of
/// `ln(γ f(γ)) - ln(1 - F(γ))` (same sign as the root condition, but free of
/// underflow) and polishes the largest bracket with Brent's method.
pub fn solve_gamma_o(model: &FadingModel) -> Result<IdleBoundary> {
    let e = model.as_erlang("solve_gamma_o")?;
    idle_boundary(e)
}

fn idle_boundary(e: &Erlang) -> Result<IdleBoundary> {
    let condition = |g: f64| log(g) + e.ln_pdf(g) - e.ln_ccdf(g);
    let lo = 1e-6 * e.mean();
    let hi = e.truncation();
    let grid = log_grid(lo, hi, GAMMA_O_SCAN_POINTS);
    let brackets = sign_change_brackets(condition, &grid);
    let &(a, b) = brackets.last().ok_or(Error::NoRoot {
        op: "solve_gamma_o",
        lo,
        hi,
    })?;
    let gain = brent(condition, a, b, ROOT_XTOL, "solve_gamma_o")?;
    Ok(IdleBoundary {
        gain,
        sign_changes: brackets.len(),
    })
}

fn check_b(b: f64, op: &'static str) -> Result<()> {
    if b > 0.0 && b.is_finite() {
        Ok(())
    } else {
        Err(domain(op, format!("bandwidth ratio {b} must be > 0")))
    }
}

fn u_integral(e: &Erlang, b: f64, gain: f64, gamma_o: f64) -> Integral {
    if gain >= gamma_o {
        return Integral {
            value: 0.0,
            error: 0.0,
            converged: true,
        };
    }
    let anchor = phi(e, gain);
    let c = 1.0 / (1.0 + b);
    let r = integrate(
        |t| {
            let s = exp(t);
            kernel(e, s) * exp(c * (phi(e, s) - anchor))
        },
        log(gain),
        log(gamma_o),
        quad_tol(),
    );
    Integral {
        value: c * r.value,
        error: c * r.error,
        converged: r.converged,
    }
}

fn d_integral(e: &Erlang, b: f64, gain: f64, gamma_o: f64) -> Integral {
    let beta = b / (1.0 + b);
    let anchor = phi(e, gain);
    let boundary = exp(log(gamma_o) + e.ln_pdf(gamma_o) + beta * (anchor - phi(e, gamma_o)));
    if gain >= gamma_o {
        return Integral {
            value: boundary,
            error: 0.0,
            converged: true,
        };
    }
    let r = integrate(
        |t| {
            let s = exp(t);
            exp(e.ln_pdf(s) + t + beta * (anchor - phi(e, s)))
        },
        log(gain),
        log(gamma_o),
        quad_tol(),
    );
    Integral {
        value: r.value + boundary,
        ..r
    }
}

fn check_active(gain: f64, gamma_o: f64, op: &'static str) -> Result<()> {
    if gain > 0.0 && gain <= gamma_o * (1.0 + 4.0 * f64::EPSILON) {
        Ok(())
    } else {
        Err(domain(op, format!("gain {gain} outside (0, γ_o = {gamma_o}]")))
    }
}

/// Unconstrained cumulative power `U(γ)` on `(0, γ_o]` by adaptive quadrature.
pub fn cumulative_power_u(model: &FadingModel, b: f64, gain: f64, gamma_o: f64) -> Result<f64> {
    const OP: &str = "cumulative_power_u";
    let e = model.as_erlang(OP)?;
    check_b(b, OP)?;
    check_active(gain, gamma_o, OP)?;
    Ok(u_integral(e, b, gain, gamma_o).value)
}

/// `U` along a descending grid starting at or below `γ_o`, by RK4 on the
/// linear ODE for `U`, marching down from `U(γ_o) = 0`.
pub fn cumulative_power_u_ode(model: &FadingModel, b: f64, grid: &[f64], gamma_o: f64) -> Result<Vec<f64>> {
    const OP: &str = "cumulative_power_u_ode";
    let e = model.as_erlang(OP)?;
    check_b(b, OP)?;
    let mut rhs = |g: f64, u: f64| -kernel(e, g) / (1.0 + b) * (u + 1.0 / g);
    march_down(e, grid, gamma_o, 0.0, &mut rhs, OP)
}

/// `D` along a descending grid by RK4 on its linear ODE from
/// `D(γ_o) = γ_o f(γ_o)`.
pub fn distortion_profile_d_ode(model: &FadingModel, b: f64, grid: &[f64], gamma_o: f64) -> Result<Vec<f64>> {
    const OP: &str = "distortion_profile_d_ode";
    let e = model.as_erlang(OP)?;
    check_b(b, OP)?;
    let beta = b / (1.0 + b);
    let mut rhs = |g: f64, d: f64| beta * kernel(e, g) * d - e.pdf(g);
    march_down(e, grid, gamma_o, gamma_o * e.pdf(gamma_o), &mut rhs, OP)
}

fn march_down<F: FnMut(f64, f64) -> f64>(
    e: &Erlang,
    grid: &[f64],
    gamma_o: f64,
    start: f64,
    rhs: &mut F,
    op: &'static str,
) -> Result<Vec<f64>> {
    let floor = 1e-8 * e.mean();
    let mut out = Vec::with_capacity(grid.len());
    let (mut x, mut y) = (gamma_o, start);
    for &g in grid {
        if g > x * (1.0 + 4.0 * f64::EPSILON) {
            return Err(domain(op, format!("grid must descend from γ_o; {g} follows {x}")));
        }
        if g < floor {
            return Err(Error::StepUnderflow { at: g });
        }
        y = integrate_to(rhs, x, y, g, ODE_TOL)?;
        x = g;
        out.push(y);
    }
    Ok(out)
}

/// Power density `ρ*(γ) = k(γ)/(1+b) · (U + 1/γ)` on the active region.
pub fn power_density_rho(model: &FadingModel, b: f64, gain: f64, u_at_gain: f64) -> Result<f64> {
    let e = model.as_erlang("power_density_rho")?;
    check_b(b, "power_density_rho")?;
    if !(gain > 0.0) {
        return Err(domain("power_density_rho", format!("gain {gain} must be > 0")));
    }
    Ok(rho(e, b, gain, u_at_gain))
}

fn rho(e: &Erlang, b: f64, gain: f64, u: f64) -> f64 {
    kernel(e, gain) / (1.0 + b) * (u + 1.0 / gain)
}

/// Exhaustion boundary: the root of `U(γ) = P` below `γ_o`.
///
/// The lower bracket starts at `1e-3 γ̄` and shrinks tenfold until `U`
/// exceeds the budget; failing that by `1e-12 γ̄` is reported, not clamped.
pub fn solve_gamma_p(model: &FadingModel, b: f64, power: f64, gamma_o: f64) -> Result<f64> {
    const OP: &str = "solve_gamma_p";
    let e = model.as_erlang(OP)?;
    check_b(b, OP)?;
    if !(power > 0.0 && power.is_finite()) {
        return Err(domain(OP, format!("power {power} must be > 0")));
    }
    exhaustion_boundary(e, b, power, gamma_o)
}

fn exhaustion_boundary(e: &Erlang, b: f64, power: f64, gamma_o: f64) -> Result<f64> {
    let limit = 1e-12 * e.mean();
    let mut floor = (1e-3 * e.mean()).min(0.5 * gamma_o);
    loop {
        let u = u_integral(e, b, floor, gamma_o).value;
        if u > power {
            break;
        }
        let next = floor * 0.1;
        if next < limit * (1.0 - 1e-9) {
            return Err(Error::BracketFailure {
                power,
                floor,
                power_at_floor: u,
            });
        }
        floor = next.max(limit);
    }
    brent(
        |g| u_integral(e, b, g, gamma_o).value - power,
        floor,
        gamma_o,
        ROOT_XTOL,
        "solve_gamma_p",
    )
}

/// Cumulative distortion `D(γ)` on `(0, γ_o]` by adaptive quadrature.
pub fn distortion_profile_d(model: &FadingModel, b: f64, gain: f64, gamma_o: f64) -> Result<f64> {
    const OP: &str = "distortion_profile_d";
    let e = model.as_erlang(OP)?;
    check_b(b, OP)?;
    check_active(gain, gamma_o, OP)?;
    Ok(d_integral(e, b, gain, gamma_o).value)
}

/// Equivalent weight `W(γ)`: `γ f(γ)(1 + γU)^{1+b}` on the active region and
/// `1 - F(γ)` on the idle region `γ ≥ γ_o`.
pub fn weight_w(model: &FadingModel, b: f64, gain: f64, u_at_gain: f64, gamma_o: f64) -> Result<f64> {
    let e = model.as_erlang("weight_w")?;
    check_b(b, "weight_w")?;
    if !(gain > 0.0) {
        return Err(domain("weight_w", format!("gain {gain} must be > 0")));
    }
    Ok(weight(e, b, gain, u_at_gain, gamma_o))
}

fn weight(e: &Erlang, b: f64, gain: f64, u: f64, gamma_o: f64) -> f64 {
    if gain >= gamma_o {
        e.ccdf(gain)
    } else {
        exp(log(gain) + e.ln_pdf(gain) + (1.0 + b) * crate::math::log1p(gain * u))
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ContinuumFlags {
    /// The idle-boundary condition changed sign more than once; the largest
    /// root was used.
    pub multiple_gamma_o_roots: bool,
    /// The sampled `U` increased somewhere on the active region (negative
    /// power density).
    pub non_monotone_power: bool,
    /// Some quadrature stopped at its interval cap.
    pub quadrature_unconverged: bool,
}

/// Region boundaries and the minimum expected distortion, without profiles.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContinuumSummary {
    pub gamma_o: f64,
    pub gamma_p: f64,
    pub expected_distortion: f64,
    pub flags: ContinuumFlags,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ContinuumSolution {
    pub fading: Erlang,
    pub power: f64,
    pub bandwidth_ratio: f64,
    pub gamma_o: f64,
    pub gamma_p: f64,
    /// Ascending sample gains; `γ_P` and `γ_o` are always nodes.
    pub grid: Vec<f64>,
    /// `T*(γ)`.
    pub cumulative_power: Vec<f64>,
    /// `ρ*(γ)`, zero outside `[γ_P, γ_o]`.
    pub power_density: Vec<f64>,
    /// `D(γ)`.
    pub distortion: Vec<f64>,
    /// `W(γ)`.
    pub weight: Vec<f64>,
    pub expected_distortion: f64,
    pub flags: ContinuumFlags,
    rates: RateProfile,
}

fn erlang_config(config: &ChannelConfig) -> Result<&Erlang> {
    let e = config.fading.as_erlang("min_expected_distortion")?;
    check_b(config.bandwidth_ratio, "min_expected_distortion")?;
    if !(config.power > 0.0 && config.power.is_finite()) {
        return Err(domain(
            "min_expected_distortion",
            format!("power {} must be > 0", config.power),
        ));
    }
    Ok(e)
}

/// Boundaries and `E[D]*` only; what a sweep needs.
pub fn solve_summary(config: &ChannelConfig) -> Result<ContinuumSummary> {
    let e = erlang_config(config)?;
    let b = config.bandwidth_ratio;
    let idle = idle_boundary(e)?;
    let gamma_o = idle.gain;
    let gamma_p = exhaustion_boundary(e, b, config.power, gamma_o)?;
    let d = d_integral(e, b, gamma_p, gamma_o);
    Ok(ContinuumSummary {
        gamma_o,
        gamma_p,
        expected_distortion: (e.cdf(gamma_p) + d.value).clamp(0.0, 1.0),
        flags: ContinuumFlags {
            multiple_gamma_o_roots: idle.is_ambiguous(),
            quadrature_unconverged: !d.converged,
            ..ContinuumFlags::default()
        },
    })
}

/// Full solution with profiles on the default grid.
pub fn min_expected_distortion(config: &ChannelConfig) -> Result<ContinuumSolution> {
    min_expected_distortion_with_grid(config, DEFAULT_GRID_POINTS)
}

/// Full solution with profiles sampled at `points` log-spaced gains over
/// `[max(γ_P/2, 1e-6 γ̄), 1.5 γ_o]`, plus the two boundaries.
pub fn min_expected_distortion_with_grid(config: &ChannelConfig, points: usize) -> Result<ContinuumSolution> {
    let e = *erlang_config(config)?;
    let b = config.bandwidth_ratio;
    let power = config.power;
    let summary = solve_summary(config)?;
    let (gamma_o, gamma_p) = (summary.gamma_o, summary.gamma_p);
    let mut flags = summary.flags;

    let lo = (0.5 * gamma_p).max(1e-6 * e.mean());
    let mut grid = log_grid(lo, 1.5 * gamma_o, points.max(2));
    grid.push(gamma_p);
    grid.push(gamma_o);
    grid.sort_by(f64::total_cmp);
    grid.dedup();

    let n = grid.len();
    let mut cumulative_power = Vec::with_capacity(n);
    let mut power_density = Vec::with_capacity(n);
    let mut distortion = Vec::with_capacity(n);
    let mut weights = Vec::with_capacity(n);
    for &g in &grid {
        if g > gamma_o {
            cumulative_power.push(0.0);
            power_density.push(0.0);
            let tail = e.ccdf(g);
            distortion.push(tail);
            weights.push(tail);
        } else if g >= gamma_p {
            let u = u_integral(&e, b, g, gamma_o);
            let d = d_integral(&e, b, g, gamma_o);
            flags.quadrature_unconverged |= !(u.converged && d.converged);
            // U(γ_P) = P holds only to the root tolerance; pin the boundary value
            let t = if g == gamma_p { power } else { u.value.min(power) };
            cumulative_power.push(t);
            power_density.push(rho(&e, b, g, u.value));
            distortion.push(d.value);
            weights.push(weight(&e, b, g, u.value, gamma_o));
        } else {
            cumulative_power.push(power);
            power_density.push(0.0);
            // D(γ) = F(γ_P) - F(γ) + D(γ_P) = E[D]* - F(γ)
            let d = summary.expected_distortion - e.cdf(g);
            distortion.push(d);
            weights.push(d * pow(1.0 + g * power, b));
        }
    }
    let active: Vec<usize> = (0..n).filter(|&k| grid[k] >= gamma_p && grid[k] <= gamma_o).collect();
    flags.non_monotone_power = active
        .windows(2)
        .any(|w| cumulative_power[w[1]] > cumulative_power[w[0]] * (1.0 + 1e-12) + 1e-15)
        || active.iter().any(|&k| power_density[k] < 0.0);

    let rates = RateProfile::new(grid.clone(), cumulative_power.clone());
    Ok(ContinuumSolution {
        fading: e,
        power,
        bandwidth_ratio: b,
        gamma_o,
        gamma_p,
        grid,
        cumulative_power,
        power_density,
        distortion,
        weight: weights,
        expected_distortion: summary.expected_distortion,
        flags,
        rates,
    })
}

impl ContinuumSolution {
    pub fn config(&self) -> ChannelConfig {
        ChannelConfig {
            power: self.power,
            bandwidth_ratio: self.bandwidth_ratio,
            fading: FadingModel::Erlang(self.fading),
        }
    }

    /// `T*(γ)` evaluated directly (not interpolated).
    pub fn cumulative_power_at(&self, gain: f64) -> f64 {
        if gain > self.gamma_o {
            0.0
        } else if gain < self.gamma_p {
            self.power
        } else {
            u_integral(&self.fading, self.bandwidth_ratio, gain, self.gamma_o).value
        }
    }

    /// `ρ*(γ)` evaluated directly.
    pub fn power_density_at(&self, gain: f64) -> f64 {
        if gain > self.gamma_o || gain < self.gamma_p {
            0.0
        } else {
            rho(&self.fading, self.bandwidth_ratio, gain, self.cumulative_power_at(gain))
        }
    }

    /// `D(γ)` evaluated directly on all three regions.
    pub fn distortion_at(&self, gain: f64) -> f64 {
        let e = &self.fading;
        if gain > self.gamma_o {
            e.ccdf(gain)
        } else if gain >= self.gamma_p {
            d_integral(e, self.bandwidth_ratio, gain, self.gamma_o).value
        } else {
            let d_p = d_integral(e, self.bandwidth_ratio, self.gamma_p, self.gamma_o).value;
            e.cdf(self.gamma_p) - e.cdf(gain) + d_p
        }
    }

    /// `W(γ)` evaluated directly; below `γ_P` it is `D(γ)(1 + γP)^b`.
    pub fn weight_at(&self, gain: f64) -> f64 {
        if gain < self.gamma_p {
            self.distortion_at(gain) * pow(1.0 + gain * self.power, self.bandwidth_ratio)
        } else {
            weight(
                &self.fading,
                self.bandwidth_ratio,
                gain,
                self.cumulative_power_at(gain),
                self.gamma_o,
            )
        }
    }

    /// Sampled allocation used for realized rates.
    pub fn rate_profile(&self) -> &RateProfile {
        &self.rates
    }

    /// Indices of grid nodes inside `[γ_P, γ_o]`.
    pub fn active_indices(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.grid.len()).filter(move |&k| self.grid[k] >= self.gamma_p && self.grid[k] <= self.gamma_o)
    }
}
