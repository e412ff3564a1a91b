//! Finite-layer power allocation by the per-step KKT recursion, with the
//! expected-distortion evaluator and a grid-search oracle for small stacks.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{domain, Error, Result};
use crate::fading::DiscreteStates;
use crate::math::{exp, log1p, pow, LN_2};

/// Largest stack the brute-force oracle enumerates.
pub const BRUTE_FORCE_MAX_LAYERS: usize = 4;

const MONOTONE_REL_TOL: f64 = 1e-10;
const DESCENT_STOP: f64 = 1e-12;
const DESCENT_MAX_SWEEPS: usize = 10_000;

/// Candidate cumulative power from the two-layer stationarity condition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepPower {
    Finite(f64),
    /// The lower layer sits at zero gain; the optimum pushes all available
    /// power upward and callers clamp to what is left.
    Unbounded,
}

impl StepPower {
    pub fn value(self) -> f64 {
        match self {
            StepPower::Finite(t) => t,
            StepPower::Unbounded => f64::INFINITY,
        }
    }
}

/// Rate of a layer decoded at gain `gain` with `interference` power from
/// the undecoded layers above it, in bits.
pub fn layer_rate(gain: f64, layer_power: f64, interference: f64) -> f64 {
    log1p(gain * layer_power / (1.0 + gain * interference)) / LN_2
}

/// Minimizer over `T ≥ 0` of `(1+γ_low T)^b [p_low + (1+γ_high T)^{-b} W_high]`:
///
/// `T* = max(0, ([W_high (γ_high - γ_low) / (γ_low p_low)]^{1/(1+b)} - 1) / γ_high)`.
pub fn unconstrained_step(gain_low: f64, prob_low: f64, gain_high: f64, weight_high: f64, b: f64) -> Result<StepPower> {
    const OP: &str = "unconstrained_step";
    if !(prob_low > 0.0) {
        return Err(domain(OP, format!("p_low = {prob_low} must be > 0")));
    }
    if !(weight_high > 0.0) {
        return Err(domain(OP, format!("W_high = {weight_high} must be > 0")));
    }
    if !(b > 0.0) {
        return Err(domain(OP, format!("b = {b} must be > 0")));
    }
    if !(gain_high > gain_low && gain_low >= 0.0) {
        return Err(domain(
            OP,
            format!("need γ_high > γ_low >= 0, got {gain_high}, {gain_low}"),
        ));
    }
    if gain_low == 0.0 {
        return Ok(StepPower::Unbounded);
    }
    let bracket = weight_high * (gain_high - gain_low) / (gain_low * prob_low);
    if bracket <= 1.0 {
        return Ok(StepPower::Finite(0.0));
    }
    Ok(StepPower::Finite((pow(bracket, 1.0 / (1.0 + b)) - 1.0) / gain_high))
}

/// Weight of the lower layer once the upper layers hold cumulative power `t`.
pub fn weight_update(gain_low: f64, prob_low: f64, gain_high: f64, weight_high: f64, t: f64, b: f64) -> f64 {
    pow(1.0 + gain_low * t, b) * (prob_low + pow(1.0 + gain_high * t, -b) * weight_high)
}

/// Expected distortion `Σᵢ pᵢ Πⱼ≤ᵢ ((1+γⱼTⱼ)/(1+γⱼTⱼ₊₁))^{-b}` for cumulative
/// powers `T₁..T_M` (with `T_{M+1} = 0`), accumulated in log space.
pub fn expected_distortion_of_allocation(gains: &[f64], probs: &[f64], cumulative: &[f64], b: f64) -> f64 {
    let m = gains.len();
    let mut ln_d = 0.0;
    let mut total = 0.0;
    for i in 0..m {
        let above = if i + 1 < m { cumulative[i + 1] } else { 0.0 };
        ln_d -= b * (log1p(gains[i] * cumulative[i]) - log1p(gains[i] * above));
        total += probs[i] * exp(ln_d);
    }
    total.clamp(0.0, 1.0)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct DiscreteFlags {
    /// The candidate powers were not monotone in the active region and
    /// coordinate descent produced the allocation.
    pub monotonicity_fallback: bool,
    /// Coordinate descent stopped at its sweep cap, not at its tolerance.
    pub descent_capped: bool,
    /// The top layer alone absorbed the entire budget.
    pub exhausted_at_top: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteLayering {
    pub gains: Vec<f64>,
    pub probabilities: Vec<f64>,
    /// `T₁..T_M`.
    pub cumulative_power: Vec<f64>,
    /// `Pᵢ = Tᵢ - Tᵢ₊₁`.
    pub layer_power: Vec<f64>,
    /// Per-layer rates in bits per channel use.
    pub rates: Vec<f64>,
    /// `R₁ + … + Rᵢ`, the rate decodable once layer `i` is.
    pub cumulative_rates: Vec<f64>,
    /// Equivalent probability weights `Wᵢ` of the layers at and above `i`.
    pub weights: Vec<f64>,
    pub expected_distortion: f64,
    pub flags: DiscreteFlags,
}

impl DiscreteLayering {
    /// Derives powers, rates, weights and E[D] from a cumulative allocation.
    pub fn from_allocation(states: &DiscreteStates, budget: f64, mut cumulative: Vec<f64>, b: f64) -> Result<Self> {
        const OP: &str = "from_allocation";
        let gains = states.gains();
        let probs = states.probabilities();
        let m = gains.len();
        if cumulative.len() != m {
            return Err(domain(OP, format!("{} powers for {m} layers", cumulative.len())));
        }
        if cumulative[0] > budget + 1e-12 {
            return Err(domain(OP, format!("T_1 = {} exceeds budget {budget}", cumulative[0])));
        }
        let mut layer_power = vec![0.0; m];
        for i in 0..m {
            let above = if i + 1 < m { cumulative[i + 1] } else { 0.0 };
            let p = cumulative[i] - above;
            if p < -1e-12 {
                return Err(domain(OP, format!("cumulative power increases at layer {}", i + 1)));
            }
            if p < 0.0 {
                cumulative[i] = above;
            }
            layer_power[i] = p.max(0.0);
        }
        let rates: Vec<f64> = (0..m)
            .map(|i| {
                let above = if i + 1 < m { cumulative[i + 1] } else { 0.0 };
                layer_rate(gains[i], layer_power[i], above)
            })
            .collect();
        let cumulative_rates = rates
            .iter()
            .scan(0.0, |acc, r| {
                *acc += r;
                Some(*acc)
            })
            .collect();
        let mut weights = vec![0.0; m];
        weights[m - 1] = probs[m - 1];
        for i in (0..m - 1).rev() {
            weights[i] = weight_update(gains[i], probs[i], gains[i + 1], weights[i + 1], cumulative[i + 1], b);
        }
        let expected_distortion = expected_distortion_of_allocation(gains, probs, &cumulative, b);
        Ok(DiscreteLayering {
            gains: gains.to_vec(),
            probabilities: probs.to_vec(),
            cumulative_power: cumulative,
            layer_power,
            rates,
            cumulative_rates,
            weights,
            expected_distortion,
            flags: DiscreteFlags::default(),
        })
    }

    pub fn layers(&self) -> usize {
        self.gains.len()
    }

    /// Total decodable rate in bits at realized gain `gain`.
    pub fn realized_rate_bits(&self, gain: f64) -> f64 {
        match self.gains.partition_point(|&g| g <= gain) {
            0 => 0.0,
            k => self.cumulative_rates[k - 1],
        }
    }
}

fn check_common(budget: f64, b: f64, op: &'static str) -> Result<()> {
    if !(budget >= 0.0 && budget.is_finite()) {
        return Err(domain(op, format!("power budget {budget} must be finite and >= 0")));
    }
    if !(b > 0.0 && b.is_finite()) {
        return Err(domain(op, format!("bandwidth ratio {b} must be > 0")));
    }
    Ok(())
}

/// Top-down candidate powers `Ûᵢ` for a stack with `Û₁ = P`.
fn candidates(gains: &[f64], probs: &[f64], budget: f64, b: f64) -> Result<Vec<f64>> {
    let m = gains.len();
    let mut candidate = vec![budget; m];
    let mut weight = probs[m - 1];
    for i in (0..m - 1).rev() {
        let step = unconstrained_step(gains[i], probs[i], gains[i + 1], weight, b)?;
        candidate[i + 1] = step.value();
        weight = match step {
            StepPower::Finite(t) => weight_update(gains[i], probs[i], gains[i + 1], weight, t, b),
            StepPower::Unbounded => probs[i],
        };
    }
    Ok(candidate)
}

/// Highest `i` whose candidate exceeds the one below it while that one is
/// below the budget, i.e. where layer `i - 1` would get negative power.
fn highest_violation(candidate: &[f64], budget: f64) -> Option<usize> {
    (2..candidate.len()).rev().find(|&i| {
        let lower = candidate[i - 1];
        lower < budget && candidate[i] > lower * (1.0 + MONOTONE_REL_TOL) && candidate[i] > 0.0
    })
}

/// Optimal cumulative powers for a tabulated fading distribution.
///
/// A top-down pass produces candidate powers `Ûᵢ` and weights `Wᵢ`; the
/// allocation is `Tᵢ = min(Ûᵢ, Tᵢ₋₁)` with `T₁ = P`. If the candidates are
/// not nonincreasing in gain where they bind, the offending layers are
/// emptied one at a time: a state whose layer carries no power decodes
/// exactly what the next active state below it decodes, so its probability
/// folds into that state and the recursion reruns on the shorter stack.
/// The merged allocation is then polished by projected coordinate descent
/// and flagged.
pub fn solve_discrete(states: &DiscreteStates, budget: f64, b: f64) -> Result<DiscreteLayering> {
    check_common(budget, b, "solve_discrete")?;
    let gains = states.gains();
    let probs = states.probabilities();
    let m = gains.len();

    let mut candidate = candidates(gains, probs, budget, b)?;
    let mut flags = DiscreteFlags::default();
    if highest_violation(&candidate, budget).is_some() {
        flags.monotonicity_fallback = true;
        let mut active: Vec<usize> = (0..m).collect();
        let mut merged_probs = probs.to_vec();
        loop {
            let g: Vec<f64> = active.iter().map(|&j| gains[j]).collect();
            let p: Vec<f64> = active.iter().map(|&j| merged_probs[j]).collect();
            let c = candidates(&g, &p, budget, b)?;
            match highest_violation(&c, budget) {
                Some(k) => {
                    let emptied = active.remove(k - 1);
                    merged_probs[active[k - 2]] += merged_probs[emptied];
                }
                None => {
                    // an emptied state takes the cumulative power of the first active layer above it
                    let mut k = active.len();
                    for j in (0..m).rev() {
                        while k > 0 && active[k - 1] >= j {
                            k -= 1;
                        }
                        candidate[j] = c.get(k).copied().unwrap_or(0.0);
                    }
                    break;
                }
            }
        }
    }

    let mut cumulative = vec![budget; m];
    for i in 1..m {
        cumulative[i] = candidate[i].min(cumulative[i - 1]);
    }
    if flags.monotonicity_fallback {
        flags.descent_capped = !coordinate_descent(gains, probs, &mut cumulative, b);
    }
    flags.exhausted_at_top = m > 1 && budget > 0.0 && cumulative[m - 1] >= budget;

    let mut layering = DiscreteLayering::from_allocation(states, budget, cumulative, b)?;
    layering.flags = flags;
    Ok(layering)
}

/// Repeated exact per-coordinate minimization of E[D] over
/// `Tᵢ ∈ [Tᵢ₊₁, Tᵢ₋₁]`, `i = 2..M`. Returns false if the sweep cap was hit.
fn coordinate_descent(gains: &[f64], probs: &[f64], cumulative: &mut [f64], b: f64) -> bool {
    let m = gains.len();
    let factor = |t: &[f64], j: usize| {
        let above = if j + 1 < m { t[j + 1] } else { 0.0 };
        exp(-b * (log1p(gains[j] * t[j]) - log1p(gains[j] * above)))
    };
    let mut objective = expected_distortion_of_allocation(gains, probs, cumulative, b);
    for _ in 0..DESCENT_MAX_SWEEPS {
        // tail[i] = pᵢ + Σ_{k>i} p_k Π_{i<j≤k} f_j, rebuilt as the sweep descends
        let mut tail = probs[m - 1];
        for i in (1..m).rev() {
            let above = if i + 1 < m { cumulative[i + 1] } else { 0.0 };
            let upper = cumulative[i - 1];
            let w = pow(1.0 + gains[i] * above, b) * tail;
            let best = match unconstrained_step(gains[i - 1], probs[i - 1], gains[i], w, b) {
                Ok(step) => step.value(),
                Err(_) => cumulative[i],
            };
            cumulative[i] = best.clamp(above, upper);
            tail = probs[i - 1] + factor(cumulative, i) * tail;
        }
        let next = expected_distortion_of_allocation(gains, probs, cumulative, b);
        let gain = objective - next;
        objective = next;
        if gain < DESCENT_STOP {
            return true;
        }
    }
    false
}

/// Exhaustive search over `P ≥ T₂ ≥ … ≥ T_M ≥ 0` on a uniform grid of
/// `grid_points` levels in `[0, P]`.
pub fn brute_force_oracle(
    states: &DiscreteStates,
    budget: f64,
    b: f64,
    grid_points: usize,
) -> Result<DiscreteLayering> {
    check_common(budget, b, "brute_force_oracle")?;
    let m = states.len();
    if m > BRUTE_FORCE_MAX_LAYERS {
        return Err(Error::TooManyLayers {
            layers: m,
            max: BRUTE_FORCE_MAX_LAYERS,
        });
    }
    if grid_points < 2 {
        return Err(domain("brute_force_oracle", "need at least 2 grid points"));
    }
    let levels: Vec<f64> = (0..grid_points)
        .map(|k| budget * k as f64 / (grid_points - 1) as f64)
        .collect();
    let gains = states.gains();
    let probs = states.probabilities();

    let mut current = vec![budget; m];
    let mut best = current.clone();
    let mut best_value = expected_distortion_of_allocation(gains, probs, &current, b);
    let mut idx = vec![grid_points - 1; m];

    fn recurse(depth: usize, idx: &mut [usize], current: &mut [f64], levels: &[f64], eval: &mut dyn FnMut(&[f64])) {
        if depth == current.len() {
            eval(current);
            return;
        }
        for k in 0..=idx[depth - 1] {
            idx[depth] = k;
            current[depth] = levels[k];
            recurse(depth + 1, idx, current, levels, eval);
        }
    }

    if m > 1 {
        let mut eval = |t: &[f64]| {
            let v = expected_distortion_of_allocation(gains, probs, t, b);
            if v < best_value {
                best_value = v;
                best.copy_from_slice(t);
            }
        };
        recurse(1, &mut idx, &mut current, &levels, &mut eval);
    }
    DiscreteLayering::from_allocation(states, budget, best, b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "{a} vs {b} (tol {tol})");
    }

    fn states(g: &[f64], p: &[f64]) -> DiscreteStates {
        DiscreteStates::new(g.to_vec(), p.to_vec()).unwrap()
    }

    // Golden-section search, independent of the closed form.
    fn golden_min(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> f64 {
        let r = (5f64.sqrt() - 1.0) / 2.0;
        let mut c = b - r * (b - a);
        let mut d = a + r * (b - a);
        while (b - a).abs() > tol {
            if f(c) < f(d) {
                b = d;
            } else {
                a = c;
            }
            c = b - r * (b - a);
            d = a + r * (b - a);
        }
        0.5 * (a + b)
    }

    #[test]
    fn layer_rate_examples() {
        close(layer_rate(1.0, 1.0, 0.0), 1.0, 1e-15);
        close(layer_rate(0.0, 3.0, 2.0), 0.0, 0.0);
        close(layer_rate(1.0, 1.0, 1.0), libm::log2(1.5), 1e-15);
    }

    #[test]
    fn expected_distortion_examples() {
        close(
            expected_distortion_of_allocation(&[1.0, 2.0], &[0.5, 0.5], &[0.0, 0.0], 1.0),
            1.0,
            0.0,
        );
        close(
            expected_distortion_of_allocation(&[1.0], &[1.0], &[1.0], 1.0),
            0.5,
            1e-15,
        );
        // Independent route via per-layer rates: D_rlz(k) = 2^{-b Σ R_j}.
        let g = [1.0, 2.0];
        let t = [1.0, 0.5];
        let r1 = libm::log2(1.0 + g[0] * (t[0] - t[1]) / (1.0 + g[0] * t[1]));
        let r2 = libm::log2(1.0 + g[1] * t[1]);
        let oracle = 0.5 * libm::exp2(-r1) + 0.5 * libm::exp2(-(r1 + r2));
        close(oracle, 0.5625, 1e-15);
        close(
            expected_distortion_of_allocation(&g, &[0.5, 0.5], &t, 1.0),
            oracle,
            1e-15,
        );
    }

    #[test]
    fn unconstrained_step_examples() {
        assert_eq!(
            unconstrained_step(1.0, 0.5, 2.0, 0.5, 1.0).unwrap(),
            StepPower::Finite(0.0)
        );
        // γ_low at the idle boundary: γ_low = (W/p)(γ_high - γ_low)
        assert_eq!(
            unconstrained_step(1.0, 0.4, 1.5, 0.8, 2.0).unwrap(),
            StepPower::Finite(0.0)
        );
        let t = unconstrained_step(1.0, 0.5, 2.0, 2.0, 1.0).unwrap().value();
        let objective = |t: f64| (1.0 + t) * (0.5 + 2.0 / (1.0 + 2.0 * t));
        let oracle = golden_min(objective, 0.0, 10.0, 1e-8);
        // comparing function values limits golden section to ~sqrt(eps)
        close(t, oracle, 5e-8);
        close(t, 0.5, 1e-15);
        assert_eq!(
            unconstrained_step(0.0, 0.5, 2.0, 2.0, 1.0).unwrap(),
            StepPower::Unbounded
        );
    }

    #[test]
    fn unconstrained_step_domain_errors() {
        assert!(unconstrained_step(1.0, 0.0, 2.0, 1.0, 1.0).is_err());
        assert!(unconstrained_step(1.0, 0.5, 2.0, 0.0, 1.0).is_err());
        assert!(unconstrained_step(1.0, 0.5, 2.0, 1.0, 0.0).is_err());
        assert!(unconstrained_step(2.0, 0.5, 1.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn uniform_spacing_bracket_matches_density_form() {
        // p_low = f Δ, γ_high - γ_low = Δ  =>  bracket W / (f (γ - Δ))
        let (gamma, delta, f, w, b) = (0.75, 0.01, 0.4, 0.3, 2.0);
        let t = unconstrained_step(gamma - delta, f * delta, gamma, w, b)
            .unwrap()
            .value();
        let density_form = (libm::pow(w / (f * (gamma - delta)), 1.0 / (1.0 + b)) - 1.0) / gamma;
        close(t, density_form, 1e-15 * density_form.abs().max(1.0));
    }

    #[test]
    fn weight_update_examples() {
        close(weight_update(1.0, 0.3, 2.0, 0.4, 0.0, 1.5), 0.7, 1e-15);
        close(weight_update(0.0, 0.3, 2.0, 0.4, 1.0, 1.0), 0.3 + 0.4 / 3.0, 1e-15);
        close(weight_update(1.0, 0.5, 2.0, 1.0, 1.0, 1.0), 5.0 / 3.0, 1e-15);
    }

    #[test]
    fn single_layer_takes_everything() {
        let s = states(&[1.0], &[1.0]);
        let l = solve_discrete(&s, 1.0, 1.0).unwrap();
        assert_eq!(l.cumulative_power, vec![1.0]);
        close(l.expected_distortion, 0.5, 1e-15);
        let o = brute_force_oracle(&s, 1.0, 1.0, 10).unwrap();
        assert_eq!(o.cumulative_power, l.cumulative_power);
    }

    #[test]
    fn two_layers_match_grid() {
        let s = states(&[0.5, 2.0], &[0.5, 0.5]);
        let l = solve_discrete(&s, 1.0, 1.0).unwrap();
        let o = brute_force_oracle(&s, 1.0, 1.0, 2000).unwrap();
        let cell = 1.0 / 1999.0;
        assert!((l.cumulative_power[1] - o.cumulative_power[1]).abs() <= cell);
        assert!(l.expected_distortion <= o.expected_distortion + 1e-9);
    }

    #[test]
    fn three_layers_match_grid() {
        let s = states(&[0.3, 1.0, 3.0], &[1.0 / 3.0, 1.0 / 3.0, 1.0 - 2.0 / 3.0]);
        let l = solve_discrete(&s, 2.0, 1.0).unwrap();
        let o = brute_force_oracle(&s, 2.0, 1.0, 2000).unwrap();
        close(l.expected_distortion, o.expected_distortion, 1e-5);
        assert!(l.expected_distortion <= o.expected_distortion + 1e-9);
        assert!(!l.flags.monotonicity_fallback);
    }

    #[test]
    fn zero_gain_layer_gets_no_rate() {
        let s = states(&[0.0, 1.0, 2.0], &[0.2, 0.5, 0.3]);
        let l = solve_discrete(&s, 3.0, 1.5).unwrap();
        assert_eq!(l.rates[0], 0.0);
        assert_eq!(l.cumulative_power[1], 3.0);
        assert_eq!(l.layer_power[0], 0.0);
    }

    #[test]
    fn brute_force_rejects_large_stacks() {
        let g: Vec<f64> = (0..5).map(|i| i as f64).collect();
        let s = states(&g, &[0.2; 5]);
        assert!(matches!(
            brute_force_oracle(&s, 1.0, 1.0, 10),
            Err(Error::TooManyLayers { .. })
        ));
    }

    #[test]
    fn zero_budget_is_unit_distortion() {
        let s = states(&[0.5, 1.0], &[0.5, 0.5]);
        let l = solve_discrete(&s, 0.0, 2.0).unwrap();
        close(l.expected_distortion, 1.0, 0.0);
    }

    #[test]
    fn weights_follow_recursion_in_unconstrained_region() {
        let s = states(&[0.3, 1.0, 3.0], &[0.3, 0.4, 0.3]);
        let l = solve_discrete(&s, 50.0, 1.0).unwrap();
        // D*_1 = (1 + γ₁T₁)^{-b} W₁
        close(
            l.expected_distortion,
            libm::pow(1.0 + l.gains[0] * l.cumulative_power[0], -1.0) * l.weights[0],
            1e-14,
        );
    }

    #[test]
    fn emptied_middle_layers_match_grid() {
        // coordinate moves alone stall here with T₂ = T₃ bound together
        let s = states(
            &[0.11197924402974299, 0.161979244029743, 0.211979244029743],
            &[0.3482142007403404, 0.033344463600950884, 0.6184413356587087],
        );
        let l = solve_discrete(&s, 0.1, 0.3).unwrap();
        assert!(l.flags.monotonicity_fallback);
        let o = brute_force_oracle(&s, 0.1, 0.3, 2000).unwrap();
        assert!(l.expected_distortion <= o.expected_distortion + 1e-12);
    }

    #[test]
    fn fallback_improves_non_monotone_candidates() {
        let (gains, probs) = ([0.5, 1.0, 1.01], [0.98, 0.01, 0.01]);
        let mut t = vec![1.0, 0.9, 0.1];
        let before = expected_distortion_of_allocation(&gains, &probs, &t, 1.0);
        assert!(coordinate_descent(&gains, &probs, &mut t, 1.0));
        let after = expected_distortion_of_allocation(&gains, &probs, &t, 1.0);
        assert!(after <= before);
        let o = brute_force_oracle(&states(&gains, &probs), 1.0, 1.0, 1000).unwrap();
        assert!(after <= o.expected_distortion + 1e-6);
    }
}
