//! Channel power-gain distributions: Erlang-L (Rayleigh when L = 1) and
//! tabulated discrete states.

use alloc::format;
use alloc::vec::Vec;

use crate::error::{domain, Error, Result};
use crate::math::{exp, fabs, lgamma, ln_factorial, log, log1p, log_sum_exp};

/// Tail mass allowed beyond the truncation point of an Erlang support.
pub const TRUNCATION_TAIL_BOUND: f64 = 1e-15;

/// Erlang distribution of the average of `order` iid exponential gains,
/// each with mean `mean`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Erlang {
    order: u32,
    mean: f64,
    // ln[(L/γ̄)^L / (L-1)!]
    ln_norm: f64,
}

impl Erlang {
    pub fn new(order: u32, mean: f64) -> Result<Self> {
        if order == 0 {
            return Err(Error::InvalidModel("diversity order must be >= 1".into()));
        }
        if !(mean.is_finite() && mean > 0.0) {
            return Err(Error::InvalidModel(format!("mean gain must be positive, got {mean}")));
        }
        let l = order as f64;
        let model = Erlang {
            order,
            mean,
            ln_norm: l * log(l / mean) - ln_factorial(order - 1),
        };
        let tail = model.ccdf(model.truncation());
        if !(tail < TRUNCATION_TAIL_BOUND) {
            return Err(Error::InvalidModel(format!(
                "tail mass {tail:e} beyond truncation exceeds {TRUNCATION_TAIL_BOUND:e}"
            )));
        }
        Ok(model)
    }

    /// Rayleigh fading (L = 1) with mean power gain `mean`.
    pub fn rayleigh(mean: f64) -> Result<Self> {
        Erlang::new(1, mean)
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// γ̄·(50/L + 50): upper end of the support used for quadrature.
    pub fn truncation(&self) -> f64 {
        self.mean * (50.0 / self.order as f64 + 50.0)
    }

    fn scaled(&self, gain: f64) -> f64 {
        self.order as f64 * gain / self.mean
    }

    pub fn ln_pdf(&self, gain: f64) -> f64 {
        if gain < 0.0 {
            return f64::NEG_INFINITY;
        }
        if gain == 0.0 {
            return if self.order == 1 {
                self.ln_norm
            } else {
                f64::NEG_INFINITY
            };
        }
        self.ln_norm + (self.order - 1) as f64 * log(gain) - self.scaled(gain)
    }

    pub fn pdf(&self, gain: f64) -> f64 {
        exp(self.ln_pdf(gain))
    }

    /// f'(γ)/f(γ) = (L-1)/γ - L/γ̄.
    pub fn log_density_slope(&self, gain: f64) -> f64 {
        (self.order - 1) as f64 / gain - self.order as f64 / self.mean
    }

    // ln Q(L, x) with Q(L, x) = e^{-x} Σ_{k<L} x^k / k!
    fn ln_upper(&self, x: f64) -> f64 {
        if x == 0.0 {
            return 0.0;
        }
        let lx = log(x);
        -x + log_sum_exp((0..self.order).map(|k| k as f64 * lx - ln_factorial(k)))
    }

    // P(L, x) by its power series; used where x < L so terms shrink quickly.
    fn lower_series(&self, x: f64) -> f64 {
        if x == 0.0 {
            return 0.0;
        }
        let l = self.order as f64;
        let mut term = 1.0;
        let mut sum = 1.0;
        let mut n = 1.0;
        while term > 1e-17 * sum {
            term *= x / (l + n);
            sum += term;
            n += 1.0;
        }
        exp(-x + l * log(x) - lgamma(l + 1.0)) * sum
    }

    pub fn cdf(&self, gain: f64) -> f64 {
        if gain <= 0.0 {
            return 0.0;
        }
        let x = self.scaled(gain);
        if x < self.order as f64 {
            self.lower_series(x)
        } else {
            1.0 - exp(self.ln_upper(x))
        }
    }

    /// 1 - F(γ), accurate in the far tail.
    pub fn ccdf(&self, gain: f64) -> f64 {
        if gain <= 0.0 {
            return 1.0;
        }
        let x = self.scaled(gain);
        if x < self.order as f64 {
            1.0 - self.lower_series(x)
        } else {
            exp(self.ln_upper(x))
        }
    }

    pub fn ln_ccdf(&self, gain: f64) -> f64 {
        if gain <= 0.0 {
            return 0.0;
        }
        let x = self.scaled(gain);
        if x < self.order as f64 {
            log1p(-self.lower_series(x))
        } else {
            self.ln_upper(x)
        }
    }

    /// Probability mass on `[lo, hi)`, taken from whichever tail keeps
    /// precision.
    pub fn mass_between(&self, lo: f64, hi: f64) -> f64 {
        if lo >= self.mean {
            self.ccdf(lo) - self.ccdf(hi)
        } else {
            self.cdf(hi) - self.cdf(lo)
        }
    }
}

/// Finite set of gain states with their probabilities, ascending in gain.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteStates {
    gains: Vec<f64>,
    probs: Vec<f64>,
}

impl DiscreteStates {
    pub fn new(gains: Vec<f64>, probs: Vec<f64>) -> Result<Self> {
        if gains.is_empty() {
            return Err(Error::InvalidModel("no discrete states".into()));
        }
        if gains.len() != probs.len() {
            return Err(Error::InvalidModel(format!(
                "{} gains but {} probabilities",
                gains.len(),
                probs.len()
            )));
        }
        for (i, (&g, &p)) in gains.iter().zip(&probs).enumerate() {
            if !(g.is_finite() && g >= 0.0) {
                return Err(Error::InvalidModel(format!(
                    "state {i}: gain {g} must be finite and >= 0"
                )));
            }
            if !(p.is_finite() && p > 0.0) {
                return Err(Error::InvalidModel(format!("state {i}: probability {p} must be > 0")));
            }
            if i > 0 && g <= gains[i - 1] {
                return Err(Error::InvalidModel(format!(
                    "gains must be strictly ascending (state {i}: {g} after {})",
                    gains[i - 1]
                )));
            }
        }
        let total: f64 = probs.iter().sum();
        if fabs(total - 1.0) > 1e-12 {
            return Err(Error::InvalidModel(format!("probabilities sum to {total}, not 1")));
        }
        Ok(DiscreteStates { gains, probs })
    }

    pub fn gains(&self) -> &[f64] {
        &self.gains
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.gains.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gains.is_empty()
    }

    pub fn mean(&self) -> f64 {
        self.gains.iter().zip(&self.probs).map(|(g, p)| g * p).sum()
    }

    pub fn cdf(&self, gain: f64) -> f64 {
        let n = self.gains.partition_point(|&g| g <= gain);
        self.probs[..n].iter().sum::<f64>().min(1.0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum FadingModel {
    Erlang(Erlang),
    Discrete(DiscreteStates),
}

impl From<Erlang> for FadingModel {
    fn from(e: Erlang) -> Self {
        FadingModel::Erlang(e)
    }
}

impl From<DiscreteStates> for FadingModel {
    fn from(d: DiscreteStates) -> Self {
        FadingModel::Discrete(d)
    }
}

impl FadingModel {
    pub fn erlang(order: u32, mean: f64) -> Result<Self> {
        Erlang::new(order, mean).map(Into::into)
    }

    pub fn as_erlang(&self, op: &'static str) -> Result<&Erlang> {
        match self {
            FadingModel::Erlang(e) => Ok(e),
            FadingModel::Discrete(_) => Err(Error::KindMismatch { op, expected: "Erlang" }),
        }
    }

    pub fn as_discrete(&self, op: &'static str) -> Result<&DiscreteStates> {
        match self {
            FadingModel::Discrete(d) => Ok(d),
            FadingModel::Erlang(_) => Err(Error::KindMismatch {
                op,
                expected: "tabulated discrete",
            }),
        }
    }

    pub fn mean(&self) -> f64 {
        match self {
            FadingModel::Erlang(e) => e.mean(),
            FadingModel::Discrete(d) => d.mean(),
        }
    }

    pub fn pdf(&self, gain: f64) -> Result<f64> {
        let e = self.as_erlang("pdf")?;
        if !(gain >= 0.0) {
            return Err(domain("pdf", format!("gain {gain} < 0")));
        }
        Ok(e.pdf(gain))
    }

    pub fn cdf(&self, gain: f64) -> Result<f64> {
        if !(gain >= 0.0) {
            return Err(domain("cdf", format!("gain {gain} < 0")));
        }
        Ok(match self {
            FadingModel::Erlang(e) => e.cdf(gain),
            FadingModel::Discrete(d) => d.cdf(gain),
        })
    }

    pub fn log_density_slope(&self, gain: f64) -> Result<f64> {
        let e = self.as_erlang("log_density_slope")?;
        if !(gain > 0.0) {
            return Err(domain("log_density_slope", format!("gain {gain} must be > 0")));
        }
        Ok(e.log_density_slope(gain))
    }

    /// Quantizes an Erlang model onto states `i·Δγ`, `i = 0..=⌈γ_max/Δγ⌉`.
    /// State `i` carries the mass of `[γᵢ, γᵢ + Δγ)`; the last state absorbs
    /// the whole tail so the probabilities sum to one.
    pub fn discretize(&self, step: f64, gain_max: f64) -> Result<FadingModel> {
        let e = self.as_erlang("discretize")?;
        if !(step > 0.0 && step.is_finite()) {
            return Err(domain("discretize", format!("step {step} must be > 0")));
        }
        if !(gain_max > step) {
            return Err(domain(
                "discretize",
                format!("gain_max {gain_max} must exceed step {step}"),
            ));
        }
        let last = libm::ceil(gain_max / step - 1e-9) as usize;
        let mut gains = Vec::with_capacity(last + 1);
        let mut probs = Vec::with_capacity(last + 1);
        let mut assigned = 0.0;
        for i in 0..last {
            let lo = i as f64 * step;
            let p = e.mass_between(lo, lo + step);
            // states whose mass underflows are merged into their neighbours
            if p > 0.0 {
                gains.push(lo);
                probs.push(p);
                assigned += p;
            }
        }
        gains.push(last as f64 * step);
        probs.push(1.0 - assigned);
        // when the tail is below rounding, the highest state with positive
        // mass absorbs the residual instead
        while probs.len() > 1 && !(probs[probs.len() - 1] > 0.0) {
            probs.pop();
            gains.pop();
            let head: f64 = probs[..probs.len() - 1].iter().sum();
            *probs.last_mut().expect("nonempty") = 1.0 - head;
        }
        DiscreteStates::new(gains, probs).map(Into::into)
    }
}
