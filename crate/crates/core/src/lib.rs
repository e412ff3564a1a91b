//! Power distribution for layered broadcast coding with successive
//! refinement over slowly fading channels.
//!
//! The transmitter superposes one codeword layer per fading state and each
//! layer refines the source description of the layers below it. Given the
//! fading statistics, this crate finds the transmit power distribution over
//! layers that minimizes expected end-to-end distortion:
//!
//! * [`discrete`] solves a finite stack of layers with the per-step KKT
//!   recursion and checks it against a grid-search oracle;
//! * [`continuum`] solves the condensed-layer limit, with quadrature and RK4
//!   routes for each profile;
//! * [`baselines`] provides the CSIT bound, infinite-diversity distortion, the
//!   capacity-maximizing distribution and distortion-exponent fitting;
//! * [`montecarlo`] estimates expected distortion by sampling the channel.
//!
//! The crate is `no_std` and needs only `alloc`.

#![no_std]
// `!(x > 0.0)` is how inputs reject NaN along with out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod baselines;
pub mod continuum;
pub mod discrete;
pub mod error;
pub mod fading;
pub mod math;
pub mod montecarlo;
pub mod ode;
pub mod quad;
pub mod roots;

pub use baselines::{
    capacity_max_cumulative_power, capacity_max_power_density, csit_expected_distortion, distortion_exponent_fit,
    expected_capacity, infinite_diversity_distortion, realized_rate, ChannelConfig, RateProfile,
};
pub use continuum::{
    min_expected_distortion, min_expected_distortion_with_grid, solve_gamma_o, solve_gamma_p, solve_summary,
    ContinuumFlags, ContinuumSolution, ContinuumSummary, IdleBoundary,
};
pub use discrete::{brute_force_oracle, solve_discrete, DiscreteFlags, DiscreteLayering};
pub use error::{Error, Result};
pub use fading::{DiscreteStates, Erlang, FadingModel};
pub use montecarlo::{estimate_expected_distortion, McEstimate, RealizedDistortion};
