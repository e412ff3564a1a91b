//! Subcommand drivers. Each builds a [`Report`] and its [`RunManifest`];
//! writing them out is left to the caller.

mod compare;
mod power_dist;
mod solve;
mod sweep;

use layercast_core::{ChannelConfig, FadingModel};

use crate::args::{Cli, Command, DistSpec};
use crate::error::{invalid_input, CliError};
use crate::manifest::RunManifest;
use crate::states_file::load_states;
use crate::table::Report;

pub use compare::{quantile_states, BRUTE_FORCE_LEVELS};

#[derive(Debug)]
pub struct Outcome {
    pub report: Report,
    pub manifest: RunManifest,
    /// Failed cross-checks; non-empty only for `compare`.
    pub breaches: Vec<String>,
}

pub fn run(cli: &Cli, arguments: Vec<String>) -> Result<Outcome, CliError> {
    match &cli.command {
        Command::Solve(a) => solve::run(a, arguments),
        Command::Sweep(a) => sweep::run(a, arguments),
        Command::PowerDist(a) => power_dist::run(a, arguments),
        Command::Compare(a) => compare::run(a, arguments),
    }
}

fn load_model(spec: &DistSpec) -> Result<(FadingModel, Option<usize>), CliError> {
    match spec {
        DistSpec::Erlang { order, mean } => Ok((FadingModel::erlang(*order, *mean).map_err(invalid_input)?, None)),
        DistSpec::Discrete { path } => {
            let states = load_states(path)?;
            let n = states.len();
            Ok((FadingModel::Discrete(states), Some(n)))
        }
    }
}

fn erlang_model(spec: &DistSpec, command: &str) -> Result<FadingModel, CliError> {
    match spec {
        DistSpec::Erlang { .. } => Ok(load_model(spec)?.0),
        DistSpec::Discrete { .. } => Err(CliError::usage(format!("`{command}` needs an erlang distribution"))),
    }
}

fn channel(power: f64, b: f64, model: FadingModel) -> Result<ChannelConfig, CliError> {
    ChannelConfig::new(power, b, model).map_err(invalid_input)
}

fn check_snr(db: f64) -> Result<f64, CliError> {
    if !db.is_finite() {
        return Err(CliError::usage(format!("--snr-db must be finite, got {db}")));
    }
    let p = layercast_core::math::db_to_linear(db);
    if !(p > 0.0 && p.is_finite()) {
        return Err(CliError::usage(format!("--snr-db {db} gives a power outside (0, ∞)")));
    }
    Ok(p)
}

fn check_bandwidth(b: f64) -> Result<(), CliError> {
    if b > 0.0 && b.is_finite() {
        Ok(())
    } else {
        Err(CliError::usage(format!("--bandwidth-ratio must be > 0, got {b}")))
    }
}

fn flag_names(pairs: &[(&str, bool)]) -> String {
    pairs.iter().filter(|p| p.1).map(|p| p.0).collect::<Vec<_>>().join("|")
}
