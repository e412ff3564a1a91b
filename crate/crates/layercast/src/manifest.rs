//! Run manifests: everything needed to reproduce an output.

use std::path::PathBuf;

use layercast_core::continuum::{DEFAULT_GRID_POINTS, GAMMA_O_SCAN_POINTS, ODE_TOL, ROOT_XTOL};
use layercast_core::montecarlo::{CHUNK_SAMPLES, RNG_ALGORITHM};
use layercast_core::quad::Tolerance;
use serde::Serialize;

use crate::args::DistSpec;

#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'static str,
    /// Arguments after the program name, as given.
    pub arguments: Vec<String>,
    pub config: ResolvedConfig,
    pub grid: GridSizes,
    pub tolerances: Tolerances,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub monte_carlo: Option<MonteCarloSettings>,
    /// Only written to the sidecar file, so that embedded manifests do not
    /// break byte-identical reruns.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timestamp: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Distribution {
    Erlang { order: u32, mean: f64 },
    Discrete { path: PathBuf, states: usize },
}

impl Distribution {
    pub fn from_spec(spec: &DistSpec, states: Option<usize>) -> Self {
        match spec {
            DistSpec::Erlang { order, mean } => Distribution::Erlang {
                order: *order,
                mean: *mean,
            },
            DistSpec::Discrete { path } => Distribution::Discrete {
                path: path.clone(),
                states: states.unwrap_or(0),
            },
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ResolvedConfig {
    pub distribution: Distribution,
    pub bandwidth_ratio: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub snr_db: Option<f64>,
    /// Linear transmit power `10^(snr_db/10)`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub power: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub snr_db_points: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub power_points: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub diversity: Option<Vec<u32>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub layers: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta_gamma: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma_max: Option<f64>,
    #[serde(skip_serializing_if = "std::ops::Not::not")]
    pub capacity_max: bool,
}

impl ResolvedConfig {
    pub fn new(distribution: Distribution, bandwidth_ratio: f64) -> Self {
        ResolvedConfig {
            distribution,
            bandwidth_ratio,
            snr_db: None,
            power: None,
            snr_db_points: None,
            power_points: None,
            diversity: None,
            layers: None,
            delta_gamma: None,
            gamma_max: None,
            capacity_max: false,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct GridSizes {
    pub profile_points: usize,
    pub gamma_o_scan_points: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub discrete_states: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub brute_force_levels: Option<usize>,
}

impl Default for GridSizes {
    fn default() -> Self {
        GridSizes {
            profile_points: DEFAULT_GRID_POINTS,
            gamma_o_scan_points: GAMMA_O_SCAN_POINTS,
            discrete_states: None,
            brute_force_levels: None,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Tolerances {
    pub quadrature_abs: f64,
    pub quadrature_rel: f64,
    pub quadrature_max_intervals: usize,
    pub root_rel: f64,
    pub ode: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        let q = Tolerance::default();
        Tolerances {
            quadrature_abs: q.abs,
            quadrature_rel: q.rel,
            quadrature_max_intervals: q.max_intervals,
            root_rel: ROOT_XTOL,
            ode: ODE_TOL,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct MonteCarloSettings {
    pub samples: u64,
    pub seed: u64,
    pub rng_algorithm: &'static str,
    pub chunk_samples: u64,
}

impl MonteCarloSettings {
    pub fn new(samples: u64, seed: u64) -> Self {
        MonteCarloSettings {
            samples,
            seed,
            rng_algorithm: RNG_ALGORITHM,
            chunk_samples: CHUNK_SAMPLES,
        }
    }
}

impl RunManifest {
    pub fn new(command: &'static str, arguments: Vec<String>, config: ResolvedConfig) -> Self {
        RunManifest {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            command,
            arguments,
            config,
            grid: GridSizes::default(),
            tolerances: Tolerances::default(),
            monte_carlo: None,
            timestamp: None,
        }
    }

    pub fn stamped(&self) -> Self {
        RunManifest {
            timestamp: Some(chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Millis, true)),
            ..self.clone()
        }
    }
}
