use layercast_core::roots::brent;
use layercast_core::{
    brute_force_oracle, min_expected_distortion, solve_discrete, ContinuumSolution, DiscreteLayering, DiscreteStates,
    Erlang, McEstimate,
};

use super::{channel, check_bandwidth, check_snr, erlang_model, Outcome};
use crate::args::CompareArgs;
use crate::error::{invalid_input, CliError};
use crate::manifest::{Distribution, MonteCarloSettings, ResolvedConfig, RunManifest};
use crate::parallel;
use crate::table::{Cell, Report, Table};

const DISCRETE_REL_TOL: f64 = 1e-3;
const ORACLE_ABS_TOL: f64 = 1e-5;
const MC_SIGMAS: f64 = 3.0;

/// Brute-force grid levels per layer count; the search is
/// `O(levels^(M-1))`, so four layers use a coarser grid.
pub const BRUTE_FORCE_LEVELS: [usize; 5] = [0, 2000, 2000, 2000, 600];

/// `M` states at the fading quantiles `F⁻¹(k/M)`, each owning the
/// probability-`1/M` cell above it.
pub fn quantile_states(e: &Erlang, m: usize) -> layercast_core::Result<DiscreteStates> {
    let mut gains = vec![0.0];
    for k in 1..m {
        let q = k as f64 / m as f64;
        gains.push(brent(|g| e.cdf(g) - q, 0.0, e.truncation(), 1e-14, "quantile_states")?);
    }
    DiscreteStates::new(gains, vec![1.0 / m as f64; m])
}

struct Legs {
    continuum: ContinuumSolution,
    mc: Option<McEstimate>,
    discrete: DiscreteLayering,
    stack: Option<(DiscreteLayering, DiscreteLayering)>,
}

pub fn run(args: &CompareArgs, arguments: Vec<String>) -> Result<Outcome, CliError> {
    let b = args.common.bandwidth_ratio;
    check_bandwidth(b)?;
    let power = check_snr(args.snr_db)?;
    let model = erlang_model(&args.common.dist, "compare")?;
    let e = *model.as_erlang("compare")?;
    let gamma_max = args.gamma_max.unwrap_or(12.0 * e.mean());
    if !(args.delta_gamma > 0.0 && args.delta_gamma.is_finite()) {
        return Err(CliError::usage(format!(
            "--delta-gamma must be > 0, got {}",
            args.delta_gamma
        )));
    }
    if !(gamma_max > args.delta_gamma && gamma_max.is_finite()) {
        return Err(CliError::usage(format!(
            "--gamma-max must exceed --delta-gamma, got {gamma_max}"
        )));
    }
    if let Some(m) = args.layers {
        if !(1..=4).contains(&m) {
            return Err(CliError::usage(format!("--layers must be in 1..=4, got {m}")));
        }
    }
    if let Some(n) = args.mc_samples {
        layercast_core::montecarlo::check_samples(n).map_err(invalid_input)?;
    }
    let fine = model.discretize(args.delta_gamma, gamma_max).map_err(invalid_input)?;
    let fine_states = fine.as_discrete("compare")?.clone();

    let mut config = ResolvedConfig::new(Distribution::from_spec(&args.common.dist, None), b);
    config.snr_db = Some(args.snr_db);
    config.power = Some(power);
    config.layers = args.layers;
    config.delta_gamma = Some(args.delta_gamma);
    config.gamma_max = Some(gamma_max);
    let mut manifest = RunManifest::new("compare", arguments, config);
    manifest.grid.discrete_states = Some(fine_states.len());
    manifest.grid.brute_force_levels = args.layers.map(|m| BRUTE_FORCE_LEVELS[m]);
    manifest.monte_carlo = args.mc_samples.map(|n| MonteCarloSettings::new(n, args.seed));

    let cfg = channel(power, b, model)?;
    let (continuum_leg, (discrete, stack)) = rayon::join(
        || -> Result<_, CliError> {
            let s = min_expected_distortion(&cfg)?;
            let mc = match args.mc_samples {
                Some(n) => Some(parallel::estimate_expected_distortion(&e, &s, b, n, args.seed)?),
                None => None,
            };
            Ok((s, mc))
        },
        || {
            rayon::join(
                || solve_discrete(&fine_states, power, b),
                || -> Result<_, CliError> {
                    let Some(m) = args.layers else { return Ok(None) };
                    let states = quantile_states(&e, m)?;
                    let (rec, bf) = rayon::join(
                        || solve_discrete(&states, power, b),
                        || brute_force_oracle(&states, power, b, BRUTE_FORCE_LEVELS[m]),
                    );
                    Ok(Some((rec?, bf?)))
                },
            )
        },
    );
    let (continuum, mc) = continuum_leg?;
    let legs = Legs {
        continuum,
        mc,
        discrete: discrete?,
        stack: stack?,
    };
    let (report, breaches) = tabulate(&legs, args);
    Ok(Outcome {
        report,
        manifest,
        breaches,
    })
}

fn tabulate(legs: &Legs, args: &CompareArgs) -> (Report, Vec<String>) {
    let reference = legs.continuum.expected_distortion;
    let rel = |v: f64| (v - reference) / reference;
    let mut table = Table::new(
        "legs",
        &[
            "method",
            "expected_distortion",
            "std_error",
            "relative_deviation",
            "detail",
        ],
    );
    table.push(vec![
        "continuum".into(),
        reference.into(),
        Cell::Missing,
        0.0.into(),
        format!("gamma_o={} gamma_p={}", legs.continuum.gamma_o, legs.continuum.gamma_p).into(),
    ]);
    let d = &legs.discrete;
    table.push(vec![
        "discrete".into(),
        d.expected_distortion.into(),
        Cell::Missing,
        rel(d.expected_distortion).into(),
        format!(
            "states={} delta_gamma={} fallback={}",
            d.layers(),
            args.delta_gamma,
            d.flags.monotonicity_fallback
        )
        .into(),
    ]);
    if let Some((rec, bf)) = &legs.stack {
        let m = rec.layers();
        table.push(vec![
            "layers_recursion".into(),
            rec.expected_distortion.into(),
            Cell::Missing,
            rel(rec.expected_distortion).into(),
            format!("layers={m} fallback={}", rec.flags.monotonicity_fallback).into(),
        ]);
        table.push(vec![
            "layers_brute_force".into(),
            bf.expected_distortion.into(),
            Cell::Missing,
            rel(bf.expected_distortion).into(),
            format!("layers={m} levels={}", BRUTE_FORCE_LEVELS[m]).into(),
        ]);
    }
    if let Some(mc) = &legs.mc {
        table.push(vec![
            "monte_carlo".into(),
            mc.mean.into(),
            mc.std_error.into(),
            rel(mc.mean).into(),
            format!("samples={} seed={}", mc.n_samples, mc.seed).into(),
        ]);
    }

    let mut checks = Table::new("checks", &["check", "value", "tolerance", "pass"]);
    let mut breaches = Vec::new();
    let mut check = |name: &str, value: f64, tol: f64| {
        let pass = value.abs() < tol;
        if !pass {
            breaches.push(format!("{name}: {value:e} exceeds {tol:e}"));
        }
        checks.push(vec![name.into(), value.into(), tol.into(), pass.into()]);
    };
    check(
        "discrete_vs_continuum_relative",
        rel(d.expected_distortion),
        DISCRETE_REL_TOL,
    );
    if let Some((rec, bf)) = &legs.stack {
        check(
            "recursion_vs_brute_force_absolute",
            rec.expected_distortion - bf.expected_distortion,
            ORACLE_ABS_TOL,
        );
    }
    if let Some(mc) = &legs.mc {
        let z = if mc.std_error > 0.0 {
            (mc.mean - reference) / mc.std_error
        } else if mc.mean == reference {
            0.0
        } else {
            f64::INFINITY
        };
        check("monte_carlo_vs_continuum_sigmas", z, MC_SIGMAS);
    }
    (
        Report {
            tables: vec![table, checks],
        },
        breaches,
    )
}
