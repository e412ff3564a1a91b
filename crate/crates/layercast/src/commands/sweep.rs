use layercast_core::{
    csit_expected_distortion, distortion_exponent_fit, infinite_diversity_distortion, min_expected_distortion,
    solve_summary, Error, FadingModel,
};
use rayon::prelude::*;

use super::{channel, check_bandwidth, check_snr, erlang_model, Outcome};
use crate::args::{DistSpec, SweepArgs};
use crate::error::CliError;
use crate::manifest::{Distribution, MonteCarloSettings, ResolvedConfig, RunManifest};
use crate::parallel;
use crate::table::{Cell, Report, Table};

struct Point {
    layered: f64,
    csit: f64,
    infinite: f64,
    gamma_o: f64,
    gamma_p: f64,
    mc: Option<(f64, f64)>,
}

pub fn run(args: &SweepArgs, arguments: Vec<String>) -> Result<Outcome, CliError> {
    let b = args.common.bandwidth_ratio;
    check_bandwidth(b)?;
    erlang_model(&args.common.dist, "sweep")?;
    let DistSpec::Erlang { order, mean } = args.common.dist else {
        unreachable!("checked above")
    };
    let orders = if args.diversity.is_empty() {
        vec![order]
    } else {
        args.diversity.clone()
    };
    let snrs = args.snr_db_range.points();
    let powers = snrs.iter().map(|&db| check_snr(db)).collect::<Result<Vec<_>, _>>()?;
    let models = orders
        .iter()
        .map(|&l| erlang_model(&DistSpec::Erlang { order: l, mean }, "sweep"))
        .collect::<Result<Vec<_>, _>>()?;
    if let Some(n) = args.mc_samples {
        layercast_core::montecarlo::check_samples(n).map_err(crate::error::invalid_input)?;
    }

    let mut config = ResolvedConfig::new(Distribution::from_spec(&args.common.dist, None), b);
    config.snr_db_points = Some(snrs.clone());
    config.power_points = Some(powers.clone());
    config.diversity = Some(orders.clone());
    let mut manifest = RunManifest::new("sweep", arguments, config);
    manifest.monte_carlo = args.mc_samples.map(|n| MonteCarloSettings::new(n, args.seed));

    let jobs: Vec<(usize, usize)> = (0..orders.len())
        .flat_map(|i| (0..powers.len()).map(move |j| (i, j)))
        .collect();
    let points = jobs
        .par_iter()
        .map(|&(i, j)| point(&models[i], powers[j], b, args.mc_samples, args.seed))
        .collect::<Result<Vec<_>, _>>()?;

    let mut columns = vec![
        "diversity",
        "snr_db",
        "power",
        "expected_distortion",
        "csit",
        "infinite_diversity",
        "gamma_o",
        "gamma_p",
    ];
    if args.mc_samples.is_some() {
        columns.extend(["mc_mean", "mc_std_error"]);
    }
    let mut sweep = Table::new("sweep", &columns);
    let mut exponent = Table::new("exponent", &["diversity", "exponent"]);
    for (i, &l) in orders.iter().enumerate() {
        let rows = &points[i * powers.len()..(i + 1) * powers.len()];
        for (j, p) in rows.iter().enumerate() {
            let mut row: Vec<Cell> = vec![
                l.into(),
                snrs[j].into(),
                powers[j].into(),
                p.layered.into(),
                p.csit.into(),
                p.infinite.into(),
                p.gamma_o.into(),
                p.gamma_p.into(),
            ];
            if let Some((mean, se)) = p.mc {
                row.extend([mean.into(), se.into()]);
            }
            sweep.push(row);
        }
        let fit: Vec<(f64, f64)> = powers.iter().zip(rows).map(|(&pw, p)| (pw, p.layered)).collect();
        let value = match distortion_exponent_fit(&fit) {
            Ok(v) => Cell::Float(v),
            Err(Error::InsufficientSpan { .. }) => Cell::Missing,
            Err(e) => return Err(e.into()),
        };
        exponent.push(vec![l.into(), value]);
    }
    Ok(Outcome {
        report: Report {
            tables: vec![sweep, exponent],
        },
        manifest,
        breaches: Vec::new(),
    })
}

fn point(model: &FadingModel, power: f64, b: f64, mc: Option<u64>, seed: u64) -> Result<Point, CliError> {
    let cfg = channel(power, b, model.clone())?;
    let csit = csit_expected_distortion(&cfg);
    let infinite = infinite_diversity_distortion(&cfg);
    let (layered, gamma_o, gamma_p, mc) = match mc {
        None => {
            let s = solve_summary(&cfg)?;
            (s.expected_distortion, s.gamma_o, s.gamma_p, None)
        }
        Some(n) => {
            let s = min_expected_distortion(&cfg)?;
            let est = parallel::estimate_expected_distortion(&s.fading, &s, b, n, seed)?;
            (
                s.expected_distortion,
                s.gamma_o,
                s.gamma_p,
                Some((est.mean, est.std_error)),
            )
        }
    };
    Ok(Point {
        layered,
        csit,
        infinite,
        gamma_o,
        gamma_p,
        mc,
    })
}
