use layercast_core::baselines::capacity_max_power_density;
use layercast_core::{capacity_max_cumulative_power, min_expected_distortion};

use super::{channel, check_bandwidth, check_snr, erlang_model, Outcome};
use crate::args::PowerDistArgs;
use crate::error::CliError;
use crate::manifest::{Distribution, ResolvedConfig, RunManifest};
use crate::table::{Cell, Report, Table};

pub fn run(args: &PowerDistArgs, arguments: Vec<String>) -> Result<Outcome, CliError> {
    let b = args.common.bandwidth_ratio;
    check_bandwidth(b)?;
    let power = check_snr(args.snr_db)?;
    let model = erlang_model(&args.common.dist, "power-dist")?;
    let mut config = ResolvedConfig::new(Distribution::from_spec(&args.common.dist, None), b);
    config.snr_db = Some(args.snr_db);
    config.power = Some(power);
    config.capacity_max = args.capacity_max;
    let manifest = RunManifest::new("power-dist", arguments, config);

    let s = min_expected_distortion(&channel(power, b, model.clone())?)?;
    let mut columns = vec!["gamma", "cumulative_power", "power_density"];
    if args.capacity_max {
        columns.extend(["capacity_max_cumulative_power", "capacity_max_power_density"]);
    }
    let mut profile = Table::new("profile", &columns);
    for k in 0..s.grid.len() {
        let g = s.grid[k];
        let mut row: Vec<Cell> = vec![g.into(), s.cumulative_power[k].into(), s.power_density[k].into()];
        if args.capacity_max {
            // the capacity maximizer also spends the budget from the bottom up
            let unconstrained = capacity_max_cumulative_power(&model, g)?;
            let (t, rho) = if unconstrained >= power {
                (power, 0.0)
            } else {
                (unconstrained, capacity_max_power_density(&model, g)?)
            };
            row.extend([t.into(), rho.into()]);
        }
        profile.push(row);
    }
    let mut summary = Table::new(
        "summary",
        &[
            "snr_db",
            "power",
            "bandwidth_ratio",
            "gamma_o",
            "gamma_p",
            "expected_distortion",
        ],
    );
    summary.push(vec![
        args.snr_db.into(),
        power.into(),
        b.into(),
        s.gamma_o.into(),
        s.gamma_p.into(),
        s.expected_distortion.into(),
    ]);
    Ok(Outcome {
        report: Report {
            tables: vec![profile, summary],
        },
        manifest,
        breaches: Vec::new(),
    })
}
