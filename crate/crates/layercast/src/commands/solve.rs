use layercast_core::{
    csit_expected_distortion, infinite_diversity_distortion, min_expected_distortion, solve_discrete, FadingModel,
};

use super::{channel, check_bandwidth, check_snr, flag_names, load_model, Outcome};
use crate::args::SolveArgs;
use crate::error::CliError;
use crate::manifest::{Distribution, ResolvedConfig, RunManifest};
use crate::table::{Cell, Report, Table};

pub fn run(args: &SolveArgs, arguments: Vec<String>) -> Result<Outcome, CliError> {
    let b = args.common.bandwidth_ratio;
    check_bandwidth(b)?;
    let power = check_snr(args.snr_db)?;
    let (model, states) = load_model(&args.common.dist)?;
    let mut config = ResolvedConfig::new(Distribution::from_spec(&args.common.dist, states), b);
    config.snr_db = Some(args.snr_db);
    config.power = Some(power);
    let mut manifest = RunManifest::new("solve", arguments, config);

    let report = match &model {
        FadingModel::Erlang(_) => continuum(args.snr_db, power, b, model)?,
        FadingModel::Discrete(_) => {
            manifest.grid.discrete_states = states;
            discrete(args.snr_db, power, b, model)?
        }
    };
    Ok(Outcome {
        report,
        manifest,
        breaches: Vec::new(),
    })
}

fn continuum(snr_db: f64, power: f64, b: f64, model: FadingModel) -> Result<Report, CliError> {
    let cfg = channel(power, b, model)?;
    let s = min_expected_distortion(&cfg)?;
    let mut summary = Table::new(
        "summary",
        &[
            "snr_db",
            "power",
            "bandwidth_ratio",
            "diversity",
            "mean",
            "gamma_o",
            "gamma_p",
            "expected_distortion",
            "csit",
            "infinite_diversity",
            "flags",
        ],
    );
    let flags = flag_names(&[
        ("multiple_gamma_o_roots", s.flags.multiple_gamma_o_roots),
        ("non_monotone_power", s.flags.non_monotone_power),
        ("quadrature_unconverged", s.flags.quadrature_unconverged),
    ]);
    summary.push(vec![
        snr_db.into(),
        power.into(),
        b.into(),
        s.fading.order().into(),
        s.fading.mean().into(),
        s.gamma_o.into(),
        s.gamma_p.into(),
        s.expected_distortion.into(),
        csit_expected_distortion(&cfg).into(),
        infinite_diversity_distortion(&cfg).into(),
        flags.into(),
    ]);
    let mut profile = Table::new(
        "profile",
        &["gamma", "cumulative_power", "power_density", "distortion", "weight"],
    );
    for k in 0..s.grid.len() {
        profile.push(vec![
            s.grid[k].into(),
            s.cumulative_power[k].into(),
            s.power_density[k].into(),
            s.distortion[k].into(),
            s.weight[k].into(),
        ]);
    }
    Ok(Report {
        tables: vec![summary, profile],
    })
}

fn discrete(snr_db: f64, power: f64, b: f64, model: FadingModel) -> Result<Report, CliError> {
    let cfg = channel(power, b, model)?;
    let states = cfg.fading.as_discrete("solve")?;
    let l = solve_discrete(states, power, b)?;
    let mut summary = Table::new(
        "summary",
        &[
            "snr_db",
            "power",
            "bandwidth_ratio",
            "states",
            "expected_distortion",
            "csit",
            "flags",
        ],
    );
    let flags = flag_names(&[
        ("monotonicity_fallback", l.flags.monotonicity_fallback),
        ("descent_capped", l.flags.descent_capped),
        ("exhausted_at_top", l.flags.exhausted_at_top),
    ]);
    summary.push(vec![
        snr_db.into(),
        power.into(),
        b.into(),
        l.layers().into(),
        l.expected_distortion.into(),
        csit_expected_distortion(&cfg).into(),
        flags.into(),
    ]);
    let mut layers = Table::new(
        "layers",
        &[
            "gamma",
            "probability",
            "cumulative_power",
            "layer_power",
            "rate_bits",
            "weight",
        ],
    );
    for i in 0..l.layers() {
        let row: Vec<Cell> = vec![
            l.gains[i].into(),
            l.probabilities[i].into(),
            l.cumulative_power[i].into(),
            l.layer_power[i].into(),
            l.rates[i].into(),
            l.weights[i].into(),
        ];
        layers.push(row);
    }
    Ok(Report {
        tables: vec![summary, layers],
    })
}
