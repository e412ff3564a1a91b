use layercast_core::baselines::capacity_max_cumulative_power;
use layercast_core::continuum::{
    cumulative_power_u, cumulative_power_u_ode, distortion_profile_d, distortion_profile_d_ode, log_grid,
    power_density_rho, solve_gamma_o, solve_gamma_p, weight_w,
};
use layercast_core::{min_expected_distortion, solve_summary, ChannelConfig, Error, FadingModel};

fn erlang(l: u32, mean: f64) -> FadingModel {
    FadingModel::erlang(l, mean).unwrap()
}

fn rayleigh() -> FadingModel {
    erlang(1, 1.0)
}

fn config(l: u32, power: f64, b: f64) -> ChannelConfig {
    ChannelConfig::new(power, b, erlang(l, 1.0)).unwrap()
}

#[test]
fn idle_boundary_closed_forms() {
    for mean in [0.5, 1.0, 2.5] {
        let g = solve_gamma_o(&erlang(1, mean)).unwrap();
        assert!((g.gain - mean).abs() <= 1e-8 * mean);
        assert!(!g.is_ambiguous());
    }
    let g = solve_gamma_o(&erlang(2, 1.0)).unwrap().gain;
    assert!((g - (1.0 + 5f64.sqrt()) / 4.0).abs() < 1e-10);
}

#[test]
fn idle_boundary_rejects_discrete_models() {
    let d = rayleigh().discretize(0.5, 2.0).unwrap();
    assert!(matches!(solve_gamma_o(&d), Err(Error::KindMismatch { .. })));
}

#[test]
fn idle_boundary_satisfies_root_condition() {
    for l in 1..=16 {
        let m = erlang(l, 1.3);
        let g = solve_gamma_o(&m).unwrap().gain;
        let residual = g * m.pdf(g).unwrap() + m.cdf(g).unwrap() - 1.0;
        assert!(residual.abs() < 1e-12, "L={l}: {residual}");
    }
}

#[test]
fn u_vanishes_at_idle_boundary() {
    let m = erlang(3, 1.0);
    let go = solve_gamma_o(&m).unwrap().gain;
    assert_eq!(cumulative_power_u(&m, 1.0, go, go).unwrap(), 0.0);
    assert_eq!(cumulative_power_u_ode(&m, 1.0, &[go], go).unwrap(), vec![0.0]);
}

#[test]
fn u_small_bandwidth_limit() {
    // b → 0: U → (1 − F − γf)/(γ²f) = (1 − γ)/γ² for unit Rayleigh
    let u = cumulative_power_u(&rayleigh(), 1e-6, 0.5, 1.0).unwrap();
    assert!((u - 2.0).abs() < 1e-3, "{u}");
}

#[test]
fn u_quadrature_matches_ode_point() {
    let m = rayleigh();
    let q = cumulative_power_u(&m, 2.0, 0.9, 1.0).unwrap();
    let o = cumulative_power_u_ode(&m, 2.0, &[0.9], 1.0).unwrap()[0];
    assert!(q > 0.0);
    assert!((q - o).abs() < 1e-8);
}

#[test]
fn u_domain_errors() {
    let m = rayleigh();
    assert!(matches!(
        cumulative_power_u(&m, 1.0, 0.0, 1.0),
        Err(Error::Domain { .. })
    ));
    assert!(matches!(
        cumulative_power_u(&m, 1.0, 1.5, 1.0),
        Err(Error::Domain { .. })
    ));
    assert!(matches!(
        cumulative_power_u(&m, 0.0, 0.5, 1.0),
        Err(Error::Domain { .. })
    ));
}

#[test]
fn ode_refuses_grids_near_zero() {
    let m = rayleigh();
    let r = cumulative_power_u_ode(&m, 1.0, &[0.5, 1e-9], 1.0);
    assert!(matches!(r, Err(Error::StepUnderflow { .. })));
}

#[test]
fn u_ode_is_monotone_for_erlang_family() {
    for l in 1..=8 {
        let m = erlang(l, 1.0);
        let go = solve_gamma_o(&m).unwrap().gain;
        for b in [0.5, 1.0, 2.0, 4.0] {
            let mut grid = log_grid(0.02 * go, go, 200);
            grid.reverse();
            let u = cumulative_power_u_ode(&m, b, &grid, go).unwrap();
            assert!(u.windows(2).all(|w| w[1] >= w[0]), "L={l} b={b}");
        }
    }
}

#[test]
fn rho_at_idle_boundary() {
    let r = power_density_rho(&rayleigh(), 1.0, 1.0, 0.0).unwrap();
    assert!((r - 0.5).abs() < 1e-15);
    let r = power_density_rho(&erlang(1, 2.0), 3.0, 2.0, 0.0).unwrap();
    assert!((r - 1.0 / (4.0 * 4.0)).abs() < 1e-15);
}

#[test]
fn rho_matches_finite_difference_of_u() {
    for (l, b) in [(1, 2.0), (2, 1.0), (4, 0.5)] {
        let m = erlang(l, 1.0);
        let go = solve_gamma_o(&m).unwrap().gain;
        for frac in [0.2, 0.4, 0.6, 0.8, 0.95] {
            let g = frac * go;
            let h = 1e-5;
            let fd = -(cumulative_power_u(&m, b, g + h, go).unwrap() - cumulative_power_u(&m, b, g - h, go).unwrap())
                / (2.0 * h);
            let u = cumulative_power_u(&m, b, g, go).unwrap();
            let rho = power_density_rho(&m, b, g, u).unwrap();
            assert!(rho >= 0.0);
            // U grows like 1/γ near zero, so the check is relative to ρ once ρ exceeds one
            assert!(
                (fd - rho).abs() < 1e-6 * rho.max(1.0),
                "L={l} b={b} γ={g}: {fd} vs {rho}"
            );
        }
    }
}

#[test]
fn exhaustion_boundary_self_consistency() {
    let m = rayleigh();
    let gp = solve_gamma_p(&m, 2.0, 1.0, 1.0).unwrap();
    assert!(gp > 0.0 && gp < 1.0);
    assert!((cumulative_power_u(&m, 2.0, gp, 1.0).unwrap() - 1.0).abs() < 1e-10);
}

#[test]
fn exhaustion_boundary_moves_down_with_power() {
    let m = erlang(2, 1.0);
    let go = solve_gamma_o(&m).unwrap().gain;
    let mut prev = go;
    for p in [1e-8, 1e-4, 0.1, 1.0, 10.0, 100.0] {
        let gp = solve_gamma_p(&m, 2.0, p, go).unwrap();
        assert!(gp < prev, "P={p}");
        prev = gp;
    }
    let tiny = solve_gamma_p(&m, 2.0, 1e-12, go).unwrap();
    assert!((go - tiny) / go < 1e-5);
}

#[test]
fn exhaustion_bracket_failure_is_reported() {
    // U stays finite at the 1e-12 γ̄ floor, so an absurd budget cannot be bracketed
    let m = rayleigh();
    match solve_gamma_p(&m, 50.0, 1e30, 1.0) {
        Err(Error::BracketFailure {
            power, power_at_floor, ..
        }) => {
            assert_eq!(power, 1e30);
            assert!(power_at_floor < power);
        }
        other => panic!("expected bracket failure, got {other:?}"),
    }
}

#[test]
fn distortion_profile_examples() {
    let m = rayleigh();
    let d = distortion_profile_d(&m, 2.0, 1.0, 1.0).unwrap();
    assert!((d - (-1f64).exp()).abs() < 1e-15);
    for g in [0.1, 0.3, 0.5, 0.9] {
        let d = distortion_profile_d(&m, 1e-6, g, 1.0).unwrap();
        assert!((d - (-g).exp()).abs() < 1e-4, "γ={g}: {d}");
        let q = distortion_profile_d(&m, 2.0, g, 1.0).unwrap();
        let o = distortion_profile_d_ode(&m, 2.0, &[g], 1.0).unwrap()[0];
        assert!((q - o).abs() < 1e-8);
    }
}

#[test]
fn weight_examples() {
    let m = rayleigh();
    let w = weight_w(&m, 2.0, 2.0, 0.0, 1.0).unwrap();
    assert!((w - (-2f64).exp()).abs() < 1e-16);
    // both branches agree at the idle boundary
    let m = erlang(3, 1.0);
    let go = solve_gamma_o(&m).unwrap().gain;
    let active = go * m.pdf(go).unwrap();
    let idle = weight_w(&m, 1.0, go, 0.0, go).unwrap();
    assert!((active - idle).abs() < 1e-12);
}

#[test]
fn weight_satisfies_its_ode() {
    for (l, b) in [(1u32, 2.0), (2, 0.5), (4, 1.0)] {
        let m = erlang(l, 1.0);
        let go = solve_gamma_o(&m).unwrap().gain;
        let w = |g: f64| weight_w(&m, b, g, cumulative_power_u(&m, b, g, go).unwrap(), go).unwrap();
        for frac in [0.3, 0.5, 0.7, 0.9] {
            let g = frac * go;
            let h = 1e-5;
            let dw = (w(g + h) - w(g - h)) / (2.0 * h);
            let wg = w(g);
            let rhs = b * wg / g - (1.0 + b) * (m.pdf(g).unwrap() * (wg / g).powf(b)).powf(1.0 / (1.0 + b));
            assert!((dw - rhs).abs() < 1e-6, "L={l} b={b} γ={g}: {dw} vs {rhs}");
        }
    }
}

#[test]
fn solution_invariants() {
    for l in [1, 2, 4, 8] {
        for b in [0.5, 2.0] {
            let s = min_expected_distortion(&config(l, 1.0, b)).unwrap();
            assert!(s.expected_distortion > 0.0 && s.expected_distortion < 1.0);
            let io = s.grid.iter().position(|&g| g == s.gamma_o).unwrap();
            let ip = s.grid.iter().position(|&g| g == s.gamma_p).unwrap();
            assert!(s.cumulative_power[io].abs() < 1e-10);
            assert!((s.cumulative_power[ip] - 1.0).abs() < 1e-9);
            assert!(s.cumulative_power.windows(2).all(|w| w[1] <= w[0]));
            assert!(s.cumulative_power.iter().all(|&t| t <= 1.0 + 1e-9));
            for (k, &g) in s.grid.iter().enumerate() {
                if g < s.gamma_p || g > s.gamma_o {
                    assert_eq!(s.power_density[k], 0.0);
                } else {
                    assert!(s.power_density[k] >= 0.0);
                }
                if g >= s.gamma_o {
                    assert!((s.weight[k] - s.fading.ccdf(g)).abs() < 1e-10);
                }
            }
            let d_o = s.gamma_o * s.fading.pdf(s.gamma_o);
            assert!((s.distortion[io] - d_o).abs() < 1e-12);
            let total = s.fading.cdf(s.gamma_p) + s.distortion[ip];
            assert!((s.expected_distortion - total).abs() < 1e-15);
            assert!(s
                .active_indices()
                .all(|k| s.grid[k] >= s.gamma_p && s.grid[k] <= s.gamma_o));
        }
    }
}

#[test]
fn u_is_independent_of_power() {
    let low = min_expected_distortion(&config(2, 1.0, 2.0)).unwrap();
    let high = min_expected_distortion(&config(2, 10.0, 2.0)).unwrap();
    for (k, &g) in low.grid.iter().enumerate() {
        if g >= low.gamma_p && g <= low.gamma_o {
            assert!(
                (low.cumulative_power[k] - high.cumulative_power_at(g)).abs() < 1e-10,
                "γ={g}"
            );
        }
    }
}

#[test]
fn profiles_are_continuous_at_boundaries() {
    let s = min_expected_distortion(&config(2, 1.0, 2.0)).unwrap();
    let e = 1e-9;
    for g in [s.gamma_p, s.gamma_o] {
        let (lo, hi) = (g * (1.0 - e), g * (1.0 + e));
        assert!((s.cumulative_power_at(lo) - s.cumulative_power_at(hi)).abs() < 1e-8);
        assert!((s.distortion_at(lo) - s.distortion_at(hi)).abs() < 1e-8);
        assert!((s.weight_at(lo) - s.weight_at(hi)).abs() < 1e-8);
    }
}

#[test]
fn vanishing_power_gives_unit_distortion() {
    let s = solve_summary(&config(1, 1e-10, 2.0)).unwrap();
    assert!((s.expected_distortion - 1.0).abs() < 1e-8);
}

#[test]
fn distortion_monotone_in_power_bandwidth_and_diversity() {
    let mut prev = 1.0;
    for p in [0.01, 0.1, 1.0, 10.0, 100.0] {
        let d = solve_summary(&config(2, p, 2.0)).unwrap().expected_distortion;
        assert!(d < prev);
        prev = d;
    }
    let mut prev = 1.0;
    for b in [0.25, 0.5, 1.0, 2.0, 4.0] {
        let d = solve_summary(&config(2, 1.0, b)).unwrap().expected_distortion;
        assert!(d < prev);
        prev = d;
    }
    let mut prev = 1.0;
    for l in [1, 2, 4, 8] {
        let d = solve_summary(&config(l, 1.0, 2.0)).unwrap().expected_distortion;
        assert!(d < prev);
        prev = d;
    }
}

#[test]
fn small_bandwidth_allocation_approaches_capacity_maximizer() {
    let m = rayleigh();
    let mut worst: f64 = 0.0;
    for k in 1..=99 {
        let g = 0.05 + 0.9 * k as f64 / 100.0;
        let u = cumulative_power_u(&m, 1e-3, g, 1.0).unwrap();
        let cap = capacity_max_cumulative_power(&m, g).unwrap();
        worst = worst.max((u - cap).abs() / cap);
    }
    assert!(worst <= 0.01, "{worst}");
}

#[test]
fn matches_fine_discrete_solution() {
    let s = min_expected_distortion(&config(1, 1.0, 2.0)).unwrap();
    assert!((s.expected_distortion - 0.653886).abs() < 1e-5);
}
