use layercast_core::fading::{Erlang, FadingModel};
use layercast_core::quad::{integrate, integrate_from_zero, Tolerance};
use proptest::prelude::*;

fn erlang() -> impl Strategy<Value = Erlang> {
    (1u32..=12, 0.2f64..5.0).prop_map(|(l, mean)| Erlang::new(l, mean).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn pdf_quadrature_reproduces_cdf(e in erlang(), fracs in prop::collection::vec(0.01f64..1.0, 20)) {
        let tol = Tolerance { abs: 1e-14, rel: 1e-12, ..Tolerance::default() };
        for u in fracs {
            let g = u * 5.0 * e.mean();
            let q = integrate(|s| e.pdf(s), 0.0, g, tol);
            prop_assert!((q.value - e.cdf(g)).abs() < 1e-9, "L={} γ̄={} γ={g}: {} vs {}", e.order(), e.mean(), q.value, e.cdf(g));
        }
    }

    #[test]
    fn slope_matches_finite_difference(e in erlang(), fracs in prop::collection::vec(0.1f64..5.0, 20)) {
        for u in fracs {
            let g = u * e.mean();
            let h = 1e-6 * g;
            let fd = (e.ln_pdf(g + h) - e.ln_pdf(g - h)) / (2.0 * h);
            let exact = e.log_density_slope(g);
            prop_assert!((fd - exact).abs() <= 1e-6 * exact.abs().max(1.0 / g));
        }
    }

    #[test]
    fn first_moment_is_the_mean(e in erlang()) {
        let tol = Tolerance { abs: 1e-14, rel: 1e-12, ..Tolerance::default() };
        let m = integrate_from_zero(|s| s * e.pdf(s), e.mean(), e.truncation(), tol);
        prop_assert!((m.value - e.mean()).abs() <= 1e-8 * e.mean());
    }

    #[test]
    fn cdf_is_monotone(e in erlang(), mut xs in prop::collection::vec(0.0f64..20.0, 30)) {
        xs.sort_by(f64::total_cmp);
        let cdfs: Vec<f64> = xs.iter().map(|&x| e.cdf(x * e.mean())).collect();
        prop_assert!(cdfs.windows(2).all(|w| w[1] >= w[0]));
        prop_assert_eq!(e.cdf(0.0), 0.0);
        prop_assert!((e.cdf(e.truncation()) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn discretize_yields_valid_states(l in 1u32..=8, mean in 0.3f64..3.0, step in 0.005f64..0.5, span in 2.0f64..15.0) {
        let m = FadingModel::erlang(l, mean).unwrap();
        let d = m.discretize(step, span * mean).unwrap();
        let d = d.as_discrete("test").unwrap();
        prop_assert_eq!(d.gains()[0], 0.0);
        prop_assert!(d.gains().windows(2).all(|w| w[1] > w[0]));
        prop_assert!(d.probabilities().iter().all(|&p| p > 0.0));
        prop_assert!((d.probabilities().iter().sum::<f64>() - 1.0).abs() <= 1e-12);
    }
}

#[test]
fn rayleigh_is_erlang_one() {
    let e = Erlang::new(1, 1.7).unwrap();
    for k in 0..50 {
        let g = k as f64 * 0.2;
        let rayleigh = (-g / 1.7f64).exp() / 1.7;
        assert!((e.pdf(g) - rayleigh).abs() <= 1e-15 * rayleigh.max(1.0));
    }
}

#[test]
fn truncation_tail_is_negligible() {
    for l in 1..=64 {
        let e = Erlang::new(l, 1.0).unwrap();
        assert!(e.ccdf(e.truncation()) < 1e-15, "L={l}");
    }
}
