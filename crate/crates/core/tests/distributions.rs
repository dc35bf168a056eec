use adaptail::par::rep_rng;
use adaptail::{Law, LawSpec};
use std::f64::consts::E;

fn zoo() -> Vec<Law> {
    vec![
        Law::pareto(1.0).unwrap(),
        Law::pareto(0.4).unwrap(),
        Law::pareto_change_point(3.0, 1.0, 1000.0).unwrap(),
        Law::cauchy(),
        Law::log_gamma(),
        Law::log_perturbed_pareto(1.0, E).unwrap(),
        Law::hall(),
        Law::gpd(),
    ]
}

/// Kolmogorov distance between 10⁵ draws and the analytic d.f., against
/// the asymptotic 99% point 1.628/√n.
#[test]
fn samplers_pass_ks() {
    let n = 100_000;
    let crit = 1.628 / (n as f64).sqrt();
    for (i, law) in zoo().into_iter().enumerate() {
        let s = law.sample(n, &mut rep_rng(2024, i)).unwrap();
        let mut x = s.sorted_desc().to_vec();
        x.reverse();
        let d = x
            .iter()
            .enumerate()
            .map(|(j, &v)| {
                let f = law.cdf(v);
                (f - j as f64 / n as f64).abs().max(((j + 1) as f64 / n as f64 - f).abs())
            })
            .fold(0.0, f64::max);
        assert!(d < crit, "{}: D = {d:.5} ≥ {crit:.5}", law.name());
    }
}

#[test]
fn quantile_inverts_cdf_on_log_grid() {
    for law in zoo() {
        let x0 = law.support_left().max(1e-3);
        for j in 1..=60 {
            let x = x0 * (1.0 + 1e-3) * 10f64.powf(j as f64 / 6.0);
            let s = law.sf(x);
            if !(s > 1e-300 && s < 1.0) {
                continue;
            }
            let back = law.quantile_sf(s).unwrap();
            assert!((back / x - 1.0).abs() < 1e-9, "{} x = {x}: {back}", law.name());
        }
    }
}

#[test]
fn fitted_index_is_mean_of_alpha() {
    for law in zoo() {
        for f in [1.5, 10.0, 300.0] {
            let t = law.support_left().max(1.0) * f;
            let a = law.theta_fit(t).unwrap().get();
            let b = law.theta_fit_mean_alpha(t).unwrap().get();
            assert!((a - b).abs() < 1e-6, "{} t = {t}: {a} vs {b}", law.name());
        }
    }
}

#[test]
fn fitted_index_tends_to_one() {
    for law in [Law::cauchy(), Law::hall(), Law::gpd()] {
        let d: Vec<f64> = [1e3, 1e6].iter().map(|&t| (law.theta_fit(t).unwrap().get() - 1.0).abs()).collect();
        assert!(d[1] < d[0] && d[1] < 1e-3, "{}: {d:?}", law.name());
    }
}

#[test]
fn pareto_fits_itself() {
    let law = Law::pareto(1.7).unwrap();
    assert!((law.theta_fit(4.0).unwrap().get() - 1.7).abs() < 1e-8);
    assert!((law.alpha(123.0).unwrap() - 1.7).abs() < 1e-12);
}

#[test]
fn perturbed_pareto_closed_forms() {
    let law = Law::log_perturbed_pareto(1.0, E).unwrap();
    assert!((law.alpha(E * E).unwrap() - 2.0).abs() < 1e-12);
    assert!((law.theta_fit(E * E).unwrap().get() - 1.5).abs() < 1e-8);
    // θ_t = 1 + 1/log t
    for z in [1.5f64, 3.0, 9.0] {
        assert!((law.theta_fit(z.exp()).unwrap().get() - (1.0 + 1.0 / z)).abs() < 1e-8);
    }
}

#[test]
fn hall_support_and_ratio_form() {
    let law = Law::hall();
    let x0 = law.support_left();
    // bisection oracle on the decreasing branch of 2/x − x^{−2.5} − 1
    let h = |x: f64| 2.0 / x - x.powf(-2.5) - 1.0;
    let (mut lo, mut hi) = (1.2, 2.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if h(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    assert!((x0 - lo).abs() < 1e-10 && (x0 - 1.389).abs() < 1e-3, "{x0}");
    assert!(law.cdf(x0).abs() < 1e-12);
    let t: f64 = 50.0;
    let (a, b) = (2.0 * t.powf(-1.0), -t.powf(-2.5));
    let closed = (a + 0.4 * b) / (a + b);
    assert!((law.theta_fit(t).unwrap().get() - closed).abs() < 1e-6);
}

#[test]
fn law_specs_round_trip() {
    for law in zoo() {
        let text = law.spec().to_string();
        let back: LawSpec = text.parse().unwrap();
        assert_eq!(&back, law.spec());
    }
    assert!("weibull".parse::<LawSpec>().is_err());
}
