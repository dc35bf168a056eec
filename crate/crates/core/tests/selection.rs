use adaptail::changepoint::t_window;
use adaptail::par::{map_reps, rep_rng, Exec};
use adaptail::{select, AdaptiveConfig, Law};

fn median(mut v: Vec<usize>) -> f64 {
    v.sort_unstable();
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2] as f64
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2]) as f64
    }
}

#[test]
fn pareto_rarely_rejects() {
    let law = Law::pareto(1.0).unwrap();
    let cfg = AdaptiveConfig::defaults_for(1000).unwrap();
    let sels = map_reps(Exec::default(), 500, |rep| select(&law.sample(1000, &mut rep_rng(31, rep))?, &cfg)).unwrap();
    let kept = sels.iter().filter(|s| !s.rejected).count() as f64 / 500.0;
    // nominal 99%; 0.97 is four binomial standard errors below
    assert!(kept >= 0.97, "non-rejection fraction {kept}");
    assert!(sels.iter().filter(|s| !s.rejected).all(|s| s.k_hat == 1000 && s.m_hat == 1000));
}

#[test]
fn change_point_is_located() {
    // index 3 below τ = 1000 and 1 above: P(X > τ) = 0.1, the 100th order statistic
    let law = Law::pareto_change_point(3.0, 1.0, 1000.0).unwrap();
    let cfg = AdaptiveConfig::defaults_for(1000).unwrap();
    let sels = map_reps(Exec::default(), 500, |rep| select(&law.sample(1000, &mut rep_rng(77, rep))?, &cfg)).unwrap();
    let rejected = sels.iter().filter(|s| s.rejected).count();
    assert!(rejected >= 490, "rejected in {rejected} of 500");
    let med = median(sels.iter().map(|s| s.k_hat).collect());
    assert!((70.0..=130.0).contains(&med), "median k̂ = {med}");
}

#[test]
fn window_argmax_near_change() {
    let law = Law::pareto_change_point(3.0, 1.0, 1000.0).unwrap();
    let ks = map_reps(Exec::default(), 200, |rep| {
        Ok(t_window(&law.sample(1000, &mut rep_rng(5, rep))?, 400, 0.25, 0.05)?.best_k)
    })
    .unwrap();
    let med = median(ks);
    assert!((70.0..=130.0).contains(&med), "median best k = {med}");
}

#[test]
fn selection_is_deterministic_across_workers() {
    let law = Law::cauchy();
    let cfg = AdaptiveConfig::defaults_for(1000).unwrap();
    let run = |exec| map_reps(exec, 64, |rep| select(&law.sample(1000, &mut rep_rng(9, rep))?, &cfg)).unwrap();
    assert_eq!(run(Exec::Sequential), run(Exec::Parallel { workers: Some(3) }));
}
