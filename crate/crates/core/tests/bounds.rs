use rmab_rollout::bounds::*;

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-12 * (1.0 + b.abs())
}

#[test]
fn api_bound() {
    assert_eq!(api_worst_case_bound(0.0, 0.0, 0.9).unwrap(), 0.0);
    // (delta + 2 beta epsilon) / (1 - beta^2) evaluated by hand
    assert!(close(api_worst_case_bound(0.1, 0.05, 0.5).unwrap(), (0.1 + 0.05) / 0.75));
    let one = api_worst_case_bound(0.3, 0.0, 0.7).unwrap();
    assert!(close(api_worst_case_bound(0.6, 0.0, 0.7).unwrap(), 2.0 * one));
    assert!(api_worst_case_bound(0.1, 0.1, 1.0).is_err());
}

#[test]
fn greedy_and_reward_error_bounds() {
    assert_eq!(improved_greedy_bound(0.0, 0.3).unwrap(), 0.0);
    assert!(close(improved_greedy_bound(0.1, 0.5).unwrap(), 0.2));
    let grid: Vec<f64> = (1..100).map(|i| improved_greedy_bound(0.1, i as f64 / 100.0).unwrap()).collect();
    assert!(grid.windows(2).all(|w| w[1] >= w[0]));

    assert!(close(reward_error_bound(0.1, 0.0, 0.6).unwrap(), improved_greedy_bound(0.1, 0.6).unwrap()));
    assert!(close(reward_error_bound(0.1, 0.05, 0.5).unwrap(), 0.4));
    assert_eq!(reward_error_bound(0.0, 0.0, 0.5).unwrap(), 0.0);
}

#[test]
fn horizon_bounds() {
    assert!(rolling_horizon_bound(1.0, 0.5, 1000).unwrap() < 1e-12);
    assert!(close(rolling_horizon_bound(1.0, 0.5, 6).unwrap(), 0.03125));
    assert_eq!(rolling_horizon_bound(0.0, 0.5, 3).unwrap(), 0.0);

    assert_eq!(
        approx_plus_horizon_bound(1.0, 0.5, 6, 0.0).unwrap(),
        rolling_horizon_bound(1.0, 0.5, 6).unwrap()
    );
    assert!(close(approx_plus_horizon_bound(1.0, 0.5, 6, 0.1).unwrap(), 0.23125));
    let seq: Vec<f64> = (1..200).map(|t| approx_plus_horizon_bound(2.0, 0.9, t, 0.1).unwrap()).collect();
    assert!(seq.windows(2).all(|w| w[1] <= w[0]));
    assert!((seq.last().unwrap() - 2.0 * 0.9 * 0.1 / 0.1).abs() < 1e-6);
}

#[test]
fn min_horizon() {
    assert_eq!(min_horizon_for_eps(0.1, 0.5, 1.0).unwrap(), 6);
    assert_eq!(min_horizon_for_eps(5.0, 0.5, 1.0).unwrap(), 1);
    assert_eq!(min_horizon_for_eps(0.1, 0.5, 0.0).unwrap(), 1);
    for eps in [0.1, 0.01] {
        for beta in [0.5, 0.9] {
            let tau = min_horizon_for_eps(eps, beta, 1.0).unwrap();
            assert!(rolling_horizon_bound(1.0, beta, tau).unwrap() < eps);
            let threshold = 1.0 + (eps * (1.0 - beta)).ln() / beta.ln();
            assert!(tau as f64 > threshold && (tau - 1) as f64 <= threshold);
        }
    }
}

#[test]
fn sample_bound() {
    assert_eq!(hoeffding_sample_bound(100.0, 0.05, 0.9, 10, 0.0, 1.0).unwrap(), 1);
    let l = hoeffding_sample_bound(0.1, 0.05, 0.9, 1_000_000, 0.0, 1.0).unwrap();
    let by_hand = (4.0 * 40f64.ln() / (2.0 * 0.01 * 0.01)).ceil() as u64;
    assert_eq!(l, by_hand);
    assert_eq!(l, 73_778);
    for (eps, delta, beta, tau) in [(0.1, 0.05, 0.9, 30), (0.5, 0.01, 0.5, 4), (0.05, 0.2, 0.8, 12)] {
        let l = hoeffding_sample_bound(eps, delta, beta, tau, -1.0, 2.0).unwrap();
        assert!(sample_bound_tail(l, eps, beta, tau, -1.0, 2.0).unwrap() <= delta);
        if l > 1 {
            assert!(sample_bound_tail(l - 1, eps, beta, tau, -1.0, 2.0).unwrap() > delta * 0.999);
        }
    }
    assert!(hoeffding_sample_bound(0.0, 0.05, 0.9, 3, 0.0, 1.0).is_err());
    assert!(hoeffding_sample_bound(0.1, 0.0, 0.9, 3, 0.0, 1.0).is_err());
}

#[test]
fn printed_form_is_reported_verbatim() {
    let v = printed_sample_bound(0.1, 0.05, 0.9, 10, 0.0, 1.0).unwrap();
    let by_hand = 2.0 * 0.01 * (1.0 - 0.81) / (4.0 * (1.0 - 0.9f64.powi(10)) * 40f64.ln());
    assert!(close(v, by_hand));
}

#[test]
fn hoeffding_tail_examples() {
    assert_eq!(hoeffding_tail(1, 0.0, &[(0.0, 1.0)]).unwrap(), 2.0);
    assert!(close(hoeffding_tail(1, 1.0, &[(0.0, 1.0)]).unwrap(), 2.0 * (-2.0f64).exp()));
    let base = hoeffding_tail(3, 0.7, &[(0.0, 1.0), (-1.0, 1.0), (0.0, 0.5)]).unwrap();
    let wide = hoeffding_tail(3, 0.7, &[(0.0, 2.0), (-2.0, 2.0), (0.0, 1.0)]).unwrap();
    assert!(close((wide / 2.0).ln(), (base / 2.0).ln() / 4.0));
}

#[test]
fn bounds_are_nonnegative_and_continuous_on_a_grid() {
    let f = |b: f64, eps: f64| {
        approx_plus_horizon_bound(1.0, b, 5, eps).unwrap()
            + api_worst_case_bound(eps, eps, b).unwrap()
            + reward_error_bound(eps, eps, b).unwrap()
    };
    for &eps in &[0.0, 0.05, 0.3] {
        for i in 1..50 {
            let b = i as f64 / 50.0;
            let v = f(b, eps);
            assert!(v >= 0.0);
            assert!((f(b + 1e-9, eps) - v).abs() <= 1e-6 * (1.0 + v));
        }
    }
}
