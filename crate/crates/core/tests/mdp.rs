mod common;

use common::{backup_by_hand, brute_force_optimum, policy_value, sup};
use proptest::prelude::*;
use rmab_rollout::generators::random_mdp;
use rmab_rollout::mdp::*;
use rmab_rollout::stream::derive_stream;
use rmab_rollout::Error;

fn single(rewards: &[f64], beta: f64) -> MdpModel {
    let k = rewards.len();
    MdpModel::from_dense(
        StateSpace::flat(1).unwrap(),
        k,
        &[vec![vec![1.0]; k]],
        &[rewards.to_vec()],
        beta,
    )
    .unwrap()
}

fn chain() -> MdpModel {
    // 0 -> 1 -> 1, reward 1 everywhere
    MdpModel::from_dense(
        StateSpace::flat(2).unwrap(),
        1,
        &[vec![vec![0.0, 1.0]], vec![vec![0.0, 1.0]]],
        &[vec![1.0], vec![1.0]],
        0.5,
    )
    .unwrap()
}

#[test]
fn backup_single_state() {
    let m = single(&[1.0], 0.5);
    assert_eq!(bellman_backup(&ValueFunction::new(vec![0.0]), &m).unwrap()[0], 1.0);
    assert_eq!(bellman_backup(&ValueFunction::new(vec![2.0]), &m).unwrap()[0], 2.0);
}

#[test]
fn backup_matches_hand_loop() {
    for seed in 0..5 {
        let m = random_mdp(2, 2, 0.9, seed).unwrap();
        let v = vec![0.3, -1.2];
        let tv = bellman_backup(&ValueFunction::new(v.clone()), &m).unwrap();
        assert!(sup(&tv, &backup_by_hand(&m, &v)) <= 1e-12);
    }
}

#[test]
fn backup_rejects_wrong_size() {
    let m = single(&[1.0], 0.5);
    assert!(matches!(
        bellman_backup(&ValueFunction::new(vec![0.0, 0.0]), &m),
        Err(Error::DimensionMismatch { .. })
    ));
}

#[test]
fn policy_backup_examples() {
    let m = random_mdp(6, 3, 0.9, 3).unwrap();
    let v = ValueFunction::new((0..6).map(|i| i as f64 * 0.7 - 1.0).collect());
    let greedy = greedy_policy(&v, &m).unwrap();
    let tv = bellman_backup(&v, &m).unwrap();
    assert!(tv.sup_distance(&bellman_backup_policy(&v, &m, &greedy).unwrap()) <= 1e-12);

    let zero = single(&[0.0], 0.9);
    let out = bellman_backup_policy(&ValueFunction::new(vec![5.0]), &zero, &DeterministicPolicy::new(vec![0])).unwrap();
    assert_eq!(out[0], 4.5);

    let m = random_mdp(10, 3, 0.9, 11).unwrap();
    let mut rng = derive_stream(1, &[]);
    use rand::Rng;
    let p = DeterministicPolicy::new((0..10).map(|_| rng.gen_range(0..3)).collect());
    let v = ValueFunction::new((0..10).map(|_| rng.gen_range(-5.0..5.0)).collect());
    let tp = bellman_backup_policy(&v, &m, &p).unwrap();
    let t = bellman_backup(&v, &m).unwrap();
    assert!(tp.iter().zip(t.iter()).all(|(a, b)| a <= b));
}

#[test]
fn value_iteration_examples() {
    let r = value_iteration(&single(&[1.0, 0.0], 0.5), 1e-12, 10_000).unwrap();
    assert!((r.values[0] - 2.0).abs() < 1e-10);
    assert_eq!(r.policy.actions(), &[0]);

    let r = value_iteration(&chain(), 1e-12, 10_000).unwrap();
    assert!(sup(&r.values, &[2.0, 2.0]) < 1e-10);

    let r = value_iteration(&random_mdp(8, 3, 0.9, 5).unwrap(), 1e9, 10).unwrap();
    assert_eq!(r.iterations, 1);
}

#[test]
fn value_iteration_reports_non_convergence() {
    let m = random_mdp(5, 2, 0.99, 1).unwrap();
    match value_iteration(&m, 1e-12, 3) {
        Err(Error::NonConvergence { iterations: 3, residual }) => assert!(residual > 0.0),
        other => panic!("expected non-convergence, got {other:?}"),
    }
}

#[test]
fn value_iteration_close_to_brute_force() {
    for seed in 0..6 {
        let m = random_mdp(4, 2, 0.9, seed).unwrap();
        let tol = 1e-8;
        let r = value_iteration(&m, tol, 100_000).unwrap();
        let (v, _) = brute_force_optimum(&m);
        assert!(sup(&r.values, &v) <= tol * 0.9 / 0.1 + 1e-12);
        let tv = bellman_backup(&r.values, &m).unwrap();
        assert!(tv.sup_distance(&r.values) < tol);
        assert_eq!(greedy_policy(&r.values, &m).unwrap(), r.policy);
    }
}

#[test]
fn policy_evaluation_examples() {
    let v = policy_evaluation(&single(&[3.0], 0.25), &DeterministicPolicy::new(vec![0]), 1e-12).unwrap();
    assert!((v[0] - 4.0).abs() < 1e-10);

    let m = random_mdp(5, 3, 0.9, 21).unwrap();
    let p = DeterministicPolicy::new(vec![0, 2, 1, 1, 0]);
    let v = policy_evaluation(&m, &p, 1e-12).unwrap();
    assert!(sup(&v, &policy_value(&m, &p)) <= 1e-8);

    let tol = 1e-9;
    let opt = value_iteration(&m, tol, 100_000).unwrap();
    let v = policy_evaluation(&m, &opt.policy, tol).unwrap();
    assert!(v.sup_distance(&opt.values) <= tol / 0.1 + 1e-9);
}

#[test]
fn policy_iteration_examples() {
    // already optimal start: one round, no changes
    let m = single(&[1.0, 0.0], 0.5);
    let r = policy_iteration_from(&m, DeterministicPolicy::new(vec![0]), 1e-9, 100).unwrap();
    assert_eq!(r.rounds, 1);
    assert_eq!(r.changes, vec![0]);

    // dominant action adopted in the first round
    let m = single(&[0.0, 1.0], 0.5);
    let r = policy_iteration_from(&m, DeterministicPolicy::new(vec![0]), 1e-9, 100).unwrap();
    assert_eq!(r.changes[0], 1);
    assert_eq!(r.policy.actions(), &[1]);
}

#[test]
fn policy_iteration_improves_monotonically() {
    for seed in 0..10 {
        let m = random_mdp(12, 3, 0.9, 100 + seed).unwrap();
        let r = policy_iteration(&m, 1e-9).unwrap();
        for w in r.history.windows(2) {
            assert!(w[1].iter().zip(w[0].iter()).all(|(b, a)| *b >= *a - 1e-9));
        }
        let again = greedy_policy(&r.values, &m).unwrap();
        let v_again = policy_value(&m, &again);
        assert!(sup(&v_again, &r.values) <= 1e-8);
    }
}

#[test]
fn solvers_agree_and_stay_bounded() {
    for seed in 0..20 {
        let beta = if seed % 2 == 0 { 0.5 } else { 0.9 };
        let n = 5 + (seed as usize * 7) % 46;
        let k = 1 + seed as usize % 4;
        let m = random_mdp(n, k, beta, seed).unwrap();
        let vi = value_iteration(&m, 1e-9, 1_000_000).unwrap();
        let pi = policy_iteration(&m, 1e-9).unwrap();
        assert!(vi.values.sup_distance(&pi.values) <= 1e-6, "seed {seed}");
        let cap = m.reward_bound() / (1.0 - beta) + 1e-9;
        assert!(vi.values.iter().chain(pi.values.iter()).all(|v| v.abs() <= cap));
    }
}

#[test]
fn finite_horizon_examples() {
    let m = single(&[1.0], 0.5);
    let p = DeterministicPolicy::new(vec![0]);
    assert_eq!(finite_horizon_value(&m, &p, 3).unwrap()[0], 1.75);

    let m = random_mdp(6, 2, 0.8, 9).unwrap();
    let p = DeterministicPolicy::new(vec![1, 0, 1, 1, 0, 0]);
    let one = finite_horizon_value(&m, &p, 1).unwrap();
    for s in 0..6 {
        assert_eq!(one[s], m.reward(s, p[s]));
    }
    let exact = policy_value(&m, &p);
    for tau in [5u32, 20, 60] {
        let v = finite_horizon_value(&m, &p, tau as usize).unwrap();
        let slack = 0.8f64.powi(tau as i32) * m.reward_bound() / 0.2;
        assert!(sup(&v, &exact) <= slack + 1e-10);
    }
    assert!(finite_horizon_value(&m, &p, 0).is_err());
}

#[test]
fn truncated_optimal_values_within_horizon_bound() {
    for seed in 0..10 {
        let m = random_mdp(8, 3, 0.9, 500 + seed).unwrap();
        let (v_star, p_star) = brute_force_optimum(&MdpModel::clone(&m));
        for tau in 1..=20 {
            let v_tau = finite_horizon_value(&m, &p_star, tau).unwrap();
            let bound = 0.9f64.powi(tau as i32) * m.reward_bound() / 0.1;
            for s in 0..8 {
                let gap = v_star[s] - v_tau[s];
                assert!(gap >= -1e-10 && gap <= bound + 1e-10, "seed {seed} tau {tau}");
            }
        }
    }
}

#[test]
fn tabular_sampling() {
    let det = chain();
    let g = make_tabular_generative(&det);
    let mut rng = derive_stream(3, &[]);
    assert!((0..100).all(|_| g.sample_next(0, 0, &mut rng) == 1));

    let coin = MdpModel::from_dense(
        StateSpace::flat(2).unwrap(),
        1,
        &[vec![vec![0.5, 0.5]], vec![vec![0.5, 0.5]]],
        &[vec![0.0], vec![0.0]],
        0.9,
    )
    .unwrap();
    let g = make_tabular_generative(&coin);
    let mut rng = derive_stream(4, &[]);
    let ones = (0..100_000).filter(|_| g.sample_next(0, 0, &mut rng) == 1).count();
    assert!((ones as f64 / 1e5 - 0.5).abs() < 0.01);

    let mut a = derive_stream(9, &[1]);
    let mut b = derive_stream(9, &[1]);
    let sa: Vec<usize> = (0..50).map(|_| g.sample_next(1, 0, &mut a)).collect();
    let sb: Vec<usize> = (0..50).map(|_| g.sample_next(1, 0, &mut b)).collect();
    assert_eq!(sa, sb);
}

fn model_strategy() -> impl Strategy<Value = (MdpModel, Vec<f64>, Vec<f64>, Vec<usize>)> {
    (2usize..12, 1usize..4, prop::sample::select(vec![0.5, 0.9, 0.99]), any::<u64>()).prop_flat_map(
        |(n, k, beta, seed)| {
            let m = random_mdp(n, k, beta, seed).unwrap();
            (
                Just(m),
                prop::collection::vec(-10.0f64..10.0, n),
                prop::collection::vec(-10.0f64..10.0, n),
                prop::collection::vec(0..k, n),
            )
        },
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn bellman_operators_contract((m, v, u, p) in model_strategy()) {
        let beta = m.discount();
        let (v, u) = (ValueFunction::new(v), ValueFunction::new(u));
        let p = DeterministicPolicy::new(p);
        let d = v.sup_distance(&u);
        let t = bellman_backup(&v, &m).unwrap().sup_distance(&bellman_backup(&u, &m).unwrap());
        prop_assert!(t <= beta * d + 1e-12);
        let tp = bellman_backup_policy(&v, &m, &p).unwrap()
            .sup_distance(&bellman_backup_policy(&u, &m, &p).unwrap());
        prop_assert!(tp <= beta * d + 1e-12);
    }

    #[test]
    fn bellman_operators_monotone((m, v, bump, p) in model_strategy()) {
        let hi: Vec<f64> = v.iter().zip(&bump).map(|(a, b)| a + b.abs()).collect();
        let (lo, hi) = (ValueFunction::new(v), ValueFunction::new(hi));
        let p = DeterministicPolicy::new(p);
        let (tl, th) = (bellman_backup(&lo, &m).unwrap(), bellman_backup(&hi, &m).unwrap());
        prop_assert!(tl.iter().zip(th.iter()).all(|(a, b)| a <= b));
        let (pl, ph) = (bellman_backup_policy(&lo, &m, &p).unwrap(), bellman_backup_policy(&hi, &m, &p).unwrap());
        prop_assert!(pl.iter().zip(ph.iter()).all(|(a, b)| a <= b));
    }
}
