mod common;

use proptest::prelude::*;
use rmab_rollout::generators::*;
use rmab_rollout::mdp::{MdpModel, StateSpace};
use rmab_rollout::rollout::RolloutConfig;
use rmab_rollout::stream::derive_stream;
use rmab_rollout::whittle::*;
use rmab_rollout::Error;

/// Deterministic 3-state arm whose passive set is not nested in the subsidy.
fn non_indexable_arm() -> MdpModel {
    let to = |s: usize| {
        let mut r = vec![0.0; 3];
        r[s] = 1.0;
        r
    };
    MdpModel::from_dense(
        StateSpace::flat(3).unwrap(),
        2,
        &[vec![to(0), to(2)], vec![to(1), to(2)], vec![to(1), to(0)]],
        &[vec![0.7, 0.9], vec![0.6, 0.9], vec![0.6, 0.6]],
        0.9,
    )
    .unwrap()
}

fn restart() -> MdpModel {
    restart_arm(&[0.1, 0.3, 0.5, 0.7, 0.9], 0.6, 0.8).unwrap()
}

fn static_two() -> MdpModel {
    static_arm(&[vec![0.1, 0.5], vec![0.0, 0.2], vec![0.3, 1.0], vec![0.2, 0.2]], 0.9).unwrap()
}

/// Passive set of the subsidized arm found by enumerating all policies.
fn passive_by_enumeration(m: &MdpModel, w: f64) -> Vec<usize> {
    let rewards = (0..m.num_states())
        .flat_map(|s| [m.reward(s, 0) + w, m.reward(s, 1)])
        .collect();
    let sub = m.with_rewards(rewards).unwrap();
    let (v, _) = common::brute_force_optimum(&sub);
    (0..m.num_states())
        .filter(|&s| sub.q_value(s, 0, &v) >= sub.q_value(s, 1, &v))
        .collect()
}

#[test]
fn subsidized_dp_extremes_and_static_thresholds() {
    let m = static_two();
    let span = 2.0 * m.reward_bound() / (1.0 - m.discount());
    let pass = subsidized_dp(&m, span, SubsidyMode::TwoAction, 1e-10).unwrap();
    assert!(pass.policy.iter().all(|&a| a == 0));
    let act = subsidized_dp(&m, -span, SubsidyMode::TwoAction, 1e-10).unwrap();
    assert!(act.policy.iter().all(|&a| a == 1));
    for (x, gap) in [(0, 0.4), (1, 0.2), (2, 0.7)] {
        assert_eq!(subsidized_dp(&m, gap - 1e-3, SubsidyMode::TwoAction, 1e-12).unwrap().policy[x], 1);
        assert_eq!(subsidized_dp(&m, gap + 1e-3, SubsidyMode::TwoAction, 1e-12).unwrap().policy[x], 0);
    }
}

#[test]
fn passive_set_examples() {
    let m = static_two();
    assert_eq!(passive_set(&m, 100.0).unwrap(), vec![0, 1, 2, 3]);
    assert!(passive_set(&m, -100.0).unwrap().is_empty());
    // gaps are 0.4, 0.2, 0.7, 0: between 0.2 and 0.4 only the low-gap states rest
    assert_eq!(passive_set(&m, 0.3).unwrap(), vec![1, 3]);
}

#[test]
fn static_arms_are_indexable() {
    let m = static_two();
    let rep = check_indexability(&m, &default_grid(&m, DEFAULT_GRID_POINTS).unwrap()).unwrap();
    assert!(rep.indexable && rep.violation.is_none());
    let full = check_full_indexability(&m, &rep.grid, None).unwrap();
    assert!(full.indexable);
    assert_eq!(full.actions, rep.actions);

    let two_point = check_indexability(&m, &default_grid(&m, 2).unwrap()).unwrap();
    assert!(two_point.indexable);
    assert_eq!(two_point.grid.len(), 2);
}

#[test]
fn narrow_grid_is_inconclusive() {
    let m = static_two();
    assert!(matches!(check_indexability(&m, &[-0.01, 0.01]), Err(Error::Inconclusive(_))));
}

#[test]
fn non_indexable_fixture_is_detected() {
    let m = non_indexable_arm();
    let rep = check_indexability(&m, &default_grid(&m, DEFAULT_GRID_POINTS).unwrap()).unwrap();
    assert!(!rep.indexable);
    let v = rep.violation.clone().expect("violation reported");
    assert_eq!(v.w_lo, rep.grid[v.grid_index]);
    assert_eq!(v.w_hi, rep.grid[v.grid_index + 1]);
    // the reported state rests at the lower subsidy and works at the higher one
    assert!(passive_by_enumeration(&m, v.w_lo).contains(&v.state));
    assert!(!passive_by_enumeration(&m, v.w_hi).contains(&v.state));
    assert!(matches!(exact_whittle_index(&m, 0, &rep, 1e-9), Err(Error::NotCertified(_))));
}

#[test]
fn exact_index_on_static_arm() {
    let m = static_two();
    let rep = check_indexability(&m, &default_grid(&m, 201).unwrap()).unwrap();
    for (x, gap) in [(0, 0.4), (1, 0.2), (2, 0.7), (3, 0.0)] {
        assert!((exact_whittle_index(&m, x, &rep, 1e-9).unwrap() - gap).abs() <= 1e-6);
    }
}

#[test]
fn duplicated_states_share_an_index() {
    let row = vec![0.3, 0.3, 0.4];
    let m = MdpModel::from_dense(
        StateSpace::flat(3).unwrap(),
        2,
        &[
            vec![row.clone(), vec![1.0, 0.0, 0.0]],
            vec![row.clone(), vec![1.0, 0.0, 0.0]],
            vec![vec![0.0, 0.0, 1.0], vec![0.5, 0.5, 0.0]],
        ],
        &[vec![0.1, 0.6], vec![0.1, 0.6], vec![0.0, 0.9]],
        0.85,
    )
    .unwrap();
    let rep = check_indexability(&m, &default_grid(&m, 401).unwrap()).unwrap();
    let a = exact_whittle_index(&m, 0, &rep, 1e-10).unwrap();
    let b = exact_whittle_index(&m, 1, &rep, 1e-10).unwrap();
    assert!((a - b).abs() < 1e-9);
}

#[test]
fn restart_arm_indices() {
    let m = restart();
    let rep = check_indexability(&m, &default_grid(&m, DEFAULT_GRID_POINTS).unwrap()).unwrap();
    assert!(rep.indexable);
    let golden = [
        0.00399999994754893,
        0.09105882361146192,
        0.21133564007316888,
        0.35506045191782554,
        0.89999999983887891,
    ];
    let idx: Vec<f64> = (0..5).map(|x| exact_whittle_index(&m, x, &rep, 1e-9).unwrap()).collect();
    assert!(idx.windows(2).all(|w| w[1] > w[0]));
    for (got, want) in idx.iter().zip(golden) {
        assert!((got - want).abs() < 1e-12);
    }
    // bisection certificate: the two actions are nearly tied at the returned subsidy
    for (x, w) in idx.iter().enumerate() {
        assert!(subsidized_gap(&m, x, 1, *w).unwrap().abs() <= 1e-8);
    }
}

#[test]
fn mc_index_on_static_arm() {
    let m = static_two();
    let cfg = RolloutConfig::new(4, 20, 1).unwrap();
    let params = McIndexParams::default();
    for (x, gap) in [(0, 0.4), (1, 0.2), (2, 0.7), (3, 0.0)] {
        let r = mc_whittle_index(&m, x, &cfg, &params).unwrap();
        assert!(r.converged);
        assert!((r.index - gap).abs() <= 0.05);
        assert!(r.trace.last().unwrap().1.abs() < params.tol);
    }
}

#[test]
fn mc_index_on_deterministic_arm_matches_bisection() {
    let m = restart_arm(&[0.2, 0.4, 0.6, 0.8], 1.0, 0.8).unwrap();
    let rep = check_indexability(&m, &default_grid(&m, DEFAULT_GRID_POINTS).unwrap()).unwrap();
    let cfg = RolloutConfig::new(1, 120, 0).unwrap();
    let params = McIndexParams {
        tol: 0.002,
        max_outer: 5000,
        ..McIndexParams::default()
    };
    for x in 0..4 {
        let exact = exact_whittle_index(&m, x, &rep, 1e-9).unwrap();
        let r = mc_whittle_index(&m, x, &cfg, &params).unwrap();
        assert!(r.converged, "state {x}");
        assert!((r.index - exact).abs() <= params.tol / (1.0 - 0.8), "state {x}: {} vs {exact}", r.index);
    }
}

#[test]
fn mc_index_reports_non_convergence() {
    let m = static_two();
    let cfg = RolloutConfig::new(2, 5, 0).unwrap();
    let params = McIndexParams {
        max_outer: 2,
        tol: 1e-9,
        w_init: 5.0,
        step_scale: 0.5,
        ..McIndexParams::default()
    };
    let r = mc_whittle_index(&m, 0, &cfg, &params).unwrap();
    assert!(!r.converged);
    assert_eq!(r.trace.len(), 2);
}

#[test]
fn full_indexability_of_static_levels() {
    let m = static_concave_levels(&[0.5, 1.0, 2.0], 4, 0.9).unwrap();
    let rep = check_full_indexability(&m, &default_grid(&m, 801).unwrap(), None).unwrap();
    assert!(rep.indexable);
    for j in 0..rep.grid.len() {
        assert_eq!(rep.level_set(j, 3), vec![0, 1, 2]);
    }
}

#[test]
fn multi_level_indices_on_static_linear_arm() {
    let gains = [0.25, 0.5, 1.0];
    let m = static_linear_levels(&gains, 3, 0.9).unwrap();
    let rep = check_full_indexability(&m, &default_grid(&m, 801).unwrap(), None).unwrap();
    assert!(rep.indexable);
    let exact = IndexMethod::Exact { report: &rep, tol_w: 1e-9 };
    let (table, _) = build_index_table(&m, None, None, &exact).unwrap();
    let (fast, records) = build_index_table(&m, None, None, &IndexMethod::TwoTimescale(TwoTimescaleParams::default())).unwrap();
    assert!(records.iter().all(|r| r.converged));
    assert!(table.certified && table.is_nonincreasing_in_level());
    for (x, g) in gains.iter().enumerate() {
        assert_eq!(table.get(x, 2), Some(0.0));
        for l in 0..2 {
            let w = table.get(x, l).unwrap();
            assert!((w - g).abs() <= 1e-6);
            assert!((fast.get(x, l).unwrap() - w).abs() <= 0.05);
        }
    }
}

fn table(rows: &[[f64; 3]]) -> IndexTable {
    IndexTable::from_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
}

#[test]
fn greedy_allocation_examples() {
    let t1 = table(&[[5.0, 2.0, 0.0]]);
    let t2 = table(&[[3.0, 1.0, 0.0]]);
    assert_eq!(greedy_allocation(&[t1.clone(), t2.clone()], &[0, 0], 2).unwrap(), vec![1, 1]);
    assert_eq!(greedy_allocation(&[t1, t2], &[0, 0], 4).unwrap(), vec![2, 2]);

    let empty = IndexTable::new(1, 2).unwrap();
    assert!(matches!(
        greedy_allocation(&[empty], &[0], 1),
        Err(Error::MissingIndex { arm: 0, state: 0, level: 0 })
    ));
}

#[test]
fn greedy_matches_top_k_for_two_action_tables() {
    use rand::Rng;
    let mut rng = derive_stream(2024, &[]);
    for _ in 0..2000 {
        let n = rng.gen_range(1..7);
        let k = rng.gen_range(1..n + 2);
        let w: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let tables: Vec<IndexTable> = w.iter().map(|&v| IndexTable::from_whittle(&[v]).unwrap()).collect();
        let a = greedy_allocation(&tables, &vec![0; n], k).unwrap();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&i, &j| w[j].total_cmp(&w[i]));
        let mut want = vec![0; n];
        for &i in order.iter().take(k) {
            if w[i] > 0.0 {
                want[i] = 1;
            }
        }
        assert_eq!(a, want);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn greedy_allocation_is_feasible(
        seed in any::<u64>(),
        n in 1usize..6,
        levels in 2usize..5,
        budget in 0usize..12,
    ) {
        use rand::Rng;
        let mut rng = derive_stream(seed, &[]);
        let states = 3;
        let tables: Vec<IndexTable> = (0..n)
            .map(|_| {
                let rows: Vec<Vec<f64>> = (0..states)
                    .map(|_| (0..levels).map(|_| rng.gen_range(-2.0..2.0)).collect())
                    .collect();
                IndexTable::from_rows(&rows).unwrap()
            })
            .collect();
        let x: Vec<usize> = (0..n).map(|_| rng.gen_range(0..states)).collect();
        let a = greedy_allocation(&tables, &x, budget).unwrap();
        prop_assert!(a.iter().sum::<usize>() <= budget);
        prop_assert!(a.iter().all(|&l| l < levels));
    }
}
