use proptest::prelude::*;
use rmab_rollout::bounds::min_horizon_for_eps;
use rmab_rollout::generators::{random_mdp, random_rmab, static_arm};
use rmab_rollout::mdp::{MdpModel, StateSpace};
use rmab_rollout::rmab::*;
use rmab_rollout::stream::{derive_stream, StreamRng};
use rmab_rollout::{Error, Result};

fn arm(m: MdpModel) -> ArmModel {
    ArmModel::new("arm", m)
}

fn static_rmab(play: &[f64], budget: usize, beta: f64) -> RmabModel {
    let arms = play
        .iter()
        .map(|&r| arm(static_arm(&[vec![0.0, r]], beta).unwrap()))
        .collect();
    RmabModel::new(arms, budget).unwrap()
}

/// Every feasible joint action by brute force over the level product.
fn brute_feasible(m: &RmabModel) -> Vec<JointAction> {
    let mut out = vec![vec![]];
    for i in 0..m.num_arms() {
        let mut next = Vec::new();
        for a in &out {
            for l in 0..m.arm(i).levels() {
                let mut b = a.clone();
                b.push(l);
                next.push(b);
            }
        }
        out = next;
    }
    out.retain(|a| a.iter().sum::<usize>() <= m.budget());
    out
}

#[test]
fn enumeration_examples() {
    let two = |n, k| static_rmab(&vec![1.0; n], k, 0.9);
    assert_eq!(
        enumerate_feasible_actions(&two(2, 1)).unwrap(),
        vec![vec![0, 0], vec![0, 1], vec![1, 0]]
    );
    let three_levels = RmabModel::new(vec![arm(static_arm(&[vec![0.0, 1.0, 2.0]], 0.9).unwrap())], 2).unwrap();
    assert_eq!(enumerate_feasible_actions(&three_levels).unwrap(), vec![vec![0], vec![1], vec![2]]);
    assert_eq!(enumerate_feasible_actions(&two(3, 3)).unwrap().len(), 8);
}

#[test]
fn enumeration_guard() {
    let big = random_rmab(24, 1, 2, 3, 0.9, 0).unwrap();
    assert!(matches!(enumerate_feasible_actions(&big), Err(Error::Guard { .. })));
}

#[test]
fn myopic_examples() {
    let m = static_rmab(&[3.0, 1.0, 2.0], 1, 0.9);
    assert_eq!(myopic_action(&m, &[0, 0, 0]).unwrap(), vec![1, 0, 0]);
    let flat = RmabModel::new(
        (0..3).map(|_| arm(static_arm(&[vec![1.0, 1.0]], 0.9).unwrap())).collect(),
        2,
    )
    .unwrap();
    assert_eq!(myopic_action(&flat, &[0, 0, 0]).unwrap(), vec![0, 0, 0]);
}

#[test]
fn myopic_matches_brute_force_on_multi_level_arms() {
    for seed in 0..30 {
        let m = random_rmab(3, 3, 4, 1 + seed as usize % 7, 0.9, seed).unwrap();
        let x = vec![seed as usize % 3, (seed as usize / 3) % 3, 1];
        let best = brute_feasible(&m)
            .into_iter()
            .map(|a| m.joint_reward(&x, &a))
            .fold(f64::NEG_INFINITY, f64::max);
        let a = myopic_action(&m, &x).unwrap();
        assert!(m.is_feasible(&a));
        assert!((m.joint_reward(&x, &a) - best).abs() < 1e-12);
    }
}

#[test]
fn lookahead_examples() {
    let m = random_rmab(2, 3, 2, 1, 0.9, 4).unwrap();
    let myopic_world = m.with_discount(0.0).unwrap();
    for x0 in 0..3 {
        for x1 in 0..3 {
            let x = [x0, x1];
            assert_eq!(lookahead_action(&myopic_world, &x).unwrap(), myopic_action(&myopic_world, &x).unwrap());
        }
    }
    let s = static_rmab(&[0.4, 0.9, 0.1], 2, 0.9);
    assert_eq!(lookahead_action(&s, &[0, 0, 0]).unwrap(), myopic_action(&s, &[0, 0, 0]).unwrap());
}

#[test]
fn lookahead_on_deterministic_toy() {
    // arm 0: playing earns 1 now and moves to a dead state; arm 1 earns 0.8
    // now and moves to a state worth 3 next step.
    let a0 = MdpModel::from_dense(
        StateSpace::flat(2).unwrap(),
        2,
        &[
            vec![vec![1.0, 0.0], vec![0.0, 1.0]],
            vec![vec![0.0, 1.0], vec![0.0, 1.0]],
        ],
        &[vec![0.0, 1.0], vec![0.0, 0.0]],
        0.5,
    )
    .unwrap();
    let a1 = MdpModel::from_dense(
        StateSpace::flat(2).unwrap(),
        2,
        &[
            vec![vec![1.0, 0.0], vec![0.0, 1.0]],
            vec![vec![0.0, 1.0], vec![0.0, 1.0]],
        ],
        &[vec![0.0, 0.8], vec![0.0, 3.0]],
        0.5,
    )
    .unwrap();
    let m = RmabModel::new(vec![arm(a0), arm(a1)], 1).unwrap();
    // two-step values by hand: play 0 -> 1 + 0.5 * 0.8 = 1.4; play 1 -> 0.8 + 0.5 * 3 = 2.3
    assert_eq!(myopic_action(&m, &[0, 0]).unwrap(), vec![1, 0]);
    assert_eq!(lookahead_action(&m, &[0, 0]).unwrap(), vec![0, 1]);
}

#[test]
fn joint_model_factorizes() {
    let m = random_rmab(2, 2, 2, 1, 0.9, 17).unwrap();
    let j = joint_as_mdp(&m).unwrap();
    for s in 0..j.mdp.num_states() {
        let x = j.decode(s).unwrap();
        for (k, a) in j.actions.iter().enumerate() {
            assert_eq!(j.mdp.reward(s, k), m.joint_reward(&x, a));
            let mut sum = 0.0;
            for y in 0..j.mdp.num_states() {
                let yy = j.decode(y).unwrap();
                let want = m.arm(0).model().prob(x[0], a[0], yy[0]) * m.arm(1).model().prob(x[1], a[1], yy[1]);
                assert!((j.mdp.prob(s, k, y) - want).abs() < 1e-12);
                sum += j.mdp.prob(s, k, y);
            }
            assert!((sum - 1.0).abs() < 1e-9);
        }
    }
}

#[test]
fn single_arm_joint_model_is_the_arm() {
    let base = random_mdp(4, 3, 0.8, 2).unwrap();
    let m = RmabModel::new(vec![arm(base.clone())], 1).unwrap();
    let j = joint_as_mdp(&m).unwrap();
    assert_eq!(j.actions, vec![vec![0], vec![1]]);
    for s in 0..4 {
        for a in 0..2 {
            assert_eq!(j.mdp.reward(s, a), base.reward(s, a));
            for y in 0..4 {
                assert!((j.mdp.prob(s, a, y) - base.prob(s, a, y)).abs() < 1e-15);
            }
        }
    }
}

#[test]
fn episode_examples() {
    let m = random_rmab(3, 4, 2, 1, 0.9, 3).unwrap();
    let x0 = vec![1, 2, 3];
    let mut rng = derive_stream(1, &[]);
    let r = simulate_episode(&m, &MyopicPolicy, &x0, 1, &mut rng).unwrap();
    assert_eq!(r, m.joint_reward(&x0, &myopic_action(&m, &x0).unwrap()));

    let s = static_rmab(&[0.5, 2.0], 1, 0.8);
    let mut rng = derive_stream(1, &[]);
    let total = simulate_episode(&s, &MyopicPolicy, &[0, 0], 25, &mut rng).unwrap();
    assert!((total - 2.0 * (1.0 - 0.8f64.powi(25)) / 0.2).abs() < 1e-12);

    let e = evaluate_policy(&s, &MyopicPolicy, &[0, 0], 10, 25, 3).unwrap();
    assert_eq!(e.std_err, 0.0);

    let one = evaluate_policy(&m, &MyopicPolicy, &x0, 1, 30, 8).unwrap();
    let mut rng = derive_stream(8, &[0]);
    assert_eq!(one.mean, simulate_episode(&m, &MyopicPolicy, &x0, 30, &mut rng).unwrap());
}

struct Greedy;

impl JointPolicy for Greedy {
    fn decide(&self, m: &RmabModel, _x: &[usize], _step: usize, _rng: &mut StreamRng) -> Result<JointAction> {
        Ok(vec![1; m.num_arms()])
    }
}

#[test]
fn infeasible_decision_is_reported_with_step() {
    let m = static_rmab(&[1.0, 1.0], 1, 0.9);
    let mut rng = derive_stream(0, &[]);
    match simulate_episode(&m, &Greedy, &[0, 0], 5, &mut rng) {
        Err(Error::InfeasibleAction { step: 0, action, .. }) => assert_eq!(action, vec![1, 1]),
        other => panic!("expected infeasible action, got {other:?}"),
    }
}

#[test]
fn optimal_policy_value_matches_simulation() {
    let m = random_rmab(2, 3, 2, 1, 0.8, 5).unwrap();
    let opt = OptimalJointPolicy::solve(&m, 1e-10, 1_000_000).unwrap();
    let horizon = min_horizon_for_eps(0.01, 0.8, m.reward_bound()).unwrap() as usize;
    let x0 = vec![0, 2];
    let e = evaluate_policy(&m, &opt, &x0, 4000, horizon, 12).unwrap();
    let v = opt.value(&x0).unwrap();
    assert!((e.mean - v).abs() <= 3.0 * e.std_err + 0.01, "{} vs {v}", e.mean);

    let my = evaluate_policy(&m, &MyopicPolicy, &x0, 4000, horizon, 12).unwrap();
    let combined = (e.std_err.powi(2) + my.std_err.powi(2)).sqrt();
    assert!(e.mean >= my.mean - 3.0 * combined);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn policies_respect_budget(seed in any::<u64>(), arms in 1usize..4, levels in 2usize..4, budget in 1usize..5) {
        let m = random_rmab(arms, 3, levels, budget, 0.9, seed).unwrap();
        let x: Vec<usize> = (0..arms).map(|i| (seed as usize >> i) % 3).collect();
        prop_assert!(m.is_feasible(&myopic_action(&m, &x).unwrap()));
        prop_assert!(m.is_feasible(&lookahead_action(&m, &x).unwrap()));
        for a in enumerate_feasible_actions(&m).unwrap() {
            prop_assert!(a.iter().sum::<usize>() <= budget);
        }
        let mut rng = derive_stream(seed, &[]);
        simulate_episode(&m, &LookaheadPolicy, &x, 5, &mut rng).unwrap();
    }
}
