mod common;

use proptest::prelude::*;
use rand::Rng;

use common::{exact_policy_v, policy_iteration_q, q_from_v, random_rows, sup_distance};
use irl_elicit::baselines::{discounted_state_occupancy, discounted_state_occupancy_iterative};
use irl_elicit::env::sample_random_mdp;
use irl_elicit::mdp::{
    evaluate_policy_q, greedy_policy, l1_loss, softmax_policy, solve_optimal_q,
    ControlledMarkovProcess, Discount, Mdp, Policy, RewardModel, Table,
};
use irl_elicit::rng::prng;

fn random_reward<R: Rng>(n: usize, k: usize, rng: &mut R) -> RewardModel {
    let values = (0..n * k).map(|_| rng.random::<f64>()).collect();
    RewardModel::new(Table::from_flat(n, k, values).unwrap()).unwrap()
}

#[test]
fn value_iteration_matches_policy_iteration() {
    let mut rng = prng(501);
    let mut worst: f64 = 0.0;
    for _ in 0..50 {
        let cmp = sample_random_mdp(5, 3, &mut rng).unwrap();
        let reward = random_reward(5, 3, &mut rng);
        let gamma = rng.random_range(0.5..0.95);
        let mdp = Mdp::new(&cmp, &reward, Discount::new(gamma).unwrap()).unwrap();
        let q = solve_optimal_q(&mdp, 1e-9, 1_000_000).unwrap();
        let exact = policy_iteration_q(&cmp, &reward, gamma);
        worst = worst.max(sup_distance(&exact, q.as_slice()));
    }
    assert!(worst <= 1e-6, "sup-norm gap {worst}");
}

#[test]
fn three_state_value_iteration_at_default_tolerance() {
    // Default tolerance 1e-6 bounds the error by gamma * tol / (1 - gamma).
    let mut rng = prng(3);
    let transitions = (0..3)
        .map(|_| random_rows(2, 3, &mut rng))
        .collect::<Vec<_>>();
    let cmp = ControlledMarkovProcess::new(transitions, vec![1.0 / 3.0; 3]).unwrap();
    let reward = random_reward(3, 2, &mut rng);
    let mdp = Mdp::new(&cmp, &reward, Discount::new(0.9).unwrap()).unwrap();
    let q = solve_optimal_q(&mdp, 1e-6, 100_000).unwrap();
    let exact = policy_iteration_q(&cmp, &reward, 0.9);
    assert!(sup_distance(&exact, q.as_slice()) <= 0.9 * 1e-6 / 0.1);
}

#[test]
fn policy_evaluation_matches_dense_solve() {
    let mut rng = prng(502);
    for n in [4, 5, 9] {
        let cmp = sample_random_mdp(n, 3, &mut rng).unwrap();
        let reward = random_reward(n, 3, &mut rng);
        let rows = random_rows(n, 3, &mut rng);
        let policy = Policy::from_rows(rows.clone()).unwrap();
        let mdp = Mdp::new(&cmp, &reward, Discount::new(0.9).unwrap()).unwrap();
        let q = evaluate_policy_q(&mdp, &policy, 1e-9).unwrap();
        let exact = q_from_v(
            &cmp,
            &reward,
            0.9,
            &exact_policy_v(&cmp, &reward, 0.9, &rows),
        );
        assert!(sup_distance(&exact, q.as_slice()) <= 1e-6);
    }
}

#[test]
fn occupancy_mass_and_methods_agree() {
    let mut rng = prng(503);
    for _ in 0..20 {
        let cmp = sample_random_mdp(8, 4, &mut rng).unwrap();
        let gamma = rng.random_range(0.1..0.99);
        let discount = Discount::new(gamma).unwrap();
        let policy = Policy::from_rows(random_rows(8, 4, &mut rng)).unwrap();
        let direct = discounted_state_occupancy(&cmp, &policy, discount).unwrap();
        assert!((direct.total() - 1.0 / (1.0 - gamma)).abs() <= 1e-6);
        let iterative =
            discounted_state_occupancy_iterative(&cmp, &policy, discount, 1e-12).unwrap();
        for (a, b) in direct.as_slice().iter().zip(iterative.as_slice()) {
            assert!((a - b).abs() <= 1e-6);
        }
    }
}

#[test]
fn occupancy_matches_rollout_sum() {
    // sum_t gamma^t d_t truncated far past the discount horizon
    let mut rng = prng(504);
    let cmp = sample_random_mdp(6, 2, &mut rng).unwrap();
    let policy = Policy::from_rows(random_rows(6, 2, &mut rng)).unwrap();
    let gamma = 0.8;
    let mut d = cmp.initial_dist().to_vec();
    let mut x = vec![0.0; 6];
    let mut weight = 1.0;
    for _ in 0..400 {
        for (xi, di) in x.iter_mut().zip(&d) {
            *xi += weight * di;
        }
        let mut next = vec![0.0; 6];
        for s in 0..6 {
            for a in 0..2 {
                for (s2, t) in cmp.row(s, a).iter().enumerate() {
                    next[s2] += d[s] * policy.prob(s, a) * t;
                }
            }
        }
        d = next;
        weight *= gamma;
    }
    let occ = discounted_state_occupancy(&cmp, &policy, Discount::new(gamma).unwrap()).unwrap();
    for (a, b) in occ.as_slice().iter().zip(&x) {
        assert!((a - b).abs() <= 1e-9);
    }
}

fn arb_problem() -> impl Strategy<Value = (ControlledMarkovProcess, RewardModel, f64, u64)> {
    (2usize..6, 1usize..4, 0.0f64..0.95, any::<u64>()).prop_map(|(n, k, gamma, seed)| {
        let mut rng = prng(seed);
        let transitions = (0..n).map(|_| random_rows(k, n, &mut rng)).collect();
        let cmp = ControlledMarkovProcess::new(transitions, vec![1.0 / n as f64; n]).unwrap();
        let reward = random_reward(n, k, &mut rng);
        (cmp, reward, gamma, seed)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn greedy_optimal_policy_has_zero_loss((cmp, reward, gamma, _) in arb_problem()) {
        let mdp = Mdp::new(&cmp, &reward, Discount::new(gamma).unwrap()).unwrap();
        let q = solve_optimal_q(&mdp, 1e-10, 1_000_000).unwrap();
        let greedy = greedy_policy(&q, 1e-9);
        let q_pi = evaluate_policy_q(&mdp, &greedy, 1e-10).unwrap();
        for (a, b) in q.as_slice().iter().zip(q_pi.as_slice()) {
            prop_assert!((a - b).abs() <= 1e-7);
        }
        prop_assert!(l1_loss(&mdp, &greedy, 1e-10).unwrap() <= 1e-7);
    }

    #[test]
    fn any_policy_loss_is_nonnegative((cmp, reward, gamma, seed) in arb_problem(), eta in 0.0f64..20.0) {
        let mdp = Mdp::new(&cmp, &reward, Discount::new(gamma).unwrap()).unwrap();
        let q = solve_optimal_q(&mdp, 1e-10, 1_000_000).unwrap();
        let soft = softmax_policy(&q, eta);
        let loss = l1_loss(&mdp, &soft, 1e-10).unwrap();
        prop_assert!(loss >= 0.0);
        // Loss of an arbitrary policy is bounded by the value range.
        prop_assert!(loss <= cmp.n_states() as f64 / (1.0 - gamma) + 1e-9);
        let rows = random_rows(cmp.n_states(), cmp.n_actions(), &mut prng(seed ^ 1));
        let v = exact_policy_v(&cmp, &reward, gamma, &rows);
        let exact_q = policy_iteration_q(&cmp, &reward, gamma);
        for (s, vs) in v.iter().enumerate() {
            let best = exact_q[s].iter().copied().fold(f64::NEG_INFINITY, f64::max);
            prop_assert!(*vs <= best + 1e-9);
        }
    }

    #[test]
    fn softmax_rows_are_distributions((cmp, reward, gamma, _) in arb_problem(), eta in 0.0f64..1e3) {
        let mdp = Mdp::new(&cmp, &reward, Discount::new(gamma).unwrap()).unwrap();
        let q = solve_optimal_q(&mdp, 1e-8, 1_000_000).unwrap();
        let pi = softmax_policy(&q, eta);
        for s in 0..cmp.n_states() {
            let row = pi.row(s);
            prop_assert!(row.iter().all(|p| (0.0..=1.0).contains(p)));
            prop_assert!((row.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
        }
    }

    #[test]
    fn zero_discount_returns_reward((cmp, reward, _, _) in arb_problem()) {
        let mdp = Mdp::new(&cmp, &reward, Discount::new(0.0).unwrap()).unwrap();
        let q = solve_optimal_q(&mdp, 1e-12, 10).unwrap();
        prop_assert_eq!(q.as_slice(), reward.table().as_slice());
    }
}
