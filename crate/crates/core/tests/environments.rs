use irl_elicit::env::{
    make_demonstrator, maze_kernel, sample_maze, sample_random_mdp, sample_reward, simulate,
    BetaProductPrior, MazeAction, MazeSpec,
};
use irl_elicit::mdp::{ControlledMarkovProcess, Discount, Mdp, Policy, RewardModel};
use irl_elicit::rng::prng;

/// Transitive closure of the union-over-actions graph, Warshall style.
fn strongly_connected(cmp: &ControlledMarkovProcess) -> bool {
    let n = cmp.n_states();
    let mut reach = vec![vec![false; n]; n];
    for (s, row) in reach.iter_mut().enumerate() {
        row[s] = true;
        for a in 0..cmp.n_actions() {
            for (next, &p) in cmp.row(s, a).iter().enumerate() {
                if p > 0.0 {
                    row[next] = true;
                }
            }
        }
    }
    for k in 0..n {
        for i in 0..n {
            if reach[i][k] {
                for j in 0..n {
                    if reach[k][j] {
                        reach[i][j] = true;
                    }
                }
            }
        }
    }
    reach.iter().all(|row| row.iter().all(|r| *r))
}

fn assert_stochastic(cmp: &ControlledMarkovProcess) {
    for s in 0..cmp.n_states() {
        for a in 0..cmp.n_actions() {
            let row = cmp.row(s, a);
            assert!(row.iter().all(|p| *p >= 0.0));
            assert!((row.iter().sum::<f64>() - 1.0).abs() <= 1e-9);
        }
    }
}

#[test]
fn random_mdps_are_sparse_and_communicating() {
    let mut rng = prng(71);
    for n in [4, 5, 9, 16, 33] {
        for _ in 0..10 {
            let cmp = sample_random_mdp(n, 4, &mut rng).unwrap();
            assert_stochastic(&cmp);
            assert!(strongly_connected(&cmp), "{n} states");
            for s in 0..n {
                for a in 0..4 {
                    let support = cmp.row(s, a).iter().filter(|p| **p > 0.0).count();
                    assert_eq!(support, n.div_ceil(4));
                }
            }
        }
    }
}

#[test]
fn random_mdp_rejects_tiny_state_spaces() {
    assert!(sample_random_mdp(3, 2, &mut prng(1)).is_err());
    assert!(sample_random_mdp(8, 0, &mut prng(1)).is_err());
}

#[test]
fn open_two_by_two_slip_split() {
    let cmp = maze_kernel(&MazeSpec::open(2, 2)).unwrap();
    // states 0 (NW), 1 (NE), 2 (SW), 3 (SE); NW neighbours are NE and SW
    let row = cmp.row(0, MazeAction::East as usize);
    let expected = [0.0, 0.7 + 0.15, 0.15, 0.0];
    for (p, e) in row.iter().zip(expected) {
        assert!((p - e).abs() <= 1e-12);
    }
    // blocked move: stay put with the success mass
    let row = cmp.row(0, MazeAction::North as usize);
    let expected = [0.7, 0.15, 0.15, 0.0];
    for (p, e) in row.iter().zip(expected) {
        assert!((p - e).abs() <= 1e-12);
    }
}

#[test]
fn sampled_mazes_respect_wall_budget_and_connectivity() {
    let mut rng = prng(72);
    for (w, h) in [(4, 4), (8, 8), (10, 6)] {
        for _ in 0..10 {
            let (cmp, spec) = sample_maze(w, h, &mut rng).unwrap();
            assert!(4 * spec.wall_count() <= w * h);
            assert_eq!(cmp.n_states(), w * h - spec.wall_count());
            assert_eq!(cmp.n_actions(), 4);
            assert_stochastic(&cmp);
            assert!(strongly_connected(&cmp));
            for (s, (x, y)) in spec.free_cells().into_iter().enumerate() {
                assert_eq!(spec.state_of(x, y), Some(s));
                // the intended move gets at least the success probability
                for action in MazeAction::ALL {
                    let (dx, dy): (isize, isize) = match action {
                        MazeAction::North => (0, -1),
                        MazeAction::East => (1, 0),
                        MazeAction::South => (0, 1),
                        MazeAction::West => (-1, 0),
                    };
                    let target = x
                        .checked_add_signed(dx)
                        .zip(y.checked_add_signed(dy))
                        .and_then(|(nx, ny)| spec.state_of(nx, ny))
                        .unwrap_or(s);
                    assert!(cmp.row(s, action as usize)[target] >= 0.7 - 1e-12);
                }
            }
        }
    }
}

#[test]
fn simulated_action_frequencies_follow_policy() {
    let mut rng = prng(73);
    let cmp = sample_random_mdp(4, 2, &mut rng).unwrap();
    let reward = RewardModel::constant(4, 2, 0.3).unwrap();
    let policy = Policy::from_rows(vec![vec![0.2, 0.8]; 4]).unwrap();
    let traj = simulate(&cmp, &reward, &policy, 100_000, &mut rng).unwrap();
    assert_eq!(traj.len(), 100_000);
    let second = traj.pairs().filter(|&(_, a)| a == 1).count() as f64 / 1e5;
    // binomial standard error is about 0.0013
    assert!((second - 0.8).abs() < 0.006, "{second}");
    let rewards = traj.rewards.as_ref().unwrap();
    let rate = rewards.iter().filter(|r| **r).count() as f64 / 1e5;
    assert!((rate - 0.3).abs() < 0.006, "{rate}");
}

#[test]
fn generation_is_seed_deterministic() {
    let run = |seed| {
        let mut rng = prng(seed);
        let cmp = sample_random_mdp(16, 4, &mut rng).unwrap();
        let prior = BetaProductPrior::uniform(16, 4, 1.0, 1.0).unwrap();
        let reward = sample_reward(&prior, &mut rng);
        let mdp = Mdp::new(&cmp, &reward, Discount::new(0.95).unwrap()).unwrap();
        let demo = make_demonstrator(&mdp, 4.0, 1e-8).unwrap();
        let traj = simulate(&cmp, &reward, &demo, 200, &mut rng).unwrap();
        (cmp, reward, traj)
    };
    assert_eq!(run(9), run(9));
    assert_ne!(run(9).2, run(10).2);
}
