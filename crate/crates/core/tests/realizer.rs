mod common;

use proptest::prelude::*;
use rand::Rng;

use common::*;
use rarl_core::abstraction::{
    block_occupancy, block_value, option_profile, AbstractionPair, FRelativeOption, Mapping, OptionEnumerator, Targets,
    Tuple,
};
use rarl_core::envs::{
    build_corridor_grid, build_two_region_grid, corridor_abstraction, random_mapping, random_mdp, CORRIDOR_GRAY,
    CORRIDOR_GREEN, CORRIDOR_S2, CORRIDOR_YELLOW, TWO_REGION_GRAY,
};
use rarl_core::mdp::{GroundMdp, SecondOrderMdp};
use rarl_core::rarl::{Episode, MdpSimulator};
use rarl_core::realizer::{realize_exact, rollout_cap, OnlineConfig, OnlineRealizer, Realization, RealizationProblem};
use rarl_core::Error;

fn point(n: usize, s: usize) -> Vec<f64> {
    let mut v = vec![0.0; n];
    v[s] = 1.0;
    v
}

fn config(n_min: u64, n_nu: u64) -> OnlineConfig {
    OnlineConfig { eps_r: 0.0, eps_t: 0.0, eta: 0.0, lambda: 0.0, delta_i: 0.01, n_min: Some(n_min), n_nu: Some(n_nu) }
}

#[test]
fn identity_tuples_realize_with_zero_gaps() {
    let mdp = random_mdp(3, 4, 3, 3, 0.9f64).unwrap();
    let pair = AbstractionPair::new(mdp.clone(), SecondOrderMdp::from_ground(&mdp), Mapping::identity(4)).unwrap();
    for tuple in pair.tuples() {
        if pair.entries(tuple.pred, tuple.block).is_empty() {
            continue;
        }
        let s = tuple.block;
        let problem = RealizationProblem::from_pair(&pair, tuple, &point(4, s), 0.0, 0.0).unwrap();
        let Realization::Feasible(res) = realize_exact(&problem).unwrap() else { panic!("{tuple:?} infeasible") };
        assert!(res.value_gap <= 1e-9, "{tuple:?}");
        assert!(res.min_slack() >= -1e-9);
        let repeat = FRelativeOption::constant(tuple.pred, tuple.block, 1, tuple.action);
        assert!(res.value + 1e-9 >= block_value(pair.block(s), &repeat, s).unwrap());
    }
}

#[test]
fn corridor_entry_near_the_goal_is_feasible() {
    let g = 0.95f64;
    let grid = build_corridor_grid(g).unwrap();
    let pair = AbstractionPair::new(grid.mdp.clone(), corridor_abstraction(&grid, 0.6).unwrap(), grid.mapping.clone()).unwrap();
    let s2 = grid.state(CORRIDOR_S2.0, CORRIDOR_S2.1);
    let tuple = Tuple::new(CORRIDOR_GREEN, CORRIDOR_GRAY, CORRIDOR_YELLOW);
    let problem = RealizationProblem::from_pair(&pair, tuple, &point(grid.mdp.num_states(), s2), 0.0, 0.09 * (1.0 - g)).unwrap();
    let res = realize_exact(&problem).unwrap();
    assert!(res.is_feasible());
    let slack = res.result().slacks.iter().find(|(b, _)| *b == CORRIDOR_YELLOW).unwrap().1 / (1.0 - g);
    assert!(slack >= -1e-9 && slack <= g.powi(11) - 0.51 + 1e-9, "slack {slack}");
    let h = block_occupancy(pair.block(CORRIDOR_GRAY), &res.result().option, s2).unwrap()[CORRIDOR_YELLOW] / (1.0 - g);
    assert!((h - 0.51 - slack).abs() < 1e-9);
}

#[test]
fn small_blocks_match_the_best_enumerated_option() {
    let mut compared = 0;
    for seed in 0..60u64 {
        let mdp = random_mdp(seed, 5, 2, 3, 0.8f64).unwrap();
        let map = Mapping::new(vec![0, 0, 1, 1, 2], 3).unwrap();
        let pair = AbstractionPair::new(mdp, SecondOrderMdp::from_ground(&random_mdp(seed, 3, 2, 2, 0.8).unwrap()), map).unwrap();
        let block = pair.block(0).clone();
        let mut r = rng(seed);
        let mut nu = vec![0.0; block.num_local()];
        let w = simplex(&mut r, 2);
        nu[0] = w[0];
        nu[1] = w[1];
        let h: Vec<f64> = (0..3).map(|b| if b == 0 { 0.0 } else { r.gen_range(0.0..0.08) }).collect();
        let targets = Targets { h: h.clone(), v: 0.0 };
        let problem = RealizationProblem::new(block.clone(), 3, nu.clone(), targets, 0.0, 0.0).unwrap();
        let mut best = f64::NEG_INFINITY;
        for pol in OptionEnumerator::new(2, 2, 1e3).unwrap() {
            let mut acts = pol.actions().to_vec();
            acts.resize(block.num_local(), 0);
            let prof = option_profile(&block, &rarl_core::mdp::DeterministicPolicy::new(acts)).unwrap();
            let occ = |b: usize| nu[0] * prof.h(0)[b] + nu[1] * prof.h(1)[b];
            if (1..3).all(|b| occ(b) >= h[b] - 1e-12) {
                best = best.max(nu[0] * prof.values[0] + nu[1] * prof.values[1]);
            }
        }
        match realize_exact(&problem).unwrap() {
            Realization::Feasible(res) => {
                assert!(res.value + 1e-9 >= best, "seed {seed}");
                if !res.stochastic {
                    assert!((res.value - best).abs() < 1e-9, "seed {seed}");
                    compared += 1;
                }
            }
            Realization::Infeasible { max_gap, .. } => {
                assert!(best == f64::NEG_INFINITY, "seed {seed}");
                assert!(max_gap > 0.0);
            }
        }
    }
    assert!(compared > 10);
}

/// Two states: state 0 is block 0 and moves to state 1 (block 1) at once.
fn one_step_exit() -> (GroundMdp<f64>, Mapping) {
    let t = vec![0.0, 1.0, 0.0, 1.0, 0.0, 1.0, 0.0, 1.0];
    let mdp = GroundMdp::new(2, 2, t, vec![0.5, 0.2, 0.0, 0.0], 0.9, vec![1.0, 0.0]).unwrap();
    (mdp, Mapping::identity(2))
}

#[test]
fn one_step_rollout_counts_the_step() {
    let (mdp, map) = one_step_exit();
    let mut sim = MdpSimulator::new(mdp, 0);
    let mut on = OnlineRealizer::new(Tuple::new(2, 0, 0), &map, 2, 0.9, config(1, 1)).unwrap();
    assert!(!on.enough());
    let mut ep = Episode::start(&mut sim, 1.0, 1000);
    let out = on.rollout_control(&mut ep, 0).unwrap();
    assert_eq!((out.steps, out.last, out.left_block, out.hit_cap), (1, 1, true, false));
    assert_eq!(on.count(0, 0) + on.count(0, 1), 1);
    assert!(matches!(on.get(&Targets { h: vec![0.0, 0.0], v: 0.0 }), Err(Error::NotReady)));
    let mut ep = Episode::start(&mut sim, 1.0, 1000);
    on.rollout_control(&mut ep, 0).unwrap();
    assert_eq!((on.count(0, 0), on.count(0, 1)), (1, 1));
    assert!(on.enough());
}

#[test]
fn absorbing_block_hits_the_step_cap() {
    let mdp = GroundMdp::<f64>::new(2, 1, vec![1.0, 0.0, 0.0, 1.0], vec![0.0, 0.0], 0.9, vec![1.0, 0.0]).unwrap();
    let map = Mapping::identity(2);
    let mut sim = MdpSimulator::new(mdp, 0);
    let mut on = OnlineRealizer::new(Tuple::new(2, 0, 0), &map, 1, 0.9, config(1, 1)).unwrap();
    assert_eq!(on.step_cap(), rollout_cap(0.9));
    let mut ep = Episode::start(&mut sim, 1.0, 100_000);
    let out = on.rollout_control(&mut ep, 0).unwrap();
    assert!(out.hit_cap && out.truncated());
    assert_eq!(out.steps, on.step_cap());
    assert_eq!(on.truncations(), 1);
}

#[test]
fn synthetic_counts_make_enough() {
    let mdp = random_mdp(5, 4, 2, 4, 0.9f64).unwrap();
    let map = Mapping::new(vec![0, 0, 1, 1], 2).unwrap();
    let mut on = OnlineRealizer::new(Tuple::new(1, 0, 0), &map, 2, 0.9, config(3, 2)).unwrap();
    assert!(!on.enough());
    on.record_entry(0).unwrap();
    for s in 0..2 {
        for a in 0..2 {
            for _ in 0..3 {
                on.record(s, a, 2, mdp.reward(s, a)).unwrap();
            }
        }
    }
    assert!(!on.enough(), "one entry sample short");
    on.record_entry(1).unwrap();
    assert!(on.enough());
    assert!(matches!(on.record(2, 0, 0, 0.0), Err(Error::OutsideBlock { .. })));
}

/// Model whose transition probabilities are multiples of 1/4.
fn quarter_mdp(seed: u64) -> GroundMdp<f64> {
    let mut r = rng(seed);
    let (n, na) = (4, 2);
    let mut t = vec![0.0; n * na * n];
    for row in t.chunks_mut(n) {
        for _ in 0..4 {
            row[r.gen_range(0..n)] += 0.25;
        }
    }
    let rew: Vec<f64> = (0..n * na).map(|_| r.gen()).collect();
    GroundMdp::new(n, na, t, rew, 0.8, vec![1.0, 0.0, 0.0, 0.0]).unwrap()
}

#[test]
fn exact_counts_give_the_exact_realization() {
    for seed in 0..10 {
        let mdp = quarter_mdp(seed);
        let map = Mapping::new(vec![0, 0, 1, 2], 3).unwrap();
        let pair = AbstractionPair::new(mdp.clone(), SecondOrderMdp::from_ground(&random_mdp(seed, 3, 2, 2, 0.8).unwrap()), map.clone()).unwrap();
        let tuple = Tuple::new(3, 0, 1);
        let mut on = OnlineRealizer::new(tuple, &map, 2, 0.8, config(4, 1)).unwrap();
        on.record_entry(0).unwrap();
        for s in 0..2 {
            for a in 0..2 {
                for (s2, &p) in mdp.row(s, a).iter().enumerate() {
                    for _ in 0..(p * 4.0).round() as usize {
                        on.record(s, a, s2, mdp.reward(s, a)).unwrap();
                    }
                }
            }
        }
        assert!(on.enough());
        let targets = Targets { h: vec![0.0, 0.0, 0.0], v: 0.0 };
        let got = on.get(&targets).unwrap();
        let exact = realize_exact(&RealizationProblem::new(pair.block(0).clone(), 3, pair.block(0).localize(&point(4, 0)), targets, 0.0, 0.0).unwrap()).unwrap();
        assert!(got.feasible);
        assert!((got.result.value - exact.result().value).abs() < 1e-9, "seed {seed}");
    }
}

#[test]
fn unreachable_targets_come_back_infeasible() {
    let mdp = quarter_mdp(1);
    let map = Mapping::new(vec![0, 0, 1, 2], 3).unwrap();
    let mut on = OnlineRealizer::new(Tuple::new(3, 0, 0), &map, 2, 0.8, config(1, 1)).unwrap();
    on.record_entry(0).unwrap();
    for s in 0..2 {
        for a in 0..2 {
            on.record(s, a, 2, mdp.reward(s, a)).unwrap();
        }
    }
    let got = on.get(&Targets { h: vec![0.0, 0.0, 1.0], v: 0.0 }).unwrap();
    assert!(!got.feasible);
    assert!(got.result.occupancy_gap(got.eps_t_used) > 0.0);
}

#[test]
fn estimated_options_are_close_to_their_true_value() {
    let g = 0.9f64;
    let grid = build_two_region_grid(g, 0.1).unwrap();
    let n = grid.mdp.num_states();
    let mut r = rng(99);
    let rewards: Vec<f64> = (0..n * 4).map(|k| if grid.mapping.of(k / 4) == TWO_REGION_GRAY { r.gen() } else { 0.0 }).collect();
    let entry = grid.state(4, 3);
    let mdp = grid.mdp.with_rewards(rewards).unwrap().with_start(point(n, entry)).unwrap();
    let pair = AbstractionPair::new(mdp.clone(), SecondOrderMdp::from_ground(&random_mdp(0, 3, 1, 2, g).unwrap()), grid.mapping.clone()).unwrap();
    let block = pair.block(TWO_REGION_GRAY);
    let targets = Targets { h: vec![0.0; 3], v: 0.0 };
    let mut good = 0;
    for seed in 0..20u64 {
        let mut sim = MdpSimulator::new(mdp.clone(), seed);
        let mut on = OnlineRealizer::new(Tuple::new(3, TWO_REGION_GRAY, 0), &grid.mapping, 4, g, config(200, 1)).unwrap();
        while !on.enough() {
            let mut ep = Episode::start(&mut sim, 1.0, 100_000);
            on.rollout_control(&mut ep, entry).unwrap();
        }
        let got = on.get(&targets).unwrap();
        let truth = block_value(block, &got.result.option, entry).unwrap();
        let h = block_occupancy(block, &got.result.option, entry).unwrap();
        let h_err = h.iter().zip(&got.result.occupancy).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
        if (1.0 - g) * (got.result.value - truth).abs() <= 0.05 && h_err <= 0.05 {
            good += 1;
        }
    }
    assert!(good >= 18, "{good}/20");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn feasible_options_meet_their_targets(seed in 0u64..10_000, eps_t in 0.0f64..0.05) {
        let mdp = random_mdp(seed, 6, 2, 3, 0.85f64).unwrap();
        let map = random_mapping(seed, 6, 3).unwrap();
        let pair = AbstractionPair::new(mdp, SecondOrderMdp::from_ground(&random_mdp(seed, 3, 2, 2, 0.85).unwrap()), map).unwrap();
        let mut r = rng(seed);
        let block = pair.block(0).clone();
        let w = simplex(&mut r, block.num_inner());
        let mut nu = vec![0.0; block.num_local()];
        nu[..block.num_inner()].copy_from_slice(&w);
        let h: Vec<f64> = (0..3).map(|b| if b == 0 { 0.0 } else { r.gen_range(0.0..0.1) }).collect();
        let problem = RealizationProblem::new(block.clone(), 3, nu.clone(), Targets { h: h.clone(), v: 1.0 }, 0.0, eps_t).unwrap();
        let first = realize_exact(&problem).unwrap();
        if let Realization::Feasible(res) = &first {
            for b in 1..3 {
                let got: f64 = block.inner_states().iter().enumerate()
                    .map(|(i, &s)| w[i] * block_occupancy(&block, &res.option, s).unwrap()[b])
                    .sum();
                prop_assert!(got >= h[b] - eps_t - 1e-9);
            }
        }
        // relaxing the slack keeps a feasible problem feasible
        let relaxed = RealizationProblem::new(block, 3, nu, Targets { h, v: 1.0 }, 0.0, (eps_t + 0.02).min(1.0)).unwrap();
        if first.is_feasible() {
            prop_assert!(realize_exact(&relaxed).unwrap().is_feasible());
        }
    }
}
