mod common;

use proptest::prelude::*;

use common::*;
use rarl_core::abstraction::{check_admissible, AbstractionPair, Mapping};
use rarl_core::envs::io::{parse_abstraction, parse_env, write_abstraction, write_env};
use rarl_core::envs::{
    build_chain, build_corridor_grid, build_two_region_grid, random_mapping, random_mdp, synthesize_admissible_abstraction,
    CORRIDOR_S1, CORRIDOR_S2,
};
use rarl_core::mdp::{GroundMdp, SecondOrderMdp};
use rarl_core::Error;

fn assert_stochastic(mdp: &GroundMdp<f64>) {
    for s in 0..mdp.num_states() {
        for a in 0..mdp.num_actions() {
            let row = mdp.row(s, a);
            assert!(row.iter().all(|&p| p >= 0.0));
            assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            assert!((0.0..=1.0).contains(&mdp.reward(s, a)));
        }
    }
    assert!((mdp.start().iter().sum::<f64>() - 1.0).abs() < 1e-12);
}

#[test]
fn builtin_models_are_stochastic() {
    let corridor = build_corridor_grid(0.95).unwrap();
    assert_stochastic(&corridor.mdp);
    assert_eq!(corridor.mapping.num_abstract(), 3);
    assert_ne!(corridor.state(CORRIDOR_S1.0, CORRIDOR_S1.1), corridor.state(CORRIDOR_S2.0, CORRIDOR_S2.1));
    for slip in [0.0, 0.1, 0.5] {
        let grid = build_two_region_grid(0.9, slip).unwrap();
        assert_stochastic(&grid.mdp);
        assert_eq!(grid.mapping.num_states(), grid.mdp.num_states());
    }
    let (mdp, map, abs) = build_chain(0.9).unwrap();
    assert_stochastic(&mdp);
    assert_eq!(map.as_slice(), &[0, 0, 1]);
    assert_eq!(abs.num_states(), 2);
}

#[test]
fn chain_layout() {
    let g = 0.8f64;
    let (mdp, _, abs) = build_chain(g).unwrap();
    assert_eq!(mdp.prob(0, 0, 1), 1.0);
    assert_eq!(mdp.prob(1, 0, 2), 1.0);
    assert_eq!(mdp.prob(2, 0, 2), 1.0);
    assert_eq!(mdp.rewards(), &[0.0, 0.0, 1.0]);
    let leave = g / (1.0 + g);
    for p in [1, 2] {
        assert!((abs.row(p, 0, 0)[1] - leave).abs() < 1e-15);
        assert!((abs.row(p, 0, 0)[0] - (1.0 - leave)).abs() < 1e-15);
    }
    assert_eq!(abs.row(0, 1, 0), &[0.0, 1.0]);
}

#[test]
fn random_models_respect_branching() {
    for seed in 0..20 {
        for branching in [1, 2, 3] {
            let mdp = random_mdp(seed, 6, 3, branching, 0.9).unwrap();
            assert_stochastic(&mdp);
            for s in 0..6 {
                for a in 0..3 {
                    assert!(mdp.row(s, a).iter().filter(|&&p| p > 0.0).count() <= branching);
                }
            }
            assert_eq!(mdp, random_mdp(seed, 6, 3, branching, 0.9).unwrap());
        }
    }
    assert_ne!(random_mdp(1, 6, 3, 2, 0.9f64).unwrap(), random_mdp(2, 6, 3, 2, 0.9f64).unwrap());
    assert!(random_mdp(0, 0, 3, 2, 0.9f64).is_err());
}

#[test]
fn random_mappings_are_surjective() {
    for seed in 0..50 {
        let k = 1 + (seed as usize % 5);
        let map = random_mapping(seed, 8, k).unwrap();
        for b in 0..k {
            assert!(!map.block(b).is_empty());
        }
        assert_eq!(map, random_mapping(seed, 8, k).unwrap());
    }
    assert!(random_mapping(0, 3, 4).is_err());
}

#[test]
fn environment_text_round_trip() {
    for seed in 0..10 {
        let mdp = random_mdp(seed, 5, 2, 3, 0.9f64).unwrap();
        assert_eq!(parse_env::<f64>(&write_env(&mdp)).unwrap(), mdp);
    }
    let grid = build_corridor_grid(0.95f64).unwrap();
    assert_eq!(parse_env::<f64>(&write_env(&grid.mdp)).unwrap(), grid.mdp);
}

#[test]
fn abstraction_text_round_trip() {
    for seed in 0..10 {
        let abs = random_second_order(seed, 3, 2, 0.7);
        let map = random_mapping(seed, 7, 3).unwrap();
        let (back, back_map) = parse_abstraction::<f64>(&write_abstraction(&abs, &map)).unwrap();
        assert_eq!(back, abs);
        assert_eq!(back_map, map);
    }
}

#[test]
fn first_order_files_fill_missing_predecessors() {
    let text = "abs 2 1 0.9\n# one row per state\nt 0 0 0 0 0.5\nt 0 0 0 1 0.5\nr 0 0 0 0.25\nt 1 1 0 1 1\nr 1 1 0 1\nmap 0 0\nmap 1 1\n";
    let (abs, map) = parse_abstraction::<f64>(text).unwrap();
    assert_eq!(abs.start(), &[0.5, 0.5]);
    for p in [1, 2] {
        assert_eq!(abs.row(p, 0, 0), &[0.5, 0.5]);
        assert_eq!(abs.reward(p, 0, 0), 0.25);
    }
    assert_eq!(map, Mapping::identity(2));
}

#[test]
fn malformed_files_are_rejected() {
    let bad_row = "mdp 2 1 0.9\nt 0 0 0 0.5\nt 0 0 1 0.4\nt 1 0 1 1\nstart 0 1\n";
    assert!(matches!(parse_env::<f64>(bad_row), Err(Error::Parse { .. })));
    let bad_index = "mdp 2 1 0.9\nt 0 0 2 1\n";
    assert!(matches!(parse_env::<f64>(bad_index), Err(Error::Parse { line: 2, .. })));
    assert!(matches!(parse_env::<f64>("abs 2 1 0.9\n"), Err(Error::Parse { line: 1, .. })));
    assert!(matches!(parse_env::<f64>(""), Err(Error::Parse { .. })));
    let unmapped = "abs 1 1 0.9\nt 0 0 0 0 1\nmap 1 0\n";
    assert!(matches!(parse_abstraction::<f64>(unmapped), Err(Error::Parse { .. })));
    let tiny_drift = "mdp 1 1 0.9\nt 0 0 0 0.9999999999\nstart 0 1\n";
    assert_eq!(parse_env::<f64>(tiny_drift).unwrap().row(0, 0), &[1.0]);
}

#[test]
fn synthesized_abstractions_are_admissible() {
    let (mdp, map, _) = build_chain(FIXTURE_GAMMA).unwrap();
    let abs = synthesize_admissible_abstraction(&mdp, &map, FIXTURE_GAMMA, ENUMERATION_CAP).unwrap();
    let pair = AbstractionPair::new(mdp, abs, map).unwrap();
    assert!(check_admissible(&pair, ENUMERATION_CAP).unwrap().admissible);

    let mdp = random_mdp(4, 4, 2, 2, FIXTURE_GAMMA).unwrap();
    let abs = synthesize_admissible_abstraction(&mdp, &Mapping::identity(4), FIXTURE_GAMMA, ENUMERATION_CAP).unwrap();
    let pair = AbstractionPair::new(mdp, abs, Mapping::identity(4)).unwrap();
    assert!(check_admissible(&pair, ENUMERATION_CAP).unwrap().admissible);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn random_synthesis_is_admissible(seed in 0u64..10_000) {
        let mdp = random_mdp(seed, 5, 2, 2, FIXTURE_GAMMA).unwrap();
        let map = random_mapping(seed, 5, 2).unwrap();
        let abs = match synthesize_admissible_abstraction(&mdp, &map, FIXTURE_GAMMA, ENUMERATION_CAP) {
            Err(Error::InversionInfeasible { min_gamma_bar }) => {
                prop_assert!(min_gamma_bar > FIXTURE_GAMMA);
                return Ok(());
            }
            other => other.unwrap(),
        };
        prop_assert!(SecondOrderMdp::new(
            abs.num_states(), abs.num_actions(), abs.transitions().to_vec(), abs.rewards().to_vec(), abs.gamma_bar(), abs.start().to_vec()
        ).is_ok());
        let pair = AbstractionPair::new(mdp, abs, map).unwrap();
        prop_assert!(check_admissible(&pair, ENUMERATION_CAP).unwrap().admissible);
    }
}
