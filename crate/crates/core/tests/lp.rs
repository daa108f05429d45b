mod common;

use proptest::prelude::*;
use rand::Rng;

use common::*;
use rarl_core::abstraction::{AbstractionPair, Mapping, Tuple};
use rarl_core::envs::{build_corridor_grid, corridor_abstraction, random_mapping, random_mdp, CORRIDOR_GRAY, CORRIDOR_GREEN, CORRIDOR_S1, CORRIDOR_S2, CORRIDOR_YELLOW};
use rarl_core::lp::{
    build_constrained_realization_lp, build_primal_occupancy_lp, extract_policy_from_occupancy, realization_row, solve_lp,
    solve_lp_with_cap, LinearProgram, LpStatus,
};
use rarl_core::mdp::{occupancy, policy_iteration, value_iteration, GroundMdp, SecondOrderMdp, Source, StochasticPolicy};
use rarl_core::Error;

/// Gaussian elimination with partial pivoting; `None` when singular.
fn gauss(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for c in 0..n {
        let p = (c..n).max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs()))?;
        if a[p][c].abs() < 1e-9 {
            return None;
        }
        a.swap(c, p);
        b.swap(c, p);
        for r in c + 1..n {
            let f = a[r][c] / a[c][c];
            for k in c..n {
                a[r][k] -= f * a[c][k];
            }
            b[r] -= f * b[c];
        }
    }
    let mut x = vec![0.0; n];
    for c in (0..n).rev() {
        x[c] = (b[c] - (c + 1..n).map(|k| a[c][k] * x[k]).sum::<f64>()) / a[c][c];
    }
    Some(x)
}

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![vec![]];
    }
    if n < k {
        return vec![];
    }
    let mut out = combinations(n - 1, k);
    for mut c in combinations(n - 1, k - 1) {
        c.push(n - 1);
        out.push(c);
    }
    out
}

/// Best objective over the vertices of `{x ≥ 0, G x ≥ h}`.
fn vertex_optimum(c: &[f64], g: &[Vec<f64>], h: &[f64]) -> f64 {
    let n = c.len();
    let mut rows: Vec<(Vec<f64>, f64)> = g.iter().cloned().zip(h.iter().copied()).collect();
    for j in 0..n {
        let mut e = vec![0.0; n];
        e[j] = 1.0;
        rows.push((e, 0.0));
    }
    let mut best = f64::NEG_INFINITY;
    for active in combinations(rows.len(), n) {
        let a = active.iter().map(|&i| rows[i].0.clone()).collect();
        let b = active.iter().map(|&i| rows[i].1).collect();
        if let Some(x) = gauss(a, b) {
            let feasible = rows.iter().all(|(r, rhs)| r.iter().zip(&x).map(|(p, q)| p * q).sum::<f64>() >= rhs - 1e-9);
            if feasible {
                best = best.max(c.iter().zip(&x).map(|(p, q)| p * q).sum());
            }
        }
    }
    best
}

#[test]
fn one_variable_programs() {
    let mut lp = LinearProgram::<f64>::new(vec![1.0]);
    lp.add_le(vec![1.0], 1.0);
    let sol = solve_lp(&lp).unwrap();
    assert_eq!(sol.status, LpStatus::Optimal);
    assert!((sol.objective - 1.0).abs() < 1e-12);

    let mut lp = LinearProgram::<f64>::new(vec![1.0]);
    lp.add_ge(vec![1.0], 2.0).add_le(vec![1.0], 1.0);
    assert_eq!(solve_lp(&lp).unwrap().status, LpStatus::Infeasible);

    let lp = LinearProgram::<f64>::new(vec![1.0]);
    assert_eq!(solve_lp(&lp).unwrap().status, LpStatus::Unbounded);
}

#[test]
fn iteration_cap_is_an_error() {
    let mdp = random_mdp(1, 6, 3, 3, 0.9f64).unwrap();
    let lp = build_primal_occupancy_lp(&mdp, mdp.start()).unwrap();
    assert!(matches!(solve_lp_with_cap(&lp, 1), Err(Error::IterationCap { .. })));
}

#[test]
fn random_programs_match_vertex_enumeration() {
    for seed in 0..10 {
        let mut r = rng(seed);
        let (m, n) = (10, 6);
        let c: Vec<f64> = (0..n).map(|_| r.gen_range(-1.0..1.0)).collect();
        let mut g = Vec::new();
        let mut h = Vec::new();
        for i in 0..m {
            if i < 4 {
                // bounded box-like rows keep the region compact
                g.push((0..n).map(|_| -r.gen_range(0.1..1.0)).collect::<Vec<f64>>());
                h.push(-r.gen_range(1.0..3.0));
            } else {
                g.push((0..n).map(|_| r.gen_range(-1.0..1.0)).collect::<Vec<f64>>());
                h.push(r.gen_range(-2.0..0.0));
            }
        }
        let mut lp = LinearProgram::new(c.clone());
        for (row, &rhs) in g.iter().zip(&h) {
            lp.add_ge(row.clone(), rhs);
        }
        let sol = solve_lp(&lp).unwrap();
        assert!(sol.is_optimal());
        let want = vertex_optimum(&c, &g, &h);
        assert!((sol.objective - want).abs() <= 1e-7, "seed {seed}: {} vs {want}", sol.objective);
        assert!(sol.primal_residual(&lp) <= 1e-9);
        assert!((sol.objective - sol.dual_objective(&lp)).abs() <= 1e-7);
        assert!(sol.ge_duals.iter().all(|&w| w >= -1e-12));
    }
}

#[test]
fn occupancy_program_optimum_is_the_optimal_value() {
    for seed in 0..10 {
        let mdp = random_mdp(seed, 6, 3, 3, 0.9f64).unwrap();
        let sol = solve_lp(&build_primal_occupancy_lp(&mdp, mdp.start()).unwrap()).unwrap();
        let vi = value_iteration(&mdp, 2000);
        let best: f64 = (0..6).map(|s| mdp.start()[s] * vi.q[s * 3..s * 3 + 3].iter().copied().fold(f64::MIN, f64::max)).sum();
        assert!((sol.objective / 0.1 - best).abs() <= 1e-7);
    }
}

#[test]
fn trivial_and_symmetric_occupancy_programs() {
    let single = GroundMdp::<f64>::new(1, 1, vec![1.0], vec![0.5], 0.9, vec![1.0]).unwrap();
    let sol = solve_lp(&build_primal_occupancy_lp(&single, &[1.0]).unwrap()).unwrap();
    assert!((sol.primal[0] - 1.0).abs() < 1e-12);

    // two states that swap into each other with the same reward
    let t = vec![0.0, 1.0, 1.0, 0.0];
    let swap = GroundMdp::<f64>::new(2, 1, t, vec![0.3, 0.3], 0.8, vec![0.5, 0.5]).unwrap();
    let sol = solve_lp(&build_primal_occupancy_lp(&swap, &[0.5, 0.5]).unwrap()).unwrap();
    assert!((sol.primal[0] - sol.primal[1]).abs() < 1e-12);
}

fn corridor() -> (AbstractionPair<f64>, usize, usize) {
    let g = 0.95;
    let grid = build_corridor_grid(g).unwrap();
    let pair = AbstractionPair::new(grid.mdp.clone(), corridor_abstraction(&grid, 0.6).unwrap(), grid.mapping.clone()).unwrap();
    (pair, grid.state(CORRIDOR_S1.0, CORRIDOR_S1.1), grid.state(CORRIDOR_S2.0, CORRIDOR_S2.1))
}

#[test]
fn corridor_realization_programs() {
    let (pair, s1, s2) = corridor();
    let g = 0.95;
    let block = pair.block(CORRIDOR_GRAY);
    let targets = pair.targets(Tuple::new(CORRIDOR_GREEN, CORRIDOR_GRAY, CORRIDOR_YELLOW)).unwrap().h;
    let from = |s: usize, eps_t: f64| {
        let mut nu = vec![0.0; pair.ground().num_states()];
        nu[s] = 1.0;
        solve_lp(&build_constrained_realization_lp(block, &block.localize(&nu), &targets, eps_t).unwrap()).unwrap()
    };
    assert!(from(s2, 0.09 * (1.0 - g)).is_optimal());
    assert_eq!(from(s1, 0.09 * (1.0 - g)).status, LpStatus::Infeasible);

    // with εT = 1 the constraints are vacuous
    let mut nu = vec![0.0; pair.ground().num_states()];
    nu[s1] = 1.0;
    let free = solve_lp(&build_primal_occupancy_lp(block.mdp(), &block.localize(&nu)).unwrap()).unwrap();
    assert!((from(s1, 1.0).objective - free.objective).abs() < 1e-9);
}

#[test]
fn tighter_targets_raise_the_active_duals() {
    let mut checked = 0;
    for seed in 0..40u64 {
        if checked == 3 {
            break;
        }
        let mdp = random_mdp(seed, 5, 2, 3, 0.8f64).unwrap();
        let map = Mapping::new(vec![0, 0, 0, 1, 2], 3).unwrap();
        let pair = AbstractionPair::new(mdp, SecondOrderMdp::from_ground(&random_mdp(seed, 3, 1, 2, 0.8).unwrap()), map).unwrap();
        let block = pair.block(0);
        let mut nu = vec![0.0; block.num_local()];
        nu[0] = 1.0;
        // targets just below the unconstrained optimum's block occupancies
        let free = solve_lp(&build_primal_occupancy_lp(block.mdp(), &nu).unwrap()).unwrap();
        let reach = |b: usize, x: &[f64]| -> f64 {
            block.labels().iter().enumerate().filter(|(_, &l)| l == b).map(|(j, _)| x[j * 2] + x[j * 2 + 1]).sum()
        };
        let mut targets = vec![0.0, reach(1, &free.primal), reach(2, &free.primal)];
        targets[1] += 0.02;
        let base = solve_lp(&build_constrained_realization_lp(block, &nu, &targets, 0.0).unwrap()).unwrap();
        let row = realization_row(0, 1).unwrap();
        if !base.is_optimal() || base.ge_duals[row] <= 1e-9 {
            continue;
        }
        targets[1] += 0.005;
        let tighter = solve_lp(&build_constrained_realization_lp(block, &nu, &targets, 0.0).unwrap()).unwrap();
        if !tighter.is_optimal() {
            continue;
        }
        assert!(tighter.ge_duals[row] >= base.ge_duals[row] - 1e-9, "seed {seed}");
        assert!(tighter.objective <= base.objective + 1e-12);
        checked += 1;
    }
    assert_eq!(checked, 3);
}

#[test]
fn extraction_edge_cases() {
    let b = [0.0, 0.4, 0.6, 0.0, 0.0, 0.0];
    let out = extract_policy_from_occupancy(&b, 3, 2).unwrap();
    assert_eq!(out.uniform_states, vec![2]);
    assert_eq!(out.policy.row(0), &[0.0, 1.0]);
    assert_eq!(out.policy.row(1), &[1.0, 0.0]);
    assert_eq!(out.policy.row(2), &[0.5, 0.5]);
    let det = extract_policy_from_occupancy(&b[..4], 2, 2).unwrap().policy.as_deterministic().unwrap();
    assert_eq!(det.actions(), &[1, 0]);
    assert!(extract_policy_from_occupancy(&b, 4, 2).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn duality_and_flow_on_realization_programs(seed in 0u64..10_000, eps_t in 0.0f64..0.05) {
        let mdp = random_mdp(seed, 6, 2, 3, 0.85f64).unwrap();
        let map = random_mapping(seed, 6, 3).unwrap();
        let pair = AbstractionPair::new(mdp, SecondOrderMdp::from_ground(&random_mdp(seed, 3, 2, 2, 0.85).unwrap()), map).unwrap();
        let block = pair.block(0);
        let mut r = rng(seed);
        let mut nu = vec![0.0; block.num_local()];
        for (i, p) in simplex(&mut r, block.num_inner()).into_iter().enumerate() {
            nu[i] = p;
        }
        let targets: Vec<f64> = (0..3).map(|_| r.gen_range(0.0..0.1)).collect();
        let lp = build_constrained_realization_lp(block, &nu, &targets, eps_t).unwrap();
        let sol = solve_lp(&lp).unwrap();
        if sol.is_optimal() {
            prop_assert!((sol.objective - sol.dual_objective(&lp)).abs() <= 1e-7);
            prop_assert!((sol.primal.iter().sum::<f64>() - 1.0).abs() <= 1e-8);
            prop_assert!(sol.ge_duals.iter().all(|&w| w >= -1e-12));
            prop_assert!(sol.complementarity_residual(&lp) <= 1e-7);
        }
    }

    #[test]
    fn extracted_policies_reproduce_their_occupancy(seed in 0u64..10_000, ns in 2usize..7, na in 1usize..4) {
        let mdp = random_mdp(seed, ns, na, 3, 0.9f64).unwrap();
        let mut r = rng(seed);
        let probs: Vec<f64> = (0..ns).flat_map(|_| simplex(&mut r, na)).collect();
        let pol = StochasticPolicy::new(na, probs).unwrap();
        let d = occupancy(&mdp, &pol, Source::Start).unwrap();
        let back = extract_policy_from_occupancy(d.values(), ns, na).unwrap();
        let again = occupancy(&mdp, &back.policy, Source::Start).unwrap();
        for (x, y) in d.values().iter().zip(again.values()) {
            prop_assert!((x - y).abs() <= 1e-7);
        }
    }

    #[test]
    fn occupancy_program_solutions_extract_to_optimal_policies(seed in 0u64..10_000) {
        let mdp = random_mdp(seed, 5, 3, 3, 0.8f64).unwrap();
        let sol = solve_lp(&build_primal_occupancy_lp(&mdp, mdp.start()).unwrap()).unwrap();
        prop_assert!((sol.primal.iter().sum::<f64>() - 1.0).abs() <= 1e-8);
        let back = extract_policy_from_occupancy(&sol.primal, 5, 3).unwrap();
        let d = occupancy(&mdp, &back.policy, Source::Start).unwrap();
        let (v, _) = policy_iteration(&mdp).unwrap();
        let best: f64 = mdp.start().iter().zip(&v).map(|(p, x)| p * x).sum();
        let got: f64 = d.values().iter().zip(mdp.rewards()).map(|(p, x)| p * x).sum::<f64>() / 0.2;
        prop_assert!((got - best).abs() <= 1e-7);
    }
}
