#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Dirichlet, Distribution};

use rarl_core::abstraction::{check_realizability, AbstractionPair, Mapping};
use rarl_core::envs::{build_chain, random_mapping, random_mdp, synthesize_admissible_abstraction};
use rarl_core::error::Error;
use rarl_core::mdp::{DeterministicPolicy, GroundMdp, SecondOrderMdp};

pub type Res<T> = Result<T, Box<dyn std::error::Error>>;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn simplex(rng: &mut ChaCha8Rng, k: usize) -> Vec<f64> {
    if k == 1 {
        return vec![1.0];
    }
    let w: Vec<f64> = Dirichlet::new_with_size(1.0, k).unwrap().sample(rng);
    let total: f64 = w.iter().sum();
    w.into_iter().map(|x| x / total).collect()
}

/// Fully supported random 2-MDP.
pub fn random_second_order(seed: u64, n: usize, na: usize, gamma_bar: f64) -> SecondOrderMdp<f64> {
    let mut r = rng(seed);
    let rows = (n + 1) * n * na;
    let mut t = Vec::with_capacity(rows * n);
    for _ in 0..rows {
        t.extend(simplex(&mut r, n));
    }
    let rew: Vec<f64> = (0..rows).map(|_| r.gen::<f64>()).collect();
    let start = simplex(&mut r, n);
    SecondOrderMdp::new(n, na, t, rew, gamma_bar, start).unwrap()
}

pub fn random_policy(r: &mut ChaCha8Rng, n: usize, na: usize) -> DeterministicPolicy {
    DeterministicPolicy::new((0..n).map(|_| r.gen_range(0..na)).collect())
}

/// Two mirrored copies of `k` states: state `i` and its mirror `i + k` share
/// rewards and split each successor's mass between its two copies in mirrored
/// proportions. Returns the ground model, the folded model and the fold.
pub fn symmetric_mdp(seed: u64, k: usize, na: usize, gamma: f64) -> (GroundMdp<f64>, GroundMdp<f64>, Mapping) {
    let mut r = rng(seed);
    let n = 2 * k;
    let mut t = vec![0.0; n * na * n];
    let mut rew = vec![0.0; n * na];
    let mut ft = vec![0.0; k * na * k];
    let mut fr = vec![0.0; k * na];
    for i in 0..k {
        for a in 0..na {
            let p = simplex(&mut r, k);
            let alpha: f64 = r.gen();
            let reward: f64 = r.gen();
            for j in 0..k {
                let (near, far) = (p[j] * alpha, p[j] * (1.0 - alpha));
                t[(i * na + a) * n + j] = near;
                t[(i * na + a) * n + j + k] = far;
                t[((i + k) * na + a) * n + j + k] = near;
                t[((i + k) * na + a) * n + j] = far;
                ft[(i * na + a) * k + j] = p[j];
            }
            rew[i * na + a] = reward;
            rew[(i + k) * na + a] = reward;
            fr[i * na + a] = reward;
        }
    }
    let ground = GroundMdp::new(n, na, t, rew, gamma, vec![1.0 / n as f64; n]).unwrap();
    let folded = GroundMdp::new(k, na, ft, fr, gamma, vec![1.0 / k as f64; k]).unwrap();
    let map = Mapping::new((0..n).map(|s| s % k).collect(), k).unwrap();
    (ground, folded, map)
}

/// An abstraction with the tolerances it meets.
pub struct Fixture {
    pub name: String,
    pub pair: AbstractionPair<f64>,
    pub eps_r: f64,
    pub eps_t: f64,
}

pub const FIXTURE_GAMMA: f64 = 0.6;
pub const ENUMERATION_CAP: f64 = 1e5;

fn measured(name: String, pair: AbstractionPair<f64>) -> Res<Fixture> {
    let report = check_realizability(&pair, 0.0, 0.0, ENUMERATION_CAP)?;
    let eps_r = report.worst_value_gap().max(0.0);
    let eps_t = report.worst_occupancy_gap().max(0.0);
    Ok(Fixture { name, pair, eps_r, eps_t })
}

/// Ten realizable abstractions: identity, folded symmetric, chain and
/// synthesized coarse abstractions of random models.
pub fn fixtures() -> Res<Vec<Fixture>> {
    let g = FIXTURE_GAMMA;
    let mut out = Vec::new();
    for seed in 0..3u64 {
        let mdp = random_mdp(seed, 3 + seed as usize, 2, 2, g)?;
        let abs = SecondOrderMdp::from_ground(&mdp);
        let n = mdp.num_states();
        out.push(measured(format!("identity-{seed}"), AbstractionPair::new(mdp, abs, Mapping::identity(n))?)?);
    }
    for seed in 0..2u64 {
        let (mdp, folded, map) = symmetric_mdp(100 + seed, 2 + seed as usize, 2, g);
        let abs = SecondOrderMdp::from_ground(&folded);
        out.push(measured(format!("symmetric-{seed}"), AbstractionPair::new(mdp, abs, map)?)?);
    }
    let (mdp, map, abs) = build_chain(g)?;
    out.push(measured("chain".into(), AbstractionPair::new(mdp, abs, map)?)?);
    let mut seed = 200u64;
    while out.len() < 10 {
        seed += 1;
        let mdp = random_mdp(seed, 5, 2, 2, g)?;
        let map = random_mapping(seed, 5, 2)?;
        match synthesize_admissible_abstraction(&mdp, &map, g, ENUMERATION_CAP) {
            Ok(abs) => out.push(measured(format!("synthesized-{seed}"), AbstractionPair::new(mdp, abs, map)?)?),
            Err(Error::InversionInfeasible { .. }) => continue,
            Err(e) => return Err(e.into()),
        }
    }
    Ok(out)
}

/// Lifts a policy over abstract states to every `(pred, state)` pair.
pub fn lift(abs: &SecondOrderMdp<f64>, per_state: &[usize]) -> DeterministicPolicy {
    let n = abs.num_states();
    let mut acts = vec![0; abs.num_pairs()];
    for p in 0..=n {
        for s in 0..n {
            acts[abs.pair_index(p, s)] = per_state[s];
        }
    }
    DeterministicPolicy::new(acts)
}

/// Every policy over abstract states, in lexicographic order.
pub fn all_state_policies(n: usize, na: usize) -> Vec<Vec<usize>> {
    let mut out = vec![vec![]];
    for _ in 0..n {
        out = out
            .into_iter()
            .flat_map(|p: Vec<usize>| {
                (0..na).map(move |a| {
                    let mut q = p.clone();
                    q.push(a);
                    q
                })
            })
            .collect();
    }
    out
}
