use crate::abstraction::{compute_entries_exits, build_block_mdp, option_profile, Mapping, OptionEnumerator};
use crate::error::{Error, Result};
use crate::mdp::{policy_iteration, GroundMdp, SecondOrderMdp};
use crate::scalar::Real;

/// First-order transition row and reward of one abstract action whose targets
/// are occupancies `h` (own block ignored) and in-block value `v`.
///
/// Fails with the smallest feasible abstract discount when `gamma_bar` cannot
/// represent the targets.
pub fn fit_first_order<T: Real>(h: &[T], v: T, block: usize, gamma: T, gamma_bar: T) -> Result<(Vec<T>, T)> {
    let one = T::one();
    let leave: T = h.iter().enumerate().filter(|&(b, _)| b != block).map(|(_, &x)| x.max(T::zero())).sum();
    let x = leave / (one - gamma);
    let need = min_gamma_bar(x, v);
    if gamma_bar < need - T::tol(1e-12) || x >= one {
        return Err(Error::InversionInfeasible { min_gamma_bar: need.as_f64() });
    }
    // `1 - γ̄ q` where q is the self-loop probability
    let keep = (one - gamma_bar) / (one - x);
    let mut row: Vec<T> = h
        .iter()
        .enumerate()
        .map(|(b, &hb)| if b == block { T::zero() } else { hb.max(T::zero()) * keep / ((one - gamma) * gamma_bar) })
        .collect();
    let out: T = row.iter().copied().sum();
    row[block] = (one - out).max(T::zero());
    let total: T = row.iter().copied().sum();
    row.iter_mut().for_each(|p| *p /= total);
    let reward = (v * keep).max(T::zero()).min(one);
    Ok((row, reward))
}

fn min_gamma_bar<T: Real>(x: T, v: T) -> T {
    let one = T::one();
    let by_value = if v > one { one - (one - x) / v } else { T::zero() };
    x.max(by_value)
}

fn block_entries(sets: &crate::abstraction::EntryExitSets, mapping: &Mapping, b: usize) -> Vec<usize> {
    let e = sets.all_entries(b);
    if e.is_empty() {
        mapping.block(b).to_vec()
    } else {
        e
    }
}

/// First-order abstraction whose actions dominate every deterministic option.
///
/// For each block, every option is summarized by its largest occupancy of each
/// other block and largest value over the block's entries; the Pareto-maximal
/// summaries become abstract actions and are inverted into transition rows and
/// rewards. Blocks with fewer summaries repeat their last one.
pub fn synthesize_admissible_abstraction<T: Real>(mdp: &GroundMdp<T>, mapping: &Mapping, gamma_bar: T, cap: f64) -> Result<SecondOrderMdp<T>> {
    let sets = compute_entries_exits(mdp, mapping)?;
    let nb = mapping.num_abstract();
    let mut envelopes: Vec<Vec<(Vec<T>, T)>> = Vec::with_capacity(nb);
    for b in 0..nb {
        let block = build_block_mdp(mdp, mapping, &sets, b)?;
        let entries = block_entries(&sets, mapping, b);
        let idx = entries.iter().map(|&s| block.inner_index(s)).collect::<Result<Vec<_>>>()?;
        let mut found: Vec<(Vec<T>, T)> = Vec::new();
        for det in OptionEnumerator::new(block.num_inner(), block.num_actions(), cap)? {
            let mut acts = det.actions().to_vec();
            acts.resize(block.num_local(), 0);
            let profile = option_profile(&block, &crate::mdp::DeterministicPolicy::new(acts))?;
            let mut h = vec![T::zero(); nb];
            let mut v = T::zero();
            for &i in &idx {
                for (hb, &x) in h.iter_mut().zip(profile.h(i)) {
                    *hb = hb.max(x);
                }
                v = v.max(profile.values[i]);
            }
            h[b] = T::zero();
            found.push((h, v));
        }
        envelopes.push(pareto(found));
    }
    let nab = envelopes.iter().map(Vec::len).max().unwrap_or(1);
    let gamma = mdp.gamma();
    let mut t = Vec::with_capacity(nb * nab * nb);
    let mut r = Vec::with_capacity(nb * nab);
    let mut need = T::zero();
    let mut infeasible = false;
    for (b, env) in envelopes.iter().enumerate() {
        for k in 0..nab {
            let (h, v) = &env[k.min(env.len() - 1)];
            match fit_first_order(h, *v, b, gamma, gamma_bar) {
                Ok((row, reward)) => {
                    t.extend(row);
                    r.push(reward);
                }
                Err(Error::InversionInfeasible { min_gamma_bar }) => {
                    infeasible = true;
                    need = need.max(T::lit(min_gamma_bar));
                }
                Err(e) => return Err(e),
            }
        }
    }
    if infeasible {
        return Err(Error::InversionInfeasible { min_gamma_bar: need.as_f64() });
    }
    SecondOrderMdp::first_order(nb, nab, &t, &r, gamma_bar, block_marginal(mdp, mapping))
}

fn pareto<T: Real>(mut all: Vec<(Vec<T>, T)>) -> Vec<(Vec<T>, T)> {
    let dominated = |a: &(Vec<T>, T), b: &(Vec<T>, T)| a.1 <= b.1 && a.0.iter().zip(&b.0).all(|(x, y)| x <= y);
    let mut keep: Vec<(Vec<T>, T)> = Vec::new();
    all.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap_or(std::cmp::Ordering::Equal));
    for cand in all {
        if keep.iter().any(|k| dominated(&cand, k)) {
            continue;
        }
        keep.retain(|k| !dominated(k, &cand));
        keep.push(cand);
    }
    keep
}

pub fn block_marginal<T: Real>(mdp: &GroundMdp<T>, mapping: &Mapping) -> Vec<T> {
    let mut start = vec![T::zero(); mapping.num_abstract()];
    for (s, &p) in mdp.start().iter().enumerate() {
        start[mapping.of(s)] += p;
    }
    start
}

/// First-order abstraction with one action per target block: action `k` from
/// block `b` promises the largest occupancy of block `k` any policy reaches
/// from the entries of `b`; action `b` stays. Every reward is `reward`.
pub fn reach_abstraction<T: Real>(mdp: &GroundMdp<T>, mapping: &Mapping, gamma_bar: T, reward: T) -> Result<SecondOrderMdp<T>> {
    let sets = compute_entries_exits(mdp, mapping)?;
    let nb = mapping.num_abstract();
    let gamma = mdp.gamma();
    let mut t = vec![T::zero(); nb * nb * nb];
    for b in 0..nb {
        let block = build_block_mdp(mdp, mapping, &sets, b)?;
        let entries = block_entries(&sets, mapping, b);
        for k in 0..nb {
            let row = &mut t[(b * nb + k) * nb..(b * nb + k + 1) * nb];
            if k == b {
                row[b] = T::one();
                continue;
            }
            let na = block.num_actions();
            let rewards: Vec<T> = block
                .labels()
                .iter()
                .flat_map(|&l| std::iter::repeat_n(if l == k { T::one() - gamma } else { T::zero() }, na))
                .collect();
            let (v, _) = policy_iteration(&block.mdp().with_rewards(rewards)?)?;
            let best = entries.iter().map(|&s| v[block.inner_index(s).expect("entries are inside")]).fold(T::zero(), T::max);
            let mut h = vec![T::zero(); nb];
            h[k] = best;
            let (fit, _) = fit_first_order(&h, T::zero(), b, gamma, gamma_bar)?;
            row.copy_from_slice(&fit);
        }
    }
    let r = vec![reward; nb * nb];
    SecondOrderMdp::first_order(nb, nb, &t, &r, gamma_bar, block_marginal(mdp, mapping))
}
