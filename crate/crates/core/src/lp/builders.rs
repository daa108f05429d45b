use crate::abstraction::BlockMdp;
use crate::error::{Error, Result};
use crate::mdp::{GroundMdp, StochasticPolicy};
use crate::scalar::Real;
use crate::lp::LinearProgram;

/// Occupancy mass below which a state's action choice is treated as arbitrary.
pub const ZERO_MASS: f64 = 1e-12;

/// Flow program over state-action occupancies `b(s,a)`, index `s * A + a`:
/// `Σ_a b(s',a) - γ Σ_{s,a} T(s'|s,a) b(s,a) = (1-γ) ν(s')`, maximizing `bᵀR`.
pub fn build_primal_occupancy_lp<T: Real>(mdp: &GroundMdp<T>, nu: &[T]) -> Result<LinearProgram<T>> {
    let (ns, na) = (mdp.num_states(), mdp.num_actions());
    if nu.len() != ns {
        return Err(Error::Dimension(format!("initial distribution of length {}, want {ns}", nu.len())));
    }
    let g = mdp.gamma();
    let mut lp = LinearProgram::new(mdp.rewards().to_vec());
    let mut rows = vec![vec![T::zero(); ns * na]; ns];
    for s in 0..ns {
        for a in 0..na {
            let col = s * na + a;
            rows[s][col] += T::one();
            for (s2, &p) in mdp.row(s, a).iter().enumerate() {
                if p != T::zero() {
                    rows[s2][col] -= g * p;
                }
            }
        }
    }
    for (s, row) in rows.into_iter().enumerate() {
        lp.add_eq(row, (T::one() - g) * nu[s]);
    }
    Ok(lp)
}

/// Flow program of a block model plus one `≥` row per other abstract block `b`
/// (ascending): occupancy of `b` at least `targets[b] - eps_t`.
///
/// `nu` is indexed by local block-model state.
pub fn build_constrained_realization_lp<T: Real>(block: &BlockMdp<T>, nu: &[T], targets: &[T], eps_t: T) -> Result<LinearProgram<T>> {
    if targets.len() != block.num_blocks() {
        return Err(Error::Dimension(format!("{} targets for {} blocks", targets.len(), block.num_blocks())));
    }
    let mut lp = build_primal_occupancy_lp(block.mdp(), nu)?;
    let na = block.num_actions();
    for (b, &h) in targets.iter().enumerate() {
        if b == block.block() {
            continue;
        }
        let mut row = vec![T::zero(); block.num_local() * na];
        for (j, &label) in block.labels().iter().enumerate() {
            if label == b {
                row[j * na..(j + 1) * na].iter_mut().for_each(|x| *x = T::one());
            }
        }
        lp.add_ge(row, h - eps_t);
    }
    Ok(lp)
}

/// Index of the `≥` row constraining block `target` in a realization program for `block`.
pub fn realization_row(block: usize, target: usize) -> Option<usize> {
    match target.cmp(&block) {
        std::cmp::Ordering::Less => Some(target),
        std::cmp::Ordering::Equal => None,
        std::cmp::Ordering::Greater => Some(target - 1),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExtractedPolicy<T> {
    pub policy: StochasticPolicy<T>,
    /// States with (near) zero occupancy that received the uniform policy.
    pub uniform_states: Vec<usize>,
}

/// Normalizes state-action occupancies into a policy; massless states get the uniform row.
pub fn extract_policy_from_occupancy<T: Real>(b: &[T], num_states: usize, num_actions: usize) -> Result<ExtractedPolicy<T>> {
    if b.len() != num_states * num_actions || num_actions == 0 {
        return Err(Error::Dimension(format!("occupancy of length {}", b.len())));
    }
    let mut probs = Vec::with_capacity(b.len());
    let mut uniform_states = Vec::new();
    let uniform = T::one() / T::lit(num_actions as f64);
    for s in 0..num_states {
        let row = &b[s * num_actions..(s + 1) * num_actions];
        let mass: T = row.iter().map(|&x| x.max(T::zero())).sum();
        if mass > T::lit(ZERO_MASS) {
            probs.extend(row.iter().map(|&x| x.max(T::zero()) / mass));
        } else {
            uniform_states.push(s);
            probs.extend(std::iter::repeat_n(uniform, num_actions));
        }
    }
    Ok(ExtractedPolicy { policy: StochasticPolicy::new(num_actions, probs)?, uniform_states })
}
