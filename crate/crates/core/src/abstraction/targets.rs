use crate::error::{Error, Result};
use crate::mdp::SecondOrderMdp;
use crate::scalar::Real;

/// Abstract occupancy and value targets of a tuple.
#[derive(Debug, Clone, PartialEq)]
pub struct Targets<T> {
    /// Indexed by abstract state; the entry of the tuple's own block is zero and unused.
    pub h: Vec<T>,
    pub v: T,
}

/// Tuple `(pred, block, action)` of the abstract model. `pred` may be the start slot.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Tuple {
    pub pred: usize,
    pub block: usize,
    pub action: usize,
}

impl Tuple {
    pub fn new(pred: usize, block: usize, action: usize) -> Self {
        Self { pred, block, action }
    }
}

/// Discounted mass of the self-loop series: `T(s|p s, a) / (1 - γ̄ T(s|s s, a))`.
pub(crate) fn self_loop_factor<T: Real>(abs: &SecondOrderMdp<T>, t: Tuple) -> Result<T> {
    let g = abs.gamma_bar();
    let stay = g * abs.prob(t.block, t.block, t.action, t.block);
    if stay >= T::one() {
        return Err(Error::DegenerateSelfLoop { pred: t.pred, block: t.block, action: t.action });
    }
    Ok(abs.prob(t.pred, t.block, t.action, t.block) / (T::one() - stay))
}

/// First-exit occupancy and in-block value implied by the abstract model.
///
/// `ground_gamma` scales the occupancy the same way ground occupancies are normalized.
pub fn tilde_targets<T: Real>(abs: &SecondOrderMdp<T>, tuple: Tuple, ground_gamma: T) -> Result<Targets<T>> {
    let n = abs.num_states();
    let Tuple { pred, block, action } = tuple;
    if block >= n || pred > n || action >= abs.num_actions() {
        return Err(Error::Dimension(format!("tuple ({pred}, {block}, {action}) out of range")));
    }
    if pred == block {
        return Err(Error::InvalidTuple { pred, block });
    }
    let g = abs.gamma_bar();
    let loops = self_loop_factor(abs, tuple)?;
    let first = abs.row(pred, block, action);
    let after = abs.row(block, block, action);
    let scale = T::one() - ground_gamma;
    let h = (0..n)
        .map(|s2| {
            if s2 == block {
                T::zero()
            } else {
                scale * (g * first[s2] + g * g * loops * after[s2])
            }
        })
        .collect();
    let v = abs.reward(pred, block, action) + g * loops * abs.reward(block, block, action);
    Ok(Targets { h, v })
}

/// Targets of a model whose rows ignore the predecessor.
pub fn first_order_targets<T: Real>(abs: &SecondOrderMdp<T>, block: usize, action: usize, ground_gamma: T) -> Result<Targets<T>> {
    let g = abs.gamma_bar();
    let row = abs.row(block, block, action);
    let denom = T::one() - g * row[block];
    if denom <= T::zero() {
        return Err(Error::DegenerateSelfLoop { pred: block, block, action });
    }
    let scale = T::one() - ground_gamma;
    let h = (0..abs.num_states())
        .map(|s2| if s2 == block { T::zero() } else { scale * g * row[s2] / denom })
        .collect();
    Ok(Targets { h, v: abs.reward(block, block, action) / denom })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn no_return_mass_gives_reward_only() {
        // from the start pair, block 0 is never re-entered
        let t = vec![
            0.0, 1.0, 0.0, 1.0, // pred 0
            0.0, 1.0, 0.0, 1.0, // pred 1
            0.0, 1.0, 0.0, 1.0, // start
        ];
        let r = vec![0.3, 0.0, 0.7, 0.0, 0.5, 0.0];
        let m = SecondOrderMdp::<f64>::new(2, 1, t, r, 0.9, vec![1.0, 0.0]).unwrap();
        let tg = tilde_targets(&m, Tuple::new(2, 0, 0), 0.9).unwrap();
        assert_eq!(tg.v, 0.5);
        assert!((tg.h[1] - 0.1 * 0.9).abs() < 1e-15);
        assert!(matches!(tilde_targets(&m, Tuple::new(0, 0, 0), 0.9), Err(Error::InvalidTuple { .. })));
    }
}
