use crate::abstraction::{tilde_targets, Tuple};
use crate::error::{Error, Result};
use crate::mdp::SecondOrderMdp;
use crate::scalar::Real;

/// In-block value target of a tuple under the abstract model.
pub fn tilde_value<T: Real>(model: &SecondOrderMdp<T>, tuple: Tuple) -> Result<T> {
    Ok(tilde_targets(model, tuple, model.gamma_bar())?.v)
}

/// Lowers the rewards of `model` so the value target of `tuple` becomes `value`,
/// while the targets of the other predecessors of the same block and action stay
/// put as far as rewards in `[0, 1]` allow.
pub fn abstract_one_r<T: Real>(model: &SecondOrderMdp<T>, tuple: Tuple, value: T) -> Result<SecondOrderMdp<T>> {
    let Tuple { pred, block, action } = tuple;
    let current = tilde_value(model, tuple)?;
    if value < T::zero() || value > current + T::tol(1e-12) {
        return Err(Error::TargetOutOfRange { target: value.as_f64(), current: current.as_f64() });
    }
    let n = model.num_states();
    let others: Vec<usize> = (0..=n).filter(|&p| p != pred && p != block).collect();
    let before = others.iter().map(|&p| tilde_value(model, Tuple::new(p, block, action))).collect::<Result<Vec<_>>>()?;
    let unit = |x: T| x.max(T::zero()).min(T::one());
    let mut out = model.clone();
    let lowered = (model.reward(pred, block, action) + (value - current)).max(T::zero());
    out.set_reward(pred, block, action, unit(lowered))?;
    if lowered == T::zero() {
        let loops = crate::abstraction::self_loop_factor(model, tuple)?;
        if loops == T::zero() {
            return Err(Error::DegenerateSelfLoop { pred, block, action });
        }
        out.set_reward(block, block, action, unit(value / (model.gamma_bar() * loops)))?;
        // only the shared self-loop reward moved; restore the other predecessors
        for (&p, &old) in others.iter().zip(&before) {
            let now = tilde_value(&out, Tuple::new(p, block, action))?;
            out.set_reward(p, block, action, unit(out.reward(p, block, action) + (old - now)))?;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn model() -> SecondOrderMdp<f64> {
        // two abstract states, one action; rows for pairs (0,0) (0,1) (1,0) (1,1) (*,0) (*,1)
        let t = vec![0.5, 0.5, 0.3, 0.7, 0.6, 0.4, 0.2, 0.8, 0.5, 0.5, 0.1, 0.9];
        let r = vec![0.8, 0.6, 0.9, 0.5, 0.7, 0.4];
        SecondOrderMdp::<f64>::new(2, 1, t, r, 0.9, vec![1.0, 0.0]).unwrap()
    }

    #[test]
    fn unchanged_at_current_target() {
        let m = model();
        let t = Tuple::new(1, 0, 0);
        let v = tilde_value(&m, t).unwrap();
        assert_eq!(abstract_one_r(&m, t, v).unwrap(), m);
    }

    #[test]
    fn zero_target_forces_zero_rewards() {
        let m = model();
        let t = Tuple::new(1, 0, 0);
        let out = abstract_one_r(&m, t, 0.0).unwrap();
        assert_eq!(out.reward(1, 0, 0), 0.0);
        assert_eq!(out.reward(0, 0, 0), 0.0);
        assert!(tilde_value(&out, t).unwrap().abs() < 1e-12);
    }

    #[test]
    fn rejects_raising() {
        let m = model();
        let t = Tuple::new(1, 0, 0);
        let v = tilde_value(&m, t).unwrap();
        assert!(matches!(abstract_one_r(&m, t, v + 0.5), Err(Error::TargetOutOfRange { .. })));
    }
}
