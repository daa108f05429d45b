use crate::abstraction::Mapping;
use crate::error::Result;
use crate::mdp::{GroundMdp, SecondOrderMdp};
use crate::scalar::Real;

/// Three-state chain `s0 -> s1 -> s2` with `s2` absorbing and paying 1, the
/// mapping `{s0, s1} -> 0`, `{s2} -> 1`, and the first-order abstraction that
/// leaves block 0 with probability `γ/(1+γ)` per step.
pub fn build_chain<T: Real>(gamma: T) -> Result<(GroundMdp<T>, Mapping, SecondOrderMdp<T>)> {
    let (o, l) = (T::zero(), T::one());
    let t = vec![o, l, o, o, o, l, o, o, l];
    let r = vec![o, o, l];
    let ground = GroundMdp::new(3, 1, t, r, gamma, vec![l, o, o])?;
    let mapping = Mapping::new(vec![0, 0, 1], 2)?;
    let leave = gamma / (l + gamma);
    let at = vec![l - leave, leave, o, l];
    let ar = vec![o, l];
    let abs = SecondOrderMdp::first_order(2, 1, &at, &ar, gamma, vec![l, o])?;
    Ok((ground, mapping, abs))
}
