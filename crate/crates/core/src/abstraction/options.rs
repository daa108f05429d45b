use crate::abstraction::{find_realization, AbstractionPair, FRelativeOption, Mapping, Tuple};
use crate::error::{Error, Result};
use crate::linalg::{check_residual, Lu};
use crate::mdp::{DeterministicPolicy, GroundMdp, Policy};
use crate::scalar::Real;

/// One option per `(pred, block)` pair; `pred == num_blocks` is the start slot.
#[derive(Debug, Clone, PartialEq)]
pub struct PolicyOfOptions<T> {
    num_blocks: usize,
    options: Vec<Option<FRelativeOption<T>>>,
}

impl<T: Real> PolicyOfOptions<T> {
    pub fn new(num_blocks: usize) -> Self {
        Self { num_blocks, options: vec![None; (num_blocks + 1) * num_blocks] }
    }

    pub fn num_blocks(&self) -> usize {
        self.num_blocks
    }

    fn slot(&self, pred: usize, block: usize) -> Result<usize> {
        if block >= self.num_blocks || pred > self.num_blocks {
            return Err(Error::Dimension(format!("pair ({pred}, {block}) out of range")));
        }
        if pred == block {
            return Err(Error::InvalidTuple { pred, block });
        }
        Ok(pred * self.num_blocks + block)
    }

    /// Stores an option under its own initiation pair, returning the one it replaces.
    pub fn insert(&mut self, option: FRelativeOption<T>) -> Result<Option<FRelativeOption<T>>> {
        let i = self.slot(option.pred, option.block)?;
        Ok(self.options[i].replace(option))
    }

    pub fn get(&self, pred: usize, block: usize) -> Option<&FRelativeOption<T>> {
        self.slot(pred, block).ok().and_then(|i| self.options[i].as_ref())
    }

    pub fn len(&self) -> usize {
        self.options.iter().flatten().count()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn iter(&self) -> impl Iterator<Item = &FRelativeOption<T>> {
        self.options.iter().flatten()
    }

    /// Pairs with entry states that have no option.
    pub fn missing(&self, pair: &AbstractionPair<T>) -> Vec<(usize, usize)> {
        let n = self.num_blocks;
        let mut out = Vec::new();
        for p in 0..=n {
            for b in (0..n).filter(|&b| b != p) {
                if !pair.entries(p, b).is_empty() && self.get(p, b).is_none() {
                    out.push((p, b));
                }
            }
        }
        out
    }
}

/// Realizes an abstract policy over pairs: each pair with entries gets the
/// best option found for the action the policy picks there.
pub fn realize_abstract_policy<T: Real>(
    pair: &AbstractionPair<T>,
    policy: &DeterministicPolicy,
    eps_r: T,
    eps_t: T,
    cap: f64,
) -> Result<PolicyOfOptions<T>> {
    let abs = pair.abs();
    let n = abs.num_states();
    let mut out = PolicyOfOptions::new(n);
    for p in 0..=n {
        for b in (0..n).filter(|&b| b != p) {
            if pair.entries(p, b).is_empty() {
                continue;
            }
            let a = policy.action(abs.pair_index(p, b));
            let witness = find_realization(pair, Tuple::new(p, b, a), eps_r, eps_t, cap)?;
            out.insert(witness.option)?;
        }
    }
    Ok(out)
}

/// Values of a policy of options on the chain of (predecessor slot, ground state).
#[derive(Debug, Clone, PartialEq)]
pub struct OptionsValue<T> {
    num_states: usize,
    values: Vec<T>,
    start_value: T,
    /// Some reachable pair had no option and fell back to action 0.
    pub incomplete: bool,
}

impl<T: Real> OptionsValue<T> {
    /// Value at ground state `s` entered from block `pred` (start slot allowed).
    pub fn value(&self, pred: usize, s: usize) -> T {
        self.values[pred * self.num_states + s]
    }

    /// Value under the ground start distribution.
    pub fn start_value(&self) -> T {
        self.start_value
    }
}

/// Exact evaluation of a policy of options in the ground model.
pub fn evaluate_policy_of_options<T: Real>(
    mdp: &GroundMdp<T>,
    mapping: &Mapping,
    omega: &PolicyOfOptions<T>,
) -> Result<OptionsValue<T>> {
    let (ns, nb) = (mdp.num_states(), mapping.num_abstract());
    if mapping.num_states() != ns || omega.num_blocks() != nb {
        return Err(Error::Dimension("policy of options does not match the mapping".into()));
    }
    let mut pos = vec![0; ns];
    for b in 0..nb {
        for (i, &s) in mapping.block(b).iter().enumerate() {
            pos[s] = i;
        }
    }
    let n = (nb + 1) * ns;
    let gamma = mdp.gamma();
    let mut a = vec![T::zero(); n * n];
    let mut r = vec![T::zero(); n];
    let mut incomplete = false;
    for p in 0..=nb {
        for s in 0..ns {
            let i = p * ns + s;
            let b = mapping.of(s);
            a[i * n + i] = T::one();
            if p == b {
                // never reached: options are only entered from other blocks
                a[i * n + i] -= gamma;
                continue;
            }
            let mut step = |act: usize, w: T| {
                r[i] += w * mdp.reward(s, act);
                for (s2, &q) in mdp.row(s, act).iter().enumerate() {
                    if q > T::zero() {
                        let p2 = if mapping.of(s2) == b { p } else { b };
                        a[i * n + p2 * ns + s2] -= gamma * w * q;
                    }
                }
            };
            match omega.get(p, b) {
                Some(o) => o.policy.visit(pos[s], &mut step),
                None => {
                    incomplete = true;
                    step(0, T::one());
                }
            }
        }
    }
    let lu = Lu::factor(&a, n)?;
    let values = lu.solve(&r)?;
    check_residual(&lu, &values, &r)?;
    let start_value = mdp.start().iter().enumerate().map(|(s, &w)| w * values[nb * ns + s]).sum();
    Ok(OptionsValue { num_states: ns, values, start_value, incomplete })
}
