use crate::abstraction::{EntryExitSets, Mapping};
use crate::error::{Error, Result};
use crate::linalg::{check_residual, Lu};
use crate::mdp::{state_occupancies, AnyPolicy, DeterministicPolicy, GroundMdp, Policy, StochasticPolicy};
use crate::mdp::evaluate_policy;
use crate::scalar::Real;

/// Restriction of the ground model to one block, its exits and an absorbing sink.
///
/// Local indices: block states (ascending ground order), then exits, then the sink.
/// Exits move to the sink with certainty; rewards outside the block are zero.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockMdp<T> {
    block: usize,
    num_blocks: usize,
    inner: usize,
    ground: Vec<usize>,
    labels: Vec<usize>,
    local: Vec<Option<usize>>,
    mdp: GroundMdp<T>,
}

pub fn build_block_mdp<T: Real>(
    mdp: &GroundMdp<T>,
    mapping: &Mapping,
    sets: &EntryExitSets,
    block: usize,
) -> Result<BlockMdp<T>> {
    if block >= mapping.num_abstract() {
        return Err(Error::Dimension(format!("block {block} outside {} abstract states", mapping.num_abstract())));
    }
    let inner_states = mapping.block(block);
    let exits = sets.exits(block);
    let inner = inner_states.len();
    let mut ground: Vec<usize> = inner_states.to_vec();
    ground.extend_from_slice(exits);
    let n = ground.len() + 1;
    let sink = n - 1;
    let mut local = vec![None; mdp.num_states()];
    for (i, &s) in ground.iter().enumerate() {
        local[s] = Some(i);
    }
    let mut labels: Vec<usize> = ground.iter().map(|&s| mapping.of(s)).collect();
    labels.push(mapping.num_abstract());
    let na = mdp.num_actions();
    let mut t = vec![T::zero(); n * na * n];
    let mut r = vec![T::zero(); n * na];
    for (i, &s) in ground.iter().enumerate() {
        for a in 0..na {
            let row = &mut t[(i * na + a) * n..(i * na + a + 1) * n];
            if i < inner {
                for (s2, &q) in mdp.row(s, a).iter().enumerate() {
                    if q > T::zero() {
                        let j = local[s2].expect("one-step successors are inside the block or exits");
                        row[j] += q;
                    }
                }
                r[i * na + a] = mdp.reward(s, a);
            } else {
                row[sink] = T::one();
            }
        }
    }
    for a in 0..na {
        t[(sink * na + a) * n + sink] = T::one();
    }
    let mut start = vec![T::zero(); n];
    start[0] = T::one();
    let local_mdp = GroundMdp::new(n, na, t, r, mdp.gamma(), start)?;
    Ok(BlockMdp { block, num_blocks: mapping.num_abstract(), inner, ground, labels, local, mdp: local_mdp })
}

impl<T: Real> BlockMdp<T> {
    /// Block model from local tables. `ground` lists the block states, then the
    /// exits; `labels` gives their abstract blocks. The last local state of `mdp`
    /// is the sink.
    pub fn from_local(block: usize, num_blocks: usize, num_inner: usize, ground: Vec<usize>, mdp: GroundMdp<T>, labels: Vec<usize>) -> Result<Self> {
        if mdp.num_states() != ground.len() + 1 || labels.len() != ground.len() || num_inner > ground.len() {
            return Err(Error::Dimension("block model tables disagree".into()));
        }
        let mut local = vec![None; ground.iter().max().map_or(0, |&m| m + 1)];
        for (i, &s) in ground.iter().enumerate() {
            local[s] = Some(i);
        }
        let mut labels = labels;
        labels.push(num_blocks);
        Ok(Self { block, num_blocks, inner: num_inner, ground, labels, local, mdp })
    }

    /// Restricts a distribution over ground states to local indices; mass outside
    /// the block and its exits is dropped.
    pub fn localize(&self, nu: &[T]) -> Vec<T> {
        let mut out: Vec<T> = self.ground.iter().map(|&s| nu.get(s).copied().unwrap_or(T::zero())).collect();
        out.push(T::zero());
        out
    }

    pub fn block(&self) -> usize {
        self.block
    }

    pub fn num_blocks(&self) -> usize {
        self.num_blocks
    }

    /// Number of ground states inside the block.
    pub fn num_inner(&self) -> usize {
        self.inner
    }

    pub fn num_local(&self) -> usize {
        self.ground.len() + 1
    }

    pub fn sink(&self) -> usize {
        self.ground.len()
    }

    /// Ground states of the block followed by exit states.
    pub fn ground_states(&self) -> &[usize] {
        &self.ground
    }

    pub fn inner_states(&self) -> &[usize] {
        &self.ground[..self.inner]
    }

    pub fn exit_states(&self) -> &[usize] {
        &self.ground[self.inner..]
    }

    /// Abstract block of every local state; the sink is labelled `num_blocks`.
    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn local_index(&self, ground: usize) -> Option<usize> {
        self.local.get(ground).copied().flatten()
    }

    /// Local index of a ground state inside the block.
    pub fn inner_index(&self, ground: usize) -> Result<usize> {
        match self.local_index(ground) {
            Some(i) if i < self.inner => Ok(i),
            _ => Err(Error::OutsideBlock { state: ground, block: self.block }),
        }
    }

    pub fn mdp(&self) -> &GroundMdp<T> {
        &self.mdp
    }

    pub fn num_actions(&self) -> usize {
        self.mdp.num_actions()
    }

    pub fn gamma(&self) -> T {
        self.mdp.gamma()
    }
}

/// Option whose policy lives on one block and ends when the block is left.
#[derive(Debug, Clone, PartialEq)]
pub struct FRelativeOption<T> {
    pub pred: usize,
    pub block: usize,
    /// Defined on the block states in ascending ground order.
    pub policy: AnyPolicy<T>,
}

impl<T: Real> FRelativeOption<T> {
    pub fn new(pred: usize, block: usize, policy: impl Into<AnyPolicy<T>>) -> Self {
        Self { pred, block, policy: policy.into() }
    }

    /// Repeats `action` everywhere in the block.
    pub fn constant(pred: usize, block: usize, block_size: usize, action: usize) -> Self {
        Self::new(pred, block, DeterministicPolicy::constant(block_size, action))
    }

    pub fn is_stochastic(&self) -> bool {
        self.policy.is_stochastic()
    }

    /// Extends the block policy to every local state of the block model.
    pub fn local_policy(&self, block: &BlockMdp<T>) -> Result<AnyPolicy<T>> {
        let inner = block.num_inner();
        if self.policy.num_states() != inner {
            return Err(Error::Dimension(format!("option covers {} states, block has {inner}", self.policy.num_states())));
        }
        let n = block.num_local();
        Ok(match &self.policy {
            AnyPolicy::Deterministic(p) => {
                let mut acts = p.actions().to_vec();
                acts.resize(n, 0);
                DeterministicPolicy::new(acts).into()
            }
            AnyPolicy::Stochastic(p) => {
                let na = p.num_actions();
                let mut probs = Vec::with_capacity(n * na);
                for s in 0..inner {
                    probs.extend_from_slice(p.row(s));
                }
                for _ in inner..n {
                    probs.push(T::one());
                    probs.extend(std::iter::repeat_n(T::zero(), na - 1));
                }
                StochasticPolicy::new(na, probs)?.into()
            }
        })
    }
}

/// Values and block occupancies of one option from every block state.
#[derive(Debug, Clone, PartialEq)]
pub struct OptionProfile<T> {
    /// `values[i]` for the i-th block state.
    pub values: Vec<T>,
    /// `occupancy[i][b]`: mass on abstract block `b`; index `num_blocks` is the sink.
    pub occupancy: Vec<Vec<T>>,
}

impl<T: Real> OptionProfile<T> {
    pub fn h(&self, i: usize) -> &[T] {
        &self.occupancy[i]
    }
}

/// One factorization gives every block value and occupancy for a policy.
pub fn option_profile<T: Real, P: Policy<T> + ?Sized>(block: &BlockMdp<T>, local_policy: &P) -> Result<OptionProfile<T>> {
    let m = block.mdp();
    let n = m.num_states();
    let (a, r) = crate::mdp::policy_system(m, local_policy)?;
    let lu = Lu::factor(&a, n)?;
    let v = lu.solve(&r)?;
    check_residual(&lu, &v, &r)?;
    let k = block.num_blocks() + 1;
    let scale = T::one() - m.gamma();
    let mut occ = vec![vec![T::zero(); k]; block.num_inner()];
    for b in 0..k {
        if !block.labels().contains(&b) {
            continue;
        }
        let rhs: Vec<T> = block.labels().iter().map(|&l| if l == b { scale } else { T::zero() }).collect();
        let x = lu.solve(&rhs)?;
        for (i, row) in occ.iter_mut().enumerate() {
            row[b] = x[i].max(T::zero());
        }
    }
    Ok(OptionProfile { values: v[..block.num_inner()].to_vec(), occupancy: occ })
}

/// Block occupancy `h(·|s)` over abstract blocks, sink mass last.
pub fn block_occupancy<T: Real>(block: &BlockMdp<T>, option: &FRelativeOption<T>, s: usize) -> Result<Vec<T>> {
    let i = block.inner_index(s)?;
    let pol = option.local_policy(block)?;
    let d = state_occupancies(block.mdp(), &pol, &[i])?.remove(0);
    let mut h = vec![T::zero(); block.num_blocks() + 1];
    for (j, &x) in d.iter().enumerate() {
        h[block.labels()[j]] += x;
    }
    Ok(h)
}

/// Local state occupancy of an option started at ground state `s`.
pub fn block_state_occupancy<T: Real>(block: &BlockMdp<T>, option: &FRelativeOption<T>, s: usize) -> Result<Vec<T>> {
    let i = block.inner_index(s)?;
    let pol = option.local_policy(block)?;
    Ok(state_occupancies(block.mdp(), &pol, &[i])?.remove(0))
}

/// Value of the option inside its block model, started at ground state `s`.
pub fn block_value<T: Real>(block: &BlockMdp<T>, option: &FRelativeOption<T>, s: usize) -> Result<T> {
    let i = block.inner_index(s)?;
    let pol = option.local_policy(block)?;
    Ok(evaluate_policy(block.mdp(), &pol)?[i])
}

/// Every deterministic option on a block, in lexicographic order.
pub struct OptionEnumerator {
    digits: Vec<usize>,
    num_actions: usize,
    done: bool,
}

impl OptionEnumerator {
    pub fn new(block_size: usize, num_actions: usize, cap: f64) -> Result<Self> {
        let count = (num_actions as f64).powi(block_size as i32);
        if count > cap {
            return Err(Error::EnumerationCap { count, cap });
        }
        Ok(Self { digits: vec![0; block_size], num_actions, done: false })
    }
}

impl Iterator for OptionEnumerator {
    type Item = DeterministicPolicy;

    fn next(&mut self) -> Option<DeterministicPolicy> {
        if self.done {
            return None;
        }
        let out = DeterministicPolicy::new(self.digits.clone());
        let mut i = self.digits.len();
        loop {
            if i == 0 {
                self.done = true;
                break;
            }
            i -= 1;
            self.digits[i] += 1;
            if self.digits[i] < self.num_actions {
                break;
            }
            self.digits[i] = 0;
        }
        Some(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::abstraction::compute_entries_exits;

    #[test]
    fn enumerator_counts() {
        assert_eq!(OptionEnumerator::new(3, 2, 1e6).unwrap().count(), 8);
        assert_eq!(OptionEnumerator::new(0, 4, 1e6).unwrap().count(), 1);
        assert!(OptionEnumerator::new(30, 4, 1e6).is_err());
    }

    #[test]
    fn immediate_exit_mass() {
        // s0 -> s1 always, s1 absorbing; block {s0}
        let m = GroundMdp::<f64>::new(2, 1, vec![0.0, 1.0, 0.0, 1.0], vec![0.0, 0.0], 0.9, vec![1.0, 0.0]).unwrap();
        let f = Mapping::new(vec![0, 1], 2).unwrap();
        let ee = compute_entries_exits(&m, &f).unwrap();
        let b = build_block_mdp(&m, &f, &ee, 0).unwrap();
        let o = FRelativeOption::constant(2, 0, 1, 0);
        let h = block_occupancy(&b, &o, 0).unwrap();
        assert!((h[0] - 0.1).abs() < 1e-15);
        assert!((h[1] - 0.09).abs() < 1e-15);
        assert!((h[2] - 0.81).abs() < 1e-15);
        assert!(matches!(block_value(&b, &o, 1), Err(Error::OutsideBlock { .. })));
    }
}
