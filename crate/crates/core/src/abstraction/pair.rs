use crate::abstraction::{build_block_mdp, compute_entries_exits, tilde_targets, BlockMdp, EntryExitSets, Mapping, Targets, Tuple};
use crate::error::{Error, Result};
use crate::mdp::{GroundMdp, SecondOrderMdp};
use crate::scalar::Real;

/// A ground model, its abstract model and the state mapping, with block models cached.
#[derive(Debug, Clone)]
pub struct AbstractionPair<T> {
    ground: GroundMdp<T>,
    abs: SecondOrderMdp<T>,
    mapping: Mapping,
    sets: EntryExitSets,
    blocks: Vec<BlockMdp<T>>,
}

impl<T: Real> AbstractionPair<T> {
    pub fn new(ground: GroundMdp<T>, abs: SecondOrderMdp<T>, mapping: Mapping) -> Result<Self> {
        if mapping.num_abstract() != abs.num_states() {
            return Err(Error::Dimension(format!(
                "mapping has {} abstract states, model has {}",
                mapping.num_abstract(),
                abs.num_states()
            )));
        }
        if abs.gamma_bar() > ground.gamma() {
            return Err(Error::InvalidModel(format!(
                "abstract discount {} exceeds ground discount {}",
                abs.gamma_bar(),
                ground.gamma()
            )));
        }
        let sets = compute_entries_exits(&ground, &mapping)?;
        let blocks = (0..mapping.num_abstract())
            .map(|b| build_block_mdp(&ground, &mapping, &sets, b))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { ground, abs, mapping, sets, blocks })
    }

    pub fn ground(&self) -> &GroundMdp<T> {
        &self.ground
    }

    pub fn abs(&self) -> &SecondOrderMdp<T> {
        &self.abs
    }

    pub fn mapping(&self) -> &Mapping {
        &self.mapping
    }

    pub fn sets(&self) -> &EntryExitSets {
        &self.sets
    }

    pub fn block(&self, b: usize) -> &BlockMdp<T> {
        &self.blocks[b]
    }

    pub fn entries(&self, pred: usize, block: usize) -> &[usize] {
        self.sets.entries(pred, block)
    }

    pub fn targets(&self, tuple: Tuple) -> Result<Targets<T>> {
        tilde_targets(&self.abs, tuple, self.ground.gamma())
    }

    /// Replaces the abstract model, keeping the ground side.
    pub fn with_abs(&self, abs: SecondOrderMdp<T>) -> Result<Self> {
        if abs.num_states() != self.abs.num_states() || abs.gamma_bar() > self.ground.gamma() {
            return Err(Error::Dimension("replacement abstract model".into()));
        }
        Ok(Self { abs, ..self.clone() })
    }

    /// Every tuple whose predecessor differs from the block; start slot included.
    pub fn tuples(&self) -> Vec<Tuple> {
        let n = self.abs.num_states();
        let mut out = Vec::new();
        for block in 0..n {
            for pred in (0..=n).filter(|&p| p != block) {
                for action in 0..self.abs.num_actions() {
                    out.push(Tuple::new(pred, block, action));
                }
            }
        }
        out
    }

    /// Whether the abstract start distribution is the block marginal of the ground one.
    pub fn start_marginal_matches(&self) -> bool {
        let mut marg = vec![T::zero(); self.abs.num_states()];
        for (s, &p) in self.ground.start().iter().enumerate() {
            marg[self.mapping.of(s)] += p;
        }
        marg.iter().zip(self.abs.start()).all(|(&a, &b)| (a - b).abs() <= T::tol(1e-12))
    }
}
