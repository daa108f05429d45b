use crate::error::{Error, Result};
use crate::mdp::GroundMdp;
use crate::scalar::Real;

/// Surjective state mapping from ground states to abstract states.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mapping {
    map: Vec<usize>,
    num_abstract: usize,
    blocks: Vec<Vec<usize>>,
}

impl Mapping {
    pub fn new(map: Vec<usize>, num_abstract: usize) -> Result<Self> {
        let mut blocks = vec![Vec::new(); num_abstract];
        for (s, &b) in map.iter().enumerate() {
            if b >= num_abstract {
                return Err(Error::Dimension(format!("state {s} maps to {b}, only {num_abstract} abstract states")));
            }
            blocks[b].push(s);
        }
        if let Some(empty) = blocks.iter().position(|b| b.is_empty()) {
            return Err(Error::NotSurjective(empty));
        }
        Ok(Self { map, num_abstract, blocks })
    }

    pub fn identity(n: usize) -> Self {
        Self::new((0..n).collect(), n).expect("identity is surjective")
    }

    /// Abstract state of a ground state.
    pub fn of(&self, s: usize) -> usize {
        self.map[s]
    }

    /// Ground states of a block, ascending.
    pub fn block(&self, b: usize) -> &[usize] {
        &self.blocks[b]
    }

    pub fn num_abstract(&self) -> usize {
        self.num_abstract
    }

    pub fn num_states(&self) -> usize {
        self.map.len()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.map
    }
}

/// Entry states per ordered abstract pair and exit states per block.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EntryExitSets {
    num_abstract: usize,
    entries: Vec<Vec<usize>>,
    exits: Vec<Vec<usize>>,
}

impl EntryExitSets {
    /// Entries of `block` when coming from `pred`; `pred == num_abstract` is the start marker.
    pub fn entries(&self, pred: usize, block: usize) -> &[usize] {
        &self.entries[pred * self.num_abstract + block]
    }

    /// Ground states outside `block` reachable from it in one step.
    pub fn exits(&self, block: usize) -> &[usize] {
        &self.exits[block]
    }

    /// Union of the entries of `block` over every predecessor, start included.
    pub fn all_entries(&self, block: usize) -> Vec<usize> {
        let mut v: Vec<usize> = (0..=self.num_abstract)
            .filter(|&p| p != block)
            .flat_map(|p| self.entries(p, block).iter().copied())
            .collect();
        v.sort_unstable();
        v.dedup();
        v
    }
}

/// Scans the transition table; support means strictly positive probability.
pub fn compute_entries_exits<T: Real>(mdp: &GroundMdp<T>, mapping: &Mapping) -> Result<EntryExitSets> {
    if mapping.num_states() != mdp.num_states() {
        return Err(Error::Dimension(format!(
            "mapping covers {} states, model has {}",
            mapping.num_states(),
            mdp.num_states()
        )));
    }
    let k = mapping.num_abstract();
    let n = mdp.num_states();
    let mut hit = vec![false; (k + 1) * k * n];
    for s in 0..n {
        let p = mapping.of(s);
        for a in 0..mdp.num_actions() {
            for (s2, &q) in mdp.row(s, a).iter().enumerate() {
                if q > T::zero() {
                    hit[(p * k + mapping.of(s2)) * n + s2] = true;
                }
            }
        }
    }
    for (s, &q) in mdp.start().iter().enumerate() {
        if q > T::zero() {
            hit[(k * k + mapping.of(s)) * n + s] = true;
        }
    }
    let entries: Vec<Vec<usize>> = (0..(k + 1) * k)
        .map(|pair| (0..n).filter(|&s| hit[pair * n + s]).collect())
        .collect();
    let exits = (0..k)
        .map(|b| {
            let mut x: Vec<usize> = (0..k).filter(|&b2| b2 != b).flat_map(|b2| entries[b * k + b2].iter().copied()).collect();
            x.sort_unstable();
            x
        })
        .collect();
    Ok(EntryExitSets { num_abstract: k, entries, exits })
}
