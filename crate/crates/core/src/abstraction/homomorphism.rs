use crate::abstraction::Mapping;
use crate::error::{Error, Result};
use crate::mdp::GroundMdp;
use crate::scalar::Real;

/// Tolerance of the homomorphism and bisimulation equalities.
pub const EQUALITY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HomomorphismWitness {
    NotSurjective { state: usize },
    Transition { state: usize, action: usize, block: usize },
    Reward { state: usize, action: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct HomomorphismCheck {
    pub holds: bool,
    pub witness: Option<HomomorphismWitness>,
}

/// Checks block-sum transition equality, reward equality and surjectivity of
/// every action map `action_maps[s][a] = g_s(a)` against a first-order abstract model.
pub fn check_homomorphism<T: Real>(
    mdp: &GroundMdp<T>,
    abs: &GroundMdp<T>,
    f: &Mapping,
    action_maps: &[Vec<usize>],
) -> Result<HomomorphismCheck> {
    let (n, na) = (mdp.num_states(), mdp.num_actions());
    if f.num_states() != n || f.num_abstract() != abs.num_states() || action_maps.len() != n {
        return Err(Error::Dimension("homomorphism components disagree on state counts".into()));
    }
    let tol = T::tol(EQUALITY_TOL);
    let fail = |w| Ok(HomomorphismCheck { holds: false, witness: Some(w) });
    for s in 0..n {
        let g = &action_maps[s];
        if g.len() != na || g.iter().any(|&x| x >= abs.num_actions()) {
            return Err(Error::Dimension(format!("action map of state {s}")));
        }
        let mut hit = vec![false; abs.num_actions()];
        g.iter().for_each(|&x| hit[x] = true);
        if hit.contains(&false) {
            return fail(HomomorphismWitness::NotSurjective { state: s });
        }
        for a in 0..na {
            let sums = block_sums(mdp, f, s, a);
            for (b, &mass) in sums.iter().enumerate() {
                if (abs.prob(f.of(s), g[a], b) - mass).abs() > tol {
                    return fail(HomomorphismWitness::Transition { state: s, action: a, block: b });
                }
            }
            if (abs.reward(f.of(s), g[a]) - mdp.reward(s, a)).abs() > tol {
                return fail(HomomorphismWitness::Reward { state: s, action: a });
            }
        }
    }
    Ok(HomomorphismCheck { holds: true, witness: None })
}

fn block_sums<T: Real>(mdp: &GroundMdp<T>, f: &Mapping, s: usize, a: usize) -> Vec<T> {
    let mut sums = vec![T::zero(); f.num_abstract()];
    for (s2, &p) in mdp.row(s, a).iter().enumerate() {
        sums[f.of(s2)] += p;
    }
    sums
}

/// Block-level outcome of one ground action: reward and block sums.
#[derive(Debug, Clone)]
struct Signature<T> {
    reward: T,
    sums: Vec<T>,
}

impl<T: Real> Signature<T> {
    fn same(&self, other: &Self) -> bool {
        let tol = T::tol(EQUALITY_TOL);
        (self.reward - other.reward).abs() <= tol && self.sums.iter().zip(&other.sums).all(|(&x, &y)| (x - y).abs() <= tol)
    }
}

/// Outcome of searching for a homomorphism with a fixed state map.
#[derive(Debug, Clone, PartialEq)]
pub enum HomomorphismSearch<T> {
    Found { abs: GroundMdp<T>, action_maps: Vec<Vec<usize>> },
    /// Two states of one block whose sets of block-level outcomes differ.
    Impossible { witness: (usize, usize) },
}

/// Builds the abstract model and action maps when every state of a block
/// offers the same set of block-level outcomes.
pub fn find_homomorphism<T: Real>(mdp: &GroundMdp<T>, f: &Mapping) -> Result<HomomorphismSearch<T>> {
    let (n, na, k) = (mdp.num_states(), mdp.num_actions(), f.num_abstract());
    if f.num_states() != n {
        return Err(Error::Dimension("mapping size".into()));
    }
    let sig = |s: usize, a: usize| Signature { reward: mdp.reward(s, a), sums: block_sums(mdp, f, s, a) };
    let index_of = |list: &[Signature<T>], x: &Signature<T>| list.iter().position(|y| y.same(x));
    // distinct outcomes per block, in order of first appearance at the block's first state
    let mut outcomes: Vec<Vec<Signature<T>>> = Vec::with_capacity(k);
    for b in 0..k {
        let states = f.block(b);
        let mut list: Vec<Signature<T>> = Vec::new();
        for a in 0..na {
            let x = sig(states[0], a);
            if index_of(&list, &x).is_none() {
                list.push(x);
            }
        }
        for &s in &states[1..] {
            let mut own: Vec<Signature<T>> = Vec::new();
            for a in 0..na {
                let x = sig(s, a);
                if index_of(&list, &x).is_none() {
                    return Ok(HomomorphismSearch::Impossible { witness: (states[0], s) });
                }
                if index_of(&own, &x).is_none() {
                    own.push(x);
                }
            }
            if own.len() != list.len() {
                return Ok(HomomorphismSearch::Impossible { witness: (states[0], s) });
            }
        }
        outcomes.push(list);
    }
    let nab = outcomes.iter().map(Vec::len).max().unwrap_or(1);
    // padded abstract actions repeat an outcome every state of the block can offer twice
    let mut slots: Vec<Vec<usize>> = Vec::with_capacity(k);
    for (b, list) in outcomes.iter().enumerate() {
        let mut slot: Vec<usize> = (0..list.len()).collect();
        let spare = |o: usize| {
            f.block(b).iter().map(|&s| (0..na).filter(|&a| sig(s, a).same(&list[o])).count()).min().unwrap_or(0)
        };
        let mut used = vec![1usize; list.len()];
        while slot.len() < nab {
            let o = (0..list.len()).find(|&o| spare(o) > used[o]).ok_or_else(|| {
                Error::InvalidModel(format!("block {b} cannot cover {nab} abstract actions with surjective action maps"))
            })?;
            used[o] += 1;
            slot.push(o);
        }
        slots.push(slot);
    }
    let mut t = vec![T::zero(); k * nab * k];
    let mut r = vec![T::zero(); k * nab];
    for b in 0..k {
        for ab in 0..nab {
            let x = &outcomes[b][slots[b][ab]];
            r[b * nab + ab] = x.reward;
            t[(b * nab + ab) * k..(b * nab + ab + 1) * k].copy_from_slice(&x.sums);
        }
    }
    let mut start = vec![T::zero(); k];
    for (s, &p) in mdp.start().iter().enumerate() {
        start[f.of(s)] += p;
    }
    let abs = GroundMdp::new(k, nab, t, r, mdp.gamma(), start)?;
    let mut action_maps = Vec::with_capacity(n);
    for s in 0..n {
        let b = f.of(s);
        let mut free: Vec<Vec<usize>> = vec![Vec::new(); outcomes[b].len()];
        for (ab, &o) in slots[b].iter().enumerate() {
            free[o].push(ab);
        }
        let mut g = vec![0; na];
        for (a, ga) in g.iter_mut().enumerate() {
            let o = index_of(&outcomes[b], &sig(s, a)).expect("checked above");
            *ga = if free[o].len() > 1 { free[o].pop().expect("non-empty") } else { free[o][0] };
        }
        action_maps.push(g);
    }
    Ok(HomomorphismSearch::Found { abs, action_maps })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BisimulationFailure {
    NotTotal { model: usize, state: usize },
    Reward { left: usize, right: usize, action: usize },
    Transition { left: usize, right: usize, action: usize },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BisimulationCheck {
    pub holds: bool,
    pub failure: Option<BisimulationFailure>,
}

/// Stochastic bisimulation check of `relation ⊆ S_A × S_B` between two models
/// with the same action set.
///
/// Transition equality is tested on the classes of the equivalence closure of
/// the relation over the disjoint union of both state sets.
pub fn check_bisimulation<T: Real>(a: &GroundMdp<T>, b: &GroundMdp<T>, relation: &[(usize, usize)]) -> Result<BisimulationCheck> {
    if a.num_actions() != b.num_actions() {
        return Err(Error::Dimension("bisimulation needs a shared action set".into()));
    }
    let (na, nb) = (a.num_states(), b.num_states());
    if relation.iter().any(|&(x, y)| x >= na || y >= nb) {
        return Err(Error::Dimension("relation pair out of range".into()));
    }
    let fail = |f| Ok(BisimulationCheck { holds: false, failure: Some(f) });
    for s in 0..na {
        if !relation.iter().any(|&(x, _)| x == s) {
            return fail(BisimulationFailure::NotTotal { model: 0, state: s });
        }
    }
    for s in 0..nb {
        if !relation.iter().any(|&(_, y)| y == s) {
            return fail(BisimulationFailure::NotTotal { model: 1, state: s });
        }
    }
    // union-find over the disjoint union
    let mut parent: Vec<usize> = (0..na + nb).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    for &(x, y) in relation {
        let (rx, ry) = (find(&mut parent, x), find(&mut parent, na + y));
        if rx != ry {
            parent[rx.max(ry)] = rx.min(ry);
        }
    }
    let class: Vec<usize> = (0..na + nb).map(|i| find(&mut parent, i)).collect();
    let tol = T::tol(EQUALITY_TOL);
    for &(x, y) in relation {
        for act in 0..a.num_actions() {
            if (a.reward(x, act) - b.reward(y, act)).abs() > tol {
                return fail(BisimulationFailure::Reward { left: x, right: y, action: act });
            }
            let mut mass = vec![T::zero(); na + nb];
            for (s2, &p) in a.row(x, act).iter().enumerate() {
                mass[class[s2]] += p;
            }
            for (s2, &p) in b.row(y, act).iter().enumerate() {
                mass[class[na + s2]] -= p;
            }
            if mass.iter().any(|m| m.abs() > tol) {
                return fail(BisimulationFailure::Transition { left: x, right: y, action: act });
            }
        }
    }
    Ok(BisimulationCheck { holds: true, failure: None })
}

/// Graph of a state map as a relation between a model and its image.
pub fn mapping_relation(f: &Mapping) -> Vec<(usize, usize)> {
    (0..f.num_states()).map(|s| (s, f.of(s))).collect()
}
