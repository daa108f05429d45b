use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Dirichlet, Distribution};

use crate::abstraction::Mapping;
use crate::error::{Error, Result};
use crate::mdp::GroundMdp;
use crate::scalar::Real;

/// Reproducible random model: each row is a flat Dirichlet sample on
/// `min(branching, S)` random successors; rewards uniform in `[0, 1)`; uniform start.
pub fn random_mdp<T: Real>(seed: u64, num_states: usize, num_actions: usize, branching: usize, gamma: T) -> Result<GroundMdp<T>> {
    if num_states == 0 || num_actions == 0 || branching == 0 {
        return Err(Error::Dimension("random model needs states, actions and successors".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let k = branching.min(num_states);
    let states: Vec<usize> = (0..num_states).collect();
    let mut t = vec![T::zero(); num_states * num_actions * num_states];
    let mut r = Vec::with_capacity(num_states * num_actions);
    for row in t.chunks_mut(num_states) {
        let support: Vec<usize> = states.choose_multiple(&mut rng, k).copied().collect();
        let weights: Vec<f64> = if k == 1 {
            vec![1.0]
        } else {
            Dirichlet::new_with_size(1.0, k).map_err(|e| Error::InvalidModel(e.to_string()))?.sample(&mut rng)
        };
        for (&s, &w) in support.iter().zip(&weights) {
            row[s] = T::lit(w);
        }
        let total: T = row.iter().copied().sum();
        row.iter_mut().for_each(|x| *x /= total);
        r.push(T::lit(rng.gen::<f64>()));
    }
    let start = vec![T::one() / T::lit(num_states as f64); num_states];
    GroundMdp::new(num_states, num_actions, t, r, gamma, start)
}

/// Reproducible surjective mapping onto `num_abstract` blocks.
pub fn random_mapping(seed: u64, num_states: usize, num_abstract: usize) -> Result<Mapping> {
    if num_abstract == 0 || num_abstract > num_states {
        return Err(Error::Dimension(format!("cannot map {num_states} states onto {num_abstract} blocks")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<usize> = (0..num_states).collect();
    order.shuffle(&mut rng);
    let mut map = vec![0; num_states];
    for (k, &s) in order.iter().enumerate() {
        map[s] = if k < num_abstract { k } else { rng.gen_range(0..num_abstract) };
    }
    Mapping::new(map, num_abstract)
}
