//! Fixture environments, abstraction synthesis and text formats.

mod chain;
mod grid;
pub mod io;
mod random;
mod synth;

pub use chain::build_chain;
pub use grid::{
    build_corridor_grid, build_two_region_grid, corridor_spec, two_region_spec, Grid, GridWorldSpec, CORRIDOR_GRAY, CORRIDOR_GREEN,
    CORRIDOR_S1, CORRIDOR_S2, CORRIDOR_YELLOW, MOVES, TWO_REGION_GRAY, TWO_REGION_GREEN, TWO_REGION_YELLOW,
};
pub use random::{random_mapping, random_mdp};
pub use synth::{block_marginal, fit_first_order, reach_abstraction, synthesize_admissible_abstraction};

use crate::error::Result;
use crate::mdp::SecondOrderMdp;
use crate::scalar::Real;

/// Reach abstraction of the corridor with the gray "go to yellow" action
/// promising occupancy `reach * (1-γ)` of the yellow block, reward zero outside
/// yellow and one inside.
pub fn corridor_abstraction<T: Real>(grid: &Grid<T>, reach: T) -> Result<SecondOrderMdp<T>> {
    let gamma = grid.mdp.gamma();
    let base = reach_abstraction(&grid.mdp, &grid.mapping, gamma, T::zero())?;
    let nb = base.num_states();
    let mut t = Vec::with_capacity(nb * nb * nb);
    let mut r = Vec::with_capacity(nb * nb);
    for b in 0..nb {
        for a in 0..nb {
            if b == CORRIDOR_GRAY && a == CORRIDOR_YELLOW {
                let mut h = vec![T::zero(); nb];
                h[CORRIDOR_YELLOW] = reach * (T::one() - gamma);
                let (row, _) = fit_first_order(&h, T::zero(), b, gamma, gamma)?;
                t.extend(row);
            } else {
                t.extend_from_slice(base.row(b, b, a));
            }
            r.push(if b == CORRIDOR_YELLOW { T::one() } else { T::zero() });
        }
    }
    SecondOrderMdp::first_order(nb, nb, &t, &r, gamma, base.start().to_vec())
}
