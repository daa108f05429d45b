use crate::abstraction::{block_occupancy, block_value, AbstractionPair, FRelativeOption, Tuple};
use crate::error::Result;
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HorizonFeasibility<T> {
    /// Occupancy of the option's own block, `h(s̄|s)`.
    pub occupancy: T,
    /// `(1-γ̄) max(1, V)`.
    pub required: T,
    pub slack: T,
    pub holds: bool,
}

/// Whether an abstract discount can represent how long the option stays in its block.
pub fn horizon_feasibility<T: Real>(
    pair: &AbstractionPair<T>,
    tuple: Tuple,
    option: &FRelativeOption<T>,
    entry: usize,
) -> Result<HorizonFeasibility<T>> {
    let block = pair.block(tuple.block);
    let occupancy = block_occupancy(block, option, entry)?[tuple.block];
    let value = block_value(block, option, entry)?;
    let required = (T::one() - pair.abs().gamma_bar()) * value.max(T::one());
    let slack = occupancy - required;
    Ok(HorizonFeasibility { occupancy, required, slack, holds: slack >= -T::tol(1e-12) })
}

/// Worst-case value loss of realizing an abstract policy with `(εR, εT)`-realizing options.
pub fn value_loss_bound<T: Real>(eps_r: T, eps_t: T, gamma: T, gamma_bar: T, num_abstract: usize) -> T {
    let one = T::one();
    let n = T::lit(num_abstract as f64);
    (eps_r * (one - gamma_bar) + eps_t * n) / ((one - gamma) * (one - gamma) * (one - gamma_bar))
}
