//! Tabular first- and second-order decision processes.

mod cmdp;
mod ground;
mod occupancy;
mod policy;
mod second_order;
mod solve;
pub(crate) use ground::check_distribution;
pub(crate) use solve::policy_system;

pub use cmdp::CmdpSpec;
pub use ground::GroundMdp;
pub use occupancy::{occupancy, state_occupancies, value_from_occupancy, OccupancyKind, OccupancyMeasure, Source};
pub use policy::{AnyPolicy, DeterministicPolicy, Policy, StochasticPolicy};
pub use second_order::SecondOrderMdp;
pub use solve::{
    evaluate_policy, evaluate_policy_2mdp, listing_vi_iterations, policy_iteration, proof_vi_iterations,
    q_from_values, truncation_horizon, value_iteration, value_iteration_2mdp, ValueIteration,
};
