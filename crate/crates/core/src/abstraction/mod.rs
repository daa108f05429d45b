//! Mappings, block models, options, targets and the predicates relating a
//! ground model to an abstract one.

mod admissibility;
mod block;
mod bounds;
mod homomorphism;
mod mapping;
mod options;
mod pair;
mod realizability;
mod targets;

pub use admissibility::{
    best_response_targets, check_admissible, dominating_abstract_policy, AdmissibilityReport, AdmissibilityViolation,
    ViolationKind, DEFAULT_ENUMERATION_CAP, DOMINANCE_SLACK,
};
pub use block::{
    block_occupancy, block_state_occupancy, block_value, build_block_mdp, option_profile, BlockMdp, FRelativeOption,
    OptionEnumerator, OptionProfile,
};
pub use bounds::{horizon_feasibility, value_loss_bound, HorizonFeasibility};
pub use homomorphism::{
    check_bisimulation, check_homomorphism, find_homomorphism, mapping_relation, BisimulationCheck, BisimulationFailure,
    HomomorphismCheck, HomomorphismSearch, HomomorphismWitness, EQUALITY_TOL,
};
pub use mapping::{compute_entries_exits, EntryExitSets, Mapping};
pub use options::{evaluate_policy_of_options, realize_abstract_policy, OptionsValue, PolicyOfOptions};
pub use pair::AbstractionPair;
pub use realizability::{
    check_realizability, check_realizable_from, check_realizable_tuple, find_realization, DistributionReport, EntryGap,
    RealizabilityReport, TupleReport, Witness, CHECK_SLACK,
};
pub(crate) use targets::self_loop_factor;
pub use targets::{first_order_targets, tilde_targets, Targets, Tuple};
