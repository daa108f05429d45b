//! Option synthesis for abstract tuples: exact, from a known block model, and
//! online, from simulator samples.

mod exact;
mod online;

pub use exact::{lp_candidate, realize_exact, Realization, RealizationProblem, RealizationResult};
pub use online::{
    default_n_min, default_n_nu, rollout_cap, OnlineConfig, OnlineRealizer, OnlineResult, RolloutOutcome, N_MIN_CAP,
};
