//! The online learning loop: realize abstract tuples from samples, correct
//! over-optimistic abstract rewards and replan.

mod one_r;
mod run;
mod sim;

pub use one_r::{abstract_one_r, tilde_value};
pub use run::{
    abstract_horizon, option_value_iteration, rollout_option, run, sample_complexity_budget, EpisodeLog, RarlConfig, RarlOutcome, RarlState, UpdateLog,
};
pub use sim::{Episode, MdpSimulator, Simulator};
