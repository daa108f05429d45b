//! Dense linear programming and the occupancy programs built on it.

mod builders;
mod program;
mod simplex;

pub use builders::{
    build_constrained_realization_lp, build_primal_occupancy_lp, extract_policy_from_occupancy, realization_row, ExtractedPolicy,
    ZERO_MASS,
};
pub use program::LinearProgram;
pub use simplex::{solve_lp, solve_lp_with_cap, LpSolution, LpStatus, DEFAULT_ITERATION_CAP, PIVOT_TOL};
