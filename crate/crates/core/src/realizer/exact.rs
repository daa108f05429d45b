use crate::abstraction::{option_profile, AbstractionPair, BlockMdp, FRelativeOption, Targets, Tuple};
use crate::error::{Error, Result};
use crate::lp::{build_constrained_realization_lp, extract_policy_from_occupancy, solve_lp, LinearProgram, LpStatus};
use crate::mdp::{AnyPolicy, StochasticPolicy};
use crate::scalar::Real;

/// Constrained search for an option on one block.
#[derive(Debug, Clone, PartialEq)]
pub struct RealizationProblem<T> {
    pub block: BlockMdp<T>,
    pub pred: usize,
    /// Entry distribution over local block-model states.
    pub nu: Vec<T>,
    pub targets: Targets<T>,
    pub eps_r: T,
    pub eps_t: T,
    /// Allowed suboptimality of the returned option.
    pub eta: T,
    /// Allowed constraint violation, in value units.
    pub lambda: T,
}

impl<T: Real> RealizationProblem<T> {
    pub fn new(block: BlockMdp<T>, pred: usize, nu: Vec<T>, targets: Targets<T>, eps_r: T, eps_t: T) -> Result<Self> {
        let p = Self { block, pred, nu, targets, eps_r, eps_t, eta: T::zero(), lambda: T::zero() };
        p.validate()?;
        Ok(p)
    }

    /// Problem for `tuple` with `nu` given over ground states.
    pub fn from_pair(pair: &AbstractionPair<T>, tuple: Tuple, nu: &[T], eps_r: T, eps_t: T) -> Result<Self> {
        let entries = pair.entries(tuple.pred, tuple.block);
        if let Some(s) = (0..nu.len()).find(|&s| nu[s] > T::zero() && !entries.contains(&s)) {
            return Err(Error::SupportOutsideEntries(s));
        }
        let block = pair.block(tuple.block).clone();
        let local = block.localize(nu);
        Self::new(block, tuple.pred, local, pair.targets(tuple)?, eps_r, eps_t)
    }

    pub fn with_softness(mut self, eta: T, lambda: T) -> Result<Self> {
        self.eta = eta;
        self.lambda = lambda;
        self.validate()?;
        Ok(self)
    }

    fn validate(&self) -> Result<()> {
        let unit = |x: T| x >= T::zero() && x <= T::one();
        if ![self.eps_r, self.eps_t, self.eta, self.lambda].into_iter().all(unit) {
            return Err(Error::InvalidModel("realization slacks must lie in [0, 1]".into()));
        }
        if self.nu.len() != self.block.num_local() {
            return Err(Error::Dimension(format!("entry distribution of length {}", self.nu.len())));
        }
        if let Some(j) = (self.block.num_inner()..self.nu.len()).find(|&j| self.nu[j] > T::zero()) {
            return Err(Error::SupportOutsideEntries(self.block.ground_states().get(j).copied().unwrap_or(usize::MAX)));
        }
        crate::mdp::check_distribution(&self.nu, "entry distribution")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RealizationResult<T> {
    pub option: FRelativeOption<T>,
    /// Exact value of the option in the block model, averaged over the entry distribution.
    pub value: T,
    /// Averaged block occupancy, sink last.
    pub occupancy: Vec<T>,
    /// `(block, h(block) - (h̃(block) - εT))` for every other block.
    pub slacks: Vec<(usize, T)>,
    /// `(1-γ)(Ṽ - value)`.
    pub value_gap: T,
    pub stochastic: bool,
    /// Block states without occupancy that received the uniform policy.
    pub uniform_states: Vec<usize>,
}

impl<T: Real> RealizationResult<T> {
    pub fn min_slack(&self) -> T {
        self.slacks.iter().map(|&(_, s)| s).fold(T::infinity(), T::min)
    }

    /// Largest `h̃ - h` over the other blocks; zero without other blocks.
    pub fn occupancy_gap(&self, eps_t: T) -> T {
        if self.slacks.is_empty() {
            T::zero()
        } else {
            eps_t - self.min_slack()
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Realization<T> {
    Feasible(RealizationResult<T>),
    /// No option meets the occupancy targets; `closest` minimizes the worst gap.
    Infeasible { max_gap: T, closest: RealizationResult<T> },
}

impl<T: Real> Realization<T> {
    pub fn result(&self) -> &RealizationResult<T> {
        match self {
            Realization::Feasible(r) => r,
            Realization::Infeasible { closest, .. } => closest,
        }
    }

    pub fn into_result(self) -> RealizationResult<T> {
        match self {
            Realization::Feasible(r) => r,
            Realization::Infeasible { closest, .. } => closest,
        }
    }

    pub fn is_feasible(&self) -> bool {
        matches!(self, Realization::Feasible(_))
    }
}

/// Best option meeting the occupancy targets, from the constrained occupancy program.
pub fn realize_exact<T: Real>(problem: &RealizationProblem<T>) -> Result<Realization<T>> {
    let block = &problem.block;
    let lp = build_constrained_realization_lp(block, &problem.nu, &problem.targets.h, problem.eps_t)?;
    let sol = solve_lp(&lp)?;
    match sol.status {
        LpStatus::Optimal => Ok(Realization::Feasible(evaluate(problem, &sol.primal)?)),
        LpStatus::Unbounded => Err(Error::InvalidModel("occupancy program is unbounded".into())),
        LpStatus::Infeasible => {
            let closest = min_gap(problem)?;
            Ok(Realization::Infeasible { max_gap: closest.occupancy_gap(problem.eps_t), closest })
        }
    }
}

/// Option minimizing the worst occupancy shortfall, ignoring rewards.
fn min_gap<T: Real>(problem: &RealizationProblem<T>) -> Result<RealizationResult<T>> {
    let block = &problem.block;
    let base = build_constrained_realization_lp(block, &problem.nu, &problem.targets.h, T::zero())?;
    let nvars = base.num_vars();
    let mut objective = vec![T::zero(); nvars + 1];
    objective[nvars] = -T::one();
    let mut lp = LinearProgram::new(objective);
    for (row, &b) in base.eq_rows.iter().zip(&base.eq_rhs) {
        let mut r = row.clone();
        r.push(T::zero());
        lp.add_eq(r, b);
    }
    for (row, &h) in base.ge_rows.iter().zip(&base.ge_rhs) {
        let mut r = row.clone();
        r.push(T::one());
        lp.add_ge(r, h);
    }
    lp.lower[nvars] = -T::one();
    let sol = solve_lp(&lp)?;
    if !sol.is_optimal() {
        return Err(Error::InvalidModel("gap program has no optimum".into()));
    }
    evaluate(problem, &sol.primal[..nvars])
}

fn evaluate<T: Real>(problem: &RealizationProblem<T>, occupancy: &[T]) -> Result<RealizationResult<T>> {
    let block = &problem.block;
    let na = block.num_actions();
    let inner = block.num_inner();
    let extracted = extract_policy_from_occupancy(&occupancy[..inner * na], inner, na)?;
    let probs: Vec<T> = (0..inner).flat_map(|s| extracted.policy.row(s).to_vec()).collect();
    let stoch = StochasticPolicy::new(na, probs)?;
    let (policy, stochastic) = match stoch.as_deterministic() {
        Some(d) => (AnyPolicy::Deterministic(d), false),
        None => (AnyPolicy::Stochastic(stoch), true),
    };
    let option = FRelativeOption::new(problem.pred, block.block(), policy);
    let profile = option_profile(block, &option.local_policy(block)?)?;
    let mut value = T::zero();
    let mut h = vec![T::zero(); block.num_blocks() + 1];
    for i in 0..inner {
        let w = problem.nu[i];
        if w > T::zero() {
            value += w * profile.values[i];
            h.iter_mut().zip(profile.h(i)).for_each(|(acc, &x)| *acc += w * x);
        }
    }
    let slacks = (0..block.num_blocks())
        .filter(|&b| b != block.block())
        .map(|b| (b, h[b] - (problem.targets.h[b] - problem.eps_t)))
        .collect();
    let value_gap = (T::one() - block.gamma()) * (problem.targets.v - value);
    let uniform_states = extracted.uniform_states.iter().map(|&i| block.ground_states()[i]).collect();
    Ok(RealizationResult { option, value, occupancy: h, slacks, value_gap, stochastic, uniform_states })
}

/// Option from the realization program with the entry distribution uniform over
/// the tuple's entries (all block states when there are none).
pub fn lp_candidate<T: Real>(pair: &AbstractionPair<T>, tuple: Tuple, eps_t: T) -> Result<FRelativeOption<T>> {
    let entries = pair.entries(tuple.pred, tuple.block);
    let support: Vec<usize> = if entries.is_empty() { pair.mapping().block(tuple.block).to_vec() } else { entries.to_vec() };
    let mut nu = vec![T::zero(); pair.ground().num_states()];
    let w = T::one() / T::lit(support.len() as f64);
    support.iter().for_each(|&s| nu[s] = w);
    let block = pair.block(tuple.block).clone();
    let local = block.localize(&nu);
    let problem = RealizationProblem::new(block, tuple.pred, local, pair.targets(tuple)?, T::zero(), eps_t.max(T::zero()).min(T::one()))?;
    Ok(realize_exact(&problem)?.into_result().option)
}
