use crate::error::{Error, Result};
use crate::mdp::ground::check_distribution;
use crate::scalar::Real;

/// Markov policy over a finite index set of states.
pub trait Policy<T: Real> {
    /// Number of states the policy is defined on.
    fn num_states(&self) -> usize;

    fn prob(&self, s: usize, a: usize) -> T;

    /// Calls `f(a, p)` for every action with positive probability.
    fn visit(&self, s: usize, f: &mut dyn FnMut(usize, T));

    /// Draws an action from a uniform number `u` in `[0, 1)`.
    fn sample(&self, s: usize, u: f64) -> usize {
        let mut acc = 0.0;
        let mut chosen = None;
        let mut last = 0;
        self.visit(s, &mut |a, p| {
            last = a;
            acc += p.as_f64();
            if chosen.is_none() && u < acc {
                chosen = Some(a);
            }
        });
        chosen.unwrap_or(last)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct DeterministicPolicy {
    actions: Vec<usize>,
}

impl DeterministicPolicy {
    pub fn new(actions: Vec<usize>) -> Self {
        Self { actions }
    }

    pub fn constant(num_states: usize, action: usize) -> Self {
        Self { actions: vec![action; num_states] }
    }

    pub fn action(&self, s: usize) -> usize {
        self.actions[s]
    }

    pub fn actions(&self) -> &[usize] {
        &self.actions
    }

    pub fn set(&mut self, s: usize, a: usize) {
        self.actions[s] = a;
    }
}

impl<T: Real> Policy<T> for DeterministicPolicy {
    fn num_states(&self) -> usize {
        self.actions.len()
    }

    fn prob(&self, s: usize, a: usize) -> T {
        if self.actions[s] == a {
            T::one()
        } else {
            T::zero()
        }
    }

    fn visit(&self, s: usize, f: &mut dyn FnMut(usize, T)) {
        f(self.actions[s], T::one())
    }

    fn sample(&self, s: usize, _u: f64) -> usize {
        self.actions[s]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StochasticPolicy<T> {
    num_actions: usize,
    probs: Vec<T>,
}

impl<T: Real> StochasticPolicy<T> {
    /// `probs[s * num_actions + a]`; each row must sum to 1.
    pub fn new(num_actions: usize, probs: Vec<T>) -> Result<Self> {
        if num_actions == 0 || !probs.len().is_multiple_of(num_actions) {
            return Err(Error::Dimension(format!("{} probabilities for {num_actions} actions", probs.len())));
        }
        for (s, row) in probs.chunks(num_actions).enumerate() {
            check_distribution(row, &format!("policy row {s}"))?;
        }
        Ok(Self { num_actions, probs })
    }

    pub fn uniform(num_states: usize, num_actions: usize) -> Self {
        let p = T::one() / T::lit(num_actions as f64);
        Self { num_actions, probs: vec![p; num_states * num_actions] }
    }

    pub fn from_deterministic(pol: &DeterministicPolicy, num_actions: usize) -> Self {
        let mut probs = vec![T::zero(); pol.actions().len() * num_actions];
        for (s, &a) in pol.actions().iter().enumerate() {
            probs[s * num_actions + a] = T::one();
        }
        Self { num_actions, probs }
    }

    pub fn num_actions(&self) -> usize {
        self.num_actions
    }

    pub fn row(&self, s: usize) -> &[T] {
        &self.probs[s * self.num_actions..(s + 1) * self.num_actions]
    }

    /// `Some` when every row puts all mass on one action.
    pub fn as_deterministic(&self) -> Option<DeterministicPolicy> {
        let mut actions = Vec::with_capacity(self.probs.len() / self.num_actions);
        for row in self.probs.chunks(self.num_actions) {
            let mut nz = row.iter().enumerate().filter(|(_, &p)| p > T::zero());
            let (a, _) = nz.next()?;
            if nz.next().is_some() {
                return None;
            }
            actions.push(a);
        }
        Some(DeterministicPolicy::new(actions))
    }
}

impl<T: Real> Policy<T> for StochasticPolicy<T> {
    fn num_states(&self) -> usize {
        self.probs.len() / self.num_actions
    }

    fn prob(&self, s: usize, a: usize) -> T {
        self.probs[s * self.num_actions + a]
    }

    fn visit(&self, s: usize, f: &mut dyn FnMut(usize, T)) {
        for (a, &p) in self.row(s).iter().enumerate() {
            if p > T::zero() {
                f(a, p);
            }
        }
    }
}

/// Either kind of policy, tagged so callers can report which one was used.
#[derive(Debug, Clone, PartialEq)]
pub enum AnyPolicy<T> {
    Deterministic(DeterministicPolicy),
    Stochastic(StochasticPolicy<T>),
}

impl<T: Real> AnyPolicy<T> {
    pub fn is_stochastic(&self) -> bool {
        matches!(self, AnyPolicy::Stochastic(_))
    }
}

impl<T: Real> Policy<T> for AnyPolicy<T> {
    fn num_states(&self) -> usize {
        match self {
            AnyPolicy::Deterministic(p) => Policy::<T>::num_states(p),
            AnyPolicy::Stochastic(p) => p.num_states(),
        }
    }

    fn prob(&self, s: usize, a: usize) -> T {
        match self {
            AnyPolicy::Deterministic(p) => p.prob(s, a),
            AnyPolicy::Stochastic(p) => p.prob(s, a),
        }
    }

    fn visit(&self, s: usize, f: &mut dyn FnMut(usize, T)) {
        match self {
            AnyPolicy::Deterministic(p) => p.visit(s, f),
            AnyPolicy::Stochastic(p) => p.visit(s, f),
        }
    }

    fn sample(&self, s: usize, u: f64) -> usize {
        match self {
            AnyPolicy::Deterministic(p) => Policy::<T>::sample(p, s, u),
            AnyPolicy::Stochastic(p) => p.sample(s, u),
        }
    }
}

impl<T> From<DeterministicPolicy> for AnyPolicy<T> {
    fn from(p: DeterministicPolicy) -> Self {
        AnyPolicy::Deterministic(p)
    }
}

impl<T> From<StochasticPolicy<T>> for AnyPolicy<T> {
    fn from(p: StochasticPolicy<T>) -> Self {
        AnyPolicy::Stochastic(p)
    }
}
