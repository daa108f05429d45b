use crate::error::{Error, Result};
use crate::scalar::{sum, Real};

/// Finite MDP with dense `(s, a) -> s'` tables.
///
/// The start state `s⋆` is virtual: its index is `num_states` and its only
/// transition is the start distribution. It never appears in any table.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundMdp<T> {
    num_states: usize,
    num_actions: usize,
    transition: Vec<T>,
    reward: Vec<T>,
    gamma: T,
    start: Vec<T>,
}

pub(crate) fn check_distribution<T: Real>(p: &[T], what: &str) -> Result<()> {
    if p.iter().any(|&x| !(x >= T::zero())) {
        return Err(Error::InvalidModel(format!("{what} has a negative or NaN entry")));
    }
    let s = sum(p);
    if (s - T::one()).abs() > T::tol(1e-12) {
        return Err(Error::InvalidModel(format!("{what} sums to {s}, not 1")));
    }
    Ok(())
}

pub(crate) fn check_gamma<T: Real>(g: T) -> Result<()> {
    if !(g > T::zero() && g < T::one()) {
        return Err(Error::InvalidModel(format!("discount {g} outside (0, 1)")));
    }
    Ok(())
}

pub(crate) fn check_rewards<T: Real>(r: &[T]) -> Result<()> {
    if let Some(x) = r.iter().find(|&&x| !(x >= T::zero() && x <= T::one())) {
        return Err(Error::InvalidModel(format!("reward {x} outside [0, 1]")));
    }
    Ok(())
}

impl<T: Real> GroundMdp<T> {
    /// `transition[(s * A + a) * S + s']`, `reward[s * A + a]`.
    pub fn new(
        num_states: usize,
        num_actions: usize,
        transition: Vec<T>,
        reward: Vec<T>,
        gamma: T,
        start: Vec<T>,
    ) -> Result<Self> {
        let (s, a) = (num_states, num_actions);
        if s == 0 || a == 0 {
            return Err(Error::InvalidModel("empty state or action set".into()));
        }
        if transition.len() != s * a * s || reward.len() != s * a || start.len() != s {
            return Err(Error::Dimension(format!(
                "tables of length {}/{}/{} for {s} states and {a} actions",
                transition.len(),
                reward.len(),
                start.len()
            )));
        }
        check_gamma(gamma)?;
        check_rewards(&reward)?;
        for st in 0..s {
            for ac in 0..a {
                let i = (st * a + ac) * s;
                check_distribution(&transition[i..i + s], &format!("transition row ({st}, {ac})"))?;
            }
        }
        check_distribution(&start, "start distribution")?;
        Ok(Self { num_states, num_actions, transition, reward, gamma, start })
    }

    pub fn num_states(&self) -> usize {
        self.num_states
    }

    pub fn num_actions(&self) -> usize {
        self.num_actions
    }

    pub fn gamma(&self) -> T {
        self.gamma
    }

    pub fn start(&self) -> &[T] {
        &self.start
    }

    /// Virtual index of the dummy start state.
    pub fn dummy_start(&self) -> usize {
        self.num_states
    }

    pub fn row(&self, s: usize, a: usize) -> &[T] {
        let i = (s * self.num_actions + a) * self.num_states;
        &self.transition[i..i + self.num_states]
    }

    pub fn prob(&self, s: usize, a: usize, next: usize) -> T {
        self.transition[(s * self.num_actions + a) * self.num_states + next]
    }

    pub fn reward(&self, s: usize, a: usize) -> T {
        self.reward[s * self.num_actions + a]
    }

    pub fn rewards(&self) -> &[T] {
        &self.reward
    }

    pub fn transitions(&self) -> &[T] {
        &self.transition
    }

    pub fn with_rewards(&self, reward: Vec<T>) -> Result<Self> {
        Self::new(self.num_states, self.num_actions, self.transition.clone(), reward, self.gamma, self.start.clone())
    }

    pub fn with_start(&self, start: Vec<T>) -> Result<Self> {
        Self::new(self.num_states, self.num_actions, self.transition.clone(), self.reward.clone(), self.gamma, start)
    }

    pub fn with_gamma(&self, gamma: T) -> Result<Self> {
        Self::new(self.num_states, self.num_actions, self.transition.clone(), self.reward.clone(), gamma, self.start.clone())
    }

    /// Converts every table to another scalar type.
    pub fn cast<U: Real>(&self) -> GroundMdp<U> {
        let c = |v: &[T]| v.iter().map(|x| U::lit(x.as_f64())).collect::<Vec<U>>();
        GroundMdp {
            num_states: self.num_states,
            num_actions: self.num_actions,
            transition: c(&self.transition),
            reward: c(&self.reward),
            gamma: U::lit(self.gamma.as_f64()),
            start: c(&self.start),
        }
    }
}
