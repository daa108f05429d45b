use crate::error::{Error, Result};
use crate::mdp::ground::{check_distribution, check_gamma, check_rewards};
use crate::mdp::GroundMdp;
use crate::scalar::Real;

/// Abstract decision process whose dynamics condition on the last two states.
///
/// Rows are addressed by `(pred, state, action)`. Predecessor slots run over
/// `0..=num_states`; slot `num_states` stands for the start marker `⋆`.
#[derive(Debug, Clone, PartialEq)]
pub struct SecondOrderMdp<T> {
    num_states: usize,
    num_actions: usize,
    transition: Vec<T>,
    reward: Vec<T>,
    gamma_bar: T,
    start: Vec<T>,
}

impl<T: Real> SecondOrderMdp<T> {
    /// `transition[row * S + s']` and `reward[row]` with `row = (pred * S + state) * A + action`.
    pub fn new(
        num_states: usize,
        num_actions: usize,
        transition: Vec<T>,
        reward: Vec<T>,
        gamma_bar: T,
        start: Vec<T>,
    ) -> Result<Self> {
        let (s, a) = (num_states, num_actions);
        if s == 0 || a == 0 {
            return Err(Error::InvalidModel("empty abstract state or action set".into()));
        }
        let rows = (s + 1) * s * a;
        if transition.len() != rows * s || reward.len() != rows || start.len() != s {
            return Err(Error::Dimension(format!(
                "abstract tables of length {}/{}/{} for {s} states and {a} actions",
                transition.len(),
                reward.len(),
                start.len()
            )));
        }
        check_gamma(gamma_bar)?;
        check_rewards(&reward)?;
        for r in 0..rows {
            check_distribution(&transition[r * s..(r + 1) * s], &format!("abstract transition row {r}"))?;
        }
        check_distribution(&start, "abstract start distribution")?;
        Ok(Self { num_states, num_actions, transition, reward, gamma_bar, start })
    }

    /// Builds a model whose rows ignore the predecessor.
    ///
    /// `transition[(s * A + a) * S + s']`, `reward[s * A + a]`.
    pub fn first_order(
        num_states: usize,
        num_actions: usize,
        transition: &[T],
        reward: &[T],
        gamma_bar: T,
        start: Vec<T>,
    ) -> Result<Self> {
        let (s, a) = (num_states, num_actions);
        if transition.len() != s * a * s || reward.len() != s * a {
            return Err(Error::Dimension("first-order tables".into()));
        }
        let mut t = Vec::with_capacity((s + 1) * s * a * s);
        let mut r = Vec::with_capacity((s + 1) * s * a);
        for _p in 0..=s {
            t.extend_from_slice(transition);
            r.extend_from_slice(reward);
        }
        Self::new(s, a, t, r, gamma_bar, start)
    }

    /// The ground model read as an abstraction of itself.
    pub fn from_ground(mdp: &GroundMdp<T>) -> Self {
        Self::first_order(
            mdp.num_states(),
            mdp.num_actions(),
            mdp.transitions(),
            mdp.rewards(),
            mdp.gamma(),
            mdp.start().to_vec(),
        )
        .expect("ground model is valid")
    }

    pub fn num_states(&self) -> usize {
        self.num_states
    }

    pub fn num_actions(&self) -> usize {
        self.num_actions
    }

    pub fn gamma_bar(&self) -> T {
        self.gamma_bar
    }

    pub fn start(&self) -> &[T] {
        &self.start
    }

    /// Predecessor slot of the start marker.
    pub fn star(&self) -> usize {
        self.num_states
    }

    /// Number of `(pred, state)` pairs including start pairs.
    pub fn num_pairs(&self) -> usize {
        (self.num_states + 1) * self.num_states
    }

    pub fn pair_index(&self, pred: usize, state: usize) -> usize {
        pred * self.num_states + state
    }

    fn row_index(&self, pred: usize, state: usize, action: usize) -> usize {
        (pred * self.num_states + state) * self.num_actions + action
    }

    pub fn row(&self, pred: usize, state: usize, action: usize) -> &[T] {
        let i = self.row_index(pred, state, action) * self.num_states;
        &self.transition[i..i + self.num_states]
    }

    pub fn prob(&self, pred: usize, state: usize, action: usize, next: usize) -> T {
        self.row(pred, state, action)[next]
    }

    pub fn reward(&self, pred: usize, state: usize, action: usize) -> T {
        self.reward[self.row_index(pred, state, action)]
    }

    pub fn rewards(&self) -> &[T] {
        &self.reward
    }

    pub fn transitions(&self) -> &[T] {
        &self.transition
    }

    pub fn set_reward(&mut self, pred: usize, state: usize, action: usize, value: T) -> Result<()> {
        check_rewards(&[value])?;
        let i = self.row_index(pred, state, action);
        self.reward[i] = value;
        Ok(())
    }

    pub fn with_rewards(&self, reward: Vec<T>) -> Result<Self> {
        Self::new(self.num_states, self.num_actions, self.transition.clone(), reward, self.gamma_bar, self.start.clone())
    }

    /// True when every row is independent of the predecessor slot.
    pub fn is_first_order(&self) -> bool {
        let block = self.num_states * self.num_actions;
        (1..=self.num_states).all(|p| {
            self.reward[p * block..(p + 1) * block] == self.reward[..block]
                && self.transition[p * block * self.num_states..(p + 1) * block * self.num_states]
                    == self.transition[..block * self.num_states]
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_order_replicates_rows() {
        let m = SecondOrderMdp::<f64>::first_order(2, 1, &[0.5, 0.5, 0.0, 1.0], &[0.0, 1.0], 0.9, vec![1.0, 0.0]).unwrap();
        assert!(m.is_first_order());
        assert_eq!(m.row(2, 0, 0), &[0.5, 0.5]);
        assert_eq!(m.reward(1, 1, 0), 1.0);
        assert_eq!(m.star(), 2);
        assert_eq!(m.num_pairs(), 6);
    }
}
