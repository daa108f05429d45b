use crate::error::{Error, Result};
use crate::mdp::ground::check_rewards;
use crate::mdp::{evaluate_policy, GroundMdp, Policy};
use crate::scalar::Real;

/// MDP with lower-bounded auxiliary value constraints.
#[derive(Debug, Clone, PartialEq)]
pub struct CmdpSpec<T> {
    pub base: GroundMdp<T>,
    pub auxiliary_rewards: Vec<Vec<T>>,
    pub lower_limits: Vec<T>,
}

impl<T: Real> CmdpSpec<T> {
    pub fn new(base: GroundMdp<T>, auxiliary_rewards: Vec<Vec<T>>, lower_limits: Vec<T>) -> Result<Self> {
        if auxiliary_rewards.len() != lower_limits.len() {
            return Err(Error::Dimension(format!(
                "{} auxiliary rewards for {} limits",
                auxiliary_rewards.len(),
                lower_limits.len()
            )));
        }
        let n = base.num_states() * base.num_actions();
        for r in &auxiliary_rewards {
            if r.len() != n {
                return Err(Error::Dimension("auxiliary reward table".into()));
            }
            check_rewards(r)?;
        }
        check_rewards(&lower_limits)?;
        Ok(Self { base, auxiliary_rewards, lower_limits })
    }

    /// Start-distribution values of every auxiliary reward.
    pub fn constraint_values<P: Policy<T>>(&self, policy: &P) -> Result<Vec<T>> {
        self.auxiliary_rewards
            .iter()
            .map(|r| {
                let m = self.base.with_rewards(r.clone())?;
                let v = evaluate_policy(&m, policy)?;
                Ok(m.start().iter().zip(&v).map(|(&p, &x)| p * x).sum())
            })
            .collect()
    }

    /// Whether every constraint holds up to a violation of `slack`.
    pub fn is_feasible<P: Policy<T>>(&self, policy: &P, slack: T) -> Result<bool> {
        let vals = self.constraint_values(policy)?;
        Ok(vals.iter().zip(&self.lower_limits).all(|(&v, &l)| v >= l - slack))
    }
}
