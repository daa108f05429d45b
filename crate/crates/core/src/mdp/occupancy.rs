use crate::error::{Error, Result};
use crate::linalg::Lu;
use crate::mdp::solve::policy_system;
use crate::mdp::{GroundMdp, Policy};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OccupancyKind {
    State,
    StateAction,
}

/// Where the discounted visitation starts.
#[derive(Debug, Clone, PartialEq)]
pub enum Source<T> {
    State(usize),
    Distribution(Vec<T>),
    /// The model's start distribution (transition out of the dummy start).
    Start,
}

/// Normalized discounted visitation `(1-γ) Σ_t γ^t Pr(s_t = ·)`.
#[derive(Debug, Clone, PartialEq)]
pub struct OccupancyMeasure<T> {
    kind: OccupancyKind,
    values: Vec<T>,
    num_states: usize,
    num_actions: usize,
    gamma: T,
    source: Source<T>,
}

impl<T: Real> OccupancyMeasure<T> {
    pub fn kind(&self) -> OccupancyKind {
        self.kind
    }

    /// `values[s]` or `values[s * A + a]` depending on the kind.
    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn source(&self) -> &Source<T> {
        &self.source
    }

    pub fn gamma(&self) -> T {
        self.gamma
    }

    pub fn total(&self) -> T {
        self.values.iter().copied().sum()
    }

    pub fn state_marginal(&self) -> OccupancyMeasure<T> {
        match self.kind {
            OccupancyKind::State => self.clone(),
            OccupancyKind::StateAction => OccupancyMeasure {
                kind: OccupancyKind::State,
                values: self.values.chunks(self.num_actions).map(|r| r.iter().copied().sum()).collect(),
                num_states: self.num_states,
                num_actions: self.num_actions,
                gamma: self.gamma,
                source: self.source.clone(),
            },
        }
    }
}

fn source_vector<T: Real>(mdp: &GroundMdp<T>, source: &Source<T>) -> Result<Vec<T>> {
    let n = mdp.num_states();
    match source {
        Source::State(s) if *s < n => {
            let mut v = vec![T::zero(); n];
            v[*s] = T::one();
            Ok(v)
        }
        Source::State(s) => Err(Error::Dimension(format!("source state {s} outside {n} states"))),
        Source::Distribution(d) if d.len() == n => Ok(d.clone()),
        Source::Distribution(d) => Err(Error::Dimension(format!("source distribution of length {}", d.len()))),
        Source::Start => Ok(mdp.start().to_vec()),
    }
}

/// State-action occupancy measure of `policy` from `source`.
pub fn occupancy<T: Real, P: Policy<T> + ?Sized>(
    mdp: &GroundMdp<T>,
    policy: &P,
    source: Source<T>,
) -> Result<OccupancyMeasure<T>> {
    let nu = source_vector(mdp, &source)?;
    let (a, _) = policy_system(mdp, policy)?;
    let n = mdp.num_states();
    let na = mdp.num_actions();
    let lu = Lu::factor(&a, n)?;
    let scale = T::one() - mdp.gamma();
    let rhs: Vec<T> = nu.iter().map(|&x| x * scale).collect();
    let d = lu.solve_transpose(&rhs)?;
    let mut values = vec![T::zero(); n * na];
    for s in 0..n {
        policy.visit(s, &mut |act, p| values[s * na + act] = p * d[s].max(T::zero()));
    }
    Ok(OccupancyMeasure { kind: OccupancyKind::StateAction, values, num_states: n, num_actions: na, gamma: mdp.gamma(), source })
}

/// State occupancies from each listed start state, sharing one factorization.
///
/// Row `i` is `d(·|starts[i])`.
pub fn state_occupancies<T: Real, P: Policy<T> + ?Sized>(
    mdp: &GroundMdp<T>,
    policy: &P,
    starts: &[usize],
) -> Result<Vec<Vec<T>>> {
    let (a, _) = policy_system(mdp, policy)?;
    let n = mdp.num_states();
    let lu = Lu::factor(&a, n)?;
    let scale = T::one() - mdp.gamma();
    starts
        .iter()
        .map(|&s| {
            if s >= n {
                return Err(Error::Dimension(format!("source state {s} outside {n} states")));
            }
            let mut rhs = vec![T::zero(); n];
            rhs[s] = scale;
            let d = lu.solve_transpose(&rhs)?;
            Ok(d)
        })
        .collect()
}

/// `⟨d, R⟩ / (1-γ)`.
pub fn value_from_occupancy<T: Real>(d: &OccupancyMeasure<T>, rewards: &[T]) -> Result<T> {
    if d.kind != OccupancyKind::StateAction {
        return Err(Error::KindMismatch { expected: "state-action" });
    }
    if rewards.len() != d.values.len() {
        return Err(Error::Dimension(format!("{} rewards for {} occupancy entries", rewards.len(), d.values.len())));
    }
    let dot: T = d.values.iter().zip(rewards).map(|(&x, &r)| x * r).sum();
    Ok(dot / (T::one() - d.gamma))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mdp::DeterministicPolicy;

    #[test]
    fn two_chain_half_half() {
        let m = GroundMdp::<f64>::new(2, 1, vec![0.0, 1.0, 0.0, 1.0], vec![0.0, 0.0], 0.5, vec![1.0, 0.0]).unwrap();
        let d = occupancy(&m, &DeterministicPolicy::constant(2, 0), Source::State(0)).unwrap();
        assert!((d.values()[0] - 0.5).abs() < 1e-15);
        assert!((d.values()[1] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn kind_mismatch() {
        let m = GroundMdp::<f64>::new(1, 1, vec![1.0], vec![1.0], 0.5, vec![1.0]).unwrap();
        let d = occupancy(&m, &DeterministicPolicy::constant(1, 0), Source::Start).unwrap();
        assert_eq!(d.total(), 1.0);
        let e = value_from_occupancy(&d.state_marginal(), &[1.0]).unwrap_err();
        assert!(matches!(e, Error::KindMismatch { .. }));
        assert!((value_from_occupancy(&d, &[1.0]).unwrap() - 2.0).abs() < 1e-15);
    }
}
