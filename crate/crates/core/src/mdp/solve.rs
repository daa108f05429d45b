use crate::error::{Error, Result};
use crate::linalg::{check_residual, Lu};
use crate::mdp::{DeterministicPolicy, GroundMdp, Policy, SecondOrderMdp};
use crate::scalar::{argmax, Real};

/// `(I - γ P_π, r_π)` for a policy on a ground model.
pub(crate) fn policy_system<T: Real, P: Policy<T> + ?Sized>(mdp: &GroundMdp<T>, policy: &P) -> Result<(Vec<T>, Vec<T>)> {
    let n = mdp.num_states();
    if policy.num_states() != n {
        return Err(Error::Dimension(format!("policy covers {} states, model has {n}", policy.num_states())));
    }
    let g = mdp.gamma();
    let mut a = vec![T::zero(); n * n];
    let mut r = vec![T::zero(); n];
    for s in 0..n {
        a[s * n + s] = T::one();
        policy.visit(s, &mut |act, p| {
            r[s] += p * mdp.reward(s, act);
            for (s2, &q) in mdp.row(s, act).iter().enumerate() {
                if q != T::zero() {
                    a[s * n + s2] -= g * p * q;
                }
            }
        });
    }
    Ok((a, r))
}

/// Exact value of a policy from every state.
pub fn evaluate_policy<T: Real, P: Policy<T> + ?Sized>(mdp: &GroundMdp<T>, policy: &P) -> Result<Vec<T>> {
    let (a, r) = policy_system(mdp, policy)?;
    let lu = Lu::factor(&a, mdp.num_states())?;
    let v = lu.solve(&r)?;
    check_residual(&lu, &v, &r)?;
    Ok(v)
}

/// One-step lookahead `Q(s, a) = R(s, a) + γ Σ T(s'|s, a) V(s')`.
pub fn q_from_values<T: Real>(mdp: &GroundMdp<T>, v: &[T]) -> Vec<T> {
    let (n, na) = (mdp.num_states(), mdp.num_actions());
    let mut q = vec![T::zero(); n * na];
    for s in 0..n {
        for a in 0..na {
            let ev: T = mdp.row(s, a).iter().zip(v).map(|(&p, &x)| p * x).sum();
            q[s * na + a] = mdp.reward(s, a) + mdp.gamma() * ev;
        }
    }
    q
}

/// Output of a fixed number of Bellman optimality backups.
#[derive(Debug, Clone)]
pub struct ValueIteration<T> {
    /// `q[state * A + a]`; for second-order models the state is a pair index.
    pub q: Vec<T>,
    pub policy: DeterministicPolicy,
    /// Sup-norm change of `q` at every backup.
    pub deltas: Vec<T>,
}

fn greedy<T: Real>(q: &[T], na: usize) -> DeterministicPolicy {
    DeterministicPolicy::new(q.chunks(na).map(argmax).collect())
}

pub fn value_iteration<T: Real>(mdp: &GroundMdp<T>, iterations: usize) -> ValueIteration<T> {
    let (n, na) = (mdp.num_states(), mdp.num_actions());
    let mut q = vec![T::zero(); n * na];
    let mut v = vec![T::zero(); n];
    let mut deltas = Vec::with_capacity(iterations);
    for _ in 0..iterations {
        let next = q_from_values(mdp, &v);
        let d = next.iter().zip(&q).fold(T::zero(), |m, (&x, &y)| m.max((x - y).abs()));
        deltas.push(d);
        q = next;
        for s in 0..n {
            v[s] = q[s * na..(s + 1) * na].iter().copied().fold(T::neg_infinity(), T::max);
        }
    }
    ValueIteration { policy: greedy(&q, na), q, deltas }
}

/// Howard policy iteration; returns exact optimal values and an optimal policy.
pub fn policy_iteration<T: Real>(mdp: &GroundMdp<T>) -> Result<(Vec<T>, DeterministicPolicy)> {
    let (n, na) = (mdp.num_states(), mdp.num_actions());
    let mut pol = DeterministicPolicy::constant(n, 0);
    for _ in 0..10_000 {
        let v = evaluate_policy(mdp, &pol)?;
        let q = q_from_values(mdp, &v);
        let mut changed = false;
        for s in 0..n {
            let cur = pol.action(s);
            let best = argmax(&q[s * na..(s + 1) * na]);
            if q[s * na + best] > q[s * na + cur] + T::tol(1e-12) * (T::one() + v[s].abs()) {
                pol.set(s, best);
                changed = true;
            }
        }
        if !changed {
            return Ok((v, pol));
        }
    }
    Err(Error::InvalidModel("policy iteration did not converge".into()))
}

/// Iteration count of the learning loop: `ceil(ln(2 / ((1-γ) ε)) / (1-γ))`.
pub fn listing_vi_iterations(gamma: f64, eps: f64) -> usize {
    ((2.0 / ((1.0 - gamma) * eps)).ln() / (1.0 - gamma)).ceil().max(1.0) as usize
}

/// Iteration count guaranteeing an `ε`-optimal greedy policy: `ceil(ln(2 / ((1-γ)² ε)) / (1-γ))`.
pub fn proof_vi_iterations(gamma: f64, eps: f64) -> usize {
    ((2.0 / ((1.0 - gamma).powi(2) * eps)).ln() / (1.0 - gamma)).ceil().max(1.0) as usize
}

/// Steps after which discounted values are within `eps`: `(1/(1-γ)) ln(1/(ε(1-γ)))`.
pub fn truncation_horizon(gamma: f64, eps: f64) -> usize {
    ((1.0 / (eps * (1.0 - gamma))).ln() / (1.0 - gamma)).ceil().max(1.0) as usize
}

/// Bellman optimality backups on `(pred, state)` pairs, start pairs included.
pub fn value_iteration_2mdp<T: Real>(abs: &SecondOrderMdp<T>, iterations: usize) -> ValueIteration<T> {
    let (n, na) = (abs.num_states(), abs.num_actions());
    let pairs = abs.num_pairs();
    let mut q = vec![T::zero(); pairs * na];
    // best value of each non-start pair (s, s')
    let mut v = vec![T::zero(); n * n];
    let mut deltas = Vec::with_capacity(iterations);
    for _ in 0..iterations {
        let mut next = vec![T::zero(); pairs * na];
        for p in 0..=n {
            for s in 0..n {
                let pi = abs.pair_index(p, s);
                for a in 0..na {
                    let ev: T = abs.row(p, s, a).iter().enumerate().map(|(s2, &t)| t * v[s * n + s2]).sum();
                    next[pi * na + a] = abs.reward(p, s, a) + abs.gamma_bar() * ev;
                }
            }
        }
        let d = next.iter().zip(&q).fold(T::zero(), |m, (&x, &y)| m.max((x - y).abs()));
        deltas.push(d);
        q = next;
        for i in 0..n * n {
            v[i] = q[i * na..(i + 1) * na].iter().copied().fold(T::neg_infinity(), T::max);
        }
    }
    ValueIteration { policy: greedy(&q, na), q, deltas }
}

/// Exact value of a pair policy on every `(pred, state)` pair.
pub fn evaluate_policy_2mdp<T: Real>(abs: &SecondOrderMdp<T>, pol: &DeterministicPolicy) -> Result<Vec<T>> {
    let n = abs.num_states();
    let m = abs.num_pairs();
    if pol.actions().len() != m {
        return Err(Error::Dimension(format!("pair policy of length {}, want {m}", pol.actions().len())));
    }
    let g = abs.gamma_bar();
    let mut a = vec![T::zero(); m * m];
    let mut r = vec![T::zero(); m];
    for p in 0..=n {
        for s in 0..n {
            let i = abs.pair_index(p, s);
            let act = pol.action(i);
            a[i * m + i] += T::one();
            r[i] = abs.reward(p, s, act);
            for (s2, &t) in abs.row(p, s, act).iter().enumerate() {
                a[i * m + abs.pair_index(s, s2)] -= g * t;
            }
        }
    }
    let lu = Lu::factor(&a, m)?;
    let v = lu.solve(&r)?;
    check_residual(&lu, &v, &r)?;
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bandit() -> GroundMdp<f64> {
        GroundMdp::<f64>::new(1, 2, vec![1.0, 1.0], vec![0.2, 0.8], 0.5, vec![1.0]).unwrap()
    }

    #[test]
    fn absorbing_reward_one() {
        let m = GroundMdp::<f64>::new(1, 1, vec![1.0], vec![1.0], 0.9, vec![1.0]).unwrap();
        let v = evaluate_policy(&m, &DeterministicPolicy::constant(1, 0)).unwrap();
        assert!((v[0] - 10.0).abs() < 1e-12);
    }

    #[test]
    fn bandit_greedy_after_one_backup() {
        let vi = value_iteration(&bandit(), 1);
        assert_eq!(vi.policy.action(0), 1);
        assert_eq!(vi.q, vec![0.2, 0.8]);
    }

    #[test]
    fn bandit_optimal_q() {
        // Q*(a) = r(a) + γ V* with V* = 0.8 / (1 - 0.5)
        let vi = value_iteration(&bandit(), 200);
        assert!((vi.q[0] - 1.0).abs() < 1e-12);
        assert!((vi.q[1] - 1.6).abs() < 1e-12);
        // each constant policy repeated forever
        let m = bandit();
        let v0 = evaluate_policy(&m, &DeterministicPolicy::constant(1, 0)).unwrap();
        let v1 = evaluate_policy(&m, &DeterministicPolicy::constant(1, 1)).unwrap();
        assert!((v0[0] - 0.4).abs() < 1e-12 && (v1[0] - 1.6).abs() < 1e-12);
    }

    #[test]
    fn zero_reward_vi_picks_action_zero() {
        let m = GroundMdp::<f64>::new(2, 3, vec![0.5; 12], vec![0.0; 6], 0.7, vec![0.5, 0.5]).unwrap();
        let vi = value_iteration(&m, 5);
        assert!(vi.q.iter().all(|&x| x == 0.0));
        assert_eq!(vi.policy.actions(), &[0, 0]);
    }

    #[test]
    fn iteration_counts() {
        assert!(proof_vi_iterations(0.9, 0.01) > listing_vi_iterations(0.9, 0.01));
        assert_eq!(listing_vi_iterations(0.5, 1.0), ((4.0f64).ln() / 0.5).ceil() as usize);
    }

    #[test]
    fn self_loop_abstract_value() {
        let m = SecondOrderMdp::<f64>::first_order(1, 1, &[1.0], &[1.0], 0.95, vec![1.0]).unwrap();
        let v = evaluate_policy_2mdp(&m, &DeterministicPolicy::constant(2, 0)).unwrap();
        assert!((v[0] - 20.0).abs() < 1e-9 && (v[1] - 20.0).abs() < 1e-9);
    }
}
