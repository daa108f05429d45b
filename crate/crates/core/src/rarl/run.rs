use std::collections::BTreeMap;
use std::time::Instant;

use crate::abstraction::{tilde_targets, FRelativeOption, Mapping, PolicyOfOptions, Tuple};
use crate::error::{Error, Result};
use crate::mdp::{proof_vi_iterations, truncation_horizon, DeterministicPolicy, Policy, SecondOrderMdp, ValueIteration};
use crate::rarl::{abstract_one_r, tilde_value, Episode, Simulator};
use crate::realizer::{rollout_cap, OnlineConfig, OnlineRealizer, RolloutOutcome};
use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq)]
pub struct RarlConfig {
    pub eps_r: f64,
    pub eps_t: f64,
    /// Allowed option suboptimality.
    pub eta: f64,
    /// Allowed constraint violation of the realizers.
    pub lambda: f64,
    pub eps: f64,
    pub delta: f64,
    /// Backups per replan; defaults to [`proof_vi_iterations`].
    pub vi_iterations: Option<usize>,
    pub max_episodes: usize,
    /// Stop after this many consecutive episodes without exploration.
    pub quiet_episodes: usize,
    pub seed: u64,
    pub n_min: Option<u64>,
    pub n_nu: Option<u64>,
}

impl Default for RarlConfig {
    fn default() -> Self {
        Self {
            eps_r: 0.05,
            eps_t: 0.05,
            eta: 0.05,
            lambda: 0.05,
            eps: 0.05,
            delta: 0.1,
            vi_iterations: None,
            max_episodes: 1_000_000,
            quiet_episodes: 200,
            seed: 0,
            n_min: None,
            n_nu: None,
        }
    }
}

impl RarlConfig {
    pub fn validate(&self) -> Result<()> {
        let unit = [self.eps_r, self.eps_t, self.eta, self.lambda].iter().all(|x| (0.0..=1.0).contains(x));
        let open = [self.eps, self.delta].iter().all(|x| *x > 0.0 && *x < 1.0);
        if !unit || !open {
            return Err(Error::InvalidModel("slacks must lie in [0, 1] and eps, delta in (0, 1)".into()));
        }
        Ok(())
    }

    /// Confidence budget of each realizer instance.
    pub fn delta_instance(&self, num_abstract: usize, num_actions: usize) -> f64 {
        self.delta / (2.0 * (num_abstract * num_abstract * num_actions) as f64)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeLog {
    pub episode: usize,
    /// Undiscounted reward sum under geometric stopping.
    pub ret: f64,
    pub discounted_return: f64,
    /// An unknown tuple was reached within the first `H̄` block switches.
    pub escape: bool,
    pub explored: bool,
    pub known_tuples: usize,
    pub updates: usize,
    /// Abstract value of the current plan at the start distribution.
    pub abstract_value: f64,
    pub seconds: f64,
    pub steps: usize,
}

/// One reward correction applied to the abstract model.
#[derive(Debug, Clone, PartialEq)]
pub struct UpdateLog {
    pub episode: usize,
    pub tuple: Tuple,
    pub before: f64,
    pub after: f64,
    pub target: f64,
}

#[derive(Debug, Clone)]
pub struct RarlOutcome<T> {
    pub policy: PolicyOfOptions<T>,
    pub abstract_policy: DeterministicPolicy,
    pub model: SecondOrderMdp<T>,
    /// Every realized tuple with its option.
    pub options: BTreeMap<Tuple, FRelativeOption<T>>,
    pub episodes: Vec<EpisodeLog>,
    pub updates: Vec<UpdateLog>,
    /// Tuples whose realizer could not meet the occupancy targets on its estimate.
    pub infeasible: Vec<Tuple>,
    /// Stopped by the episode cap before a quiet window.
    pub capped: bool,
    /// Largest per-instance sample requirement of the realizers.
    pub realizer_complexity: u64,
}

impl<T> RarlOutcome<T> {
    pub fn escape_episodes(&self) -> usize {
        self.episodes.iter().filter(|e| e.escape).count()
    }
}

/// Learner state between episodes.
pub struct RarlState<T> {
    pub model: SecondOrderMdp<T>,
    pub options: BTreeMap<Tuple, FRelativeOption<T>>,
    pub realizers: BTreeMap<Tuple, OnlineRealizer<T>>,
    pub plan: DeterministicPolicy,
    pub abstract_value: f64,
    pub episode: usize,
    visits: Vec<u64>,
}

/// Abstract switches that matter for the discounted abstract value.
pub fn abstract_horizon(gamma_bar: f64, eps: f64) -> usize {
    truncation_horizon(gamma_bar, eps)
}

/// `(2 S̄² Ā / ε) (C S̄² + ln(2 S̄² Ā / δ))` for a realizer needing `C` samples.
pub fn sample_complexity_budget(config: &RarlConfig, num_abstract: usize, num_actions: usize, realizer_complexity: f64) -> f64 {
    let k = 2.0 * (num_abstract * num_abstract * num_actions) as f64;
    (k / config.eps) * (realizer_complexity * (num_abstract * num_abstract) as f64 + (k / config.delta).ln())
}

/// Executes an option from `s` until its block is left, the episode ends or the
/// step cap is reached.
pub fn rollout_option<T: Real>(
    episode: &mut Episode<'_, T>,
    mapping: &Mapping,
    option: &FRelativeOption<T>,
    pred: usize,
    s: usize,
) -> Result<RolloutOutcome<T>> {
    let block = option.block;
    if mapping.of(s) != block || option.pred != pred {
        return Err(Error::InitiationMismatch {
            pred,
            block: mapping.of(s),
            want_pred: option.pred,
            want_block: block,
        });
    }
    let states = mapping.block(block);
    let cap = rollout_cap(episode.gamma().as_f64());
    let mut out = RolloutOutcome { prev: s, last: s, steps: 0, reward: T::zero(), left_block: false, hit_cap: false };
    let mut cur = s;
    loop {
        if out.steps >= cap {
            out.hit_cap = true;
            break;
        }
        let i = states.binary_search(&cur).expect("state inside the block");
        let u = episode.uniform();
        let a = option.policy.sample(i, u);
        let Some((next, r)) = episode.step(a) else { break };
        out.steps += 1;
        out.reward += r;
        out.prev = cur;
        out.last = next;
        if mapping.of(next) != block {
            out.left_block = true;
            break;
        }
        cur = next;
    }
    Ok(out)
}

/// Value iteration over entry pairs where an abstract action chosen on entering a
/// block is kept through its self-loops, as the option realizing it would be:
/// `Q(p, b, a) = Ṽ + Σ_{b' ≠ b} reach(b') V(b, b')` with `reach = h̃ / (1-γ)`.
/// Same-block rows of `q` stay zero with action 0.
pub fn option_value_iteration<T: Real>(model: &SecondOrderMdp<T>, iterations: usize) -> Result<ValueIteration<T>> {
    let (n, na) = (model.num_states(), model.num_actions());
    let g = model.gamma_bar();
    let mut backups = Vec::new();
    for p in 0..=n {
        for b in (0..n).filter(|&b| b != p) {
            for a in 0..na {
                let t = tilde_targets(model, Tuple::new(p, b, a), g)?;
                let reach: Vec<T> = t.h.iter().map(|&h| h / (T::one() - g)).collect();
                backups.push((model.pair_index(p, b) * na + a, b, t.v, reach));
            }
        }
    }
    let mut q = vec![T::zero(); model.num_pairs() * na];
    let mut v = vec![T::zero(); n * n];
    let mut deltas = Vec::with_capacity(iterations);
    for _ in 0..iterations {
        let mut delta = T::zero();
        let mut next = q.clone();
        for (k, b, value, reach) in &backups {
            let ev: T = reach.iter().enumerate().filter(|&(c, _)| c != *b).map(|(c, &r)| r * v[b * n + c]).sum();
            let x = *value + ev;
            delta = delta.max((x - q[*k]).abs());
            next[*k] = x;
        }
        q = next;
        for p in 0..n {
            for b in (0..n).filter(|&b| b != p) {
                let i = model.pair_index(p, b);
                v[p * n + b] = q[i * na..(i + 1) * na].iter().copied().fold(T::neg_infinity(), T::max);
            }
        }
        deltas.push(delta);
    }
    let policy = DeterministicPolicy::new(q.chunks(na).map(|row| (0..na).fold(0, |best, a| if row[a] > row[best] { a } else { best })).collect());
    Ok(ValueIteration { q, policy, deltas })
}

fn plan<T: Real>(model: &SecondOrderMdp<T>, iterations: usize) -> Result<(DeterministicPolicy, f64)> {
    let vi = option_value_iteration(model, iterations)?;
    let (n, na) = (model.num_states(), model.num_actions());
    let value = (0..n)
        .map(|b| {
            let i = model.pair_index(model.star(), b);
            let best = vi.q[i * na..(i + 1) * na].iter().copied().fold(T::neg_infinity(), T::max);
            model.start()[b].as_f64() * best.as_f64()
        })
        .sum();
    Ok((vi.policy, value))
}

impl<T: Real> RarlState<T> {
    pub fn new(model: SecondOrderMdp<T>, num_ground: usize, num_actions: usize, vi_iterations: usize) -> Result<Self> {
        let (plan, abstract_value) = plan(&model, vi_iterations)?;
        Ok(Self {
            model,
            options: BTreeMap::new(),
            realizers: BTreeMap::new(),
            plan,
            abstract_value,
            episode: 0,
            visits: vec![0; num_ground * num_actions],
        })
    }

    /// Least-visited actions until the episode ends.
    fn conclude(&mut self, episode: &mut Episode<'_, T>) {
        let na = episode.num_actions();
        while !episode.is_over() {
            let s = episode.state();
            let row = &self.visits[s * na..(s + 1) * na];
            let a = (0..na).min_by_key(|&a| (row[a], a)).unwrap_or(0);
            self.visits[s * na + a] += 1;
            episode.step(a);
        }
    }
}

/// The learning loop. The simulator is the only access to the ground model;
/// `mapping` and the initial abstract model are given.
pub fn run<T: Real>(sim: &mut dyn Simulator<T>, mapping: &Mapping, abs: SecondOrderMdp<T>, config: &RarlConfig) -> Result<RarlOutcome<T>> {
    config.validate()?;
    if mapping.num_states() != sim.num_states() || mapping.num_abstract() != abs.num_states() {
        return Err(Error::Dimension("mapping does not match the simulator or the abstract model".into()));
    }
    let clock = Instant::now();
    let gamma_t = sim.gamma();
    let gamma = gamma_t.as_f64();
    let (nb, nab, na) = (abs.num_states(), abs.num_actions(), sim.num_actions());
    let iterations = config.vi_iterations.unwrap_or_else(|| proof_vi_iterations(gamma, config.eps));
    let switches_limit = abstract_horizon(abs.gamma_bar().as_f64(), config.eps);
    let online = OnlineConfig {
        eps_r: config.eps_r,
        eps_t: config.eps_t,
        eta: config.eta,
        lambda: config.lambda,
        delta_i: config.delta_instance(nb, nab),
        n_min: config.n_min,
        n_nu: config.n_nu,
    };
    let value_cap = 1.0 / (1.0 - gamma);
    let mut state = RarlState::new(abs, sim.num_states(), na, iterations)?;
    let mut episodes = Vec::new();
    let mut updates = Vec::new();
    let mut infeasible = Vec::new();
    let mut quiet = 0;
    let mut capped = true;
    for t in 0..config.max_episodes {
        state.episode = t;
        let mut ep = Episode::discounted(sim);
        let mut pred = nb;
        let mut s = ep.state();
        let mut switches = 0;
        let (mut escape, mut explored, mut replan) = (false, false, false);
        while !ep.is_over() {
            let b = mapping.of(s);
            let tuple = Tuple::new(pred, b, state.plan.action(state.model.pair_index(pred, b)));
            let out = if let Some(option) = state.options.get(&tuple) {
                rollout_option(&mut ep, mapping, option, pred, s)?
            } else {
                explored = true;
                escape = switches < switches_limit;
                if let std::collections::btree_map::Entry::Vacant(e) = state.realizers.entry(tuple) {
                    e.insert(OnlineRealizer::new(tuple, mapping, na, gamma_t, online)?);
                }
                let realizer = state.realizers.get_mut(&tuple).expect("inserted above");
                realizer.rollout_control(&mut ep, s)?;
                if realizer.enough() {
                    let targets = tilde_targets(&state.model, tuple, gamma_t)?;
                    let got = realizer.get(&targets)?;
                    if !got.feasible {
                        infeasible.push(tuple);
                    }
                    state.options.insert(tuple, got.result.option.clone());
                    let v_opt = (got.result.value.as_f64() + config.eps_r / (1.0 - gamma) + config.eta).min(value_cap);
                    let before = tilde_value(&state.model, tuple)?.as_f64();
                    if before > v_opt {
                        match abstract_one_r(&state.model, tuple, T::lit(v_opt)) {
                            Ok(model) => {
                                let after = tilde_value(&model, tuple)?.as_f64();
                                updates.push(UpdateLog { episode: t, tuple, before, after, target: v_opt });
                                state.model = model;
                                replan = true;
                            }
                            Err(Error::DegenerateSelfLoop { .. }) => {}
                            Err(e) => return Err(e),
                        }
                    }
                }
                state.conclude(&mut ep);
                break;
            };
            if out.left_block {
                pred = b;
                s = out.last;
                switches += 1;
            } else {
                s = ep.state();
            }
        }
        episodes.push(EpisodeLog {
            episode: t,
            ret: ep.total_reward().as_f64(),
            discounted_return: ep.discounted_reward().as_f64(),
            escape,
            explored,
            known_tuples: state.options.len(),
            updates: updates.len(),
            abstract_value: state.abstract_value,
            seconds: clock.elapsed().as_secs_f64(),
            steps: ep.steps(),
        });
        if replan {
            let (p, v) = plan(&state.model, iterations)?;
            state.plan = p;
            state.abstract_value = v;
        }
        quiet = if explored { 0 } else { quiet + 1 };
        if quiet >= config.quiet_episodes {
            capped = false;
            break;
        }
    }
    let mut policy = PolicyOfOptions::new(nb);
    for p in 0..=nb {
        for b in (0..nb).filter(|&b| b != p) {
            let tuple = Tuple::new(p, b, state.plan.action(state.model.pair_index(p, b)));
            if let Some(o) = state.options.get(&tuple) {
                policy.insert(o.clone())?;
            }
        }
    }
    let realizer_complexity = state.realizers.values().map(|r| r.sample_complexity()).max().unwrap_or(0);
    Ok(RarlOutcome {
        policy,
        abstract_policy: state.plan,
        model: state.model,
        options: state.options,
        episodes,
        updates,
        infeasible,
        capped,
        realizer_complexity,
    })
}
