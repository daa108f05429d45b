use std::collections::BTreeMap;

use crate::abstraction::{BlockMdp, Mapping, Targets, Tuple};
use crate::error::{Error, Result};
use crate::mdp::GroundMdp;
use crate::rarl::Episode;
use crate::realizer::{realize_exact, Realization, RealizationProblem, RealizationResult};
use crate::scalar::Real;

/// Upper limit on the per-pair sample requirement.
pub const N_MIN_CAP: u64 = 10_000;

/// Hoeffding sample count per in-block state-action pair.
pub fn default_n_min(block_size: usize, num_actions: usize, lambda: f64, gamma: f64, delta_i: f64) -> u64 {
    let width = lambda * (1.0 - gamma) / block_size as f64;
    let n = ((2.0 * block_size as f64 * num_actions as f64 / delta_i).ln() / (2.0 * width * width)).ceil();
    if n.is_finite() {
        (n.max(1.0) as u64).min(N_MIN_CAP)
    } else {
        N_MIN_CAP
    }
}

/// Hoeffding count of entry samples for the entry distribution.
pub fn default_n_nu(lambda: f64, delta_i: f64) -> u64 {
    let n = ((2.0 / delta_i).ln() / (2.0 * lambda * lambda)).ceil();
    if n.is_finite() {
        n.max(1.0) as u64
    } else {
        N_MIN_CAP
    }
}

/// Steps after which the discounted tail is below `1e-3` of the total.
pub fn rollout_cap(gamma: f64) -> usize {
    ((1.0 / ((1.0 - gamma) * 1e-3)).ln() / (1.0 - gamma)).ceil() as usize
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OnlineConfig {
    pub eps_r: f64,
    pub eps_t: f64,
    pub eta: f64,
    pub lambda: f64,
    /// Confidence budget of this instance.
    pub delta_i: f64,
    pub n_min: Option<u64>,
    pub n_nu: Option<u64>,
}

/// How a rollout inside a block ended.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RolloutOutcome<T> {
    /// Last state inside the block.
    pub prev: usize,
    /// State reached by the last step; outside the block when `left_block`.
    pub last: usize,
    pub steps: usize,
    pub reward: T,
    pub left_block: bool,
    /// Stopped by the per-rollout step cap.
    pub hit_cap: bool,
}

impl<T> RolloutOutcome<T> {
    pub fn truncated(&self) -> bool {
        !self.left_block
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OnlineResult<T> {
    pub result: RealizationResult<T>,
    /// Occupancy slack that produced the option.
    pub eps_t_used: T,
    pub feasible: bool,
}

/// Model-based realizer for one abstract tuple: explores the block with
/// least-visited actions, then solves the realization program on the estimate.
#[derive(Debug, Clone)]
pub struct OnlineRealizer<T> {
    tuple: Tuple,
    map: Vec<usize>,
    num_blocks: usize,
    block_states: Vec<usize>,
    local: Vec<Option<usize>>,
    num_actions: usize,
    gamma: T,
    counts: Vec<u64>,
    successors: Vec<BTreeMap<usize, u64>>,
    reward_sums: Vec<T>,
    entries: BTreeMap<usize, u64>,
    entry_total: u64,
    n_min: u64,
    n_nu: u64,
    step_cap: usize,
    config: OnlineConfig,
    truncations: u64,
    guide: Vec<usize>,
    guide_stale: bool,
}

impl<T: Real> OnlineRealizer<T> {
    pub fn new(tuple: Tuple, mapping: &Mapping, num_actions: usize, gamma: T, config: OnlineConfig) -> Result<Self> {
        if tuple.block >= mapping.num_abstract() || tuple.pred > mapping.num_abstract() {
            return Err(Error::Dimension(format!("tuple ({}, {}) out of range", tuple.pred, tuple.block)));
        }
        if tuple.pred == tuple.block {
            return Err(Error::InvalidTuple { pred: tuple.pred, block: tuple.block });
        }
        let block_states = mapping.block(tuple.block).to_vec();
        let mut local = vec![None; mapping.num_states()];
        for (i, &s) in block_states.iter().enumerate() {
            local[s] = Some(i);
        }
        let n = block_states.len() * num_actions;
        let g = gamma.as_f64();
        let n_min = config.n_min.unwrap_or_else(|| default_n_min(block_states.len(), num_actions, config.lambda, g, config.delta_i));
        let n_nu = config.n_nu.unwrap_or_else(|| default_n_nu(config.lambda, config.delta_i));
        Ok(Self {
            tuple,
            map: mapping.as_slice().to_vec(),
            num_blocks: mapping.num_abstract(),
            block_states,
            local,
            num_actions,
            gamma,
            counts: vec![0; n],
            successors: vec![BTreeMap::new(); n],
            reward_sums: vec![T::zero(); n],
            entries: BTreeMap::new(),
            entry_total: 0,
            n_min,
            n_nu,
            step_cap: rollout_cap(g),
            config,
            truncations: 0,
            guide: vec![usize::MAX; mapping.block(tuple.block).len()],
            guide_stale: true,
        })
    }

    pub fn tuple(&self) -> Tuple {
        self.tuple
    }

    pub fn n_min(&self) -> u64 {
        self.n_min
    }

    pub fn n_nu(&self) -> u64 {
        self.n_nu
    }

    pub fn step_cap(&self) -> usize {
        self.step_cap
    }

    pub fn truncations(&self) -> u64 {
        self.truncations
    }

    /// Rollouts needed in the worst case before `enough` can hold.
    pub fn sample_complexity(&self) -> u64 {
        self.n_nu.max(self.n_min * self.counts.len() as u64)
    }

    pub fn count(&self, s: usize, a: usize) -> u64 {
        self.local[s].map_or(0, |i| self.counts[i * self.num_actions + a])
    }

    /// Observed entry states with their counts.
    pub fn entry_counts(&self) -> &BTreeMap<usize, u64> {
        &self.entries
    }

    pub fn record_entry(&mut self, s: usize) -> Result<()> {
        self.inner(s)?;
        *self.entries.entry(s).or_insert(0) += 1;
        self.entry_total += 1;
        Ok(())
    }

    pub fn record(&mut self, s: usize, a: usize, next: usize, reward: T) -> Result<()> {
        let k = self.inner(s)? * self.num_actions + a;
        self.counts[k] += 1;
        if self.counts[k] == self.n_min {
            self.guide_stale = true;
        }
        let seen = self.successors[k].entry(next).or_insert(0);
        if *seen == 0 {
            self.guide_stale = true;
        }
        *seen += 1;
        self.reward_sums[k] += reward;
        Ok(())
    }

    fn inner(&self, s: usize) -> Result<usize> {
        self.local.get(s).copied().flatten().ok_or(Error::OutsideBlock { state: s, block: self.tuple.block })
    }

    fn least_visited(&self, i: usize) -> usize {
        let row = &self.counts[i * self.num_actions..(i + 1) * self.num_actions];
        (0..self.num_actions).min_by_key(|&a| (row[a], a)).unwrap_or(0)
    }

    fn undersampled(&self, i: usize) -> bool {
        self.counts[i * self.num_actions..(i + 1) * self.num_actions].iter().any(|&c| c < self.n_min)
    }

    /// Greedy actions towards the nearest under-sampled state on the observed
    /// transitions.
    fn refresh_guide(&mut self) {
        let (inner, na) = (self.block_states.len(), self.num_actions);
        let g = self.gamma.as_f64();
        let open: Vec<bool> = (0..inner).map(|i| self.undersampled(i)).collect();
        let mut u: Vec<f64> = open.iter().map(|&o| if o { 1.0 } else { 0.0 }).collect();
        for _ in 0..4 * inner + 4 {
            let mut change = 0.0f64;
            for i in 0..inner {
                if open[i] {
                    continue;
                }
                let mut best = 0.0f64;
                self.guide[i] = usize::MAX;
                for a in 0..na {
                    let k = i * na + a;
                    let c = self.counts[k] as f64;
                    let q: f64 = self.successors[k].iter().filter_map(|(&next, &m)| self.local[next].map(|j| m as f64 / c * u[j])).sum();
                    if g * q > best {
                        best = g * q;
                        self.guide[i] = a;
                    }
                }
                change = change.max((best - u[i]).abs());
                u[i] = best;
            }
            if change < 1e-12 {
                break;
            }
        }
        self.guide_stale = false;
    }

    fn explore_action(&mut self, i: usize) -> usize {
        if self.undersampled(i) {
            return self.least_visited(i);
        }
        if self.guide_stale {
            self.refresh_guide();
        }
        match self.guide[i] {
            usize::MAX => self.least_visited(i),
            a => a,
        }
    }

    /// Explores from entry state `s` until the block is left, the episode ends
    /// or the step cap is reached. Under-sampled states take their least-visited
    /// action; other states head for the nearest under-sampled one.
    pub fn rollout_control(&mut self, episode: &mut Episode<'_, T>, s: usize) -> Result<RolloutOutcome<T>> {
        self.record_entry(s)?;
        let mut out = RolloutOutcome { prev: s, last: s, steps: 0, reward: T::zero(), left_block: false, hit_cap: false };
        let mut cur = s;
        loop {
            if out.steps >= self.step_cap {
                out.hit_cap = true;
                break;
            }
            let i = self.inner(cur)?;
            let a = self.explore_action(i);
            let Some((next, r)) = episode.step(a) else { break };
            self.record(cur, a, next, r)?;
            out.steps += 1;
            out.reward += r;
            out.prev = cur;
            out.last = next;
            if self.map[next] != self.tuple.block {
                out.left_block = true;
                break;
            }
            cur = next;
        }
        if !out.left_block {
            self.truncations += 1;
        }
        Ok(out)
    }

    /// Block states reachable from observed entries through observed transitions.
    fn reachable(&self) -> Vec<usize> {
        let mut seen = vec![false; self.block_states.len()];
        let mut stack: Vec<usize> = self.entries.keys().filter_map(|&s| self.local[s]).collect();
        stack.iter().for_each(|&i| seen[i] = true);
        while let Some(i) = stack.pop() {
            for a in 0..self.num_actions {
                for &next in self.successors[i * self.num_actions + a].keys() {
                    if let Some(j) = self.local[next] {
                        if !seen[j] {
                            seen[j] = true;
                            stack.push(j);
                        }
                    }
                }
            }
        }
        (0..seen.len()).filter(|&i| seen[i]).collect()
    }

    pub fn enough(&self) -> bool {
        if self.entry_total < self.n_nu {
            return false;
        }
        self.reachable().into_iter().all(|i| (0..self.num_actions).all(|a| self.counts[i * self.num_actions + a] >= self.n_min))
    }

    /// Empirical block model and entry distribution from the collected samples.
    pub fn empirical_block(&self) -> Result<(BlockMdp<T>, Vec<T>)> {
        let na = self.num_actions;
        let inner = self.block_states.len();
        let mut exits: Vec<usize> = self
            .successors
            .iter()
            .flat_map(|m| m.keys().copied())
            .filter(|&s| self.map[s] != self.tuple.block)
            .collect();
        exits.sort_unstable();
        exits.dedup();
        let mut ground = self.block_states.clone();
        ground.extend_from_slice(&exits);
        let n = ground.len() + 1;
        let sink = n - 1;
        let index = |s: usize| self.local[s].or_else(|| exits.binary_search(&s).ok().map(|k| inner + k));
        let mut t = vec![T::zero(); n * na * n];
        let mut r = vec![T::zero(); n * na];
        for i in 0..inner {
            for a in 0..na {
                let k = i * na + a;
                let row = (i * na + a) * n;
                if self.counts[k] == 0 {
                    t[row + i] = T::one();
                    continue;
                }
                let c = T::lit(self.counts[k] as f64);
                for (&next, &m) in &self.successors[k] {
                    let j = index(next).expect("successor is inside or an exit");
                    t[row + j] += T::lit(m as f64) / c;
                }
                r[k] = self.reward_sums[k] / c;
            }
        }
        for j in inner..n {
            for a in 0..na {
                t[(j * na + a) * n + sink] = T::one();
            }
        }
        // counts may leave rounding in the row sums
        for row in t.chunks_mut(n) {
            let total: T = row.iter().copied().sum();
            row.iter_mut().for_each(|x| *x /= total);
        }
        let mut start = vec![T::zero(); n];
        start[0] = T::one();
        let mdp = GroundMdp::new(n, na, t, r, self.gamma, start)?;
        let labels = ground.iter().map(|&s| self.map[s]).collect();
        let block = BlockMdp::from_local(self.tuple.block, self.num_blocks, inner, ground, mdp, labels)?;
        let mut nu = vec![T::zero(); n];
        let total = T::lit(self.entry_total.max(1) as f64);
        for (&s, &m) in &self.entries {
            nu[self.local[s].expect("entries are block states")] = T::lit(m as f64) / total;
        }
        Ok((block, nu))
    }

    /// Option and value estimate from the empirical model. The occupancy slack is
    /// tried tightened, exact and relaxed by `λ(1-γ)`; if all fail the option with
    /// the smallest shortfall is returned as infeasible.
    pub fn get(&self, targets: &Targets<T>) -> Result<OnlineResult<T>> {
        if !self.enough() {
            return Err(Error::NotReady);
        }
        let (block, nu) = self.empirical_block()?;
        let c = &self.config;
        let margin = c.lambda * (1.0 - self.gamma.as_f64());
        let mut last = None;
        for eps_t in [c.eps_t - margin, c.eps_t, c.eps_t + margin] {
            let eps_t = T::lit(eps_t.clamp(0.0, 1.0));
            let problem = RealizationProblem::new(block.clone(), self.tuple.pred, nu.clone(), targets.clone(), T::lit(c.eps_r), eps_t)?
                .with_softness(T::lit(c.eta), T::lit(c.lambda))?;
            match realize_exact(&problem)? {
                Realization::Feasible(result) => return Ok(OnlineResult { result, eps_t_used: eps_t, feasible: true }),
                Realization::Infeasible { closest, .. } => last = Some((closest, eps_t)),
            }
        }
        let (result, eps_t_used) = last.expect("three attempts");
        Ok(OnlineResult { result, eps_t_used, feasible: false })
    }
}
