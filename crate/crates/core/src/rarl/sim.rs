use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::mdp::GroundMdp;
use crate::scalar::Real;

/// Online access to a ground model: reset, step and a shared random source.
pub trait Simulator<T> {
    fn num_states(&self) -> usize;
    fn num_actions(&self) -> usize;
    fn gamma(&self) -> T;
    fn reset(&mut self) -> usize;
    fn state(&self) -> usize;
    /// Applies `action`; returns the next state and the reward of the step.
    fn step(&mut self, action: usize) -> (usize, T);
    /// Uniform draw in `[0, 1)` for policy sampling and episode stopping.
    fn uniform(&mut self) -> f64;
}

/// Samples a tabular model with a seeded generator.
#[derive(Debug, Clone)]
pub struct MdpSimulator<T> {
    mdp: GroundMdp<T>,
    rng: ChaCha8Rng,
    state: usize,
    steps: u64,
}

impl<T: Real> MdpSimulator<T> {
    pub fn new(mdp: GroundMdp<T>, seed: u64) -> Self {
        let mut sim = Self { mdp, rng: ChaCha8Rng::seed_from_u64(seed), state: 0, steps: 0 };
        sim.reset();
        sim
    }

    pub fn mdp(&self) -> &GroundMdp<T> {
        &self.mdp
    }

    /// Total transitions sampled so far.
    pub fn steps(&self) -> u64 {
        self.steps
    }
}

fn draw<T: Real>(rng: &mut ChaCha8Rng, probs: &[T]) -> usize {
    let u = rng.gen::<f64>();
    let mut acc = 0.0;
    let mut last = 0;
    for (i, p) in probs.iter().enumerate() {
        let p = p.as_f64();
        if p > 0.0 {
            acc += p;
            last = i;
            if u < acc {
                return i;
            }
        }
    }
    last
}

impl<T: Real> Simulator<T> for MdpSimulator<T> {
    fn num_states(&self) -> usize {
        self.mdp.num_states()
    }

    fn num_actions(&self) -> usize {
        self.mdp.num_actions()
    }

    fn gamma(&self) -> T {
        self.mdp.gamma()
    }

    fn reset(&mut self) -> usize {
        self.state = draw(&mut self.rng, self.mdp.start());
        self.state
    }

    fn state(&self) -> usize {
        self.state
    }

    fn step(&mut self, action: usize) -> (usize, T) {
        let s = self.state;
        let reward = self.mdp.reward(s, action);
        self.state = draw(&mut self.rng, self.mdp.row(s, action));
        self.steps += 1;
        (self.state, reward)
    }

    fn uniform(&mut self) -> f64 {
        self.rng.gen()
    }
}

/// One episode under geometric stopping: after every step the episode continues
/// with probability `continue_prob`, and never beyond `cap` steps.
pub struct Episode<'a, T> {
    sim: &'a mut dyn Simulator<T>,
    continue_prob: f64,
    cap: usize,
    steps: usize,
    total: T,
    discounted: T,
    discount: T,
    over: bool,
    capped: bool,
}

impl<'a, T: Real> Episode<'a, T> {
    /// Resets the simulator and starts counting.
    pub fn start(sim: &'a mut dyn Simulator<T>, continue_prob: f64, cap: usize) -> Self {
        sim.reset();
        let over = cap == 0;
        Self { sim, continue_prob, cap, steps: 0, total: T::zero(), discounted: T::zero(), discount: T::one(), over, capped: over }
    }

    /// Default episode for a discounted model: stop with probability `1-γ`, cap `50/(1-γ)`.
    pub fn discounted(sim: &'a mut dyn Simulator<T>) -> Self {
        let g = sim.gamma().as_f64();
        let cap = (50.0 / (1.0 - g)).ceil() as usize;
        Self::start(sim, g, cap)
    }

    pub fn state(&self) -> usize {
        self.sim.state()
    }

    pub fn is_over(&self) -> bool {
        self.over
    }

    /// The episode ended at the step cap rather than by stopping.
    pub fn capped(&self) -> bool {
        self.capped
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    /// Undiscounted reward sum; an unbiased estimate of the discounted value.
    pub fn total_reward(&self) -> T {
        self.total
    }

    pub fn discounted_reward(&self) -> T {
        self.discounted
    }

    pub fn uniform(&mut self) -> f64 {
        self.sim.uniform()
    }

    pub fn num_actions(&self) -> usize {
        self.sim.num_actions()
    }

    pub fn gamma(&self) -> T {
        self.sim.gamma()
    }

    /// One transition, or `None` once the episode is over.
    pub fn step(&mut self, action: usize) -> Option<(usize, T)> {
        if self.over {
            return None;
        }
        let (next, reward) = self.sim.step(action);
        self.steps += 1;
        self.total += reward;
        self.discounted += self.discount * reward;
        self.discount *= self.sim.gamma();
        if self.steps >= self.cap {
            self.over = true;
            self.capped = true;
        } else if self.continue_prob < 1.0 && self.sim.uniform() >= self.continue_prob {
            self.over = true;
        }
        Some((next, reward))
    }
}
