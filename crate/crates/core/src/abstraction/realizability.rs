use crate::abstraction::{option_profile, AbstractionPair, FRelativeOption, OptionEnumerator, OptionProfile, Targets, Tuple};
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Numerical slack applied on top of the requested realizability tolerances.
pub const CHECK_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct EntryGap<T> {
    pub state: usize,
    /// `(1-γ)(Ṽ - V^o(s))`.
    pub value_gap: T,
    /// `max_{s̄' ≠ s̄} h̃(s̄') - h^o(s̄'|s)`, zero when there is no other block.
    pub occupancy_gap: T,
    pub worst_block: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TupleReport<T> {
    pub tuple: Tuple,
    pub entries: Vec<EntryGap<T>>,
    pub value_gap: T,
    pub occupancy_gap: T,
    pub realizable: bool,
    /// No entry states: realizable by default.
    pub vacuous: bool,
}

impl<T: Real> TupleReport<T> {
    /// Entry state with the largest combined excess over the tolerances.
    pub fn worst_entry(&self, eps_r: T, eps_t: T) -> Option<&EntryGap<T>> {
        self.entries.iter().max_by(|a, b| {
            let ea = (a.value_gap - eps_r).max(a.occupancy_gap - eps_t);
            let eb = (b.value_gap - eps_r).max(b.occupancy_gap - eps_t);
            ea.partial_cmp(&eb).unwrap_or(std::cmp::Ordering::Equal)
        })
    }

    /// `max(value_gap - εR, occupancy_gap - εT)`; non-positive iff realizable up to slack.
    pub fn excess(&self, eps_r: T, eps_t: T) -> T {
        (self.value_gap - eps_r).max(self.occupancy_gap - eps_t)
    }
}

fn check_initiation<T: Real>(tuple: Tuple, option: &FRelativeOption<T>) -> Result<()> {
    if option.pred != tuple.pred || option.block != tuple.block {
        return Err(Error::InitiationMismatch {
            pred: option.pred,
            block: option.block,
            want_pred: tuple.pred,
            want_block: tuple.block,
        });
    }
    Ok(())
}

fn gaps<T: Real>(targets: &Targets<T>, block: usize, gamma: T, value: T, h: &[T]) -> (T, T, Option<usize>) {
    let vgap = (T::one() - gamma) * (targets.v - value);
    let mut ogap = T::neg_infinity();
    let mut worst = None;
    for (b, &ht) in targets.h.iter().enumerate() {
        if b == block {
            continue;
        }
        let g = ht - h[b];
        if g > ogap {
            ogap = g;
            worst = Some(b);
        }
    }
    if worst.is_none() {
        ogap = T::zero();
    }
    (vgap, ogap, worst)
}

pub(crate) fn report_from_profile<T: Real>(
    pair: &AbstractionPair<T>,
    tuple: Tuple,
    targets: &Targets<T>,
    profile: &OptionProfile<T>,
    eps_r: T,
    eps_t: T,
) -> Result<TupleReport<T>> {
    let block = pair.block(tuple.block);
    let gamma = pair.ground().gamma();
    let mut entries = Vec::new();
    for &s in pair.entries(tuple.pred, tuple.block) {
        let i = block.inner_index(s)?;
        let (value_gap, occupancy_gap, worst_block) = gaps(targets, tuple.block, gamma, profile.values[i], profile.h(i));
        entries.push(EntryGap { state: s, value_gap, occupancy_gap, worst_block });
    }
    let vacuous = entries.is_empty();
    let value_gap = entries.iter().map(|e| e.value_gap).fold(T::neg_infinity(), T::max);
    let occupancy_gap = entries.iter().map(|e| e.occupancy_gap).fold(T::neg_infinity(), T::max);
    let (value_gap, occupancy_gap) = if vacuous { (T::zero(), T::zero()) } else { (value_gap, occupancy_gap) };
    let slack = T::tol(CHECK_SLACK);
    let realizable = vacuous || (value_gap <= eps_r + slack && occupancy_gap <= eps_t + slack);
    Ok(TupleReport { tuple, entries, value_gap, occupancy_gap, realizable, vacuous })
}

/// Per-entry realizability gaps of one option for one tuple.
pub fn check_realizable_tuple<T: Real>(
    pair: &AbstractionPair<T>,
    tuple: Tuple,
    option: &FRelativeOption<T>,
    eps_r: T,
    eps_t: T,
) -> Result<TupleReport<T>> {
    check_initiation(tuple, option)?;
    let targets = pair.targets(tuple)?;
    let block = pair.block(tuple.block);
    let profile = option_profile(block, &option.local_policy(block)?)?;
    report_from_profile(pair, tuple, &targets, &profile, eps_r, eps_t)
}

/// Gaps of an option against targets, averaged over an entry distribution.
#[derive(Debug, Clone, PartialEq)]
pub struct DistributionReport<T> {
    pub value: T,
    /// Averaged block occupancy, sink last.
    pub h: Vec<T>,
    pub value_gap: T,
    pub occupancy_gap: T,
    pub realizable: bool,
}

/// Realizability from a distribution `nu` over ground states, supported on the entries.
pub fn check_realizable_from<T: Real>(
    pair: &AbstractionPair<T>,
    tuple: Tuple,
    nu: &[T],
    option: &FRelativeOption<T>,
    eps_r: T,
    eps_t: T,
) -> Result<DistributionReport<T>> {
    check_initiation(tuple, option)?;
    if nu.len() != pair.ground().num_states() {
        return Err(Error::Dimension(format!("entry distribution of length {}", nu.len())));
    }
    let entries = pair.entries(tuple.pred, tuple.block);
    if let Some(s) = (0..nu.len()).find(|&s| nu[s] > T::zero() && !entries.contains(&s)) {
        return Err(Error::SupportOutsideEntries(s));
    }
    let targets = pair.targets(tuple)?;
    let block = pair.block(tuple.block);
    let profile = option_profile(block, &option.local_policy(block)?)?;
    let mut value = T::zero();
    let mut h = vec![T::zero(); pair.abs().num_states() + 1];
    for &s in entries {
        let i = block.inner_index(s)?;
        value += nu[s] * profile.values[i];
        for (acc, &x) in h.iter_mut().zip(profile.h(i)) {
            *acc += nu[s] * x;
        }
    }
    let (value_gap, occupancy_gap, _) = gaps(&targets, tuple.block, pair.ground().gamma(), value, &h);
    let slack = T::tol(CHECK_SLACK);
    let realizable = value_gap <= eps_r + slack && occupancy_gap <= eps_t + slack;
    Ok(DistributionReport { value, h, value_gap, occupancy_gap, realizable })
}

/// Result of searching for a realizing option.
#[derive(Debug, Clone)]
pub struct Witness<T> {
    pub option: FRelativeOption<T>,
    pub report: TupleReport<T>,
    /// True when every deterministic option was examined.
    pub exhaustive: bool,
}

/// Best deterministic option by excess over the tolerances, or an LP candidate
/// when the block is too large to enumerate.
pub fn find_realization<T: Real>(pair: &AbstractionPair<T>, tuple: Tuple, eps_r: T, eps_t: T, cap: f64) -> Result<Witness<T>> {
    let targets = pair.targets(tuple)?;
    let block = pair.block(tuple.block);
    match OptionEnumerator::new(block.num_inner(), block.num_actions(), cap) {
        Ok(options) => {
            let mut best: Option<(T, Witness<T>)> = None;
            for det in options {
                let option = FRelativeOption::new(tuple.pred, tuple.block, det);
                let profile = option_profile(block, &option.local_policy(block)?)?;
                let report = report_from_profile(pair, tuple, &targets, &profile, eps_r, eps_t)?;
                let score = report.excess(eps_r, eps_t);
                if best.as_ref().is_none_or(|(b, _)| score < *b) {
                    best = Some((score, Witness { option, report, exhaustive: true }));
                }
                if report_is_exact(&best) {
                    break;
                }
            }
            Ok(best.expect("at least one option").1)
        }
        Err(Error::EnumerationCap { .. }) => {
            let option = crate::realizer::lp_candidate(pair, tuple, eps_t)?;
            let report = check_realizable_tuple(pair, tuple, &option, eps_r, eps_t)?;
            Ok(Witness { option, report, exhaustive: false })
        }
        Err(e) => Err(e),
    }
}

fn report_is_exact<T: Real>(best: &Option<(T, Witness<T>)>) -> bool {
    best.as_ref().is_some_and(|(_, w)| {
        w.report.vacuous || (w.report.value_gap <= T::zero() && w.report.occupancy_gap <= T::zero())
    })
}

/// Verdict over every tuple of the abstraction.
#[derive(Debug, Clone)]
pub struct RealizabilityReport<T> {
    pub tuples: Vec<Witness<T>>,
    pub eps_r: T,
    pub eps_t: T,
    pub realizable: bool,
}

impl<T: Real> RealizabilityReport<T> {
    pub fn worst_value_gap(&self) -> T {
        self.tuples.iter().filter(|w| !w.report.vacuous).map(|w| w.report.value_gap).fold(T::zero(), T::max)
    }

    pub fn worst_occupancy_gap(&self) -> T {
        self.tuples.iter().filter(|w| !w.report.vacuous).map(|w| w.report.occupancy_gap).fold(T::zero(), T::max)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Witness<T>> {
        self.tuples.iter().filter(|w| !w.report.realizable)
    }
}

/// Searches every tuple; each block's options are enumerated once and shared by its tuples.
pub fn check_realizability<T: Real>(pair: &AbstractionPair<T>, eps_r: T, eps_t: T, cap: f64) -> Result<RealizabilityReport<T>> {
    let mut out = Vec::new();
    for b in 0..pair.abs().num_states() {
        let tuples: Vec<Tuple> = pair.tuples().into_iter().filter(|t| t.block == b).collect();
        let block = pair.block(b);
        match OptionEnumerator::new(block.num_inner(), block.num_actions(), cap) {
            Ok(options) => {
                let targets = tuples.iter().map(|&t| pair.targets(t)).collect::<Result<Vec<_>>>()?;
                let mut best: Vec<Option<(T, Witness<T>)>> = vec![None; tuples.len()];
                for det in options {
                    let profile = option_profile(block, &FRelativeOption::new(0, b, det.clone()).local_policy(block)?)?;
                    for (k, &t) in tuples.iter().enumerate() {
                        if report_is_exact(&best[k]) {
                            continue;
                        }
                        let report = report_from_profile(pair, t, &targets[k], &profile, eps_r, eps_t)?;
                        let score = report.excess(eps_r, eps_t);
                        if best[k].as_ref().is_none_or(|(s, _)| score < *s) {
                            let option = FRelativeOption::new(t.pred, b, det.clone());
                            best[k] = Some((score, Witness { option, report, exhaustive: true }));
                        }
                    }
                }
                out.extend(best.into_iter().map(|w| w.expect("at least one option").1));
            }
            Err(Error::EnumerationCap { .. }) => {
                for &t in &tuples {
                    out.push(find_realization(pair, t, eps_r, eps_t, cap)?);
                }
            }
            Err(e) => return Err(e),
        }
    }
    let realizable = out.iter().all(|w| w.report.realizable);
    Ok(RealizabilityReport { tuples: out, eps_r, eps_t, realizable })
}
