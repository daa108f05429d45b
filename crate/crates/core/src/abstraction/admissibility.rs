use crate::abstraction::{option_profile, AbstractionPair, FRelativeOption, OptionEnumerator, OptionProfile, Targets, Tuple};
use crate::error::Result;
use crate::mdp::DeterministicPolicy;
use crate::scalar::Real;

/// Default bound on `|A|^|block|` for exhaustive option enumeration.
pub const DEFAULT_ENUMERATION_CAP: f64 = 1e6;

/// Numerical slack for the dominance comparisons.
pub const DOMINANCE_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ViolationKind {
    Value,
    Occupancy { block: usize },
}

/// An option that no abstract action dominates, with the entry where the
/// closest action falls short.
#[derive(Debug, Clone, PartialEq)]
pub struct AdmissibilityViolation {
    pub pred: usize,
    pub block: usize,
    pub option: DeterministicPolicy,
    pub closest_action: usize,
    pub entry: usize,
    pub kind: ViolationKind,
    pub shortfall: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdmissibilityReport {
    pub violations: Vec<AdmissibilityViolation>,
    pub pairs_checked: usize,
    pub options_checked: usize,
    pub admissible: bool,
}

/// Largest shortfall of `targets` against the option at the given entries, if any.
fn shortfall<T: Real>(
    pair: &AbstractionPair<T>,
    targets: &Targets<T>,
    profile: &OptionProfile<T>,
    block: usize,
    entries: &[usize],
) -> Result<Option<(usize, ViolationKind, T)>> {
    let bm = pair.block(block);
    let slack = T::tol(DOMINANCE_SLACK);
    let mut worst: Option<(usize, ViolationKind, T)> = None;
    let mut note = |s: usize, kind: ViolationKind, gap: T| {
        if gap > slack && worst.as_ref().is_none_or(|w| gap > w.2) {
            worst = Some((s, kind, gap));
        }
    };
    for &s in entries {
        let i = bm.inner_index(s)?;
        note(s, ViolationKind::Value, profile.values[i] - targets.v);
        for (b, &ht) in targets.h.iter().enumerate() {
            if b != block {
                note(s, ViolationKind::Occupancy { block: b }, profile.h(i)[b] - ht);
            }
        }
    }
    Ok(worst)
}

/// First dominating action, or the action with the smallest shortfall.
fn respond<T: Real>(
    pair: &AbstractionPair<T>,
    targets: &[Targets<T>],
    profile: &OptionProfile<T>,
    pred: usize,
    block: usize,
) -> Result<std::result::Result<usize, (usize, usize, ViolationKind, T)>> {
    let entries = pair.entries(pred, block);
    let mut closest: Option<(usize, usize, ViolationKind, T)> = None;
    for (a, tg) in targets.iter().enumerate() {
        match shortfall(pair, tg, profile, block, entries)? {
            None => return Ok(Ok(a)),
            Some((s, kind, gap)) => {
                if closest.as_ref().is_none_or(|c| gap < c.3) {
                    closest = Some((a, s, kind, gap));
                }
            }
        }
    }
    Ok(Err(closest.expect("at least one abstract action")))
}

fn pair_targets<T: Real>(pair: &AbstractionPair<T>, pred: usize, block: usize) -> Result<Vec<Targets<T>>> {
    (0..pair.abs().num_actions()).map(|a| pair.targets(Tuple::new(pred, block, a))).collect()
}

/// Exhaustive dominance check over deterministic options, start predecessors included.
pub fn check_admissible<T: Real>(pair: &AbstractionPair<T>, cap: f64) -> Result<AdmissibilityReport> {
    let n = pair.abs().num_states();
    let mut violations = Vec::new();
    let mut pairs_checked = 0;
    let mut options_checked = 0;
    for block in 0..n {
        let preds: Vec<usize> = (0..=n).filter(|&p| p != block && !pair.entries(p, block).is_empty()).collect();
        if preds.is_empty() {
            continue;
        }
        pairs_checked += preds.len();
        let targets = preds.iter().map(|&p| pair_targets(pair, p, block)).collect::<Result<Vec<_>>>()?;
        let bm = pair.block(block);
        for det in OptionEnumerator::new(bm.num_inner(), bm.num_actions(), cap)? {
            options_checked += 1;
            let profile = option_profile(bm, &FRelativeOption::new(n, block, det.clone()).local_policy(bm)?)?;
            for (k, &pred) in preds.iter().enumerate() {
                if let Err((a, entry, kind, gap)) = respond(pair, &targets[k], &profile, pred, block)? {
                    violations.push(AdmissibilityViolation {
                        pred,
                        block,
                        option: det.clone(),
                        closest_action: a,
                        entry,
                        kind,
                        shortfall: gap.as_f64(),
                    });
                }
            }
        }
    }
    let admissible = violations.is_empty();
    Ok(AdmissibilityReport { violations, pairs_checked, options_checked, admissible })
}

/// For every deterministic option of `(pred, block)`, the lowest dominating action.
pub fn best_response_targets<T: Real>(
    pair: &AbstractionPair<T>,
    pred: usize,
    block: usize,
    cap: f64,
) -> Result<Vec<(DeterministicPolicy, Option<usize>)>> {
    let targets = pair_targets(pair, pred, block)?;
    let bm = pair.block(block);
    let mut out = Vec::new();
    for det in OptionEnumerator::new(bm.num_inner(), bm.num_actions(), cap)? {
        let profile = option_profile(bm, &FRelativeOption::new(pred, block, det.clone()).local_policy(bm)?)?;
        let a = respond(pair, &targets, &profile, pred, block)?.ok();
        out.push((det, a));
    }
    Ok(out)
}

/// Abstract pair policy choosing, per pair, an action that dominates the
/// restriction of `ground` to the block. Pairs without entries, or without a
/// dominating action, get action 0.
pub fn dominating_abstract_policy<T: Real>(pair: &AbstractionPair<T>, ground: &DeterministicPolicy) -> Result<DeterministicPolicy> {
    let abs = pair.abs();
    let n = abs.num_states();
    let mut out = DeterministicPolicy::constant(abs.num_pairs(), 0);
    for block in 0..n {
        let bm = pair.block(block);
        let restricted = DeterministicPolicy::new(bm.inner_states().iter().map(|&s| ground.action(s)).collect());
        let profile = option_profile(bm, &FRelativeOption::new(n, block, restricted).local_policy(bm)?)?;
        for pred in (0..=n).filter(|&p| p != block) {
            if pair.entries(pred, block).is_empty() {
                continue;
            }
            let targets = pair_targets(pair, pred, block)?;
            if let Ok(a) = respond(pair, &targets, &profile, pred, block)? {
                out.set(abs.pair_index(pred, block), a);
            }
        }
    }
    Ok(out)
}
