use std::fmt::Write as _;

use rarl_core::abstraction::FRelativeOption;
use rarl_core::mdp::Policy;

use crate::setup::Setup;

/// Text table of an option: one row per block state with its action probabilities.
pub fn option_table(setup: &Setup, option: &FRelativeOption<f64>) -> String {
    let states = setup.mapping().block(option.block);
    let na = setup.mdp().num_actions();
    let mut out = format!("option {} {}\nstate", setup.slot(option.pred), option.block);
    for a in 0..na {
        let _ = write!(out, " a{a}");
    }
    out.push('\n');
    for (i, &s) in states.iter().enumerate() {
        out += &setup.label(s);
        for a in 0..na {
            let _ = write!(out, " {}", option.policy.prob(i, a));
        }
        out.push('\n');
    }
    out
}
