use std::fmt::Write as _;
use std::path::PathBuf;

use anyhow::{bail, Result};
use clap::Args;
use rarl_core::abstraction::{check_admissible, check_realizability, find_homomorphism, HomomorphismSearch, ViolationKind};

use crate::setup::{load, ModelArgs, Setup, SlackArgs};
use crate::Code;

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub slack: SlackArgs,
    /// Comma-separated subset of realizable, admissible, homomorphism.
    #[arg(long, default_value = "realizable,admissible")]
    pub checks: String,
    /// Directory for the per-tuple CSV and the verdict file.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn cmd_verify(args: &VerifyArgs) -> Result<Code> {
    let setup = load(&args.model)?;
    let (eps_r, eps_t) = args.slack.resolve(setup.gamma())?;
    let mut verdicts = String::new();
    let mut all = true;
    for check in args.checks.split(',').map(str::trim).filter(|c| !c.is_empty()) {
        let (pass, detail) = match check {
            "realizable" => realizable(&setup, eps_r, eps_t, args)?,
            "admissible" => admissible(&setup, args.model.cap)?,
            "homomorphism" => homomorphism(&setup)?,
            other => bail!("unknown check `{other}`"),
        };
        all &= pass;
        writeln!(verdicts, "{check}: {} {detail}", if pass { "PASS" } else { "FAIL" })?;
    }
    print!("{verdicts}");
    if let Some(dir) = &args.out {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join("verdicts.txt"), &verdicts)?;
    }
    Ok(if all { Code::Ok } else { Code::Failed })
}

fn realizable(setup: &Setup, eps_r: f64, eps_t: f64, args: &VerifyArgs) -> Result<(bool, String)> {
    let report = check_realizability(&setup.pair, eps_r, eps_t, args.model.cap)?;
    if let Some(dir) = &args.out {
        std::fs::create_dir_all(dir)?;
        let mut w = csv::Writer::from_path(dir.join("realizability.csv"))?;
        w.write_record(["pred", "block", "action", "realizable", "vacuous", "value_gap", "occupancy_gap", "worst_entry", "exhaustive"])?;
        for wit in &report.tuples {
            let r = &wit.report;
            let worst = r.worst_entry(eps_r, eps_t).map(|e| setup.label(e.state)).unwrap_or_default();
            w.write_record([
                setup.slot(r.tuple.pred),
                r.tuple.block.to_string(),
                r.tuple.action.to_string(),
                r.realizable.to_string(),
                r.vacuous.to_string(),
                r.value_gap.to_string(),
                r.occupancy_gap.to_string(),
                worst,
                wit.exhaustive.to_string(),
            ])?;
        }
        w.flush()?;
    }
    let failing: Vec<String> = report
        .tuples
        .iter()
        .filter(|w| !w.report.realizable)
        .map(|w| {
            let t = w.report.tuple;
            let at = w.report.worst_entry(eps_r, eps_t).map(|e| setup.label(e.state)).unwrap_or_default();
            format!("({},{},{}) from {at}", setup.slot(t.pred), t.block, t.action)
        })
        .collect();
    let detail = format!(
        "eps=({eps_r:.4e},{eps_t:.4e}) worst value gap {:.4e}, worst occupancy gap {:.4e}",
        report.worst_value_gap(),
        report.worst_occupancy_gap()
    );
    if failing.is_empty() {
        Ok((true, detail))
    } else {
        Ok((false, format!("{detail}; unrealizable {}", failing.join(" "))))
    }
}

fn admissible(setup: &Setup, cap: f64) -> Result<(bool, String)> {
    let report = check_admissible(&setup.pair, cap)?;
    let mut detail = format!("{} pairs, {} options", report.pairs_checked, report.options_checked);
    if let Some(v) = report.violations.first() {
        let kind = match v.kind {
            ViolationKind::Value => "value".to_string(),
            ViolationKind::Occupancy { block } => format!("occupancy of block {block}"),
        };
        write!(
            detail,
            "; {} violations, first ({},{}) at {} short by {:.4e} in {kind}",
            report.violations.len(),
            setup.slot(v.pred),
            v.block,
            setup.label(v.entry),
            v.shortfall
        )?;
    }
    Ok((report.admissible, detail))
}

fn homomorphism(setup: &Setup) -> Result<(bool, String)> {
    Ok(match find_homomorphism(setup.mdp(), setup.mapping())? {
        HomomorphismSearch::Found { abs, .. } => (true, format!("abstract model with {} actions", abs.num_actions())),
        HomomorphismSearch::Impossible { witness: (a, b) } => {
            (false, format!("states {} and {} disagree", setup.label(a), setup.label(b)))
        }
    })
}
