use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::Args;

use crate::run::SUMMARY_HEADER;
use crate::Code;

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// Output directory of `run`.
    pub dir: PathBuf,
}

fn seed_dirs(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut out: Vec<PathBuf> = std::fs::read_dir(dir)
        .with_context(|| format!("reading run directory {}", dir.display()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.join("summary.csv").is_file())
        .collect();
    if dir.join("summary.csv").is_file() {
        out.push(dir.to_path_buf());
    }
    out.sort();
    Ok(out)
}

fn summary(dir: &Path) -> Result<BTreeMap<String, String>> {
    let mut r = csv::Reader::from_path(dir.join("summary.csv"))?;
    let header: Vec<String> = r.headers()?.iter().map(String::from).collect();
    if header != SUMMARY_HEADER {
        bail!("{}: unexpected summary columns", dir.display());
    }
    let Some(row) = r.records().next() else { bail!("{}: empty summary", dir.display()) };
    Ok(header.into_iter().zip(row?.iter().map(String::from)).collect())
}

/// Aggregates escape counts against the budget and writes return curves for plotting.
pub fn cmd_report(args: &ReportArgs) -> Result<Code> {
    let dirs = seed_dirs(&args.dir)?;
    if dirs.is_empty() {
        bail!("no runs under {}", args.dir.display());
    }
    let mut table = csv::Writer::from_path(args.dir.join("report.csv"))?;
    table.write_record(["seed", "episodes", "escapes", "budget", "within_budget", "option_value", "optimal_value", "bound", "within_bound"])?;
    let mut curves = csv::Writer::from_path(args.dir.join("returns.csv"))?;
    curves.write_record(["seed", "episode", "return", "mean_return"])?;
    let (mut budget_ok, mut bound_ok) = (0, 0);
    for dir in &dirs {
        let s = summary(dir)?;
        let num = |k: &str| -> Result<f64> { s[k].parse().with_context(|| format!("{}: field {k}", dir.display())) };
        let within_budget = num("escapes")? <= num("budget")?;
        let within_bound = s["within_bound"] == "true";
        budget_ok += usize::from(within_budget);
        bound_ok += usize::from(within_bound);
        table.write_record([
            &s["seed"],
            &s["episodes"],
            &s["escapes"],
            &s["budget"],
            &within_budget.to_string(),
            &s["option_value"],
            &s["optimal_value"],
            &s["bound"],
            &within_bound.to_string(),
        ])?;

        let mut r = csv::Reader::from_path(dir.join("episodes.csv"))?;
        let col = r.headers()?.iter().position(|h| h == "return").context("episodes.csv has no return column")?;
        let mut total = 0.0;
        for (k, row) in r.records().enumerate() {
            let row = row?;
            let ret: f64 = row[col].parse()?;
            total += ret;
            curves.write_record([s["seed"].clone(), row[0].to_string(), row[col].to_string(), (total / (k + 1) as f64).to_string()])?;
        }
    }
    table.flush()?;
    curves.flush()?;
    let n = dirs.len();
    println!("{n} runs: escapes within budget {budget_ok}/{n}, value within bound {bound_ok}/{n}");
    Ok(Code::Ok)
}
