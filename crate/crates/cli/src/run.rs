use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{Context, Result};
use clap::Args;
use rayon::prelude::*;
use rarl_core::abstraction::{evaluate_policy_of_options, value_loss_bound};
use rarl_core::envs::io::write_abstraction;
use rarl_core::mdp::policy_iteration;
use rarl_core::rarl::{run, sample_complexity_budget, MdpSimulator, RarlConfig, RarlOutcome};

use crate::output::option_table;
use crate::setup::{load, parse_seeds, ModelArgs, Setup, SlackArgs};
use crate::Code;

#[derive(Debug, Args)]
pub struct RunArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub slack: SlackArgs,
    #[arg(long, default_value_t = 0.05)]
    pub eta: f64,
    #[arg(long, default_value_t = 0.05)]
    pub lambda: f64,
    #[arg(long, default_value_t = 0.05)]
    pub eps: f64,
    #[arg(long, default_value_t = 0.1)]
    pub delta: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Seed range `a..b`; overrides `--seed` and runs seeds in parallel.
    #[arg(long)]
    pub seeds: Option<String>,
    /// Episode cap.
    #[arg(long, default_value_t = 1_000_000)]
    pub episodes: usize,
    /// Episodes without new tuples or updates that end a run.
    #[arg(long, default_value_t = 200)]
    pub quiet: usize,
    #[arg(long)]
    pub vi_iterations: Option<usize>,
    #[arg(long)]
    pub n_min: Option<u64>,
    #[arg(long)]
    pub n_nu: Option<u64>,
    /// Fill the `seconds` column with wall-clock time; off by default so reruns are byte-identical.
    #[arg(long)]
    pub timing: bool,
    #[arg(long, default_value = "rarl-out")]
    pub out: PathBuf,
}

/// Worker count from `RARL_KIT_THREADS`, if set.
fn threads() -> Result<Option<usize>> {
    match std::env::var("RARL_KIT_THREADS") {
        Ok(v) => Ok(Some(v.parse().with_context(|| format!("RARL_KIT_THREADS=`{v}`"))?)),
        Err(_) => Ok(None),
    }
}

pub fn cmd_run(args: &RunArgs) -> Result<Code> {
    let setup = load(&args.model)?;
    let (eps_r, eps_t) = args.slack.resolve(setup.gamma())?;
    let base = RarlConfig {
        eps_r,
        eps_t,
        eta: args.eta,
        lambda: args.lambda,
        eps: args.eps,
        delta: args.delta,
        vi_iterations: args.vi_iterations,
        max_episodes: args.episodes,
        quiet_episodes: args.quiet,
        seed: args.seed,
        n_min: args.n_min,
        n_nu: args.n_nu,
    };
    base.validate()?;
    let seeds = match &args.seeds {
        Some(text) => parse_seeds(text)?,
        None => args.seed..args.seed + 1,
    };
    let (v, _) = policy_iteration(setup.mdp())?;
    let optimal: f64 = setup.mdp().start().iter().zip(&v).map(|(p, x)| p * x).sum();
    std::fs::create_dir_all(&args.out)?;

    let one = |seed: u64| -> Result<bool> {
        let config = RarlConfig { seed, ..base.clone() };
        let started = Instant::now();
        let mut sim = MdpSimulator::new(setup.mdp().clone(), seed);
        let out = run(&mut sim, setup.mapping(), setup.abs().clone(), &config)?;
        let dir = args.out.join(format!("seed-{seed}"));
        let record = write_seed(&setup, &config, &out, optimal, &dir, args.timing)?;
        let fields: Vec<String> = SUMMARY_HEADER.iter().zip(&record).skip(1).map(|(k, v)| format!("{k}={v}")).collect();
        println!("seed {seed}: {} ({:.1}s)", fields.join(" "), started.elapsed().as_secs_f64());
        Ok(out.capped)
    };
    let seeds: Vec<u64> = seeds.collect();
    let capped: Vec<bool> = if seeds.len() == 1 {
        vec![one(seeds[0])?]
    } else {
        let mut pool = rayon::ThreadPoolBuilder::new();
        if let Some(n) = threads()? {
            pool = pool.num_threads(n);
        }
        pool.build()?.install(|| seeds.par_iter().map(|&s| one(s)).collect::<Result<Vec<_>>>())?
    };
    Ok(if capped.iter().any(|&c| c) { Code::Cap } else { Code::Ok })
}

pub const SUMMARY_HEADER: [&str; 12] = [
    "seed",
    "episodes",
    "escapes",
    "budget",
    "realizer_complexity",
    "updates",
    "infeasible",
    "capped",
    "option_value",
    "optimal_value",
    "bound",
    "within_bound",
];

fn write_seed(setup: &Setup, config: &RarlConfig, out: &RarlOutcome<f64>, optimal: f64, dir: &Path, timing: bool) -> Result<Vec<String>> {
    std::fs::create_dir_all(dir)?;
    let mut w = csv::Writer::from_path(dir.join("episodes.csv"))?;
    w.write_record(["episode", "return", "escape", "known_tuples", "updates", "abstract_value", "seconds"])?;
    for e in &out.episodes {
        let seconds = if timing { e.seconds.to_string() } else { String::new() };
        w.write_record([
            e.episode.to_string(),
            e.ret.to_string(),
            e.escape.to_string(),
            e.known_tuples.to_string(),
            e.updates.to_string(),
            e.abstract_value.to_string(),
            seconds,
        ])?;
    }
    w.flush()?;

    let mut w = csv::Writer::from_path(dir.join("updates.csv"))?;
    w.write_record(["episode", "pred", "block", "action", "before", "after", "target"])?;
    for u in &out.updates {
        w.write_record([
            u.episode.to_string(),
            setup.slot(u.tuple.pred),
            u.tuple.block.to_string(),
            u.tuple.action.to_string(),
            u.before.to_string(),
            u.after.to_string(),
            u.target.to_string(),
        ])?;
    }
    w.flush()?;

    let options: String = out.policy.iter().map(|o| option_table(setup, o) + "\n").collect();
    std::fs::write(dir.join("options.txt"), options)?;
    std::fs::write(dir.join("model.abs"), write_abstraction(&out.model, setup.mapping()))?;

    let (abs, gamma) = (setup.abs(), setup.gamma());
    let value = evaluate_policy_of_options(setup.mdp(), setup.mapping(), &out.policy)?.start_value();
    let bound = value_loss_bound(config.eps_r, config.eps_t, gamma, abs.gamma_bar(), abs.num_states()) + 3.0 * config.eps / (1.0 - gamma);
    let budget = sample_complexity_budget(config, abs.num_states(), abs.num_actions(), out.realizer_complexity as f64);
    let mut w = csv::Writer::from_path(dir.join("summary.csv"))?;
    w.write_record(SUMMARY_HEADER)?;
    let record = vec![
        config.seed.to_string(),
        out.episodes.len().to_string(),
        out.escape_episodes().to_string(),
        budget.to_string(),
        out.realizer_complexity.to_string(),
        out.updates.len().to_string(),
        out.infeasible.len().to_string(),
        out.capped.to_string(),
        value.to_string(),
        optimal.to_string(),
        bound.to_string(),
        (optimal - value <= bound).to_string(),
    ];
    w.write_record(&record)?;
    w.flush()?;
    Ok(record)
}
