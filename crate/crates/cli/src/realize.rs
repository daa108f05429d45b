use std::path::PathBuf;

use anyhow::{bail, Result};
use clap::Args;
use rarl_core::abstraction::Targets;
use rarl_core::rarl::{Episode, MdpSimulator};
use rarl_core::realizer::{realize_exact, OnlineConfig, OnlineRealizer, Realization, RealizationProblem, RealizationResult};

use crate::output::option_table;
use crate::setup::{load, parse_tuple, ModelArgs, SlackArgs};
use crate::Code;

#[derive(Debug, Args)]
pub struct RealizeArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub slack: SlackArgs,
    /// Abstract tuple `PRED,BLOCK,ACTION`; `*` names the start slot.
    #[arg(long)]
    pub tuple: String,
    /// Entry state (index, or `x,y` on grids); uniform over all entries when absent.
    #[arg(long)]
    pub entry: Option<String>,
    #[arg(long, default_value_t = 0.0)]
    pub eta: f64,
    #[arg(long, default_value_t = 0.0)]
    pub lambda: f64,
    /// Learn the block model from simulated rollouts instead of reading it.
    #[arg(long)]
    pub online: bool,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Rollout cap of the online realizer.
    #[arg(long, default_value_t = 1_000_000)]
    pub episodes: u64,
    #[arg(long, default_value_t = 0.1)]
    pub delta: f64,
    #[arg(long)]
    pub n_min: Option<u64>,
    #[arg(long)]
    pub n_nu: Option<u64>,
    /// Directory for the option table and the certificate CSV.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn cmd_realize(args: &RealizeArgs) -> Result<Code> {
    let setup = load(&args.model)?;
    let (eps_r, eps_t) = args.slack.resolve(setup.gamma())?;
    let tuple = parse_tuple(&args.tuple, setup.abs().num_states())?;
    let mut entries = setup.pair.entries(tuple.pred, tuple.block).to_vec();
    if let Some(text) = &args.entry {
        let s = setup.state(text)?;
        if !entries.contains(&s) {
            bail!("state {} is not an entry of ({},{})", setup.label(s), setup.slot(tuple.pred), tuple.block);
        }
        entries = vec![s];
    }
    if entries.is_empty() {
        println!("tuple has no entry states; realizable by default");
        return Ok(Code::Ok);
    }
    let targets = setup.pair.targets(tuple)?;
    let mut nu = vec![0.0; setup.mdp().num_states()];
    entries.iter().for_each(|&s| nu[s] = 1.0 / entries.len() as f64);

    let (result, feasible, used) = if args.online {
        let config = OnlineConfig { eps_r, eps_t, eta: args.eta, lambda: args.lambda, delta_i: args.delta, n_min: args.n_min, n_nu: args.n_nu };
        let mut on = OnlineRealizer::new(tuple, setup.mapping(), setup.mdp().num_actions(), setup.gamma(), config)?;
        let mut sim = MdpSimulator::new(setup.mdp().with_start(nu)?, args.seed);
        let mut rollouts = 0;
        while !on.enough() {
            if rollouts >= args.episodes {
                eprintln!("online realizer still under-sampled after {rollouts} rollouts");
                return Ok(Code::Cap);
            }
            let mut ep = Episode::start(&mut sim, 1.0, usize::MAX);
            let s = ep.state();
            on.rollout_control(&mut ep, s)?;
            rollouts += 1;
        }
        println!("online realizer: {rollouts} rollouts, n_min {}, n_nu {}", on.n_min(), on.n_nu());
        let got = on.get(&targets)?;
        (got.result, got.feasible, got.eps_t_used)
    } else {
        let problem = RealizationProblem::from_pair(&setup.pair, tuple, &nu, eps_r, eps_t)?.with_softness(args.eta, args.lambda)?;
        match realize_exact(&problem)? {
            Realization::Feasible(r) => (r, true, eps_t),
            Realization::Infeasible { closest, .. } => (closest, false, eps_t),
        }
    };

    let table = option_table(&setup, &result.option);
    print!("{table}");
    println!("value {:.6} target {:.6} value gap {:.4e}", result.value, targets.v, result.value_gap);
    if let Some(dir) = &args.out {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join("option.txt"), &table)?;
        certificate(&result, &targets, used, dir)?;
    }
    if feasible {
        Ok(Code::Ok)
    } else {
        println!("infeasible: max occupancy gap {:.6e} above eps_t {used:.6e}", result.occupancy_gap(used));
        Ok(Code::Infeasible)
    }
}

fn certificate(result: &RealizationResult<f64>, targets: &Targets<f64>, eps_t: f64, dir: &std::path::Path) -> Result<()> {
    let mut w = csv::Writer::from_path(dir.join("certificate.csv"))?;
    w.write_record(["quantity", "block", "target", "achieved", "slack"])?;
    for &(b, slack) in &result.slacks {
        let Some(&got) = result.occupancy.get(b) else { bail!("occupancy of block {b} missing") };
        w.write_record(["occupancy".to_string(), b.to_string(), targets.h[b].to_string(), got.to_string(), slack.to_string()])?;
    }
    let own = result.option.block;
    w.write_record(["value".to_string(), own.to_string(), targets.v.to_string(), result.value.to_string(), (-result.value_gap).to_string()])?;
    w.write_record(["eps_t".to_string(), own.to_string(), eps_t.to_string(), String::new(), String::new()])?;
    w.flush()?;
    Ok(())
}
