use std::path::Path;

use anyhow::{bail, Context, Result};
use clap::{Args, ValueEnum};
use rarl_core::abstraction::{AbstractionPair, Mapping, Tuple};
use rarl_core::envs::io::{parse_abstraction, parse_env};
use rarl_core::envs::{
    build_chain, build_corridor_grid, build_two_region_grid, corridor_abstraction, random_mapping, random_mdp, reach_abstraction,
    synthesize_admissible_abstraction, Grid,
};
use rarl_core::{GroundMdp64, SecondOrderMdp64};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SlackScale {
    /// Slacks compare directly against normalized occupancies and value gaps.
    Normalized,
    /// Slacks are in discounted units and get multiplied by `1-γ`.
    Discounted,
}

#[derive(Debug, Clone, Args)]
pub struct ModelArgs {
    /// Builtin (corridor, two-region[:SLIP], chain, random:SEED[:S[:A[:BLOCKS]]]) or environment file.
    #[arg(long)]
    pub env: String,
    /// Builtin (identity, reach[:REWARD], corridor:REACH, chain, synth) or abstraction file.
    #[arg(long)]
    pub abs: Option<String>,
    /// Discount of builtin environments.
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Enumeration cap for exhaustive option checks.
    #[arg(long, default_value_t = 1e5)]
    pub cap: f64,
}

#[derive(Debug, Clone, Args)]
pub struct SlackArgs {
    #[arg(long, default_value_t = 0.05)]
    pub eps_r: f64,
    #[arg(long, default_value_t = 0.05)]
    pub eps_t: f64,
    #[arg(long, value_enum, default_value_t = SlackScale::Normalized)]
    pub slack_scale: SlackScale,
}

impl SlackArgs {
    /// `(εR, εT)` in normalized units.
    pub fn resolve(&self, gamma: f64) -> Result<(f64, f64)> {
        let k = match self.slack_scale {
            SlackScale::Normalized => 1.0,
            SlackScale::Discounted => 1.0 - gamma,
        };
        let (r, t) = (self.eps_r * k, self.eps_t * k);
        if !(0.0..=1.0).contains(&r) || !(0.0..=1.0).contains(&t) {
            bail!("slacks must lie in [0, 1] after scaling, got ({r}, {t})");
        }
        Ok((r, t))
    }
}

/// Ground model, mapping and abstraction, with printable state names.
pub struct Setup {
    pub pair: AbstractionPair<f64>,
    labels: Option<Vec<(usize, usize)>>,
}

impl Setup {
    pub fn mdp(&self) -> &GroundMdp64 {
        self.pair.ground()
    }

    pub fn abs(&self) -> &SecondOrderMdp64 {
        self.pair.abs()
    }

    pub fn mapping(&self) -> &Mapping {
        self.pair.mapping()
    }

    pub fn gamma(&self) -> f64 {
        self.mdp().gamma()
    }

    pub fn label(&self, s: usize) -> String {
        match &self.labels {
            Some(cells) => format!("{s}@({},{})", cells[s].0, cells[s].1),
            None => s.to_string(),
        }
    }

    /// Ground state from an index or, on grids, an `x,y` cell.
    pub fn state(&self, text: &str) -> Result<usize> {
        let s = match (text.split_once(','), &self.labels) {
            (Some((x, y)), Some(cells)) => {
                let cell: (usize, usize) = (x.trim().parse()?, y.trim().parse()?);
                match cells.iter().position(|&c| c == cell) {
                    Some(s) => s,
                    None => bail!("cell {text} is a wall or outside the grid"),
                }
            }
            _ => text.parse()?,
        };
        if s >= self.mdp().num_states() {
            bail!("state {s} out of range");
        }
        Ok(s)
    }

    pub fn slot(&self, p: usize) -> String {
        if p == self.abs().num_states() {
            "*".into()
        } else {
            p.to_string()
        }
    }
}

struct Env {
    mdp: GroundMdp64,
    mapping: Option<Mapping>,
    grid: Option<Grid<f64>>,
    chain_abs: Option<SecondOrderMdp64>,
}

fn field<T: std::str::FromStr>(parts: &[&str], k: usize, default: T, what: &str) -> Result<T> {
    match parts.get(k) {
        Some(w) => w.parse().map_err(|_| anyhow::anyhow!("bad {what} `{w}`")),
        None => Ok(default),
    }
}

fn load_env(spec: &str, gamma: Option<f64>) -> Result<Env> {
    let parts: Vec<&str> = spec.split(':').collect();
    let plain = |mdp| Env { mdp, mapping: None, grid: None, chain_abs: None };
    let from_grid = |grid: Grid<f64>| Env { mdp: grid.mdp.clone(), mapping: Some(grid.mapping.clone()), grid: Some(grid), chain_abs: None };
    Ok(match parts[0] {
        "corridor" => from_grid(build_corridor_grid(gamma.unwrap_or(0.95))?),
        "two-region" => from_grid(build_two_region_grid(gamma.unwrap_or(0.9), field(&parts, 1, 0.0, "slip")?)?),
        "chain" => {
            let (mdp, mapping, abs) = build_chain(gamma.unwrap_or(0.9))?;
            Env { mdp, mapping: Some(mapping), grid: None, chain_abs: Some(abs) }
        }
        "random" => {
            let seed: u64 = field(&parts, 1, 0, "seed")?;
            let n: usize = field(&parts, 2, 6, "state count")?;
            let na: usize = field(&parts, 3, 2, "action count")?;
            let mdp = random_mdp(seed, n, na, 3, gamma.unwrap_or(0.9))?;
            match parts.get(4) {
                Some(_) => Env { mapping: Some(random_mapping(seed, n, field(&parts, 4, n, "block count")?)?), ..plain(mdp) },
                None => plain(mdp),
            }
        }
        _ => {
            let text = std::fs::read_to_string(Path::new(spec)).with_context(|| format!("reading environment `{spec}`"))?;
            let mut mdp: GroundMdp64 = parse_env(&text)?;
            if let Some(g) = gamma {
                mdp = mdp.with_gamma(g)?;
            }
            plain(mdp)
        }
    })
}

pub fn load(args: &ModelArgs) -> Result<Setup> {
    let env = load_env(&args.env, args.gamma)?;
    let gamma = env.mdp.gamma();
    let default = if env.chain_abs.is_some() {
        "chain"
    } else if env.mapping.is_some() {
        "reach"
    } else {
        "identity"
    };
    let spec = args.abs.as_deref().unwrap_or(default);
    let parts: Vec<&str> = spec.split(':').collect();
    let mapping = || env.mapping.clone().unwrap_or_else(|| Mapping::identity(env.mdp.num_states()));
    let (abs, mapping) = match parts[0] {
        "identity" => (SecondOrderMdp64::from_ground(&env.mdp), Mapping::identity(env.mdp.num_states())),
        "reach" => (reach_abstraction(&env.mdp, &mapping(), gamma, field(&parts, 1, 0.0, "reward")?)?, mapping()),
        "corridor" => {
            let Some(grid) = &env.grid else { bail!("`corridor:REACH` needs the corridor environment") };
            (corridor_abstraction(grid, field(&parts, 1, 0.0, "reach")?)?, mapping())
        }
        "chain" => match &env.chain_abs {
            Some(abs) => (abs.clone(), mapping()),
            None => bail!("`chain` abstraction needs the chain environment"),
        },
        "synth" => (synthesize_admissible_abstraction(&env.mdp, &mapping(), gamma, args.cap)?, mapping()),
        _ => {
            let text = std::fs::read_to_string(Path::new(spec)).with_context(|| format!("reading abstraction `{spec}`"))?;
            parse_abstraction(&text)?
        }
    };
    let labels = env.grid.as_ref().map(|g| g.cells.clone());
    Ok(Setup { pair: AbstractionPair::new(env.mdp, abs, mapping)?, labels })
}

/// Parses `PRED,BLOCK,ACTION` where `PRED` may be `*` for the start slot.
pub fn parse_tuple(text: &str, num_abstract: usize) -> Result<Tuple> {
    let parts: Vec<&str> = text.split(',').map(str::trim).collect();
    if parts.len() != 3 {
        bail!("tuple `{text}` is not PRED,BLOCK,ACTION");
    }
    let pred = if parts[0] == "*" { num_abstract } else { parts[0].parse()? };
    Ok(Tuple::new(pred, parts[1].parse()?, parts[2].parse()?))
}

/// Parses `a..b` (exclusive end) or a single seed.
pub fn parse_seeds(text: &str) -> Result<std::ops::Range<u64>> {
    match text.split_once("..") {
        Some((a, b)) => {
            let (a, b): (u64, u64) = (a.parse()?, b.parse()?);
            if a >= b {
                bail!("empty seed range `{text}`");
            }
            Ok(a..b)
        }
        None => {
            let a: u64 = text.parse()?;
            Ok(a..a + 1)
        }
    }
}
