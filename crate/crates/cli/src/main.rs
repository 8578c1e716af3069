use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use bmlab_core::lab::config::{DivergenceConfig, EquivalenceConfig, LabConfig, MembershipConfig, NormPair, Scenario};
use bmlab_core::lab::params::SpaceParams;
use bmlab_core::lab::report::{emit_report, Format, Outcome};
use bmlab_core::lab::run_all;

#[derive(Parser, Debug)]
#[command(name = "bmlab", version, about = "Numerical laboratory for Besov-Morrey quasi-norms")]
struct Cli {
    /// TOML experiment document.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Seed for sampled function families and h-subsampling.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Points per axis for every grid in the run.
    #[arg(long = "grid-n", global = true)]
    grid_n: Option<usize>,
    /// Output directory for the manifest, tables and series.
    #[arg(long, global = true, default_value = "bmlab-out")]
    out: PathBuf,
    #[arg(long, global = true, value_enum, default_value_t = FormatArg::Csv)]
    format: FormatArg,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum PairArg {
    Va,
    Modulus,
    Club,
    Spade,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ScenarioArg {
    PlateauS0,
    ExpBump,
    Oswald,
    FAlphaDelta,
    Control,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Classify one parameter tuple, or every `[[classify]]` entry of the config.
    Classify(TupleArgs),
    /// Ratio sweep between the Fourier-analytic norm and a difference norm.
    Equivalence {
        /// Norm pair; without a config the default run for that pair is used.
        #[arg(long, value_enum)]
        pair: Option<PairArg>,
        /// Number of test functions.
        #[arg(long)]
        count: Option<usize>,
    },
    /// Divergence scenarios; every scenario unless one is named.
    Divergence {
        #[arg(long, value_enum)]
        scenario: Option<ScenarioArg>,
    },
    /// Membership scan across the threshold for the singular function.
    Membership,
    /// Run every section of the config and write one combined report.
    Report,
}

#[derive(Args, Debug)]
struct TupleArgs {
    #[arg(long)]
    d: Option<usize>,
    #[arg(long)]
    s: Option<f64>,
    #[arg(long)]
    u: Option<f64>,
    #[arg(long)]
    p: Option<f64>,
    #[arg(long)]
    q: Option<f64>,
    #[arg(long)]
    v: Option<f64>,
    /// Ball radius cap; defaults to infinity.
    #[arg(long)]
    a: Option<f64>,
    /// Difference order.
    #[arg(long = "N")]
    order: Option<usize>,
}

impl TupleArgs {
    fn tuple(&self) -> Result<Option<SpaceParams>, String> {
        let given = [
            self.d.is_some(),
            self.s.is_some(),
            self.u.is_some(),
            self.p.is_some(),
            self.q.is_some(),
            self.v.is_some(),
            self.order.is_some(),
        ];
        if given.iter().all(|g| !g) && self.a.is_none() {
            return Ok(None);
        }
        match (self.d, self.s, self.u, self.p, self.q, self.v, self.order) {
            (Some(d), Some(s), Some(u), Some(p), Some(q), Some(v), Some(order)) => Ok(Some(SpaceParams {
                d,
                s,
                u,
                p,
                q,
                v,
                a: self.a.unwrap_or(f64::INFINITY),
                order,
            })),
            _ => Err("a tuple needs all of --d --s --u --p --q --v --N".into()),
        }
    }
}

fn pair(p: PairArg) -> NormPair {
    match p {
        PairArg::Va => NormPair::Va,
        PairArg::Modulus => NormPair::Modulus,
        PairArg::Club => NormPair::Club,
        PairArg::Spade => NormPair::Spade,
    }
}

fn scenario(s: ScenarioArg) -> Scenario {
    match s {
        ScenarioArg::PlateauS0 => Scenario::PlateauS0,
        ScenarioArg::ExpBump => Scenario::ExpBump,
        ScenarioArg::Oswald => Scenario::Oswald,
        ScenarioArg::FAlphaDelta => Scenario::FAlphaDelta,
        ScenarioArg::Control => Scenario::Control,
    }
}

fn equivalence_default(p: NormPair) -> EquivalenceConfig {
    match p {
        NormPair::Modulus => EquivalenceConfig::modulus(),
        other => EquivalenceConfig {
            pair: other,
            ..EquivalenceConfig::default()
        },
    }
}

/// Narrows the loaded document to the section the subcommand runs, filling defaults when the
/// section is empty.
fn plan(cli: &Cli, base: LabConfig) -> Result<LabConfig, String> {
    let mut cfg = LabConfig {
        seed: base.seed,
        ..LabConfig::default()
    };
    match &cli.command {
        Command::Report => cfg = base,
        Command::Classify(t) => {
            cfg.classify = match t.tuple()? {
                Some(x) => vec![x],
                None if !base.classify.is_empty() => base.classify,
                None => return Err("classify needs a tuple or a config with [[classify]] entries".into()),
            };
        }
        Command::Equivalence { pair: p, count } => {
            let mut list = base.equivalence;
            if let Some(p) = p {
                let p = pair(*p);
                list.retain(|e| e.pair == p);
                if list.is_empty() {
                    list.push(equivalence_default(p));
                }
            } else if list.is_empty() {
                list.push(EquivalenceConfig::default());
            }
            if let Some(c) = count {
                for e in &mut list {
                    e.count = *c;
                }
            }
            cfg.equivalence = list;
        }
        Command::Divergence { scenario: s } => {
            let mut list = base.divergence;
            if let Some(s) = s {
                let s = scenario(*s);
                list.retain(|d| d.scenario == s);
                if list.is_empty() {
                    list.push(DivergenceConfig::new(s));
                }
            } else if list.is_empty() {
                list = Scenario::all().into_iter().map(DivergenceConfig::new).collect();
            }
            cfg.divergence = list;
        }
        Command::Membership => {
            cfg.membership = if base.membership.is_empty() {
                vec![MembershipConfig::default()]
            } else {
                base.membership
            };
        }
    }
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(n) = cli.grid_n {
        cfg.override_grid_n(n);
    }
    Ok(cfg)
}

fn run(cli: &Cli) -> Result<i32, String> {
    let base = match &cli.config {
        Some(path) => LabConfig::load(path).map_err(|e| format!("{}: {e}", path.display()))?,
        None => LabConfig::default(),
    };
    let cfg = plan(cli, base)?;
    let outcomes = run_all(&cfg).map_err(|e| e.to_string())?;
    for o in &outcomes {
        if let Outcome::Classify(r) = o {
            for (x, v) in &r.rows {
                let tag = v.region.tag().map(|t| t.label()).unwrap_or("-");
                println!(
                    "d={} s={} u={} p={} q={} v={} a={} N={}  {} {}",
                    x.d,
                    x.s,
                    x.u,
                    x.p,
                    x.q,
                    x.v,
                    x.a,
                    x.order,
                    v.region.name(),
                    tag
                );
            }
        }
        println!("{:<28} {}", o.name(), o.status().as_str());
    }
    let format = match cli.format {
        FormatArg::Csv => Format::Csv,
        FormatArg::Json => Format::Json,
    };
    let code = emit_report(&outcomes, &cfg, &cli.out, format).map_err(|e| e.to_string())?;
    println!("report written to {}", cli.out.display());
    Ok(code)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
