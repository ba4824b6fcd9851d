use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rdcn::analytics::{self, SystemFamily};
use rdcn::bvn::{self, BvnOptions, MatchingStrategy};
use rdcn::matrix::{self, DemandMatrix};
use rdcn::schedule::{self, Schedule};
use rdcn::sweep::{self, Experiment, SweepConfig};
use rdcn::systems::{self, SystemConfig, SystemKind};
use rdcn::traffic::{self, TmParams, DEFAULT_NOISE};
use serde_json::json;

#[derive(Parser, Debug)]
#[command(
    name = "rdcn",
    version,
    about = "Schedule demand matrices on BvN, round-robin and composite reconfigurable networks"
)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct Global {
    /// Number of ToRs
    #[arg(long, global = true, default_value_t = 64)]
    n: usize,
    /// Link rate (bits per second)
    #[arg(long, global = true, default_value_t = 1.0)]
    rate: f64,
    /// BvN reconfiguration time (defaults per sweep experiment, else 0.01)
    #[arg(long, global = true)]
    rb: Option<f64>,
    /// rr reconfiguration time; requires --delta
    #[arg(long, global = true, default_value_t = 0.0)]
    rr: f64,
    /// Fixed rr slot length; omitted sizes each rr cycle to its load
    #[arg(long, global = true)]
    delta: Option<f64>,
    /// rr duty cycle when no fixed slot length is given
    #[arg(long, global = true, default_value_t = 1.0)]
    eta: f64,
    /// Decomposition tolerance (Frobenius)
    #[arg(long, global = true, default_value_t = bvn::DEFAULT_EPSILON)]
    eps: f64,
    #[arg(long, global = true, value_enum, default_value_t = StrategyArg::MaxBottleneck)]
    strategy: StrategyArg,
    #[arg(long, global = true, default_value_t = 1)]
    seed: u64,
    #[arg(long, global = true, default_value_t = 30)]
    repeats: usize,
    /// Round fixed-slot rr cycle counts up to whole cycles
    #[arg(long, global = true)]
    quantize: bool,
    /// Weight TM flows by t_l instead of c_l
    #[arg(long, global = true)]
    literal: bool,
    /// Machine-readable output
    #[arg(long, global = true)]
    json: bool,
}

#[derive(ValueEnum, Debug, Clone, Copy)]
enum StrategyArg {
    MinGreedy,
    MaxBottleneck,
}

#[derive(ValueEnum, Debug, Clone, Copy)]
enum Family {
    Mv,
    Mvu,
    Tm,
    Perm,
    Uniform,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate a demand matrix as CSV
    Gen {
        #[arg(long, value_enum)]
        family: Family,
        #[arg(long, default_value_t = 1)]
        v: usize,
        #[arg(long, default_value_t = 0.0)]
        u: f64,
        /// Flows per node (tm)
        #[arg(long, default_value_t = 64)]
        flows: usize,
        #[arg(long, default_value_t = 0.2)]
        tl: f64,
        #[arg(long, default_value_t = 0.7)]
        cl: f64,
        #[arg(long, default_value_t = DEFAULT_NOISE)]
        noise: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Decompose a doubly stochastic matrix into weighted permutations
    Decompose {
        #[arg(long)]
        matrix: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Build and self-verify a schedule
    Schedule {
        /// bvn-direct | rr-direct | rr-oneperm | rr-mulp | rr-upper | rr-upper-plus | comp-pivot | comp-pivot-plus
        #[arg(long)]
        system: String,
        #[arg(long)]
        matrix: PathBuf,
        /// Write the schedule JSON here
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check a schedule against a matrix
    Verify {
        #[arg(long)]
        matrix: PathBuf,
        #[arg(long)]
        schedule: PathBuf,
    },
    /// Closed-form system completion times, crossing points and psi
    Bounds {
        /// Recompute system maxima from schedules on every integer M(v)
        #[arg(long)]
        empirical: bool,
    },
    /// Run a sweep experiment and write CSV
    Sweep {
        /// mv | flows | cl-sparse | cl-dense | tl-sparse | tl-dense
        #[arg(long)]
        experiment: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Errors that map to exit code 1 rather than 2.
#[derive(Debug)]
struct VerificationFailed(String);

impl std::fmt::Display for VerificationFailed {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "verification failed: {}", self.0)
    }
}

impl std::error::Error for VerificationFailed {}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) if e.is::<VerificationFailed>() => {
            eprintln!("{e}");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn system_config(g: &Global, default_rb: f64) -> anyhow::Result<SystemConfig> {
    let cfg = SystemConfig {
        rate: g.rate,
        rb: g.rb.unwrap_or(default_rb),
        rr: g.rr,
        delta: g.delta,
        eta: g.eta,
        quantize: g.quantize,
        bvn: BvnOptions {
            epsilon: g.eps,
            strategy: match g.strategy {
                StrategyArg::MinGreedy => MatchingStrategy::MinGreedy,
                StrategyArg::MaxBottleneck => MatchingStrategy::MaxBottleneck,
            },
            ..BvnOptions::default()
        },
    };
    cfg.validate()?;
    Ok(cfg)
}

fn read_matrix(path: &Path) -> anyhow::Result<DemandMatrix> {
    let f = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    DemandMatrix::read_csv(BufReader::new(f)).with_context(|| format!("reading {}", path.display()))
}

fn output(path: Option<&Path>) -> anyhow::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).with_context(|| format!("creating {}", p.display()))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn dispatch(cli: Cli) -> anyhow::Result<()> {
    let g = cli.global;
    match cli.command {
        Command::Gen {
            family,
            v,
            u,
            flows,
            tl,
            cl,
            noise,
            out,
        } => {
            let m = match family {
                Family::Mv => matrix::make_mv(g.n, v, g.seed)?,
                Family::Mvu => matrix::make_mvu(g.n, v, u, g.seed)?,
                Family::Perm => matrix::make_perm(g.n, g.seed)?,
                Family::Uniform => DemandMatrix::uniform(g.n)?,
                Family::Tm => {
                    let mut p = TmParams::new(tl, flows, cl, g.n, g.seed);
                    p.noise = noise;
                    p.literal = g.literal;
                    traffic::generate_tm(&p)?
                }
            };
            let mut w = output(out.as_deref())?;
            m.write_csv(&mut w)?;
            w.flush()?;
        }
        Command::Decompose { matrix, out } => {
            let cfg = system_config(&g, 0.01)?;
            let m = read_matrix(&matrix)?;
            let d = bvn::decompose(&m, &cfg.bvn)?;
            let mut w = output(out.as_deref())?;
            d.to_json(&mut w)?;
            writeln!(w)?;
            w.flush()?;
        }
        Command::Schedule { system, matrix, out } => {
            let cfg = system_config(&g, 0.01)?;
            let kind: SystemKind = system.parse()?;
            let m = read_matrix(&matrix)?;
            let res = systems::run(kind, &m, &cfg)?;
            let rep = systems::report(&res, &m, &cfg);
            if let Some(path) = out {
                let mut value = res.schedule.to_json_value();
                value["label"] = json!(kind.as_str());
                value["claimed_dct"] = json!(res.claimed_dct);
                let mut w = output(Some(&path))?;
                serde_json::to_writer(&mut w, &value)?;
                w.flush()?;
            }
            if g.json {
                println!("{}", serde_json::to_string_pretty(&rep)?);
            } else {
                println!("system        {}", rep.label);
                println!("dct           {}", rep.simulated_dct);
                println!("claimed       {}", rep.claimed_dct);
                if let Some(t) = rep.throughput {
                    println!("throughput    {t}");
                }
                println!("slots         {}", rep.slots);
                println!("feasible      {}", rep.feasibility.feasible);
                println!("complete      {}", rep.complete);
                println!("eps-complete  {}", rep.epsilon_complete);
                if let Some(s) = rep.skewness {
                    println!("skewness      {s}");
                }
                for b in &rep.bounds {
                    println!("bound {:<16} {:?} {}", b.source, b.kind, b.value);
                }
            }
            if !rep.passed() {
                return Err(VerificationFailed(format!("{:?}", rep.feasibility.violation)).into());
            }
        }
        Command::Verify { matrix, schedule } => {
            let m = read_matrix(&matrix)?;
            let f = File::open(&schedule).with_context(|| format!("opening {}", schedule.display()))?;
            let s = Schedule::from_json(BufReader::new(f), m.n())?;
            if s.traffic.n() != m.n() {
                bail!("schedule is over n={}, matrix has n={}", s.traffic.n(), m.n());
            }
            let feas = schedule::verify_feasible(&s.topology, &s.traffic, g.rate);
            let complete = schedule::verify_complete(&m, &s.traffic);
            let eps_ok = schedule::verify_epsilon(&m, &s.traffic, g.eps);
            let dct = s.completion_time();
            let skew = schedule::skewness(&s.traffic).ok();
            if g.json {
                println!(
                    "{}",
                    serde_json::to_string_pretty(&json!({
                        "feasibility": feas,
                        "complete": complete,
                        "epsilon_complete": eps_ok,
                        "dct": dct,
                        "skewness": skew,
                        "slots": s.topology.len(),
                    }))?
                );
            } else {
                println!("feasible      {}", feas.feasible);
                if let Some(v) = &feas.violation {
                    println!("violation     property #{}: {v:?}", v.property());
                }
                println!("complete      {complete}");
                println!("eps-complete  {eps_ok}");
                println!("dct           {dct}");
                if let Some(k) = skew {
                    println!("skewness      {k}");
                }
            }
            if !feas.feasible || !eps_ok {
                return Err(VerificationFailed(match feas.violation {
                    Some(v) => format!("property #{}: {v:?}", v.property()),
                    None => "demand not delivered within tolerance".into(),
                })
                .into());
            }
        }
        Command::Bounds { empirical } => {
            let rb = g.rb.unwrap_or(0.015);
            let n = g.n;
            let eta = system_config(&g, rb)?.duty_cycle();
            let fams = [SystemFamily::Bvn, SystemFamily::Rr, SystemFamily::Comp];
            let worst: Vec<_> = fams
                .iter()
                .map(|&f| (f, analytics::system_dct_mvu(f, n, rb, eta, g.rate)))
                .collect();
            let mut out = json!({
                "n": n,
                "rb": rb,
                "systems": worst.iter().map(|(f, w)| json!({"system": f, "v": w.v, "u": w.u, "dct": w.dct})).collect::<Vec<_>>(),
                "bvn_direct_crossing": analytics::bvn_direct_crossing(n, rb),
                "bvn_mulp_crossing": analytics::bvn_mulp_crossing(n, rb),
                "low_crossing": analytics::low_crossing(rb, n),
                "psi": analytics::psi(n, rb),
            });
            if empirical {
                let cfg = system_config(&g, rb)?;
                let (b, r, c) = empirical_maxima(n, &cfg, g.seed)?;
                out["empirical"] = json!({"bvn": b, "rr": r, "comp": c, "psi": (r / c).min(b / c) - 1.0});
            }
            if g.json {
                println!("{}", serde_json::to_string_pretty(&out)?);
            } else {
                for (f, w) in &worst {
                    println!(
                        "{:<5} worst v={:<10.4} dct={}",
                        format!("{f:?}").to_lowercase(),
                        w.v,
                        w.dct
                    );
                }
                println!("bvn/direct crossing  {}", out["bvn_direct_crossing"]);
                println!("bvn/mulp crossing    {}", out["bvn_mulp_crossing"]);
                println!("low crossing         {}", out["low_crossing"]);
                println!("psi                  {}", out["psi"]);
                if empirical {
                    println!("empirical            {}", out["empirical"]);
                }
            }
        }
        Command::Sweep { experiment, out } => {
            let exp: Experiment = experiment.parse()?;
            let cfg = SweepConfig {
                n: g.n,
                repeats: g.repeats,
                seed: g.seed,
                rb: g.rb,
                system: system_config(&g, exp.default_rb())?,
                noise: DEFAULT_NOISE,
                literal: g.literal,
                grid: None,
            };
            let rows = sweep::run_sweep(exp, &cfg)?;
            let mut w = output(out.as_deref())?;
            sweep::write_csv(&rows, &mut w)?;
            w.flush()?;
        }
    }
    Ok(())
}

/// Worst completion time of each system over integer M(v), v = 1..n-1.
fn empirical_maxima(n: usize, cfg: &SystemConfig, seed: u64) -> anyhow::Result<(f64, f64, f64)> {
    let mut best = (0.0f64, 0.0f64, 0.0f64);
    for v in 1..n {
        let m = matrix::make_mv(n, v, seed)?;
        let o = sweep::evaluate_matrix(&m, cfg)?;
        best = (best.0.max(o.bvn), best.1.max(o.rr), best.2.max(o.comp));
    }
    Ok(best)
}
