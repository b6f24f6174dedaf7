//! Command-line front end. `run` returns the process exit status:
//! 0 on success, 1 on configuration or input errors, 2 on runtime errors.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use crate::experiments::{self, ExperimentConfig, MetricsReport};
use crate::flow::{max_flow, FlowEdge, FlowNetwork};
use crate::simplex::{solve, LpProblem, LpStatus};
use crate::Error;

pub const THREADS_ENV: &str = "VPMN_SIM_THREADS";

#[derive(Debug, Parser)]
#[command(name = "vpmn-sim", version, about = "VPMN connectivity, routing and localization simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Probability that all devices form one connected component.
    Connectivity(RunArgs),
    /// Single-gateway localization error versus threshold and UE count.
    Localization(RunArgs),
    /// Two gateways on a line: ratio histograms and held-out localization error.
    LineScenario(RunArgs),
    /// Aggregate uplink rate of UMF and PPMF routing.
    Rates(RunArgs),
    /// Max-flow of an edge-list file ("source s", "sink t", "u v capacity").
    SolveFlow { file: PathBuf },
    /// Solve a linear program in the plain-text LP format.
    SolveLp { file: PathBuf },
}

#[derive(Debug, Args)]
struct RunArgs {
    /// JSON configuration file.
    #[arg(long)]
    config: PathBuf,
    /// Output directory (created if missing).
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Overrides `experiment.seed`.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides `experiment.trials`.
    #[arg(long)]
    trials: Option<usize>,
}

/// Failure categories mapped to exit codes.
#[derive(Debug)]
enum Failure {
    Config(String),
    Runtime(String),
}

impl Failure {
    fn code(&self) -> i32 {
        match self {
            Failure::Config(_) => 1,
            Failure::Runtime(_) => 2,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Config(m) | Failure::Runtime(m) => m,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidParameter(_) | Error::Parse { .. } => Failure::Config(e.to_string()),
            other => Failure::Runtime(other.to_string()),
        }
    }
}

/// Parses `argv` (including the program name), runs the command and returns
/// the exit status. Diagnostics go to stderr.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli.command) {
        Ok(()) => 0,
        Err(f) => {
            eprintln!("error: {}", f.message());
            f.code()
        }
    }
}

fn dispatch(cmd: Command) -> Result<(), Failure> {
    match cmd {
        Command::Connectivity(a) => run_experiment("connectivity", &a, |cfg, out| {
            let r = experiments::estimate_p_conn(cfg)?;
            write_report(out, "connectivity", &r)
        }),
        Command::Localization(a) => run_experiment("localization", &a, |cfg, out| {
            let r = experiments::localization_experiment_single_gateway(cfg)?;
            write_report(out, "localization", &r)
        }),
        Command::LineScenario(a) => run_experiment("line-scenario", &a, |cfg, out| {
            let (outcomes, r) = experiments::line_scenario_experiment(cfg)?;
            write_file(out, "line-scenario.histogram.csv", &experiments::line_histograms_csv(&outcomes))?;
            write_report(out, "line-scenario", &r)
        }),
        Command::Rates(a) => run_experiment("rates", &a, |cfg, out| {
            let r = experiments::rate_experiment(cfg)?;
            if let Some(csv) = &r.per_ue_csv {
                write_file(out, "rates.per_ue.csv", csv)?;
            }
            write_report(out, "rates", &r.report)
        }),
        Command::SolveFlow { file } => {
            let text = read(&file)?;
            let s = solve_flow_text(&text)?;
            print!("{s}");
            Ok(())
        }
        Command::SolveLp { file } => {
            let text = read(&file)?;
            let s = solve_lp_text(&text)?;
            print!("{s}");
            Ok(())
        }
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Config(format!("cannot read {}: {e}", path.display())))
}

pub fn load_config(path: &Path) -> crate::Result<ExperimentConfig> {
    let text = fs::read_to_string(path)
        .map_err(|e| Error::InvalidParameter(format!("cannot read config {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Error::Parse {
        line: e.line(),
        message: format!("{} (column {})", e, e.column()),
    })
}

fn thread_pool() -> Result<rayon::ThreadPool, Failure> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Ok(v) = std::env::var(THREADS_ENV) {
        let n: usize = v
            .trim()
            .parse()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| Failure::Config(format!("{THREADS_ENV} must be a positive integer, got {v:?}")))?;
        b = b.num_threads(n);
    }
    b.build().map_err(|e| Failure::Runtime(e.to_string()))
}

/// Outputs of one experiment, buffered so files are written only on success.
type Outputs = Vec<(String, String)>;

fn run_experiment<F>(name: &str, args: &RunArgs, f: F) -> Result<(), Failure>
where
    F: Fn(&ExperimentConfig, &mut Outputs) -> Result<(), Failure> + Send + Sync,
{
    let mut cfg = load_config(&args.config)?;
    if let Some(s) = args.seed {
        cfg.experiment.seed = s;
    }
    if let Some(t) = args.trials {
        cfg.experiment.trials = t;
    }
    cfg.validate()?;
    let pool = thread_pool()?;
    let start = Instant::now();
    let mut outputs = Outputs::new();
    pool.install(|| f(&cfg, &mut outputs))?;
    let seconds = start.elapsed().as_secs_f64();

    fs::create_dir_all(&args.out)
        .map_err(|e| Failure::Runtime(format!("cannot create {}: {e}", args.out.display())))?;
    let meta = json!({
        "subcommand": name,
        "config": cfg,
        "seed": cfg.experiment.seed,
        "version": experiments::VERSION,
        "duration_s": seconds,
        "files": outputs.iter().map(|(n, _)| n.clone()).collect::<Vec<_>>(),
    });
    outputs.push((
        format!("{name}.meta.json"),
        serde_json::to_string_pretty(&meta).expect("config serializes") + "\n",
    ));
    for (file, body) in &outputs {
        let path = args.out.join(file);
        fs::File::create(&path)
            .and_then(|mut h| h.write_all(body.as_bytes()))
            .map_err(|e| Failure::Runtime(format!("cannot write {}: {e}", path.display())))?;
    }
    Ok(())
}

fn write_report(out: &mut Outputs, name: &str, r: &MetricsReport) -> Result<(), Failure> {
    write_file(out, &format!("{name}.csv"), &r.to_csv())
}

fn write_file(out: &mut Outputs, name: &str, body: &str) -> Result<(), Failure> {
    out.push((name.to_string(), body.to_string()));
    Ok(())
}

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

/// Solves an edge-list max-flow instance and formats the answer:
/// `max_flow <value>` then `u v flow` per edge in file order.
pub fn solve_flow_text(text: &str) -> crate::Result<String> {
    let mut source = None;
    let mut sink = None;
    let mut edges = Vec::new();
    for (k, raw) in text.lines().enumerate() {
        let line = k + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let tok: Vec<&str> = body.split_whitespace().collect();
        let node = |s: &str| s.parse::<usize>().map_err(|_| parse_err(line, format!("bad node index `{s}`")));
        match tok.as_slice() {
            ["source", s] => source = Some(node(s)?),
            ["sink", t] => sink = Some(node(t)?),
            [u, v, c] => {
                let cap: f64 = c.parse().map_err(|_| parse_err(line, format!("bad capacity `{c}`")))?;
                if !cap.is_finite() || cap < 0.0 {
                    return Err(parse_err(line, format!("capacity must be finite and non-negative, got {c}")));
                }
                edges.push(FlowEdge {
                    from: node(u)?,
                    to: node(v)?,
                    capacity: cap,
                });
            }
            _ => return Err(parse_err(line, format!("expected `source s`, `sink t` or `u v capacity`, got `{body}`"))),
        }
    }
    let source = source.ok_or_else(|| parse_err(0, "missing `source` line"))?;
    let sink = sink.ok_or_else(|| parse_err(0, "missing `sink` line"))?;
    let n = edges
        .iter()
        .flat_map(|e| [e.from, e.to])
        .chain([source, sink])
        .max()
        .map_or(0, |m| m + 1);
    let net = FlowNetwork::new(n, edges, source, sink)?;
    let sol = max_flow(&net);
    let mut out = format!("max_flow {}\n", sol.total);
    for (e, f) in net.edges().iter().zip(&sol.flows) {
        let _ = writeln!(out, "{} {} {}", e.from, e.to, f);
    }
    Ok(out)
}

/// Solves an LP in text form and formats `status`, `objective` and `x`.
pub fn solve_lp_text(text: &str) -> crate::Result<String> {
    let p: LpProblem = text.parse()?;
    let sol = solve(&p)?;
    let mut out = String::new();
    match sol.status {
        LpStatus::Optimal => {
            let _ = writeln!(out, "status optimal");
            let _ = writeln!(out, "objective {}", sol.objective);
            for (j, x) in sol.x.iter().enumerate() {
                let _ = writeln!(out, "x{j} {x}");
            }
        }
        LpStatus::Infeasible => out.push_str("status infeasible\n"),
        LpStatus::Unbounded => out.push_str("status unbounded\n"),
    }
    Ok(out)
}
