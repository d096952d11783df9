use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use nevlab::acceptance::run_suite;
use nevlab::foliation::{classify_point, foliate, horocyclic_profile};
use nevlab::scenario::{csv, run_scenario, sweep_csv, Context, MethodSpec, Scenario, ScenarioError};

#[derive(Parser)]
#[command(name = "nevlab", version, about = "Boundary-regularity diagnostics for Pick functions")]
struct Cli {
    /// Scenario file with measure, function and gauge definitions.
    #[arg(long, global = true)]
    scenario: Option<PathBuf>,
    /// Directory for artifacts; `horocycle` and `sweep` print to stdout without it.
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
    /// Seed for quasi-random nets (overrides the scenario seed).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads.
    #[arg(long, global = true, env = "NEVLAB_JOBS")]
    jobs: Option<usize>,
    /// Direct/kernel agreement tolerance (overrides the scenario value).
    #[arg(long, global = true)]
    tolerance: Option<f64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Auto,
    Direct,
    Kernel,
    Both,
}

#[derive(Subcommand)]
enum Command {
    /// Execute every task of the scenario.
    Run,
    /// Run an acceptance suite (or `all`).
    Verify { suite: String },
    /// Spectral class at each point, as a JSON array.
    Classify {
        #[arg(long)]
        function: String,
        #[arg(long = "tau", required = true, allow_negative_numbers = true)]
        taus: Vec<f64>,
    },
    /// Spectral class on an evenly spaced set of points, as a JSON array.
    Foliate {
        #[arg(long)]
        function: String,
        #[arg(long, allow_negative_numbers = true)]
        from: f64,
        #[arg(long, allow_negative_numbers = true)]
        to: f64,
        #[arg(long, default_value_t = 21)]
        points: usize,
    },
    /// Horocyclic profile as CSV (beta, sup).
    Horocycle {
        #[arg(long)]
        function: String,
        #[arg(long)]
        gamma: String,
        #[arg(long, default_value_t = 1.0)]
        alpha: f64,
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        tau: f64,
        #[arg(long, value_delimiter = ',')]
        betas: Option<Vec<f64>>,
        #[arg(long, default_value_t = 2000)]
        net_size: usize,
    },
    /// Averaged quotient over the scenario grid as CSV.
    Sweep {
        #[arg(long)]
        function: String,
        #[arg(long)]
        k: String,
        #[arg(long)]
        lambda: String,
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        tau: f64,
        #[arg(long, value_enum, default_value_t = MethodArg::Auto)]
        method: MethodArg,
    },
}

fn fail(e: &ScenarioError) -> ExitCode {
    eprintln!("error: {e}");
    ExitCode::from(e.exit_code() as u8)
}

fn load(cli: &Cli) -> Result<Scenario, ScenarioError> {
    let path = cli
        .scenario
        .as_deref()
        .ok_or_else(|| ScenarioError::Schema("--scenario is required for this command".into()))?;
    let mut s = Scenario::load(path)?;
    if let Some(seed) = cli.seed {
        s.seed = seed;
    }
    if let Some(t) = cli.tolerance {
        s.tolerance = Some(t);
    }
    Ok(s)
}

fn lookup<'a, T>(map: &'a std::collections::BTreeMap<String, T>, kind: &str, name: &str) -> Result<&'a T, ScenarioError> {
    map.get(name).ok_or_else(|| ScenarioError::Schema(format!("unknown {kind} '{name}'")))
}

fn emit(out_dir: Option<&Path>, file: &str, text: &str) -> Result<(), ScenarioError> {
    match out_dir {
        Some(dir) => {
            std::fs::create_dir_all(dir).map_err(|e| ScenarioError::Io(format!("{}: {e}", dir.display())))?;
            let p = dir.join(file);
            std::fs::write(&p, text).map_err(|e| ScenarioError::Io(format!("{}: {e}", p.display())))
        }
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn to_json<T: serde::Serialize>(v: &T) -> Result<String, ScenarioError> {
    serde_json::to_string_pretty(v)
        .map(|s| s + "\n")
        .map_err(|e| ScenarioError::Io(e.to_string()))
}

fn dispatch(cli: &Cli) -> Result<ExitCode, ScenarioError> {
    let out_dir = cli.out_dir.as_deref();
    match &cli.command {
        Command::Run => {
            let s = load(cli)?;
            if cli.jobs.is_none() {
                if let Some(j) = s.jobs {
                    set_jobs(j);
                }
            }
            let report = run_scenario(&s, out_dir.unwrap_or(Path::new(".")))?;
            print!("{}", report.table());
            Ok(ExitCode::from(report.exit_code as u8))
        }
        Command::Verify { suite } => {
            let results = run_suite(suite).map_err(|e| ScenarioError::Schema(e.to_string()))?;
            for c in &results {
                println!("{c}");
            }
            let ok = results.iter().all(|c| c.passed);
            Ok(if ok { ExitCode::SUCCESS } else { ExitCode::from(1) })
        }
        Command::Classify { function, taus } => {
            let ctx = Context::build(&load(cli)?)?;
            let f = lookup(&ctx.functions, "function", function)?;
            let v = taus.iter().map(|&t| classify_point(f, t)).collect::<Result<Vec<_>, _>>()?;
            print!("{}", to_json(&v)?);
            Ok(ExitCode::SUCCESS)
        }
        Command::Foliate { function, from, to, points } => {
            let ctx = Context::build(&load(cli)?)?;
            let f = lookup(&ctx.functions, "function", function)?;
            if *points < 2 || !(to > from) {
                return Err(ScenarioError::Schema("foliate needs --to > --from and at least 2 points".into()));
            }
            let taus: Vec<f64> = (0..*points)
                .map(|i| from + (to - from) * i as f64 / (*points - 1) as f64)
                .collect();
            print!("{}", to_json(&foliate(f, &taus)?)?);
            Ok(ExitCode::SUCCESS)
        }
        Command::Horocycle { function, gamma, alpha, tau, betas, net_size } => {
            let ctx = Context::build(&load(cli)?)?;
            let f = lookup(&ctx.functions, "function", function)?;
            let g = lookup(&ctx.gauges, "gauge", gamma)?;
            let betas = betas.clone().unwrap_or_else(|| (1..=10).map(|k| 2f64.powi(k)).collect());
            let prof = horocyclic_profile(f, g, *alpha, *tau, &betas, *net_size, ctx.seed)?;
            let rows: Vec<Vec<f64>> = prof.into_iter().map(|(b, s)| vec![b, s]).collect();
            emit(out_dir, "horocycle.csv", &csv(&["beta", "sup"], &rows))?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Sweep { function, k, lambda, tau, method } => {
            let ctx = Context::build(&load(cli)?)?;
            let f = lookup(&ctx.functions, "function", function)?;
            let (k, l) = (lookup(&ctx.gauges, "gauge", k)?, lookup(&ctx.gauges, "gauge", lambda)?);
            let method = match method {
                MethodArg::Auto => MethodSpec::Auto,
                MethodArg::Direct => MethodSpec::Direct,
                MethodArg::Kernel => MethodSpec::Kernel,
                MethodArg::Both => MethodSpec::Both,
            };
            let text = sweep_csv(f, k, l, *tau, &ctx.grid, method, ctx.tolerance)?;
            emit(out_dir, "sweep.csv", &text)?;
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn set_jobs(n: usize) {
    // a pool can be installed once per process; later calls are no-ops
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global();
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(j) = cli.jobs {
        set_jobs(j);
    }
    match dispatch(&cli) {
        Ok(code) => code,
        Err(e) => fail(&e),
    }
}
