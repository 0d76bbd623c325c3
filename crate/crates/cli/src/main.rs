use std::io::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Duration;

use clap::{Parser, ValueEnum};
use upsynth::io::{
    gen_grid, gen_maze, parse_model, parse_policy, parse_spec, serialize_model, GridLayout, ResultRecord,
};
use upsynth::model::{induce_chain, Interval, IntervalPomdp};
use upsynth::synth::{run_ccp, CcpParams, ObjectiveChoice, SynthesisStatus};
use upsynth::verify::check;

/// Default per-solve time limit of the convex solver, in seconds.
const SOLVER_TIMEOUT_VAR: &str = "UPSYNTH_SOLVER_TIMEOUT";

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Benchmark {
    Grid,
    Maze,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Objective {
    Reach,
    Cost,
}

/// Synthesize robust observation-based policies for interval POMDPs.
///
/// Exit status: 0 certified, 2 infeasible (no certified policy found),
/// 3 timeout, 1 error.
#[derive(Debug, Parser)]
#[command(name = "upsynth", version)]
struct Args {
    /// Model file to load.
    #[arg(long, conflicts_with = "gen", required_unless_present = "gen")]
    model: Option<PathBuf>,
    /// Generate a benchmark model instead of loading one.
    #[arg(long, value_enum)]
    gen: Option<Benchmark>,
    /// Slip interval of generated models: `P` or `LO,HI` (default 0.98 for
    /// the grid, 0.97 for the maze).
    #[arg(long, value_parser = parse_interval)]
    slip: Option<Interval>,
    /// Grid width.
    #[arg(long, default_value_t = GridLayout::default().width)]
    width: usize,
    /// Grid height.
    #[arg(long, default_value_t = GridLayout::default().height)]
    height: usize,
    /// Grid trap cells as `x,y;x,y;…` (default `1,2;2,0`).
    #[arg(long, value_parser = parse_traps)]
    traps: Option<Vec<(usize, usize)>>,
    /// Write the model in the text format to this path.
    #[arg(long)]
    write_model: Option<PathBuf>,

    /// `reach>=λ@SET` or `cost<=κ@SET` with SET one of `target`, `goal` or a
    /// comma-separated list of states. Repeat to conjoin.
    #[arg(long = "spec", required = true)]
    specs: Vec<String>,
    /// Specification family whose initial-state value is optimized.
    #[arg(long, value_enum)]
    objective: Option<Objective>,

    #[arg(long, default_value_t = 1.0)]
    tau0: f64,
    #[arg(long, default_value_t = 2.0)]
    mu: f64,
    #[arg(long, default_value_t = 1e6)]
    tau_max: f64,
    #[arg(long, default_value_t = 1e-4)]
    eps_graph: f64,
    /// Iterations per start.
    #[arg(long, default_value_t = 500)]
    max_iters: usize,
    #[arg(long, default_value_t = 5)]
    restarts: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Wall-clock limit of the whole synthesis, in seconds.
    #[arg(long)]
    timeout: Option<f64>,

    /// Write the result record here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Verify the policy in this file (a result record, `{"probs": …}` or a
    /// bare table) instead of synthesizing.
    #[arg(long)]
    verify_only: Option<PathBuf>,
    /// Leave wall-clock timings out of the record.
    #[arg(long)]
    omit_timings: bool,
}

fn parse_interval(text: &str) -> Result<Interval, String> {
    let parse = |s: &str| s.trim().parse::<f64>().map_err(|e| format!("`{s}`: {e}"));
    match text.split_once(',') {
        Some((lo, hi)) => Ok(Interval::new(parse(lo)?, parse(hi)?)),
        None => Ok(Interval::point(parse(text)?)),
    }
}

fn parse_traps(text: &str) -> Result<Vec<(usize, usize)>, String> {
    text.split(';')
        .filter(|s| !s.trim().is_empty())
        .map(|cell| {
            let (x, y) = cell.split_once(',').ok_or_else(|| format!("trap `{cell}` is not `x,y`"))?;
            let coord = |s: &str| s.trim().parse::<usize>().map_err(|e| format!("`{s}`: {e}"));
            Ok((coord(x)?, coord(y)?))
        })
        .collect()
}

fn positive_seconds(what: &str, s: f64) -> Result<Duration, String> {
    Duration::try_from_secs_f64(s).map_err(|_| format!("{what} must be a nonnegative number of seconds, got {s}"))
}

fn load_model(args: &Args) -> Result<IntervalPomdp, String> {
    let model = match (&args.model, args.gen) {
        (Some(path), _) => {
            let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
            parse_model(&text).map_err(|e| format!("{}: {e}", path.display()))?
        }
        (None, Some(Benchmark::Grid)) => {
            let traps = args.traps.clone().unwrap_or_else(|| GridLayout::default().traps);
            let slip = args.slip.unwrap_or(Interval::point(0.98));
            gen_grid(args.width, args.height, slip, &traps).map_err(|e| e.to_string())?
        }
        (None, Some(Benchmark::Maze)) => gen_maze(args.slip.unwrap_or(Interval::point(0.97))).map_err(|e| e.to_string())?,
        (None, None) => return Err("either --model or --gen is required".into()),
    };
    if let Some(path) = &args.write_model {
        std::fs::write(path, serialize_model(&model)).map_err(|e| format!("{}: {e}", path.display()))?;
    }
    Ok(model)
}

fn params(args: &Args) -> Result<CcpParams, String> {
    let mut p = CcpParams {
        tau0: args.tau0,
        mu: args.mu,
        tau_max: args.tau_max,
        eps_graph: args.eps_graph,
        max_iters: args.max_iters,
        restarts: args.restarts,
        seed: args.seed,
        timeout: args.timeout.map(|s| positive_seconds("--timeout", s)).transpose()?,
        objective: match args.objective {
            None => ObjectiveChoice::Auto,
            Some(Objective::Reach) => ObjectiveChoice::Reach,
            Some(Objective::Cost) => ObjectiveChoice::Cost,
        },
        ..CcpParams::default()
    };
    if !(p.tau0 > 0.0 && p.mu >= 0.0 && p.tau_max >= p.tau0) {
        return Err("penalty schedule needs tau0 > 0, mu >= 0 and tau-max >= tau0".into());
    }
    if let Ok(v) = std::env::var(SOLVER_TIMEOUT_VAR) {
        let secs: f64 = v.parse().map_err(|_| format!("{SOLVER_TIMEOUT_VAR}=`{v}` is not a number"))?;
        p.solver.time_limit = Some(positive_seconds(SOLVER_TIMEOUT_VAR, secs)?);
    }
    Ok(p)
}

fn run(args: &Args) -> Result<SynthesisStatus, String> {
    let model = load_model(args)?;
    let specs = args
        .specs
        .iter()
        .map(|s| parse_spec(s, &model))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| e.to_string())?;

    let record = match &args.verify_only {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
            let policy = parse_policy(&text).map_err(|e| format!("{}: {e}", path.display()))?;
            let chain = induce_chain(&model, &policy).map_err(|e| e.to_string())?;
            let verification = check(&chain, &specs).map_err(|e| e.to_string())?;
            ResultRecord::from_verification(&model, &policy, &verification)
        }
        None => {
            let params = params(args)?;
            let result = run_ccp(&model, &specs, &params).map_err(|e| e.to_string())?;
            ResultRecord::from_synthesis(&model, &result, &params, !args.omit_timings)
        }
    };

    let json = record.to_json();
    match &args.out {
        Some(path) => std::fs::write(path, json + "\n").map_err(|e| format!("{}: {e}", path.display()))?,
        None => writeln!(std::io::stdout(), "{json}").map_err(|e| format!("stdout: {e}"))?,
    }
    for s in &record.specs {
        let value = s.value.map_or("inf".to_string(), |v| format!("{v}"));
        eprintln!("{}: value {value} ({})", s.spec, if s.satisfied { "holds" } else { "violated" });
    }
    eprintln!("status: {}", status_name(record.status));
    Ok(record.status)
}

fn status_name(s: SynthesisStatus) -> &'static str {
    match s {
        SynthesisStatus::Certified => "certified",
        SynthesisStatus::Infeasible => "infeasible",
        SynthesisStatus::Timeout => "timeout",
    }
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(args) => args,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(&args) {
        Ok(SynthesisStatus::Certified) => ExitCode::SUCCESS,
        Ok(SynthesisStatus::Infeasible) => ExitCode::from(2),
        Ok(SynthesisStatus::Timeout) => ExitCode::from(3),
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
