//! Command-line front end.

use std::fmt::Write as _;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::abstraction::InstSetMode;
use crate::engine::{backward_reach, prepare, AbstractionMode, Concretization, EngineConfig, Verdict};
use crate::logic::Sort;
use crate::oracle::{default_int_bounds, instantiate, ConcreteState, Run, Verdict as OracleVerdict};
use crate::solver::Theory;
use crate::system::{parse_system, print_system, SafetyProblem};

pub const EXIT_SAFE: i32 = 0;
pub const EXIT_UNSAFE: i32 = 1;
pub const EXIT_UNKNOWN: i32 = 2;
pub const EXIT_USAGE: i32 = 3;

#[derive(Parser, Debug)]
#[command(name = "arraymc", version, about = "Safety checker for array-based transition systems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Backward reachability from the unsafe states.
    Check(CheckArgs),
    /// Explicit-state search on one finite instance.
    Oracle(OracleArgs),
    /// Print the problem as the engine sees it, after acceleration and transformation.
    Dump(DumpArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum AbstractionArg {
    Runtime,
    Transform,
    Off,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Switch {
    On,
    Off,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum InstSetArg {
    Default,
    AllVars,
}

#[derive(Args, Debug)]
struct EngineArgs {
    file: PathBuf,
    #[arg(long, value_enum, default_value = "runtime")]
    abstraction: AbstractionArg,
    /// Defaults to on under difference arithmetic, off otherwise.
    #[arg(long, value_enum)]
    accelerate: Option<Switch>,
    #[arg(long, value_enum, default_value = "default")]
    inst_set: InstSetArg,
}

#[derive(Args, Debug)]
struct CheckArgs {
    #[command(flatten)]
    engine: EngineArgs,
    #[arg(long, default_value_t = 200)]
    max_iters: usize,
    #[arg(long, default_value_t = 20_000)]
    max_nodes: usize,
    /// Largest instance used to confirm a counterexample.
    #[arg(long, default_value_t = 6)]
    oracle_n: usize,
    /// Write every frontier node as a JSON line.
    #[arg(long, num_args = 0..=1, default_missing_value = "frontier.jsonl")]
    dump_frontier: Option<PathBuf>,
    /// Print the concrete run of a confirmed counterexample.
    #[arg(long)]
    trace: bool,
    /// Write each solver query to this directory.
    #[arg(long)]
    dump_smt: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct OracleArgs {
    file: PathBuf,
    #[arg(long)]
    n: usize,
    #[arg(long, allow_hyphen_values = true)]
    int_lo: Option<i64>,
    #[arg(long, allow_hyphen_values = true)]
    int_hi: Option<i64>,
}

#[derive(Args, Debug)]
struct DumpArgs {
    #[command(flatten)]
    engine: EngineArgs,
}

#[derive(Debug)]
struct Failure(String);

fn load(path: &PathBuf) -> Result<SafetyProblem, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure(format!("{}: {e}", path.display())))?;
    parse_system(&text).map_err(|e| Failure(format!("{}:{e}", path.display())))
}

impl EngineArgs {
    fn config(&self, p: &SafetyProblem) -> EngineConfig {
        EngineConfig {
            abstraction: match self.abstraction {
                AbstractionArg::Runtime => AbstractionMode::Runtime,
                AbstractionArg::Transform => AbstractionMode::Transform,
                AbstractionArg::Off => AbstractionMode::Off,
            },
            accelerate: match self.accelerate {
                Some(s) => s == Switch::On,
                None => p.theory == Theory::DiffArith,
            },
            inst_set: match self.inst_set {
                InstSetArg::Default => InstSetMode::Default,
                InstSetArg::AllVars => InstSetMode::AllVars,
            },
            ..EngineConfig::default()
        }
    }
}

fn on_off(b: bool) -> &'static str {
    if b {
        "on"
    } else {
        "off"
    }
}

/// A state as `name=value` pairs, arrays as lists.
pub fn render_state(p: &SafetyProblem, s: &ConcreteState) -> String {
    let value = |sort: &Sort, x: i64| match sort {
        Sort::Enum(e) => p
            .sig
            .enum_consts(e)
            .get(x as usize)
            .cloned()
            .unwrap_or_else(|| x.to_string()),
        _ => x.to_string(),
    };
    let parts: Vec<String> = p
        .vars
        .iter()
        .zip(&s.vals)
        .map(|(v, vals)| match &v.sort {
            Sort::Array(e) => {
                let cells: Vec<String> = vals.iter().map(|&x| value(e, x)).collect();
                format!("{}=[{}]", v.name, cells.join(" "))
            }
            sort => format!("{}={}", v.name, value(sort, vals[0])),
        })
        .collect();
    parts.join(" ")
}

fn render_run(out: &mut String, p: &SafetyProblem, run: &Run) {
    writeln!(out, "  init {}", render_state(p, &run.init)).unwrap();
    for step in &run.steps {
        let params: Vec<String> = step.params.iter().map(i64::to_string).collect();
        writeln!(out, "  {}({}) {}", step.transition, params.join(","), render_state(p, &step.state)).unwrap();
    }
}

fn check(args: &CheckArgs) -> Result<(i32, String), Failure> {
    let p = load(&args.engine.file)?;
    let cfg = EngineConfig {
        max_iters: args.max_iters,
        max_nodes: args.max_nodes,
        oracle_n: args.oracle_n,
        dump_frontier: args.dump_frontier.clone(),
        dump_smt: args.dump_smt.clone(),
        ..args.engine.config(&p)
    };
    let r = backward_reach(&p, &cfg).map_err(|e| Failure(e.to_string()))?;
    let mut out = String::new();
    writeln!(out, "file: {}", args.engine.file.display()).unwrap();
    writeln!(out, "system: {}", p.name).unwrap();
    writeln!(out, "theory: {}", p.theory).unwrap();
    writeln!(out, "abstraction: {}", cfg.abstraction).unwrap();
    writeln!(out, "inst-set: {}", match cfg.inst_set {
        InstSetMode::Default => "default",
        InstSetMode::AllVars => "all-vars",
    })
    .unwrap();
    writeln!(out, "accelerate: {}", on_off(cfg.accelerate)).unwrap();
    writeln!(out, "max-iters: {}", cfg.max_iters).unwrap();
    writeln!(out, "max-nodes: {}", cfg.max_nodes).unwrap();
    writeln!(out, "oracle-n: {}", cfg.oracle_n).unwrap();
    if let Some(d) = &cfg.dump_frontier {
        writeln!(out, "dump-frontier: {}", d.display()).unwrap();
    }
    if let Some(d) = &cfg.dump_smt {
        writeln!(out, "dump-smt: {}", d.display()).unwrap();
    }
    if cfg.accelerate {
        let names = if r.accelerated.is_empty() { "none".to_string() } else { r.accelerated.join(", ") };
        writeln!(out, "accelerated: {names}").unwrap();
    }
    let code = match &r.verdict {
        Verdict::Safe => {
            writeln!(out, "verdict: SAFE").unwrap();
            EXIT_SAFE
        }
        Verdict::Unsafe { trace, concretization } => {
            let code = match concretization {
                Concretization::Confirmed(..) => {
                    writeln!(out, "verdict: UNSAFE").unwrap();
                    EXIT_UNSAFE
                }
                Concretization::Spurious => {
                    writeln!(out, "verdict: UNKNOWN (spurious counterexample)").unwrap();
                    EXIT_UNKNOWN
                }
                Concretization::Unknown(why) => {
                    writeln!(out, "verdict: UNKNOWN (unconfirmed counterexample: {why})").unwrap();
                    EXIT_UNKNOWN
                }
                Concretization::NotAttempted => {
                    writeln!(out, "verdict: UNKNOWN (unconfirmed counterexample)").unwrap();
                    EXIT_UNKNOWN
                }
            };
            writeln!(out, "trace: {trace}").unwrap();
            if let Concretization::Confirmed(n, run) = concretization {
                writeln!(out, "confirmed at N={n}").unwrap();
                if args.trace {
                    render_run(&mut out, &p, run);
                }
            }
            code
        }
        Verdict::Unknown(why) => {
            writeln!(out, "verdict: UNKNOWN ({why})").unwrap();
            EXIT_UNKNOWN
        }
        Verdict::ResourceLimit(why) => {
            writeln!(out, "verdict: RESOURCE LIMIT ({why})").unwrap();
            EXIT_UNKNOWN
        }
    };
    writeln!(out, "iterations: {}", r.stats.iterations).unwrap();
    writeln!(out, "nodes: {}", r.stats.nodes).unwrap();
    writeln!(out, "deleted: {}", r.stats.deleted).unwrap();
    writeln!(out, "solver-calls: {}", r.stats.solver_calls).unwrap();
    Ok((code, out))
}

fn oracle(args: &OracleArgs) -> Result<(i32, String), Failure> {
    let p = load(&args.file)?;
    let (lo, hi) = default_int_bounds(&p, args.n);
    let (lo, hi) = (args.int_lo.unwrap_or(lo), args.int_hi.unwrap_or(hi));
    let fail = |e: crate::oracle::OracleError| Failure(e.to_string());
    let inst = instantiate(&p, args.n, lo, hi).map_err(fail)?;
    let r = inst.forward_reach().map_err(fail)?;
    let mut out = String::new();
    writeln!(out, "file: {}", args.file.display()).unwrap();
    writeln!(out, "n: {}", args.n).unwrap();
    writeln!(out, "int-lo: {lo}").unwrap();
    writeln!(out, "int-hi: {hi}").unwrap();
    let code = match &r.verdict {
        OracleVerdict::SafeUpTo(n) => {
            writeln!(out, "verdict: SAFE at N={n}").unwrap();
            EXIT_SAFE
        }
        OracleVerdict::UnsafeAt(n, run) => {
            writeln!(out, "verdict: UNSAFE at N={n}").unwrap();
            render_run(&mut out, &p, run);
            EXIT_UNSAFE
        }
    };
    writeln!(out, "explored: {}", r.explored).unwrap();
    Ok((code, out))
}

fn dump(args: &DumpArgs) -> Result<(i32, String), Failure> {
    let p = load(&args.engine.file)?;
    let cfg = args.engine.config(&p);
    let (q, _, _) = prepare(&p, &cfg).map_err(|e| Failure(e.to_string()))?;
    Ok((EXIT_SAFE, print_system(&q)))
}

/// Runs the command line and returns the exit code together with what goes
/// to standard output, or the diagnostic for standard error.
pub fn execute<I, T>(args: I) -> (i32, String, String)
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_SAFE };
            let text = e.render().to_string();
            return if e.use_stderr() { (code, String::new(), text) } else { (code, text, String::new()) };
        }
    };
    let res = match &cli.command {
        Command::Check(a) => check(a),
        Command::Oracle(a) => oracle(a),
        Command::Dump(a) => dump(a),
    };
    match res {
        Ok((code, out)) => (code, out, String::new()),
        Err(Failure(msg)) => (EXIT_USAGE, String::new(), format!("error: {msg}\n")),
    }
}

pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let (code, out, err) = execute(args);
    print!("{out}");
    eprint!("{err}");
    code
}
