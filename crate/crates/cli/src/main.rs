use std::fs::{self, File};
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use clap::{Parser, Subcommand, ValueEnum};
use timedart::bench::{fischer_suite, lcm_suite, run_bench, BenchInstance, Engine};
use timedart::dart::{trace_line, Step};
use timedart::modelgen::{gen_fig4, gen_fischer, gen_lcm, gen_random_instance, RandomModelParams};
use timedart::{
    dump_model, load_model, reach_naive, DartSearch, Limits, NatInf, ReachResult, ResourceLimit,
    SearchOptions, SearchOrder, ValidatedModel,
};

const EXIT_USAGE: u8 = 1;
const EXIT_LIMIT: u8 = 3;

/// Discrete-time reachability checker for closed timed automata.
#[derive(Debug, Parser)]
#[command(name = "timedart", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum EngineArg {
    Naive,
    Darts,
}

impl From<EngineArg> for Engine {
    fn from(e: EngineArg) -> Self {
        match e {
            EngineArg::Naive => Engine::Naive,
            EngineArg::Darts => Engine::Darts,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OrderArg {
    Fifo,
    Lifo,
}

#[derive(Debug, clap::Args)]
struct LimitArgs {
    /// Give up once the passed-waiting structure holds more entries.
    #[arg(long, default_value_t = Limits::DEFAULT_MAX_STORED)]
    max_stored: usize,
    /// Wall-clock budget per engine run.
    #[arg(long, default_value_t = Limits::DEFAULT_TIMEOUT.as_millis() as u64)]
    timeout_ms: u64,
}

impl LimitArgs {
    fn limits(&self) -> Limits {
        Limits {
            max_stored: self.max_stored,
            timeout: Duration::from_millis(self.timeout_ms),
        }
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Decide whether a location is reachable.
    Check {
        model: PathBuf,
        #[arg(long)]
        goal: String,
        #[arg(long, value_enum, default_value = "darts")]
        engine: EngineArg,
        #[arg(long, value_enum, default_value = "fifo")]
        order: OrderArg,
        #[command(flatten)]
        limits: LimitArgs,
        /// Dump the passed-waiting list after every iteration (darts only).
        #[arg(long)]
        trace: bool,
    },
    /// Write a generated model as JSON.
    Gen {
        #[command(subcommand)]
        kind: GenKind,
        /// Output file; stdout when absent.
        #[arg(long, global = true)]
        out: Option<PathBuf>,
    },
    /// Run engines over a model family and write CSV rows.
    Bench {
        #[arg(value_enum)]
        suite: Suite,
        /// `a..b` (inclusive) or a comma list. Ignored by `custom`.
        params: Option<String>,
        /// For `custom`: `path:goal` pairs separated by commas.
        #[arg(long, value_delimiter = ',')]
        models: Vec<String>,
        #[arg(long, value_enum, value_delimiter = ',', default_value = "naive,darts")]
        engines: Vec<EngineArg>,
        #[arg(long, value_enum, default_value = "fifo")]
        order: OrderArg,
        #[command(flatten)]
        limits: LimitArgs,
        /// Output file; stdout when absent.
        #[arg(long)]
        csv: Option<PathBuf>,
        /// Run cells on all cores. Timings get noisier.
        #[arg(long)]
        parallel: bool,
    },
}

#[derive(Debug, Subcommand)]
enum GenKind {
    Fig4,
    Lcm {
        #[arg(long)]
        n: u32,
        /// Upper bound on y at the goal edge, a number or `inf`.
        #[arg(long, default_value = "inf", value_parser = parse_bound)]
        bound: NatInf,
    },
    Fischer {
        #[arg(long)]
        k: u32,
    },
    Random {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = RandomModelParams::small().clocks)]
        clocks: usize,
        #[arg(long, default_value_t = RandomModelParams::small().locations)]
        locations: usize,
        #[arg(long, default_value_t = RandomModelParams::small().edges)]
        edges: usize,
        #[arg(long, default_value_t = RandomModelParams::small().max_bound)]
        max_bound: u32,
        #[arg(long, default_value_t = RandomModelParams::small().reset_prob)]
        reset_prob: f64,
        #[arg(long, default_value_t = RandomModelParams::small().guard_density)]
        guard_density: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Suite {
    Fischer,
    Lcm,
    Custom,
}

fn parse_bound(s: &str) -> Result<NatInf, String> {
    match s {
        "inf" => Ok(NatInf::Infinite),
        _ => s
            .parse()
            .map(NatInf::Finite)
            .map_err(|e| format!("expected a number or `inf`: {e}")),
    }
}

fn parse_params(s: &str) -> Result<Vec<u32>, String> {
    let num = |t: &str| {
        t.trim()
            .parse::<u32>()
            .map_err(|e| format!("bad parameter `{t}`: {e}"))
    };
    if let Some((a, b)) = s.split_once("..") {
        let (a, b) = (num(a)?, num(b)?);
        if a > b {
            return Err(format!("empty range {s}"));
        }
        return Ok((a..=b).collect());
    }
    s.split(',').map(num).collect()
}

/// Failure that maps to an exit code after printing a message.
struct Failure {
    code: u8,
    message: String,
}

fn usage(message: impl Into<String>) -> Failure {
    Failure {
        code: EXIT_USAGE,
        message: message.into(),
    }
}

fn read_model(path: &Path) -> Result<ValidatedModel, Failure> {
    let bytes = fs::read(path).map_err(|e| usage(format!("{}: {e}", path.display())))?;
    load_model(&bytes).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_USAGE)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let outcome = match cli.command {
        Command::Check {
            model,
            goal,
            engine,
            order,
            limits,
            trace,
        } => check(&model, &goal, engine, order, limits.limits(), trace),
        Command::Gen { kind, out } => gen(kind, out.as_deref()),
        Command::Bench {
            suite,
            params,
            models,
            engines,
            order,
            limits,
            csv,
            parallel,
        } => bench(
            suite,
            params,
            &models,
            &engines,
            order,
            limits.limits(),
            csv,
            parallel,
        ),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn search_options(order: OrderArg, limits: Limits) -> SearchOptions {
    SearchOptions {
        order: match order {
            OrderArg::Fifo => SearchOrder::Fifo,
            OrderArg::Lifo => SearchOrder::Lifo,
        },
        limits,
    }
}

fn stats_line(r: &ReachResult) -> String {
    format!(
        "discovered={} stored={} iterations={} time_ms={}",
        r.discovered,
        r.stored,
        r.iterations,
        r.elapsed.as_millis()
    )
}

fn check(
    path: &Path,
    goal: &str,
    engine: EngineArg,
    order: OrderArg,
    limits: Limits,
    trace: bool,
) -> Result<(), Failure> {
    let model = read_model(path)?;
    let goal = model
        .location_id(goal)
        .ok_or_else(|| usage(format!("unknown goal location `{goal}`")))?;
    let options = search_options(order, limits);
    let outcome = match (engine, trace) {
        (EngineArg::Darts, true) => traced_darts(&model, goal, options),
        (EngineArg::Naive, true) => return Err(usage("--trace needs --engine darts")),
        (EngineArg::Naive, false) => reach_naive(&model, goal, options),
        (EngineArg::Darts, false) => timedart::reach_darts(&model, goal, options),
    };
    match outcome {
        Ok(r) => {
            println!(
                "{}",
                if r.reachable {
                    "REACHABLE"
                } else {
                    "UNREACHABLE"
                }
            );
            eprintln!("{}", stats_line(&r));
            Ok(())
        }
        Err(limit) => {
            eprintln!("{}", stats_line(&limit.partial));
            Err(Failure {
                code: EXIT_LIMIT,
                message: limit.to_string(),
            })
        }
    }
}

fn traced_darts(
    model: &ValidatedModel,
    goal: timedart::LocationId,
    options: SearchOptions,
) -> Result<ReachResult, ResourceLimit> {
    let mut search = DartSearch::new(model, Some(goal), options);
    loop {
        let step = search.step()?;
        let picked = match &step {
            Step::Expanded(p) | Step::GoalReached(Some(p)) => Some(p),
            Step::GoalReached(None) | Step::Exhausted => None,
        };
        if let Some(p) = picked {
            let iteration = search.result().iterations;
            eprintln!(
                "{}",
                trace_line(model, iteration, p, search.passed_waiting())
            );
        }
        if !matches!(step, Step::Expanded(_)) {
            return Ok(search.result());
        }
    }
}

fn gen(kind: GenKind, out: Option<&Path>) -> Result<(), Failure> {
    let model = match kind {
        GenKind::Fig4 => gen_fig4(),
        GenKind::Lcm { n, bound } => {
            if n == 0 || bound == NatInf::Finite(0) {
                return Err(usage("lcm needs --n >= 1 and --bound >= 1"));
            }
            gen_lcm(n, bound)
        }
        GenKind::Fischer { k } => {
            if k < 2 {
                return Err(usage("fischer needs --k >= 2"));
            }
            gen_fischer(k)
        }
        GenKind::Random {
            seed,
            clocks,
            locations,
            edges,
            max_bound,
            reset_prob,
            guard_density,
        } => {
            let params = RandomModelParams {
                clocks,
                locations,
                edges,
                max_bound,
                reset_prob,
                guard_density,
                seed,
            };
            params.check().map_err(usage)?;
            let (model, goal) = gen_random_instance(&params);
            eprintln!("goal={}", model.location_name(goal));
            model
        }
    };
    let mut text = dump_model(&model);
    text.push('\n');
    match out {
        Some(path) => fs::write(path, text).map_err(|e| usage(format!("{}: {e}", path.display()))),
        None => io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| usage(e.to_string())),
    }
}

#[allow(clippy::too_many_arguments)]
fn bench(
    suite: Suite,
    params: Option<String>,
    models: &[String],
    engines: &[EngineArg],
    order: OrderArg,
    limits: Limits,
    csv: Option<PathBuf>,
    parallel: bool,
) -> Result<(), Failure> {
    let params = || -> Result<Vec<u32>, Failure> {
        let range = params
            .as_deref()
            .ok_or_else(|| usage("missing parameter range"))?;
        parse_params(range).map_err(usage)
    };
    let instances: Vec<BenchInstance> = match suite {
        Suite::Fischer => {
            let ks = params()?;
            if ks.iter().any(|&k| k < 2) {
                return Err(usage("fischer needs k >= 2"));
            }
            fischer_suite(&ks)
        }
        Suite::Lcm => {
            let ns = params()?;
            if ns.contains(&0) {
                return Err(usage("lcm needs n >= 1"));
            }
            lcm_suite(&ns)
        }
        Suite::Custom => {
            if models.is_empty() {
                return Err(usage("custom needs --models path:goal,..."));
            }
            models
                .iter()
                .enumerate()
                .map(|(i, entry)| custom_instance(i, entry))
                .collect::<Result<_, _>>()?
        }
    };
    let engines: Vec<Engine> = engines.iter().map(|&e| e.into()).collect();
    let options = search_options(order, limits);
    let written = match csv {
        Some(path) => {
            let file =
                File::create(&path).map_err(|e| usage(format!("{}: {e}", path.display())))?;
            run_bench(&instances, &engines, options, parallel, file)
        }
        None => run_bench(&instances, &engines, options, parallel, io::stdout().lock()),
    };
    written
        .map(drop)
        .map_err(|e| usage(format!("writing CSV: {e}")))
}

/// `path:goal`; the model column is the file stem and the param column the
/// position in the list.
fn custom_instance(index: usize, entry: &str) -> Result<BenchInstance, Failure> {
    let (path, goal) = entry
        .rsplit_once(':')
        .ok_or_else(|| usage(format!("expected path:goal, got `{entry}`")))?;
    let path = Path::new(path);
    let model = read_model(path)?;
    let goal = model.location_id(goal).ok_or_else(|| {
        usage(format!(
            "{}: unknown goal location `{goal}`",
            path.display()
        ))
    })?;
    Ok(BenchInstance {
        model_name: path
            .file_stem()
            .map_or_else(|| entry.to_string(), |s| s.to_string_lossy().into_owned()),
        param: index as u32,
        model,
        goal,
    })
}
