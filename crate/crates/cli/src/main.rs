use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use gop_core::bench::{run_bench, BenchError, BenchReport};
use gop_core::bmgop::{bmgop_compute, solve_bmgop_exact, solve_bmgop_ip, BmgopError, BmgopInstance, ConditionMode, DEFAULT_DELTA};
use gop_core::gbgop::{
    build_gbgop_ip, count_gbgop_solutions, feasibility_heuristic, reduce_to_r_star, solve_gbgop_exact, solve_gbgop_ip,
    GbgopError, GbgopInstance,
};
use gop_core::generate::{gen_campaign, gen_random, CampaignParams, ProblemKind, RandomParams};
use gop_core::io::{parse_instance, serialize_instance, to_canonical_json, Instance};
use gop_core::ip::emit_lp;
use gop_core::num::fmt_num;
use gop_core::reductions::{encode_max_k_cover, encode_monsat, encode_set_cover, CoverProblem, MonotoneCnf};
use gop_core::report::{trace_text, ReportStatus, SolutionReport};
use gop_core::{ActionPoint, Domain, Limits};

const EXIT_INFEASIBLE: u8 = 1;
const EXIT_INPUT: u8 = 2;
const EXIT_LIMIT: u8 = 3;

/// Exact and approximate solvers for action placement on a grid map.
#[derive(Parser)]
#[command(name = "gop", version)]
struct Cli {
    /// Print machine-readable JSON on stdout instead of text.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check an instance document and summarize it.
    Validate { file: PathBuf },
    /// Solve an instance.
    Solve(SolveArgs),
    /// Print the Theta_out-avoiding pairs R and the dominance-reduced set R*.
    Reduce { file: PathBuf },
    /// Write the integer program in LP format.
    EmitLp {
        file: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
        /// Restrict the goal-based program to R*.
        #[arg(long)]
        reduced: bool,
    },
    /// Turn a classical covering or satisfiability problem into an instance.
    Encode {
        problem: EncodeKind,
        file: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Generate the campaign scenario or a seeded random instance.
    Gen(GenArgs),
    /// Count the solutions of a small goal-based instance.
    Count {
        file: PathBuf,
        /// Stop counting once this many solutions are found.
        #[arg(long)]
        cap: Option<u64>,
    },
    /// Compare the greedy against the exact optimum on every `*.json` in a directory.
    Bench {
        dir: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
        #[arg(long, default_value_t = DEFAULT_DELTA)]
        delta: f64,
        #[arg(long, default_value_t = ConditionMode::Weighted)]
        condition: ConditionMode,
        #[command(flatten)]
        limits: LimitArgs,
    },
}

#[derive(Args)]
struct SolveArgs {
    file: PathBuf,
    #[arg(long, value_enum)]
    method: Method,
    #[arg(long, default_value_t = DEFAULT_DELTA)]
    delta: f64,
    #[arg(long, default_value_t = ConditionMode::Weighted)]
    condition: ConditionMode,
    /// Write the greedy trace to this file.
    #[arg(long)]
    trace: Option<PathBuf>,
    /// Solve the goal-based program over R* instead of R.
    #[arg(long)]
    reduced: bool,
    #[command(flatten)]
    limits: LimitArgs,
}

#[derive(Args)]
struct LimitArgs {
    /// Node budget for the exact searches.
    #[arg(long)]
    max_nodes: Option<u64>,
    /// Wall-clock budget in seconds for the exact searches.
    #[arg(long)]
    max_seconds: Option<f64>,
}

impl LimitArgs {
    fn limits(&self) -> Limits {
        Limits {
            max_nodes: self.max_nodes,
            max_seconds: self.max_seconds,
        }
    }
}

#[derive(Args)]
struct GenArgs {
    scenario: Scenario,
    #[arg(short, long)]
    output: PathBuf,
    #[arg(long, value_enum, default_value_t = Kind::Gbgop)]
    kind: Kind,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Cardinality bound of the benefit-maximizing variant.
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    budget: Option<f64>,
    /// Largest x coordinate of a random map.
    #[arg(long, default_value_t = 3)]
    width: u32,
    /// Largest y coordinate of a random map.
    #[arg(long, default_value_t = 3)]
    height: u32,
    #[arg(long, default_value_t = 3)]
    predicates: usize,
    #[arg(long, default_value_t = 2)]
    actions: usize,
    #[arg(long, default_value_t = 1.0)]
    radius: f64,
    #[arg(long, default_value_t = 1)]
    ics: usize,
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    Exact,
    Ip,
    Approx,
}

#[derive(Clone, Copy, ValueEnum)]
enum EncodeKind {
    SetCover,
    MaxKCover,
    Monsat,
}

#[derive(Clone, Copy, ValueEnum)]
enum Scenario {
    Campaign,
    Random,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum Kind {
    Gbgop,
    Bmgop,
}

/// A failed command: stable code, message, exit status, and optionally a
/// partial result to print before the error.
struct Failure {
    code: &'static str,
    message: String,
    exit: u8,
    partial: Option<Box<Output>>,
}

impl Failure {
    fn input(code: &'static str, message: impl Into<String>) -> Self {
        Failure {
            code,
            message: message.into(),
            exit: EXIT_INPUT,
            partial: None,
        }
    }

    fn with(code: &'static str, message: impl Into<String>, exit: u8, partial: Option<Output>) -> Self {
        Failure {
            code,
            message: message.into(),
            exit,
            partial: partial.map(Box::new),
        }
    }
}

struct Output {
    text: String,
    json: Value,
}

type CmdResult = Result<Output, Failure>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_INPUT } else { 0 });
        }
    };
    let result = run(cli.command);
    match result {
        Ok(out) => {
            emit(&out, cli.json);
            ExitCode::SUCCESS
        }
        Err(f) => {
            if let Some(out) = &f.partial {
                emit(out, cli.json);
            }
            if cli.json {
                eprintln!("{}", json!({"error": {"code": f.code, "message": f.message}}));
            } else {
                eprintln!("error[{}]: {}", f.code, f.message);
            }
            ExitCode::from(f.exit)
        }
    }
}

fn emit(out: &Output, json: bool) {
    if json {
        print!("{}", to_canonical_json(&out.json));
    } else {
        print!("{}", out.text);
    }
}

fn run(command: Command) -> CmdResult {
    match command {
        Command::Validate { file } => validate(&file),
        Command::Solve(args) => solve(&args),
        Command::Reduce { file } => reduce(&file),
        Command::EmitLp { file, output, reduced } => emit_lp_cmd(&file, &output, reduced),
        Command::Encode { problem, file, output } => encode(problem, &file, &output),
        Command::Gen(args) => generate(&args),
        Command::Count { file, cap } => count(&file, cap.unwrap_or(u64::MAX)),
        Command::Bench {
            dir,
            output,
            delta,
            condition,
            limits,
        } => bench(&dir, &output, delta, condition, limits.limits()),
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::input("E_IO", format!("{}: {e}", path.display())))
}

fn write(path: &Path, text: &str) -> Result<(), Failure> {
    fs::write(path, text).map_err(|e| Failure::input("E_IO", format!("{}: {e}", path.display())))
}

fn load(path: &Path) -> Result<Instance, Failure> {
    let text = read(path)?;
    parse_instance(&text).map_err(|e| Failure::input(e.code(), format!("{}: {e}", path.display())))
}

fn expect_gbgop(inst: Instance, what: &str) -> Result<GbgopInstance, Failure> {
    match inst {
        Instance::Gbgop(g) => Ok(g),
        Instance::Bmgop(_) => Err(Failure::input("E_PROBLEM_KIND", format!("{what} needs a gbgop instance"))),
    }
}

fn pair_json(d: &Domain, p: ActionPoint) -> Value {
    json!([d.actions[p.action.0].name, [p.point.x, p.point.y]])
}

fn validate(file: &Path) -> CmdResult {
    let inst = load(file)?;
    let d = inst.domain();
    let mut json = json!({
        "valid": true,
        "problem": inst.kind_name(),
        "points": d.map.point_count(),
        "predicates": d.predicates.len(),
        "actions": d.actions.len(),
        "pairs": d.pair_count(),
        "ics": d.ics.len(),
    });
    let mut text = format!(
        "valid {} instance: {} points, {} predicates, {} actions, {} pairs, {} integrity constraints\n",
        inst.kind_name(),
        d.map.point_count(),
        d.predicates.len(),
        d.actions.len(),
        d.pair_count(),
        d.ics.len()
    );
    if let Instance::Bmgop(b) = &inst {
        if let Some(w) = b.bound_warning(DEFAULT_DELTA) {
            text += &format!("note: {w}\n");
            json["notes"] = json!([w]);
        }
    }
    Ok(Output { text, json })
}

fn report_output(report: &SolutionReport, d: &Domain) -> Output {
    Output {
        text: report.to_text(d),
        json: serde_json::to_value(report).expect("reports serialize"),
    }
}

fn solve(args: &SolveArgs) -> CmdResult {
    let limits = args.limits.limits();
    match load(&args.file)? {
        Instance::Gbgop(inst) => solve_gbgop(&inst, args, limits),
        Instance::Bmgop(inst) => solve_bmgop(&inst, args, limits),
    }
}

fn solve_gbgop(inst: &GbgopInstance, args: &SolveArgs, limits: Limits) -> CmdResult {
    let d = &inst.domain;
    if args.trace.is_some() {
        return Err(Failure::input("E_USAGE", "--trace applies to --method approx on bmgop instances"));
    }
    let (method, result) = match args.method {
        Method::Exact => ("exact", solve_gbgop_exact(inst, limits)),
        Method::Ip => ("ip", solve_gbgop_ip(inst, args.reduced, limits)),
        Method::Approx => {
            let Some(sol) = feasibility_heuristic(inst) else {
                return Err(Failure::with(
                    "E_NO_SOLUTION",
                    "taking every Theta_out-avoiding pair does not give a valid solution; try --method exact",
                    EXIT_INFEASIBLE,
                    None,
                ));
            };
            let mut report = SolutionReport::from_gbgop(d, &sol, "approx", ReportStatus::Approximate);
            report.diagnostics.push("all pairs avoiding Theta_out; cardinality is not minimized".into());
            return Ok(report_output(&report, d));
        }
    };
    match result {
        Ok(sol) => Ok(report_output(&SolutionReport::from_gbgop(d, &sol, method, ReportStatus::Optimal), d)),
        Err(GbgopError::LimitReached { best }) => {
            let partial = best.map(|s| report_output(&SolutionReport::from_gbgop(d, &s, method, ReportStatus::LimitReached), d));
            Err(Failure::with("E_LIMIT", "search limit reached before optimality was proven", EXIT_LIMIT, partial))
        }
        Err(e @ (GbgopError::InherentlyInfeasible { .. } | GbgopError::Uncoverable { .. } | GbgopError::Infeasible)) => {
            Err(Failure::with("E_INFEASIBLE", e.to_string(), EXIT_INFEASIBLE, None))
        }
        Err(e) => Err(Failure::input("E_SOLVER", e.to_string())),
    }
}

fn solve_bmgop(inst: &BmgopInstance, args: &SolveArgs, limits: Limits) -> CmdResult {
    let d = &inst.domain;
    if args.trace.is_some() && !matches!(args.method, Method::Approx) {
        return Err(Failure::input("E_USAGE", "--trace applies to --method approx"));
    }
    let (method, result) = match args.method {
        Method::Exact => ("exact", solve_bmgop_exact(inst, limits)),
        Method::Ip => ("ip", solve_bmgop_ip(inst, limits)),
        Method::Approx => {
            let (sol, trace) = bmgop_compute(inst, args.delta, args.condition).map_err(bmgop_failure)?;
            let mut report = SolutionReport::from_bmgop(d, &sol, "approx", ReportStatus::Approximate);
            if let Some(path) = &args.trace {
                write(path, &trace_text(d, &trace))?;
                report.trace = Some(path.display().to_string());
            }
            if let Some(w) = inst.bound_warning(args.delta) {
                report.diagnostics.push(w);
            }
            return Ok(report_output(&report, d));
        }
    };
    match result {
        Ok(sol) => Ok(report_output(&SolutionReport::from_bmgop(d, &sol, method, ReportStatus::Optimal), d)),
        Err(BmgopError::LimitReached { best }) => {
            let partial = best.map(|s| report_output(&SolutionReport::from_bmgop(d, &s, method, ReportStatus::LimitReached), d));
            Err(Failure::with("E_LIMIT", "search limit reached before optimality was proven", EXIT_LIMIT, partial))
        }
        Err(e) => Err(bmgop_failure(e)),
    }
}

fn bmgop_failure(e: BmgopError) -> Failure {
    let code = match e {
        BmgopError::BadDelta(_) => "E_DELTA",
        BmgopError::NonPositiveBounds { .. } => "E_PROBLEM_PARAMETER",
        BmgopError::LimitReached { .. } => "E_LIMIT",
        BmgopError::Ip(_) => "E_SOLVER",
    };
    Failure::input(code, e.to_string())
}

fn reduce(file: &Path) -> CmdResult {
    let inst = expect_gbgop(load(file)?, "reduce")?;
    let d = &inst.domain;
    let red = reduce_to_r_star(&inst);
    let mut text = format!("|R| = {}, |R*| = {}\n", red.r_len(), red.r_star_len());
    for &p in &red.r_star {
        text += &format!("  {} cost={}\n", d.pair_name(p), fmt_num(d.cost_of(p)));
    }
    let json = json!({
        "r": red.r_len(),
        "r_star": red.r_star_len(),
        "members": red.r_star.iter().map(|&p| pair_json(d, p)).collect::<Vec<_>>(),
    });
    Ok(Output { text, json })
}

fn emit_lp_cmd(file: &Path, output: &Path, reduced: bool) -> CmdResult {
    let model = match load(file)? {
        Instance::Gbgop(g) => match build_gbgop_ip(&g, reduced) {
            Ok(m) => m,
            Err(e) => return Err(Failure::with("E_INFEASIBLE", e.to_string(), EXIT_INFEASIBLE, None)),
        },
        Instance::Bmgop(_) if reduced => {
            return Err(Failure::input("E_USAGE", "--reduced applies to gbgop instances"));
        }
        Instance::Bmgop(b) => gop_core::bmgop::build_bmgop_ip(&b),
    };
    write(output, &emit_lp(&model))?;
    let (vars, rows) = (model.variables().len(), model.constraints().len());
    Ok(Output {
        text: format!("wrote {} ({vars} variables, {rows} constraints)\n", output.display()),
        json: json!({"output": output.display().to_string(), "variables": vars, "constraints": rows}),
    })
}

fn encode(problem: EncodeKind, file: &Path, output: &Path) -> CmdResult {
    let text = read(file)?;
    let parse_err = |e: serde_json::Error| Failure::input("E_SCHEMA", format!("{}: {e}", file.display()));
    let inst = match problem {
        EncodeKind::SetCover => {
            let p: CoverProblem = serde_json::from_str(&text).map_err(parse_err)?;
            encode_set_cover(&p).map(Instance::Gbgop)
        }
        EncodeKind::MaxKCover => {
            let p: CoverProblem = serde_json::from_str(&text).map_err(parse_err)?;
            encode_max_k_cover(&p).map(Instance::Bmgop)
        }
        EncodeKind::Monsat => {
            let p: MonotoneCnf = serde_json::from_str(&text).map_err(parse_err)?;
            encode_monsat(&p).map(Instance::Gbgop)
        }
    }
    .map_err(|e| Failure::input(e.code(), e.to_string()))?;
    write_instance(&inst, output)
}

fn write_instance(inst: &Instance, output: &Path) -> CmdResult {
    write(output, &serialize_instance(inst))?;
    let d = inst.domain();
    Ok(Output {
        text: format!("wrote {} instance to {} ({} pairs)\n", inst.kind_name(), output.display(), d.pair_count()),
        json: json!({"output": output.display().to_string(), "problem": inst.kind_name(), "pairs": d.pair_count()}),
    })
}

fn generate(args: &GenArgs) -> CmdResult {
    let inst = match args.scenario {
        Scenario::Campaign => {
            let mut params = CampaignParams::default();
            if let Some(k) = args.k {
                params.k = k;
            }
            let c = gen_campaign(params);
            match args.kind {
                Kind::Gbgop => {
                    let mut g = c.gbgop;
                    if let Some(b) = args.budget {
                        g.budget = b;
                    }
                    Instance::Gbgop(g)
                }
                Kind::Bmgop => {
                    let mut b = c.bmgop;
                    if let Some(budget) = args.budget {
                        b.budget = budget;
                    }
                    Instance::Bmgop(b)
                }
            }
        }
        Scenario::Random => {
            let p = RandomParams {
                width_bound: args.width,
                height_bound: args.height,
                predicates: args.predicates,
                actions: args.actions,
                radius: args.radius,
                ics: args.ics,
                seed: args.seed,
                kind: match args.kind {
                    Kind::Gbgop => ProblemKind::Gbgop,
                    Kind::Bmgop => ProblemKind::Bmgop,
                },
            };
            gen_random(p).map_err(|e| Failure::input("E_GENERATOR", e.to_string()))?
        }
    };
    let valid = match &inst {
        Instance::Gbgop(g) => g.validate(),
        Instance::Bmgop(b) => b.validate(),
    };
    valid.map_err(|e| Failure::input(e.code(), e.to_string()))?;
    write_instance(&inst, &args.output)
}

fn count(file: &Path, cap: u64) -> CmdResult {
    let inst = expect_gbgop(load(file)?, "count")?;
    let n = match count_gbgop_solutions(&inst, cap) {
        Ok(n) => n,
        Err(e @ GbgopError::TooLargeToCount { .. }) => return Err(Failure::input("E_TOO_LARGE", e.to_string())),
        Err(e) => return Err(Failure::input("E_SOLVER", e.to_string())),
    };
    let capped = n >= cap;
    let out = Output {
        text: format!("{n}{} solution(s)\n", if capped { "+" } else { "" }),
        json: json!({"count": n, "capped": capped}),
    };
    if n == 0 {
        return Err(Failure::with("E_NO_SOLUTION", "the instance has no solution", EXIT_INFEASIBLE, Some(out)));
    }
    Ok(out)
}

fn bench(dir: &Path, output: &Path, delta: f64, mode: ConditionMode, limits: Limits) -> CmdResult {
    let entries = fs::read_dir(dir).map_err(|e| Failure::input("E_IO", format!("{}: {e}", dir.display())))?;
    let mut files: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    files.sort();
    let mut suite = Vec::new();
    for f in &files {
        let id = f.file_stem().unwrap_or_default().to_string_lossy().into_owned();
        match load(f)? {
            Instance::Bmgop(b) => suite.push((id, b)),
            Instance::Gbgop(_) => return Err(Failure::input("E_PROBLEM_KIND", format!("{}: bench needs bmgop instances", f.display()))),
        }
    }
    let finish = |report: &BenchReport| -> Result<Output, Failure> {
        write(output, &to_canonical_json(report))?;
        let mut text = report.table();
        if let Some(r) = report.min_ratio() {
            text += &format!("min ratio {r:.4} over {} instance(s)\n", report.records.len());
        }
        Ok(Output {
            text,
            json: json!({"records": report.records, "min_ratio": report.min_ratio()}),
        })
    };
    match run_bench(&suite, delta, mode, limits) {
        Ok(report) => finish(&report),
        Err(BenchError::BoundViolated { failed, report }) => {
            let out = finish(&report)?;
            Err(Failure::with(
                "E_BOUND_VIOLATED",
                format!("greedy fell below the guaranteed ratio on {}", failed.join(", ")),
                EXIT_INFEASIBLE,
                Some(out),
            ))
        }
        Err(BenchError::LimitReached { id, partial }) => {
            let out = finish(&partial)?;
            Err(Failure::with("E_LIMIT", format!("exact search on `{id}` hit its limit"), EXIT_LIMIT, Some(out)))
        }
        Err(BenchError::Solver { id, source }) => {
            let f = bmgop_failure(source);
            Err(Failure::input(f.code, format!("{id}: {}", f.message)))
        }
    }
}
