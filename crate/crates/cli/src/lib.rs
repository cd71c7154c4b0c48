//! Subcommands of the `portfolio` binary. Every command renders its standard
//! output into a [`Outcome`] so it can be driven from tests without spawning
//! a process.

use std::fmt::Write as _;
use std::fs;
use std::ops::RangeInclusive;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use portfolio_core::ga::trace_to_csv;
use portfolio_core::model::{parse_period_list, ChromosomeError};
use portfolio_core::oracle::{OracleError, DEFAULT_CAP};
use portfolio_core::{
    decode_chromosome, encode_schedule, enumerate_optimal_with, evaluate, generate_instance,
    instance_to_json, parse_instance, run_ga_with, Chromosome, EvaluationBreakdown, Execution,
    GaConfig, GenParams, Instance, Schedule,
};
use serde::Serialize;

pub mod svg;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_INFEASIBLE: i32 = 2;
pub const EXIT_OVER_CAP: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "portfolio",
    version,
    about = "Multi-period IT project portfolio optimizer"
)]
pub struct Cli {
    /// Worker threads for evaluation (1 = sequential; default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve with the genetic algorithm.
    Solve {
        instance: PathBuf,
        #[command(flatten)]
        ga: GaFlags,
        /// Write the per-generation convergence trace as CSV.
        #[arg(long)]
        trace_out: Option<PathBuf>,
        /// Write a line chart of the best value per generation as SVG.
        #[arg(long)]
        trace_svg: Option<PathBuf>,
    },
    /// Solve exactly by exhaustive enumeration.
    Exact {
        instance: PathBuf,
        /// Refuse instances with more than this many assignments.
        #[arg(long, default_value_t = DEFAULT_CAP)]
        cap: u64,
    },
    /// Value a given schedule.
    Evaluate {
        instance: PathBuf,
        /// Comma list of periods (e.g. 1,2,1) or a file of bit rows.
        schedule: String,
    },
    /// Re-solve over a grid of uniform cardinality bounds.
    Sweep {
        instance: PathBuf,
        #[arg(long, value_parser = parse_range)]
        qmin_range: RangeInclusive<usize>,
        #[arg(long, value_parser = parse_range)]
        qmax_range: RangeInclusive<usize>,
        #[arg(long, value_enum, default_value_t = Method::Exact)]
        method: Method,
        #[command(flatten)]
        ga: GaFlags,
        #[arg(long, default_value_t = DEFAULT_CAP)]
        cap: u64,
    },
    /// Generate a random acyclic instance.
    Gen {
        #[arg(long, default_value_t = 7)]
        projects: usize,
        #[arg(long, default_value_t = 3)]
        periods: usize,
        #[arg(long, default_value_t = 0.3)]
        edge_density: f64,
        #[arg(long, default_value_t = 0.3)]
        partial_fraction: f64,
        #[arg(long, default_value_t = 1.2)]
        budget_tightness: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output file (standard output when omitted).
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Method {
    Exact,
    Ga,
}

#[derive(Debug, Clone, Args)]
pub struct GaFlags {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub population: Option<usize>,
    #[arg(long)]
    pub generations: Option<usize>,
    #[arg(long)]
    pub mutation_rate: Option<f64>,
    #[arg(long)]
    pub crossover_rate: Option<f64>,
    #[arg(long)]
    pub tournament: Option<usize>,
    #[arg(long)]
    pub elites: Option<usize>,
    #[arg(long)]
    pub restarts: Option<usize>,
    #[arg(long)]
    pub stagnation: Option<usize>,
}

impl GaFlags {
    pub fn config(&self) -> GaConfig {
        let d = GaConfig::default();
        GaConfig {
            population_size: self.population.unwrap_or(d.population_size),
            max_generations: self.generations.unwrap_or(d.max_generations),
            stagnation_limit: self.stagnation.unwrap_or(d.stagnation_limit),
            tournament_size: self.tournament.unwrap_or(d.tournament_size),
            crossover_rate: self.crossover_rate.unwrap_or(d.crossover_rate),
            mutation_rate: self.mutation_rate.or(d.mutation_rate),
            elite_count: self.elites.unwrap_or(d.elite_count),
            restarts: self.restarts.unwrap_or(d.restarts),
            seed: self.seed,
        }
    }
}

fn parse_range(text: &str) -> Result<RangeInclusive<usize>, String> {
    let parse = |t: &str| {
        t.trim()
            .parse::<usize>()
            .map_err(|_| format!("bad bound {t:?} in range {text:?}"))
    };
    let (lo, hi) = match text.split_once("..") {
        Some((a, b)) => (parse(a)?, parse(b.trim_start_matches('='))?),
        None => {
            let v = parse(text)?;
            (v, v)
        }
    };
    if lo > hi {
        return Err(format!("empty range {text:?}"));
    }
    Ok(lo..=hi)
}

/// Standard output of a command and the process exit code.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

impl Outcome {
    fn ok(stdout: String) -> Self {
        Self {
            code: EXIT_OK,
            stdout,
            stderr: String::new(),
        }
    }

    fn fail(code: i32, message: impl Into<String>) -> Self {
        Self {
            code,
            stdout: String::new(),
            stderr: message.into(),
        }
    }
}

/// Runs a parsed command line, honouring `--threads`.
pub fn run(cli: Cli) -> Outcome {
    let exec = match cli.threads {
        Some(1) => Execution::Sequential,
        _ => Execution::Parallel,
    };
    #[cfg(feature = "parallel")]
    if let Some(n) = cli.threads.filter(|&n| n > 1) {
        return match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(|| dispatch(cli.command, exec)),
            Err(e) => Outcome::fail(EXIT_INPUT, format!("cannot start thread pool: {e}")),
        };
    }
    dispatch(cli.command, exec)
}

fn dispatch(command: Command, exec: Execution) -> Outcome {
    let result = match command {
        Command::Solve {
            instance,
            ga,
            trace_out,
            trace_svg,
        } => cmd_solve(
            &instance,
            &ga.config(),
            exec,
            trace_out.as_deref(),
            trace_svg.as_deref(),
        ),
        Command::Exact { instance, cap } => cmd_exact(&instance, cap, exec),
        Command::Evaluate { instance, schedule } => cmd_evaluate(&instance, &schedule),
        Command::Sweep {
            instance,
            qmin_range,
            qmax_range,
            method,
            ga,
            cap,
        } => cmd_sweep(
            &instance,
            qmin_range,
            qmax_range,
            method,
            &ga.config(),
            cap,
            exec,
        ),
        Command::Gen {
            projects,
            periods,
            edge_density,
            partial_fraction,
            budget_tightness,
            seed,
            out,
        } => cmd_gen(
            &GenParams {
                projects,
                periods,
                edge_density,
                partial_fraction,
                budget_tightness,
                seed,
            },
            out.as_deref(),
        ),
    };
    result.unwrap_or_else(|e| Outcome::fail(EXIT_INPUT, format!("error: {e:#}")))
}

pub fn load_instance(path: &Path) -> anyhow::Result<Instance> {
    let text =
        fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    parse_instance(&text).with_context(|| format!("in {}", path.display()))
}

/// JSON result shared by `solve` and `exact`.
#[derive(Debug, Serialize)]
pub struct ResultDocument<'a> {
    pub method: &'static str,
    pub status: &'static str,
    pub value: Option<f64>,
    pub schedule: Option<&'a [usize]>,
    pub chromosome: Option<Vec<String>>,
    pub period_costs: Option<&'a [f64]>,
    pub budgets: &'a [f64],
    pub feasible: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub generations_run: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub terminated_by: Option<portfolio_core::Termination>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub feasible_count: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub space_size: Option<u64>,
    pub breakdown: Option<&'a EvaluationBreakdown>,
}

impl<'a> ResultDocument<'a> {
    fn new(
        method: &'static str,
        inst: &'a Instance,
        best: Option<&'a EvaluationBreakdown>,
    ) -> Self {
        let feasible = best.is_some_and(|b| b.feasible);
        Self {
            method,
            status: if feasible { "feasible" } else { "infeasible" },
            value: best.map(|b| b.total_value),
            schedule: best.map(|b| b.schedule.period_of()),
            chromosome: best.map(|b| encode_schedule(&b.schedule, inst.n_periods()).row_strings()),
            period_costs: best.map(|b| b.total_cost_per_period.as_slice()),
            budgets: inst.budgets(),
            feasible,
            seed: None,
            generations_run: None,
            terminated_by: None,
            feasible_count: None,
            space_size: None,
            breakdown: best,
        }
    }

    fn render(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("result serializes");
        s.push('\n');
        s
    }
}

pub fn cmd_solve(
    path: &Path,
    cfg: &GaConfig,
    exec: Execution,
    trace_out: Option<&Path>,
    trace_svg: Option<&Path>,
) -> anyhow::Result<Outcome> {
    let inst = load_instance(path)?;
    let result = run_ga_with(&inst, cfg, exec)?;
    if let Some(out) = trace_out {
        fs::write(out, trace_to_csv(&result.trace))
            .with_context(|| format!("cannot write {}", out.display()))?;
    }
    if let Some(out) = trace_svg {
        fs::write(out, svg::trace_chart(&result.trace))
            .with_context(|| format!("cannot write {}", out.display()))?;
    }
    let mut doc = ResultDocument::new("ga", &inst, Some(&result.best_breakdown));
    doc.seed = Some(cfg.seed);
    doc.generations_run = Some(result.generations_run);
    doc.terminated_by = Some(result.terminated_by);
    let mut outcome = Outcome::ok(doc.render());
    if !result.is_feasible() {
        outcome.code = EXIT_INFEASIBLE;
        outcome.stderr = "no feasible schedule found; best infeasible schedule reported".into();
    }
    Ok(outcome)
}

pub fn cmd_exact(path: &Path, cap: u64, exec: Execution) -> anyhow::Result<Outcome> {
    let inst = load_instance(path)?;
    let exact = match enumerate_optimal_with(&inst, cap, exec) {
        Ok(r) => r,
        Err(e @ OracleError::OverCap { .. }) => {
            return Ok(Outcome::fail(EXIT_OVER_CAP, format!("error: {e}")))
        }
        Err(e) => return Err(e.into()),
    };
    let mut doc = ResultDocument::new("exact", &inst, exact.best.as_ref());
    doc.feasible_count = Some(exact.feasible_count);
    doc.space_size = Some(exact.space_size);
    let mut outcome = Outcome::ok(doc.render());
    if exact.best.is_none() {
        outcome.code = EXIT_INFEASIBLE;
        outcome.stderr = "no feasible schedule exists".into();
    }
    Ok(outcome)
}

/// Reads a schedule given either as a comma list or as a bit-row file.
pub fn parse_schedule_arg(arg: &str, inst: &Instance) -> anyhow::Result<Schedule> {
    let path = Path::new(arg);
    if path.is_file() {
        let text = fs::read_to_string(path)?;
        let c: Chromosome = text.parse()?;
        return decode_chromosome(&c, inst.n_projects(), inst.n_periods()).map_err(|e| match e {
            ChromosomeError::InvalidRows(_) => anyhow!("{e}"),
            other => anyhow!("{}: {other}", path.display()),
        });
    }
    let genes = parse_period_list(arg)?;
    Ok(Schedule::for_instance(genes, inst)?)
}

pub fn cmd_evaluate(path: &Path, schedule: &str) -> anyhow::Result<Outcome> {
    let inst = load_instance(path)?;
    let s = parse_schedule_arg(schedule, &inst)?;
    let b = evaluate(&s, &inst);
    let mut out = serde_json::to_string_pretty(&b)?;
    out.push('\n');
    Ok(Outcome::ok(out))
}

pub const SWEEP_CSV_HEADER: &str = "q_min,q_max,status,value,schedule";

pub fn cmd_sweep(
    path: &Path,
    qmin_range: RangeInclusive<usize>,
    qmax_range: RangeInclusive<usize>,
    method: Method,
    cfg: &GaConfig,
    cap: u64,
    exec: Execution,
) -> anyhow::Result<Outcome> {
    let base = load_instance(path)?;
    let mut out = String::from(SWEEP_CSV_HEADER);
    out.push('\n');
    for lo in qmin_range {
        for hi in qmax_range.clone() {
            let (status, best) = sweep_cell(&base, lo, hi, method, cfg, cap, exec)?;
            let (value, schedule) = match &best {
                Some(b) => (
                    format!("{:.6}", b.total_value),
                    b.schedule
                        .period_of()
                        .iter()
                        .map(ToString::to_string)
                        .collect::<Vec<_>>()
                        .join(" "),
                ),
                None => (String::new(), String::new()),
            };
            let _ = writeln!(out, "{lo},{hi},{status},{value},{schedule}");
        }
    }
    Ok(Outcome::ok(out))
}

fn sweep_cell(
    base: &Instance,
    lo: usize,
    hi: usize,
    method: Method,
    cfg: &GaConfig,
    cap: u64,
    exec: Execution,
) -> anyhow::Result<(&'static str, Option<EvaluationBreakdown>)> {
    if lo > hi || hi > base.n_projects() {
        return Ok(("skipped", None));
    }
    let inst = base.clone().with_cardinality(lo, hi);
    match method {
        Method::Exact => match enumerate_optimal_with(&inst, cap, exec) {
            Ok(r) => Ok(match r.best {
                Some(b) => ("optimal", Some(b)),
                None => ("infeasible", None),
            }),
            Err(OracleError::OverCap { .. }) => Ok(("over_cap", None)),
            Err(e) => Err(e.into()),
        },
        Method::Ga => {
            let r = run_ga_with(&inst, cfg, exec)?;
            Ok(if r.is_feasible() {
                ("feasible", Some(r.best_breakdown))
            } else {
                ("infeasible", None)
            })
        }
    }
}

pub fn cmd_gen(params: &GenParams, out: Option<&Path>) -> anyhow::Result<Outcome> {
    let inst = generate_instance(params)?;
    let mut json = instance_to_json(&inst);
    json.push('\n');
    match out {
        Some(path) => {
            fs::write(path, &json).with_context(|| format!("cannot write {}", path.display()))?;
            Ok(Outcome::ok(String::new()))
        }
        None => Ok(Outcome::ok(json)),
    }
}

/// `(q_min, q_max, status, value)`
pub type SweepRow = (usize, usize, String, Option<f64>);

/// Parses a sweep CSV back into rows.
pub fn parse_sweep_csv(text: &str) -> anyhow::Result<Vec<SweepRow>> {
    let mut lines = text.lines();
    if lines.next() != Some(SWEEP_CSV_HEADER) {
        bail!("missing sweep header");
    }
    lines
        .map(|line| {
            let cols: Vec<&str> = line.split(',').collect();
            if cols.len() != 5 {
                bail!("bad sweep row {line:?}");
            }
            let value = if cols[3].is_empty() {
                None
            } else {
                Some(cols[3].parse()?)
            };
            Ok((
                cols[0].parse()?,
                cols[1].parse()?,
                cols[2].to_string(),
                value,
            ))
        })
        .collect()
}
