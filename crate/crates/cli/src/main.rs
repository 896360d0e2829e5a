use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use clap::{Args, Parser, Subcommand, ValueEnum};
use worbel::bench::{run_benchmark, BenchSpec, CsvSink, Distribution, ExactStatus};
use worbel::candidates::CandidateConfig;
use worbel::instance::{load_instance, save_instance};
use worbel::pipeline::{run_pipeline, solution_csv, PipelineConfig, SolverChoice, AUTO_THRESHOLD};
use worbel::reduction::{
    equivalence_report, parse_dbcr, reduce_with, Colouring, ReductionConfig, DEFAULT_MARGIN,
};
use worbel::wcnf::{decode_assignment, encode_wcnf, parse_model};
use worbel::{render_svg, validate_solution, ConstraintParams, Error, RenderOptions, RpfaInstance};

/// Largest conflict graph written as WCNF or used to decode a model; one
/// clause per edge makes larger files impractical.
const WCNF_MAX_EDGES: usize = 20_000_000;

#[derive(Parser)]
#[command(
    name = "worbel",
    version,
    about = "Aggregate categorized points into labelled rectangles"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one instance and write the requested artifacts.
    Solve(SolveArgs),
    /// Run the greedy and exact solvers over a grid of generated instances.
    Benchmark(BenchArgs),
    /// Turn a DBCR instance into a two-label instance with bound k.
    Reduce(ReduceArgs),
    /// Write a generated instance.
    Generate(GenerateArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Preset {
    PaperCaseStudy,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Emit {
    Svg,
    Csv,
    Wcnf,
}

#[derive(Clone, Copy, ValueEnum)]
enum DistArg {
    Uniform,
    Gaussian,
}

impl From<DistArg> for Distribution {
    fn from(d: DistArg) -> Self {
        match d {
            DistArg::Uniform => Distribution::Uniform,
            DistArg::Gaussian => Distribution::Gaussian,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ColouringArg {
    ChordAware,
    Parity,
}

/// Constraint overrides; unset flags keep the instance's own values.
#[derive(Args, Clone)]
struct ParamArgs {
    /// Start from a parameter preset.
    #[arg(long, value_enum)]
    preset: Option<Preset>,
    #[arg(long)]
    rho_l: Option<f64>,
    #[arg(long)]
    rho_u: Option<f64>,
    #[arg(long)]
    t: Option<u32>,
    #[arg(long)]
    rho_t: Option<f64>,
    /// Minimum font size f.
    #[arg(long)]
    font_min: Option<f64>,
}

impl ParamArgs {
    fn apply(&self, base: ConstraintParams) -> ConstraintParams {
        let mut p = match self.preset {
            Some(Preset::PaperCaseStudy) => ConstraintParams::case_study(),
            None => base,
        };
        if let Some(v) = self.rho_l {
            p.rho_l = v;
        }
        if let Some(v) = self.rho_u {
            p.rho_u = v;
        }
        if let Some(v) = self.t {
            p.t = v;
        }
        if let Some(v) = self.rho_t {
            p.rho_t = v;
        }
        if let Some(v) = self.font_min {
            p.f = v;
        }
        p
    }
}

#[derive(Args)]
struct SolveArgs {
    instance: PathBuf,
    #[arg(long, default_value = "auto")]
    solver: SolverChoice,
    #[command(flatten)]
    params: ParamArgs,
    /// Exact solver budget; falls back to greedy when exceeded.
    #[arg(long)]
    budget_secs: Option<f64>,
    #[arg(long)]
    candidates_cap: Option<usize>,
    /// Candidate count above which `auto` uses greedy.
    #[arg(long, default_value_t = AUTO_THRESHOLD)]
    auto_threshold: usize,
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
    /// Artifacts to write (repeatable or comma separated).
    #[arg(long, value_enum, value_delimiter = ',', default_values = ["csv", "svg"])]
    emit: Vec<Emit>,
    /// Use a model from an external MaxSAT solver instead of solving.
    #[arg(long)]
    model: Option<PathBuf>,
    /// Leave rectangle outlines out of the SVG.
    #[arg(long)]
    no_outlines: bool,
    /// Accepted for uniformity; solving is deterministic.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long, value_enum, value_delimiter = ',', default_values = ["gaussian"])]
    distribution: Vec<DistArg>,
    #[arg(long, default_value_t = 20)]
    n_min: usize,
    #[arg(long, default_value_t = 100)]
    n_max: usize,
    #[arg(long, default_value_t = 10)]
    n_step: usize,
    /// Category counts.
    #[arg(long, value_delimiter = ',', default_values = ["2", "4"])]
    c: Vec<usize>,
    #[arg(long, default_value_t = 3)]
    replicates: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Per-run exact solver budget.
    #[arg(long, default_value_t = 60.0)]
    budget_secs: f64,
    #[arg(long)]
    candidates_cap: Option<usize>,
    /// Skip the exact solver above this many candidates.
    #[arg(long)]
    exact_max_candidates: Option<usize>,
    #[arg(long, default_value_t = 1)]
    workers: usize,
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
    /// Results file, appended to; defaults to `<out-dir>/benchmark.csv`.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ReduceArgs {
    input: PathBuf,
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
    #[arg(long, default_value_t = DEFAULT_MARGIN)]
    margin: i64,
    #[arg(long, value_enum, default_value = "chord-aware")]
    colouring: ColouringArg,
    /// Brute-force both problems and report whether they agree (toy sizes only).
    #[arg(long)]
    verify: bool,
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long, value_enum, default_value = "uniform")]
    distribution: DistArg,
    #[arg(long)]
    n: usize,
    #[arg(long)]
    c: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    params: ParamArgs,
    #[arg(long)]
    out: PathBuf,
}

struct Failure {
    category: &'static str,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Self {
            category: e.category(),
            message: e.to_string(),
        }
    }
}

fn io_failure(path: &Path, e: std::io::Error) -> Failure {
    Failure {
        category: "io",
        message: format!("{}: {e}", path.display()),
    }
}

fn usage(message: String) -> Failure {
    Failure {
        category: "usage",
        message,
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Solve(a) => cmd_solve(a),
        Command::Benchmark(a) => cmd_benchmark(a),
        Command::Reduce(a) => cmd_reduce(a),
        Command::Generate(a) => cmd_generate(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error[{}]: {}", f.category, f.message);
            ExitCode::FAILURE
        }
    }
}

fn stem(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "out".into())
}

fn write_file(path: &Path, text: &str) -> Result<(), Failure> {
    fs::write(path, text).map_err(|e| io_failure(path, e))?;
    log::info!("wrote {}", path.display());
    Ok(())
}

fn cmd_solve(a: SolveArgs) -> Result<(), Failure> {
    let inst = load_instance(&a.instance).map_err(Error::from)?;
    let params = a.params.apply(inst.params);
    let inst = RpfaInstance::new(inst.points, inst.labels, params, Some(inst.bounds))
        .map_err(Error::from)?;
    let mut cfg = PipelineConfig {
        solver: a.solver,
        budget: a.budget_secs.map(Duration::from_secs_f64),
        auto_threshold: a.auto_threshold,
        ..Default::default()
    };
    if let Some(cap) = a.candidates_cap {
        cfg.candidates = CandidateConfig {
            cap,
            ..CandidateConfig::default()
        };
    }
    fs::create_dir_all(&a.out_dir).map_err(|e| io_failure(&a.out_dir, e))?;
    let name = stem(&a.instance);

    let mut result = run_pipeline(&inst, &cfg)?;
    if let Some(model) = &a.model {
        let text = fs::read_to_string(model).map_err(|e| io_failure(model, e))?;
        let g = result
            .try_conflict_graph(WCNF_MAX_EDGES)
            .map_err(Error::from)?;
        let truth = parse_model(&text, g.len()).map_err(Error::from)?;
        let solution = decode_assignment(g, &truth).map_err(Error::from)?;
        result.report = validate_solution(g, &solution, &inst);
        result.solution = solution;
    }
    if !result.report.is_valid() {
        return Err(Failure {
            category: "solver",
            message: format!("solution failed validation: {:?}", result.report.violations),
        });
    }

    for e in &a.emit {
        match e {
            Emit::Csv => write_file(
                &a.out_dir.join(format!("{name}.solution.csv")),
                &solution_csv(&inst, &result.candidates, &result.solution),
            )?,
            Emit::Svg => {
                let opts = RenderOptions {
                    outlines: !a.no_outlines,
                    ..Default::default()
                };
                write_file(
                    &a.out_dir.join(format!("{name}.svg")),
                    &render_svg(&inst, &result.candidates, &result.solution, &opts),
                )?
            }
            Emit::Wcnf => {
                let g = result
                    .try_conflict_graph(WCNF_MAX_EDGES)
                    .map_err(Error::from)?;
                write_file(
                    &a.out_dir.join(format!("{name}.wcnf")),
                    &encode_wcnf(g).to_text(false),
                )?
            }
        }
    }
    println!("{}", result.stats_line());
    Ok(())
}

fn cmd_benchmark(a: BenchArgs) -> Result<(), Failure> {
    if a.n_step == 0 || a.n_min == 0 || a.n_min > a.n_max {
        return Err(usage("need 0 < n-min <= n-max and n-step > 0".into()));
    }
    if a.c.contains(&0) {
        return Err(usage("category counts must be positive".into()));
    }
    let mut spec = BenchSpec {
        distributions: a.distribution.iter().map(|&d| d.into()).collect(),
        ns: (a.n_min..=a.n_max).step_by(a.n_step).collect(),
        cs: a.c.clone(),
        replicates: a.replicates,
        master_seed: a.seed,
        budget: Duration::from_secs_f64(a.budget_secs),
        exact_max_candidates: a.exact_max_candidates,
        workers: a.workers.max(1),
        ..Default::default()
    };
    if let Some(cap) = a.candidates_cap {
        spec.candidates.cap = cap;
    }
    fs::create_dir_all(&a.out_dir).map_err(|e| io_failure(&a.out_dir, e))?;
    let out = a.out.unwrap_or_else(|| a.out_dir.join("benchmark.csv"));
    let mut sink = CsvSink::open(&out).map_err(|e| io_failure(&out, e))?;
    let mut write_err = None;
    let rows = run_benchmark(&spec, |row| {
        log::info!(
            "{} n={} c={} replicate={} candidates={:?} exact={}",
            row.point.distribution,
            row.point.n,
            row.point.c,
            row.point.replicate,
            row.candidates,
            row.exact_status
        );
        if let Err(e) = sink.write(row) {
            write_err.get_or_insert(e);
        }
    });
    if let Some(e) = write_err {
        return Err(io_failure(&out, e));
    }
    let finished = rows
        .iter()
        .filter(|r| r.exact_status == ExactStatus::Finished)
        .count();
    let timeouts = rows
        .iter()
        .filter(|r| r.exact_status == ExactStatus::Timeout)
        .count();
    let failed = rows.iter().filter(|r| r.error.is_some()).count();
    println!(
        "rows={} exact_finished={finished} exact_timeouts={timeouts} failed={failed} out={}",
        rows.len(),
        out.display()
    );
    Ok(())
}

fn cmd_reduce(a: ReduceArgs) -> Result<(), Failure> {
    let text = fs::read_to_string(&a.input).map_err(|e| io_failure(&a.input, e))?;
    let inp = parse_dbcr(&text).map_err(Error::from)?;
    let cfg = ReductionConfig {
        margin: a.margin,
        colouring: match a.colouring {
            ColouringArg::ChordAware => Colouring::ChordAware,
            ColouringArg::Parity => Colouring::Parity,
        },
    };
    let out = reduce_with(&inp, &cfg).map_err(Error::from)?;
    fs::create_dir_all(&a.out_dir).map_err(|e| io_failure(&a.out_dir, e))?;
    let name = stem(&a.input);
    let inst_path = a.out_dir.join(format!("{name}.rpfa0.csv"));
    save_instance(&out.rpfa0, &inst_path).map_err(Error::from)?;
    write_file(
        &a.out_dir.join(format!("{name}.provenance.txt")),
        &out.provenance_text(),
    )?;
    println!(
        "points={} k={} delta={} omega={} sigma={}",
        out.rpfa0.n(),
        out.k,
        out.delta,
        out.omega,
        out.sigma
    );
    if a.verify {
        let rep = equivalence_report(&inp, &out).map_err(Error::from)?;
        println!(
            "dbcr={} rpfa0_optimum={} k={} agree={}",
            if rep.dbcr_yes { "yes" } else { "no" },
            rep.rpfa_optimum,
            rep.k,
            rep.agree()
        );
    }
    Ok(())
}

fn cmd_generate(a: GenerateArgs) -> Result<(), Failure> {
    if a.n == 0 || a.c == 0 {
        return Err(usage("n and c must be positive".into()));
    }
    let inst = Distribution::from(a.distribution).generate(a.n, a.c, a.seed);
    let params = a.params.apply(inst.params);
    let inst = RpfaInstance::new(inst.points, inst.labels, params, Some(inst.bounds))
        .map_err(Error::from)?;
    save_instance(&inst, &a.out).map_err(Error::from)?;
    println!("wrote {} points to {}", inst.n(), a.out.display());
    Ok(())
}
