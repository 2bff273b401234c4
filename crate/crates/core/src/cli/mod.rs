//! Command-line front end: `verify`, `converge` and `search`.
//!
//! Exit codes: 0 when every check holds, 1 when some check (or search
//! evaluation) has `rel_slack < −tol`, 2 on configuration or usage errors.

pub mod config;
pub mod report;

use std::collections::HashMap;
use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::family::{dilate_tuple, random_tuple};
use crate::inequalities::search::run_search;
use crate::inequalities::search::SearchConfig;
use crate::inequalities::{CheckKind, CheckSpec, IneqReport, LemmaCInput, Verdict, Verifier};
use crate::intersect::querm_of_intersection_fused;
use crate::quadrature::cached_sphere_rule;
use crate::starbody::BodyExpr;
use config::{ConfigError, Format, RandomKind, SuiteConfig, MIN_RESOLUTION};
use report::{encode_rows, encode_search, write_report, ConvergeRow, ReportRow};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VIOLATION: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

const DEFAULT_OUT_DIR: &str = "dualmix-out";

#[derive(Debug, Parser)]
#[command(name = "dualmix", version, about = "Numerical certificates for dual-volume inequalities of mixed intersection bodies")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run every configured inequality check and write a report.
    Verify(CommonArgs),
    /// Tabulate a dual quermassintegral of an intersection body along a resolution ladder.
    Converge(CommonArgs),
    /// Minimize the relative slack of one check over a body family.
    Search(CommonArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

#[derive(Debug, Args)]
struct CommonArgs {
    /// Config file, or `builtin:paper-smoke` / `builtin:paper-random`.
    #[arg(long)]
    config: String,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<FormatArg>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    outer_res: Option<usize>,
    #[arg(long)]
    inner_res: Option<usize>,
}

/// Resolved run settings after command-line overrides.
struct Run {
    cfg: SuiteConfig,
    dir: PathBuf,
    format: Format,
    stem: String,
}

fn usage(msg: impl std::fmt::Display) -> i32 {
    eprintln!("error: {msg}");
    EXIT_USAGE
}

fn prepare(args: &CommonArgs) -> Result<Run, ConfigError> {
    let mut cfg = SuiteConfig::load(&args.config)?;
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if let Some(outer) = args.outer_res {
        cfg.resolution.outer = outer;
    }
    if let Some(inner) = args.inner_res {
        cfg.resolution.inner = inner;
    }
    cfg.validate()?;
    let output = cfg.output.clone();
    let dir = args
        .out
        .clone()
        .or_else(|| output.as_ref().and_then(|o| o.dir.clone()).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_DIR));
    let format = match args.format {
        Some(FormatArg::Csv) => Format::Csv,
        Some(FormatArg::Json) => Format::Json,
        None => output.as_ref().and_then(|o| o.format).unwrap_or(Format::Csv),
    };
    let stem = output
        .and_then(|o| o.name)
        .unwrap_or_else(|| "report".to_string());
    Ok(Run { cfg, dir, format, stem })
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let (name, args) = match &cli.command {
        Command::Verify(a) => ("verify", a),
        Command::Converge(a) => ("converge", a),
        Command::Search(a) => ("search", a),
    };
    let run = match prepare(args) {
        Ok(run) => run,
        Err(e) => return usage(e),
    };
    match name {
        "verify" => cmd_verify(&run),
        "converge" => cmd_converge(&run),
        _ => cmd_search(&run),
    }
}

/// One row to compute, with a label for diagnostics.
struct Job {
    label: String,
    spec: CheckSpec,
}

fn bodies_needed(kind: CheckKind, n: usize) -> usize {
    match kind {
        CheckKind::LemmaC => 0,
        CheckKind::DualAfVolumes => n,
        CheckKind::AfIntersection | CheckKind::AfProduct => n - 1,
        CheckKind::QuermSumMinkowski => 3,
        _ => 2,
    }
}

fn random_lemma_c(rng: &mut ChaCha8Rng) -> LemmaCInput {
    LemmaCInput {
        a: rng.random_range(0.0..10.0),
        b: rng.random_range(0.0..10.0),
        c: rng.random_range(0.1..10.0),
        d: rng.random_range(0.1..10.0),
        p: rng.random_range(0.05..0.95),
    }
}

fn build_jobs(cfg: &SuiteConfig, named: &HashMap<String, BodyExpr>) -> Result<Vec<Job>, ConfigError> {
    let mut jobs = Vec::new();
    for (k, entry) in cfg.checks.iter().enumerate() {
        let kind = CheckKind::from_id(&entry.check).expect("validated");
        let params = entry.params();
        match &entry.bodies {
            Some(names) => jobs.push(Job {
                label: format!("checks[{k}] ({}) bodies {names:?}", entry.check),
                spec: CheckSpec {
                    kind,
                    bodies: names.iter().map(|b| named[b].clone()).collect(),
                    params,
                    lemma_c: entry.lemma_c,
                },
            }),
            None => {
                let Some(random) = &cfg.random else {
                    // a lemma_c entry without a random section uses its own inputs
                    jobs.push(Job {
                        label: format!("checks[{k}] ({})", entry.check),
                        spec: CheckSpec {
                            kind,
                            bodies: Vec::new(),
                            params,
                            lemma_c: entry.lemma_c,
                        },
                    });
                    continue;
                };
                for t in 0..random.tuples {
                    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
                    rng.set_stream((k * random.tuples + t) as u64);
                    let count = bodies_needed(kind, cfg.n);
                    let bodies = match random.kind {
                        RandomKind::Mixed => random_tuple(&mut rng, cfg.n, count),
                        RandomKind::Dilates => dilate_tuple(&mut rng, cfg.n, count),
                    }
                    .map_err(|e| ConfigError(format!("checks[{k}] tuple {t}: {e}")))?;
                    let lemma_c = match entry.lemma_c {
                        Some(input) => Some(input),
                        None if kind == CheckKind::LemmaC => Some(random_lemma_c(&mut rng)),
                        None => None,
                    };
                    jobs.push(Job {
                        label: format!("checks[{k}] ({}) random tuple {t}: {bodies:?}", entry.check),
                        spec: CheckSpec {
                            kind,
                            bodies,
                            params,
                            lemma_c,
                        },
                    });
                }
            }
        }
    }
    Ok(jobs)
}

fn emit(run: &Run, stem: &str, bytes: std::io::Result<Vec<u8>>) -> Result<PathBuf, i32> {
    bytes
        .and_then(|b| write_report(&run.dir, stem, run.format, &b))
        .map_err(|e| usage(format!("cannot write report: {e}")))
}

fn cmd_verify(run: &Run) -> i32 {
    let cfg = &run.cfg;
    let named = match cfg.build_bodies() {
        Ok(b) => b,
        Err(e) => return usage(e),
    };
    let jobs = match build_jobs(cfg, &named) {
        Ok(j) => j,
        Err(e) => return usage(e),
    };
    let verifier = match Verifier::new(cfg.n, cfg.resolution.outer, cfg.resolution.inner, cfg.policy()) {
        Ok(v) => v,
        Err(e) => return usage(e),
    };
    let results: Vec<Result<IneqReport, String>> = jobs
        .par_iter()
        .map(|job| verifier.run(&job.spec).map_err(|e| format!("{}: {e}", job.label)))
        .collect();
    let mut reports = Vec::with_capacity(results.len());
    for r in results {
        match r {
            Ok(rep) => reports.push(rep),
            Err(msg) => return usage(msg),
        }
    }
    let rows: Vec<ReportRow> = reports.iter().map(|r| ReportRow::from_report(r, cfg.seed)).collect();
    let path = match emit(run, &run.stem, encode_rows("verify", &rows, run.format)) {
        Ok(p) => p,
        Err(code) => return code,
    };
    let count = |v: Verdict| reports.iter().filter(|r| r.verdict == v).count();
    let failed = count(Verdict::Fail);
    println!(
        "{} rows: {} pass, {} equality-confirmed, {} fail; report {}",
        rows.len(),
        count(Verdict::Pass),
        count(Verdict::EqualityConfirmed),
        failed,
        path.display()
    );
    for (job, rep) in jobs.iter().zip(&reports) {
        if rep.failed() {
            eprintln!(
                "VIOLATION {}: lhs={:e} rhs={:e} rel_slack={:e} tol={:e} params={:?} seed={} outer_res={} inner_res={}",
                job.label, rep.lhs, rep.rhs, rep.rel_slack, rep.tol, job.spec.params, cfg.seed, rep.outer_res, rep.inner_res
            );
        }
    }
    if failed > 0 {
        EXIT_VIOLATION
    } else {
        EXIT_OK
    }
}

fn cmd_converge(run: &Run) -> i32 {
    let cfg = &run.cfg;
    let Some(spec) = &cfg.converge else {
        return usage("converge needs a \"converge\" section");
    };
    let ladder = &spec.ladder;
    if ladder.len() < 2 {
        return usage("converge.ladder needs at least two resolutions");
    }
    if ladder.iter().any(|&r| r < MIN_RESOLUTION) || ladder.windows(2).any(|w| w[1] <= w[0]) {
        return usage(format!(
            "converge.ladder must be strictly increasing with entries >= {MIN_RESOLUTION}"
        ));
    }
    if spec.bodies.len() + 1 != cfg.n {
        return usage(format!("converge.bodies needs n - 1 = {} names", cfg.n - 1));
    }
    let named = match cfg.build_bodies() {
        Ok(b) => b,
        Err(e) => return usage(e),
    };
    let bodies: Vec<BodyExpr> = spec.bodies.iter().map(|b| named[b].clone()).collect();
    let mut rows: Vec<ConvergeRow> = Vec::with_capacity(ladder.len());
    for &res in ladder {
        let value = match cached_sphere_rule(cfg.n - 1, res)
            .and_then(|outer| querm_of_intersection_fused(&bodies, spec.i, &outer, res))
        {
            Ok(v) => v,
            Err(e) => return usage(format!("converge at resolution {res}: {e}")),
        };
        let prev = rows.last().map(|r| r.value);
        rows.push(ConvergeRow {
            outer_res: res,
            inner_res: res,
            value,
            abs_diff: prev.map(|p| (value - p).abs()),
            rel_diff: prev.map(|p| (value - p).abs() / value.abs()),
        });
    }
    let path = match emit(run, &format!("{}-converge", run.stem), encode_rows("converge", &rows, run.format)) {
        Ok(p) => p,
        Err(code) => return code,
    };
    println!("{:>9} {:>9} {:>24} {:>12}", "outer_res", "inner_res", "value", "abs_diff");
    for r in &rows {
        let diff = r.abs_diff.map_or("-".to_string(), |d| format!("{d:.3e}"));
        println!("{:>9} {:>9} {:>24.16e} {:>12}", r.outer_res, r.inner_res, r.value, diff);
    }
    let diffs: Vec<f64> = rows.iter().filter_map(|r| r.abs_diff).collect();
    let monotone = diffs.windows(2).all(|w| w[1] <= w[0]);
    println!("differences shrink monotonically: {}", if monotone { "yes" } else { "no" });
    println!("table {}", path.display());
    EXIT_OK
}

fn cmd_search(run: &Run) -> i32 {
    let cfg = &run.cfg;
    let Some(spec) = &cfg.search else {
        return usage("search needs a \"search\" section");
    };
    if spec.budget == 0 {
        return usage("search.budget must be at least 1");
    }
    let kind = CheckKind::from_id(&spec.check).expect("validated");
    let verifier = match Verifier::new(cfg.n, cfg.resolution.outer, cfg.resolution.inner, cfg.policy()) {
        Ok(v) => v,
        Err(e) => return usage(e),
    };
    let search = SearchConfig {
        kind,
        family: spec.family,
        params: spec.params(),
        budget: spec.budget,
        seed: cfg.seed,
    };
    let result = match run_search(&verifier, &search) {
        Ok(r) => r,
        Err(e) => return usage(format!("search: {e}")),
    };
    let path = match emit(run, &format!("{}-search", run.stem), encode_search(&result, run.format)) {
        Ok(p) => p,
        Err(code) => return code,
    };
    println!(
        "{} evaluations, best rel_slack {:e} at {:?}; trace {}",
        result.evaluations,
        result.best_rel_slack,
        result.best_params,
        path.display()
    );
    if let Some(v) = &result.violation {
        eprintln!(
            "VIOLATION {} on family {:?}: rel_slack={:e} < -tol={:e} at params {:?}, evaluation {}, seed {}, outer_res={} inner_res={}",
            kind, spec.family, v.rel_slack, v.tol, v.params, v.evaluation, cfg.seed, cfg.resolution.outer, cfg.resolution.inner
        );
        return EXIT_VIOLATION;
    }
    EXIT_OK
}
