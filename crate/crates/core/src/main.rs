use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use unbiased_bb::algorithms::Algorithm;
use unbiased_bb::bounds::{check_proposition1, default_grid, round_size};
use unbiased_bb::harness::{
    emit_report, fit_curve, fmt_sig, read_runs_csv, regenerate_instance, run_experiment, summarize, ExperimentConfig,
    FitModel, Report, SummaryRow,
};
use unbiased_bb::operators::Operator;
use unbiased_bb::problems::{HiddenInstance, InstanceDescriptor, ProblemClass};
use unbiased_bb::unbiasedness::{certify_operator, shipped_operators, CertificationReport};
use unbiased_bb::Error;

const EXIT_CONFIG: u8 = 1;
const EXIT_RUNTIME: u8 = 2;
const EXIT_ASSERT: u8 = 3;

#[derive(Parser)]
#[command(name = "unbiased-bb", version, about = "Unbiased black-box optimizers and experiment runner")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment batch and write runs.csv, summary.csv and report.json.
    Run(RunArgs),
    /// Certify every shipped operator and the biased negative control.
    VerifyUnbiased(VerifyArgs),
    /// Evaluate the sampling bound of the unrestricted-arity optimizer.
    CheckBound(BoundArgs),
    /// Fit mean queries of a runs CSV against a runtime model.
    Fit(FitArgs),
    /// Rebuild summary.csv and report.json from a runs CSV.
    Report(ReportArgs),
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    algorithm: String,
    #[arg(long)]
    class: String,
    /// Problem size; repeat for several sizes.
    #[arg(long = "n", required = true)]
    n: Vec<usize>,
    /// Arity for kary_onemax.
    #[arg(long)]
    k: Option<usize>,
    #[arg(long, default_value_t = 100)]
    trials: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Per-run query budget; defaults to 100 n ceil(log2(n + 1)).
    #[arg(long)]
    budget: Option<u64>,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Worker threads; 0 uses all cores.
    #[arg(long, default_value_t = 0)]
    workers: usize,
    /// Also write the hidden instances to instances.jsonl.
    #[arg(long)]
    debug_instances: bool,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long, default_value_t = 8)]
    n: usize,
    #[arg(long, default_value_t = 200)]
    trials: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct BoundArgs {
    #[arg(long)]
    n: u64,
    /// `default` or a comma-separated list of even d values.
    #[arg(long, default_value = "default")]
    grid: String,
    /// Rows of the margin table to print, tightest first.
    #[arg(long, default_value_t = 10)]
    rows: usize,
}

#[derive(Args)]
struct FitArgs {
    #[arg(long)]
    input: PathBuf,
    /// a_n, a_nlogn or a_n_over_logk.
    #[arg(long)]
    model: String,
    #[arg(long)]
    assert_min_coef: Option<f64>,
    #[arg(long)]
    assert_max_coef: Option<f64>,
    #[arg(long)]
    assert_max_residual: Option<f64>,
}

#[derive(Args)]
struct ReportArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

enum Failure {
    Error(Error),
    Assertion(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Self::Error(e)
    }
}

type CmdResult = Result<(), Failure>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(EXIT_CONFIG) } else { ExitCode::SUCCESS };
        }
    };
    let result = match cli.command {
        Command::Run(a) => run(a),
        Command::VerifyUnbiased(a) => verify(a),
        Command::CheckBound(a) => check_bound(a),
        Command::Fit(a) => fit(a),
        Command::Report(a) => report(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Assertion(msg)) => {
            eprintln!("assertion failed: {msg}");
            ExitCode::from(EXIT_ASSERT)
        }
        Err(Failure::Error(e)) => {
            eprintln!("error: {e}");
            match e {
                Error::Config(_) => ExitCode::from(EXIT_CONFIG),
                _ => ExitCode::from(EXIT_RUNTIME),
            }
        }
    }
}

fn print_summary(rows: &[SummaryRow]) {
    println!(
        "{:<20} {:<12} {:>7} {:>4} {:>7} {:>12} {:>10} {:>8} {:>8}",
        "algorithm", "class", "n", "k", "trials", "mean", "std", "success", "ratio"
    );
    for r in rows {
        println!(
            "{:<20} {:<12} {:>7} {:>4} {:>7} {:>12} {:>10} {:>8} {:>8}",
            r.algorithm,
            r.class,
            r.n,
            r.k.map(|k| k.to_string()).unwrap_or_else(|| "*".into()),
            r.trials,
            fmt_sig(r.mean_queries),
            fmt_sig(r.std_queries),
            fmt_sig(r.success_rate),
            format!("{:.4}", r.ratio),
        );
    }
}

#[derive(Serialize)]
struct InstanceLine<'a> {
    #[serde(flatten)]
    descriptor: InstanceDescriptor,
    instance: &'a HiddenInstance,
}

fn write_instances(dir: &Path, cfg: &ExperimentConfig) -> unbiased_bb::Result<PathBuf> {
    let path = dir.join("instances.jsonl");
    let io = |source| Error::Io { path: path.clone(), source };
    let mut w = BufWriter::new(File::create(&path).map_err(io)?);
    let mut sizes = cfg.n_values.clone();
    sizes.sort_unstable();
    sizes.dedup();
    for &n in &sizes {
        for t in 0..cfg.trials {
            let seed = cfg.base_seed.wrapping_add(t);
            let instance = regenerate_instance(cfg.class, n, seed)?;
            let line =
                InstanceLine { descriptor: InstanceDescriptor { class: cfg.class, n, seed }, instance: &instance };
            serde_json::to_writer(&mut w, &line)?;
            w.write_all(b"\n").map_err(io)?;
        }
    }
    w.flush().map_err(io)?;
    Ok(path)
}

fn run(a: RunArgs) -> CmdResult {
    let algorithm = Algorithm::from_name(&a.algorithm, a.k)?;
    if a.k.is_some() && !matches!(algorithm, Algorithm::KaryOneMax { .. }) {
        return Err(Error::Config(format!("--k is only valid for kary_onemax, not {algorithm}")).into());
    }
    let class: ProblemClass = a.class.parse()?;
    let mut cfg =
        ExperimentConfig::new(algorithm, class, a.n, a.trials, a.seed).with_budget(a.budget).with_workers(a.workers);
    cfg.output_path = Some(a.out.clone());
    let records = run_experiment(&cfg)?;
    let summaries = summarize(&records);
    print_summary(&summaries);
    let report = Report::from_records(&records, summaries);
    let mut written = emit_report(&records, &report, &a.out)?;
    if a.debug_instances {
        written.push(write_instances(&a.out, &cfg)?);
    }
    for p in written {
        println!("wrote {}", p.display());
    }
    Ok(())
}

fn verify(a: VerifyArgs) -> CmdResult {
    let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
    println!("{:<26} {:<12} {:>7} {:>16}  verdict", "operator", "mode", "trials", "worst deviation");
    let print = |r: &CertificationReport, expect_pass: bool| {
        let verdict = match (r.passed, expect_pass) {
            (true, true) => "PASS",
            (false, false) => "FAIL (expected)",
            (true, false) => "PASS (unexpected)",
            (false, true) => "FAIL",
        };
        println!("{:<26} {:<12} {:>7} {:>16.3e}  {verdict}", r.operator, r.mode, r.trials, r.worst_deviation);
    };
    let mut ok = true;
    for op in shipped_operators() {
        match certify_operator(&op, a.n, a.trials, &mut rng) {
            Ok(r) => {
                print(&r, true);
                ok &= r.passed;
            }
            Err(Error::ExactEnumerationUnavailable { limit, .. }) => {
                println!("{:<26} {:<12} {:>7} {:>16}  skipped (needs n <= {limit})", op.to_string(), "-", 0, "-");
            }
            Err(e) => return Err(e.into()),
        }
    }
    let control = certify_operator(&Operator::ConstantOnes, a.n, a.trials, &mut rng)?;
    print(&control, false);
    ok &= !control.passed;
    if ok {
        Ok(())
    } else {
        Err(Failure::Assertion("certification verdicts differ from expectations".into()))
    }
}

fn parse_grid(text: &str, n: u64) -> unbiased_bb::Result<Vec<u64>> {
    if text == "default" {
        return Ok(default_grid(n));
    }
    text.split(',')
        .map(|s| s.trim().parse::<u64>().map_err(|e| Error::Config(format!("bad grid value {s:?}: {e}"))))
        .collect()
}

fn check_bound(a: BoundArgs) -> CmdResult {
    if a.n < 2 {
        return Err(Error::Config("--n must be at least 2".into()).into());
    }
    let grid = parse_grid(&a.grid, a.n)?;
    if let Some(&d) = grid.iter().find(|&&d| d < 2 || d % 2 == 1 || d > a.n) {
        return Err(Error::Config(format!("grid value {d} must be even and in 2..={}", a.n)).into());
    }
    let res = check_proposition1(a.n, &grid)?;
    println!("n = {}  t = {}  rhs (log2) = {:.6}", res.n, round_size(a.n as usize), res.rhs_log2);
    println!("{:>12} {:>20} {:>20}", "d", "lhs (log2)", "margin");
    let mut points: Vec<_> = res.points.iter().collect();
    points.sort_by(|x, y| x.margin.total_cmp(&y.margin));
    for p in points.iter().take(a.rows) {
        println!("{:>12} {:>20.6} {:>20.6}", p.d, p.lhs_log2, p.margin);
    }
    println!("grid points: {}  minimum margin: {:.6}", res.points.len(), res.margin);
    if res.passed() {
        println!("verdict: PASS");
        Ok(())
    } else {
        println!("verdict: FAIL");
        Err(Failure::Assertion(format!("bound violated, margin {}", res.margin)))
    }
}

fn fit(a: FitArgs) -> CmdResult {
    let model: FitModel = a.model.parse()?;
    let records = read_runs_csv(&a.input)?;
    let fit = fit_curve(&records, model)?;
    println!("model: {}", fit.model);
    println!("{:>8} {:>4} {:>14}", "n", "k", "mean");
    for (n, k, mean) in &fit.points {
        let k = k.map(|k| k.to_string()).unwrap_or_else(|| "*".into());
        println!("{n:>8} {k:>4} {:>14}", fmt_sig(*mean));
    }
    println!("coefficient: {}", fmt_sig(fit.coefficient));
    println!("residual: {}", fmt_sig(fit.residual));
    let mut failures = Vec::new();
    if let Some(lo) = a.assert_min_coef.filter(|&lo| fit.coefficient < lo) {
        failures.push(format!("coefficient {} < {lo}", fit.coefficient));
    }
    if let Some(hi) = a.assert_max_coef.filter(|&hi| fit.coefficient > hi) {
        failures.push(format!("coefficient {} > {hi}", fit.coefficient));
    }
    if let Some(r) = a.assert_max_residual.filter(|&r| fit.residual > r) {
        failures.push(format!("residual {} > {r}", fit.residual));
    }
    if failures.is_empty() {
        Ok(())
    } else {
        Err(Failure::Assertion(failures.join("; ")))
    }
}

fn report(a: ReportArgs) -> CmdResult {
    let records = read_runs_csv(&a.input)?;
    let summaries = summarize(&records);
    print_summary(&summaries);
    let report = Report::from_records(&records, summaries);
    fs::create_dir_all(&a.out).map_err(|source| Error::Io { path: a.out.clone(), source })?;
    for p in emit_report(&records, &report, &a.out)? {
        println!("wrote {}", p.display());
    }
    Ok(())
}
