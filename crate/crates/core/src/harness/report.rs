use std::fs::{self, File};
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::stats::{default_fit, theory_model_for, Fit, SummaryRow};
use crate::algorithms::RunRecord;
use crate::bounds::{theory_curve, TheoryModel};
use crate::error::{Error, Result};
use crate::problems::ProblemClass;

pub const RUNS_HEADER: &str = "run_id,algorithm,class,n,k,seed,queries,success,hit_budget";
pub const SUMMARY_HEADER: &str = "algorithm,class,n,k,trials,mean_queries,std_queries,median_queries,min_queries,max_queries,success_rate,theory_value,ratio";

/// Rounds to 9 significant digits and prints the shortest form of the
/// rounded value. Non-finite values become the empty string.
pub fn fmt_sig(x: f64) -> String {
    if !x.is_finite() {
        return String::new();
    }
    let rounded: f64 = format!("{x:.8e}").parse().expect("formatted float parses");
    format!("{rounded}")
}

/// Serializes NaN and infinities as `null` and reads `null` back as NaN.
pub(crate) mod float_or_null {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
        if x.is_finite() {
            s.serialize_f64(*x)
        } else {
            s.serialize_none()
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::NAN))
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |source| Error::Io { path: path.to_path_buf(), source }
}

fn csv_err(path: &Path) -> impl FnOnce(csv::Error) -> Error + '_ {
    move |source| Error::Csv { path: path.to_path_buf(), source }
}

fn opt(k: Option<usize>) -> String {
    k.map(|k| k.to_string()).unwrap_or_default()
}

fn write_rows(path: &Path, header: &str, rows: impl Iterator<Item = Vec<String>>) -> Result<()> {
    let file = File::create(path).map_err(io_err(path))?;
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(file);
    w.write_record(header.split(',')).map_err(csv_err(path))?;
    for row in rows {
        w.write_record(&row).map_err(csv_err(path))?;
    }
    w.flush().map_err(io_err(path))
}

pub fn write_runs_csv(path: &Path, records: &[RunRecord]) -> Result<()> {
    write_rows(
        path,
        RUNS_HEADER,
        records.iter().map(|r| {
            vec![
                r.run_id.to_string(),
                r.algorithm.clone(),
                r.class.to_string(),
                r.n.to_string(),
                opt(r.k),
                r.seed.to_string(),
                r.queries.to_string(),
                r.success.to_string(),
                r.hit_budget.to_string(),
            ]
        }),
    )
}

pub fn write_summary_csv(path: &Path, rows: &[SummaryRow]) -> Result<()> {
    write_rows(
        path,
        SUMMARY_HEADER,
        rows.iter().map(|r| {
            vec![
                r.algorithm.clone(),
                r.class.to_string(),
                r.n.to_string(),
                opt(r.k),
                r.trials.to_string(),
                fmt_sig(r.mean_queries),
                fmt_sig(r.std_queries),
                fmt_sig(r.median_queries),
                fmt_sig(r.min_queries),
                fmt_sig(r.max_queries),
                fmt_sig(r.success_rate),
                fmt_sig(r.theory_value),
                fmt_sig(r.ratio),
            ]
        }),
    )
}

#[derive(Deserialize)]
struct RawRun {
    run_id: u64,
    algorithm: String,
    class: ProblemClass,
    n: usize,
    k: Option<usize>,
    seed: u64,
    queries: u64,
    success: bool,
    hit_budget: bool,
}

/// Reads a runs CSV; the header must match [`RUNS_HEADER`] exactly.
pub fn read_runs_csv(path: &Path) -> Result<Vec<RunRecord>> {
    let file = File::open(path).map_err(io_err(path))?;
    let mut r = csv::Reader::from_reader(file);
    let header = r.headers().map_err(csv_err(path))?.iter().collect::<Vec<_>>().join(",");
    if header != RUNS_HEADER {
        return Err(Error::Config(format!("{}: unexpected header {header:?}", path.display())));
    }
    r.deserialize::<RawRun>()
        .map(|row| {
            let row = row.map_err(csv_err(path))?;
            Ok(RunRecord {
                run_id: row.run_id,
                algorithm: row.algorithm,
                class: row.class,
                n: row.n,
                k: row.k,
                seed: row.seed,
                queries: row.queries,
                success: row.success,
                hit_budget: row.hit_budget,
            })
        })
        .collect()
}

/// Theory overlay value for one summary group.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TheoryPoint {
    pub model: TheoryModel,
    pub algorithm: String,
    pub n: usize,
    pub k: Option<usize>,
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub summaries: Vec<SummaryRow>,
    pub fits: Vec<Fit>,
    pub theory: Vec<TheoryPoint>,
}

impl Report {
    pub fn new(summaries: Vec<SummaryRow>, fits: Vec<Fit>) -> Self {
        let theory = summaries
            .iter()
            .filter_map(|s| {
                let model = theory_model_for(&s.algorithm)?;
                let value = theory_curve(model, s.n, s.k).ok()?;
                Some(TheoryPoint { model, algorithm: s.algorithm.clone(), n: s.n, k: s.k, value })
            })
            .collect();
        Self { summaries, fits, theory }
    }

    /// Fits with each algorithm's default model where enough groups exist.
    pub fn from_records(records: &[RunRecord], summaries: Vec<SummaryRow>) -> Self {
        let mut algorithms: Vec<&str> = records.iter().map(|r| r.algorithm.as_str()).collect();
        algorithms.sort_unstable();
        algorithms.dedup();
        let fits = algorithms
            .into_iter()
            .filter_map(|a| {
                let subset: Vec<RunRecord> = records.iter().filter(|r| r.algorithm == a).cloned().collect();
                default_fit(&subset)
            })
            .collect();
        Self::new(summaries, fits)
    }
}

/// File names written by [`emit_report`] inside the output directory.
pub const RUNS_FILE: &str = "runs.csv";
pub const SUMMARY_FILE: &str = "summary.csv";
pub const REPORT_FILE: &str = "report.json";

/// Writes `runs.csv`, `summary.csv` and `report.json` into `dir`, creating
/// it if needed. Returns the paths written.
pub fn emit_report(records: &[RunRecord], report: &Report, dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let runs = dir.join(RUNS_FILE);
    let summary = dir.join(SUMMARY_FILE);
    let json = dir.join(REPORT_FILE);
    write_runs_csv(&runs, records)?;
    write_summary_csv(&summary, &report.summaries)?;
    let mut f = File::create(&json).map_err(io_err(&json))?;
    serde_json::to_writer_pretty(&mut f, report)?;
    f.write_all(b"\n").map_err(io_err(&json))?;
    Ok(vec![runs, summary, json])
}
