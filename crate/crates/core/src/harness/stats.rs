use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::algorithms::{Algorithm, RunRecord};
use crate::bounds::{theory_curve, TheoryModel};
use crate::error::{contract, Error, Result};
use crate::problems::ProblemClass;

/// Mean and sample standard deviation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MomentStats {
    pub count: u64,
    pub mean: f64,
    pub std: f64,
}

impl MomentStats {
    /// Welford's single pass.
    pub fn one_pass(values: &[f64]) -> Self {
        let (mut count, mut mean, mut m2) = (0u64, 0.0, 0.0);
        for &v in values {
            count += 1;
            let delta = v - mean;
            mean += delta / count as f64;
            m2 += delta * (v - mean);
        }
        Self::finish(count, mean, m2)
    }

    /// Mean first, then squared deviations.
    pub fn two_pass(values: &[f64]) -> Self {
        let count = values.len() as u64;
        if count == 0 {
            return Self::finish(0, 0.0, 0.0);
        }
        let mean = values.iter().sum::<f64>() / count as f64;
        let m2 = values.iter().map(|v| (v - mean).powi(2)).sum();
        Self::finish(count, mean, m2)
    }

    fn finish(count: u64, mean: f64, m2: f64) -> Self {
        match count {
            0 => Self { count, mean: f64::NAN, std: f64::NAN },
            1 => Self { count, mean, std: 0.0 },
            _ => Self { count, mean, std: (m2 / (count - 1) as f64).sqrt() },
        }
    }
}

fn median(sorted: &[f64]) -> f64 {
    match sorted.len() {
        0 => f64::NAN,
        len if len % 2 == 1 => sorted[len / 2],
        len => 0.5 * (sorted[len / 2 - 1] + sorted[len / 2]),
    }
}

/// Aggregate over all runs sharing `(algorithm, class, n, k)`.
///
/// Query statistics cover runs that did not hit the budget; those runs
/// still count in `trials` and as failures in `success_rate`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub algorithm: String,
    pub class: ProblemClass,
    pub n: usize,
    pub k: Option<usize>,
    pub trials: u64,
    #[serde(with = "super::report::float_or_null")]
    pub mean_queries: f64,
    #[serde(with = "super::report::float_or_null")]
    pub std_queries: f64,
    #[serde(with = "super::report::float_or_null")]
    pub median_queries: f64,
    #[serde(with = "super::report::float_or_null")]
    pub min_queries: f64,
    #[serde(with = "super::report::float_or_null")]
    pub max_queries: f64,
    #[serde(with = "super::report::float_or_null")]
    pub success_rate: f64,
    #[serde(with = "super::report::float_or_null")]
    pub theory_value: f64,
    #[serde(with = "super::report::float_or_null")]
    pub ratio: f64,
}

/// Leading-order theory curve matching an algorithm, if any.
pub fn theory_model_for(algorithm: &str) -> Option<TheoryModel> {
    match algorithm {
        "binary_onemax" => Some(TheoryModel::Linear2n),
        "star_ary_onemax" => Some(TheoryModel::StarAry),
        "kary_onemax" => Some(TheoryModel::NOverLogk),
        "binary_leadingones" | "rls" => Some(TheoryModel::Nlogn),
        _ => None,
    }
}

pub fn summarize(records: &[RunRecord]) -> Vec<SummaryRow> {
    let mut groups: BTreeMap<(String, ProblemClass, usize, Option<usize>), Vec<&RunRecord>> = BTreeMap::new();
    for r in records {
        groups.entry((r.algorithm.clone(), r.class, r.n, r.k)).or_default().push(r);
    }
    groups
        .into_iter()
        .map(|((algorithm, class, n, k), runs)| {
            let mut queries: Vec<f64> = runs.iter().filter(|r| !r.hit_budget).map(|r| r.queries as f64).collect();
            queries.sort_by(f64::total_cmp);
            let moments = MomentStats::one_pass(&queries);
            let successes = runs.iter().filter(|r| r.success && !r.hit_budget).count();
            let theory_value =
                theory_model_for(&algorithm).and_then(|m| theory_curve(m, n, k).ok()).unwrap_or(f64::NAN);
            SummaryRow {
                trials: runs.len() as u64,
                mean_queries: moments.mean,
                std_queries: moments.std,
                median_queries: median(&queries),
                min_queries: queries.first().copied().unwrap_or(f64::NAN),
                max_queries: queries.last().copied().unwrap_or(f64::NAN),
                success_rate: successes as f64 / runs.len() as f64,
                ratio: moments.mean / theory_value,
                theory_value,
                algorithm,
                class,
                n,
                k,
            }
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FitModel {
    /// `a * n`
    AN,
    /// `a * n * log2 n`
    ANlogn,
    /// `a * n / log2 k`
    ANOverLogk,
}

impl FitModel {
    fn basis(self, n: usize, k: Option<usize>) -> Result<f64> {
        let nf = n as f64;
        match self {
            Self::AN => Ok(nf),
            Self::ANlogn => Ok(nf * nf.log2()),
            Self::ANOverLogk => {
                let k = k.filter(|&k| k >= 2).ok_or_else(|| contract("a_n_over_logk needs k >= 2"))?;
                Ok(nf / (k as f64).log2())
            }
        }
    }

    /// Default model for an algorithm name.
    pub fn for_algorithm(algorithm: &str) -> Option<Self> {
        match algorithm {
            "binary_onemax" => Some(Self::AN),
            "kary_onemax" | "star_ary_onemax" => Some(Self::ANOverLogk),
            "binary_leadingones" | "rls" => Some(Self::ANlogn),
            _ => None,
        }
    }
}

impl FromStr for FitModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "a_n" => Ok(Self::AN),
            "a_nlogn" => Ok(Self::ANlogn),
            "a_n_over_logk" => Ok(Self::ANOverLogk),
            other => Err(Error::Config(format!("unknown fit model {other:?}"))),
        }
    }
}

impl fmt::Display for FitModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(match self {
            Self::AN => "a_n",
            Self::ANlogn => "a_nlogn",
            Self::ANOverLogk => "a_n_over_logk",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Fit {
    pub model: FitModel,
    pub coefficient: f64,
    /// Largest `|mean / (a g) - 1|` over the fitted points.
    pub residual: f64,
    /// `(n, k, mean)` per fitted group.
    pub points: Vec<(usize, Option<usize>, f64)>,
}

/// Least-squares fit through the origin of mean queries per `(n, k)` group
/// against the model basis. Budget-hit runs are excluded.
pub fn fit_curve(records: &[RunRecord], model: FitModel) -> Result<Fit> {
    let mut groups: BTreeMap<(usize, Option<usize>), (f64, u64)> = BTreeMap::new();
    for r in records.iter().filter(|r| !r.hit_budget) {
        let e = groups.entry((r.n, r.k)).or_insert((0.0, 0));
        e.0 += r.queries as f64;
        e.1 += 1;
    }
    if groups.len() < 3 {
        return Err(contract(format!("fit needs at least 3 distinct (n, k) groups, got {}", groups.len())));
    }
    let points: Vec<(usize, Option<usize>, f64)> =
        groups.into_iter().map(|((n, k), (sum, count))| (n, k, sum / count as f64)).collect();
    let basis = points.iter().map(|&(n, k, _)| model.basis(n, k)).collect::<Result<Vec<f64>>>()?;
    let sxy: f64 = basis.iter().zip(&points).map(|(g, p)| g * p.2).sum();
    let sxx: f64 = basis.iter().map(|g| g * g).sum();
    let coefficient = sxy / sxx;
    let residual = basis.iter().zip(&points).map(|(g, p)| (p.2 / (coefficient * g) - 1.0).abs()).fold(0.0, f64::max);
    Ok(Fit { model, coefficient, residual, points })
}

/// Convenience used by reports: a fit for the algorithm's default model,
/// when there is enough data.
pub(crate) fn default_fit(records: &[RunRecord]) -> Option<Fit> {
    let algorithm = records.first()?.algorithm.clone();
    if records.iter().any(|r| r.algorithm != algorithm) {
        return None;
    }
    let model = FitModel::for_algorithm(&algorithm)?;
    fit_curve(records, model).ok()
}

#[allow(dead_code)]
fn _assert_algorithm_names_covered(a: Algorithm) -> bool {
    FitModel::for_algorithm(a.name()).is_some() && theory_model_for(a.name()).is_some()
}
