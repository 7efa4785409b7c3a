//! Optimizers in the unbiased black-box model.

mod binary_onemax;
pub mod engine;
mod kary;
mod leadingones;
mod rls;
mod star_ary;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use binary_onemax::run_binary_onemax;
pub use engine::{Arity, Checkpoint, DebugView, Engine, OperatorCall, PointHandle, RunRng};
pub use kary::{optimize_subset, run_kary_onemax, subset_rounds};
pub use leadingones::run_binary_leadingones;
pub use rls::run_rls_baseline;
pub use star_ary::run_star_ary_onemax;

use crate::consistency::ENUMERATION_LIMIT;
use crate::error::{Error, Result};
use crate::problems::{Oracle, ProblemClass};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Algorithm {
    BinaryOneMax,
    StarAryOneMax,
    KaryOneMax { k: usize },
    BinaryLeadingOnes,
    Rls,
}

impl Algorithm {
    pub fn name(self) -> &'static str {
        match self {
            Self::BinaryOneMax => "binary_onemax",
            Self::StarAryOneMax => "star_ary_onemax",
            Self::KaryOneMax { .. } => "kary_onemax",
            Self::BinaryLeadingOnes => "binary_leadingones",
            Self::Rls => "rls",
        }
    }

    /// Parses a CLI name; `k` is required by `kary_onemax` only.
    pub fn from_name(name: &str, k: Option<usize>) -> Result<Self> {
        match name {
            "kary_onemax" => {
                k.map(|k| Self::KaryOneMax { k }).ok_or_else(|| Error::Config("kary_onemax requires --k".into()))
            }
            other => other.parse(),
        }
    }

    pub fn max_arity(self) -> Arity {
        match self {
            Self::Rls => Arity::Bounded(1),
            Self::BinaryOneMax | Self::BinaryLeadingOnes => Arity::Bounded(2),
            Self::KaryOneMax { k } => Arity::Bounded(k),
            Self::StarAryOneMax => Arity::Unrestricted,
        }
    }

    /// Arity reported in run records; `None` for unrestricted arity.
    pub fn arity_label(self) -> Option<usize> {
        match self.max_arity() {
            Arity::Bounded(k) => Some(k),
            Arity::Unrestricted => None,
        }
    }

    /// Rejects algorithm/class/size combinations before any run starts.
    pub fn validate(self, class: ProblemClass, n: usize) -> Result<()> {
        let ok = match self {
            Self::BinaryOneMax => matches!(class, ProblemClass::OneMax | ProblemClass::Monotone),
            Self::StarAryOneMax | Self::KaryOneMax { .. } => class == ProblemClass::OneMax,
            Self::BinaryLeadingOnes => class == ProblemClass::LeadingOnes,
            Self::Rls => matches!(class, ProblemClass::OneMax | ProblemClass::LeadingOnes),
        };
        if !ok {
            return Err(Error::Config(format!("{} does not support class {class}", self.name())));
        }
        if n < 1 {
            return Err(Error::Config("n must be at least 1".into()));
        }
        match self {
            Self::StarAryOneMax if n > ENUMERATION_LIMIT => {
                Err(Error::Config(format!("star_ary_onemax needs n <= {ENUMERATION_LIMIT}, got {n}")))
            }
            Self::KaryOneMax { k } if !(3..=ENUMERATION_LIMIT).contains(&k) => {
                Err(Error::Config(format!("kary_onemax needs 3 <= k <= {ENUMERATION_LIMIT}, got {k}")))
            }
            _ => Ok(()),
        }
    }

    /// Runs the optimizer on a prepared engine until it stops or the budget
    /// runs out.
    pub fn drive(self, engine: &mut Engine<'_>) -> Result<()> {
        match self {
            Self::BinaryOneMax => run_binary_onemax(engine),
            Self::StarAryOneMax => run_star_ary_onemax(engine),
            Self::KaryOneMax { k } => run_kary_onemax(engine, k),
            Self::BinaryLeadingOnes => run_binary_leadingones(engine),
            Self::Rls => run_rls_baseline(engine),
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "binary_onemax" => Ok(Self::BinaryOneMax),
            "star_ary_onemax" => Ok(Self::StarAryOneMax),
            "binary_leadingones" => Ok(Self::BinaryLeadingOnes),
            "rls" => Ok(Self::Rls),
            "kary_onemax" => Err(Error::Config("kary_onemax requires --k".into())),
            other => Err(Error::Config(format!("unknown algorithm {other:?}"))),
        }
    }
}

/// Default per-run budget: `100 * n * ceil(log2(n + 1))` queries.
pub fn default_budget(n: usize) -> u64 {
    let bits = usize::BITS - n.leading_zeros(); // ceil(log2(n + 1))
    100 * n as u64 * bits as u64
}

/// What a single run produced, before the harness attaches identifiers.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RunOutcome {
    /// Queries up to and including the first optimum hit, or all queries
    /// spent when the optimum was never hit.
    pub queries: u64,
    pub success: bool,
    pub hit_budget: bool,
}

/// Builds the outcome from the oracle state once the optimizer returned.
pub fn finish(oracle: &Oracle, result: Result<()>) -> Result<RunOutcome> {
    let hit_budget = match result {
        Ok(()) => false,
        Err(Error::BudgetExhausted { .. }) => true,
        Err(other) => return Err(other),
    };
    let first = oracle.first_optimum_query();
    Ok(RunOutcome { queries: first.unwrap_or_else(|| oracle.query_count()), success: first.is_some(), hit_budget })
}

/// Runs `algorithm` on `oracle` with a fresh engine.
pub fn run_algorithm(algorithm: Algorithm, oracle: Oracle, rng: RunRng) -> Result<RunOutcome> {
    algorithm.validate(oracle.class(), oracle.n())?;
    let mut engine = Engine::new(oracle, algorithm.max_arity(), rng);
    let result = algorithm.drive(&mut engine);
    finish(engine.oracle(), result)
}

/// One row of the runs table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub run_id: u64,
    pub algorithm: String,
    pub class: ProblemClass,
    pub n: usize,
    pub k: Option<usize>,
    pub seed: u64,
    pub queries: u64,
    pub success: bool,
    pub hit_budget: bool,
}

/// Converts an integer-valued fitness to an agreement count.
pub(crate) fn as_count(f: f64) -> u32 {
    debug_assert!(f >= 0.0 && f.fract() == 0.0, "non-integral fitness {f}");
    f.round() as u32
}
