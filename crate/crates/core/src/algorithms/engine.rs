//! The unbiased black-box engine.
//!
//! Optimizers never touch search points. They refer to earlier queries by
//! [`PointHandle`], pick an [`Operator`], and get back a new handle plus its
//! fitness. The engine samples the operator on the stored points, charges
//! one oracle query per call and rejects calls above the configured arity.
//! The point store is private to this module, so an optimizer cannot read a
//! bitstring even by accident.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::bitcore::BitString;
use crate::error::{Error, Result};
use crate::operators::Operator;
use crate::problems::{HiddenInstance, Oracle, ProblemClass};

/// RNG type of a single run. One stream per run; operators draw from it in
/// call order.
pub type RunRng = ChaCha8Rng;

/// Index of a previously queried point.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct PointHandle(usize);

impl PointHandle {
    pub fn index(self) -> usize {
        self.0
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Arity {
    Bounded(usize),
    Unrestricted,
}

impl Arity {
    pub fn allows(self, arity: usize) -> bool {
        match self {
            Self::Bounded(k) => arity <= k,
            Self::Unrestricted => true,
        }
    }
}

/// Audit entry for one operator application.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OperatorCall {
    pub operator: Operator,
    pub arity: usize,
    pub parents: Vec<PointHandle>,
    /// Word position of the run RNG before the operator drew from it.
    pub rng_word_pos: u128,
}

/// Progress markers emitted by the optimizers. A probe installed on the
/// engine sees them together with debug access to the hidden state, which
/// is how invariants are checked during a run.
#[derive(Clone, Debug, PartialEq)]
pub enum Checkpoint {
    /// Binary OneMax loop head.
    BinaryStep { x: PointHandle, y: PointHandle },
    /// Unrestricted-arity OneMax: one round of samples plus a consistent guess.
    StarRound { round: u64, solved: bool },
    /// k-ary OneMax after a block (`ell == 0` marks the initial pair).
    BlockDone { x: PointHandle, y: PointHandle, ell: usize },
    /// Start of block optimization with the suffix contribution `f_sigma`.
    SubsetStart { far: PointHandle, near: PointHandle, ell: usize, f_sigma: f64 },
    /// LeadingOnes after an outer iteration (`inner == 0` for the initial pair).
    CriticalPair { x: PointHandle, y: PointHandle, inner: u64 },
}

/// Read-only access to hidden state for probes and post-hoc checks.
pub struct DebugView<'a> {
    points: &'a [BitString],
    pub instance: &'a HiddenInstance,
}

impl DebugView<'_> {
    pub fn point(&self, h: PointHandle) -> &BitString {
        &self.points[h.0]
    }
}

type Probe<'p> = Box<dyn FnMut(&Checkpoint, &DebugView<'_>) + 'p>;

pub struct Engine<'p> {
    oracle: Oracle,
    points: Vec<BitString>,
    fitness: Vec<f64>,
    max_arity: Arity,
    audit: Vec<OperatorCall>,
    rng: RunRng,
    probe: Option<Probe<'p>>,
}

impl<'p> Engine<'p> {
    pub fn new(oracle: Oracle, max_arity: Arity, rng: RunRng) -> Self {
        Self { oracle, points: Vec::new(), fitness: Vec::new(), max_arity, audit: Vec::new(), rng, probe: None }
    }

    pub fn with_probe(mut self, probe: impl FnMut(&Checkpoint, &DebugView<'_>) + 'p) -> Self {
        self.probe = Some(Box::new(probe));
        self
    }

    pub fn n(&self) -> usize {
        self.oracle.n()
    }

    /// The function class is public knowledge; the instance is not.
    pub fn class(&self) -> ProblemClass {
        self.oracle.class()
    }

    pub fn max_arity(&self) -> Arity {
        self.max_arity
    }

    /// Applies `op` to the referenced points and queries the result.
    pub fn apply(&mut self, op: Operator, parents: &[PointHandle]) -> Result<(PointHandle, f64)> {
        let arity = op.arity();
        if !self.max_arity.allows(arity) {
            return Err(Error::ModelViolation(format!(
                "{op} has arity {arity}, above the configured {:?}",
                self.max_arity
            )));
        }
        if parents.len() != arity {
            return Err(Error::ModelViolation(format!("{op} needs {arity} parents, got {}", parents.len())));
        }
        if let Some(bad) = parents.iter().find(|h| h.0 >= self.points.len()) {
            return Err(Error::ModelViolation(format!("unknown point handle {}", bad.0)));
        }
        let rng_word_pos = self.rng.get_word_pos();
        let inputs: Vec<&BitString> = parents.iter().map(|h| &self.points[h.0]).collect();
        let point = op.sample(self.oracle.n(), &inputs, &mut self.rng)?;
        let value = self.oracle.query(&point)?;
        let handle = PointHandle(self.points.len());
        self.points.push(point);
        self.fitness.push(value);
        self.audit.push(OperatorCall { operator: op, arity, parents: parents.to_vec(), rng_word_pos });
        Ok((handle, value))
    }

    pub fn fitness(&self, h: PointHandle) -> f64 {
        self.fitness[h.0]
    }

    /// Fair coin from the run stream, for decisions made by the optimizer
    /// itself rather than by an operator.
    pub fn coin(&mut self) -> bool {
        self.rng.random_bool(0.5)
    }

    pub fn checkpoint(&mut self, cp: Checkpoint) {
        if let Some(probe) = self.probe.as_mut() {
            let view = DebugView { points: &self.points, instance: self.oracle.instance() };
            probe(&cp, &view);
        }
    }

    pub fn query_count(&self) -> u64 {
        self.oracle.query_count()
    }

    pub fn audit(&self) -> &[OperatorCall] {
        &self.audit
    }

    pub fn oracle(&self) -> &Oracle {
        &self.oracle
    }

    /// Hidden state, for tests and post-hoc verification only.
    pub fn debug_view(&self) -> DebugView<'_> {
        DebugView { points: &self.points, instance: self.oracle.instance() }
    }

    /// Handle of the most recently queried point.
    pub fn last_handle(&self) -> Option<PointHandle> {
        self.points.len().checked_sub(1).map(PointHandle)
    }
}
