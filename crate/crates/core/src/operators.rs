//! Unbiased variation operators.
//!
//! Every operator exists in two forms: a sampler driven by the run's RNG,
//! and [`Operator::exact_pmf`], the full output distribution for small `n`.
//! The certifier in [`crate::unbiasedness`] checks the latter.

use std::collections::BTreeMap;
use std::fmt;

use rand::seq::index;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::bitcore::BitString;
use crate::consistency::{self, ConsistencyQuery};
use crate::error::{contract, ensure_same_len, Error, Result};

/// Largest `n` for which [`Operator::exact_pmf`] enumerates outputs.
pub const EXACT_PMF_LIMIT: usize = 16;

/// A variation operator together with its parameters.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "camelCase")]
pub enum Operator {
    UniformSample,
    Complement,
    /// Unary single uniform bit flip (random local search).
    FlipOneUniform,
    FlipOneWhereDifferent,
    FlipKWhereDifferent {
        ell: usize,
    },
    RandomWhereDifferent,
    Update,
    SwitchIfDistanceOne,
    /// Arity equals `values.len()`; `values[i]` is the observed OneMax value
    /// of input `i`.
    ChooseConsistent {
        values: Vec<u32>,
    },
    /// Inputs are `r` history points followed by the two block anchors;
    /// `values` are the block-level agreement counts of the history points.
    ChooseConsistentSub {
        values: Vec<u32>,
    },
    /// Negative control: always returns the all-ones string. Biased.
    ConstantOnes,
}

impl Operator {
    pub fn name(&self) -> &'static str {
        match self {
            Self::UniformSample => "uniformSample",
            Self::Complement => "complement",
            Self::FlipOneUniform => "flipOneUniform",
            Self::FlipOneWhereDifferent => "flipOneWhereDifferent",
            Self::FlipKWhereDifferent { .. } => "flipKWhereDifferent",
            Self::RandomWhereDifferent => "randomWhereDifferent",
            Self::Update => "update",
            Self::SwitchIfDistanceOne => "switchIfDistanceOne",
            Self::ChooseConsistent { .. } => "chooseConsistent",
            Self::ChooseConsistentSub { .. } => "chooseConsistentSub",
            Self::ConstantOnes => "constantOnes",
        }
    }

    pub fn arity(&self) -> usize {
        match self {
            Self::UniformSample | Self::ConstantOnes => 0,
            Self::Complement | Self::FlipOneUniform => 1,
            Self::FlipOneWhereDifferent
            | Self::FlipKWhereDifferent { .. }
            | Self::RandomWhereDifferent
            | Self::SwitchIfDistanceOne => 2,
            Self::Update => 3,
            Self::ChooseConsistent { values } => values.len(),
            Self::ChooseConsistentSub { values } => values.len() + 2,
        }
    }

    fn check_inputs(&self, n: usize, inputs: &[&BitString]) -> Result<()> {
        if n < 1 {
            return Err(contract("string length must be at least 1"));
        }
        if inputs.len() != self.arity() {
            return Err(contract(format!("{} expects {} inputs, got {}", self.name(), self.arity(), inputs.len())));
        }
        for x in inputs {
            ensure_same_len(x.len(), n, self.name())?;
        }
        Ok(())
    }

    /// Draws one output from `D(. | inputs)`.
    pub fn sample<R: Rng + ?Sized>(&self, n: usize, inputs: &[&BitString], rng: &mut R) -> Result<BitString> {
        self.check_inputs(n, inputs)?;
        match self {
            Self::UniformSample => uniform_sample(n, rng),
            Self::ConstantOnes => Ok(BitString::ones(n)),
            Self::Complement => Ok(complement_op(inputs[0])),
            Self::FlipOneUniform => Ok(flip_one_uniform(inputs[0], rng)),
            Self::FlipOneWhereDifferent => flip_one_where_different(inputs[0], inputs[1], rng),
            Self::FlipKWhereDifferent { ell } => flip_k_where_different(*ell, inputs[0], inputs[1], rng),
            Self::RandomWhereDifferent => random_where_different(inputs[0], inputs[1], rng),
            Self::Update => update_op(inputs[0], inputs[1], inputs[2]),
            Self::SwitchIfDistanceOne => switch_if_distance_one(inputs[0], inputs[1]),
            Self::ChooseConsistent { values } => {
                let q = ConsistencyQuery::new(n, inputs.iter().map(|&x| x.clone()).collect(), values.clone())?;
                consistency::choose_consistent(&q, rng)
            }
            Self::ChooseConsistentSub { values } => {
                let (block, history, far, near) = sub_parts(inputs, values)?;
                consistency::choose_consistent_sub(&block, &history, (far, near), rng)
            }
        }
    }

    /// The exact output distribution, for `n <= EXACT_PMF_LIMIT`.
    pub fn exact_pmf(&self, n: usize, inputs: &[&BitString]) -> Result<OutputDistribution> {
        if n > EXACT_PMF_LIMIT {
            return Err(Error::ExactEnumerationUnavailable { dim: n, limit: EXACT_PMF_LIMIT });
        }
        self.check_inputs(n, inputs)?;
        match self {
            Self::UniformSample => Ok(OutputDistribution::uniform((0..1u64 << n).map(|v| BitString::from_index(n, v)))),
            Self::FlipOneUniform => {
                let x = inputs[0];
                Ok(OutputDistribution::uniform((0..n).map(|i| {
                    let mut y = x.clone();
                    y.flip(i);
                    y
                })))
            }
            Self::FlipOneWhereDifferent => {
                let (x, y) = (inputs[0], inputs[1]);
                let diff = x.differing_positions(y)?;
                if diff.is_empty() {
                    return Ok(OutputDistribution::point(x.clone()));
                }
                Ok(OutputDistribution::uniform(diff.iter().map(|&i| {
                    let mut out = x.clone();
                    out.flip(i);
                    out
                })))
            }
            Self::FlipKWhereDifferent { ell } => {
                let (x, y) = (inputs[0], inputs[1]);
                let diff = x.differing_positions(y)?;
                let m = (*ell).min(diff.len());
                Ok(OutputDistribution::uniform(combinations(diff.len(), m).map(|subset| {
                    let mut out = y.clone();
                    for j in subset {
                        out.flip(diff[j]);
                    }
                    out
                })))
            }
            Self::RandomWhereDifferent => {
                let (x, y) = (inputs[0], inputs[1]);
                let diff = x.differing_positions(y)?;
                Ok(OutputDistribution::uniform((0..1u64 << diff.len()).map(|mask| {
                    let mut out = x.clone();
                    for (j, &p) in diff.iter().enumerate() {
                        if (mask >> j) & 1 == 1 {
                            out.flip(p);
                        }
                    }
                    out
                })))
            }
            Self::ChooseConsistent { values } => {
                let q = ConsistencyQuery::new(n, inputs.iter().map(|&x| x.clone()).collect(), values.clone())?;
                let set = consistency::consistent_set(&q)?;
                if set.is_empty() {
                    Self::UniformSample.exact_pmf(n, &[])
                } else {
                    Ok(OutputDistribution::uniform(set))
                }
            }
            Self::ChooseConsistentSub { values } => {
                let (block, history, far, near) = sub_parts(inputs, values)?;
                let q = consistency::sub_query(&block, &history, (far, near))?;
                let set = consistency::consistent_set(&q)?;
                let blocks: Vec<u64> = if set.is_empty() {
                    (0..1u64 << block.len()).collect()
                } else {
                    set.iter().map(BitString::to_index).collect()
                };
                Ok(OutputDistribution::uniform(blocks.into_iter().map(|v| {
                    let mut out = near.clone();
                    out.embed(&block, v);
                    out
                })))
            }
            Self::Complement => Ok(OutputDistribution::point(complement_op(inputs[0]))),
            Self::Update => Ok(OutputDistribution::point(update_op(inputs[0], inputs[1], inputs[2])?)),
            Self::SwitchIfDistanceOne => Ok(OutputDistribution::point(switch_if_distance_one(inputs[0], inputs[1])?)),
            Self::ConstantOnes => Ok(OutputDistribution::point(BitString::ones(n))),
        }
    }
}

impl fmt::Display for Operator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::FlipKWhereDifferent { ell } => write!(f, "{}[{ell}]", self.name()),
            other => f.pad(other.name()),
        }
    }
}

type SubParts<'a> = (Vec<usize>, Vec<(BitString, u32)>, &'a BitString, &'a BitString);

fn sub_parts<'a>(inputs: &[&'a BitString], values: &[u32]) -> Result<SubParts<'a>> {
    let r = values.len();
    let (far, near) = (inputs[r], inputs[r + 1]);
    let block = far.differing_positions(near)?;
    let history = inputs[..r].iter().zip(values).map(|(&x, &u)| (x.clone(), u)).collect();
    Ok((block, history, far, near))
}

/// All `m`-subsets of `0..d` as index vectors, in lexicographic order.
fn combinations(d: usize, m: usize) -> impl Iterator<Item = Vec<usize>> {
    let mut current: Option<Vec<usize>> = Some((0..m).collect());
    std::iter::from_fn(move || {
        let out = current.take()?;
        let mut next = out.clone();
        let mut i = m;
        while i > 0 {
            i -= 1;
            if next[i] < d - m + i {
                next[i] += 1;
                for j in i + 1..m {
                    next[j] = next[j - 1] + 1;
                }
                current = Some(next);
                break;
            }
        }
        Some(out)
    })
}

/// Probability mass function over output strings.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct OutputDistribution {
    pub support: BTreeMap<BitString, f64>,
}

impl OutputDistribution {
    pub fn point(x: BitString) -> Self {
        Self { support: BTreeMap::from([(x, 1.0)]) }
    }

    /// Uniform over the listed outcomes; repeats accumulate mass.
    pub fn uniform(outcomes: impl IntoIterator<Item = BitString>) -> Self {
        let outcomes: Vec<BitString> = outcomes.into_iter().collect();
        let p = 1.0 / outcomes.len() as f64;
        let mut support = BTreeMap::new();
        for x in outcomes {
            *support.entry(x).or_insert(0.0) += p;
        }
        Self { support }
    }

    pub fn prob(&self, x: &BitString) -> f64 {
        self.support.get(x).copied().unwrap_or(0.0)
    }

    pub fn total(&self) -> f64 {
        self.support.values().sum()
    }

    pub fn len(&self) -> usize {
        self.support.len()
    }

    pub fn is_empty(&self) -> bool {
        self.support.is_empty()
    }

    /// Image distribution under a bijection `f`.
    pub fn push_forward(&self, f: impl Fn(&BitString) -> BitString) -> Self {
        let mut support = BTreeMap::new();
        for (x, &p) in &self.support {
            *support.entry(f(x)).or_insert(0.0) += p;
        }
        Self { support }
    }

    /// Largest pointwise absolute difference over the union of supports.
    pub fn max_deviation(&self, other: &Self) -> f64 {
        self.support
            .keys()
            .chain(other.support.keys())
            .map(|x| (self.prob(x) - other.prob(x)).abs())
            .fold(0.0, f64::max)
    }
}

pub fn uniform_sample<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<BitString> {
    if n < 1 {
        return Err(contract("uniform_sample needs n >= 1"));
    }
    Ok(BitString::random(n, rng))
}

pub fn complement_op(x: &BitString) -> BitString {
    x.complement()
}

pub fn flip_one_uniform<R: Rng + ?Sized>(x: &BitString, rng: &mut R) -> BitString {
    let mut out = x.clone();
    out.flip(rng.random_range(0..x.len()));
    out
}

/// Copy of `x` with one uniformly chosen position where `x` and `y` differ
/// flipped; `x` itself when they are equal.
pub fn flip_one_where_different<R: Rng + ?Sized>(x: &BitString, y: &BitString, rng: &mut R) -> Result<BitString> {
    let diff = x.xor(y)?;
    let d = diff.count_ones();
    let mut out = x.clone();
    if d > 0 {
        let pos = diff.nth_one(rng.random_range(0..d)).expect("rank below popcount");
        out.flip(pos);
    }
    Ok(out)
}

/// Copy of `y` with a uniformly random `min(ell, H(x, y))`-subset of the
/// differing positions flipped (towards `x`).
pub fn flip_k_where_different<R: Rng + ?Sized>(
    ell: usize,
    x: &BitString,
    y: &BitString,
    rng: &mut R,
) -> Result<BitString> {
    let diff = x.differing_positions(y)?;
    let m = ell.min(diff.len());
    let mut out = y.clone();
    for j in index::sample(rng, diff.len(), m) {
        out.flip(diff[j]);
    }
    Ok(out)
}

/// Uniform crossover: agrees with both parents where they agree, fair coin
/// elsewhere.
pub fn random_where_different<R: Rng + ?Sized>(x: &BitString, y: &BitString, rng: &mut R) -> Result<BitString> {
    let diff = x.xor(y)?;
    let coins = BitString::random(x.len(), rng);
    x.xor(&diff.and(&coins)?)
}

/// `a'_i = b_i` where `a_i = c_i`, else `a_i`.
pub fn update_op(a: &BitString, b: &BitString, c: &BitString) -> Result<BitString> {
    ensure_same_len(a.len(), b.len(), "update")?;
    ensure_same_len(a.len(), c.len(), "update")?;
    Ok(BitString::from_fn(a.len(), |i| if a.get(i) == c.get(i) { b.get(i) } else { a.get(i) }))
}

/// `y2` if it is at Hamming distance exactly one from `y`, else `y`.
pub fn switch_if_distance_one(y: &BitString, y2: &BitString) -> Result<BitString> {
    Ok(if y.hamming_distance(y2)? == 1 { y2.clone() } else { y.clone() })
}
