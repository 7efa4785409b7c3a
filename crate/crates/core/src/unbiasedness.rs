//! Certifier for operator unbiasedness: invariance of the output
//! distribution under XOR shifts and position permutations of all inputs.
//!
//! Exact mode compares full pmfs for `n <= EXACT_PMF_LIMIT`. Above that,
//! statistical mode draws samples for the original and the transformed
//! inputs, maps the latter back through the inverse automorphism and runs a
//! chi-square homogeneity test on a handful of output features.

use std::collections::BTreeMap;
use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::bitcore::{BitString, HammingAutomorphism, Permutation};
use crate::consistency::ENUMERATION_LIMIT;
use crate::error::{Error, Result};
use crate::operators::{random_where_different, Operator, EXACT_PMF_LIMIT};

/// Pointwise tolerance for exact pmf comparison.
pub const EXACT_TOLERANCE: f64 = 1e-12;
/// Family-wise p-value threshold in statistical mode, split over trials.
pub const P_THRESHOLD: f64 = 1e-3;
/// Samples drawn per side and trial in statistical mode.
pub const STATISTICAL_SAMPLES: usize = 4000;
/// Largest block used when generating `chooseConsistentSub` inputs.
const SUB_BLOCK_MAX: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InvarianceCheck {
    pub passed: bool,
    pub deviation: f64,
}

impl InvarianceCheck {
    fn from_deviation(deviation: f64) -> Self {
        Self { passed: deviation <= EXACT_TOLERANCE, deviation }
    }
}

fn refs(inputs: &[BitString]) -> Vec<&BitString> {
    inputs.iter().collect()
}

/// Generic check: `D(y | x) == D(g(y) | g(x))` for the bijection `g`.
fn check_under(
    op: &Operator,
    n: usize,
    inputs: &[BitString],
    g: impl Fn(&BitString) -> BitString,
) -> Result<InvarianceCheck> {
    let base = op.exact_pmf(n, &refs(inputs))?;
    let moved_inputs: Vec<BitString> = inputs.iter().map(&g).collect();
    let moved = op.exact_pmf(n, &refs(&moved_inputs))?;
    Ok(InvarianceCheck::from_deviation(base.push_forward(g).max_deviation(&moved)))
}

/// XOR invariance for one input tuple and shift `z`.
pub fn check_xor_invariance(op: &Operator, inputs: &[BitString], z: &BitString) -> Result<InvarianceCheck> {
    check_under(op, z.len(), inputs, |y| y.xor(z).expect("lengths checked by exact_pmf"))
}

/// Permutation invariance for one input tuple and `sigma`.
pub fn check_perm_invariance(op: &Operator, inputs: &[BitString], sigma: &Permutation) -> Result<InvarianceCheck> {
    check_under(op, sigma.len(), inputs, |y| sigma.apply(y).expect("lengths checked by exact_pmf"))
}

/// Invariance under one combined automorphism.
pub fn check_automorphism_invariance(
    op: &Operator,
    inputs: &[BitString],
    a: &HammingAutomorphism,
) -> Result<InvarianceCheck> {
    check_under(op, a.len(), inputs, |y| a.apply(y).expect("lengths checked by exact_pmf"))
}

/// Operators shipped for use by the optimizers, with representative
/// parameters. The consistency operators are templates: only the number of
/// history points matters, values are regenerated per case.
pub fn shipped_operators() -> Vec<Operator> {
    vec![
        Operator::UniformSample,
        Operator::Complement,
        Operator::FlipOneUniform,
        Operator::FlipOneWhereDifferent,
        Operator::FlipKWhereDifferent { ell: 1 },
        Operator::FlipKWhereDifferent { ell: 3 },
        Operator::RandomWhereDifferent,
        Operator::Update,
        Operator::SwitchIfDistanceOne,
        Operator::ChooseConsistent { values: vec![0; 3] },
        Operator::ChooseConsistentSub { values: vec![0; 3] },
    ]
}

/// One random input tuple for `op` at length `n`, with the operator
/// instance to apply (values filled in for the consistency operators).
pub fn random_case<R: Rng + ?Sized>(op: &Operator, n: usize, rng: &mut R) -> Result<(Operator, Vec<BitString>)> {
    let random = |rng: &mut R| BitString::random(n, rng);
    Ok(match op {
        Operator::ChooseConsistent { values } => {
            let z = random(rng);
            let points: Vec<BitString> = (0..values.len()).map(|_| random(rng)).collect();
            let values =
                points.iter().map(|x| Ok((n - x.hamming_distance(&z)?) as u32)).collect::<Result<Vec<u32>>>()?;
            (Operator::ChooseConsistent { values }, points)
        }
        Operator::ChooseConsistentSub { values } => {
            let ell = rng.random_range(1..=n.min(SUB_BLOCK_MAX));
            let block = rand::seq::index::sample(rng, n, ell).into_vec();
            let near = random(rng);
            let mut far = near.clone();
            for &i in &block {
                far.flip(i);
            }
            let z = random(rng);
            let mut points = Vec::with_capacity(values.len() + 2);
            let mut vals = Vec::with_capacity(values.len());
            for _ in 0..values.len() {
                let x = random_where_different(&near, &far, rng)?;
                vals.push(block.iter().filter(|&&i| x.get(i) == z.get(i)).count() as u32);
                points.push(x);
            }
            points.extend([far, near]);
            (Operator::ChooseConsistentSub { values: vals }, points)
        }
        Operator::SwitchIfDistanceOne => {
            let y = random(rng);
            let y2 = if rng.random_bool(0.5) {
                let mut y2 = y.clone();
                y2.flip(rng.random_range(0..n));
                y2
            } else {
                random(rng)
            };
            (op.clone(), vec![y, y2])
        }
        Operator::Update => {
            let a = random(rng);
            let b = random(rng);
            // a == c makes the rule fire everywhere; mix that case in
            let c = if rng.random_bool(0.25) { a.clone() } else { random(rng) };
            (op.clone(), vec![a, b, c])
        }
        Operator::FlipOneWhereDifferent | Operator::FlipKWhereDifferent { .. } | Operator::RandomWhereDifferent => {
            let x = random(rng);
            let y = if rng.random_bool(0.1) { x.clone() } else { random(rng) };
            (op.clone(), vec![x, y])
        }
        other => (other.clone(), (0..other.arity()).map(|_| random(rng)).collect()),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CertificationMode {
    Exact,
    Statistical,
}

impl fmt::Display for CertificationMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(match self {
            Self::Exact => "exact",
            Self::Statistical => "statistical",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CertificationReport {
    pub operator: String,
    pub mode: CertificationMode,
    pub trials: u64,
    /// Exact mode: largest pointwise pmf difference. Statistical mode:
    /// largest total-variation distance between feature histograms.
    pub worst_deviation: f64,
    /// Smallest homogeneity p-value (statistical mode only).
    pub min_p_value: Option<f64>,
    pub passed: bool,
}

impl CertificationReport {
    /// Associative merge of two reports on the same operator and mode.
    pub fn merge(mut self, other: &Self) -> Self {
        self.trials += other.trials;
        self.worst_deviation = self.worst_deviation.max(other.worst_deviation);
        self.min_p_value = match (self.min_p_value, other.min_p_value) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (a, b) => a.or(b),
        };
        self.passed &= other.passed;
        self
    }
}

/// Certifies `op` over `trials` random `(inputs, z, sigma)` cases.
///
/// Exact for `n <= EXACT_PMF_LIMIT`, statistical above. The statistical
/// test needs samples, so `chooseConsistent` is limited to
/// `n <= ENUMERATION_LIMIT`.
pub fn certify_operator<R: Rng + ?Sized>(
    op: &Operator,
    n: usize,
    trials: u64,
    rng: &mut R,
) -> Result<CertificationReport> {
    if n < 1 {
        return Err(Error::Contract("n must be at least 1".into()));
    }
    if n <= EXACT_PMF_LIMIT {
        certify_exact(op, n, trials, rng)
    } else {
        if matches!(op, Operator::ChooseConsistent { .. }) && n > ENUMERATION_LIMIT {
            return Err(Error::ExactEnumerationUnavailable { dim: n, limit: ENUMERATION_LIMIT });
        }
        certify_statistical(op, n, trials, rng)
    }
}

fn certify_exact<R: Rng + ?Sized>(op: &Operator, n: usize, trials: u64, rng: &mut R) -> Result<CertificationReport> {
    let mut worst: f64 = 0.0;
    for _ in 0..trials {
        let (inst, inputs) = random_case(op, n, rng)?;
        let z = BitString::random(n, rng);
        let sigma = Permutation::random(n, rng);
        let combined = HammingAutomorphism::new(z.clone(), sigma.clone())?;
        for check in [
            check_xor_invariance(&inst, &inputs, &z)?,
            check_perm_invariance(&inst, &inputs, &sigma)?,
            check_automorphism_invariance(&inst, &inputs, &combined)?,
        ] {
            worst = worst.max(check.deviation);
        }
    }
    Ok(CertificationReport {
        operator: op.to_string(),
        mode: CertificationMode::Exact,
        trials,
        worst_deviation: worst,
        min_p_value: None,
        passed: worst <= EXACT_TOLERANCE,
    })
}

/// Feature vector of an output: distances to up to three inputs, the
/// popcount when there are no inputs, and the first two bits.
fn features(out: &BitString, inputs: &[BitString]) -> Vec<usize> {
    let mut f: Vec<usize> = inputs.iter().take(3).map(|x| out.hamming_distance(x).expect("same length")).collect();
    if inputs.is_empty() {
        f.push(out.count_ones());
    }
    f.push(out.get(0) as usize);
    f.push(out.get(1.min(out.len() - 1)) as usize);
    f
}

/// Chi-square homogeneity p-value and total-variation distance of two
/// equally sized samples of categories. Sparse categories are pooled.
fn homogeneity(a: &[Vec<usize>], b: &[Vec<usize>]) -> (f64, f64) {
    let mut table: BTreeMap<&Vec<usize>, (u64, u64)> = BTreeMap::new();
    for x in a {
        table.entry(x).or_default().0 += 1;
    }
    for x in b {
        table.entry(x).or_default().1 += 1;
    }
    let tv =
        table.values().map(|&(ca, cb)| (ca as f64 / a.len() as f64 - cb as f64 / b.len() as f64).abs()).sum::<f64>()
            / 2.0;
    let mut cells: Vec<(u64, u64)> = Vec::new();
    let mut pooled = (0, 0);
    for &(ca, cb) in table.values() {
        if ca + cb < 10 {
            pooled.0 += ca;
            pooled.1 += cb;
        } else {
            cells.push((ca, cb));
        }
    }
    if pooled.0 + pooled.1 > 0 {
        cells.push(pooled);
    }
    if cells.len() < 2 {
        return (1.0, tv);
    }
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let total = na + nb;
    let stat: f64 = cells
        .iter()
        .map(|&(ca, cb)| {
            let col = (ca + cb) as f64;
            let (ea, eb) = (na * col / total, nb * col / total);
            (ca as f64 - ea).powi(2) / ea + (cb as f64 - eb).powi(2) / eb
        })
        .sum();
    let dist = ChiSquared::new((cells.len() - 1) as f64).expect("positive degrees of freedom");
    (dist.sf(stat), tv)
}

fn certify_statistical<R: Rng + ?Sized>(
    op: &Operator,
    n: usize,
    trials: u64,
    rng: &mut R,
) -> Result<CertificationReport> {
    let threshold = P_THRESHOLD / trials.max(1) as f64;
    let (mut worst, mut min_p): (f64, f64) = (0.0, 1.0);
    for _ in 0..trials {
        let (inst, inputs) = random_case(op, n, rng)?;
        let a = HammingAutomorphism::random(n, rng);
        let back = a.inverse();
        let moved: Vec<BitString> = inputs.iter().map(|x| a.apply(x)).collect::<Result<_>>()?;
        let mut plain = Vec::with_capacity(STATISTICAL_SAMPLES);
        let mut mapped = Vec::with_capacity(STATISTICAL_SAMPLES);
        for _ in 0..STATISTICAL_SAMPLES {
            plain.push(features(&inst.sample(n, &refs(&inputs), rng)?, &inputs));
            let y = back.apply(&inst.sample(n, &refs(&moved), rng)?)?;
            mapped.push(features(&y, &inputs));
        }
        let (p, tv) = homogeneity(&plain, &mapped);
        min_p = min_p.min(p);
        worst = worst.max(tv);
    }
    Ok(CertificationReport {
        operator: op.to_string(),
        mode: CertificationMode::Statistical,
        trials,
        worst_deviation: worst,
        min_p_value: Some(min_p),
        passed: min_p >= threshold,
    })
}
