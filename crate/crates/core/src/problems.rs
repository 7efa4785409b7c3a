//! Hidden-instance function classes and the query-gated [`Oracle`].

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bitcore::{BitString, Permutation};
use crate::error::{contract, ensure_same_len, Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProblemClass {
    OneMax,
    LeadingOnes,
    Monotone,
}

impl ProblemClass {
    pub fn name(self) -> &'static str {
        match self {
            Self::OneMax => "onemax",
            Self::LeadingOnes => "leadingones",
            Self::Monotone => "monotone",
        }
    }
}

impl fmt::Display for ProblemClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(self.name())
    }
}

impl FromStr for ProblemClass {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "onemax" => Ok(Self::OneMax),
            "leadingones" => Ok(Self::LeadingOnes),
            "monotone" => Ok(Self::Monotone),
            other => Err(Error::Config(format!("unknown problem class {other:?}"))),
        }
    }
}

/// `om_z(x)`: number of positions where `x` agrees with the hidden `z`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OneMaxInstance {
    pub z: BitString,
}

impl OneMaxInstance {
    pub fn evaluate(&self, x: &BitString) -> Result<usize> {
        Ok(self.z.len() - self.z.hamming_distance(x)?)
    }
}

/// `lo_{z,sigma}(x)`: length of the longest prefix of the order
/// `sigma(0), sigma(1), ...` on which `x` agrees with `z`.
///
/// The literal reading "largest sigma-index at which x agrees with z" is
/// not used: the critical-pair argument behind the binary LeadingOnes
/// optimizer only holds for the prefix reading.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LeadingOnesInstance {
    pub z: BitString,
    pub sigma: Permutation,
}

impl LeadingOnesInstance {
    pub fn new(z: BitString, sigma: Permutation) -> Result<Self> {
        ensure_same_len(z.len(), sigma.len(), "LeadingOnesInstance")?;
        Ok(Self { z, sigma })
    }

    pub fn evaluate(&self, x: &BitString) -> Result<usize> {
        ensure_same_len(self.z.len(), x.len(), "evaluate_leadingones")?;
        let n = self.z.len();
        Ok((0..n)
            .find(|&j| {
                let p = self.sigma.at(j);
                x.get(p) != self.z.get(p)
            })
            .unwrap_or(n))
    }
}

/// Positive-weight linear agreement function; strictly monotone with
/// respect to `z`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MonotoneInstance {
    pub z: BitString,
    pub weights: Vec<f64>,
}

impl MonotoneInstance {
    pub fn new(z: BitString, weights: Vec<f64>) -> Result<Self> {
        ensure_same_len(z.len(), weights.len(), "MonotoneInstance")?;
        if weights.iter().any(|&w| !w.is_finite() || w <= 0.0) {
            return Err(contract("monotone weights must be finite and strictly positive"));
        }
        Ok(Self { z, weights })
    }

    pub fn evaluate(&self, x: &BitString) -> Result<f64> {
        ensure_same_len(self.z.len(), x.len(), "evaluate_monotone")?;
        let agree = self.z.xor(x)?.complement();
        Ok(agree.ones_positions().map(|i| self.weights[i]).sum())
    }
}

/// One concealed member of a function class.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "class", rename_all = "lowercase")]
pub enum HiddenInstance {
    OneMax(OneMaxInstance),
    LeadingOnes(LeadingOnesInstance),
    Monotone(MonotoneInstance),
}

impl HiddenInstance {
    pub fn class(&self) -> ProblemClass {
        match self {
            Self::OneMax(_) => ProblemClass::OneMax,
            Self::LeadingOnes(_) => ProblemClass::LeadingOnes,
            Self::Monotone(_) => ProblemClass::Monotone,
        }
    }

    pub fn n(&self) -> usize {
        self.optimum().len()
    }

    /// The unique global optimum.
    pub fn optimum(&self) -> &BitString {
        match self {
            Self::OneMax(i) => &i.z,
            Self::LeadingOnes(i) => &i.z,
            Self::Monotone(i) => &i.z,
        }
    }

    pub fn evaluate(&self, x: &BitString) -> Result<f64> {
        match self {
            Self::OneMax(i) => i.evaluate(x).map(|v| v as f64),
            Self::LeadingOnes(i) => i.evaluate(x).map(|v| v as f64),
            Self::Monotone(i) => i.evaluate(x),
        }
    }
}

/// Public part of an instance: enough to regenerate it, nothing more.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InstanceDescriptor {
    pub class: ProblemClass,
    pub n: usize,
    pub seed: u64,
}

/// Draws a uniformly random member of `class`, deterministic in `seed`.
pub fn random_instance(class: ProblemClass, n: usize, seed: u64) -> Result<HiddenInstance> {
    if n < 1 {
        return Err(contract("instance length must be at least 1"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let z = BitString::random(n, &mut rng);
    Ok(match class {
        ProblemClass::OneMax => HiddenInstance::OneMax(OneMaxInstance { z }),
        ProblemClass::LeadingOnes => {
            let sigma = Permutation::random(n, &mut rng);
            HiddenInstance::LeadingOnes(LeadingOnesInstance { z, sigma })
        }
        ProblemClass::Monotone => {
            // random::<f64>() is in [0, 1); reflect to (0, 1]
            let weights = (0..n).map(|_| 1.0 - rng.random::<f64>()).collect();
            HiddenInstance::Monotone(MonotoneInstance { z, weights })
        }
    })
}

/// The only channel between an algorithm and its instance: counts every
/// query, keeps the full history and enforces the budget. No memoization.
#[derive(Clone, Debug)]
pub struct Oracle {
    instance: HiddenInstance,
    budget: Option<u64>,
    history: Vec<(BitString, f64)>,
    first_optimum: Option<u64>,
}

impl Oracle {
    pub fn new(instance: HiddenInstance, budget: Option<u64>) -> Self {
        Self { instance, budget, history: Vec::new(), first_optimum: None }
    }

    pub fn n(&self) -> usize {
        self.instance.n()
    }

    pub fn class(&self) -> ProblemClass {
        self.instance.class()
    }

    pub fn budget(&self) -> Option<u64> {
        self.budget
    }

    pub fn query_count(&self) -> u64 {
        self.history.len() as u64
    }

    /// 1-based index of the first query that hit the optimum.
    pub fn first_optimum_query(&self) -> Option<u64> {
        self.first_optimum
    }

    pub fn query(&mut self, x: &BitString) -> Result<f64> {
        let used = self.query_count();
        if self.budget.is_some_and(|b| used >= b) {
            return Err(Error::BudgetExhausted { queries: used });
        }
        let value = self.instance.evaluate(x)?;
        self.history.push((x.clone(), value));
        if self.first_optimum.is_none() && x == self.instance.optimum() {
            self.first_optimum = Some(used + 1);
        }
        Ok(value)
    }

    /// Debug access to the hidden instance. Not for use by optimizers.
    pub fn instance(&self) -> &HiddenInstance {
        &self.instance
    }

    /// Debug access to the query history. Not for use by optimizers.
    pub fn history(&self) -> &[(BitString, f64)] {
        &self.history
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bs(s: &str) -> BitString {
        s.parse().unwrap()
    }

    #[test]
    fn onemax_examples() {
        let inst = OneMaxInstance { z: bs("1011") };
        assert_eq!(inst.evaluate(&bs("1011")).unwrap(), 4);
        assert_eq!(inst.evaluate(&bs("0100")).unwrap(), 0);
        assert_eq!(inst.evaluate(&bs("1001")).unwrap(), 3);
        assert!(inst.evaluate(&bs("10")).is_err());
    }

    #[test]
    fn onemax_complement_partition() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for n in [1, 7, 64, 130] {
            let inst = OneMaxInstance { z: BitString::random(n, &mut rng) };
            for _ in 0..50 {
                let x = BitString::random(n, &mut rng);
                let total = inst.evaluate(&x).unwrap() + inst.evaluate(&x.complement()).unwrap();
                assert_eq!(total, n);
            }
        }
    }

    #[test]
    fn leadingones_examples() {
        let id = LeadingOnesInstance::new(bs("1111"), Permutation::identity(4)).unwrap();
        assert_eq!(id.evaluate(&bs("1111")).unwrap(), 4);
        assert_eq!(id.evaluate(&bs("1101")).unwrap(), 2);
        // sigma = (3,1,2) in 1-based notation
        let s = LeadingOnesInstance::new(bs("111"), Permutation::new(vec![2, 0, 1]).unwrap()).unwrap();
        assert_eq!(s.evaluate(&bs("110")).unwrap(), 0);
        assert_eq!(s.evaluate(&bs("011")).unwrap(), 1);
        assert_eq!(s.evaluate(&bs("111")).unwrap(), 3);
    }

    #[test]
    fn leadingones_ignores_bits_past_first_disagreement() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        for _ in 0..500 {
            let n = 12;
            let inst = match random_instance(ProblemClass::LeadingOnes, n, rng.random()).unwrap() {
                HiddenInstance::LeadingOnes(i) => i,
                _ => unreachable!(),
            };
            let x = BitString::random(n, &mut rng);
            let v = inst.evaluate(&x).unwrap();
            for j in (v + 1)..n {
                let mut y = x.clone();
                y.flip(inst.sigma.at(j));
                assert_eq!(inst.evaluate(&y).unwrap(), v);
            }
        }
    }

    #[test]
    fn monotone_examples_and_strictness() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let n = 20;
        let inst = match random_instance(ProblemClass::Monotone, n, 5).unwrap() {
            HiddenInstance::Monotone(i) => i,
            _ => unreachable!(),
        };
        let total: f64 = inst.weights.iter().sum();
        assert!((inst.evaluate(&inst.z).unwrap() - total).abs() < 1e-12);
        assert_eq!(inst.evaluate(&inst.z.complement()).unwrap(), 0.0);
        for _ in 0..10_000 {
            // y' agrees with z on a strict superset of y's agreement set
            let y = BitString::random(n, &mut rng);
            let wrong: Vec<usize> = y.differing_positions(&inst.z).unwrap();
            if wrong.is_empty() {
                continue;
            }
            let mut y2 = y.clone();
            let fix = rng.random_range(1..=wrong.len());
            for &p in &wrong[..fix] {
                y2.flip(p);
            }
            assert!(inst.evaluate(&y).unwrap() < inst.evaluate(&y2).unwrap());
        }
        assert!(MonotoneInstance::new(bs("01"), vec![1.0, 0.0]).is_err());
    }

    #[test]
    fn oracle_counts_and_budget() {
        let inst = random_instance(ProblemClass::OneMax, 8, 1).unwrap();
        let mut o = Oracle::new(inst, Some(5));
        let x = BitString::zeros(8);
        o.query(&x).unwrap();
        assert_eq!(o.query_count(), 1);
        o.query(&x).unwrap();
        assert_eq!(o.query_count(), 2, "no memoization");
        for _ in 0..3 {
            o.query(&x).unwrap();
        }
        match o.query(&x) {
            Err(Error::BudgetExhausted { queries }) => assert_eq!(queries, 5),
            other => panic!("expected BudgetExhausted, got {other:?}"),
        }
        assert_eq!(o.history().len() as u64, o.query_count());
    }

    #[test]
    fn oracle_tracks_first_optimum() {
        let inst = random_instance(ProblemClass::LeadingOnes, 6, 3).unwrap();
        let z = inst.optimum().clone();
        let mut o = Oracle::new(inst, None);
        o.query(&z.complement()).unwrap();
        o.query(&z).unwrap();
        o.query(&z).unwrap();
        assert_eq!(o.first_optimum_query(), Some(2));
    }

    #[test]
    fn random_instance_is_deterministic() {
        for class in [ProblemClass::OneMax, ProblemClass::LeadingOnes, ProblemClass::Monotone] {
            assert_eq!(random_instance(class, 33, 77).unwrap(), random_instance(class, 33, 77).unwrap());
        }
        assert!(random_instance(ProblemClass::OneMax, 0, 1).is_err());
        let z = random_instance(ProblemClass::OneMax, 1, 4).unwrap().optimum().clone();
        assert_eq!(z.len(), 1);
    }

    #[test]
    fn random_instance_is_uniform_on_four_bits() {
        use statrs::distribution::{ChiSquared, ContinuousCDF};
        let mut counts = [0u64; 16];
        let draws = 10_000u64;
        for seed in 0..draws {
            let z = random_instance(ProblemClass::OneMax, 4, seed).unwrap();
            counts[z.optimum().to_index() as usize] += 1;
        }
        let expected = draws as f64 / 16.0;
        let stat: f64 = counts.iter().map(|&c| (c as f64 - expected).powi(2) / expected).sum();
        let p = ChiSquared::new(15.0).unwrap().sf(stat);
        assert!(p > 1e-3, "chi-square p = {p}");
    }
}
