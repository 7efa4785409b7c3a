use super::engine::Engine;
use crate::error::{Error, Result};
use crate::operators::Operator;
use crate::problems::ProblemClass;

/// Random local search: flip one uniform bit, keep the child unless it is
/// worse. Unary; serves as the comparison baseline.
pub fn run_rls_baseline(e: &mut Engine<'_>) -> Result<()> {
    let class = e.class();
    if !matches!(class, ProblemClass::OneMax | ProblemClass::LeadingOnes) {
        return Err(Error::Config(format!("rls cannot optimize {class}")));
    }
    let target = e.n() as f64;
    let (mut x, mut fx) = e.apply(Operator::UniformSample, &[])?;
    while fx < target {
        let (cand, f) = e.apply(Operator::FlipOneUniform, &[x])?;
        if f >= fx {
            x = cand;
            fx = f;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use rand::SeedableRng;

    use crate::algorithms::{run_algorithm, Algorithm, RunRng};
    use crate::problems::{random_instance, Oracle, ProblemClass};

    /// Expected queries from a uniform start: one initial query plus
    /// `n H_d` for initial distance `d ~ Bin(n, 1/2)`.
    fn expected_onemax(n: usize) -> f64 {
        let harmonic = |d: usize| (1..=d).map(|j| 1.0 / j as f64).sum::<f64>();
        let mut log_binom = 0.0f64; // ln C(n, d)
        let mut total = 0.0;
        for d in 0..=n {
            if d > 0 {
                log_binom += ((n - d + 1) as f64).ln() - (d as f64).ln();
            }
            let p = (log_binom - n as f64 * 2f64.ln()).exp();
            total += p * (1.0 + n as f64 * harmonic(d));
        }
        total
    }

    #[test]
    fn onemax_matches_coupon_collector() {
        let n = 128;
        let runs = 1000;
        let mut sum = 0.0;
        for seed in 0..runs {
            let oracle = Oracle::new(random_instance(ProblemClass::OneMax, n, seed).unwrap(), None);
            let out = run_algorithm(Algorithm::Rls, oracle, RunRng::seed_from_u64(!seed)).unwrap();
            assert!(out.success);
            sum += out.queries as f64;
        }
        let mean = sum / runs as f64;
        let expected = expected_onemax(n);
        assert!((mean / expected - 1.0).abs() < 0.05, "mean {mean} vs {expected}");
    }
}
