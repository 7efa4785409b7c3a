//! Log-space check of the union-bound inequality behind the
//! unrestricted-arity OneMax optimizer, plus the leading-order runtime
//! curves used as report overlays.
//!
//! For `t` uniform samples and even `d`, the checked inequality is
//!
//! ```text
//! C(n, d) * (C(d, d/2) / 2^d)^t <= 2^(-3t/4)
//! ```
//!
//! evaluated as `log2 C(n,d) + t (log2 C(d,d/2) - d) <= -3t/4`. All logs
//! are base 2.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{contract, Error, Result};

/// Samples per round: `ceil((1 + 4 log log n / log n) * 2n / log n)`.
///
/// For `n <= 2` the `log log` term is taken as zero and the result is at
/// least one; `n = 1` gives 1.
pub fn round_size(n: usize) -> usize {
    if n <= 1 {
        return 1;
    }
    let log = (n as f64).log2();
    let loglog = if n <= 2 { 0.0 } else { log.log2() };
    let t = ((1.0 + 4.0 * loglog / log) * 2.0 * n as f64 / log).ceil();
    (t as usize).max(1)
}

const LN_FACT_TABLE: usize = 256;

fn ln_factorial(n: u64) -> f64 {
    thread_local! {
        static TABLE: Vec<f64> = {
            let mut t = vec![0.0; LN_FACT_TABLE];
            for i in 1..LN_FACT_TABLE {
                t[i] = t[i - 1] + (i as f64).ln();
            }
            t
        };
    }
    if (n as usize) < LN_FACT_TABLE {
        return TABLE.with(|t| t[n as usize]);
    }
    // Stirling series; the first omitted term is below 1e-19 for n >= 256
    let x = n as f64;
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    x * x.ln() - x
        + 0.5 * (2.0 * std::f64::consts::PI * x).ln()
        + inv * (1.0 / 12.0 - inv2 * (1.0 / 360.0 - inv2 * (1.0 / 1260.0 - inv2 / 1680.0)))
}

/// `log2 C(n, k)` through log-factorials; safe for `n` far beyond `2^24`.
pub fn log2_binomial(n: u64, k: u64) -> Result<f64> {
    if k > n {
        return Err(contract(format!("log2_binomial: k = {k} exceeds n = {n}")));
    }
    if k == 0 || k == n {
        return Ok(0.0);
    }
    let ln = ln_factorial(n) - ln_factorial(k) - ln_factorial(n - k);
    Ok(ln / std::f64::consts::LN_2)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundPoint {
    pub d: u64,
    pub lhs_log2: f64,
    pub margin: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundCheckResult {
    pub n: u64,
    pub t: u64,
    pub rhs_log2: f64,
    pub points: Vec<BoundPoint>,
    /// Minimum of `rhs - lhs` over the grid.
    pub margin: f64,
}

impl BoundCheckResult {
    pub fn passed(&self) -> bool {
        self.margin >= 0.0
    }

    pub fn worst(&self) -> Option<&BoundPoint> {
        self.points.iter().min_by(|a, b| a.margin.total_cmp(&b.margin))
    }
}

/// Left-hand side of the inequality in log2 for one even `d`.
pub fn lhs_log2(n: u64, t: u64, d: u64) -> Result<f64> {
    if d < 2 || d % 2 == 1 || d > n {
        return Err(contract(format!("d must be even and in 2..={n}, got {d}")));
    }
    Ok(log2_binomial(n, d)? + t as f64 * (log2_binomial(d, d / 2)? - d as f64))
}

/// Evaluates the inequality for every `d` of the grid with the round size
/// `t = round_size(n)`.
pub fn check_proposition1(n: u64, d_grid: &[u64]) -> Result<BoundCheckResult> {
    check_with_rounds(n, round_size(n as usize) as u64, d_grid)
}

/// Same as [`check_proposition1`] with an explicit `t`.
pub fn check_with_rounds(n: u64, t: u64, d_grid: &[u64]) -> Result<BoundCheckResult> {
    if n < 2 {
        return Err(contract("n must be at least 2"));
    }
    let rhs = -0.75 * t as f64;
    let points = d_grid
        .iter()
        .map(|&d| {
            let lhs = lhs_log2(n, t, d)?;
            Ok(BoundPoint { d, lhs_log2: lhs, margin: rhs - lhs })
        })
        .collect::<Result<Vec<_>>>()?;
    let margin = points.iter().map(|p| p.margin).fold(f64::INFINITY, f64::min);
    Ok(BoundCheckResult { n, t, rhs_log2: rhs, points, margin })
}

/// All even `d <= min(2048, n)` plus 64 geometrically spaced even values
/// from there up to `n`, sorted and deduplicated.
pub fn default_grid(n: u64) -> Vec<u64> {
    let mut grid: Vec<u64> = (1..=1024u64).map(|h| 2 * h).filter(|&d| d <= n).collect();
    if n >= 2 {
        // halves of d, spaced geometrically from the dense range up to n/2
        let (lo, hi) = ((n / 2).min(1024) as f64, (n / 2) as f64);
        for i in 0..64 {
            let h = (lo * (hi / lo).powf(i as f64 / 63.0)).round() as u64;
            grid.push(2 * h.clamp(1, n / 2));
        }
    }
    grid.sort_unstable();
    grid.dedup();
    grid
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TheoryModel {
    /// `2n` (binary OneMax and monotone functions).
    Linear2n,
    /// `n log2 n`, scaled by a fitted constant.
    Nlogn,
    /// `2n / log2 k` (k-ary OneMax).
    NOverLogk,
    /// `2n / log2 n` (unrestricted arity).
    StarAry,
}

impl FromStr for TheoryModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "linear_2n" => Ok(Self::Linear2n),
            "nlogn" => Ok(Self::Nlogn),
            "n_over_logk" => Ok(Self::NOverLogk),
            "star_ary" => Ok(Self::StarAry),
            other => Err(Error::Config(format!("unknown theory model {other:?}"))),
        }
    }
}

impl fmt::Display for TheoryModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(match self {
            Self::Linear2n => "linear_2n",
            Self::Nlogn => "nlogn",
            Self::NOverLogk => "n_over_logk",
            Self::StarAry => "star_ary",
        })
    }
}

/// Leading-order expected query count of `model`. `Nlogn` uses constant 1.
pub fn theory_curve(model: TheoryModel, n: usize, k: Option<usize>) -> Result<f64> {
    let nf = n as f64;
    match model {
        TheoryModel::Linear2n => Ok(2.0 * nf),
        TheoryModel::Nlogn => Ok(nf * nf.log2()),
        TheoryModel::StarAry => Ok(2.0 * nf / nf.log2()),
        TheoryModel::NOverLogk => {
            let k = k.ok_or_else(|| contract("n_over_logk needs k"))?;
            if k < 2 {
                return Err(contract("n_over_logk needs k >= 2"));
            }
            Ok(2.0 * nf / (k as f64).log2())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Exact binomial by the multiplicative formula; exact in u128 for n <= 60.
    fn binomial_exact(n: u64, k: u64) -> u128 {
        let k = k.min(n - k);
        (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
    }

    #[test]
    fn round_size_values() {
        assert_eq!(round_size(1), 1);
        assert_eq!(round_size(2), 4);
        // log2 16 = 4, log2 log2 16 = 2: (1 + 8/4) * 32/4 = 24
        assert_eq!(round_size(16), 24);
        assert_eq!(round_size(4), 12);
    }

    #[test]
    fn log2_binomial_small_values() {
        assert_eq!(log2_binomial(10, 0).unwrap(), 0.0);
        assert!((log2_binomial(4, 2).unwrap() - 6f64.log2()).abs() < 1e-12);
        assert!(log2_binomial(3, 4).is_err());
    }

    #[test]
    fn log2_binomial_matches_exact_integers() {
        for n in 0..=60u64 {
            for k in 0..=n {
                let exact = (binomial_exact(n, k) as f64).log2();
                let got = log2_binomial(n, k).unwrap();
                assert!((got - exact).abs() < 1e-6, "n={n} k={k}: {got} vs {exact}");
            }
        }
    }

    #[test]
    fn log2_binomial_two_routes_agree() {
        // summed logs of integers vs the log-factorial route
        for n in [300u64, 1000, 5000, 10_000] {
            for k in [1, 7, n / 3, n / 2, n - 1] {
                let direct: f64 = (0..k).map(|i| ((n - i) as f64).log2() - ((i + 1) as f64).log2()).sum();
                assert!((log2_binomial(n, k).unwrap() - direct).abs() < 1e-4, "n={n} k={k}");
            }
        }
    }

    #[test]
    fn symmetric_and_large() {
        let n = 1u64 << 24;
        let a = log2_binomial(n, 12345).unwrap();
        let b = log2_binomial(n, n - 12345).unwrap();
        assert!((a - b).abs() < 1e-6);
        // central binomial: log2 C(n, n/2) ~ n - 0.5 log2(pi n / 2)
        let c = log2_binomial(n, n / 2).unwrap();
        let approx = n as f64 - 0.5 * (std::f64::consts::PI * n as f64 / 2.0).log2();
        assert!((c - approx).abs() < 1e-3);
    }

    #[test]
    fn d_equal_n_is_negative() {
        let n = 64;
        let t = round_size(n as usize) as u64;
        let lhs = lhs_log2(n, t, n).unwrap();
        let expected = t as f64 * (log2_binomial(n, n / 2).unwrap() - n as f64);
        assert!((lhs - expected).abs() < 1e-9);
        assert!(lhs < -0.75 * t as f64);
    }

    #[test]
    fn odd_d_rejected() {
        assert!(check_proposition1(64, &[3]).is_err());
        assert!(check_proposition1(64, &[66]).is_err());
    }

    #[test]
    fn margin_monotone_in_t() {
        let n = 4096;
        let grid = default_grid(n);
        let mut prev = f64::NEG_INFINITY;
        for t in [10u64, 100, 500, 1000, 5000] {
            let m = check_with_rounds(n, t, &grid).unwrap().margin;
            assert!(m >= prev, "t={t}");
            prev = m;
        }
    }

    #[test]
    fn default_grid_shape() {
        let g = default_grid(1 << 20);
        assert!(g.iter().all(|d| d % 2 == 0 && *d >= 2 && *d <= 1 << 20));
        assert!(g.contains(&2) && g.contains(&2048) && g.contains(&(1 << 20)));
        assert!(g.len() > 1024 + 40);
        assert_eq!(default_grid(10), vec![2, 4, 6, 8, 10]);
    }

    #[test]
    fn large_n_passes() {
        let n = 1u64 << 20;
        let res = check_proposition1(n, &default_grid(n)).unwrap();
        assert!(res.passed(), "margin {}", res.margin);
    }

    #[test]
    fn theory_values() {
        assert_eq!(theory_curve(TheoryModel::Linear2n, 100, None).unwrap(), 200.0);
        assert_eq!(theory_curve(TheoryModel::NOverLogk, 64, Some(16)).unwrap(), 32.0);
        assert_eq!(theory_curve(TheoryModel::StarAry, 16, None).unwrap(), 8.0);
        assert!(theory_curve(TheoryModel::NOverLogk, 64, None).is_err());
    }
}
