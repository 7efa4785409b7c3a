use super::engine::{Checkpoint, Engine};
use crate::error::{Error, Result};
use crate::operators::Operator;
use crate::problems::ProblemClass;

/// Binary OneMax optimizer; also solves monotone instances.
///
/// Keeps `x` and its complement `y`. Positions where the two agree are
/// already optimal, so every step flips one differing bit in either `x` or
/// `y` (fair coin) and keeps the flip on strict improvement. Each step fixes
/// a bit with probability 1/2, hence about `2n` queries in total.
///
/// On OneMax the loop stops at `f(x) = n`. Monotone instances have no known
/// optimal value, so there the loop stops after `n` accepted flips, which is
/// exactly when `x` and `y` coincide.
pub fn run_binary_onemax(e: &mut Engine<'_>) -> Result<()> {
    let n = e.n();
    let class = e.class();
    if !matches!(class, ProblemClass::OneMax | ProblemClass::Monotone) {
        return Err(Error::Config(format!("binary_onemax cannot optimize {class}")));
    }
    let (mut x, _) = e.apply(Operator::UniformSample, &[])?;
    let (mut y, _) = e.apply(Operator::Complement, &[x])?;
    let mut accepted = 0usize;
    loop {
        e.checkpoint(Checkpoint::BinaryStep { x, y });
        if e.coin() {
            let (cand, f) = e.apply(Operator::FlipOneWhereDifferent, &[x, y])?;
            if f > e.fitness(x) {
                x = cand;
                accepted += 1;
            }
        } else {
            let (cand, f) = e.apply(Operator::FlipOneWhereDifferent, &[y, x])?;
            if f > e.fitness(y) {
                y = cand;
                accepted += 1;
            }
        }
        let done = match class {
            ProblemClass::OneMax => e.fitness(x) == n as f64,
            _ => accepted == n,
        };
        if done {
            e.checkpoint(Checkpoint::BinaryStep { x, y });
            return Ok(());
        }
    }
}
