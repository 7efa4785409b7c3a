use super::engine::{Checkpoint, Engine};
use crate::error::{Error, Result};
use crate::operators::Operator;
use crate::problems::ProblemClass;

/// Binary LeadingOnes optimizer built on critical pairs.
///
/// A pair `(x, y)` is critical when `f(x) >= f(y)` and the two agree on
/// exactly `f(y)` positions. Starting from `x` and its complement, every
/// outer iteration raises the pair's value by at least one: `y'` starts as `x`, and
/// uniform crossovers between `y` and `y'` that still beat `f(y)` shrink
/// the set where `y` and `y'` differ until only the critical bit is left.
/// `switchIfDistanceOne` then moves `y` onto `y'`.
///
/// Crossover children are compared against `f(y)`, not `f(y')`. Both
/// accept exactly the children that keep the critical bit of `y` flipped,
/// since any such child scores above `f(y)`; comparing against `f(y')`
/// would additionally reject children that lose later agreements of `y'`.
/// Every `switchIfDistanceOne` result is queried, including unchanged ones.
pub fn run_binary_leadingones(e: &mut Engine<'_>) -> Result<()> {
    let class = e.class();
    if class != ProblemClass::LeadingOnes {
        return Err(Error::Config(format!("binary_leadingones cannot optimize {class}")));
    }
    let (mut x, _) = e.apply(Operator::UniformSample, &[])?;
    let (mut y, _) = e.apply(Operator::Complement, &[x])?;
    e.checkpoint(Checkpoint::CriticalPair { x, y, inner: 0 });
    loop {
        if e.fitness(y) > e.fitness(x) {
            std::mem::swap(&mut x, &mut y);
        }
        let mut y_prime = x;
        let mut inner = 0u64;
        loop {
            inner += 1;
            let (child, f) = e.apply(Operator::RandomWhereDifferent, &[y, y_prime])?;
            if f > e.fitness(y) {
                y_prime = child;
            }
            let (switched, _) = e.apply(Operator::SwitchIfDistanceOne, &[y, y_prime])?;
            y = switched;
            if e.fitness(y) == e.fitness(y_prime) {
                break;
            }
        }
        e.checkpoint(Checkpoint::CriticalPair { x, y, inner });
        if e.fitness(x) == e.fitness(y) {
            return Ok(());
        }
    }
}
