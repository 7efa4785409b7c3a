use super::as_count;
use super::engine::{Checkpoint, Engine};
use crate::bounds::round_size;
use crate::error::Result;
use crate::operators::Operator;

/// Unrestricted-arity OneMax optimizer.
///
/// Each round queries `t = round_size(n)` uniform samples and then one
/// hypothesis drawn uniformly from all targets consistent with their
/// values. Rounds repeat until the hypothesis is the optimum.
pub fn run_star_ary_onemax(e: &mut Engine<'_>) -> Result<()> {
    let n = e.n();
    let t = round_size(n);
    let mut round = 0u64;
    loop {
        round += 1;
        let mut parents = Vec::with_capacity(t);
        let mut values = Vec::with_capacity(t);
        for _ in 0..t {
            let (h, f) = e.apply(Operator::UniformSample, &[])?;
            parents.push(h);
            values.push(as_count(f));
        }
        let (_, f) = e.apply(Operator::ChooseConsistent { values }, &parents)?;
        let solved = f == n as f64;
        e.checkpoint(Checkpoint::StarRound { round, solved });
        if solved {
            return Ok(());
        }
    }
}
