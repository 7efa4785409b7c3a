use super::as_count;
use super::engine::{Checkpoint, Engine, PointHandle};
use crate::bounds::round_size;
use crate::error::{Error, Result};
use crate::operators::Operator;
use crate::problems::ProblemClass;

/// k-ary OneMax optimizer (`k >= 3`).
///
/// `x` and `y` start as complements. Positions where they agree are
/// optimal; the rest is cut into blocks of at most `k` positions. For each
/// block, `z` copies `y` with `ell` differing bits flipped towards `x`, so
/// `y` and `z` differ exactly on the block. [`optimize_subset`] solves the
/// block and `update` writes the solved block into `x`.
pub fn run_kary_onemax(e: &mut Engine<'_>, k: usize) -> Result<()> {
    if e.class() != ProblemClass::OneMax {
        return Err(Error::Config(format!("kary_onemax cannot optimize {}", e.class())));
    }
    if k < 3 {
        return Err(Error::Config(format!("kary_onemax needs k >= 3, got {k}")));
    }
    let n = e.n();
    let (mut x, _) = e.apply(Operator::UniformSample, &[])?;
    let (mut y, _) = e.apply(Operator::Complement, &[x])?;
    e.checkpoint(Checkpoint::BlockDone { x, y, ell: 0 });
    let blocks = n.div_ceil(k);
    for t in 0..blocks {
        let ell = k.min(n - k * t);
        let (z, _) = e.apply(Operator::FlipKWhereDifferent { ell }, &[x, y])?;
        let w = optimize_subset(e, ell, y, z)?;
        let (merged, _) = e.apply(Operator::Update, &[x, w, z])?;
        x = merged;
        y = w;
        e.checkpoint(Checkpoint::BlockDone { x, y, ell });
    }
    Ok(())
}

/// Number of crossover samples per round when optimizing a block of size
/// `ell`: `min(ell - 2, round_size(ell))`. Zero for `ell <= 2`.
pub fn subset_rounds(ell: usize) -> usize {
    if ell <= 2 {
        0
    } else {
        (ell - 2).min(round_size(ell))
    }
}

/// Optimizes the `ell` positions where the anchors `far` and `near` differ
/// and returns the handle of the solved point; outside the block it equals
/// the anchors.
///
/// `f_sigma = (f(near) + f(far) - ell) / 2` is the fitness contributed by
/// the positions outside the block, so a crossover sample `s` has
/// block-level value `f(s) - f_sigma`. Rounds of crossovers plus one
/// consistent guess repeat until the guess scores `ell + f_sigma`.
///
/// Blocks of size 1 or 2 leave no room for samples under arity `ell`; they
/// are solved with the binary flip-where-different procedure instead.
pub fn optimize_subset(e: &mut Engine<'_>, ell: usize, far: PointHandle, near: PointHandle) -> Result<PointHandle> {
    let f_sigma = (e.fitness(near) + e.fitness(far) - ell as f64) / 2.0;
    e.checkpoint(Checkpoint::SubsetStart { far, near, ell, f_sigma });
    let r = subset_rounds(ell);
    if r == 0 {
        return solve_small_block(e, ell, far, near);
    }
    let target = ell as f64 + f_sigma;
    loop {
        let mut parents = Vec::with_capacity(r + 2);
        let mut values = Vec::with_capacity(r);
        for _ in 0..r {
            let (h, f) = e.apply(Operator::RandomWhereDifferent, &[near, far])?;
            parents.push(h);
            values.push(as_count(f - f_sigma));
        }
        parents.extend([far, near]);
        let (w, f) = e.apply(Operator::ChooseConsistentSub { values }, &parents)?;
        if f == target {
            return Ok(w);
        }
    }
}

fn solve_small_block(e: &mut Engine<'_>, ell: usize, far: PointHandle, near: PointHandle) -> Result<PointHandle> {
    let (mut a, mut b) = (far, near);
    let mut last = near;
    let mut accepted = 0;
    while accepted < ell {
        if e.coin() {
            let (cand, f) = e.apply(Operator::FlipOneWhereDifferent, &[a, b])?;
            if f > e.fitness(a) {
                a = cand;
                last = cand;
                accepted += 1;
            }
        } else {
            let (cand, f) = e.apply(Operator::FlipOneWhereDifferent, &[b, a])?;
            if f > e.fitness(b) {
                b = cand;
                last = cand;
                accepted += 1;
            }
        }
    }
    Ok(last)
}
