//! Uniform sampling of OneMax hypotheses consistent with observed values.
//!
//! A hypothesis `z` is consistent with a query set when `om_z(x_i) = u_i`
//! for every recorded point `x_i` with value `u_i`. Hypotheses are
//! enumerated in lexicographic order (position 0 most significant), and
//! sampling draws a single uniform index into that order, so the sampler is
//! exactly uniform.

use rand::Rng;

use crate::bitcore::BitString;
use crate::error::{contract, ensure_same_len, Error, Result};

/// Largest dimension for which the consistent set is enumerated.
pub const ENUMERATION_LIMIT: usize = 24;

#[derive(Clone, Debug, PartialEq)]
pub struct ConsistencyQuery {
    pub points: Vec<BitString>,
    pub values: Vec<u32>,
    pub dim: usize,
}

impl ConsistencyQuery {
    pub fn new(dim: usize, points: Vec<BitString>, values: Vec<u32>) -> Result<Self> {
        let q = Self { points, values, dim };
        q.validate()?;
        Ok(q)
    }

    pub fn empty(dim: usize) -> Self {
        Self { points: Vec::new(), values: Vec::new(), dim }
    }

    fn validate(&self) -> Result<()> {
        ensure_same_len(self.points.len(), self.values.len(), "consistency query points/values")?;
        for p in &self.points {
            ensure_same_len(p.len(), self.dim, "consistency query point")?;
        }
        if let Some(&u) = self.values.iter().find(|&&u| u as usize > self.dim) {
            return Err(contract(format!("value {u} exceeds dimension {}", self.dim)));
        }
        if self.dim > ENUMERATION_LIMIT {
            return Err(Error::ExactEnumerationUnavailable { dim: self.dim, limit: ENUMERATION_LIMIT });
        }
        Ok(())
    }

    fn packed(&self) -> Packed {
        Packed {
            dim: self.dim,
            points: self.points.iter().map(BitString::to_index).collect(),
            values: self.values.clone(),
        }
    }
}

/// Points packed into integers with the same layout as hypothesis indices.
struct Packed {
    dim: usize,
    points: Vec<u64>,
    values: Vec<u32>,
}

impl Packed {
    #[inline]
    fn accepts(&self, candidate: u64) -> bool {
        let dim = self.dim as u32;
        self.points.iter().zip(&self.values).all(|(&p, &u)| dim - (candidate ^ p).count_ones() == u)
    }

    fn candidates(&self) -> impl Iterator<Item = u64> + '_ {
        (0..1u64 << self.dim).filter(move |&c| self.accepts(c))
    }

    fn count(&self) -> u64 {
        self.candidates().count() as u64
    }

    /// Index of a uniformly drawn consistent hypothesis, or of a uniformly
    /// drawn string when none is consistent.
    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        let total = 1u64 << self.dim;
        if self.points.is_empty() {
            return rng.random_range(0..total);
        }
        match self.count() {
            0 => rng.random_range(0..total),
            size => {
                let rank = rng.random_range(0..size);
                self.candidates().nth(rank as usize).expect("rank below count")
            }
        }
    }
}

/// All hypotheses consistent with `q`, in lexicographic order.
pub fn consistent_set(q: &ConsistencyQuery) -> Result<Vec<BitString>> {
    q.validate()?;
    let packed = q.packed();
    Ok(packed.candidates().map(|c| BitString::from_index(q.dim, c)).collect())
}

/// Uniform draw from [`consistent_set`], or from all of `{0,1}^dim` when the
/// set is empty.
pub fn choose_consistent<R: Rng + ?Sized>(q: &ConsistencyQuery, rng: &mut R) -> Result<BitString> {
    q.validate()?;
    Ok(BitString::from_index(q.dim, q.packed().sample(rng)))
}

/// Block-restricted variant used by the k-ary optimizer.
///
/// The two anchors must differ exactly on `block`; every history point must
/// agree with the anchors outside it. The history values are block-level
/// agreement counts (the caller subtracts the suffix contribution). The
/// result copies the anchors outside `block` and holds a uniformly drawn
/// consistent block assignment inside it.
pub fn choose_consistent_sub<R: Rng + ?Sized>(
    block: &[usize],
    history: &[(BitString, u32)],
    anchors: (&BitString, &BitString),
    rng: &mut R,
) -> Result<BitString> {
    let q = sub_query(block, history, anchors)?;
    let value = q.packed().sample(rng);
    let mut out = anchors.1.clone();
    out.embed(&sorted_block(block), value);
    Ok(out)
}

fn sorted_block(block: &[usize]) -> Vec<usize> {
    let mut b = block.to_vec();
    b.sort_unstable();
    b.dedup();
    b
}

/// Validates the block-restricted preconditions and projects the history
/// onto the block.
pub(crate) fn sub_query(
    block: &[usize],
    history: &[(BitString, u32)],
    anchors: (&BitString, &BitString),
) -> Result<ConsistencyQuery> {
    let (far, near) = anchors;
    let block = sorted_block(block);
    if block.len() > ENUMERATION_LIMIT {
        return Err(Error::ExactEnumerationUnavailable { dim: block.len(), limit: ENUMERATION_LIMIT });
    }
    if far.differing_positions(near)? != block {
        return Err(contract("anchors must differ exactly on the block"));
    }
    let outside = BitString::from_fn(near.len(), |i| block.binary_search(&i).is_err());
    let mut points = Vec::with_capacity(history.len());
    let mut values = Vec::with_capacity(history.len());
    for (p, u) in history {
        if p.xor(near)?.and(&outside)?.count_ones() != 0 {
            return Err(contract("history point differs from the anchors outside the block"));
        }
        points.push(BitString::from_index(block.len(), p.project(&block)));
        values.push(*u);
    }
    ConsistencyQuery::new(block.len(), points, values)
}
