//! Bit-level primitives: packed bitstrings, permutations of positions and
//! Hamming automorphisms.
//!
//! Positions are 0-based in the API. The ASCII form writes position 0
//! leftmost, so `"100"` has a single one at position 0.

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};

use crate::error::{contract, ensure_same_len, Error, Result};

const WORD: usize = 64;

/// Fixed-length string of bits packed into 64-bit words.
///
/// Bits past `len` in the last word are always zero, so word-wise
/// comparisons and popcounts need no masking.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BitString {
    len: usize,
    words: Vec<u64>,
}

fn words_for(len: usize) -> usize {
    len.div_ceil(WORD)
}

fn tail_mask(len: usize) -> u64 {
    match len % WORD {
        0 => u64::MAX,
        r => (1u64 << r) - 1,
    }
}

impl BitString {
    pub fn zeros(len: usize) -> Self {
        Self { len, words: vec![0; words_for(len)] }
    }

    pub fn ones(len: usize) -> Self {
        Self::zeros(len).complement()
    }

    pub fn from_fn(len: usize, mut f: impl FnMut(usize) -> bool) -> Self {
        let mut out = Self::zeros(len);
        for i in 0..len {
            if f(i) {
                out.words[i / WORD] |= 1 << (i % WORD);
            }
        }
        out
    }

    pub fn from_bits(bits: &[bool]) -> Self {
        Self::from_fn(bits.len(), |i| bits[i])
    }

    /// Uniformly random string: every bit is an independent fair coin.
    pub fn random<R: RngCore + ?Sized>(len: usize, rng: &mut R) -> Self {
        let mut words: Vec<u64> = (0..words_for(len)).map(|_| rng.next_u64()).collect();
        if let Some(last) = words.last_mut() {
            *last &= tail_mask(len);
        }
        Self { len, words }
    }

    /// Builds a string of length `len` from the low bits of `value`, with
    /// position 0 taken from the most significant of those bits. This makes
    /// integer order coincide with lexicographic string order.
    pub fn from_index(len: usize, value: u64) -> Self {
        debug_assert!(len <= 64);
        Self::from_fn(len, |i| (value >> (len - 1 - i)) & 1 == 1)
    }

    /// Inverse of [`BitString::from_index`]; requires `len <= 64`.
    pub fn to_index(&self) -> u64 {
        debug_assert!(self.len <= 64);
        (0..self.len).fold(0u64, |acc, i| (acc << 1) | self.get(i) as u64)
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        assert!(i < self.len, "bit index {i} out of range for length {}", self.len);
        (self.words[i / WORD] >> (i % WORD)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, value: bool) {
        assert!(i < self.len, "bit index {i} out of range for length {}", self.len);
        let bit = 1u64 << (i % WORD);
        if value {
            self.words[i / WORD] |= bit;
        } else {
            self.words[i / WORD] &= !bit;
        }
    }

    #[inline]
    pub fn flip(&mut self, i: usize) {
        assert!(i < self.len, "bit index {i} out of range for length {}", self.len);
        self.words[i / WORD] ^= 1 << (i % WORD);
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn complement(&self) -> Self {
        let mut words: Vec<u64> = self.words.iter().map(|w| !w).collect();
        if let Some(last) = words.last_mut() {
            *last &= tail_mask(self.len);
        }
        Self { len: self.len, words }
    }

    pub fn xor(&self, other: &Self) -> Result<Self> {
        ensure_same_len(self.len, other.len, "xor")?;
        Ok(self.zip_words(other, |a, b| a ^ b))
    }

    pub fn and(&self, other: &Self) -> Result<Self> {
        ensure_same_len(self.len, other.len, "and")?;
        Ok(self.zip_words(other, |a, b| a & b))
    }

    fn zip_words(&self, other: &Self, op: impl Fn(u64, u64) -> u64) -> Self {
        Self { len: self.len, words: self.words.iter().zip(&other.words).map(|(&a, &b)| op(a, b)).collect() }
    }

    /// Number of positions where `self` and `other` differ, in O(n/64).
    pub fn hamming_distance(&self, other: &Self) -> Result<usize> {
        ensure_same_len(self.len, other.len, "hamming_distance")?;
        Ok(self.words.iter().zip(&other.words).map(|(a, b)| (a ^ b).count_ones() as usize).sum())
    }

    /// Positions where `self` and `other` differ, ascending.
    pub fn differing_positions(&self, other: &Self) -> Result<Vec<usize>> {
        ensure_same_len(self.len, other.len, "differing_positions")?;
        Ok(self.xor(other)?.ones_positions().collect())
    }

    /// Ascending positions holding a one.
    pub fn ones_positions(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut rest = w;
            std::iter::from_fn(move || {
                if rest == 0 {
                    return None;
                }
                let tz = rest.trailing_zeros() as usize;
                rest &= rest - 1;
                Some(wi * WORD + tz)
            })
        })
    }

    /// Position of the `rank`-th (0-based) one, scanning whole words first.
    pub fn nth_one(&self, mut rank: usize) -> Option<usize> {
        for (wi, &w) in self.words.iter().enumerate() {
            let c = w.count_ones() as usize;
            if rank < c {
                let mut rest = w;
                for _ in 0..rank {
                    rest &= rest - 1;
                }
                return Some(wi * WORD + rest.trailing_zeros() as usize);
            }
            rank -= c;
        }
        None
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len).map(|i| self.get(i))
    }

    /// Packs the bits at `positions` into an integer, first position most
    /// significant. Used to project points onto a block of at most 64 bits.
    pub fn project(&self, positions: &[usize]) -> u64 {
        debug_assert!(positions.len() <= 64);
        positions.iter().fold(0u64, |acc, &p| (acc << 1) | self.get(p) as u64)
    }

    /// Overwrites the bits at `positions` with the packed `value` (same
    /// layout as [`BitString::project`]).
    pub fn embed(&mut self, positions: &[usize], value: u64) {
        let k = positions.len();
        for (j, &p) in positions.iter().enumerate() {
            self.set(p, (value >> (k - 1 - j)) & 1 == 1);
        }
    }
}

impl fmt::Display for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s: String = self.iter().map(|b| if b { '1' } else { '0' }).collect();
        f.write_str(&s)
    }
}

impl fmt::Debug for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitString({self})")
    }
}

impl FromStr for BitString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bits = s
            .chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(contract(format!("invalid bit character {other:?}"))),
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::from_bits(&bits))
    }
}

impl Serialize for BitString {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for BitString {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Bijection on positions `0..n`. Applying it to `x` yields the string
/// whose bit `i` is `x[mapping[i]]`.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct Permutation {
    mapping: Vec<usize>,
}

impl Permutation {
    pub fn new(mapping: Vec<usize>) -> Result<Self> {
        let n = mapping.len();
        let mut seen = vec![false; n];
        for &m in &mapping {
            if m >= n || seen[m] {
                return Err(contract(format!("{mapping:?} is not a permutation of 0..{n}")));
            }
            seen[m] = true;
        }
        Ok(Self { mapping })
    }

    pub fn identity(n: usize) -> Self {
        Self { mapping: (0..n).collect() }
    }

    pub fn random<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        let mut mapping: Vec<usize> = (0..n).collect();
        mapping.shuffle(rng);
        Self { mapping }
    }

    pub fn len(&self) -> usize {
        self.mapping.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mapping.is_empty()
    }

    /// Image of position `i`.
    #[inline]
    pub fn at(&self, i: usize) -> usize {
        self.mapping[i]
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.mapping
    }

    pub fn inverse(&self) -> Self {
        let mut inv = vec![0; self.mapping.len()];
        for (i, &m) in self.mapping.iter().enumerate() {
            inv[m] = i;
        }
        Self { mapping: inv }
    }

    pub fn apply(&self, x: &BitString) -> Result<BitString> {
        ensure_same_len(self.mapping.len(), x.len(), "apply_permutation")?;
        Ok(BitString::from_fn(x.len(), |i| x.get(self.mapping[i])))
    }
}

impl TryFrom<Vec<usize>> for Permutation {
    type Error = Error;

    fn try_from(mapping: Vec<usize>) -> Result<Self> {
        Self::new(mapping)
    }
}

impl From<Permutation> for Vec<usize> {
    fn from(p: Permutation) -> Self {
        p.mapping
    }
}

impl fmt::Debug for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Permutation{:?}", self.mapping)
    }
}

/// Distance-preserving map `x -> perm(x) xor mask`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HammingAutomorphism {
    pub mask: BitString,
    pub perm: Permutation,
}

impl HammingAutomorphism {
    pub fn new(mask: BitString, perm: Permutation) -> Result<Self> {
        ensure_same_len(mask.len(), perm.len(), "HammingAutomorphism")?;
        Ok(Self { mask, perm })
    }

    pub fn identity(n: usize) -> Self {
        Self { mask: BitString::zeros(n), perm: Permutation::identity(n) }
    }

    pub fn random<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        Self { mask: BitString::random(n, rng), perm: Permutation::random(n, rng) }
    }

    pub fn len(&self) -> usize {
        self.mask.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mask.is_empty()
    }

    /// Permute first, then xor with the mask.
    pub fn apply(&self, x: &BitString) -> Result<BitString> {
        self.perm.apply(x)?.xor(&self.mask)
    }

    pub fn inverse(&self) -> Self {
        let inv = self.perm.inverse();
        let mask = inv.apply(&self.mask).expect("mask and permutation share a length");
        Self { mask, perm: inv }
    }
}
