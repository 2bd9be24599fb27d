//! Sequence-level probability law and inverse-CDF generation.
//!
//! Each length-n sequence owns a half-open subinterval of [0, 1): intervals
//! are laid out contiguously in lexicographic sequence order and each has
//! length equal to the sequence's probability. Generation inverts that map:
//! a single uniform draw u descends the K-nary tree level by level, keeping
//! the subinterval that contains u. At level 1 the unit interval is split by
//! the base probabilities; every later level splits the current interval in
//! proportion to the conditional probabilities given the first entry, which
//! is all the dependence structure there is.
//!
//! Conventions: category labels and lexicographic indices are 1-based,
//! intervals are half-open `[lo, hi)`, u = 0 maps to the all-ones sequence,
//! and a draw that lands exactly on a partition point belongs to the
//! interval on its right.

use num_rational::BigRational;
use serde::Serialize;

use crate::distribution::CountVector;
use crate::error::{Error, Result};
use crate::params::ModelParams;
use crate::rng::SplitMix64;

/// An ordered outcome sequence; entries are 1-based category labels.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
#[serde(transparent)]
pub struct CategorySequence {
    entries: Vec<usize>,
}

impl CategorySequence {
    pub fn new(entries: Vec<usize>) -> Self {
        Self { entries }
    }

    pub fn entries(&self) -> &[usize] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

impl From<Vec<usize>> for CategorySequence {
    fn from(entries: Vec<usize>) -> Self {
        Self::new(entries)
    }
}

/// The probability interval owned by one sequence.
#[derive(Debug, Clone, PartialEq)]
pub struct SequenceInterval {
    lex_index: u128,
    lo: BigRational,
    hi: BigRational,
}

impl SequenceInterval {
    /// 1-based position of the sequence in lexicographic order.
    pub fn lex_index(&self) -> u128 {
        self.lex_index
    }

    pub fn lo(&self) -> &BigRational {
        &self.lo
    }

    pub fn hi(&self) -> &BigRational {
        &self.hi
    }

    /// Interval length; equals the sequence's probability.
    pub fn width(&self) -> BigRational {
        &self.hi - &self.lo
    }
}

fn validate_sequence(seq: &CategorySequence, categories: usize) -> Result<()> {
    if seq.is_empty() {
        return Err(Error::OutOfRange {
            what: "sequence length n",
            value: 0.0,
            bounds: "[1, inf)",
        });
    }
    for (pos, &entry) in seq.entries().iter().enumerate() {
        if entry == 0 || entry > categories {
            return Err(Error::InvalidSequence {
                entry,
                position: pos + 1,
                categories,
            });
        }
    }
    Ok(())
}

/// P(sequence) = p_{e_1} * prod over later entries of the conditional
/// probability given e_1.
pub fn sequence_probability(model: &ModelParams, seq: &CategorySequence) -> Result<f64> {
    validate_sequence(seq, model.num_categories())?;
    let first = seq.entries()[0];
    let cond = model.conditional(first)?;
    let mut prob = model.probs()[first - 1];
    for &e in &seq.entries()[1..] {
        prob *= cond.probs()[e - 1];
    }
    Ok(prob)
}

/// Exact-rational version of [`sequence_probability`].
pub fn sequence_probability_exact(
    model: &ModelParams,
    seq: &CategorySequence,
) -> Result<BigRational> {
    validate_sequence(seq, model.num_categories())?;
    let first = seq.entries()[0];
    let cond = model.conditional(first)?;
    let mut prob = model.probs_exact()[first - 1].clone();
    for &e in &seq.entries()[1..] {
        prob *= &cond.probs_exact()[e - 1];
    }
    Ok(prob)
}

/// 1-based lexicographic rank: `1 + sum_j (e_j - 1) * K^(n-j)`.
pub fn lex_index(seq: &CategorySequence, categories: usize) -> Result<u128> {
    validate_sequence(seq, categories)?;
    let k = categories as u128;
    let mut acc: u128 = 0;
    for &e in seq.entries() {
        acc = acc
            .checked_mul(k)
            .and_then(|v| v.checked_add((e - 1) as u128))
            .ok_or(Error::SequenceTooLong {
                n: seq.len(),
                categories,
            })?;
    }
    Ok(acc + 1)
}

/// Inverse of [`lex_index`]: the length-n sequence at the given rank.
pub fn lex_sequence(index: u128, categories: usize, n: usize) -> Result<CategorySequence> {
    if n == 0 {
        return Err(Error::OutOfRange {
            what: "sequence length n",
            value: 0.0,
            bounds: "[1, inf)",
        });
    }
    let k = categories as u128;
    let mut space: u128 = 1;
    for _ in 0..n {
        space = space
            .checked_mul(k)
            .ok_or(Error::SequenceTooLong { n, categories })?;
    }
    if index == 0 || index > space {
        return Err(Error::OutOfRange {
            what: "lexicographic index",
            value: index as f64,
            bounds: "1..=K^n",
        });
    }
    let mut rem = index - 1;
    let mut entries = vec![1usize; n];
    for slot in entries.iter_mut().rev() {
        *slot = (rem % k) as usize + 1;
        rem /= k;
    }
    Ok(CategorySequence::new(entries))
}

/// Exact probability interval `[lo, hi)` of a sequence, built by rational
/// tree descent; `hi - lo` equals the sequence probability.
pub fn sequence_interval(model: &ModelParams, seq: &CategorySequence) -> Result<SequenceInterval> {
    let k = model.num_categories();
    validate_sequence(seq, k)?;
    let lex = lex_index(seq, k)?;
    let first = seq.entries()[0];
    let p = model.probs_exact();
    let mut lo: BigRational = p[..first - 1].iter().sum();
    let mut width = p[first - 1].clone();
    let cond = model.conditional(first)?;
    for &e in &seq.entries()[1..] {
        let before: BigRational = cond.probs_exact()[..e - 1].iter().sum();
        lo += &width * before;
        width *= &cond.probs_exact()[e - 1];
    }
    let hi = &lo + &width;
    Ok(SequenceInterval {
        lex_index: lex,
        lo,
        hi,
    })
}

/// Finds the partition segment containing u.
///
/// `prefix` holds the cumulative level probabilities; segment boundaries are
/// `lo + width * prefix[c]`. Returns the chosen index with its endpoints.
/// A draw that rounding pushed past the last boundary lands in the last
/// segment of positive width.
fn locate(u: f64, lo: f64, width: f64, prefix: &[f64]) -> (usize, f64, f64) {
    let k = prefix.len();
    let boundary = |c: usize| lo + width * prefix[c];
    let chosen = prefix.partition_point(|&pf| lo + width * pf <= u);
    if chosen < k {
        let seg_lo = if chosen == 0 {
            lo
        } else {
            boundary(chosen - 1)
        };
        return (chosen, seg_lo, boundary(chosen));
    }
    let mut c = k - 1;
    let mut hi = boundary(c);
    while c > 0 {
        let seg_lo = boundary(c - 1);
        if hi > seg_lo {
            return (c, seg_lo, hi);
        }
        hi = seg_lo;
        c -= 1;
    }
    (0, lo, hi)
}

fn prefix_sums(probs: &[f64]) -> Vec<f64> {
    let mut acc = 0.0;
    probs
        .iter()
        .map(|&p| {
            acc += p;
            acc
        })
        .collect()
}

fn descend(model: &ModelParams, n: usize, u: f64) -> Result<(Vec<usize>, Vec<f64>)> {
    if n == 0 {
        return Err(Error::OutOfRange {
            what: "sequence length n",
            value: 0.0,
            bounds: "[1, inf)",
        });
    }
    if !(0.0..1.0).contains(&u) {
        return Err(Error::UOutOfRange { u });
    }
    let base_prefix = prefix_sums(model.probs());
    let (first, mut lo, mut hi) = locate(u, 0.0, 1.0, &base_prefix);
    let mut entries = Vec::with_capacity(n);
    let mut widths = Vec::with_capacity(n);
    entries.push(first + 1);
    widths.push(hi - lo);

    if n > 1 {
        let cond_prefix = prefix_sums(&model.conditional_floats(first));
        for _ in 1..n {
            let (c, seg_lo, seg_hi) = locate(u, lo, hi - lo, &cond_prefix);
            entries.push(c + 1);
            lo = seg_lo;
            hi = seg_hi;
            widths.push(hi - lo);
        }
    }
    Ok((entries, widths))
}

/// Inverse-CDF generation: the unique sequence whose interval contains u.
pub fn sample_inverse(model: &ModelParams, n: usize, u: f64) -> Result<CategorySequence> {
    let (entries, _) = descend(model, n, u)?;
    Ok(CategorySequence::new(entries))
}

/// [`sample_inverse`] plus the search-interval width after each level; the
/// width at level r equals the probability of the prefix chosen so far.
pub fn sample_inverse_traced(
    model: &ModelParams,
    n: usize,
    u: f64,
) -> Result<(CategorySequence, Vec<f64>)> {
    let (entries, widths) = descend(model, n, u)?;
    Ok((CategorySequence::new(entries), widths))
}

/// Draws `count` sequences from one seeded uniform stream; element j uses
/// the j-th draw of the stream.
pub fn sample_many(
    model: &ModelParams,
    n: usize,
    count: usize,
    seed: u64,
) -> Result<Vec<CategorySequence>> {
    let mut rng = SplitMix64::new(seed);
    (0..count)
        .map(|_| sample_inverse(model, n, rng.next_unit()))
        .collect()
}

fn pick(probs: &[f64], u: f64) -> usize {
    let mut acc = 0.0;
    for (c, &p) in probs.iter().enumerate() {
        acc += p;
        if u < acc {
            return c;
        }
    }
    // rounding gap: last category with positive probability
    probs
        .iter()
        .rposition(|&p| p > 0.0)
        .unwrap_or(probs.len() - 1)
}

/// Alternate generation path: draw the first entry from the base
/// probabilities, then each later entry from the conditional distribution,
/// one uniform per position. Distributionally equivalent to
/// [`sample_inverse`]; the single-uniform descent remains the canonical path.
pub fn sample_sequential(
    model: &ModelParams,
    n: usize,
    count: usize,
    seed: u64,
) -> Result<Vec<CategorySequence>> {
    if n == 0 {
        return Err(Error::OutOfRange {
            what: "sequence length n",
            value: 0.0,
            bounds: "[1, inf)",
        });
    }
    let mut rng = SplitMix64::new(seed);
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        let first = pick(model.probs(), rng.next_unit());
        let cond = model.conditional_floats(first);
        let mut entries = Vec::with_capacity(n);
        entries.push(first + 1);
        for _ in 1..n {
            entries.push(pick(&cond, rng.next_unit()) + 1);
        }
        out.push(CategorySequence::new(entries));
    }
    Ok(out)
}

/// Histogram of a sequence's entries.
pub fn counts(seq: &CategorySequence, categories: usize) -> Result<CountVector> {
    validate_sequence(seq, categories)?;
    let mut hist = vec![0usize; categories];
    for &e in seq.entries() {
        hist[e - 1] += 1;
    }
    Ok(CountVector::new(hist))
}
