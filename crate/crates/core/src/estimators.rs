//! Mean values and shifted correlation averages of the sign function,
//! exact in integer counts, computed over fixed-size segments.
//!
//! Ranges are cut into segments that sieve independently (parallel across
//! the ambient rayon pool) and merge in index order, so every result is
//! identical for any worker count and any segment length.

use num::bigint::BigInt;
use num::rational::BigRational;
use num::ToPrimitive;
use rayon::prelude::*;
use serde::Serialize;

use crate::coprime_set::{CoprimeSet, Decomposition, Variant};
use crate::error::{Error, Result};
use crate::semigroup;
use crate::sieve::{composite_hit_range, parity_range_raw, BitPlane, DEFAULT_SEGMENT_LEN};

/// Execution knobs that must not change any result.
#[derive(Clone, Copy, Debug)]
pub struct EstimatorOptions {
    pub segment_len: usize,
}

impl Default for EstimatorOptions {
    fn default() -> Self {
        EstimatorOptions {
            segment_len: DEFAULT_SEGMENT_LEN,
        }
    }
}

impl EstimatorOptions {
    pub fn with_segment_len(segment_len: usize) -> Self {
        EstimatorOptions { segment_len }
    }

    /// Segment length rounded up to a whole number of 64-bit words so
    /// segments own disjoint word ranges of a shared bit plane.
    fn effective_segment_len(&self) -> usize {
        self.segment_len.max(64).div_ceil(64) * 64
    }
}

/// Arity, coefficients and shifts of a correlation average. For a single
/// factor the shift may be zero (the plain mean); for two or more factors
/// the cross conditions `a_i h_j != a_j h_i` must all hold.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CorrelationSpec {
    coeffs: Vec<u64>,
    shifts: Vec<u64>,
}

impl CorrelationSpec {
    pub fn new(coeffs: Vec<u64>, shifts: Vec<u64>) -> Result<CorrelationSpec> {
        if coeffs.is_empty() || coeffs.len() != shifts.len() {
            return Err(Error::BadParams(
                "coefficients and shifts must be non-empty lists of equal length".into(),
            ));
        }
        if coeffs.contains(&0) {
            return Err(Error::BadParams("coefficients must be positive".into()));
        }
        for i in 0..coeffs.len() {
            for j in i + 1..coeffs.len() {
                let lhs = coeffs[i] as u128 * shifts[j] as u128;
                let rhs = coeffs[j] as u128 * shifts[i] as u128;
                if lhs == rhs {
                    return Err(Error::DegenerateSpec { i, j });
                }
            }
        }
        Ok(CorrelationSpec { coeffs, shifts })
    }

    /// The plain mean: a single factor with coefficient 1 and shift 0.
    pub fn mean() -> CorrelationSpec {
        CorrelationSpec {
            coeffs: vec![1],
            shifts: vec![0],
        }
    }

    pub fn k(&self) -> usize {
        self.coeffs.len()
    }

    pub fn coeffs(&self) -> &[u64] {
        &self.coeffs
    }

    pub fn shifts(&self) -> &[u64] {
        &self.shifts
    }

    /// Largest sieve position touched when averaging up to `x`.
    pub fn required_bound(&self, x: u64) -> Result<u64> {
        let mut max = 0u64;
        for (&a, &h) in self.coeffs.iter().zip(&self.shifts) {
            let pos = a
                .checked_mul(x)
                .and_then(|ax| ax.checked_add(h))
                .ok_or(Error::Overflow {
                    context: "correlation position",
                })?;
            max = max.max(pos);
        }
        Ok(max)
    }
}

/// One measured point: the exact signed count and its normalization by `x`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Estimate {
    pub x: u64,
    pub count: i64,
    pub value: f64,
}

impl Estimate {
    fn from_count(x: u64, count: i64) -> Estimate {
        Estimate {
            x,
            count,
            value: count as f64 / x as f64,
        }
    }
}

/// A sweep of estimates over an ascending grid.
#[derive(Clone, Debug, Serialize)]
pub struct ConvergenceReport {
    pub set: crate::coprime_set::SetDescriptor,
    pub spec: CorrelationSpec,
    pub entries: Vec<Estimate>,
}

fn check_x(set: &CoprimeSet, x: u64) -> Result<()> {
    if x < 1 {
        return Err(Error::BadParams("x must be at least 1".into()));
    }
    if x > set.bound() {
        return Err(Error::SetBoundExceeded {
            hi: x,
            bound: set.bound(),
        });
    }
    Ok(())
}

/// Exact signed sum of the sign over `n <= x`, normalized by `x`.
/// Segment-parallel; never materializes more than one segment per worker.
pub fn mean(set: &CoprimeSet, x: u64, opts: &EstimatorOptions) -> Result<Estimate> {
    check_x(set, x)?;
    let seg = opts.effective_segment_len() as u64;
    let n_segments = x.div_ceil(seg);
    let count: i64 = (0..n_segments)
        .into_par_iter()
        .map(|s| {
            let lo = 1 + s * seg;
            let hi = (lo + seg - 1).min(x);
            let plane = parity_range_raw(set.generators(), set.variant(), lo, hi);
            plane.signed_sum_prefix((hi - lo + 1) as usize)
        })
        .sum();
    Ok(Estimate::from_count(x, count))
}

/// Sign parity over `[1, hi]` assembled segment-parallel into one plane.
/// Bit `n - 1` carries the parity of `n`.
pub fn lambda_bits(set: &CoprimeSet, hi: u64, opts: &EstimatorOptions) -> Result<BitPlane> {
    check_x(set, hi)?;
    let seg = opts.effective_segment_len();
    let len = hi as usize;
    let mut words = vec![0u64; len.div_ceil(64)];
    let words_per_seg = seg / 64;
    words
        .par_chunks_mut(words_per_seg)
        .enumerate()
        .for_each(|(s, chunk)| {
            let lo = 1 + (s * seg) as u64;
            let seg_hi = (lo + seg as u64 - 1).min(hi);
            let plane = parity_range_raw(set.generators(), set.variant(), lo, seg_hi);
            chunk[..plane.words().len()].copy_from_slice(plane.words());
        });
    Ok(BitPlane::from_words(len, words))
}

fn product_sign_count(bits: &BitPlane, spec: &CorrelationSpec, n_lo: u64, n_hi: u64) -> i64 {
    let mut count = 0i64;
    for n in n_lo..=n_hi {
        let mut parity = false;
        for (&a, &h) in spec.coeffs.iter().zip(&spec.shifts) {
            parity ^= bits.get((a * n + h - 1) as usize);
        }
        count += if parity { -1 } else { 1 };
    }
    count
}

/// Exact signed sum over `n <= x` of the product of signs at `a_i n + h_i`,
/// normalized by `x`. One sieve pass over `[1, max_i(a_i x + h_i)]`.
pub fn correlate(
    set: &CoprimeSet,
    spec: &CorrelationSpec,
    x: u64,
    opts: &EstimatorOptions,
) -> Result<Estimate> {
    let report = convergence_grid(set, spec, &[x], opts)?;
    Ok(report.entries[0])
}

/// One pass over the largest grid point, emitting the exact prefix count at
/// every grid value. Grid must be ascending and positive; decay is recorded,
/// never asserted.
pub fn convergence_grid(
    set: &CoprimeSet,
    spec: &CorrelationSpec,
    grid: &[u64],
    opts: &EstimatorOptions,
) -> Result<ConvergenceReport> {
    if grid.is_empty() {
        return Err(Error::BadParams("empty grid".into()));
    }
    if grid[0] < 1 || grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::BadParams(
            "grid must be strictly ascending and positive".into(),
        ));
    }
    let x_max = *grid.last().unwrap();
    let hi = spec.required_bound(x_max)?;
    let bits = lambda_bits(set, hi, opts)?;

    let chunk = opts.effective_segment_len() as u64;
    let mut entries = Vec::with_capacity(grid.len());
    let mut cumulative = 0i64;
    let mut prev = 0u64;
    for &g in grid {
        let interval: i64 = split_ranges(prev + 1, g, chunk)
            .into_par_iter()
            .map(|(lo, hi)| product_sign_count(&bits, spec, lo, hi))
            .sum();
        cumulative += interval;
        entries.push(Estimate::from_count(g, cumulative));
        prev = g;
    }
    Ok(ConvergenceReport {
        set: set.descriptor(),
        spec: spec.clone(),
        entries,
    })
}

fn split_ranges(lo: u64, hi: u64, chunk: u64) -> Vec<(u64, u64)> {
    let mut out = Vec::new();
    let mut start = lo;
    while start <= hi {
        let end = (start + chunk - 1).min(hi);
        out.push((start, end));
        start = end + 1;
    }
    out
}

/// One term of the composite-part expansion of the mean.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct TruncationTerm {
    /// The composite-semigroup element this term conditions on.
    pub c_part: u64,
    pub lambda_c: i8,
    /// Exact signed sum of the screened prime-part sign up to `x / c_part`.
    pub inner_count: i64,
    pub inner_len: u64,
    /// `lambda_c * inner_count / x`.
    pub contribution: f64,
    /// `inner_count / (x / c_part)` with real division; stays in `[-1, 1]`.
    pub inner_average: f64,
}

/// The mean re-derived through the composite-part expansion, with the mass
/// of the terms past a threshold compared against the tail of the
/// reciprocal mass.
#[derive(Clone, Debug, Serialize)]
pub struct TruncationReport {
    pub x: u64,
    pub threshold: u64,
    pub terms: Vec<TruncationTerm>,
    /// Sum of all term counts; equals the directly sieved count exactly.
    pub total_count: i64,
    pub direct_count: i64,
    pub exact_match: bool,
    pub tail_count: i64,
    pub tail_value: f64,
    pub tail_mass: String,
    pub tail_mass_f64: f64,
    pub max_tail_inner_average: f64,
    /// `|tail_value| <= tail_mass * max_tail_inner_average`, checked in
    /// exact arithmetic.
    pub tail_bound_holds: bool,
}

/// Expands the mean over the composite semigroup: for every semigroup
/// element `e <= x`, its sign times the exact sum of the screened
/// prime-part sign over `m <= x / e`. The expansion reproduces the direct
/// mean term by term; truncating at `threshold` leaves a tail controlled by
/// the semigroup's reciprocal tail mass.
pub fn truncation_diagnostic(
    set: &CoprimeSet,
    decomposition: &Decomposition,
    x: u64,
    threshold: u64,
    opts: &EstimatorOptions,
) -> Result<TruncationReport> {
    check_x(set, x)?;
    if threshold < 1 || threshold > x {
        return Err(Error::BadParams(format!(
            "threshold {threshold} outside [1, {x}]"
        )));
    }
    let enumeration = semigroup::enumerate(decomposition.composites(), x)?;

    // screened prime-part sign over [1, x]: prime-restricted parity, zeroed
    // on multiples of any composite generator
    let parity_p = parity_range_raw(decomposition.primes(), set.variant(), 1, x);
    let killed = composite_hit_range(decomposition.composites(), 1, x);

    // prefix sums of the screened sign at every needed cutoff x / e
    // (elements never exceed x, so every cutoff is >= 1)
    let mut cutoffs: Vec<u64> = enumeration.elements().iter().map(|&e| x / e).collect();
    let mut sorted = cutoffs.clone();
    sorted.sort_unstable();
    sorted.dedup();
    let mut prefix_at = std::collections::HashMap::new();
    let mut acc = 0i64;
    let mut next = 0usize;
    for m in 1..=x {
        if !killed.get((m - 1) as usize) {
            acc += parity_p.sign((m - 1) as usize) as i64;
        }
        while next < sorted.len() && sorted[next] == m {
            prefix_at.insert(m, acc);
            next += 1;
        }
    }

    let variant = set.variant();
    let mut terms = Vec::with_capacity(enumeration.count() as usize);
    let mut total_count = 0i64;
    let mut tail_count = 0i64;
    let mut max_tail_inner: u128 = 0; // max over the tail of |inner_count| * c_part
    for (idx, (&e, y)) in enumeration
        .elements()
        .iter()
        .zip(cutoffs.drain(..))
        .enumerate()
    {
        let lambda_c = lambda_c_of_exponents(variant, enumeration.exponents_of(idx));
        let inner_count = *prefix_at.get(&y).unwrap_or(&0);
        let count = lambda_c as i64 * inner_count;
        total_count += count;
        if e > threshold {
            tail_count += count;
            max_tail_inner = max_tail_inner.max(inner_count.unsigned_abs() as u128 * e as u128);
        }
        terms.push(TruncationTerm {
            c_part: e,
            lambda_c,
            inner_count,
            inner_len: y,
            contribution: count as f64 / x as f64,
            inner_average: inner_count as f64 * e as f64 / x as f64,
        });
    }

    let direct = mean(set, x, opts)?;
    let tail = semigroup::tail_mass(&enumeration, threshold)?;

    // |tail_count| / x <= tail_mass * max(|inner| * e) / x, all exact
    let lhs = BigRational::from(BigInt::from(tail_count.unsigned_abs()));
    let rhs = tail.value.clone() * BigRational::from(BigInt::from(max_tail_inner));
    let tail_bound_holds = lhs <= rhs;

    Ok(TruncationReport {
        x,
        threshold,
        total_count,
        direct_count: direct.count,
        exact_match: total_count == direct.count,
        tail_count,
        tail_value: tail_count as f64 / x as f64,
        tail_mass: semigroup::rational_string(&tail.value),
        tail_mass_f64: tail.value.to_f64().unwrap_or(f64::NAN),
        max_tail_inner_average: max_tail_inner as f64 / x as f64,
        tail_bound_holds,
        terms,
    })
}

/// Sign of a semigroup element from its exponent vector: the generators are
/// pairwise coprime, so the composite-restricted count is the number of
/// nonzero exponents (distinct) or their sum (with multiplicity).
fn lambda_c_of_exponents(variant: Variant, exponents: &[(u32, u32)]) -> i8 {
    let count: u32 = match variant {
        Variant::Omega => exponents.len() as u32,
        Variant::BigOmega => exponents.iter().map(|&(_, e)| e).sum(),
    };
    if count & 1 == 1 {
        -1
    } else {
        1
    }
}
