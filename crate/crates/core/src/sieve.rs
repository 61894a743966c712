//! Segmented sieving of the divisor counts and signs over integer ranges,
//! plus the per-integer operations that split a value into its composite
//! part and prime cofactor.
//!
//! Two paths share the marking logic:
//!  * `sieve_range` fills 8-bit count planes (and optionally the composite
//!    part plane) for table export and verification;
//!  * `lambda_parity_range` keeps only a bit-packed sign parity per integer,
//!    updated by XOR while marking, which is what the mean and correlation
//!    estimators run on.
//!
//! Disjoint ranges sieve independently and concatenate; output is identical
//! for any segmentation.

use serde::Serialize;

use crate::coprime_set::{CoprimeSet, Decomposition, Variant};
use crate::error::{Error, Result};
use crate::primes::factorize;
use crate::semigroup::SemigroupEnumeration;

/// Default segment length: 2^22 integers keeps the working planes inside L2.
pub const DEFAULT_SEGMENT_LEN: usize = 1 << 22;

/// Hard cap for a single in-memory table.
pub const MAX_TABLE_LEN: u64 = 1 << 26;

/// Bit-packed parity plane; bit set means an odd count, i.e. sign -1.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BitPlane {
    len: usize,
    words: Vec<u64>,
}

impl BitPlane {
    pub fn new(len: usize) -> BitPlane {
        BitPlane {
            len,
            words: vec![0; len.div_ceil(64)],
        }
    }

    pub fn from_words(len: usize, words: Vec<u64>) -> BitPlane {
        assert_eq!(words.len(), len.div_ceil(64));
        BitPlane { len, words }
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        debug_assert!(i < self.len);
        self.words[i >> 6] >> (i & 63) & 1 == 1
    }

    #[inline]
    pub fn flip(&mut self, i: usize) {
        debug_assert!(i < self.len);
        self.words[i >> 6] ^= 1 << (i & 63);
    }

    #[inline]
    pub fn set(&mut self, i: usize, value: bool) {
        let word = &mut self.words[i >> 6];
        let mask = 1u64 << (i & 63);
        if value {
            *word |= mask;
        } else {
            *word &= !mask;
        }
    }

    /// Sign at index: +1 for even parity, -1 for odd.
    #[inline]
    pub fn sign(&self, i: usize) -> i8 {
        if self.get(i) {
            -1
        } else {
            1
        }
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    pub fn words_mut(&mut self) -> &mut [u64] {
        &mut self.words
    }

    /// Number of set bits in the first `upto` positions.
    pub fn count_ones_prefix(&self, upto: usize) -> u64 {
        debug_assert!(upto <= self.len);
        let full = upto >> 6;
        let mut ones: u64 = self.words[..full]
            .iter()
            .map(|w| w.count_ones() as u64)
            .sum();
        let rem = upto & 63;
        if rem > 0 {
            ones += (self.words[full] & ((1u64 << rem) - 1)).count_ones() as u64;
        }
        ones
    }

    pub fn count_ones(&self) -> u64 {
        self.count_ones_prefix(self.len)
    }

    /// Signed sum over the first `upto` positions: (+1 per clear bit, -1 per
    /// set bit).
    pub fn signed_sum_prefix(&self, upto: usize) -> i64 {
        upto as i64 - 2 * self.count_ones_prefix(upto) as i64
    }
}

/// Per-integer counts and signs over `[lo, hi]`.
#[derive(Clone, Debug, PartialEq)]
pub struct SieveTable {
    lo: u64,
    hi: u64,
    variant: Variant,
    omega: Vec<u8>,
    big_omega: Vec<u8>,
    parity: BitPlane,
    c_part: Option<Vec<u64>>,
}

impl SieveTable {
    pub fn lo(&self) -> u64 {
        self.lo
    }

    pub fn hi(&self) -> u64 {
        self.hi
    }

    pub fn len(&self) -> usize {
        (self.hi - self.lo + 1) as usize
    }

    pub fn is_empty(&self) -> bool {
        false // construction guarantees lo <= hi
    }

    pub fn variant(&self) -> Variant {
        self.variant
    }

    #[inline]
    fn index(&self, n: u64) -> usize {
        debug_assert!(n >= self.lo && n <= self.hi);
        (n - self.lo) as usize
    }

    pub fn omega_at(&self, n: u64) -> u8 {
        self.omega[self.index(n)]
    }

    pub fn big_omega_at(&self, n: u64) -> u8 {
        self.big_omega[self.index(n)]
    }

    pub fn lambda_at(&self, n: u64) -> i8 {
        self.parity.sign(self.index(n))
    }

    pub fn c_part_at(&self, n: u64) -> Option<u64> {
        self.c_part.as_ref().map(|plane| plane[self.index(n)])
    }

    pub fn omega_plane(&self) -> &[u8] {
        &self.omega
    }

    pub fn big_omega_plane(&self) -> &[u8] {
        &self.big_omega
    }

    pub fn parity_plane(&self) -> &BitPlane {
        &self.parity
    }

    pub fn c_part_plane(&self) -> Option<&[u64]> {
        self.c_part.as_deref()
    }

    pub(crate) fn from_raw_parts(
        lo: u64,
        hi: u64,
        variant: Variant,
        omega: Vec<u8>,
        big_omega: Vec<u8>,
        parity: BitPlane,
    ) -> Result<SieveTable> {
        let len = (hi - lo + 1) as usize;
        if omega.len() != len || big_omega.len() != len || parity.len() != len {
            return Err(Error::BadParams("inconsistent plane lengths".into()));
        }
        Ok(SieveTable {
            lo,
            hi,
            variant,
            omega,
            big_omega,
            parity,
            c_part: None,
        })
    }

    /// Glues adjacent tables produced from a partition of one range.
    pub fn concat(segments: Vec<SieveTable>) -> Result<SieveTable> {
        let mut iter = segments.into_iter();
        let mut acc = iter
            .next()
            .ok_or_else(|| Error::BadParams("cannot concatenate an empty segment list".into()))?;
        for seg in iter {
            if seg.lo != acc.hi + 1 || seg.variant != acc.variant {
                return Err(Error::BadParams(
                    "segments must be adjacent and share a variant".into(),
                ));
            }
            let base = acc.len();
            acc.omega.extend_from_slice(&seg.omega);
            acc.big_omega.extend_from_slice(&seg.big_omega);
            let mut parity = BitPlane::new(base + seg.len());
            parity.words_mut()[..acc.parity.words().len()].copy_from_slice(acc.parity.words());
            for i in 0..seg.len() {
                if seg.parity.get(i) {
                    parity.flip(base + i);
                }
            }
            acc.parity = parity;
            acc.c_part = match (acc.c_part.take(), seg.c_part) {
                (Some(mut a), Some(b)) => {
                    a.extend_from_slice(&b);
                    Some(a)
                }
                _ => None,
            };
            acc.hi = seg.hi;
        }
        Ok(acc)
    }
}

fn check_range(set: &CoprimeSet, lo: u64, hi: u64, capacity: u64) -> Result<usize> {
    if lo < 1 || lo > hi {
        return Err(Error::BadParams(format!("bad range [{lo}, {hi}]")));
    }
    if hi > set.bound() {
        return Err(Error::SetBoundExceeded {
            hi,
            bound: set.bound(),
        });
    }
    let len = hi - lo + 1;
    if len > capacity {
        return Err(Error::RangeTooLarge { lo, hi, capacity });
    }
    Ok(len as usize)
}

/// Generators `<= hi` of a sorted list.
fn active_generators(generators: &[u64], hi: u64) -> &[u64] {
    let end = generators.partition_point(|&g| g <= hi);
    &generators[..end]
}

#[inline]
fn first_multiple(q: u64, lo: u64) -> u64 {
    lo.div_ceil(q) * q
}

/// Runs `f(index)` for every multiple of `q` inside `[lo, hi]`.
#[inline]
fn for_multiples(q: u64, lo: u64, hi: u64, mut f: impl FnMut(usize)) {
    let mut m = first_multiple(q, lo);
    while m <= hi {
        f((m - lo) as usize);
        m += q;
    }
}

/// Full count planes over `[lo, hi]`; single segment, capacity-checked.
pub fn sieve_range(set: &CoprimeSet, lo: u64, hi: u64) -> Result<SieveTable> {
    sieve_segment(set, None, lo, hi)
}

/// Like `sieve_range` but also fills the composite-part plane: for each `n`
/// the product of full generator powers `c^v` with `c^v || n` over the
/// composite generators.
pub fn sieve_range_with_c_part(
    set: &CoprimeSet,
    decomposition: &Decomposition,
    lo: u64,
    hi: u64,
) -> Result<SieveTable> {
    sieve_segment(set, Some(decomposition), lo, hi)
}

fn sieve_segment(
    set: &CoprimeSet,
    decomposition: Option<&Decomposition>,
    lo: u64,
    hi: u64,
) -> Result<SieveTable> {
    let len = check_range(set, lo, hi, MAX_TABLE_LEN)?;
    let mut omega = vec![0u8; len];
    let mut big_omega = vec![0u8; len];
    for &a in active_generators(set.generators(), hi) {
        for_multiples(a, lo, hi, |i| {
            omega[i] = omega[i].saturating_add(1);
            big_omega[i] = big_omega[i].saturating_add(1);
        });
        // higher powers: a^v || n contributes v to the accumulated count
        let mut q = a;
        loop {
            q = match q.checked_mul(a) {
                Some(v) if v <= hi => v,
                _ => break,
            };
            for_multiples(q, lo, hi, |i| {
                big_omega[i] = big_omega[i].saturating_add(1);
            });
        }
    }
    // 255 is unreachable for in-scope bounds (counts top out near 40), so a
    // saturated cell means a genuine overflow.
    for (i, (&o, &b)) in omega.iter().zip(&big_omega).enumerate() {
        if o == u8::MAX || b == u8::MAX {
            return Err(Error::CountOverflow { n: lo + i as u64 });
        }
    }
    let mut parity = BitPlane::new(len);
    let counts: &[u8] = match set.variant() {
        Variant::Omega => &omega,
        Variant::BigOmega => &big_omega,
    };
    for (i, &c) in counts.iter().enumerate() {
        if c & 1 == 1 {
            parity.flip(i);
        }
    }
    let c_part = match decomposition {
        None => None,
        Some(d) => {
            let mut plane = vec![1u64; len];
            for &c in active_generators(d.composites(), hi) {
                let mut q = c;
                loop {
                    // multiplying by c once per power pass accumulates c^v
                    for_multiples(q, lo, hi, |i| plane[i] *= c);
                    q = match q.checked_mul(c) {
                        Some(v) if v <= hi => v,
                        _ => break,
                    };
                }
            }
            Some(plane)
        }
    };
    Ok(SieveTable {
        lo,
        hi,
        variant: set.variant(),
        omega,
        big_omega,
        parity,
        c_part,
    })
}

/// Parity-only fast path over `[lo, hi]` for an explicit generator list.
/// No count planes are kept; the parity bit is flipped during marking.
pub(crate) fn parity_range_raw(generators: &[u64], variant: Variant, lo: u64, hi: u64) -> BitPlane {
    let len = (hi - lo + 1) as usize;
    let mut parity = BitPlane::new(len);
    for &a in active_generators(generators, hi) {
        match variant {
            Variant::Omega => {
                for_multiples(a, lo, hi, |i| parity.flip(i));
            }
            Variant::BigOmega => {
                let mut q = a;
                loop {
                    for_multiples(q, lo, hi, |i| parity.flip(i));
                    q = match q.checked_mul(a) {
                        Some(v) if v <= hi => v,
                        _ => break,
                    };
                }
            }
        }
    }
    parity
}

/// Sign parity over `[lo, hi]` for a set; single segment, capacity-checked.
pub fn lambda_parity_range(set: &CoprimeSet, lo: u64, hi: u64) -> Result<BitPlane> {
    check_range(set, lo, hi, MAX_TABLE_LEN)?;
    Ok(parity_range_raw(set.generators(), set.variant(), lo, hi))
}

/// Marks every integer in `[lo, hi]` divisible by some composite generator.
pub(crate) fn composite_hit_range(composites: &[u64], lo: u64, hi: u64) -> BitPlane {
    let len = (hi - lo + 1) as usize;
    let mut hit = BitPlane::new(len);
    for &c in active_generators(composites, hi) {
        for_multiples(c, lo, hi, |i| hit.set(i, true));
    }
    hit
}

// ---------------------------------------------------------------------------
// Per-integer operations
// ---------------------------------------------------------------------------

/// Counts over both parts of a decomposition for a single integer:
/// (distinct composite divisors, composite power multiplicity,
///  distinct prime divisors, prime power multiplicity).
fn count_parts(decomposition: &Decomposition, n: u64) -> (u32, u32, u32, u32) {
    let mut omega_c = 0;
    let mut big_omega_c = 0;
    for &c in active_generators(decomposition.composites(), n) {
        if n % c == 0 {
            omega_c += 1;
            big_omega_c += crate::primes::valuation(n, c);
        }
    }
    let mut omega_p = 0;
    let mut big_omega_p = 0;
    for (p, e) in factorize(n) {
        if decomposition.contains_prime(p) {
            omega_p += 1;
            big_omega_p += e;
        }
    }
    (omega_c, big_omega_c, omega_p, big_omega_p)
}

fn sign_of(count: u32) -> i8 {
    if count & 1 == 1 {
        -1
    } else {
        1
    }
}

/// Sign of a single integer, evaluated directly from the decomposition
/// (the two parts partition the set, so their counts add).
pub fn lambda_at(set: &CoprimeSet, decomposition: &Decomposition, n: u64) -> i8 {
    let (oc, bc, op, bp) = count_parts(decomposition, n);
    match set.variant() {
        Variant::Omega => sign_of(oc + op),
        Variant::BigOmega => sign_of(bc + bp),
    }
}

/// The composite part of `n` (product of full composite-generator powers
/// dividing `n`) and its cofactor. No composite generator divides the
/// cofactor.
pub fn extract_c_part(decomposition: &Decomposition, n: u64) -> (u64, u64) {
    debug_assert!(n >= 1);
    let mut c_part = 1u64;
    for &c in active_generators(decomposition.composites(), n) {
        let mut q = n;
        while q % c == 0 {
            q /= c;
            c_part *= c;
        }
    }
    let cofactor = n / c_part;
    debug_assert!(
        decomposition
            .composites()
            .iter()
            .all(|&c| cofactor % c != 0),
        "cofactor {cofactor} of {n} kept a composite divisor"
    );
    (c_part, cofactor)
}

/// The three split signs of a single integer.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct PartSigns {
    /// Sign of the composite part under the composite-restricted count.
    pub lambda_c: i8,
    /// Sign of the cofactor under the prime-restricted count.
    pub lambda_p: i8,
    /// Prime-restricted sign of `n` itself, zeroed when any composite
    /// generator divides `n`.
    pub lambda_p_screened: i8,
}

/// Splits the sign of `n`: the composite part's sign times the cofactor's
/// prime-part sign reproduces the full sign.
pub fn lambda_parts(set: &CoprimeSet, decomposition: &Decomposition, n: u64) -> PartSigns {
    let (c_part, cofactor) = extract_c_part(decomposition, n);
    let lambda_c = lambda_c_at(set.variant(), decomposition, c_part);
    let lambda_p = lambda_p_at(set.variant(), decomposition, cofactor);
    let screened = if decomposition
        .composites()
        .iter()
        .take_while(|&&c| c <= n)
        .any(|&c| n % c == 0)
    {
        0
    } else {
        lambda_p_at(set.variant(), decomposition, n)
    };
    debug_assert_eq!(
        lambda_c * lambda_p,
        lambda_at(set, decomposition, n),
        "split signs of {n} do not multiply back"
    );
    PartSigns {
        lambda_c,
        lambda_p,
        lambda_p_screened: screened,
    }
}

/// Sign of `m` counting composite generators only.
pub fn lambda_c_at(variant: Variant, decomposition: &Decomposition, m: u64) -> i8 {
    let mut count = 0;
    for &c in active_generators(decomposition.composites(), m) {
        if m % c == 0 {
            count += match variant {
                Variant::Omega => 1,
                Variant::BigOmega => crate::primes::valuation(m, c),
            };
        }
    }
    sign_of(count)
}

/// Sign of `m` counting prime generators only.
pub fn lambda_p_at(variant: Variant, decomposition: &Decomposition, m: u64) -> i8 {
    let mut count = 0;
    for (p, e) in factorize(m) {
        if decomposition.contains_prime(p) {
            count += match variant {
                Variant::Omega => 1,
                Variant::BigOmega => e,
            };
        }
    }
    sign_of(count)
}

/// Outcome of expanding the sign of one integer as a divisor sum over the
/// composite semigroup.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct ConvolutionCheck {
    pub n: u64,
    pub lambda: i8,
    pub divisor_sum: i64,
    pub nonzero_terms: u32,
    pub holds: bool,
}

/// Evaluates `sum over d | n, d in the composite semigroup` of
/// `lambda_c(d) * screened lambda_p(n/d)` and compares it to the sign of
/// `n`. Exactly one summand should survive: the one at the composite part.
pub fn verify_convolution(
    set: &CoprimeSet,
    decomposition: &Decomposition,
    n: u64,
) -> Result<ConvolutionCheck> {
    let enumeration = crate::semigroup::enumerate(decomposition.composites(), n.max(1))?;
    Ok(convolution_check_with(set, decomposition, &enumeration, n))
}

/// Same as `verify_convolution` with a reusable semigroup enumeration whose
/// bound must be at least `n`.
pub fn convolution_check_with(
    set: &CoprimeSet,
    decomposition: &Decomposition,
    enumeration: &SemigroupEnumeration,
    n: u64,
) -> ConvolutionCheck {
    debug_assert!(enumeration.bound() >= n);
    let variant = set.variant();
    let mut divisor_sum: i64 = 0;
    let mut nonzero_terms = 0;
    for &d in enumeration.elements_up_to(n) {
        if n % d != 0 {
            continue;
        }
        let m = n / d;
        let screened = if decomposition
            .composites()
            .iter()
            .take_while(|&&c| c <= m)
            .any(|&c| m % c == 0)
        {
            0
        } else {
            lambda_p_at(variant, decomposition, m)
        };
        if screened != 0 {
            nonzero_terms += 1;
            divisor_sum += (lambda_c_at(variant, decomposition, d) * screened) as i64;
        }
    }
    let lambda = lambda_at(set, decomposition, n);
    ConvolutionCheck {
        n,
        lambda,
        divisor_sum,
        nonzero_terms,
        holds: divisor_sum == lambda as i64 && nonzero_terms == 1,
    }
}
