//! Generator sets: validation, composite/prime decomposition and the
//! built-in families used in the experiments.
//!
//! A valid set is a finite ascending list of pairwise coprime integers
//! `>= 2`, together with a sign variant (count distinct generator divisors,
//! or accumulate full generator-power multiplicity) and a materialization
//! bound: the largest `n` for which every relevant generator is present.

use std::collections::HashMap;
use std::io::BufRead;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::primes::{is_prime, sieve_primes, smallest_prime_factor};
use crate::rational::{RecipAccumulator, ReciprocalSum};

/// Sieving beyond this bound is out of scope for the whole crate.
pub const MAX_SIEVE_BOUND: u64 = 1 << 40;

/// Which exponent feeds the sign: distinct generator divisors (`Omega`)
/// or summed generator-power multiplicities (`BigOmega`).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Variant {
    Omega,
    BigOmega,
}

impl std::fmt::Display for Variant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Variant::Omega => write!(f, "omega"),
            Variant::BigOmega => write!(f, "big-omega"),
        }
    }
}

/// A validated generator set.
#[derive(Clone, Debug)]
pub struct CoprimeSet {
    generators: Vec<u64>,
    variant: Variant,
    family: String,
    bound: u64,
}

/// Compact description of a set for report headers (never the full list).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SetDescriptor {
    pub family: String,
    pub variant: Variant,
    pub bound: u64,
    pub generator_count: u64,
}

impl CoprimeSet {
    /// Validates a raw generator list: sorts it, rejects entries below 2,
    /// duplicates, entries above `bound`, and any pair sharing a prime
    /// factor. The shared-prime check buckets every prime factor of every
    /// generator, so the first offending pair is reported in ascending
    /// order.
    pub fn validate(
        mut generators: Vec<u64>,
        variant: Variant,
        family: impl Into<String>,
        bound: u64,
    ) -> Result<CoprimeSet> {
        if generators.is_empty() {
            return Err(Error::EmptySet);
        }
        if bound > MAX_SIEVE_BOUND {
            return Err(Error::BadParams(format!(
                "bound {bound} exceeds the supported maximum {MAX_SIEVE_BOUND}"
            )));
        }
        generators.sort_unstable();
        for &g in &generators {
            if g < 2 {
                return Err(Error::ElementTooSmall { value: g });
            }
            if g > bound {
                return Err(Error::BadParams(format!(
                    "generator {g} exceeds the set bound {bound}"
                )));
            }
        }
        for w in generators.windows(2) {
            if w[0] == w[1] {
                return Err(Error::NotCoprime { a: w[0], b: w[1] });
            }
        }
        // Pairwise coprimality == no prime owns two generators.
        let mut owner: HashMap<u64, u64> = HashMap::new();
        for &g in &generators {
            for p in prime_support(g) {
                if let Some(&other) = owner.get(&p) {
                    return Err(Error::NotCoprime { a: other, b: g });
                }
                owner.insert(p, g);
            }
        }
        Ok(CoprimeSet {
            generators,
            variant,
            family: family.into(),
            bound,
        })
    }

    /// Constructor for lists that are coprime by construction (families,
    /// restrictions of already-validated sets). Still sorts and checks the
    /// cheap scalar invariants.
    pub(crate) fn from_parts_unchecked(
        mut generators: Vec<u64>,
        variant: Variant,
        family: impl Into<String>,
        bound: u64,
    ) -> CoprimeSet {
        generators.sort_unstable();
        debug_assert!(generators.iter().all(|&g| g >= 2 && g <= bound));
        debug_assert!(generators.windows(2).all(|w| w[0] < w[1]));
        CoprimeSet {
            generators,
            variant,
            family: family.into(),
            bound,
        }
    }

    pub fn generators(&self) -> &[u64] {
        &self.generators
    }

    pub fn variant(&self) -> Variant {
        self.variant
    }

    pub fn family(&self) -> &str {
        &self.family
    }

    /// Largest `n` the set is materialized for; sign evaluations past this
    /// bound would miss generators and are rejected by the sieve layer.
    pub fn bound(&self) -> u64 {
        self.bound
    }

    pub fn descriptor(&self) -> SetDescriptor {
        SetDescriptor {
            family: self.family.clone(),
            variant: self.variant,
            bound: self.bound,
            generator_count: self.generators.len() as u64,
        }
    }

    /// The same set with only its prime generators kept.
    pub fn prime_restriction(&self, decomposition: &Decomposition) -> Option<CoprimeSet> {
        if decomposition.primes().is_empty() {
            return None;
        }
        Some(CoprimeSet::from_parts_unchecked(
            decomposition.primes().to_vec(),
            self.variant,
            format!("{}:primes", self.family),
            self.bound,
        ))
    }
}

/// Distinct primes dividing `g`. Prime `g` short-circuits via Miller-Rabin;
/// composite `g` peels smallest factors, re-testing the cofactor so the
/// cost tracks the smallest factor rather than sqrt(g).
fn prime_support(mut g: u64) -> Vec<u64> {
    let mut out = Vec::new();
    while g > 1 {
        if is_prime(g) {
            out.push(g);
            break;
        }
        let p = smallest_prime_factor(g);
        out.push(p);
        while g % p == 0 {
            g /= p;
        }
    }
    out
}

/// The split of a set into composite and prime generators, with the
/// smallest-prime-factor tag of each composite and partial reciprocal
/// sums of both parts.
#[derive(Clone, Debug)]
pub struct Decomposition {
    composites: Vec<u64>,
    primes: Vec<u64>,
    spf: Vec<(u64, u64)>, // (composite, its smallest prime factor), ascending
    recip_sum_composites: ReciprocalSum,
    recip_sum_primes: ReciprocalSum,
}

impl Decomposition {
    pub fn composites(&self) -> &[u64] {
        &self.composites
    }

    pub fn primes(&self) -> &[u64] {
        &self.primes
    }

    pub fn spf_pairs(&self) -> &[(u64, u64)] {
        &self.spf
    }

    pub fn spf_of(&self, composite: u64) -> Option<u64> {
        self.spf
            .binary_search_by_key(&composite, |&(c, _)| c)
            .ok()
            .map(|i| self.spf[i].1)
    }

    pub fn recip_sum_composites(&self) -> &ReciprocalSum {
        &self.recip_sum_composites
    }

    pub fn recip_sum_primes(&self) -> &ReciprocalSum {
        &self.recip_sum_primes
    }

    pub fn contains_prime(&self, p: u64) -> bool {
        self.primes.binary_search(&p).is_ok()
    }
}

/// Splits a set by primality. Every composite gets its smallest prime
/// factor; those factors are necessarily distinct across the composite part
/// (two composites sharing one would share a prime), and a collision is
/// reported as the offending non-coprime pair.
pub fn decompose(set: &CoprimeSet) -> Result<Decomposition> {
    let mut composites = Vec::new();
    let mut primes = Vec::new();
    let mut spf = Vec::new();
    let mut acc_c = RecipAccumulator::new();
    let mut acc_p = RecipAccumulator::new();
    let mut seen: HashMap<u64, u64> = HashMap::new();
    for &g in set.generators() {
        if is_prime(g) {
            primes.push(g);
            acc_p.push(g);
        } else {
            let p = smallest_prime_factor(g);
            debug_assert!(p * p <= g);
            if let Some(&other) = seen.get(&p) {
                return Err(Error::NotCoprime { a: other, b: g });
            }
            seen.insert(p, g);
            composites.push(g);
            spf.push((g, p));
            acc_c.push(g);
        }
    }
    Ok(Decomposition {
        composites,
        primes,
        spf,
        recip_sum_composites: acc_c.finish(),
        recip_sum_primes: acc_p.finish(),
    })
}

/// Maps a product of composite generators to a perfect square by replacing
/// each generator with the square of its smallest prime factor. Distinct
/// inputs map to distinct squares, which is what keeps the semigroup thin.
///
/// `m` must factor completely over the composite part; the leftover factor
/// is reported otherwise.
pub fn square_image(m: u64, decomposition: &Decomposition) -> Result<u64> {
    if m == 0 {
        return Err(Error::NotInSemigroup { m, residual: 0 });
    }
    let mut residual = m;
    let mut image: u64 = 1;
    for &(c, p) in decomposition.spf_pairs() {
        while residual % c == 0 {
            residual /= c;
            // p*p <= c, so image grows no faster than the consumed factor
            // and stays <= m.
            image = image.checked_mul(p * p).ok_or(Error::Overflow {
                context: "square_image",
            })?;
        }
    }
    if residual != 1 {
        return Err(Error::NotInSemigroup { m, residual });
    }
    Ok(image)
}

/// Built-in set families.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "kebab-case")]
pub enum FamilySpec {
    /// Every prime up to the bound.
    AllPrimes,
    /// Every prime up to the bound, with chosen composites injected and the
    /// primes dividing them removed so the set stays pairwise coprime.
    AugmentedPrimes { inject: Vec<u64> },
    /// A thin subsequence of the primes: the n-th prime is kept iff
    /// floor(log2 log2 (n+16)) divides n. The kept indices have vanishing
    /// relative density among the primes while the reciprocal sum still
    /// diverges (at triple-logarithm speed). Whether the relative density
    /// has a limit (rather than upper density 0) is left open.
    SparsePrimes,
}

impl FamilySpec {
    pub fn tag(&self) -> String {
        match self {
            FamilySpec::AllPrimes => "all-primes".to_string(),
            FamilySpec::AugmentedPrimes { inject } => {
                let parts: Vec<String> = inject.iter().map(|c| c.to_string()).collect();
                format!("augmented-primes[{}]", parts.join(","))
            }
            FamilySpec::SparsePrimes => "sparse-primes".to_string(),
        }
    }
}

/// `floor(log2 log2 (n + 16))`, computed exactly in integers:
/// the value is `k` iff `2^(2^k) <= n + 16 < 2^(2^(k+1))`.
fn sparse_index_modulus(n: u64) -> u64 {
    let m = n + 16;
    let mut k = 2u32; // m >= 17 > 2^(2^2)
    while (1 << (k + 1)) < 64 && m >= 1u64 << (1 << (k + 1)) {
        k += 1;
    }
    k as u64
}

/// Materializes a built-in family up to `x_max`.
pub fn builtin_family(spec: &FamilySpec, variant: Variant, x_max: u64) -> Result<CoprimeSet> {
    if x_max > MAX_SIEVE_BOUND {
        return Err(Error::BadParams(format!(
            "bound {x_max} exceeds the supported maximum {MAX_SIEVE_BOUND}"
        )));
    }
    let tag = spec.tag();
    match spec {
        FamilySpec::AllPrimes => {
            let primes = sieve_primes(x_max);
            if primes.is_empty() {
                return Err(Error::EmptySet);
            }
            Ok(CoprimeSet::from_parts_unchecked(
                primes, variant, tag, x_max,
            ))
        }
        FamilySpec::AugmentedPrimes { inject } => {
            if inject.is_empty() {
                return Err(Error::BadParams(
                    "augmented-primes needs at least one injected value".into(),
                ));
            }
            let mut removed: HashMap<u64, u64> = HashMap::new();
            for &c in inject {
                if c < 2 {
                    return Err(Error::ElementTooSmall { value: c });
                }
                if c > x_max {
                    return Err(Error::BadParams(format!(
                        "injected value {c} exceeds the bound {x_max}"
                    )));
                }
                for p in prime_support(c) {
                    if let Some(&other) = removed.get(&p) {
                        if other != c {
                            return Err(Error::BadParams(format!(
                                "injected values {other} and {c} are not coprime"
                            )));
                        }
                    }
                    removed.insert(p, c);
                }
            }
            let mut generators: Vec<u64> = sieve_primes(x_max)
                .into_iter()
                .filter(|p| !removed.contains_key(p))
                .collect();
            let mut inject = inject.clone();
            inject.sort_unstable();
            inject.dedup();
            generators.extend_from_slice(&inject);
            generators.sort_unstable();
            Ok(CoprimeSet::from_parts_unchecked(
                generators, variant, tag, x_max,
            ))
        }
        FamilySpec::SparsePrimes => {
            let primes = sieve_primes(x_max);
            let selected: Vec<u64> = primes
                .iter()
                .enumerate()
                .filter(|(i, _)| {
                    let n = *i as u64 + 1; // 1-based prime index
                    n % sparse_index_modulus(n) == 0
                })
                .map(|(_, &p)| p)
                .collect();
            if selected.is_empty() {
                return Err(Error::EmptySet);
            }
            Ok(CoprimeSet::from_parts_unchecked(
                selected, variant, tag, x_max,
            ))
        }
    }
}

/// Reads a generator file: one decimal value per line, `#` starts a comment,
/// blank lines ignored.
pub fn read_generator_file(path: &Path) -> Result<Vec<u64>> {
    let file = std::fs::File::open(path)?;
    let mut out = Vec::new();
    for (lineno, line) in std::io::BufReader::new(file).lines().enumerate() {
        let line = line?;
        let body = line.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let value: u64 = body.parse().map_err(|_| {
            Error::BadParams(format!(
                "line {}: expected a decimal integer, got {body:?}",
                lineno + 1
            ))
        })?;
        out.push(value);
    }
    Ok(out)
}
