//! Brute-force reference implementations used to cross-check the sieve
//! and estimator paths, plus a seeded generator of random valid sets.
//!
//! Nothing here shares code with the segmented sieve: counts come from
//! direct divisibility scans over the generator list, one integer at a
//! time. Slow on purpose.

use rand::Rng;

use crate::coprime_set::{CoprimeSet, Variant};
use crate::primes::sieve_primes;

/// Number of generators dividing `n`, by direct scan.
pub fn omega_oracle(generators: &[u64], n: u64) -> u32 {
    generators
        .iter()
        .take_while(|&&a| a <= n)
        .filter(|&&a| n % a == 0)
        .count() as u32
}

/// Total power multiplicity of generators in `n`: for each generator `a`
/// the exponent `v` with `a^v || n`, by repeated division.
pub fn big_omega_oracle(generators: &[u64], n: u64) -> u32 {
    let mut total = 0;
    for &a in generators.iter().take_while(|&&a| a <= n) {
        let mut m = n;
        while m % a == 0 {
            m /= a;
            total += 1;
        }
    }
    total
}

/// Sign of `n` from the oracle counts.
pub fn lambda_oracle(set: &CoprimeSet, n: u64) -> i8 {
    let count = match set.variant() {
        Variant::Omega => omega_oracle(set.generators(), n),
        Variant::BigOmega => big_omega_oracle(set.generators(), n),
    };
    if count & 1 == 1 {
        -1
    } else {
        1
    }
}

/// Exact signed sum of the oracle sign over `n <= x`.
pub fn mean_oracle(set: &CoprimeSet, x: u64) -> i64 {
    (1..=x).map(|n| lambda_oracle(set, n) as i64).sum()
}

/// Exact signed sum of the product of oracle signs at `a_i n + h_i` over
/// `n <= x`.
pub fn correlate_oracle(set: &CoprimeSet, coeffs: &[u64], shifts: &[u64], x: u64) -> i64 {
    (1..=x)
        .map(|n| {
            coeffs
                .iter()
                .zip(shifts)
                .map(|(&a, &h)| lambda_oracle(set, a * n + h) as i64)
                .product::<i64>()
        })
        .sum()
}

fn draw_unused<R: Rng>(rng: &mut R, small: &[u64], used: &mut [bool]) -> Option<u64> {
    for _ in 0..64 {
        let i = rng.random_range(0..small.len());
        if !used[i] {
            used[i] = true;
            return Some(small[i]);
        }
    }
    None
}

/// Draws a random valid set with a handful of composite generators (mixed
/// shapes: products of two or three primes, prime squares and cubes) and a
/// batch of primes, all pairwise coprime by construction. Generators stay
/// within `x_max`, which must be at least 100.
pub fn random_coprime_set<R: Rng>(rng: &mut R, x_max: u64, variant: Variant) -> CoprimeSet {
    assert!(x_max >= 100, "random sets need room for composites");
    let small = sieve_primes(100);
    let pool = sieve_primes(x_max.min(50_000));
    let mut used = vec![false; small.len()];
    let mut generators: Vec<u64> = Vec::new();

    let n_composites = rng.random_range(1..=3);
    for _ in 0..n_composites {
        let shape = rng.random_range(0..4u32);
        let candidate = match shape {
            0 => draw_unused(rng, &small, &mut used)
                .zip(draw_unused(rng, &small, &mut used))
                .and_then(|(p, q)| p.checked_mul(q)),
            1 => {
                let p = draw_unused(rng, &small, &mut used);
                let q = draw_unused(rng, &small, &mut used);
                let r = draw_unused(rng, &small, &mut used);
                match (p, q, r) {
                    (Some(p), Some(q), Some(r)) => {
                        p.checked_mul(q).and_then(|pq| pq.checked_mul(r))
                    }
                    _ => None,
                }
            }
            2 => draw_unused(rng, &small, &mut used).and_then(|p| p.checked_mul(p)),
            _ => draw_unused(rng, &small, &mut used)
                .and_then(|p| p.checked_mul(p).and_then(|p2| p2.checked_mul(p))),
        };
        if let Some(c) = candidate {
            if c <= x_max && !generators.contains(&c) {
                generators.push(c);
            }
        }
    }

    let n_primes = rng.random_range(4..=12);
    let mut added = 0;
    while added < n_primes {
        let i = rng.random_range(0..pool.len());
        let p = pool[i];
        // skip primes consumed by a composite or already chosen
        if let Ok(j) = small.binary_search(&p) {
            if used[j] {
                continue;
            }
            used[j] = true;
        }
        if generators.contains(&p) {
            continue;
        }
        generators.push(p);
        added += 1;
    }

    CoprimeSet::validate(generators, variant, format!("random[{variant}]"), x_max)
        .expect("random construction keeps pairwise coprimality")
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn oracle_counts_small_cases() {
        let gens = [6u64, 5, 7, 11];
        assert_eq!(omega_oracle(&gens, 12), 1);
        assert_eq!(omega_oracle(&gens, 35), 2);
        assert_eq!(big_omega_oracle(&gens, 36), 2);
        assert_eq!(big_omega_oracle(&gens, 1), 0);
        assert_eq!(omega_oracle(&gens, 1), 0);
    }

    #[test]
    fn random_sets_are_valid_and_mixed() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let mut saw_composite = false;
        for i in 0..20 {
            let variant = if i % 2 == 0 {
                Variant::Omega
            } else {
                Variant::BigOmega
            };
            let set = random_coprime_set(&mut rng, 10_000, variant);
            assert!(!set.generators().is_empty());
            assert!(set.generators().iter().all(|&g| (2..=10_000).contains(&g)));
            saw_composite |= set
                .generators()
                .iter()
                .any(|&g| !crate::primes::is_prime(g));
        }
        assert!(saw_composite, "expected at least one composite generator");
    }

    #[test]
    fn random_sets_are_reproducible() {
        let a = random_coprime_set(&mut ChaCha8Rng::seed_from_u64(9), 10_000, Variant::Omega);
        let b = random_coprime_set(&mut ChaCha8Rng::seed_from_u64(9), 10_000, Variant::Omega);
        assert_eq!(a.generators(), b.generators());
    }
}
