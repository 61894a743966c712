//! Primality, prime enumeration and integer factorization helpers.
//!
//! Everything here is deterministic: the Miller–Rabin test uses a fixed
//! base set that is exact for all 64-bit inputs.

/// Witnesses that make Miller–Rabin deterministic for every `u64`.
const MR_BASES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];

fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc = 1u64;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

/// Deterministic Miller–Rabin primality test, exact for all `u64`.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n == p {
            return true;
        }
        if n % p == 0 {
            return false;
        }
    }
    let d = n - 1;
    let s = d.trailing_zeros();
    let d = d >> s;
    'outer: for &a in &MR_BASES {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'outer;
            }
        }
        return false;
    }
    true
}

/// All primes `<= limit`, ascending, via an odd-only sieve of Eratosthenes.
pub fn sieve_primes(limit: u64) -> Vec<u64> {
    if limit < 2 {
        return Vec::new();
    }
    if limit < 3 {
        return vec![2];
    }
    // index i represents the odd number 2i + 3
    let n_odd = ((limit - 3) / 2 + 1) as usize;
    let mut composite = vec![0u64; n_odd / 64 + 1];
    let is_set = |bits: &[u64], i: usize| bits[i >> 6] >> (i & 63) & 1 == 1;
    let mut primes = Vec::with_capacity(if limit > 16 {
        (limit as f64 / (limit as f64).ln() * 1.2) as usize
    } else {
        8
    });
    primes.push(2);
    let mut i = 0usize;
    while (2 * i + 3) * (2 * i + 3) <= limit as usize {
        if !is_set(&composite, i) {
            let p = 2 * i + 3;
            let mut j = (p * p - 3) / 2;
            while j < n_odd {
                composite[j >> 6] |= 1 << (j & 63);
                j += p;
            }
        }
        i += 1;
    }
    for i in 0..n_odd {
        if !is_set(&composite, i) {
            primes.push(2 * i as u64 + 3);
        }
    }
    primes
}

/// Smallest prime factor of `n >= 2`.
pub fn smallest_prime_factor(n: u64) -> u64 {
    debug_assert!(n >= 2);
    for p in [2u64, 3, 5] {
        if n % p == 0 {
            return p;
        }
    }
    // 6k +/- 1 wheel
    let mut d = 7u64;
    let mut step = 4u64; // alternates 4, 2
    while d * d <= n {
        if n % d == 0 {
            return d;
        }
        d += step;
        step = 6 - step;
    }
    n
}

/// Prime factorization of `n >= 1` as `(prime, exponent)` pairs, ascending.
pub fn factorize(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    if n < 2 {
        return out;
    }
    for p in [2u64, 3, 5] {
        if n % p == 0 {
            let mut e = 0;
            while n % p == 0 {
                n /= p;
                e += 1;
            }
            out.push((p, e));
        }
    }
    let mut d = 7u64;
    let mut step = 4u64;
    while d * d <= n {
        if n % d == 0 {
            let mut e = 0;
            while n % d == 0 {
                n /= d;
                e += 1;
            }
            out.push((d, e));
        }
        d += step;
        step = 6 - step;
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

/// Largest `v` with `base^v | n` (`n >= 1`, `base >= 2`).
pub fn valuation(mut n: u64, base: u64) -> u32 {
    debug_assert!(base >= 2);
    let mut v = 0;
    while n % base == 0 {
        n /= base;
        v += 1;
    }
    v
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn miller_rabin_matches_trial_division_small() {
        let naive = |n: u64| n >= 2 && (2..n).take_while(|d| d * d <= n).all(|d| n % d != 0);
        for n in 0..2000 {
            assert_eq!(is_prime(n), naive(n), "n = {n}");
        }
    }

    #[test]
    fn miller_rabin_known_values() {
        assert!(is_prime(2_147_483_647)); // 2^31 - 1
        assert!(!is_prime(3_215_031_751)); // strong pseudoprime to bases 2,3,5,7
        assert!(is_prime(18_446_744_073_709_551_557)); // largest u64 prime
        assert!(!is_prime(1));
        assert!(!is_prime(0));
    }

    #[test]
    fn sieve_matches_miller_rabin() {
        let primes = sieve_primes(10_000);
        let expected: Vec<u64> = (2..=10_000).filter(|&n| is_prime(n)).collect();
        assert_eq!(primes, expected);
        assert_eq!(primes.len(), 1229);
    }

    #[test]
    fn sieve_edge_bounds() {
        assert!(sieve_primes(0).is_empty());
        assert!(sieve_primes(1).is_empty());
        assert_eq!(sieve_primes(2), vec![2]);
        assert_eq!(sieve_primes(3), vec![2, 3]);
        assert_eq!(sieve_primes(10), vec![2, 3, 5, 7]);
    }

    #[test]
    fn spf_and_factorize() {
        assert_eq!(smallest_prime_factor(6), 2);
        assert_eq!(smallest_prime_factor(35), 5);
        assert_eq!(smallest_prime_factor(49), 7);
        assert_eq!(smallest_prime_factor(97), 97);
        assert_eq!(factorize(1), vec![]);
        assert_eq!(factorize(72), vec![(2, 3), (3, 2)]);
        assert_eq!(factorize(210), vec![(2, 1), (3, 1), (5, 1), (7, 1)]);
        assert_eq!(factorize(9_999_991), vec![(9_999_991, 1)]);
    }

    #[test]
    fn valuation_basics() {
        assert_eq!(valuation(72, 6), 2);
        assert_eq!(valuation(72, 2), 3);
        assert_eq!(valuation(7, 6), 0);
        assert_eq!(valuation(1, 2), 0);
    }
}
