//! Enumeration of the multiplicative semigroup generated by the composite
//! part of a set, truncated at a bound, plus its summatory quantities.
//!
//! The enumeration is a DFS over exponent vectors with checked products;
//! the element count can never exceed floor(sqrt(bound)) because replacing
//! each generator by the square of its smallest prime factor embeds the
//! semigroup injectively into the perfect squares.

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{One, ToPrimitive, Zero};
use serde::Serialize;
use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::primes::is_prime;

/// Ascending elements of the truncated semigroup with their sparse exponent
/// vectors over the generators.
#[derive(Clone, Debug)]
pub struct SemigroupEnumeration {
    bound: u64,
    generators: Vec<u64>,
    elements: Vec<u64>,
    exponents: Vec<Vec<(u32, u32)>>, // (generator index, exponent), parallel to elements
}

impl SemigroupEnumeration {
    pub fn bound(&self) -> u64 {
        self.bound
    }

    pub fn generators(&self) -> &[u64] {
        &self.generators
    }

    pub fn elements(&self) -> &[u64] {
        &self.elements
    }

    pub fn count(&self) -> u64 {
        self.elements.len() as u64
    }

    pub fn exponents_of(&self, index: usize) -> &[(u32, u32)] {
        &self.exponents[index]
    }

    /// Elements `<= y` as a prefix slice.
    pub fn elements_up_to(&self, y: u64) -> &[u64] {
        let end = self.elements.partition_point(|&e| e <= y);
        &self.elements[..end]
    }

    /// Elements whose exponent vector is 0/1 everywhere (1 included).
    pub fn squarefree_elements(&self) -> Vec<u64> {
        self.elements
            .iter()
            .zip(&self.exponents)
            .filter(|(_, exps)| exps.iter().all(|&(_, e)| e == 1))
            .map(|(&el, _)| el)
            .collect()
    }

    pub fn iter_with_exponents(&self) -> impl Iterator<Item = (u64, &[(u32, u32)])> {
        self.elements
            .iter()
            .zip(&self.exponents)
            .map(|(&el, exps)| (el, exps.as_slice()))
    }
}

/// Enumerates every product of the composite generators that stays within
/// `bound`, 1 included. Generators must be pairwise coprime composites.
pub fn enumerate(composites: &[u64], bound: u64) -> Result<SemigroupEnumeration> {
    if bound < 1 {
        return Err(Error::BadParams("bound must be at least 1".into()));
    }
    let mut generators = composites.to_vec();
    generators.sort_unstable();
    generators.dedup();
    if generators.len() != composites.len() {
        return Err(Error::BadParams("duplicate composite generators".into()));
    }
    for &c in &generators {
        if c < 2 {
            return Err(Error::ElementTooSmall { value: c });
        }
        if is_prime(c) {
            return Err(Error::BadParams(format!(
                "generator {c} is prime; the semigroup part takes composites only"
            )));
        }
    }
    for i in 0..generators.len() {
        for j in i + 1..generators.len() {
            if gcd(generators[i], generators[j]) != 1 {
                return Err(Error::NotCoprime {
                    a: generators[i],
                    b: generators[j],
                });
            }
        }
    }

    let mut elements = Vec::new();
    let mut exponents = Vec::new();
    let mut stack: Vec<(u32, u32)> = Vec::new();
    dfs(
        &generators,
        bound,
        0,
        1,
        &mut stack,
        &mut elements,
        &mut exponents,
    );

    let mut order: Vec<usize> = (0..elements.len()).collect();
    order.sort_unstable_by_key(|&i| elements[i]);
    let elements: Vec<u64> = order.iter().map(|&i| elements[i]).collect();
    let exponents: Vec<Vec<(u32, u32)>> = order
        .iter()
        .map(|&i| std::mem::take(&mut exponents[i]))
        .collect();

    assert!(
        elements.len() as u64 <= bound.isqrt(),
        "semigroup truncation exceeded the square-root cap: {} elements for bound {}",
        elements.len(),
        bound
    );
    Ok(SemigroupEnumeration {
        bound,
        generators,
        elements,
        exponents,
    })
}

fn dfs(
    gens: &[u64],
    bound: u64,
    start: usize,
    product: u64,
    stack: &mut Vec<(u32, u32)>,
    elements: &mut Vec<u64>,
    exponents: &mut Vec<Vec<(u32, u32)>>,
) {
    elements.push(product);
    exponents.push(stack.clone());
    for j in start..gens.len() {
        let g = gens[j];
        let mut p = product;
        let mut e = 0u32;
        loop {
            // A product past u64::MAX is past any in-scope bound: prune.
            p = match p.checked_mul(g) {
                Some(v) if v <= bound => v,
                _ => break,
            };
            e += 1;
            stack.push((j as u32, e));
            dfs(gens, bound, j + 1, p, stack, elements, exponents);
            stack.pop();
        }
    }
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

fn big_rat(num: u64, den: u64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

/// Formats a big rational as `num/den`.
pub fn rational_string(r: &BigRational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

/// Exact reciprocal mass of the truncated semigroup together with the
/// closed-form upper bound `prod_c c/(c-1)` taken over all generators.
#[derive(Clone, Debug, Serialize)]
pub struct MassReport {
    #[serde(serialize_with = "ser_rat")]
    pub value: BigRational,
    #[serde(serialize_with = "ser_rat")]
    pub product_bound: BigRational,
    pub value_f64: f64,
    pub product_bound_f64: f64,
}

fn ser_rat<S: serde::Serializer>(r: &BigRational, s: S) -> std::result::Result<S::Ok, S::Error> {
    serde::Serialize::serialize(&rational_string(r), s)
}

pub fn reciprocal_mass(enumeration: &SemigroupEnumeration) -> MassReport {
    let mut value = BigRational::zero();
    for &el in enumeration.elements() {
        value += big_rat(1, el);
    }
    let mut product_bound = BigRational::one();
    for &c in enumeration.generators() {
        product_bound *= big_rat(c, c - 1);
    }
    let value_f64 = value.to_f64().unwrap_or(f64::NAN);
    let product_bound_f64 = product_bound.to_f64().unwrap_or(f64::NAN);
    MassReport {
        value,
        product_bound,
        value_f64,
        product_bound_f64,
    }
}

pub const MAX_MOMENT_ARITY: u32 = 4;

/// Exact sum of `1/lcm(n_1, .., n_l)` over all `l`-tuples from the
/// truncated semigroup, with the product-form upper bound
/// `prod_{c <= x} (1 + sum_v (v+1)^l / c^v)` evaluated in closed form.
#[derive(Clone, Debug, Serialize)]
pub struct MomentReport {
    pub arity: u32,
    #[serde(serialize_with = "ser_rat")]
    pub value: BigRational,
    #[serde(serialize_with = "ser_rat")]
    pub product_bound: BigRational,
    pub value_f64: f64,
    pub product_bound_f64: f64,
    pub tuple_count: u128,
}

pub fn lcm_moment(composites: &[u64], arity: u32, bound: u64) -> Result<MomentReport> {
    if arity == 0 {
        return Err(Error::BadParams("moment arity must be at least 1".into()));
    }
    if arity > MAX_MOMENT_ARITY {
        return Err(Error::ArityTooLarge {
            arity,
            max: MAX_MOMENT_ARITY,
        });
    }
    let enumeration = enumerate(composites, bound)?;
    let m = enumeration.count() as u128;
    let tuple_count = m.pow(arity);
    // multisets of size l from m elements
    let multisets = binomial(m + arity as u128 - 1, arity as u128);
    if multisets > 50_000_000 {
        return Err(Error::BadParams(format!(
            "lcm moment over {multisets} multisets is too large to enumerate"
        )));
    }

    // Group tuples by their lcm; the number of distinct lcm values is tiny
    // compared to the tuple count, and each group contributes
    // multiplicity / lcm.
    let mut groups: HashMap<u128, u128> = HashMap::new();
    let mut chosen: Vec<usize> = Vec::with_capacity(arity as usize);
    collect_multisets(
        enumeration.elements(),
        arity,
        0,
        1u128,
        &mut chosen,
        &mut groups,
    )?;

    let mut value = BigRational::zero();
    for (lcm, multiplicity) in groups {
        value += BigRational::new(BigInt::from(multiplicity), BigInt::from(lcm));
    }

    let mut product_bound = BigRational::one();
    for &c in enumeration.generators() {
        if c <= bound {
            product_bound *= moment_factor(c, arity);
        }
    }
    let value_f64 = value.to_f64().unwrap_or(f64::NAN);
    let product_bound_f64 = product_bound.to_f64().unwrap_or(f64::NAN);
    Ok(MomentReport {
        arity,
        value,
        product_bound,
        value_f64,
        product_bound_f64,
        tuple_count,
    })
}

/// Walks non-decreasing index tuples, carrying the running lcm, and adds the
/// multiset's permutation count to its lcm group.
fn collect_multisets(
    elements: &[u64],
    arity: u32,
    start: usize,
    lcm_acc: u128,
    chosen: &mut Vec<usize>,
    groups: &mut HashMap<u128, u128>,
) -> Result<()> {
    if chosen.len() == arity as usize {
        *groups.entry(lcm_acc).or_insert(0) += multiset_permutations(chosen, arity);
        return Ok(());
    }
    for i in start..elements.len() {
        let e = elements[i] as u128;
        let g = gcd_u128(lcm_acc, e);
        let next = (lcm_acc / g).checked_mul(e).ok_or(Error::Overflow {
            context: "lcm accumulation",
        })?;
        chosen.push(i);
        collect_multisets(elements, arity, i, next, chosen, groups)?;
        chosen.pop();
    }
    Ok(())
}

fn gcd_u128(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

fn binomial(n: u128, k: u128) -> u128 {
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.saturating_mul(n - i) / (i + 1);
    }
    acc
}

/// Number of distinct orderings of a non-decreasing index multiset.
fn multiset_permutations(chosen: &[usize], arity: u32) -> u128 {
    let mut numer: u128 = 1;
    for i in 1..=arity as u128 {
        numer *= i;
    }
    let mut run = 1u128;
    let mut denom = 1u128;
    for w in chosen.windows(2) {
        if w[0] == w[1] {
            run += 1;
            denom *= run;
        } else {
            run = 1;
        }
    }
    numer / denom
}

/// Closed form of `1 + sum_{v>=1} (v+1)^l z^v` at `z = 1/c`:
/// `A_l(z) / (1-z)^(l+1)` with the Eulerian polynomial `A_l`.
fn moment_factor(c: u64, arity: u32) -> BigRational {
    const EULERIAN: [&[u64]; 4] = [&[1], &[1, 1], &[1, 4, 1], &[1, 11, 11, 1]];
    let coeffs = EULERIAN[arity as usize - 1];
    let z = big_rat(1, c);
    let mut a = BigRational::zero();
    let mut zi = BigRational::one();
    for &coef in coeffs {
        a += BigRational::from(BigInt::from(coef)) * &zi;
        zi *= &z;
    }
    let one_minus_z = BigRational::one() - z;
    let mut denom = BigRational::one();
    for _ in 0..=arity {
        denom *= &one_minus_z;
    }
    a / denom
}

/// Tail of the reciprocal mass past a threshold, with the heuristic
/// comparison value `I(x) / sqrt(T)` reported alongside.
#[derive(Clone, Debug, Serialize)]
pub struct TailReport {
    pub threshold: u64,
    #[serde(serialize_with = "ser_rat")]
    pub value: BigRational,
    pub value_f64: f64,
    /// I(x) / sqrt(T); reported, never asserted.
    pub comparison: f64,
    pub tail_terms: u64,
}

pub fn tail_mass(enumeration: &SemigroupEnumeration, threshold: u64) -> Result<TailReport> {
    if threshold < 1 || threshold > enumeration.bound() {
        return Err(Error::BadParams(format!(
            "threshold {threshold} outside [1, {}]",
            enumeration.bound()
        )));
    }
    let mut value = BigRational::zero();
    let mut tail_terms = 0;
    for &el in enumeration.elements() {
        if el > threshold {
            value += big_rat(1, el);
            tail_terms += 1;
        }
    }
    let total = reciprocal_mass(enumeration);
    let comparison = total.value_f64 / (threshold as f64).sqrt();
    let value_f64 = value.to_f64().unwrap_or(f64::NAN);
    Ok(TailReport {
        threshold,
        value,
        value_f64,
        comparison,
        tail_terms,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn enumerate_powers_of_six() {
        let e = enumerate(&[6], 100).unwrap();
        assert_eq!(e.elements(), &[1, 6, 36]);
        assert_eq!(e.count(), 3);
        assert!(e.count() <= 10);
    }

    #[test]
    fn enumerate_empty_generators() {
        let e = enumerate(&[], 1_000_000).unwrap();
        assert_eq!(e.elements(), &[1]);
        assert_eq!(e.exponents_of(0), &[]);
    }

    #[test]
    fn enumerate_six_and_thirtyfive() {
        // exhaustive products of 6 and 35 up to 250: includes 216 = 6^3
        let e = enumerate(&[6, 35], 250).unwrap();
        assert_eq!(e.elements(), &[1, 6, 35, 36, 210, 216]);
        for (el, exps) in e.iter_with_exponents() {
            let prod: u64 = exps
                .iter()
                .map(|&(i, v)| e.generators()[i as usize].pow(v))
                .product();
            assert_eq!(prod, el);
        }
    }

    #[test]
    fn enumerate_rejects_bad_input() {
        assert!(matches!(
            enumerate(&[6, 10], 100),
            Err(Error::NotCoprime { a: 6, b: 10 })
        ));
        assert!(matches!(enumerate(&[5], 100), Err(Error::BadParams(_))));
        assert!(matches!(enumerate(&[6, 6], 100), Err(Error::BadParams(_))));
        assert!(matches!(
            enumerate(&[1], 100),
            Err(Error::ElementTooSmall { value: 1 })
        ));
    }

    #[test]
    fn prefix_consistency() {
        let full = enumerate(&[6, 35, 143], 100_000).unwrap();
        for y in [1u64, 5, 6, 35, 36, 1000, 99_999] {
            let restricted = enumerate(&[6, 35, 143], y.max(1)).unwrap();
            assert_eq!(full.elements_up_to(y), restricted.elements());
        }
    }

    #[test]
    fn square_root_cap_over_decades() {
        let cases: &[&[u64]] = &[&[6], &[6, 35], &[4, 9, 25, 49], &[12, 55, 91]];
        for composites in cases {
            for exp in 2..=8u32 {
                let x = 10u64.pow(exp);
                let e = enumerate(composites, x).unwrap();
                assert!(
                    e.count() <= x.isqrt(),
                    "C={composites:?} x={x}: {} > {}",
                    e.count(),
                    x.isqrt()
                );
            }
        }
    }

    #[test]
    fn reciprocal_mass_examples() {
        let e = enumerate(&[6], 36).unwrap();
        let m = reciprocal_mass(&e);
        assert_eq!(rational_string(&m.value), "43/36");
        assert_eq!(rational_string(&m.product_bound), "6/5");

        let e = enumerate(&[], 50).unwrap();
        let m = reciprocal_mass(&e);
        assert_eq!(rational_string(&m.value), "1/1");

        let e = enumerate(&[6], 5).unwrap();
        assert_eq!(rational_string(&reciprocal_mass(&e).value), "1/1");
    }

    #[test]
    fn reciprocal_mass_monotone_and_bounded() {
        let composites = [6u64, 35];
        let mut last = BigRational::zero();
        for x in [1u64, 10, 100, 1000, 10_000, 100_000] {
            let e = enumerate(&composites, x).unwrap();
            let m = reciprocal_mass(&e);
            assert!(m.value >= last);
            assert!(m.value <= m.product_bound);
            last = m.value;
        }
    }

    #[test]
    fn lcm_moment_examples() {
        let m = lcm_moment(&[6], 2, 36).unwrap();
        assert_eq!(rational_string(&m.value), "59/36");
        assert_eq!(m.tuple_count, 9);

        let m = lcm_moment(&[], 3, 100).unwrap();
        assert_eq!(rational_string(&m.value), "1/1");

        // arity 1 degenerates to the reciprocal mass
        let m = lcm_moment(&[6], 1, 36).unwrap();
        assert_eq!(rational_string(&m.value), "43/36");

        assert!(matches!(
            lcm_moment(&[6], 5, 36),
            Err(Error::ArityTooLarge { arity: 5, max: 4 })
        ));
        assert!(matches!(lcm_moment(&[6], 0, 36), Err(Error::BadParams(_))));
    }

    #[test]
    fn lcm_moment_matches_naive_tuple_loop() {
        // independent route: all ordered pairs/triples, plain fractions
        let composites = [6u64, 35];
        let e = enumerate(&composites, 300).unwrap();
        for arity in 1..=3u32 {
            let got = lcm_moment(&composites, arity, 300).unwrap();
            let mut naive = BigRational::zero();
            let els = e.elements();
            let mut idx = vec![0usize; arity as usize];
            loop {
                let mut l: u128 = 1;
                for &i in &idx {
                    let v = els[i] as u128;
                    l = l / gcd_u128(l, v) * v;
                }
                naive += BigRational::new(BigInt::from(1), BigInt::from(l));
                let mut pos = arity as usize;
                loop {
                    if pos == 0 {
                        break;
                    }
                    pos -= 1;
                    idx[pos] += 1;
                    if idx[pos] < els.len() {
                        break;
                    }
                    idx[pos] = 0;
                }
                if idx.iter().all(|&i| i == 0) {
                    break;
                }
            }
            assert_eq!(got.value, naive, "arity {arity}");
            assert!(got.value <= got.product_bound);
        }
    }

    #[test]
    fn moment_factor_matches_truncated_series() {
        for arity in 1..=4u32 {
            for c in [6u64, 35, 4] {
                let closed = moment_factor(c, arity).to_f64().unwrap();
                let mut direct = 1.0f64;
                for v in 1..200u32 {
                    direct += ((v + 1) as f64).powi(arity as i32) / (c as f64).powi(v as i32);
                }
                assert!(
                    (closed - direct).abs() < 1e-9,
                    "arity {arity} c {c}: {closed} vs {direct}"
                );
            }
        }
    }

    #[test]
    fn tail_mass_examples() {
        let e = enumerate(&[6], 100).unwrap();
        let t = tail_mass(&e, 6).unwrap();
        assert_eq!(rational_string(&t.value), "1/36");
        assert_eq!(t.tail_terms, 1);

        let t = tail_mass(&e, 100).unwrap();
        assert!(t.value.is_zero());

        // elements above 35 in <{6,35}> up to 250: 36, 210, 216
        let e = enumerate(&[6, 35], 250).unwrap();
        let t = tail_mass(&e, 35).unwrap();
        assert_eq!(rational_string(&t.value), "281/7560");
    }

    #[test]
    fn tail_mass_literal_bounds() {
        let e = enumerate(&[6, 35], 100_000).unwrap();
        let total = reciprocal_mass(&e);
        for threshold in [1u64, 6, 36, 1000] {
            let t = tail_mass(&e, threshold).unwrap();
            assert!(t.value <= total.value);
            // every tail term is below 1/T
            let cap = BigRational::new(BigInt::from(t.tail_terms), BigInt::from(threshold));
            assert!(t.value <= cap);
        }
    }

    #[test]
    fn squarefree_filter() {
        let e = enumerate(&[6, 35], 2000).unwrap();
        assert_eq!(e.squarefree_elements(), vec![1, 6, 35, 210]);
    }
}
