//! Property tests: structural invariants over randomized sets, ranges and
//! correlation specs, each checked against an independent route.

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use llike_core::coprime_set::{decompose, square_image, CoprimeSet, Variant};
use llike_core::estimators::{correlate, mean, CorrelationSpec, EstimatorOptions};
use llike_core::oracle;
use llike_core::semigroup;
use llike_core::sieve;

/// Pairwise coprime composites with disjoint prime supports; any subset is
/// a valid composite generator list.
const COMPOSITE_PALETTE: [u64; 8] = [6, 35, 143, 323, 667, 961, 1369, 1763];

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

fn palette_subset(mask: u8) -> Vec<u64> {
    COMPOSITE_PALETTE
        .iter()
        .enumerate()
        .filter(|(i, _)| mask >> i & 1 == 1)
        .map(|(_, &c)| c)
        .collect()
}

proptest! {
    /// Validation accepts exactly the lists the pairwise-gcd oracle accepts.
    #[test]
    fn validate_agrees_with_gcd_oracle(gens in prop::collection::vec(2u64..2000, 1..12)) {
        let mut sorted = gens.clone();
        sorted.sort_unstable();
        let pairwise_ok = (0..sorted.len()).all(|i| {
            (i + 1..sorted.len()).all(|j| gcd(sorted[i], sorted[j]) == 1)
        });
        let validated = CoprimeSet::validate(gens, Variant::Omega, "prop", 1 << 20).is_ok();
        prop_assert_eq!(validated, pairwise_ok);
    }

    /// Enumeration truncated at y equals enumeration of the prefix bound y,
    /// and the element count never exceeds floor(sqrt(x)).
    #[test]
    fn enumeration_prefix_and_cap(mask in 1u8.., x in 2u64..2_000_000, y_frac in 0.0f64..1.0) {
        let composites = palette_subset(mask);
        let full = semigroup::enumerate(&composites, x).unwrap();
        prop_assert!(full.count() <= x.isqrt());
        let y = ((x as f64 * y_frac) as u64).max(1);
        let prefix = semigroup::enumerate(&composites, y).unwrap();
        prop_assert_eq!(full.elements_up_to(y), prefix.elements());
    }

    /// The square image is injective and lands on perfect squares below the
    /// input.
    #[test]
    fn square_image_injective(mask in 1u8.., x in 100u64..1_000_000) {
        let composites = palette_subset(mask);
        let set = CoprimeSet::validate(composites.clone(), Variant::Omega, "prop", x.max(2000))
            .unwrap();
        let d = decompose(&set).unwrap();
        let enumeration = semigroup::enumerate(&composites, x).unwrap();
        let mut images = Vec::new();
        for &m in enumeration.elements() {
            let im = square_image(m, &d).unwrap();
            let r = im.isqrt();
            prop_assert_eq!(r * r, im);
            prop_assert!(im <= m);
            images.push(im);
        }
        let n = images.len();
        images.sort_unstable();
        images.dedup();
        prop_assert_eq!(images.len(), n);
    }

    /// Sign, counts and the divisor-sum expansion agree with the oracle at
    /// a random point of a random set.
    #[test]
    fn pointwise_identities(seed in any::<u64>(), n in 1u64..5000) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let variant = if seed & 1 == 0 { Variant::Omega } else { Variant::BigOmega };
        let set = oracle::random_coprime_set(&mut rng, 5000, variant);
        let d = decompose(&set).unwrap();
        let table = sieve::sieve_range(&set, n, n).unwrap();
        prop_assert_eq!(table.omega_at(n) as u32, oracle::omega_oracle(set.generators(), n));
        prop_assert_eq!(
            table.big_omega_at(n) as u32,
            oracle::big_omega_oracle(set.generators(), n)
        );
        prop_assert_eq!(table.lambda_at(n), oracle::lambda_oracle(&set, n));

        let check = sieve::verify_convolution(&set, &d, n).unwrap();
        prop_assert!(check.holds);

        let (c_part, cofactor) = sieve::extract_c_part(&d, n);
        prop_assert_eq!(c_part * cofactor, n);
        prop_assert!(d.composites().iter().all(|&c| cofactor % c != 0));
        let parts = sieve::lambda_parts(&set, &d, n);
        prop_assert_eq!(parts.lambda_c * parts.lambda_p, oracle::lambda_oracle(&set, n));
    }

    /// Sieving a range in one shot equals sieving any two-piece split.
    #[test]
    fn segment_independence(seed in any::<u64>(), hi in 10u64..4000, cut_frac in 0.0f64..1.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let set = oracle::random_coprime_set(&mut rng, 5000, Variant::BigOmega);
        let whole = sieve::sieve_range(&set, 1, hi).unwrap();
        let cut = ((hi as f64 * cut_frac) as u64).clamp(1, hi - 1);
        let glued = sieve::SieveTable::concat(vec![
            sieve::sieve_range(&set, 1, cut).unwrap(),
            sieve::sieve_range(&set, cut + 1, hi).unwrap(),
        ])
        .unwrap();
        prop_assert_eq!(glued, whole);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// The segmented correlation equals the brute-force double loop, and
    /// the single-factor zero-shift spec reduces to the mean bit-exactly.
    #[test]
    fn correlation_against_brute_force(
        seed in any::<u64>(),
        x in 1u64..400,
        a1 in 1u64..4,
        a2 in 1u64..4,
        h1 in 0u64..6,
        h2 in 0u64..6,
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let set = oracle::random_coprime_set(&mut rng, 5000, Variant::BigOmega);
        let opts = EstimatorOptions::with_segment_len(64);
        if let Ok(spec) = CorrelationSpec::new(vec![a1, a2], vec![h1, h2]) {
            if spec.required_bound(x).unwrap() <= set.bound() {
                let est = correlate(&set, &spec, x, &opts).unwrap();
                let naive = oracle::correlate_oracle(&set, spec.coeffs(), spec.shifts(), x);
                prop_assert_eq!(est.count, naive);
            }
        }
        let m = mean(&set, x, &opts).unwrap();
        let reduced = correlate(&set, &CorrelationSpec::mean(), x, &opts).unwrap();
        prop_assert_eq!(m, reduced);
        prop_assert_eq!(m.count, oracle::mean_oracle(&set, x));
    }

    /// Reciprocal and tail masses: monotone, bounded by the product form,
    /// and the tail obeys both literal caps.
    #[test]
    fn masses_bounded(mask in 1u8.., x in 2u64..500_000, t_frac in 0.0f64..1.0) {
        let composites = palette_subset(mask);
        let enumeration = semigroup::enumerate(&composites, x).unwrap();
        let mass = semigroup::reciprocal_mass(&enumeration);
        prop_assert!(mass.value <= mass.product_bound);
        let t = ((x as f64 * t_frac) as u64).max(1);
        let tail = semigroup::tail_mass(&enumeration, t).unwrap();
        prop_assert!(tail.value <= mass.value);
        let per_term_cap = num::BigRational::new(
            num::BigInt::from(tail.tail_terms),
            num::BigInt::from(t),
        );
        prop_assert!(tail.value <= per_term_cap);
    }
}
