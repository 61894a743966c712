//! Exact and compensated accumulation of reciprocal sums.
//!
//! Partial sums over generator lists stay exact as long as the reduced
//! denominator fits in 128 bits; once that overflows, accumulation switches
//! to Neumaier-compensated floating point and carries an error bound.

use serde::{Deserialize, Serialize};

fn gcd_i128(mut a: i128, mut b: i128) -> i128 {
    a = a.abs();
    b = b.abs();
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

/// Reduced rational on `i128` with overflow-checked arithmetic.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Rat {
    num: i128,
    den: i128, // > 0
}

impl Rat {
    pub const ZERO: Rat = Rat { num: 0, den: 1 };

    pub fn new(num: i128, den: i128) -> Rat {
        assert!(den != 0, "zero denominator");
        let sign = if den < 0 { -1 } else { 1 };
        let g = gcd_i128(num, den).max(1);
        Rat {
            num: sign * num / g,
            den: (den / g).abs(),
        }
    }

    pub fn numer(&self) -> i128 {
        self.num
    }

    pub fn denom(&self) -> i128 {
        self.den
    }

    /// `self + 1/a`, or `None` on 128-bit overflow.
    pub fn checked_add_recip(&self, a: u64) -> Option<Rat> {
        let a = a as i128;
        // self + 1/a = (num*a + den) / (den*a), reduced via g = gcd(den, a)
        let g = gcd_i128(self.den, a);
        let a_red = a / g;
        let num = self.num.checked_mul(a_red)?.checked_add(self.den / g)?;
        let den = self.den.checked_mul(a_red)?;
        let g2 = gcd_i128(num, den).max(1);
        Some(Rat {
            num: num / g2,
            den: den / g2,
        })
    }

    pub fn to_f64(&self) -> f64 {
        self.num as f64 / self.den as f64
    }
}

impl std::fmt::Display for Rat {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}/{}", self.num, self.den)
    }
}

/// Neumaier-compensated float sum tracking a forward error bound.
#[derive(Clone, Copy, Debug, Default)]
pub struct KahanSum {
    sum: f64,
    comp: f64,
    abs_sum: f64,
    terms: u64,
}

impl KahanSum {
    pub fn new() -> KahanSum {
        KahanSum::default()
    }

    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
        self.abs_sum += x.abs();
        self.terms += 1;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }

    pub fn terms(&self) -> u64 {
        self.terms
    }

    /// Conservative bound on the absolute rounding error of `value()`.
    pub fn error_bound(&self) -> f64 {
        // Compensated summation keeps the error near eps * sum(|x|); the
        // factor 4 absorbs the O(n eps^2) tail without tracking n exactly.
        4.0 * f64::EPSILON * self.abs_sum
    }
}

/// A reciprocal partial sum: exact while it fits, compensated float after.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub enum ReciprocalSum {
    Exact {
        #[serde(with = "rat_string")]
        value: (i128, i128),
    },
    Approximate {
        value: f64,
        error_bound: f64,
    },
}

mod rat_string {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(v: &(i128, i128), s: S) -> Result<S::Ok, S::Error> {
        format!("{}/{}", v.0, v.1).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<(i128, i128), D::Error> {
        let s = String::deserialize(d)?;
        let (n, dn) = s
            .split_once('/')
            .ok_or_else(|| serde::de::Error::custom("expected num/den"))?;
        Ok((
            n.parse().map_err(serde::de::Error::custom)?,
            dn.parse().map_err(serde::de::Error::custom)?,
        ))
    }
}

impl ReciprocalSum {
    pub fn to_f64(&self) -> f64 {
        match self {
            ReciprocalSum::Exact { value } => value.0 as f64 / value.1 as f64,
            ReciprocalSum::Approximate { value, .. } => *value,
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, ReciprocalSum::Exact { .. })
    }
}

impl std::fmt::Display for ReciprocalSum {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ReciprocalSum::Exact { value } => write!(f, "{}/{}", value.0, value.1),
            ReciprocalSum::Approximate { value, error_bound } => {
                write!(f, "{value:.17} (+/- {error_bound:.3e})")
            }
        }
    }
}

/// Accumulates `sum 1/a`; downgrades from exact to compensated on overflow.
#[derive(Clone, Debug)]
pub enum RecipAccumulator {
    Exact(Rat),
    Approx(KahanSum),
}

impl Default for RecipAccumulator {
    fn default() -> Self {
        RecipAccumulator::Exact(Rat::ZERO)
    }
}

impl RecipAccumulator {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, a: u64) {
        match self {
            RecipAccumulator::Exact(r) => match r.checked_add_recip(a) {
                Some(next) => *r = next,
                None => {
                    let mut k = KahanSum::new();
                    k.add(r.to_f64());
                    k.add(1.0 / a as f64);
                    *self = RecipAccumulator::Approx(k);
                }
            },
            RecipAccumulator::Approx(k) => k.add(1.0 / a as f64),
        }
    }

    pub fn finish(&self) -> ReciprocalSum {
        match self {
            RecipAccumulator::Exact(r) => ReciprocalSum::Exact {
                value: (r.numer(), r.denom()),
            },
            RecipAccumulator::Approx(k) => ReciprocalSum::Approximate {
                value: k.value(),
                error_bound: k.error_bound(),
            },
        }
    }
}
