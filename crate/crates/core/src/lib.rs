//! Sign functions of the form `(-1)^count`, where the count tallies how many
//! elements of a pairwise coprime generator set divide `n` (or with what
//! total power multiplicity). The crate materializes generator sets,
//! decomposes them into prime and composite parts, sieves the signs over
//! large ranges in fixed-size segments, and measures mean values and
//! shifted correlation averages together with the structural identities
//! that relate the pieces.

// `n % a == 0` reads as divisibility everywhere in this crate.
#![allow(clippy::manual_is_multiple_of)]

pub mod bounds;
pub mod coprime_set;
pub mod error;
pub mod estimators;
pub mod oracle;
pub mod primes;
pub mod rational;
pub mod report;
pub mod semigroup;
pub mod sieve;
pub mod verify;

pub use coprime_set::{
    builtin_family, decompose, read_generator_file, square_image, CoprimeSet, Decomposition,
    FamilySpec, SetDescriptor, Variant, MAX_SIEVE_BOUND,
};
pub use error::{Error, Result};
