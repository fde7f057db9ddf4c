//! Form class group of a negative discriminant.
//!
//! Elements are primitive positive definite binary quadratic forms
//! `ax² + bxy + cy²` with `b² − 4ac = Δ < 0`. Every class has exactly one
//! reduced representative: `|b| ≤ a ≤ c`, with `b ≥ 0` whenever `|b| = a`
//! or `a = c`. All operations return reduced forms.
//!
//! Arithmetic is carried out on [`BigInt`] so no intermediate value can
//! overflow, even though desk-scale discriminants fit comfortably in a word.

mod form;
mod random;

pub use form::{class_number, enumerate_reduced, Discriminant, QuadraticForm, ENUMERATION_GUARD};
pub use random::{is_prime, random_element, RandomElement, RandomElementParams, PRIMALITY_GUARD};

use num_bigint::BigInt;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ClassGroupError {
    #[error("invalid discriminant {0}: must be negative and congruent to 0 or 1 mod 4")]
    InvalidDiscriminant(BigInt),
    #[error("form ({a}, {b}, {c}) is not positive definite")]
    InvalidForm { a: BigInt, b: BigInt, c: BigInt },
    #[error("discriminant mismatch: {left} vs {right}")]
    DiscriminantMismatch { left: BigInt, right: BigInt },
    #[error("|Δ| = {value} exceeds the enumeration guard {guard}")]
    TooLarge { value: BigInt, guard: u64 },
    #[error("group order {0} is not prime")]
    NotPrime(u64),
    #[error("group order {value} exceeds the primality guard {guard}")]
    PrimalityGuard { value: u64, guard: u64 },
    #[error("invalid random element parameters: {0}")]
    InvalidParams(&'static str),
}
