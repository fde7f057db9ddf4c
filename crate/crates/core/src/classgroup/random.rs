use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{ClassGroupError, QuadraticForm};

/// Largest group order accepted by the trial-division primality check.
pub const PRIMALITY_GUARD: u64 = 1 << 40;

/// Deterministic trial division, valid up to [`PRIMALITY_GUARD`].
pub fn is_prime(n: u64) -> Result<bool, ClassGroupError> {
    if n > PRIMALITY_GUARD {
        return Err(ClassGroupError::PrimalityGuard { value: n, guard: PRIMALITY_GUARD });
    }
    if n < 2 {
        return Ok(false);
    }
    let mut d = 2u64;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return Ok(false);
        }
        d += 1;
    }
    Ok(true)
}

/// Inputs for sampling a random class `g^e` from a random word.
#[derive(Debug, Clone, PartialEq)]
pub struct RandomElementParams {
    pub generator: QuadraticForm,
    /// Prime order `r` of the cyclic group generated by `generator`.
    pub order: u64,
    /// Number `k` of exponents drawn from `(Z/rZ)^×`.
    pub num_exponents: usize,
    /// Word length `m`.
    pub word_length: usize,
    pub seed: u64,
}

impl RandomElementParams {
    /// Default multiplier `C` in `k = C⌈ln r⌉`.
    pub const DEFAULT_EXPONENT_CONSTANT: usize = 3;

    /// Parameters with `k = C⌈ln r⌉` for `C = 3`.
    pub fn with_default_exponents(generator: QuadraticForm, order: u64, word_length: usize, seed: u64) -> Self {
        let num_exponents = Self::default_num_exponents(order, Self::DEFAULT_EXPONENT_CONSTANT);
        Self { generator, order, num_exponents, word_length, seed }
    }

    pub fn default_num_exponents(order: u64, constant: usize) -> usize {
        let log = (order as f64).ln().ceil().max(1.0) as usize;
        constant * log
    }
}

/// A sampled class together with the draws that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct RandomElement {
    pub exponent: u64,
    pub exponents: Vec<u64>,
    pub word: Vec<usize>,
    pub element: QuadraticForm,
}

/// Samples `c_1..c_k` uniformly from `{1, …, r−1}`, then a word
/// `s_1..s_m` uniformly from `{0, …, k−1}`, and returns
/// `e = Σ c_{s_ℓ} mod r` with `generator^e`.
///
/// Draws come from ChaCha8 seeded through `seed_from_u64(seed)`: all `k`
/// exponents first, then the `m` word letters, each via `random_range`.
pub fn random_element(params: &RandomElementParams) -> Result<RandomElement, ClassGroupError> {
    let r = params.order;
    if !is_prime(r)? {
        return Err(ClassGroupError::NotPrime(r));
    }
    if params.num_exponents == 0 {
        return Err(ClassGroupError::InvalidParams("num_exponents must be at least 1"));
    }
    if params.word_length == 0 {
        return Err(ClassGroupError::InvalidParams("word_length must be at least 1"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let exponents: Vec<u64> = (0..params.num_exponents).map(|_| rng.random_range(1..r)).collect();
    let word: Vec<usize> = (0..params.word_length).map(|_| rng.random_range(0..params.num_exponents)).collect();
    let exponent = word.iter().fold(0u128, |acc, &s| (acc + exponents[s] as u128) % r as u128) as u64;
    let element = params.generator.pow(exponent)?;
    Ok(RandomElement { exponent, exponents, word, element })
}
