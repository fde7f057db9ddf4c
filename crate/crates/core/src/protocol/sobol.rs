//! Sobol' points from the Joe–Kuo `new-joe-kuo-6.21201` direction numbers.
//!
//! Coordinate 0 is the van der Corput sequence; coordinates 1.. follow the
//! Joe–Kuo table rows in order. Point `i` is the Gray-code point
//! `x_i = ⊕_{k : bit k of (i ⊕ i>>1)} v_k`, the ordering used by the Joe–Kuo
//! reference generator, so `x_0 = 0` and `x_1 = (½, …, ½)`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::ProtocolError;

const BITS: usize = 32;

/// `(degree s, coefficient bits a, initial m_1..m_s)` for coordinates 1..32.
const JOE_KUO: &[(u32, u32, &[u32])] = &[
    (1, 0, &[1]),
    (2, 1, &[1, 3]),
    (3, 1, &[1, 3, 1]),
    (3, 2, &[1, 1, 1]),
    (4, 1, &[1, 1, 3, 3]),
    (4, 4, &[1, 3, 5, 13]),
    (5, 2, &[1, 1, 5, 5, 17]),
    (5, 4, &[1, 1, 5, 5, 5]),
    (5, 7, &[1, 1, 7, 11, 19]),
    (5, 11, &[1, 1, 5, 1, 1]),
    (5, 13, &[1, 1, 1, 3, 11]),
    (5, 14, &[1, 3, 5, 5, 31]),
    (6, 1, &[1, 3, 3, 9, 7, 49]),
    (6, 13, &[1, 1, 1, 15, 21, 21]),
    (6, 16, &[1, 3, 1, 13, 27, 49]),
    (6, 19, &[1, 1, 1, 15, 7, 5]),
    (6, 22, &[1, 3, 1, 15, 13, 25]),
    (6, 25, &[1, 1, 5, 5, 19, 61]),
    (7, 1, &[1, 3, 7, 11, 23, 15, 103]),
    (7, 4, &[1, 3, 7, 13, 13, 15, 69]),
    (7, 7, &[1, 1, 3, 13, 7, 35, 63]),
    (7, 8, &[1, 3, 5, 9, 1, 25, 53]),
    (7, 14, &[1, 3, 1, 13, 9, 35, 107]),
    (7, 19, &[1, 3, 1, 5, 27, 61, 31]),
    (7, 21, &[1, 1, 5, 11, 19, 41, 61]),
    (7, 28, &[1, 3, 5, 3, 3, 13, 69]),
    (7, 31, &[1, 1, 7, 13, 1, 19, 1]),
    (7, 32, &[1, 3, 7, 5, 13, 19, 59]),
    (7, 37, &[1, 1, 3, 9, 25, 29, 41]),
    (7, 41, &[1, 3, 5, 13, 23, 1, 55]),
    (7, 42, &[1, 3, 7, 3, 13, 59, 17]),
];

/// Number of coordinates available.
pub const MAX_DIMENSION: usize = JOE_KUO.len() + 1;

fn directions(dim: usize) -> [u32; BITS] {
    let mut v = [0u32; BITS];
    if dim == 0 {
        for (k, vk) in v.iter_mut().enumerate() {
            *vk = 1 << (BITS - 1 - k);
        }
        return v;
    }
    let (s, a, m) = JOE_KUO[dim - 1];
    let s = s as usize;
    for k in 0..s.min(BITS) {
        v[k] = m[k] << (BITS - 1 - k);
    }
    for k in s..BITS {
        v[k] = v[k - s] ^ (v[k - s] >> s);
        for t in 1..s {
            if (a >> (s - 1 - t)) & 1 == 1 {
                v[k] ^= v[k - t];
            }
        }
    }
    v
}

/// A fixed-dimension Sobol' sequence, optionally digitally shifted.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sobol {
    directions: Vec<[u32; BITS]>,
    shift: Vec<u32>,
}

impl Sobol {
    pub fn new(dims: usize) -> Result<Self, ProtocolError> {
        if dims == 0 || dims > MAX_DIMENSION {
            return Err(ProtocolError::SobolDimension { requested: dims, max: MAX_DIMENSION });
        }
        Ok(Self { directions: (0..dims).map(directions).collect(), shift: vec![0; dims] })
    }

    /// Scrambled variant: each coordinate XORed with a ChaCha8-drawn 32-bit
    /// word (random digital shift), seeded by `seed`.
    pub fn with_digital_shift(dims: usize, seed: u64) -> Result<Self, ProtocolError> {
        let mut sobol = Self::new(dims)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        sobol.shift = (0..dims).map(|_| rng.random::<u32>()).collect();
        Ok(sobol)
    }

    pub fn dims(&self) -> usize {
        self.directions.len()
    }

    pub fn point(&self, index: u64) -> Result<Vec<f64>, ProtocolError> {
        let index = u32::try_from(index).map_err(|_| ProtocolError::SobolIndex(index))?;
        let gray = index ^ (index >> 1);
        Ok(self
            .directions
            .iter()
            .zip(&self.shift)
            .map(|(v, shift)| {
                let x = (0..BITS).filter(|k| (gray >> k) & 1 == 1).fold(*shift, |acc, k| acc ^ v[k]);
                x as f64 / (1u64 << BITS) as f64
            })
            .collect())
    }
}

/// Point `index` of the unscrambled `dim`-dimensional sequence.
pub fn sobol_point(index: u64, dim: usize) -> Result<Vec<f64>, ProtocolError> {
    Sobol::new(dim)?.point(index)
}
