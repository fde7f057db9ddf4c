use nalgebra::DMatrix;

use super::SchemeError;

/// One adjacency class `A_s` of the cyclic association scheme of order `n`:
/// `(A_s)_{j,k} = 1` iff `j − k ≡ ±s (mod n)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SchemeMatrix {
    order: usize,
    class: usize,
    entries: DMatrix<f64>,
}

impl SchemeMatrix {
    pub fn order(&self) -> usize {
        self.order
    }

    pub fn class(&self) -> usize {
        self.class
    }

    pub fn entries(&self) -> &DMatrix<f64> {
        &self.entries
    }

    /// Row sum, identical for every row.
    pub fn degree(&self) -> usize {
        class_set(self.order, self.class).len()
    }
}

/// Number of nontrivial classes `d = ⌊n/2⌋`.
pub fn num_classes(n: usize) -> usize {
    n / 2
}

fn check_order(n: usize) -> Result<(), SchemeError> {
    if n < 3 {
        return Err(SchemeError::OrderTooSmall(n));
    }
    Ok(())
}

/// `{s, −s} mod n` as a set: one element when `s ∈ {0, n/2}`.
pub(crate) fn class_set(n: usize, s: usize) -> Vec<usize> {
    let neg = (n - s % n) % n;
    if neg == s % n {
        vec![s % n]
    } else {
        vec![s % n, neg]
    }
}

/// The class index `min(m, n − m)` of a residue `m`.
pub(crate) fn class_of(n: usize, m: i64) -> usize {
    let m = m.rem_euclid(n as i64) as usize;
    m.min(n - m)
}

pub fn adjacency(n: usize, s: usize) -> Result<SchemeMatrix, SchemeError> {
    check_order(n)?;
    if s > num_classes(n) {
        return Err(SchemeError::ClassOutOfRange { class: s, order: n });
    }
    let entries = DMatrix::from_fn(n, n, |j, k| if class_of(n, j as i64 - k as i64) == s { 1.0 } else { 0.0 });
    Ok(SchemeMatrix { order: n, class: s, entries })
}

/// All classes `A_0, …, A_d`.
pub fn scheme(n: usize) -> Result<Vec<SchemeMatrix>, SchemeError> {
    (0..=num_classes(n)).map(|s| adjacency(n, s)).collect()
}

/// Intersection numbers `p_{i,j}(k)` with `A_i A_j = Σ_k p_{i,j}(k) A_k`.
///
/// From `A_s = C^s + C^{−s}` (halved when `s ∈ {0, n/2}`), the coefficient
/// counts pairs `(u, v) ∈ {±i} × {±j}` with `u + v ≡ ±k`, each set taken
/// without repetition. This is the textbook rule "1 iff `i ± j ≡ ±k`" with
/// the multiplicities it misses: `p_{i,i}(0) = 2` for `i ∉ {0, n/2}`, and
/// `p_{i,j}(k) = 2` when both `i + j` and `i − j` land in class `k`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntersectionTable {
    order: usize,
    classes: usize,
    values: Vec<u32>,
}

impl IntersectionTable {
    pub fn order(&self) -> usize {
        self.order
    }

    /// `d + 1`, the number of classes including `A_0`.
    pub fn size(&self) -> usize {
        self.classes
    }

    pub fn get(&self, i: usize, j: usize, k: usize) -> u32 {
        let m = self.classes;
        assert!(i < m && j < m && k < m, "class index out of range");
        self.values[(i * m + j) * m + k]
    }
}

pub fn intersection_numbers(n: usize) -> Result<IntersectionTable, SchemeError> {
    check_order(n)?;
    let m = num_classes(n) + 1;
    let mut values = vec![0u32; m * m * m];
    for i in 0..m {
        for j in 0..m {
            for &u in &class_set(n, i) {
                for &v in &class_set(n, j) {
                    // (A_i A_j)_{k,0} picks out the coefficient of A_k
                    let sum = (u + v) % n;
                    if sum <= n / 2 {
                        values[(i * m + j) * m + sum] += 1;
                    }
                }
            }
        }
    }
    Ok(IntersectionTable { order: n, classes: m, values })
}
