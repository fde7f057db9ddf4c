use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::association::{num_classes, SchemeMatrix};
use super::SchemeError;

/// Eigenvalues and spectral idempotents of the cyclic scheme of order `n`.
///
/// `E_t = (1/n) Σ_k χ_t(k) C^k` with `χ_t(k) = ω^{kt} + ω^{−kt}` for
/// `0 < t < n/2` and `χ_t(k) = ω^{kt}` for `t ∈ {0, n/2}`. Every class
/// satisfies `A_s = Σ_t θ_{s,t} E_t`.
#[derive(Debug, Clone)]
pub struct SpectralData {
    order: usize,
    omega: Complex64,
    eigenvalues: DMatrix<f64>,
    idempotents: Vec<DMatrix<Complex64>>,
}

fn is_boundary(n: usize, s: usize) -> bool {
    s == 0 || 2 * s == n
}

/// `θ_{s,t} = ω^{st} + ω^{−st}`, halved for the self-paired classes
/// `s ∈ {0, n/2}` whose adjacency is `(C^s + C^{−s})/2`.
pub fn eigenvalue(n: usize, s: usize, t: usize) -> f64 {
    let full = 2.0 * (2.0 * PI * (s * t % n) as f64 / n as f64).cos();
    if is_boundary(n, s) {
        full / 2.0
    } else {
        full
    }
}

pub fn spectral(n: usize) -> Result<SpectralData, SchemeError> {
    if n < 3 {
        return Err(SchemeError::OrderTooSmall(n));
    }
    let d = num_classes(n);
    let omega = Complex64::from_polar(1.0, 2.0 * PI / n as f64);
    let eigenvalues = DMatrix::from_fn(d + 1, d + 1, |s, t| eigenvalue(n, s, t));
    let idempotents = (0..=d)
        .map(|t| {
            let coeff: Vec<Complex64> = (0..n)
                .map(|k| {
                    let up = omega.powu((k * t % n) as u32);
                    if is_boundary(n, t) {
                        up
                    } else {
                        up + up.conj()
                    }
                })
                .collect();
            // (C^k)_{x,y} = 1 iff x − y ≡ k
            DMatrix::from_fn(n, n, |x, y| coeff[(x + n - y) % n] / n as f64)
        })
        .collect();
    Ok(SpectralData { order: n, omega, eigenvalues, idempotents })
}

impl SpectralData {
    pub fn order(&self) -> usize {
        self.order
    }

    /// Primitive root `ω = e^{2πi/n}`.
    pub fn omega(&self) -> Complex64 {
        self.omega
    }

    /// `θ_{s,t}` indexed `[(class, idempotent)]`.
    pub fn eigenvalues(&self) -> &DMatrix<f64> {
        &self.eigenvalues
    }

    pub fn idempotents(&self) -> &[DMatrix<Complex64>] {
        &self.idempotents
    }

    /// Rank of `E_t`: 1 for `t ∈ {0, n/2}`, otherwise 2.
    pub fn multiplicity(&self, t: usize) -> usize {
        if is_boundary(self.order, t) {
            1
        } else {
            2
        }
    }

    /// Full spectrum of `A_s` with multiplicities, ascending.
    pub fn spectrum(&self, s: usize) -> Vec<f64> {
        let mut values: Vec<f64> = (0..self.order).map(|t| eigenvalue(self.order, s, t)).collect();
        values.sort_by(f64::total_cmp);
        values
    }

    /// `Σ_t θ_{s,t} E_t`.
    pub fn reconstruct(&self, s: usize) -> DMatrix<Complex64> {
        self.weighted_sum(|t| Complex64::new(self.eigenvalues[(s, t)], 0.0))
    }

    /// `U_{A_s}(t) = e^{−itA_s} = Σ_k e^{−itθ_{s,k}} E_k`.
    pub fn walk_unitary(&self, s: usize, time: f64) -> Result<DMatrix<Complex64>, SchemeError> {
        if s > num_classes(self.order) {
            return Err(SchemeError::ClassOutOfRange { class: s, order: self.order });
        }
        Ok(self.weighted_sum(|k| Complex64::from_polar(1.0, -time * self.eigenvalues[(s, k)])))
    }

    fn weighted_sum(&self, weight: impl Fn(usize) -> Complex64) -> DMatrix<Complex64> {
        self.idempotents
            .iter()
            .enumerate()
            .fold(DMatrix::zeros(self.order, self.order), |acc, (k, e)| acc + e * weight(k))
    }
}

/// Continuous-time walk `e^{−itA}` on one adjacency class.
pub fn walk_unitary(a: &SchemeMatrix, time: f64) -> Result<DMatrix<Complex64>, SchemeError> {
    if !time.is_finite() {
        return Err(SchemeError::NonFiniteTime(time));
    }
    spectral(a.order())?.walk_unitary(a.class(), time)
}

/// Ordered product `U_{s_1}(t_1) · … · U_{s_m}(t_m)` of walks on one scheme.
pub fn product_walk(n: usize, word: &[(usize, f64)]) -> Result<DMatrix<Complex64>, SchemeError> {
    let data = spectral(n)?;
    let mut acc = DMatrix::identity(n, n);
    for &(class, time) in word {
        if !time.is_finite() {
            return Err(SchemeError::NonFiniteTime(time));
        }
        acc *= data.walk_unitary(class, time)?;
    }
    Ok(acc)
}

/// Frobenius norm of `XY − YX`.
pub fn commutator_norm(x: &DMatrix<Complex64>, y: &DMatrix<Complex64>) -> f64 {
    (x * y - y * x).norm()
}
