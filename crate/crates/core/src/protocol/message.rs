use std::f64::consts::TAU;

use super::{ProtocolError, Sobol};
use crate::qsim::StateVector;
use crate::scheme::ceil_log2;

/// The key-dependent product circuit `⊗_k R_X(θ_k(j))` hiding a message.
///
/// `θ_k(j) = 2π · x_k` where `x` is Sobol' point `2^K + j` and `K = ⌈log₂ p⌉`.
#[derive(Debug, Clone, PartialEq)]
pub struct MessageCircuit {
    key: u64,
    angles: Vec<f64>,
}

impl MessageCircuit {
    pub fn new(key: u64, p: u64, sobol: &Sobol) -> Result<Self, ProtocolError> {
        let band = 1u64 << ceil_log2(p);
        let point = sobol.point(band + key)?;
        Ok(Self { key, angles: point.into_iter().map(|x| TAU * x).collect() })
    }

    /// Circuit with explicit angles (used for degenerate checks).
    pub fn from_angles(key: u64, angles: Vec<f64>) -> Self {
        Self { key, angles }
    }

    pub fn key(&self) -> u64 {
        self.key
    }

    pub fn width(&self) -> usize {
        self.angles.len()
    }

    pub fn angles(&self) -> &[f64] {
        &self.angles
    }

    fn check(&self, state: &StateVector, register: &str) -> Result<Vec<usize>, ProtocolError> {
        let reg = state.layout().register(register)?;
        if reg.width() != self.width() {
            return Err(ProtocolError::MessageWidth { circuit: self.width(), register: reg.width() });
        }
        Ok(reg.qubits().collect())
    }

    pub fn encrypt(&self, state: &mut StateVector, register: &str) -> Result<(), ProtocolError> {
        for (q, theta) in self.check(state, register)?.into_iter().zip(&self.angles) {
            state.apply_rx(q, *theta)?;
        }
        Ok(())
    }

    pub fn decrypt(&self, state: &mut StateVector, register: &str) -> Result<(), ProtocolError> {
        for (q, theta) in self.check(state, register)?.into_iter().zip(&self.angles) {
            state.apply_rx(q, -*theta)?;
        }
        Ok(())
    }
}
