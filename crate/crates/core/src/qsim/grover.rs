use num_complex::Complex64;

use super::{QsimError, StateVector};

/// Marginals within this distance of uniform count as a uniform superposition.
const UNIFORM_TOLERANCE: f64 = 1e-9;

/// Outcome of [`grover_filter`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FilterOutcome {
    /// `Ω = 2^Q`: nothing to remove.
    Skipped,
    /// One exact rotation with phase `θ = arccos(1 − 2^Q / 2Ω)`.
    Rotated { theta: f64 },
}

/// The exact-rotation phase for `Ω` marked states out of `2^Q`.
pub fn exact_rotation_angle(index_width: usize, omega: usize) -> f64 {
    (1.0 - (1usize << index_width) as f64 / (2.0 * omega as f64)).acos()
}

impl StateVector {
    /// Flips `ancilla` on every basis state whose `index` value is below `omega`.
    /// Self-inverse.
    pub fn comparator_mark(&mut self, omega: usize, index: &str, ancilla: usize) -> Result<(), QsimError> {
        let reg = self.layout().register(index)?.clone();
        let size = 1usize << reg.width();
        if omega == 0 || omega > size {
            return Err(QsimError::OmegaOutOfRange { omega, size });
        }
        if ancilla >= self.num_qubits() || reg.qubits().any(|q| q == ancilla) {
            return Err(QsimError::QubitOutOfRange { qubit: ancilla, width: self.num_qubits() });
        }
        let abit = 1usize << ancilla;
        self.remap(|i| if reg.extract(i) < omega { i ^ abit } else { i });
        Ok(())
    }

    /// Removes the index values `≥ Ω` from a uniform superposition over the
    /// `Q`-qubit `index` register with a single exact Grover iteration:
    /// comparator, phase `θ` on the ancilla, comparator again, then the
    /// `θ`-phase diffusion `H X mcp(θ) X H`. Requires `2^{Q−1} < Ω ≤ 2^Q`, a
    /// uniform index marginal and the ancilla in `|0⟩`.
    pub fn grover_filter(&mut self, omega: usize, index: &str, ancilla: usize) -> Result<FilterOutcome, QsimError> {
        let reg = self.layout().register(index)?.clone();
        let q = reg.width();
        let size = 1usize << q;
        if omega == 0 || omega > size {
            return Err(QsimError::OmegaOutOfRange { omega, size });
        }
        if omega == size {
            return Ok(FilterOutcome::Skipped);
        }
        if 2 * omega <= size {
            return Err(QsimError::FilterPrecondition(format!("Ω = {omega} must exceed half of 2^{q} = {size}")));
        }
        let marginal = self.probabilities(index)?;
        if marginal.iter().any(|p| (p - 1.0 / size as f64).abs() > UNIFORM_TOLERANCE) {
            return Err(QsimError::FilterPrecondition("index register is not uniform".into()));
        }
        if self.qubit_one_probability(ancilla)? > UNIFORM_TOLERANCE {
            return Err(QsimError::FilterPrecondition("ancilla is not |0⟩".into()));
        }

        let theta = exact_rotation_angle(q, omega);
        self.comparator_mark(omega, index, ancilla)?;
        self.apply_phase(ancilla, theta)?;
        self.comparator_mark(omega, index, ancilla)?;

        let qubits: Vec<usize> = reg.qubits().collect();
        for &b in &qubits {
            self.apply_h(b)?;
            self.apply_x(b)?;
        }
        let (top, rest) = qubits.split_last().expect("Q ≥ 1 whenever Ω < 2^Q");
        self.apply_mcp(theta, rest, *top)?;
        for &b in &qubits {
            self.apply_x(b)?;
            self.apply_h(b)?;
        }
        Ok(FilterOutcome::Rotated { theta })
    }

    /// Directly writes `(1/√Ω) Σ_{i<Ω} |i⟩` into `index`, keeping every other
    /// register in its `|0⟩` component. Only valid on `|0…0⟩`.
    pub fn prepare_uniform_prefix(&mut self, omega: usize, index: &str) -> Result<(), QsimError> {
        let reg = self.layout().register(index)?.clone();
        let size = 1usize << reg.width();
        if omega == 0 || omega > size {
            return Err(QsimError::OmegaOutOfRange { omega, size });
        }
        if (self.amplitudes()[0].norm_sqr() - 1.0).abs() > UNIFORM_TOLERANCE {
            return Err(QsimError::FilterPrecondition("direct preparation needs |0…0⟩".into()));
        }
        let amp = Complex64::new(1.0 / (omega as f64).sqrt(), 0.0);
        let mut amps = vec![Complex64::new(0.0, 0.0); self.amplitudes().len()];
        for i in 0..omega {
            amps[reg.insert(0, i)] = amp;
        }
        *self = StateVector::from_amplitudes(self.layout().clone(), amps)?;
        Ok(())
    }

    pub(crate) fn qubit_one_probability(&self, q: usize) -> Result<f64, QsimError> {
        if q >= self.num_qubits() {
            return Err(QsimError::QubitOutOfRange { qubit: q, width: self.num_qubits() });
        }
        Ok(self.amplitudes().iter().enumerate().filter(|(i, _)| (i >> q) & 1 == 1).map(|(_, a)| a.norm_sqr()).sum())
    }
}
