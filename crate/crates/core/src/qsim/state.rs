use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;
use rand::Rng;

use super::{QsimError, RegisterLayout};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

type Matrix2 = [[Complex64; 2]; 2];

/// Dense amplitude vector over a [`RegisterLayout`].
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    amps: Vec<Complex64>,
    layout: RegisterLayout,
}

impl StateVector {
    /// `|0…0⟩`.
    pub fn new(layout: RegisterLayout) -> Self {
        let mut amps = vec![ZERO; layout.dimension()];
        amps[0] = ONE;
        Self { amps, layout }
    }

    /// A state from explicit amplitudes; they must have unit norm.
    pub fn from_amplitudes(layout: RegisterLayout, amps: Vec<Complex64>) -> Result<Self, QsimError> {
        if amps.len() != layout.dimension() {
            return Err(QsimError::DimensionMismatch { expected: layout.dimension(), actual: amps.len() });
        }
        let state = Self { amps, layout };
        let norm = state.norm();
        if (norm - 1.0).abs() > 1e-9 {
            return Err(QsimError::NotNormalized(norm));
        }
        Ok(state)
    }

    /// Basis state holding `values[r]` in each listed register, zero elsewhere.
    pub fn basis(layout: RegisterLayout, values: &[(&str, usize)]) -> Result<Self, QsimError> {
        let mut index = 0;
        for &(name, value) in values {
            let reg = layout.register(name)?;
            if value >> reg.width() != 0 {
                return Err(QsimError::ValueTooWide { value, width: reg.width() });
            }
            index = reg.insert(index, value);
        }
        let mut amps = vec![ZERO; layout.dimension()];
        amps[index] = ONE;
        Ok(Self { amps, layout })
    }

    pub fn layout(&self) -> &RegisterLayout {
        &self.layout
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn num_qubits(&self) -> usize {
        self.layout.total_qubits()
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(Complex64::norm_sqr).sum::<f64>().sqrt()
    }

    fn check_qubit(&self, q: usize) -> Result<(), QsimError> {
        if q >= self.num_qubits() {
            return Err(QsimError::QubitOutOfRange { qubit: q, width: self.num_qubits() });
        }
        Ok(())
    }

    /// Applies `m` to `target` on every basis state whose `controls` are all 1.
    fn apply_controlled_matrix(&mut self, m: &Matrix2, controls: &[usize], target: usize) -> Result<(), QsimError> {
        self.check_qubit(target)?;
        let mut cmask = 0usize;
        for &c in controls {
            self.check_qubit(c)?;
            if c == target {
                return Err(QsimError::ControlIsTarget(c));
            }
            cmask |= 1 << c;
        }
        let tbit = 1usize << target;
        for i in 0..self.amps.len() {
            if i & tbit != 0 || i & cmask != cmask {
                continue;
            }
            let (a0, a1) = (self.amps[i], self.amps[i | tbit]);
            self.amps[i] = m[0][0] * a0 + m[0][1] * a1;
            self.amps[i | tbit] = m[1][0] * a0 + m[1][1] * a1;
        }
        Ok(())
    }

    pub fn apply_h(&mut self, q: usize) -> Result<(), QsimError> {
        let h = Complex64::new(FRAC_1_SQRT_2, 0.0);
        self.apply_controlled_matrix(&[[h, h], [h, -h]], &[], q)
    }

    pub fn apply_x(&mut self, q: usize) -> Result<(), QsimError> {
        self.apply_controlled_matrix(&[[ZERO, ONE], [ONE, ZERO]], &[], q)
    }

    /// `RX(θ) = exp(−iθX/2)`.
    pub fn apply_rx(&mut self, q: usize, theta: f64) -> Result<(), QsimError> {
        let c = Complex64::new((theta / 2.0).cos(), 0.0);
        let s = Complex64::new(0.0, -(theta / 2.0).sin());
        self.apply_controlled_matrix(&[[c, s], [s, c]], &[], q)
    }

    /// `diag(1, e^{iθ})`.
    pub fn apply_phase(&mut self, q: usize, theta: f64) -> Result<(), QsimError> {
        self.apply_mcp(theta, &[], q)
    }

    pub fn apply_cx(&mut self, control: usize, target: usize) -> Result<(), QsimError> {
        self.apply_controlled_matrix(&[[ZERO, ONE], [ONE, ZERO]], &[control], target)
    }

    /// Multi-controlled phase: `e^{iθ}` on states where controls and target are all 1.
    pub fn apply_mcp(&mut self, theta: f64, controls: &[usize], target: usize) -> Result<(), QsimError> {
        self.apply_controlled_matrix(&[[ONE, ZERO], [ZERO, Complex64::from_polar(1.0, theta)]], controls, target)
    }

    /// Applies `f` to every qubit of a register.
    pub fn apply_to_register(
        &mut self,
        register: &str,
        mut f: impl FnMut(&mut Self, usize) -> Result<(), QsimError>,
    ) -> Result<(), QsimError> {
        let qubits: Vec<usize> = self.layout.register(register)?.qubits().collect();
        for q in qubits {
            f(self, q)?;
        }
        Ok(())
    }

    /// Flips bits of a register that is known to hold `|0⟩` so it holds `|value⟩`.
    pub fn load_value(&mut self, register: &str, value: usize) -> Result<(), QsimError> {
        let reg = self.layout.register(register)?.clone();
        if value >> reg.width() != 0 {
            return Err(QsimError::ValueTooWide { value, width: reg.width() });
        }
        for k in 0..reg.width() {
            if (value >> k) & 1 == 1 {
                self.apply_x(reg.qubit(k)?)?;
            }
        }
        Ok(())
    }

    /// Relabels basis states `|i⟩ → |f(i)⟩`. `f` must be a bijection.
    pub(crate) fn remap(&mut self, f: impl Fn(usize) -> usize) {
        let mut out = vec![ZERO; self.amps.len()];
        for (i, &a) in self.amps.iter().enumerate() {
            if a != ZERO {
                out[f(i)] = a;
            }
        }
        self.amps = out;
    }

    /// Marginal distribution of one register, indexed by its value.
    pub fn probabilities(&self, register: &str) -> Result<Vec<f64>, QsimError> {
        self.joint_probabilities(&[register])
    }

    /// Joint marginal of several registers. Outcome index packs the first
    /// listed register in the lowest bits.
    pub fn joint_probabilities(&self, registers: &[&str]) -> Result<Vec<f64>, QsimError> {
        let regs = registers.iter().map(|r| self.layout.register(r)).collect::<Result<Vec<_>, _>>()?;
        let width: usize = regs.iter().map(|r| r.width()).sum();
        let mut probs = vec![0.0; 1 << width];
        for (i, a) in self.amps.iter().enumerate() {
            let p = a.norm_sqr();
            if p == 0.0 {
                continue;
            }
            let mut key = 0;
            let mut shift = 0;
            for r in &regs {
                key |= r.extract(i) << shift;
                shift += r.width();
            }
            probs[key] += p;
        }
        Ok(probs)
    }

    /// Born-rule measurement of the listed registers.
    ///
    /// One uniform draw `u ∈ [0, 1)` picks the first joint outcome (in
    /// increasing packed order) whose cumulative probability exceeds `u`. The
    /// state collapses onto that outcome and is renormalized. Returns one
    /// value per listed register.
    pub fn measure<R: Rng + ?Sized>(&mut self, registers: &[&str], rng: &mut R) -> Result<Vec<usize>, QsimError> {
        let probs = self.joint_probabilities(registers)?;
        let total: f64 = probs.iter().sum();
        let u: f64 = rng.random::<f64>() * total;
        let mut acc = 0.0;
        let mut chosen = None;
        for (k, &p) in probs.iter().enumerate() {
            if p == 0.0 {
                continue;
            }
            acc += p;
            chosen = Some(k);
            if acc > u {
                break;
            }
        }
        let key = chosen.ok_or(QsimError::NotNormalized(0.0))?;

        let regs: Vec<_> = registers.iter().map(|r| self.layout.register(r).cloned()).collect::<Result<_, _>>()?;
        let mut values = Vec::with_capacity(regs.len());
        let mut shift = 0;
        for r in &regs {
            values.push((key >> shift) & ((1 << r.width()) - 1));
            shift += r.width();
        }
        let scale = 1.0 / probs[key].sqrt();
        for (i, a) in self.amps.iter_mut().enumerate() {
            if regs.iter().zip(&values).all(|(r, &v)| r.extract(i) == v) {
                *a *= scale;
            } else {
                *a = ZERO;
            }
        }
        Ok(values)
    }

    /// Global-phase-insensitive overlap `|⟨self|other⟩|²`.
    pub fn fidelity(&self, other: &Self) -> Result<f64, QsimError> {
        if self.layout != other.layout {
            return Err(QsimError::LayoutMismatch);
        }
        let inner: Complex64 = self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).sum();
        Ok(inner.norm_sqr())
    }
}

pub fn fidelity(s1: &StateVector, s2: &StateVector) -> Result<f64, QsimError> {
    s1.fidelity(s2)
}
