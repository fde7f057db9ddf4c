//! Small statevector engine with the gate set the routing protocol uses.
//!
//! Registers are laid out in declaration order, each contributing its bits
//! contiguously and little-endian, so the first register sits in the lowest
//! bits of the basis index. Permutation oracles are applied as index remaps,
//! never as dense matrices.

mod grover;
mod layout;
mod permutation;
mod state;

pub use grover::{exact_rotation_angle, FilterOutcome};
pub use layout::{format_bits, parse_bits, Register, RegisterLayout};
pub use permutation::{MapperSchedule, PermutationGate};
pub use state::{fidelity, StateVector};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QsimError {
    #[error("layout has no qubits")]
    EmptyLayout,
    #[error("{requested} qubits exceed the guard of {guard}")]
    TooManyQubits { requested: usize, guard: usize },
    #[error("duplicate register {0:?}")]
    DuplicateRegister(String),
    #[error("unknown register {0:?}")]
    UnknownRegister(String),
    #[error("qubit {qubit} out of range for width {width}")]
    QubitOutOfRange { qubit: usize, width: usize },
    #[error("qubit {0} is both control and target")]
    ControlIsTarget(usize),
    #[error("value {value} does not fit in {width} bits")]
    ValueTooWide { value: usize, width: usize },
    #[error("expected {expected} entries, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error("state norm {0} is not 1")]
    NotNormalized(f64),
    #[error("states have different layouts")]
    LayoutMismatch,
    #[error("map is not a bijection")]
    NotBijective,
    #[error("gate width {gate} does not match register width {register}")]
    WidthMismatch { gate: usize, register: usize },
    #[error("Ω = {omega} outside 1..={size}")]
    OmegaOutOfRange { omega: usize, size: usize },
    #[error("grover filter precondition: {0}")]
    FilterPrecondition(String),
}
