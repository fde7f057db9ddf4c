//! Isogeny-cycle model: fixture-backed class-group actions on j-invariants
//! and the cyclic association scheme with its spectral data and
//! continuous-time walk unitaries.

mod action;
mod association;
mod export;
mod spectral;

pub use action::{compose_actions, load_action_table, ActionTable, CycleAction, FixtureFile};
pub use association::{adjacency, intersection_numbers, num_classes, scheme, IntersectionTable, SchemeMatrix};
pub use export::{export_scheme, export_table, CycleSelection, GraphFormat};
pub use spectral::{commutator_norm, eigenvalue, product_walk, spectral, walk_unitary, SpectralData};

pub use action::ceil_log2;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SchemeError {
    #[error("cannot read fixture: {0}")]
    Io(String),
    #[error("malformed fixture: {0}")]
    Parse(String),
    #[error("invalid fixture: {0}")]
    Invalid(String),
    #[error("cycle {cycle} is not a permutation of J: {repeated} appears twice")]
    NotPermutation { cycle: String, repeated: u64 },
    #[error("cycle {cycle} does not start at j0 = {j0}")]
    BasePoint { cycle: String, j0: u64 },
    #[error("unknown cycle {0:?}")]
    UnknownCycle(String),
    #[error("actions belong to different tables")]
    TableMismatch,
    #[error("scheme order {0} is below 3")]
    OrderTooSmall(usize),
    #[error("class {class} out of range for order {order}")]
    ClassOutOfRange { class: usize, order: usize },
    #[error("walk time {0} is not finite")]
    NonFiniteTime(f64),
    #[error("unknown graph format {0:?} (expected dot or csv)")]
    UnknownFormat(String),
}
