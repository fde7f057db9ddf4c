//! Onion-routing engine over the isogeny-cycle model: actor chains with
//! neighbour Diffie–Hellman keys, Sobol'-angle message circuits, and the
//! classical, superposed-index and full-cycle key-transport procedures over
//! an interceptable in-process transport.

mod actor;
mod config;
mod message;
mod procedures;
mod report;
mod sobol;
mod transcript;
mod transport;

pub use actor::{dh_session_key, Actor, Chain, Role, SessionKey};
pub use config::{ActorSpec, MapperKind, Procedure, RunConfig, RunContext};
pub use message::MessageCircuit;
pub use procedures::{
    procedure4_final_state, raw_key, run_procedure1, run_procedure3, run_procedure4, run_shot, uncompute_key,
    ShotOutcome, ANCILLA, INDEX, J, MESSAGE,
};
pub use report::{chi_square_uniform, run, RunReport, ShotStatistics, UniformityTest};
pub use sobol::{sobol_point, Sobol, MAX_DIMENSION};
pub use transcript::{Direction, Entry, Event, Transcript};
pub use transport::{route, Hop, Interceptor, Leg, Observation, Payload};

use thiserror::Error;

use crate::qsim::QsimError;
use crate::scheme::SchemeError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ProtocolError {
    #[error(transparent)]
    Scheme(#[from] SchemeError),
    #[error(transparent)]
    Qsim(#[from] QsimError),
    #[error("cannot read config: {0}")]
    Io(String),
    #[error("config field `{field}`: {message}")]
    Config { field: String, message: String },
    #[error("chain needs at least 3 actors, got {0}")]
    ChainTooShort(usize),
    #[error("actor {0:?} appears twice")]
    DuplicateActor(String),
    #[error("session key between {left} and {right} is asymmetric ({xy} vs {yx})")]
    AsymmetricKey { left: String, right: String, xy: u64, yx: u64 },
    #[error("Sobol' dimension {requested} outside 1..={max}")]
    SobolDimension { requested: usize, max: usize },
    #[error("Sobol' index {0} does not fit in 32 bits")]
    SobolIndex(u64),
    #[error("message circuit width {circuit} does not match register width {register}")]
    MessageWidth { circuit: usize, register: usize },
    #[error("malformed transcript: {0}")]
    Transcript(String),
    #[error("invalid intercept plan: {0}")]
    Plan(String),
    #[error("internal invariant violated: {0}")]
    Internal(String),
}
