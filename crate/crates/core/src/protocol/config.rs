use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{Chain, ProtocolError, Sobol, MAX_DIMENSION};
use crate::qsim::parse_bits;
use crate::scheme::{load_action_table, ActionTable};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub enum Procedure {
    /// Classical three-plus-party walkthrough.
    Classical,
    /// Index superposition over `Ω` branches starting at offset `ω`.
    Superposed,
    /// The whole cycle in superposition, mapper undone by the receiver.
    FullCycle,
}

impl TryFrom<u8> for Procedure {
    type Error = String;

    fn try_from(n: u8) -> Result<Self, String> {
        match n {
            1 => Ok(Self::Classical),
            3 => Ok(Self::Superposed),
            4 => Ok(Self::FullCycle),
            other => Err(format!("procedure must be 1, 3 or 4, got {other}")),
        }
    }
}

impl From<Procedure> for u8 {
    fn from(p: Procedure) -> u8 {
        match p {
            Procedure::Classical => 1,
            Procedure::Superposed => 3,
            Procedure::FullCycle => 4,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MapperKind {
    /// Index bit `k` controls the `2^k`-th power of the shift.
    #[default]
    RepeatedSquaring,
    /// Index bit `k` controls `2^k` single shifts.
    Naive,
}

/// A chain member: either a bare cycle name (actor named after it, forward
/// shift) or an explicit `{name, cycle, power}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ActorSpec {
    Cycle(String),
    Full {
        name: String,
        #[serde(default)]
        cycle: Option<String>,
        #[serde(default = "default_power")]
        power: i64,
    },
}

impl ActorSpec {
    fn resolve(&self) -> (String, String, i64) {
        match self {
            Self::Cycle(name) => (name.clone(), name.clone(), 1),
            Self::Full { name, cycle, power } => (name.clone(), cycle.clone().unwrap_or_else(|| name.clone()), *power),
        }
    }
}

fn default_power() -> i64 {
    1
}

fn one() -> usize {
    1
}

fn default_message() -> String {
    "0101".into()
}

fn default_procedure() -> Procedure {
    Procedure::Superposed
}

/// A protocol run as read from JSON. The chain lists actors from sender to
/// receiver.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Fixture file; the bundled table when absent. Relative paths resolve
    /// against the config file's directory.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fixture: Option<PathBuf>,
    pub chain: Vec<ActorSpec>,
    /// Receiver's cycle offset `ω`.
    #[serde(default, alias = "omega")]
    pub offset: usize,
    /// Number of superposed branches `Ω`.
    #[serde(default = "one", alias = "Omega")]
    pub span: usize,
    /// Message basis state, most significant bit first.
    #[serde(default = "default_message")]
    pub message: String,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "one")]
    pub shots: usize,
    #[serde(default = "default_procedure")]
    pub procedure: Procedure,
    #[serde(default)]
    pub transmit_index: bool,
    #[serde(default)]
    pub scrambled_sobol: bool,
    #[serde(default)]
    pub sobol_seed: u64,
    #[serde(default)]
    pub mapper: MapperKind,
}

impl RunConfig {
    /// A config over the named cycles with every option at its default.
    pub fn new(chain: &[&str]) -> Self {
        Self {
            fixture: None,
            chain: chain.iter().map(|c| ActorSpec::Cycle(c.to_string())).collect(),
            offset: 0,
            span: 1,
            message: default_message(),
            seed: 0,
            shots: 1,
            procedure: Procedure::Superposed,
            transmit_index: false,
            scrambled_sobol: false,
            sobol_seed: 0,
            mapper: MapperKind::RepeatedSquaring,
        }
    }

    /// The five-actor demonstration: `a → b → c → d → e`, `ω = 2`, `Ω = 5`.
    pub fn demo5(shots: usize, seed: u64) -> Self {
        Self { offset: 2, span: 5, shots, seed, ..Self::new(&["a", "b", "c", "d", "e"]) }
    }

    pub fn from_json_str(text: &str) -> Result<Self, ProtocolError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            ProtocolError::Config { field: path, message: e.into_inner().to_string() }
        })
    }

    /// Reads a config file, resolving a relative fixture path against the
    /// file's directory.
    pub fn load(path: impl AsRef<Path>) -> Result<Self, ProtocolError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| ProtocolError::Io(format!("{}: {e}", path.display())))?;
        let mut config = Self::from_json_str(&text)?;
        if let Some(fixture) = &config.fixture {
            if fixture.is_relative() {
                let base = path.parent().unwrap_or_else(|| Path::new("."));
                config.fixture = Some(base.join(fixture));
            }
        }
        Ok(config)
    }

    pub fn load_table(&self) -> Result<Arc<ActionTable>, ProtocolError> {
        Ok(Arc::new(match &self.fixture {
            Some(path) => load_action_table(path)?,
            None => ActionTable::bundled(),
        }))
    }

    pub fn message_width(&self) -> usize {
        self.message.len()
    }
}

/// A validated config with its table, chain and Sobol' sequence.
#[derive(Debug, Clone)]
pub struct RunContext {
    config: RunConfig,
    chain: Chain,
    sobol: Sobol,
    message: usize,
}

fn invalid(field: &str, message: impl Into<String>) -> ProtocolError {
    ProtocolError::Config { field: field.into(), message: message.into() }
}

impl RunContext {
    pub fn new(config: RunConfig) -> Result<Self, ProtocolError> {
        let table = config.load_table()?;
        Self::with_table(config, table)
    }

    pub fn with_table(config: RunConfig, table: Arc<ActionTable>) -> Result<Self, ProtocolError> {
        let specs: Vec<_> = config.chain.iter().map(ActorSpec::resolve).collect();
        let chain = Chain::new(table.clone(), &specs)?;
        let order = table.order();
        if config.procedure == Procedure::Superposed {
            if config.offset >= order {
                return Err(invalid("offset", format!("ω = {} must be below r = {order}", config.offset)));
            }
            if config.span == 0 || config.span > order - config.offset {
                return Err(invalid("span", format!("Ω = {} must lie in 1..={}", config.span, order - config.offset)));
            }
        }
        if config.shots == 0 {
            return Err(invalid("shots", "at least one shot is required"));
        }
        let width = config.message_width();
        if width == 0 || width > MAX_DIMENSION {
            return Err(invalid("message", format!("width must be 1..={MAX_DIMENSION}, got {width}")));
        }
        let message = parse_bits(&config.message)
            .ok_or_else(|| invalid("message", format!("{:?} is not a bit string", config.message)))?;
        let sobol = if config.scrambled_sobol {
            Sobol::with_digital_shift(width, config.sobol_seed)?
        } else {
            Sobol::new(width)?
        };
        Ok(Self { config, chain, sobol, message })
    }

    pub fn config(&self) -> &RunConfig {
        &self.config
    }

    pub fn chain(&self) -> &Chain {
        &self.chain
    }

    pub fn table(&self) -> &Arc<ActionTable> {
        self.chain.table()
    }

    pub fn sobol(&self) -> &Sobol {
        &self.sobol
    }

    /// Message basis value (bit `k` on message qubit `k`).
    pub fn message(&self) -> usize {
        self.message
    }
}
