//! Eavesdropper harness: measure-and-resend interception on chosen hops and
//! the endpoint-correlation observation available when the index register
//! travels with the key state.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::protocol::{
    route, run_shot, Chain, Hop, Interceptor, Leg, Observation, Payload, Procedure, ProtocolError, RunConfig,
    RunContext, Transcript, UniformityTest, INDEX, J,
};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InterceptMode {
    /// Measure the handed-over registers in the computational basis and
    /// forward the collapsed state.
    #[default]
    MeasureAndResend,
    /// Read a j-invariant sent in the clear.
    ObserveClassical,
}

/// Which hops an attacker taps, how, and the seed of its own randomness.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InterceptPlan {
    pub hops: Vec<usize>,
    #[serde(default)]
    pub mode: InterceptMode,
    #[serde(default)]
    pub seed: u64,
}

impl InterceptPlan {
    pub fn new(hops: &[usize], mode: InterceptMode, seed: u64) -> Self {
        Self { hops: hops.to_vec(), mode, seed }
    }

    pub fn from_json_str(text: &str) -> Result<Self, ProtocolError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            ProtocolError::Config { field: path, message: e.into_inner().to_string() }
        })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, ProtocolError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| ProtocolError::Io(format!("{}: {e}", path.display())))?;
        Self::from_json_str(&text)
    }

    /// Hops exist on the chain, are distinct, and the mode suits the
    /// procedure.
    pub fn validate(&self, ctx: &RunContext) -> Result<(), ProtocolError> {
        let count = route(ctx.chain()).len();
        if self.hops.is_empty() {
            return Err(ProtocolError::Plan("no hops to intercept".into()));
        }
        let mut seen = BTreeSet::new();
        for &h in &self.hops {
            if h >= count {
                return Err(ProtocolError::Plan(format!("hop {h} outside 0..{count}")));
            }
            if !seen.insert(h) {
                return Err(ProtocolError::Plan(format!("hop {h} listed twice")));
            }
        }
        let classical = ctx.config().procedure == Procedure::Classical;
        match (self.mode, classical) {
            (InterceptMode::ObserveClassical, false) => {
                Err(ProtocolError::Plan("quantum registers cannot be observed without measuring".into()))
            }
            (InterceptMode::MeasureAndResend, true) => {
                Err(ProtocolError::Plan("classical runs carry nothing to measure".into()))
            }
            _ => Ok(()),
        }
    }
}

/// The attacker as a transport hook.
pub struct Eavesdropper {
    hops: BTreeSet<usize>,
    rng: ChaCha8Rng,
}

impl Eavesdropper {
    /// Randomness for `shot` comes from stream `shot` of the plan seed.
    pub fn new(plan: &InterceptPlan, shot: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(plan.seed);
        rng.set_stream(shot);
        Self { hops: plan.hops.iter().copied().collect(), rng }
    }
}

impl Interceptor for Eavesdropper {
    fn intercept(&mut self, hop: &Hop, payload: Payload<'_>) -> Result<Option<Observation>, ProtocolError> {
        if !self.hops.contains(&hop.index) {
            return Ok(None);
        }
        match payload {
            Payload::Classical(j) => Ok(Some(Observation { hop: hop.index, j, index: None })),
            Payload::Quantum { state, registers } => {
                let values = state.measure(registers, &mut self.rng)?;
                let mut obs = Observation { hop: hop.index, j: 0, index: None };
                for (name, v) in registers.iter().zip(values) {
                    match *name {
                        J => obs.j = v as u64,
                        INDEX => obs.index = Some(v as u64),
                        _ => {}
                    }
                }
                Ok(Some(obs))
            }
        }
    }
}

/// The j-invariant seen at every hop when the receiver starts from `start`.
pub fn classical_trace(chain: &Chain, start: u64) -> Vec<u64> {
    let last = chain.len() - 1;
    let mut j = start;
    route(chain)
        .iter()
        .map(|hop| {
            let seen = j;
            let (pos, inverse) = match hop.leg {
                Leg::Outbound => (last - 1 - hop.index, false),
                Leg::Return => (hop.index - last + 1, true),
            };
            let actor = &chain.actors()[pos];
            if !inverse {
                j = actor.shift(j);
            } else if pos < last {
                j = actor.unshift(j);
            }
            seen
        })
        .collect()
}

/// Values the j-register can hold at `hop`, one per superposed branch,
/// sorted.
pub fn expected_support(ctx: &RunContext, hop: usize) -> Vec<u64> {
    let chain = ctx.chain();
    let receiver = chain.receiver();
    let j0 = chain.table().j0();
    let cfg = ctx.config();
    let starts: Vec<u64> = match cfg.procedure {
        Procedure::Classical => vec![receiver.shift(j0)],
        Procedure::Superposed => (0..cfg.span).map(|i| receiver.secret().act(j0, (i + cfg.offset) as i64)).collect(),
        Procedure::FullCycle => (0..chain.table().order()).map(|i| receiver.secret().act(j0, i as i64)).collect(),
    };
    let support: BTreeSet<u64> = starts.iter().map(|&s| classical_trace(chain, s)[hop]).collect();
    support.into_iter().collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HopReport {
    pub hop: usize,
    pub from: String,
    pub to: String,
    /// Observed j-invariant counts.
    pub histogram: BTreeMap<u64, u64>,
    /// Predicted values at this hop.
    pub support: Vec<u64>,
    /// Observations that fell outside `support`.
    pub outside_support: u64,
    /// Counts over `support` against uniform.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub uniformity: Option<UniformityTest>,
}

#[derive(Debug, Clone, Serialize)]
pub struct AttackReport {
    pub config: RunConfig,
    pub plan: InterceptPlan,
    /// First shot's transcript, interceptions included.
    pub transcript: Transcript,
    pub hops: Vec<HopReport>,
    pub expected_key: u64,
    pub recovered_keys: BTreeMap<u64, u64>,
}

impl AttackReport {
    /// The receiver recovered the sender's key on every shot.
    pub fn key_unchanged(&self) -> bool {
        self.recovered_keys.keys().all(|&k| k == self.expected_key)
    }

    pub fn hop(&self, index: usize) -> Option<&HopReport> {
        self.hops.iter().find(|h| h.hop == index)
    }
}

/// Runs every configured shot with the attacker on the planned hops.
pub fn intercept_measure(ctx: &RunContext, plan: &InterceptPlan) -> Result<AttackReport, ProtocolError> {
    plan.validate(ctx)?;
    let mut outcomes = (0..ctx.config().shots as u64)
        .into_par_iter()
        .map(|shot| {
            let mut eve = Eavesdropper::new(plan, shot);
            run_shot(ctx, shot, Some(&mut eve))
        })
        .collect::<Result<Vec<_>, _>>()?;

    let hops = route(ctx.chain());
    let mut planned: Vec<usize> = plan.hops.clone();
    planned.sort_unstable();
    let reports = planned
        .iter()
        .map(|&h| {
            let support = expected_support(ctx, h);
            let mut histogram = BTreeMap::new();
            for obs in outcomes.iter().flat_map(|o| &o.observations).filter(|o| o.hop == h) {
                *histogram.entry(obs.j).or_insert(0u64) += 1;
            }
            let counts: Vec<u64> = support.iter().map(|j| histogram.get(j).copied().unwrap_or(0)).collect();
            let inside: u64 = counts.iter().sum();
            let total: u64 = histogram.values().sum();
            HopReport {
                hop: h,
                from: hops[h].from.clone(),
                to: hops[h].to.clone(),
                uniformity: UniformityTest::from_counts(&counts),
                histogram,
                support,
                outside_support: total - inside,
            }
        })
        .collect();

    let mut recovered_keys = BTreeMap::new();
    for o in &outcomes {
        *recovered_keys.entry(o.recovered_key).or_insert(0u64) += 1;
    }
    let transcript = outcomes.swap_remove(0).transcript;
    transcript.validate()?;
    Ok(AttackReport {
        config: ctx.config().clone(),
        plan: plan.clone(),
        transcript,
        hops: reports,
        expected_key: ctx.chain().sender_key(),
        recovered_keys,
    })
}

/// What an attacker holding both ends of the route learns in one shot.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EndpointCorrelation {
    pub shot: u64,
    /// `(i, j)` leaving the receiver.
    pub first: (u64, u64),
    /// `(i, j)` arriving back at the receiver.
    pub last: (u64, u64),
    /// The remaining hard problem, stated but not attempted.
    pub vectorization: String,
}

impl EndpointCorrelation {
    pub fn same_index(&self) -> bool {
        self.first.0 == self.last.0
    }
}

/// Measures index and j on the first and last hops of one shot. Requires
/// the index register to travel with the key state.
pub fn endpoint_correlation(ctx: &RunContext, seed: u64, shot: u64) -> Result<EndpointCorrelation, ProtocolError> {
    if !ctx.config().transmit_index {
        return Err(ProtocolError::Plan("endpoint correlation needs the index register transmitted".into()));
    }
    if ctx.config().procedure == Procedure::Classical {
        return Err(ProtocolError::Plan("endpoint correlation needs a quantum run".into()));
    }
    let last = route(ctx.chain()).len() - 1;
    let plan = InterceptPlan::new(&[0, last], InterceptMode::MeasureAndResend, seed);
    let mut eve = Eavesdropper::new(&plan, shot);
    let out = run_shot(ctx, shot, Some(&mut eve))?;
    let pick = |hop: usize| -> Result<(u64, u64), ProtocolError> {
        let obs = out
            .observations
            .iter()
            .find(|o| o.hop == hop)
            .ok_or_else(|| ProtocolError::Internal(format!("no observation at hop {hop}")))?;
        let index = obs.index.ok_or_else(|| ProtocolError::Internal("index register not observed".into()))?;
        Ok((index, obs.j))
    };
    let first = pick(0)?;
    let j0 = ctx.table().j0();
    Ok(EndpointCorrelation {
        shot,
        first,
        last: pick(last)?,
        vectorization: format!("find the class m with m * {j0} = {} (Δ = {})", first.1, ctx.table().discriminant()),
    })
}
