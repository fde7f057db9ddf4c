use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::transport::Transport;
use super::{
    route, Chain, Direction, Event, Interceptor, Leg, MapperKind, MessageCircuit, Observation, Payload, Procedure,
    ProtocolError, RunContext, Transcript,
};
use crate::qsim::{
    format_bits, FilterOutcome, MapperSchedule, PermutationGate, QsimError, RegisterLayout, StateVector,
};
use crate::scheme::{ceil_log2, CycleAction};

pub const INDEX: &str = "index";
pub const ANCILLA: &str = "ancilla";
pub const J: &str = "j";
pub const MESSAGE: &str = "message";

/// Ancilla weight on `|1⟩` above this means the filter left it entangled.
const ANCILLA_TOLERANCE: f64 = 1e-6;
/// Minimum probability of the dominant j value after the full-cycle unmapping.
const PRODUCT_TOLERANCE: f64 = 1e-9;

/// Result of one shot of any procedure.
#[derive(Debug, Clone, Serialize)]
pub struct ShotOutcome {
    pub shot: u64,
    /// Receiver's first measurement, register groups `j anc index`.
    pub raw: String,
    pub index: Option<u64>,
    pub measured_j: u64,
    pub recovered_key: u64,
    pub message_fidelity: Option<f64>,
    pub observations: Vec<Observation>,
    #[serde(skip)]
    pub transcript: Transcript,
}

/// `act_receiver^{−(i+ω)}(measured_j)`.
pub fn uncompute_key(index: u64, offset: u64, measured_j: u64, receiver: &CycleAction) -> u64 {
    receiver.act(measured_j, -((index + offset) as i64))
}

/// `|x anc i⟩` formatted as space-separated bit groups, empty groups dropped.
pub fn raw_key(j: u64, j_width: usize, ancilla: u64, index: u64, index_width: usize) -> String {
    [format_bits(j as usize, j_width), format_bits(ancilla as usize, 1), format_bits(index as usize, index_width)]
        .into_iter()
        .filter(|g| !g.is_empty())
        .collect::<Vec<_>>()
        .join(" ")
}

fn oracle(actor: &str, name: &str, direction: Direction, repetitions: u64, key: Option<u64>) -> Event {
    Event::Oracle { actor: actor.into(), oracle: name.into(), direction, repetitions, key }
}

fn mapper_schedule(gate: &PermutationGate, width: usize, kind: MapperKind) -> MapperSchedule {
    match kind {
        MapperKind::RepeatedSquaring => MapperSchedule::repeated_squaring(gate, width),
        MapperKind::Naive => MapperSchedule::naive(gate, width),
    }
}

/// Classical run: the receiver's shift of `j0` travels to the sender
/// collecting every shift, then back while intermediaries and finally the
/// receiver peel theirs, leaving `act_sender(j0)`.
pub fn run_procedure1(chain: &Chain) -> Result<Transcript, ProtocolError> {
    Ok(procedure1(chain, None)?.transcript)
}

fn procedure1(chain: &Chain, interceptor: Option<&mut dyn Interceptor>) -> Result<ShotOutcome, ProtocolError> {
    let mut t = Transcript::new();
    let mut transport = Transport::new(interceptor);
    let receiver = chain.receiver();
    let mut j = receiver.shift(chain.table().j0());
    t.push(oracle(receiver.name(), "shift", Direction::Forward, 1, None));
    let last = chain.len() - 1;
    for hop in route(chain) {
        transport.deliver(&mut t, &hop, Payload::Classical(j), None)?;
        let pos = position(chain, &hop);
        let actor = &chain.actors()[pos];
        match hop.leg {
            Leg::Outbound => {
                j = actor.shift(j);
                t.push(oracle(actor.name(), "shift", Direction::Forward, 1, None));
            }
            Leg::Return => {
                j = actor.unshift(j);
                t.push(oracle(actor.name(), "shift", Direction::Inverse, 1, None));
                if pos == last {
                    t.push(Event::KeyRecovered { actor: actor.name().into(), key: j });
                }
            }
        }
    }
    let n = chain.table().residue_bits();
    Ok(ShotOutcome {
        shot: 0,
        raw: format_bits(j as usize, n),
        index: None,
        measured_j: j,
        recovered_key: j,
        message_fidelity: None,
        observations: transport.into_observations(),
        transcript: t,
    })
}

/// Chain position of the actor receiving `hop`.
fn position(chain: &Chain, hop: &super::Hop) -> usize {
    let l = chain.len();
    match hop.leg {
        Leg::Outbound => l - 2 - hop.index,
        Leg::Return => hop.index - (l - 1) + 1,
    }
}

/// Hadamards on the index register, then the exact filter down to `span`
/// branches (direct preparation if the filter precondition fails).
fn prepare_index(state: &mut StateVector, span: usize, t: &mut Transcript, actor: &str) -> Result<(), ProtocolError> {
    let index: Vec<usize> = state.layout().register(INDEX)?.qubits().collect();
    let ancilla = state.layout().register(ANCILLA)?.qubit(0)?;
    for &q in &index {
        state.apply_h(q)?;
    }
    t.push(oracle(actor, "hadamard", Direction::Forward, index.len() as u64, None));
    match state.grover_filter(span, INDEX, ancilla) {
        Ok(FilterOutcome::Skipped) => {}
        Ok(FilterOutcome::Rotated { .. }) => t.push(oracle(actor, "grover_filter", Direction::Forward, 1, None)),
        Err(QsimError::FilterPrecondition(reason)) => {
            *state = StateVector::new(state.layout().clone());
            state.prepare_uniform_prefix(span, INDEX)?;
            t.push(Event::Note { actor: actor.into(), text: format!("index state prepared directly ({reason})") });
        }
        Err(e) => return Err(e.into()),
    }
    let stray = state.qubit_one_probability(ancilla)?;
    if stray > ANCILLA_TOLERANCE {
        return Err(ProtocolError::Internal(format!("ancilla left entangled with weight {stray}")));
    }
    Ok(())
}

/// Runs every hop on the key state, with shifts on the way out and peeling
/// plus message re-wrapping on the way back. Returns the message state as
/// the receiver holds it after stripping the last transport layer.
fn travel(
    ctx: &RunContext,
    state: &mut StateVector,
    t: &mut Transcript,
    transport: &mut Transport<'_>,
) -> Result<StateVector, ProtocolError> {
    let chain = ctx.chain();
    let table = chain.table();
    let n = table.residue_bits();
    let last = chain.len() - 1;
    let transmitted: Vec<&str> = if ctx.config().transmit_index { vec![INDEX, J] } else { vec![J] };
    let width = ctx.config().message_width();
    let mut message = None;

    for hop in route(chain) {
        let carried = (hop.leg == Leg::Return).then_some(MESSAGE);
        transport.deliver(t, &hop, Payload::Quantum { state: &mut *state, registers: &transmitted }, carried)?;
        let pos = position(chain, &hop);
        let actor = &chain.actors()[pos];
        let gate = PermutationGate::from_action(actor.secret(), n)?;
        match hop.leg {
            Leg::Outbound => {
                state.apply_permutation(&gate, J)?;
                t.push(oracle(actor.name(), "shift", Direction::Forward, 1, None));
                if pos == 0 {
                    let layout = RegisterLayout::new(&[(MESSAGE, width)])?;
                    let mut m = StateVector::basis(layout, &[(MESSAGE, ctx.message())])?;
                    let own = chain.sender_key();
                    let link = chain.neighbor_key(0)?.key;
                    MessageCircuit::new(own, table.p(), ctx.sobol())?.encrypt(&mut m, MESSAGE)?;
                    t.push(oracle(actor.name(), "message_circuit", Direction::Forward, 1, Some(own)));
                    MessageCircuit::new(link, table.p(), ctx.sobol())?.encrypt(&mut m, MESSAGE)?;
                    t.push(oracle(actor.name(), "message_circuit", Direction::Forward, 1, Some(link)));
                    message = Some(m);
                }
            }
            Leg::Return => {
                let m = message.as_mut().ok_or_else(|| ProtocolError::Internal("message not attached".into()))?;
                let inbound = chain.neighbor_key(pos - 1)?.key;
                MessageCircuit::new(inbound, table.p(), ctx.sobol())?.decrypt(m, MESSAGE)?;
                t.push(oracle(actor.name(), "message_circuit", Direction::Inverse, 1, Some(inbound)));
                if pos < last {
                    state.apply_permutation(&gate.inverse(), J)?;
                    t.push(oracle(actor.name(), "shift", Direction::Inverse, 1, None));
                    let outbound = chain.neighbor_key(pos)?.key;
                    MessageCircuit::new(outbound, table.p(), ctx.sobol())?.encrypt(m, MESSAGE)?;
                    t.push(oracle(actor.name(), "message_circuit", Direction::Forward, 1, Some(outbound)));
                }
            }
        }
    }
    message.ok_or_else(|| ProtocolError::Internal("message not attached".into()))
}

fn shot_rng(ctx: &RunContext, shot: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(ctx.config().seed);
    rng.set_stream(shot);
    rng
}

/// Decrypts the message with the recovered key and logs its fidelity to the
/// original basis state.
fn read_message(
    ctx: &RunContext,
    mut message: StateVector,
    key: u64,
    t: &mut Transcript,
) -> Result<f64, ProtocolError> {
    let receiver = ctx.chain().receiver().name();
    MessageCircuit::new(key, ctx.table().p(), ctx.sobol())?.decrypt(&mut message, MESSAGE)?;
    t.push(oracle(receiver, "message_circuit", Direction::Inverse, 1, Some(key)));
    let original = StateVector::basis(message.layout().clone(), &[(MESSAGE, ctx.message())])?;
    let fidelity = message.fidelity(&original)?;
    t.push(Event::MessageDecrypted { actor: receiver.into(), fidelity });
    Ok(fidelity)
}

/// One shot of the superposed-index run.
pub fn run_procedure3(
    ctx: &RunContext,
    shot: u64,
    interceptor: Option<&mut dyn Interceptor>,
) -> Result<ShotOutcome, ProtocolError> {
    let cfg = ctx.config();
    let chain = ctx.chain();
    let table = ctx.table();
    let receiver = chain.receiver();
    let (q, n) = (ceil_log2(cfg.span as u64), table.residue_bits());
    let mut t = Transcript::new();
    let mut transport = Transport::new(interceptor);

    let layout = RegisterLayout::new(&[(INDEX, q), (ANCILLA, 1), (J, n)])?;
    let mut state = StateVector::new(layout);
    prepare_index(&mut state, cfg.span, &mut t, receiver.name())?;
    state.load_value(J, table.j0() as usize)?;
    t.push(oracle(receiver.name(), "load_j0", Direction::Forward, 1, None));
    let gate = PermutationGate::from_action(receiver.secret(), n)?;
    if cfg.offset > 0 {
        state.apply_permutation(&gate.pow(cfg.offset as i64), J)?;
        t.push(oracle(receiver.name(), "shift", Direction::Forward, cfg.offset as u64, None));
    }
    let schedule = mapper_schedule(&gate, q, cfg.mapper);
    state.apply_controlled_permutations(&schedule, INDEX, J)?;
    t.push(oracle(receiver.name(), "mapper", Direction::Forward, schedule.len() as u64, None));

    let message = travel(ctx, &mut state, &mut t, &mut transport)?;

    let mut rng = shot_rng(ctx, shot);
    let values = state.measure(&[J, ANCILLA, INDEX], &mut rng)?;
    let (j, anc, i) = (values[0] as u64, values[1] as u64, values[2] as u64);
    let raw = raw_key(j, n, anc, i, q);
    t.push(Event::Measurement {
        actor: receiver.name().into(),
        registers: vec![J.into(), ANCILLA.into(), INDEX.into()],
        outcome: raw.clone(),
        values: vec![j, anc, i],
        seed: cfg.seed,
        stream: shot,
    });
    if anc != 0 {
        return Err(ProtocolError::Internal("ancilla measured as 1".into()));
    }

    let steps = i + cfg.offset as u64;
    let mut unwind = StateVector::basis(RegisterLayout::new(&[(J, n)])?, &[(J, j as usize)])?;
    unwind.apply_permutation(&gate.pow(-(steps as i64)), J)?;
    t.push(oracle(receiver.name(), "shift", Direction::Inverse, steps, None));
    let key = unwind.measure(&[J], &mut rng)?[0] as u64;
    t.push(Event::Measurement {
        actor: receiver.name().into(),
        registers: vec![J.into()],
        outcome: format_bits(key as usize, n),
        values: vec![key],
        seed: cfg.seed,
        stream: shot,
    });
    let classical = uncompute_key(i, cfg.offset as u64, j, receiver.secret());
    if key != classical {
        return Err(ProtocolError::Internal(format!("uncomputed key {key} disagrees with classical {classical}")));
    }
    t.push(Event::KeyRecovered { actor: receiver.name().into(), key });
    let fidelity = read_message(ctx, message, key, &mut t)?;

    Ok(ShotOutcome {
        shot,
        raw,
        index: Some(i),
        measured_j: j,
        recovered_key: key,
        message_fidelity: Some(fidelity),
        observations: transport.into_observations(),
        transcript: t,
    })
}

/// Key state of the full-cycle run after the receiver undoes its mapper,
/// with the message as received and the transcript so far.
fn procedure4_state(
    ctx: &RunContext,
    mapper: MapperKind,
    t: &mut Transcript,
    transport: &mut Transport<'_>,
) -> Result<(StateVector, StateVector), ProtocolError> {
    let chain = ctx.chain();
    let table = ctx.table();
    let receiver = chain.receiver();
    let order = table.order();
    let (q, n) = (ceil_log2(order as u64), table.residue_bits());

    let layout = RegisterLayout::new(&[(INDEX, q), (ANCILLA, 1), (J, n)])?;
    let mut state = StateVector::new(layout);
    prepare_index(&mut state, order, t, receiver.name())?;
    state.load_value(J, table.j0() as usize)?;
    t.push(oracle(receiver.name(), "load_j0", Direction::Forward, 1, None));
    let gate = PermutationGate::from_action(receiver.secret(), n)?;
    let schedule = mapper_schedule(&gate, q, mapper);
    state.apply_controlled_permutations(&schedule, INDEX, J)?;
    t.push(oracle(receiver.name(), "mapper", Direction::Forward, schedule.len() as u64, None));

    let message = travel(ctx, &mut state, t, transport)?;

    state.apply_controlled_permutations(&schedule.inverse(), INDEX, J)?;
    t.push(oracle(receiver.name(), "mapper", Direction::Inverse, schedule.len() as u64, None));
    Ok((state, message))
}

/// The full-cycle key state just before measurement, built with the given
/// mapper construction.
pub fn procedure4_final_state(ctx: &RunContext, mapper: MapperKind) -> Result<StateVector, ProtocolError> {
    let mut t = Transcript::new();
    let mut transport = Transport::new(None);
    Ok(procedure4_state(ctx, mapper, &mut t, &mut transport)?.0)
}

/// One shot of the full-cycle run.
pub fn run_procedure4(
    ctx: &RunContext,
    shot: u64,
    interceptor: Option<&mut dyn Interceptor>,
) -> Result<ShotOutcome, ProtocolError> {
    let receiver = ctx.chain().receiver().name().to_string();
    let n = ctx.table().residue_bits();
    let mut t = Transcript::new();
    let mut transport = Transport::new(interceptor);
    let (mut state, message) = procedure4_state(ctx, ctx.config().mapper, &mut t, &mut transport)?;

    let marginal = state.probabilities(J)?;
    let peak = marginal.iter().cloned().fold(0.0, f64::max);
    if peak < 1.0 - PRODUCT_TOLERANCE {
        return Err(ProtocolError::Internal(format!("j register is not a basis state (peak {peak})")));
    }
    let mut rng = shot_rng(ctx, shot);
    let key = state.measure(&[J], &mut rng)?[0] as u64;
    let raw = format_bits(key as usize, n);
    t.push(Event::Measurement {
        actor: receiver.clone(),
        registers: vec![J.into()],
        outcome: raw.clone(),
        values: vec![key],
        seed: ctx.config().seed,
        stream: shot,
    });
    t.push(Event::KeyRecovered { actor: receiver, key });
    let fidelity = read_message(ctx, message, key, &mut t)?;

    Ok(ShotOutcome {
        shot,
        raw,
        index: None,
        measured_j: key,
        recovered_key: key,
        message_fidelity: Some(fidelity),
        observations: transport.into_observations(),
        transcript: t,
    })
}

/// One shot of whichever procedure the config selects.
pub fn run_shot(
    ctx: &RunContext,
    shot: u64,
    interceptor: Option<&mut dyn Interceptor>,
) -> Result<ShotOutcome, ProtocolError> {
    match ctx.config().procedure {
        Procedure::Classical => {
            let mut out = procedure1(ctx.chain(), interceptor)?;
            out.shot = shot;
            Ok(out)
        }
        Procedure::Superposed => run_procedure3(ctx, shot, interceptor),
        Procedure::FullCycle => run_procedure4(ctx, shot, interceptor),
    }
}
