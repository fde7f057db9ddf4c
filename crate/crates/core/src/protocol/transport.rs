use serde::Serialize;

use super::{Chain, Event, ProtocolError, Transcript};
use crate::qsim::StateVector;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Leg {
    /// Receiver towards sender, collecting shifts.
    Outbound,
    /// Sender back to receiver, peeling shifts.
    Return,
}

/// One directed transfer between neighbouring actors.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Hop {
    pub index: usize,
    pub from: String,
    pub to: String,
    pub leg: Leg,
}

/// The `2(L − 1)` hops of a chain of length `L`: hop 0 leaves the receiver,
/// hop `L − 2` reaches the sender and the last hop returns to the receiver.
pub fn route(chain: &Chain) -> Vec<Hop> {
    let names: Vec<&str> = chain.actors().iter().map(|a| a.name()).collect();
    let last = names.len() - 1;
    let outbound = (1..=last).rev().map(|k| (names[k], names[k - 1], Leg::Outbound));
    let back = (0..last).map(|k| (names[k], names[k + 1], Leg::Return));
    outbound
        .chain(back)
        .enumerate()
        .map(|(index, (from, to, leg))| Hop { index, from: from.into(), to: to.into(), leg })
        .collect()
}

/// What crosses a hop.
pub enum Payload<'a> {
    /// A j-invariant sent in the clear.
    Classical(u64),
    /// The in-flight key state; `registers` are the ones handed over.
    Quantum { state: &'a mut StateVector, registers: &'a [&'a str] },
}

/// What an eavesdropper learned at one hop.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Observation {
    pub hop: usize,
    pub j: u64,
    pub index: Option<u64>,
}

/// Hook invoked between hand-off and receipt on every hop.
pub trait Interceptor {
    fn intercept(&mut self, hop: &Hop, payload: Payload<'_>) -> Result<Option<Observation>, ProtocolError>;
}

/// Delivers payloads hop by hop, logging hand-offs, receipts and
/// interceptions.
pub(crate) struct Transport<'a> {
    interceptor: Option<&'a mut dyn Interceptor>,
    observations: Vec<Observation>,
}

impl<'a> Transport<'a> {
    pub(crate) fn new(interceptor: Option<&'a mut dyn Interceptor>) -> Self {
        Self { interceptor, observations: Vec::new() }
    }

    pub(crate) fn deliver(
        &mut self,
        transcript: &mut Transcript,
        hop: &Hop,
        payload: Payload<'_>,
        carried: Option<&str>,
    ) -> Result<(), ProtocolError> {
        let (mut registers, value): (Vec<String>, _) = match &payload {
            Payload::Classical(j) => (vec!["j".into()], Some(*j)),
            Payload::Quantum { registers, .. } => (registers.iter().map(|r| r.to_string()).collect(), None),
        };
        registers.extend(carried.map(String::from));
        transcript.push(Event::HandOff {
            hop: hop.index,
            from: hop.from.clone(),
            to: hop.to.clone(),
            registers,
            value,
        });
        if let Some(interceptor) = self.interceptor.as_deref_mut() {
            if let Some(obs) = interceptor.intercept(hop, payload)? {
                transcript.push(Event::Interception { hop: obs.hop, observed_j: obs.j, observed_index: obs.index });
                self.observations.push(obs);
            }
        }
        transcript.push(Event::Receipt { hop: hop.index, by: hop.to.clone() });
        Ok(())
    }

    pub(crate) fn into_observations(self) -> Vec<Observation> {
        self.observations
    }
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::scheme::ActionTable;

    #[test]
    fn five_actor_route() {
        let chain = Chain::from_cycle_names(Arc::new(ActionTable::bundled()), &["a", "b", "c", "d", "e"]).unwrap();
        let hops = route(&chain);
        let pairs: Vec<_> = hops.iter().map(|h| format!("{}{}", h.from, h.to)).collect();
        assert_eq!(pairs, ["ed", "dc", "cb", "ba", "ab", "bc", "cd", "de"]);
        assert_eq!(hops[3].leg, Leg::Outbound);
        assert_eq!(hops[4].leg, Leg::Return);
    }
}
