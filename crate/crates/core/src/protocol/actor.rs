use std::sync::Arc;

use serde::Serialize;

use super::ProtocolError;
use crate::scheme::{ActionTable, CycleAction};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    Sender,
    Intermediary,
    Receiver,
}

/// A participant holding a secret class (as a cycle action).
#[derive(Debug, Clone)]
pub struct Actor {
    name: String,
    secret: CycleAction,
    role: Role,
}

impl Actor {
    pub fn new(name: impl Into<String>, secret: CycleAction, role: Role) -> Self {
        Self { name: name.into(), secret, role }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn secret(&self) -> &CycleAction {
        &self.secret
    }

    pub fn role(&self) -> Role {
        self.role
    }

    /// Forward shift of `j` by the secret.
    pub fn shift(&self, j: u64) -> u64 {
        self.secret.apply(j)
    }

    pub fn unshift(&self, j: u64) -> u64 {
        self.secret.act(j, -1)
    }
}

/// The Diffie–Hellman j-invariant shared by two actors.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SessionKey {
    pub pair: (String, String),
    pub key: u64,
}

/// `act_x(act_y(j0))`, checked against the opposite order.
pub fn dh_session_key(x: &Actor, y: &Actor) -> Result<SessionKey, ProtocolError> {
    let table = x.secret.table();
    if !Arc::ptr_eq(table, y.secret.table()) && **table != **y.secret.table() {
        return Err(ProtocolError::Scheme(crate::scheme::SchemeError::TableMismatch));
    }
    let j0 = table.j0();
    let xy = x.shift(y.shift(j0));
    let yx = y.shift(x.shift(j0));
    if xy != yx {
        return Err(ProtocolError::AsymmetricKey { left: x.name.clone(), right: y.name.clone(), xy, yx });
    }
    Ok(SessionKey { pair: (x.name.clone(), y.name.clone()), key: xy })
}

/// Actors ordered from sender (first) to receiver (last).
#[derive(Debug, Clone)]
pub struct Chain {
    table: Arc<ActionTable>,
    actors: Vec<Actor>,
}

impl Chain {
    /// Builds a chain from `(name, cycle, power)` triples in sender→receiver
    /// order, assigning roles by position.
    pub fn new(table: Arc<ActionTable>, specs: &[(String, String, i64)]) -> Result<Self, ProtocolError> {
        if specs.len() < 3 {
            return Err(ProtocolError::ChainTooShort(specs.len()));
        }
        let last = specs.len() - 1;
        let mut actors = Vec::with_capacity(specs.len());
        for (k, (name, cycle, power)) in specs.iter().enumerate() {
            if specs[..k].iter().any(|(other, _, _)| other == name) {
                return Err(ProtocolError::DuplicateActor(name.clone()));
            }
            let role = match k {
                0 => Role::Sender,
                k if k == last => Role::Receiver,
                _ => Role::Intermediary,
            };
            actors.push(Actor::new(name.clone(), CycleAction::new(table.clone(), cycle, *power)?, role));
        }
        Ok(Self { table, actors })
    }

    /// Actors named after cycles, each holding its cycle's forward shift.
    pub fn from_cycle_names(table: Arc<ActionTable>, names: &[&str]) -> Result<Self, ProtocolError> {
        let specs: Vec<_> = names.iter().map(|n| (n.to_string(), n.to_string(), 1)).collect();
        Self::new(table, &specs)
    }

    pub fn table(&self) -> &Arc<ActionTable> {
        &self.table
    }

    pub fn actors(&self) -> &[Actor] {
        &self.actors
    }

    pub fn len(&self) -> usize {
        self.actors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.actors.is_empty()
    }

    pub fn sender(&self) -> &Actor {
        &self.actors[0]
    }

    pub fn receiver(&self) -> &Actor {
        self.actors.last().expect("chain has at least three actors")
    }

    /// Session key between chain positions `k` and `k + 1`.
    pub fn neighbor_key(&self, k: usize) -> Result<SessionKey, ProtocolError> {
        dh_session_key(&self.actors[k], &self.actors[k + 1])
    }

    /// `act_sender(j0)`, the key the receiver is meant to learn.
    pub fn sender_key(&self) -> u64 {
        self.sender().shift(self.table.j0())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table() -> Arc<ActionTable> {
        Arc::new(ActionTable::bundled())
    }

    #[test]
    fn ab_session_key() {
        let chain = Chain::from_cycle_names(table(), &["a", "b", "e"]).unwrap();
        assert_eq!(chain.neighbor_key(0).unwrap().key, 182);
    }

    #[test]
    fn self_pairing() {
        let t = table();
        let a = Actor::new("a", CycleAction::forward(t.clone(), "a").unwrap(), Role::Sender);
        let k = dh_session_key(&a, &a).unwrap();
        assert_eq!(k.key, t.act("a", 1, 2).unwrap());
    }

    #[test]
    fn roles_by_position() {
        let chain = Chain::from_cycle_names(table(), &["a", "b", "c", "d", "e"]).unwrap();
        let roles: Vec<_> = chain.actors().iter().map(Actor::role).collect();
        assert_eq!(roles[0], Role::Sender);
        assert!(roles[1..4].iter().all(|r| *r == Role::Intermediary));
        assert_eq!(roles[4], Role::Receiver);
        assert_eq!(chain.sender_key(), 213);
    }

    #[test]
    fn chain_errors() {
        assert!(matches!(Chain::from_cycle_names(table(), &["a", "e"]), Err(ProtocolError::ChainTooShort(2))));
        assert!(matches!(Chain::from_cycle_names(table(), &["a", "a", "e"]), Err(ProtocolError::DuplicateActor(_))));
        assert!(matches!(Chain::from_cycle_names(table(), &["a", "z", "e"]), Err(ProtocolError::Scheme(_))));
    }
}
