use serde::Serialize;

use super::ProtocolError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Forward,
    Inverse,
}

/// One protocol event. Registers are referred to by name; quantum payloads
/// are never serialized, only what a party would observe or log.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Event {
    HandOff {
        hop: usize,
        from: String,
        to: String,
        registers: Vec<String>,
        #[serde(skip_serializing_if = "Option::is_none")]
        value: Option<u64>,
    },
    Receipt {
        hop: usize,
        by: String,
    },
    Oracle {
        actor: String,
        oracle: String,
        direction: Direction,
        repetitions: u64,
        #[serde(skip_serializing_if = "Option::is_none")]
        key: Option<u64>,
    },
    Measurement {
        actor: String,
        registers: Vec<String>,
        outcome: String,
        values: Vec<u64>,
        seed: u64,
        stream: u64,
    },
    Interception {
        hop: usize,
        observed_j: u64,
        #[serde(skip_serializing_if = "Option::is_none")]
        observed_index: Option<u64>,
    },
    Note {
        actor: String,
        text: String,
    },
    KeyRecovered {
        actor: String,
        key: u64,
    },
    MessageDecrypted {
        actor: String,
        fidelity: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Entry {
    pub seq: usize,
    #[serde(flatten)]
    pub event: Event,
}

/// Ordered event log of one protocol run.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
#[serde(transparent)]
pub struct Transcript {
    entries: Vec<Entry>,
}

impl Transcript {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, event: Event) {
        let seq = self.entries.len();
        self.entries.push(Entry { seq, event });
    }

    pub fn entries(&self) -> &[Entry] {
        &self.entries
    }

    pub fn events(&self) -> impl DoubleEndedIterator<Item = &Event> {
        self.entries.iter().map(|e| &e.event)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// The last key recorded as recovered.
    pub fn recovered_key(&self) -> Option<u64> {
        self.events().rev().find_map(|e| match e {
            Event::KeyRecovered { key, .. } => Some(*key),
            _ => None,
        })
    }

    pub fn message_fidelity(&self) -> Option<f64> {
        self.events().rev().find_map(|e| match e {
            Event::MessageDecrypted { fidelity, .. } => Some(*fidelity),
            _ => None,
        })
    }

    /// Sequence numbers strictly increase, and every hand-off is followed by
    /// its receipt before the next hand-off.
    pub fn validate(&self) -> Result<(), ProtocolError> {
        let mut open: Option<(usize, &str)> = None;
        for (k, entry) in self.entries.iter().enumerate() {
            if entry.seq != k {
                return Err(ProtocolError::Transcript(format!("event {k} has sequence number {}", entry.seq)));
            }
            match &entry.event {
                Event::HandOff { hop, to, .. } => {
                    if let Some((pending, _)) = open {
                        return Err(ProtocolError::Transcript(format!("hand-off {pending} has no receipt")));
                    }
                    open = Some((*hop, to.as_str()));
                }
                Event::Receipt { hop, by } => match open.take() {
                    Some((pending, to)) if pending == *hop && to == by => {}
                    _ => return Err(ProtocolError::Transcript(format!("receipt for hop {hop} without hand-off"))),
                },
                _ => {}
            }
        }
        match open {
            Some((pending, _)) => Err(ProtocolError::Transcript(format!("hand-off {pending} has no receipt"))),
            None => Ok(()),
        }
    }
}
