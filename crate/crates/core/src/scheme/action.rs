use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::SchemeError;
use crate::classgroup::{class_number, Discriminant};

/// On-disk fixture: the class-group action given as explicit cycles.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FixtureFile {
    pub discriminant: i64,
    pub p: u64,
    pub j0: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub j_set: Option<Vec<u64>>,
    pub cycles: BTreeMap<String, Vec<u64>>,
}

/// Validated action of a cyclic class group on its j-invariants.
///
/// Each named cycle lists `J` in the order visited by repeatedly applying one
/// class to `j0`. Residues outside `J` are fixed points of every action.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ActionTable {
    discriminant: i64,
    p: u64,
    j0: u64,
    j_set: Vec<u64>,
    cycles: BTreeMap<String, Vec<u64>>,
    positions: BTreeMap<String, HashMap<u64, usize>>,
}

const BUNDLED_FIXTURE: &str = include_str!("../../fixtures/cl167_p311.json");

impl ActionTable {
    /// The `Δ = −167`, `p = 311` table with actors `a`..`e`.
    pub fn bundled() -> Self {
        Self::from_json_str(BUNDLED_FIXTURE).expect("bundled fixture is valid")
    }

    pub fn bundled_json() -> &'static str {
        BUNDLED_FIXTURE
    }

    pub fn from_json_str(text: &str) -> Result<Self, SchemeError> {
        let file: FixtureFile = serde_json::from_str(text).map_err(|e| SchemeError::Parse(e.to_string()))?;
        Self::from_fixture(file)
    }

    pub fn from_fixture(file: FixtureFile) -> Result<Self, SchemeError> {
        let disc =
            Discriminant::new(file.discriminant).map_err(|e| SchemeError::Invalid(format!("discriminant: {e}")))?;
        if file.p < 2 {
            return Err(SchemeError::Invalid(format!("p = {} must be at least 2", file.p)));
        }
        if file.j0 >= file.p {
            return Err(SchemeError::Invalid(format!("j0 = {} is not a residue mod {}", file.j0, file.p)));
        }
        if file.cycles.is_empty() {
            return Err(SchemeError::Invalid("no cycles".into()));
        }

        let mut reference: Option<(String, BTreeSet<u64>)> = None;
        let mut positions = BTreeMap::new();
        for (name, cycle) in &file.cycles {
            if cycle.first() != Some(&file.j0) {
                return Err(SchemeError::BasePoint { cycle: name.clone(), j0: file.j0 });
            }
            let mut pos = HashMap::with_capacity(cycle.len());
            for (k, &j) in cycle.iter().enumerate() {
                if j >= file.p {
                    return Err(SchemeError::Invalid(format!("cycle {name}: {j} is not a residue mod {}", file.p)));
                }
                if pos.insert(j, k).is_some() {
                    return Err(SchemeError::NotPermutation { cycle: name.clone(), repeated: j });
                }
            }
            let members: BTreeSet<u64> = cycle.iter().copied().collect();
            match &reference {
                None => reference = Some((name.clone(), members)),
                Some((first, set)) if *set != members => {
                    return Err(SchemeError::Invalid(format!(
                        "cycle {name} does not visit the same j-invariants as cycle {first}"
                    )));
                }
                Some(_) => {}
            }
            positions.insert(name.clone(), pos);
        }
        let (_, members) = reference.expect("at least one cycle");

        let j_set = match file.j_set {
            Some(listed) => {
                let listed_set: BTreeSet<u64> = listed.iter().copied().collect();
                if listed_set.len() != listed.len() || listed_set != members {
                    return Err(SchemeError::Invalid("j_set does not match the cycle members".into()));
                }
                listed
            }
            None => members.iter().copied().collect(),
        };

        // free and transitive: |J| = h(Δ)
        if let Ok(h) = class_number(&disc) {
            if h != j_set.len() as u64 {
                return Err(SchemeError::Invalid(format!(
                    "{} j-invariants but h({}) = {h}",
                    j_set.len(),
                    file.discriminant
                )));
            }
        }

        Ok(Self { discriminant: file.discriminant, p: file.p, j0: file.j0, j_set, cycles: file.cycles, positions })
    }

    pub fn to_fixture(&self) -> FixtureFile {
        FixtureFile {
            discriminant: self.discriminant,
            p: self.p,
            j0: self.j0,
            j_set: Some(self.j_set.clone()),
            cycles: self.cycles.clone(),
        }
    }

    pub fn discriminant(&self) -> i64 {
        self.discriminant
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn j0(&self) -> u64 {
        self.j0
    }

    /// Class number `r = |J|`.
    pub fn order(&self) -> usize {
        self.j_set.len()
    }

    pub fn j_set(&self) -> &[u64] {
        &self.j_set
    }

    pub fn contains(&self, j: u64) -> bool {
        self.positions.values().next().is_some_and(|p| p.contains_key(&j))
    }

    pub fn cycle_names(&self) -> impl Iterator<Item = &str> {
        self.cycles.keys().map(String::as_str)
    }

    pub fn cycle(&self, name: &str) -> Result<&[u64], SchemeError> {
        self.cycles.get(name).map(Vec::as_slice).ok_or_else(|| SchemeError::UnknownCycle(name.to_string()))
    }

    /// Moves `j` by `steps` positions along the named cycle; identity off `J`.
    pub fn act(&self, name: &str, j: u64, steps: i64) -> Result<u64, SchemeError> {
        let cycle = self.cycle(name)?;
        let pos = &self.positions[name];
        Ok(match pos.get(&j) {
            Some(&k) => {
                let r = cycle.len() as i64;
                cycle[(k as i64 + steps).rem_euclid(r) as usize]
            }
            None => j,
        })
    }

    /// Bits needed to hold any residue mod `p`: `⌈log₂ p⌉`.
    pub fn residue_bits(&self) -> usize {
        ceil_log2(self.p)
    }
}

/// Smallest `k` with `2^k ≥ n`.
pub fn ceil_log2(n: u64) -> usize {
    if n <= 1 {
        0
    } else {
        (64 - (n - 1).leading_zeros()) as usize
    }
}

pub fn load_action_table(path: impl AsRef<Path>) -> Result<ActionTable, SchemeError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| SchemeError::Io(format!("{}: {e}", path.display())))?;
    ActionTable::from_json_str(&text)
}

/// The class `𝔠^power` for the class `𝔠` behind one named cycle.
///
/// `power = 1` is the forward shift, `power = −1` its inverse and `power = 0`
/// the identity.
#[derive(Debug, Clone)]
pub struct CycleAction {
    table: Arc<ActionTable>,
    cycle: String,
    power: i64,
}

impl CycleAction {
    pub fn new(table: Arc<ActionTable>, cycle: &str, power: i64) -> Result<Self, SchemeError> {
        table.cycle(cycle)?;
        Ok(Self { table, cycle: cycle.to_string(), power })
    }

    pub fn forward(table: Arc<ActionTable>, cycle: &str) -> Result<Self, SchemeError> {
        Self::new(table, cycle, 1)
    }

    pub fn table(&self) -> &Arc<ActionTable> {
        &self.table
    }

    pub fn cycle_name(&self) -> &str {
        &self.cycle
    }

    pub fn power(&self) -> i64 {
        self.power
    }

    pub fn inverse(&self) -> Self {
        Self { table: self.table.clone(), cycle: self.cycle.clone(), power: -self.power }
    }

    /// Applies the action `steps` times (negative steps run the inverse).
    pub fn act(&self, j: u64, steps: i64) -> u64 {
        self.table.act(&self.cycle, j, self.power.saturating_mul(steps)).expect("cycle checked at construction")
    }

    pub fn apply(&self, j: u64) -> u64 {
        self.act(j, 1)
    }

    fn same_table(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.table, &other.table) || *self.table == *other.table
    }
}

/// `x(y(j))`, one step each.
pub fn compose_actions(x: &CycleAction, y: &CycleAction, j: u64) -> Result<u64, SchemeError> {
    if !x.same_table(y) {
        return Err(SchemeError::TableMismatch);
    }
    Ok(x.apply(y.apply(j)))
}
