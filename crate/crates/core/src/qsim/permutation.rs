use super::{QsimError, StateVector};
use crate::scheme::CycleAction;

/// A basis permutation on a `width`-qubit register.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PermutationGate {
    width: usize,
    map: Vec<u32>,
}

impl PermutationGate {
    pub fn identity(width: usize) -> Self {
        Self { width, map: (0..1u32 << width).collect() }
    }

    pub fn from_map(width: usize, map: Vec<u32>) -> Result<Self, QsimError> {
        if map.len() != 1 << width {
            return Err(QsimError::DimensionMismatch { expected: 1 << width, actual: map.len() });
        }
        let mut seen = vec![false; map.len()];
        for &y in &map {
            let y = y as usize;
            if y >= seen.len() || std::mem::replace(&mut seen[y], true) {
                return Err(QsimError::NotBijective);
            }
        }
        Ok(Self { width, map })
    }

    /// `j ↦ action(j)` on every basis value; residues outside `J` (including
    /// those `≥ p`) are fixed.
    pub fn from_action(action: &CycleAction, width: usize) -> Result<Self, QsimError> {
        let needed = action.table().residue_bits();
        if needed > width {
            return Err(QsimError::WidthMismatch { gate: needed, register: width });
        }
        let map = (0..1u64 << width).map(|j| action.apply(j) as u32).collect();
        Self::from_map(width, map)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn apply(&self, x: usize) -> usize {
        self.map[x] as usize
    }

    pub fn inverse(&self) -> Self {
        let mut map = vec![0u32; self.map.len()];
        for (x, &y) in self.map.iter().enumerate() {
            map[y as usize] = x as u32;
        }
        Self { width: self.width, map }
    }

    /// `self ∘ other`: apply `other` first.
    pub fn after(&self, other: &Self) -> Self {
        assert_eq!(self.width, other.width, "permutation widths differ");
        Self { width: self.width, map: other.map.iter().map(|&x| self.map[x as usize]).collect() }
    }

    /// `self^k`; negative powers use the inverse.
    pub fn pow(&self, k: i64) -> Self {
        let mut base = if k < 0 { self.inverse() } else { self.clone() };
        let mut k = k.unsigned_abs();
        let mut acc = Self::identity(self.width);
        while k > 0 {
            if k & 1 == 1 {
                acc = base.after(&acc);
            }
            base = base.after(&base);
            k >>= 1;
        }
        acc
    }

    pub fn is_identity(&self) -> bool {
        self.map.iter().enumerate().all(|(x, &y)| x == y as usize)
    }
}

/// Controlled permutations `(control bit, gate)` applied in order. Mapping
/// `|i⟩|x⟩ → |i⟩|π^i x⟩` takes either one `π^{2^k}` per index bit
/// ([`MapperSchedule::repeated_squaring`]) or `2^k` copies of `π` per bit
/// ([`MapperSchedule::naive`], `2^Q − 1` controlled gates in total).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MapperSchedule {
    entries: Vec<(usize, PermutationGate)>,
}

impl MapperSchedule {
    pub fn repeated_squaring(gate: &PermutationGate, control_width: usize) -> Self {
        let mut entries = Vec::with_capacity(control_width);
        let mut power = gate.clone();
        for k in 0..control_width {
            entries.push((k, power.clone()));
            power = power.after(&power);
        }
        Self { entries }
    }

    pub fn naive(gate: &PermutationGate, control_width: usize) -> Self {
        let entries = (0..control_width).flat_map(|k| std::iter::repeat_n((k, gate.clone()), 1 << k)).collect();
        Self { entries }
    }

    pub fn inverse(&self) -> Self {
        Self { entries: self.entries.iter().rev().map(|(k, g)| (*k, g.inverse())).collect() }
    }

    pub fn entries(&self) -> &[(usize, PermutationGate)] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

impl StateVector {
    /// `|x⟩ → |π(x)⟩` on `register`, as an index remap.
    pub fn apply_permutation(&mut self, gate: &PermutationGate, register: &str) -> Result<(), QsimError> {
        let reg = self.layout().register(register)?.clone();
        if reg.width() != gate.width() {
            return Err(QsimError::WidthMismatch { gate: gate.width(), register: reg.width() });
        }
        self.remap(|i| reg.insert(i, gate.apply(reg.extract(i))));
        Ok(())
    }

    /// Runs a mapper schedule with bit `k` of `control` gating each entry.
    pub fn apply_controlled_permutations(
        &mut self,
        schedule: &MapperSchedule,
        control: &str,
        target: &str,
    ) -> Result<(), QsimError> {
        let ctrl = self.layout().register(control)?.clone();
        let tgt = self.layout().register(target)?.clone();
        for (k, gate) in schedule.entries() {
            if gate.width() != tgt.width() {
                return Err(QsimError::WidthMismatch { gate: gate.width(), register: tgt.width() });
            }
            let bit = 1usize << ctrl.qubit(*k)?;
            self.remap(|i| if i & bit != 0 { tgt.insert(i, gate.apply(tgt.extract(i))) } else { i });
        }
        Ok(())
    }
}
