use super::QsimError;

/// A named, contiguous run of qubits. Bit 0 is the least significant.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Register {
    name: String,
    offset: usize,
    width: usize,
}

impl Register {
    pub fn name(&self) -> &str {
        &self.name
    }

    /// Global index of the register's bit 0.
    pub fn offset(&self) -> usize {
        self.offset
    }

    pub fn width(&self) -> usize {
        self.width
    }

    /// Global qubit index of local bit `k`.
    pub fn qubit(&self, k: usize) -> Result<usize, QsimError> {
        if k >= self.width {
            return Err(QsimError::QubitOutOfRange { qubit: k, width: self.width });
        }
        Ok(self.offset + k)
    }

    pub fn qubits(&self) -> impl Iterator<Item = usize> + '_ {
        self.offset..self.offset + self.width
    }

    pub(crate) fn mask(&self) -> usize {
        ((1usize << self.width) - 1) << self.offset
    }

    /// Value held by this register in basis state `index`.
    pub(crate) fn extract(&self, index: usize) -> usize {
        (index >> self.offset) & ((1usize << self.width) - 1)
    }

    /// `index` with this register's bits replaced by `value`.
    pub(crate) fn insert(&self, index: usize, value: usize) -> usize {
        (index & !self.mask()) | (value << self.offset)
    }
}

/// Registers laid out in declaration order: the first register occupies the
/// lowest bits of the basis index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RegisterLayout {
    registers: Vec<Register>,
    total: usize,
}

impl RegisterLayout {
    pub const DEFAULT_QUBIT_GUARD: usize = 26;

    pub fn new(spec: &[(&str, usize)]) -> Result<Self, QsimError> {
        Self::with_guard(spec, Self::DEFAULT_QUBIT_GUARD)
    }

    pub fn with_guard(spec: &[(&str, usize)], guard: usize) -> Result<Self, QsimError> {
        let mut registers: Vec<Register> = Vec::with_capacity(spec.len());
        let mut offset = 0;
        for &(name, width) in spec {
            if registers.iter().any(|r| r.name == name) {
                return Err(QsimError::DuplicateRegister(name.to_string()));
            }
            registers.push(Register { name: name.to_string(), offset, width });
            offset += width;
        }
        if offset == 0 {
            return Err(QsimError::EmptyLayout);
        }
        if offset > guard {
            return Err(QsimError::TooManyQubits { requested: offset, guard });
        }
        Ok(Self { registers, total: offset })
    }

    pub fn total_qubits(&self) -> usize {
        self.total
    }

    pub fn dimension(&self) -> usize {
        1 << self.total
    }

    pub fn registers(&self) -> &[Register] {
        &self.registers
    }

    pub fn register(&self, name: &str) -> Result<&Register, QsimError> {
        self.registers.iter().find(|r| r.name == name).ok_or_else(|| QsimError::UnknownRegister(name.to_string()))
    }
}

/// `value` as `width` bits, most significant first.
pub fn format_bits(value: usize, width: usize) -> String {
    (0..width).rev().map(|k| if (value >> k) & 1 == 1 { '1' } else { '0' }).collect()
}

/// Inverse of [`format_bits`].
pub fn parse_bits(bits: &str) -> Option<usize> {
    if bits.len() > usize::BITS as usize || !bits.chars().all(|c| c == '0' || c == '1') {
        return None;
    }
    Some(bits.chars().fold(0, |acc, c| (acc << 1) | usize::from(c == '1')))
}
