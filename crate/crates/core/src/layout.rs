//! Named multi-register layouts over a flat qubit index.
//!
//! Registers are packed in declaration order starting at global qubit 0, so
//! the first register occupies the least significant bits of an amplitude
//! index.

use serde::{Deserialize, Serialize};

use crate::error::{PrepError, Result};
use crate::fixed_point::FixedPointFormat;

/// Environment variable overriding [`DEFAULT_MAX_QUBITS`].
pub const MAX_QUBITS_ENV: &str = "INEQPREP_MAX_QUBITS";
pub const DEFAULT_MAX_QUBITS: usize = 26;

/// Qubit budget for dense layouts, honouring [`MAX_QUBITS_ENV`].
pub fn max_qubits() -> usize {
    std::env::var(MAX_QUBITS_ENV)
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .filter(|&v: &usize| v > 0 && v < 64)
        .unwrap_or(DEFAULT_MAX_QUBITS)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Register {
    name: String,
    width: usize,
    format: FixedPointFormat,
    offset: usize,
}

impl Register {
    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn format(&self) -> FixedPointFormat {
        self.format
    }

    /// Global index of this register's least significant qubit.
    pub fn offset(&self) -> usize {
        self.offset
    }

    pub fn mask(&self) -> u64 {
        ((1u64 << self.width) - 1) << self.offset
    }

    pub fn dimension(&self) -> u64 {
        1u64 << self.width
    }

    #[inline]
    pub fn label(&self, index: u64) -> u64 {
        (index >> self.offset) & ((1u64 << self.width) - 1)
    }

    #[inline]
    pub fn with_label(&self, index: u64, label: u64) -> u64 {
        (index & !self.mask()) | (label << self.offset)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RegisterLayout {
    registers: Vec<Register>,
    total_qubits: usize,
    max_qubits: usize,
}

impl RegisterLayout {
    /// Empty layout with the budget from [`max_qubits`].
    pub fn new() -> Self {
        Self::with_budget(max_qubits())
    }

    pub fn with_budget(max_qubits: usize) -> Self {
        Self {
            registers: Vec::new(),
            total_qubits: 0,
            max_qubits: max_qubits.min(63),
        }
    }

    /// Layout of integer-format registers, e.g. `[("a", 2), ("b", 1)]`.
    pub fn from_widths<'a>(specs: impl IntoIterator<Item = (&'a str, usize)>) -> Result<Self> {
        let mut layout = Self::new();
        for (name, width) in specs {
            layout.push(name, width)?;
        }
        Ok(layout)
    }

    pub fn push(&mut self, name: &str, width: usize) -> Result<&mut Self> {
        self.push_with_format(name, FixedPointFormat::integer(width))
    }

    pub fn push_with_format(&mut self, name: &str, format: FixedPointFormat) -> Result<&mut Self> {
        let width = format.width();
        if width == 0 {
            return Err(PrepError::EmptyRegister { name: name.into() });
        }
        if self.registers.iter().any(|r| r.name == name) {
            return Err(PrepError::DuplicateRegister(name.into()));
        }
        let requested = self.total_qubits + width;
        if requested > self.max_qubits {
            return Err(PrepError::QubitBudget {
                requested,
                budget: self.max_qubits,
            });
        }
        self.registers.push(Register {
            name: name.into(),
            width,
            format,
            offset: self.total_qubits,
        });
        self.total_qubits = requested;
        Ok(self)
    }

    pub fn registers(&self) -> &[Register] {
        &self.registers
    }

    pub fn total_qubits(&self) -> usize {
        self.total_qubits
    }

    pub fn max_qubits(&self) -> usize {
        self.max_qubits
    }

    pub fn dimension(&self) -> usize {
        1usize << self.total_qubits
    }

    pub fn contains(&self, name: &str) -> bool {
        self.registers.iter().any(|r| r.name == name)
    }

    pub fn register(&self, name: &str) -> Result<&Register> {
        self.registers
            .iter()
            .find(|r| r.name == name)
            .ok_or_else(|| PrepError::UnknownRegister(name.into()))
    }

    pub fn width(&self, name: &str) -> Result<usize> {
        self.register(name).map(Register::width)
    }

    /// Global qubit index of bit `bit` (0 = least significant) of `name`.
    pub fn global_qubit(&self, name: &str, bit: usize) -> Result<usize> {
        let reg = self.register(name)?;
        if bit >= reg.width {
            return Err(PrepError::QubitOutOfRange {
                qubit: bit,
                total: reg.width,
            });
        }
        Ok(reg.offset + bit)
    }

    /// Inverse of [`global_qubit`](Self::global_qubit).
    pub fn locate_qubit(&self, qubit: usize) -> Option<(&str, usize)> {
        self.registers
            .iter()
            .find(|r| qubit >= r.offset && qubit < r.offset + r.width)
            .map(|r| (r.name.as_str(), qubit - r.offset))
    }

    /// Global amplitude index of the basis state with the given labels;
    /// unassigned registers are 0.
    pub fn index_of(&self, assignments: &[(&str, u64)]) -> Result<u64> {
        let mut index = 0u64;
        for &(name, value) in assignments {
            let reg = self.register(name)?;
            if value >= reg.dimension() {
                return Err(PrepError::ValueOutOfRange {
                    register: name.into(),
                    value,
                    width: reg.width,
                });
            }
            index = reg.with_label(index, value);
        }
        Ok(index)
    }

    pub fn label(&self, index: u64, name: &str) -> Result<u64> {
        Ok(self.register(name)?.label(index))
    }

    /// Bit mask and value selecting the basis labels that satisfy every
    /// `register = label` condition.
    pub fn selector<S: AsRef<str>>(&self, conditions: &[(S, u64)]) -> Result<Selector> {
        let mut mask = 0u64;
        let mut value = 0u64;
        for (name, label) in conditions {
            let name = name.as_ref();
            let reg = self.register(name)?;
            if *label >= reg.dimension() {
                return Err(PrepError::ValueOutOfRange {
                    register: name.into(),
                    value: *label,
                    width: reg.width,
                });
            }
            if mask & reg.mask() != 0 && (value & reg.mask()) != (label << reg.offset) {
                // contradictory duplicate condition: nothing matches
                return Ok(Selector::EMPTY);
            }
            mask |= reg.mask();
            value = reg.with_label(value, *label);
        }
        Ok(Selector { mask, value })
    }

    /// Layout with `name` removed; remaining registers keep their order.
    pub fn without(&self, name: &str) -> Result<RegisterLayout> {
        self.register(name)?;
        let mut out = RegisterLayout::with_budget(self.max_qubits);
        for r in self.registers.iter().filter(|r| r.name != name) {
            out.push_with_format(&r.name, r.format)?;
        }
        Ok(out)
    }
}

impl Default for RegisterLayout {
    fn default() -> Self {
        Self::new()
    }
}

/// Matches global indices `idx` with `idx & mask == value`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Selector {
    mask: u64,
    value: u64,
}

impl Selector {
    /// Matches nothing.
    const EMPTY: Selector = Selector {
        mask: 0,
        value: u64::MAX,
    };

    #[inline]
    pub fn matches(&self, index: u64) -> bool {
        index & self.mask == self.value
    }
}
