//! Verified permutations of computational-basis labels.
//!
//! Every reversible arithmetic step in this crate is one of these. Two
//! shapes exist: an explicit table over the joint label space of some
//! registers, and an XOR load `dst ^= f(src)` which is a bijection (and an
//! involution) for any `f` whose outputs fit `dst`.

use std::fmt;
use std::sync::Arc;

use crate::error::{invalid, PrepError, Result};
use crate::layout::RegisterLayout;

type LabelFn = Arc<dyn Fn(u64) -> u64 + Send + Sync>;

#[derive(Clone)]
pub struct BasisPermutation {
    kind: Kind,
}

#[derive(Clone)]
enum Kind {
    Table {
        registers: Vec<(String, usize)>,
        forward: Arc<[u64]>,
    },
    XorLoad {
        sources: Vec<(String, usize)>,
        target: (String, usize),
        f: LabelFn,
    },
}

impl fmt::Debug for BasisPermutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            Kind::Table { registers, forward } => f
                .debug_struct("Table")
                .field("registers", registers)
                .field("len", &forward.len())
                .finish(),
            Kind::XorLoad {
                sources, target, ..
            } => f
                .debug_struct("XorLoad")
                .field("sources", sources)
                .field("target", target)
                .finish(),
        }
    }
}

fn widths_of(layout: &RegisterLayout, names: &[&str]) -> Result<Vec<(String, usize)>> {
    let mut out: Vec<(String, usize)> = Vec::with_capacity(names.len());
    for &name in names {
        if out.iter().any(|(n, _)| n == name) {
            return Err(PrepError::DuplicateRegister(name.into()));
        }
        out.push((name.to_string(), layout.width(name)?));
    }
    Ok(out)
}

fn joint_bits(regs: &[(String, usize)]) -> Result<usize> {
    let bits: usize = regs.iter().map(|(_, w)| w).sum();
    if bits > 32 {
        return Err(invalid(format!(
            "joint label space of {bits} bits is too large to tabulate"
        )));
    }
    Ok(bits)
}

impl BasisPermutation {
    /// Explicit bijection on the joint labels of `registers` (first register
    /// in the least significant bits). Rejected unless `map` is a bijection
    /// of `0..2^bits`.
    pub fn from_table(layout: &RegisterLayout, registers: &[&str], map: Vec<u64>) -> Result<Self> {
        let regs = widths_of(layout, registers)?;
        let bits = joint_bits(&regs)?;
        let size = 1usize << bits;
        if map.len() != size {
            return Err(PrepError::NotBijective(format!(
                "table has {} entries, joint label space has {size}",
                map.len()
            )));
        }
        let mut seen = vec![false; size];
        for (src, &dst) in map.iter().enumerate() {
            let slot = seen.get_mut(dst as usize).ok_or_else(|| {
                PrepError::NotBijective(format!("label {src} maps outside the space to {dst}"))
            })?;
            if *slot {
                return Err(PrepError::NotBijective(format!(
                    "label {dst} is hit more than once"
                )));
            }
            *slot = true;
        }
        Ok(Self {
            kind: Kind::Table {
                registers: regs,
                forward: map.into(),
            },
        })
    }

    /// Tabulates `f` over the joint label space and verifies it.
    pub fn from_fn(
        layout: &RegisterLayout,
        registers: &[&str],
        f: impl Fn(u64) -> u64,
    ) -> Result<Self> {
        let regs = widths_of(layout, registers)?;
        let bits = joint_bits(&regs)?;
        let map = (0..1u64 << bits).map(f).collect();
        Self::from_table(layout, registers, map)
    }

    /// `target ^= f(sources)`. Every output of `f` over the source label
    /// space must fit `target`.
    pub fn xor_load(
        layout: &RegisterLayout,
        sources: &[&str],
        target: &str,
        f: impl Fn(u64) -> u64 + Send + Sync + 'static,
    ) -> Result<Self> {
        if sources.contains(&target) {
            return Err(invalid(format!("`{target}` is both source and target")));
        }
        let srcs = widths_of(layout, sources)?;
        let tw = layout.width(target)?;
        let bits: usize = srcs.iter().map(|(_, w)| w).sum();
        if bits > 40 {
            return Err(invalid(format!("source space of {bits} bits is too large")));
        }
        let limit = 1u64 << tw;
        for label in 0..1u64 << bits {
            let out = f(label);
            if out >= limit {
                return Err(PrepError::ValueOutOfRange {
                    register: target.into(),
                    value: out,
                    width: tw,
                });
            }
        }
        Ok(Self {
            kind: Kind::XorLoad {
                sources: srcs,
                target: (target.into(), tw),
                f: Arc::new(f),
            },
        })
    }

    pub fn identity(layout: &RegisterLayout, registers: &[&str]) -> Result<Self> {
        Self::from_fn(layout, registers, |x| x)
    }

    pub fn inverse(&self) -> Self {
        match &self.kind {
            Kind::Table { registers, forward } => {
                let mut back = vec![0u64; forward.len()];
                for (src, &dst) in forward.iter().enumerate() {
                    back[dst as usize] = src as u64;
                }
                Self {
                    kind: Kind::Table {
                        registers: registers.clone(),
                        forward: back.into(),
                    },
                }
            }
            Kind::XorLoad { .. } => self.clone(),
        }
    }

    /// Names of the registers this permutation reads or writes.
    pub fn registers(&self) -> Vec<&str> {
        match &self.kind {
            Kind::Table { registers, .. } => registers.iter().map(|(n, _)| n.as_str()).collect(),
            Kind::XorLoad {
                sources, target, ..
            } => sources
                .iter()
                .map(|(n, _)| n.as_str())
                .chain(std::iter::once(target.0.as_str()))
                .collect(),
        }
    }

    /// Binds register names to bit offsets of `layout`.
    pub fn resolve(&self, layout: &RegisterLayout) -> Result<ResolvedPermutation<'_>> {
        let bind = |regs: &[(String, usize)]| -> Result<Vec<(u32, u64, u32)>> {
            let mut shift = 0u32;
            regs.iter()
                .map(|(name, width)| {
                    let reg = layout.register(name)?;
                    if reg.width() != *width {
                        return Err(invalid(format!(
                            "register `{name}` is {} bits in the state but {width} in the permutation",
                            reg.width()
                        )));
                    }
                    let field = (reg.offset() as u32, (1u64 << width) - 1, shift);
                    shift += *width as u32;
                    Ok(field)
                })
                .collect()
        };
        match &self.kind {
            Kind::Table { registers, forward } => Ok(ResolvedPermutation::Table {
                fields: bind(registers)?,
                forward,
            }),
            Kind::XorLoad {
                sources, target, f, ..
            } => {
                let t = layout.register(&target.0)?;
                if t.width() != target.1 {
                    return Err(invalid(format!("register `{}` changed width", target.0)));
                }
                Ok(ResolvedPermutation::Xor {
                    fields: bind(sources)?,
                    target_offset: t.offset() as u32,
                    f: f.as_ref(),
                })
            }
        }
    }
}

/// A permutation bound to a concrete layout; maps global amplitude indices.
pub enum ResolvedPermutation<'a> {
    Table {
        /// (global offset, mask, shift inside the joint label)
        fields: Vec<(u32, u64, u32)>,
        forward: &'a [u64],
    },
    Xor {
        fields: Vec<(u32, u64, u32)>,
        target_offset: u32,
        f: &'a (dyn Fn(u64) -> u64 + Send + Sync),
    },
}

#[inline]
fn gather(fields: &[(u32, u64, u32)], index: u64) -> u64 {
    fields
        .iter()
        .fold(0, |acc, &(off, mask, shift)| acc | (((index >> off) & mask) << shift))
}

impl ResolvedPermutation<'_> {
    #[inline]
    pub fn map(&self, index: u64) -> u64 {
        match self {
            ResolvedPermutation::Table { fields, forward } => {
                let joint = forward[gather(fields, index) as usize];
                fields.iter().fold(index, |acc, &(off, mask, shift)| {
                    (acc & !(mask << off)) | (((joint >> shift) & mask) << off)
                })
            }
            ResolvedPermutation::Xor {
                fields,
                target_offset,
                f,
            } => index ^ (f(gather(fields, index)) << target_offset),
        }
    }
}
