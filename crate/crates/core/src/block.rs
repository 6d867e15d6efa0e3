//! Block-structured state `Σ_i |i⟩ ⊗ φ_i`.
//!
//! The index register is held classically: one sparse local state per
//! index label `i < d`. Every operation the preparation circuits apply
//! either acts on the local registers only or is controlled classically on
//! `i`, so the block form is preserved and the cost is the total support of
//! the `φ_i` rather than the full tensor product.

use std::collections::BTreeMap;
use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;

use crate::error::{invalid, PrepError, Result};
use crate::layout::{RegisterLayout, Selector};
use crate::permutation::BasisPermutation;
use crate::statevector::Statevector;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Sparse amplitudes over a local layout, keyed by global index.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseState {
    layout: RegisterLayout,
    amps: BTreeMap<u64, Complex64>,
}

impl SparseState {
    pub fn basis(layout: RegisterLayout, assignments: &[(&str, u64)], amp: Complex64) -> Result<Self> {
        let index = layout.index_of(assignments)?;
        let mut amps = BTreeMap::new();
        if amp != ZERO {
            amps.insert(index, amp);
        }
        Ok(Self { layout, amps })
    }

    pub fn layout(&self) -> &RegisterLayout {
        &self.layout
    }

    pub fn get(&self, index: u64) -> Complex64 {
        self.amps.get(&index).copied().unwrap_or(ZERO)
    }

    pub fn iter(&self) -> impl Iterator<Item = (u64, Complex64)> + '_ {
        self.amps.iter().map(|(k, v)| (*k, *v))
    }

    pub fn support_len(&self) -> usize {
        self.amps.len()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.values().map(|a| a.norm_sqr()).sum()
    }

    pub fn apply_hadamard_layer(&mut self, register: &str, low_bits: usize) -> Result<()> {
        let reg = self.layout.register(register)?;
        if low_bits > reg.width() {
            return Err(invalid(format!(
                "{low_bits} Hadamards requested on `{register}` which has {} bits",
                reg.width()
            )));
        }
        for q in reg.offset()..reg.offset() + low_bits {
            let bit = 1u64 << q;
            let mut next: BTreeMap<u64, Complex64> = BTreeMap::new();
            for (&idx, &a) in &self.amps {
                let half = a * FRAC_1_SQRT_2;
                *next.entry(idx & !bit).or_insert(ZERO) += half;
                if idx & bit == 0 {
                    *next.entry(idx | bit).or_insert(ZERO) += half;
                } else {
                    *next.entry(idx | bit).or_insert(ZERO) -= half;
                }
            }
            next.retain(|_, a| *a != ZERO);
            self.amps = next;
        }
        Ok(())
    }

    pub fn apply_permutation(&mut self, perm: &BasisPermutation) -> Result<()> {
        let resolved = perm.resolve(&self.layout)?;
        self.amps = self
            .amps
            .iter()
            .map(|(&idx, &a)| (resolved.map(idx), a))
            .collect();
        Ok(())
    }

    pub(crate) fn mass_where(&self, sel: Selector) -> f64 {
        self.amps
            .iter()
            .filter(|(i, _)| sel.matches(**i))
            .map(|(_, a)| a.norm_sqr())
            .sum()
    }

    pub(crate) fn flip_where(&mut self, sel: Selector) {
        for (i, a) in self.amps.iter_mut() {
            if sel.matches(*i) {
                *a = -*a;
            }
        }
    }

    pub(crate) fn keep_where(&mut self, sel: Selector) {
        self.amps.retain(|i, _| sel.matches(*i));
    }

    pub fn scale(&mut self, factor: f64) {
        self.amps.values_mut().for_each(|a| *a *= factor);
    }

    /// ⟨self|other⟩.
    pub fn inner(&self, other: &SparseState) -> Complex64 {
        self.amps
            .iter()
            .map(|(i, a)| a.conj() * other.get(*i))
            .sum()
    }

    /// `self = alpha * other - self`.
    fn reflect_onto(&mut self, other: &SparseState, alpha: Complex64) {
        self.amps.values_mut().for_each(|a| *a = -*a);
        for (&i, &b) in &other.amps {
            *self.amps.entry(i).or_insert(ZERO) += alpha * b;
        }
        self.amps.retain(|_, a| *a != ZERO);
    }
}

/// `Σ_{i<d} |i⟩_index ⊗ φ_i` with `φ_i` sparse over a shared local layout.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockState {
    index_name: String,
    index_width: usize,
    local: RegisterLayout,
    blocks: Vec<SparseState>,
}

impl BlockState {
    /// `(1/√d) Σ_{i<d} |i⟩ ⊗ |0…0⟩_local`.
    pub fn uniform(index_name: &str, index_width: usize, d: usize, local: RegisterLayout) -> Result<Self> {
        if d == 0 || (index_width < 64 && d as u64 > 1u64 << index_width) {
            return Err(invalid(format!(
                "{d} blocks do not fit a {index_width}-bit index register"
            )));
        }
        if local.contains(index_name) {
            return Err(PrepError::DuplicateRegister(index_name.into()));
        }
        let w = Complex64::new((d as f64).sqrt().recip(), 0.0);
        let blocks = (0..d)
            .map(|_| SparseState::basis(local.clone(), &[], w))
            .collect::<Result<_>>()?;
        Ok(Self {
            index_name: index_name.into(),
            index_width,
            local,
            blocks,
        })
    }

    pub fn local_layout(&self) -> &RegisterLayout {
        &self.local
    }

    pub fn blocks(&self) -> &[SparseState] {
        &self.blocks
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    /// Applies `op(i, φ_i)` to every block.
    pub fn for_each_block(&mut self, mut op: impl FnMut(usize, &mut SparseState) -> Result<()>) -> Result<()> {
        self.blocks
            .iter_mut()
            .enumerate()
            .try_for_each(|(i, b)| op(i, b))
    }

    pub fn norm(&self) -> f64 {
        self.blocks.iter().map(SparseState::norm_sqr).sum::<f64>().sqrt()
    }

    pub fn probability<S: AsRef<str>>(&self, conditions: &[(S, u64)]) -> Result<f64> {
        let sel = self.local.selector(conditions)?;
        Ok(self.blocks.iter().map(|b| b.mass_where(sel)).sum())
    }

    pub fn apply_phase_flip<S: AsRef<str>>(&mut self, conditions: &[(S, u64)]) -> Result<()> {
        let sel = self.local.selector(conditions)?;
        self.blocks.iter_mut().for_each(|b| b.flip_where(sel));
        Ok(())
    }

    pub fn inner(&self, other: &BlockState) -> Result<Complex64> {
        if self.local != other.local || self.blocks.len() != other.blocks.len() {
            return Err(invalid("inner product of incompatible block states"));
        }
        Ok(self
            .blocks
            .iter()
            .zip(&other.blocks)
            .map(|(a, b)| a.inner(b))
            .sum())
    }

    /// `x ↦ 2|ψ⟩⟨ψ|x⟩ − x` for a normalized `psi`.
    pub fn reflect_about(&mut self, psi: &BlockState) -> Result<()> {
        let overlap = psi.inner(self)?;
        for (x, p) in self.blocks.iter_mut().zip(&psi.blocks) {
            x.reflect_onto(p, 2.0 * overlap);
        }
        Ok(())
    }

    pub fn project_and_renormalize<S: AsRef<str>>(
        &self,
        conditions: &[(S, u64)],
    ) -> Result<(BlockState, f64)> {
        let sel = self.local.selector(conditions)?;
        let mut out = self.clone();
        out.blocks.iter_mut().for_each(|b| b.keep_where(sel));
        let probability: f64 = out.blocks.iter().map(SparseState::norm_sqr).sum();
        if probability <= 0.0 {
            return Err(PrepError::ZeroProbability);
        }
        let scale = probability.sqrt().recip();
        out.blocks.iter_mut().for_each(|b| b.scale(scale));
        Ok((out, probability))
    }

    /// Dense equivalent with the index register first, then the local
    /// registers.
    pub fn to_dense(&self) -> Result<Statevector> {
        let mut layout = RegisterLayout::with_budget(self.local.max_qubits().max(self.index_width + self.local.total_qubits()));
        layout.push(&self.index_name, self.index_width)?;
        for r in self.local.registers() {
            layout.push_with_format(r.name(), r.format())?;
        }
        let mut amps = vec![ZERO; layout.dimension()];
        for (i, block) in self.blocks.iter().enumerate() {
            for (local_idx, a) in block.iter() {
                amps[(i as u64 | (local_idx << self.index_width)) as usize] = a;
            }
        }
        Ok(Statevector::from_raw(layout, amps))
    }
}
