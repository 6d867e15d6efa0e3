//! Reversible fixed-point arithmetic on registers.
//!
//! The oracle `U_o`, the multiplier and its inverse, the comparators and the
//! table-driven function loads are all realized as [`BasisPermutation`]s.
//! The checked entry points (`oracle_load`, `multiply_in_place`, …) verify
//! the support preconditions of the state before permuting it; the raw
//! builders (`*_permutation`) are what preparation programs store, because
//! amplitude amplification has to run them on states that do not satisfy
//! the forward preconditions.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, precondition, Result};
use crate::fixed_point::{compare_values, product_less_than_one, FixedPointFormat};
use crate::layout::RegisterLayout;
use crate::permutation::BasisPermutation;
use crate::statevector::{Statevector, REDUCTION_TOL};

/// Canonical register names used by the preparation circuits.
pub mod regs {
    pub const INDEX: &str = "I";
    pub const DATA: &str = "B";
    pub const WORK: &str = "A";
    pub const FLAG: &str = "flag";
    pub const FORWARD: &str = "G";
    pub const BACKWARD: &str = "H";
    pub const ANC1: &str = "anc1";
    pub const ANC2: &str = "anc2";
}

/// Width of the index register for `d` entries: `⌈log₂ d⌉`, at least 1.
pub fn index_width(d: usize) -> usize {
    (usize::BITS - d.saturating_sub(1).leading_zeros()).max(1) as usize
}

/// Bits needed to hold `value` (at least 1).
pub fn bits_for(value: u64) -> usize {
    ((u64::BITS - value.leading_zeros()) as usize).max(1)
}

/// The classical vector behind the black-box oracle: `d` integers of `n`
/// bits each.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OracleData {
    alphas: Vec<u64>,
    n: usize,
}

impl OracleData {
    /// Strictly positive entries, as the reciprocal and division schemes
    /// require.
    pub fn new(alphas: Vec<u64>, n: usize) -> Result<Self> {
        if let Some(i) = alphas.iter().position(|&a| a == 0) {
            return Err(invalid(format!("alpha[{i}] is zero; entries must be positive")));
        }
        Self::with_zeros(alphas, n)
    }

    /// Entries may be zero; used by general-function preparation where
    /// `f(0)` can be finite.
    pub fn with_zeros(alphas: Vec<u64>, n: usize) -> Result<Self> {
        if alphas.is_empty() {
            return Err(invalid("oracle data must have at least one entry"));
        }
        if n == 0 || n > 32 {
            return Err(invalid(format!("data width n = {n} outside 1..=32")));
        }
        if let Some((i, &a)) = alphas.iter().enumerate().find(|(_, &a)| a >= 1u64 << n) {
            return Err(invalid(format!("alpha[{i}] = {a} does not fit in {n} bits")));
        }
        Ok(Self { alphas, n })
    }

    /// Smallest `n` that holds every entry.
    pub fn fitted(alphas: Vec<u64>) -> Result<Self> {
        let n = bits_for(alphas.iter().copied().max().unwrap_or(1));
        Self::new(alphas, n)
    }

    pub fn alphas(&self) -> &[u64] {
        &self.alphas
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.alphas.len()
    }

    /// `l = ⌈log₂ d⌉` (at least one qubit).
    pub fn index_width(&self) -> usize {
        index_width(self.d())
    }

    pub fn min(&self) -> u64 {
        self.alphas.iter().copied().min().unwrap_or(0)
    }

    pub fn has_zero(&self) -> bool {
        self.alphas.contains(&0)
    }
}

/// Comparator threshold numerator: a single `C` (reciprocal scheme) or one
/// `β_i` per index (division scheme).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScalarConstant {
    Uniform(u64),
    PerIndex(Vec<u64>),
}

impl ScalarConstant {
    /// `1 ≤ C ≤ min α`.
    pub fn inverse(c: u64, data: &OracleData) -> Result<Self> {
        if c == 0 {
            return Err(invalid("normalization constant C must be positive"));
        }
        if data.has_zero() {
            return Err(invalid("reciprocal preparation needs strictly positive data"));
        }
        if c > data.min() {
            return Err(invalid(format!(
                "C = {c} exceeds the smallest data entry {}",
                data.min()
            )));
        }
        Ok(ScalarConstant::Uniform(c))
    }

    /// `1 ≤ β_i ≤ α_i` for every index.
    pub fn division(betas: Vec<u64>, data: &OracleData) -> Result<Self> {
        if betas.len() != data.d() {
            return Err(invalid(format!(
                "{} betas given for {} data entries",
                betas.len(),
                data.d()
            )));
        }
        for (i, (&b, &a)) in betas.iter().zip(data.alphas()).enumerate() {
            if b == 0 {
                return Err(invalid(format!("beta[{i}] is zero")));
            }
            if b > a {
                return Err(invalid(format!("beta[{i}] = {b} exceeds alpha[{i}] = {a}")));
            }
        }
        Ok(ScalarConstant::PerIndex(betas))
    }

    /// Numerator for index `i`.
    pub fn numerator(&self, i: usize) -> u64 {
        match self {
            ScalarConstant::Uniform(c) => *c,
            ScalarConstant::PerIndex(b) => b[i],
        }
    }

    /// Integer comparator threshold `numerator · 2^m` for index `i`.
    pub fn threshold(&self, i: usize, m: usize) -> u64 {
        self.numerator(i) << m
    }
}

/// How the forward value `g(α)` and the backward value `h⁻¹(j)` are tested.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PredicateMode {
    /// accept iff `h⁻¹(j) < g(α)`
    LessThan,
    /// accept iff `g(α) · h⁻¹(j) < 1`
    ProductLessThanOne,
}

impl PredicateMode {
    /// Exact evaluation of the acceptance predicate on raw labels.
    pub fn accepts(
        self,
        g: u64,
        g_format: FixedPointFormat,
        h: u64,
        h_format: FixedPointFormat,
    ) -> Result<bool> {
        match self {
            PredicateMode::LessThan => {
                Ok(compare_values(h, h_format, g, g_format) == std::cmp::Ordering::Less)
            }
            PredicateMode::ProductLessThanOne => product_less_than_one(g, g_format, h, h_format),
        }
    }
}

/// A total map from every label of a `domain_bits`-wide register to a
/// fixed-point output.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FixedPointTable {
    format: FixedPointFormat,
    values: Vec<u64>,
}

impl FixedPointTable {
    pub fn new(format: FixedPointFormat, values: Vec<u64>) -> Result<Self> {
        if values.len() < 2 || !values.len().is_power_of_two() {
            return Err(invalid(format!(
                "table must cover a full register domain, got {} entries",
                values.len()
            )));
        }
        if let Some((i, v)) = values.iter().enumerate().find(|(_, &v)| !format.fits(v)) {
            return Err(invalid(format!(
                "table entry {i} = {v} does not fit {} bits",
                format.width()
            )));
        }
        Ok(Self { format, values })
    }

    pub fn from_fn(domain_bits: usize, format: FixedPointFormat, f: impl Fn(u64) -> u64) -> Result<Self> {
        Self::new(format, (0..1u64 << domain_bits).map(f).collect())
    }

    pub fn format(&self) -> FixedPointFormat {
        self.format
    }

    pub fn values(&self) -> &[u64] {
        &self.values
    }

    pub fn domain_bits(&self) -> usize {
        self.values.len().trailing_zeros() as usize
    }

    pub fn get(&self, label: u64) -> u64 {
        self.values[label as usize]
    }
}

pub type TargetFn = Arc<dyn Fn(u64) -> f64 + Send + Sync>;

/// Forward map `g` on data labels and backward map `h⁻¹` on the `m`-bit
/// grid, validated so that the accepted grid points for every `α` are
/// exactly `{ j : j·2^-m < f(α) }`.
#[derive(Clone)]
pub struct FunctionTablePair {
    name: String,
    g: FixedPointTable,
    hinv: FixedPointTable,
    mode: PredicateMode,
    target: Option<TargetFn>,
}

impl fmt::Debug for FunctionTablePair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FunctionTablePair")
            .field("name", &self.name)
            .field("mode", &self.mode)
            .field("g_format", &self.g.format)
            .field("hinv_format", &self.hinv.format)
            .field("has_target", &self.target.is_some())
            .finish()
    }
}

impl FunctionTablePair {
    /// Validates the pair by exhaustive check over `domain(g) × grid`.
    ///
    /// Without a `target` only the prefix shape of every accepted set is
    /// checked; with one, the accepted count must also equal the number of
    /// grid points strictly below `f(α)`.
    pub fn new(
        name: impl Into<String>,
        g: FixedPointTable,
        hinv: FixedPointTable,
        mode: PredicateMode,
        target: Option<TargetFn>,
    ) -> Result<Self> {
        let pair = Self {
            name: name.into(),
            g,
            hinv,
            mode,
            target,
        };
        let m = pair.m();
        let grid = 1u64 << m;
        for alpha in 0..pair.g.values.len() as u64 {
            let mut count = 0u64;
            let mut closed = false;
            for j in 0..grid {
                if pair.accepts(alpha, j)? {
                    if closed {
                        return Err(invalid(format!(
                            "accepted grid points for alpha = {alpha} are not a prefix (j = {j})"
                        )));
                    }
                    count += 1;
                } else {
                    closed = true;
                }
            }
            if let Some(f) = &pair.target {
                let fa = f(alpha);
                let scale = (grid as f64).recip();
                let want = (0..grid).filter(|&j| (j as f64) * scale < fa).count() as u64;
                if want != count {
                    return Err(invalid(format!(
                        "tables accept {count} grid points for alpha = {alpha}, target f = {fa} needs {want}"
                    )));
                }
            }
        }
        Ok(pair)
    }

    /// `f(α) = 1/√(1+α)` via `g(α) = 1+α` and `h⁻¹(j) = (j·2^-m)²` with the
    /// product test `g · h⁻¹ < 1`.
    pub fn inv_sqrt_1p(n: usize, m: usize) -> Result<Self> {
        check_widths(n, m)?;
        let g = FixedPointTable::from_fn(n, FixedPointFormat::integer(n + 1), |a| a + 1)?;
        let hinv = FixedPointTable::from_fn(m, FixedPointFormat::fraction(2 * m), |j| j * j)?;
        Self::new(
            "inv_sqrt_1p",
            g,
            hinv,
            PredicateMode::ProductLessThanOne,
            Some(Arc::new(|a| 1.0 / (1.0 + a as f64).sqrt())),
        )
    }

    /// `f(α) = 1/α` as `α · (j·2^-m) < 1`: the reciprocal scheme with `C = 1`.
    pub fn reciprocal(n: usize, m: usize) -> Result<Self> {
        check_widths(n, m)?;
        let g = FixedPointTable::from_fn(n, FixedPointFormat::integer(n), |a| a)?;
        let hinv = FixedPointTable::from_fn(m, FixedPointFormat::fraction(m), |j| j)?;
        Self::new(
            "reciprocal",
            g,
            hinv,
            PredicateMode::ProductLessThanOne,
            Some(Arc::new(|a| 1.0 / a as f64)),
        )
    }

    /// `f(α) = α·2^-n` as `j·2^-m < α·2^-n` (identity tables).
    pub fn linear(n: usize, m: usize) -> Result<Self> {
        check_widths(n, m)?;
        let g = FixedPointTable::from_fn(n, FixedPointFormat::fraction(n), |a| a)?;
        let hinv = FixedPointTable::from_fn(m, FixedPointFormat::fraction(m), |j| j)?;
        let scale = (-(n as f64)).exp2();
        Self::new(
            "linear",
            g,
            hinv,
            PredicateMode::LessThan,
            Some(Arc::new(move |a| a as f64 * scale)),
        )
    }

    pub fn builtin(name: &str, n: usize, m: usize) -> Result<Self> {
        match name {
            "inv_sqrt_1p" => Self::inv_sqrt_1p(n, m),
            "reciprocal" => Self::reciprocal(n, m),
            "linear" => Self::linear(n, m),
            other => Err(invalid(format!(
                "unknown builtin function `{other}` (expected inv_sqrt_1p, reciprocal or linear)"
            ))),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn g(&self) -> &FixedPointTable {
        &self.g
    }

    pub fn hinv(&self) -> &FixedPointTable {
        &self.hinv
    }

    pub fn mode(&self) -> PredicateMode {
        self.mode
    }

    /// Width of the data labels the forward table accepts.
    pub fn n(&self) -> usize {
        self.g.domain_bits()
    }

    /// Width of the superposition grid.
    pub fn m(&self) -> usize {
        self.hinv.domain_bits()
    }

    pub fn target(&self, alpha: u64) -> Option<f64> {
        self.target.as_ref().map(|f| f(alpha))
    }

    pub fn has_target(&self) -> bool {
        self.target.is_some()
    }

    /// Whether grid point `j` is accepted for data label `alpha`.
    pub fn accepts(&self, alpha: u64, j: u64) -> Result<bool> {
        self.mode.accepts(
            self.g.get(alpha),
            self.g.format,
            self.hinv.get(j),
            self.hinv.format,
        )
    }

    /// Multiplier invocations of the comparator (product computed and
    /// uncomputed) or zero for a plain comparison.
    pub fn multiplications(&self) -> usize {
        match self.mode {
            PredicateMode::LessThan => 0,
            PredicateMode::ProductLessThanOne => 2,
        }
    }
}

fn check_widths(n: usize, m: usize) -> Result<()> {
    if n == 0 || m == 0 || n > 16 || m > 16 {
        return Err(invalid(format!("table widths n = {n}, m = {m} outside 1..=16")));
    }
    Ok(())
}

/// Support precondition an arithmetic step places on its input state.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Guard {
    /// register label is 0 everywhere in the support
    Clear(String),
    /// register label is below the bound everywhere in the support
    Below(String, u64),
    NonZero(String),
    /// work label is `data · j` with `j < 2^m` (image of the multiplier)
    ProductImage { data: String, work: String, m: usize },
}

impl Guard {
    pub fn verify(&self, layout: &RegisterLayout, support: impl Iterator<Item = (u64, Complex64)>) -> Result<()> {
        match self {
            Guard::Clear(name) => {
                let r = layout.register(name)?;
                for (idx, _) in support {
                    if r.label(idx) != 0 {
                        return Err(precondition(format!(
                            "register `{name}` must be |0⟩ but holds label {}",
                            r.label(idx)
                        )));
                    }
                }
            }
            Guard::Below(name, bound) => {
                let r = layout.register(name)?;
                for (idx, _) in support {
                    if r.label(idx) >= *bound {
                        return Err(precondition(format!(
                            "register `{name}` has support on label {} (must be below {bound})",
                            r.label(idx)
                        )));
                    }
                }
            }
            Guard::NonZero(name) => {
                let r = layout.register(name)?;
                for (idx, _) in support {
                    if r.label(idx) == 0 {
                        return Err(precondition(format!(
                            "register `{name}` has support on label 0"
                        )));
                    }
                }
            }
            Guard::ProductImage { data, work, m } => {
                let (b, a) = (layout.register(data)?, layout.register(work)?);
                for (idx, _) in support {
                    let (bv, av) = (b.label(idx), a.label(idx));
                    if bv == 0 || av % bv != 0 || av / bv >= 1u64 << m {
                        return Err(precondition(format!(
                            "label {av} of `{work}` is not a product of {bv} and an {m}-bit grid value"
                        )));
                    }
                }
            }
        }
        Ok(())
    }
}

fn verify_all(state: &Statevector, guards: &[Guard]) -> Result<()> {
    guards
        .iter()
        .try_for_each(|g| g.verify(state.layout(), state.support()))
}

// ---------------------------------------------------------------------------
// permutation builders

/// `|i⟩|b⟩ ↦ |i⟩|b ⊕ α_i⟩` for `i < d`, identity for `i ≥ d`.
pub fn oracle_permutation(
    layout: &RegisterLayout,
    data: &OracleData,
    index: &str,
    target: &str,
) -> Result<BasisPermutation> {
    let iw = layout.width(index)?;
    if data.d() as u64 > 1u64 << iw {
        return Err(invalid(format!(
            "index register `{index}` ({iw} bits) cannot address {} entries",
            data.d()
        )));
    }
    let alphas = data.alphas().to_vec();
    BasisPermutation::xor_load(layout, &[index], target, move |i| {
        alphas.get(i as usize).copied().unwrap_or(0)
    })
}

/// Multiplier on `(data, work)`: `|b⟩|j⟩ ↦ |b⟩|b·j⟩` for `b ≥ 1`, `j < 2^m`
/// with `m = width(work) − width(data)`. The partial injection is completed
/// to a bijection of the work register for each `b` by mapping the
/// remaining labels, in order, onto the unused products. `b = 0` acts as the
/// identity.
pub fn multiply_permutation(layout: &RegisterLayout, data: &str, work: &str) -> Result<BasisPermutation> {
    let (bw, aw) = (layout.width(data)?, layout.width(work)?);
    if aw <= bw {
        return Err(invalid(format!(
            "work register `{work}` ({aw} bits) must be wider than `{data}` ({bw} bits)"
        )));
    }
    let m = aw - bw;
    let a_dim = 1usize << aw;
    let mut table = vec![0u64; 1usize << (aw + bw)];
    let mut used = vec![false; a_dim];
    for b in 0..1u64 << bw {
        let row = |a: usize| b as usize | (a << bw);
        if b == 0 {
            for a in 0..a_dim {
                table[row(a)] = row(a) as u64;
            }
            continue;
        }
        used.iter_mut().for_each(|u| *u = false);
        for j in 0..1usize << m {
            let prod = b as usize * j;
            table[row(j)] = row(prod) as u64;
            used[prod] = true;
        }
        let mut free = used.iter().enumerate().filter(|(_, &u)| !u).map(|(a, _)| a);
        for a in (1usize << m)..a_dim {
            let dst = free.next().expect("counts of free sources and targets agree");
            table[row(a)] = row(dst) as u64;
        }
    }
    BasisPermutation::from_table(layout, &[data, work], table)
}

/// `flag ^= [work ≥ threshold]`.
pub fn compare_permutation(
    layout: &RegisterLayout,
    work: &str,
    threshold: u64,
    flag: &str,
) -> Result<BasisPermutation> {
    check_flag(layout, flag)?;
    BasisPermutation::xor_load(layout, &[work], flag, move |a| (a >= threshold) as u64)
}

/// `flag ^= [work ≥ thresholds[i]]` with `i` the index label; index labels
/// past the table never flip.
pub fn indexed_compare_permutation(
    layout: &RegisterLayout,
    index: &str,
    work: &str,
    thresholds: Vec<u64>,
    flag: &str,
) -> Result<BasisPermutation> {
    check_flag(layout, flag)?;
    let iw = layout.width(index)?;
    let imask = (1u64 << iw) - 1;
    BasisPermutation::xor_load(layout, &[index, work], flag, move |x| {
        let (i, a) = (x & imask, x >> iw);
        thresholds
            .get(i as usize)
            .map_or(0, |&t| (a >= t) as u64)
    })
}

/// `dst ^= table[src]`.
pub fn function_load_permutation(
    layout: &RegisterLayout,
    src: &str,
    dst: &str,
    table: &[u64],
) -> Result<BasisPermutation> {
    let sw = layout.width(src)?;
    if table.len() as u64 != 1u64 << sw {
        return Err(invalid(format!(
            "table has {} entries but `{src}` has {} labels",
            table.len(),
            1u64 << sw
        )));
    }
    let table = table.to_vec();
    BasisPermutation::xor_load(layout, &[src], dst, move |x| table[x as usize])
}

/// `flag ^= ¬predicate(g, h)`, operand formats taken from the layout.
pub fn compare_general_permutation(
    layout: &RegisterLayout,
    forward: &str,
    backward: &str,
    mode: PredicateMode,
    flag: &str,
) -> Result<BasisPermutation> {
    check_flag(layout, flag)?;
    let (g, h) = (layout.register(forward)?, layout.register(backward)?);
    let (gf, hf, gw) = (g.format(), h.format(), g.width());
    // surfaces overflow before building
    mode.accepts(0, gf, 0, hf)?;
    let gmask = (1u64 << gw) - 1;
    BasisPermutation::xor_load(layout, &[forward, backward], flag, move |x| {
        let accepted = mode.accepts(x & gmask, gf, x >> gw, hf).unwrap_or(false);
        (!accepted) as u64
    })
}

fn check_flag(layout: &RegisterLayout, flag: &str) -> Result<()> {
    if layout.width(flag)? != 1 {
        return Err(invalid(format!("flag register `{flag}` must be a single qubit")));
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// checked operations

/// `U_o`: `|i⟩_I|0⟩_B ↦ |i⟩_I|α_i⟩_B`. Requires the index support below `d`
/// and `B` in |0⟩.
pub fn oracle_load(state: &mut Statevector, data: &OracleData) -> Result<()> {
    let perm = oracle_permutation(state.layout(), data, regs::INDEX, regs::DATA)?;
    verify_all(
        state,
        &[
            Guard::Below(regs::INDEX.into(), data.d() as u64),
            Guard::Clear(regs::DATA.into()),
        ],
    )?;
    state.apply_permutation(&perm)
}

/// `U_o⁻¹`. Afterwards `B` must be back in |0⟩ (marginal within 1e-9),
/// otherwise the data register was not correlated with the index as the
/// oracle writes it.
pub fn oracle_unload(state: &mut Statevector, data: &OracleData) -> Result<()> {
    let perm = oracle_permutation(state.layout(), data, regs::INDEX, regs::DATA)?;
    verify_all(state, &[Guard::Below(regs::INDEX.into(), data.d() as u64)])?;
    state.apply_permutation(&perm)?;
    let norm2 = state.norm().powi(2);
    let clear = state.marginal(regs::DATA)?[0];
    if (norm2 - clear).abs() > REDUCTION_TOL {
        return Err(precondition(format!(
            "data register not cleared by the inverse oracle (residual mass {:.3e})",
            norm2 - clear
        )));
    }
    Ok(())
}

/// `|α⟩_data|j⟩_work ↦ |α⟩_data|α·j⟩_work`.
pub fn multiply_in_place(state: &mut Statevector, data: &str, work: &str) -> Result<()> {
    let perm = multiply_permutation(state.layout(), data, work)?;
    let m = state.layout().width(work)? - state.layout().width(data)?;
    verify_all(
        state,
        &[Guard::NonZero(data.into()), Guard::Below(work.into(), 1u64 << m)],
    )?;
    state.apply_permutation(&perm)
}

pub fn uncompute_multiply(state: &mut Statevector, data: &str, work: &str) -> Result<()> {
    let perm = multiply_permutation(state.layout(), data, work)?.inverse();
    let m = state.layout().width(work)? - state.layout().width(data)?;
    verify_all(
        state,
        &[Guard::ProductImage {
            data: data.into(),
            work: work.into(),
            m,
        }],
    )?;
    state.apply_permutation(&perm)
}

/// `flag ^= [work ≥ threshold]`; ties go to `flag = 1`.
pub fn compare_flag(state: &mut Statevector, work: &str, threshold: u64, flag: &str) -> Result<()> {
    let perm = compare_permutation(state.layout(), work, threshold, flag)?;
    verify_all(state, &[Guard::Clear(flag.into())])?;
    state.apply_permutation(&perm)
}

/// `|x⟩_src|0⟩_dst ↦ |x⟩_src|table(x)⟩_dst`.
pub fn apply_function_to_register(state: &mut Statevector, src: &str, dst: &str, table: &[u64]) -> Result<()> {
    let perm = function_load_permutation(state.layout(), src, dst, table)?;
    verify_all(state, &[Guard::Clear(dst.into())])?;
    state.apply_permutation(&perm)
}

/// Sets `flag` where the predicate between the forward and backward
/// registers fails, so `flag = 0` marks accepted branches.
pub fn compare_general(
    state: &mut Statevector,
    forward: &str,
    backward: &str,
    mode: PredicateMode,
    flag: &str,
) -> Result<()> {
    let perm = compare_general_permutation(state.layout(), forward, backward, mode, flag)?;
    verify_all(state, &[Guard::Clear(flag.into())])?;
    state.apply_permutation(&perm)
}
