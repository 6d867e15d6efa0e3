//! End-to-end preparations: inverse and division coefficients via the
//! multiply-and-compare test, general `f = h∘g` coefficients via tabulated
//! forward and backward maps, and uniform superpositions over any `d`.

mod blockwise;
mod dense;
mod oracles;
mod report;
mod uniform;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::arithmetic::{FunctionTablePair, OracleData, ScalarConstant};
use crate::error::{invalid, PrepError, Result};
use crate::statevector::Statevector;

pub use dense::{dense_circuit, run_dense, DenseCircuit};
pub use oracles::{
    classical_target_division, classical_target_inverse, counting_oracle_general,
    counting_oracle_inverse, counts_for, discrete_success_probability, normalized_counts,
    unnormalized_target,
};
pub use report::{reports_agree, PrepReport};
pub use uniform::{
    prepare_uniform, uniform_error_bound, uniform_theta, uniform_theta_perturbation,
    UniformErrorBound,
};

/// Tolerance for backend agreement.
pub const AGREEMENT_TOL: f64 = 1e-10;

/// Amplification rounds: planned from the raw success probability, or
/// fixed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum AaRounds {
    #[default]
    Auto,
    Fixed(usize),
}

impl fmt::Display for AaRounds {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AaRounds::Auto => f.write_str("auto"),
            AaRounds::Fixed(k) => write!(f, "{k}"),
        }
    }
}

impl FromStr for AaRounds {
    type Err = PrepError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "auto" => Ok(AaRounds::Auto),
            other => other
                .parse()
                .map(AaRounds::Fixed)
                .map_err(|_| invalid(format!("amplification rounds `{other}`: expected `auto` or a count"))),
        }
    }
}

impl From<AaRounds> for String {
    fn from(a: AaRounds) -> String {
        a.to_string()
    }
}

impl TryFrom<String> for AaRounds {
    type Error = PrepError;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

/// Simulation backend. `Block` keeps the index register classical and
/// tracks one sparse state per index value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Backend {
    #[default]
    Dense,
    Block,
}

impl fmt::Display for Backend {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Backend::Dense => "dense",
            Backend::Block => "block",
        })
    }
}

impl FromStr for Backend {
    type Err = PrepError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "dense" => Ok(Backend::Dense),
            "block" => Ok(Backend::Block),
            other => Err(invalid(format!("unknown backend `{other}` (expected dense or block)"))),
        }
    }
}

/// Reciprocal (`C/α_i`) or division (`β_i/α_i`) preparation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InversePrepConfig {
    pub data: OracleData,
    pub constant: ScalarConstant,
    /// Grid width of the superposition inside the work register.
    pub m: usize,
    pub aa: AaRounds,
    pub backend: Backend,
}

impl InversePrepConfig {
    pub fn inverse(data: OracleData, c: u64, m: usize) -> Result<Self> {
        let constant = ScalarConstant::inverse(c, &data)?;
        Self::with_constant(data, constant, m)
    }

    pub fn division(data: OracleData, betas: Vec<u64>, m: usize) -> Result<Self> {
        let constant = ScalarConstant::division(betas, &data)?;
        Self::with_constant(data, constant, m)
    }

    fn with_constant(data: OracleData, constant: ScalarConstant, m: usize) -> Result<Self> {
        let cfg = Self {
            data,
            constant,
            m,
            aa: AaRounds::Auto,
            backend: Backend::Dense,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_aa(mut self, aa: AaRounds) -> Self {
        self.aa = aa;
        self
    }

    pub fn with_backend(mut self, backend: Backend) -> Self {
        self.backend = backend;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.m == 0 || self.m > 24 {
            return Err(invalid(format!("grid width m = {} outside 1..=24", self.m)));
        }
        if self.data.has_zero() {
            return Err(invalid("reciprocal preparation needs strictly positive data"));
        }
        match &self.constant {
            ScalarConstant::Uniform(c) => {
                ScalarConstant::inverse(*c, &self.data)?;
            }
            ScalarConstant::PerIndex(b) => {
                ScalarConstant::division(b.clone(), &self.data)?;
            }
        }
        if self.m + 2 * self.data.n() > 32 {
            return Err(invalid(format!(
                "multiplier on n = {} and m = {} exceeds the 32-bit table limit",
                self.data.n(),
                self.m
            )));
        }
        Ok(())
    }

    /// Exact `t_i` the preparation must reproduce.
    pub fn counts(&self) -> Result<Vec<u64>> {
        counts_for(&self.data, &self.constant, self.m)
    }
}

/// Preparation of `f(α_i)` amplitudes from a validated table pair.
#[derive(Debug, Clone)]
pub struct GeneralPrepConfig {
    pub data: OracleData,
    pub tables: FunctionTablePair,
    pub aa: AaRounds,
    pub backend: Backend,
}

impl GeneralPrepConfig {
    pub fn new(data: OracleData, tables: FunctionTablePair) -> Result<Self> {
        let cfg = Self {
            data,
            tables,
            aa: AaRounds::Auto,
            backend: Backend::Dense,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_aa(mut self, aa: AaRounds) -> Self {
        self.aa = aa;
        self
    }

    pub fn with_backend(mut self, backend: Backend) -> Self {
        self.backend = backend;
        self
    }

    pub fn m(&self) -> usize {
        self.tables.m()
    }

    pub fn validate(&self) -> Result<()> {
        let limit = 1u64 << self.tables.n();
        if let Some(&a) = self.data.alphas().iter().find(|&&a| a >= limit) {
            return Err(invalid(format!(
                "data value {a} is outside the {}-bit domain of the forward table",
                self.tables.n()
            )));
        }
        for (i, t) in self.counts()?.into_iter().enumerate() {
            if t == 0 {
                return Err(invalid(format!(
                    "f(α_{i}) = f({}) is zero on the grid; the component would vanish",
                    self.data.alphas()[i]
                )));
            }
        }
        Ok(())
    }

    pub fn counts(&self) -> Result<Vec<u64>> {
        self.data
            .alphas()
            .iter()
            .map(|&a| counting_oracle_general(a, &self.tables))
            .collect()
    }

    /// `f(α_i)` when the tables carry their target function.
    pub fn target(&self) -> Option<Vec<f64>> {
        self.data
            .alphas()
            .iter()
            .map(|&a| self.tables.target(a))
            .collect()
    }
}

/// Either preparation, for backend-independent plumbing.
#[derive(Debug, Clone)]
pub enum PrepConfig {
    Inverse(InversePrepConfig),
    General(GeneralPrepConfig),
}

impl PrepConfig {
    pub fn backend(&self) -> Backend {
        match self {
            PrepConfig::Inverse(c) => c.backend,
            PrepConfig::General(c) => c.backend,
        }
    }

    pub fn with_backend(self, backend: Backend) -> Self {
        match self {
            PrepConfig::Inverse(c) => PrepConfig::Inverse(c.with_backend(backend)),
            PrepConfig::General(c) => PrepConfig::General(c.with_backend(backend)),
        }
    }

    pub fn aa(&self) -> AaRounds {
        match self {
            PrepConfig::Inverse(c) => c.aa,
            PrepConfig::General(c) => c.aa,
        }
    }

    pub fn data(&self) -> &OracleData {
        match self {
            PrepConfig::Inverse(c) => &c.data,
            PrepConfig::General(c) => &c.data,
        }
    }

    /// Pre-normalization target `v_i` the amplitudes approximate.
    pub fn target(&self) -> Option<Vec<f64>> {
        match self {
            PrepConfig::Inverse(c) => Some(unnormalized_target(&c.data, &c.constant)),
            PrepConfig::General(c) => c.target(),
        }
    }

    pub fn run(&self) -> Result<(Statevector, PrepReport)> {
        match self.backend() {
            Backend::Dense => run_dense(&dense_circuit(self)?, self.aa(), self.target()),
            Backend::Block => blockwise::run_block(self),
        }
    }
}

impl From<InversePrepConfig> for PrepConfig {
    fn from(c: InversePrepConfig) -> Self {
        PrepConfig::Inverse(c)
    }
}

impl From<GeneralPrepConfig> for PrepConfig {
    fn from(c: GeneralPrepConfig) -> Self {
        PrepConfig::General(c)
    }
}

/// Reciprocal or division preparation, depending on `config.constant`.
pub fn prepare_inverse(config: &InversePrepConfig) -> Result<(Statevector, PrepReport)> {
    config.validate()?;
    PrepConfig::Inverse(config.clone()).run()
}

/// Amplitudes `∝ β_i/α_i`.
pub fn prepare_division(
    data: &OracleData,
    betas: &[u64],
    m: usize,
    aa: AaRounds,
    backend: Backend,
) -> Result<(Statevector, PrepReport)> {
    let cfg = InversePrepConfig::division(data.clone(), betas.to_vec(), m)?
        .with_aa(aa)
        .with_backend(backend);
    prepare_inverse(&cfg)
}

pub fn prepare_general(config: &GeneralPrepConfig) -> Result<(Statevector, PrepReport)> {
    config.validate()?;
    PrepConfig::General(config.clone()).run()
}

/// Runs `config` on both backends and compares the reports.
pub fn simulate_equivalence_check(config: &PrepConfig) -> Result<bool> {
    let circuit = dense_circuit(config)?;
    equivalence_with_circuit(config, &circuit)
}

/// As [`simulate_equivalence_check`], with the dense side running the given
/// circuit instead of the one built from `config`.
pub fn equivalence_with_circuit(config: &PrepConfig, circuit: &DenseCircuit) -> Result<bool> {
    let (_, dense) = run_dense(circuit, config.aa(), config.target())?;
    let (_, block) = blockwise::run_block(config)?;
    Ok(reports_agree(&dense, &block, AGREEMENT_TOL))
}

/// Turns simulated amplitudes into a report. `raw` are the post-selected
/// amplitudes before amplification, `target` the unnormalized values they
/// approximate.
pub(crate) fn assemble_report(
    raw: &[f64],
    p_raw: f64,
    amplitudes: Vec<f64>,
    p_final: f64,
    rounds: usize,
    multiplications: usize,
    target: Option<Vec<f64>>,
) -> PrepReport {
    let d = raw.len() as f64;
    let scale = (p_raw * d).sqrt();
    let (fidelity, max_err) = match target {
        Some(t) => {
            let norm = t.iter().map(|x| x * x).sum::<f64>().sqrt();
            let overlap: f64 = amplitudes.iter().zip(&t).map(|(a, x)| a * x / norm).sum();
            let err = raw
                .iter()
                .zip(&t)
                .map(|(a, x)| (a * scale - x).abs())
                .fold(0.0, f64::max);
            (Some((overlap * overlap).min(1.0)), Some(err))
        }
        None => (None, None),
    };
    PrepReport {
        post_selected_amplitudes: amplitudes,
        success_probability_raw: p_raw,
        aa_rounds_used: rounds,
        success_probability_final: p_final,
        multiplication_count: multiplications,
        fidelity_vs_target: fidelity,
        max_componentwise_error: max_err,
    }
}

/// Real, nonnegative amplitudes from a phase-fixed reduced state.
pub(crate) fn real_amplitudes(reduced: &[num_complex::Complex64], d: usize) -> Result<Vec<f64>> {
    let leak: f64 = reduced[d..].iter().map(|a| a.norm_sqr()).sum();
    if leak > 1e-18 {
        return Err(PrepError::Precondition(format!(
            "post-selected state has weight {leak:.3e} on index labels ≥ {d}"
        )));
    }
    reduced[..d]
        .iter()
        .enumerate()
        .map(|(i, a)| {
            if a.im.abs() > 1e-9 || a.re < -1e-9 {
                Err(PrepError::Precondition(format!(
                    "amplitude {i} is {a}, expected a nonnegative real"
                )))
            } else {
                Ok(a.re.max(0.0))
            }
        })
        .collect()
}

#[cfg(test)]
mod tests;
