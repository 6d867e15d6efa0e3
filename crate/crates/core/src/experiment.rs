//! Experiment driver behind the command-line tool: input files, one-shot
//! runs producing a [`ReportFile`], and parameter sweeps producing CSV.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::arithmetic::{bits_for, regs, FixedPointTable, FunctionTablePair, OracleData, PredicateMode};
use crate::error::{invalid, PrepError, Result};
use crate::fixed_point::FixedPointFormat;
use crate::prep::{
    prepare_general, prepare_inverse, prepare_uniform, AaRounds, Backend, GeneralPrepConfig,
    InversePrepConfig, PrepReport,
};
use crate::resources::{aa_rounds_concrete, cost_inequality_method, cost_newton_raphson, CostModel};
use crate::statevector::Statevector;

pub const REPORT_FORMAT: &str = "ineqprep-report/1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Inverse,
    Division,
    General,
    Uniform,
    Estimate,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Inverse => "inverse",
            Mode::Division => "division",
            Mode::General => "general",
            Mode::Uniform => "uniform",
            Mode::Estimate => "estimate",
        })
    }
}

impl FromStr for Mode {
    type Err = PrepError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "inverse" => Ok(Mode::Inverse),
            "division" => Ok(Mode::Division),
            "general" => Ok(Mode::General),
            "uniform" => Ok(Mode::Uniform),
            "estimate" => Ok(Mode::Estimate),
            other => Err(invalid(format!("unknown mode `{other}`"))),
        }
    }
}

/// Everything a run needs. Data come from `data_path` or inline `alphas`
/// (and `betas` for division).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub mode: Mode,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub data_path: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alphas: Option<Vec<u64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub betas: Option<Vec<u64>>,
    /// Constant `C` of the reciprocal scheme; 1 when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<usize>,
    /// Data width; fitted to the largest value when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    /// Target dimension in uniform mode; the data length when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d: Option<usize>,
    /// Builtin function for general mode.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub f_name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g_table: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hinv_table: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub predicate: Option<PredicateMode>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    #[serde(default)]
    pub aa: AaRounds,
    #[serde(default)]
    pub backend: Backend,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shots: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_path: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn new(mode: Mode) -> Self {
        Self {
            mode,
            data_path: None,
            alphas: None,
            betas: None,
            c: None,
            m: None,
            n: None,
            d: None,
            f_name: None,
            g_table: None,
            hinv_table: None,
            predicate: None,
            epsilon: None,
            aa: AaRounds::Auto,
            backend: Backend::Dense,
            seed: None,
            shots: None,
            output_path: None,
        }
    }

    fn require_m(&self) -> Result<usize> {
        self.m
            .ok_or_else(|| invalid(format!("mode `{}` needs the grid width m", self.mode)))
    }

    fn input(&self) -> Result<DataFile> {
        match (&self.alphas, &self.data_path) {
            (Some(_), Some(_)) => Err(invalid("give either a data file or inline values, not both")),
            (Some(a), None) => Ok(DataFile {
                alphas: a.clone(),
                betas: self.betas.clone(),
            }),
            (None, Some(p)) => {
                let mut f = read_data_file(p)?;
                if self.betas.is_some() {
                    f.betas = self.betas.clone();
                }
                Ok(f)
            }
            (None, None) => Err(invalid(format!("mode `{}` needs input data", self.mode))),
        }
    }

    fn oracle_data(&self, alphas: Vec<u64>, allow_zero: bool) -> Result<OracleData> {
        let n = match self.n {
            Some(n) => n,
            None => bits_for(alphas.iter().copied().max().unwrap_or(0)),
        };
        if allow_zero {
            OracleData::with_zeros(alphas, n)
        } else {
            OracleData::new(alphas, n)
        }
    }
}

/// Cost comparison written by `estimate` mode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateReport {
    pub epsilon: f64,
    pub inequality: CostModel,
    pub newton_raphson: CostModel,
}

/// Seeded measurement samples of the index register.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SampleSummary {
    pub seed: u64,
    pub shots: usize,
    pub counts: Vec<u64>,
}

/// The document a run writes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportFile {
    pub format: String,
    pub library_version: String,
    pub config: ExperimentConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub report: Option<PrepReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub estimate: Option<EstimateReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<SampleSummary>,
    pub wall_clock_seconds: f64,
}

impl ReportFile {
    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self)
            .map(|mut s| {
                s.push('\n');
                s
            })
            .map_err(|e| PrepError::Io(e.to_string()))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| PrepError::Parse(format!("report: {e}")))
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_json()?).map_err(|e| PrepError::Io(format!("{}: {e}", path.display())))
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| PrepError::Io(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }
}

/// Executes one configuration.
pub fn run(config: &ExperimentConfig) -> Result<ReportFile> {
    let start = Instant::now();
    let mut estimate = None;
    let mut outcome: Option<(Statevector, PrepReport)> = None;

    match config.mode {
        Mode::Inverse => {
            let input = config.input()?;
            let data = config.oracle_data(input.alphas, false)?;
            let cfg = InversePrepConfig::inverse(data, config.c.unwrap_or(1), config.require_m()?)?
                .with_aa(config.aa)
                .with_backend(config.backend);
            outcome = Some(prepare_inverse(&cfg)?);
        }
        Mode::Division => {
            let input = config.input()?;
            let betas = input
                .betas
                .ok_or_else(|| invalid("division mode needs β values (second data column or --betas)"))?;
            let data = config.oracle_data(input.alphas, false)?;
            let cfg = InversePrepConfig::division(data, betas, config.require_m()?)?
                .with_aa(config.aa)
                .with_backend(config.backend);
            outcome = Some(prepare_inverse(&cfg)?);
        }
        Mode::General => {
            let input = config.input()?;
            let tables = general_tables(config, &input.alphas)?;
            let data = OracleData::with_zeros(input.alphas, tables.n())?;
            let cfg = GeneralPrepConfig::new(data, tables)?
                .with_aa(config.aa)
                .with_backend(config.backend);
            outcome = Some(prepare_general(&cfg)?);
        }
        Mode::Uniform => {
            let d = match config.d {
                Some(d) => d,
                None => config.input()?.alphas.len(),
            };
            outcome = Some(prepare_uniform(d)?);
        }
        Mode::Estimate => {
            let eps = config
                .epsilon
                .ok_or_else(|| invalid("estimate mode needs the precision ε"))?;
            let mut inequality = cost_inequality_method();
            if config.alphas.is_some() || config.data_path.is_some() {
                let data = config.oracle_data(config.input()?.alphas, false)?;
                inequality.aa_rounds = aa_rounds_concrete(&data, config.c.unwrap_or(1), config.require_m()?)?;
            }
            estimate = Some(EstimateReport {
                epsilon: eps,
                inequality,
                newton_raphson: cost_newton_raphson(eps)?,
            });
        }
    }

    let samples = match (&outcome, config.shots) {
        (Some((state, report)), Some(shots)) if shots > 0 => {
            let seed = config.seed.unwrap_or(0);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut counts = state.sample(regs::INDEX, shots, &mut rng)?;
            // labels ≥ d carry no weight
            counts.truncate(report.d());
            Some(SampleSummary { seed, shots, counts })
        }
        _ => None,
    };

    Ok(ReportFile {
        format: REPORT_FORMAT.into(),
        library_version: env!("CARGO_PKG_VERSION").into(),
        config: config.clone(),
        report: outcome.map(|(_, r)| r),
        estimate,
        samples,
        wall_clock_seconds: start.elapsed().as_secs_f64(),
    })
}

fn general_tables(config: &ExperimentConfig, alphas: &[u64]) -> Result<FunctionTablePair> {
    match (&config.f_name, &config.g_table, &config.hinv_table) {
        (Some(name), None, None) => {
            let n = config
                .n
                .unwrap_or_else(|| bits_for(alphas.iter().copied().max().unwrap_or(0)));
            FunctionTablePair::builtin(name, n, config.require_m()?)
        }
        (None, Some(g), Some(h)) => {
            let mode = config
                .predicate
                .ok_or_else(|| invalid("custom tables need a predicate (less_than or product_less_than_one)"))?;
            let g = read_table_file(g)?;
            let h = read_table_file(h)?;
            if let Some(m) = config.m {
                if m != h.domain_bits() {
                    return Err(invalid(format!(
                        "m = {m} disagrees with the {}-bit backward table",
                        h.domain_bits()
                    )));
                }
            }
            FunctionTablePair::new("custom", g, h, mode, None)
        }
        _ => Err(invalid(
            "general mode needs either a builtin f name or both g and h⁻¹ table files",
        )),
    }
}

// ---------------------------------------------------------------------------
// input files

/// Parsed data file: `α` values and, for division, `β` values.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DataFile {
    pub alphas: Vec<u64>,
    pub betas: Option<Vec<u64>>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum JsonData {
    Plain(Vec<u64>),
    Keyed {
        alphas: Vec<u64>,
        #[serde(default)]
        betas: Option<Vec<u64>>,
    },
}

fn read_input(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| PrepError::Parse(format!("{}: {e}", path.display())))
}

fn looks_like_json(path: &Path, text: &str) -> bool {
    path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json"))
        || text.trim_start().starts_with(['[', '{'])
}

/// CSV with one integer per line (`α`) or two (`α,β`), an optional header
/// line, and `#` comments; or JSON as `[α…]` or `{"alphas": […], "betas": […]}`.
pub fn read_data_file(path: &Path) -> Result<DataFile> {
    let text = read_input(path)?;
    parse_data(&text, looks_like_json(path, &text)).map_err(|e| match e {
        PrepError::Parse(msg) => PrepError::Parse(format!("{}: {msg}", path.display())),
        other => other,
    })
}

pub fn parse_data(text: &str, json: bool) -> Result<DataFile> {
    if json {
        let parsed: JsonData = serde_json::from_str(text).map_err(|e| PrepError::Parse(e.to_string()))?;
        return Ok(match parsed {
            JsonData::Plain(alphas) => DataFile { alphas, betas: None },
            JsonData::Keyed { alphas, betas } => DataFile { alphas, betas },
        });
    }
    let mut alphas = Vec::new();
    let mut betas = Vec::new();
    let mut columns = None;
    for (line_no, record) in csv_records(text)?.into_iter().enumerate() {
        let fields: Vec<&str> = record.iter().map(str::trim).collect();
        if line_no == 0 && fields.iter().any(|f| f.parse::<u64>().is_err()) && is_header(&fields) {
            continue;
        }
        let width = *columns.get_or_insert(fields.len());
        if fields.len() != width || !(1..=2).contains(&width) {
            return Err(PrepError::Parse(format!(
                "line {}: expected {} integer column(s), found {}",
                line_no + 1,
                width.clamp(1, 2),
                fields.len()
            )));
        }
        let parse = |s: &str| {
            s.parse::<u64>()
                .map_err(|_| PrepError::Parse(format!("line {}: `{s}` is not a nonnegative integer", line_no + 1)))
        };
        alphas.push(parse(fields[0])?);
        if width == 2 {
            betas.push(parse(fields[1])?);
        }
    }
    if alphas.is_empty() {
        return Err(PrepError::Parse("no data rows".into()));
    }
    Ok(DataFile {
        alphas,
        betas: (!betas.is_empty()).then_some(betas),
    })
}

fn is_header(fields: &[&str]) -> bool {
    fields
        .iter()
        .all(|f| f.chars().next().is_some_and(|c| c.is_ascii_alphabetic()))
}

fn csv_records(text: &str) -> Result<Vec<csv::StringRecord>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut out = Vec::new();
    for rec in reader.records() {
        let rec = rec.map_err(|e| PrepError::Parse(e.to_string()))?;
        if rec.iter().all(str::is_empty) {
            continue;
        }
        out.push(rec);
    }
    Ok(out)
}

/// Exact value of a nonnegative decimal literal as `numerator · 2^-point`.
/// Fails unless the literal is a dyadic rational.
pub fn parse_dyadic(s: &str) -> Result<(u64, usize)> {
    let s = s.trim();
    let bad = || PrepError::Parse(format!("`{s}` is not a nonnegative decimal number"));
    let (int_part, frac_part) = s.split_once('.').unwrap_or((s, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad());
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let frac = frac_part.trim_end_matches('0');
    let k = frac.len();
    if k > 27 {
        return Err(PrepError::Parse(format!("`{s}` has too many fractional digits")));
    }
    let digits: u128 = format!("{}{frac}", if int_part.is_empty() { "0" } else { int_part })
        .parse()
        .map_err(|_| bad())?;
    let five_k = 5u128.pow(k as u32);
    if !digits.is_multiple_of(five_k) {
        return Err(PrepError::Parse(format!(
            "`{s}` is not exactly representable in binary fixed point"
        )));
    }
    // digits / 10^k = (digits / 5^k) / 2^k
    let mut num = digits / five_k;
    let mut point = k;
    while point > 0 && num.is_multiple_of(2) {
        num /= 2;
        point -= 1;
    }
    let num = u64::try_from(num).map_err(|_| PrepError::Parse(format!("`{s}` is too large")))?;
    Ok((num, point))
}

/// Two-column `label,value` table covering labels `0..2^k` exactly once.
/// Values are decimals; the format's binary point is the smallest that
/// represents all of them exactly.
pub fn read_table_file(path: &Path) -> Result<FixedPointTable> {
    let text = read_input(path)?;
    parse_table(&text).map_err(|e| match e {
        PrepError::Parse(msg) => PrepError::Parse(format!("{}: {msg}", path.display())),
        other => other,
    })
}

pub fn parse_table(text: &str) -> Result<FixedPointTable> {
    let mut rows: Vec<(u64, u64, usize)> = Vec::new();
    for (line_no, record) in csv_records(text)?.into_iter().enumerate() {
        let fields: Vec<&str> = record.iter().collect();
        if line_no == 0 && is_header(&fields) {
            continue;
        }
        if fields.len() != 2 {
            return Err(PrepError::Parse(format!(
                "line {}: expected `label,value`",
                line_no + 1
            )));
        }
        let label = fields[0]
            .parse::<u64>()
            .map_err(|_| PrepError::Parse(format!("line {}: bad label `{}`", line_no + 1, fields[0])))?;
        let (num, point) = parse_dyadic(fields[1])?;
        rows.push((label, num, point));
    }
    if rows.is_empty() {
        return Err(PrepError::Parse("empty table".into()));
    }
    rows.sort_by_key(|r| r.0);
    if rows.iter().enumerate().any(|(i, r)| r.0 != i as u64) {
        return Err(PrepError::Parse("labels must be 0, 1, …, 2^k − 1, each once".into()));
    }
    let point = rows.iter().map(|r| r.2).max().unwrap_or(0);
    let values = rows
        .iter()
        .map(|&(_, num, p)| {
            num.checked_shl((point - p) as u32)
                .filter(|v| v >> (point - p) == num)
                .ok_or_else(|| PrepError::Parse("table value too large after alignment".into()))
        })
        .collect::<Result<Vec<u64>>>()?;
    let width = values
        .iter()
        .map(|&v| bits_for(v))
        .max()
        .unwrap_or(1)
        .max(point)
        .max(1);
    FixedPointTable::new(FixedPointFormat::new(width, point)?, values)
}

// ---------------------------------------------------------------------------
// sweeps

/// Cartesian grid over named parameters, first axis varying slowest.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SweepGrid {
    axes: Vec<(String, Vec<String>)>,
}

pub const SWEEP_PARAMS: [&str; 7] = ["m", "n", "c", "d", "aa", "backend", "epsilon"];

impl SweepGrid {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds an axis from `name=v1,v2,…` or `name=lo..hi` (inclusive).
    pub fn parse_axis(&mut self, spec: &str) -> Result<&mut Self> {
        let (name, values) = spec
            .split_once('=')
            .ok_or_else(|| invalid(format!("sweep `{spec}`: expected name=values")))?;
        let name = name.trim();
        if !SWEEP_PARAMS.contains(&name) {
            return Err(invalid(format!(
                "cannot sweep `{name}` (supported: {})",
                SWEEP_PARAMS.join(", ")
            )));
        }
        if self.axes.iter().any(|(n, _)| n == name) {
            return Err(invalid(format!("`{name}` swept twice")));
        }
        let values = values.trim();
        let list: Vec<String> = if let Some((lo, hi)) = values.split_once("..") {
            let lo: u64 = lo.trim().parse().map_err(|_| invalid(format!("bad range start in `{spec}`")))?;
            let hi: u64 = hi.trim().parse().map_err(|_| invalid(format!("bad range end in `{spec}`")))?;
            (lo..=hi).map(|v| v.to_string()).collect()
        } else {
            values
                .split(',')
                .map(str::trim)
                .filter(|v| !v.is_empty())
                .map(String::from)
                .collect()
        };
        self.axes.push((name.into(), list));
        Ok(self)
    }

    pub fn axes(&self) -> &[(String, Vec<String>)] {
        &self.axes
    }

    /// Grid points in order. A grid without axes, or with an empty axis,
    /// has no points.
    pub fn points(&self) -> Vec<Vec<(String, String)>> {
        if self.axes.is_empty() {
            return Vec::new();
        }
        let mut points: Vec<Vec<(String, String)>> = vec![Vec::new()];
        for (name, values) in &self.axes {
            points = points
                .into_iter()
                .flat_map(|p| {
                    values.iter().map(move |v| {
                        let mut q = p.clone();
                        q.push((name.clone(), v.clone()));
                        q
                    })
                })
                .collect();
        }
        points
    }
}

fn apply_param(config: &mut ExperimentConfig, name: &str, value: &str) -> Result<()> {
    let int = |v: &str| {
        v.parse::<u64>()
            .map_err(|_| invalid(format!("sweep value `{v}` for `{name}` is not an integer")))
    };
    match name {
        "m" => config.m = Some(int(value)? as usize),
        "n" => config.n = Some(int(value)? as usize),
        "c" => config.c = Some(int(value)?),
        "d" => config.d = Some(int(value)? as usize),
        "aa" => config.aa = value.parse()?,
        "backend" => config.backend = value.parse()?,
        "epsilon" => {
            config.epsilon = Some(
                value
                    .parse()
                    .map_err(|_| invalid(format!("sweep value `{value}` for ε is not a number")))?,
            )
        }
        other => return Err(invalid(format!("cannot sweep `{other}`"))),
    }
    Ok(())
}

pub const SWEEP_METRICS: [&str; 4] = ["max_componentwise_error", "fidelity", "p_raw", "rounds"];

/// Runs every grid point (concurrently) and renders one CSV row per point
/// in grid order.
pub fn batch_sweep(template: &ExperimentConfig, grid: &SweepGrid) -> Result<String> {
    if template.mode == Mode::Estimate {
        return Err(invalid("estimate mode cannot be swept"));
    }
    let points = grid.points();
    let rows: Vec<Result<Vec<String>>> = points
        .par_iter()
        .map(|point| {
            let mut cfg = template.clone();
            cfg.output_path = None;
            cfg.shots = None;
            for (name, value) in point {
                apply_param(&mut cfg, name, value)?;
            }
            let file = run(&cfg)?;
            let r = file.report.expect("preparation modes always produce a report");
            let opt = |x: Option<f64>| x.map(fmt_float).unwrap_or_default();
            let mut row: Vec<String> = point.iter().map(|(_, v)| v.clone()).collect();
            row.extend([
                opt(r.max_componentwise_error),
                opt(r.fidelity_vs_target),
                fmt_float(r.success_probability_raw),
                r.aa_rounds_used.to_string(),
            ]);
            Ok(row)
        })
        .collect();

    let mut writer = csv::Writer::from_writer(Vec::new());
    let header: Vec<&str> = grid
        .axes()
        .iter()
        .map(|(n, _)| n.as_str())
        .chain(SWEEP_METRICS)
        .collect();
    writer.write_record(&header).map_err(csv_err)?;
    for row in rows {
        writer.write_record(&row?).map_err(csv_err)?;
    }
    let bytes = writer.into_inner().map_err(|e| PrepError::Io(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| PrepError::Io(e.to_string()))
}

fn csv_err(e: csv::Error) -> PrepError {
    PrepError::Io(e.to_string())
}

fn fmt_float(x: f64) -> String {
    format!("{x:.16e}")
}
