//! Acceptance gate: one PASS/FAIL line per criterion, nonzero exit if any
//! criterion fails.

use std::process::ExitCode;
use std::time::Instant;

use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use ineqprep::amplification::amplified_probability;
use ineqprep::arithmetic::{multiply_in_place, uncompute_multiply, FunctionTablePair, OracleData};
use ineqprep::layout::RegisterLayout;
use ineqprep::permutation::BasisPermutation;
use ineqprep::prep::{
    counting_oracle_general, prepare_general, prepare_inverse, prepare_uniform, reports_agree,
    uniform_theta_perturbation, AaRounds, Backend, GeneralPrepConfig, InversePrepConfig,
    PrepReport,
};
use ineqprep::resources::{cost_inequality_method, cost_newton_raphson};
use ineqprep::statevector::Statevector;

const SUITE_SEED: u64 = 0x1ae9_2013;
const SUITE_SIZE: usize = 200;
const TOL: f64 = 1e-10;

struct Case {
    alphas: Vec<u64>,
    betas: Option<Vec<u64>>,
    n: usize,
    m: usize,
    c: u64,
}

impl Case {
    fn numerator(&self, i: usize) -> u64 {
        self.betas.as_ref().map_or(self.c, |b| b[i])
    }

    fn ratio(&self, i: usize) -> f64 {
        self.numerator(i) as f64 / self.alphas[i] as f64
    }

    fn config(&self) -> InversePrepConfig {
        let data = OracleData::new(self.alphas.clone(), self.n).unwrap();
        match &self.betas {
            Some(b) => InversePrepConfig::division(data, b.clone(), self.m).unwrap(),
            None => InversePrepConfig::inverse(data, self.c, self.m).unwrap(),
        }
    }
}

/// Grid points `j < 2^m` with `α·j < β·2^m`, counted one at a time.
fn brute_count(alpha: u64, beta: u64, m: usize) -> u64 {
    let grid = 1u64 << m;
    (0..grid).filter(|&j| alpha * j < beta * grid).count() as u64
}

fn brute_counts(case: &Case) -> Vec<u64> {
    (0..case.alphas.len())
        .map(|i| brute_count(case.alphas[i], case.numerator(i), case.m))
        .collect()
}

fn normalized(counts: &[u64]) -> Vec<f64> {
    let norm = counts.iter().map(|&t| (t * t) as f64).sum::<f64>().sqrt();
    counts.iter().map(|&t| t as f64 / norm).collect()
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn random_inverse(rng: &mut ChaCha8Rng) -> Case {
    let d = rng.gen_range(2..=8);
    let n = rng.gen_range(2..=4);
    let m = rng.gen_range(2..=6);
    let alphas: Vec<u64> = (0..d).map(|_| rng.gen_range(1..1u64 << n)).collect();
    let min = *alphas.iter().min().unwrap();
    let c = rng.gen_range(1..=min);
    Case { alphas, betas: None, n, m, c }
}

fn random_division(rng: &mut ChaCha8Rng) -> Case {
    let mut case = random_inverse(rng);
    case.betas = Some(case.alphas.iter().map(|&a| rng.gen_range(1..=a)).collect());
    case
}

fn random_state(layout: RegisterLayout, rng: &mut ChaCha8Rng) -> Statevector {
    let amps = (0..layout.dimension())
        .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect();
    Statevector::from_amplitudes(layout, amps).unwrap()
}

struct Gate {
    failures: usize,
}

impl Gate {
    fn record(&mut self, id: usize, name: &str, started: Instant, outcome: Result<String, String>) {
        let secs = started.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {id:>2} PASS  {name}: {detail} ({secs:.2}s)"),
            Err(detail) => {
                self.failures += 1;
                println!("criterion {id:>2} FAIL  {name}: {detail} ({secs:.2}s)");
            }
        }
    }
}

struct SuiteRun {
    case: Case,
    counts: Vec<u64>,
    zero_round: PrepReport,
    dense: PrepReport,
    block: PrepReport,
}

fn run_suite() -> Vec<SuiteRun> {
    let mut rng = ChaCha8Rng::seed_from_u64(SUITE_SEED);
    (0..SUITE_SIZE)
        .map(|_| {
            let case = random_inverse(&mut rng);
            let counts = brute_counts(&case);
            let cfg = case.config();
            let zero_round = prepare_inverse(&cfg.clone().with_aa(AaRounds::Fixed(0))).unwrap().1;
            let dense = prepare_inverse(&cfg.clone().with_backend(Backend::Dense)).unwrap().1;
            let block = prepare_inverse(&cfg.with_backend(Backend::Block)).unwrap().1;
            SuiteRun { case, counts, zero_round, dense, block }
        })
        .collect()
}

fn oracle_equivalence(suite: &[SuiteRun]) -> Result<String, String> {
    let mut worst = 0.0f64;
    for (k, run) in suite.iter().enumerate() {
        let expected = normalized(&run.counts);
        for report in [&run.zero_round, &run.dense] {
            let err = max_diff(&report.post_selected_amplitudes, &expected);
            worst = worst.max(err);
            if err > TOL {
                return Err(format!("config {k} {:?} C={} m={}: deviation {err:.3e}", run.case.alphas, run.case.c, run.case.m));
            }
        }
    }
    Ok(format!("{} configs, worst deviation {worst:.2e}", suite.len()))
}

fn truncation_law(suite: &[SuiteRun]) -> Result<String, String> {
    for (k, run) in suite.iter().enumerate() {
        let grid = (1u64 << run.case.m) as f64;
        for (i, &t) in run.counts.iter().enumerate() {
            let err = (t as f64 / grid - run.case.ratio(i)).abs();
            if err >= 1.0 / grid {
                return Err(format!("config {k} index {i}: error {err} ≥ 2^-{}", run.case.m));
            }
        }
        let reported = run.dense.max_componentwise_error.ok_or("missing error field")?;
        if reported >= 1.0 / grid {
            return Err(format!("config {k}: reported error {reported}"));
        }
    }
    let data = OracleData::new(vec![3, 5], 3).unwrap();
    let mut last = f64::INFINITY;
    let mut trail = Vec::new();
    for m in 2..=8 {
        let cfg = InversePrepConfig::inverse(data.clone(), 1, m).unwrap();
        let err = prepare_inverse(&cfg)
            .map_err(|e| e.to_string())?
            .1
            .max_componentwise_error
            .ok_or("missing error field")?;
        if err > last || err > 2f64.powi(-(m as i32)) {
            return Err(format!("(3,5) sweep breaks at m={m}: error {err}, previous {last}"));
        }
        trail.push(format!("{err:.4}"));
        last = err;
    }
    Ok(format!("suite within 2^-m; (3,5) sweep m=2..8: {}", trail.join(" ")))
}

fn success_identity(suite: &[SuiteRun]) -> Result<String, String> {
    let mut worst = 0.0f64;
    for (k, run) in suite.iter().enumerate() {
        let d = run.counts.len() as f64;
        let grid = (1u64 << run.case.m) as f64;
        let p0 = run.counts.iter().map(|&t| (t as f64 / grid).powi(2)).sum::<f64>() / d;
        let raw_err = (run.zero_round.success_probability_raw - p0).abs();
        let rounds = run.dense.aa_rounds_used;
        let expected = ((2 * rounds + 1) as f64 * p0.sqrt().asin()).sin().powi(2);
        let final_err = (run.dense.success_probability_final - expected).abs();
        let fidelity: f64 = run
            .dense
            .post_selected_amplitudes
            .iter()
            .zip(&run.zero_round.post_selected_amplitudes)
            .map(|(a, b)| a * b)
            .sum::<f64>()
            .powi(2);
        worst = worst.max(raw_err).max(final_err);
        if raw_err > TOL || final_err > TOL || fidelity < 1.0 - TOL {
            return Err(format!(
                "config {k}: raw err {raw_err:.3e}, final err {final_err:.3e} after {rounds} rounds, fidelity {fidelity}"
            ));
        }
        if (amplified_probability(p0, rounds) - expected).abs() > TOL {
            return Err(format!("config {k}: closed-form probability disagrees"));
        }
    }
    let amplified = suite.iter().filter(|r| r.dense.aa_rounds_used > 0).count();
    Ok(format!("{amplified} configs amplified, worst deviation {worst:.2e}"))
}

fn uniform_preparation() -> Result<String, String> {
    let mut checked = 0;
    for d in (3..=64usize).filter(|d| !d.is_power_of_two()) {
        let (_, report) = prepare_uniform(d).map_err(|e| format!("d={d}: {e}"))?;
        let raw = (report.success_probability_raw - 0.25).abs();
        let fin = (report.success_probability_final - 1.0).abs();
        let flat = max_diff(&report.post_selected_amplitudes, &vec![1.0 / (d as f64).sqrt(); d]);
        if raw > 1e-12 || fin > TOL || flat > TOL || report.aa_rounds_used != 1 {
            return Err(format!("d={d}: raw {raw:.3e}, final {fin:.3e}, flatness {flat:.3e}"));
        }
        checked += 1;
    }
    Ok(format!("{checked} dimensions, p=1/4 before and 1 after one round"))
}

fn theta_robustness() -> Result<String, String> {
    let mut tightest = f64::INFINITY;
    for d in (3..=32usize).filter(|d| !d.is_power_of_two()) {
        for eps in [1e-3, 1e-2, 5e-2, 1e-1] {
            let (p, bound) = uniform_theta_perturbation(d, eps).map_err(|e| format!("d={d} ε₀={eps}: {e}"))?;
            if (bound - (1.0 - 16.0 * eps * eps)).abs() > 1e-15 || p < bound {
                return Err(format!("d={d} ε₀={eps}: p={p} below {bound}"));
            }
            tightest = tightest.min(p - bound);
        }
    }
    Ok(format!("smallest margin above 1-16ε₀² is {tightest:.3e}"))
}

fn worked_example() -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(SUITE_SEED ^ 6);
    let mut subsets: Vec<Vec<u64>> = vec![(0..16).collect(), vec![0, 3], vec![3, 8, 15]];
    for _ in 0..6 {
        let mut pool: Vec<u64> = (0..16).collect();
        pool.shuffle(&mut rng);
        pool.truncate(rng.gen_range(1..=8));
        subsets.push(pool);
    }
    let mut runs = 0;
    let mut worst = 0.0f64;
    for m in [4, 6, 8] {
        let tables = FunctionTablePair::inv_sqrt_1p(4, m).map_err(|e| e.to_string())?;
        let grid = (1u64 << m) as f64;
        for alphas in &subsets {
            let counts: Vec<u64> = alphas
                .iter()
                .map(|&a| counting_oracle_general(a, &tables))
                .collect::<Result<_, _>>()
                .map_err(|e| e.to_string())?;
            for (&a, &t) in alphas.iter().zip(&counts) {
                let err = (t as f64 / grid - 1.0 / (1.0 + a as f64).sqrt()).abs();
                if err >= 1.0 / grid {
                    return Err(format!("α={a} m={m}: error {err}"));
                }
            }
            let data = OracleData::with_zeros(alphas.clone(), 4).unwrap();
            let cfg = GeneralPrepConfig::new(data, tables.clone())
                .map_err(|e| e.to_string())?
                .with_backend(Backend::Block);
            let report = prepare_general(&cfg).map_err(|e| format!("{alphas:?} m={m}: {e}"))?.1;
            let err = max_diff(&report.post_selected_amplitudes, &normalized(&counts));
            worst = worst.max(err);
            if err > TOL {
                return Err(format!("{alphas:?} m={m}: amplitude deviation {err:.3e}"));
            }
            runs += 1;
        }
    }
    let tables = FunctionTablePair::inv_sqrt_1p(4, 4).map_err(|e| e.to_string())?;
    let t = counting_oracle_general(3, &tables).map_err(|e| e.to_string())?;
    if t as f64 / 16.0 != 0.5 {
        return Err(format!("α=3 m=4 gives {t}/16"));
    }
    let data = OracleData::with_zeros(vec![3, 0], 2).unwrap();
    let small = GeneralPrepConfig::new(data, FunctionTablePair::inv_sqrt_1p(2, 4).unwrap()).unwrap();
    let dense = prepare_general(&small).map_err(|e| e.to_string())?.1;
    let block = prepare_general(&small.with_backend(Backend::Block)).map_err(|e| e.to_string())?.1;
    if !reports_agree(&dense, &block, TOL) {
        return Err("dense and block disagree on (3,0)".into());
    }
    Ok(format!("{runs} runs, worst deviation {worst:.2e}; α=3 m=4 gives 8/16 = 0.5"))
}

fn division_variant() -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(SUITE_SEED ^ 7);
    let mut worst = 0.0f64;
    let total = 100;
    for k in 0..total {
        let case = random_division(&mut rng);
        let counts = brute_counts(&case);
        let grid = (1u64 << case.m) as f64;
        for (i, &t) in counts.iter().enumerate() {
            if (t as f64 / grid - case.ratio(i)).abs() >= 1.0 / grid {
                return Err(format!("config {k} index {i}: truncation law broken"));
            }
        }
        let cfg = case.config();
        let dense = prepare_inverse(&cfg).map_err(|e| e.to_string())?.1;
        let block = prepare_inverse(&cfg.with_backend(Backend::Block)).map_err(|e| e.to_string())?.1;
        let err = max_diff(&dense.post_selected_amplitudes, &normalized(&counts));
        worst = worst.max(err);
        if err > TOL || !reports_agree(&dense, &block, TOL) {
            return Err(format!(
                "config {k} α={:?} β={:?} m={}: deviation {err:.3e}",
                case.alphas, case.betas, case.m
            ));
        }
    }
    Ok(format!("{total} configs, worst deviation {worst:.2e}"))
}

fn resource_claims(suite: &[SuiteRun]) -> Result<String, String> {
    if let Some(run) = suite.iter().find(|r| r.dense.multiplication_count != 2 || r.block.multiplication_count != 2) {
        return Err(format!("{:?} reports {} multiplications", run.case.alphas, run.dense.multiplication_count));
    }
    let nr16 = cost_newton_raphson(2f64.powi(-16)).map_err(|e| e.to_string())?.multiplications;
    if nr16 != 16 {
        return Err(format!("Newton cost at 2^-16 is {nr16}"));
    }
    let ours = cost_inequality_method().multiplications;
    let mut checked = 0;
    let mut rng = ChaCha8Rng::seed_from_u64(SUITE_SEED ^ 8);
    let exponents = (16..=4096).map(|k| k as f64 / 4.0).chain((0..2000).map(|_| rng.gen_range(4.0..1000.0)));
    for x in exponents {
        let eps = 2f64.powf(-x);
        let theirs = cost_newton_raphson(eps).map_err(|e| e.to_string())?.multiplications;
        if ours >= theirs {
            return Err(format!("ε=2^-{x}: {ours} vs {theirs}"));
        }
        checked += 1;
    }
    Ok(format!("count 2 on every run; Newton 16 at 2^-16; crossover at {checked} precisions ≤ 2^-4"))
}

fn backend_agreement(suite: &[SuiteRun]) -> Result<String, String> {
    for (k, run) in suite.iter().enumerate() {
        if !reports_agree(&run.dense, &run.block, TOL) {
            return Err(format!("config {k} {:?}: {:?} vs {:?}", run.case.alphas, run.dense, run.block));
        }
    }
    Ok(format!("{} configs agree", suite.len()))
}

fn invariants() -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(SUITE_SEED ^ 10);
    let layout = RegisterLayout::from_widths([("x", 3), ("y", 4), ("z", 2)]).unwrap();
    let mut worst_norm = 0.0f64;
    for trial in 0..50 {
        let start = random_state(layout.clone(), &mut rng);

        let mut table: Vec<u64> = (0..1u64 << 7).collect();
        table.shuffle(&mut rng);
        let perm = BasisPermutation::from_table(&layout, &["x", "y"], table).unwrap();
        let mut s = start.clone();
        s.apply_permutation(&perm).unwrap();
        worst_norm = worst_norm.max((s.norm() - 1.0).abs());
        s.apply_permutation(&perm.inverse()).unwrap();
        if s.amplitudes() != start.amplitudes() {
            return Err(format!("trial {trial}: table permutation round trip not exact"));
        }

        let key: u64 = rng.gen_range(0..4);
        let load = BasisPermutation::xor_load(&layout, &["x", "y"], "z", move |v| (v * 7 + key) % 4).unwrap();
        s.apply_permutation(&load).unwrap();
        s.apply_permutation(&load).unwrap();
        if s.amplitudes() != start.amplitudes() {
            return Err(format!("trial {trial}: XOR load is not an involution"));
        }

        s.apply_hadamard_layer("y", 4).unwrap();
        s.apply_ry(rng.gen_range(0..9), rng.gen_range(-3.0..3.0)).unwrap();
        worst_norm = worst_norm.max((s.norm() - 1.0).abs());

        // multiplier domain: a ≥ 1, w < 2^3
        let ml = RegisterLayout::from_widths([("a", 3), ("w", 6)]).unwrap();
        let amps = (0..ml.dimension() as u64)
            .map(|i| {
                let (a, w) = (i & 7, i >> 3);
                if a >= 1 && w < 8 {
                    Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
                } else {
                    Complex64::new(0.0, 0.0)
                }
            })
            .collect();
        let mut m = Statevector::from_amplitudes(ml, amps).unwrap();
        let before = m.clone();
        multiply_in_place(&mut m, "a", "w").unwrap();
        worst_norm = worst_norm.max((m.norm() - 1.0).abs());
        uncompute_multiply(&mut m, "a", "w").unwrap();
        if m.amplitudes() != before.amplitudes() {
            return Err(format!("trial {trial}: multiplier round trip not exact"));
        }
    }
    if worst_norm > 1e-12 {
        return Err(format!("norm drift {worst_norm:.3e}"));
    }
    Ok(format!("50 randomized trials, norm drift {worst_norm:.2e}"))
}

fn main() -> ExitCode {
    let mut gate = Gate { failures: 0 };

    let t = Instant::now();
    let suite = run_suite();
    println!("suite: {} seeded configs simulated in {:.2}s", suite.len(), t.elapsed().as_secs_f64());

    let t = Instant::now();
    gate.record(1, "counting-oracle equivalence (inverse)", t, oracle_equivalence(&suite));
    let t = Instant::now();
    gate.record(2, "2^-m truncation law", t, truncation_law(&suite));
    let t = Instant::now();
    gate.record(3, "success probability identity", t, success_identity(&suite));
    let t = Instant::now();
    gate.record(4, "uniform preparation", t, uniform_preparation());
    let t = Instant::now();
    gate.record(5, "rotation-angle robustness", t, theta_robustness());
    let t = Instant::now();
    gate.record(6, "inverse square root example", t, worked_example());
    let t = Instant::now();
    gate.record(7, "division variant", t, division_variant());
    let t = Instant::now();
    gate.record(8, "resource claims", t, resource_claims(&suite));
    let t = Instant::now();
    gate.record(9, "backend agreement", t, backend_agreement(&suite));
    let t = Instant::now();
    gate.record(10, "invariant suite", t, invariants());

    if gate.failures == 0 {
        println!("acceptance: 10/10 criteria passed");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: {} criteria failed", gate.failures);
        ExitCode::FAILURE
    }
}
