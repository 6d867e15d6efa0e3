//! Dense statevector over a [`RegisterLayout`].

use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;
use rand::Rng;

use crate::error::{invalid, PrepError, Result};
use crate::layout::{RegisterLayout, Selector};
use crate::permutation::BasisPermutation;

/// Tolerance for identities that hold exactly up to rounding (unitarity,
/// norm preservation).
pub const UNITARY_TOL: f64 = 1e-12;
/// Tolerance for product-state and marginal checks.
pub const REDUCTION_TOL: f64 = 1e-9;
/// Amplitudes below this magnitude do not count as support.
pub const SUPPORT_EPS: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct Statevector {
    layout: RegisterLayout,
    amplitudes: Vec<Complex64>,
}

impl Statevector {
    /// |0…0⟩.
    pub fn zero(layout: RegisterLayout) -> Self {
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); layout.dimension()];
        amplitudes[0] = Complex64::new(1.0, 0.0);
        Self { layout, amplitudes }
    }

    /// Computational basis state with the given register labels; registers
    /// not mentioned are 0.
    pub fn basis(layout: RegisterLayout, assignments: &[(&str, u64)]) -> Result<Self> {
        let index = layout.index_of(assignments)?;
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); layout.dimension()];
        amplitudes[index as usize] = Complex64::new(1.0, 0.0);
        Ok(Self { layout, amplitudes })
    }

    /// Normalizes `amplitudes` and wraps them.
    pub fn from_amplitudes(layout: RegisterLayout, mut amplitudes: Vec<Complex64>) -> Result<Self> {
        if amplitudes.len() != layout.dimension() {
            return Err(invalid(format!(
                "expected {} amplitudes, got {}",
                layout.dimension(),
                amplitudes.len()
            )));
        }
        let norm = l2_norm(&amplitudes);
        if norm == 0.0 || !norm.is_finite() {
            return Err(invalid("amplitude vector has zero or non-finite norm"));
        }
        amplitudes.iter_mut().for_each(|a| *a /= norm);
        Ok(Self { layout, amplitudes })
    }

    pub(crate) fn from_raw(layout: RegisterLayout, amplitudes: Vec<Complex64>) -> Self {
        debug_assert_eq!(amplitudes.len(), layout.dimension());
        Self { layout, amplitudes }
    }

    pub fn layout(&self) -> &RegisterLayout {
        &self.layout
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.amplitudes
    }

    pub fn amplitude(&self, assignments: &[(&str, u64)]) -> Result<Complex64> {
        Ok(self.amplitudes[self.layout.index_of(assignments)? as usize])
    }

    pub(crate) fn set_amplitude(&mut self, index: usize, amp: Complex64) {
        self.amplitudes[index] = amp;
    }

    pub fn norm(&self) -> f64 {
        l2_norm(&self.amplitudes)
    }

    /// Nonzero amplitudes (magnitude above [`SUPPORT_EPS`]) with their index.
    pub fn support(&self) -> impl Iterator<Item = (u64, Complex64)> + '_ {
        self.amplitudes
            .iter()
            .enumerate()
            .filter(|(_, a)| a.norm() > SUPPORT_EPS)
            .map(|(i, a)| (i as u64, *a))
    }

    /// Hadamard on each of the `low_bits` least significant qubits of
    /// `register`.
    pub fn apply_hadamard_layer(&mut self, register: &str, low_bits: usize) -> Result<()> {
        let reg = self.layout.register(register)?;
        if low_bits > reg.width() {
            return Err(invalid(format!(
                "{low_bits} Hadamards requested on `{register}` which has {} bits",
                reg.width()
            )));
        }
        let first = reg.offset();
        for q in first..first + low_bits {
            hadamard(&mut self.amplitudes, q);
        }
        Ok(())
    }

    /// `R_y(θ)` on a global qubit: |0⟩ ↦ cos(θ/2)|0⟩ + sin(θ/2)|1⟩.
    pub fn apply_ry(&mut self, qubit: usize, theta: f64) -> Result<()> {
        let total = self.layout.total_qubits();
        if qubit >= total {
            return Err(PrepError::QubitOutOfRange { qubit, total });
        }
        let (s, c) = (theta / 2.0).sin_cos();
        let stride = 1usize << qubit;
        for base in (0..self.amplitudes.len()).step_by(stride << 1) {
            for k in base..base + stride {
                let a = self.amplitudes[k];
                let b = self.amplitudes[k + stride];
                self.amplitudes[k] = a * c - b * s;
                self.amplitudes[k + stride] = a * s + b * c;
            }
        }
        Ok(())
    }

    pub fn apply_permutation(&mut self, perm: &BasisPermutation) -> Result<()> {
        let resolved = perm.resolve(&self.layout)?;
        let mut out = vec![Complex64::new(0.0, 0.0); self.amplitudes.len()];
        for (index, amp) in self.amplitudes.iter().enumerate() {
            out[resolved.map(index as u64) as usize] = *amp;
        }
        self.amplitudes = out;
        Ok(())
    }

    /// Multiplies by −1 every amplitude whose labels satisfy `conditions`.
    pub fn apply_phase_flip<S: AsRef<str>>(&mut self, conditions: &[(S, u64)]) -> Result<()> {
        let sel = self.layout.selector(conditions)?;
        self.flip_where(sel);
        Ok(())
    }

    pub(crate) fn flip_where(&mut self, sel: Selector) {
        for (i, a) in self.amplitudes.iter_mut().enumerate() {
            if sel.matches(i as u64) {
                *a = -*a;
            }
        }
    }

    pub fn negate(&mut self) {
        self.amplitudes.iter_mut().for_each(|a| *a = -*a);
    }

    /// Probability mass of the labels satisfying `conditions`.
    pub fn probability<S: AsRef<str>>(&self, conditions: &[(S, u64)]) -> Result<f64> {
        let sel = self.layout.selector(conditions)?;
        Ok(self.mass_where(sel))
    }

    pub(crate) fn mass_where(&self, sel: Selector) -> f64 {
        self.amplitudes
            .iter()
            .enumerate()
            .filter(|(i, _)| sel.matches(*i as u64))
            .map(|(_, a)| a.norm_sqr())
            .sum()
    }

    /// Exact projective post-selection. Returns the renormalized state and
    /// the probability of the outcome.
    pub fn project_and_renormalize<S: AsRef<str>>(
        &self,
        conditions: &[(S, u64)],
    ) -> Result<(Statevector, f64)> {
        let sel = self.layout.selector(conditions)?;
        let probability = self.mass_where(sel);
        if probability <= 0.0 {
            return Err(PrepError::ZeroProbability);
        }
        let scale = probability.sqrt().recip();
        let amplitudes = self
            .amplitudes
            .iter()
            .enumerate()
            .map(|(i, a)| {
                if sel.matches(i as u64) {
                    *a * scale
                } else {
                    Complex64::new(0.0, 0.0)
                }
            })
            .collect();
        Ok((
            Statevector {
                layout: self.layout.clone(),
                amplitudes,
            },
            probability,
        ))
    }

    /// Marginal distribution of `register`'s labels.
    pub fn marginal(&self, register: &str) -> Result<Vec<f64>> {
        let reg = self.layout.register(register)?;
        let mut out = vec![0.0; reg.dimension() as usize];
        for (i, a) in self.amplitudes.iter().enumerate() {
            out[reg.label(i as u64) as usize] += a.norm_sqr();
        }
        Ok(out)
    }

    /// Reduced pure state of `register`, provided the state factorizes as
    /// (register) ⊗ (rest) within [`REDUCTION_TOL`]. The phase is fixed so
    /// that the largest component is real and positive.
    pub fn reduced_state(&self, register: &str) -> Result<Vec<Complex64>> {
        let reg = self.layout.register(register)?;
        let (off, w) = (reg.offset(), reg.width());
        let low_mask = (1u64 << off) - 1;
        let compact = |index: u64| (index & low_mask) | ((index >> (off + w)) << off);
        let expand = |rest: u64, label: u64| {
            (rest & low_mask) | (label << off) | ((rest >> off) << (off + w))
        };
        let rest_dim = self.amplitudes.len() >> w;
        let mut column_mass = vec![0.0; rest_dim];
        for (i, a) in self.amplitudes.iter().enumerate() {
            column_mass[compact(i as u64) as usize] += a.norm_sqr();
        }
        let (best, best_mass) = column_mass
            .iter()
            .enumerate()
            .fold((0, -1.0), |acc, (i, &m)| if m > acc.1 { (i, m) } else { acc });
        if best_mass <= 0.0 {
            return Err(PrepError::ZeroProbability);
        }
        let dim = reg.dimension();
        let scale = best_mass.sqrt().recip();
        let mut v: Vec<Complex64> = (0..dim)
            .map(|label| self.amplitudes[expand(best as u64, label) as usize] * scale)
            .collect();

        let mut residual = 0.0;
        for rest in 0..rest_dim as u64 {
            if column_mass[rest as usize] == 0.0 {
                continue;
            }
            let overlap: Complex64 = (0..dim)
                .map(|label| v[label as usize].conj() * self.amplitudes[expand(rest, label) as usize])
                .sum();
            residual += (0..dim)
                .map(|label| {
                    (self.amplitudes[expand(rest, label) as usize] - v[label as usize] * overlap)
                        .norm_sqr()
                })
                .sum::<f64>();
        }
        let residual = residual.sqrt();
        if residual > REDUCTION_TOL {
            return Err(PrepError::Entangled {
                register: register.into(),
                residual,
            });
        }

        let pivot = v
            .iter()
            .copied()
            .fold(Complex64::new(0.0, 0.0), |acc, a| if a.norm() > acc.norm() { a } else { acc });
        if pivot.norm() > 0.0 {
            let phase = pivot.conj() / pivot.norm();
            v.iter_mut().for_each(|a| *a *= phase);
        }
        Ok(v)
    }

    /// |⟨reference|reduced⟩|² with both sides normalized. `reference` may be
    /// shorter than the register dimension; it is zero-padded.
    pub fn fidelity(&self, register: &str, reference: &[Complex64]) -> Result<f64> {
        let reduced = self.reduced_state(register)?;
        if reference.len() > reduced.len() {
            return Err(invalid(format!(
                "reference of length {} exceeds register dimension {}",
                reference.len(),
                reduced.len()
            )));
        }
        let rnorm = l2_norm(reference);
        if rnorm == 0.0 {
            return Err(invalid("reference vector is zero"));
        }
        let overlap: Complex64 = reference
            .iter()
            .zip(&reduced)
            .map(|(r, a)| r.conj() * a)
            .sum();
        Ok((overlap.norm() / rnorm).powi(2).min(1.0))
    }

    pub fn inner(&self, other: &Statevector) -> Result<Complex64> {
        if self.layout != other.layout {
            return Err(invalid("inner product of states with different layouts"));
        }
        Ok(self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// ℓ₂ distance between the amplitude vectors.
    pub fn distance(&self, other: &Statevector) -> Result<f64> {
        if self.layout != other.layout {
            return Err(invalid("distance between states with different layouts"));
        }
        Ok(self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt())
    }

    /// Draws `shots` measurement outcomes of `register` and returns the
    /// count per label. Demonstration only; the algorithms post-select
    /// exactly.
    pub fn sample(&self, register: &str, shots: usize, rng: &mut impl Rng) -> Result<Vec<u64>> {
        let marginal = self.marginal(register)?;
        let total: f64 = marginal.iter().sum();
        let mut counts = vec![0u64; marginal.len()];
        for _ in 0..shots {
            let mut x = rng.gen::<f64>() * total;
            let mut pick = marginal.len() - 1;
            for (label, p) in marginal.iter().enumerate() {
                if x < *p {
                    pick = label;
                    break;
                }
                x -= p;
            }
            counts[pick] += 1;
        }
        Ok(counts)
    }
}

pub(crate) fn l2_norm(v: &[Complex64]) -> f64 {
    v.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
}

fn hadamard(amps: &mut [Complex64], qubit: usize) {
    let stride = 1usize << qubit;
    for base in (0..amps.len()).step_by(stride << 1) {
        for k in base..base + stride {
            let a = amps[k];
            let b = amps[k + stride];
            amps[k] = (a + b) * FRAC_1_SQRT_2;
            amps[k + stride] = (a - b) * FRAC_1_SQRT_2;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn one(name: &str, width: usize) -> RegisterLayout {
        RegisterLayout::from_widths([(name, width)]).unwrap()
    }

    #[test]
    fn basis_init() {
        let s = Statevector::basis(one("q", 1), &[("q", 0)]).unwrap();
        assert_eq!(s.amplitudes(), &[c(1.0), c(0.0)]);

        let l = RegisterLayout::from_widths([("a", 2), ("b", 1)]).unwrap();
        let s = Statevector::basis(l.clone(), &[("a", 3), ("b", 1)]).unwrap();
        let idx = l.index_of(&[("a", 3), ("b", 1)]).unwrap();
        assert_eq!(s.amplitudes()[idx as usize], c(1.0));
        assert_eq!(s.norm(), 1.0);

        let s = Statevector::basis(one("I", 3), &[("I", 5)]).unwrap();
        assert_eq!(s.amplitudes()[5], c(1.0));
        assert!(Statevector::basis(one("I", 3), &[("I", 8)]).is_err());
    }

    #[test]
    fn hadamard_layer() {
        let mut s = Statevector::zero(one("q", 1));
        s.apply_hadamard_layer("q", 1).unwrap();
        assert!((s.amplitudes()[0].re - FRAC_1_SQRT_2).abs() < 1e-15);
        assert!((s.amplitudes()[1].re - FRAC_1_SQRT_2).abs() < 1e-15);

        let mut s = Statevector::zero(one("A", 3));
        s.apply_hadamard_layer("A", 3).unwrap();
        let want = 2f64.powf(-1.5);
        assert!(s.amplitudes().iter().all(|a| (a.re - want).abs() < 1e-15));

        let before = s.clone();
        s.apply_hadamard_layer("A", 3).unwrap();
        s.apply_hadamard_layer("A", 3).unwrap();
        assert!(s.distance(&before).unwrap() < UNITARY_TOL);

        assert!(s.apply_hadamard_layer("A", 4).is_err());
        assert!(s.apply_hadamard_layer("nope", 1).is_err());
    }

    #[test]
    fn ry_rotation() {
        let mut s = Statevector::zero(one("q", 1));
        let before = s.clone();
        s.apply_ry(0, 0.0).unwrap();
        assert_eq!(s, before);

        s.apply_ry(0, std::f64::consts::PI).unwrap();
        assert!(s.amplitudes()[0].norm() < 1e-15);
        assert!((s.amplitudes()[1].re - 1.0).abs() < 1e-15);

        let mut s = Statevector::zero(one("q", 1));
        s.apply_ry(0, 2.0 * (1.0f64 / 3.0).sqrt().acos()).unwrap();
        assert!((s.amplitudes()[0].re - (1.0f64 / 3.0).sqrt()).abs() < 1e-15);
        assert!((s.amplitudes()[1].re - (2.0f64 / 3.0).sqrt()).abs() < 1e-15);

        assert!(s.apply_ry(1, 0.3).is_err());
    }

    #[test]
    fn permutation_examples() {
        let l = one("q", 1);
        let mut s = Statevector::from_amplitudes(l.clone(), vec![c(0.6), c(0.8)]).unwrap();
        let id = BasisPermutation::identity(&l, &["q"]).unwrap();
        let before = s.clone();
        s.apply_permutation(&id).unwrap();
        assert_eq!(s, before);

        let swap = BasisPermutation::from_table(&l, &["q"], vec![1, 0]).unwrap();
        s.apply_permutation(&swap).unwrap();
        assert_eq!(s.amplitudes(), &[c(0.8), c(0.6)]);
        s.apply_permutation(&swap.inverse()).unwrap();
        assert_eq!(s, before);
    }

    #[test]
    fn projection() {
        let mut s = Statevector::zero(one("q", 1));
        s.apply_hadamard_layer("q", 1).unwrap();
        let (p, prob) = s.project_and_renormalize(&[("q", 0)]).unwrap();
        assert!((prob - 0.5).abs() < 1e-15);
        assert!((p.amplitudes()[0].re - 1.0).abs() < 1e-15);
        assert_eq!(p.amplitudes()[1], c(0.0));

        let b = Statevector::basis(one("I", 2), &[("I", 2)]).unwrap();
        let (p, prob) = b.project_and_renormalize(&[("I", 2)]).unwrap();
        assert_eq!(prob, 1.0);
        assert_eq!(p, b);
        assert_eq!(
            b.project_and_renormalize(&[("I", 1)]).unwrap_err(),
            PrepError::ZeroProbability
        );
    }

    #[test]
    fn fidelity_examples() {
        let l = RegisterLayout::from_widths([("r", 1), ("x", 1)]).unwrap();
        let s = Statevector::basis(l.clone(), &[("r", 0), ("x", 1)]).unwrap();
        assert!((s.fidelity("r", &[c(1.0), c(0.0)]).unwrap() - 1.0).abs() < 1e-15);
        assert!(s.fidelity("r", &[c(0.0), c(1.0)]).unwrap().abs() < 1e-15);
        let h = FRAC_1_SQRT_2;
        assert!((s.fidelity("r", &[c(h), c(h)]).unwrap() - 0.5).abs() < 1e-15);
        // shorter reference is zero-padded
        assert!((s.fidelity("r", &[c(2.0)]).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn fidelity_rejects_entangled_reduction() {
        let l = RegisterLayout::from_widths([("r", 1), ("x", 1)]).unwrap();
        let bell = Statevector::from_amplitudes(l, vec![c(1.0), c(0.0), c(0.0), c(1.0)]).unwrap();
        assert!(matches!(
            bell.fidelity("r", &[c(1.0), c(0.0)]),
            Err(PrepError::Entangled { .. })
        ));
    }

    #[test]
    fn reduced_state_of_middle_register() {
        let l = RegisterLayout::from_widths([("a", 1), ("m", 2), ("z", 1)]).unwrap();
        let mut s = Statevector::basis(l, &[("a", 1), ("z", 1)]).unwrap();
        s.apply_hadamard_layer("m", 2).unwrap();
        let v = s.reduced_state("m").unwrap();
        assert!(v.iter().all(|a| (a.re - 0.5).abs() < 1e-15));
    }

    #[test]
    fn sampling_is_seeded() {
        use rand::SeedableRng;
        let mut s = Statevector::zero(one("q", 2));
        s.apply_hadamard_layer("q", 1).unwrap();
        let mut r1 = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let mut r2 = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let a = s.sample("q", 200, &mut r1).unwrap();
        let b = s.sample("q", 200, &mut r2).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.iter().sum::<u64>(), 200);
        assert_eq!(a[2] + a[3], 0);
    }
}
