use serde::{Deserialize, Serialize};

/// Outcome of one preparation run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrepReport {
    /// Index-register amplitudes after post-selection, nonnegative and
    /// normalized.
    #[serde(with = "sci::vec")]
    pub post_selected_amplitudes: Vec<f64>,
    /// Good-subspace probability before amplification.
    #[serde(with = "sci")]
    pub success_probability_raw: f64,
    pub aa_rounds_used: usize,
    #[serde(with = "sci")]
    pub success_probability_final: f64,
    /// Multiplier invocations in one application of the preparation
    /// unitary (amplification rounds repeat it).
    pub multiplication_count: usize,
    /// `|⟨target|amplitudes⟩|²`; absent when the target function is unknown.
    #[serde(with = "sci::option")]
    pub fidelity_vs_target: Option<f64>,
    /// Largest `|v_i − target_i|` over the unnormalized amplitudes
    /// `v_i = t_i / 2^m`.
    #[serde(with = "sci::option")]
    pub max_componentwise_error: Option<f64>,
}

impl PrepReport {
    pub fn d(&self) -> usize {
        self.post_selected_amplitudes.len()
    }
}

/// Whether two reports agree: integer fields exactly, real fields within
/// `tol`.
pub fn reports_agree(a: &PrepReport, b: &PrepReport, tol: f64) -> bool {
    let close = |x: f64, y: f64| (x - y).abs() <= tol;
    let close_opt = |x: Option<f64>, y: Option<f64>| match (x, y) {
        (Some(x), Some(y)) => close(x, y),
        (None, None) => true,
        _ => false,
    };
    a.aa_rounds_used == b.aa_rounds_used
        && a.multiplication_count == b.multiplication_count
        && a.d() == b.d()
        && a
            .post_selected_amplitudes
            .iter()
            .zip(&b.post_selected_amplitudes)
            .all(|(x, y)| close(*x, *y))
        && close(a.success_probability_raw, b.success_probability_raw)
        && close(a.success_probability_final, b.success_probability_final)
        && close_opt(a.fidelity_vs_target, b.fidelity_vs_target)
        && close_opt(a.max_componentwise_error, b.max_componentwise_error)
}

/// Floats written in scientific notation with 17 significant digits, so
/// every value survives a text round trip bit for bit.
pub(crate) mod sci {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};
    use serde_json::value::RawValue;

    fn raw(x: f64) -> Result<Box<RawValue>, String> {
        if !x.is_finite() {
            return Err(format!("non-finite value {x} cannot be written"));
        }
        RawValue::from_string(format!("{x:.16e}")).map_err(|e| e.to_string())
    }

    pub fn serialize<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
        raw(*x).map_err(serde::ser::Error::custom)?.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        f64::deserialize(d)
    }

    pub mod vec {
        use super::*;

        pub fn serialize<S: Serializer>(xs: &[f64], s: S) -> Result<S::Ok, S::Error> {
            let items = xs
                .iter()
                .map(|&x| raw(x))
                .collect::<Result<Vec<_>, _>>()
                .map_err(serde::ser::Error::custom)?;
            items.serialize(s)
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<f64>, D::Error> {
            Vec::<f64>::deserialize(d)
        }
    }

    pub mod option {
        use super::*;

        pub fn serialize<S: Serializer>(x: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
            match x {
                Some(x) => raw(*x).map_err(serde::ser::Error::custom)?.serialize(s),
                None => s.serialize_none(),
            }
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<f64>, D::Error> {
            Option::<f64>::deserialize(d)
        }
    }
}
