//! Exact statevector simulation of black-box state preparation.
//!
//! Amplitudes proportional to `1/α_i`, `β_i/α_i` or a general `f(α_i)` are
//! produced from an oracle that writes `α_i` into a register: a uniform
//! grid `j` is superposed, combined with `α_i` by reversible arithmetic, and
//! an inequality test flags the grid points below the target value. The
//! fraction of unflagged points becomes the amplitude.
//!
//! Arithmetic is modelled as verified basis permutations rather than gate
//! networks, so every run is exact up to floating-point rounding and can be
//! compared against a brute-force count.
//!
//! ```
//! use ineqprep::prelude::*;
//!
//! let data = OracleData::new(vec![3, 5], 3).unwrap();
//! let cfg = InversePrepConfig::inverse(data, 1, 4).unwrap();
//! let (_, report) = prepare_inverse(&cfg).unwrap();
//! // counts of grid points: 6 for α = 3, 4 for α = 5
//! let norm = (36.0f64 + 16.0).sqrt();
//! assert!((report.post_selected_amplitudes[0] - 6.0 / norm).abs() < 1e-12);
//! assert_eq!(report.multiplication_count, 2);
//! ```

pub mod amplification;
pub mod arithmetic;
pub mod block;
pub mod error;
pub mod experiment;
pub mod fixed_point;
pub mod layout;
pub mod permutation;
pub mod prep;
pub mod resources;
pub mod statevector;

pub use error::{PrepError, Result};

pub mod prelude {
    pub use crate::amplification::{
        amplified_probability, amplify, optimal_rounds, success_probability, GoodSubspace,
        PreparationProgram,
    };
    pub use crate::arithmetic::{FunctionTablePair, OracleData, PredicateMode, ScalarConstant};
    pub use crate::error::{PrepError, Result};
    pub use crate::fixed_point::FixedPointFormat;
    pub use crate::layout::RegisterLayout;
    pub use crate::permutation::BasisPermutation;
    pub use crate::prep::{
        prepare_division, prepare_general, prepare_inverse, prepare_uniform, AaRounds, Backend,
        GeneralPrepConfig, InversePrepConfig, PrepConfig, PrepReport,
    };
    pub use crate::resources::{cost_inequality_method, cost_newton_raphson, CostModel};
    pub use crate::statevector::Statevector;
}
