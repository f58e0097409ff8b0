//! Heavy-traffic simulation of long-memory processes with heavy-tailed
//! innovations: regularly varying laws, FARIMA coefficients, path simulation,
//! the fractional stable limit and the experiment harness.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod farima;
pub mod fraclevy;
pub mod harness;
pub mod innovations;
pub mod pathsim;
pub mod quad;
pub mod regvar;
pub mod rng;
pub mod stats;

pub use error::{Error, Result};
pub use farima::{build_coeffs, CoeffTable, GSpec};
pub use fraclevy::{LimitParams, LimitPath, LimitSampler, LimitSup};
pub use harness::{ExperimentConfig, ExperimentResult};
pub use innovations::{InnovationModel, Law};
pub use pathsim::{Convolver, HorizonPolicy, SupStat, Workspace};
pub use regvar::{Perturbation, QuantileModel, ScalingFns};
pub use rng::SimRng;
pub use stats::{KsOutcome, SlopeFit};
