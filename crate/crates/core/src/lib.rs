//! Global optimization with Gaussian-model algorithms whose point sequences
//! are invariant under positive affine rescaling of the objective, plus a
//! one-dimensional DIRECT implementation for which they are not.

pub mod acquisition;
pub mod cli;
pub mod direct;
pub mod error;
pub mod fig1;
pub mod gp;
pub mod homogeneity;
pub mod normal;
pub mod numeral;
pub mod objectives;
pub mod optimizer;
pub mod scaled;

pub use error::{Error, Result};
pub use gp::{
    CorrelationKernel, Estimator, EvaluationHistory, KernelFamily, Region, SurrogatePosterior,
};
pub use numeral::ExtendedNumeral;
pub use optimizer::{Algorithm, CandidateGrid, OptimizationTrace, OptimizerConfig};
