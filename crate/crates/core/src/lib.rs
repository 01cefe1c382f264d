//! Discrete elliptic difference operator with hyperoctahedral symmetry on
//! bounded partitions: coefficients, weights, spectrum and orthogonal eigenbasis.

pub mod checks;
pub mod error;
pub mod io;
pub mod lattice;
pub mod linalg;
pub mod logsigned;
pub mod m1;
pub mod model;
pub mod racah;
pub mod spectral;
pub mod sweep;
pub mod theta;
pub mod trig;

pub use error::{Error, Result};
pub use lattice::{lattice_size, Lattice, Partition, Step};
pub use logsigned::LogSigned;
pub use model::{check_branch, validate, Branch, CouplingParams, Model, OperatorCoefficients, ValidationReport, WeylVector};
pub use spectral::{build_operator, spectrum, LatticeOperator, SpectralOptions, SpectralResult};
pub use theta::{q_bracket, q_factorial, ThetaContext};
