//! Numerical toolkit for sub-Bergman Hilbert spaces on the unit disk.
//!
//! The crate evaluates weighted Bergman and sub-Bergman reproducing kernels,
//! builds finite sections of analytic Toeplitz operators and their defect
//! operators in the monomial orthonormal basis of `A²_α`, and tests kernels
//! for the complete Nevanlinna-Pick property through the positivity of
//! `1 - 1/K`.
//!
//! Module map:
//! - [`scalars`]: weight parameters, basis weights, binomial series
//! - [`symbols`]: Möbius maps, Blaschke products, monomials, singular inner
//!   functions, and their truncated power series
//! - [`kernels`]: `K_α`, `K^{α,φ}`, `K^{α,φ̄}` and normalized kernels
//! - [`operators`]: Toeplitz and defect matrices, Berezin transforms, spectra
//! - [`cnp`]: Pick matrices, PSD certificates and randomized scans
//! - [`harness`]: scenarios, configuration and reports

// `!(x > 0.0)` is used on purpose so that NaN is rejected too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cnp;
mod error;
pub mod harness;
pub mod kernels;
pub mod linalg;
pub mod operators;
mod point;
pub mod quadrature;
pub mod sampler;
pub mod scalars;
pub mod series;
pub mod symbols;

pub use error::{Error, Result};
pub use num_complex::Complex64;
pub use point::{parse_complex, DiskPoint};

pub use cnp::{build_pick, cnp_scan, psd_test, PickMatrix, PickReport, ScanOptions, ScanResult, Verdict};
pub use kernels::{eval_kernel, eval_normalized, KernelKind, KernelSpec, NormalizedKernelPoint};
pub use operators::{
    berezin, defect_matrix, inclusion_eigenvalues, spectrum, toeplitz_matrix, DefectSide,
    FitWindow, OperatorKind, OperatorMatrix, SpectrumReport,
};
pub use scalars::{basis_weights, binomial_coeffs, BasisWeights, BinomialSeries, WeightParameter};
pub use symbols::{
    BlaschkeSpec, MobiusSpec, MonomialSpec, PowerSeriesSymbol, SingularInnerSpec, SymbolSpec,
};
