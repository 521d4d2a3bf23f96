//! Exact multi-soliton solutions of the N-coupled Hirota equations
//!
//! ```text
//! q_jt = i[q_jxx/2 + (Σ|q_r|²) q_j] + ε[q_jxxx + 3(Σ|q_r|²) q_jx + 3(Σ q_r* q_rx) q_j]
//! ```
//!
//! built from discrete spectral data by the reflectionless Riemann-Hilbert
//! formula, together with three independent checks of the result: the PDE
//! and Lax-pair residuals by finite differences, and the scattering data
//! recovered by integrating the spectral problem.
//!
//! Everything numerical is generic over [`Real`] (`f32` or `f64`); the
//! `*64` aliases below fix the scalar to `f64`, which is what the file
//! formats and the CLI use.

// Negated comparisons are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod engine;
pub mod error;
pub mod grid;
pub mod lax;
pub mod linalg;
pub mod scalar;
pub mod scattering;
pub mod spectral;
pub mod stencil;

pub use engine::{
    build_kernel, evaluate_field, evaluate_p1, evaluate_p2, evolve_vectors, one_soliton_closed_form,
    one_soliton_sech_form, relative_deviation, soliton_velocity, theta, EvolvedVectors, FieldSample, KernelMatrix,
    SechParams,
};
pub use error::{Error, Result};
pub use grid::{
    emit_csv, emit_json, parse_csv, sample_grid, sample_grid_serial, CsvRecord, FieldTable, GridSpec, Part,
};
pub use lax::{
    conserved_mass, pde_residual, zero_curvature_residual, zero_curvature_residual_of, FieldEvaluator, ResidualReport,
};
pub use linalg::CMatrix;
pub use scalar::{Cx, Real};
pub use scattering::{
    count_zeros, integrate_jost, integrate_jost_column1, s11, scattering_matrix, trace_field, trace_potential, Contour,
    PotentialTrace, ScatteringMatrix,
};
pub use spectral::{
    emit_config, gauge_normalize, parse_config, parse_config_unchecked, validate, ConfigError, SpectralConfig,
    SpectralPoint, Violation,
};
pub use stencil::StencilSpec;

/// Version string recorded in emitted data files.
pub const ENGINE_VERSION: &str = concat!(env!("CARGO_PKG_NAME"), " ", env!("CARGO_PKG_VERSION"));

pub type C64 = Cx<f64>;
pub type C32 = Cx<f32>;
pub type SpectralConfig64 = SpectralConfig<f64>;
pub type SpectralConfig32 = SpectralConfig<f32>;
pub type SpectralPoint64 = SpectralPoint<f64>;
pub type FieldSample64 = FieldSample<f64>;
pub type FieldSample32 = FieldSample<f32>;
pub type CMatrix64 = CMatrix<f64>;
pub type PotentialTrace64 = PotentialTrace<f64>;
pub type ScatteringMatrix64 = ScatteringMatrix<f64>;
pub type GridSpec64 = GridSpec<f64>;
pub type ResidualReport64 = ResidualReport<f64>;
