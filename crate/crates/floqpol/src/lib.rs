//! Floquet treatment of a few-level molecule in a strong monochromatic
//! field: quasienergies and Floquet modes from the extended-space
//! eigenproblem, superposition coefficients for a suddenly switched-on
//! drive, the resulting time-dependent polarization with its harmonic
//! content, and field-dependent susceptibilities. A Runge-Kutta
//! propagator for the same Schroedinger equation serves as an
//! independent cross-check throughout.
//!
//! Typical round trip:
//!
//! ```
//! use floqpol::{two_level_model, FieldConfig, TruncationConfig};
//! use floqpol::{solve_floquet, initial_expansion, polarization_result};
//!
//! let model = two_level_model(1.0, 1.0, 0.0, 0.0).unwrap();
//! let field = FieldConfig::new(0.05, 0.9).unwrap();
//! let trunc = TruncationConfig::default();
//! let sol = solve_floquet(&model, &field, &trunc).unwrap();
//! let init = initial_expansion(&sol, 1).unwrap();
//! let pol = polarization_result(&sol, &init, &model, &field, 4, None).unwrap();
//! assert!(pol.chi.unwrap() > 0.0);
//! ```

// Validation uses !(x > 0.0) on purpose: unlike x <= 0.0 it also rejects
// NaN. Indexed loops mirror the m, s, r subscripts of the formulas they
// implement; iterator chains would obscure the correspondence.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
#![allow(clippy::needless_range_loop)]

pub mod analytic;
pub mod defaults;
mod error;
pub mod floquet;
pub mod initcond;
mod linalg;
pub mod model;
pub mod oracle;
pub mod polarization;
pub mod scan;

pub use error::{Error, Result};
pub use floquet::{
    build_floquet_matrix, diagonalize_symmetric, fold_to_zone, select_representatives, solve_fixed,
    solve_floquet, FloquetMatrix, FloquetSolution,
};
pub use initcond::{build_b, initial_expansion, solve_a, InitialExpansion};
pub use model::{
    load_model, save_model, two_level_model, FieldConfig, MolecularModel, TruncationConfig,
};
pub use oracle::{
    dipole_of, fourier_of_series, propagate, propagate_with_forced_step, PropagationResult,
};
pub use polarization::{
    beat_terms, fourier_components, periodic_part, polarization_result, polarization_time_series,
    susceptibility, BeatTerm, PolarizationResult,
};
pub use scan::{
    fit_susceptibilities, run_scan, ChiKind, FitResult, Observables, ScanRow, ScanSpec,
    ScanVariable, Spacing,
};
