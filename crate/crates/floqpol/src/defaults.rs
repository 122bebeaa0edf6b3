//! Central table of numeric defaults and tolerances.
//!
//! Every tunable threshold in the crate lives here so the CLI can document
//! them in one place and tests can reference the same values the code uses.
//!
//! | constant | value | used by |
//! |---|---|---|
//! | `N_MAX` | 8 | default photon truncation |
//! | `CONVERGENCE_TOL` | 1e-8 | auto-converge target on P_1w |
//! | `DIM_CAP` | 20000 | Floquet matrix dimension guard |
//! | `JACOBI_MAX_SWEEPS` | 100 | eigensolver iteration cap |
//! | `JACOBI_TOL_FACTOR` | 1e-12 | off-diagonal threshold, times the Frobenius norm |
//! | `SYMMETRY_TOL` | 1e-12 | absolute symmetry check (model load, eigensolver) |
//! | `B_CONDITION_LIMIT` | 1e8 | switch to pseudo-inverse for the initial-condition solve |
//! | `PINV_CUTOFF_FACTOR` | 1e-12 | singular-value cutoff, times the largest singular value |
//! | `REPRESENTATIVE_TIE_TOL` | 1e-12 | central-weight tie detection |
//! | `BEAT_AMPLITUDE_THRESHOLD` | 1e-10 | report beat pair when abs(A_i A_j) exceeds this |
//! | `MIN_STEPS_PER_PERIOD` | 200 | RK4 step-size guard |
//! | `ORACLE_STEPS_PER_PERIOD` | 1000 | default RK4 resolution for comparisons |
//! | `COMPARE_TOL` | 1e-5 | default pass/fail bound for `compare` |
//! | `FIT_CONDITION_LIMIT` | 1e10 | reject ill-conditioned susceptibility fits |
//! | `POLE_TOL` | 1e-14 | two-level formula pole detection |
//! | `RESONANCE_TOL` | 1e-12 | sum-over-states resonance detection |
//! | `WINDOW_TOL` | 1e-9 | integer-period window check for Fourier quadrature |

/// Default photon truncation N (blocks n = -N..N).
pub const N_MAX: usize = 8;

/// Default convergence tolerance on P_1w for auto-converge.
pub const CONVERGENCE_TOL: f64 = 1e-8;

/// Default cap on the Floquet matrix dimension (2N+1)*S.
pub const DIM_CAP: usize = 20000;

/// Jacobi eigensolver sweep cap.
pub const JACOBI_MAX_SWEEPS: usize = 100;

/// Jacobi convergence: off-diagonal Frobenius norm below this factor
/// times the matrix Frobenius norm.
pub const JACOBI_TOL_FACTOR: f64 = 1e-12;

/// Absolute tolerance for symmetry checks.
pub const SYMMETRY_TOL: f64 = 1e-12;

/// Above this condition number the initial-condition system is solved
/// by truncated pseudo-inverse and flagged degenerate.
pub const B_CONDITION_LIMIT: f64 = 1e8;

/// Pseudo-inverse singular-value cutoff, relative to the largest singular value.
pub const PINV_CUTOFF_FACTOR: f64 = 1e-12;

/// Central-block weight tie tolerance in representative selection.
pub const REPRESENTATIVE_TIE_TOL: f64 = 1e-12;

/// Representative pairs with |A_i A_j| above this are reported as beat terms.
pub const BEAT_AMPLITUDE_THRESHOLD: f64 = 1e-10;

/// RK4 guard: dt must not exceed (2 pi / omega) / MIN_STEPS_PER_PERIOD.
pub const MIN_STEPS_PER_PERIOD: usize = 200;

/// Default RK4 resolution when the oracle backs a comparison.
pub const ORACLE_STEPS_PER_PERIOD: usize = 1000;

/// Default tolerance for the `compare` subcommand.
pub const COMPARE_TOL: f64 = 1e-5;

/// Condition-number limit for the susceptibility fit design matrix.
pub const FIT_CONDITION_LIMIT: f64 = 1e10;

/// Absolute tolerance for the two-level formula pole check.
pub const POLE_TOL: f64 = 1e-14;

/// Absolute tolerance for sum-over-states resonance detection.
pub const RESONANCE_TOL: f64 = 1e-12;

/// A Fourier window must match an integer period count within this.
pub const WINDOW_TOL: f64 = 1e-9;
