use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Library-level error type. CLI maps every variant to exit code 1;
/// argument problems never reach here.
#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error")]
    Io(#[from] std::io::Error),

    #[error("model parse error")]
    Parse(#[from] serde_json::Error),

    #[error("validation error: {0}")]
    Validation(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("Floquet matrix dimension {dim} exceeds cap {cap}; lower n_max or raise dim_cap")]
    DimensionCap { dim: usize, cap: usize },

    #[error("matrix is not symmetric: max |a - a^T| = {max_dev:.3e} exceeds {tol:.3e}")]
    Asymmetric { max_dev: f64, tol: f64 },

    #[error(
        "Jacobi eigensolver did not converge after {sweeps} sweeps \
         (dim {dim}, off-diagonal norm {off_norm:.3e}, threshold {threshold:.3e})"
    )]
    NoConvergence {
        sweeps: usize,
        dim: usize,
        off_norm: f64,
        threshold: f64,
    },

    #[error(
        "truncation did not converge before the dimension cap: \
         |P1({n_prev}) - P1({n_last})| = {diff:.3e} > tol {tol:.3e} \
         (P1 values {p1_prev:.12e}, {p1_last:.12e})"
    )]
    ConvergenceCap {
        n_prev: usize,
        n_last: usize,
        p1_prev: f64,
        p1_last: f64,
        diff: f64,
        tol: f64,
    },

    #[error("initial state index k={k} out of range 1..={s}")]
    IndexOutOfRange { k: usize, s: usize },

    #[error("B matrix is exactly singular (all singular values below cutoff){}",
            .nearest.as_ref().map(|d| format!("; nearest quasienergy degeneracy: {d}")).unwrap_or_default())]
    SingularB { nearest: Option<String> },

    #[error(
        "two-level formula pole: |(omega-omega12)^2 - d12^2 F^2| below 1e-14; \
         critical amplitude |omega-omega12|/|d12| = {critical_amplitude:.6e}"
    )]
    Pole { critical_amplitude: f64 },

    #[error("frequency {omega:.12e} resonant with transition {lower} -> {upper} (gap {gap:.12e})")]
    Resonance {
        lower: usize,
        upper: usize,
        omega: f64,
        gap: f64,
    },

    #[error(
        "step dt={dt:.3e} exceeds the cap {max_dt:.3e} (period/200); pass the override to force it"
    )]
    StepTooLarge { dt: f64, max_dt: f64 },

    #[error("propagation produced non-finite amplitudes; last valid time t={t_last:.12e}")]
    NonFinite { t_last: f64 },

    #[error("time grid is not uniform: max spacing deviation {max_dev:.3e} of mean {mean:.3e}")]
    NonUniformGrid { max_dev: f64, mean: f64 },

    #[error(
        "window length {length:.12e} is not an integer number of periods \
         (nearest {periods} x {period:.12e}, mismatch {mismatch:.3e})"
    )]
    BadWindow {
        length: f64,
        period: f64,
        periods: usize,
        mismatch: f64,
    },

    #[error("fit needs at least {needed} amplitude points, got {got}")]
    InsufficientPoints { needed: usize, got: usize },

    #[error("fit design matrix is ill-conditioned: condition {condition:.3e} exceeds {limit:.3e}")]
    IllConditionedFit { condition: f64, limit: f64 },

    #[error("scan spec invalid: {0}")]
    InvalidSpec(String),
}
