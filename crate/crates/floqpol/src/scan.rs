//! Amplitude and frequency sweeps over the full pipeline, plus the
//! weak-field susceptibility fit. Grid points are independent; failures are
//! recorded per row so a long dispersion curve survives crossing a
//! resonance. Rows come back in grid order regardless of which worker
//! finished first.

use rayon::prelude::*;

use crate::analytic;
use crate::defaults;
use crate::error::{Error, Result};
use crate::floquet::solve_floquet;
use crate::initcond::initial_expansion;
use crate::linalg;
use crate::model::{FieldConfig, MolecularModel, TruncationConfig};
use crate::polarization::{fourier_components, susceptibility};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ScanVariable {
    Amplitude,
    Frequency,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Spacing {
    Linear,
    Log,
}

/// Which columns each row carries.
#[derive(Clone, Debug)]
pub struct Observables {
    /// Fourier orders n to report.
    pub fourier_orders: Vec<usize>,
    pub chi: bool,
    /// Folded representative quasienergies, state order.
    pub quasienergies: bool,
}

impl Default for Observables {
    fn default() -> Self {
        Self {
            fourier_orders: vec![1],
            chi: true,
            quasienergies: false,
        }
    }
}

#[derive(Clone, Debug)]
pub struct ScanSpec {
    pub variable: ScanVariable,
    pub start: f64,
    pub stop: f64,
    pub points: usize,
    pub spacing: Spacing,
    /// The quantity held constant: amplitude for frequency scans, frequency
    /// for amplitude scans.
    pub fixed: f64,
    pub model: MolecularModel,
    /// Initial state, 1-based.
    pub k: usize,
    pub trunc: TruncationConfig,
    pub observables: Observables,
}

/// Marks how the chi column was obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ChiKind {
    /// P_1w / F at finite amplitude.
    Floquet,
    /// Sum-over-states zero-field limit substituted at F = 0.
    SosLimit,
}

impl ChiKind {
    pub fn label(&self) -> &'static str {
        match self {
            ChiKind::Floquet => "floquet",
            ChiKind::SosLimit => "sos_limit",
        }
    }
}

#[derive(Clone, Debug)]
pub struct ScanRow {
    pub index: usize,
    /// Grid value of the scanned variable.
    pub value: f64,
    /// `None` when the point computed; otherwise the failure message.
    pub error: Option<String>,
    pub chi: Option<f64>,
    pub chi_kind: Option<ChiKind>,
    /// (n, P_nw) pairs for the requested orders.
    pub fourier: Vec<(usize, f64)>,
    /// Folded representative quasienergies when requested.
    pub quasienergies: Vec<f64>,
}

impl ScanSpec {
    pub fn validate(&self) -> Result<()> {
        if self.points < 2 {
            return Err(Error::InvalidSpec(format!(
                "need at least 2 points, got {}",
                self.points
            )));
        }
        if !(self.start < self.stop) {
            return Err(Error::InvalidSpec(format!(
                "start {} must be below stop {}",
                self.start, self.stop
            )));
        }
        if !self.start.is_finite() || !self.stop.is_finite() || !self.fixed.is_finite() {
            return Err(Error::InvalidSpec("non-finite grid bounds".into()));
        }
        if self.spacing == Spacing::Log && self.start <= 0.0 {
            return Err(Error::InvalidSpec(
                "log spacing requires a positive start".into(),
            ));
        }
        match self.variable {
            ScanVariable::Amplitude => {
                if self.start < 0.0 {
                    return Err(Error::InvalidSpec("amplitudes must be >= 0".into()));
                }
                if self.fixed <= 0.0 {
                    return Err(Error::InvalidSpec(
                        "fixed frequency must be positive".into(),
                    ));
                }
            }
            ScanVariable::Frequency => {
                if self.start <= 0.0 {
                    return Err(Error::InvalidSpec("frequencies must be positive".into()));
                }
                if self.fixed < 0.0 {
                    return Err(Error::InvalidSpec("fixed amplitude must be >= 0".into()));
                }
            }
        }
        let s = self.model.n_states();
        if self.k < 1 || self.k > s {
            return Err(Error::InvalidSpec(format!(
                "initial state k={} out of range 1..={s}",
                self.k
            )));
        }
        if self.observables.fourier_orders.is_empty()
            && !self.observables.chi
            && !self.observables.quasienergies
        {
            return Err(Error::InvalidSpec("no observables requested".into()));
        }
        Ok(())
    }

    /// Grid values, endpoint exact.
    pub fn grid(&self) -> Vec<f64> {
        let n = self.points;
        let mut out = Vec::with_capacity(n);
        for i in 0..n {
            let frac = i as f64 / (n - 1) as f64;
            let v = match self.spacing {
                Spacing::Linear => self.start + frac * (self.stop - self.start),
                Spacing::Log => (self.start.ln() + frac * (self.stop.ln() - self.start.ln())).exp(),
            };
            out.push(v);
        }
        out[0] = self.start;
        out[n - 1] = self.stop;
        out
    }
}

fn eval_point(spec: &ScanSpec, index: usize, value: f64) -> ScanRow {
    let mut row = ScanRow {
        index,
        value,
        error: None,
        chi: None,
        chi_kind: None,
        fourier: Vec::new(),
        quasienergies: Vec::new(),
    };
    let (amplitude, omega) = match spec.variable {
        ScanVariable::Amplitude => (value, spec.fixed),
        ScanVariable::Frequency => (spec.fixed, value),
    };
    let result = (|| -> Result<()> {
        let field = FieldConfig::new(amplitude, omega)?;
        let sol = solve_floquet(&spec.model, &field, &spec.trunc)?;
        let init = initial_expansion(&sol, spec.k)?;

        let max_order = spec
            .observables
            .fourier_orders
            .iter()
            .copied()
            .max()
            .unwrap_or(0)
            .max(if spec.observables.chi { 1 } else { 0 });
        let fourier = fourier_components(&sol, &init, &spec.model, max_order);

        for &n in &spec.observables.fourier_orders {
            row.fourier.push((n, fourier[n]));
        }
        if spec.observables.chi {
            match susceptibility(fourier[1], amplitude) {
                Some(chi) => {
                    row.chi = Some(chi);
                    row.chi_kind = Some(ChiKind::Floquet);
                }
                None => {
                    // Zero amplitude: substitute the weak-field limit.
                    let chi = analytic::sos_polarizability(&spec.model, spec.k, omega)?;
                    row.chi = Some(chi);
                    row.chi_kind = Some(ChiKind::SosLimit);
                }
            }
        }
        if spec.observables.quasienergies {
            row.quasienergies = sol.folded_representative_quasienergies();
        }
        Ok(())
    })();
    if let Err(e) = result {
        row.error = Some(e.to_string());
        row.chi = None;
        row.chi_kind = None;
        row.fourier.clear();
        row.quasienergies.clear();
    }
    row
}

/// Runs the sweep on the ambient rayon pool. Only a bad spec is an error;
/// per-point failures land in their rows.
pub fn run_scan(spec: &ScanSpec) -> Result<Vec<ScanRow>> {
    spec.validate()?;
    let grid = spec.grid();
    Ok(grid
        .par_iter()
        .enumerate()
        .map(|(i, &v)| eval_point(spec, i, v))
        .collect())
}

/// Least-squares fit of the weak-field expansion
/// P_1w(F) = alpha F + gamma F^3 (+ beta2 F^2 with `include_even`).
#[derive(Clone, Debug)]
pub struct FitResult {
    pub alpha: f64,
    pub gamma: f64,
    /// Even coefficient, present only when fitted.
    pub beta2: Option<f64>,
    /// l2 norm of the fit residual vector.
    pub residual: f64,
    pub amplitudes_used: Vec<f64>,
}

pub fn fit_susceptibilities(
    amplitudes: &[f64],
    p1_values: &[f64],
    include_even: bool,
) -> Result<FitResult> {
    let n = amplitudes.len();
    if p1_values.len() != n {
        return Err(Error::InvalidInput(format!(
            "amplitude and P_1w lists differ in length: {n} vs {}",
            p1_values.len()
        )));
    }
    let needed = if include_even { 5 } else { 4 };
    if n < needed {
        return Err(Error::InsufficientPoints { needed, got: n });
    }
    if amplitudes.iter().any(|f| !f.is_finite()) || p1_values.iter().any(|p| !p.is_finite()) {
        return Err(Error::InvalidInput("non-finite fit input".into()));
    }

    let cols = if include_even { 3 } else { 2 };
    let mut design = ndarray::Array2::zeros((n, cols));
    for (i, &f) in amplitudes.iter().enumerate() {
        design[(i, 0)] = f;
        if include_even {
            design[(i, 1)] = f * f;
            design[(i, 2)] = f * f * f;
        } else {
            design[(i, 1)] = f * f * f;
        }
    }
    let ls = linalg::solve_least_squares(&design, p1_values, defaults::PINV_CUTOFF_FACTOR)?;
    if ls.condition > defaults::FIT_CONDITION_LIMIT {
        return Err(Error::IllConditionedFit {
            condition: ls.condition,
            limit: defaults::FIT_CONDITION_LIMIT,
        });
    }
    let mut residual = 0.0;
    for i in 0..n {
        let mut pred = 0.0;
        for c in 0..cols {
            pred += design[(i, c)] * ls.x[c];
        }
        residual += (pred - p1_values[i]).powi(2);
    }
    let (alpha, beta2, gamma) = if include_even {
        (ls.x[0], Some(ls.x[1]), ls.x[2])
    } else {
        (ls.x[0], None, ls.x[1])
    };
    Ok(FitResult {
        alpha,
        gamma,
        beta2,
        residual: residual.sqrt(),
        amplitudes_used: amplitudes.to_vec(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::two_level_model;
    use approx::assert_abs_diff_eq;

    fn base_spec() -> ScanSpec {
        ScanSpec {
            variable: ScanVariable::Amplitude,
            start: 0.0,
            stop: 0.05,
            points: 6,
            spacing: Spacing::Linear,
            fixed: 0.9,
            model: two_level_model(1.0, 1.0, 0.0, 0.0).unwrap(),
            k: 1,
            trunc: TruncationConfig::fixed(8).unwrap(),
            observables: Observables::default(),
        }
    }

    #[test]
    fn spec_validation() {
        let mut s = base_spec();
        s.points = 1;
        assert!(matches!(s.validate(), Err(Error::InvalidSpec(_))));

        let mut s = base_spec();
        s.stop = s.start;
        assert!(s.validate().is_err());

        let mut s = base_spec();
        s.spacing = Spacing::Log;
        assert!(s.validate().is_err(), "log spacing from 0 must fail");

        let mut s = base_spec();
        s.k = 3;
        assert!(s.validate().is_err());

        assert!(base_spec().validate().is_ok());
    }

    #[test]
    fn grid_endpoints_exact() {
        let mut s = base_spec();
        s.start = 0.1;
        s.stop = 0.9;
        s.points = 7;
        let g = s.grid();
        assert_eq!(g.len(), 7);
        assert_eq!(g[0], 0.1);
        assert_eq!(g[6], 0.9);

        s.spacing = Spacing::Log;
        let g = s.grid();
        assert_eq!(g[0], 0.1);
        assert_eq!(g[6], 0.9);
        // Log spacing: constant ratio.
        let r0 = g[1] / g[0];
        for w in g.windows(2) {
            assert_abs_diff_eq!(w[1] / w[0], r0, epsilon = 1e-10);
        }
    }

    #[test]
    fn amplitude_scan_zero_field_row() {
        let rows = run_scan(&base_spec()).unwrap();
        assert_eq!(rows.len(), 6);
        let first = &rows[0];
        assert!(first.error.is_none());
        assert_eq!(first.value, 0.0);
        // P_1w = 0 exactly at F = 0; chi falls back to the SOS limit.
        assert_eq!(first.fourier[0], (1, 0.0));
        assert_eq!(first.chi_kind, Some(ChiKind::SosLimit));
        let sos = analytic::sos_polarizability(&base_spec().model, 1, 0.9).unwrap();
        assert_abs_diff_eq!(first.chi.unwrap(), sos, epsilon = 1e-14);
        for row in &rows[1..] {
            assert!(row.error.is_none());
            assert_eq!(row.chi_kind, Some(ChiKind::Floquet));
        }
    }

    #[test]
    fn per_point_failure_does_not_abort() {
        // F = 0 at exact resonance: the SOS substitute hits the resonance
        // error, so that row fails while the rest compute.
        let mut s = base_spec();
        s.fixed = 1.0;
        s.trunc = TruncationConfig::fixed(6).unwrap();
        let rows = run_scan(&s).unwrap();
        assert!(rows[0].error.is_some());
        assert!(rows[0].chi.is_none());
        for row in &rows[1..] {
            assert!(row.error.is_none(), "row {}: {:?}", row.index, row.error);
        }
    }

    #[test]
    fn frequency_scan_with_quasienergies() {
        let mut s = base_spec();
        s.variable = ScanVariable::Frequency;
        s.start = 0.8;
        s.stop = 0.95;
        s.points = 4;
        s.fixed = 0.05;
        s.observables.quasienergies = true;
        let rows = run_scan(&s).unwrap();
        for row in &rows {
            assert!(row.error.is_none());
            assert_eq!(row.quasienergies.len(), 2);
            let half = row.value / 2.0;
            for &e in &row.quasienergies {
                assert!((-half..half).contains(&e));
            }
        }
    }

    #[test]
    fn fit_recovers_exact_polynomials() {
        let f: Vec<f64> = (1..=6).map(|i| 0.01 * i as f64).collect();
        let linear: Vec<f64> = f.iter().map(|&x| 2.0 * x).collect();
        let fit = fit_susceptibilities(&f, &linear, false).unwrap();
        assert_abs_diff_eq!(fit.alpha, 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(fit.gamma, 0.0, epsilon = 1e-10);
        assert!(fit.residual < 1e-12);
        assert!(fit.beta2.is_none());

        let cubic: Vec<f64> = f.iter().map(|&x| 2.0 * x + 5.0 * x * x * x).collect();
        let fit = fit_susceptibilities(&f, &cubic, false).unwrap();
        assert_abs_diff_eq!(fit.alpha, 2.0, epsilon = 1e-10);
        assert_abs_diff_eq!(fit.gamma, 5.0, epsilon = 1e-8);
        assert!(fit.residual < 1e-12);

        let mixed: Vec<f64> = f
            .iter()
            .map(|&x| 2.0 * x - 0.7 * x * x + 5.0 * x * x * x)
            .collect();
        let fit = fit_susceptibilities(&f, &mixed, true).unwrap();
        assert_abs_diff_eq!(fit.alpha, 2.0, epsilon = 1e-8);
        assert_abs_diff_eq!(fit.beta2.unwrap(), -0.7, epsilon = 1e-6);
        assert_abs_diff_eq!(fit.gamma, 5.0, epsilon = 1e-5);
        assert!(fit.residual < 1e-12);
    }

    #[test]
    fn fit_input_guards() {
        let f = [0.01, 0.02, 0.03];
        let p = [0.02, 0.04, 0.06];
        assert!(matches!(
            fit_susceptibilities(&f, &p, false).unwrap_err(),
            Error::InsufficientPoints { needed: 4, got: 3 }
        ));

        let f = [0.01, 0.02, 0.03, 0.04];
        let p = [0.02, 0.04];
        assert!(fit_susceptibilities(&f, &p, false).is_err());
    }
}
