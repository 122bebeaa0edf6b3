//! Induced polarization of the driven model: full P(t), its periodic part
//! and Fourier components P_nw, the field-dependent susceptibility, and the
//! aperiodic beat content.
//!
//! With Psi(t) = sum_j A_j exp(-i E_j t) u_j(t) over the S representatives
//! and u_j(t) = sum_ns C_ns^j exp(i n w t) psi_s, the expectation value of
//! the dipole splits into cosine lines:
//!
//!   P(t) = sum_ij A_i A_j sum_d G_ij(d) cos((E_i - E_j + d w) t),
//!   G_ij(d) = sum_m sum_sr C_ms^i C_(m+d)r^j D_sr.
//!
//! Diagonal terms (i = j) are periodic with the drive and carry the Fourier
//! components P_nw = sum_j A_j^2 (2 - delta_0n) G_jj(n); cross terms beat at
//! the quasienergy differences E_j - E_i, which are not multiples of w.

use crate::defaults;
use crate::error::{Error, Result};
use crate::floquet::FloquetSolution;
use crate::initcond::InitialExpansion;
use crate::model::{FieldConfig, MolecularModel};

/// One aperiodic cross term between two representatives.
#[derive(Clone, Copy, Debug)]
pub struct BeatTerm {
    /// Lower state index, 0-based.
    pub state_i: usize,
    /// Upper state index, 0-based.
    pub state_j: usize,
    /// Unfolded quasienergy difference E_j - E_i.
    pub frequency: f64,
    /// |A_i A_j|.
    pub amplitude: f64,
}

/// Bundle of everything the CLI reports for one (model, field, k) point.
pub struct PolarizationResult {
    /// P_nw for n = 0..=n_report.
    pub fourier: Vec<f64>,
    /// P_1w / F; `None` at zero amplitude where the ratio is undefined.
    pub chi: Option<f64>,
    pub beats: Vec<BeatTerm>,
    /// Sampled (t, P(t)) when a grid was requested.
    pub time_series: Option<(Vec<f64>, Vec<f64>)>,
}

/// Overlap G_ij(d) between representatives i and j shifted by d photons.
fn g_overlap(
    sol: &FloquetSolution,
    model: &MolecularModel,
    rep_i: usize,
    rep_j: usize,
    delta: i64,
) -> f64 {
    let n = sol.n_max() as i64;
    let s = sol.n_states();
    let lo = (-n).max(-n - delta);
    let hi = n.min(n - delta);
    let mut acc = 0.0;
    for m in lo..=hi {
        for st in 0..s {
            let ci = sol.coefficient(m, st, rep_i);
            if ci == 0.0 {
                continue;
            }
            for r in 0..s {
                acc += ci * sol.coefficient(m + delta, r, rep_j) * model.dipole_element(st, r);
            }
        }
    }
    acc
}

/// Spectral lines of P(t): (frequency, coefficient) pairs over representative
/// pairs and photon shifts. Shared by the time series and by tests that need
/// the exact line content.
fn cosine_lines(
    sol: &FloquetSolution,
    init: &InitialExpansion,
    model: &MolecularModel,
) -> Vec<(f64, f64)> {
    let s = sol.n_states();
    let n = sol.n_max() as i64;
    let e_rep = sol.representative_quasienergies();
    let reps = sol.representatives();
    let omega = sol.omega();
    let mut lines = Vec::new();
    for i in 0..s {
        for j in 0..s {
            let weight = init.a[i] * init.a[j];
            if weight == 0.0 {
                continue;
            }
            for delta in -2 * n..=2 * n {
                let g = g_overlap(sol, model, reps[i], reps[j], delta);
                if g == 0.0 {
                    continue;
                }
                let freq = e_rep[i] - e_rep[j] + delta as f64 * omega;
                lines.push((freq, weight * g));
            }
        }
    }
    lines
}

/// Full polarization P(t) on an arbitrary finite time grid.
pub fn polarization_time_series(
    sol: &FloquetSolution,
    init: &InitialExpansion,
    model: &MolecularModel,
    t_grid: &[f64],
) -> Result<Vec<f64>> {
    if t_grid.iter().any(|t| !t.is_finite()) {
        return Err(Error::InvalidInput(
            "time grid contains non-finite entries".into(),
        ));
    }
    let lines = cosine_lines(sol, init, model);
    Ok(t_grid
        .iter()
        .map(|&t| lines.iter().map(|&(f, c)| c * (f * t).cos()).sum())
        .collect())
}

/// Fourier components P_nw of the periodic part, n = 0..=n_report.
/// Components beyond the truncation support (n > 2N) are exactly zero.
pub fn fourier_components(
    sol: &FloquetSolution,
    init: &InitialExpansion,
    model: &MolecularModel,
    n_report: usize,
) -> Vec<f64> {
    let s = sol.n_states();
    let reps = sol.representatives();
    let mut out = vec![0.0; n_report + 1];
    for (n, slot) in out.iter_mut().enumerate() {
        let factor = if n == 0 { 1.0 } else { 2.0 };
        let mut acc = 0.0;
        for j in 0..s {
            let w = init.a[j] * init.a[j];
            if w == 0.0 {
                continue;
            }
            acc += w * factor * g_overlap(sol, model, reps[j], reps[j], n as i64);
        }
        *slot = acc;
    }
    out
}

/// Periodic part sum_n P_nw cos(n w t) at one time, using the full
/// truncation support n = 0..=2N.
pub fn periodic_part(
    sol: &FloquetSolution,
    init: &InitialExpansion,
    model: &MolecularModel,
    t: f64,
) -> f64 {
    let fourier = fourier_components(sol, init, model, 2 * sol.n_max());
    let omega = sol.omega();
    fourier
        .iter()
        .enumerate()
        .map(|(n, p)| p * (n as f64 * omega * t).cos())
        .sum()
}

/// chi(w, F) = P_1w / F. `None` at zero amplitude: the ratio is undefined
/// there and callers substitute the weak-field sum-over-states limit.
pub fn susceptibility(p1: f64, amplitude: f64) -> Option<f64> {
    (amplitude > 0.0).then(|| p1 / amplitude)
}

/// Representative pairs with |A_i A_j| above
/// `defaults::BEAT_AMPLITUDE_THRESHOLD`, carrying the aperiodic content.
pub fn beat_terms(sol: &FloquetSolution, init: &InitialExpansion) -> Vec<BeatTerm> {
    let e_rep = sol.representative_quasienergies();
    let s = sol.n_states();
    let mut out = Vec::new();
    for i in 0..s {
        for j in (i + 1)..s {
            let amplitude = (init.a[i] * init.a[j]).abs();
            if amplitude > defaults::BEAT_AMPLITUDE_THRESHOLD {
                out.push(BeatTerm {
                    state_i: i,
                    state_j: j,
                    frequency: e_rep[j] - e_rep[i],
                    amplitude,
                });
            }
        }
    }
    out
}

/// Assembles the full report for one parameter point.
pub fn polarization_result(
    sol: &FloquetSolution,
    init: &InitialExpansion,
    model: &MolecularModel,
    field: &FieldConfig,
    n_report: usize,
    t_grid: Option<&[f64]>,
) -> Result<PolarizationResult> {
    let fourier = fourier_components(sol, init, model, n_report.max(1));
    let chi = susceptibility(fourier[1], field.amplitude());
    let mut fourier = fourier;
    fourier.truncate(n_report + 1);
    let beats = beat_terms(sol, init);
    let time_series = match t_grid {
        Some(grid) => Some((
            grid.to_vec(),
            polarization_time_series(sol, init, model, grid)?,
        )),
        None => None,
    };
    Ok(PolarizationResult {
        fourier,
        chi,
        beats,
        time_series,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::floquet::solve_floquet;
    use crate::initcond::initial_expansion;
    use crate::model::{two_level_model, TruncationConfig};
    use approx::assert_abs_diff_eq;

    fn pipeline(
        model: &MolecularModel,
        f: f64,
        w: f64,
        n: usize,
        k: usize,
    ) -> (FloquetSolution, InitialExpansion) {
        let field = FieldConfig::new(f, w).unwrap();
        let sol = solve_floquet(model, &field, &TruncationConfig::fixed(n).unwrap()).unwrap();
        let init = initial_expansion(&sol, k).unwrap();
        (sol, init)
    }

    #[test]
    fn zero_field_polarization_is_constant_dipole() {
        let model = two_level_model(1.0, 1.0, 0.4, -0.2).unwrap();
        let (sol, init) = pipeline(&model, 0.0, 0.7, 3, 1);
        let grid: Vec<f64> = (0..50).map(|i| 0.3 * i as f64).collect();
        let p = polarization_time_series(&sol, &init, &model, &grid).unwrap();
        for &v in &p {
            assert_eq!(v, model.dipole_element(0, 0));
        }
        let fourier = fourier_components(&sol, &init, &model, 6);
        assert_eq!(fourier[0], model.dipole_element(0, 0));
        for &p in &fourier[1..] {
            assert_eq!(p, 0.0);
        }
    }

    #[test]
    fn initial_value_is_unperturbed_dipole() {
        let model = two_level_model(1.0, 1.0, 0.0, 0.0).unwrap();
        let (sol, init) = pipeline(&model, 0.05, 0.9, 12, 1);
        let p0 = polarization_time_series(&sol, &init, &model, &[0.0]).unwrap()[0];
        // P(0) = <psi_1|D|psi_1> = D_11 = 0 up to reconstruction error.
        assert!(p0.abs() <= 1e-8, "P(0) = {p0}");
    }

    #[test]
    fn periodic_part_is_periodic() {
        let model = two_level_model(1.0, 1.0, 0.3, -0.1).unwrap();
        let (sol, init) = pipeline(&model, 0.08, 0.9, 8, 1);
        let t0 = 0.37;
        let period = 2.0 * std::f64::consts::PI / 0.9;
        let a = periodic_part(&sol, &init, &model, t0);
        let b = periodic_part(&sol, &init, &model, t0 + period);
        assert_abs_diff_eq!(a, b, epsilon = 1e-12);
    }

    #[test]
    fn susceptibility_examples() {
        assert_eq!(susceptibility(0.5, 0.25), Some(2.0));
        assert_eq!(susceptibility(0.0, 0.1), Some(0.0));
        assert_eq!(susceptibility(0.3, 0.0), None);
    }

    #[test]
    fn truncation_support_cutoff() {
        // Polar model so even components survive; N=2 supports n <= 4.
        let model = two_level_model(1.0, 1.0, 0.5, -0.3).unwrap();
        let (sol, init) = pipeline(&model, 0.3, 0.9, 2, 1);
        let fourier = fourier_components(&sol, &init, &model, 8);
        assert!(fourier[4].abs() > 1e-12, "edge component vanished");
        for n in 5..=8 {
            assert_eq!(fourier[n], 0.0, "P_{n}w should be exactly zero");
        }
    }

    #[test]
    fn beat_terms_appear_with_field() {
        let model = two_level_model(1.0, 1.0, 0.0, 0.0).unwrap();
        let (sol, init) = pipeline(&model, 0.0, 0.9, 4, 1);
        assert!(beat_terms(&sol, &init).is_empty());

        let (sol, init) = pipeline(&model, 0.05, 0.9, 12, 1);
        let beats = beat_terms(&sol, &init);
        assert_eq!(beats.len(), 1);
        let e = sol.representative_quasienergies();
        assert_eq!(beats[0].frequency, e[1] - e[0]);
        assert!(beats[0].amplitude > defaults::BEAT_AMPLITUDE_THRESHOLD);
    }

    #[test]
    fn non_finite_grid_rejected() {
        let model = two_level_model(1.0, 1.0, 0.0, 0.0).unwrap();
        let (sol, init) = pipeline(&model, 0.05, 0.9, 4, 1);
        let err = polarization_time_series(&sol, &init, &model, &[0.0, f64::NAN]).unwrap_err();
        assert!(matches!(err, Error::InvalidInput(_)));
    }

    #[test]
    fn result_bundle_consistency() {
        let model = two_level_model(1.0, 1.0, 0.0, 0.0).unwrap();
        let field = FieldConfig::new(0.05, 0.9).unwrap();
        let (sol, init) = pipeline(&model, 0.05, 0.9, 10, 1);
        let grid: Vec<f64> = (0..10).map(|i| i as f64).collect();
        let res = polarization_result(&sol, &init, &model, &field, 4, Some(&grid)).unwrap();
        assert_eq!(res.fourier.len(), 5);
        let chi = res.chi.unwrap();
        assert_abs_diff_eq!(chi, res.fourier[1] / 0.05, epsilon = 1e-15);
        let (ts, ps) = res.time_series.as_ref().unwrap();
        assert_eq!(ts.len(), 10);
        assert_eq!(ps.len(), 10);

        // n_report = 0 still defines chi from P_1w.
        let res0 = polarization_result(&sol, &init, &model, &field, 0, None).unwrap();
        assert_eq!(res0.fourier.len(), 1);
        assert_eq!(res0.chi, res.chi);
    }
}
