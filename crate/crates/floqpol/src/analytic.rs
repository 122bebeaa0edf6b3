//! Closed-form references: the two-level estimate of P_1w, its convergence
//! radius in the field amplitude, and the weak-field sum-over-states
//! polarizability used as the linear-response oracle.

use crate::defaults;
use crate::error::{Error, Result};
use crate::model::MolecularModel;

/// Parameters of the two-level closed forms.
#[derive(Clone, Copy, Debug)]
pub struct TwoLevelParams {
    pub d12: f64,
    pub omega: f64,
    /// Transition frequency, must be positive.
    pub omega12: f64,
    pub amplitude: f64,
}

impl TwoLevelParams {
    fn validate(&self) -> Result<()> {
        if !(self.omega12 > 0.0) {
            return Err(Error::Validation(format!(
                "omega12 must be positive, got {}",
                self.omega12
            )));
        }
        Ok(())
    }
}

/// Two-level estimate of the first Fourier component:
/// -D12 (w - w12) F / ((w - w12)^2 - D12^2 F^2).
///
/// Valid as a qualitative estimate only; the denominator vanishing (within
/// `defaults::POLE_TOL`) is reported as a pole together with the critical
/// amplitude |w - w12| / |D12| at which it occurs.
pub fn two_level_p1(p: &TwoLevelParams) -> Result<f64> {
    p.validate()?;
    let detuning = p.omega - p.omega12;
    let denom = detuning * detuning - p.d12 * p.d12 * p.amplitude * p.amplitude;
    if denom.abs() <= defaults::POLE_TOL {
        let critical_amplitude = if p.d12 != 0.0 {
            (detuning / p.d12).abs()
        } else {
            0.0
        };
        return Err(Error::Pole { critical_amplitude });
    }
    Ok(-p.d12 * detuning * p.amplitude / denom)
}

/// Radius of convergence of the two-level power series in the amplitude:
/// |(w - w12) / D12|. Infinite when D12 = 0 (no coupling, no pole).
pub fn convergence_radius(p: &TwoLevelParams) -> Result<f64> {
    p.validate()?;
    if p.d12 == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(((p.omega - p.omega12) / p.d12).abs())
}

/// Weak-field sum-over-states polarizability of state k (1-based):
/// alpha(w) = sum_{s != k} 2 D_ks^2 (eps_s - eps_k) / ((eps_s - eps_k)^2 - w^2).
///
/// Errors when w sits on a transition frequency (within
/// `defaults::RESONANCE_TOL`), naming the offending pair.
pub fn sos_polarizability(model: &MolecularModel, k: usize, omega: f64) -> Result<f64> {
    let s = model.n_states();
    if k < 1 || k > s {
        return Err(Error::IndexOutOfRange { k, s });
    }
    let k0 = k - 1;
    let ek = model.energy(k0);
    let mut acc = 0.0;
    for st in 0..s {
        if st == k0 {
            continue;
        }
        let gap = model.energy(st) - ek;
        if (omega.abs() - gap.abs()).abs() <= defaults::RESONANCE_TOL {
            return Err(Error::Resonance {
                lower: k0.min(st) + 1,
                upper: k0.max(st) + 1,
                omega,
                gap: gap.abs(),
            });
        }
        let d = model.dipole_element(k0, st);
        acc += 2.0 * d * d * gap / (gap * gap - omega * omega);
    }
    Ok(acc)
}
