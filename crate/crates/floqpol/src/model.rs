//! Few-level molecular models and field parameters, with JSON I/O.
//!
//! All quantities are in atomic units: energies in hartree, dipole matrix
//! elements in e*a0, field amplitudes in a.u. of electric field. The dipole
//! matrix stores the projection of the dipole operator on the field axis.

use ndarray::Array2;
use serde::{Deserialize, Serialize};
use std::path::Path;

use crate::defaults;
use crate::error::{Error, Result};

/// Validated S-level model. Energies are ascending and the dipole matrix is
/// exactly symmetric as stored; both are enforced by every constructor.
#[derive(Clone, Debug, PartialEq)]
pub struct MolecularModel {
    name: String,
    energies: Vec<f64>,
    dipole: Array2<f64>,
}

/// On-disk form: plain JSON with a row-major dipole matrix.
#[derive(Serialize, Deserialize)]
struct ModelFile {
    name: String,
    energies: Vec<f64>,
    dipole: Vec<Vec<f64>>,
}

impl MolecularModel {
    /// Validates, reorders by energy, and symmetrizes. Asymmetry beyond
    /// `defaults::SYMMETRY_TOL` (absolute) is rejected; anything smaller is
    /// averaged away so the stored matrix is symmetric to the bit.
    pub fn new(name: impl Into<String>, energies: Vec<f64>, dipole: Vec<Vec<f64>>) -> Result<Self> {
        let name = name.into();
        let s = energies.len();
        if s < 2 {
            return Err(Error::Validation(format!(
                "model needs at least 2 levels, got {s}"
            )));
        }
        if energies.iter().any(|e| !e.is_finite()) {
            return Err(Error::Validation("non-finite energy entry".into()));
        }
        if dipole.len() != s || dipole.iter().any(|row| row.len() != s) {
            return Err(Error::Validation(format!(
                "dipole must be {s}x{s} to match {s} energies"
            )));
        }
        if dipole.iter().flatten().any(|d| !d.is_finite()) {
            return Err(Error::Validation("non-finite dipole entry".into()));
        }
        let mut max_dev: f64 = 0.0;
        for r in 0..s {
            for c in 0..r {
                max_dev = max_dev.max((dipole[r][c] - dipole[c][r]).abs());
            }
        }
        if max_dev > defaults::SYMMETRY_TOL {
            return Err(Error::Validation(format!(
                "dipole matrix asymmetric: max |D_rs - D_sr| = {max_dev:.3e}"
            )));
        }

        // Stable sort keeps equal energies in input order, so reordering is
        // deterministic.
        let mut perm: Vec<usize> = (0..s).collect();
        perm.sort_by(|&a, &b| energies[a].total_cmp(&energies[b]));

        let sorted_energies: Vec<f64> = perm.iter().map(|&i| energies[i]).collect();
        let mut mat = Array2::zeros((s, s));
        for r in 0..s {
            for c in 0..s {
                let (i, j) = (perm[r], perm[c]);
                // Average of the two mirror entries; identity when already
                // symmetric, so file round-trips are bit-exact.
                mat[(r, c)] = 0.5 * (dipole[i][j] + dipole[j][i]);
            }
        }
        Ok(Self {
            name,
            energies: sorted_energies,
            dipole: mat,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// Number of levels S.
    pub fn n_states(&self) -> usize {
        self.energies.len()
    }

    /// Ascending level energies (hartree).
    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    pub fn energy(&self, s: usize) -> f64 {
        self.energies[s]
    }

    /// Symmetric dipole projection matrix (e*a0).
    pub fn dipole(&self) -> &Array2<f64> {
        &self.dipole
    }

    pub fn dipole_element(&self, r: usize, s: usize) -> f64 {
        self.dipole[(r, s)]
    }

    pub fn to_json(&self) -> String {
        let file = ModelFile {
            name: self.name.clone(),
            energies: self.energies.clone(),
            dipole: (0..self.n_states())
                .map(|r| self.dipole.row(r).to_vec())
                .collect(),
        };
        // Serialization of a validated model cannot fail.
        serde_json::to_string_pretty(&file).expect("model serialization")
    }
}

/// Loads and validates a model file (schema in `docs/model-format.md`).
pub fn load_model(path: impl AsRef<Path>) -> Result<MolecularModel> {
    let text = std::fs::read_to_string(path)?;
    let file: ModelFile = serde_json::from_str(&text)?;
    MolecularModel::new(file.name, file.energies, file.dipole)
}

/// Writes the model as JSON. `load_model` of the result reproduces the model
/// bit-exactly.
pub fn save_model(model: &MolecularModel, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, model.to_json())?;
    Ok(())
}

/// Convenience constructor for the ubiquitous two-level system:
/// energies [0, omega12], dipole [[d11, d12], [d12, d22]].
pub fn two_level_model(omega12: f64, d12: f64, d11: f64, d22: f64) -> Result<MolecularModel> {
    if !(omega12 > 0.0) {
        return Err(Error::Validation(format!(
            "two-level transition frequency must be positive, got {omega12}"
        )));
    }
    MolecularModel::new(
        "two-level",
        vec![0.0, omega12],
        vec![vec![d11, d12], vec![d12, d22]],
    )
}

/// Monochromatic field F*cos(wt) along the model's dipole axis.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FieldConfig {
    amplitude: f64,
    omega: f64,
}

impl FieldConfig {
    pub fn new(amplitude: f64, omega: f64) -> Result<Self> {
        if !amplitude.is_finite() || amplitude < 0.0 {
            return Err(Error::Validation(format!(
                "field amplitude must be finite and >= 0, got {amplitude}"
            )));
        }
        if !omega.is_finite() || omega <= 0.0 {
            return Err(Error::Validation(format!(
                "field frequency must be finite and > 0, got {omega}"
            )));
        }
        Ok(Self { amplitude, omega })
    }

    pub fn amplitude(&self) -> f64 {
        self.amplitude
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    /// Field period 2 pi / omega.
    pub fn period(&self) -> f64 {
        2.0 * std::f64::consts::PI / self.omega
    }
}

/// Photon-block truncation n = -N..N plus the auto-convergence policy.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TruncationConfig {
    pub n_max: usize,
    pub auto_converge: bool,
    /// Convergence target on P_1w when auto_converge is set.
    pub tol: f64,
    /// Guard on the matrix dimension (2N+1)*S.
    pub dim_cap: usize,
}

impl TruncationConfig {
    pub fn new(n_max: usize, auto_converge: bool, tol: f64) -> Result<Self> {
        if n_max < 1 {
            return Err(Error::Validation("n_max must be >= 1".into()));
        }
        if !(tol > 0.0) {
            return Err(Error::Validation(format!(
                "convergence tolerance must be > 0, got {tol}"
            )));
        }
        Ok(Self {
            n_max,
            auto_converge,
            tol,
            dim_cap: defaults::DIM_CAP,
        })
    }

    pub fn fixed(n_max: usize) -> Result<Self> {
        Self::new(n_max, false, defaults::CONVERGENCE_TOL)
    }
}

impl Default for TruncationConfig {
    fn default() -> Self {
        Self {
            n_max: defaults::N_MAX,
            auto_converge: false,
            tol: defaults::CONVERGENCE_TOL,
            dim_cap: defaults::DIM_CAP,
        }
    }
}
