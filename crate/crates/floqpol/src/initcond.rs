//! Superposition coefficients A_j for a sudden switch-on from stationary
//! state k: the field appears at t=0, so the Floquet expansion must
//! reproduce psi_k at t=0, giving sum_j B_sj A_j = delta_sk with
//! B_sj = sum_n C_ns^j over the S ladder representatives.

use ndarray::Array2;

use crate::defaults;
use crate::error::{Error, Result};
use crate::floquet::{fold_to_zone, FloquetSolution};
use crate::linalg;

/// Solution of the switch-on system, aligned with
/// `FloquetSolution::representatives`.
#[derive(Clone, Debug)]
pub struct InitialExpansion {
    /// Initial stationary state, 1-based.
    pub k: usize,
    pub a: Vec<f64>,
    /// Condition number of B (singular-value ratio; infinite when singular).
    pub b_condition: f64,
    /// ||B a - e_k||_2: how well the representatives reproduce psi_k.
    pub reconstruction_error: f64,
    /// Set when the system was solved by truncated pseudo-inverse because
    /// cond(B) exceeded `defaults::B_CONDITION_LIMIT`.
    pub degenerate: bool,
}

/// B_sj = sum_n C_ns^j, columns in representative (state) order. Column j is
/// the t=0 value of the Floquet eigenfunction u_j expanded over psi_s.
pub fn build_b(sol: &FloquetSolution) -> Array2<f64> {
    let s = sol.n_states();
    let n = sol.n_max() as i64;
    let mut b = Array2::zeros((s, s));
    for (col, &j) in sol.representatives().iter().enumerate() {
        for st in 0..s {
            let mut acc = 0.0;
            for photon in -n..=n {
                acc += sol.coefficient(photon, st, j);
            }
            b[(st, col)] = acc;
        }
    }
    b
}

/// Solves B a = e_k. Above `defaults::B_CONDITION_LIMIT` the system is
/// solved in the least-squares sense by truncated pseudo-inverse (cutoff
/// `defaults::PINV_CUTOFF_FACTOR` times the largest singular value) and the
/// result is flagged degenerate. A B with no singular value above the
/// cutoff is a hard error.
pub fn solve_a(b: &Array2<f64>, k: usize) -> Result<InitialExpansion> {
    let s = b.nrows();
    if b.ncols() != s {
        return Err(Error::InvalidInput(format!(
            "B must be square, got {}x{}",
            s,
            b.ncols()
        )));
    }
    if k < 1 || k > s {
        return Err(Error::IndexOutOfRange { k, s });
    }
    let mut rhs = vec![0.0; s];
    rhs[k - 1] = 1.0;

    let ls = linalg::solve_least_squares(b, &rhs, defaults::PINV_CUTOFF_FACTOR)?;
    if ls.rank == 0 {
        return Err(Error::SingularB { nearest: None });
    }
    let degenerate = ls.condition > defaults::B_CONDITION_LIMIT;

    let mut reconstruction_error = 0.0;
    for r in 0..s {
        let mut acc = -rhs[r];
        for c in 0..s {
            acc += b[(r, c)] * ls.x[c];
        }
        reconstruction_error += acc * acc;
    }
    Ok(InitialExpansion {
        k,
        a: ls.x,
        b_condition: ls.condition,
        reconstruction_error: reconstruction_error.sqrt(),
        degenerate,
    })
}

/// Convenience: builds B from the solution and solves for state k. On a
/// singular B the error names the closest pair of folded representative
/// quasienergies, the usual culprit.
pub fn initial_expansion(sol: &FloquetSolution, k: usize) -> Result<InitialExpansion> {
    let b = build_b(sol);
    solve_a(&b, k).map_err(|e| match e {
        Error::SingularB { .. } => Error::SingularB {
            nearest: Some(nearest_degeneracy(sol)),
        },
        other => other,
    })
}

fn nearest_degeneracy(sol: &FloquetSolution) -> String {
    let folded = sol.folded_representative_quasienergies();
    let mut best: Option<(usize, usize, f64)> = None;
    for i in 0..folded.len() {
        for j in (i + 1)..folded.len() {
            // Distance on the quasienergy circle.
            let gap = fold_to_zone(folded[i] - folded[j], sol.omega()).abs();
            if best.is_none_or(|(_, _, g)| gap < g) {
                best = Some((i, j, gap));
            }
        }
    }
    match best {
        Some((i, j, gap)) => format!("states {} and {} (folded gap {:.3e})", i + 1, j + 1, gap),
        None => "single-state model".into(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::floquet::solve_floquet;
    use crate::model::{two_level_model, FieldConfig, TruncationConfig};
    use approx::assert_abs_diff_eq;
    use ndarray::array;

    #[test]
    fn identity_b_selects_coordinate_vector() {
        let b = Array2::eye(3);
        let exp = solve_a(&b, 2).unwrap();
        assert_eq!(exp.a, vec![0.0, 1.0, 0.0]);
        assert_abs_diff_eq!(exp.b_condition, 1.0, epsilon = 1e-14);
        assert_eq!(exp.reconstruction_error, 0.0);
        assert!(!exp.degenerate);
    }

    #[test]
    fn k_out_of_range_rejected() {
        let b = Array2::eye(2);
        assert!(matches!(
            solve_a(&b, 0).unwrap_err(),
            Error::IndexOutOfRange { k: 0, s: 2 }
        ));
        assert!(matches!(
            solve_a(&b, 3).unwrap_err(),
            Error::IndexOutOfRange { k: 3, s: 2 }
        ));
    }

    #[test]
    fn singular_b_uses_pseudo_inverse_and_flags() {
        let b = array![[1.0, 1.0], [1.0, 1.0]];
        let exp = solve_a(&b, 1).unwrap();
        assert!(exp.degenerate);
        assert!(exp.b_condition.is_infinite());
        // Minimal-norm least-squares solution of the rank-1 system.
        assert_abs_diff_eq!(exp.a[0], 0.25, epsilon = 1e-14);
        assert_abs_diff_eq!(exp.a[1], 0.25, epsilon = 1e-14);
        assert_abs_diff_eq!(exp.reconstruction_error, 0.5f64.sqrt(), epsilon = 1e-12);
    }

    #[test]
    fn zero_b_is_hard_error() {
        let b = Array2::zeros((2, 2));
        assert!(matches!(
            solve_a(&b, 1).unwrap_err(),
            Error::SingularB { nearest: None }
        ));
    }

    #[test]
    fn zero_field_expansion_is_coordinate_vector() {
        let model = two_level_model(1.0, 1.0, 0.0, 0.0).unwrap();
        let field = FieldConfig::new(0.0, 0.7).unwrap();
        let sol = solve_floquet(&model, &field, &TruncationConfig::fixed(4).unwrap()).unwrap();
        let b = build_b(&sol);
        // Representatives are the n=0 coordinate vectors in state order, so
        // B is the identity exactly.
        for r in 0..2 {
            for c in 0..2 {
                let want = if r == c { 1.0 } else { 0.0 };
                assert_abs_diff_eq!(b[(r, c)], want, epsilon = 1e-12);
            }
        }
        for k in 1..=2 {
            let exp = initial_expansion(&sol, k).unwrap();
            for (idx, &a) in exp.a.iter().enumerate() {
                let want = if idx == k - 1 { 1.0 } else { 0.0 };
                assert_abs_diff_eq!(a, want, epsilon = 1e-12);
            }
            assert!(exp.reconstruction_error <= 1e-12);
        }
    }

    #[test]
    fn weak_field_expansion_near_unity() {
        let model = two_level_model(1.0, 1.0, 0.0, 0.0).unwrap();
        let field = FieldConfig::new(0.05, 0.9).unwrap();
        let sol = solve_floquet(&model, &field, &TruncationConfig::fixed(12).unwrap()).unwrap();
        let exp = initial_expansion(&sol, 1).unwrap();
        let norm: f64 = exp.a.iter().map(|a| a * a).sum();
        assert_abs_diff_eq!(norm, 1.0, epsilon = 1e-6);
        assert!(exp.reconstruction_error <= 1e-6);
        assert!(exp.b_condition < 1.0 + 1e-8);
        assert!(!exp.degenerate);
    }
}
