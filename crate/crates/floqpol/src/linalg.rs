//! Dense symmetric eigensolver and SVD, dependency-free by design.
//!
//! Cyclic Jacobi is deterministic and accurate for the well-conditioned
//! desk-scale matrices this crate produces (dims up to ~2000); that is the
//! whole eigensolver requirement, so no LAPACK binding is pulled in. The
//! one-sided Jacobi SVD backs the initial-condition solve, its condition
//! estimate, and the susceptibility fits.

use ndarray::Array2;

use crate::defaults;
use crate::error::{Error, Result};

/// Eigendecomposition of a real symmetric matrix by cyclic Jacobi rotations.
///
/// Returns eigenvalues ascending and the matching orthonormal eigenvectors as
/// matrix columns. Each column is sign-fixed so its largest-magnitude entry is
/// positive (first such entry wins on exact magnitude ties), which makes the
/// output fully deterministic. Input asymmetry beyond
/// `defaults::SYMMETRY_TOL` (absolute) is an error.
pub fn jacobi_eigh(a: &Array2<f64>) -> Result<(Vec<f64>, Array2<f64>)> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(Error::InvalidInput(format!(
            "eigensolver needs a square matrix, got {}x{}",
            a.nrows(),
            a.ncols()
        )));
    }
    let mut max_dev: f64 = 0.0;
    for p in 0..n {
        for q in 0..p {
            max_dev = max_dev.max((a[(p, q)] - a[(q, p)]).abs());
        }
    }
    if max_dev > defaults::SYMMETRY_TOL {
        return Err(Error::Asymmetric {
            max_dev,
            tol: defaults::SYMMETRY_TOL,
        });
    }

    // Work on an exactly symmetric copy; rotations then preserve symmetry.
    let mut m = Array2::zeros((n, n));
    for p in 0..n {
        for q in 0..n {
            m[(p, q)] = 0.5 * (a[(p, q)] + a[(q, p)]);
        }
    }
    let mut v = Array2::eye(n);

    let fro: f64 = m.iter().map(|x| x * x).sum::<f64>().sqrt();
    let threshold = defaults::JACOBI_TOL_FACTOR * fro;
    if fro == 0.0 {
        return Ok((vec![0.0; n], v));
    }

    let mut converged = false;
    for _sweep in 0..defaults::JACOBI_MAX_SWEEPS {
        let off: f64 = {
            let mut s = 0.0;
            for p in 0..n {
                for q in (p + 1)..n {
                    s += 2.0 * m[(p, q)] * m[(p, q)];
                }
            }
            s.sqrt()
        };
        if off <= threshold {
            converged = true;
            break;
        }
        for p in 0..n.saturating_sub(1) {
            for q in (p + 1)..n {
                let apq = m[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let theta = (m[(q, q)] - m[(p, p)]) / (2.0 * apq);
                // Smaller-angle root of t^2 + 2 theta t - 1 = 0; the direct
                // form overflows for huge theta, where t ~ 1/(2 theta).
                let t = if theta.abs() > 1e150 {
                    0.5 / theta
                } else if theta >= 0.0 {
                    1.0 / (theta + (theta * theta + 1.0).sqrt())
                } else {
                    -1.0 / (-theta + (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                let tau = s / (1.0 + c);

                let app = m[(p, p)];
                let aqq = m[(q, q)];
                m[(p, p)] = app - t * apq;
                m[(q, q)] = aqq + t * apq;
                m[(p, q)] = 0.0;
                m[(q, p)] = 0.0;
                for i in 0..n {
                    if i == p || i == q {
                        continue;
                    }
                    let aip = m[(i, p)];
                    let aiq = m[(i, q)];
                    let new_ip = aip - s * (aiq + tau * aip);
                    let new_iq = aiq + s * (aip - tau * aiq);
                    m[(i, p)] = new_ip;
                    m[(p, i)] = new_ip;
                    m[(i, q)] = new_iq;
                    m[(q, i)] = new_iq;
                }
                for i in 0..n {
                    let vip = v[(i, p)];
                    let viq = v[(i, q)];
                    v[(i, p)] = vip - s * (viq + tau * vip);
                    v[(i, q)] = viq + s * (vip - tau * viq);
                }
            }
        }
    }
    if !converged {
        // One more check: the cap may have been hit right at convergence.
        let off: f64 = {
            let mut s = 0.0;
            for p in 0..n {
                for q in (p + 1)..n {
                    s += 2.0 * m[(p, q)] * m[(p, q)];
                }
            }
            s.sqrt()
        };
        if off > threshold {
            return Err(Error::NoConvergence {
                sweeps: defaults::JACOBI_MAX_SWEEPS,
                dim: n,
                off_norm: off,
                threshold,
            });
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[(i, i)].total_cmp(&m[(j, j)]));
    let eigenvalues: Vec<f64> = order.iter().map(|&i| m[(i, i)]).collect();
    let mut vectors = Array2::zeros((n, n));
    for (jnew, &jold) in order.iter().enumerate() {
        let mut best = 0usize;
        let mut best_mag = -1.0;
        for i in 0..n {
            let mag = v[(i, jold)].abs();
            if mag > best_mag {
                best_mag = mag;
                best = i;
            }
        }
        let sign = if v[(best, jold)] < 0.0 { -1.0 } else { 1.0 };
        for i in 0..n {
            vectors[(i, jnew)] = sign * v[(i, jold)];
        }
    }
    Ok((eigenvalues, vectors))
}

/// Thin SVD a = u * diag(sigma) * v^T with sigma sorted descending.
/// Columns of `u` for zero singular values are zero vectors.
pub struct Svd {
    pub u: Array2<f64>,
    pub sigma: Vec<f64>,
    pub v: Array2<f64>,
}

/// One-sided (Hestenes) Jacobi SVD for matrices with nrows >= ncols.
pub fn svd(a: &Array2<f64>) -> Result<Svd> {
    let (m, n) = (a.nrows(), a.ncols());
    if m < n {
        return Err(Error::InvalidInput(format!(
            "svd expects nrows >= ncols, got {m}x{n}"
        )));
    }
    let mut w = a.clone();
    let mut v = Array2::eye(n);

    let mut converged = false;
    for _sweep in 0..defaults::JACOBI_MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n.saturating_sub(1) {
            for q in (p + 1)..n {
                let mut alpha = 0.0;
                let mut beta = 0.0;
                let mut gamma = 0.0;
                for i in 0..m {
                    alpha += w[(i, p)] * w[(i, p)];
                    beta += w[(i, q)] * w[(i, q)];
                    gamma += w[(i, p)] * w[(i, q)];
                }
                if alpha * beta == 0.0 || gamma.abs() <= 1e-15 * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = if zeta.abs() > 1e150 {
                    0.5 / zeta
                } else if zeta >= 0.0 {
                    1.0 / (zeta + (zeta * zeta + 1.0).sqrt())
                } else {
                    -1.0 / (-zeta + (zeta * zeta + 1.0).sqrt())
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = c * t;
                for i in 0..m {
                    let wip = w[(i, p)];
                    let wiq = w[(i, q)];
                    w[(i, p)] = c * wip - s * wiq;
                    w[(i, q)] = s * wip + c * wiq;
                }
                for i in 0..n {
                    let vip = v[(i, p)];
                    let viq = v[(i, q)];
                    v[(i, p)] = c * vip - s * viq;
                    v[(i, q)] = s * vip + c * viq;
                }
            }
        }
        if !rotated {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::NoConvergence {
            sweeps: defaults::JACOBI_MAX_SWEEPS,
            dim: n,
            off_norm: f64::NAN,
            threshold: 0.0,
        });
    }

    let mut sigma: Vec<f64> = (0..n)
        .map(|j| (0..m).map(|i| w[(i, j)] * w[(i, j)]).sum::<f64>().sqrt())
        .collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| sigma[j].total_cmp(&sigma[i]));

    let mut u = Array2::zeros((m, n));
    let mut v_sorted = Array2::zeros((n, n));
    let mut sigma_sorted = vec![0.0; n];
    for (jnew, &jold) in order.iter().enumerate() {
        sigma_sorted[jnew] = sigma[jold];
        if sigma[jold] > 0.0 {
            for i in 0..m {
                u[(i, jnew)] = w[(i, jold)] / sigma[jold];
            }
        }
        for i in 0..n {
            v_sorted[(i, jnew)] = v[(i, jold)];
        }
    }
    sigma.clear();
    Ok(Svd {
        u,
        sigma: sigma_sorted,
        v: v_sorted,
    })
}

/// Least-squares solution of a*x = rhs through the SVD, with singular values
/// below `cutoff_rel * sigma_max` truncated.
pub struct LsSolution {
    pub x: Vec<f64>,
    /// sigma_max / sigma_min over all singular values; infinite if the
    /// smallest is zero.
    pub condition: f64,
    /// Number of singular values kept.
    pub rank: usize,
}

pub fn solve_least_squares(a: &Array2<f64>, rhs: &[f64], cutoff_rel: f64) -> Result<LsSolution> {
    let (m, n) = (a.nrows(), a.ncols());
    if rhs.len() != m {
        return Err(Error::InvalidInput(format!(
            "rhs length {} does not match {} rows",
            rhs.len(),
            m
        )));
    }
    let dec = svd(a)?;
    let sigma_max = dec.sigma.first().copied().unwrap_or(0.0);
    let sigma_min = dec.sigma.last().copied().unwrap_or(0.0);
    let condition = if sigma_min > 0.0 {
        sigma_max / sigma_min
    } else {
        f64::INFINITY
    };
    let cutoff = cutoff_rel * sigma_max;
    let mut x = vec![0.0; n];
    let mut rank = 0;
    for j in 0..n {
        if dec.sigma[j] <= cutoff || dec.sigma[j] == 0.0 {
            continue;
        }
        rank += 1;
        let mut proj = 0.0;
        for i in 0..m {
            proj += dec.u[(i, j)] * rhs[i];
        }
        let scale = proj / dec.sigma[j];
        for i in 0..n {
            x[i] += scale * dec.v[(i, j)];
        }
    }
    Ok(LsSolution { x, condition, rank })
}

#[cfg(test)]
pub(crate) fn inf_norm(a: &Array2<f64>) -> f64 {
    let mut best: f64 = 0.0;
    for r in 0..a.nrows() {
        let row_sum: f64 = (0..a.ncols()).map(|c| a[(r, c)].abs()).sum();
        best = best.max(row_sum);
    }
    best
}
