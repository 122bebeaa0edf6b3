//! Independent ground truth: fixed-step RK4 integration of
//! i dc/dt = H(t) c with H(t) = diag(eps) - F D cos(wt), sudden switch-on
//! c(0) = e_k. Complex amplitudes are carried as paired real components
//! (c = x + i y; dx/dt = H y, dy/dt = -H x), keeping the whole crate in
//! real arithmetic.

use ndarray::Array2;

use crate::defaults;
use crate::error::{Error, Result};
use crate::model::{FieldConfig, MolecularModel};

/// Propagated amplitudes on the step grid t_i = i * dt.
#[derive(Clone, Debug)]
pub struct PropagationResult {
    times: Vec<f64>,
    re: Array2<f64>,
    im: Array2<f64>,
    norm_drift: f64,
}

impl PropagationResult {
    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn n_states(&self) -> usize {
        self.re.ncols()
    }

    /// (Re c_s, Im c_s) at time index i.
    pub fn amplitude(&self, i: usize, s: usize) -> (f64, f64) {
        (self.re[(i, s)], self.im[(i, s)])
    }

    /// max_t | ||c(t)||^2 - 1 |.
    pub fn norm_drift(&self) -> f64 {
        self.norm_drift
    }

    pub fn population(&self, i: usize, s: usize) -> f64 {
        let (x, y) = self.amplitude(i, s);
        x * x + y * y
    }
}

/// Applies H(t) to (x, y), writing the derivative (H y, -H x).
fn derivative(
    model: &MolecularModel,
    field: &FieldConfig,
    t: f64,
    x: &[f64],
    y: &[f64],
    dx: &mut [f64],
    dy: &mut [f64],
) {
    let s = model.n_states();
    let drive = field.amplitude() * (field.omega() * t).cos();
    for r in 0..s {
        let mut hx = model.energy(r) * x[r];
        let mut hy = model.energy(r) * y[r];
        for c in 0..s {
            let coupling = -drive * model.dipole_element(r, c);
            hx += coupling * x[c];
            hy += coupling * y[c];
        }
        dx[r] = hy;
        dy[r] = -hx;
    }
}

fn propagate_impl(
    model: &MolecularModel,
    field: &FieldConfig,
    k: usize,
    t_end: f64,
    dt: f64,
) -> Result<PropagationResult> {
    let s = model.n_states();
    if k < 1 || k > s {
        return Err(Error::IndexOutOfRange { k, s });
    }
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(Error::InvalidInput(format!(
            "dt must be positive, got {dt}"
        )));
    }
    if !(t_end > 0.0) || !t_end.is_finite() {
        return Err(Error::InvalidInput(format!(
            "t_end must be positive, got {t_end}"
        )));
    }
    let n_steps = ((t_end / dt) - 1e-9).ceil().max(1.0) as usize;

    let mut x = vec![0.0; s];
    let mut y = vec![0.0; s];
    x[k - 1] = 1.0;

    let mut re = Array2::zeros((n_steps + 1, s));
    let mut im = Array2::zeros((n_steps + 1, s));
    re[(0, k - 1)] = 1.0;

    let mut norm_drift: f64 = 0.0;
    let mut kx1 = vec![0.0; s];
    let mut ky1 = vec![0.0; s];
    let mut kx2 = vec![0.0; s];
    let mut ky2 = vec![0.0; s];
    let mut kx3 = vec![0.0; s];
    let mut ky3 = vec![0.0; s];
    let mut kx4 = vec![0.0; s];
    let mut ky4 = vec![0.0; s];
    let mut xs = vec![0.0; s];
    let mut ys = vec![0.0; s];

    for i in 0..n_steps {
        let t = i as f64 * dt;
        derivative(model, field, t, &x, &y, &mut kx1, &mut ky1);
        for j in 0..s {
            xs[j] = x[j] + 0.5 * dt * kx1[j];
            ys[j] = y[j] + 0.5 * dt * ky1[j];
        }
        derivative(model, field, t + 0.5 * dt, &xs, &ys, &mut kx2, &mut ky2);
        for j in 0..s {
            xs[j] = x[j] + 0.5 * dt * kx2[j];
            ys[j] = y[j] + 0.5 * dt * ky2[j];
        }
        derivative(model, field, t + 0.5 * dt, &xs, &ys, &mut kx3, &mut ky3);
        for j in 0..s {
            xs[j] = x[j] + dt * kx3[j];
            ys[j] = y[j] + dt * ky3[j];
        }
        derivative(model, field, t + dt, &xs, &ys, &mut kx4, &mut ky4);

        let sixth = dt / 6.0;
        let mut norm2 = 0.0;
        let mut finite = true;
        for j in 0..s {
            x[j] += sixth * (kx1[j] + 2.0 * kx2[j] + 2.0 * kx3[j] + kx4[j]);
            y[j] += sixth * (ky1[j] + 2.0 * ky2[j] + 2.0 * ky3[j] + ky4[j]);
            norm2 += x[j] * x[j] + y[j] * y[j];
            finite &= x[j].is_finite() && y[j].is_finite();
        }
        if !finite {
            return Err(Error::NonFinite { t_last: t });
        }
        norm_drift = norm_drift.max((norm2 - 1.0).abs());
        for j in 0..s {
            re[(i + 1, j)] = x[j];
            im[(i + 1, j)] = y[j];
        }
    }

    let times = (0..=n_steps).map(|i| i as f64 * dt).collect();
    Ok(PropagationResult {
        times,
        re,
        im,
        norm_drift,
    })
}

/// Propagates from psi_k over [0, t_end]. The step must resolve the drive:
/// dt above (2 pi / w) / `defaults::MIN_STEPS_PER_PERIOD` is an error; use
/// `propagate_with_forced_step` to override deliberately.
pub fn propagate(
    model: &MolecularModel,
    field: &FieldConfig,
    k: usize,
    t_end: f64,
    dt: f64,
) -> Result<PropagationResult> {
    let max_dt = field.period() / defaults::MIN_STEPS_PER_PERIOD as f64;
    if dt > max_dt * (1.0 + 1e-12) {
        return Err(Error::StepTooLarge { dt, max_dt });
    }
    propagate_impl(model, field, k, t_end, dt)
}

/// Same integrator without the step-size guard. Accuracy is the caller's
/// problem; meant for convergence studies and the CLI override path.
pub fn propagate_with_forced_step(
    model: &MolecularModel,
    field: &FieldConfig,
    k: usize,
    t_end: f64,
    dt: f64,
) -> Result<PropagationResult> {
    propagate_impl(model, field, k, t_end, dt)
}

/// P(t) = Re sum_sr c_s^*(t) D_sr c_r(t) on the propagation grid; real by
/// the symmetry of D.
pub fn dipole_of(result: &PropagationResult, model: &MolecularModel) -> Vec<f64> {
    let s = model.n_states();
    (0..result.len())
        .map(|i| {
            let mut acc = 0.0;
            for a in 0..s {
                let (xa, ya) = result.amplitude(i, a);
                for b in 0..s {
                    let (xb, yb) = result.amplitude(i, b);
                    acc += model.dipole_element(a, b) * (xa * xb + ya * yb);
                }
            }
            acc
        })
        .collect()
}

/// Trapezoidal extraction of the cos(n w t) coefficient from a series
/// sampled uniformly over an integer number W of periods:
/// (2 - delta_0n) (w / 2 pi W) * integral of values(t) cos(n w t) dt.
pub fn fourier_of_series(times: &[f64], values: &[f64], omega: f64, n: usize) -> Result<f64> {
    if times.len() != values.len() || times.len() < 2 {
        return Err(Error::InvalidInput(format!(
            "need matching time/value series of length >= 2, got {} and {}",
            times.len(),
            values.len()
        )));
    }
    if !(omega > 0.0) {
        return Err(Error::InvalidInput(format!(
            "omega must be positive, got {omega}"
        )));
    }
    let mean_dt = (times[times.len() - 1] - times[0]) / (times.len() - 1) as f64;
    if !(mean_dt > 0.0) {
        return Err(Error::InvalidInput("times must be increasing".into()));
    }
    let mut max_dev: f64 = 0.0;
    for w in times.windows(2) {
        max_dev = max_dev.max((w[1] - w[0] - mean_dt).abs());
    }
    if max_dev > 1e-9 * mean_dt {
        return Err(Error::NonUniformGrid {
            max_dev,
            mean: mean_dt,
        });
    }
    let period = 2.0 * std::f64::consts::PI / omega;
    let length = times[times.len() - 1] - times[0];
    let periods = (length / period).round();
    let mismatch = (length - periods * period).abs();
    if periods < 1.0 || mismatch > defaults::WINDOW_TOL {
        return Err(Error::BadWindow {
            length,
            period,
            periods: periods.max(0.0) as usize,
            mismatch,
        });
    }

    let nf = n as f64;
    let mut integral = 0.0;
    for i in 0..times.len() - 1 {
        let f0 = values[i] * (nf * omega * times[i]).cos();
        let f1 = values[i + 1] * (nf * omega * times[i + 1]).cos();
        integral += 0.5 * (f0 + f1) * (times[i + 1] - times[i]);
    }
    let factor = if n == 0 { 1.0 } else { 2.0 };
    Ok(factor * omega / (2.0 * std::f64::consts::PI * periods) * integral)
}
