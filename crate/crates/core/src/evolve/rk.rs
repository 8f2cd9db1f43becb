//! Adaptive Dormand–Prince 5(4) integration of the vectorized master
//! equation. The state lives in a flat row-major matrix buffer and the
//! generator is applied matrix-free; steps land exactly on output times.

use ndarray::Array2;

use super::{EvolutionGrid, IntegrationOutcome, StepControl};
use crate::liouville::{DensityMatrix, LiouvilleWs, Superoperator};
use crate::{C64, Error, Result};

// Dormand–Prince coefficients (the c nodes are not needed: the system is
// autonomous).
const A: [[f64; 6]; 7] = [
    [0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
// b − b̂ (5th-order weights minus the embedded 4th-order weights).
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

const SAFETY: f64 = 0.9;
const FAC_MIN: f64 = 0.2;
const FAC_MAX: f64 = 5.0;
const ORDER_EXP: f64 = 0.2; // 1/5

pub(super) fn integrate_rk(
    gen: &Superoperator,
    rho0: &DensityMatrix,
    grid: &EvolutionGrid,
    observer: &mut dyn FnMut(usize, f64, &DensityMatrix) -> StepControl,
) -> Result<IntegrationOutcome> {
    let n = gen.dim_hilbert();
    let n2 = n * n;
    let (rtol, atol) = (grid.rtol, grid.atol);

    let mut ws = LiouvilleWs::new(n);
    let mut y: Vec<C64> = rho0.matrix().iter().copied().collect();
    let mut k: Vec<Vec<C64>> = (0..7).map(|_| vec![C64::new(0.0, 0.0); n2]).collect();
    let mut y_stage = vec![C64::new(0.0, 0.0); n2];
    let mut y_new = vec![C64::new(0.0, 0.0); n2];

    let mut t = 0.0f64;
    let t_end = grid.t_max();

    // first output at t = 0 if the grid starts there
    let mut next_out = 0usize;
    let mut emitted = 0usize;
    let mut last_emitted = rho0.clone();
    if grid.times()[0] == 0.0 {
        emitted += 1;
        next_out = 1;
        if observer(0, 0.0, &last_emitted) == StepControl::Stop {
            return Ok(IntegrationOutcome {
                snapshots: emitted,
                stopped_early: true,
                final_state: last_emitted,
            });
        }
    }

    gen.apply_matrix_into(&y, &mut k[0], &mut ws); // FSAL slot
    let mut h = initial_step(gen, &y, &k[0], rtol, atol, t_end, &mut ws, &mut y_stage, &mut y_new);
    let mut just_rejected = false;

    while next_out < grid.times().len() {
        let t_target = grid.times()[next_out];
        if t >= t_target {
            // can only happen for duplicate times, which the grid forbids
            next_out += 1;
            continue;
        }
        let mut h_step = h.min(t_target - t);
        if h_step < 1e-14 * t.abs().max(1.0) {
            return Err(Error::Integration {
                t,
                reason: format!("step size underflow (h = {h_step:.3e})"),
            });
        }

        // stages 2..7 (k[0] is fresh from FSAL or init)
        for s in 1..7 {
            y_stage.copy_from_slice(&y);
            for (j, kj) in k.iter().enumerate().take(s) {
                let a = A[s][j];
                if a != 0.0 {
                    let a = C64::new(a * h_step, 0.0);
                    for (ys, kv) in y_stage.iter_mut().zip(kj) {
                        *ys += a * kv;
                    }
                }
            }
            let (_, tail) = k.split_at_mut(s);
            gen.apply_matrix_into(&y_stage, &mut tail[0], &mut ws);
        }
        // 5th-order solution is stage 7's argument: y_new = y + h Σ a7j kj
        y_new.copy_from_slice(&y);
        for (j, kj) in k.iter().enumerate().take(6) {
            let a = A[6][j];
            if a != 0.0 {
                let a = C64::new(a * h_step, 0.0);
                for (yn, kv) in y_new.iter_mut().zip(kj) {
                    *yn += a * kv;
                }
            }
        }

        // weighted RMS error over components
        let mut err_sq = 0.0f64;
        for i in 0..n2 {
            let mut e = C64::new(0.0, 0.0);
            for (j, kj) in k.iter().enumerate() {
                if E[j] != 0.0 {
                    e += C64::new(E[j], 0.0) * kj[i];
                }
            }
            let e = e.norm() * h_step;
            let sk = atol + rtol * y[i].norm().max(y_new[i].norm());
            err_sq += (e / sk) * (e / sk);
        }
        let err = (err_sq / n2 as f64).sqrt();

        if err <= 1.0 {
            t += h_step;
            std::mem::swap(&mut y, &mut y_new);
            // FSAL: k7 was evaluated at (t + h, y_new) as stage 7
            let k6 = k.pop().unwrap();
            k[0].copy_from_slice(&k6);
            k.push(k6);

            if (t - t_target).abs() < 1e-12 * t_target.max(1.0) {
                let rho = DensityMatrix::from_matrix_unchecked(
                    Array2::from_shape_vec((n, n), y.clone()).expect("shape"),
                );
                last_emitted = rho;
                emitted += 1;
                let idx = next_out;
                next_out += 1;
                if observer(idx, t_target, &last_emitted) == StepControl::Stop {
                    return Ok(IntegrationOutcome {
                        snapshots: emitted,
                        stopped_early: true,
                        final_state: last_emitted,
                    });
                }
            }

            let fac = if err == 0.0 {
                FAC_MAX
            } else {
                (SAFETY * err.powf(-ORDER_EXP)).clamp(FAC_MIN, if just_rejected { 1.0 } else { FAC_MAX })
            };
            h = h_step * fac;
            just_rejected = false;
        } else {
            h = h_step * (SAFETY * err.powf(-ORDER_EXP)).clamp(FAC_MIN, 1.0);
            just_rejected = true;
            // k[0] still holds f(t, y); stages will be recomputed
        }
    }

    Ok(IntegrationOutcome { snapshots: emitted, stopped_early: false, final_state: last_emitted })
}

/// Hairer-style starting step estimate.
#[allow(clippy::too_many_arguments)]
fn initial_step(
    gen: &Superoperator,
    y0: &[C64],
    f0: &[C64],
    rtol: f64,
    atol: f64,
    t_end: f64,
    ws: &mut LiouvilleWs,
    scratch_y: &mut [C64],
    scratch_f: &mut [C64],
) -> f64 {
    let n2 = y0.len() as f64;
    let wnorm = |v: &[C64], refv: &[C64]| -> f64 {
        let s: f64 = v
            .iter()
            .zip(refv)
            .map(|(x, r)| {
                let sk = atol + rtol * r.norm();
                (x.norm() / sk).powi(2)
            })
            .sum();
        (s / n2).sqrt()
    };
    let d0 = wnorm(y0, y0);
    let d1 = wnorm(f0, y0);
    let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };

    for i in 0..y0.len() {
        scratch_y[i] = y0[i] + C64::new(h0, 0.0) * f0[i];
    }
    gen.apply_matrix_into(scratch_y, scratch_f, ws);
    let d2 = {
        let s: f64 = scratch_f
            .iter()
            .zip(f0)
            .zip(y0)
            .map(|((f1, f0v), yv)| {
                let sk = atol + rtol * yv.norm();
                ((f1 - f0v).norm() / sk).powi(2)
            })
            .sum();
        (s / n2).sqrt() / h0
    };
    let h1 = if d1.max(d2) <= 1e-15 {
        (h0 * 1e-3).max(1e-6)
    } else {
        (0.01 / d1.max(d2)).powf(ORDER_EXP)
    };
    (100.0 * h0).min(h1).min(t_end)
}
