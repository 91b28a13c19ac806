//! Scalar Dormand–Prince 5(4) integrator with proportional step control and
//! sign-change event localization.

use crate::error::CoreError;

/// Dormand–Prince tableau (stage nodes).
const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];

/// Stage coupling coefficients (row i feeds stage i+1).
const A: [[f64; 6]; 6] = [
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];

/// 5th-order solution weights (equal to the last A row; FSAL pair).
const B5: [f64; 7] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
    0.0,
];

/// Embedded 4th-order weights.
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

/// One DP5(4) step from (t, x) with size h; returns (x5, error estimate, k-stages).
fn dp_step(
    rhs: &mut dyn FnMut(f64, f64) -> f64,
    t: f64,
    x: f64,
    h: f64,
    k0: f64,
) -> (f64, f64, [f64; 7]) {
    let mut k = [0.0_f64; 7];
    k[0] = k0;
    for i in 0..6 {
        let mut xi = x;
        for (j, kj) in k.iter().enumerate().take(i + 1) {
            xi += h * A[i][j] * kj;
        }
        k[i + 1] = rhs(t + C[i + 1] * h, xi);
    }
    let mut x5 = x;
    let mut x4 = x;
    for i in 0..7 {
        x5 += h * B5[i] * k[i];
        x4 += h * B4[i] * k[i];
    }
    (x5, (x5 - x4).abs(), k)
}

/// Integrates ẋ = rhs(t, x) from `start = (t0, x0)` to `t_end`, recording
/// every accepted step as a `(t, x)` sample (first sample is the start).
///
/// If `event` is given, integration stops where the event function changes
/// sign along the trajectory; the crossing is localized by bisection over the
/// step length and the final sample lies on the crossing.
pub fn ode_step_trace(
    mut rhs: impl FnMut(f64, f64) -> f64,
    start: (f64, f64),
    t_end: f64,
    step_tol: f64,
    event: Option<&dyn Fn(f64, f64) -> f64>,
) -> Result<Vec<(f64, f64)>, CoreError> {
    let (t0, x0) = start;
    let mut trace = vec![(t0, x0)];
    if t0 == t_end {
        return Ok(trace);
    }
    let dir = (t_end - t0).signum();
    let span = (t_end - t0).abs();
    let mut t = t0;
    let mut x = x0;
    let mut k0 = rhs(t, x);
    let mut h = dir * (span / 100.0).min(1e-2).max(1e-10);
    let mut ev_prev = event.map(|e| e(t, x));

    const MAX_STEPS: usize = 2_000_000;
    for _ in 0..MAX_STEPS {
        if (t - t_end) * dir >= 0.0 {
            return Ok(trace);
        }
        if (t + h - t_end) * dir > 0.0 {
            h = t_end - t;
        }
        if h.abs() < 1e-14 * (1.0 + t.abs()) {
            return Err(CoreError::Stiffness { t, h });
        }
        let (x_new, err, k) = dp_step(&mut rhs, t, x, h, k0);
        let tol = step_tol * (1.0 + x.abs());
        if err > tol {
            // reject: shrink with the usual order-5 exponent
            let factor = (0.9 * (tol / err).powf(0.2)).max(0.1);
            h *= factor;
            continue;
        }

        let t_new = t + h;
        if let (Some(ev_fn), Some(g_prev)) = (event, ev_prev) {
            let g_new = ev_fn(t_new, x_new);
            if g_prev.signum() != g_new.signum() && g_prev != 0.0 {
                // bisection over the sub-step length; re-steps from (t, x)
                let mut lo = 0.0_f64; // event sign matches g_prev
                let mut hi = h;
                let mut x_hi = x_new;
                for _ in 0..80 {
                    let mid = 0.5 * (lo + hi);
                    if mid == lo || mid == hi {
                        break;
                    }
                    let (xm, _, _) = dp_step(&mut rhs, t, x, mid, k0);
                    if ev_fn(t + mid, xm).signum() == g_prev.signum() {
                        lo = mid;
                    } else {
                        hi = mid;
                        x_hi = xm;
                    }
                }
                trace.push((t + hi, x_hi));
                return Ok(trace);
            }
            ev_prev = Some(g_new);
        }

        t = t_new;
        x = x_new;
        k0 = k[6]; // FSAL: last stage is the derivative at the new point
        trace.push((t, x));
        let factor = if err == 0.0 {
            5.0
        } else {
            (0.9 * (tol / err).powf(0.2)).clamp(0.2, 5.0)
        };
        h *= factor;
    }
    Err(CoreError::Stiffness { t, h })
}
