//! C² characteristic junction segments: curves t ↦ (t, γ(t)) on [0, b] with
//! γ̇ = f′(u(t)), where u and u̇ vanish at both endpoints and the curve
//! realizes a prescribed horizontal displacement γ(b) − γ(0) = ±c.
//!
//! The profile u is symmetric about b/2 and comes in two one-parameter
//! families. Small displacements use a quadratic bump
//!     u(t) = τ t²           on [0, b/4],
//!     u(t) = τ b²/8 − τ (t − b/2)²   on (b/4, b/2],       τ ∈ (0, 2/b];
//! large displacements use a capped ramp
//!     u(t) = t²/(2τ)        on [0, τ],
//!     u(t) = t − τ/2        on (τ, b/2 − τ],
//!     u(t) = b/2 − τ − (t − b/2)²/(2τ)  on (b/2 − τ, b/2],  τ ∈ (0, b/4].
//! The families coincide at τ = 2/b ↔ τ = b/4, and the attainable
//! displacements sweep (0, 2f(b/2)) continuously, the upper bound excluded.
//! Decreasing-orientation curves are the same construction against the
//! mirrored flux z ↦ f(−z), with u and the displacement negated.

use crate::error::CoreError;
use crate::flux::FluxModel;
use crate::numerics::{find_root, integrate_adaptive};

/// Which profile family realizes the displacement.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum JunctionCase {
    /// Capped-ramp profile for c near the 2f(b/2) bound.
    Big,
    /// Quadratic bump profile for small c (also the c = 0 degenerate curve).
    Small,
}

/// Sign of u on the curve interior.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Orientation {
    /// u ≥ 0; γ moves by +c (for a flux with f′ ≥ 0 on u ≥ 0).
    Increasing,
    /// u ≤ 0, built against the mirrored flux; γ moves by −c.
    Decreasing,
}

/// A solved junction curve on [0, b], normalized to γ(0) = 0.
#[derive(Debug, Clone)]
pub struct JunctionCurve {
    flux: FluxModel,
    /// flux the increasing profile is integrated against (mirrored copy for
    /// decreasing orientation)
    work: FluxModel,
    b: f64,
    c: f64,
    case: JunctionCase,
    tau: f64,
    orientation: Orientation,
    /// piece boundaries of the profile on [0, b/2]
    breaks: Vec<f64>,
    /// Γ(break) = ∫_0^break f_work′(u_inc) for each boundary
    gamma_breaks: Vec<f64>,
    quad_tol: f64,
}

/// Displacement of a characteristic with prescribed growth: starting from
/// u(a) = u_a with u̇ = v > 0, returns ∫_a^t f′(u_a + ∫_a^s v) ds.
pub fn profile_displacement(
    flux: &FluxModel,
    u_a: f64,
    v: impl Fn(f64) -> f64,
    a: f64,
    t: f64,
) -> Result<f64, CoreError> {
    if t < a {
        return Err(CoreError::Domain(format!("reversed window [{a}, {t}]")));
    }
    // strict positivity of v on the open interval (endpoints may vanish)
    for k in 1..64 {
        let s = a + (t - a) * k as f64 / 64.0;
        if v(s) <= 0.0 {
            return Err(CoreError::Domain(format!("profile v ≤ 0 at s = {s}")));
        }
    }
    let inner_tol = 1e-13;
    let u_at = |s: f64| -> f64 {
        match integrate_adaptive(&v, a, s, inner_tol) {
            Ok(r) => u_a + r.value,
            Err(_) => f64::NAN,
        }
    };
    let r = integrate_adaptive(|s| flux.deriv(u_at(s)), a, t, 1e-10)?;
    Ok(r.value)
}

/// The strict displacement bound 2 f(b/2) for the given flux and width.
pub fn displacement_bound(flux: &FluxModel, b: f64) -> f64 {
    2.0 * flux.eval(0.5 * b)
}

/// Builds a junction realizing |γ(b) − γ(0)| = c; requires 0 ≤ c < 2f(b/2)
/// (for decreasing orientation the bound uses the mirrored flux).
pub fn build_junction(
    flux: &FluxModel,
    b: f64,
    c: f64,
    orientation: Orientation,
) -> Result<JunctionCurve, CoreError> {
    if !(b > 0.0) {
        return Err(CoreError::Domain(format!("interval length b = {b}")));
    }
    if c < 0.0 {
        return Err(CoreError::Domain(format!("negative displacement c = {c}")));
    }
    let work = match orientation {
        Orientation::Increasing => flux.clone(),
        Orientation::Decreasing => flux.mirrored(),
    };
    let bound = displacement_bound(&work, b);
    if c >= bound {
        return Err(CoreError::UnattainableDisplacement { b, c, bound });
    }
    if c == 0.0 {
        return finish(flux, work, b, JunctionCase::Small, 0.0, orientation);
    }

    // displacement at the family boundary (τ_big = b/4 ≡ τ_small = 2/b)
    let c_star = half_displacement(&work, b, JunctionCase::Big, 0.25 * b)? * 2.0;
    let (case, lo, hi) = if c <= c_star {
        (JunctionCase::Small, 0.0, 2.0 / b)
    } else {
        // big-case displacement decreases from 2f(b/2) (τ → 0) to c_star
        (JunctionCase::Big, 1e-14 * b, 0.25 * b)
    };
    let tau = find_root(
        |tau| half_displacement(&work, b, case, tau).map_or(f64::NAN, |d| 2.0 * d - c),
        lo,
        hi,
        1e-15 * (hi - lo),
    )?;
    finish(flux, work, b, case, tau, orientation)
}

/// Builds the junction directly from a prescribed profile parameter τ; the
/// realized displacement is whatever the profile produces (it may underflow
/// binary64 for deep convex-flat corridors — see `displacement_log2_abs`).
pub fn build_junction_from_tau(
    flux: &FluxModel,
    b: f64,
    case: JunctionCase,
    tau: f64,
    orientation: Orientation,
) -> Result<JunctionCurve, CoreError> {
    if !(b > 0.0) {
        return Err(CoreError::Domain(format!("interval length b = {b}")));
    }
    let max_tau = match case {
        JunctionCase::Big => 0.25 * b,
        JunctionCase::Small => 2.0 / b,
    };
    if tau < 0.0 || tau > max_tau {
        return Err(CoreError::Domain(format!(
            "tau = {tau} outside (0, {max_tau}] for this case"
        )));
    }
    let work = match orientation {
        Orientation::Increasing => flux.clone(),
        Orientation::Decreasing => flux.mirrored(),
    };
    finish(flux, work, b, case, tau, orientation)
}

/// Assembles the curve: caches Γ at the profile piece boundaries.
fn finish(
    flux: &FluxModel,
    work: FluxModel,
    b: f64,
    case: JunctionCase,
    tau: f64,
    orientation: Orientation,
) -> Result<JunctionCurve, CoreError> {
    // tolerance relative to the peak slope so that curves whose displacement
    // is far below 1 (deep convex-flat corridors) are still resolved
    let peak_slope = work.deriv(profile_u(b, case, tau, 0.5 * b)).abs();
    let quad_tol = (peak_slope * b * 1e-12).min(1e-13).max(1e-320);
    let breaks = piece_breaks(b, case, tau);
    let mut gamma_breaks = vec![0.0];
    let mut acc = 0.0;
    for w in breaks.windows(2) {
        let r = match integrate_adaptive(
            |t| work.deriv(profile_u(b, case, tau, t)),
            w[0],
            w[1],
            quad_tol,
        ) {
            Ok(r) => r.value,
            Err(CoreError::QuadratureBudget { best, .. }) => best,
            Err(e) => return Err(e),
        };
        acc += r;
        gamma_breaks.push(acc);
    }
    let c = 2.0 * acc;
    Ok(JunctionCurve {
        flux: flux.clone(),
        work,
        b,
        c,
        case,
        tau,
        orientation,
        breaks,
        gamma_breaks,
        quad_tol,
    })
}

/// Piece boundaries of the increasing profile on [0, b/2].
fn piece_breaks(b: f64, case: JunctionCase, tau: f64) -> Vec<f64> {
    match case {
        JunctionCase::Big => {
            if tau == 0.0 {
                vec![0.0, 0.5 * b]
            } else {
                vec![0.0, tau, 0.5 * b - tau, 0.5 * b]
            }
        }
        JunctionCase::Small => vec![0.0, 0.25 * b, 0.5 * b],
    }
}

/// Increasing profile u(t) on [0, b/2].
pub(crate) fn profile_u(b: f64, case: JunctionCase, tau: f64, t: f64) -> f64 {
    if tau == 0.0 {
        return 0.0;
    }
    let h = 0.5 * b;
    match case {
        JunctionCase::Big => {
            if t <= tau {
                t * t / (2.0 * tau)
            } else if t <= h - tau {
                t - 0.5 * tau
            } else {
                h - tau - (t - h) * (t - h) / (2.0 * tau)
            }
        }
        JunctionCase::Small => {
            if t <= 0.5 * h {
                tau * t * t
            } else {
                tau * h * h * 0.5 - tau * (t - h) * (t - h)
            }
        }
    }
}

/// Increasing profile derivative u̇(t) on [0, b/2].
pub(crate) fn profile_udot(b: f64, case: JunctionCase, tau: f64, t: f64) -> f64 {
    if tau == 0.0 {
        return 0.0;
    }
    let h = 0.5 * b;
    match case {
        JunctionCase::Big => {
            if t <= tau {
                t / tau
            } else if t <= h - tau {
                1.0
            } else {
                (h - t) / tau
            }
        }
        JunctionCase::Small => {
            if t <= 0.5 * h {
                2.0 * tau * t
            } else {
                2.0 * tau * (h - t)
            }
        }
    }
}

/// Γ(b/2) = ∫_0^{b/2} f′(u(t)) dt for the given profile (half displacement).
fn half_displacement(
    work: &FluxModel,
    b: f64,
    case: JunctionCase,
    tau: f64,
) -> Result<f64, CoreError> {
    let mut acc = 0.0;
    for w in piece_breaks(b, case, tau).windows(2) {
        let r = integrate_adaptive(
            |t| work.deriv(profile_u(b, case, tau, t)),
            w[0],
            w[1],
            1e-13,
        )?;
        acc += r.value;
    }
    Ok(acc)
}

/// Evaluates (γ(t), u(t), u̇(t)); t must lie in [0, b].
pub fn eval_junction(curve: &JunctionCurve, t: f64) -> Result<(f64, f64, f64), CoreError> {
    if t < 0.0 || t > curve.b {
        return Err(CoreError::Domain(format!(
            "t = {t} outside junction window [0, {}]",
            curve.b
        )));
    }
    let half = 0.5 * curve.b;
    let (s, mirror) = if t <= half {
        (t, false)
    } else {
        (curve.b - t, true)
    };
    let u_inc = profile_u(curve.b, curve.case, curve.tau, s);
    let mut udot_inc = profile_udot(curve.b, curve.case, curve.tau, s);
    if mirror {
        udot_inc = -udot_inc;
    }
    // Γ(s) from cached boundary values
    let gamma_s = curve.gamma_partial(s)?;
    let gamma_inc = if mirror {
        curve.c - gamma_s
    } else {
        gamma_s
    };
    match curve.orientation {
        Orientation::Increasing => Ok((gamma_inc, u_inc, udot_inc)),
        Orientation::Decreasing => Ok((-gamma_inc, -u_inc, -udot_inc)),
    }
}

impl JunctionCurve {
    pub fn flux(&self) -> &FluxModel {
        &self.flux
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    /// Realized |γ(b) − γ(0)| (signed displacement is +c for increasing
    /// orientation, −c for decreasing).
    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn case(&self) -> JunctionCase {
        self.case
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn orientation(&self) -> Orientation {
        self.orientation
    }

    /// Signed displacement γ(b) − γ(0).
    pub fn displacement(&self) -> f64 {
        match self.orientation {
            Orientation::Increasing => self.c,
            Orientation::Decreasing => -self.c,
        }
    }

    /// Γ(s) = ∫_0^s f_work′(u_inc) for s ∈ [0, b/2], via the cached breaks.
    fn gamma_partial(&self, s: f64) -> Result<f64, CoreError> {
        let mut i = 0;
        while i + 1 < self.breaks.len() && self.breaks[i + 1] < s {
            i += 1;
        }
        let base = self.gamma_breaks[i];
        if s <= self.breaks[i] {
            return Ok(base);
        }
        let r = integrate_adaptive(
            |t| self.work.deriv(profile_u(self.b, self.case, self.tau, t)),
            self.breaks[i],
            s,
            self.quad_tol,
        )?;
        Ok(base + r.value)
    }

    /// log2 |γ(b) − γ(0)| computed in log space, for curves whose
    /// displacement underflows binary64 (deep convex-flat corridors).
    /// Returns `None` for the degenerate τ = 0 curve.
    pub fn displacement_log2_abs(&self) -> Option<f64> {
        if self.tau == 0.0 {
            return None;
        }
        // the integrand peaks where |u| does, at t = b/2
        let u_peak = profile_u(self.b, self.case, self.tau, 0.5 * self.b);
        let peak_log2 = self.work.log2_deriv_abs(u_peak)?;
        let mut acc = 0.0;
        for w in piece_breaks(self.b, self.case, self.tau).windows(2) {
            let r = integrate_adaptive(
                |t| {
                    let u = profile_u(self.b, self.case, self.tau, t);
                    match self.work.log2_deriv_abs(u) {
                        Some(l) => (l - peak_log2).exp2(),
                        None => 0.0,
                    }
                },
                w[0],
                w[1],
                1e-13,
            )
            .ok()?;
            acc += r.value;
        }
        // full curve integrates both symmetric halves
        Some(peak_log2 + (2.0 * acc).log2())
    }

    /// CSV samples "t,x,u,udot" on a uniform n-point grid.
    pub fn to_csv(&self, n: usize) -> Result<String, CoreError> {
        let mut out = String::from("t,x,u,udot\n");
        for k in 0..n {
            let t = self.b * k as f64 / (n - 1).max(1) as f64;
            let (x, u, udot) = eval_junction(self, t)?;
            out.push_str(&format!("{t:.17e},{x:.17e},{u:.17e},{udot:.17e}\n"));
        }
        Ok(out)
    }
}
