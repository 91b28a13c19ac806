//! Region-aware characteristic tracing and Lagrangian parameterizations.
//!
//! A characteristic is an integral curve γ̇(t) = f′(u(t, γ(t))) of the field.
//! For the hierarchical scenarios the tracer walks the region decomposition
//! exactly: inside a corridor it follows the constructed family member
//! through the current point, across u ≡ 0 pieces it is horizontal, and
//! region boundaries are event points. The cubic field is integrated
//! numerically and the inverse-Cantor field has the closed form
//! γ(t) = f(w⁻¹(w(u₀) + t − t₀)).
//!
//! Where characteristics are non-unique (f′(u) locally constant along u = 0
//! plateaus) `extremal_trace` disambiguates by taking pointwise envelopes
//! over a bundle of perturbed traces.

use crate::error::CoreError;
use crate::field::{LevelKind, Scenario, SolutionField};
use crate::flux::FluxModel;
use crate::junction::{eval_junction, JunctionCurve};
use crate::numerics::ode_step_trace;
use crate::regions::{CorridorKind, Location, RegionTree};
use num_rational::BigRational;
use num_traits::ToPrimitive;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::collections::HashSet;
use std::fmt::Write as _;

/// Trace direction in time.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Forward,
    Backward,
}

/// Envelope side requested from `extremal_trace`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Extremum {
    Max,
    Min,
}

/// How a path segment was produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    /// followed an exactly constructed corridor family member
    ExactCorridor,
    /// adaptive Runge–Kutta on γ̇ = f′(u)
    NumericOde,
    /// scenario closed form
    ClosedForm,
}

/// A traced characteristic: ordered (t, x, u) samples with per-segment
/// provenance (`provenance[k] = (first sample index, kind)`).
#[derive(Debug, Clone)]
pub struct CharacteristicPath {
    pub samples: Vec<(f64, f64, f64)>,
    pub provenance: Vec<(usize, Provenance)>,
    /// set when the start point admits more than one characteristic and the
    /// plain trace had to pick one (bundle spread above tolerance)
    pub non_unique: bool,
}

impl CharacteristicPath {
    fn new(
        samples: Vec<(f64, f64, f64)>,
        provenance: Provenance,
        non_unique: bool,
    ) -> Result<Self, CoreError> {
        if samples.len() < 2 {
            return Err(CoreError::Inconsistency(
                "characteristic trace produced fewer than two samples".into(),
            ));
        }
        Ok(CharacteristicPath {
            samples,
            provenance: vec![(0, provenance)],
            non_unique,
        })
    }

    /// (first, last) sample times.
    pub fn t_range(&self) -> (f64, f64) {
        (
            self.samples.first().map(|s| s.0).unwrap_or(f64::NAN),
            self.samples.last().map(|s| s.0).unwrap_or(f64::NAN),
        )
    }

    /// Index of the last sample with time ≤ t (clamped to a valid window).
    fn bracket(&self, t: f64) -> usize {
        match self
            .samples
            .binary_search_by(|s| s.0.partial_cmp(&t).unwrap())
        {
            Ok(k) => k.min(self.samples.len() - 2),
            Err(k) => k.saturating_sub(1).min(self.samples.len() - 2),
        }
    }

    fn interp(&self, t: f64, pick: impl Fn(&(f64, f64, f64)) -> f64) -> f64 {
        let k = self.bracket(t);
        let (t0, t1) = (self.samples[k].0, self.samples[k + 1].0);
        if t <= t0 {
            return pick(&self.samples[k]);
        }
        if t >= t1 {
            return pick(&self.samples[k + 1]);
        }
        let w = (t - t0) / (t1 - t0);
        (1.0 - w) * pick(&self.samples[k]) + w * pick(&self.samples[k + 1])
    }

    /// Position at time t (linear interpolation; exact at sample times).
    pub fn x_at(&self, t: f64) -> f64 {
        self.interp(t, |s| s.1)
    }

    /// Solution value along the path at time t.
    pub fn u_at(&self, t: f64) -> f64 {
        self.interp(t, |s| s.2)
    }

    /// CSV export with a `t,x,u` header.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,x,u\n");
        for (t, x, u) in &self.samples {
            let _ = writeln!(out, "{t:.17e},{x:.17e},{u:.17e}");
        }
        out
    }
}

/// Appends a sample, keeping t strictly increasing (duplicates dropped).
fn push_sample(samples: &mut Vec<(f64, f64, f64)>, s: (f64, f64, f64)) {
    if let Some(last) = samples.last() {
        if s.0 <= last.0 {
            return;
        }
    }
    samples.push(s);
}

/// Traces the characteristic through `start = (t0, x0)` over a time span of
/// length `span ≥ 0` in the given direction. The returned samples are in
/// increasing time order regardless of direction. Leaving the global domain
/// ends the trace early (not an error).
pub fn trace(
    field: &SolutionField,
    start: (f64, f64),
    span: f64,
    direction: Direction,
) -> Result<CharacteristicPath, CoreError> {
    if !(span > 0.0) {
        return Err(CoreError::Domain(format!("trace span {span} must be positive")));
    }
    let t_end = match direction {
        Direction::Forward => start.0 + span,
        Direction::Backward => start.0 - span,
    };
    match field.scenario() {
        Scenario::CubicRoot => cubic_trace(field, start, t_end),
        Scenario::CantorInverse => cantor_trace(field, start, t_end),
        Scenario::CantorParam | Scenario::NonDiff => walk_trace(field, start, t_end),
    }
}

/// Cubic field: γ̇ = 3 u² = 3 x^(2/3), adaptive Runge–Kutta, with a
/// two-sided perturbation bundle to detect non-uniqueness at the start.
fn cubic_trace(
    field: &SolutionField,
    start: (f64, f64),
    t_end: f64,
) -> Result<CharacteristicPath, CoreError> {
    let rhs = |_t: f64, x: f64| {
        let u = x.cbrt();
        3.0 * u * u
    };
    let raw = ode_step_trace(rhs, start, t_end, 1e-13, None)?;
    // non-uniqueness probe: spread of a small two-sided start bundle
    let (_, _, x_lo, x_hi) = field.domain();
    let delta = 1e-10 * (x_hi - x_lo);
    let mut spread = 0.0_f64;
    for sgn in [-1.0, 1.0] {
        let p = ode_step_trace(rhs, (start.0, start.1 + sgn * delta), t_end, 1e-13, None)?;
        if let (Some(a), Some(b)) = (p.last(), raw.last()) {
            spread = spread.max((a.1 - b.1).abs());
        }
    }
    // densify: the integrator takes large steps on this polynomial field,
    // so fill each accepted step by cubic Hermite (slopes from the rhs) to
    // keep the linear-interpolation error of path queries negligible
    let target = (t_end - start.0).abs() / 4096.0;
    let mut samples: Vec<(f64, f64, f64)> = Vec::new();
    for w in raw.windows(2) {
        let ((ta, xa), (tb, xb)) = (w[0], w[1]);
        let h = tb - ta;
        let (ka, kb) = (rhs(ta, xa), rhs(tb, xb));
        let parts = ((h.abs() / target).ceil() as usize).max(1);
        for k in 0..parts {
            let s = k as f64 / parts as f64;
            let h00 = (1.0 + 2.0 * s) * (1.0 - s) * (1.0 - s);
            let h10 = s * (1.0 - s) * (1.0 - s);
            let h01 = s * s * (3.0 - 2.0 * s);
            let h11 = s * s * (s - 1.0);
            let x = h00 * xa + h10 * h * ka + h01 * xb + h11 * h * kb;
            samples.push((ta + s * h, x, x.cbrt()));
        }
    }
    if let Some(&(t, x)) = raw.last() {
        samples.push((t, x, x.cbrt()));
    }
    if t_end < start.0 {
        samples.reverse();
    }
    let mut dedup = Vec::with_capacity(samples.len());
    for s in samples.drain(..) {
        push_sample(&mut dedup, s);
    }
    CharacteristicPath::new(dedup, Provenance::NumericOde, spread > 1e4 * delta)
}

/// Inverse-Cantor field: closed form u(t) = W⁻¹(W(u₀) + t − t₀),
/// γ(t) = f(u(t)), where W extends the truncated Cantor–Vitali map by
/// slope-1 ramps outside [0, 1].
fn cantor_trace(
    field: &SolutionField,
    start: (f64, f64),
    t_end: f64,
) -> Result<CharacteristicPath, CoreError> {
    let map = field
        .cantor_map()
        .ok_or_else(|| CoreError::Inconsistency("field carries no Cantor map".into()))?;
    let flux = field.flux();
    let (z_lo, z_hi) = flux.domain();
    let w1 = map.forward(1.0);
    let w_ext = |z: f64| {
        if z < 0.0 {
            z
        } else if z > 1.0 {
            w1 + (z - 1.0)
        } else {
            map.forward(z)
        }
    };
    let w_inv = |y: f64| {
        if y < 0.0 {
            y
        } else if y > w1 {
            1.0 + (y - w1)
        } else {
            map.inverse(y)
        }
    };
    let u0 = flux.invert_eval(start.1)?;
    let y0 = w_ext(u0);
    // the start is non-unique when u₀ sits inside the (truncated) set: the
    // constant path x ≡ x₀ is also a characteristic there (f′ = 0)
    let non_unique = (0.0..=1.0).contains(&u0)
        && match flux {
            FluxModel::CantorInverse(f) => f.set().gap_containing(u0).is_none(),
            _ => false,
        };
    // sample densely enough to resolve staircase crossings: a depth-(d−1)
    // set interval is traversed in 2^(−2d) of path time
    let n = (((t_end - start.0).abs() * 2f64.powi(2 * map.depth() as i32 + 1)).ceil() as usize)
        .clamp(1024, 1 << 17);
    let mut samples = Vec::with_capacity(n + 1);
    for k in 0..=n {
        let t = start.0 + (t_end - start.0) * k as f64 / n as f64;
        let u = w_inv(y0 + (t - start.0));
        if u < z_lo || u > z_hi {
            break; // left the flux domain; the trace ends here
        }
        samples.push((t, flux.eval(u), u));
    }
    if t_end < start.0 {
        samples.reverse();
    }
    let mut dedup = Vec::with_capacity(samples.len());
    for s in samples.drain(..) {
        push_sample(&mut dedup, s);
    }
    CharacteristicPath::new(dedup, Provenance::ClosedForm, non_unique)
}

/// One maximal piece of a hierarchical trace: a time window on which the
/// path follows either a horizontal u ≡ 0 line or one corridor family
/// member, evaluable in closed form anywhere in the window.
struct Piece {
    t_lo: f64,
    t_hi: f64,
    kind: PieceKind,
}

enum PieceKind {
    Flat {
        x: f64,
    },
    Curve {
        curve: JunctionCurve,
        /// multiplies both the displacement profile and u (λ-scaling)
        scale: f64,
        /// absolute time of curve-local 0 (of curve-local `b` when reflected)
        t0: f64,
        /// absolute position of the member entry
        x_base: f64,
        /// −L pieces of the SectionFive hierarchy run point-reflected
        reflected: bool,
    },
}

impl Piece {
    fn eval(&self, t: f64) -> Result<(f64, f64), CoreError> {
        match &self.kind {
            PieceKind::Flat { x } => Ok((*x, 0.0)),
            PieceKind::Curve {
                curve,
                scale,
                t0,
                x_base,
                reflected,
            } => {
                let s = if *reflected { t0 - t } else { t - t0 };
                let (g, u, _) = eval_junction(curve, s.clamp(0.0, curve.b()))?;
                if *reflected {
                    Ok((x_base - scale * g, -scale * u))
                } else {
                    Ok((x_base + scale * g, scale * u))
                }
            }
        }
    }

    fn sample_hint(&self) -> usize {
        match self.kind {
            PieceKind::Flat { .. } => 1,
            PieceKind::Curve { .. } => 24,
        }
    }
}

/// Resolves the piece through (t, x) for a hierarchical field.
fn piece_at(field: &SolutionField, t: f64, x: f64) -> Result<Piece, CoreError> {
    let tree = field
        .tree()
        .ok_or_else(|| CoreError::Inconsistency("walker needs a region tree".into()))?;
    match field.classify(t, x) {
        Location::Outside => {
            let (bt0, bx0, bt1, bx1) = tree.base_rect().to_f64();
            let (t_lo, t_hi) = if (bx0..=bx1).contains(&x) {
                if t < bt0 {
                    (f64::NEG_INFINITY, bt0)
                } else {
                    (bt1, f64::INFINITY)
                }
            } else {
                (f64::NEG_INFINITY, f64::INFINITY)
            };
            Ok(Piece {
                t_lo,
                t_hi,
                kind: PieceKind::Flat { x },
            })
        }
        Location::Cover { level, address } => {
            let (at, _) = tree.anchor(&address);
            let t_lo = at.to_f64().unwrap_or(f64::NAN);
            let width = field.level(level).a;
            Ok(Piece {
                t_lo,
                t_hi: t_lo + width,
                kind: PieceKind::Flat { x },
            })
        }
        Location::Corridor {
            kind, level, local, ..
        } => {
            let tl = local.0.to_f64().unwrap_or(f64::NAN);
            let y = local.1.to_f64().unwrap_or(f64::NAN);
            let (ot, ox) = (t - tl, x - y);
            let lv = field.level(level);
            match (&lv.kind, kind) {
                (LevelKind::Four { .. }, CorridorKind::L) => Ok(Piece {
                    t_lo: ot,
                    t_hi: ot + lv.a,
                    kind: PieceKind::Flat { x },
                }),
                (LevelKind::Four { .. }, CorridorKind::MinusL) => Ok(Piece {
                    t_lo: ot + lv.a + lv.b,
                    t_hi: ot + lv.a_prev,
                    kind: PieceKind::Flat { x },
                }),
                (LevelKind::Four { unit, .. }, CorridorKind::R) => {
                    let s = (tl - lv.a).clamp(0.0, lv.b);
                    let (is_top, param, _, _) = field.r4_family(level, s, y)?;
                    let ce = lv.c * lv.e;
                    let (scale, entry) = if is_top {
                        (1.0 - param, ce + param * lv.c)
                    } else {
                        (param, param * ce)
                    };
                    Ok(Piece {
                        t_lo: ot + lv.a,
                        t_hi: ot + lv.a + lv.b,
                        kind: PieceKind::Curve {
                            curve: unit.clone(),
                            scale,
                            t0: ot + lv.a,
                            x_base: ox + entry,
                            reflected: false,
                        },
                    })
                }
                (LevelKind::Five { bar, .. }, CorridorKind::R) => {
                    let bar = *bar;
                    let s = (tl - lv.a).clamp(0.0, lv.b);
                    let (entry, curve) = field.r5_solve(level, s, y - bar)?;
                    let (t_lo, t_hi) = (ot + lv.a, ot + lv.a + lv.b);
                    Ok(match curve {
                        None => Piece {
                            t_lo,
                            t_hi,
                            kind: PieceKind::Flat { x: ox + bar + entry },
                        },
                        Some(curve) => Piece {
                            t_lo,
                            t_hi,
                            kind: PieceKind::Curve {
                                curve,
                                scale: 1.0,
                                t0: t_lo,
                                x_base: ox + bar + entry,
                                reflected: false,
                            },
                        },
                    })
                }
                (LevelKind::Five { .. }, CorridorKind::L) => {
                    if tl >= lv.a {
                        return Ok(Piece {
                            t_lo: ot + lv.a,
                            t_hi: ot + lv.a_prev,
                            kind: PieceKind::Flat { x },
                        });
                    }
                    let (entry, curve) = field.l5_solve(level, tl, y)?;
                    Ok(match curve {
                        None => Piece {
                            t_lo: ot,
                            t_hi: ot + lv.a,
                            kind: PieceKind::Flat { x: ox + entry },
                        },
                        Some(curve) => Piece {
                            t_lo: ot,
                            t_hi: ot + lv.a,
                            kind: PieceKind::Curve {
                                curve,
                                scale: 1.0,
                                t0: ot,
                                x_base: ox + entry,
                                reflected: false,
                            },
                        },
                    })
                }
                (LevelKind::Five { .. }, CorridorKind::MinusL) => {
                    // point reflection through the strip's top-right corner
                    let (tr, yr) = (lv.a_prev - tl, lv.strip_h - y);
                    if tr >= lv.a {
                        return Ok(Piece {
                            t_lo: ot,
                            t_hi: ot + lv.a_prev - lv.a,
                            kind: PieceKind::Flat { x },
                        });
                    }
                    let (entry, curve) = field.l5_solve(level, tr, yr)?;
                    let (t_lo, t_hi) = (ot + lv.a_prev - lv.a, ot + lv.a_prev);
                    Ok(match curve {
                        None => Piece {
                            t_lo,
                            t_hi,
                            kind: PieceKind::Flat {
                                x: ox + lv.strip_h - entry,
                            },
                        },
                        Some(curve) => Piece {
                            t_lo,
                            t_hi,
                            kind: PieceKind::Curve {
                                curve,
                                scale: 1.0,
                                t0: ot + lv.a_prev,
                                x_base: ox + lv.strip_h - entry,
                                reflected: true,
                            },
                        },
                    })
                }
            }
        }
    }
}

/// Event-driven walker over the exact region decomposition.
fn walk_trace(
    field: &SolutionField,
    start: (f64, f64),
    t_end: f64,
) -> Result<CharacteristicPath, CoreError> {
    const NUDGE: f64 = 1e-12;
    const MAX_PIECES: usize = 4096;
    let forward = t_end >= start.0;
    let dir = if forward { 1.0 } else { -1.0 };
    let (mut t, mut x) = start;
    let mut walked: Vec<(f64, f64, f64)> = Vec::new();
    for step in 0..MAX_PIECES {
        let piece = piece_at(field, t, x)?;
        let mut stop = if forward {
            piece.t_hi.min(t_end)
        } else {
            piece.t_lo.max(t_end)
        };
        if (stop - t) * dir < 0.0 {
            stop = t; // boundary overshoot from the previous nudge
        }
        if step == 0 {
            let (x0, u0) = piece.eval(t)?;
            walked.push((t, x0, u0));
            x = x0;
        }
        let m = piece.sample_hint();
        for k in 1..=m {
            let tk = t + (stop - t) * k as f64 / m as f64;
            let (xk, uk) = piece.eval(tk)?;
            walked.push((tk, xk, uk));
        }
        if (stop - t_end) * dir >= 0.0 {
            break;
        }
        x = piece.eval(stop)?.0;
        t = stop + dir * NUDGE;
        if step + 1 == MAX_PIECES {
            return Err(CoreError::Inconsistency(format!(
                "walker exceeded {MAX_PIECES} pieces at t = {t}"
            )));
        }
    }
    if !forward {
        walked.reverse();
    }
    let mut samples = Vec::with_capacity(walked.len());
    for s in walked.drain(..) {
        push_sample(&mut samples, s);
    }
    CharacteristicPath::new(samples, Provenance::ExactCorridor, false)
}

/// Pointwise max/min envelope over a bundle of perturbed traces: the bundle
/// starts at offsets ±2^(−k)·scale (k ∈ {20, 40, 60, 80, 90}) on the
/// appropriate side, and the envelope is taken against the plain trace.
pub fn extremal_trace(
    field: &SolutionField,
    point: (f64, f64),
    span: f64,
    direction: Direction,
    extremum: Extremum,
) -> Result<CharacteristicPath, CoreError> {
    let base = trace(field, point, span, direction)?;
    let (_, _, x_lo, x_hi) = field.domain();
    let scale = x_hi - x_lo;
    let sign = match extremum {
        Extremum::Max => 1.0,
        Extremum::Min => -1.0,
    };
    let mut bundle = Vec::new();
    for k in [20i32, 40, 60, 80, 90] {
        let off = sign * 2f64.powi(-k) * scale;
        match trace(field, (point.0, point.1 + off), span, direction) {
            Ok(p) => bundle.push(p),
            Err(_) => continue, // offset start left the domain; skip
        }
    }
    let (ta, tb) = base.t_range();
    let n = 1024;
    let mut samples = Vec::with_capacity(n + 1);
    let mut spread = 0.0_f64;
    for k in 0..=n {
        let t = ta + (tb - ta) * k as f64 / n as f64;
        let xb = base.x_at(t);
        // the bundle limit from the chosen side: tightest perturbed position
        let mut lim: Option<(f64, f64)> = None;
        for p in &bundle {
            let (xp, up) = (p.x_at(t), p.u_at(t));
            let better = match (extremum, lim) {
                (_, None) => true,
                (Extremum::Max, Some((xl, _))) => xp < xl,
                (Extremum::Min, Some((xl, _))) => xp > xl,
            };
            if better {
                lim = Some((xp, up));
            }
        }
        let (x, u) = match lim {
            Some((xl, ul))
                if (extremum == Extremum::Max && xl > xb)
                    || (extremum == Extremum::Min && xl < xb) =>
            {
                (xl, ul)
            }
            _ => (xb, base.u_at(t)),
        };
        spread = spread.max((x - xb).abs());
        push_sample(&mut samples, (t, x, u));
    }
    let provenance = base.provenance[0].1;
    CharacteristicPath::new(samples, provenance, spread > 1e-7 * scale.max(1.0))
}

/// Number of distinct depth-`depth` cover rectangles a path meets and the
/// total time it spends inside them (midpoint classification per sample
/// interval; the walker places samples on region boundaries).
pub fn count_cover_intersections(
    path: &CharacteristicPath,
    tree: &RegionTree,
    depth: u32,
) -> (usize, f64) {
    let mut touched = HashSet::new();
    let mut residence = 0.0_f64;
    for w in path.samples.windows(2) {
        let tm = 0.5 * (w[0].0 + w[1].0);
        let xm = 0.5 * (w[0].1 + w[1].1);
        let (Some(tq), Some(xq)) = (BigRational::from_float(tm), BigRational::from_float(xm))
        else {
            continue;
        };
        if let Location::Cover { address, .. } = tree.locate(&tq, &xq, depth) {
            touched.insert(address);
            residence += w[1].0 - w[0].0;
        }
    }
    (touched.len(), residence)
}

/// A monotone family of characteristics over a common window, with the
/// ordering map θ(γ) = Σ_k 2^(−k) tanh(γ(t_k)) and the interpolated
/// parameterization χ(t, y).
#[derive(Debug, Clone)]
pub struct LagrangianParam {
    /// members in increasing order (pairwise non-crossing after clipping)
    pub family: Vec<CharacteristicPath>,
    /// strictly increasing θ values, one per member
    pub thetas: Vec<f64>,
    /// the fixed time grid θ is computed on
    pub t_grid: Vec<f64>,
    /// (θ_min, θ_max): the parameter range χ interpolates over
    pub y_domain: (f64, f64),
    /// recorded RNG seed that shuffled the clipping order
    pub rng_seed: u64,
    /// seeds whose trace failed and were skipped
    pub skipped: usize,
}

impl LagrangianParam {
    /// χ(t, y): position of the family member at parameter y, linearly
    /// interpolated in θ between adjacent members; y is clamped to y_domain.
    pub fn chi(&self, t: f64, y: f64) -> f64 {
        let y = y.clamp(self.y_domain.0, self.y_domain.1);
        let k = match self
            .thetas
            .binary_search_by(|v| v.partial_cmp(&y).unwrap())
        {
            Ok(k) => return self.family[k].x_at(t),
            Err(k) => k,
        };
        if k == 0 {
            return self.family[0].x_at(t);
        }
        if k >= self.family.len() {
            return self.family[self.family.len() - 1].x_at(t);
        }
        let (th0, th1) = (self.thetas[k - 1], self.thetas[k]);
        let w = ((y - th0) / (th1 - th0)).clamp(0.0, 1.0);
        (1.0 - w) * self.family[k - 1].x_at(t) + w * self.family[k].x_at(t)
    }

    /// CSV export: one row per (member, grid time) with the θ value.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("theta,t,x,u\n");
        for (m, th) in self.family.iter().zip(&self.thetas) {
            for (t, x, u) in &m.samples {
                let _ = writeln!(out, "{th:.17e},{t:.17e},{x:.17e},{u:.17e}");
            }
        }
        out
    }
}

/// θ over a fixed grid of positions.
fn theta_of(xs: &[f64]) -> f64 {
    xs.iter()
        .enumerate()
        .map(|(k, &x)| x.tanh() / 2f64.powi(k as i32))
        .sum()
}

/// Builds a Lagrangian parameterization from seed positions at the window
/// start: every seed is traced forward, then monotonically clipped against
/// the already-accepted members, γ̃ = max{γ_below; min{γ_above; γ}}. The
/// clipping order is the seed order shuffled by the recorded RNG seed.
/// Seeds whose trace fails are skipped (counted in `skipped`).
pub fn build_lagrangian_param(
    field: &SolutionField,
    seeds: &[f64],
    window: (f64, f64),
    rng_seed: u64,
) -> Result<LagrangianParam, CoreError> {
    let (t0, t1) = window;
    if !(t1 > t0) {
        return Err(CoreError::Domain(format!(
            "empty Lagrangian window [{t0}, {t1}]"
        )));
    }
    let n_grid = 48usize;
    let t_grid: Vec<f64> = (0..n_grid)
        .map(|k| t0 + (t1 - t0) * k as f64 / (n_grid - 1) as f64)
        .collect();
    let mut order: Vec<usize> = (0..seeds.len()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    order.shuffle(&mut rng);

    // accepted members: (seed position, per-grid (x, u), provenance)
    struct Member {
        seed: f64,
        xs: Vec<f64>,
        us: Vec<f64>,
        provenance: Provenance,
    }
    let mut accepted: Vec<Member> = Vec::new();
    let mut skipped = 0usize;
    for &idx in &order {
        let seed = seeds[idx];
        let path = match trace(field, (t0, seed), t1 - t0, Direction::Forward) {
            Ok(p) => p,
            Err(_) => {
                skipped += 1;
                continue;
            }
        };
        let mut xs: Vec<f64> = t_grid.iter().map(|&t| path.x_at(t)).collect();
        let mut us: Vec<f64> = t_grid.iter().map(|&t| path.u_at(t)).collect();
        // monotone clipping against the accepted members on each side
        for j in 0..n_grid {
            let mut ub: Option<(f64, f64)> = None;
            let mut lb: Option<(f64, f64)> = None;
            for m in &accepted {
                if m.seed > seed && ub.map_or(true, |(x, _)| m.xs[j] < x) {
                    ub = Some((m.xs[j], m.us[j]));
                }
                if m.seed < seed && lb.map_or(true, |(x, _)| m.xs[j] > x) {
                    lb = Some((m.xs[j], m.us[j]));
                }
            }
            if let Some((x, u)) = ub {
                if xs[j] > x {
                    xs[j] = x;
                    us[j] = u;
                }
            }
            if let Some((x, u)) = lb {
                if xs[j] < x {
                    xs[j] = x;
                    us[j] = u;
                }
            }
        }
        accepted.push(Member {
            seed,
            xs,
            us,
            provenance: path.provenance[0].1,
        });
    }
    accepted.sort_by(|a, b| a.seed.partial_cmp(&b.seed).unwrap());
    let mut family = Vec::new();
    let mut thetas: Vec<f64> = Vec::new();
    for m in accepted {
        let th = theta_of(&m.xs);
        if let Some(&prev) = thetas.last() {
            if th <= prev {
                continue; // coincident after clipping; keep one representative
            }
        }
        let samples: Vec<(f64, f64, f64)> = t_grid
            .iter()
            .zip(m.xs.iter().zip(&m.us))
            .map(|(&t, (&x, &u))| (t, x, u))
            .collect();
        family.push(CharacteristicPath {
            samples,
            provenance: vec![(0, m.provenance)],
            non_unique: false,
        });
        thetas.push(th);
    }
    if family.len() < 2 {
        return Err(CoreError::Inconsistency(
            "Lagrangian family needs at least two distinct members".into(),
        ));
    }
    let y_domain = (thetas[0], *thetas.last().unwrap());
    Ok(LagrangianParam {
        family,
        thetas,
        t_grid,
        y_domain,
        rng_seed,
        skipped,
    })
}

/// Difference quotients (u(γ(t)) − u(γ(t*)))/(t − t*) along a path.
pub fn diff_quotient_probe(path: &CharacteristicPath, t_star: f64, probes: &[f64]) -> Vec<f64> {
    let u0 = path.u_at(t_star);
    probes
        .iter()
        .map(|&t| (path.u_at(t) - u0) / (t - t_star))
        .collect()
}

/// Per-scale maximal Lipschitz quotient |u(γ(t+h)) − u(γ(t))|/h along a
/// path, maximized over the path's own sample times.
pub fn lipschitz_probe(path: &CharacteristicPath, scales: &[f64]) -> Vec<f64> {
    let (ta, tb) = path.t_range();
    scales
        .iter()
        .map(|&h| {
            let mut best = 0.0_f64;
            for &(t, _, u) in &path.samples {
                if t + h > tb || t < ta {
                    continue;
                }
                best = best.max((path.u_at(t + h) - u).abs() / h);
            }
            best
        })
        .collect()
}

/// The adversarial characteristic of the non-differentiability construction:
/// the backward path through P = (a₀, Σ_i c_i/(4d_i)) along the
/// right-children chain, assembled exactly from the per-level dip and
/// R-corridor members. Samples include the exact probe times
/// t_i⁰ = a₀ − a_i (u = 0) and t_i⁻ = a₀ − b_i − 3a_i/2 (u = −3a_i/8).
pub fn adversarial_path(field: &SolutionField) -> Result<CharacteristicPath, CoreError> {
    if field.scenario() != Scenario::NonDiff {
        return Err(CoreError::Domain(
            "the adversarial path is specific to the non-differentiability field".into(),
        ));
    }
    let n = field.depth();
    // heights h_i at which the path crosses the level-i rectangle's left
    // edge (rectangle frame): h_n = 0, h_{i−1} = bar_i (1 + λ_i) + |Δγ_i|,
    // λ_i = h_i / c_i
    let mut lam = vec![0.0_f64; (n + 1) as usize];
    let mut h = 0.0_f64;
    for i in (1..=n).rev() {
        let lv = field.level(i);
        let (bar, dip_log2_dmax) = match &lv.kind {
            LevelKind::Five {
                bar, dip_log2_dmax, ..
            } => (*bar, *dip_log2_dmax),
            _ => unreachable!(),
        };
        lam[i as usize] = h / lv.c;
        h = bar * (1.0 + lam[i as usize]) + dip_log2_dmax.exp2();
    }
    let mut samples: Vec<(f64, f64, f64)> = Vec::new();
    let (mut ot, mut ox) = (0.0_f64, 0.0_f64);
    let m = 32usize;
    for i in 1..=n {
        let lv = field.level(i);
        let (bar, dip_full) = match &lv.kind {
            LevelKind::Five { bar, dip_full, .. } => (*bar, dip_full),
            _ => unreachable!(),
        };
        // dip segment on [a₀ − a_{i−1}, a₀ − a_{i−1} + a_i]
        let x_base = ox + lv.e + lam[i as usize] * bar;
        for k in 0..=m {
            let s = lv.a * k as f64 / m as f64;
            let (g, u, _) = eval_junction(dip_full, s)?;
            push_sample(&mut samples, (ot + s, x_base + g, u));
        }
        ot += lv.a;
        // R segment on [a₀ − a_i − b_i, a₀ − a_i]
        let (entry, curve) = field.r5_member(i, lam[i as usize])?;
        let x_base = ox + bar + entry;
        match curve {
            None => {
                push_sample(&mut samples, (ot, x_base, 0.0));
                push_sample(&mut samples, (ot + lv.b, x_base, 0.0));
            }
            Some(curve) => {
                for k in 0..=m {
                    let s = lv.b * k as f64 / m as f64;
                    let (g, u, _) = eval_junction(&curve, s)?;
                    push_sample(&mut samples, (ot + s, x_base + g, u));
                }
            }
        }
        ot += lv.b;
        ox += bar;
    }
    // the deepest rectangle: u ≡ 0 up to t = a₀ = 1
    push_sample(&mut samples, (ot, ox, 0.0));
    push_sample(&mut samples, (1.0, ox, 0.0));
    CharacteristicPath::new(samples, Provenance::ExactCorridor, false)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Scenario;

    #[test]
    fn cubic_branch_matches_closed_form() {
        let f = SolutionField::build(Scenario::CubicRoot, 0).unwrap();
        let p = trace(&f, (0.0, 1.0), 1.0, Direction::Forward).unwrap();
        assert!(!p.non_unique);
        for k in 0..=10 {
            let t = k as f64 / 10.0;
            let want = (t + 1.0).powi(3);
            assert!(
                (p.x_at(t) - want).abs() < 1e-6,
                "x({t}) = {}, want {want}",
                p.x_at(t)
            );
            assert!((p.u_at(t) - (t + 1.0)).abs() < 1e-6);
        }
        // slope consistency at interior samples
        for w in p.samples.windows(2) {
            let slope = (w[1].1 - w[0].1) / (w[1].0 - w[0].0);
            let u = 0.5 * (w[0].2 + w[1].2);
            assert!((slope - 3.0 * u * u).abs() < 1e-3 * (1.0 + 3.0 * u * u));
        }
    }

    #[test]
    fn cubic_zero_start_flags_nonuniqueness() {
        let f = SolutionField::build(Scenario::CubicRoot, 0).unwrap();
        let p = trace(&f, (0.0, 0.0), 1.0, Direction::Forward).unwrap();
        assert!(p.non_unique, "x = 0 start admits several characteristics");
        assert!(p.x_at(1.0).abs() < 1e-6, "plain trace stays on γ ≡ 0");
        let mx = extremal_trace(&f, (0.0, 0.0), 1.0, Direction::Forward, Extremum::Max).unwrap();
        assert!((mx.x_at(1.0) - 1.0).abs() < 5e-3, "max envelope → t³");
        assert!((mx.x_at(0.5) - 0.125).abs() < 5e-3);
        let mn = extremal_trace(&f, (0.0, 0.0), 1.0, Direction::Forward, Extremum::Min).unwrap();
        assert!(mn.x_at(1.0) <= 1e-6, "min envelope stays at 0 (x ≥ 0 side)");
        // away from the degenerate point extremal = trace
        let p1 = trace(&f, (0.0, 1.0), 1.0, Direction::Forward).unwrap();
        let m1 =
            extremal_trace(&f, (0.0, 1.0), 1.0, Direction::Forward, Extremum::Max).unwrap();
        assert!((p1.x_at(0.7) - m1.x_at(0.7)).abs() < 1e-5);
    }

    #[test]
    fn cantor_inverse_closed_form_trace() {
        let f = SolutionField::build(Scenario::CantorInverse, 4).unwrap();
        let map = f.cantor_map().unwrap();
        // start inside the depth-1 gap, where u₀ = f⁻¹(x₀) is unambiguous
        let z0 = 0.5;
        let x0 = f.flux().eval(z0);
        let p = trace(&f, (0.0, x0), 0.4, Direction::Forward).unwrap();
        assert!(!p.non_unique);
        // u along the path is w⁻¹(w(z₀) + t): check on gap points (w slope 1)
        for &z in &[0.5, 0.55, 0.6, 0.7] {
            let t = map.forward(z) - map.forward(z0);
            assert!(
                (p.u_at(t) - z).abs() < 1e-6,
                "u at w({z}) = {}, want {z}",
                p.u_at(t)
            );
        }
        // the Lipschitz quotient along the path blows up like 2^n
        let n = 3;
        let h = 2f64.powi(-(2 * n + 1));
        let q = lipschitz_probe(&p, &[h]);
        let expect = 2f64.powi(n) + 1.0;
        assert!(
            q[0] > 0.8 * expect,
            "depth-{n} window quotient {} ≪ {expect}",
            q[0]
        );
    }

    #[test]
    fn walker_single_cover_intersection() {
        let f = SolutionField::build(Scenario::CantorParam, 3).unwrap();
        let tree = f.tree().unwrap().clone();
        let a3 = f.level(3).a;
        for &x0 in &[0.01, 0.07, 0.2, 0.33, 0.41, 0.49] {
            let p = trace(&f, (0.0, x0), 1.0, Direction::Forward).unwrap();
            let (count, residence) = count_cover_intersections(&p, &tree, 3);
            assert!(count <= 1, "x0 = {x0}: {count} cover rectangles");
            assert!(
                residence <= a3 + 1e-9,
                "x0 = {x0}: residence {residence} > a₃ = {a3}"
            );
            // slope consistency: corridors are 1-Lipschitz in u with tiny f′
            for w in p.samples.windows(2) {
                if w[1].0 - w[0].0 < 1e-9 {
                    continue;
                }
                let slope = (w[1].1 - w[0].1) / (w[1].0 - w[0].0);
                let fp = f.flux().deriv(0.5 * (w[0].2 + w[1].2));
                assert!(
                    (slope - fp).abs() < 1e-2 * (1.0 + fp.abs()),
                    "slope {slope} vs f′ {fp} at t = {}",
                    w[0].0
                );
            }
        }
        // a path launched outside Q₀ that stays outside
        let p = trace(&f, (0.0, 0.9), 1.0, Direction::Forward).unwrap();
        assert_eq!(count_cover_intersections(&p, &tree, 3), (0, 0.0));
    }

    #[test]
    fn walker_backward_matches_forward() {
        let f = SolutionField::build(Scenario::CantorParam, 2).unwrap();
        let fwd = trace(&f, (0.0, 0.3), 1.0, Direction::Forward).unwrap();
        let (t1, x1) = (1.0, fwd.x_at(1.0));
        let bwd = trace(&f, (t1, x1), 1.0, Direction::Backward).unwrap();
        for k in 0..=8 {
            let t = k as f64 / 8.0;
            assert!(
                (fwd.x_at(t) - bwd.x_at(t)).abs() < 1e-8,
                "reversibility at t = {t}"
            );
        }
    }

    #[test]
    fn adversarial_quotients() {
        let f = SolutionField::build(Scenario::NonDiff, 3).unwrap();
        let p = adversarial_path(&f).unwrap();
        let a0 = 1.0;
        for i in 1..=3u32 {
            let lv = f.level(i);
            let t0 = a0 - lv.a;
            let tm = a0 - lv.b - 1.5 * lv.a;
            let q = diff_quotient_probe(&p, a0, &[t0, tm]);
            assert!(q[0].abs() < 1e-12, "level {i}: u(t_i⁰) quotient {}", q[0]);
            let want = (3.0 * lv.a / 8.0) / (lv.b + 1.5 * lv.a);
            assert!(
                (q[1].abs() - want).abs() < 1e-9,
                "level {i}: quotient {} want ±{want}",
                q[1]
            );
        }
    }

    #[test]
    fn lagrangian_family_ordered() {
        let f = SolutionField::build(Scenario::CubicRoot, 0).unwrap();
        let seeds: Vec<f64> = (0..9).map(|k| -2.0 + 0.5 * k as f64).collect();
        let lp = build_lagrangian_param(&f, &seeds, (0.0, 1.0), 7).unwrap();
        assert_eq!(lp.skipped, 0);
        // θ strictly increasing and inside (−2, 2)
        for w in lp.thetas.windows(2) {
            assert!(w[0] < w[1]);
        }
        assert!(lp.y_domain.0 > -2.0 && lp.y_domain.1 < 2.0);
        // the member seeded at 0 is γ ≡ 0, so its θ is 0
        let zero = lp
            .thetas
            .iter()
            .position(|&t| t.abs() < 1e-12)
            .expect("θ(γ ≡ 0) = 0 member present");
        assert!(lp.family[zero].samples.iter().all(|s| s.1.abs() < 1e-9));
        // no crossings through χ
        for kt in 0..=6 {
            let t = kt as f64 / 6.0;
            let mut prev = f64::NEG_INFINITY;
            for ky in 0..=20 {
                let y = lp.y_domain.0 + (lp.y_domain.1 - lp.y_domain.0) * ky as f64 / 20.0;
                let x = lp.chi(t, y);
                assert!(x >= prev - 1e-9, "χ not monotone at t = {t}");
                prev = x;
            }
        }
    }

    #[test]
    fn lipschitz_probe_constant_slope() {
        let f = SolutionField::build(Scenario::CubicRoot, 0).unwrap();
        let p = trace(&f, (0.0, 1.0), 1.0, Direction::Forward).unwrap();
        // u ∘ γ = t + 1: quotient 1 at every scale
        for q in lipschitz_probe(&p, &[0.5, 0.1, 0.01]) {
            assert!((q - 1.0).abs() < 1e-6, "quotient {q}");
        }
        // constant path in a u ≡ 0 region
        let g = SolutionField::build(Scenario::CantorParam, 2).unwrap();
        let flat = trace(&g, (0.0, 0.7), 1.0, Direction::Forward).unwrap();
        for q in lipschitz_probe(&flat, &[0.25, 0.05]) {
            assert!(q.abs() < 1e-12);
        }
    }
}
