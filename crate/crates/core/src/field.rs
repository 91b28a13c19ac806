//! Scenario-specific evaluable solution fields.
//!
//! Four scenarios:
//! * `CantorParam` — quadratic flux over the SectionFour rectangle
//!   hierarchy: u ≡ 0 on the L/−L corridors and the depth-d cover, and the
//!   R corridors carry a λ-indexed family of small-case junction curves.
//! * `NonDiff` — convex-flat flux over the SectionFive hierarchy: the R
//!   corridors carry three bands of increasing junction curves and the L
//!   corridors three bands of decreasing "dip" curves whose displacement
//!   underflows binary64 (handled in log2 space).
//! * `CantorInverse` — u(t,x) = f^(−1)(x) for the Cantor-inverse flux.
//! * `CubicRoot` — u(t,x) = ∛x for f(u) = u³.

use crate::error::CoreError;
use crate::flux::{
    make_cantor_inverse_flux, make_cantor_vitali, make_convex_flat, make_cubic, make_fat_cantor,
    make_quadratic, CantorVitaliMap, FatCantorSet, FluxModel, GapSchedule, MonotoneTable,
};
use crate::junction::{
    build_junction, build_junction_from_tau, eval_junction, profile_u, JunctionCase,
    JunctionCurve, Orientation,
};
use crate::numerics::integrate_adaptive;
use crate::regions::{level_params, CorridorKind, Location, RegionTree, Variant};
use num_rational::BigRational;
use num_traits::ToPrimitive;

/// Which construction the field realizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scenario {
    CantorParam,
    NonDiff,
    CantorInverse,
    CubicRoot,
}

/// Source notion requested from `eval_g`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Notion {
    Eulerian,
    Broad,
}

/// A source value, or Undefined where none is assigned.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SourceValue {
    Value(f64),
    Undefined,
}

/// One adversarial modulus pair for the Hölder-failure probe.
#[derive(Debug, Clone, Copy)]
pub struct AdversarialPair {
    pub level: u32,
    /// |Δu| = 3a_i/8 (dip minimum against the u = 0 line above it)
    pub du: f64,
    /// vertical distance from the dip bottom to that u = 0 line
    pub dx: f64,
    pub log2_du: f64,
    pub log2_dx: f64,
}

/// Modulus-of-continuity samples.
#[derive(Debug, Clone)]
pub struct ContinuityReport {
    /// (|Δx|, |Δu|) over adjacent grid points
    pub pairs: Vec<(f64, f64)>,
    /// scenario-specific adversarial pairs (NonDiff only)
    pub adversarial: Vec<AdversarialPair>,
}

impl ContinuityReport {
    /// max over adversarial pairs of log2(|Δu| / |Δx|^alpha).
    pub fn adversarial_log2_ratio(&self, alpha: f64) -> Option<f64> {
        self.adversarial
            .iter()
            .map(|p| p.log2_du - alpha * p.log2_dx)
            .fold(None, |m, r| Some(m.map_or(r, |m: f64| m.max(r))))
    }
}

/// Monotone lookup from the junction profile parameter to a log2-scaled
/// displacement quantity, used to invert corridor band parameters without a
/// root-find per query.
#[derive(Debug, Clone)]
pub(crate) struct TauTable {
    b: f64,
    kind: TauKind,
    table: MonotoneTable,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum TauKind {
    /// ys = log2 D(τ), small case, xs = log2(τ b / 2) ∈ [−44, 0]
    SmallD,
    /// ys = log2 (2f(b/2) − D(τ)), big case, xs = log2(4τ/b) ∈ [−44, 0]
    BigDeficit,
    /// ys = log2 D over the combined sweep xs ∈ [−44, 1]:
    /// xs ≤ 0 small case as above; xs ∈ (0, 1] big case τ = (b/4)(1 − xs/2)
    DipSweep,
}

impl TauTable {
    fn param_to_tau(&self, p: f64) -> (JunctionCase, f64) {
        match self.kind {
            TauKind::SmallD => (JunctionCase::Small, p.exp2() * 2.0 / self.b),
            TauKind::BigDeficit => (JunctionCase::Big, p.exp2() * 0.25 * self.b),
            TauKind::DipSweep => {
                if p <= 0.0 {
                    (JunctionCase::Small, p.exp2() * 2.0 / self.b)
                } else {
                    (JunctionCase::Big, 0.25 * self.b * (1.0 - 0.5 * p))
                }
            }
        }
    }

    /// Inverts the table at a log2 target. Below-range targets return None
    /// (degenerate τ → 0 curve); above-range targets clamp to the last node.
    fn invert_log2(&self, target: f64) -> Option<(JunctionCase, f64)> {
        let (lo, _) = self.table.y_range();
        if !target.is_finite() || target < lo {
            return None;
        }
        Some(self.param_to_tau(self.table.invert(target)))
    }
}

fn build_tau_table(
    flux: &FluxModel,
    b: f64,
    kind: TauKind,
    orientation: Orientation,
) -> Result<TauTable, CoreError> {
    let work = match orientation {
        Orientation::Increasing => flux.clone(),
        Orientation::Decreasing => flux.mirrored(),
    };
    let (p_lo, p_hi, n) = match kind {
        TauKind::SmallD | TauKind::BigDeficit => (-44.0, 0.0, 56),
        TauKind::DipSweep => (-44.0, 1.0, 60),
    };
    let mut xs = Vec::with_capacity(n);
    let mut ys = Vec::with_capacity(n);
    let shell = TauTable {
        b,
        kind,
        // placeholder, replaced below
        table: MonotoneTable::new(vec![0.0, 1.0], vec![0.0, 1.0]),
    };
    for k in 0..n {
        let p = p_lo + (p_hi - p_lo) * k as f64 / (n - 1) as f64;
        let (case, tau) = shell.param_to_tau(p);
        let y = match kind {
            TauKind::BigDeficit => big_case_deficit(&work, b, tau)?.log2(),
            _ => {
                let curve = build_junction_from_tau(flux, b, case, tau, orientation)?;
                curve
                    .displacement_log2_abs()
                    .ok_or_else(|| CoreError::Inconsistency("degenerate sweep curve".into()))?
            }
        };
        xs.push(p);
        ys.push(y);
    }
    // enforce strict monotonicity against quadrature noise at the flat end
    for k in 1..n {
        if ys[k] <= ys[k - 1] {
            ys[k] = ys[k - 1] + 1e-12;
        }
    }
    Ok(TauTable {
        b,
        kind,
        table: MonotoneTable::new(xs, ys),
    })
}

/// Deficit 2f(b/2) − D(τ) of the big-case profile, computed as the integral
/// of the positive difference f′(tent) − f′(u_τ) (no cancellation).
fn big_case_deficit(work: &FluxModel, b: f64, tau: f64) -> Result<f64, CoreError> {
    let h = 0.5 * b;
    let diff = |t: f64| {
        let tent = t.min(b - t).min(h);
        work.deriv(tent) - work.deriv(profile_u(b, JunctionCase::Big, tau, t.min(h)))
    };
    let mut acc = 0.0;
    for w in [(0.0, tau), (tau, h - tau), (h - tau, h)] {
        if w.1 > w.0 {
            let scale = work.deriv(h).max(f64::MIN_POSITIVE);
            let r = match integrate_adaptive(&diff, w.0, w.1, scale * b * 1e-13) {
                Ok(r) => r.value,
                Err(CoreError::QuadratureBudget { best, .. }) => best,
                Err(e) => return Err(e),
            };
            acc += r.max(0.0);
        }
    }
    Ok(2.0 * acc)
}

/// Per-level corridor curve data in f64.
#[derive(Debug, Clone)]
pub(crate) struct LevelCurves {
    pub i: u32,
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    /// SectionFour: e_i = 2^(−i); SectionFive: corridor offset
    /// e_i = c/(4d) + |Δγ_i| (≈ c/(4d) in f64)
    pub e: f64,
    pub a_prev: f64,
    pub strip_h: f64,
    pub kind: LevelKind,
}

#[derive(Debug, Clone)]
pub(crate) enum LevelKind {
    /// SectionFour: one small-case unit curve of displacement c(1−e); the
    /// quadratic flux makes the whole family an exact λ-scaling of it.
    Four { unit: JunctionCurve, c_unit: f64 },
    /// SectionFive band machinery.
    Five {
        r_small: TauTable,
        r_deficit: TauTable,
        /// top R-band displacement c(1 − 1/(4d))
        r_dmax: f64,
        /// displacement at the family boundary τ = b/4
        log2_c_star: f64,
        dip_sweep: TauTable,
        /// the full dip: big case, τ = a_i/8, decreasing, width a_i
        dip_full: JunctionCurve,
        dip_log2_dmax: f64,
        /// bar height c/(4d)
        bar: f64,
    },
}

/// A scenario field; immutable after build, evaluation is pure.
#[derive(Debug, Clone)]
pub struct SolutionField {
    pub(crate) scenario: Scenario,
    pub(crate) flux: FluxModel,
    pub(crate) tree: Option<RegionTree>,
    pub(crate) depth: u32,
    pub(crate) levels: Vec<LevelCurves>,
    pub(crate) fat_set: Option<FatCantorSet>,
    pub(crate) cantor: Option<CantorVitaliMap>,
    /// evaluation tolerance budget
    pub tolerance: f64,
}

impl SolutionField {
    pub fn build(scenario: Scenario, depth: u32) -> Result<Self, CoreError> {
        match scenario {
            Scenario::CubicRoot => Ok(SolutionField {
                scenario,
                flux: make_cubic(),
                tree: None,
                depth,
                levels: Vec::new(),
                fat_set: None,
                cantor: None,
                tolerance: 1e-12,
            }),
            Scenario::CantorInverse => {
                let d = depth.max(2) as usize;
                let set = make_fat_cantor(GapSchedule::middle_power(1, 4), d)?;
                let flux = make_cantor_inverse_flux(&set, d)?;
                let cantor = make_cantor_vitali(&set, d)?;
                Ok(SolutionField {
                    scenario,
                    flux,
                    tree: None,
                    depth,
                    levels: Vec::new(),
                    fat_set: Some(set),
                    cantor: Some(cantor),
                    tolerance: 1e-9,
                })
            }
            Scenario::CantorParam => {
                let flux = make_quadratic();
                let tree = RegionTree::new(Variant::SectionFour, depth);
                let mut levels = Vec::new();
                for i in 1..=depth {
                    levels.push(build_level_four(&flux, &tree, i)?);
                }
                Ok(SolutionField {
                    scenario,
                    flux,
                    tree: Some(tree),
                    depth,
                    levels,
                    fat_set: None,
                    cantor: None,
                    tolerance: 1e-10,
                })
            }
            Scenario::NonDiff => {
                if depth > 4 {
                    return Err(CoreError::Domain(format!(
                        "NonDiff floating-point evaluation is limited to depth 4 \
                         (c_5 = 2^(-2048) underflows binary64); requested {depth}"
                    )));
                }
                let flux = make_convex_flat();
                let tree = RegionTree::new(Variant::SectionFive, depth);
                let mut levels = Vec::new();
                for i in 1..=depth {
                    levels.push(build_level_five(&flux, &tree, i)?);
                }
                Ok(SolutionField {
                    scenario,
                    flux,
                    tree: Some(tree),
                    depth,
                    levels,
                    fat_set: None,
                    cantor: None,
                    tolerance: 1e-8,
                })
            }
        }
    }

    pub fn scenario(&self) -> Scenario {
        self.scenario
    }

    pub fn flux(&self) -> &FluxModel {
        &self.flux
    }

    pub fn depth(&self) -> u32 {
        self.depth
    }

    pub fn tree(&self) -> Option<&RegionTree> {
        self.tree.as_ref()
    }

    pub(crate) fn level(&self, i: u32) -> &LevelCurves {
        &self.levels[(i - 1) as usize]
    }

    /// (t_lo, t_hi, x_lo, x_hi) of the evaluable domain.
    pub fn domain(&self) -> (f64, f64, f64, f64) {
        match self.scenario {
            Scenario::CantorParam => (0.0, 1.0, 0.0, 0.5),
            Scenario::NonDiff => (0.0, 1.0, 0.0, 0.25),
            Scenario::CantorInverse => {
                let (lo, hi) = self.flux.domain();
                (0.0, 1.0, self.flux.eval(lo), self.flux.eval(hi))
            }
            Scenario::CubicRoot => (-2.0, 2.0, -8.0, 8.0),
        }
    }

    /// Evaluates the solution u at (t, x).
    pub fn eval_u(&self, t: f64, x: f64) -> Result<f64, CoreError> {
        match self.scenario {
            Scenario::CubicRoot => Ok(x.cbrt()),
            Scenario::CantorInverse => self.flux.invert_eval(x),
            Scenario::CantorParam | Scenario::NonDiff => Ok(self.eval_region(t, x)?.0),
        }
    }

    /// Evaluates the declared source at (t, x) for the requested notion.
    pub fn eval_g(&self, t: f64, x: f64, notion: Notion) -> Result<SourceValue, CoreError> {
        match self.scenario {
            Scenario::CubicRoot => Ok(match notion {
                Notion::Eulerian => SourceValue::Value(1.0),
                Notion::Broad => {
                    SourceValue::Value(if x == 0.0 { 0.0 } else { 1.0 })
                }
            }),
            Scenario::CantorInverse => match notion {
                Notion::Eulerian => Ok(SourceValue::Value(1.0)),
                Notion::Broad => {
                    let u = self.flux.invert_eval(x)?;
                    let in_cover = (0.0..=1.0).contains(&u)
                        && match &self.flux {
                            FluxModel::CantorInverse(f) => f.set().gap_containing(u).is_none(),
                            _ => false,
                        };
                    if in_cover {
                        // u is constant in x across a positive-measure set of
                        // characteristics; no broad source is assigned
                        Ok(SourceValue::Undefined)
                    } else {
                        Ok(SourceValue::Value(1.0))
                    }
                }
            },
            Scenario::CantorParam | Scenario::NonDiff => {
                let loc = self.classify(t, x);
                match loc {
                    Location::Corridor { .. } => {
                        let (_, udot) = self.eval_region(t, x)?;
                        Ok(SourceValue::Value(udot))
                    }
                    Location::Cover { .. } => Ok(match notion {
                        Notion::Eulerian => SourceValue::Value(0.0),
                        Notion::Broad => SourceValue::Undefined,
                    }),
                    Location::Outside => Ok(SourceValue::Value(0.0)),
                }
            }
        }
    }

    /// Region classification of an f64 point (exact rational point location).
    pub(crate) fn classify(&self, t: f64, x: f64) -> Location {
        let tree = match &self.tree {
            Some(t) => t,
            None => return Location::Outside,
        };
        let (tq, xq) = match (BigRational::from_float(t), BigRational::from_float(x)) {
            (Some(a), Some(b)) => (a, b),
            _ => return Location::Outside,
        };
        tree.locate(&tq, &xq, self.depth)
    }

    /// (u, u̇-along-the-characteristic) for the hierarchical scenarios.
    pub(crate) fn eval_region(&self, t: f64, x: f64) -> Result<(f64, f64), CoreError> {
        match self.classify(t, x) {
            Location::Outside | Location::Cover { .. } => Ok((0.0, 0.0)),
            Location::Corridor {
                kind, level, local, ..
            } => {
                let tl = local.0.to_f64().unwrap_or(f64::NAN);
                let y = local.1.to_f64().unwrap_or(f64::NAN);
                self.corridor_eval(level, kind, tl, y)
            }
        }
    }

    /// Corridor evaluation in strip-local coordinates.
    pub(crate) fn corridor_eval(
        &self,
        level: u32,
        kind: CorridorKind,
        tl: f64,
        y: f64,
    ) -> Result<(f64, f64), CoreError> {
        let lv = self.level(level);
        match (&lv.kind, kind) {
            (LevelKind::Four { .. }, CorridorKind::L | CorridorKind::MinusL) => Ok((0.0, 0.0)),
            (LevelKind::Four { .. }, CorridorKind::R) => {
                let s = (tl - lv.a).clamp(0.0, lv.b);
                let (_, sc, u, udot) = self.r4_family(level, s, y)?;
                let _ = sc;
                Ok((u, udot))
            }
            (LevelKind::Five { .. }, CorridorKind::R) => {
                let s = (tl - lv.a).clamp(0.0, lv.b);
                let bar = lv.c / (4.0 * lv.d);
                self.r5_eval(level, s, y - bar)
            }
            (LevelKind::Five { .. }, CorridorKind::L) => self.l5_eval(level, tl, y),
            (LevelKind::Five { .. }, CorridorKind::MinusL) => {
                // point reflection through the strip's top-right corner
                let (u, udot) = self.l5_eval(level, lv.a_prev - tl, lv.strip_h - y)?;
                Ok((-u, udot))
            }
        }
    }

    /// SectionFour R-corridor family through (s, y): returns
    /// (is_top_family, parameter, u, u̇). The quadratic flux makes the whole
    /// family an exact λ-scaling of the stored unit curve.
    pub(crate) fn r4_family(
        &self,
        level: u32,
        s: f64,
        y: f64,
    ) -> Result<(bool, f64, f64, f64), CoreError> {
        let lv = self.level(level);
        let (unit, _c_unit) = match &lv.kind {
            LevelKind::Four { unit, c_unit } => (unit, *c_unit),
            _ => unreachable!(),
        };
        let (gamma_s, u_unit, udot_unit) = eval_junction(unit, s)?;
        let ce = lv.c * lv.e;
        let boundary = ce + gamma_s; // λ = 1 ≡ μ = 0 curve
        if y <= boundary {
            let lam = if boundary > 0.0 { (y / boundary).clamp(0.0, 1.0) } else { 0.0 };
            Ok((false, lam, lam * u_unit, lam * udot_unit))
        } else {
            let mu = ((y - ce - gamma_s) / (lv.c - gamma_s)).clamp(0.0, 1.0);
            Ok((true, mu, (1.0 - mu) * u_unit, (1.0 - mu) * udot_unit))
        }
    }

    /// Position (strip-local x) of the SectionFour family member at s.
    pub(crate) fn r4_pos(
        &self,
        level: u32,
        is_top: bool,
        param: f64,
        s: f64,
    ) -> Result<f64, CoreError> {
        let lv = self.level(level);
        let unit = match &lv.kind {
            LevelKind::Four { unit, .. } => unit,
            _ => unreachable!(),
        };
        let (gamma_s, _, _) = eval_junction(unit, s)?;
        let ce = lv.c * lv.e;
        Ok(if is_top {
            ce + param * lv.c + (1.0 - param) * gamma_s
        } else {
            param * (ce + gamma_s)
        })
    }

    /// Builds the SectionFive increasing R-corridor curve for a target
    /// displacement given as (log2 D, deficit 2f(b/2)·… − D). Returns None
    /// for the degenerate D → 0 curve.
    fn r5_curve(
        &self,
        level: u32,
        log2_d: f64,
        deficit: f64,
    ) -> Result<Option<JunctionCurve>, CoreError> {
        let lv = self.level(level);
        let (r_small, r_deficit, log2_c_star) = match &lv.kind {
            LevelKind::Five {
                r_small,
                r_deficit,
                log2_c_star,
                ..
            } => (r_small, r_deficit, *log2_c_star),
            _ => unreachable!(),
        };
        let pick = if log2_d > log2_c_star {
            r_deficit.invert_log2(deficit.log2())
        } else {
            r_small.invert_log2(log2_d)
        };
        match pick {
            None => Ok(None),
            Some((case, tau)) => Ok(Some(build_junction_from_tau(
                &self.flux,
                lv.b,
                case,
                tau,
                Orientation::Increasing,
            )?)),
        }
    }

    /// SectionFive R-corridor family member at combined band parameter
    /// p ∈ [0, 3] (p ∈ [0,1]: λ bottom band, (1,2]: μ middle band,
    /// (2,3]: ν top band). Returns (entry height in R-local coordinates,
    /// member curve; None is the degenerate flat member).
    pub(crate) fn r5_member(
        &self,
        level: u32,
        p: f64,
    ) -> Result<(f64, Option<JunctionCurve>), CoreError> {
        let lv = self.level(level);
        let (r_dmax, bar) = match &lv.kind {
            LevelKind::Five { r_dmax, bar, .. } => (*r_dmax, *bar),
            _ => unreachable!(),
        };
        let c = lv.c;
        let (entry, log2_d, deficit) = if p <= 1.0 {
            let lam = p.max(0.0);
            (
                lam * bar,
                lam.log2() + r_dmax.log2(),
                c * (1.0 - lam) + lam * bar,
            )
        } else if p <= 2.0 {
            let mu = p - 1.0;
            (bar + mu * bar, r_dmax.log2(), bar)
        } else {
            let nu = (p - 2.0).min(1.0);
            (
                2.0 * bar + nu * c,
                (1.0 - nu).log2() + r_dmax.log2(),
                c * (nu + (1.0 - nu) * bar / c),
            )
        };
        Ok((entry, self.r5_curve(level, log2_d, deficit)?))
    }

    /// Solves for the SectionFive R-corridor member through R-local (s, yp).
    pub(crate) fn r5_solve(
        &self,
        level: u32,
        s: f64,
        yp: f64,
    ) -> Result<(f64, Option<JunctionCurve>), CoreError> {
        let pos = |m: &(f64, Option<JunctionCurve>)| -> Result<f64, CoreError> {
            Ok(match &m.1 {
                None => m.0,
                Some(curve) => m.0 + eval_junction(curve, s)?.0,
            })
        };
        let lo_m = self.r5_member(level, 0.0)?;
        if yp <= pos(&lo_m)? {
            return Ok(lo_m);
        }
        let hi_m = self.r5_member(level, 3.0)?;
        if yp >= pos(&hi_m)? {
            return Ok(hi_m);
        }
        let (mut lo, mut hi) = (0.0_f64, 3.0_f64);
        let mut best = lo_m;
        for _ in 0..52 {
            let mid = 0.5 * (lo + hi);
            let m = self.r5_member(level, mid)?;
            let p = pos(&m)?;
            best = m;
            if p < yp {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(best)
    }

    /// SectionFive R-corridor evaluation; (s, yp) in R-local coordinates
    /// (yp = 0 at the top of the lower bar).
    fn r5_eval(&self, level: u32, s: f64, yp: f64) -> Result<(f64, f64), CoreError> {
        match self.r5_solve(level, s, yp)?.1 {
            None => Ok((0.0, 0.0)),
            Some(curve) => {
                let (_, u, udot) = eval_junction(&curve, s)?;
                Ok((u, udot))
            }
        }
    }

    /// Builds the SectionFive decreasing dip curve for |displacement| given
    /// in log2; None for the degenerate curve.
    fn dip_curve(&self, level: u32, log2_d: f64) -> Result<Option<JunctionCurve>, CoreError> {
        let lv = self.level(level);
        let dip_sweep = match &lv.kind {
            LevelKind::Five { dip_sweep, .. } => dip_sweep,
            _ => unreachable!(),
        };
        match dip_sweep.invert_log2(log2_d) {
            None => Ok(None),
            Some((case, tau)) => Ok(Some(build_junction_from_tau(
                &self.flux,
                lv.a,
                case,
                tau,
                Orientation::Decreasing,
            )?)),
        }
    }

    /// SectionFive L-corridor dip-family member at combined band parameter
    /// q ∈ [0, 3] (q ∈ [0,1]: λ-scaled dips, (1,2]: the full dip vertically
    /// shifted, (2,3]: (1−μ)-scaled dips toward the u ≡ 0 line at 3·bar).
    /// Returns (entry height in strip-local coordinates, member curve).
    pub(crate) fn l5_member(
        &self,
        level: u32,
        q: f64,
    ) -> Result<(f64, Option<JunctionCurve>), CoreError> {
        let lv = self.level(level);
        let (dip_full, dip_log2_dmax, bar) = match &lv.kind {
            LevelKind::Five {
                dip_full,
                dip_log2_dmax,
                bar,
                ..
            } => (dip_full, *dip_log2_dmax, *bar),
            _ => unreachable!(),
        };
        if q <= 1.0 {
            let lam = q.max(0.0);
            Ok((
                lam * lv.e,
                self.dip_curve(level, lam.log2() + dip_log2_dmax)?,
            ))
        } else if q <= 2.0 {
            let mu = q - 1.0;
            Ok((lv.e + mu * bar, Some(dip_full.clone())))
        } else {
            let mu = (q - 2.0).min(1.0);
            let entry = (1.0 - mu) * (lv.e + bar) + mu * 3.0 * bar;
            Ok((
                entry,
                self.dip_curve(level, (1.0 - mu).log2() + dip_log2_dmax)?,
            ))
        }
    }

    /// Solves for the SectionFive dip-family member through strip-local
    /// (tl, y) in the dip window tl ∈ [0, a].
    pub(crate) fn l5_solve(
        &self,
        level: u32,
        tl: f64,
        y: f64,
    ) -> Result<(f64, Option<JunctionCurve>), CoreError> {
        let lv = self.level(level);
        let t = tl.clamp(0.0, lv.a);
        let pos = |m: &(f64, Option<JunctionCurve>)| -> Result<f64, CoreError> {
            Ok(match &m.1 {
                None => m.0,
                Some(curve) => m.0 + eval_junction(curve, t)?.0,
            })
        };
        let lo_m = self.l5_member(level, 0.0)?;
        if y <= pos(&lo_m)? {
            return Ok(lo_m);
        }
        let hi_m = self.l5_member(level, 3.0)?;
        if y >= pos(&hi_m)? {
            return Ok(hi_m);
        }
        let (mut lo, mut hi) = (0.0_f64, 3.0_f64);
        let mut best = lo_m;
        for _ in 0..54 {
            let mid = 0.5 * (lo + hi);
            let m = self.l5_member(level, mid)?;
            let p = pos(&m)?;
            best = m;
            if p < y {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(best)
    }

    /// SectionFive L-corridor (dip) evaluation in strip-local coordinates.
    fn l5_eval(&self, level: u32, tl: f64, y: f64) -> Result<(f64, f64), CoreError> {
        let lv = self.level(level);
        if tl >= lv.a {
            // the bottom bar beyond the dip window: u ≡ 0
            return Ok((0.0, 0.0));
        }
        match self.l5_solve(level, tl, y)?.1 {
            None => Ok((0.0, 0.0)),
            Some(curve) => {
                let (_, u, udot) = eval_junction(&curve, tl.clamp(0.0, lv.a))?;
                Ok((u, udot))
            }
        }
    }

    /// Modulus-of-continuity samples on an n×n grid plus the scenario's
    /// adversarial pairs.
    pub fn continuity_report(&self, n: usize) -> Result<ContinuityReport, CoreError> {
        let (t0, t1, x0, x1) = self.domain();
        let n = n.max(2);
        let mut pairs = Vec::new();
        for it in 0..n {
            let t = t0 + (t1 - t0) * it as f64 / (n - 1) as f64;
            let mut prev: Option<(f64, f64)> = None;
            for ix in 0..n {
                let x = x0 + (x1 - x0) * ix as f64 / (n - 1) as f64;
                let u = self.eval_u(t, x)?;
                if let Some((xp, up)) = prev {
                    pairs.push(((x - xp).abs(), (u - up).abs()));
                }
                prev = Some((x, u));
            }
        }
        let mut adversarial = Vec::new();
        if self.scenario == Scenario::NonDiff {
            for i in 2..=self.depth {
                let lv = self.level(i);
                let (dip_full, bar) = match &lv.kind {
                    LevelKind::Five { dip_full, bar, .. } => (dip_full, *bar),
                    _ => unreachable!(),
                };
                // dip bottom at mid-time vs the u = 0 line at 3·bar
                let (g_mid, u_mid, _) = eval_junction(dip_full, 0.5 * lv.a)?;
                let du = -u_mid; // = 3 a_i / 8
                let dx = 3.0 * bar - (lv.e + g_mid);
                adversarial.push(AdversarialPair {
                    level: i,
                    du,
                    dx,
                    log2_du: du.log2(),
                    log2_dx: dx.log2(),
                });
            }
        }
        Ok(ContinuityReport { pairs, adversarial })
    }

    /// The Cantor–Vitali map of the CantorInverse scenario.
    pub fn cantor_map(&self) -> Option<&CantorVitaliMap> {
        self.cantor.as_ref()
    }

    /// The fat Cantor set of the CantorInverse scenario.
    pub fn fat_set(&self) -> Option<&FatCantorSet> {
        self.fat_set.as_ref()
    }
}

fn build_level_four(
    flux: &FluxModel,
    tree: &RegionTree,
    i: u32,
) -> Result<LevelCurves, CoreError> {
    let p = &tree.level(i).params;
    let prev = level_params(Variant::SectionFour, i - 1);
    let (a, b, c) = (
        p.a.to_f64().unwrap(),
        p.b.to_f64().unwrap(),
        p.c.to_f64().unwrap(),
    );
    let d = p.d.to_f64().unwrap();
    let e = p.e.to_f64().unwrap();
    let c_unit = c * (1.0 - e);
    let unit = build_junction(flux, b, c_unit, Orientation::Increasing)?;
    if unit.case() != JunctionCase::Small {
        return Err(CoreError::Inconsistency(format!(
            "level {i} unit corridor curve is not small-case; λ-scaling invalid"
        )));
    }
    Ok(LevelCurves {
        i,
        a,
        b,
        c,
        d,
        e,
        a_prev: prev.a.to_f64().unwrap(),
        strip_h: tree.level(i).strip_h.to_f64().unwrap(),
        kind: LevelKind::Four { unit, c_unit },
    })
}

fn build_level_five(
    flux: &FluxModel,
    tree: &RegionTree,
    i: u32,
) -> Result<LevelCurves, CoreError> {
    let p = &tree.level(i).params;
    let prev = level_params(Variant::SectionFive, i - 1);
    let (a, b, c) = (
        p.a.to_f64().unwrap(),
        p.b.to_f64().unwrap(),
        p.c.to_f64().unwrap(),
    );
    let d = p.d.to_f64().unwrap_or(f64::INFINITY);
    let bar = c / (4.0 * d);
    if !(bar > 0.0) {
        return Err(CoreError::Domain(format!(
            "level {i} bar height underflows binary64"
        )));
    }
    let r_small = build_tau_table(flux, b, TauKind::SmallD, Orientation::Increasing)?;
    let r_deficit = build_tau_table(flux, b, TauKind::BigDeficit, Orientation::Increasing)?;
    let r_dmax = c - bar; // c (1 − 1/(4d))
    let c_star = build_junction_from_tau(flux, b, JunctionCase::Big, 0.25 * b, Orientation::Increasing)?
        .c();
    let dip_sweep = build_tau_table(flux, a, TauKind::DipSweep, Orientation::Decreasing)?;
    let dip_full =
        build_junction_from_tau(flux, a, JunctionCase::Big, 0.125 * a, Orientation::Decreasing)?;
    let dip_log2_dmax = dip_full
        .displacement_log2_abs()
        .ok_or_else(|| CoreError::Inconsistency("degenerate full dip".into()))?;
    // corridor offset e_i = c/(4d) + |Δγ_i|, checked < c/(2d)
    if dip_log2_dmax >= bar.log2() {
        return Err(CoreError::Inconsistency(format!(
            "level {i}: dip displacement 2^{dip_log2_dmax} is not below c/(4d)"
        )));
    }
    let e = bar + dip_log2_dmax.exp2(); // = bar when |Δγ| underflows
    Ok(LevelCurves {
        i,
        a,
        b,
        c,
        d,
        e,
        a_prev: prev.a.to_f64().unwrap(),
        strip_h: tree.level(i).strip_h.to_f64().unwrap(),
        kind: LevelKind::Five {
            r_small,
            r_deficit,
            r_dmax,
            log2_c_star: c_star.log2(),
            dip_sweep,
            dip_full,
            dip_log2_dmax,
            bar,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cubic_closed_form() {
        let f = SolutionField::build(Scenario::CubicRoot, 0).unwrap();
        assert_eq!(f.eval_u(0.0, 8.0).unwrap(), 2.0);
        // f(u(t,x)) = x exactly and ∂t u ≡ 0
        for &x in &[-5.0, -0.3, 0.0, 0.7, 3.0] {
            let u = f.eval_u(1.0, x).unwrap();
            assert_eq!(u * u * u, x.cbrt().powi(3));
            assert_eq!(f.eval_u(-1.0, x).unwrap(), u);
        }
        assert_eq!(
            f.eval_g(0.0, 0.0, Notion::Broad).unwrap(),
            SourceValue::Value(0.0)
        );
        assert_eq!(
            f.eval_g(0.0, 2.0, Notion::Broad).unwrap(),
            SourceValue::Value(1.0)
        );
    }

    #[test]
    fn cantor_inverse_inversion_residual() {
        let f = SolutionField::build(Scenario::CantorInverse, 3).unwrap();
        let (_, _, x0, x1) = f.domain();
        for k in 0..20 {
            let x = x0 + (x1 - x0) * (k as f64 + 0.5) / 20.0;
            let u = f.eval_u(0.0, x).unwrap();
            assert!(
                (f.flux.eval(u) - x).abs() < 1e-9,
                "inversion residual at x = {x}"
            );
        }
        assert_eq!(
            f.eval_g(0.3, 0.1, Notion::Eulerian).unwrap(),
            SourceValue::Value(1.0)
        );
    }

    #[test]
    fn cantor_param_zero_regions() {
        let f = SolutionField::build(Scenario::CantorParam, 3).unwrap();
        let tree = f.tree().unwrap();
        // u = 0 at depth-d rectangle corners
        for rect in tree.rectangles_at_depth(3).take(48) {
            let (x0, y0, _, _) = rect.to_f64();
            assert_eq!(f.eval_u(x0, y0).unwrap(), 0.0);
        }
        // u = 0 in the level-1 L corridor
        assert_eq!(f.eval_u(0.1, 0.005).unwrap(), 0.0);
    }

    #[test]
    fn cantor_param_corridor_roundtrip() {
        let f = SolutionField::build(Scenario::CantorParam, 2).unwrap();
        let lv = f.level(1);
        // forward: place a family member at (s, pos), then invert via eval_u
        for &(is_top, param, sfrac) in &[
            (false, 0.35, 0.3),
            (false, 0.9, 0.55),
            (true, 0.2, 0.7),
            (true, 0.75, 0.42),
        ] {
            let s = sfrac * lv.b;
            let pos = f.r4_pos(1, is_top, param, s).unwrap();
            // absolute coordinates: first strip (j = 0), R at t ∈ [a, a+b]
            let (t, x) = (lv.a + s, pos);
            let (u, udot) = f.eval_region(t, x).unwrap();
            let (want_top, want_param, want_u, want_udot) = f.r4_family(1, s, pos).unwrap();
            assert_eq!(want_top, is_top);
            assert!((want_param - param).abs() < 1e-12);
            assert!((u - want_u).abs() < 1e-12, "u mismatch");
            assert!((udot - want_udot).abs() < 1e-12);
            // corridor slope stays in [−1, 1], nonnegative on the rising half
            assert!(udot.abs() <= 1.0 + 1e-9);
            if s <= 0.5 * lv.b {
                assert!(udot >= -1e-12);
            }
            let g = f.eval_g(t, x, Notion::Eulerian).unwrap();
            assert_eq!(g, SourceValue::Value(udot));
        }
    }

    #[test]
    fn cantor_param_interface_continuity() {
        let f = SolutionField::build(Scenario::CantorParam, 2).unwrap();
        let lv = f.level(1);
        // at the corridor endpoints u vanishes (flat junction endpoints)
        for &param in &[0.1, 0.5, 0.95] {
            for &s in &[0.0, lv.b] {
                let pos = f.r4_pos(1, false, param, s).unwrap();
                let u = f.eval_u(lv.a + s, pos).unwrap();
                assert!(u.abs() < 1e-10, "u = {u} at corridor endpoint");
            }
        }
    }

    #[test]
    fn nondiff_dip_minimum() {
        let f = SolutionField::build(Scenario::NonDiff, 2).unwrap();
        // level-i dip bottom on the right-children chain: u = −3a_i/8
        let mut origin_t = 0.0;
        let mut origin_x = 0.0;
        for i in 1..=2u32 {
            let lv = f.level(i);
            let bar = lv.c / (4.0 * lv.d);
            let t = origin_t + 0.5 * lv.a;
            let x = origin_x + lv.e + 0.5 * bar; // band 2 at μ = 1/2
            let u = f.eval_u(t, x).unwrap();
            assert!(
                (u + 3.0 * lv.a / 8.0).abs() < 1e-9,
                "level {i} dip bottom u = {u}, want {}",
                -3.0 * lv.a / 8.0
            );
            origin_t += lv.a + lv.b;
            origin_x += bar;
        }
    }

    #[test]
    fn nondiff_r_corridor_consistency() {
        let f = SolutionField::build(Scenario::NonDiff, 1).unwrap();
        let lv = f.level(1);
        let bar = match &lv.kind {
            LevelKind::Five { bar, .. } => *bar,
            _ => unreachable!(),
        };
        // mid-band-2 curve: known full-displacement profile
        let s = 0.4 * lv.b;
        let curve = f
            .r5_curve(1, (lv.c - bar).log2(), bar)
            .unwrap()
            .expect("band-2 curve");
        let (g, u_want, _) = eval_junction(&curve, s).unwrap();
        let yp = bar + 0.5 * bar + g; // μ = 1/2 member
        let (u, udot) = f.r5_eval(1, s, yp).unwrap();
        assert!(
            (u - u_want).abs() < 1e-7 * u_want.abs().max(1e-3),
            "u = {u}, want {u_want}"
        );
        assert!(udot.is_finite());
    }

    #[test]
    fn nondiff_adversarial_pairs() {
        let f = SolutionField::build(Scenario::NonDiff, 2).unwrap();
        let rep = f.continuity_report(8).unwrap();
        assert_eq!(rep.adversarial.len(), 1);
        let p = &rep.adversarial[0];
        assert_eq!(p.level, 2);
        // |Δu| = 3 a₂ / 8 = 15/256
        assert!((p.du - 15.0 / 256.0).abs() < 1e-12);
        // |Δx| < (3/4) · 2^(−32) / (2^24 − 1)
        assert!(p.dx < 0.75 * 2f64.powi(-32) / (2f64.powi(24) - 1.0));
        let ratio = rep.adversarial_log2_ratio(0.5).unwrap();
        assert!(ratio >= (1e7f64).log2(), "log2 ratio = {ratio}");
    }

    #[test]
    fn nondiff_depth_limit() {
        assert!(matches!(
            SolutionField::build(Scenario::NonDiff, 5),
            Err(CoreError::Domain(_))
        ));
    }
}
