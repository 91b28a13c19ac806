//! Flux-function registry: the four concrete fluxes used by the scenarios
//! plus the fat-Cantor machinery behind the Cantor-inverse flux.

mod cantor;
mod fat_cantor;
mod table;

pub use cantor::{make_cantor_vitali, CantorVitaliMap};
pub use fat_cantor::{make_fat_cantor, parse_gaps_json, FatCantorF64, FatCantorSet, GapSchedule};
pub use table::MonotoneTable;

use crate::error::CoreError;
use crate::numerics::integrate_adaptive;
use num_traits::ToPrimitive;

/// Convexity tag for a declared interval of the flux domain.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Convexity {
    Convex,
    Concave,
    /// f″ numerically indistinguishable from 0 on the interval.
    Flat,
}

/// ln 2, used by the convex-flat closed forms.
const LN2: f64 = std::f64::consts::LN_2;

/// A C² flux with evaluators for f, f′, f″, monotone-branch inversion of f′,
/// and declared convexity regions.
#[derive(Debug, Clone)]
pub enum FluxModel {
    /// f(z) = z².
    Quadratic,
    /// f(z) = z³.
    Cubic,
    /// f(z) = 2^(−1/z−1) for z ≥ 0, 2^(−1/|z|³−1) for z < 0; all derivatives
    /// vanish at 0 (flat contact), strictly convex in a neighborhood of 0.
    ConvexFlat,
    /// z ↦ f(−z) of the wrapped flux (used for decreasing-u junctions).
    Mirrored(Box<FluxModel>),
    /// Strictly increasing C² flux whose derivative vanishes exactly on a fat
    /// Cantor set (one exponential bump per removed gap, flat ramps outside
    /// [0, 1]).
    CantorInverse(CantorInverseFlux),
}

/// f(z) = z².
pub fn make_quadratic() -> FluxModel {
    FluxModel::Quadratic
}

/// f(z) = z³.
pub fn make_cubic() -> FluxModel {
    FluxModel::Cubic
}

/// The two-branch convex-flat flux.
pub fn make_convex_flat() -> FluxModel {
    FluxModel::ConvexFlat
}

impl FluxModel {
    /// f(z).
    pub fn eval(&self, z: f64) -> f64 {
        self.eval_flagged(z).0
    }

    /// f(z) together with an underflow flag: true when z ≠ 0 but the value
    /// rounds to exact 0 in binary64.
    pub fn eval_flagged(&self, z: f64) -> (f64, bool) {
        match self {
            FluxModel::Quadratic => (z * z, false),
            FluxModel::Cubic => (z * z * z, false),
            FluxModel::ConvexFlat => {
                if z == 0.0 {
                    return (0.0, false);
                }
                let ex = if z > 0.0 {
                    -1.0 / z - 1.0
                } else {
                    -1.0 / (-z).powi(3) - 1.0
                };
                let v = ex.exp2();
                (v, v == 0.0)
            }
            FluxModel::Mirrored(inner) => inner.eval_flagged(-z),
            FluxModel::CantorInverse(f) => {
                let v = f.eval(z);
                (v, v == 0.0 && z != 0.0 && z.abs() > 1e-300)
            }
        }
    }

    /// f′(z).
    pub fn deriv(&self, z: f64) -> f64 {
        match self {
            FluxModel::Quadratic => 2.0 * z,
            FluxModel::Cubic => 3.0 * z * z,
            FluxModel::ConvexFlat => {
                if z == 0.0 {
                    0.0
                } else if z > 0.0 {
                    LN2 / (z * z) * self.eval(z)
                } else {
                    let w = -z;
                    -3.0 * LN2 / w.powi(4) * self.eval(z)
                }
            }
            FluxModel::Mirrored(inner) => -inner.deriv(-z),
            FluxModel::CantorInverse(f) => f.deriv(z),
        }
    }

    /// f″(z).
    pub fn deriv2(&self, z: f64) -> f64 {
        match self {
            FluxModel::Quadratic => 2.0,
            FluxModel::Cubic => 6.0 * z,
            FluxModel::ConvexFlat => {
                if z == 0.0 {
                    0.0
                } else if z > 0.0 {
                    LN2 / z.powi(4) * self.eval(z) * (LN2 - 2.0 * z)
                } else {
                    let w = -z;
                    3.0 * LN2 / w.powi(8) * self.eval(z) * (3.0 * LN2 - 4.0 * w.powi(3))
                }
            }
            FluxModel::Mirrored(inner) => inner.deriv2(-z),
            FluxModel::CantorInverse(f) => f.deriv2(z),
        }
    }

    /// log2 |f′(z)|, computed analytically where f′ itself underflows
    /// binary64 (convex-flat branches); `None` when unavailable or f′ = 0.
    pub fn log2_deriv_abs(&self, z: f64) -> Option<f64> {
        match self {
            FluxModel::ConvexFlat => {
                if z == 0.0 {
                    None
                } else if z > 0.0 {
                    Some(-1.0 / z - 1.0 + LN2.log2() - 2.0 * z.log2())
                } else {
                    let w = -z;
                    Some(-1.0 / w.powi(3) - 1.0 + (3.0 * LN2).log2() - 4.0 * w.log2())
                }
            }
            FluxModel::Mirrored(inner) => inner.log2_deriv_abs(-z),
            _ => {
                let d = self.deriv(z).abs();
                if d > 0.0 {
                    Some(d.log2())
                } else {
                    None
                }
            }
        }
    }

    /// log2 f(z) analytically for the convex-flat branches; `None` elsewhere
    /// or where undefined.
    pub fn log2_eval(&self, z: f64) -> Option<f64> {
        match self {
            FluxModel::ConvexFlat => {
                if z == 0.0 {
                    None
                } else if z > 0.0 {
                    Some(-1.0 / z - 1.0)
                } else {
                    Some(-1.0 / (-z).powi(3) - 1.0)
                }
            }
            FluxModel::Mirrored(inner) => inner.log2_eval(-z),
            _ => {
                let v = self.eval(z);
                if v > 0.0 {
                    Some(v.log2())
                } else {
                    None
                }
            }
        }
    }

    /// Declared domain.
    pub fn domain(&self) -> (f64, f64) {
        match self {
            FluxModel::Quadratic | FluxModel::Cubic => (-16.0, 16.0),
            FluxModel::ConvexFlat => (-2.0, 2.0),
            FluxModel::Mirrored(inner) => {
                let (lo, hi) = inner.domain();
                (-hi, -lo)
            }
            FluxModel::CantorInverse(_) => (-4.0, 4.0),
        }
    }

    /// Maximal intervals on which f′ is monotone (the branches accepted by
    /// `invert_deriv`), in increasing order.
    pub fn deriv_branches(&self) -> Vec<(f64, f64)> {
        let (lo, hi) = self.domain();
        match self {
            FluxModel::Quadratic => vec![(lo, hi)],
            FluxModel::Cubic => vec![(lo, 0.0), (0.0, hi)],
            FluxModel::ConvexFlat => {
                let (zl, zr) = convex_flat_inflections();
                vec![(lo, zl), (zl, zr), (zr, hi)]
            }
            FluxModel::Mirrored(inner) => {
                let mut v: Vec<(f64, f64)> = inner
                    .deriv_branches()
                    .into_iter()
                    .map(|(a, b)| (-b, -a))
                    .collect();
                v.reverse();
                v
            }
            FluxModel::CantorInverse(_) => vec![(lo, 0.0), (1.0, hi)],
        }
    }

    /// Inverts f′ on the declared monotone branch (index into
    /// `deriv_branches`) by bisection.
    pub fn invert_deriv(&self, slope: f64, branch: usize) -> Result<f64, CoreError> {
        let branches = self.deriv_branches();
        let (a, b) = *branches.get(branch).ok_or_else(|| {
            CoreError::Domain(format!(
                "branch {branch} out of range (flux has {})",
                branches.len()
            ))
        })?;
        let (fa, fb) = (self.deriv(a), self.deriv(b));
        let (lo_v, hi_v) = if fa <= fb { (fa, fb) } else { (fb, fa) };
        if slope < lo_v || slope > hi_v {
            return Err(CoreError::Domain(format!(
                "slope {slope} outside branch range [{lo_v}, {hi_v}]"
            )));
        }
        crate::numerics::find_root(|z| self.deriv(z) - slope, a, b, 1e-14)
    }

    /// Convexity tags on a partition of the domain (f″ sign regions).
    pub fn convexity_regions(&self) -> Vec<(f64, f64, Convexity)> {
        let (lo, hi) = self.domain();
        match self {
            FluxModel::Quadratic => vec![(lo, hi, Convexity::Convex)],
            FluxModel::Cubic => vec![
                (lo, 0.0, Convexity::Concave),
                (0.0, hi, Convexity::Convex),
            ],
            FluxModel::ConvexFlat => {
                let (zl, zr) = convex_flat_inflections();
                vec![
                    (lo, zl, Convexity::Concave),
                    (zl, zr, Convexity::Convex),
                    (zr, hi, Convexity::Concave),
                ]
            }
            FluxModel::Mirrored(inner) => {
                let mut v: Vec<(f64, f64, Convexity)> = inner
                    .convexity_regions()
                    .into_iter()
                    .map(|(a, b, c)| (-b, -a, c))
                    .collect();
                v.reverse();
                v
            }
            FluxModel::CantorInverse(_) => vec![
                (lo, 0.0, Convexity::Concave),
                (0.0, 1.0, Convexity::Flat),
                (1.0, hi, Convexity::Convex),
            ],
        }
    }

    /// The mirrored flux z ↦ f(−z); unwraps a double mirror.
    pub fn mirrored(&self) -> FluxModel {
        match self {
            FluxModel::Mirrored(inner) => (**inner).clone(),
            other => FluxModel::Mirrored(Box::new(other.clone())),
        }
    }

    /// Inverts f itself (only for globally monotone fluxes: cubic and
    /// Cantor-inverse, and their mirrors).
    pub fn invert_eval(&self, x: f64) -> Result<f64, CoreError> {
        match self {
            FluxModel::Cubic => Ok(x.cbrt()),
            FluxModel::CantorInverse(f) => Ok(f.invert(x)),
            FluxModel::Mirrored(inner) => Ok(-inner.invert_eval(x)?),
            _ => Err(CoreError::Domain(
                "flux is not globally monotone; eval inversion undefined".into(),
            )),
        }
    }
}

/// Inflection points of the convex-flat flux: f″ changes sign at
/// z = −(3 ln2 / 4)^(1/3) and z = ln2 / 2.
fn convex_flat_inflections() -> (f64, f64) {
    (-(0.75 * LN2).cbrt(), 0.5 * LN2)
}

/// One stored bump of the Cantor-inverse flux (a removed gap whose mass is
/// representable in binary64).
#[derive(Debug, Clone)]
struct BumpGap {
    lo: f64,
    hi: f64,
    /// total mass before this gap (over representable gaps)
    cum_before: f64,
    /// cumulative partial-mass table on [lo, hi]
    partial: MonotoneTable,
}

/// Strictly increasing flux with f′ = 0 exactly on the depth-d cover of a
/// fat Cantor set; see `make_cantor_inverse_flux`.
#[derive(Debug, Clone)]
pub struct CantorInverseFlux {
    set: FatCantorF64,
    bumps: Vec<BumpGap>,
    /// total bump mass = f(1) − f(0)
    total_mass: f64,
    /// cumulative ∫ of exp(1/s) on [−4, 0], normalized to 0 at z = 0
    neg_ramp: MonotoneTable,
    /// cumulative ∫ of exp(−1/(s−1)) on [1, 4], normalized to 0 at z = 1
    pos_ramp: MonotoneTable,
}

/// Builds the Cantor-inverse flux for the fat set `set`, with one bump
/// exp(−1/((z−α)(β−z))) per gap (α, β) removed up to `depth`, extended
/// outside [0, 1] by the flat-contact ramps f′ = exp(1/z) (z < 0) and
/// f′ = exp(−1/(z−1)) (z > 1). Normalization: f(0) = 0.
pub fn make_cantor_inverse_flux(
    set: &FatCantorSet,
    depth: usize,
) -> Result<FluxModel, CoreError> {
    if depth > set.depth() {
        return Err(CoreError::Domain(format!(
            "flux depth {depth} exceeds set depth {}",
            set.depth()
        )));
    }
    let truncated = make_fat_cantor(GapSchedule::from_ratio(set.ratio().clone()), depth)?;
    let fast = FatCantorF64::new(&truncated);

    // collect gaps whose bump has representable mass: peak is exp(−4/ℓ²)
    let mut bumps = Vec::new();
    let mut cum = 0.0_f64;
    for level in 1..=depth {
        let len: f64 = truncated
            .gap_length(level)
            .to_f64()
            .ok_or_else(|| CoreError::Domain("gap length conversion failed".into()))?;
        let peak = (-4.0 / (len * len)).exp();
        if peak == 0.0 {
            continue; // deeper bumps vanish identically in binary64
        }
        for (lo, hi) in truncated.gaps_at_level(level)? {
            let (lo, hi) = (lo.to_f64().unwrap(), hi.to_f64().unwrap());
            bumps.push((lo, hi));
        }
    }
    bumps.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    let mut stored = Vec::with_capacity(bumps.len());
    for (lo, hi) in bumps {
        let partial = cumulative_table(
            |z| bump(z, lo, hi),
            lo,
            hi,
            257,
            (-4.0 / ((hi - lo) * (hi - lo))).exp() * (hi - lo) * 1e-10,
        )?;
        let mass = partial.y_range().1;
        stored.push(BumpGap {
            lo,
            hi,
            cum_before: cum,
            partial,
        });
        cum += mass;
    }
    let total_mass = cum;

    let neg_ramp = cumulative_table(|z| (1.0 / z).exp(), -4.0, 0.0, 1025, 1e-13)?;
    let pos_ramp = cumulative_table(|z| (-1.0 / (z - 1.0)).exp(), 1.0, 4.0, 1025, 1e-13)?;

    Ok(FluxModel::CantorInverse(CantorInverseFlux {
        set: fast,
        bumps: stored,
        total_mass,
        neg_ramp,
        pos_ramp,
    }))
}

/// The bump exp(−1/((z−α)(β−z))) on (α, β), 0 outside.
fn bump(z: f64, alpha: f64, beta: f64) -> f64 {
    let p = (z - alpha) * (beta - z);
    if p <= 0.0 {
        0.0
    } else {
        (-1.0 / p).exp()
    }
}

/// Tabulates z ↦ ∫_{a}^{z} g on n nodes by segment-wise adaptive quadrature,
/// with the exact integrand values as Hermite node slopes.
fn cumulative_table(
    g: impl Fn(f64) -> f64,
    a: f64,
    b: f64,
    n: usize,
    seg_tol: f64,
) -> Result<MonotoneTable, CoreError> {
    let mut xs = Vec::with_capacity(n);
    let mut ys = Vec::with_capacity(n);
    let mut slopes = Vec::with_capacity(n);
    let mut acc = 0.0_f64;
    xs.push(a);
    ys.push(0.0);
    slopes.push(g(a));
    for k in 1..n {
        let x0 = a + (b - a) * (k - 1) as f64 / (n - 1) as f64;
        let x1 = a + (b - a) * k as f64 / (n - 1) as f64;
        let seg = match integrate_adaptive(&g, x0, x1, seg_tol) {
            Ok(r) => r.value,
            Err(CoreError::QuadratureBudget { best, .. }) => best,
            Err(e) => return Err(e),
        };
        acc += seg.max(0.0);
        xs.push(x1);
        ys.push(acc);
        slopes.push(g(x1));
    }
    Ok(MonotoneTable::with_slopes(xs, ys, slopes))
}

impl CantorInverseFlux {
    /// Shared gap geometry (f64 view).
    pub fn set(&self) -> &FatCantorF64 {
        &self.set
    }

    /// f(1) − f(0): total representable bump mass.
    pub fn total_mass(&self) -> f64 {
        self.total_mass
    }

    fn eval(&self, z: f64) -> f64 {
        if z < 0.0 {
            // neg_ramp holds ∫_{−4}^{z}; normalize so f(0) = 0
            self.neg_ramp.eval(z.max(-4.0)) - self.neg_ramp.y_range().1
        } else if z <= 1.0 {
            let mut acc = 0.0;
            for g in &self.bumps {
                if z >= g.hi {
                    acc = g.cum_before + g.partial.y_range().1;
                } else if z > g.lo {
                    return g.cum_before + g.partial.eval(z);
                } else {
                    break;
                }
            }
            acc
        } else {
            self.total_mass + self.pos_ramp.eval(z.min(4.0))
        }
    }

    fn deriv(&self, z: f64) -> f64 {
        if z < 0.0 {
            (1.0 / z).exp()
        } else if z <= 1.0 {
            match self.set.gap_containing(z) {
                Some((lo, hi, _)) => bump(z, lo, hi),
                None => 0.0,
            }
        } else {
            (-1.0 / (z - 1.0)).exp()
        }
    }

    fn deriv2(&self, z: f64) -> f64 {
        if z < 0.0 {
            -(1.0 / z).exp() / (z * z)
        } else if z <= 1.0 {
            match self.set.gap_containing(z) {
                Some((lo, hi, _)) => {
                    let p = (z - lo) * (hi - z);
                    if p <= 0.0 {
                        0.0
                    } else {
                        // d/dz exp(−1/p) = exp(−1/p) · p′ / p²
                        let pp = lo + hi - 2.0 * z;
                        bump(z, lo, hi) * pp / (p * p)
                    }
                }
                None => 0.0,
            }
        } else {
            (-1.0 / (z - 1.0)).exp() / ((z - 1.0) * (z - 1.0))
        }
    }

    /// Monotone inversion of f over the domain by bisection; plateaus (the
    /// numerically flat stretch of [0, 1]) resolve to some point inside.
    fn invert(&self, x: f64) -> f64 {
        let (lo, hi) = (-4.0_f64, 4.0_f64);
        let (flo, fhi) = (self.eval(lo), self.eval(hi));
        if x <= flo {
            return lo;
        }
        if x >= fhi {
            return hi;
        }
        let (mut a, mut b) = (lo, hi);
        for _ in 0..120 {
            let m = 0.5 * (a + b);
            if m <= a || m >= b {
                break;
            }
            if self.eval(m) < x {
                a = m;
            } else {
                b = m;
            }
        }
        0.5 * (a + b)
    }
}
