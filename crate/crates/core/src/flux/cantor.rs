//! The Cantor–Vitali map of a fat Cantor set: w(z) = z − L¹(S ∩ [0, z]).
//!
//! At finite truncation depth d the cover overestimates S, so the computed
//! map underestimates w by at most ε_d = residual_measure(d) − limit_measure;
//! ε_d is carried as the certified error bound. For the default middle-4^(−n)
//! set all depth-d cover endpoints are dyadic with few fractional bits, so
//! the f64 descent is exact.

use crate::error::CoreError;
use crate::flux::fat_cantor::{FatCantorF64, FatCantorSet};
use num_rational::BigRational;
use num_traits::ToPrimitive;

/// Depth-truncated Cantor–Vitali map with certified error bound.
#[derive(Debug, Clone)]
pub struct CantorVitaliMap {
    set: FatCantorSet,
    fast: FatCantorF64,
    depth: usize,
    /// ε_d = residual_measure(depth) − limit_measure, as f64 (rounded up).
    error_bound: f64,
}

/// Builds the map from the gap structure of `S`, truncated at `depth`.
pub fn make_cantor_vitali(set: &FatCantorSet, depth: usize) -> Result<CantorVitaliMap, CoreError> {
    if depth > set.depth() {
        return Err(CoreError::Domain(format!(
            "map depth {depth} exceeds set depth {}",
            set.depth()
        )));
    }
    let truncated = crate::flux::fat_cantor::make_fat_cantor(
        crate::flux::fat_cantor::GapSchedule::from_ratio(set.ratio().clone()),
        depth,
    )?;
    let eps = (set.residual_measure(depth) - set.limit_measure())
        .to_f64()
        .unwrap();
    Ok(CantorVitaliMap {
        fast: FatCantorF64::new(&truncated),
        set: truncated,
        depth,
        error_bound: eps,
    })
}

impl CantorVitaliMap {
    pub fn depth(&self) -> usize {
        self.depth
    }

    /// Certified bound on |forward(z) − w(z)|.
    pub fn error_bound(&self) -> f64 {
        self.error_bound
    }

    /// w(z) = z − L¹(depth-d cover ∩ [0, z]); nondecreasing, 1-Lipschitz.
    pub fn forward(&self, z: f64) -> f64 {
        let z = z.clamp(0.0, 1.0);
        z - self.fast.cover_measure_below(z)
    }

    /// Exact-rational forward map, for bookkeeping identities.
    pub fn forward_exact(&self, z: &BigRational) -> BigRational {
        z - self.set.cover_measure_below(z, self.depth)
    }

    /// Monotone inversion of `forward`. On plateaus (cover intervals, where
    /// the truncated map is constant) the midpoint of the plateau is
    /// returned; the true w is strictly increasing so the plateau width is
    /// itself bounded by the depth-d interval length.
    pub fn inverse(&self, w: f64) -> f64 {
        let w_max = self.forward(1.0);
        if w <= 0.0 {
            return 0.0;
        }
        if w >= w_max {
            return 1.0;
        }
        // bisection: forward is nondecreasing, endpoints bracket w
        let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
        for _ in 0..80 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.forward(mid) < w {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        // locate the plateau {z : forward(z) = forward(z0)} and take its middle
        let z0 = 0.5 * (lo + hi);
        let target = self.forward(z0);
        let (mut a, mut b) = (0.0_f64, z0);
        for _ in 0..60 {
            let m = 0.5 * (a + b);
            if self.forward(m) >= target {
                b = m;
            } else {
                a = m;
            }
        }
        let left = b;
        let (mut a, mut b) = (z0, 1.0_f64);
        for _ in 0..60 {
            let m = 0.5 * (a + b);
            if self.forward(m) <= target {
                a = m;
            } else {
                b = m;
            }
        }
        0.5 * (left + a)
    }
}
