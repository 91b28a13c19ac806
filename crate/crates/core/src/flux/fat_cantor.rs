//! Smith–Volterra–Cantor ("fat Cantor") sets with exact rational bookkeeping.
//!
//! The set is built on [0, 1] by removing, at step n, the middle open gap of
//! length `ratio^n` from each of the 2^(n−1) surviving closed intervals. With
//! the default ratio 1/4 the removed total is Σ 2^(n−1) 4^(−n) = 1/2, so the
//! limit set is closed, nowhere dense, and has measure exactly 1/2.

use crate::error::CoreError;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

/// Gap-length rule: the gap removed at level n has length `ratio^n`.
#[derive(Debug, Clone)]
pub struct GapSchedule {
    ratio: BigRational,
}

impl GapSchedule {
    /// Middle-`(num/den)^n` schedule; the default set uses 1/4.
    pub fn middle_power(num: i64, den: i64) -> Self {
        GapSchedule {
            ratio: BigRational::new(BigInt::from(num), BigInt::from(den)),
        }
    }

    /// Schedule with an arbitrary exact gap ratio.
    pub fn from_ratio(ratio: BigRational) -> Self {
        GapSchedule { ratio }
    }

    pub fn ratio(&self) -> &BigRational {
        &self.ratio
    }
}

impl Default for GapSchedule {
    fn default() -> Self {
        GapSchedule::middle_power(1, 4)
    }
}

/// A depth-truncated fat Cantor set: the closed cover left after `depth`
/// rounds of middle-gap removal, plus exact measures of cover and limit.
#[derive(Debug, Clone)]
pub struct FatCantorSet {
    ratio: BigRational,
    depth: usize,
}

/// Builds the set, validating that the schedule removes total measure < 1
/// and that every gap fits strictly inside its interval.
pub fn make_fat_cantor(schedule: GapSchedule, depth: usize) -> Result<FatCantorSet, CoreError> {
    let r = schedule.ratio.clone();
    if r <= BigRational::zero() {
        return Err(CoreError::InvalidSchedule(
            "gap ratio must be positive".into(),
        ));
    }
    // Σ 2^(n−1) r^n = r / (1 − 2r) converges below 1 iff r < 1/3.
    let third = BigRational::new(BigInt::one(), BigInt::from(3));
    if r >= third {
        return Err(CoreError::InvalidSchedule(format!(
            "ratio {r} removes total measure ≥ 1"
        )));
    }
    let set = FatCantorSet { ratio: r, depth };
    // every gap must fit strictly inside a level interval
    for d in 0..depth {
        let len = set.interval_length(d);
        if set.gap_length(d + 1) >= len {
            return Err(CoreError::InvalidSchedule(format!(
                "level-{} gap does not fit inside its interval",
                d + 1
            )));
        }
    }
    Ok(set)
}

impl FatCantorSet {
    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn ratio(&self) -> &BigRational {
        &self.ratio
    }

    /// Length of the gap removed at level n ≥ 1 (exact).
    pub fn gap_length(&self, n: usize) -> BigRational {
        pow_rat(&self.ratio, n as u32)
    }

    /// Length of each of the 2^d surviving intervals after d rounds (exact).
    pub fn interval_length(&self, d: usize) -> BigRational {
        // (1 − Σ_{n≤d} 2^(n−1) r^n) / 2^d
        let residual = self.residual_measure(d);
        residual / BigRational::from_integer(BigInt::one() << d)
    }

    /// Exact measure of the depth-d cover: 1 − Σ_{n≤d} 2^(n−1) r^n.
    pub fn residual_measure(&self, d: usize) -> BigRational {
        let mut removed = BigRational::zero();
        let mut rn = BigRational::one();
        for n in 1..=d {
            rn *= &self.ratio;
            let count = BigRational::from_integer(BigInt::one() << (n - 1));
            removed += count * &rn;
        }
        BigRational::one() - removed
    }

    /// Exact measure of the limit set: 1 − r/(1 − 2r).
    pub fn limit_measure(&self) -> BigRational {
        let two_r = BigRational::from_integer(BigInt::from(2)) * &self.ratio;
        BigRational::one() - &self.ratio / (BigRational::one() - two_r)
    }

    /// All gaps removed up to `self.depth`, sorted by position (exact).
    ///
    /// Materializes 2^depth − 1 gaps; refused above the budget.
    pub fn gaps(&self) -> Result<Vec<(BigRational, BigRational)>, CoreError> {
        let count: u128 = (1u128 << self.depth) - 1;
        const BUDGET: u128 = 1 << 22;
        if count > BUDGET {
            return Err(CoreError::Budget {
                requested: count,
                budget: BUDGET,
            });
        }
        let mut out = Vec::with_capacity(count as usize);
        self.collect_gaps(&BigRational::zero(), 0, &mut out);
        Ok(out)
    }

    fn collect_gaps(
        &self,
        lo: &BigRational,
        level: usize,
        out: &mut Vec<(BigRational, BigRational)>,
    ) {
        if level >= self.depth {
            return;
        }
        let child = self.interval_length(level + 1);
        let gap = self.gap_length(level + 1);
        let gap_lo = lo + &child;
        let gap_hi = &gap_lo + &gap;
        self.collect_gaps(lo, level + 1, out);
        out.push((gap_lo, gap_hi.clone()));
        self.collect_gaps(&gap_hi, level + 1, out);
    }

    /// Gaps removed exactly at level n (2^(n−1) of them), sorted.
    pub fn gaps_at_level(&self, n: usize) -> Result<Vec<(BigRational, BigRational)>, CoreError> {
        if n == 0 || n > self.depth {
            return Err(CoreError::Domain(format!(
                "gap level {n} outside 1..={}",
                self.depth
            )));
        }
        let mut all = FatCantorSet {
            ratio: self.ratio.clone(),
            depth: n,
        }
        .gaps()?;
        let len = self.gap_length(n);
        all.retain(|(lo, hi)| &(hi - lo) == &len);
        Ok(all)
    }

    /// Whether z lies in the depth-d cover (exact descent).
    pub fn contains(&self, z: &BigRational, d: usize) -> bool {
        if z < &BigRational::zero() || z > &BigRational::one() {
            return false;
        }
        let mut lo = BigRational::zero();
        let mut level = 0usize;
        while level < d {
            let child = self.interval_length(level + 1);
            let gap = self.gap_length(level + 1);
            let gap_lo = &lo + &child;
            let gap_hi = &gap_lo + &gap;
            if z <= &gap_lo {
                // left child keeps lo
            } else if z >= &gap_hi {
                lo = gap_hi;
            } else {
                return false;
            }
            level += 1;
        }
        true
    }

    /// Exact measure of (depth-d cover) ∩ [0, z].
    pub fn cover_measure_below(&self, z: &BigRational, d: usize) -> BigRational {
        if z <= &BigRational::zero() {
            return BigRational::zero();
        }
        let one = BigRational::one();
        let z = if z > &one { &one } else { z };
        let mut acc = BigRational::zero();
        let mut lo = BigRational::zero();
        let mut level = 0usize;
        loop {
            if level == d {
                // fully covered interval: clip at z
                acc += z - &lo;
                return acc;
            }
            let child = self.interval_length(level + 1);
            let gap = self.gap_length(level + 1);
            let gap_lo = &lo + &child;
            let gap_hi = &gap_lo + &gap;
            if z <= &gap_lo {
                level += 1;
            } else if z < &gap_hi {
                // cover measure of the whole left child
                acc += self.cover_measure_of_subtree(level + 1, d);
                return acc;
            } else {
                acc += self.cover_measure_of_subtree(level + 1, d);
                lo = gap_hi;
                level += 1;
            }
        }
    }

    /// Cover measure (at final depth d) of one interval living at `level`.
    fn cover_measure_of_subtree(&self, level: usize, d: usize) -> BigRational {
        // interval length at `level` minus the gaps removed inside it
        let mut m = self.interval_length(level);
        let mut rn = pow_rat(&self.ratio, level as u32);
        for n in (level + 1)..=d {
            rn *= &self.ratio;
            let count = BigRational::from_integer(BigInt::one() << (n - level - 1));
            m -= count * &rn;
        }
        m
    }

    /// Gap list as JSON: array of [lo, hi] rationals rendered as strings.
    pub fn gaps_json(&self) -> Result<String, CoreError> {
        let gaps = self.gaps()?;
        let arr: Vec<[String; 2]> = gaps
            .iter()
            .map(|(lo, hi)| [lo.to_string(), hi.to_string()])
            .collect();
        serde_json::to_string(&arr).map_err(|e| CoreError::Domain(e.to_string()))
    }
}

/// Parses a JSON gap list produced by `gaps_json` back into rationals.
pub fn parse_gaps_json(json: &str) -> Result<Vec<(BigRational, BigRational)>, CoreError> {
    let arr: Vec<[String; 2]> =
        serde_json::from_str(json).map_err(|e| CoreError::Domain(e.to_string()))?;
    arr.into_iter()
        .map(|[lo, hi]| {
            let lo: BigRational = lo
                .parse()
                .map_err(|e| CoreError::Domain(format!("bad rational: {e}")))?;
            let hi: BigRational = hi
                .parse()
                .map_err(|e| CoreError::Domain(format!("bad rational: {e}")))?;
            if lo >= hi {
                return Err(CoreError::Domain(format!("empty gap [{lo}, {hi}]")));
            }
            Ok((lo, hi))
        })
        .collect()
}

fn pow_rat(r: &BigRational, n: u32) -> BigRational {
    let mut out = BigRational::one();
    for _ in 0..n {
        out *= r;
    }
    out
}

/// f64 view of the default-style set for hot paths; all gap endpoints of the
/// middle-4^(−n) set are dyadic with ≤ 2d+1 fractional bits, so the descent
/// is exact in binary64 up to depth ~25.
#[derive(Debug, Clone)]
pub struct FatCantorF64 {
    ratio: f64,
    depth: usize,
}

impl FatCantorF64 {
    pub fn new(set: &FatCantorSet) -> Self {
        FatCantorF64 {
            ratio: set.ratio.to_f64().unwrap(),
            depth: set.depth,
        }
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    fn interval_length(&self, d: usize) -> f64 {
        let mut len = 1.0_f64;
        let mut gap = 1.0_f64;
        for _ in 0..d {
            gap *= self.ratio;
            len = 0.5 * (len - gap);
        }
        len
    }

    /// Measure of (depth-d cover) ∩ [0, z], d = self.depth.
    pub fn cover_measure_below(&self, z: f64) -> f64 {
        if z <= 0.0 {
            return 0.0;
        }
        let z = z.min(1.0);
        let mut acc = 0.0;
        let mut lo = 0.0;
        let mut gap = 1.0;
        for level in 0..self.depth {
            let child = self.interval_length(level + 1);
            gap *= self.ratio;
            let gap_lo = lo + child;
            let gap_hi = gap_lo + gap;
            let sub = self.subtree_cover_measure(level + 1);
            if z <= gap_lo {
                // descend left
            } else if z < gap_hi {
                return acc + sub;
            } else {
                acc += sub;
                lo = gap_hi;
            }
        }
        acc + (z - lo)
    }

    fn subtree_cover_measure(&self, level: usize) -> f64 {
        let mut m = self.interval_length(level);
        let mut g = self.ratio.powi(level as i32);
        let mut count = 1.0;
        for _ in (level + 1)..=self.depth {
            g *= self.ratio;
            m -= count * g;
            count *= 2.0;
        }
        m
    }

    /// The gap (lo, hi) containing z in the depth-truncated set, if any.
    pub fn gap_containing(&self, z: f64) -> Option<(f64, f64, usize)> {
        if !(0.0..=1.0).contains(&z) {
            return None;
        }
        let mut lo = 0.0;
        let mut gap = 1.0;
        for level in 0..self.depth {
            let child = self.interval_length(level + 1);
            gap *= self.ratio;
            let gap_lo = lo + child;
            let gap_hi = gap_lo + gap;
            if z <= gap_lo {
                // left child
            } else if z < gap_hi {
                return Some((gap_lo, gap_hi, level + 1));
            } else {
                lo = gap_hi;
            }
        }
        None
    }
}
