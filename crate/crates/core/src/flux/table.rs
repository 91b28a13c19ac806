//! Monotone piecewise-cubic (Fritsch–Carlson style) interpolation tables.
//!
//! Used to tabulate the Cantor-inverse flux: node slopes are harmonic means
//! of adjacent secants, which keeps the Hermite interpolant monotone whenever
//! the data are.

/// Monotone cubic-Hermite table over strictly increasing nodes.
#[derive(Debug, Clone)]
pub struct MonotoneTable {
    xs: Vec<f64>,
    ys: Vec<f64>,
    slopes: Vec<f64>,
}

impl MonotoneTable {
    /// Builds the table; `xs` strictly increasing, `ys` monotone.
    pub fn new(xs: Vec<f64>, ys: Vec<f64>) -> Self {
        assert!(xs.len() >= 2 && xs.len() == ys.len());
        assert!(xs.windows(2).all(|w| w[0] < w[1]), "nodes must increase");
        let n = xs.len();
        let mut secants = Vec::with_capacity(n - 1);
        for i in 0..n - 1 {
            secants.push((ys[i + 1] - ys[i]) / (xs[i + 1] - xs[i]));
        }
        let mut slopes = vec![0.0; n];
        slopes[0] = secants[0];
        slopes[n - 1] = secants[n - 2];
        for i in 1..n - 1 {
            let (s0, s1) = (secants[i - 1], secants[i]);
            slopes[i] = if s0 * s1 <= 0.0 {
                0.0
            } else {
                2.0 * s0 * s1 / (s0 + s1) // harmonic mean ≤ 2·min: monotone
            };
        }
        MonotoneTable { xs, ys, slopes }
    }

    /// Builds the table with caller-supplied node slopes (e.g. exact
    /// derivatives), clamped into the monotone region [0, 3·adjacent secant]
    /// (sign-adjusted) so the interpolant stays monotone.
    pub fn with_slopes(xs: Vec<f64>, ys: Vec<f64>, slopes: Vec<f64>) -> Self {
        assert!(xs.len() >= 2 && xs.len() == ys.len() && ys.len() == slopes.len());
        assert!(xs.windows(2).all(|w| w[0] < w[1]), "nodes must increase");
        let n = xs.len();
        let mut secants = Vec::with_capacity(n - 1);
        for i in 0..n - 1 {
            secants.push((ys[i + 1] - ys[i]) / (xs[i + 1] - xs[i]));
        }
        let mut clamped = slopes;
        for (i, m) in clamped.iter_mut().enumerate() {
            let s_left = if i > 0 { secants[i - 1] } else { secants[0] };
            let s_right = if i < n - 1 {
                secants[i]
            } else {
                secants[n - 2]
            };
            let cap = 3.0 * s_left.abs().min(s_right.abs());
            if s_left * s_right < 0.0 || (s_left == 0.0 && s_right == 0.0) {
                *m = 0.0;
            } else {
                let sign = if s_left + s_right >= 0.0 { 1.0 } else { -1.0 };
                *m = sign * (*m * sign).clamp(0.0, cap);
            }
        }
        MonotoneTable {
            xs,
            ys,
            slopes: clamped,
        }
    }

    pub fn x_range(&self) -> (f64, f64) {
        (self.xs[0], *self.xs.last().unwrap())
    }

    pub fn y_range(&self) -> (f64, f64) {
        (self.ys[0], *self.ys.last().unwrap())
    }

    fn segment(&self, x: f64) -> usize {
        match self.xs.binary_search_by(|v| v.partial_cmp(&x).unwrap()) {
            Ok(i) => i.min(self.xs.len() - 2),
            Err(i) => i.saturating_sub(1).min(self.xs.len() - 2),
        }
    }

    /// Hermite evaluation; clamps outside the node range.
    pub fn eval(&self, x: f64) -> f64 {
        let (lo, hi) = self.x_range();
        if x <= lo {
            return self.ys[0];
        }
        if x >= hi {
            return *self.ys.last().unwrap();
        }
        let i = self.segment(x);
        let h = self.xs[i + 1] - self.xs[i];
        let t = (x - self.xs[i]) / h;
        let (y0, y1) = (self.ys[i], self.ys[i + 1]);
        let (m0, m1) = (self.slopes[i] * h, self.slopes[i + 1] * h);
        let t2 = t * t;
        let t3 = t2 * t;
        y0 * (2.0 * t3 - 3.0 * t2 + 1.0)
            + m0 * (t3 - 2.0 * t2 + t)
            + y1 * (-2.0 * t3 + 3.0 * t2)
            + m1 * (t3 - t2)
    }

    /// Monotone inversion by bisection inside the bracketing segment.
    /// Requires nondecreasing table values.
    pub fn invert(&self, y: f64) -> f64 {
        let (ylo, yhi) = self.y_range();
        if y <= ylo {
            return self.xs[0];
        }
        if y >= yhi {
            return *self.xs.last().unwrap();
        }
        let i = match self
            .ys
            .binary_search_by(|v| v.partial_cmp(&y).unwrap())
        {
            Ok(i) => return self.xs[i],
            Err(i) => i - 1,
        };
        let (mut a, mut b) = (self.xs[i], self.xs[i + 1]);
        for _ in 0..70 {
            let m = 0.5 * (a + b);
            if m <= a || m >= b {
                break;
            }
            if self.eval(m) < y {
                a = m;
            } else {
                b = m;
            }
        }
        0.5 * (a + b)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interpolates_nodes_and_stays_monotone() {
        let xs: Vec<f64> = (0..=32).map(|k| k as f64 / 32.0).collect();
        let ys: Vec<f64> = xs.iter().map(|&x| x * x * (3.0 - 2.0 * x)).collect();
        let t = MonotoneTable::new(xs.clone(), ys.clone());
        for (x, y) in xs.iter().zip(&ys) {
            assert!((t.eval(*x) - y).abs() < 1e-14);
        }
        let grid: Vec<f64> = (0..=1000).map(|k| k as f64 / 1000.0).collect();
        for w in grid.windows(2) {
            assert!(t.eval(w[1]) >= t.eval(w[0]) - 1e-15);
        }
    }

    #[test]
    fn inversion_roundtrip() {
        let xs: Vec<f64> = (0..=64).map(|k| -2.0 + k as f64 / 16.0).collect();
        let ys: Vec<f64> = xs.iter().map(|&x| x + 0.1 * x.powi(3)).collect();
        let t = MonotoneTable::new(xs, ys);
        for k in 0..50 {
            let y = -2.5 + k as f64 / 10.0;
            let x = t.invert(y);
            assert!((t.eval(x) - y).abs() < 1e-10, "bad roundtrip at y={y}");
        }
    }

    #[test]
    fn flat_plateau_handled() {
        let xs = vec![0.0, 1.0, 2.0, 3.0];
        let ys = vec![0.0, 1.0, 1.0, 2.0];
        let t = MonotoneTable::new(xs, ys);
        // interpolant is constant on the plateau segment
        assert!((t.eval(1.5) - 1.0).abs() < 1e-14);
        let x = t.invert(1.0);
        assert!((t.eval(x) - 1.0).abs() < 1e-12);
    }
}
