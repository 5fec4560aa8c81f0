//! Right-continuous piecewise-affine paths on `[0, 1]`.
//!
//! Every process the tests work with has the form `f(s) = level_j - slope * s`
//! on `[t_j, t_{j+1})`, with a common slope. Sup norms and squared integrals
//! of such paths are computed exactly from segment endpoints.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PiecewisePath {
    /// Left endpoints of the segments; `knots[0] == 0`, strictly increasing, all `<= 1`.
    knots: Vec<f64>,
    levels: Vec<f64>,
    slope: f64,
}

impl PiecewisePath {
    pub(crate) fn new(knots: Vec<f64>, levels: Vec<f64>, slope: f64) -> Self {
        debug_assert_eq!(knots.len(), levels.len());
        debug_assert!(!knots.is_empty() && knots[0] == 0.0);
        debug_assert!(knots.windows(2).all(|w| w[0] < w[1]));
        PiecewisePath {
            knots,
            levels,
            slope,
        }
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    pub fn levels(&self) -> &[f64] {
        &self.levels
    }

    pub fn slope(&self) -> f64 {
        self.slope
    }

    /// Value at `s`; `s` is clamped to `[0, 1]`.
    pub fn value(&self, s: f64) -> f64 {
        let s = s.clamp(0.0, 1.0);
        let j = self.knots.partition_point(|&t| t <= s) - 1;
        self.levels[j] - self.slope * s
    }

    fn segment_end(&self, j: usize) -> f64 {
        self.knots.get(j + 1).copied().unwrap_or(1.0)
    }

    /// `sup_{s ∈ [0,1]} |f(s)|`, including left limits at every jump.
    pub fn sup_abs(&self) -> f64 {
        let mut best = 0.0f64;
        for (j, (&t, &level)) in self.knots.iter().zip(&self.levels).enumerate() {
            let end = self.segment_end(j);
            best = best
                .max((level - self.slope * t).abs())
                .max((level - self.slope * end).abs());
        }
        best
    }

    /// `∫_0^1 f(s)^2 ds`, integrated segment by segment in closed form.
    pub fn l2(&self) -> f64 {
        let mut total = 0.0;
        for (j, (&a, &level)) in self.knots.iter().zip(&self.levels).enumerate() {
            let b = self.segment_end(j);
            if b <= a {
                continue;
            }
            total += if self.slope == 0.0 {
                level * level * (b - a)
            } else {
                let (fa, fb) = (level - self.slope * a, level - self.slope * b);
                (fa.powi(3) - fb.powi(3)) / (3.0 * self.slope)
            };
        }
        total
    }

    /// Pointwise difference of two paths sharing the same knots.
    pub fn difference(&self, other: &PiecewisePath) -> PiecewisePath {
        assert_eq!(self.knots, other.knots, "paths must share knots");
        PiecewisePath {
            knots: self.knots.clone(),
            levels: self
                .levels
                .iter()
                .zip(&other.levels)
                .map(|(a, b)| a - b)
                .collect(),
            slope: self.slope - other.slope,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn affine_and_step_pieces() {
        // f = -s on [0, .5), 1 - s on [.5, 1]
        let p = PiecewisePath::new(vec![0.0, 0.5], vec![0.0, 1.0], 1.0);
        assert!((p.sup_abs() - 0.5).abs() < 1e-15);
        assert!((p.l2() - 1.0 / 12.0).abs() < 1e-15);
        assert_eq!(p.value(0.25), -0.25);
        assert_eq!(p.value(0.5), 0.5);
        assert_eq!(p.value(1.0), 0.0);

        let step = PiecewisePath::new(vec![0.0, 0.25, 1.0], vec![0.0, 2.0, -3.0], 0.0);
        assert_eq!(step.sup_abs(), 3.0);
        assert!((step.l2() - 3.0).abs() < 1e-15);
    }

    #[test]
    fn difference_subtracts_levels_and_slopes() {
        let a = PiecewisePath::new(vec![0.0, 0.5], vec![1.0, 2.0], 1.0);
        let b = PiecewisePath::new(vec![0.0, 0.5], vec![0.5, 0.5], 0.0);
        let d = a.difference(&b);
        assert_eq!(d.levels(), &[0.5, 1.5]);
        assert_eq!(d.slope(), 1.0);
    }
}
