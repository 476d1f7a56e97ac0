//! Truncated trigonometric series used as resolution-independent initial
//! data.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::SpectralField;
use crate::grid::PeriodicGrid;
use crate::scalar::Real;

/// `c0 + Σ_k a_k cos(2πkx/L) + b_k sin(2πkx/L)`, `k = 1, 2, ...`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrigSeries<T> {
    pub mean: T,
    pub cos: Vec<T>,
    pub sin: Vec<T>,
}

impl<T: Real> TrigSeries<T> {
    pub fn new(mean: T, cos: Vec<T>, sin: Vec<T>) -> Result<Self> {
        let all_finite = mean.is_finite() && cos.iter().chain(&sin).all(|c| c.is_finite());
        if !all_finite {
            return Err(Error::InvalidParameter { name: "coefficients", reason: "must be finite".into() });
        }
        Ok(Self { mean, cos, sin })
    }

    pub fn constant(c: T) -> Self {
        Self { mean: c, cos: Vec::new(), sin: Vec::new() }
    }

    /// `sin(2πx/L) + 0.5 cos(4πx/L)`.
    pub fn smooth() -> Self {
        Self { mean: T::zero(), cos: vec![T::zero(), T::c(0.5)], sin: vec![T::one()] }
    }

    /// Highest wavenumber with a nonzero coefficient.
    pub fn bandwidth(&self) -> usize {
        let last = |c: &[T]| c.iter().rposition(|&x| x != T::zero()).map_or(0, |i| i + 1);
        last(&self.cos).max(last(&self.sin))
    }

    pub fn eval(&self, x: T, length: T) -> T {
        let base = T::TAU() * x / length;
        let terms = self.cos.len().max(self.sin.len());
        (0..terms).fold(self.mean, |acc, i| {
            let (s, c) = (T::from_usize_lossy(i + 1) * base).sin_cos();
            let a = self.cos.get(i).copied().unwrap_or_else(T::zero);
            let b = self.sin.get(i).copied().unwrap_or_else(T::zero);
            acc + a * c + b * s
        })
    }

    pub fn sample(&self, grid: &PeriodicGrid<T>) -> SpectralField<T> {
        let length = grid.length();
        SpectralField::from_fn(grid, |x| self.eval(x, length))
    }

    /// Exact derivative on a period of length `length`.
    pub fn derivative(&self, length: T) -> Self {
        let w = T::TAU() / length;
        let terms = self.cos.len().max(self.sin.len());
        let mut cos = Vec::with_capacity(terms);
        let mut sin = Vec::with_capacity(terms);
        for i in 0..terms {
            let k = T::from_usize_lossy(i + 1) * w;
            let a = self.cos.get(i).copied().unwrap_or_else(T::zero);
            let b = self.sin.get(i).copied().unwrap_or_else(T::zero);
            cos.push(k * b);
            sin.push(-k * a);
        }
        Self { mean: T::zero(), cos, sin }
    }

    pub fn scaled(&self, factor: T) -> Self {
        Self {
            mean: self.mean * factor,
            cos: self.cos.iter().map(|&c| c * factor).collect(),
            sin: self.sin.iter().map(|&c| c * factor).collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn smooth_preset_values() {
        let s = TrigSeries::<f64>::smooth();
        assert!((s.eval(0.0, 1.0) - 0.5).abs() <= 1e-15);
        assert!((s.eval(0.25, 1.0) - 0.5).abs() <= 1e-15);
        assert_eq!(s.bandwidth(), 2);
    }

    #[test]
    fn derivative_matches_spectral() {
        let g = PeriodicGrid::new(64, 3.0).unwrap();
        let s = TrigSeries::new(0.3, vec![0.2, -1.0, 0.0, 0.4], vec![1.0, 0.0, 0.7]).unwrap();
        let ops = crate::spectral::SpectralOps::new(g);
        let d = ops.dx(&s.sample(&g));
        let exact = s.derivative(3.0).sample(&g);
        assert!((&d - &exact).max_abs() <= 1e-12);
    }

    #[test]
    fn rejects_non_finite() {
        assert!(TrigSeries::new(f64::NAN, vec![], vec![]).is_err());
    }
}
