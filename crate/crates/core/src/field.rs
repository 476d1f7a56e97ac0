use std::ops::{Add, Index, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::PeriodicGrid;
use crate::scalar::Real;

/// Real samples of a periodic function at the nodes of a [`PeriodicGrid`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SpectralField<T> {
    values: Vec<T>,
}

impl<T: Real> SpectralField<T> {
    /// Wraps samples, rejecting NaN and infinities.
    pub fn new(values: Vec<T>) -> Result<Self> {
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        Ok(Self { values })
    }

    /// Wraps samples and checks them against `grid`.
    pub fn on_grid(grid: &PeriodicGrid<T>, values: Vec<T>) -> Result<Self> {
        if values.len() != grid.n() {
            return Err(Error::LengthMismatch { expected: grid.n(), got: values.len() });
        }
        Self::new(values)
    }

    pub(crate) fn from_vec_unchecked(values: Vec<T>) -> Self {
        Self { values }
    }

    pub fn from_fn(grid: &PeriodicGrid<T>, f: impl Fn(T) -> T) -> Self {
        Self { values: grid.nodes().into_iter().map(f).collect() }
    }

    pub fn constant(n: usize, value: T) -> Self {
        Self { values: vec![value; n] }
    }

    pub fn zeros(n: usize) -> Self {
        Self::constant(n, T::zero())
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.values.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    #[inline]
    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn into_values(self) -> Vec<T> {
        self.values
    }

    pub fn iter(&self) -> std::slice::Iter<'_, T> {
        self.values.iter()
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    pub fn max_abs(&self) -> T {
        self.values.iter().fold(T::zero(), |acc, v| acc.max(v.abs()))
    }

    /// Discrete L2 norm `sqrt(sum f_j^2 dx)`.
    pub fn l2_norm(&self, dx: T) -> T {
        (self.values.iter().fold(T::zero(), |acc, &v| acc + v * v) * dx).sqrt()
    }

    /// Trapezoidal integral over one period, `sum f_j dx`.
    pub fn integral(&self, dx: T) -> T {
        self.values.iter().fold(T::zero(), |acc, &v| acc + v) * dx
    }

    pub fn map(&self, f: impl Fn(T) -> T) -> Self {
        Self { values: self.values.iter().map(|&v| f(v)).collect() }
    }

    pub fn zip_map(&self, other: &Self, f: impl Fn(T, T) -> T) -> Self {
        debug_assert_eq!(self.len(), other.len());
        Self { values: self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect() }
    }

    pub fn scaled(&self, factor: T) -> Self {
        self.map(|v| v * factor)
    }

    /// `self + factor * other`.
    pub fn add_scaled(&self, factor: T, other: &Self) -> Self {
        self.zip_map(other, |a, b| a + factor * b)
    }
}

impl<T> Index<usize> for SpectralField<T> {
    type Output = T;
    fn index(&self, index: usize) -> &T {
        &self.values[index]
    }
}

impl<T: Real> Add for &SpectralField<T> {
    type Output = SpectralField<T>;
    fn add(self, rhs: Self) -> SpectralField<T> {
        self.zip_map(rhs, |a, b| a + b)
    }
}

impl<T: Real> Sub for &SpectralField<T> {
    type Output = SpectralField<T>;
    fn sub(self, rhs: Self) -> SpectralField<T> {
        self.zip_map(rhs, |a, b| a - b)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_non_finite() {
        assert_eq!(
            SpectralField::new(vec![0.0, f64::NAN]).unwrap_err(),
            Error::NonFinite { index: 1 }
        );
        assert!(SpectralField::new(vec![1.0, f64::INFINITY]).is_err());
    }

    #[test]
    fn norms() {
        let f = SpectralField::new(vec![3.0_f64, -4.0]).unwrap();
        assert_eq!(f.max_abs(), 4.0);
        assert_eq!(f.l2_norm(1.0), 5.0);
        assert_eq!(f.integral(0.5), -0.5);
    }

    #[test]
    fn grid_length_is_checked() {
        let g = PeriodicGrid::<f64>::unit(16).unwrap();
        assert!(SpectralField::on_grid(&g, vec![0.0; 15]).is_err());
        assert!(SpectralField::on_grid(&g, vec![0.0; 16]).is_ok());
    }
}
