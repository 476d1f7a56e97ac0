use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Uniform discretization of a circle of circumference `length` with `n`
/// nodes at `x_j = j * length / n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PeriodicGrid<T> {
    n: usize,
    length: T,
}

impl<T: Real> PeriodicGrid<T> {
    pub const MIN_NODES: usize = 16;

    pub fn new(n: usize, length: T) -> Result<Self> {
        if n < Self::MIN_NODES || !n.is_multiple_of(2) {
            return Err(Error::InvalidGrid(format!(
                "node count must be even and at least {}, got {n}",
                Self::MIN_NODES
            )));
        }
        if !(length > T::zero()) || !length.is_finite() {
            return Err(Error::InvalidGrid(format!(
                "length must be positive and finite, got {length}"
            )));
        }
        Ok(Self { n, length })
    }

    /// The unit circle `R/Z`.
    pub fn unit(n: usize) -> Result<Self> {
        Self::new(n, T::one())
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn length(&self) -> T {
        self.length
    }

    #[inline]
    pub fn dx(&self) -> T {
        self.length / T::from_usize_lossy(self.n)
    }

    #[inline]
    pub fn node(&self, j: usize) -> T {
        T::from_usize_lossy(j) * self.length / T::from_usize_lossy(self.n)
    }

    pub fn nodes(&self) -> Vec<T> {
        (0..self.n).map(|j| self.node(j)).collect()
    }

    /// Physical wavenumber `2 pi k / L` of integer mode `k`.
    #[inline]
    pub fn wavenumber(&self, k: usize) -> T {
        T::TAU() * T::from_usize_lossy(k) / self.length
    }

    /// Number of half-spectrum coefficients of a real transform.
    #[inline]
    pub fn spectrum_len(&self) -> usize {
        self.n / 2 + 1
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_odd_and_small() {
        assert!(PeriodicGrid::<f64>::new(15, 1.0).is_err());
        assert!(PeriodicGrid::<f64>::new(14, 1.0).is_err());
        assert!(PeriodicGrid::<f64>::new(17, 1.0).is_err());
        assert!(PeriodicGrid::<f64>::new(16, 0.0).is_err());
        assert!(PeriodicGrid::<f64>::new(16, -1.0).is_err());
        assert!(PeriodicGrid::<f64>::new(16, f64::INFINITY).is_err());
        assert!(PeriodicGrid::<f64>::new(16, 1.0).is_ok());
    }

    #[test]
    fn spacing_is_exact() {
        let g = PeriodicGrid::new(64, 2.0_f64).unwrap();
        assert_eq!(g.dx(), 2.0 / 64.0);
        assert_eq!(g.node(0), 0.0);
        assert_eq!(g.node(32), 1.0);
        assert_eq!(g.nodes().len(), 64);
    }
}
