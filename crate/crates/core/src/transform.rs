//! Exponential time rescaling between dissipative and non-dissipative runs.
//!
//! With `τ(t) = (1 - e^{-pλt}) / (pλ)`, a non-dissipative solution `u`
//! evaluated at `τ(t)` and multiplied by `e^{-λt}` is the weakly
//! dissipative solution with the same initial data. `p = 1` for the
//! b-family systems, `p = 2` for the Novikov equation.

use serde::{Deserialize, Serialize};

use crate::equations::TwoComponentState;
use crate::error::{Error, Result};
use crate::field::SpectralField;
use crate::scalar::Real;

/// Dissipation rate and rescaling order of a time map.
///
/// `λ = 0` is accepted and yields the identity map, so the non-dissipative
/// system is the `λ → 0` member of the same interface.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeMapParams<T> {
    lambda: T,
    order: u8,
}

/// `(1 - e^{-x}) / x`, accurate for small `x`.
#[inline]
fn relative_expm1<T: Real>(x: T) -> T {
    if x == T::zero() {
        T::one()
    } else {
        -(-x).exp_m1() / x
    }
}

impl<T: Real> TimeMapParams<T> {
    pub fn new(lambda: T, order: u8) -> Result<Self> {
        if !(lambda >= T::zero()) || !lambda.is_finite() {
            return Err(Error::InvalidParameter {
                name: "lambda",
                reason: format!("must be finite and >= 0, got {lambda}"),
            });
        }
        if !(1..=2).contains(&order) {
            return Err(Error::InvalidParameter {
                name: "order",
                reason: format!("must be 1 or 2, got {order}"),
            });
        }
        Ok(Self { lambda, order })
    }

    #[inline]
    pub fn lambda(&self) -> T {
        self.lambda
    }

    #[inline]
    pub fn order(&self) -> u8 {
        self.order
    }

    /// `pλ`.
    #[inline]
    fn rate(&self) -> T {
        T::from_usize_lossy(self.order as usize) * self.lambda
    }

    /// Supremum of `τ`, `1 / (pλ)` (infinite for `λ = 0`).
    pub fn horizon(&self) -> T {
        if self.lambda == T::zero() {
            T::infinity()
        } else {
            T::one() / self.rate()
        }
    }

    /// `τ(t) = (1 - e^{-pλt}) / (pλ)`.
    pub fn tau(&self, t: T) -> T {
        let rate = self.rate();
        if rate == T::zero() {
            return t;
        }
        if t == T::infinity() {
            return self.horizon();
        }
        let x = rate * t;
        if x < T::one() {
            t * relative_expm1(x)
        } else {
            // Monotone and bounded by the horizon once saturated.
            -(-x).exp_m1() / rate
        }
    }

    /// `-ln(1 - pλ s) / (pλ)` for `0 <= s < 1/(pλ)`.
    pub fn tau_inverse(&self, s: T) -> Result<T> {
        let rate = self.rate();
        let limit = self.horizon();
        if !(s >= T::zero()) || !(s < limit) {
            return Err(Error::OutOfRange { s: s.to_f64_lossy(), limit: limit.to_f64_lossy() });
        }
        if rate == T::zero() {
            return Ok(s);
        }
        Ok(-(-rate * s).ln_1p() / rate)
    }

    /// `dτ/dt = e^{-pλt}`.
    pub fn tau_rate(&self, t: T) -> T {
        (-self.rate() * t).exp()
    }

    /// Amplitude factor `e^{-λt}` (the same for both orders).
    pub fn prefactor(&self, t: T) -> T {
        (-self.lambda * t).exp()
    }

    /// Scales a non-dissipative field sampled at `τ(t)` into the
    /// dissipative field at `t`.
    pub fn map_field(&self, u_at_tau: &SpectralField<T>, t: T) -> SpectralField<T> {
        if t == T::zero() {
            return u_at_tau.clone();
        }
        u_at_tau.scaled(self.prefactor(t))
    }

    /// [`map_field`](Self::map_field) applied to both components.
    pub fn map_solution(&self, u_at_tau: &TwoComponentState<T>, t: T) -> TwoComponentState<T> {
        TwoComponentState { m: self.map_field(&u_at_tau.m, t), sigma: self.map_field(&u_at_tau.sigma, t) }
    }

    /// Dissipative lifespan implied by a non-dissipative lifespan `s`.
    ///
    /// Infinite when `s >= 1/(pλ)`; otherwise `tau_inverse(s)`.
    pub fn existence_time(&self, s: T) -> Result<T> {
        if !(s > T::zero()) {
            return Err(Error::InvalidParameter {
                name: "existence time",
                reason: format!("must be positive, got {s}"),
            });
        }
        if s >= self.horizon() {
            return Ok(T::infinity());
        }
        self.tau_inverse(s)
    }
}

/// Free-function form of [`TimeMapParams::tau`].
pub fn tau<T: Real>(t: T, params: &TimeMapParams<T>) -> T {
    params.tau(t)
}

/// Free-function form of [`TimeMapParams::tau_inverse`].
pub fn tau_inverse<T: Real>(s: T, params: &TimeMapParams<T>) -> Result<T> {
    params.tau_inverse(s)
}

/// Dissipative lifespan for a non-dissipative lifespan `s` (may be infinite).
pub fn existence_time<T: Real>(s: T, lambda: T, order: u8) -> Result<T> {
    TimeMapParams::new(lambda, order)?.existence_time(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(lambda: f64, order: u8) -> TimeMapParams<f64> {
        TimeMapParams::new(lambda, order).unwrap()
    }

    #[test]
    fn tau_examples() {
        let p = params(1.0, 1);
        assert_eq!(p.tau(0.0), 0.0);
        assert!((p.tau(60.0) - 1.0).abs() <= 1e-15);
        assert_eq!(p.tau(f64::INFINITY), 1.0);
        let tiny = params(1e-8, 1);
        assert!((tiny.tau(2.0) - 2.0).abs() <= 1e-7);
    }

    #[test]
    fn tau_inverse_examples() {
        for &lambda in &[0.1, 1.0] {
            for order in 1..=2 {
                let p = params(lambda, order);
                assert_eq!(p.tau_inverse(0.0).unwrap(), 0.0);
                for &t in &[0.1, 1.0, 10.0] {
                    let back = p.tau_inverse(p.tau(t)).unwrap();
                    // τ(t) sits e^{-pλt}/(pλ) below the horizon, so the
                    // inverse amplifies one ulp of τ by about e^{pλt}.
                    let conditioning = 8.0 * f64::EPSILON * (order as f64 * lambda * t).exp();
                    let tol = 1e-12_f64.max(conditioning);
                    assert!((back - t).abs() <= tol * t, "{lambda} {order} {t} {back}");
                }
                let limit = 1.0 / (order as f64 * lambda);
                assert!(matches!(p.tau_inverse(limit), Err(Error::OutOfRange { .. })));
                assert!(p.tau_inverse(-1e-3).is_err());
            }
        }
    }

    #[test]
    fn forward_round_trip() {
        for &lambda in &[0.1, 1.0] {
            for order in 1..=2 {
                let p = params(lambda, order);
                for frac in [0.0, 0.1, 0.5, 0.9, 0.999] {
                    let s = frac * p.horizon();
                    let back = p.tau(p.tau_inverse(s).unwrap());
                    assert!((back - s).abs() <= 1e-12 * s.max(1e-300), "{s} {back}");
                }
            }
        }
    }

    #[test]
    fn map_solution_examples() {
        let p = params(1.0, 1);
        let u = SpectralField::new(vec![0.3, -1.2, 4.0]).unwrap();
        assert_eq!(p.map_field(&u, 0.0), u);
        let c = SpectralField::constant(4, 2.0);
        let mapped = p.map_field(&c, 1.0);
        assert!(mapped.iter().all(|&x| (x - 2.0 * (-1.0f64).exp()).abs() <= 1e-15));
        let p2 = params(0.5, 2);
        assert_eq!(p2.prefactor(2.0), (-1.0f64).exp());
    }

    #[test]
    fn existence_time_examples() {
        assert_eq!(existence_time(f64::INFINITY, 1.0, 1).unwrap(), f64::INFINITY);
        assert_eq!(existence_time(1.0, 1.0, 1).unwrap(), f64::INFINITY);
        let t = existence_time(0.5, 1.0, 1).unwrap();
        assert!((t - 0.5f64.ln().abs()).abs() <= 1e-15);
        assert!((t - std::f64::consts::LN_2).abs() <= 1e-6);
        assert!(existence_time(0.0, 1.0, 1).is_err());
    }

    #[test]
    fn zero_lambda_is_identity() {
        let p = params(0.0, 1);
        assert_eq!(p.tau(3.5), 3.5);
        assert_eq!(p.tau_inverse(3.5).unwrap(), 3.5);
        assert_eq!(p.prefactor(3.5), 1.0);
        assert_eq!(p.existence_time(2.0).unwrap(), 2.0);
    }

    #[test]
    fn rejects_bad_params() {
        assert!(TimeMapParams::new(-1.0, 1).is_err());
        assert!(TimeMapParams::new(1.0, 0).is_err());
        assert!(TimeMapParams::new(1.0, 3).is_err());
    }
}
