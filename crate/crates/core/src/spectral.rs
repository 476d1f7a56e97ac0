//! Fourier pseudospectral operators on a [`PeriodicGrid`].
//!
//! Everything here works on the real-to-complex half spectrum. The Nyquist
//! coefficient of odd-order derivatives is zeroed so that odd derivatives
//! stay real and antisymmetric.

use std::fmt;
use std::sync::Arc;

use realfft::num_complex::Complex;
use realfft::{ComplexToReal, RealFftPlanner, RealToComplex};

use crate::error::{Error, Result};
use crate::field::SpectralField;
use crate::grid::PeriodicGrid;
use crate::scalar::Real;

/// Largest |mean(m)| accepted by [`SpectralOps::neg_laplacian_inverse`],
/// relative to `max(1, |m|_inf)`.
pub const MEAN_COMPATIBILITY_TOL: f64 = 1e-10;

/// FFT plans and wavenumbers for one grid.
///
/// Cheap to clone; the plans are shared. All methods take `&self` and
/// allocate their own scratch, so a single instance can be used from many
/// threads at once.
#[derive(Clone)]
pub struct SpectralOps<T: Real> {
    grid: PeriodicGrid<T>,
    forward: Arc<dyn RealToComplex<T>>,
    inverse: Arc<dyn ComplexToReal<T>>,
    wavenumbers: Vec<T>,
    dealias_products: bool,
}

impl<T: Real> fmt::Debug for SpectralOps<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SpectralOps")
            .field("grid", &self.grid)
            .field("dealias_products", &self.dealias_products)
            .finish()
    }
}

impl<T: Real> SpectralOps<T> {
    pub fn new(grid: PeriodicGrid<T>) -> Self {
        let mut planner = RealFftPlanner::<T>::new();
        let forward = planner.plan_fft_forward(grid.n());
        let inverse = planner.plan_fft_inverse(grid.n());
        let wavenumbers = (0..grid.spectrum_len()).map(|k| grid.wavenumber(k)).collect();
        Self { grid, forward, inverse, wavenumbers, dealias_products: true }
    }

    /// Whether nonlinear products formed by the equation right-hand sides
    /// are truncated with the two-thirds rule (on by default).
    pub fn with_product_dealiasing(mut self, enabled: bool) -> Self {
        self.dealias_products = enabled;
        self
    }

    pub fn dealias_products(&self) -> bool {
        self.dealias_products
    }

    #[inline]
    pub fn grid(&self) -> &PeriodicGrid<T> {
        &self.grid
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.grid.n()
    }

    fn nyquist(&self) -> usize {
        self.grid.n() / 2
    }

    /// Forward transform (unnormalized).
    pub fn spectrum(&self, values: &[T]) -> Vec<Complex<T>> {
        assert_eq!(values.len(), self.n(), "field length does not match grid");
        let mut input = values.to_vec();
        let mut output = self.forward.make_output_vec();
        self.forward
            .process(&mut input, &mut output)
            .expect("forward transform buffers sized by plan");
        output
    }

    /// Inverse transform including the `1/n` normalization.
    pub fn synthesize(&self, mut spectrum: Vec<Complex<T>>) -> Vec<T> {
        let last = spectrum.len() - 1;
        spectrum[0].im = T::zero();
        spectrum[last].im = T::zero();
        let mut output = self.inverse.make_output_vec();
        self.inverse
            .process(&mut spectrum, &mut output)
            .expect("inverse transform buffers sized by plan");
        let scale = T::one() / T::from_usize_lossy(self.n());
        for v in &mut output {
            *v = *v * scale;
        }
        output
    }

    fn filtered(&self, f: &SpectralField<T>, mut apply: impl FnMut(usize, Complex<T>) -> Complex<T>) -> SpectralField<T> {
        let mut spec = self.spectrum(f.values());
        for (k, c) in spec.iter_mut().enumerate() {
            *c = apply(k, *c);
        }
        SpectralField::from_vec_unchecked(self.synthesize(spec))
    }

    /// Multiplies a half spectrum by `(i k)^order` in place.
    pub(crate) fn differentiate_spectrum(&self, spec: &mut [Complex<T>], order: u32) {
        let nyq = self.nyquist();
        for (k, c) in spec.iter_mut().enumerate() {
            let kp = self.wavenumbers[k];
            *c = match order % 4 {
                0 => *c * kp.powi(order as i32),
                1 => Complex::new(-c.im, c.re) * kp.powi(order as i32),
                2 => -*c * kp.powi(order as i32),
                _ => Complex::new(c.im, -c.re) * kp.powi(order as i32),
            };
            if order % 2 == 1 && k == nyq {
                *c = Complex::new(T::zero(), T::zero());
            }
        }
    }

    /// Derivative of the trigonometric interpolant of `f`.
    pub fn derivative(&self, f: &SpectralField<T>, order: u32) -> Result<SpectralField<T>> {
        if !(1..=3).contains(&order) {
            return Err(Error::UnsupportedOrder(order));
        }
        Ok(self.derivative_unchecked(f, order))
    }

    pub(crate) fn derivative_unchecked(&self, f: &SpectralField<T>, order: u32) -> SpectralField<T> {
        let mut spec = self.spectrum(f.values());
        self.differentiate_spectrum(&mut spec, order);
        SpectralField::from_vec_unchecked(self.synthesize(spec))
    }

    /// First derivative.
    pub fn dx(&self, f: &SpectralField<T>) -> SpectralField<T> {
        self.derivative_unchecked(f, 1)
    }

    /// Domain average `(1/L) sum f_j dx`.
    pub fn mean(&self, f: &SpectralField<T>) -> T {
        f.iter().fold(T::zero(), |acc, &v| acc + v) / T::from_usize_lossy(f.len())
    }

    /// Solves `v - v_xx = m`.
    pub fn helmholtz_inverse(&self, m: &SpectralField<T>) -> SpectralField<T> {
        self.filtered(m, |k, c| {
            let kp = self.wavenumbers[k];
            c / (T::one() + kp * kp)
        })
    }

    /// `v - v_xx`.
    pub fn apply_helmholtz(&self, v: &SpectralField<T>) -> SpectralField<T> {
        self.filtered(v, |k, c| {
            let kp = self.wavenumbers[k];
            c * (T::one() + kp * kp)
        })
    }

    /// Solves `mu(v) - v_xx = m`; the mean of `v` equals the mean of `m`.
    pub fn mu_helmholtz_inverse(&self, m: &SpectralField<T>) -> SpectralField<T> {
        self.filtered(m, |k, c| {
            if k == 0 {
                c
            } else {
                let kp = self.wavenumbers[k];
                c / (kp * kp)
            }
        })
    }

    /// `mu(v) - v_xx`.
    pub fn apply_mu_helmholtz(&self, v: &SpectralField<T>) -> SpectralField<T> {
        self.filtered(v, |k, c| {
            if k == 0 {
                c
            } else {
                let kp = self.wavenumbers[k];
                c * kp * kp
            }
        })
    }

    /// Solves `-v_xx = m` for the unique `v` with `mu(v) = gauge_mean`.
    ///
    /// `m` must have zero mean; the check is relative to `max(1, |m|_inf)`
    /// so that large momenta near blow-up are not rejected for round-off.
    pub fn neg_laplacian_inverse(&self, m: &SpectralField<T>, gauge_mean: T) -> Result<SpectralField<T>> {
        let mean = self.mean(m);
        let scale = T::one().max(m.max_abs());
        if mean.abs() > T::tol(MEAN_COMPATIBILITY_TOL) * scale {
            return Err(Error::IncompatibleMean { mean: mean.to_f64_lossy() });
        }
        let n = T::from_usize_lossy(self.n());
        Ok(self.filtered(m, |k, c| {
            if k == 0 {
                Complex::new(gauge_mean * n, T::zero())
            } else {
                let kp = self.wavenumbers[k];
                c / (kp * kp)
            }
        }))
    }

    /// `-v_xx`.
    pub fn apply_neg_laplacian(&self, v: &SpectralField<T>) -> SpectralField<T> {
        self.derivative_unchecked(v, 2).map(|x| -x)
    }

    /// True when integer mode `k` survives the two-thirds rule.
    #[inline]
    pub fn is_resolved_mode(&self, k: usize) -> bool {
        3 * k <= self.n()
    }

    /// Zeroes every mode with `|k| > n/3`.
    pub fn dealias(&self, f: &SpectralField<T>) -> SpectralField<T> {
        let zero = Complex::new(T::zero(), T::zero());
        self.filtered(f, |k, c| if self.is_resolved_mode(k) { c } else { zero })
    }

    pub(crate) fn truncate_spectrum(&self, spec: &mut [Complex<T>]) {
        if !self.dealias_products {
            return;
        }
        let zero = Complex::new(T::zero(), T::zero());
        for (k, c) in spec.iter_mut().enumerate() {
            if !self.is_resolved_mode(k) {
                *c = zero;
            }
        }
    }

    /// Applies the product truncation configured by
    /// [`with_product_dealiasing`](Self::with_product_dealiasing).
    pub fn project_product(&self, values: Vec<T>) -> SpectralField<T> {
        if !self.dealias_products {
            return SpectralField::from_vec_unchecked(values);
        }
        let mut spec = self.spectrum(&values);
        self.truncate_spectrum(&mut spec);
        SpectralField::from_vec_unchecked(self.synthesize(spec))
    }

    /// `∂_x P(values)` where `P` is the product truncation.
    pub fn dx_of_product(&self, values: Vec<T>) -> SpectralField<T> {
        let mut spec = self.spectrum(&values);
        self.truncate_spectrum(&mut spec);
        self.differentiate_spectrum(&mut spec, 1);
        SpectralField::from_vec_unchecked(self.synthesize(spec))
    }

    /// `F(x) = ∫_0^x f`: the mean contributes `mean * x`, the periodic part
    /// is integrated mode by mode.
    pub fn antiderivative(&self, f: &SpectralField<T>) -> SpectralField<T> {
        let mean = self.mean(f);
        let nyq = self.nyquist();
        let zero = Complex::new(T::zero(), T::zero());
        let periodic = self.filtered(f, |k, c| {
            if k == 0 || k == nyq {
                zero
            } else {
                // c / (i k) = -i c / k
                Complex::new(c.im, -c.re) / self.wavenumbers[k]
            }
        });
        let origin = periodic[0];
        let nodes = self.grid.nodes();
        SpectralField::from_vec_unchecked(
            periodic.iter().zip(nodes).map(|(&p, x)| mean * x + p - origin).collect(),
        )
    }

    /// Periodic antiderivative with zero mean (drops the mean of `f`).
    pub fn periodic_antiderivative(&self, f: &SpectralField<T>) -> SpectralField<T> {
        let nyq = self.nyquist();
        let zero = Complex::new(T::zero(), T::zero());
        self.filtered(f, |k, c| {
            if k == 0 || k == nyq {
                zero
            } else {
                Complex::new(c.im, -c.re) / self.wavenumbers[k]
            }
        })
    }

    /// Samples `x -> f(x + shift)` through the trigonometric interpolant.
    pub fn translate(&self, f: &SpectralField<T>, shift: T) -> SpectralField<T> {
        let nyq = self.nyquist();
        self.filtered(f, |k, c| {
            let phase = self.wavenumbers[k] * shift;
            let rotated = c * Complex::new(phase.cos(), phase.sin());
            if k == nyq {
                // keep the real (cosine) part: the interpolant's Nyquist
                // term is re(c) cos(k x).
                Complex::new(c.re * phase.cos(), T::zero())
            } else {
                rotated
            }
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ops(n: usize, l: f64) -> SpectralOps<f64> {
        SpectralOps::new(PeriodicGrid::new(n, l).unwrap())
    }

    fn max_diff(a: &SpectralField<f64>, b: &SpectralField<f64>) -> f64 {
        (a - b).max_abs()
    }

    #[test]
    fn derivative_of_sine() {
        for &l in &[1.0, 2.5] {
            let o = ops(64, l);
            let w = std::f64::consts::TAU / l;
            let f = SpectralField::from_fn(o.grid(), |x| (w * x).sin());
            let d = o.derivative(&f, 1).unwrap();
            let expect = SpectralField::from_fn(o.grid(), |x| w * (w * x).cos());
            assert!(max_diff(&d, &expect) <= 1e-12, "{}", max_diff(&d, &expect));
        }
    }

    #[test]
    fn constants_are_annihilated() {
        let o = ops(32, 3.0);
        let f = SpectralField::constant(32, 7.25);
        for order in 1..=3 {
            assert!(o.derivative(&f, order).unwrap().max_abs() == 0.0);
        }
    }

    #[test]
    fn unsupported_order() {
        let o = ops(16, 1.0);
        let f = SpectralField::zeros(16);
        assert_eq!(o.derivative(&f, 0).unwrap_err(), Error::UnsupportedOrder(0));
        assert_eq!(o.derivative(&f, 4).unwrap_err(), Error::UnsupportedOrder(4));
    }

    #[test]
    fn third_derivative_of_cosine() {
        let o = ops(64, 1.0);
        let w = 3.0 * std::f64::consts::TAU;
        let f = SpectralField::from_fn(o.grid(), |x| (w * x).cos());
        let d = o.derivative(&f, 3).unwrap();
        let expect = SpectralField::from_fn(o.grid(), |x| w.powi(3) * (w * x).sin());
        assert!(max_diff(&d, &expect) <= 1e-9 * w.powi(3));
    }

    #[test]
    fn means() {
        let o = ops(64, 2.0);
        let w = std::f64::consts::TAU / 2.0;
        assert_eq!(o.mean(&SpectralField::constant(64, 3.0)), 3.0);
        let s = SpectralField::from_fn(o.grid(), |x| (w * x).sin());
        assert!(o.mean(&s).abs() <= 1e-14);
        let c = SpectralField::from_fn(o.grid(), |x| 2.0 + (2.0 * w * x).cos());
        assert!((o.mean(&c) - 2.0).abs() <= 1e-14);
    }

    #[test]
    fn helmholtz_examples() {
        let o = ops(64, 1.0);
        let w = std::f64::consts::TAU;
        let one = o.helmholtz_inverse(&SpectralField::constant(64, 1.0));
        assert!(max_diff(&one, &SpectralField::constant(64, 1.0)) <= 1e-15);
        let m = SpectralField::from_fn(o.grid(), |x| (1.0 + w * w) * (w * x).sin());
        let v = o.helmholtz_inverse(&m);
        let expect = SpectralField::from_fn(o.grid(), |x| (w * x).sin());
        assert!(max_diff(&v, &expect) <= 1e-14);
    }

    #[test]
    fn mu_helmholtz_examples() {
        let o = ops(64, 1.0);
        let w = std::f64::consts::TAU;
        let c = o.mu_helmholtz_inverse(&SpectralField::constant(64, -2.5));
        assert!(max_diff(&c, &SpectralField::constant(64, -2.5)) <= 1e-15);
        let m = SpectralField::from_fn(o.grid(), |x| w * w * (w * x).cos());
        let v = o.mu_helmholtz_inverse(&m);
        let expect = SpectralField::from_fn(o.grid(), |x| (w * x).cos());
        assert!(max_diff(&v, &expect) <= 1e-14);
    }

    #[test]
    fn neg_laplacian_examples() {
        let o = ops(64, 1.0);
        let w = std::f64::consts::TAU;
        let m = SpectralField::from_fn(o.grid(), |x| w * w * (w * x).sin());
        let v = o.neg_laplacian_inverse(&m, 0.0).unwrap();
        let expect = SpectralField::from_fn(o.grid(), |x| (w * x).sin());
        assert!(max_diff(&v, &expect) <= 1e-14);

        let five = o.neg_laplacian_inverse(&SpectralField::zeros(64), 5.0).unwrap();
        assert!(max_diff(&five, &SpectralField::constant(64, 5.0)) <= 1e-14);
    }

    #[test]
    fn neg_laplacian_rejects_mean() {
        let o = ops(32, 1.0);
        let err = o.neg_laplacian_inverse(&SpectralField::constant(32, 1e-3), 0.0).unwrap_err();
        assert!(matches!(err, Error::IncompatibleMean { .. }));
    }

    #[test]
    fn dealias_examples() {
        let o = ops(48, 1.0);
        let w = std::f64::consts::TAU;
        let banded = SpectralField::from_fn(o.grid(), |x| (w * x).sin() + 0.3 * (16.0 * w * x).cos());
        assert!(max_diff(&o.dealias(&banded), &banded) <= 1e-14);
        let nyquist = SpectralField::from_fn(o.grid(), |x| (24.0 * w * x).cos());
        assert!(o.dealias(&nyquist).max_abs() <= 1e-15);
    }

    #[test]
    fn antiderivative_of_cosine_plus_mean() {
        let o = ops(64, 2.0);
        let w = std::f64::consts::TAU / 2.0;
        let f = SpectralField::from_fn(o.grid(), |x| 0.5 + (w * x).cos());
        let expect = SpectralField::from_fn(o.grid(), |x| 0.5 * x + (w * x).sin() / w);
        assert!(max_diff(&o.antiderivative(&f), &expect) <= 1e-14);
    }

    #[test]
    fn translate_sine() {
        let o = ops(64, 1.0);
        let w = std::f64::consts::TAU;
        let f = SpectralField::from_fn(o.grid(), |x| (w * x).sin() + 0.2 * (3.0 * w * x).cos());
        let shifted = o.translate(&f, 0.137);
        let expect = SpectralField::from_fn(o.grid(), |x| {
            (w * (x + 0.137)).sin() + 0.2 * (3.0 * w * (x + 0.137)).cos()
        });
        assert!(max_diff(&shifted, &expect) <= 1e-13);
    }

    #[test]
    fn works_in_single_precision() {
        let o = SpectralOps::new(PeriodicGrid::<f32>::unit(64).unwrap());
        let w = std::f32::consts::TAU;
        let f = SpectralField::from_fn(o.grid(), |x| (w * x).sin());
        let d = o.derivative(&f, 1).unwrap();
        let expect = SpectralField::from_fn(o.grid(), |x| w * (w * x).cos());
        assert!((&d - &expect).max_abs() <= 1e-4);
    }
}
