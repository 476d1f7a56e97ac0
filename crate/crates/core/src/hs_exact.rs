//! Closed-form solution of the periodic weakly dissipative Hunter-Saxton
//! system, written along the Lagrangian flow map.
//!
//! With `τ = (1 - e^{-λt})/λ`, `a = v0x/2` and the normalization
//! `c(0) = ¼∫(v0x² + κρ0²) = 1`:
//!
//! ```text
//! φ(t,x)      = ∫_0^x (cos τ + a sin τ)² + κ ρ0²/4 sin² τ
//! v_x(t,φ)    = e^{-λt} [4 cos 2τ v0x + sin 2τ (v0x² + κρ0² - 4)] / D
//! ρ(t,φ)      = e^{-λt} 4 ρ0 / D
//! D           = (2 cos τ + v0x sin τ)² + κ ρ0² sin² τ
//! ```
//!
//! The oracle fixes `φ(t, 0) = 0`, which is a different velocity gauge from
//! the solver's zero-mean convention. [`HsExactData::gauge_shift`] measures
//! the offset so that gauge-invariant fields can be compared.

use crate::equations::Kappa;
use crate::error::{Error, Result};
use crate::field::SpectralField;
use crate::grid::PeriodicGrid;
use crate::scalar::Real;
use crate::spectral::SpectralOps;
use crate::transform::TimeMapParams;

/// Below this the denominator `D` is treated as a breakdown.
pub const BREAKDOWN_THRESHOLD: f64 = 1e-8;

const MEAN_TOL: f64 = 1e-12;
const NORMALIZATION_TOL: f64 = 1e-10;

/// Initial slope, initial second component, `κ` and `λ` on the unit circle.
#[derive(Debug, Clone)]
pub struct HsExactData<T: Real> {
    v0x: SpectralField<T>,
    rho0: SpectralField<T>,
    kappa: Kappa,
    lambda: T,
    ops: SpectralOps<T>,
}

fn energy_constant<T: Real>(grid: &PeriodicGrid<T>, v0x: &SpectralField<T>, rho0: &SpectralField<T>, kappa: Kappa) -> T {
    let k: T = kappa.value();
    let dx = grid.dx();
    v0x.iter().zip(rho0.iter()).fold(T::zero(), |acc, (&a, &r)| acc + a * a + k * r * r) * dx / T::c(4.0)
}

impl<T: Real> HsExactData<T> {
    /// Validates `mean(v0x) = 0` and `c(0) = 1` on a grid of length 1.
    pub fn new(
        v0x: SpectralField<T>,
        rho0: SpectralField<T>,
        kappa: Kappa,
        lambda: T,
        grid: PeriodicGrid<T>,
    ) -> Result<Self> {
        if (grid.length() - T::one()).abs() > T::epsilon() {
            return Err(Error::InvalidParameter {
                name: "grid",
                reason: format!("the closed form lives on the unit circle, got length {}", grid.length()),
            });
        }
        for f in [&v0x, &rho0] {
            if f.len() != grid.n() {
                return Err(Error::LengthMismatch { expected: grid.n(), got: f.len() });
            }
        }
        if !(lambda >= T::zero()) || !lambda.is_finite() {
            return Err(Error::InvalidParameter { name: "lambda", reason: format!("must be >= 0, got {lambda}") });
        }
        let ops = SpectralOps::new(grid);
        let mean = ops.mean(&v0x);
        if mean.abs() > T::tol(MEAN_TOL) {
            return Err(Error::InvalidParameter {
                name: "v0x",
                reason: format!("slope of a periodic function must have zero mean, got {mean}"),
            });
        }
        let c0 = energy_constant(&grid, &v0x, &rho0, kappa);
        if (c0 - T::one()).abs() > T::tol(NORMALIZATION_TOL) {
            return Err(Error::InvalidParameter {
                name: "c(0)",
                reason: format!("closed form assumes c(0) = 1, got {c0}"),
            });
        }
        Ok(Self { v0x, rho0, kappa, lambda, ops })
    }

    /// Removes the mean of `v0x` and rescales both fields so that `c(0) = 1`.
    pub fn normalized(
        v0x: SpectralField<T>,
        rho0: SpectralField<T>,
        kappa: Kappa,
        lambda: T,
        grid: PeriodicGrid<T>,
    ) -> Result<Self> {
        let mean = v0x.iter().fold(T::zero(), |a, &x| a + x) / T::from_usize_lossy(v0x.len());
        let v0x = v0x.map(|x| x - mean);
        let c0 = energy_constant(&grid, &v0x, &rho0, kappa);
        if !(c0 > T::zero()) {
            return Err(Error::InvalidParameter {
                name: "c(0)",
                reason: format!("cannot normalize non-positive energy {c0}"),
            });
        }
        let scale = T::one() / c0.sqrt();
        Self::new(v0x.scaled(scale), rho0.scaled(scale), kappa, lambda, grid)
    }

    pub fn v0x(&self) -> &SpectralField<T> {
        &self.v0x
    }

    pub fn rho0(&self) -> &SpectralField<T> {
        &self.rho0
    }

    pub fn kappa(&self) -> Kappa {
        self.kappa
    }

    pub fn lambda(&self) -> T {
        self.lambda
    }

    pub fn grid(&self) -> &PeriodicGrid<T> {
        self.ops.grid()
    }

    pub fn ops(&self) -> &SpectralOps<T> {
        &self.ops
    }

    /// The same initial data with a different dissipation rate.
    pub fn with_lambda(&self, lambda: T) -> Result<Self> {
        Self::new(self.v0x.clone(), self.rho0.clone(), self.kappa, lambda, *self.grid())
    }

    pub fn time_map(&self) -> TimeMapParams<T> {
        TimeMapParams::new(self.lambda, 1).expect("lambda validated on construction")
    }

    /// Initial velocity with zero mean.
    pub fn initial_velocity(&self) -> SpectralField<T> {
        self.ops.periodic_antiderivative(&self.v0x)
    }

    /// `φ_x`, the integrand of the flow map, at rescaled time `tau`.
    pub fn flow_map_slope(&self, tau: T) -> SpectralField<T> {
        let (s, c) = tau.sin_cos();
        let k: T = self.kappa.value();
        let quarter = T::c(0.25);
        let half = T::c(0.5);
        self.v0x.zip_map(&self.rho0, |a, r| {
            let base = c + half * a * s;
            base * base + k * quarter * r * r * s * s
        })
    }

    /// `∂_τ φ_x`.
    fn flow_map_slope_rate(&self, tau: T) -> SpectralField<T> {
        let (s, c) = tau.sin_cos();
        let k: T = self.kappa.value();
        let half = T::c(0.5);
        let two = T::c(2.0);
        self.v0x.zip_map(&self.rho0, |a, r| {
            let a = half * a;
            two * (c + a * s) * (a * c - s) + k * half * r * r * s * c
        })
    }

    /// `φ(t, x_j)`.
    pub fn flow_map(&self, t: T) -> SpectralField<T> {
        let tau = self.time_map().tau(t);
        if tau == T::zero() {
            return SpectralField::from_fn(self.grid(), |x| x);
        }
        self.ops.antiderivative(&self.flow_map_slope(tau))
    }

    /// `φ_t(t, x_j)`, the velocity of the particle labelled `x_j`.
    pub fn flow_velocity(&self, t: T) -> SpectralField<T> {
        let map = self.time_map();
        let tau = map.tau(t);
        self.ops.antiderivative(&self.flow_map_slope_rate(tau)).scaled(map.tau_rate(t))
    }

    pub fn denominator(&self, tau: T) -> SpectralField<T> {
        let (s, c) = tau.sin_cos();
        let k: T = self.kappa.value();
        let two = T::c(2.0);
        self.v0x.zip_map(&self.rho0, |a, r| {
            let base = two * c + a * s;
            base * base + k * r * r * s * s
        })
    }

    /// `(v_x(t, φ(t, x_j)), ρ(t, φ(t, x_j)))`.
    pub fn exact_along_flow(&self, t: T) -> Result<(SpectralField<T>, SpectralField<T>)> {
        let map = self.time_map();
        let tau = map.tau(t);
        let denom = self.denominator(tau);
        let min = denom.iter().fold(T::infinity(), |a, &d| a.min(d));
        if !(min > T::c(BREAKDOWN_THRESHOLD)) {
            return Err(Error::Breakdown { t: t.to_f64_lossy(), min_denominator: min.to_f64_lossy() });
        }
        let pre = map.prefactor(t);
        let k: T = self.kappa.value();
        let four = T::c(4.0);
        let (s2, c2) = (tau + tau).sin_cos();
        let n = self.v0x.len();
        let mut slope = Vec::with_capacity(n);
        let mut rho = Vec::with_capacity(n);
        for j in 0..n {
            let a = self.v0x[j];
            let r = self.rho0[j];
            let d = denom[j];
            slope.push(pre * (four * c2 * a + s2 * (a * a + k * r * r - four)) / d);
            rho.push(pre * four * r / d);
        }
        Ok((SpectralField::from_vec_unchecked(slope), SpectralField::from_vec_unchecked(rho)))
    }

    /// `c(t) = e^{-2λt}` (given `c(0) = 1`).
    pub fn c_of_t(&self, t: T) -> T {
        (-(self.lambda + self.lambda) * t).exp()
    }

    /// `¼ ∫ [(v_x∘φ)² + κ (ρ∘φ)²] φ_x dx`, the Eulerian energy written in
    /// Lagrangian labels. Should equal [`c_of_t`](Self::c_of_t).
    pub fn energy_by_quadrature(&self, t: T) -> Result<T> {
        let (slope, rho) = self.exact_along_flow(t)?;
        let jac = self.flow_map_slope(self.time_map().tau(t));
        let k: T = self.kappa.value();
        let dx = self.grid().dx();
        let sum = (0..slope.len()).fold(T::zero(), |acc, j| {
            acc + (slope[j] * slope[j] + k * rho[j] * rho[j]) * jac[j]
        });
        Ok(sum * dx / T::c(4.0))
    }

    /// Mean of the oracle's Eulerian velocity, `∫ φ_t φ_x dx`.
    pub fn oracle_mean_velocity(&self, t: T) -> T {
        let tau = self.time_map().tau(t);
        let vel = self.flow_velocity(t);
        let jac = self.flow_map_slope(tau);
        let dx = self.grid().dx();
        vel.iter().zip(jac.iter()).fold(T::zero(), |a, (&u, &j)| a + u * j) * dx
    }

    /// `A(t) = ∫_0^t μ_oracle(s) ds` by composite 5-point Gauss-Legendre.
    ///
    /// The solver's zero-mean field at `x` matches the oracle's field at
    /// `x + A(t)`.
    pub fn gauge_shift(&self, t: T) -> T {
        const NODES: [f64; 5] = [
            0.0,
            -0.538_469_310_105_683_1,
            0.538_469_310_105_683_1,
            -0.906_179_845_938_664,
            0.906_179_845_938_664,
        ];
        const WEIGHTS: [f64; 5] = [
            0.568_888_888_888_888_9,
            0.478_628_670_499_366_5,
            0.478_628_670_499_366_5,
            0.236_926_885_056_189_08,
            0.236_926_885_056_189_08,
        ];
        if t == T::zero() {
            return T::zero();
        }
        let panels = (t / T::c(0.05)).ceil().to_usize().unwrap_or(1).max(1);
        let h = t / T::from_usize_lossy(panels);
        let half = h * T::c(0.5);
        let mut total = T::zero();
        for p in 0..panels {
            let mid = (T::from_usize_lossy(p) + T::c(0.5)) * h;
            for (&node, &weight) in NODES.iter().zip(&WEIGHTS) {
                total = total + T::c(weight) * half * self.oracle_mean_velocity(mid + half * T::c(node));
            }
        }
        total
    }

    /// Oracle `v_x` and `σ` sampled at `x_j + shift` on the Eulerian grid.
    pub fn eulerian_fields(&self, t: T, shift: T) -> Result<(SpectralField<T>, SpectralField<T>)> {
        let (slope, rho) = self.exact_along_flow(t)?;
        let phi = self.flow_map(t);
        let points: Vec<T> = self.grid().nodes().into_iter().map(|x| x + shift).collect();
        let vx = reconstruct_at(&self.ops, &phi, &slope, &points)?;
        let sigma = reconstruct_at(&self.ops, &phi, &rho, &points)?;
        Ok((vx, sigma))
    }
}

fn check_monotone<T: Real>(phi: &SpectralField<T>, length: T) -> Result<()> {
    let n = phi.len();
    for j in 0..n {
        let next = (j + 1) % n;
        let step = if next == 0 { phi[0] + length - phi[j] } else { phi[next] - phi[j] };
        if !(step > T::zero()) {
            return Err(Error::NonMonotoneFlow { index: j, next });
        }
    }
    Ok(())
}

/// Samples on the Eulerian grid of a function known along a flow map.
///
/// `phi[j]` is the position of label `x_j` (with `φ(x + L) = φ(x) + L`) and
/// `f_at_phi[j]` the value there. The result is a piecewise cubic Hermite
/// interpolant over the knots `φ_j`, with knot slopes `(f∘φ)_x / φ_x` taken
/// spectrally in the label variable. Exact at the knots and for constant
/// data.
pub fn eulerian_reconstruct<T: Real>(
    ops: &SpectralOps<T>,
    phi: &SpectralField<T>,
    f_at_phi: &SpectralField<T>,
) -> Result<SpectralField<T>> {
    reconstruct_at(ops, phi, f_at_phi, &ops.grid().nodes())
}

/// [`eulerian_reconstruct`] evaluated at arbitrary points (taken mod `L`).
pub fn reconstruct_at<T: Real>(
    ops: &SpectralOps<T>,
    phi: &SpectralField<T>,
    f_at_phi: &SpectralField<T>,
    points: &[T],
) -> Result<SpectralField<T>> {
    let grid = ops.grid();
    let n = grid.n();
    let length = grid.length();
    for f in [phi, f_at_phi] {
        if f.len() != n {
            return Err(Error::LengthMismatch { expected: n, got: f.len() });
        }
    }
    check_monotone(phi, length)?;

    let periodic_part = SpectralField::from_vec_unchecked((0..n).map(|j| phi[j] - grid.node(j)).collect());
    let jac = ops.dx(&periodic_part).map(|d| T::one() + d);
    let f_label = ops.dx(f_at_phi);

    let mut knots = Vec::with_capacity(n + 1);
    let mut values = Vec::with_capacity(n + 1);
    let mut slopes = Vec::with_capacity(n + 1);
    for j in 0..n {
        knots.push(phi[j]);
        values.push(f_at_phi[j]);
        slopes.push(f_label[j] / jac[j]);
    }
    knots.push(phi[0] + length);
    values.push(values[0]);
    slopes.push(slopes[0]);

    let origin = knots[0];
    let two = T::c(2.0);
    let three = T::c(3.0);
    let out = points
        .iter()
        .map(|&p| {
            let mut offset = (p - origin) % length;
            if offset < T::zero() {
                offset = offset + length;
            }
            let y = origin + offset;
            // last knot index with knots[i] <= y
            let i = knots.partition_point(|&k| k <= y).saturating_sub(1).min(n - 1);
            let h = knots[i + 1] - knots[i];
            let s = (y - knots[i]) / h;
            let s2 = s * s;
            let s3 = s2 * s;
            let h00 = two * s3 - three * s2 + T::one();
            let h10 = s3 - two * s2 + s;
            let h01 = three * s2 - two * s3;
            let h11 = s3 - s2;
            h00 * values[i] + h10 * h * slopes[i] + h01 * values[i + 1] + h11 * h * slopes[i + 1]
        })
        .collect();
    Ok(SpectralField::from_vec_unchecked(out))
}
