//! Right-hand sides of the weakly dissipative equation families.
//!
//! The two-component b-family
//!
//! ```text
//! m_t + v m_x + b v_x m + λ m + κ σ σ_x = 0
//! σ_t + (v σ)_x + λ σ = 0
//! ```
//!
//! is integrated in momentum form for three momentum-velocity relations
//! (see [`MKind`]). The Novikov equation is integrated through its momentum
//! `n = v - v_xx`, and the Camassa-Holm equation additionally in its
//! nonlocal velocity form, which serves as an independent cross-check.
//!
//! Nonlinear products are formed pointwise at the nodes and then truncated
//! by the two-thirds rule (unless disabled on the [`SpectralOps`]).

use realfft::num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::SpectralField;
use crate::scalar::Real;
use crate::spectral::SpectralOps;

/// How momentum is built from velocity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MKind {
    /// `m = v - v_xx`
    Helmholtz,
    /// `m = -v_xx` (Hunter-Saxton type)
    NegLaplacian,
    /// `m = μ(v) - v_xx`
    MuHelmholtz,
}

impl MKind {
    pub const ALL: [MKind; 3] = [MKind::Helmholtz, MKind::NegLaplacian, MKind::MuHelmholtz];

    pub fn name(self) -> &'static str {
        match self {
            MKind::Helmholtz => "helmholtz",
            MKind::NegLaplacian => "neglaplacian",
            MKind::MuHelmholtz => "muhelmholtz",
        }
    }
}

impl std::str::FromStr for MKind {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "helmholtz" => Ok(MKind::Helmholtz),
            "neglaplacian" => Ok(MKind::NegLaplacian),
            "muhelmholtz" => Ok(MKind::MuHelmholtz),
            other => Err(format!("unknown momentum kind `{other}`")),
        }
    }
}

/// Sign of the coupling term `κ σ σ_x`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "i8", into = "i8")]
pub enum Kappa {
    Plus,
    Minus,
}

impl Kappa {
    pub fn value<T: Real>(self) -> T {
        match self {
            Kappa::Plus => T::one(),
            Kappa::Minus => -T::one(),
        }
    }
}

impl TryFrom<i8> for Kappa {
    type Error = String;
    fn try_from(v: i8) -> std::result::Result<Self, String> {
        match v {
            1 => Ok(Kappa::Plus),
            -1 => Ok(Kappa::Minus),
            other => Err(format!("kappa must be +1 or -1, got {other}")),
        }
    }
}

impl From<Kappa> for i8 {
    fn from(k: Kappa) -> i8 {
        match k {
            Kappa::Plus => 1,
            Kappa::Minus => -1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Family<T> {
    BFamily { mkind: MKind, b: T, kappa: Kappa },
    Novikov,
    ChWeakForm,
}

/// An equation family together with its dissipation rate `λ ≥ 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EquationSpec<T> {
    pub family: Family<T>,
    lambda: T,
}

impl<T: Real> EquationSpec<T> {
    pub fn new(family: Family<T>, lambda: T) -> Result<Self> {
        if !(lambda >= T::zero()) || !lambda.is_finite() {
            return Err(Error::InvalidParameter {
                name: "lambda",
                reason: format!("must be finite and >= 0, got {lambda}"),
            });
        }
        if let Family::BFamily { b, .. } = family {
            if !b.is_finite() {
                return Err(Error::InvalidParameter { name: "b", reason: "must be finite".into() });
            }
        }
        Ok(Self { family, lambda })
    }

    pub fn b_family(mkind: MKind, b: T, kappa: Kappa, lambda: T) -> Result<Self> {
        Self::new(Family::BFamily { mkind, b, kappa }, lambda)
    }

    /// Camassa-Holm: `b = 2`, single component, `m = v - v_xx`.
    pub fn camassa_holm(lambda: T) -> Result<Self> {
        Self::b_family(MKind::Helmholtz, T::c(2.0), Kappa::Plus, lambda)
    }

    pub fn novikov(lambda: T) -> Result<Self> {
        Self::new(Family::Novikov, lambda)
    }

    pub fn ch_weak_form(lambda: T) -> Result<Self> {
        Self::new(Family::ChWeakForm, lambda)
    }

    #[inline]
    pub fn lambda(&self) -> T {
        self.lambda
    }

    pub fn with_lambda(&self, lambda: T) -> Result<Self> {
        Self::new(self.family, lambda)
    }

    /// The same family with `λ = 0`.
    pub fn non_dissipative(&self) -> Self {
        Self { family: self.family, lambda: T::zero() }
    }

    /// Order `p` of the time map `τ = (1 - e^{-pλt}) / (pλ)` relating this
    /// family to its non-dissipative version.
    pub fn time_map_order(&self) -> u8 {
        match self.family {
            Family::Novikov => 2,
            _ => 1,
        }
    }

    pub fn mkind(&self) -> Option<MKind> {
        match self.family {
            Family::BFamily { mkind, .. } => Some(mkind),
            Family::Novikov => Some(MKind::Helmholtz),
            Family::ChWeakForm => None,
        }
    }

    pub fn is_two_component(&self) -> bool {
        matches!(self.family, Family::BFamily { .. })
    }

    /// Builds the prognostic state from a velocity (and second component).
    ///
    /// The second component is ignored for single-component families. For
    /// [`MKind::NegLaplacian`] the velocity gauge is lost here; the solver
    /// reconstructs velocities with zero mean.
    pub fn state_from_velocity(
        &self,
        ops: &SpectralOps<T>,
        v: &SpectralField<T>,
        sigma: Option<&SpectralField<T>>,
    ) -> TwoComponentState<T> {
        let n = ops.n();
        let m = match self.family {
            Family::ChWeakForm => v.clone(),
            Family::Novikov => ops.apply_helmholtz(v),
            Family::BFamily { mkind, .. } => match mkind {
                MKind::Helmholtz => ops.apply_helmholtz(v),
                MKind::NegLaplacian => ops.apply_neg_laplacian(v),
                MKind::MuHelmholtz => ops.apply_mu_helmholtz(v),
            },
        };
        let sigma = match (self.is_two_component(), sigma) {
            (true, Some(s)) => s.clone(),
            _ => SpectralField::zeros(n),
        };
        TwoComponentState { m, sigma }
    }

    /// Velocity carried by `state` (zero-mean gauge for `NegLaplacian`).
    pub fn velocity(&self, ops: &SpectralOps<T>, state: &TwoComponentState<T>) -> Result<SpectralField<T>> {
        match self.mkind() {
            None => Ok(state.m.clone()),
            Some(kind) => recover_velocity(ops, &state.m, kind, T::zero()),
        }
    }

    /// Time derivative of `state`.
    pub fn rhs(&self, ops: &SpectralOps<T>, state: &TwoComponentState<T>) -> Result<TwoComponentState<T>> {
        match self.family {
            Family::BFamily { .. } => rhs_bfamily(ops, state, self, T::zero()),
            Family::Novikov => Ok(rhs_novikov(ops, state, self.lambda)),
            Family::ChWeakForm => Ok(TwoComponentState {
                m: rhs_ch_weakform(ops, &state.m, self.lambda),
                sigma: SpectralField::zeros(ops.n()),
            }),
        }
    }
}

/// Prognostic variables: momentum `m` and the second component `σ`.
///
/// For the Novikov equation `m` holds `n = v - v_xx` and `σ` is unused.
/// For the Camassa-Holm velocity form `m` holds the velocity itself.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TwoComponentState<T> {
    pub m: SpectralField<T>,
    pub sigma: SpectralField<T>,
}

impl<T: Real> TwoComponentState<T> {
    pub fn new(m: SpectralField<T>, sigma: SpectralField<T>) -> Self {
        Self { m, sigma }
    }

    /// `self + h * rate`, componentwise.
    pub fn add_scaled(&self, h: T, rate: &Self) -> Self {
        Self { m: self.m.add_scaled(h, &rate.m), sigma: self.sigma.add_scaled(h, &rate.sigma) }
    }

    pub fn scaled(&self, factor: T) -> Self {
        Self { m: self.m.scaled(factor), sigma: self.sigma.scaled(factor) }
    }

    pub fn is_finite(&self) -> bool {
        self.m.is_finite() && self.sigma.is_finite()
    }
}

/// Inverts the momentum-velocity relation of `kind`. `gauge_mean` is the
/// prescribed mean of `v` and only used for [`MKind::NegLaplacian`].
pub fn recover_velocity<T: Real>(
    ops: &SpectralOps<T>,
    m: &SpectralField<T>,
    kind: MKind,
    gauge_mean: T,
) -> Result<SpectralField<T>> {
    match kind {
        MKind::Helmholtz => Ok(ops.helmholtz_inverse(m)),
        MKind::NegLaplacian => ops.neg_laplacian_inverse(m, gauge_mean),
        MKind::MuHelmholtz => Ok(ops.mu_helmholtz_inverse(m)),
    }
}

fn rate_minus_damping<T: Real>(nonlinear: &[T], lambda: T, state: &[T]) -> SpectralField<T> {
    SpectralField::from_vec_unchecked(
        nonlinear.iter().zip(state).map(|(&nl, &s)| -nl - lambda * s).collect(),
    )
}

/// `(ṁ, σ̇)` for the two-component b-family.
pub fn rhs_bfamily<T: Real>(
    ops: &SpectralOps<T>,
    state: &TwoComponentState<T>,
    spec: &EquationSpec<T>,
    gauge_mean: T,
) -> Result<TwoComponentState<T>> {
    let Family::BFamily { mkind, b, kappa } = spec.family else {
        return Err(Error::InvalidParameter {
            name: "family",
            reason: "rhs_bfamily needs a b-family equation".into(),
        });
    };
    let kappa: T = kappa.value();
    let lambda = spec.lambda();
    let m = &state.m;
    let sigma = &state.sigma;

    let v = recover_velocity(ops, m, mkind, gauge_mean)?;
    let v_x = ops.dx(&v);
    let m_x = ops.dx(m);
    let sigma_x = ops.dx(sigma);

    let products: Vec<T> = (0..ops.n())
        .map(|j| v[j] * m_x[j] + b * v_x[j] * m[j] + kappa * sigma[j] * sigma_x[j])
        .collect();
    let mut nonlinear = ops.project_product(products).into_values();
    if mkind == MKind::NegLaplacian {
        // -v_xx has no mean, so neither may its rate; remove round-off drift.
        let mean = nonlinear.iter().fold(T::zero(), |a, &x| a + x) / T::from_usize_lossy(nonlinear.len());
        for x in &mut nonlinear {
            *x = *x - mean;
        }
    }
    let m_dot = rate_minus_damping(&nonlinear, lambda, m.values());

    let flux: Vec<T> = v.iter().zip(sigma.iter()).map(|(&a, &s)| a * s).collect();
    let flux_x = ops.dx_of_product(flux);
    let sigma_dot = rate_minus_damping(flux_x.values(), lambda, sigma.values());

    Ok(TwoComponentState { m: m_dot, sigma: sigma_dot })
}

/// `ṅ = -(v² n_x + 3 v v_x n) - λ n` with `v = (1 - ∂_x²)^{-1} n`.
pub fn rhs_novikov<T: Real>(ops: &SpectralOps<T>, state: &TwoComponentState<T>, lambda: T) -> TwoComponentState<T> {
    let n_field = &state.m;
    let v = ops.helmholtz_inverse(n_field);
    let v_x = ops.dx(&v);
    let n_x = ops.dx(n_field);
    let three = T::c(3.0);
    let products: Vec<T> = (0..ops.n())
        .map(|j| v[j] * v[j] * n_x[j] + three * v[j] * v_x[j] * n_field[j])
        .collect();
    let nonlinear = ops.project_product(products);
    TwoComponentState {
        m: rate_minus_damping(nonlinear.values(), lambda, n_field.values()),
        sigma: SpectralField::zeros(ops.n()),
    }
}

/// Camassa-Holm in nonlocal velocity form:
/// `v_t = -(v v_x + ∂_x (1 - ∂_x²)^{-1} (v² + v_x²/2)) - λ v`.
pub fn rhs_ch_weakform<T: Real>(ops: &SpectralOps<T>, v: &SpectralField<T>, lambda: T) -> SpectralField<T> {
    let v_x = ops.dx(v);
    let half = T::c(0.5);
    let advect: Vec<T> = v.iter().zip(v_x.iter()).map(|(&a, &ax)| a * ax).collect();
    let source: Vec<T> = v.iter().zip(v_x.iter()).map(|(&a, &ax)| a * a + half * ax * ax).collect();

    let mut advect_hat = ops.spectrum(&advect);
    ops.truncate_spectrum(&mut advect_hat);
    let mut source_hat = ops.spectrum(&source);
    ops.truncate_spectrum(&mut source_hat);
    ops.differentiate_spectrum(&mut source_hat, 1);
    let grid = *ops.grid();
    for (k, (a, s)) in advect_hat.iter_mut().zip(&source_hat).enumerate() {
        let kp = grid.wavenumber(k);
        *a = *a + *s / Complex::new(T::one() + kp * kp, T::zero());
    }
    let nonlinear = ops.synthesize(advect_hat);
    rate_minus_damping(&nonlinear, lambda, v.values())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::PeriodicGrid;

    fn ops(n: usize) -> SpectralOps<f64> {
        SpectralOps::new(PeriodicGrid::unit(n).unwrap())
    }

    #[test]
    fn recover_velocity_examples() {
        let o = ops(32);
        let c = SpectralField::constant(32, 1.75);
        for kind in [MKind::Helmholtz, MKind::MuHelmholtz] {
            let v = recover_velocity(&o, &c, kind, 0.0).unwrap();
            assert!((&v - &c).max_abs() <= 1e-15);
        }
        let w = std::f64::consts::TAU;
        let m = SpectralField::from_fn(o.grid(), |x| w * w * (w * x).sin());
        let v = recover_velocity(&o, &m, MKind::NegLaplacian, 0.0).unwrap();
        let expect = SpectralField::from_fn(o.grid(), |x| (w * x).sin());
        assert!((&v - &expect).max_abs() <= 1e-14);
    }

    #[test]
    fn constant_state_decays_at_rate_lambda() {
        let o = ops(32);
        let c = 0.8;
        let spec = EquationSpec::b_family(MKind::Helmholtz, 2.0, Kappa::Plus, 0.7).unwrap();
        let state = TwoComponentState::new(SpectralField::constant(32, c), SpectralField::zeros(32));
        let rate = spec.rhs(&o, &state).unwrap();
        assert!(rate.m.iter().all(|&x| (x + 0.7 * c).abs() <= 1e-15));
        assert!(rate.sigma.iter().all(|&x| x == 0.0));

        let nov = rhs_novikov(&o, &state, 0.7);
        assert!(nov.m.iter().all(|&x| (x + 0.7 * c).abs() <= 1e-15));

        let weak = rhs_ch_weakform(&o, &SpectralField::constant(32, c), 0.7);
        assert!(weak.iter().all(|&x| (x + 0.7 * c).abs() <= 1e-15));
    }

    #[test]
    fn rhs_bfamily_rejects_other_families() {
        let o = ops(16);
        let state = TwoComponentState::new(SpectralField::zeros(16), SpectralField::zeros(16));
        let spec = EquationSpec::novikov(0.0).unwrap();
        assert!(rhs_bfamily(&o, &state, &spec, 0.0).is_err());
    }

    #[test]
    fn neg_laplacian_rejects_mean_momentum() {
        let o = ops(16);
        let spec = EquationSpec::b_family(MKind::NegLaplacian, 2.0, Kappa::Plus, 0.0).unwrap();
        let state = TwoComponentState::new(SpectralField::constant(16, 0.1), SpectralField::zeros(16));
        assert!(matches!(spec.rhs(&o, &state), Err(Error::IncompatibleMean { .. })));
    }

    #[test]
    fn spec_validation() {
        assert!(EquationSpec::<f64>::camassa_holm(-0.1).is_err());
        assert!(EquationSpec::<f64>::camassa_holm(f64::NAN).is_err());
        assert!(EquationSpec::<f64>::b_family(MKind::Helmholtz, f64::INFINITY, Kappa::Plus, 0.0).is_err());
        assert_eq!(EquationSpec::<f64>::novikov(0.3).unwrap().time_map_order(), 2);
        assert_eq!(EquationSpec::<f64>::camassa_holm(0.3).unwrap().time_map_order(), 1);
        assert!(Kappa::try_from(2).is_err());
    }
}
