//! Pseudospectral solvers for weakly dissipative shallow-water equations
//! (two-component b-family, Hunter-Saxton, μ-type and Novikov equations)
//! and the experiments that check the exponential time-rescaling
//! correspondence between their dissipative and non-dissipative forms.
//!
//! The numerical core is generic over the scalar type ([`Real`], implemented
//! for `f32` and `f64`). The aliases at the crate root fix it to `f64`,
//! which is what every tolerance in this crate is calibrated for.

pub mod equations;
pub mod error;
pub mod field;
pub mod grid;
pub mod hs_exact;
pub mod scalar;
pub mod series;
pub mod spectral;
pub mod timestepping;
pub mod transform;
pub mod verify;

pub use equations::{EquationSpec, Family, Kappa, MKind, TwoComponentState};
pub use error::{Error, Result, RunSide};
pub use field::SpectralField;
pub use grid::PeriodicGrid;
pub use hs_exact::{eulerian_reconstruct, HsExactData};
pub use scalar::Real;
pub use series::TrigSeries;
pub use spectral::SpectralOps;
pub use timestepping::{IntegratorConfig, Snapshot, Termination, Trajectory};
pub use transform::TimeMapParams;
pub use verify::{
    BlowupReport, ConvergenceReport, DualReport, EnergyReport, EquivalenceCase, EquivalenceReport, Verdict,
};

pub type Grid = PeriodicGrid<f64>;
pub type Field = SpectralField<f64>;
pub type Ops = SpectralOps<f64>;
pub type State = TwoComponentState<f64>;
pub type Equation = EquationSpec<f64>;
pub type TimeMap = TimeMapParams<f64>;
pub type Config = IntegratorConfig<f64>;
pub type HsData = HsExactData<f64>;
pub type Series = TrigSeries<f64>;
pub type Case = EquivalenceCase<f64>;
