//! End-to-end experiments for the dissipative/non-dissipative
//! correspondence, the Hunter-Saxton closed form, blow-up times and solver
//! convergence. Every report serializes to JSON.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::equations::{EquationSpec, Family, MKind, TwoComponentState};
use crate::error::{Error, Result, RunSide};
use crate::field::SpectralField;
use crate::grid::PeriodicGrid;
use crate::hs_exact::HsExactData;
use crate::scalar::Real;
use crate::series::TrigSeries;
use crate::spectral::SpectralOps;
use crate::timestepping::{integrate_to_times, monitor, rk4_step, Trajectory};
use crate::transform::TimeMapParams;

/// Slope at which blow-up times are measured.
pub const BLOWUP_MEASURE_THRESHOLD: f64 = 1e4;
/// Relative budget for measured against predicted blow-up times.
pub const BLOWUP_TOLERANCE: f64 = 0.1;
/// Error below which a convergence study counts as converged.
pub const CONVERGENCE_FLOOR: f64 = 1e-9;
/// Minimum error reduction per grid doubling for spectral decay.
pub const SPECTRAL_RATIO: f64 = 10.0;
const RESOLUTIONS: [usize; 4] = [64, 128, 256, 512];
const BISECTION_STEPS: usize = 60;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
}

impl Verdict {
    pub fn from_bool(ok: bool) -> Self {
        if ok {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }

    pub fn passed(self) -> bool {
        self == Verdict::Pass
    }
}

/// Which way the time map is applied.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    /// Non-dissipative run mapped onto the dissipative one.
    Forward,
    /// Dissipative run mapped back onto the non-dissipative one.
    Reverse,
}

/// Field compared in a report: the velocity, or its slope when the velocity
/// is only defined up to a gauge.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Quantity {
    Velocity,
    Slope,
}

/// Differences at one check time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeErrors<T> {
    pub t: T,
    pub v_max: T,
    pub v_l2: T,
    pub sigma_max: T,
    pub sigma_l2: T,
}

impl<T: Real> TimeErrors<T> {
    fn between(t: T, dx: T, v: (&SpectralField<T>, &SpectralField<T>), sigma: (&SpectralField<T>, &SpectralField<T>)) -> Self {
        let dv = v.0 - v.1;
        let ds = sigma.0 - sigma.1;
        Self { t, v_max: dv.max_abs(), v_l2: dv.l2_norm(dx), sigma_max: ds.max_abs(), sigma_l2: ds.l2_norm(dx) }
    }

    pub fn max(&self) -> T {
        self.v_max.max(self.sigma_max)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquivalenceReport<T> {
    pub spec: EquationSpec<T>,
    pub lambda: T,
    pub n: usize,
    pub length: T,
    pub dt: T,
    pub direction: Direction,
    pub quantity: Quantity,
    pub check_times: Vec<T>,
    pub errors: Vec<TimeErrors<T>>,
    pub tolerance: T,
    pub verdict: Verdict,
}

impl<T: Real> EquivalenceReport<T> {
    /// Largest max-norm difference over all times and both components.
    pub fn max_error(&self) -> T {
        self.errors.iter().fold(T::zero(), |a, e| a.max(e.max()))
    }

    fn finish(mut self) -> Self {
        self.verdict = Verdict::from_bool(self.max_error() <= self.tolerance);
        self
    }
}

/// Initial data, equation and sampling for a correspondence run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquivalenceCase<T> {
    pub grid: PeriodicGrid<T>,
    pub v0: SpectralField<T>,
    pub sigma0: Option<SpectralField<T>>,
    /// Dissipative equation; its `λ` must be positive.
    pub spec: EquationSpec<T>,
    pub check_times: Vec<T>,
    pub dt: T,
    pub tolerance: T,
}

impl<T: Real> EquivalenceCase<T> {
    fn validate(&self) -> Result<TimeMapParams<T>> {
        let n = self.grid.n();
        for f in std::iter::once(&self.v0).chain(self.sigma0.as_ref()) {
            if f.len() != n {
                return Err(Error::LengthMismatch { expected: n, got: f.len() });
            }
        }
        if !(self.spec.lambda() > T::zero()) {
            return Err(Error::InvalidParameter {
                name: "lambda",
                reason: format!("correspondence experiments need lambda > 0, got {}", self.spec.lambda()),
            });
        }
        if !(self.dt > T::zero()) {
            return Err(Error::InvalidParameter { name: "dt", reason: format!("must be positive, got {}", self.dt) });
        }
        TimeMapParams::new(self.spec.lambda(), self.spec.time_map_order())
    }

    fn initial_state(&self, ops: &SpectralOps<T>) -> TwoComponentState<T> {
        self.spec.state_from_velocity(ops, &self.v0, self.sigma0.as_ref())
    }

    fn report(&self, direction: Direction, errors: Vec<TimeErrors<T>>) -> EquivalenceReport<T> {
        EquivalenceReport {
            spec: self.spec,
            lambda: self.spec.lambda(),
            n: self.grid.n(),
            length: self.grid.length(),
            dt: self.dt,
            direction,
            quantity: Quantity::Velocity,
            check_times: self.check_times.clone(),
            errors,
            tolerance: self.tolerance,
            verdict: Verdict::Fail,
        }
        .finish()
    }
}

fn run_to<T>(
    ops: &SpectralOps<T>,
    initial: &TwoComponentState<T>,
    spec: &EquationSpec<T>,
    dt: T,
    times: &[T],
    side: RunSide,
) -> Result<Trajectory<T>>
where
    T: Real,
{
    integrate_to_times(ops, initial, spec, dt, times)?.require_completed(side)
}

/// Compares the dissipative run at `t_k` with `e^{-λt_k} u(τ(t_k))` from the
/// non-dissipative run started from the same data.
pub fn equivalence_experiment<T: Real>(case: &EquivalenceCase<T>) -> Result<EquivalenceReport<T>> {
    let map = case.validate()?;
    let ops = SpectralOps::new(case.grid);
    let initial = case.initial_state(&ops);
    let taus: Vec<T> = case.check_times.iter().map(|&t| map.tau(t)).collect();

    let direct = run_to(&ops, &initial, &case.spec, case.dt, &case.check_times, RunSide::Dissipative)?;
    let reference = run_to(&ops, &initial, &case.spec.non_dissipative(), case.dt, &taus, RunSide::Reference)?;

    let dx = case.grid.dx();
    let errors = direct
        .snapshots
        .iter()
        .zip(&reference.snapshots)
        .map(|(d, r)| {
            let v = map.map_field(&r.v, d.t);
            let sigma = map.map_field(&r.state.sigma, d.t);
            TimeErrors::between(d.t, dx, (&d.v, &v), (&d.state.sigma, &sigma))
        })
        .collect();
    Ok(case.report(Direction::Forward, errors))
}

/// Compares the non-dissipative run at `s_k` with
/// `e^{λ t_k} v(t_k)`, `t_k = τ⁻¹(s_k)`. `check_times` holds the `s_k`.
pub fn reverse_experiment<T: Real>(case: &EquivalenceCase<T>) -> Result<EquivalenceReport<T>> {
    let map = case.validate()?;
    let ops = SpectralOps::new(case.grid);
    let initial = case.initial_state(&ops);
    let ts = case.check_times.iter().map(|&s| map.tau_inverse(s)).collect::<Result<Vec<_>>>()?;

    let direct = run_to(&ops, &initial, &case.spec, case.dt, &ts, RunSide::Dissipative)?;
    let reference =
        run_to(&ops, &initial, &case.spec.non_dissipative(), case.dt, &case.check_times, RunSide::Reference)?;

    let dx = case.grid.dx();
    let errors = direct
        .snapshots
        .iter()
        .zip(&reference.snapshots)
        .map(|(d, r)| {
            let undo = T::one() / map.prefactor(d.t);
            let v = d.v.scaled(undo);
            let sigma = d.state.sigma.scaled(undo);
            TimeErrors::between(r.t, dx, (&r.v, &v), (&r.state.sigma, &sigma))
        })
        .collect();
    Ok(case.report(Direction::Reverse, errors))
}

/// Runs independent cases in parallel; results keep the input order.
pub fn equivalence_sweep<T: Real>(cases: &[EquivalenceCase<T>]) -> Vec<Result<EquivalenceReport<T>>> {
    cases.par_iter().map(equivalence_experiment).collect()
}

/// The dissipative Hunter-Saxton system (`m = -v_xx`, `b = 2`) for `data`.
pub fn hs_spec<T: Real>(data: &HsExactData<T>) -> EquationSpec<T> {
    EquationSpec::b_family(MKind::NegLaplacian, T::c(2.0), data.kappa(), data.lambda())
        .expect("validated Hunter-Saxton parameters")
}

/// Compares the numerical Hunter-Saxton solution with the closed form.
///
/// The comparison uses `v_x` and `σ`, which do not depend on the velocity
/// gauge, after shifting the oracle by [`HsExactData::gauge_shift`].
pub fn hs_oracle_experiment<T: Real>(
    data: &HsExactData<T>,
    check_times: &[T],
    dt: T,
    tolerance: T,
) -> Result<EquivalenceReport<T>> {
    let ops = data.ops();
    let spec = hs_spec(data);
    let v0 = data.initial_velocity();
    let initial = spec.state_from_velocity(ops, &v0, Some(data.rho0()));
    let run = run_to(ops, &initial, &spec, dt, check_times, RunSide::Dissipative)?;

    let dx = data.grid().dx();
    let mut errors = Vec::with_capacity(check_times.len());
    for snap in &run.snapshots {
        let (oracle_slope, oracle_sigma) = data.eulerian_fields(snap.t, data.gauge_shift(snap.t))?;
        // Before any step the numerical solution is the initial data itself.
        let (slope, sigma) = if snap.t == T::zero() {
            (data.v0x().clone(), data.rho0().clone())
        } else {
            (ops.dx(&snap.v), snap.state.sigma.clone())
        };
        errors.push(TimeErrors::between(snap.t, dx, (&slope, &oracle_slope), (&sigma, &oracle_sigma)));
    }
    Ok(EquivalenceReport {
        spec,
        lambda: data.lambda(),
        n: data.grid().n(),
        length: data.grid().length(),
        dt,
        direction: Direction::Forward,
        quantity: Quantity::Slope,
        check_times: check_times.to_vec(),
        errors,
        tolerance,
        verdict: Verdict::Fail,
    }
    .finish())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyReport<T> {
    pub lambda: T,
    pub times: Vec<T>,
    /// `e^{2λt} ∫(v_x² + κσ²) dx` at each time.
    pub weighted_energy: Vec<T>,
    pub max_relative_drift: T,
    pub tolerance: T,
    pub verdict: Verdict,
}

/// `e^{2λt} ∫(v_x² + κσ²) dx` along a numerical Hunter-Saxton run.
pub fn hs_energy_drift<T: Real>(
    grid: &PeriodicGrid<T>,
    v0: &SpectralField<T>,
    sigma0: &SpectralField<T>,
    spec: &EquationSpec<T>,
    dt: T,
    times: &[T],
    tolerance: T,
) -> Result<EnergyReport<T>> {
    let kappa = match spec.family {
        Family::BFamily { mkind: MKind::NegLaplacian, kappa, .. } => kappa.value::<T>(),
        _ => {
            return Err(Error::InvalidParameter {
                name: "spec",
                reason: "energy identity holds for the Hunter-Saxton kind".into(),
            })
        }
    };
    let ops = SpectralOps::new(*grid);
    let initial = spec.state_from_velocity(&ops, v0, Some(sigma0));
    let run = run_to(&ops, &initial, spec, dt, times, RunSide::Dissipative)?;
    let dx = grid.dx();
    let lambda = spec.lambda();
    let weighted: Vec<T> = run
        .snapshots
        .iter()
        .map(|s| {
            let vx = ops.dx(&s.v);
            let e = vx.zip_map(&s.state.sigma, |a, r| a * a + kappa * r * r).integral(dx);
            ((lambda + lambda) * s.t).exp() * e
        })
        .collect();
    let e0 = {
        let vx = ops.dx(&spec.velocity(&ops, &initial)?);
        vx.zip_map(sigma0, |a, r| a * a + kappa * r * r).integral(dx)
    };
    let drift = weighted.iter().fold(T::zero(), |a, &e| a.max((e - e0).abs() / e0.abs()));
    Ok(EnergyReport {
        lambda,
        times: times.to_vec(),
        weighted_energy: weighted,
        max_relative_drift: drift,
        tolerance,
        verdict: Verdict::from_bool(drift <= tolerance),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlowupCase<T> {
    pub grid: PeriodicGrid<T>,
    pub v0: SpectralField<T>,
    pub sigma0: Option<SpectralField<T>>,
    /// Dissipative equation; its `λ` must be positive.
    pub spec: EquationSpec<T>,
    pub dt: T,
    /// Time up to which the non-dissipative run looks for blow-up.
    pub reference_horizon: T,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlowupReport<T> {
    pub lambda: T,
    pub order: u8,
    pub n: usize,
    pub dt: T,
    pub threshold: T,
    pub reference_horizon: T,
    /// Non-dissipative blow-up time `S`, if observed.
    pub s_measured: Option<T>,
    /// Dissipative blow-up time `T`, if observed before `dissipative_horizon`.
    pub t_measured: Option<T>,
    /// Predicted `T`; `None` when the dissipative solution is global.
    pub t_predicted: Option<T>,
    pub dissipative_horizon: T,
    pub relative_mismatch: Option<T>,
    pub tolerance: T,
    pub verdict: Verdict,
}

fn slope_norm<T: Real>(ops: &SpectralOps<T>, spec: &EquationSpec<T>, state: &TwoComponentState<T>) -> Result<T> {
    Ok(monitor(ops, spec, state, T::infinity())?.map_or(T::infinity(), |(_, slope)| slope))
}

/// First time `|v_x|_inf` reaches `threshold`, or `None` before `t_end`.
///
/// Steps of size `dt`; the crossing step is refined by bisection on the
/// length of a single step from the last state below the threshold.
pub fn measure_blowup_time<T: Real>(
    ops: &SpectralOps<T>,
    initial: &TwoComponentState<T>,
    spec: &EquationSpec<T>,
    dt: T,
    t_end: T,
    threshold: T,
) -> Result<Option<T>> {
    if slope_norm(ops, spec, initial)? >= threshold {
        return Ok(Some(T::zero()));
    }
    let steps = (t_end / dt).ceil().to_usize().unwrap_or(usize::MAX);
    let mut state = initial.clone();
    for step in 0..steps {
        let t = T::from_usize_lossy(step) * dt;
        let next = rk4_step(ops, spec, &state, dt)?;
        if slope_norm(ops, spec, &next)? < threshold {
            state = next;
            continue;
        }
        let (mut lo, mut hi) = (T::zero(), dt);
        for _ in 0..BISECTION_STEPS {
            let mid = (lo + hi) * T::c(0.5);
            if slope_norm(ops, spec, &rk4_step(ops, spec, &state, mid)?)? >= threshold {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        return Ok(Some(t + hi));
    }
    Ok(None)
}

/// Measures the non-dissipative blow-up time `S` and the dissipative one
/// `T`, and compares `T` with `existence_time(S)`.
pub fn blowup_correspondence_experiment<T: Real>(case: &BlowupCase<T>) -> Result<BlowupReport<T>> {
    let lambda = case.spec.lambda();
    if !(lambda > T::zero()) {
        return Err(Error::InvalidParameter { name: "lambda", reason: format!("must be positive, got {lambda}") });
    }
    let map = TimeMapParams::new(lambda, case.spec.time_map_order())?;
    let ops = SpectralOps::new(case.grid);
    let initial = case.spec.state_from_velocity(&ops, &case.v0, case.sigma0.as_ref());
    let threshold = T::c(BLOWUP_MEASURE_THRESHOLD);

    let s = measure_blowup_time(
        &ops,
        &initial,
        &case.spec.non_dissipative(),
        case.dt,
        case.reference_horizon,
        threshold,
    )?;
    let predicted = match s {
        Some(s) if s > T::zero() => Some(map.existence_time(s)?).filter(|t| t.is_finite()),
        Some(_) => Some(T::zero()),
        None => None,
    };
    let horizon = match (s, predicted) {
        (_, Some(t)) => t + t,
        (Some(_), None) => T::c(3.0) / lambda,
        (None, None) => case.reference_horizon,
    };
    let t = measure_blowup_time(&ops, &initial, &case.spec, case.dt, horizon, threshold)?;
    if s.is_none() && t.is_none() {
        return Err(Error::NoBlowUpObserved);
    }
    let mismatch = match (t, predicted) {
        (Some(t), Some(p)) if p > T::zero() => Some((t - p).abs() / p),
        _ => None,
    };
    let tolerance = T::c(BLOWUP_TOLERANCE);
    let consistent = match (s, predicted) {
        (Some(_), Some(_)) => mismatch.is_some_and(|m| m <= tolerance),
        (Some(_), None) => t.is_none(),
        (None, _) => false,
    };
    Ok(BlowupReport {
        lambda,
        order: map.order(),
        n: case.grid.n(),
        dt: case.dt,
        threshold,
        reference_horizon: case.reference_horizon,
        s_measured: s,
        t_measured: t,
        t_predicted: predicted,
        dissipative_horizon: horizon,
        relative_mismatch: mismatch,
        tolerance,
        verdict: Verdict::from_bool(consistent),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DecayClass {
    /// Every doubling cuts the error by at least [`SPECTRAL_RATIO`] or the
    /// error already sits below [`CONVERGENCE_FLOOR`].
    Spectral,
    /// Errors decrease, but more slowly; `order` is the mean `log2` ratio.
    Algebraic { order: f64 },
    /// Errors do not decrease.
    Stalled,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow<T> {
    pub n: usize,
    pub error: T,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport<T> {
    pub spec: EquationSpec<T>,
    pub t_check: T,
    pub dt: T,
    pub resolutions: Vec<usize>,
    pub table: Vec<ConvergenceRow<T>>,
    pub classification: DecayClass,
    pub verdict: Verdict,
}

/// Classifies a sequence of errors on successively doubled grids.
pub fn classify_decay<T: Real>(errors: &[T]) -> DecayClass {
    let floor = T::c(CONVERGENCE_FLOOR);
    let pairs: Vec<(T, T)> = errors.windows(2).map(|w| (w[0], w[1])).collect();
    let spectral = pairs.iter().all(|&(a, b)| b <= floor || a >= T::c(SPECTRAL_RATIO) * b);
    if spectral {
        return DecayClass::Spectral;
    }
    let ratios: Vec<f64> = pairs
        .iter()
        .filter(|&&(_, b)| b > floor)
        .map(|&(a, b)| (a / b).to_f64_lossy().log2())
        .collect();
    let order = ratios.iter().sum::<f64>() / ratios.len().max(1) as f64;
    if ratios.iter().all(|&r| r > 0.0) {
        DecayClass::Algebraic { order }
    } else {
        DecayClass::Stalled
    }
}

/// Forward correspondence error at `t_check` on each resolution.
pub fn convergence_study<T: Real>(
    v0: &TrigSeries<T>,
    sigma0: Option<&TrigSeries<T>>,
    spec: &EquationSpec<T>,
    length: T,
    t_check: T,
    resolutions: &[usize],
    dt: T,
) -> Result<ConvergenceReport<T>> {
    if resolutions.is_empty() {
        return Err(Error::InvalidParameter { name: "resolutions", reason: "must not be empty".into() });
    }
    for (i, &n) in resolutions.iter().enumerate() {
        if !RESOLUTIONS.contains(&n) {
            return Err(Error::InvalidParameter {
                name: "resolutions",
                reason: format!("each entry must be one of {RESOLUTIONS:?}, got {n}"),
            });
        }
        if i > 0 && n <= resolutions[i - 1] {
            return Err(Error::InvalidParameter { name: "resolutions", reason: "must be strictly increasing".into() });
        }
    }
    let cases = resolutions
        .iter()
        .map(|&n| {
            let grid = PeriodicGrid::new(n, length)?;
            Ok(EquivalenceCase {
                grid,
                v0: v0.sample(&grid),
                sigma0: sigma0.map(|s| s.sample(&grid)),
                spec: *spec,
                check_times: vec![t_check],
                dt,
                tolerance: T::infinity(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let reports = equivalence_sweep(&cases).into_iter().collect::<Result<Vec<_>>>()?;
    let table: Vec<ConvergenceRow<T>> =
        reports.iter().zip(resolutions).map(|(r, &n)| ConvergenceRow { n, error: r.max_error() }).collect();
    let errors: Vec<T> = table.iter().map(|r| r.error).collect();
    let classification = classify_decay(&errors);
    Ok(ConvergenceReport {
        spec: *spec,
        t_check,
        dt,
        resolutions: resolutions.to_vec(),
        table,
        classification,
        verdict: Verdict::from_bool(classification == DecayClass::Spectral),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DualReport<T> {
    pub lambda: T,
    pub n: usize,
    pub dt: T,
    pub t_check: T,
    pub max_difference: T,
    pub tolerance: T,
    pub verdict: Verdict,
}

/// Camassa-Holm in momentum form against its nonlocal velocity form.
pub fn dual_formulation_check<T: Real>(
    grid: &PeriodicGrid<T>,
    v0: &SpectralField<T>,
    lambda: T,
    dt: T,
    t_check: T,
    tolerance: T,
) -> Result<DualReport<T>> {
    let ops = SpectralOps::new(*grid);
    let momentum = EquationSpec::camassa_holm(lambda)?;
    let weak = EquationSpec::ch_weak_form(lambda)?;
    let times = [t_check];
    let a = run_to(&ops, &momentum.state_from_velocity(&ops, v0, None), &momentum, dt, &times, RunSide::Dissipative)?;
    let b = run_to(&ops, &weak.state_from_velocity(&ops, v0, None), &weak, dt, &times, RunSide::Reference)?;
    let diff = (&a.snapshots[0].v - &b.snapshots[0].v).max_abs();
    Ok(DualReport {
        lambda,
        n: grid.n(),
        dt,
        t_check,
        max_difference: diff,
        tolerance,
        verdict: Verdict::from_bool(diff <= tolerance),
    })
}
