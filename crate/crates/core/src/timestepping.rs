//! Fixed-step classical RK4 with exact-time snapshots and blow-up detection.

use serde::{Deserialize, Serialize};

use crate::equations::{EquationSpec, TwoComponentState};
use crate::error::{Error, Result};
use crate::field::SpectralField;
use crate::grid::PeriodicGrid;
use crate::scalar::Real;
use crate::spectral::SpectralOps;

/// Default kill threshold on `|v_x|_inf`.
pub const DEFAULT_BLOWUP_THRESHOLD: f64 = 1e6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntegratorConfig<T> {
    pub dt: T,
    pub t_end: T,
    /// Output times, sorted, inside `[0, t_end]`, each a multiple of `dt`.
    pub snapshot_times: Vec<T>,
    pub blowup_threshold: T,
    pub dealias_enabled: bool,
}

impl<T: Real> IntegratorConfig<T> {
    /// Snapshots at `0` and `t_end`, default threshold, dealiasing on.
    pub fn new(dt: T, t_end: T) -> Self {
        Self {
            dt,
            t_end,
            snapshot_times: vec![T::zero(), t_end],
            blowup_threshold: T::c(DEFAULT_BLOWUP_THRESHOLD),
            dealias_enabled: true,
        }
    }

    pub fn with_snapshots(mut self, times: Vec<T>) -> Self {
        self.snapshot_times = times;
        self
    }

    pub fn with_blowup_threshold(mut self, threshold: T) -> Self {
        self.blowup_threshold = threshold;
        self
    }

    pub fn with_dealiasing(mut self, enabled: bool) -> Self {
        self.dealias_enabled = enabled;
        self
    }

    fn steps_to(&self, t: T, what: &str) -> Result<usize> {
        let ratio = t / self.dt;
        let steps = ratio.round();
        if (ratio - steps).abs() > T::tol(1e-9) * T::one().max(ratio) {
            return Err(Error::Config(format!("{what} {t} is not a multiple of dt = {}", self.dt)));
        }
        steps.to_usize().ok_or_else(|| Error::Config(format!("{what} {t} out of range")))
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > T::zero()) || !self.dt.is_finite() {
            return Err(Error::Config(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.dt <= self.t_end) || !self.t_end.is_finite() {
            return Err(Error::Config(format!("need 0 < dt <= t_end, got dt = {}, t_end = {}", self.dt, self.t_end)));
        }
        if !(self.blowup_threshold > T::zero()) {
            return Err(Error::Config("blowup_threshold must be positive".into()));
        }
        check_times_sorted(&self.snapshot_times)?;
        if let Some(&last) = self.snapshot_times.last() {
            if last > self.t_end {
                return Err(Error::Config(format!("snapshot time {last} beyond t_end = {}", self.t_end)));
            }
        }
        self.steps_to(self.t_end, "t_end")?;
        for &t in &self.snapshot_times {
            self.steps_to(t, "snapshot time")?;
        }
        Ok(())
    }
}

/// `min(1e-3, 0.5 dx / max(1, |v0|_inf))`.
pub fn default_dt<T: Real>(grid: &PeriodicGrid<T>, v0: &SpectralField<T>) -> T {
    let cfl = T::c(0.5) * grid.dx() / T::one().max(v0.max_abs());
    T::c(1e-3).min(cfl)
}

fn check_times_sorted<T: Real>(times: &[T]) -> Result<()> {
    for (i, &t) in times.iter().enumerate() {
        if !(t >= T::zero()) || !t.is_finite() {
            return Err(Error::Config(format!("output time {t} must be finite and >= 0")));
        }
        if i > 0 && !(t > times[i - 1]) {
            return Err(Error::Config("output times must be strictly increasing".into()));
        }
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Snapshot<T> {
    pub t: T,
    pub state: TwoComponentState<T>,
    pub v: SpectralField<T>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Termination<T> {
    Completed,
    BlowUp { t_detect: T },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory<T> {
    pub snapshots: Vec<Snapshot<T>>,
    pub termination: Termination<T>,
}

impl<T: Real> Trajectory<T> {
    pub fn is_blowup(&self) -> bool {
        matches!(self.termination, Termination::BlowUp { .. })
    }

    pub fn last(&self) -> Option<&Snapshot<T>> {
        self.snapshots.last()
    }

    /// Converts a blow-up termination into an [`Error::BlowUp`].
    pub fn require_completed(self, side: crate::error::RunSide) -> Result<Self> {
        match self.termination {
            Termination::Completed => Ok(self),
            Termination::BlowUp { t_detect } => Err(Error::BlowUp { side, t: t_detect.to_f64_lossy() }),
        }
    }
}

/// One classical RK4 step of size `h`.
pub fn rk4_step<T: Real>(
    ops: &SpectralOps<T>,
    spec: &EquationSpec<T>,
    state: &TwoComponentState<T>,
    h: T,
) -> Result<TwoComponentState<T>> {
    let half = h * T::c(0.5);
    let k1 = spec.rhs(ops, state)?;
    let k2 = spec.rhs(ops, &state.add_scaled(half, &k1))?;
    let k3 = spec.rhs(ops, &state.add_scaled(half, &k2))?;
    let k4 = spec.rhs(ops, &state.add_scaled(h, &k3))?;
    let sixth = h / T::c(6.0);
    let two = T::c(2.0);
    let combine = |s: &SpectralField<T>, a: &SpectralField<T>, b: &SpectralField<T>, c: &SpectralField<T>, d: &SpectralField<T>| {
        SpectralField::from_vec_unchecked(
            (0..s.len()).map(|j| s[j] + sixth * (a[j] + two * b[j] + two * c[j] + d[j])).collect(),
        )
    };
    Ok(TwoComponentState {
        m: combine(&state.m, &k1.m, &k2.m, &k3.m, &k4.m),
        sigma: combine(&state.sigma, &k1.sigma, &k2.sigma, &k3.sigma, &k4.sigma),
    })
}

/// Velocity of `state` and `|v_x|_inf`, or `None` once the state is
/// non-finite or the slope exceeds `threshold`.
pub fn monitor<T: Real>(
    ops: &SpectralOps<T>,
    spec: &EquationSpec<T>,
    state: &TwoComponentState<T>,
    threshold: T,
) -> Result<Option<(SpectralField<T>, T)>> {
    if !state.is_finite() {
        return Ok(None);
    }
    let v = match spec.velocity(ops, state) {
        Ok(v) => v,
        Err(Error::IncompatibleMean { .. }) if !state.m.is_finite() => return Ok(None),
        Err(e) => return Err(e),
    };
    let slope = ops.dx(&v).max_abs();
    if !v.is_finite() || !slope.is_finite() || slope > threshold {
        return Ok(None);
    }
    Ok(Some((v, slope)))
}

/// Integrates with fixed steps `config.dt` up to `config.t_end`.
pub fn integrate<T: Real>(
    ops: &SpectralOps<T>,
    initial: &TwoComponentState<T>,
    spec: &EquationSpec<T>,
    config: &IntegratorConfig<T>,
) -> Result<Trajectory<T>> {
    config.validate()?;
    check_state_len(ops, initial)?;
    let ops = ops.clone().with_product_dealiasing(config.dealias_enabled);
    let total = config.steps_to(config.t_end, "t_end")?;
    let mut pending = config
        .snapshot_times
        .iter()
        .map(|&t| Ok((config.steps_to(t, "snapshot time")?, t)))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .peekable();

    let mut snapshots = Vec::new();
    let mut state = initial.clone();
    let Some((mut v, _)) = monitor(&ops, spec, &state, config.blowup_threshold)? else {
        return Ok(Trajectory { snapshots, termination: Termination::BlowUp { t_detect: T::zero() } });
    };
    for step in 0..=total {
        while let Some(&(k, t)) = pending.peek() {
            if k != step {
                break;
            }
            snapshots.push(Snapshot { t, state: state.clone(), v: v.clone() });
            pending.next();
        }
        if step == total {
            break;
        }
        state = rk4_step(&ops, spec, &state, config.dt)?;
        let t_now = T::from_usize_lossy(step + 1) * config.dt;
        match monitor(&ops, spec, &state, config.blowup_threshold)? {
            Some((next_v, _)) => v = next_v,
            None => return Ok(Trajectory { snapshots, termination: Termination::BlowUp { t_detect: t_now } }),
        }
    }
    Ok(Trajectory { snapshots, termination: Termination::Completed })
}

/// Integrates with steps no longer than `base_dt`, shortening the last step
/// of each segment so that every entry of `times` is hit exactly.
pub fn integrate_to_times<T: Real>(
    ops: &SpectralOps<T>,
    initial: &TwoComponentState<T>,
    spec: &EquationSpec<T>,
    base_dt: T,
    times: &[T],
) -> Result<Trajectory<T>> {
    integrate_to_times_with_threshold(ops, initial, spec, base_dt, times, T::c(DEFAULT_BLOWUP_THRESHOLD))
}

pub fn integrate_to_times_with_threshold<T: Real>(
    ops: &SpectralOps<T>,
    initial: &TwoComponentState<T>,
    spec: &EquationSpec<T>,
    base_dt: T,
    times: &[T],
    threshold: T,
) -> Result<Trajectory<T>> {
    if !(base_dt > T::zero()) || !base_dt.is_finite() {
        return Err(Error::Config(format!("base_dt must be positive, got {base_dt}")));
    }
    check_times_sorted(times)?;
    check_state_len(ops, initial)?;

    let mut snapshots = Vec::with_capacity(times.len());
    let mut state = initial.clone();
    let Some((mut v, _)) = monitor(ops, spec, &state, threshold)? else {
        return Ok(Trajectory { snapshots, termination: Termination::BlowUp { t_detect: T::zero() } });
    };
    let mut t = T::zero();
    for &target in times {
        let start = t;
        let slack = T::epsilon() * T::c(64.0) * T::one().max(target);
        let mut full_steps = 0usize;
        while target - t > slack {
            let remaining = target - t;
            let (h, next_t) = if remaining <= base_dt + slack {
                (remaining, target)
            } else {
                full_steps += 1;
                (base_dt, start + T::from_usize_lossy(full_steps) * base_dt)
            };
            state = rk4_step(ops, spec, &state, h)?;
            match monitor(ops, spec, &state, threshold)? {
                Some((next_v, _)) => v = next_v,
                None => return Ok(Trajectory { snapshots, termination: Termination::BlowUp { t_detect: next_t } }),
            }
            t = next_t;
        }
        t = target;
        snapshots.push(Snapshot { t: target, state: state.clone(), v: v.clone() });
    }
    Ok(Trajectory { snapshots, termination: Termination::Completed })
}

fn check_state_len<T: Real>(ops: &SpectralOps<T>, state: &TwoComponentState<T>) -> Result<()> {
    for len in [state.m.len(), state.sigma.len()] {
        if len != ops.n() {
            return Err(Error::LengthMismatch { expected: ops.n(), got: len });
        }
    }
    if !state.is_finite() {
        return Err(Error::NonFinite { index: 0 });
    }
    Ok(())
}
