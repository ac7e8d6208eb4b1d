//! Nonlinear time integration.
//!
//! Each Fourier mode is a driven oscillator. In the variables
//! `Z = r u + i v`, `W = r u - i v` (with `r = omega / |xi|`) the system is
//! diagonal in its linear part,
//!
//! ```text
//! Z' = -i omega Z - i |xi| f_hat(u)
//! W' =  i omega W + i |xi| f_hat(u)
//! ```
//!
//! and is advanced by an exponential integrator from [`scheme`].

pub mod scheme;
mod theory;

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::energy::{energy, sobolev_norm_sq, theorem_quantity, EnergyBreakdown};
use crate::error::{Error, Result};
use crate::imethod::{modified_energy, IMultiplier};
use crate::linear::{build_state, Dispersion, State};
use crate::params::ModelParams;
use crate::spectral::{from_spectral, nonlinearity, Grid, RealField, SpectralField};

pub use scheme::{scheme_by_name, scheme_names, Etdrk4, Lawson4, PreparedScheme, TimeScheme};
pub use theory::{
    admissible_s_range, growth_bound_check, growth_exponent, local_existence_delta, AdmissibleRange, GrowthCheck,
    EPSILON,
};

pub const BLOWUP_LINF: f64 = 1e6;
pub const BLOWUP_QUANTITY: f64 = 1e12;

/// `min(0.1, 1 / max omega)`.
pub fn default_dt(disp: &Dispersion) -> f64 {
    let w = disp.max_omega();
    if w > 0.0 {
        0.1f64.min(1.0 / w)
    } else {
        0.1
    }
}

/// Fixed-step propagator for one grid, parameter set and step size.
pub struct Stepper {
    grid: Arc<Grid>,
    params: ModelParams,
    dt: f64,
    ratio: Vec<f64>,
    abs_xi: Vec<f64>,
    nonlinear: bool,
    prepared: Box<dyn PreparedScheme>,
}

impl fmt::Debug for Stepper {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Stepper")
            .field("n", &self.grid.n())
            .field("dt", &self.dt)
            .field("nonlinear", &self.nonlinear)
            .finish()
    }
}

impl Stepper {
    pub fn new(
        grid: Arc<Grid>,
        params: &ModelParams,
        dt: f64,
        scheme: &dyn TimeScheme,
        nonlinear: bool,
    ) -> Result<Self> {
        params.validate()?;
        if !(dt.is_finite() && dt > 0.0) {
            return Err(Error::InvalidParameter { name: "dt", reason: format!("dt > 0 is required, got {dt}") });
        }
        let disp = Dispersion::new(Arc::clone(&grid), params.beta)?;
        let n = grid.n();
        let mut lambda = Vec::with_capacity(2 * n);
        lambda.extend(disp.omega.iter().map(|&w| Complex64::new(0.0, -w)));
        lambda.extend(disp.omega.iter().map(|&w| Complex64::new(0.0, w)));
        let prepared = scheme.prepare(&lambda, dt);
        let abs_xi = grid.freqs().iter().map(|xi| xi.abs()).collect();
        Ok(Self { grid, params: *params, dt, ratio: disp.ratio, abs_xi, nonlinear, prepared })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    fn to_diagonal(&self, state: &State) -> Vec<Complex64> {
        let n = self.grid.n();
        let i = Complex64::new(0.0, 1.0);
        let mut y = Vec::with_capacity(2 * n);
        y.extend((0..n).map(|p| state.u.coeffs[p] * self.ratio[p] + i * state.v.coeffs[p]));
        y.extend((0..n).map(|p| state.u.coeffs[p] * self.ratio[p] - i * state.v.coeffs[p]));
        y
    }

    fn u_from_diagonal(&self, y: &[Complex64]) -> SpectralField {
        let n = self.grid.n();
        let coeffs = (0..n).map(|p| (y[p] + y[n + p]) / (2.0 * self.ratio[p])).collect();
        SpectralField { grid: Arc::clone(&self.grid), coeffs }
    }

    fn state_from_diagonal(&self, y: &[Complex64], t: f64) -> State {
        let n = self.grid.n();
        let half_i = Complex64::new(0.0, -0.5);
        let v = (0..n).map(|p| (y[p] - y[n + p]) * half_i).collect();
        State { u: self.u_from_diagonal(y), v: SpectralField { grid: Arc::clone(&self.grid), coeffs: v }, t }
    }

    fn remainder(&self, y: &[Complex64]) -> Result<Vec<Complex64>> {
        let n = self.grid.n();
        if !self.nonlinear {
            return Ok(vec![Complex64::new(0.0, 0.0); 2 * n]);
        }
        let f = nonlinearity(&self.u_from_diagonal(y), self.params.k, self.params.sign.value())?;
        let mut out = Vec::with_capacity(2 * n);
        out.extend((0..n).map(|p| Complex64::new(0.0, -self.abs_xi[p]) * f.coeffs[p]));
        out.extend((0..n).map(|p| Complex64::new(0.0, self.abs_xi[p]) * f.coeffs[p]));
        Ok(out)
    }

    pub fn step(&self, state: &State) -> Result<State> {
        state.grid().check_same(&self.grid)?;
        let y = self.to_diagonal(state);
        let rhs = |y: &[Complex64]| self.remainder(y);
        let next =
            self.prepared.advance(&y, &rhs).map_err(|e| Error::StepFailure { t: state.t, reason: e.to_string() })?;
        let out = self.state_from_diagonal(&next, state.t + self.dt);
        if !out.is_finite() {
            return Err(Error::StepFailure { t: state.t, reason: "non-finite state".into() });
        }
        Ok(out)
    }
}

/// One ETDRK4 step of the full equation.
pub fn step(state: &State, dt: f64, params: &ModelParams) -> Result<State> {
    Stepper::new(Arc::clone(state.grid()), params, dt, &Etdrk4, true)?.step(state)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationSettings {
    pub horizon: f64,
    /// Defaults to [`default_dt`]; adjusted down so that an integer number of
    /// steps lands on the horizon.
    pub dt: Option<f64>,
    pub snapshot_every: usize,
    pub scheme: String,
    pub nonlinear: bool,
    pub blowup_linf: f64,
    pub blowup_quantity: f64,
}

impl Default for SimulationSettings {
    fn default() -> Self {
        Self {
            horizon: 10.0,
            dt: None,
            snapshot_every: 1,
            scheme: "etdrk4".into(),
            nonlinear: true,
            blowup_linf: BLOWUP_LINF,
            blowup_quantity: BLOWUP_QUANTITY,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum TerminationStatus {
    Completed,
    BlowupDetected { t: f64, reason: String },
    StepFailure { t: f64, reason: String },
}

impl TerminationStatus {
    pub fn is_completed(&self) -> bool {
        matches!(self, TerminationStatus::Completed)
    }

    pub fn label(&self) -> &'static str {
        match self {
            TerminationStatus::Completed => "completed",
            TerminationStatus::BlowupDetected { .. } => "blowup_detected",
            TerminationStatus::StepFailure { .. } => "step_failure",
        }
    }
}

impl fmt::Display for TerminationStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TerminationStatus::Completed => write!(f, "completed"),
            TerminationStatus::BlowupDetected { t, reason } => write!(f, "blowup_detected at t = {t}: {reason}"),
            TerminationStatus::StepFailure { t, reason } => write!(f, "step_failure at t = {t}: {reason}"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Snapshot {
    pub t: f64,
    pub state: State,
    pub energy: EnergyBreakdown,
    pub modified_energy: EnergyBreakdown,
    /// `||u||_{H^s}^2`
    pub hs_norm_sq: f64,
    pub theorem_quantity: f64,
    pub linf: f64,
}

impl Snapshot {
    pub fn record(state: State, params: &ModelParams, mult: &IMultiplier) -> Result<Self> {
        Ok(Self {
            t: state.t,
            energy: energy(&state, params)?,
            modified_energy: modified_energy(&state, params, mult)?,
            hs_norm_sq: sobolev_norm_sq(&state.u, params.s),
            theorem_quantity: theorem_quantity(&state, params.s),
            linf: from_spectral(&state.u).max_abs(),
            state,
        })
    }

    /// The same snapshot seen at time `-t` with `v` negated.
    fn reversed(&self) -> Self {
        Self { t: -self.t, state: self.state.reversed(), ..self.clone() }
    }
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub params: ModelParams,
    pub grid: Arc<Grid>,
    pub dt: f64,
    pub snapshots: Vec<Snapshot>,
    pub status: TerminationStatus,
}

impl Trajectory {
    pub fn times(&self) -> Vec<f64> {
        self.snapshots.iter().map(|s| s.t).collect()
    }

    pub fn last(&self) -> &Snapshot {
        self.snapshots.last().expect("trajectory always stores its initial state")
    }

    /// `|E(t_last) - E(t_0)| / |E(t_0)|`; absolute drift when `E(t_0) = 0`.
    pub fn relative_energy_drift(&self) -> f64 {
        let e0 = self.snapshots[0].energy.total;
        let e1 = self.last().energy.total;
        if e0 == 0.0 {
            (e1 - e0).abs()
        } else {
            ((e1 - e0) / e0).abs()
        }
    }

    pub fn max_relative_energy_drift(&self) -> f64 {
        let e0 = self.snapshots[0].energy.total;
        let scale = if e0 == 0.0 { 1.0 } else { e0.abs() };
        self.snapshots.iter().map(|s| (s.energy.total - e0).abs() / scale).fold(0.0, f64::max)
    }
}

pub fn simulate(
    g: &RealField,
    h: &RealField,
    params: &ModelParams,
    settings: &SimulationSettings,
) -> Result<Trajectory> {
    simulate_state(build_state(g, h)?, params, settings)
}

/// Number of steps and the uniform step that lands exactly on `horizon`.
pub fn step_plan(horizon: f64, dt: f64) -> (usize, f64) {
    let steps = ((horizon / dt) - 1e-9).ceil().max(1.0) as usize;
    (steps, horizon / steps as f64)
}

pub fn simulate_state(initial: State, params: &ModelParams, settings: &SimulationSettings) -> Result<Trajectory> {
    params.validate()?;
    if !(settings.horizon.is_finite() && settings.horizon > 0.0) {
        return Err(Error::InvalidParameter {
            name: "T",
            reason: format!("T > 0 is required, got {}", settings.horizon),
        });
    }
    if settings.snapshot_every == 0 {
        return Err(Error::InvalidParameter { name: "snapshot_every", reason: "must be at least 1".into() });
    }
    let grid = Arc::clone(initial.grid());
    let disp = Dispersion::new(Arc::clone(&grid), params.beta)?;
    let requested = settings.dt.unwrap_or_else(|| default_dt(&disp));
    if !(requested.is_finite() && requested > 0.0) {
        return Err(Error::InvalidParameter { name: "dt", reason: format!("dt > 0 is required, got {requested}") });
    }
    let (steps, dt) = step_plan(settings.horizon, requested);
    let scheme = scheme_by_name(&settings.scheme)?;
    let stepper = Stepper::new(Arc::clone(&grid), params, dt, scheme.as_ref(), settings.nonlinear)?;
    let mult = IMultiplier::from_params(Arc::clone(&grid), params)?;

    let t0 = initial.t;
    let mut snapshots = vec![Snapshot::record(initial.clone(), params, &mult)?];
    let mut state = initial;
    let mut status = TerminationStatus::Completed;
    for i in 1..=steps {
        let mut next = match stepper.step(&state) {
            Ok(s) => s,
            Err(e) => {
                status = TerminationStatus::StepFailure { t: state.t, reason: e.to_string() };
                break;
            }
        };
        next.t = t0 + i as f64 * dt;
        let linf = from_spectral(&next.u).max_abs();
        let quantity = theorem_quantity(&next, params.s);
        let blown = if linf > settings.blowup_linf {
            Some(format!("||u||_inf = {linf:e} exceeds {:e}", settings.blowup_linf))
        } else if quantity > settings.blowup_quantity {
            Some(format!("theorem quantity {quantity:e} exceeds {:e}", settings.blowup_quantity))
        } else {
            None
        };
        if let Some(reason) = blown {
            if let Ok(snap) = Snapshot::record(next.clone(), params, &mult) {
                snapshots.push(snap);
            }
            status = TerminationStatus::BlowupDetected { t: next.t, reason };
            break;
        }
        if i % settings.snapshot_every == 0 || i == steps {
            match Snapshot::record(next.clone(), params, &mult) {
                Ok(s) => snapshots.push(s),
                Err(e) => {
                    status = TerminationStatus::StepFailure { t: next.t, reason: e.to_string() };
                    break;
                }
            }
        }
        state = next;
    }
    Ok(Trajectory { params: *params, grid, dt, snapshots, status })
}

/// Trajectory on `[-horizon, horizon]`, the backward half obtained by running the
/// time-reversed state `(u, -v)` forward.
pub fn simulate_two_sided(initial: State, params: &ModelParams, settings: &SimulationSettings) -> Result<Trajectory> {
    let forward = simulate_state(initial.clone(), params, settings)?;
    let backward = simulate_state(initial.reversed(), params, settings)?;
    let status = if !backward.status.is_completed() { backward.status.clone() } else { forward.status.clone() };
    let mut snapshots: Vec<Snapshot> = backward.snapshots.iter().skip(1).rev().map(Snapshot::reversed).collect();
    snapshots.extend(forward.snapshots);
    Ok(Trajectory { params: *params, grid: forward.grid, dt: forward.dt, snapshots, status })
}
