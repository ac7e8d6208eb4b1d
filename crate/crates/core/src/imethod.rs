//! Smoothing multipliers `I = I_N^{2-s}`, the modified energy `E(Iu)` and its
//! increment over a time window.

use std::sync::Arc;

use log::warn;
use serde::{Deserialize, Serialize};

use crate::energy::{energy, sobolev_norm, EnergyBreakdown};
use crate::error::{Error, Result};
use crate::evolution::{local_existence_delta, simulate, SimulationSettings, Trajectory};
use crate::fit::{fit_power_law, PowerLawFit};
use crate::linear::State;
use crate::params::ModelParams;
use crate::spectral::{bracket, mode_index, Grid, RealField, SpectralField};

/// Increments below this magnitude are treated as round-off.
pub const NOISE_FLOOR: f64 = 1e-14;

/// Largest grid accepted by the brute-force increment oracle.
/// Snapshots kept per scan run for the sup norms.
pub const SCAN_SNAPSHOTS: usize = 256;
pub const ORACLE_MAX_N: usize = 32;

/// The even multiplier `m`: 1 on `|x| <= 1`, `1/|x|` on `|x| >= 2`.
///
/// On `1 < |x| < 2`, `log m` is the cubic Hermite interpolant in `y = log|x|`
/// with values `0, -log 2` and slopes `0, -1` at the ends, which reduces to
/// `log m = -log 2 * t^2 (2 - t)` with `t = log|x| / log 2`. Its derivative
/// `t (4 - 3t) >= 0` on `[0, 1]`, so `m` is nonincreasing.
pub fn m_multiplier(x: f64) -> f64 {
    let a = x.abs();
    if a <= 1.0 {
        1.0
    } else if a >= 2.0 {
        1.0 / a
    } else {
        let h = std::f64::consts::LN_2;
        let t = a.ln() / h;
        (-h * t * t * (2.0 - t)).exp()
    }
}

/// `M(xi) = m(xi / N)^sigma` with `sigma = 2 - s`, tabulated on a grid.
#[derive(Debug, Clone)]
pub struct IMultiplier {
    pub grid: Arc<Grid>,
    pub s: f64,
    pub cutoff: f64,
    pub sigma: f64,
    pub values: Vec<f64>,
}

impl IMultiplier {
    pub fn new(grid: Arc<Grid>, s: f64, cutoff: f64) -> Result<Self> {
        if !(s.is_finite() && s <= 2.0) {
            return Err(Error::InvalidParameter { name: "s", reason: format!("s <= 2 is required, got {s}") });
        }
        if !(cutoff.is_finite() && cutoff >= 1.0) {
            return Err(Error::InvalidParameter { name: "N", reason: format!("N >= 1 is required, got {cutoff}") });
        }
        let sigma = 2.0 - s;
        let values = grid.freqs().iter().map(|&xi| m_multiplier(xi / cutoff).powf(sigma)).collect();
        Ok(Self { grid, s, cutoff, sigma, values })
    }

    pub fn from_params(grid: Arc<Grid>, params: &ModelParams) -> Result<Self> {
        Self::new(grid, params.s, params.cutoff)
    }

    /// `M` at an arbitrary frequency.
    pub fn symbol(&self, xi: f64) -> f64 {
        m_multiplier(xi / self.cutoff).powf(self.sigma)
    }

    pub fn is_identity(&self) -> bool {
        self.sigma == 0.0
    }

    pub fn apply_state(&self, state: &State) -> Result<State> {
        state.grid().check_same(&self.grid)?;
        Ok(state.map_multiplier(&self.values))
    }
}

pub fn i_operator(field: &SpectralField, mult: &IMultiplier) -> Result<SpectralField> {
    field.grid.check_same(&mult.grid)?;
    let coeffs = field.coeffs.iter().zip(&mult.values).map(|(c, m)| c * m).collect();
    Ok(SpectralField { grid: Arc::clone(&field.grid), coeffs })
}

/// Ratios `||Iv||_{H^{t+sigma}} / ||v||_{H^t}` and the same divided by `N^sigma`,
/// the two sides of the smoothing property of `I` (`t` is the base regularity).
pub fn smoothing_sandwich_check(field: &SpectralField, base: f64, mult: &IMultiplier) -> Result<(f64, f64)> {
    let denom = sobolev_norm(field, base);
    if denom == 0.0 {
        return Err(Error::InvalidParameter { name: "field", reason: "zero field".into() });
    }
    let smoothed = sobolev_norm(&i_operator(field, mult)?, base + mult.sigma);
    let lower = smoothed / denom;
    Ok((lower, lower / mult.cutoff.powf(mult.sigma)))
}

/// `E(Iu)`: the energy of the smoothed state `(Iu, Iv)`.
pub fn modified_energy(state: &State, params: &ModelParams, mult: &IMultiplier) -> Result<EnergyBreakdown> {
    energy(&mult.apply_state(state)?, params)
}

/// `1 - M(xi_2 + ... + xi_m) / (M(xi_2) ... M(xi_m))` for the listed frequencies.
pub fn commutator_symbol(freqs: &[f64], mult: &IMultiplier) -> f64 {
    let sum: f64 = freqs.iter().sum();
    let prod: f64 = freqs.iter().map(|&xi| mult.symbol(xi)).product();
    1.0 - mult.symbol(sum) / prod
}

/// `E(Iu)(t_last) - E(Iu)(t_first)` from stored states.
pub fn increment_direct(traj: &Trajectory, params: &ModelParams, mult: &IMultiplier) -> Result<f64> {
    let (first, last) = match (traj.snapshots.first(), traj.snapshots.last()) {
        (Some(a), Some(b)) if traj.snapshots.len() >= 2 => (a, b),
        _ => return Err(Error::EmptyTrajectory { found: traj.snapshots.len(), needed: 2 }),
    };
    let e0 = modified_energy(&first.state, params, mult)?;
    let e1 = modified_energy(&last.state, params, mult)?;
    Ok(e1.total - e0.total)
}

/// Increment of the defect `E(Iu) - E(u)` between the first and last snapshot.
/// Equals [`increment_direct`] for the exact flow, where `E(u)` is conserved,
/// and removes the discretization drift of `E(u)` shared by both energies.
pub fn increment_defect(traj: &Trajectory, params: &ModelParams, mult: &IMultiplier) -> Result<f64> {
    let (first, last) = match (traj.snapshots.first(), traj.snapshots.last()) {
        (Some(a), Some(b)) if traj.snapshots.len() >= 2 => (a, b),
        _ => return Err(Error::EmptyTrajectory { found: traj.snapshots.len(), needed: 2 }),
    };
    let defect = |state: &State| -> Result<f64> {
        Ok(modified_energy(state, params, mult)?.total - energy(state, params)?.total)
    };
    Ok(defect(&last.state)? - defect(&first.state)?)
}

/// Rate `d/dt E(Iu)` as the brute-force frequency sum
/// `sign * L * sum_{j1+...+j_{2k+2}=0} (1 - M(xi_1)/prod M(xi_i)) (Iu_t)^(xi_1) prod (Iu)^(xi_i)`
/// over retained modes. Cost `O(n^{2k+1})`.
pub fn increment_rate_oracle(state: &State, params: &ModelParams, mult: &IMultiplier) -> Result<f64> {
    let grid = state.grid();
    let n = grid.n();
    if n > ORACLE_MAX_N {
        return Err(Error::GridTooLarge { n, limit: ORACLE_MAX_N });
    }
    let iu = mult.apply_state(state)?;
    let iu_t = iu.u_t();
    let half = (n / 2) as i64;
    // retained modes |j| < n/2
    let modes: Vec<i64> = (0..n).map(|p| mode_index(p, n)).filter(|j| j.abs() < half).collect();
    let coeff = |f: &SpectralField, j: i64| f.mode(j);
    let m_of = |j: i64| mult.values[crate::spectral::position(j, n)];

    let factors = (2 * params.k + 1) as usize;
    let mut total = num_complex::Complex64::new(0.0, 0.0);
    let mut idx = vec![0usize; factors];
    loop {
        let mut sum = 0i64;
        let mut prod = num_complex::Complex64::new(1.0, 0.0);
        let mut mprod = 1.0;
        for &i in &idx {
            let j = modes[i];
            sum += j;
            prod *= coeff(&iu.u, j);
            mprod *= m_of(j);
        }
        let j1 = -sum;
        if j1.abs() < half {
            let symbol = 1.0 - m_of(j1) / mprod;
            if symbol != 0.0 {
                total += coeff(&iu_t, j1) * prod * symbol;
            }
        }
        // odometer
        let mut d = 0;
        loop {
            if d == factors {
                return Ok(params.sign.value() * grid.length() * total.re);
            }
            idx[d] += 1;
            if idx[d] < modes.len() {
                break;
            }
            idx[d] = 0;
            d += 1;
        }
    }
}

/// Time integral of [`increment_rate_oracle`] over the stored snapshots:
/// composite Simpson on uniformly spaced snapshots (with a 3/8 panel when the
/// interval count is odd), trapezoid otherwise.
pub fn increment_oracle(traj: &Trajectory, params: &ModelParams, mult: &IMultiplier) -> Result<f64> {
    if traj.snapshots.len() < 2 {
        return Err(Error::EmptyTrajectory { found: traj.snapshots.len(), needed: 2 });
    }
    if traj.grid.n() > ORACLE_MAX_N {
        return Err(Error::GridTooLarge { n: traj.grid.n(), limit: ORACLE_MAX_N });
    }
    if mult.is_identity() {
        return Ok(0.0);
    }
    let rates =
        traj.snapshots.iter().map(|s| increment_rate_oracle(&s.state, params, mult)).collect::<Result<Vec<_>>>()?;
    let times: Vec<f64> = traj.snapshots.iter().map(|s| s.t).collect();
    Ok(integrate_samples(&times, &rates))
}

pub(crate) fn integrate_samples(times: &[f64], values: &[f64]) -> f64 {
    let intervals = times.len() - 1;
    let h = (times[intervals] - times[0]) / intervals as f64;
    let uniform = times.windows(2).all(|w| ((w[1] - w[0]) - h).abs() <= 1e-9 * h.abs());
    if !uniform || intervals < 2 {
        return times.windows(2).zip(values.windows(2)).map(|(t, v)| 0.5 * (t[1] - t[0]) * (v[0] + v[1])).sum();
    }
    let (simpson_end, tail) = if intervals.is_multiple_of(2) {
        (intervals, 0.0)
    } else {
        // intervals >= 3 here
        let e = intervals - 3;
        let v = &values[e..];
        (e, 3.0 * h / 8.0 * (v[0] + 3.0 * v[1] + 3.0 * v[2] + v[3]))
    };
    if simpson_end == 0 {
        return tail;
    }
    let mut acc = values[0] + values[simpson_end];
    for (i, v) in values.iter().enumerate().take(simpson_end).skip(1) {
        acc += if i % 2 == 1 { 4.0 * v } else { 2.0 * v };
    }
    acc * h / 3.0 + tail
}

/// Cutoff above which `<x>^alpha M(x)` is nondecreasing on `x > 0`.
///
/// The log-slope of `m` peaks at `-4/3` (at `t = 2/3`), so the condition is
/// `alpha N^2 / (1 + N^2) >= 4 sigma / 3`; there is no threshold when
/// `4 sigma / 3 >= alpha`.
pub fn analytic_monotonicity_threshold(alpha: f64, s: f64) -> Option<f64> {
    let q = 4.0 * (2.0 - s) / (3.0 * alpha);
    if q >= 1.0 {
        None
    } else {
        Some((q.max(0.0) / (1.0 - q)).sqrt())
    }
}

/// Smallest integer cutoff `N <= max_cutoff` for which `<xi>^alpha M(xi)` is
/// nondecreasing over the positive grid frequencies.
pub fn monotonicity_threshold(grid: &Arc<Grid>, alpha: f64, s: f64, max_cutoff: u32) -> Result<Option<u32>> {
    for cutoff in 1..=max_cutoff {
        let mult = IMultiplier::new(Arc::clone(grid), s, cutoff as f64)?;
        let mut positive: Vec<(f64, f64)> = grid
            .freqs()
            .iter()
            .zip(&mult.values)
            .filter(|(xi, _)| **xi > 0.0)
            .map(|(&xi, &m)| (xi, bracket(xi).powf(alpha) * m))
            .collect();
        positive.sort_by(|a, b| a.0.total_cmp(&b.0));
        if positive.windows(2).all(|w| w[1].1 >= w[0].1 * (1.0 - 1e-14)) {
            return Ok(Some(cutoff));
        }
    }
    Ok(None)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DeltaPolicy {
    Fixed {
        delta: f64,
    },
    /// `delta = [C (||Ig||_{H^2} + ||Ih||_{L^2})^{-2k}]^{1/(1/2 - eps)}`, capped.
    LocalExistence {
        constant: f64,
        cap: f64,
    },
}

impl Default for DeltaPolicy {
    fn default() -> Self {
        DeltaPolicy::LocalExistence { constant: 1.0, cap: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanSettings {
    pub delta: DeltaPolicy,
    /// Minimum number of steps across each window.
    pub min_steps: usize,
    /// Step size cap; defaults to the linear stiffness scale.
    pub max_dt: Option<f64>,
    pub scheme: String,
}

impl Default for ScanSettings {
    fn default() -> Self {
        Self { delta: DeltaPolicy::default(), min_steps: 64, max_dt: None, scheme: "etdrk4".into() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanPoint {
    pub cutoff: f64,
    pub delta: f64,
    pub raw_increment: f64,
    /// `sup_t ||Iv||_{L2} * sup_t ||Iu||_{H^2}^{2k+1}` over the window.
    pub norm_product: f64,
    pub normalized: f64,
    pub usable: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum ScanOutcome {
    Fitted { fit: PowerLawFit },
    IdenticallyConserved,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanReport {
    pub points: Vec<ScanPoint>,
    pub outcome: ScanOutcome,
}

impl ScanReport {
    pub fn slope(&self) -> Option<f64> {
        match &self.outcome {
            ScanOutcome::Fitted { fit } => Some(fit.exponent),
            ScanOutcome::IdenticallyConserved => None,
        }
    }

    /// Whether `|raw increment|` and the normalized increment both decrease
    /// strictly along the usable cutoffs.
    pub fn monotone(&self) -> bool {
        let usable: Vec<&ScanPoint> = self.points.iter().filter(|p| p.usable).collect();
        usable
            .windows(2)
            .all(|w| w[1].raw_increment.abs() < w[0].raw_increment.abs() && w[1].normalized < w[0].normalized)
    }
}

/// Measures the modified-energy increment over one local-existence window for
/// each cutoff and fits the decay of the normalized increment in `N`.
pub fn almost_conservation_scan(
    g: &RealField,
    h: &RealField,
    params: &ModelParams,
    cutoffs: &[f64],
    settings: &ScanSettings,
) -> Result<ScanReport> {
    if cutoffs.len() < 4 {
        return Err(Error::InvalidParameter {
            name: "N_list",
            reason: format!("need at least 4 cutoffs, got {}", cutoffs.len()),
        });
    }
    if cutoffs.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParameter { name: "N_list", reason: "cutoffs must increase".into() });
    }
    let points = cutoffs
        .iter()
        .map(|&cutoff| scan_point(g, h, &params.with_smoothing(params.s, cutoff), settings))
        .collect::<Result<Vec<_>>>()?;

    if params.sigma() == 0.0 {
        return Ok(ScanReport { points, outcome: ScanOutcome::IdenticallyConserved });
    }
    for p in points.iter().filter(|p| !p.usable) {
        warn!("increment {:e} at N = {} is below the noise floor; excluded", p.raw_increment, p.cutoff);
    }
    let usable: Vec<(f64, f64)> = points.iter().filter(|p| p.usable).map(|p| (p.cutoff, p.normalized)).collect();
    if usable.len() < 3 {
        return Err(Error::Fit(format!("only {} usable cutoffs above the noise floor", usable.len())));
    }
    let fit = fit_power_law(&usable)?;
    Ok(ScanReport { points, outcome: ScanOutcome::Fitted { fit } })
}

fn scan_point(g: &RealField, h: &RealField, params: &ModelParams, settings: &ScanSettings) -> Result<ScanPoint> {
    let delta = match settings.delta {
        DeltaPolicy::Fixed { delta } => delta,
        DeltaPolicy::LocalExistence { constant, cap } => local_existence_delta(g, h, params, constant, cap)?,
    };
    let mult = IMultiplier::from_params(Arc::clone(&g.grid), params)?;
    let disp = crate::linear::Dispersion::new(Arc::clone(&g.grid), params.beta)?;
    let dt = settings
        .max_dt
        .unwrap_or_else(|| crate::evolution::default_dt(&disp))
        .min(delta / settings.min_steps.max(1) as f64);
    let (steps, _) = crate::evolution::step_plan(delta, dt);
    let run = SimulationSettings {
        horizon: delta,
        dt: Some(dt),
        snapshot_every: steps.div_ceil(SCAN_SNAPSHOTS).max(1),
        scheme: settings.scheme.clone(),
        ..SimulationSettings::default()
    };
    let traj = simulate(g, h, params, &run)?;
    if !traj.status.is_completed() {
        return Err(Error::IncompleteTrajectory(traj.status.to_string()));
    }
    let raw = increment_defect(&traj, params, &mult)?;
    let mut sup_v = 0.0f64;
    let mut sup_u = 0.0f64;
    for snap in &traj.snapshots {
        let iu = mult.apply_state(&snap.state)?;
        sup_v = sup_v.max(sobolev_norm(&iu.v, 0.0));
        sup_u = sup_u.max(sobolev_norm(&iu.u, 2.0));
    }
    let norm_product = sup_v * sup_u.powi(2 * params.k as i32 + 1);
    let usable = raw.abs() >= NOISE_FLOOR && norm_product > 0.0;
    let normalized = if norm_product > 0.0 { raw.abs() / norm_product } else { 0.0 };
    Ok(ScanPoint { cutoff: params.cutoff, delta, raw_increment: raw, norm_product, normalized, usable })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::energy::sobolev_norm;
    use crate::linear::build_state;
    use crate::spectral::{make_grid, to_spectral};
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    #[test]
    fn multiplier_values() {
        assert_eq!(m_multiplier(0.5), 1.0);
        assert_eq!(m_multiplier(4.0), 0.25);
        assert_eq!(m_multiplier(-4.0), m_multiplier(4.0));
        assert_eq!(m_multiplier(1.0), 1.0);
        assert_abs_diff_eq!(m_multiplier(2.0 - 1e-12), 0.5, epsilon = 1e-11);
        let mut prev = 1.0;
        for i in 0..=4000 {
            let x = i as f64 * 1e-3;
            let m = m_multiplier(x);
            assert!(m <= prev + 1e-15 && m > 0.0 && m <= 1.0);
            prev = m;
        }
    }

    #[test]
    fn log_slopes_match_at_junctions() {
        let slope = |x: f64| {
            let h = 1e-6;
            ((m_multiplier(x * (1.0 + h)).ln()) - m_multiplier(x * (1.0 - h)).ln()) / ((1.0 + h).ln() - (1.0 - h).ln())
        };
        assert!(slope(1.0 + 1e-3).abs() < 1e-2);
        assert!((slope(2.0 - 1e-3) + 1.0).abs() < 1e-2);
        assert!(slope(1.0 + 1e-7).abs() < 1e-5);
        assert!((slope(2.0 - 1e-7) + 1.0).abs() < 1e-5);
    }

    #[test]
    fn i_operator_cases() {
        let g = make_grid(2.0 * PI, 64).unwrap();
        let f = to_spectral(&g.sample(|x| x.cos() + 0.3 * (8.0 * x).sin())).unwrap();
        let id = IMultiplier::new(g.clone(), 2.0, 3.0).unwrap();
        assert_eq!(i_operator(&f, &id).unwrap().coeffs, f.coeffs);

        let wide = IMultiplier::new(g.clone(), 1.5, 32.0).unwrap();
        assert_eq!(i_operator(&f, &wide).unwrap().coeffs, f.coeffs);

        // xi = 4N with sigma = 1: M = m(4) = 1/4
        let m = IMultiplier::new(g.clone(), 1.0, 2.0).unwrap();
        let single = to_spectral(&g.sample(|x| (8.0 * x).cos())).unwrap();
        let out = i_operator(&single, &m).unwrap();
        assert_abs_diff_eq!(out.mode(8).re, 0.5 * 0.25, epsilon = 1e-15);

        let other = make_grid(4.0 * PI, 64).unwrap();
        let bad = IMultiplier::new(other, 1.5, 2.0).unwrap();
        assert!(i_operator(&f, &bad).is_err());
        assert!(IMultiplier::new(g.clone(), 2.5, 2.0).is_err());
        assert!(IMultiplier::new(g, 1.5, 0.5).is_err());
    }

    #[test]
    fn sandwich_low_frequency_field() {
        // field on |xi| <= 1: ratios lie in [1, 2^{sigma/2}]
        let g = make_grid(2.0 * PI, 32).unwrap();
        let f = to_spectral(&g.sample(|x| 1.0 + x.cos())).unwrap();
        let mult = IMultiplier::new(g, 1.5, 4.0).unwrap();
        let (lo, hi) = smoothing_sandwich_check(&f, 0.0, &mult).unwrap();
        let cap = 2f64.powf(mult.sigma / 2.0);
        assert!(lo >= 1.0 - 1e-15 && lo <= cap + 1e-15);
        assert!(hi <= lo);
    }

    #[test]
    fn sandwich_single_mode_at_two_n() {
        let g = make_grid(2.0 * PI, 64).unwrap();
        let (cutoff, s, base) = (4.0, 1.2, 0.5);
        let mult = IMultiplier::new(g.clone(), s, cutoff).unwrap();
        let f = to_spectral(&g.sample(|x| (8.0 * x).cos())).unwrap();
        let (lo, hi) = smoothing_sandwich_check(&f, base, &mult).unwrap();
        let sigma = 2.0 - s;
        let expected = 0.5f64.powf(sigma) * bracket(8.0).powf(sigma);
        assert_abs_diff_eq!(lo, expected, epsilon = 1e-13);
        assert_abs_diff_eq!(hi, expected / cutoff.powf(sigma), epsilon = 1e-13);
        assert!(smoothing_sandwich_check(&SpectralField::zeros(g), 0.0, &mult).is_err());
    }

    #[test]
    fn modified_energy_cases() {
        let g = make_grid(2.0 * PI, 32).unwrap();
        let st =
            build_state(&g.sample(|x| x.cos() + 0.2 * (9.0 * x).cos()), &g.sample(|x| 0.3 * (5.0 * x).sin())).unwrap();
        let params = ModelParams::defocusing_quintic();
        let e = energy(&st, &params).unwrap();
        let id = IMultiplier::new(g.clone(), 2.0, 1.0).unwrap();
        assert_eq!(modified_energy(&st, &params, &id).unwrap(), e);
        let wide = IMultiplier::new(g.clone(), 1.6, 16.0).unwrap();
        assert_eq!(modified_energy(&st, &params, &wide).unwrap(), e);
        let narrow = IMultiplier::new(g, 1.6, 2.0).unwrap();
        let em = modified_energy(&st, &params, &narrow).unwrap();
        assert!(em.uxx_term.abs() <= e.uxx_term.abs());
        assert!(em.ux_term.abs() <= e.ux_term.abs());
        assert!(em.u_term.abs() <= e.u_term.abs());
        assert!(em.kinetic_term.abs() <= e.kinetic_term.abs());
        assert!(em.total < e.total);
    }

    #[test]
    fn commutator_symbol_cases() {
        let g = make_grid(2.0 * PI, 16).unwrap();
        let mult = IMultiplier::new(g.clone(), 1.8, 12.0).unwrap();
        assert_eq!(commutator_symbol(&[1.0, -2.0, 0.5, 1.9, -0.3], &mult), 0.0);
        let id = IMultiplier::new(g.clone(), 2.0, 1.0).unwrap();
        assert_eq!(commutator_symbol(&[100.0, -7.0, 3.0, 55.0, 1.0], &id), 0.0);
        let m = IMultiplier::new(g, 1.8, 2.0).unwrap();
        assert_eq!(commutator_symbol(&[8.0, 0.0, 0.0, 0.0, 0.0], &m), 0.0);
        assert!(commutator_symbol(&[3.0, 3.0, 0.0, 0.0, 0.0], &m) != 0.0);
    }

    #[test]
    fn contraction_in_sobolev_norms() {
        let g = make_grid(2.0 * PI, 64).unwrap();
        let f = to_spectral(&g.sample(|x| (x.sin() * 3.0).exp() - 1.0)).unwrap();
        let mult = IMultiplier::new(g, 1.7, 2.0).unwrap();
        let i = i_operator(&f, &mult).unwrap();
        for t in [-1.0, 0.0, 1.0, 2.5] {
            assert!(sobolev_norm(&i, t) <= sobolev_norm(&f, t));
        }
    }

    #[test]
    fn quadrature_is_exact_on_cubics() {
        for count in [3usize, 4, 5, 8, 11] {
            let times: Vec<f64> = (0..count).map(|i| 0.3 + 0.1 * i as f64).collect();
            let vals: Vec<f64> = times.iter().map(|t| 2.0 * t * t * t - t + 1.0).collect();
            let f = |t: f64| 0.5 * t.powi(4) - 0.5 * t * t + t;
            let exact = f(times[count - 1]) - f(times[0]);
            assert!((integrate_samples(&times, &vals) - exact).abs() < 1e-13, "{count}");
        }
    }

    #[test]
    fn monotonicity_threshold_matches_calculus() {
        let g = make_grid(2.0 * PI / 4.0, 1024).unwrap();
        let (alpha, s) = (1.75, 1.0);
        let bound = analytic_monotonicity_threshold(alpha, s).unwrap();
        let n0 = monotonicity_threshold(&g, alpha, s, 64).unwrap().unwrap();
        assert!((n0 as f64) <= bound.ceil(), "N0 = {n0}, calculus bound {bound}");
        assert!(analytic_monotonicity_threshold(alpha, 2.0).unwrap() == 0.0);
    }

    #[test]
    fn steep_transition_defeats_monotonicity() {
        // sigma = 1.7 > 3 alpha / 4: the log-slope -4 sigma / 3 of M near 1.5 N wins
        let g = make_grid(2.0 * PI / 4.0, 1024).unwrap();
        assert_eq!(analytic_monotonicity_threshold(1.75, 0.3), None);
        assert_eq!(monotonicity_threshold(&g, 1.75, 0.3, 64).unwrap(), None);
    }
}
