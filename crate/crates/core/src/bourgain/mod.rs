//! Discrete space-time Fourier analysis on a time window `[-2 delta, 2 delta)`.
//!
//! With `Delta t = 4 delta / n_t`, the space-time transform is
//! `w~(tau, xi) = Delta t * sum_i exp(-i tau t_i) w_hat(t_i, xi)` and the
//! discrete norm is
//!
//! ```text
//! ||w||_{X^{s,theta}}^2 = L / (4 delta) * sum <xi>^{2s} <|tau| - omega(xi)>^{2 theta} |w~|^2
//! ```
//!
//! which for `theta = 0` equals `integral ||w(t)||_{H^s}^2 dt` exactly.

mod ensemble;
mod estimates;

use std::sync::Arc;

use ndarray::Array2;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evolution::Trajectory;
use crate::linear::omega;
use crate::spectral::{bracket, Grid, SpectralField};

pub use ensemble::{ensemble_member, ks_statistic, random_bourgain_ensemble, Ensemble, EnsembleConfig};
pub use estimates::{estimate_ids, parse_estimate, verify_estimate, Estimate, EstimateReport};

/// `1/2+` instantiated as `1/2 + epsilon`.
pub const THETA: f64 = 0.5 + crate::evolution::EPSILON;

fn psi(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        (-1.0 / x).exp()
    }
}

/// `eta(t / delta)` where `eta` is 1 on `|t| <= 1`, 0 on `|t| >= 2`, and the
/// smooth step `psi(2 - |t|) / (psi(2 - |t|) + psi(|t| - 1))` in between.
pub fn eta_cutoff(t: f64, delta: f64) -> f64 {
    let a = (t / delta).abs();
    if a <= 1.0 {
        1.0
    } else if a >= 2.0 {
        0.0
    } else {
        let up = psi(2.0 - a);
        up / (up + psi(a - 1.0))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ModulationWeight {
    /// `<|tau| - omega(xi)>`
    #[default]
    Dispersion,
    /// `<|tau| - |xi|^3 + beta/2 |xi|>`
    Airy,
}

#[derive(Debug, Clone)]
pub struct SpaceTimeField {
    pub grid: Arc<Grid>,
    pub delta: f64,
    pub times: Vec<f64>,
    /// Spatial Fourier coefficients of `eta_delta(t_i) w(t_i)`, shape `(n_t, n)`.
    pub coeffs: Array2<Complex64>,
    /// `w~(tau_l, xi_j)`, shape `(n_t, n)`, FFT order in both axes.
    pub spectrum: Array2<Complex64>,
    pub taus: Vec<f64>,
}

impl SpaceTimeField {
    /// Builds the field from spatial coefficients of `w` (before the cutoff) at
    /// `t_i = -2 delta + i * 4 delta / n_t`.
    pub fn from_coeffs(grid: Arc<Grid>, delta: f64, raw: Array2<Complex64>) -> Result<Self> {
        let (nt, n) = raw.dim();
        if n != grid.n() {
            return Err(Error::InvalidGrid(format!("{n} spatial columns for a grid of {}", grid.n())));
        }
        if !(delta.is_finite() && delta > 0.0) {
            return Err(Error::InvalidParameter { name: "delta", reason: format!("must be positive, got {delta}") });
        }
        if nt < 8 || nt % 4 != 0 {
            return Err(Error::InvalidParameter {
                name: "n_t",
                reason: format!("need a multiple of 4 and at least 8 time samples, got {nt}"),
            });
        }
        let dt = 4.0 * delta / nt as f64;
        let times: Vec<f64> = (0..nt).map(|i| -2.0 * delta + i as f64 * dt).collect();
        let mut coeffs = raw;
        for (i, mut row) in coeffs.outer_iter_mut().enumerate() {
            let e = eta_cutoff(times[i], delta);
            row.mapv_inplace(|c| c * e);
        }
        let taus: Vec<f64> = (0..nt)
            .map(|l| crate::spectral::mode_index(l, nt) as f64 * 2.0 * std::f64::consts::PI / (4.0 * delta))
            .collect();
        let fft = grid.plan(nt, false);
        let mut spectrum = Array2::zeros((nt, n));
        let mut buf = vec![Complex64::new(0.0, 0.0); nt];
        for p in 0..n {
            for i in 0..nt {
                buf[i] = coeffs[[i, p]];
            }
            fft.process(&mut buf);
            for l in 0..nt {
                // t_0 = -2 delta shifts the phase by exp(2 i tau delta)
                let phase = Complex64::from_polar(dt, taus[l] * 2.0 * delta);
                spectrum[[l, p]] = buf[l] * phase;
            }
        }
        Ok(Self { grid, delta, times, coeffs, spectrum, taus })
    }

    pub fn zeros(grid: Arc<Grid>, delta: f64, nt: usize) -> Result<Self> {
        let n = grid.n();
        Self::from_coeffs(grid, delta, Array2::zeros((nt, n)))
    }

    pub fn n_t(&self) -> usize {
        self.times.len()
    }

    pub fn time_step(&self) -> f64 {
        4.0 * self.delta / self.n_t() as f64
    }

    /// Indices of the samples in the physical window `[0, delta]`.
    pub fn window_indices(&self) -> std::ops::RangeInclusive<usize> {
        let nt = self.n_t();
        nt / 2..=nt / 2 + nt / 4
    }

    /// Spatial field at time sample `i`.
    pub fn slice(&self, i: usize) -> SpectralField {
        SpectralField { grid: Arc::clone(&self.grid), coeffs: self.coeffs.row(i).to_vec() }
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            grid: Arc::clone(&self.grid),
            delta: self.delta,
            times: self.times.clone(),
            coeffs: self.coeffs.mapv(|c| c * factor),
            spectrum: self.spectrum.mapv(|c| c * factor),
            taus: self.taus.clone(),
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.grid.check_same(&other.grid)?;
        if self.coeffs.dim() != other.coeffs.dim() || self.delta != other.delta {
            return Err(Error::InvalidParameter { name: "field", reason: "space-time layouts differ".into() });
        }
        Ok(Self {
            grid: Arc::clone(&self.grid),
            delta: self.delta,
            times: self.times.clone(),
            coeffs: &self.coeffs + &other.coeffs,
            spectrum: &self.spectrum + &other.spectrum,
            taus: self.taus.clone(),
        })
    }
}

/// Windowed, cutoff-multiplied transform of a two-sided trajectory whose
/// snapshots are uniformly spaced and cover `[-2 delta, 2 delta)`.
pub fn spacetime_transform(traj: &Trajectory, delta: f64) -> Result<SpaceTimeField> {
    let snaps = &traj.snapshots;
    if snaps.len() < 2 {
        return Err(Error::EmptyTrajectory { found: snaps.len(), needed: 2 });
    }
    let spacing = snaps[1].t - snaps[0].t;
    if snaps.windows(2).any(|w| ((w[1].t - w[0].t) - spacing).abs() > 1e-9 * spacing.max(1e-300)) {
        return Err(Error::InvalidParameter {
            name: "trajectory",
            reason: "snapshots are not uniformly spaced".into(),
        });
    }
    let disp = crate::linear::Dispersion::new(Arc::clone(&traj.grid), traj.params.beta)?;
    let required = std::f64::consts::PI / (2.0 * disp.max_omega());
    if spacing > required * (1.0 + 1e-12) {
        return Err(Error::Undersampled { spacing, required });
    }
    let tol = 1e-9 * spacing;
    let start = snaps.iter().position(|s| (s.t + 2.0 * delta).abs() <= tol);
    let nt_f = 4.0 * delta / spacing;
    let nt = nt_f.round() as usize;
    let start = match start {
        Some(i) if (nt_f - nt as f64).abs() < 1e-6 && i + nt <= snaps.len() => i,
        _ => return Err(Error::WindowNotCovered { start: -2.0 * delta, end: 2.0 * delta }),
    };
    let n = traj.grid.n();
    let mut raw = Array2::zeros((nt, n));
    for i in 0..nt {
        for (p, c) in snaps[start + i].state.u.coeffs.iter().enumerate() {
            raw[[i, p]] = *c;
        }
    }
    SpaceTimeField::from_coeffs(Arc::clone(&traj.grid), delta, raw)
}

fn modulation(tau: f64, xi: f64, beta: f64, weight: ModulationWeight) -> Result<f64> {
    let surface = match weight {
        ModulationWeight::Dispersion => omega(xi, beta)?,
        ModulationWeight::Airy => xi.abs().powi(3) - 0.5 * beta * xi.abs(),
    };
    Ok(bracket(tau.abs() - surface))
}

/// `X^{s,theta}` norm with a general spatial weight in place of `<xi>^s`.
pub fn xst_norm_weighted(
    field: &SpaceTimeField,
    spatial: impl Fn(f64) -> f64,
    theta: f64,
    beta: f64,
    weight: ModulationWeight,
) -> Result<f64> {
    let mut acc = 0.0;
    for (p, &xi) in field.grid.freqs().iter().enumerate() {
        let ws = spatial(xi).powi(2);
        for (l, &tau) in field.taus.iter().enumerate() {
            let c = field.spectrum[[l, p]].norm_sqr();
            if c == 0.0 {
                continue;
            }
            acc += ws * modulation(tau, xi, beta, weight)?.powf(2.0 * theta) * c;
        }
    }
    Ok((acc * field.grid.length() / (4.0 * field.delta)).sqrt())
}

pub fn xst_norm(field: &SpaceTimeField, s: f64, theta: f64, beta: f64, weight: ModulationWeight) -> Result<f64> {
    xst_norm_weighted(field, |xi| bracket(xi).powf(s), theta, beta, weight)
}
