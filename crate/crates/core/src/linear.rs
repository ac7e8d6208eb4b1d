//! Dispersion relation and the exact linear flow.
//!
//! The state is the pair `(u, v)` with `v = (-Delta)^(-1/2) u_t`. Writing
//! `r(xi) = omega(xi) / |xi| = (1 - beta xi^2 + xi^4)^(1/2)`, each Fourier mode of
//! the linear equation is the rotation
//!
//! ```text
//! u(t) =  cos(omega t) u0 + sin(omega t) / r * v0
//! v(t) = -r sin(omega t) u0 + cos(omega t) v0
//! ```
//!
//! which is regular at `xi = 0` (where `r = 1`, `omega = 0`).

use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::spectral::{bracket, to_spectral, Grid, RealField, SpectralField};

/// `omega(xi) = (xi^2 - beta xi^4 + xi^6)^(1/2)`.
pub fn omega(xi: f64, beta: f64) -> Result<f64> {
    let x2 = xi * xi;
    let rad = x2 * (1.0 - beta * x2 + x2 * x2);
    if rad < 0.0 {
        return Err(Error::InvalidBeta { beta, xi });
    }
    Ok(rad.sqrt())
}

/// `omega(xi) / |xi|`, extended by its limit 1 at `xi = 0`.
pub fn omega_ratio(xi: f64, beta: f64) -> Result<f64> {
    let x2 = xi * xi;
    let rad = 1.0 - beta * x2 + x2 * x2;
    if rad <= 0.0 {
        return Err(Error::InvalidBeta { beta, xi });
    }
    Ok(rad.sqrt())
}

/// Range of `omega(xi) / (|xi| <xi>^2)` over the nonzero grid frequencies.
pub fn symbol_equivalence_ratio(grid: &Grid, beta: f64) -> Result<(f64, f64)> {
    let mut lo = f64::INFINITY;
    let mut hi = 0.0f64;
    for &xi in grid.freqs().iter().filter(|xi| **xi != 0.0) {
        let r = omega(xi, beta)? / (xi.abs() * bracket(xi).powi(2));
        lo = lo.min(r);
        hi = hi.max(r);
    }
    Ok((lo, hi))
}

/// `(-Delta)^(-1/2)`: divides mode `j != 0` by `|xi_j|`. Rejects fields whose
/// zero mode exceeds `1e-10 * max|coeff|`.
pub fn inv_sqrt_laplacian(field: &SpectralField) -> Result<SpectralField> {
    let allowed = 1e-10 * field.max_abs();
    let magnitude = field.coeffs[0].norm();
    if magnitude > allowed {
        return Err(Error::ZeroModeViolation { magnitude, allowed });
    }
    let coeffs = field
        .coeffs
        .iter()
        .zip(field.grid.freqs())
        .map(|(c, &xi)| if xi == 0.0 { Complex64::new(0.0, 0.0) } else { c / xi.abs() })
        .collect();
    Ok(SpectralField { grid: Arc::clone(&field.grid), coeffs })
}

/// `omega` and `omega / |xi|` tabulated on a grid.
#[derive(Debug, Clone)]
pub struct Dispersion {
    pub grid: Arc<Grid>,
    pub beta: f64,
    pub omega: Vec<f64>,
    pub ratio: Vec<f64>,
}

impl Dispersion {
    pub fn new(grid: Arc<Grid>, beta: f64) -> Result<Self> {
        if !beta.is_finite() {
            return Err(Error::InvalidBeta { beta, xi: 0.0 });
        }
        let omega = grid.freqs().iter().map(|&xi| omega(xi, beta)).collect::<Result<Vec<_>>>()?;
        let ratio = grid.freqs().iter().map(|&xi| omega_ratio(xi, beta)).collect::<Result<Vec<_>>>()?;
        Ok(Self { grid, beta, omega, ratio })
    }

    pub fn max_omega(&self) -> f64 {
        self.omega.iter().cloned().fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone)]
pub struct State {
    pub u: SpectralField,
    pub v: SpectralField,
    pub t: f64,
}

impl State {
    pub fn zeros(grid: Arc<Grid>) -> Self {
        Self { u: SpectralField::zeros(Arc::clone(&grid)), v: SpectralField::zeros(grid), t: 0.0 }
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.u.grid
    }

    /// Spectral field of `u_t = |xi| v`.
    pub fn u_t(&self) -> SpectralField {
        let coeffs = self.v.coeffs.iter().zip(self.grid().freqs()).map(|(c, xi)| c * xi.abs()).collect();
        SpectralField { grid: Arc::clone(self.grid()), coeffs }
    }

    pub fn is_finite(&self) -> bool {
        self.u.coeffs.iter().chain(&self.v.coeffs).all(|c| c.re.is_finite() && c.im.is_finite())
    }

    /// Applies a real even multiplier to both components.
    pub fn map_multiplier(&self, values: &[f64]) -> Self {
        let apply = |f: &SpectralField| SpectralField {
            grid: Arc::clone(&f.grid),
            coeffs: f.coeffs.iter().zip(values).map(|(c, m)| c * m).collect(),
        };
        Self { u: apply(&self.u), v: apply(&self.v), t: self.t }
    }

    /// The time-reversed state `(u, -v)`.
    pub fn reversed(&self) -> Self {
        Self { u: self.u.clone(), v: self.v.scale(-1.0), t: -self.t }
    }
}

/// Initial state from `u(0) = g`, `u_t(0) = h_x`, so `v_hat = i sign(xi) h_hat`.
///
/// The Nyquist mode of both components is dropped: `sign(xi)` is ambiguous
/// there and the nonlinear term never feeds it.
pub fn build_state(g: &RealField, h: &RealField) -> Result<State> {
    g.grid.check_same(&h.grid)?;
    let mut u = to_spectral(g)?;
    let h_hat = to_spectral(h)?;
    let coeffs = h_hat
        .coeffs
        .iter()
        .zip(g.grid.freqs())
        .map(|(c, &xi)| if xi == 0.0 { Complex64::new(0.0, 0.0) } else { c * Complex64::new(0.0, xi.signum()) })
        .collect();
    let mut v = SpectralField { grid: Arc::clone(&g.grid), coeffs };
    u.zero_nyquist();
    v.zero_nyquist();
    Ok(State { u, v, t: 0.0 })
}

/// Exact solution of the linear equation advanced by `dt` (either sign).
pub fn propagate_linear(state: &State, dt: f64, disp: &Dispersion) -> Result<State> {
    state.grid().check_same(&disp.grid)?;
    if !dt.is_finite() {
        return Err(Error::InvalidParameter { name: "dt", reason: format!("non-finite step {dt}") });
    }
    let n = state.grid().n();
    let mut u = Vec::with_capacity(n);
    let mut v = Vec::with_capacity(n);
    for p in 0..n {
        let (s, c) = (disp.omega[p] * dt).sin_cos();
        let r = disp.ratio[p];
        let (u0, v0) = (state.u.coeffs[p], state.v.coeffs[p]);
        u.push(u0 * c + v0 * (s / r));
        v.push(u0 * (-r * s) + v0 * c);
    }
    Ok(State {
        u: SpectralField { grid: Arc::clone(state.grid()), coeffs: u },
        v: SpectralField { grid: Arc::clone(state.grid()), coeffs: v },
        t: state.t + dt,
    })
}
