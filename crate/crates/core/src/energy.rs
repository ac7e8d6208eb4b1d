use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linear::State;
use crate::params::{ModelParams, Sign};
use crate::spectral::{bracket, dealias_len, SpectralField};

/// `||v||_{H^s} = ||<xi>^s v_hat||_{L2}` in the Fourier-series normalization.
pub fn sobolev_norm(field: &SpectralField, s: f64) -> f64 {
    sobolev_norm_sq(field, s).sqrt()
}

pub fn sobolev_norm_sq(field: &SpectralField, s: f64) -> f64 {
    weighted_sum(field, |xi| bracket(xi).powf(2.0 * s)) * field.grid.length()
}

fn weighted_sum(field: &SpectralField, weight: impl Fn(f64) -> f64) -> f64 {
    field.coeffs.iter().zip(field.grid.freqs()).map(|(c, &xi)| weight(xi) * c.norm_sqr()).sum()
}

/// `integral |u|^p dx` for even integer `p`, evaluated on a padded grid where the
/// rectangle rule is exact for the degree-`p` trigonometric polynomial.
pub fn lp_integral(field: &SpectralField, p: u32) -> Result<f64> {
    let m = dealias_len(field.grid.n(), p);
    let samples = field.padded_samples(m);
    let mut acc = 0.0;
    for (index, v) in samples.iter().enumerate() {
        let term = v.abs().powi(p as i32);
        if !term.is_finite() {
            return Err(Error::Divergence { index, value: *v });
        }
        acc += term;
    }
    Ok(acc * field.grid.length() / m as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct EnergyBreakdown {
    /// `1/2 ||u_xx||^2`
    pub uxx_term: f64,
    /// `-beta/2 ||u_x||^2`
    pub ux_term: f64,
    /// `1/2 ||u||^2`
    pub u_term: f64,
    /// `1/2 ||(-Delta)^(-1/2) u_t||^2`
    pub kinetic_term: f64,
    /// `sign/(2k+2) ||u||_{2k+2}^{2k+2}`
    pub potential_term: f64,
    pub total: f64,
}

impl EnergyBreakdown {
    pub fn quadratic(&self) -> f64 {
        self.uxx_term + self.ux_term + self.u_term + self.kinetic_term
    }
}

pub fn energy(state: &State, params: &ModelParams) -> Result<EnergyBreakdown> {
    let len = state.grid().length();
    let u = &state.u;
    let uxx_term = 0.5 * weighted_sum(u, |xi| xi.powi(4)) * len;
    let ux_term = -0.5 * params.beta * weighted_sum(u, |xi| xi * xi) * len;
    let u_term = 0.5 * u.l2_norm_sq();
    let kinetic_term = 0.5 * state.v.l2_norm_sq();
    let p = 2 * params.k + 2;
    let potential_term = params.sign.value() / p as f64 * lp_integral(u, p)?;
    let total = uxx_term + ux_term + u_term + kinetic_term + potential_term;
    Ok(EnergyBreakdown { uxx_term, ux_term, u_term, kinetic_term, potential_term, total })
}

/// `E(u) / (||u||_{H^2}^2 + ||v||^2 + ||u||_{2k+2}^{2k+2})`, with ratio 1 for the
/// zero state.
pub fn energy_equivalence_ratio(state: &State, params: &ModelParams) -> Result<f64> {
    if params.sign != Sign::Defocusing {
        return Err(Error::InvalidParameter {
            name: "sign",
            reason: "energy equivalence is only meaningful for the defocusing sign".into(),
        });
    }
    if params.beta.abs() >= 2.0 {
        return Err(Error::InvalidParameter {
            name: "beta",
            reason: format!("|beta| < 2 is required, got {}", params.beta),
        });
    }
    let e = energy(state, params)?;
    let rhs = sobolev_norm_sq(&state.u, 2.0) + state.v.l2_norm_sq() + lp_integral(&state.u, 2 * params.k + 2)?;
    if rhs == 0.0 {
        return Ok(1.0);
    }
    Ok(e.total / rhs)
}

/// `||v_xx|| ||v|| - ||v_x||^2`, nonnegative by Cauchy-Schwarz on the Fourier side.
pub fn interpolation_slack(field: &SpectralField) -> f64 {
    let len = field.grid.length();
    let d0 = weighted_sum(field, |_| 1.0) * len;
    let d1 = weighted_sum(field, |xi| xi * xi) * len;
    let d2 = weighted_sum(field, |xi| xi.powi(4)) * len;
    (d2 * d0).sqrt() - d1
}

/// `||u||_{H^s}^2 + ||v||_{H^{s-2}}^2`, the quantity whose growth in time is bounded
/// by the global theory.
pub fn theorem_quantity(state: &State, s: f64) -> f64 {
    sobolev_norm_sq(&state.u, s) + sobolev_norm_sq(&state.v, s - 2.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linear::build_state;
    use crate::spectral::{make_grid, to_spectral, RealField};
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    #[test]
    fn interpolation_slack_vanishes_on_single_modes() {
        let g = make_grid(2.0 * PI, 32).unwrap();
        let one = to_spectral(&g.sample(|x| (3.0 * x).cos())).unwrap();
        assert!(interpolation_slack(&one).abs() < 1e-12);
        let two = to_spectral(&g.sample(|x| x.cos() + (2.0 * x).sin())).unwrap();
        // ||v|| = sqrt(2 pi), ||v_x||^2 = 5 pi, ||v_xx|| = sqrt(17 pi)
        assert_abs_diff_eq!(interpolation_slack(&two), (34.0f64).sqrt() * PI - 5.0 * PI, epsilon = 1e-12);
    }

    fn cos_state() -> State {
        let g = make_grid(2.0 * PI, 16).unwrap();
        build_state(&g.sample(f64::cos), &RealField::zeros(g.clone())).unwrap()
    }

    #[test]
    fn sobolev_norm_examples() {
        let g = make_grid(2.0 * PI, 16).unwrap();
        assert_eq!(sobolev_norm(&SpectralField::zeros(g.clone()), 1.3), 0.0);
        let cos = to_spectral(&g.sample(f64::cos)).unwrap();
        assert_abs_diff_eq!(sobolev_norm(&cos, 0.0), PI.sqrt(), epsilon = 1e-14);
        assert_abs_diff_eq!(sobolev_norm(&cos, 1.0), (2.0 * PI).sqrt(), epsilon = 1e-14);
    }

    #[test]
    fn sobolev_zero_is_physical_l2() {
        let g = make_grid(10.0, 64).unwrap();
        let f = g.sample(|x| (-(x - 5.0).powi(2)).exp() + 0.2 * (2.0 * PI * 3.0 * x / 10.0).sin());
        let spec = to_spectral(&f).unwrap();
        let a = sobolev_norm(&spec, 0.0);
        let b = f.l2_norm();
        assert!((a - b).abs() <= 1e-10 * b);
    }

    #[test]
    fn cosine_energy_closed_form() {
        // quadratic part pi/2, potential (1/6) * 5 pi / 8
        let e = energy(&cos_state(), &ModelParams::defocusing_quintic()).unwrap();
        assert_abs_diff_eq!(e.quadratic(), PI / 2.0, epsilon = 1e-13);
        assert_abs_diff_eq!(e.potential_term, 5.0 * PI / 48.0, epsilon = 1e-13);
        assert_abs_diff_eq!(e.total, 29.0 * PI / 48.0, epsilon = 1e-12);
        let sum = e.uxx_term + e.ux_term + e.u_term + e.kinetic_term + e.potential_term;
        assert!((sum - e.total).abs() <= 1e-12 * e.total.abs());
    }

    #[test]
    fn focusing_flips_only_potential() {
        let params = ModelParams::defocusing_quintic();
        let d = energy(&cos_state(), &params).unwrap();
        let f = energy(&cos_state(), &params.with_sign(Sign::Focusing)).unwrap();
        assert_eq!(d.uxx_term, f.uxx_term);
        assert_eq!(d.ux_term, f.ux_term);
        assert_eq!(d.u_term, f.u_term);
        assert_eq!(d.kinetic_term, f.kinetic_term);
        assert_eq!(d.potential_term, -f.potential_term);
    }

    #[test]
    fn zero_state() {
        let g = make_grid(2.0 * PI, 16).unwrap();
        let z = State::zeros(g);
        let params = ModelParams::defocusing_quintic();
        assert_eq!(energy(&z, &params).unwrap(), EnergyBreakdown::default());
        assert_eq!(energy_equivalence_ratio(&z, &params).unwrap(), 1.0);
        assert_eq!(theorem_quantity(&z, 1.8), 0.0);
    }

    #[test]
    fn equivalence_ratio_for_cosine() {
        // E = 29 pi/48, RHS = ||u||_{H^2}^2 + ||u||_6^6 = 4 pi + 5 pi / 8
        let r = energy_equivalence_ratio(&cos_state(), &ModelParams::defocusing_quintic()).unwrap();
        assert_abs_diff_eq!(r, (29.0 / 48.0) / (37.0 / 8.0), epsilon = 1e-13);
        let err = energy_equivalence_ratio(&cos_state(), &ModelParams::defocusing_quintic().with_sign(Sign::Focusing));
        assert!(err.is_err());
    }

    #[test]
    fn theorem_quantity_examples() {
        assert_abs_diff_eq!(theorem_quantity(&cos_state(), 2.0), 4.0 * PI, epsilon = 1e-12);
        let s = cos_state();
        assert!(theorem_quantity(&s, 1.0) <= theorem_quantity(&s, 1.5));
        assert!(theorem_quantity(&s, 1.5) <= theorem_quantity(&s, 2.0));
    }
}
