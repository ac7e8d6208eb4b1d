use std::f64::consts::PI;
use std::sync::Arc;

use ndarray::Array2;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{xst_norm, ModulationWeight, SpaceTimeField, THETA};
use crate::error::{Error, Result};
use crate::linear::omega;
use crate::spectral::{make_grid, position, Grid};

/// Random test functions concentrated near the surface `|tau| = omega(xi)`:
/// sums of a few modes `a exp(i (xi_j x -+ (omega(xi_j) + mu) t))` plus their
/// conjugates, cut off by `eta_delta` and normalized to unit `X^{s,theta}` norm.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EnsembleConfig {
    pub length: f64,
    pub n: usize,
    pub n_t: usize,
    pub delta: f64,
    pub s: f64,
    pub theta: f64,
    pub beta: f64,
    pub count: usize,
    pub seed: u64,
    /// Largest active mode index; fixed so refinement does not change the fields.
    pub max_mode: i64,
    pub modes_per_field: usize,
    /// Standard deviation of the modulation offset `mu`.
    pub offset_sigma: f64,
}

impl Default for EnsembleConfig {
    fn default() -> Self {
        Self {
            length: 2.0 * PI,
            n: 32,
            n_t: 256,
            delta: 0.25,
            s: 0.0,
            theta: THETA,
            beta: 1.0,
            count: 200,
            seed: 20_240_521,
            max_mode: 6,
            modes_per_field: 3,
            offset_sigma: 4.0,
        }
    }
}

impl EnsembleConfig {
    /// Same ensemble at twice the spatial and temporal resolution.
    pub fn doubled(&self) -> Self {
        Self { n: 2 * self.n, n_t: 2 * self.n_t, ..self.clone() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.count == 0 {
            return Err(Error::InvalidParameter { name: "count", reason: "ensemble needs at least one member".into() });
        }
        if self.modes_per_field == 0 {
            return Err(Error::InvalidParameter { name: "modes_per_field", reason: "must be at least 1".into() });
        }
        if self.max_mode < 1 || 2 * self.max_mode >= self.n as i64 {
            return Err(Error::InvalidParameter {
                name: "max_mode",
                reason: format!("need 1 <= max_mode < n/2, got {} with n = {}", self.max_mode, self.n),
            });
        }
        if !(self.offset_sigma.is_finite() && self.offset_sigma >= 0.0) {
            return Err(Error::InvalidParameter { name: "offset_sigma", reason: "must be finite and >= 0".into() });
        }
        let top = omega(self.max_mode as f64 * 2.0 * PI / self.length, self.beta)? + 6.0 * self.offset_sigma;
        let spacing = 4.0 * self.delta / self.n_t as f64;
        let required = PI / (2.0 * top);
        if spacing > required {
            return Err(Error::Undersampled { spacing, required });
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct Ensemble {
    pub fields: Vec<SpaceTimeField>,
    /// Every modulation offset drawn, in member order.
    pub offsets: Vec<f64>,
}

/// Member `index` of the ensemble; depends only on `(seed, index)`, not on the
/// resolution.
pub fn ensemble_member(cfg: &EnsembleConfig, grid: &Arc<Grid>, index: usize) -> Result<(SpaceTimeField, Vec<f64>)> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(index as u64);
    let offset_law = Normal::new(0.0, cfg.offset_sigma)
        .map_err(|e| Error::InvalidParameter { name: "offset_sigma", reason: e.to_string() })?;
    let n = grid.n();
    let nt = cfg.n_t;
    let dt = 4.0 * cfg.delta / nt as f64;
    let modes = rng.random_range(1..=cfg.modes_per_field);
    let mut raw = Array2::<Complex64>::zeros((nt, n));
    let mut offsets = Vec::with_capacity(modes);
    for _ in 0..modes {
        let j = rng.random_range(1..=cfg.max_mode);
        let branch = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
        let mu = offset_law.sample(&mut rng);
        let re: f64 = StandardNormal.sample(&mut rng);
        let im: f64 = StandardNormal.sample(&mut rng);
        let amp = Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2;
        offsets.push(mu);
        let freq = branch * (omega(j as f64 * 2.0 * PI / cfg.length, cfg.beta)? + mu);
        let (pp, pm) = (position(j, n), position(-j, n));
        for i in 0..nt {
            let t = -2.0 * cfg.delta + i as f64 * dt;
            let c = amp * Complex64::from_polar(1.0, -freq * t);
            raw[[i, pp]] += c;
            raw[[i, pm]] += c.conj();
        }
    }
    let field = SpaceTimeField::from_coeffs(Arc::clone(grid), cfg.delta, raw)?;
    let norm = xst_norm(&field, cfg.s, cfg.theta, cfg.beta, ModulationWeight::Dispersion)?;
    Ok((field.scaled(1.0 / norm), offsets))
}

pub fn random_bourgain_ensemble(cfg: &EnsembleConfig) -> Result<Ensemble> {
    cfg.validate()?;
    let grid = make_grid(cfg.length, cfg.n)?;
    let members = (0..cfg.count).into_par_iter().map(|i| ensemble_member(cfg, &grid, i)).collect::<Result<Vec<_>>>()?;
    let mut fields = Vec::with_capacity(members.len());
    let mut offsets = Vec::new();
    for (f, o) in members {
        fields.push(f);
        offsets.extend(o);
    }
    Ok(Ensemble { fields, offsets })
}

/// Kolmogorov-Smirnov distance between the empirical law of `samples` and `cdf`.
pub fn ks_statistic(samples: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    sorted
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use statrs::distribution::{ContinuousCDF, Normal as StatNormal};

    fn small() -> EnsembleConfig {
        EnsembleConfig { count: 12, n: 16, n_t: 256, ..Default::default() }
    }

    #[test]
    fn deterministic_and_normalized() {
        let cfg = small();
        let a = random_bourgain_ensemble(&cfg).unwrap();
        let b = random_bourgain_ensemble(&cfg).unwrap();
        assert_eq!(a.offsets, b.offsets);
        for (x, y) in a.fields.iter().zip(&b.fields) {
            assert_eq!(x.coeffs, y.coeffs);
            let norm = xst_norm(x, cfg.s, cfg.theta, cfg.beta, ModulationWeight::Dispersion).unwrap();
            assert!((norm - 1.0).abs() < 1e-10);
        }
        let c = random_bourgain_ensemble(&EnsembleConfig { seed: 1, ..cfg }).unwrap();
        assert_ne!(a.offsets, c.offsets);
    }

    #[test]
    fn offsets_follow_configured_law() {
        let cfg = EnsembleConfig { count: 400, n: 16, n_t: 256, ..Default::default() };
        let e = random_bourgain_ensemble(&cfg).unwrap();
        let law = StatNormal::new(0.0, cfg.offset_sigma).unwrap();
        let d = ks_statistic(&e.offsets, |x| law.cdf(x));
        // 1% critical value of the one-sample KS test
        let critical = 1.63 / (e.offsets.len() as f64).sqrt();
        assert!(d < critical, "D = {d}, critical {critical}");
    }

    #[test]
    fn validation() {
        assert!(EnsembleConfig { count: 0, ..small() }.validate().is_err());
        assert!(EnsembleConfig { max_mode: 8, ..small() }.validate().is_err());
        assert!(matches!(EnsembleConfig { n_t: 16, ..small() }.validate(), Err(Error::Undersampled { .. })));
    }
}
