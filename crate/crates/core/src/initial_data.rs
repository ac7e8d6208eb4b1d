//! Named families of initial data `(g, h)` with `u(0) = g`, `u_t(0) = h_x`.

use std::f64::consts::PI;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::{bracket, Grid, RealField};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DataSpec {
    pub family: String,
    pub amplitude: f64,
    pub width: f64,
    /// Defaults to the middle of the period.
    pub center: Option<f64>,
    /// Mode indices for `cosine` (first entry) and `two-mode` (first two).
    pub modes: Vec<i64>,
    /// Second amplitude for `two-mode`.
    pub secondary_amplitude: f64,
    /// Spectral decay rate `a` in `<xi>^{-a}` for `power-law`.
    pub decay: f64,
    pub max_mode: i64,
    /// `h = velocity * g`.
    pub velocity: f64,
    pub seed: u64,
}

impl Default for DataSpec {
    fn default() -> Self {
        Self {
            family: "sech".into(),
            amplitude: 0.5,
            width: 4.0,
            center: None,
            modes: vec![1, 3],
            secondary_amplitude: 0.2,
            decay: 3.0,
            max_mode: 48,
            velocity: 0.0,
            seed: 0,
        }
    }
}

impl DataSpec {
    pub fn family(name: &str) -> Self {
        Self { family: name.into(), ..Self::default() }
    }

    pub fn build(&self, grid: &Arc<Grid>) -> Result<(RealField, RealField)> {
        let family = data_family(&self.family)?;
        let g = family.profile(grid, self)?;
        let h = RealField::new(Arc::clone(grid), g.samples.iter().map(|v| v * self.velocity).collect())?;
        Ok((g, h))
    }
}

pub trait InitialData: Send + Sync {
    fn name(&self) -> &'static str;
    fn profile(&self, grid: &Arc<Grid>, spec: &DataSpec) -> Result<RealField>;
}

fn positive_width(spec: &DataSpec) -> Result<f64> {
    if spec.width.is_finite() && spec.width > 0.0 {
        Ok(spec.width)
    } else {
        Err(Error::InvalidParameter { name: "width", reason: format!("must be positive, got {}", spec.width) })
    }
}

fn mode_at(spec: &DataSpec, i: usize, grid: &Grid) -> Result<i64> {
    let j = *spec.modes.get(i).ok_or_else(|| Error::InvalidParameter {
        name: "modes",
        reason: format!("family `{}` needs at least {} mode indices", spec.family, i + 1),
    })?;
    if j.unsigned_abs() as usize >= grid.n() / 2 {
        return Err(Error::InvalidParameter {
            name: "modes",
            reason: format!("mode {j} is not resolved on n = {}", grid.n()),
        });
    }
    Ok(j)
}

struct Sech;
struct Gaussian;
struct Cosine;
struct TwoMode;
struct PowerLaw;
struct RandomSmooth;

impl InitialData for Sech {
    fn name(&self) -> &'static str {
        "sech"
    }

    fn profile(&self, grid: &Arc<Grid>, spec: &DataSpec) -> Result<RealField> {
        let w = positive_width(spec)?;
        let c = spec.center.unwrap_or(grid.length() / 2.0);
        Ok(grid.sample(|x| spec.amplitude / ((x - c) / w).cosh()))
    }
}

impl InitialData for Gaussian {
    fn name(&self) -> &'static str {
        "gaussian"
    }

    fn profile(&self, grid: &Arc<Grid>, spec: &DataSpec) -> Result<RealField> {
        let w = positive_width(spec)?;
        let c = spec.center.unwrap_or(grid.length() / 2.0);
        Ok(grid.sample(|x| spec.amplitude * (-((x - c) / w).powi(2)).exp()))
    }
}

impl InitialData for Cosine {
    fn name(&self) -> &'static str {
        "cosine"
    }

    fn profile(&self, grid: &Arc<Grid>, spec: &DataSpec) -> Result<RealField> {
        let xi = mode_at(spec, 0, grid)? as f64 * grid.fundamental();
        Ok(grid.sample(|x| spec.amplitude * (xi * x).cos()))
    }
}

impl InitialData for TwoMode {
    fn name(&self) -> &'static str {
        "two-mode"
    }

    fn profile(&self, grid: &Arc<Grid>, spec: &DataSpec) -> Result<RealField> {
        let a = mode_at(spec, 0, grid)? as f64 * grid.fundamental();
        let b = mode_at(spec, 1, grid)? as f64 * grid.fundamental();
        Ok(grid.sample(|x| spec.amplitude * (a * x).cos() + spec.secondary_amplitude * (b * x).sin()))
    }
}

/// `amplitude * sum_{1 <= j <= max_mode} <xi_j>^{-decay} cos(xi_j x + phi_j)` with
/// seeded uniform phases.
impl InitialData for PowerLaw {
    fn name(&self) -> &'static str {
        "power-law"
    }

    fn profile(&self, grid: &Arc<Grid>, spec: &DataSpec) -> Result<RealField> {
        let top = spec.max_mode.min(grid.n() as i64 / 2 - 1);
        let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
        let terms: Vec<(f64, f64, f64)> = (1..=top)
            .map(|j| {
                let xi = j as f64 * grid.fundamental();
                let phase = rng.random_range(0.0..2.0 * PI);
                (xi, spec.amplitude * bracket(xi).powf(-spec.decay), phase)
            })
            .collect();
        Ok(grid.sample(|x| terms.iter().map(|(xi, a, p)| a * (xi * x + p).cos()).sum()))
    }
}

/// Seeded Gaussian coefficients with envelope `exp(-(xi / width)^2)`.
impl InitialData for RandomSmooth {
    fn name(&self) -> &'static str {
        "random-smooth"
    }

    fn profile(&self, grid: &Arc<Grid>, spec: &DataSpec) -> Result<RealField> {
        let w = positive_width(spec)?;
        let top = spec.max_mode.min(grid.n() as i64 / 2 - 1);
        let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
        let terms: Vec<(f64, f64, f64)> = (1..=top)
            .map(|j| {
                let xi = j as f64 * grid.fundamental();
                let env = (-(xi / w).powi(2)).exp();
                let a: f64 = StandardNormal.sample(&mut rng);
                let b: f64 = StandardNormal.sample(&mut rng);
                (xi, spec.amplitude * env * a, spec.amplitude * env * b)
            })
            .collect();
        Ok(grid.sample(|x| terms.iter().map(|(xi, a, b)| a * (xi * x).cos() + b * (xi * x).sin()).sum()))
    }
}

pub fn data_family_names() -> &'static [&'static str] {
    &["sech", "gaussian", "cosine", "two-mode", "power-law", "random-smooth"]
}

pub fn data_family(name: &str) -> Result<Box<dyn InitialData>> {
    match name {
        "sech" => Ok(Box::new(Sech)),
        "gaussian" => Ok(Box::new(Gaussian)),
        "cosine" => Ok(Box::new(Cosine)),
        "two-mode" => Ok(Box::new(TwoMode)),
        "power-law" => Ok(Box::new(PowerLaw)),
        "random-smooth" => Ok(Box::new(RandomSmooth)),
        other => Err(Error::Unknown { kind: "data family", name: other.to_string() }),
    }
}
