use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::Trajectory;
use crate::energy::sobolev_norm;
use crate::error::{Error, Result};
use crate::fit::{fit_power_law, PowerLawFit};
use crate::imethod::{i_operator, IMultiplier};
use crate::params::{ModelParams, Sign};
use crate::spectral::{to_spectral, RealField};

/// The `epsilon` in every `a+` / `a-` exponent.
pub const EPSILON: f64 = 0.01;

/// `delta = [C (||Ig||_{H^2} + ||Ih||_{L^2})^{-2k}]^{1/(1/2 - eps)}`, capped at `cap`.
pub fn local_existence_delta(
    g: &RealField,
    h: &RealField,
    params: &ModelParams,
    constant: f64,
    cap: f64,
) -> Result<f64> {
    if !(constant.is_finite() && constant > 0.0) {
        return Err(Error::InvalidParameter { name: "C", reason: format!("C > 0 is required, got {constant}") });
    }
    if !(cap.is_finite() && cap > 0.0) {
        return Err(Error::InvalidParameter { name: "delta_max", reason: format!("must be positive, got {cap}") });
    }
    g.grid.check_same(&h.grid)?;
    let mult = IMultiplier::from_params(Arc::clone(&g.grid), params)?;
    let size = sobolev_norm(&i_operator(&to_spectral(g)?, &mult)?, 2.0)
        + sobolev_norm(&i_operator(&to_spectral(h)?, &mult)?, 0.0);
    if size == 0.0 {
        return Ok(cap);
    }
    let base = constant * size.powf(-2.0 * params.k as f64);
    Ok(base.powf(1.0 / (0.5 - EPSILON)).min(cap))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdmissibleRange {
    /// `2 - 2/(3k)`, excluded.
    pub lower: f64,
    /// 2, excluded from the open range; `s = 2` is the energy level itself.
    pub upper: f64,
    /// Regularity above which the multilinear estimates hold.
    pub multilinear_threshold: f64,
}

impl AdmissibleRange {
    pub fn contains(&self, s: f64) -> bool {
        s > self.lower && s < self.upper
    }
}

pub fn admissible_s_range(k: u32) -> Result<AdmissibleRange> {
    if k < 2 {
        return Err(Error::InvalidParameter { name: "k", reason: format!("k >= 2 is required, got {k}") });
    }
    Ok(AdmissibleRange {
        lower: 2.0 - 2.0 / (3.0 * k as f64),
        upper: 2.0,
        multilinear_threshold: if k == 2 { 0.25 } else { 0.5 },
    })
}

/// `(4 - 2s) / (6ks - 12k + 4)` for `s` in the admissible range or `s = 2`.
pub fn growth_exponent(k: u32, s: f64) -> Result<f64> {
    let range = admissible_s_range(k)?;
    if !(s > range.lower && s <= range.upper) {
        return Err(Error::InvalidParameter {
            name: "s",
            reason: format!("growth exponent needs {} < s <= 2, got {s}", range.lower),
        });
    }
    let k = k as f64;
    Ok((4.0 - 2.0 * s) / (6.0 * k * s - 12.0 * k + 4.0))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrowthCheck {
    /// Fit of the running supremum of the theorem quantity against `1 + t`.
    pub fit: PowerLawFit,
    pub growth_exponent: f64,
    /// `growth_exponent + 0.1`
    pub ceiling_exponent: f64,
    /// Smallest constant bounding the first 10% of the run.
    pub constant: f64,
    pub sup_quantity: f64,
    pub satisfied: bool,
}

pub fn growth_bound_check(traj: &Trajectory) -> Result<GrowthCheck> {
    if !traj.status.is_completed() {
        return Err(Error::IncompleteTrajectory(traj.status.to_string()));
    }
    if traj.params.sign != Sign::Defocusing {
        return Err(Error::InvalidParameter { name: "sign", reason: "growth bound applies to defocusing runs".into() });
    }
    if traj.snapshots.len() < 3 {
        return Err(Error::EmptyTrajectory { found: traj.snapshots.len(), needed: 3 });
    }
    let gamma = growth_exponent(traj.params.k, traj.params.s)?;
    let ceiling = gamma + 0.1;
    let t0 = traj.snapshots[0].t;
    let horizon = traj.last().t - t0;

    let mut running = 0.0f64;
    let sup: Vec<(f64, f64)> = traj
        .snapshots
        .iter()
        .map(|s| {
            running = running.max(s.theorem_quantity);
            (1.0 + s.t - t0, running)
        })
        .collect();
    let fit = fit_power_law(&sup)?;
    let constant =
        sup.iter().filter(|(x, _)| x - 1.0 <= 0.1 * horizon).map(|(x, q)| q / x.powf(ceiling)).fold(0.0, f64::max);
    let satisfied = sup.iter().all(|(x, q)| *q <= constant * x.powf(ceiling) * (1.0 + 1e-12));
    Ok(GrowthCheck {
        fit,
        growth_exponent: gamma,
        ceiling_exponent: ceiling,
        constant,
        sup_quantity: running,
        satisfied,
    })
}
