//! Catalogue of space-time estimates, checked empirically as
//! `max over an ensemble of LHS / RHS`, stable under refinement.

use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{ensemble_member, xst_norm, xst_norm_weighted, EnsembleConfig, ModulationWeight, SpaceTimeField, THETA};
use crate::energy::sobolev_norm;
use crate::error::{Error, Result};
use crate::evolution::EPSILON;
use crate::spectral::{apply_symbol, dealias_len, from_spectral, make_grid, to_spectral, RealField};

/// Largest accepted growth of the max ratio when the resolution doubles.
pub const REFINEMENT_TOLERANCE: f64 = 1.2;

pub trait Estimate: Send + Sync {
    fn id(&self) -> String;
    /// Number of fields on the left-hand side.
    fn arity(&self) -> usize {
        1
    }
    /// Regularity at which ensemble members are normalized.
    fn ensemble_regularity(&self) -> f64;
    fn ratio(&self, fields: &[&SpaceTimeField], beta: f64) -> Result<f64>;
}

fn physical(field: &SpaceTimeField, i: usize) -> RealField {
    from_spectral(&field.slice(i))
}

/// Trapezoid weights over the window `[0, delta]`.
fn window_weights(field: &SpaceTimeField) -> Vec<(usize, f64)> {
    let idx: Vec<usize> = field.window_indices().collect();
    let dt = field.time_step();
    let last = idx.len() - 1;
    idx.iter().enumerate().map(|(k, &i)| (i, if k == 0 || k == last { 0.5 * dt } else { dt })).collect()
}

fn lq_norm(samples: &[f64], q: f64, dx: f64) -> f64 {
    if q.is_infinite() {
        samples.iter().fold(0.0, |m, v| m.max(v.abs()))
    } else {
        (samples.iter().map(|v| v.abs().powf(q)).sum::<f64>() * dx).powf(1.0 / q)
    }
}

/// `||w||_{L^inf_t H^s_x} <~ ||w||_{X^{s,theta}}`
struct SobolevX {
    s: f64,
}

impl Estimate for SobolevX {
    fn id(&self) -> String {
        format!("sob-x:{}", self.s)
    }

    fn ensemble_regularity(&self) -> f64 {
        self.s
    }

    fn ratio(&self, fields: &[&SpaceTimeField], beta: f64) -> Result<f64> {
        let w = fields[0];
        let lhs = w.window_indices().map(|i| sobolev_norm(&w.slice(i), self.s)).fold(0.0, f64::max);
        Ok(lhs / xst_norm(w, self.s, THETA, beta, ModulationWeight::Dispersion)?)
    }
}

/// `||w||_{L^p_t L^q_x} <~ ||w||_{X^{0,theta}}`
struct Strichartz {
    p: f64,
    q: f64,
}

impl Estimate for Strichartz {
    fn id(&self) -> String {
        let show = |v: f64| if v.is_infinite() { "inf".to_string() } else { v.to_string() };
        format!("w-str:{},{}", show(self.p), show(self.q))
    }

    fn ensemble_regularity(&self) -> f64 {
        0.0
    }

    fn ratio(&self, fields: &[&SpaceTimeField], beta: f64) -> Result<f64> {
        let w = fields[0];
        let dx = w.grid.dx();
        let lhs = if self.p.is_infinite() {
            w.window_indices().map(|i| lq_norm(&physical(w, i).samples, self.q, dx)).fold(0.0, f64::max)
        } else {
            window_weights(w)
                .iter()
                .map(|&(i, wt)| wt * lq_norm(&physical(w, i).samples, self.q, dx).powf(self.p))
                .sum::<f64>()
                .powf(1.0 / self.p)
        };
        Ok(lhs / xst_norm(w, 0.0, THETA, beta, ModulationWeight::Dispersion)?)
    }
}

/// `||w_x||_{L^inf_x L^2_t} <~ ||w||_{X^{0,theta}}`
struct Kato;

impl Estimate for Kato {
    fn id(&self) -> String {
        "w-k".into()
    }

    fn ensemble_regularity(&self) -> f64 {
        0.0
    }

    fn ratio(&self, fields: &[&SpaceTimeField], beta: f64) -> Result<f64> {
        let w = fields[0];
        let mut acc = vec![0.0; w.grid.n()];
        for (i, wt) in window_weights(w) {
            let wx = from_spectral(&apply_symbol(&w.slice(i), |xi| Complex64::new(0.0, xi))?);
            for (a, v) in acc.iter_mut().zip(&wx.samples) {
                *a += wt * v * v;
            }
        }
        let lhs = acc.iter().fold(0.0f64, |m, v| m.max(*v)).sqrt();
        Ok(lhs / xst_norm(w, 0.0, THETA, beta, ModulationWeight::Dispersion)?)
    }
}

/// `||w||_{L^4_x L^inf_t} <~ ||D^{1/4} w||_{X^{0,theta}}`
struct MaximalFunction;

impl Estimate for MaximalFunction {
    fn id(&self) -> String {
        "w-mf".into()
    }

    fn ensemble_regularity(&self) -> f64 {
        0.25
    }

    fn ratio(&self, fields: &[&SpaceTimeField], beta: f64) -> Result<f64> {
        let w = fields[0];
        let mut sup = vec![0.0f64; w.grid.n()];
        for i in w.window_indices() {
            for (m, v) in sup.iter_mut().zip(&physical(w, i).samples) {
                *m = m.max(v.abs());
            }
        }
        let lhs = lq_norm(&sup, 4.0, w.grid.dx());
        let rhs = xst_norm_weighted(w, |xi| xi.abs().powf(0.25), THETA, beta, ModulationWeight::Dispersion)?;
        Ok(lhs / rhs)
    }
}

/// `||w||_{L^inf_{t,x}} <~ ||w||_{X^{1/2+,1/2+}}`
struct LinfBound;

impl Estimate for LinfBound {
    fn id(&self) -> String {
        "w-infty".into()
    }

    fn ensemble_regularity(&self) -> f64 {
        0.5 + EPSILON
    }

    fn ratio(&self, fields: &[&SpaceTimeField], beta: f64) -> Result<f64> {
        let w = fields[0];
        let lhs = w.window_indices().map(|i| physical(w, i).max_abs()).fold(0.0, f64::max);
        Ok(lhs / xst_norm(w, 0.5 + EPSILON, THETA, beta, ModulationWeight::Dispersion)?)
    }
}

/// `||w_1 ... w_{2k+1}||_{X^{s-1,0}} <~ prod ||w_i||_{X^{s,theta}}`
struct Product {
    k: u32,
    s: f64,
}

impl Estimate for Product {
    fn id(&self) -> String {
        format!("prod-xst:{},{}", self.k, self.s)
    }

    fn arity(&self) -> usize {
        2 * self.k as usize + 1
    }

    fn ensemble_regularity(&self) -> f64 {
        self.s
    }

    fn ratio(&self, fields: &[&SpaceTimeField], beta: f64) -> Result<f64> {
        let first = fields[0];
        let n = first.grid.n();
        let m = dealias_len(n, 2 * self.k + 1);
        let padded = make_grid(first.grid.length(), m)?;
        let mut lhs_sq = 0.0;
        for i in 0..first.n_t() {
            let mut prod = vec![1.0; m];
            for f in fields {
                for (a, v) in prod.iter_mut().zip(f.slice(i).padded_samples(m)) {
                    *a *= v;
                }
            }
            let spec = to_spectral(&RealField::new(Arc::clone(&padded), prod)?)?;
            lhs_sq += sobolev_norm(&spec, self.s - 1.0).powi(2);
        }
        let lhs = (lhs_sq * first.time_step()).sqrt();
        let mut rhs = 1.0;
        for f in fields {
            rhs *= xst_norm(f, self.s, THETA, beta, ModulationWeight::Dispersion)?;
        }
        Ok(lhs / rhs)
    }
}

fn parse_exponent(text: &str) -> Result<f64> {
    match text.trim() {
        "inf" | "infinity" => Ok(f64::INFINITY),
        t => t.parse::<f64>().map_err(|_| Error::InvalidParameter {
            name: "estimate",
            reason: format!("cannot parse `{t}` as a number"),
        }),
    }
}

/// Families understood by [`parse_estimate`].
pub fn estimate_ids() -> &'static [&'static str] {
    &["sob-x[:s]", "w-str:p,q", "w-k", "w-mf", "w-infty", "prod-xst:k,s"]
}

pub fn parse_estimate(id: &str) -> Result<Box<dyn Estimate>> {
    let (family, args) = match id.split_once(':') {
        Some((f, a)) => (f, Some(a)),
        None => (id, None),
    };
    let two = |a: Option<&str>| -> Result<(String, String)> {
        let a = a.ok_or_else(|| Error::InvalidParameter {
            name: "estimate",
            reason: format!("`{id}` needs two arguments"),
        })?;
        let (x, y) = a.split_once(',').ok_or_else(|| Error::InvalidParameter {
            name: "estimate",
            reason: format!("`{id}` needs two comma-separated arguments"),
        })?;
        Ok((x.to_string(), y.to_string()))
    };
    match (family, args) {
        ("sob-x", None) => Ok(Box::new(SobolevX { s: 1.0 })),
        ("sob-x", Some(a)) => Ok(Box::new(SobolevX { s: parse_exponent(a)? })),
        ("w-str", a) => {
            let (p, q) = two(a)?;
            let (p, q) = (parse_exponent(&p)?, parse_exponent(&q)?);
            if !(p >= 1.0 && q >= 2.0) || 3.0 / p + 1.0 / q < 0.5 - 1e-12 {
                return Err(Error::InadmissiblePair { p, q });
            }
            Ok(Box::new(Strichartz { p, q }))
        }
        ("w-k", None) => Ok(Box::new(Kato)),
        ("w-mf", None) => Ok(Box::new(MaximalFunction)),
        ("w-infty", None) => Ok(Box::new(LinfBound)),
        ("prod-xst", a) => {
            let (k, s) = two(a)?;
            let k: u32 = k.trim().parse().map_err(|_| Error::InvalidParameter {
                name: "k",
                reason: format!("cannot parse `{k}` as an integer"),
            })?;
            let s = parse_exponent(&s)?;
            if k < 2 {
                return Err(Error::InvalidParameter { name: "k", reason: format!("k >= 2 is required, got {k}") });
            }
            let floor = 0.5 - 2.0 / (2.0 * k as f64 + 1.0);
            if s < floor - 1e-12 {
                return Err(Error::InvalidParameter {
                    name: "s",
                    reason: format!("product estimate needs s >= {floor}, got {s}"),
                });
            }
            Ok(Box::new(Product { k, s }))
        }
        _ => Err(Error::Unknown { kind: "estimate", name: id.to_string() }),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateReport {
    pub id: String,
    pub ensemble_size: usize,
    pub max_ratio: f64,
    pub max_ratio_doubled: f64,
    /// `max_ratio_doubled / max_ratio`
    pub growth: f64,
    pub passed: bool,
}

fn max_ratio(est: &dyn Estimate, cfg: &EnsembleConfig) -> Result<f64> {
    let cfg = EnsembleConfig { s: est.ensemble_regularity(), ..cfg.clone() };
    cfg.validate()?;
    let grid = make_grid(cfg.length, cfg.n)?;
    let ratios: Vec<f64> = if est.arity() == 1 {
        (0..cfg.count)
            .into_par_iter()
            .map(|i| {
                let (f, _) = ensemble_member(&cfg, &grid, i)?;
                est.ratio(&[&f], cfg.beta)
            })
            .collect::<Result<_>>()?
    } else {
        let members = (0..cfg.count)
            .into_par_iter()
            .map(|i| ensemble_member(&cfg, &grid, i).map(|m| m.0))
            .collect::<Result<Vec<_>>>()?;
        let r = est.arity();
        (0..cfg.count)
            .into_par_iter()
            .map(|i| {
                let factors: Vec<&SpaceTimeField> = (0..r).map(|j| &members[(i + j) % cfg.count]).collect();
                est.ratio(&factors, cfg.beta)
            })
            .collect::<Result<_>>()?
    };
    if let Some(bad) = ratios.iter().find(|r| !(r.is_finite() && **r > 0.0)) {
        return Err(Error::InvalidParameter {
            name: "ratio",
            reason: format!("non-positive or non-finite ratio {bad}"),
        });
    }
    Ok(ratios.into_iter().fold(0.0, f64::max))
}

/// Max ratio at the configured resolution and at doubled `(n, n_t)`; passes
/// when the doubled value is below [`REFINEMENT_TOLERANCE`] times the base one.
pub fn verify_estimate(id: &str, cfg: &EnsembleConfig) -> Result<EstimateReport> {
    let est = parse_estimate(id)?;
    let base = max_ratio(est.as_ref(), cfg)?;
    let doubled = max_ratio(est.as_ref(), &cfg.doubled())?;
    let growth = doubled / base;
    Ok(EstimateReport {
        id: est.id(),
        ensemble_size: cfg.count,
        max_ratio: base,
        max_ratio_doubled: doubled,
        growth,
        passed: growth < REFINEMENT_TOLERANCE,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::make_grid;

    #[test]
    fn parsing() {
        assert_eq!(parse_estimate("sob-x").unwrap().id(), "sob-x:1");
        assert_eq!(parse_estimate("w-str:inf,2").unwrap().id(), "w-str:inf,2");
        assert_eq!(parse_estimate("prod-xst:2,0.1").unwrap().arity(), 5);
        assert!(matches!(parse_estimate("w-str:12,8"), Err(Error::InadmissiblePair { .. })));
        assert!(parse_estimate("w-str:8,4").is_ok());
        assert!(matches!(parse_estimate("w-str:8,1"), Err(Error::InadmissiblePair { .. })));
        assert!(parse_estimate("w-str:6,inf").is_ok());
        assert!(matches!(parse_estimate("bogus"), Err(Error::Unknown { .. })));
        assert!(parse_estimate("prod-xst:2,0.05").is_err());
        assert!(parse_estimate("prod-xst:1,0.5").is_err());
    }

    #[test]
    fn l2_strichartz_is_sobolev_x_at_zero() {
        let cfg = EnsembleConfig { count: 5, n: 16, n_t: 256, ..Default::default() };
        let grid = make_grid(cfg.length, cfg.n).unwrap();
        let str_ = parse_estimate("w-str:inf,2").unwrap();
        let sob = parse_estimate("sob-x:0").unwrap();
        for i in 0..cfg.count {
            let (f, _) = ensemble_member(&cfg, &grid, i).unwrap();
            let a = str_.ratio(&[&f], cfg.beta).unwrap();
            let b = sob.ratio(&[&f], cfg.beta).unwrap();
            assert!((a - b).abs() <= 1e-12 * b);
        }
    }
}
