use std::collections::BTreeMap;

use boussinesq_core::bourgain::verify_estimate;
use boussinesq_core::evolution::{growth_bound_check, simulate, SimulationSettings, Trajectory};
use boussinesq_core::imethod::{almost_conservation_scan, ScanOutcome, ScanSettings};
use boussinesq_core::spectral::make_grid;
use boussinesq_core::ModelParams;
use serde::{Deserialize, Serialize};

use crate::config::{CampaignConfig, EstimateSpec, ExperimentKind, ScanSpec};
use crate::error::Result;

pub const TIMESERIES_COLUMNS: [&str; 11] =
    ["t", "E_total", "E_uxx", "E_ux", "E_u", "E_kin", "E_pot", "EI_total", "Hs_norm_sq", "theorem_quantity", "Linf_u"];

pub const SCAN_COLUMNS: [&str; 6] = ["N", "delta", "raw_increment", "norm_product", "normalized", "usable"];

/// Result scalars of one run. Only finite values are kept.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub passed: bool,
    pub scalars: BTreeMap<String, f64>,
    pub flags: BTreeMap<String, bool>,
}

impl Summary {
    fn scalar(&mut self, key: impl Into<String>, value: f64) {
        if value.is_finite() {
            self.scalars.insert(key.into(), value);
        }
    }

    fn flag(&mut self, key: impl Into<String>, value: bool) {
        self.flags.insert(key.into(), value);
    }
}

/// A CSV file produced by a run.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub file_name: &'static str,
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub status: String,
    pub summary: Summary,
    pub table: Option<Table>,
}

impl Outcome {
    pub fn failed(reason: impl std::fmt::Display) -> Self {
        Self { status: format!("error: {reason}"), summary: Summary::default(), table: None }
    }
}

pub trait Experiment: Send + Sync {
    fn kind(&self) -> ExperimentKind;

    /// Splits a campaign into single-run configs, each complete enough to
    /// re-execute on its own.
    fn plan(&self, cfg: &CampaignConfig) -> Vec<CampaignConfig>;

    fn execute(&self, run: &CampaignConfig) -> Result<Outcome>;

    /// Short label for logs and reports.
    fn label(&self, run: &CampaignConfig) -> String;
}

pub fn experiment(kind: ExperimentKind) -> &'static dyn Experiment {
    match kind {
        ExperimentKind::Simulate => &Simulate,
        ExperimentKind::AlmostConservationScan => &AlmostConservation,
        ExperimentKind::EstimateSuite => &EstimateSuite,
        ExperimentKind::GrowthCheck => &GrowthCheck,
    }
}

pub fn registry() -> Vec<&'static dyn Experiment> {
    ExperimentKind::ALL.iter().map(|&k| experiment(k)).collect()
}

/// Run config with campaign-only fields cleared and unused sections reset.
fn single(cfg: &CampaignConfig) -> CampaignConfig {
    let mut run = cfg.clone();
    run.seed = None;
    run.output_dir = None;
    if run.experiment != ExperimentKind::AlmostConservationScan {
        run.scan = ScanSpec::default();
    }
    if run.experiment != ExperimentKind::EstimateSuite {
        run.estimates = EstimateSpec::default();
    }
    run
}

/// One run per `(s, N, data)`.
fn product_plan(cfg: &CampaignConfig) -> Vec<CampaignConfig> {
    let mut runs = Vec::new();
    for &s in &cfg.model.s {
        for &cutoff in &cfg.model.cutoffs {
            for d in &cfg.data {
                let mut run = single(cfg);
                run.model.s = vec![s];
                run.model.cutoffs = vec![cutoff];
                run.data = vec![d.clone()];
                runs.push(run);
            }
        }
    }
    runs
}

fn model_params(run: &CampaignConfig) -> Result<ModelParams> {
    let m = &run.model;
    Ok(ModelParams::new(m.beta, m.k, m.sign, m.s[0], m.cutoffs.first().copied().unwrap_or(1.0))?)
}

fn trajectory(run: &CampaignConfig) -> Result<Trajectory> {
    let grid = make_grid(run.grid.length, run.grid.n)?;
    let (g, h) = run.data[0].build(&grid)?;
    let settings = SimulationSettings {
        horizon: run.run.horizon,
        dt: run.run.dt,
        snapshot_every: run.run.snapshot_every,
        scheme: run.run.scheme.clone(),
        ..SimulationSettings::default()
    };
    Ok(simulate(&g, &h, &model_params(run)?, &settings)?)
}

fn timeseries(traj: &Trajectory) -> Table {
    let rows = traj
        .snapshots
        .iter()
        .map(|s| {
            let e = &s.energy;
            vec![
                s.t,
                e.total,
                e.uxx_term,
                e.ux_term,
                e.u_term,
                e.kinetic_term,
                e.potential_term,
                s.modified_energy.total,
                s.hs_norm_sq,
                s.theorem_quantity,
                s.linf,
            ]
        })
        .collect();
    Table { file_name: "timeseries.csv", columns: TIMESERIES_COLUMNS.to_vec(), rows }
}

fn trajectory_scalars(summary: &mut Summary, traj: &Trajectory) {
    let first = &traj.snapshots[0];
    let last = traj.last();
    summary.scalar("t_final", last.t);
    summary.scalar("dt", traj.dt);
    summary.scalar("energy_initial", first.energy.total);
    summary.scalar("energy_final", last.energy.total);
    summary.scalar("max_relative_energy_drift", traj.max_relative_energy_drift());
    summary.scalar("modified_energy_increment", last.modified_energy.total - first.modified_energy.total);
    let sup = |f: fn(&boussinesq_core::evolution::Snapshot) -> f64| traj.snapshots.iter().map(f).fold(0.0, f64::max);
    summary.scalar("sup_hs_norm_sq", sup(|s| s.hs_norm_sq));
    summary.scalar("sup_theorem_quantity", sup(|s| s.theorem_quantity));
    summary.scalar("sup_linf", sup(|s| s.linf));
    summary.flag("completed", traj.status.is_completed());
}

struct Simulate;

impl Experiment for Simulate {
    fn kind(&self) -> ExperimentKind {
        ExperimentKind::Simulate
    }

    fn plan(&self, cfg: &CampaignConfig) -> Vec<CampaignConfig> {
        product_plan(cfg)
    }

    fn label(&self, run: &CampaignConfig) -> String {
        format!("{} s={} N={}", run.data[0].family, run.model.s[0], run.model.cutoffs[0])
    }

    fn execute(&self, run: &CampaignConfig) -> Result<Outcome> {
        let traj = trajectory(run)?;
        let mut summary = Summary::default();
        trajectory_scalars(&mut summary, &traj);
        let within = traj.max_relative_energy_drift() <= run.run.energy_tolerance;
        summary.flag("energy_within_tolerance", within);
        summary.passed = traj.status.is_completed() && within;
        Ok(Outcome { status: traj.status.to_string(), summary, table: Some(timeseries(&traj)) })
    }
}

struct GrowthCheck;

impl Experiment for GrowthCheck {
    fn kind(&self) -> ExperimentKind {
        ExperimentKind::GrowthCheck
    }

    fn plan(&self, cfg: &CampaignConfig) -> Vec<CampaignConfig> {
        product_plan(cfg)
    }

    fn label(&self, run: &CampaignConfig) -> String {
        format!("{} s={} N={} T={}", run.data[0].family, run.model.s[0], run.model.cutoffs[0], run.run.horizon)
    }

    fn execute(&self, run: &CampaignConfig) -> Result<Outcome> {
        let traj = trajectory(run)?;
        let mut summary = Summary::default();
        trajectory_scalars(&mut summary, &traj);
        let table = Some(timeseries(&traj));
        if !traj.status.is_completed() {
            return Ok(Outcome { status: traj.status.to_string(), summary, table });
        }
        let check = growth_bound_check(&traj)?;
        summary.scalar("fit_exponent", check.fit.exponent);
        summary.scalar("fit_r_squared", check.fit.r_squared);
        summary.scalar("growth_exponent", check.growth_exponent);
        summary.scalar("ceiling_exponent", check.ceiling_exponent);
        summary.scalar("constant", check.constant);
        summary.scalar("sup_quantity", check.sup_quantity);
        summary.flag("bound_satisfied", check.satisfied);
        summary.passed = check.satisfied;
        Ok(Outcome { status: traj.status.to_string(), summary, table })
    }
}

struct AlmostConservation;

impl Experiment for AlmostConservation {
    fn kind(&self) -> ExperimentKind {
        ExperimentKind::AlmostConservationScan
    }

    /// One run per `(s, data)`; each run scans the whole `N` list.
    fn plan(&self, cfg: &CampaignConfig) -> Vec<CampaignConfig> {
        if cfg.model.cutoffs.is_empty() {
            return Vec::new();
        }
        let mut runs = Vec::new();
        for &s in &cfg.model.s {
            for d in &cfg.data {
                let mut run = single(cfg);
                run.model.s = vec![s];
                run.data = vec![d.clone()];
                runs.push(run);
            }
        }
        runs
    }

    fn label(&self, run: &CampaignConfig) -> String {
        format!("{} s={} N={:?}", run.data[0].family, run.model.s[0], run.model.cutoffs)
    }

    fn execute(&self, run: &CampaignConfig) -> Result<Outcome> {
        let grid = make_grid(run.grid.length, run.grid.n)?;
        let (g, h) = run.data[0].build(&grid)?;
        let settings = ScanSettings {
            delta: run.run.delta,
            min_steps: run.scan.min_steps,
            max_dt: run.scan.max_dt,
            scheme: run.run.scheme.clone(),
        };
        let report = almost_conservation_scan(&g, &h, &model_params(run)?, &run.model.cutoffs, &settings)?;
        let mut summary = Summary::default();
        for p in &report.points {
            summary.scalar(format!("delta@N={}", p.cutoff), p.delta);
            summary.scalar(format!("raw_increment@N={}", p.cutoff), p.raw_increment);
            summary.scalar(format!("normalized@N={}", p.cutoff), p.normalized);
        }
        summary.flag("monotone", report.monotone());
        match &report.outcome {
            ScanOutcome::Fitted { fit } => {
                summary.scalar("slope", fit.exponent);
                summary.scalar("slope_r_squared", fit.r_squared);
                summary.flag("identically_conserved", false);
                summary.passed = fit.exponent <= run.scan.max_slope;
            }
            ScanOutcome::IdenticallyConserved => {
                summary.flag("identically_conserved", true);
                summary.passed = true;
            }
        }
        let rows = report
            .points
            .iter()
            .map(|p| {
                vec![p.cutoff, p.delta, p.raw_increment, p.norm_product, p.normalized, f64::from(u8::from(p.usable))]
            })
            .collect();
        let table = Table { file_name: "scan.csv", columns: SCAN_COLUMNS.to_vec(), rows };
        Ok(Outcome { status: "completed".into(), summary, table: Some(table) })
    }
}

struct EstimateSuite;

impl Experiment for EstimateSuite {
    fn kind(&self) -> ExperimentKind {
        ExperimentKind::EstimateSuite
    }

    /// One run per estimate id.
    fn plan(&self, cfg: &CampaignConfig) -> Vec<CampaignConfig> {
        cfg.estimates
            .ids
            .iter()
            .map(|id| {
                let mut run = single(cfg);
                run.estimates.ids = vec![id.clone()];
                run
            })
            .collect()
    }

    fn label(&self, run: &CampaignConfig) -> String {
        run.estimates.ids[0].clone()
    }

    fn execute(&self, run: &CampaignConfig) -> Result<Outcome> {
        let report = verify_estimate(&run.estimates.ids[0], &run.estimates.ensemble)?;
        let mut summary = Summary::default();
        summary.scalar("ensemble_size", report.ensemble_size as f64);
        summary.scalar("max_ratio", report.max_ratio);
        summary.scalar("max_ratio_doubled", report.max_ratio_doubled);
        summary.scalar("growth", report.growth);
        summary.passed = report.passed;
        Ok(Outcome { status: "completed".into(), summary, table: None })
    }
}
