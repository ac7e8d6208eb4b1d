//! Config-driven experiment campaigns for the Boussinesq solver: sweeps over
//! `(s, N, data)`, crash-safe run directories, an index and a report.

pub mod config;
pub mod error;
pub mod experiment;
pub mod report;
pub mod store;

use std::collections::BTreeMap;
use std::path::PathBuf;

use chrono::{SecondsFormat, Utc};
use log::info;
use rayon::prelude::*;

pub use config::{load_config, parse_config, CampaignConfig, ExperimentKind, ENV_OUT};
pub use error::{CampaignError, Result};
pub use experiment::{experiment, registry, Experiment, Outcome, Summary};
pub use report::{emit_report, write_report, CampaignSummary, Report};
pub use store::{config_hash, RunRecord, Store};

#[derive(Debug, Clone)]
pub struct RunOptions {
    pub out: PathBuf,
    /// Worker threads; 0 means one per available core.
    pub workers: usize,
}

#[derive(Debug, Clone)]
pub struct CampaignOutcome {
    /// Records of this invocation, sorted by config hash.
    pub records: Vec<RunRecord>,
    pub quarantined: Vec<PathBuf>,
}

impl CampaignOutcome {
    pub fn all_passed(&self) -> bool {
        self.records.iter().all(|r| r.summary.passed)
    }
}

fn now() -> String {
    Utc::now().to_rfc3339_opts(SecondsFormat::Millis, true)
}

fn execute_one(exp: &dyn Experiment, run: CampaignConfig, hash: String) -> (RunRecord, Option<experiment::Table>) {
    let started = now();
    let label = exp.label(&run);
    let outcome = exp.execute(&run).unwrap_or_else(Outcome::failed);
    let record = RunRecord {
        config_hash: hash,
        code_version: store::CODE_VERSION.into(),
        experiment: run.experiment,
        label,
        started,
        finished: now(),
        status: outcome.status,
        csv: outcome.table.as_ref().map(|t| t.file_name.to_string()),
        summary: outcome.summary,
        config: run,
    };
    (record, outcome.table)
}

/// Plans, executes and persists every run of `cfg`, then rewrites the index
/// from all runs on disk. Failed runs are recorded, not propagated.
pub fn run_campaign(cfg: &CampaignConfig, opts: &RunOptions) -> Result<CampaignOutcome> {
    cfg.validate()?;
    let (store, quarantined) = Store::open(&opts.out)?;
    let exp = experiment(cfg.experiment);

    let mut plans: BTreeMap<String, CampaignConfig> = BTreeMap::new();
    for run in exp.plan(cfg) {
        plans.entry(config_hash(&run)).or_insert(run);
    }
    info!("{}: {} runs into {}", cfg.experiment, plans.len(), opts.out.display());

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(opts.workers)
        .build()
        .map_err(|e| CampaignError::Invalid { field: "workers".into(), rule: e.to_string() })?;
    let written: Vec<Result<RunRecord>> = pool.install(|| {
        plans
            .into_par_iter()
            .map(|(hash, run)| {
                let (record, table) = execute_one(exp, run, hash);
                store.write_run(&record, table.as_ref())?;
                info!(
                    "{} [{}] {}: {}",
                    &record.config_hash[..12],
                    record.label,
                    record.status,
                    if record.summary.passed { "pass" } else { "fail" }
                );
                Ok(record)
            })
            .collect()
    });
    let mut records = written.into_iter().collect::<Result<Vec<_>>>()?;
    records.sort_by(|a, b| a.config_hash.cmp(&b.config_hash));

    store.write_index(&store.records()?)?;
    if !records.is_empty() {
        write_report(store.root(), &emit_report(&records)?)?;
    }
    Ok(CampaignOutcome { records, quarantined })
}

/// Regenerates index, report and summary from every run stored under `out`.
pub fn report_from_disk(out: &std::path::Path) -> Result<Report> {
    let (store, _) = Store::open(out)?;
    let records = store.records()?;
    if records.is_empty() {
        return Err(CampaignError::NoRecords(out.to_path_buf()));
    }
    store.write_index(&records)?;
    let report = emit_report(&records)?;
    write_report(out, &report)?;
    Ok(report)
}
