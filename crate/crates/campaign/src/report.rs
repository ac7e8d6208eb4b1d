use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use boussinesq_core::evolution::growth_exponent;
use serde::{Deserialize, Serialize};

use crate::config::ExperimentKind;
use crate::error::{CampaignError, Result};
use crate::experiment::Summary;
use crate::store::{write_atomic, RunRecord};

pub const REPORT_FILE: &str = "report.md";
pub const SUMMARY_FILE: &str = "summary.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryEntry {
    pub config_hash: String,
    pub experiment: ExperimentKind,
    pub label: String,
    pub status: String,
    pub passed: bool,
    pub scalars: BTreeMap<String, f64>,
    pub flags: BTreeMap<String, bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CampaignSummary {
    pub runs: usize,
    pub passed: usize,
    pub failed: usize,
    pub all_passed: bool,
    pub records: Vec<SummaryEntry>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub markdown: String,
    pub summary: CampaignSummary,
}

fn verdict(passed: bool) -> &'static str {
    if passed {
        "PASS"
    } else {
        "FAIL"
    }
}

fn num(s: &Summary, key: &str) -> String {
    s.scalars.get(key).map_or_else(|| "-".into(), |v| format!("{v:.4e}"))
}

fn short(hash: &str) -> &str {
    &hash[..hash.len().min(12)]
}

/// Markdown tables per experiment kind plus the machine-readable summary.
/// Records are ordered by config hash.
pub fn emit_report(records: &[RunRecord]) -> Result<Report> {
    if records.is_empty() {
        return Err(CampaignError::NoRecords(PathBuf::new()));
    }
    let mut sorted: Vec<&RunRecord> = records.iter().collect();
    sorted.sort_by(|a, b| a.config_hash.cmp(&b.config_hash));

    let passed = sorted.iter().filter(|r| r.summary.passed).count();
    let summary = CampaignSummary {
        runs: sorted.len(),
        passed,
        failed: sorted.len() - passed,
        all_passed: passed == sorted.len(),
        records: sorted
            .iter()
            .map(|r| SummaryEntry {
                config_hash: r.config_hash.clone(),
                experiment: r.experiment,
                label: r.label.clone(),
                status: r.status.clone(),
                passed: r.summary.passed,
                scalars: r.summary.scalars.clone(),
                flags: r.summary.flags.clone(),
            })
            .collect(),
    };

    let mut md = String::new();
    let _ = writeln!(md, "# Campaign report\n");
    let _ = writeln!(
        md,
        "{} runs, {} passed, {} failed. Overall: **{}**\n",
        summary.runs,
        passed,
        summary.failed,
        verdict(summary.all_passed)
    );

    for kind in ExperimentKind::ALL {
        let group: Vec<&RunRecord> = sorted.iter().copied().filter(|r| r.experiment == kind).collect();
        if group.is_empty() {
            continue;
        }
        let _ = writeln!(md, "## {kind}\n");
        match kind {
            ExperimentKind::Simulate => {
                let _ = writeln!(md, "| run | label | status | T | max abs(dE)/E | dE(Iu) | result |");
                let _ = writeln!(md, "|---|---|---|---|---|---|---|");
                for r in &group {
                    let s = &r.summary;
                    let _ = writeln!(
                        md,
                        "| {} | {} | {} | {} | {} | {} | {} |",
                        short(&r.config_hash),
                        r.label,
                        r.status,
                        num(s, "t_final"),
                        num(s, "max_relative_energy_drift"),
                        num(s, "modified_energy_increment"),
                        verdict(s.passed)
                    );
                }
            }
            ExperimentKind::AlmostConservationScan => {
                for r in &group {
                    let s = &r.summary;
                    let eps = r.config.conventions.epsilon;
                    let _ = writeln!(md, "### {} ({})\n", r.label, short(&r.config_hash));
                    let _ = writeln!(md, "| N | delta | increment | normalized |");
                    let _ = writeln!(md, "|---|---|---|---|");
                    for n in &r.config.model.cutoffs {
                        let _ = writeln!(
                            md,
                            "| {n} | {} | {} | {} |",
                            num(s, &format!("delta@N={n}")),
                            num(s, &format!("raw_increment@N={n}")),
                            num(s, &format!("normalized@N={n}"))
                        );
                    }
                    let slope =
                        s.scalars.get("slope").map_or_else(|| "identically conserved".into(), |v| format!("{v:.3}"));
                    let _ = writeln!(
                        md,
                        "\nfitted N-slope {slope}; target -4+eps = {:.3}; pass threshold {}; monotone {}; status {}: **{}**\n",
                        -4.0 + eps,
                        r.config.scan.max_slope,
                        s.flags.get("monotone").copied().unwrap_or(false),
                        r.status,
                        verdict(s.passed)
                    );
                }
            }
            ExperimentKind::GrowthCheck => {
                let _ = writeln!(md, "| run | label | status | fitted T-exponent | ceiling (4-2s)/(6ks-12k+4)+eps | checked ceiling | C | result |");
                let _ = writeln!(md, "|---|---|---|---|---|---|---|---|");
                for r in &group {
                    let s = &r.summary;
                    let m = &r.config.model;
                    let target =
                        m.s.first()
                            .and_then(|&sv| growth_exponent(m.k, sv).ok())
                            .map_or_else(|| "-".into(), |g| format!("{:.4}", g + r.config.conventions.epsilon));
                    let _ = writeln!(
                        md,
                        "| {} | {} | {} | {} | {} | {} | {} | {} |",
                        short(&r.config_hash),
                        r.label,
                        r.status,
                        num(s, "fit_exponent"),
                        target,
                        num(s, "ceiling_exponent"),
                        num(s, "constant"),
                        verdict(s.passed)
                    );
                }
            }
            ExperimentKind::EstimateSuite => {
                let _ =
                    writeln!(md, "| estimate | samples | max ratio | max ratio (2x resolution) | growth | result |");
                let _ = writeln!(md, "|---|---|---|---|---|---|");
                for r in &group {
                    let s = &r.summary;
                    let _ = writeln!(
                        md,
                        "| {} | {} | {} | {} | {} | {} |",
                        r.label,
                        num(s, "ensemble_size"),
                        num(s, "max_ratio"),
                        num(s, "max_ratio_doubled"),
                        num(s, "growth"),
                        verdict(s.passed)
                    );
                }
            }
        }
        md.push('\n');
    }
    let _ = writeln!(md, "Time series: `runs/<hash>/timeseries.csv`; scans: `runs/<hash>/scan.csv`.");
    Ok(Report { markdown: md, summary })
}

/// Writes `report.md` and `summary.json` under `root`.
pub fn write_report(root: &Path, report: &Report) -> Result<(PathBuf, PathBuf)> {
    let md = root.join(REPORT_FILE);
    write_atomic(&md, report.markdown.as_bytes())?;
    let js = root.join(SUMMARY_FILE);
    let text = serde_json::to_string_pretty(&report.summary)
        .map_err(|e| CampaignError::Json { path: js.clone(), source: e })?;
    write_atomic(&js, text.as_bytes())?;
    Ok((md, js))
}
