use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use log::warn;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::{CampaignConfig, ExperimentKind};
use crate::error::{io_err, CampaignError, Result};
use crate::experiment::{Summary, Table};

pub const CODE_VERSION: &str = concat!(env!("CARGO_PKG_NAME"), " ", env!("CARGO_PKG_VERSION"));
pub const MANIFEST: &str = "manifest.json";
pub const INDEX: &str = "index.json";
const PARTIAL: &str = ".partial";

/// SHA-256 of the canonical JSON form of a run config, in hex.
pub fn config_hash(cfg: &CampaignConfig) -> String {
    format!("{:x}", Sha256::digest(cfg.canonical_json().as_bytes()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub config_hash: String,
    pub code_version: String,
    pub experiment: ExperimentKind,
    pub label: String,
    pub started: String,
    pub finished: String,
    pub status: String,
    /// Relative to the run directory.
    pub csv: Option<String>,
    pub summary: Summary,
    pub config: CampaignConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndexEntry {
    pub config_hash: String,
    pub experiment: ExperimentKind,
    pub label: String,
    pub status: String,
    pub passed: bool,
    pub path: String,
}

/// Output tree: `<root>/runs/<hash>/`, `<root>/quarantine/`, `<root>/index.json`.
#[derive(Debug, Clone)]
pub struct Store {
    root: PathBuf,
}

impl Store {
    /// Creates the tree and moves any leftover `*.partial` run directory to
    /// `quarantine/`. Returns the store and the quarantined paths.
    pub fn open(root: &Path) -> Result<(Self, Vec<PathBuf>)> {
        let store = Self { root: root.to_path_buf() };
        fs::create_dir_all(store.runs_dir()).map_err(io_err(store.runs_dir()))?;
        let mut quarantined = Vec::new();
        for entry in fs::read_dir(store.runs_dir()).map_err(io_err(store.runs_dir()))? {
            let entry = entry.map_err(io_err(store.runs_dir()))?;
            let name = entry.file_name().to_string_lossy().into_owned();
            if !name.ends_with(PARTIAL) {
                continue;
            }
            let qdir = store.root.join("quarantine");
            fs::create_dir_all(&qdir).map_err(io_err(&qdir))?;
            let mut target = qdir.join(&name);
            let mut k = 1;
            while target.exists() {
                target = qdir.join(format!("{name}.{k}"));
                k += 1;
            }
            fs::rename(entry.path(), &target).map_err(io_err(entry.path()))?;
            warn!("quarantined incomplete run directory {} -> {}", entry.path().display(), target.display());
            quarantined.push(target);
        }
        quarantined.sort();
        Ok((store, quarantined))
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn runs_dir(&self) -> PathBuf {
        self.root.join("runs")
    }

    pub fn run_dir(&self, hash: &str) -> PathBuf {
        self.runs_dir().join(hash)
    }

    /// Writes the run into `<hash>.partial` and renames it into place, so a
    /// crash never leaves a directory that looks complete.
    pub fn write_run(&self, record: &RunRecord, table: Option<&Table>) -> Result<PathBuf> {
        let final_dir = self.run_dir(&record.config_hash);
        let partial = self.runs_dir().join(format!("{}{PARTIAL}", record.config_hash));
        if partial.exists() {
            fs::remove_dir_all(&partial).map_err(io_err(&partial))?;
        }
        fs::create_dir_all(&partial).map_err(io_err(&partial))?;
        if let Some(t) = table {
            write_csv(&partial.join(t.file_name), t)?;
        }
        let path = partial.join(MANIFEST);
        let json =
            serde_json::to_string_pretty(record).map_err(|e| CampaignError::Json { path: path.clone(), source: e })?;
        write_synced(&path, json.as_bytes())?;
        if final_dir.exists() {
            fs::remove_dir_all(&final_dir).map_err(io_err(&final_dir))?;
        }
        fs::rename(&partial, &final_dir).map_err(io_err(&final_dir))?;
        Ok(final_dir)
    }

    /// Every completed run on disk, sorted by config hash.
    pub fn records(&self) -> Result<Vec<RunRecord>> {
        let mut records = Vec::new();
        let dir = self.runs_dir();
        if !dir.exists() {
            return Ok(records);
        }
        for entry in fs::read_dir(&dir).map_err(io_err(&dir))? {
            let entry = entry.map_err(io_err(&dir))?;
            let name = entry.file_name().to_string_lossy().into_owned();
            if name.ends_with(PARTIAL) || !entry.path().is_dir() {
                continue;
            }
            records.push(read_manifest(&entry.path().join(MANIFEST))?);
        }
        records.sort_by(|a, b| a.config_hash.cmp(&b.config_hash));
        Ok(records)
    }

    /// Rewrites `index.json` from the given records.
    pub fn write_index(&self, records: &[RunRecord]) -> Result<PathBuf> {
        let mut entries: Vec<IndexEntry> = records
            .iter()
            .map(|r| IndexEntry {
                config_hash: r.config_hash.clone(),
                experiment: r.experiment,
                label: r.label.clone(),
                status: r.status.clone(),
                passed: r.summary.passed,
                path: format!("runs/{}", r.config_hash),
            })
            .collect();
        entries.sort_by(|a, b| a.config_hash.cmp(&b.config_hash));
        let path = self.root.join(INDEX);
        let json = serde_json::to_string_pretty(&entries)
            .map_err(|e| CampaignError::Json { path: path.clone(), source: e })?;
        write_atomic(&path, json.as_bytes())?;
        Ok(path)
    }
}

pub fn read_manifest(path: &Path) -> Result<RunRecord> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    serde_json::from_str(&text).map_err(|e| CampaignError::Json { path: path.to_path_buf(), source: e })
}

fn write_synced(path: &Path, bytes: &[u8]) -> Result<()> {
    let mut f = fs::File::create(path).map_err(io_err(path))?;
    f.write_all(bytes).map_err(io_err(path))?;
    f.sync_all().map_err(io_err(path))
}

/// Write to a sibling temp file, then rename over `path`.
pub(crate) fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let tmp = path.with_extension("tmp");
    write_synced(&tmp, bytes)?;
    fs::rename(&tmp, path).map_err(io_err(path))
}

fn write_csv(path: &Path, table: &Table) -> Result<()> {
    let csv_err = |e: csv::Error| CampaignError::Io { path: path.to_path_buf(), source: e.into() };
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(&table.columns).map_err(csv_err)?;
    for row in &table.rows {
        w.write_record(row.iter().map(|v| format!("{v:e}"))).map_err(csv_err)?;
    }
    let bytes = w.into_inner().map_err(|e| CampaignError::Io { path: path.to_path_buf(), source: e.into_error() })?;
    write_synced(path, &bytes)
}
