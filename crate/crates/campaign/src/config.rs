use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use boussinesq_core::bourgain::{parse_estimate, EnsembleConfig};
use boussinesq_core::evolution::{admissible_s_range, scheme_names};
use boussinesq_core::imethod::DeltaPolicy;
use boussinesq_core::initial_data::{data_family_names, DataSpec};
use boussinesq_core::Sign;
use serde::{Deserialize, Deserializer, Serialize};

use crate::error::{CampaignError, Result};

pub const ENV_OUT: &str = "BOUSSINESQ_OUT";
pub const DEFAULT_OUT: &str = "out";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    Simulate,
    AlmostConservationScan,
    EstimateSuite,
    GrowthCheck,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 4] = [
        ExperimentKind::Simulate,
        ExperimentKind::AlmostConservationScan,
        ExperimentKind::EstimateSuite,
        ExperimentKind::GrowthCheck,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::Simulate => "simulate",
            ExperimentKind::AlmostConservationScan => "almost-conservation-scan",
            ExperimentKind::EstimateSuite => "estimate-suite",
            ExperimentKind::GrowthCheck => "growth-check",
        }
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    /// A number, or a multiple of pi written as `"64pi"`.
    #[serde(deserialize_with = "length_value")]
    pub length: f64,
    pub n: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    #[serde(default = "default_beta")]
    pub beta: f64,
    pub k: u32,
    #[serde(default = "default_sign")]
    pub sign: Sign,
    pub s: Vec<f64>,
    #[serde(rename = "N")]
    pub cutoffs: Vec<f64>,
}

fn default_beta() -> f64 {
    1.0
}

fn default_sign() -> Sign {
    Sign::Defocusing
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunSpec {
    #[serde(rename = "T")]
    pub horizon: f64,
    pub dt: Option<f64>,
    pub snapshot_every: usize,
    pub scheme: String,
    pub delta: DeltaPolicy,
    /// Largest accepted `max |E(t) - E(0)| / |E(0)|` for `simulate`.
    pub energy_tolerance: f64,
}

impl Default for RunSpec {
    fn default() -> Self {
        Self {
            horizon: 10.0,
            dt: None,
            snapshot_every: 10,
            scheme: "etdrk4".into(),
            delta: DeltaPolicy::default(),
            energy_tolerance: 1e-6,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScanSpec {
    /// The scan passes when the fitted `N`-slope is at most this.
    pub max_slope: f64,
    pub min_steps: usize,
    pub max_dt: Option<f64>,
}

impl Default for ScanSpec {
    fn default() -> Self {
        Self { max_slope: -3.5, min_steps: 64, max_dt: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EstimateSpec {
    pub ids: Vec<String>,
    pub ensemble: EnsembleConfig,
}

impl Default for EstimateSpec {
    fn default() -> Self {
        Self {
            ids: [
                "sob-x",
                "w-str:inf,2",
                "w-str:8,4",
                "w-str:6,inf",
                "w-k",
                "w-mf",
                "w-infty",
                "prod-xst:2,0.1",
                "prod-xst:2,0.5",
            ]
            .map(String::from)
            .to_vec(),
            ensemble: EnsembleConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Conventions {
    /// The `epsilon` of targets written `a+` or `a-` in reports.
    pub epsilon: f64,
}

impl Default for Conventions {
    fn default() -> Self {
        Self { epsilon: boussinesq_core::evolution::EPSILON }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CampaignConfig {
    #[serde(default = "default_experiment")]
    pub experiment: ExperimentKind,
    /// Overrides every data and ensemble seed when set.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    pub grid: GridSpec,
    pub model: ModelSpec,
    #[serde(default = "default_data", deserialize_with = "one_or_many")]
    pub data: Vec<DataSpec>,
    #[serde(default)]
    pub run: RunSpec,
    #[serde(default)]
    pub scan: ScanSpec,
    #[serde(default)]
    pub estimates: EstimateSpec,
    #[serde(default)]
    pub conventions: Conventions,
}

fn default_experiment() -> ExperimentKind {
    ExperimentKind::Simulate
}

fn default_data() -> Vec<DataSpec> {
    vec![DataSpec::default()]
}

fn one_or_many<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Vec<DataSpec>, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum OneOrMany {
        One(DataSpec),
        Many(Vec<DataSpec>),
    }
    Ok(match OneOrMany::deserialize(d)? {
        OneOrMany::One(x) => vec![x],
        OneOrMany::Many(v) => v,
    })
}

fn length_value<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<f64, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Length {
        Number(f64),
        Text(String),
    }
    match Length::deserialize(d)? {
        Length::Number(x) => Ok(x),
        Length::Text(t) => {
            parse_length(&t).ok_or_else(|| serde::de::Error::custom(format!("cannot read length `{t}`")))
        }
    }
}

/// `"2pi"`, `"64 pi"`, `"pi"`, `"3.5*pi"` or a plain number.
pub fn parse_length(text: &str) -> Option<f64> {
    let t = text.trim().to_ascii_lowercase();
    match t.strip_suffix("pi") {
        Some(head) => {
            let head = head.trim().trim_end_matches('*').trim();
            let factor = if head.is_empty() { 1.0 } else { head.parse::<f64>().ok()? };
            Some(factor * std::f64::consts::PI)
        }
        None => t.parse().ok(),
    }
}

fn invalid(field: &str, rule: impl Into<String>) -> CampaignError {
    CampaignError::Invalid { field: field.to_string(), rule: rule.into() }
}

impl CampaignConfig {
    /// Checks every field against the preconditions of the module it feeds.
    pub fn validate(&self) -> Result<()> {
        let g = &self.grid;
        if !(g.length.is_finite() && g.length > 0.0) {
            return Err(invalid("grid.length", format!("L > 0 is required, got {}", g.length)));
        }
        if g.n < 8 || !g.n.is_multiple_of(2) {
            return Err(invalid("grid.n", format!("n must be even and >= 8, got {}", g.n)));
        }

        let m = &self.model;
        if m.k < 2 {
            return Err(invalid("model.k", format!("the power index must satisfy k >= 2 (an integer), got {}", m.k)));
        }
        if !(m.beta.is_finite() && m.beta.abs() < 2.0) {
            return Err(invalid("model.beta", format!("|beta| < 2 is required, got {}", m.beta)));
        }
        for (i, &s) in m.s.iter().enumerate() {
            if !(s.is_finite() && s > 0.0 && s <= 2.0) {
                return Err(invalid(&format!("model.s[{i}]"), format!("0 < s <= 2 is required, got {s}")));
            }
        }
        for (i, &n) in m.cutoffs.iter().enumerate() {
            if !(n.is_finite() && n >= 1.0) {
                return Err(invalid(&format!("model.N[{i}]"), format!("N >= 1 is required, got {n}")));
            }
        }
        if self.experiment == ExperimentKind::GrowthCheck {
            if m.sign != Sign::Defocusing {
                return Err(invalid("model.sign", "the growth bound applies to the defocusing sign only"));
            }
            let range = admissible_s_range(m.k)?;
            for (i, &s) in m.s.iter().enumerate() {
                if !(range.lower < s && s <= range.upper) {
                    return Err(invalid(
                        &format!("model.s[{i}]"),
                        format!(
                            "growth experiments need {} < s <= {} for k = {}, got {s}",
                            range.lower, range.upper, m.k
                        ),
                    ));
                }
            }
        }
        if self.experiment == ExperimentKind::AlmostConservationScan && !m.cutoffs.is_empty() {
            if m.cutoffs.len() < 4 {
                return Err(invalid("model.N", format!("a scan needs at least 4 cutoffs, got {}", m.cutoffs.len())));
            }
            if m.cutoffs.windows(2).any(|w| w[1] <= w[0]) {
                return Err(invalid("model.N", "cutoffs must increase"));
            }
        }

        for (i, d) in self.data.iter().enumerate() {
            if !data_family_names().contains(&d.family.as_str()) {
                return Err(invalid(
                    &format!("data[{i}].family"),
                    format!("unknown family `{}`; known: {}", d.family, data_family_names().join(", ")),
                ));
            }
            if !(d.amplitude.is_finite() && d.width.is_finite() && d.width > 0.0 && d.velocity.is_finite()) {
                return Err(invalid(&format!("data[{i}]"), "amplitude, velocity must be finite and width > 0"));
            }
        }

        let r = &self.run;
        if !(r.horizon.is_finite() && r.horizon > 0.0) {
            return Err(invalid("run.T", format!("T > 0 is required, got {}", r.horizon)));
        }
        if let Some(dt) = r.dt {
            if !(dt.is_finite() && dt > 0.0) {
                return Err(invalid("run.dt", format!("dt > 0 is required, got {dt}")));
            }
        }
        if r.snapshot_every == 0 {
            return Err(invalid("run.snapshot_every", "must be at least 1"));
        }
        if !scheme_names().contains(&r.scheme.as_str()) {
            return Err(invalid(
                "run.scheme",
                format!("unknown scheme `{}`; known: {}", r.scheme, scheme_names().join(", ")),
            ));
        }
        match r.delta {
            DeltaPolicy::Fixed { delta } if !(delta.is_finite() && delta > 0.0) => {
                return Err(invalid("run.delta.delta", format!("delta > 0 is required, got {delta}")));
            }
            DeltaPolicy::LocalExistence { constant, cap }
                if !(constant.is_finite() && constant > 0.0 && cap.is_finite() && cap > 0.0) =>
            {
                return Err(invalid("run.delta", "constant and cap must be positive"));
            }
            _ => {}
        }
        if !(r.energy_tolerance.is_finite() && r.energy_tolerance > 0.0) {
            return Err(invalid("run.energy_tolerance", "must be positive"));
        }

        if !self.scan.max_slope.is_finite() {
            return Err(invalid("scan.max_slope", "must be finite"));
        }
        if let Some(dt) = self.scan.max_dt {
            if !(dt.is_finite() && dt > 0.0) {
                return Err(invalid("scan.max_dt", format!("must be positive, got {dt}")));
            }
        }

        if self.experiment == ExperimentKind::EstimateSuite {
            for (i, id) in self.estimates.ids.iter().enumerate() {
                parse_estimate(id).map_err(|e| invalid(&format!("estimates.ids[{i}]"), e.to_string()))?;
            }
            self.estimates.ensemble.validate().map_err(|e| invalid("estimates.ensemble", e.to_string()))?;
            self.estimates
                .ensemble
                .doubled()
                .validate()
                .map_err(|e| invalid("estimates.ensemble", format!("doubled resolution: {e}")))?;
        }

        let c = &self.conventions;
        if !(c.epsilon.is_finite() && c.epsilon > 0.0) {
            return Err(invalid("conventions.epsilon", format!("must be positive, got {}", c.epsilon)));
        }
        Ok(())
    }

    /// Applies the campaign seed to every data spec and the ensemble.
    pub fn with_seed(mut self, seed: Option<u64>) -> Self {
        if seed.is_some() {
            self.seed = seed;
        }
        if let Some(seed) = self.seed {
            for d in &mut self.data {
                d.seed = seed;
            }
            self.estimates.ensemble.seed = seed;
        }
        self
    }

    /// `--out`, then `output_dir`, then `$BOUSSINESQ_OUT`, then `out`.
    pub fn output_root(&self, cli: Option<&Path>) -> PathBuf {
        if let Some(p) = cli {
            return p.to_path_buf();
        }
        if let Some(p) = &self.output_dir {
            return p.clone();
        }
        match std::env::var_os(ENV_OUT) {
            Some(v) if !v.is_empty() => PathBuf::from(v),
            _ => PathBuf::from(DEFAULT_OUT),
        }
    }

    /// Canonical JSON form; stable for a given config.
    pub fn canonical_json(&self) -> String {
        let value = serde_json::to_value(self).expect("config serializes");
        serde_json::to_string(&sort_keys(value)).expect("config serializes")
    }
}

fn sort_keys(v: serde_json::Value) -> serde_json::Value {
    use serde_json::Value;
    match v {
        Value::Object(map) => {
            let sorted: BTreeMap<String, Value> = map.into_iter().map(|(k, v)| (k, sort_keys(v))).collect();
            Value::Object(sorted.into_iter().collect())
        }
        Value::Array(items) => Value::Array(items.into_iter().map(sort_keys).collect()),
        other => other,
    }
}

/// Parses TOML text. `experiment` pins the experiment kind: it is inserted
/// when absent and must match when present.
pub fn parse_config(text: &str, experiment: Option<ExperimentKind>) -> Result<CampaignConfig> {
    let table: toml::Table = text.parse().map_err(|e: toml::de::Error| CampaignError::Parse(locate(text, e)))?;
    let mut cfg: CampaignConfig =
        toml::from_str(text).map_err(|e: toml::de::Error| CampaignError::Parse(locate(text, e)))?;
    if let Some(kind) = experiment {
        match table.get("experiment") {
            None => cfg.experiment = kind,
            Some(_) if cfg.experiment == kind => {}
            Some(_) => {
                return Err(invalid(
                    "experiment",
                    format!("config declares `{}` but `{}` was requested", cfg.experiment, kind.name()),
                ));
            }
        }
    }
    cfg.validate()?;
    Ok(cfg)
}

/// Error message with the line of the original text when the span maps back.
fn locate(text: &str, e: toml::de::Error) -> String {
    let msg = e.message().to_string();
    match e.span() {
        Some(span) if span.start <= text.len() && !msg.is_empty() => {
            let line = text[..span.start].matches('\n').count() + 1;
            format!("{msg} (near line {line})")
        }
        _ => e.to_string(),
    }
}

pub fn load_config(path: &Path, experiment: Option<ExperimentKind>) -> Result<CampaignConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| CampaignError::Io { path: path.to_path_buf(), source: e })?;
    parse_config(&text, experiment).map_err(|e| match e {
        CampaignError::Parse(msg) => CampaignError::Parse(format!("{}: {msg}", path.display())),
        other => other,
    })
}
