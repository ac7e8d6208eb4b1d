use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use boussinesq_campaign::store::{read_manifest, MANIFEST};
use boussinesq_campaign::{load_config, run_campaign, ExperimentKind, RunOptions};

fn example() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../docs/campaign.toml")
}

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_boussinesq"));
    c.env_remove("BOUSSINESQ_OUT").env("RUST_LOG", "error");
    c
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

const SMALL: &str = r#"
[grid]
length = "2pi"
n = 16

[model]
k = 2
s = [1.8]
N = [2.0]

[run]
T = 0.05
"#;

#[test]
fn documented_example_loads_and_runs() {
    let cfg = load_config(&example(), None).unwrap();
    assert_eq!(cfg.experiment, ExperimentKind::Simulate);
    assert_eq!(cfg.data.len(), 2);
    let cfg = cfg.with_seed(None);
    let tmp = tempfile::tempdir().unwrap();
    let outcome = run_campaign(&cfg, &RunOptions { out: tmp.path().to_path_buf(), workers: 2 }).unwrap();
    assert_eq!(outcome.records.len(), 4);
    assert!(outcome.all_passed(), "{:#?}", outcome.records);
    for r in &outcome.records {
        let dir = tmp.path().join("runs").join(&r.config_hash);
        let csv = fs::read_to_string(dir.join("timeseries.csv")).unwrap();
        assert_eq!(
            csv.lines().next().unwrap(),
            "t,E_total,E_uxx,E_ux,E_u,E_kin,E_pot,EI_total,Hs_norm_sq,theorem_quantity,Linf_u"
        );
        assert_eq!(&read_manifest(&dir.join(MANIFEST)).unwrap(), r);
    }
    for f in ["index.json", "report.md", "summary.json"] {
        assert!(tmp.path().join(f).exists(), "{f}");
    }
}

#[test]
fn documented_example_parses_for_every_experiment() {
    let text = fs::read_to_string(example()).unwrap().replace("experiment = \"simulate\"\n", "");
    for kind in [ExperimentKind::Simulate, ExperimentKind::EstimateSuite, ExperimentKind::GrowthCheck] {
        boussinesq_campaign::parse_config(&text, Some(kind)).unwrap();
    }
}

#[test]
fn manifest_config_reexecutes_the_run() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = boussinesq_campaign::parse_config(SMALL, None).unwrap();
    let first = run_campaign(&cfg, &RunOptions { out: tmp.path().join("a"), workers: 1 }).unwrap();
    let echoed = &first.records[0].config;
    let again = run_campaign(echoed, &RunOptions { out: tmp.path().join("b"), workers: 1 }).unwrap();
    assert_eq!(again.records.len(), 1);
    assert_eq!(again.records[0].config_hash, first.records[0].config_hash);
    assert_eq!(again.records[0].summary, first.records[0].summary);
}

#[test]
fn exit_code_zero_on_success() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(tmp.path(), "c.toml", SMALL);
    let out = tmp.path().join("out");
    let st = bin().args(["simulate", "--quiet", "--config"]).arg(&cfg).arg("--out").arg(&out).status().unwrap();
    assert_eq!(st.code(), Some(0));
    assert!(out.join("index.json").exists());
    let st = bin().args(["report", "--quiet", "--out"]).arg(&out).status().unwrap();
    assert_eq!(st.code(), Some(0));
}

#[test]
fn exit_code_one_on_failed_experiment() {
    let tmp = tempfile::tempdir().unwrap();
    let text = format!("{SMALL}energy_tolerance = 1e-300\n");
    let cfg = write(tmp.path(), "c.toml", &text);
    let st = bin()
        .args(["simulate", "--quiet", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(tmp.path().join("o"))
        .status()
        .unwrap();
    assert_eq!(st.code(), Some(1));
}

#[test]
fn exit_code_two_on_config_errors() {
    let tmp = tempfile::tempdir().unwrap();
    let bad_k = write(tmp.path(), "k.toml", &SMALL.replace("k = 2", "k = 1"));
    let broken = write(tmp.path(), "b.toml", "[grid\n");
    for cfg in [&bad_k, &broken] {
        let out =
            bin().args(["simulate", "--config"]).arg(cfg).arg("--out").arg(tmp.path().join("o")).output().unwrap();
        assert_eq!(out.status.code(), Some(2));
        assert!(!out.stderr.is_empty());
    }
    let missing = bin().args(["simulate", "--quiet"]).status().unwrap();
    assert_eq!(missing.code(), Some(2));
    let mismatch = write(tmp.path(), "m.toml", &format!("experiment = \"growth-check\"\n{SMALL}"));
    let st = bin().args(["simulate", "--quiet", "--config"]).arg(&mismatch).status().unwrap();
    assert_eq!(st.code(), Some(2));
}

#[test]
fn environment_variable_sets_default_output_root() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(tmp.path(), "c.toml", SMALL);
    let root = tmp.path().join("from-env");
    let st = bin().env("BOUSSINESQ_OUT", &root).args(["simulate", "--quiet", "--config"]).arg(&cfg).status().unwrap();
    assert_eq!(st.code(), Some(0));
    assert!(root.join("index.json").exists());
}

#[test]
fn empty_sweep_writes_empty_index() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = boussinesq_campaign::parse_config(&SMALL.replace("s = [1.8]", "s = []"), None).unwrap();
    let outcome = run_campaign(&cfg, &RunOptions { out: tmp.path().to_path_buf(), workers: 1 }).unwrap();
    assert!(outcome.records.is_empty());
    assert_eq!(fs::read_to_string(tmp.path().join("index.json")).unwrap().trim(), "[]");
}

#[test]
fn report_without_runs_fails() {
    let tmp = tempfile::tempdir().unwrap();
    let st = bin().args(["report", "--quiet", "--out"]).arg(tmp.path()).status().unwrap();
    assert_eq!(st.code(), Some(1));
}

#[test]
fn interrupted_run_is_quarantined_on_next_invocation() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = boussinesq_campaign::parse_config(SMALL, None).unwrap();
    let opts = RunOptions { out: tmp.path().to_path_buf(), workers: 1 };
    let first = run_campaign(&cfg, &opts).unwrap();
    let hash = &first.records[0].config_hash;
    let partial = tmp.path().join("runs").join(format!("{hash}.partial"));
    fs::create_dir_all(&partial).unwrap();
    fs::write(partial.join("timeseries.csv"), "t\n").unwrap();
    let second = run_campaign(&cfg, &opts).unwrap();
    assert_eq!(second.quarantined.len(), 1);
    assert!(second.quarantined[0].starts_with(tmp.path().join("quarantine")));
    assert!(!partial.exists());
    assert_eq!(second.records[0].summary, first.records[0].summary);
}
