use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use henonnet::config::{ExperimentConfig, Scale};
use henonnet::experiment::{self, TrainOptions};
use henonnet::io;
use henonnet::json;
use henonnet_core::oracles::SystemSpec;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_henonnet"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

/// Small variant of a preset so CLI tests stay fast.
fn small_config(dir: &Path, name: &str, epochs: usize) -> PathBuf {
    let mut cfg = ExperimentConfig::preset(name, Scale::Desk).unwrap();
    cfg.optimizer.epochs = epochs;
    cfg.architecture.layers = 2;
    cfg.architecture.width = 6;
    cfg.data.n_samples = cfg.data.n_samples.min(40);
    cfg.output_dir = dir.join("run");
    let path = dir.join(format!("{name}.json"));
    json::write(&path, &cfg).unwrap();
    path
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn gen_data_writes_preset_sizes() {
    let dir = tempfile::tempdir().unwrap();
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    for (preset, rows) in [("pendulum_desk", 40), ("forced_oscillator_nat_desk", 800)] {
        let out = dir.path().join(preset);
        let o = run(&["gen-data", "--config", s(&root.join(format!("{preset}.json"))), "--out", s(&out)]);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
        let text = std::fs::read_to_string(out.join("dataset.csv")).unwrap();
        assert_eq!(text.lines().count(), rows + 1);
        assert!(out.join("dataset.meta.json").exists());
        assert!(out.join("trajectory.csv").exists());
    }
}

#[test]
fn gen_data_is_idempotent() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path(), "pendulum", 0);
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for out in [&a, &b] {
        assert_eq!(code(&run(&["gen-data", "--config", s(&cfg), "--out", s(out), "--seed", "4"])), 0);
    }
    for f in ["dataset.csv", "dataset.meta.json", "trajectory.csv"] {
        assert_eq!(std::fs::read(a.join(f)).unwrap(), std::fs::read(b.join(f)).unwrap(), "{f}");
    }
}

#[test]
fn invalid_range_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = ExperimentConfig::preset("pendulum", Scale::Desk).unwrap();
    cfg.data.h_range = [0.5, 0.2];
    let path = dir.path().join("bad.json");
    json::write(&path, &cfg).unwrap();
    let o = run(&["gen-data", "--config", s(&path), "--out", s(dir.path())]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("data.h_range"));
}

#[test]
fn missing_config_exits_4() {
    let o = run(&["train", "--config", "/nonexistent/config.json"]);
    assert_eq!(code(&o), 4);
}

#[test]
fn zero_epochs_checkpoint_is_initialization() {
    let dir = tempfile::tempdir().unwrap();
    let cfg_path = small_config(dir.path(), "pendulum", 3);
    let out = dir.path().join("zero");
    let o = run(&["train", "--config", s(&cfg_path), "--epochs", "0", "--out", s(&out)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let cfg = ExperimentConfig::load(&cfg_path).unwrap();
    let init =
        henonnet_core::HenonNet::init(&cfg.architecture(), &mut henonnet_core::sampling::seeded(cfg.seed)).unwrap();
    assert_eq!(io::read_net(&out.join("checkpoint.json")).unwrap(), init);
    assert_eq!(io::read_loss_log(&out.join("train_log.csv")).unwrap().len(), 0);
}

#[test]
fn loss_log_has_requested_length() {
    let dir = tempfile::tempdir().unwrap();
    let cfg_path = small_config(dir.path(), "pendulum", 3);
    let out = dir.path().join("run");
    assert_eq!(code(&run(&["train", "--config", s(&cfg_path), "--epochs", "17", "--out", s(&out)])), 0);
    let log = io::read_loss_log(&out.join("train_log.csv")).unwrap();
    assert_eq!(log.len(), 17);
    assert_eq!(log.first().unwrap().0, 0);
    assert_eq!(log.last().unwrap().0, 16);
    let report: experiment::TrainReport = json::read(&out.join("report.json")).unwrap();
    assert_eq!(report.epochs_run, 17);
}

#[test]
fn resume_continues_step_count_and_matches_a_straight_run() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = ExperimentConfig::load(&small_config(dir.path(), "pendulum", 10)).unwrap();
    let straight = dir.path().join("straight");
    let split = dir.path().join("split");
    experiment::train(&cfg, &straight, TrainOptions { epochs: Some(10), resume: false }).unwrap();
    experiment::train(&cfg, &split, TrainOptions { epochs: Some(4), resume: false }).unwrap();
    let resumed = experiment::train(&cfg, &split, TrainOptions { epochs: Some(6), resume: true }).unwrap();
    assert_eq!(resumed.report.total_steps, 10);
    let a = std::fs::read(straight.join("checkpoint.json")).unwrap();
    let b = std::fs::read(split.join("checkpoint.json")).unwrap();
    assert_eq!(a, b);
    assert_eq!(
        std::fs::read(straight.join("train_log.csv")).unwrap(),
        std::fs::read(split.join("train_log.csv")).unwrap()
    );
}

#[test]
fn eval_with_oracle_adapter_gives_zero_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg_path = small_config(dir.path(), "pendulum", 0);
    let out = dir.path().join("data");
    assert_eq!(code(&run(&["gen-data", "--config", s(&cfg_path), "--out", s(&out)])), 0);
    let ck = dir.path().join("oracle.json");
    io::write_oracle_checkpoint(&ck, SystemSpec::pendulum()).unwrap();
    let errs = dir.path().join("eval.csv");
    let o = run(&["eval", "--checkpoint", s(&ck), "--trajectory", s(&out.join("trajectory.csv")), "--out", s(&errs)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(&errs).unwrap();
    assert_eq!(text.lines().next().unwrap(), "step,t,rel_err");
    let rows = io::read_rollout(&errs).unwrap();
    assert_eq!(rows.len(), 100);
    assert!(rows.iter().all(|r| r.2 == 0.0));
}

#[test]
fn nat_checkpoint_on_autonomous_trajectory_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("data");
    assert_eq!(
        code(&run(&["gen-data", "--config", s(&small_config(dir.path(), "pendulum", 0)), "--out", s(&data)])),
        0
    );
    let nat_cfg = small_config(dir.path(), "forced_oscillator_nat", 0);
    let nat_run = dir.path().join("nat");
    assert_eq!(code(&run(&["train", "--config", s(&nat_cfg), "--out", s(&nat_run)])), 0);
    let o = run(&[
        "eval",
        "--checkpoint",
        s(&nat_run.join("checkpoint.json")),
        "--trajectory",
        s(&data.join("trajectory.csv")),
    ]);
    assert_eq!(code(&o), 2);
}

#[test]
fn diagnose_fresh_t_net_passes() {
    let o = run(&["diagnose", "--fresh", "T:5:30:1", "--cases", "20"]);
    assert_eq!(code(&o), 0);
    let text = stdout(&o);
    for name in ["symplectic", "identity_at_zero", "separable_field"] {
        let line = text.lines().find(|l| l.starts_with(name)).unwrap();
        assert!(line.contains("pass"), "{line}");
    }
}

#[test]
fn diagnose_original_reports_not_applicable() {
    let o = run(&["diagnose", "--fresh", "Original:2:4:1", "--cases", "5"]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("not applicable"));
}

#[test]
fn corrupted_checkpoint_fails_symplectic() {
    // Weights large enough that central differences at step 1e-5 cannot
    // resolve the map: the finite-difference Jacobian is no longer symplectic.
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/corrupted_checkpoint.json");
    let o = run(&["diagnose", "--checkpoint", s(&path), "--cases", "10"]);
    assert_eq!(code(&o), 1, "{}", stdout(&o));
    let line = stdout(&o).lines().find(|l| l.starts_with("symplectic")).unwrap().to_string();
    assert!(line.contains("FAIL"), "{line}");
}

#[test]
fn diagnose_composition_tables() {
    let o = run(&["diagnose", "--composition"]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    let text = stdout(&o);
    assert!(text.contains("composition pendulum"));
    assert!(text.contains("composition harmonic"));
}

#[test]
fn bad_fresh_spec_exits_2() {
    assert_eq!(code(&run(&["diagnose", "--fresh", "T:5:30"])), 2);
    assert_eq!(code(&run(&["diagnose", "--fresh", "Q:5:30:1"])), 2);
}

#[test]
fn report_lists_gaps_and_compares() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = ExperimentConfig::load(&small_config(dir.path(), "pendulum", 5)).unwrap();
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    experiment::train(&cfg, &a, TrainOptions::default()).unwrap();
    experiment::train(&cfg.clone().with_seed(3), &b, TrainOptions::default()).unwrap();

    let o = run(&["report", s(&a)]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("final loss"));
    assert!(!stdout(&o).contains("gap:"));

    std::fs::remove_file(b.join("train_log.csv")).unwrap();
    let o = run(&["report", s(&b)]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("gap: missing"), "{}", stdout(&o));

    let csv = dir.path().join("cmp.csv");
    let o = run(&["report", "--compare", s(&a), s(&b), "--out", s(&csv)]);
    assert_eq!(code(&o), 0);
    let c = experiment::compare(&a, &b).unwrap();
    assert_eq!(c.ratio, c.max_a / c.max_b);
    assert!(std::fs::read_to_string(&csv).unwrap().starts_with("step,err_a,err_b,ratio\n"));

    assert_eq!(code(&run(&["report", s(&dir.path().join("nope"))])), 4);
}

#[test]
fn reports_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let cfg_path = small_config(dir.path(), "forced_oscillator_nat", 5);
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for out in [&a, &b] {
        assert_eq!(code(&run(&["train", "--config", s(&cfg_path), "--out", s(out), "--seed", "2"])), 0);
    }
    for f in ["train_log.csv", "checkpoint.json", "report.json", "eval.csv", "diagnostics.csv", "adam_state.json"] {
        assert_eq!(std::fs::read(a.join(f)).unwrap(), std::fs::read(b.join(f)).unwrap(), "{f}");
    }
}
