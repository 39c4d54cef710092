use std::path::Path;

use henonnet::config::{ExperimentConfig, Scale, PRESETS};
use henonnet::io::{self, Checkpoint};
use henonnet::{json, CliError};
use henonnet_core::datasets::{generate, test_trajectory, SampleSpec};
use henonnet_core::layers::{Architecture, PhaseState};
use henonnet_core::oracles::SystemSpec;
use henonnet_core::sampling::seeded;
use henonnet_core::{HenonNet, Variant};

fn parse_line(e: CliError) -> usize {
    match e {
        CliError::Parse { line, .. } => line,
        other => panic!("expected a parse error, got {other:?}"),
    }
}

#[test]
fn datasets_round_trip_bitwise() {
    let dir = tempfile::tempdir().unwrap();
    for spec in [SampleSpec::pendulum(1), SampleSpec::linear(2), SampleSpec::forced_oscillator(3)] {
        let path = dir.path().join(format!("{}.csv", spec.system.tag()));
        let ds = generate(&spec).unwrap();
        io::write_dataset(&path, &ds).unwrap();
        let back = io::read_dataset(&path).unwrap();
        assert_eq!(back, ds);
        let bits = |d: &henonnet_core::datasets::Dataset| -> Vec<u64> {
            d.samples.iter().flat_map(|s| s.y.to_flat()).map(f64::to_bits).collect()
        };
        assert_eq!(bits(&back), bits(&ds));
    }
}

#[test]
fn dataset_files_are_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a.csv"), dir.path().join("b.csv"));
    io::write_dataset(&a, &generate(&SampleSpec::pendulum(7)).unwrap()).unwrap();
    io::write_dataset(&b, &generate(&SampleSpec::pendulum(7)).unwrap()).unwrap();
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
}

#[test]
fn dataset_headers() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("f.csv");
    io::write_dataset(&path, &generate(&SampleSpec::forced_oscillator(0)).unwrap()).unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    assert_eq!(text.lines().next().unwrap(), "p,q,t,h,label_p,label_q");
    assert_eq!(text.lines().count(), 801);
    let path = dir.path().join("p.csv");
    io::write_dataset(&path, &generate(&SampleSpec::pendulum(0)).unwrap()).unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    assert_eq!(text.lines().next().unwrap(), "p,q,h,label_p,label_q");
    assert_eq!(text.lines().count(), 41);
}

#[test]
fn wrong_column_count_names_the_line() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("d.csv");
    io::write_dataset(&path, &generate(&SampleSpec::pendulum(0)).unwrap()).unwrap();
    let mut lines: Vec<String> = std::fs::read_to_string(&path).unwrap().lines().map(String::from).collect();
    lines[5] = "1.0,2.0,3.0".into();
    std::fs::write(&path, lines.join("\n") + "\n").unwrap();
    assert_eq!(parse_line(io::read_dataset(&path).unwrap_err()), 6);
}

#[test]
fn non_numeric_cell_names_the_line() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("d.csv");
    io::write_dataset(&path, &generate(&SampleSpec::pendulum(0)).unwrap()).unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    let mut lines: Vec<String> = text.lines().map(String::from).collect();
    lines[3] = lines[3].replacen(|c: char| c.is_ascii_digit(), "x", 1);
    std::fs::write(&path, lines.join("\n") + "\n").unwrap();
    assert_eq!(parse_line(io::read_dataset(&path).unwrap_err()), 4);
}

#[test]
fn empty_file_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("d.csv");
    io::write_dataset(&path, &generate(&SampleSpec::pendulum(0)).unwrap()).unwrap();
    std::fs::write(&path, "").unwrap();
    assert_eq!(parse_line(io::read_dataset(&path).unwrap_err()), 1);
}

#[test]
fn missing_sidecar_is_missing_input() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("d.csv");
    io::write_dataset(&path, &generate(&SampleSpec::pendulum(0)).unwrap()).unwrap();
    std::fs::remove_file(io::sidecar_path(&path)).unwrap();
    let err = io::read_dataset(&path).unwrap_err();
    assert!(matches!(err, CliError::Missing(_)));
    assert_eq!(err.exit_code(), 4);
}

#[test]
fn trajectories_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let pend = test_trajectory(&SystemSpec::pendulum(), &PhaseState::scalar(1.0, 0.0), 0.1, 100, None).unwrap();
    let forced =
        test_trajectory(&SystemSpec::forced_oscillator(), &PhaseState::scalar(-0.2, -0.5), 0.2, 80, Some(0.0)).unwrap();
    for (name, traj) in [("p.csv", pend), ("f.csv", forced)] {
        let path = dir.path().join(name);
        io::write_trajectory(&path, &traj).unwrap();
        assert_eq!(io::read_trajectory(&path).unwrap(), traj);
    }
    let text = std::fs::read_to_string(dir.path().join("p.csv")).unwrap();
    assert_eq!(text.lines().next().unwrap(), "step,t,p,q");
    assert!(text.lines().nth(1).unwrap().starts_with("0,,"));
    assert_eq!(text.lines().count(), 102);
}

#[test]
fn checkpoints_round_trip_bitwise() {
    let dir = tempfile::tempdir().unwrap();
    for v in Variant::ALL {
        let net = HenonNet::random(&Architecture::new(v, 2, 3, 5), 0.7, &mut seeded(11)).unwrap();
        let path = dir.path().join(format!("{}.json", v.name()));
        io::write_net(&path, &net).unwrap();
        let back = io::read_net(&path).unwrap();
        let bits = |n: &HenonNet| n.params_flat().into_iter().map(f64::to_bits).collect::<Vec<_>>();
        assert_eq!(bits(&back), bits(&net));
        assert_eq!(back, net);
    }
}

#[test]
fn checkpoint_field_names() {
    let net = HenonNet::init(&Architecture::new(Variant::T, 1, 1, 2), &mut seeded(0)).unwrap();
    let value: serde_json::Value = serde_json::from_str(&json::to_string(&net)).unwrap();
    assert_eq!(value["variant"], "T");
    assert_eq!(value["d"], 1);
    let layer = &value["layers"][0];
    for key in ["input_dim", "width", "activation", "K", "b", "a", "eta_p", "eta_q"] {
        assert!(layer.get(key).is_some(), "missing {key}");
    }
    assert_eq!(layer["K"].as_array().unwrap().len(), 2);
}

#[test]
fn oracle_adapter_checkpoint() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("oracle.json");
    io::write_oracle_checkpoint(&path, SystemSpec::pendulum()).unwrap();
    assert_eq!(io::read_checkpoint(&path).unwrap(), Checkpoint::Oracle(SystemSpec::pendulum()));
    assert!(io::read_net(&path).is_err());
}

#[test]
fn malformed_checkpoint_reports_line() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    std::fs::write(&path, "{\n  \"variant\": \"T\",\n  \"d\": oops\n}\n").unwrap();
    assert_eq!(parse_line(io::read_checkpoint(&path).unwrap_err()), 3);
}

#[test]
fn shipped_configs_match_presets() {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    for name in PRESETS {
        for (scale, tag) in [(Scale::Paper, "paper"), (Scale::Desk, "desk")] {
            let path = root.join(format!("{name}_{tag}.json"));
            let loaded = ExperimentConfig::load(&path).unwrap();
            assert_eq!(loaded, ExperimentConfig::preset(name, scale).unwrap(), "{}", path.display());
        }
    }
}

#[test]
fn loss_log_and_rollout_files() {
    let dir = tempfile::tempdir().unwrap();
    let log = dir.path().join("log.csv");
    io::write_loss_log(&log, 0, &[0.5, 0.25], false).unwrap();
    io::write_loss_log(&log, 2, &[0.125], true).unwrap();
    assert_eq!(io::read_loss_log(&log).unwrap(), vec![(0, 0.5), (1, 0.25), (2, 0.125)]);
    assert!(std::fs::read_to_string(&log).unwrap().starts_with("epoch,loss\n"));
}
