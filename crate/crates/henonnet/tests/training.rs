use henonnet::config::{ExperimentConfig, Scale};
use henonnet::experiment::{self, TrainOptions};

#[test]
fn desk_pendulum_run_cuts_the_loss_a_hundredfold() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = ExperimentConfig::preset("pendulum", Scale::Desk).unwrap();
    let run = experiment::train(&cfg, dir.path(), TrainOptions::default()).unwrap();
    assert_eq!(run.report.epochs_run, 5000);
    let (initial, last) = (run.report.initial_loss.unwrap(), run.report.final_loss);
    assert!(last <= 1e-2 * initial, "final {last:.3e} vs initial {initial:.3e}");
}
