//! CSV and JSON artifacts.
//!
//! * datasets: `p,q[,t],h,label_p,label_q` (for `d > 1` the phase columns are
//!   numbered `p1..pd`, `q1..qd`, `label_p1..`), with the [`SampleSpec`] in a
//!   `<name>.meta.json` sidecar,
//! * trajectories: `step,t,p,q` (`t` empty for autonomous systems), with a
//!   sidecar holding the system, step and start time,
//! * checkpoints: the network as JSON, or `{"oracle": <system>}` to stand in
//!   for the exact flow,
//! * training logs `epoch,loss`, rollout errors `step,t,rel_err`, diagnostics
//!   `check,case,h,t,residual`.
//!
//! Floats are written with 17 significant digits so every file round-trips
//! bit for bit.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use henonnet_core::datasets::{Dataset, Sample, SampleSpec, TestTrajectory};
use henonnet_core::diagnostics::{DiagnosticReport, RolloutPoint};
use henonnet_core::layers::{FlowMap, PhaseState};
use henonnet_core::oracles::{Oracle, SystemSpec};
use henonnet_core::HenonNet;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};
use crate::json::{self, format_f64};

/// `dataset.csv` → `dataset.meta.json`.
pub fn sidecar_path(path: &Path) -> PathBuf {
    path.with_extension("meta.json")
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    File::create(path).map(BufWriter::new).map_err(|e| CliError::io(path, e))
}

fn finish(path: &Path, mut w: BufWriter<File>) -> Result<()> {
    w.flush().map_err(|e| CliError::io(path, e))
}

fn csv_writer(path: &Path) -> Result<csv::Writer<BufWriter<File>>> {
    Ok(csv::WriterBuilder::new().from_writer(create(path)?))
}

fn csv_err(path: &Path, e: csv::Error) -> CliError {
    let line = e.position().map_or(0, |p| p.line() as usize);
    match e.into_kind() {
        csv::ErrorKind::Io(io) => CliError::io(path, io),
        other => CliError::parse(path, line, format!("{other:?}")),
    }
}

fn close_csv(path: &Path, w: csv::Writer<BufWriter<File>>) -> Result<()> {
    let inner = w.into_inner().map_err(|e| CliError::io(path, e.into_error()))?;
    finish(path, inner)
}

/// Rows of a CSV file with 1-based line numbers; an empty file (no header)
/// is an error.
fn read_rows(path: &Path, expected_header: &[String]) -> Result<Vec<(usize, csv::StringRecord)>> {
    let file = File::open(path).map_err(|e| CliError::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new().has_headers(false).flexible(true).from_reader(file);
    let mut records = reader.records();
    let header = match records.next() {
        None => return Err(CliError::parse(path, 1, "file is empty")),
        Some(r) => r.map_err(|e| csv_err(path, e))?,
    };
    if header.iter().ne(expected_header.iter().map(String::as_str)) {
        return Err(CliError::parse(
            path,
            1,
            format!(
                "expected header `{}`, found `{}`",
                expected_header.join(","),
                header.iter().collect::<Vec<_>>().join(",")
            ),
        ));
    }
    let mut rows = Vec::new();
    for record in records {
        let record = record.map_err(|e| csv_err(path, e))?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        if record.len() != expected_header.len() {
            return Err(CliError::parse(
                path,
                line,
                format!("expected {} columns, found {}", expected_header.len(), record.len()),
            ));
        }
        rows.push((line, record));
    }
    Ok(rows)
}

fn parse_f64(path: &Path, line: usize, column: &str, text: &str) -> Result<f64> {
    text.trim()
        .parse::<f64>()
        .map_err(|_| CliError::parse(path, line, format!("column `{column}`: `{text}` is not a number")))
}

fn phase_columns(prefix: &str, d: usize) -> Vec<String> {
    let name = |block: &str, i: usize| {
        if d == 1 {
            format!("{prefix}{block}")
        } else {
            format!("{prefix}{block}{}", i + 1)
        }
    };
    (0..d).map(|i| name("p", i)).chain((0..d).map(|i| name("q", i))).collect()
}

fn dataset_header(d: usize, timed: bool) -> Vec<String> {
    let mut h = phase_columns("", d);
    if timed {
        h.push("t".into());
    }
    h.push("h".into());
    h.extend(phase_columns("label_", d));
    h
}

pub fn write_dataset(path: &Path, dataset: &Dataset) -> Result<()> {
    dataset.validate()?;
    let d = dataset.spec.d();
    let timed = dataset.spec.t_range.is_some();
    let mut w = csv_writer(path)?;
    w.write_record(dataset_header(d, timed)).map_err(|e| csv_err(path, e))?;
    for s in &dataset.samples {
        let mut row: Vec<String> = s.x.to_flat().into_iter().map(format_f64).collect();
        if let Some(t) = s.t {
            row.push(format_f64(t));
        }
        row.push(format_f64(s.h));
        row.extend(s.y.to_flat().into_iter().map(format_f64));
        w.write_record(&row).map_err(|e| csv_err(path, e))?;
    }
    close_csv(path, w)?;
    json::write(&sidecar_path(path), &dataset.spec)
}

pub fn read_dataset(path: &Path) -> Result<Dataset> {
    let spec: SampleSpec = json::read(&sidecar_path(path))?;
    let d = spec.d();
    let timed = spec.t_range.is_some();
    let header = dataset_header(d, timed);
    let rows = read_rows(path, &header)?;
    let mut samples = Vec::with_capacity(rows.len());
    for (line, record) in rows {
        let values = record
            .iter()
            .zip(&header)
            .map(|(text, col)| parse_f64(path, line, col, text))
            .collect::<Result<Vec<f64>>>()?;
        let x = PhaseState::from_flat(&values[..2 * d])?;
        let mut k = 2 * d;
        let t = timed.then(|| {
            k += 1;
            values[k - 1]
        });
        let h = values[k];
        let y = PhaseState::from_flat(&values[k + 1..])?;
        samples.push(Sample { x, t, h, y });
    }
    if samples.len() != spec.n_samples {
        return Err(CliError::parse(
            path,
            samples.len() + 1,
            format!("sidecar promises {} rows, file has {}", spec.n_samples, samples.len()),
        ));
    }
    let dataset = Dataset { spec, samples };
    dataset.validate().map_err(|e| CliError::parse(path, 0, e.to_string()))?;
    Ok(dataset)
}

/// Everything about a trajectory except its states.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryMeta {
    pub system: SystemSpec,
    pub x0: Vec<f64>,
    pub h: f64,
    pub k: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t0: Option<f64>,
}

fn trajectory_header(d: usize) -> Vec<String> {
    let mut h = vec!["step".to_string(), "t".to_string()];
    h.extend(phase_columns("", d));
    h
}

pub fn write_trajectory(path: &Path, traj: &TestTrajectory) -> Result<()> {
    let mut w = csv_writer(path)?;
    w.write_record(trajectory_header(traj.x0.dim())).map_err(|e| csv_err(path, e))?;
    for (i, state) in traj.states.iter().enumerate() {
        let mut row = vec![i.to_string(), traj.time(i).map(format_f64).unwrap_or_default()];
        row.extend(state.to_flat().into_iter().map(format_f64));
        w.write_record(&row).map_err(|e| csv_err(path, e))?;
    }
    close_csv(path, w)?;
    let meta = TrajectoryMeta { system: traj.system, x0: traj.x0.to_flat(), h: traj.h, k: traj.k, t0: traj.t0 };
    json::write(&sidecar_path(path), &meta)
}

pub fn read_trajectory(path: &Path) -> Result<TestTrajectory> {
    let meta: TrajectoryMeta = json::read(&sidecar_path(path))?;
    let meta_path = sidecar_path(path);
    let x0 = PhaseState::from_flat(&meta.x0).map_err(|e| CliError::parse(&meta_path, 0, e.to_string()))?;
    let d = x0.dim();
    let rows = read_rows(path, &trajectory_header(d))?;
    let mut states = Vec::with_capacity(rows.len());
    for (i, (line, record)) in rows.into_iter().enumerate() {
        let step: usize =
            record[0].trim().parse().map_err(|_| CliError::parse(path, line, format!("bad step `{}`", &record[0])))?;
        if step != i {
            return Err(CliError::parse(path, line, format!("expected step {i}, found {step}")));
        }
        let t_text = record[1].trim();
        match (t_text.is_empty(), meta.t0) {
            (true, None) => {}
            (false, Some(_)) => {
                parse_f64(path, line, "t", t_text)?;
            }
            (true, Some(_)) => return Err(CliError::parse(path, line, "time column is empty")),
            (false, None) => return Err(CliError::parse(path, line, "time column must be empty for this system")),
        }
        let values =
            (0..2 * d).map(|j| parse_f64(path, line, "state", &record[2 + j])).collect::<Result<Vec<f64>>>()?;
        states.push(PhaseState::from_flat(&values)?);
    }
    if states.len() != meta.k + 1 {
        return Err(CliError::parse(
            path,
            states.len() + 1,
            format!("expected {} states, found {}", meta.k + 1, states.len()),
        ));
    }
    if states[0] != x0 {
        return Err(CliError::parse(path, 2, "first state differs from x0 in the sidecar"));
    }
    Ok(TestTrajectory { system: meta.system, x0, h: meta.h, k: meta.k, t0: meta.t0, states })
}

/// A trained network, or the exact flow of a reference system.
#[derive(Debug, Clone, PartialEq)]
pub enum Checkpoint {
    Net(HenonNet),
    Oracle(SystemSpec),
}

#[derive(Serialize, Deserialize)]
struct OracleCheckpoint {
    oracle: SystemSpec,
}

impl Checkpoint {
    pub fn flow_map(&self) -> Result<CheckpointMap<'_>> {
        Ok(match self {
            Checkpoint::Net(net) => CheckpointMap::Net(net),
            Checkpoint::Oracle(spec) => CheckpointMap::Oracle(spec.oracle()?),
        })
    }
}

/// [`FlowMap`] view of a checkpoint.
pub enum CheckpointMap<'a> {
    Net(&'a HenonNet),
    Oracle(Oracle),
}

impl FlowMap for CheckpointMap<'_> {
    fn phase_dim(&self) -> usize {
        match self {
            CheckpointMap::Net(n) => n.phase_dim(),
            CheckpointMap::Oracle(o) => o.phase_dim(),
        }
    }
    fn is_time_adaptive(&self) -> bool {
        match self {
            CheckpointMap::Net(n) => n.is_time_adaptive(),
            CheckpointMap::Oracle(o) => o.is_time_adaptive(),
        }
    }
    fn is_non_autonomous(&self) -> bool {
        match self {
            CheckpointMap::Net(n) => n.is_non_autonomous(),
            CheckpointMap::Oracle(o) => o.is_non_autonomous(),
        }
    }
    fn advance(&self, h: f64, t: f64, x: &PhaseState) -> henonnet_core::Result<PhaseState> {
        match self {
            CheckpointMap::Net(n) => n.advance(h, t, x),
            CheckpointMap::Oracle(o) => o.advance(h, t, x),
        }
    }
}

pub fn write_net(path: &Path, net: &HenonNet) -> Result<()> {
    json::write(path, net)
}

pub fn write_oracle_checkpoint(path: &Path, system: SystemSpec) -> Result<()> {
    json::write(path, &OracleCheckpoint { oracle: system })
}

pub fn read_checkpoint(path: &Path) -> Result<Checkpoint> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let value: serde_json::Value = json::from_str(path, &text)?;
    if value.get("oracle").is_some() {
        let c: OracleCheckpoint = json::from_str(path, &text)?;
        c.oracle.oracle().map_err(|e| CliError::parse(path, 0, e.to_string()))?;
        Ok(Checkpoint::Oracle(c.oracle))
    } else {
        Ok(Checkpoint::Net(json::from_str(path, &text)?))
    }
}

pub fn read_net(path: &Path) -> Result<HenonNet> {
    match read_checkpoint(path)? {
        Checkpoint::Net(n) => Ok(n),
        Checkpoint::Oracle(_) => {
            Err(CliError::parse(path, 0, "expected a network checkpoint, found an oracle adapter"))
        }
    }
}

pub fn write_loss_log(path: &Path, first_epoch: u64, losses: &[f64], append: bool) -> Result<()> {
    let mut w = if append && path.exists() {
        let f = std::fs::OpenOptions::new().append(true).open(path).map_err(|e| CliError::io(path, e))?;
        BufWriter::new(f)
    } else {
        let mut w = create(path)?;
        writeln!(w, "epoch,loss").map_err(|e| CliError::io(path, e))?;
        w
    };
    for (i, loss) in losses.iter().enumerate() {
        writeln!(w, "{},{}", first_epoch + i as u64, format_f64(*loss)).map_err(|e| CliError::io(path, e))?;
    }
    finish(path, w)
}

pub fn read_loss_log(path: &Path) -> Result<Vec<(u64, f64)>> {
    let header = ["epoch".to_string(), "loss".to_string()];
    read_rows(path, &header)?
        .into_iter()
        .map(|(line, r)| {
            let epoch =
                r[0].trim().parse().map_err(|_| CliError::parse(path, line, format!("bad epoch `{}`", &r[0])))?;
            Ok((epoch, parse_f64(path, line, "loss", &r[1])?))
        })
        .collect()
}

pub fn write_rollout(path: &Path, points: &[RolloutPoint]) -> Result<()> {
    let mut w = create(path)?;
    writeln!(w, "step,t,rel_err").map_err(|e| CliError::io(path, e))?;
    for p in points {
        let t = p.t.map(format_f64).unwrap_or_default();
        writeln!(w, "{},{},{}", p.step, t, format_f64(p.error)).map_err(|e| CliError::io(path, e))?;
    }
    finish(path, w)
}

/// `(step, t, rel_err)` rows.
pub fn read_rollout(path: &Path) -> Result<Vec<(usize, Option<f64>, f64)>> {
    let header = ["step".to_string(), "t".to_string(), "rel_err".to_string()];
    read_rows(path, &header)?
        .into_iter()
        .map(|(line, r)| {
            let step = r[0].trim().parse().map_err(|_| CliError::parse(path, line, format!("bad step `{}`", &r[0])))?;
            let t = if r[1].trim().is_empty() { None } else { Some(parse_f64(path, line, "t", &r[1])?) };
            Ok((step, t, parse_f64(path, line, "rel_err", &r[2])?))
        })
        .collect()
}

pub fn write_diagnostics(path: &Path, reports: &[DiagnosticReport]) -> Result<()> {
    let mut w = create(path)?;
    writeln!(w, "check,case,h,t,residual").map_err(|e| CliError::io(path, e))?;
    for r in reports {
        for c in &r.cases {
            writeln!(w, "{},{},{},{},{}", r.name, c.case, format_f64(c.h), format_f64(c.t), format_f64(c.residual))
                .map_err(|e| CliError::io(path, e))?;
        }
    }
    finish(path, w)
}
