//! Record files: one CSV per drive phase and per spin-pulse run, plus a JSON
//! sidecar carrying the resolved config and the RNG spec.
//!
//! Phase files have the header `phase_index,phase,spin,k,count` (Monte-Carlo
//! counts) or `phase_index,phase,spin,k,weight` (exact mode, joint
//! probabilities). Pulse files have `pulse_index,chi,phi_d,spin,count` or
//! `...,weight`. Floats are written in shortest round-trip form.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use pentomo_core::measurement::{
    empirical_distributions, Drive, MeasurementRecord, OutcomeDistribution, RngSpec,
};
use pentomo_core::state::{Spin, SpinRotation};
use pentomo_core::tomography::PulseObservation;
use serde::{Deserialize, Serialize};

use crate::config::TomographyConfig;
use crate::fsio::{read_json, write_atomic, write_json};
use crate::{Error, Result};

pub const SIDECAR: &str = "records.json";
const FORMAT: &str = "pentomo-records/1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// Monte-Carlo event counts.
    Counts,
    /// Analytic joint probabilities.
    Weights,
}

impl Mode {
    fn column(self) -> &'static str {
        match self {
            Mode::Counts => "count",
            Mode::Weights => "weight",
        }
    }
}

/// Per-spin histograms over `k = 0..=n_max`.
#[derive(Debug, Clone, PartialEq)]
pub enum Histogram {
    Counts { up: Vec<u64>, down: Vec<u64> },
    Weights { up: Vec<f64>, down: Vec<f64> },
}

impl Histogram {
    fn len(&self) -> usize {
        match self {
            Histogram::Counts { up, .. } => up.len(),
            Histogram::Weights { up, .. } => up.len(),
        }
    }

    fn mode(&self) -> Mode {
        match self {
            Histogram::Counts { .. } => Mode::Counts,
            Histogram::Weights { .. } => Mode::Weights,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhaseRecord {
    pub phase_index: usize,
    pub drive: Drive,
    pub eta: f64,
    pub histogram: Histogram,
}

impl PhaseRecord {
    /// Branch weights and conditional distributions.
    pub fn distribution(&self) -> Result<OutcomeDistribution> {
        match &self.histogram {
            Histogram::Counts { up, down } => {
                let record = MeasurementRecord::new(
                    self.phase_index,
                    self.drive,
                    self.eta,
                    up.clone(),
                    down.clone(),
                )?;
                Ok(empirical_distributions(&record)?)
            }
            Histogram::Weights { up, down } => {
                let (su, sd): (f64, f64) = (up.iter().sum(), down.iter().sum());
                let total = su + sd;
                if !(total > 0.0) {
                    return Err(pentomo_core::Error::EmptyRecord.into());
                }
                let cond = |v: &[f64], s: f64| {
                    v.iter()
                        .map(|&x| if s > 0.0 { x / s } else { 0.0 })
                        .collect()
                };
                Ok(OutcomeDistribution {
                    drive: self.drive,
                    eta: self.eta,
                    w_up: su / total,
                    w_down: sd / total,
                    up: cond(up, su),
                    down: cond(down, sd),
                })
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SpinTally {
    Counts { up: u64, down: u64 },
    Weights { up: f64, down: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PulseRun {
    pub pulse_index: usize,
    pub rotation: SpinRotation,
    pub tally: SpinTally,
}

impl PulseRun {
    pub fn observation(&self) -> Result<PulseObservation> {
        let (up, total) = match self.tally {
            SpinTally::Counts { up, down } => (up as f64, (up + down) as f64),
            SpinTally::Weights { up, down } => (up, up + down),
        };
        if !(total > 0.0) {
            return Err(pentomo_core::Error::EmptyRecord.into());
        }
        Ok(PulseObservation {
            rotation: self.rotation,
            pbar_up: up / total,
        })
    }
}

/// Everything one `simulate` run produces.
#[derive(Debug, Clone, PartialEq)]
pub struct RecordSet {
    /// Resolved config (defaults filled in).
    pub config: TomographyConfig,
    pub rng: RngSpec,
    pub phases: Vec<PhaseRecord>,
    pub pulses: Vec<PulseRun>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
struct RngDoc {
    seed: u64,
    replicate: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct PulseFileDoc {
    file: String,
    chi: f64,
    phi_d: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Sidecar {
    format: String,
    mode: Mode,
    config: TomographyConfig,
    rng: RngDoc,
    phases: usize,
    n_max: usize,
    phase_files: Vec<String>,
    pulse_files: Vec<PulseFileDoc>,
}

#[derive(Debug, Deserialize)]
struct PhaseRow {
    phase_index: usize,
    phase: f64,
    spin: String,
    k: usize,
    #[serde(default)]
    count: Option<u64>,
    #[serde(default)]
    weight: Option<f64>,
}

#[derive(Debug, Deserialize)]
struct PulseRow {
    pulse_index: usize,
    chi: f64,
    phi_d: f64,
    spin: String,
    #[serde(default)]
    count: Option<u64>,
    #[serde(default)]
    weight: Option<f64>,
}

pub fn phase_file_name(index: usize) -> String {
    format!("phase_{index:04}.csv")
}

pub fn pulse_file_name(index: usize) -> String {
    format!("pulse_{index:02}.csv")
}

fn parse_spin(text: &str, path: &Path) -> Result<Spin> {
    match text {
        "up" => Ok(Spin::Up),
        "down" => Ok(Spin::Down),
        other => Err(mismatch(path, format!("unknown spin `{other}`"))),
    }
}

fn mismatch(path: &Path, reason: impl Into<String>) -> Error {
    Error::SidecarMismatch {
        path: path.to_path_buf(),
        reason: reason.into(),
    }
}

impl RecordSet {
    pub fn mode(&self) -> Mode {
        self.phases
            .first()
            .map(|p| p.histogram.mode())
            .unwrap_or(Mode::Counts)
    }

    pub fn n_max(&self) -> usize {
        self.phases
            .first()
            .map(|p| p.histogram.len().saturating_sub(1))
            .unwrap_or(0)
    }

    pub fn distributions(&self) -> Result<Vec<OutcomeDistribution>> {
        self.phases.iter().map(PhaseRecord::distribution).collect()
    }

    pub fn observations(&self) -> Result<Vec<PulseObservation>> {
        self.pulses.iter().map(PulseRun::observation).collect()
    }

    fn phase_csv(&self, record: &PhaseRecord) -> String {
        let mut out = format!(
            "phase_index,phase,spin,k,{}\n",
            record.histogram.mode().column()
        );
        let mut row = |spin: Spin, k: usize, value: &dyn std::fmt::Debug| {
            let _ = writeln!(
                out,
                "{},{:?},{},{},{:?}",
                record.phase_index, record.drive.phase, spin, k, value
            );
        };
        match &record.histogram {
            Histogram::Counts { up, down } => {
                up.iter().enumerate().for_each(|(k, v)| row(Spin::Up, k, v));
                down.iter()
                    .enumerate()
                    .for_each(|(k, v)| row(Spin::Down, k, v));
            }
            Histogram::Weights { up, down } => {
                up.iter().enumerate().for_each(|(k, v)| row(Spin::Up, k, v));
                down.iter()
                    .enumerate()
                    .for_each(|(k, v)| row(Spin::Down, k, v));
            }
        }
        out
    }

    fn pulse_csv(run: &PulseRun) -> String {
        let (column, up, down) = match run.tally {
            SpinTally::Counts { up, down } => ("count", format!("{up}"), format!("{down}")),
            SpinTally::Weights { up, down } => ("weight", format!("{up:?}"), format!("{down:?}")),
        };
        let head = format!(
            "{},{:?},{:?}",
            run.pulse_index, run.rotation.chi, run.rotation.phi_d
        );
        format!("pulse_index,chi,phi_d,spin,{column}\n{head},up,{up}\n{head},down,{down}\n")
    }

    /// Writes every file into `dir`; the sidecar goes last.
    pub fn write(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir).map_err(Error::io(dir))?;
        let mut phase_files = Vec::with_capacity(self.phases.len());
        for record in &self.phases {
            let name = phase_file_name(record.phase_index);
            write_atomic(&dir.join(&name), self.phase_csv(record).as_bytes())?;
            phase_files.push(name);
        }
        let mut pulse_files = Vec::with_capacity(self.pulses.len());
        for run in &self.pulses {
            let name = pulse_file_name(run.pulse_index);
            write_atomic(&dir.join(&name), Self::pulse_csv(run).as_bytes())?;
            pulse_files.push(PulseFileDoc {
                file: name,
                chi: run.rotation.chi,
                phi_d: run.rotation.phi_d,
            });
        }
        let sidecar = Sidecar {
            format: FORMAT.to_owned(),
            mode: self.mode(),
            config: self.config.clone(),
            rng: RngDoc {
                seed: self.rng.seed,
                replicate: self.rng.replicate,
            },
            phases: self.phases.len(),
            n_max: self.n_max(),
            phase_files,
            pulse_files,
        };
        write_json(&dir.join(SIDECAR), &sidecar)
    }

    /// Reads a record directory written by [`RecordSet::write`], checking every
    /// file against the sidecar.
    pub fn read(dir: &Path) -> Result<Self> {
        let sidecar_path = dir.join(SIDECAR);
        let sidecar: Sidecar = read_json(&sidecar_path)?;
        if sidecar.format != FORMAT {
            return Err(mismatch(
                &sidecar_path,
                format!("unknown format `{}`", sidecar.format),
            ));
        }
        let config = sidecar.config;
        config.validate()?;
        if sidecar.phases != config.phases() {
            return Err(mismatch(
                &sidecar_path,
                format!("{} phases, config says {}", sidecar.phases, config.phases()),
            ));
        }
        if sidecar.pulse_files.len() != config.spin_pulses.len() {
            return Err(mismatch(
                &sidecar_path,
                "pulse file count differs from config.spin_pulses",
            ));
        }
        let phases = (0..sidecar.phases)
            .map(|j| read_phase(dir, j, &config, sidecar.mode, sidecar.n_max))
            .collect::<Result<Vec<_>>>()?;
        let pulses = sidecar
            .pulse_files
            .iter()
            .enumerate()
            .map(|(i, doc)| read_pulse(dir, i, doc, sidecar.mode))
            .collect::<Result<Vec<_>>>()?;
        let rng = RngSpec::new(sidecar.rng.seed).with_replicate(sidecar.rng.replicate);
        Ok(Self {
            config,
            rng,
            phases,
            pulses,
        })
    }
}

fn open_csv(path: &Path) -> Result<csv::Reader<std::fs::File>> {
    csv::Reader::from_path(path).map_err(Error::csv(path))
}

fn check_column(reader: &mut csv::Reader<std::fs::File>, path: &Path, mode: Mode) -> Result<()> {
    let headers = reader.headers().map_err(Error::csv(path))?;
    if !headers.iter().any(|h| h == mode.column()) {
        return Err(mismatch(
            path,
            format!("expected a `{}` column", mode.column()),
        ));
    }
    Ok(())
}

fn read_phase(
    dir: &Path,
    index: usize,
    config: &TomographyConfig,
    mode: Mode,
    n_max: usize,
) -> Result<PhaseRecord> {
    let path: PathBuf = dir.join(phase_file_name(index));
    if !path.is_file() {
        return Err(Error::MissingPhase { index, path });
    }
    let drive = Drive::on_grid(config.alpha_mod, index, config.phases());
    let mut reader = open_csv(&path)?;
    check_column(&mut reader, &path, mode)?;
    let mut seen = vec![[false; 2]; n_max + 1];
    let mut counts = [vec![0u64; n_max + 1], vec![0u64; n_max + 1]];
    let mut weights = [vec![0.0f64; n_max + 1], vec![0.0f64; n_max + 1]];
    for row in reader.deserialize::<PhaseRow>() {
        let row = row.map_err(Error::csv(&path))?;
        if row.phase_index != index {
            return Err(mismatch(
                &path,
                format!(
                    "row for phase {} in the file of phase {index}",
                    row.phase_index
                ),
            ));
        }
        if row.phase != drive.phase {
            return Err(mismatch(
                &path,
                format!("phase {} is not grid phase {}", row.phase, drive.phase),
            ));
        }
        if row.k > n_max {
            return Err(mismatch(
                &path,
                format!("k = {} exceeds n_max = {n_max}", row.k),
            ));
        }
        let b = parse_spin(&row.spin, &path)? as usize;
        if std::mem::replace(&mut seen[row.k][b], true) {
            return Err(mismatch(
                &path,
                format!("duplicate row ({}, k = {})", row.spin, row.k),
            ));
        }
        match mode {
            Mode::Counts => {
                counts[b][row.k] = row.count.ok_or_else(|| mismatch(&path, "empty count"))?
            }
            Mode::Weights => {
                weights[b][row.k] = row.weight.ok_or_else(|| mismatch(&path, "empty weight"))?
            }
        }
    }
    if seen.iter().flatten().any(|s| !s) {
        return Err(mismatch(&path, "incomplete histogram"));
    }
    let histogram = match mode {
        Mode::Counts => {
            let [up, down] = counts;
            Histogram::Counts { up, down }
        }
        Mode::Weights => {
            let [up, down] = weights;
            Histogram::Weights { up, down }
        }
    };
    Ok(PhaseRecord {
        phase_index: index,
        drive,
        eta: config.eta,
        histogram,
    })
}

fn read_pulse(dir: &Path, index: usize, doc: &PulseFileDoc, mode: Mode) -> Result<PulseRun> {
    let path = dir.join(&doc.file);
    if !path.is_file() {
        return Err(Error::MissingPulse { index, path });
    }
    let mut reader = open_csv(&path)?;
    check_column(&mut reader, &path, mode)?;
    let mut counts = [None; 2];
    let mut weights = [None; 2];
    for row in reader.deserialize::<PulseRow>() {
        let row = row.map_err(Error::csv(&path))?;
        if row.pulse_index != index || row.chi != doc.chi || row.phi_d != doc.phi_d {
            return Err(mismatch(&path, "pulse tag differs from the sidecar"));
        }
        let b = parse_spin(&row.spin, &path)? as usize;
        counts[b] = row.count;
        weights[b] = row.weight;
    }
    let tally = match (mode, counts, weights) {
        (Mode::Counts, [Some(up), Some(down)], _) => SpinTally::Counts { up, down },
        (Mode::Weights, _, [Some(up), Some(down)]) => SpinTally::Weights { up, down },
        _ => return Err(mismatch(&path, "needs one up and one down row")),
    };
    Ok(PulseRun {
        pulse_index: index,
        rotation: SpinRotation::new(doc.chi, doc.phi_d),
        tally,
    })
}
