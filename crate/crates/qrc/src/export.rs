//! Result persistence: CSV tables with 17-significant-digit floats that
//! round-trip bit-exactly, JSON envelopes with the run manifest embedded, and
//! tidy long-format plot data for the benchmark figures.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::PlotKind;
use crate::dynamics::{IntegratorConfig, StateStats, Trajectory};
use crate::error::{Error, Result};
use crate::sweep::{RealizationOutcome, RealizationResult, SweepSummary, TaskKind};
use crate::tasks::TaskResult;

/// Format a float with 17 significant digits, enough to reparse the exact
/// same 64-bit value.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt_f64).unwrap_or_default()
}

/// Quote a CSV field when it contains a delimiter, quote, or newline.
fn csv_field(s: &str) -> String {
    if s.contains(',') || s.contains('"') || s.contains('\n') {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent).map_err(|e| Error::Io {
            path: parent.display().to_string(),
            source: e,
        })?;
    }
    let mut f = std::fs::File::create(path).map_err(|e| Error::Io {
        path: path.display().to_string(),
        source: e,
    })?;
    f.write_all(contents.as_bytes()).map_err(|e| Error::Io {
        path: path.display().to_string(),
        source: e,
    })
}

fn read_file(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::Io {
        path: path.display().to_string(),
        source: e,
    })
}

/// Everything needed to reproduce a run byte-for-byte on one platform, plus
/// checksums of the files the run produced.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub master_seed: u64,
    pub config: serde_json::Value,
    pub integrator: IntegratorConfig,
    /// Unix seconds at write time; the only non-reproducible field.
    pub unix_timestamp: u64,
    /// File name -> SHA-256 of the result files next to this manifest.
    pub checksums: BTreeMap<String, String>,
}

impl RunManifest {
    pub fn new<C: Serialize>(
        command: &str,
        master_seed: u64,
        config: &C,
        integrator: IntegratorConfig,
    ) -> Result<Self> {
        Ok(Self {
            tool: "qrc".to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            command: command.to_string(),
            master_seed,
            config: serde_json::to_value(config)
                .map_err(|e| Error::Config(format!("config echo: {e}")))?,
            integrator,
            unix_timestamp: std::time::SystemTime::now()
                .duration_since(std::time::UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0),
            checksums: BTreeMap::new(),
        })
    }

    pub fn record_checksum(&mut self, name: &str, contents: &str) {
        let mut hasher = Sha256::new();
        hasher.update(contents.as_bytes());
        self.checksums
            .insert(name.to_string(), format!("{:x}", hasher.finalize()));
    }

    /// Write `manifest.json` into the output directory.
    pub fn write(&self, out_dir: &Path) -> Result<()> {
        let json = serde_json::to_string_pretty(self)
            .map_err(|e| Error::Config(format!("manifest serialization: {e}")))?;
        write_file(&out_dir.join("manifest.json"), &json)
    }
}

/// Serializable subset of a trajectory (the in-memory final state stays
/// behind; samples and populations are what plots consume).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRecord {
    pub sample_times: Vec<f64>,
    pub samples: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub populations: Option<Vec<Vec<f64>>>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub stats: Option<StateStats>,
}

impl From<&Trajectory> for TrajectoryRecord {
    fn from(t: &Trajectory) -> Self {
        Self {
            sample_times: t.sample_times.clone(),
            samples: t.samples.clone(),
            populations: t.populations.clone(),
            stats: t.stats,
        }
    }
}

/// Top-level schema of a results JSON file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ResultsFile {
    Sweep {
        summary: SweepSummary,
        manifest: RunManifest,
    },
    Task {
        result: TaskResult,
        manifest: RunManifest,
    },
    Trajectory {
        trajectory: TrajectoryRecord,
        manifest: RunManifest,
    },
}

impl ResultsFile {
    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self)
            .map_err(|e| Error::Config(format!("results serialization: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = read_file(path)?;
        serde_json::from_str(&text).map_err(|e| Error::Config(format!(
            "{} is not a results file: {e}",
            path.display()
        )))
    }
}

/// Requested on-disk format for `export_results`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExportFormat {
    Csv,
    Json,
}

/// Stable CSV header for a sweep's per-realization table.
fn sweep_csv_header(task: TaskKind) -> &'static str {
    match task {
        TaskKind::Signal => {
            "id,system,kerr,reservoir_frequency,signal_frequency,j_train,status,\
             amplitude_rmse,phase_rmse,best_gamma_amplitude,best_gamma_phase,\
             shared_gamma,amplitude_rmse_shared,phase_rmse_shared,reason"
        }
        TaskKind::Stmc => {
            "id,system,kerr,reservoir_frequency,hold_time,amplitude_lo,amplitude_hi,\
             j_train,status,stmc,reason"
        }
    }
}

fn sweep_csv_row(task: TaskKind, r: &RealizationResult) -> String {
    let mut cols: Vec<String> = vec![
        r.id.to_string(),
        r.system.clone(),
        fmt_f64(r.kerr),
        fmt_f64(r.reservoir_frequency),
    ];
    match task {
        TaskKind::Signal => {
            cols.push(fmt_opt(r.signal_frequency));
            cols.push(r.j_train.to_string());
            match &r.outcome {
                RealizationOutcome::Ok { result } => {
                    let s = result.as_signal().expect("signal sweep row");
                    cols.push("ok".into());
                    cols.push(fmt_f64(s.amplitude_rmse));
                    cols.push(fmt_f64(s.phase_rmse));
                    cols.push(fmt_f64(s.best_gamma_amplitude));
                    cols.push(fmt_f64(s.best_gamma_phase));
                    cols.push(fmt_f64(s.shared_gamma));
                    cols.push(fmt_f64(s.amplitude_rmse_shared));
                    cols.push(fmt_f64(s.phase_rmse_shared));
                    cols.push(String::new());
                }
                RealizationOutcome::Failed { reason } => {
                    cols.push("failed".into());
                    cols.extend(std::iter::repeat(String::new()).take(7));
                    cols.push(csv_field(reason));
                }
            }
        }
        TaskKind::Stmc => {
            cols.push(fmt_opt(r.hold_time));
            let [lo, hi] = r.amplitude_interval.unwrap_or([f64::NAN, f64::NAN]);
            cols.push(fmt_f64(lo));
            cols.push(fmt_f64(hi));
            cols.push(r.j_train.to_string());
            match &r.outcome {
                RealizationOutcome::Ok { result } => {
                    let s = result.as_stmc().expect("stmc sweep row");
                    cols.push("ok".into());
                    cols.push(fmt_f64(s.stmc));
                    cols.push(String::new());
                }
                RealizationOutcome::Failed { reason } => {
                    cols.push("failed".into());
                    cols.push(String::new());
                    cols.push(csv_field(reason));
                }
            }
        }
    }
    cols.join(",")
}

/// Render the per-realization table as CSV text.
pub fn sweep_csv(summary: &SweepSummary) -> String {
    let mut out = String::new();
    out.push_str(sweep_csv_header(summary.spec.task));
    out.push('\n');
    for r in &summary.realizations {
        out.push_str(&sweep_csv_row(summary.spec.task, r));
        out.push('\n');
    }
    out
}

/// Render the best-case records as CSV text.
pub fn best_case_csv(summary: &SweepSummary) -> String {
    let mut out = String::from("system,j_train,hold_time,metric,value,realization_id\n");
    for b in &summary.best {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            b.system,
            b.j_train,
            fmt_opt(b.hold_time),
            b.metric,
            fmt_f64(b.value),
            b.realization_id
        ));
    }
    out
}

/// Write a sweep summary to `path` as CSV (per-realization table) or JSON
/// (summary plus manifest). Both round-trip losslessly.
pub fn export_results(
    summary: &SweepSummary,
    format: ExportFormat,
    path: &Path,
    manifest: &RunManifest,
) -> Result<()> {
    match format {
        ExportFormat::Csv => write_file(path, &sweep_csv(summary)),
        ExportFormat::Json => {
            let file = ResultsFile::Sweep {
                summary: summary.clone(),
                manifest: manifest.clone(),
            };
            write_file(path, &file.to_json()?)
        }
    }
}

/// Read back a JSON results file written by `export_results`.
pub fn import_results(path: &Path) -> Result<SweepSummary> {
    match ResultsFile::load(path)? {
        ResultsFile::Sweep { summary, .. } => Ok(summary),
        _ => Err(Error::ExportMismatch(
            "results file does not contain a sweep summary".into(),
        )),
    }
}

/// Data a plot export can draw from.
#[derive(Debug, Clone)]
pub enum PlotSource {
    Trajectory(TrajectoryRecord),
    Task(TaskResult),
    Sweep(SweepSummary),
}

impl From<&ResultsFile> for PlotSource {
    fn from(f: &ResultsFile) -> Self {
        match f {
            ResultsFile::Sweep { summary, .. } => PlotSource::Sweep(summary.clone()),
            ResultsFile::Task { result, .. } => PlotSource::Task(result.clone()),
            ResultsFile::Trajectory { trajectory, .. } => {
                PlotSource::Trajectory(trajectory.clone())
            }
        }
    }
}

/// Produce tidy long-format CSV for one plot kind. Errors when the source
/// does not carry the fields the kind requires.
pub fn plot_data_csv(source: &PlotSource, kind: PlotKind) -> Result<String> {
    match (kind, source) {
        (PlotKind::Trajectory, PlotSource::Trajectory(t)) => {
            let mut out = String::from("t,s\n");
            for (&t_i, &s_i) in t.sample_times.iter().zip(t.samples.iter()) {
                out.push_str(&format!("{},{}\n", fmt_f64(t_i), fmt_f64(s_i)));
            }
            Ok(out)
        }
        (PlotKind::Fock, PlotSource::Trajectory(t)) => {
            let populations = t.populations.as_ref().ok_or_else(|| {
                Error::ExportMismatch(
                    "trajectory was sampled without record_populations".into(),
                )
            })?;
            let mut out = String::from("t,level,population\n");
            for (&t_i, pops) in t.sample_times.iter().zip(populations.iter()) {
                for (level, &p) in pops.iter().enumerate() {
                    out.push_str(&format!("{},{},{}\n", fmt_f64(t_i), level, fmt_f64(p)));
                }
            }
            Ok(out)
        }
        (PlotKind::R2Curve, PlotSource::Task(TaskResult::Stmc(s))) => {
            let mut out = String::from("k,r2\n");
            for (k, &r2) in s.r2_curve.iter().enumerate() {
                out.push_str(&format!("{},{}\n", k + 1, fmt_f64(r2)));
            }
            Ok(out)
        }
        (PlotKind::RmseVsJtrain, PlotSource::Sweep(summary)) => {
            require_task(summary, TaskKind::Signal, kind)?;
            let mut out = String::from("system,j_train,metric,value\n");
            for b in &summary.best {
                out.push_str(&format!(
                    "{},{},{},{}\n",
                    b.system,
                    b.j_train,
                    b.metric,
                    fmt_f64(b.value)
                ));
            }
            Ok(out)
        }
        (PlotKind::RmseVsOmega, PlotSource::Sweep(summary)) => {
            require_task(summary, TaskKind::Signal, kind)?;
            // Best over the nonlinearity axis at each (system, frequency).
            let mut groups: Vec<(String, f64, f64, f64)> = Vec::new();
            for r in &summary.realizations {
                let Some(task) = r.result() else { continue };
                let Some(s) = task.as_signal() else { continue };
                let freq = r.signal_frequency.unwrap_or(f64::NAN);
                match groups
                    .iter_mut()
                    .find(|(sys, f, _, _)| *sys == r.system && *f == freq)
                {
                    Some(entry) => {
                        entry.2 = entry.2.min(s.amplitude_rmse);
                        entry.3 = entry.3.min(s.phase_rmse);
                    }
                    None => {
                        groups.push((r.system.clone(), freq, s.amplitude_rmse, s.phase_rmse))
                    }
                }
            }
            let mut out = String::from("system,signal_frequency,amplitude_rmse,phase_rmse\n");
            for (system, freq, amp, phase) in groups {
                out.push_str(&format!(
                    "{},{},{},{}\n",
                    system,
                    fmt_f64(freq),
                    fmt_f64(amp),
                    fmt_f64(phase)
                ));
            }
            Ok(out)
        }
        (PlotKind::Heatmap, PlotSource::Sweep(summary)) => {
            require_task(summary, TaskKind::Signal, kind)?;
            let mut out =
                String::from("system,signal_frequency,kerr,amplitude_rmse,phase_rmse\n");
            for r in &summary.realizations {
                let Some(task) = r.result() else { continue };
                let Some(s) = task.as_signal() else { continue };
                out.push_str(&format!(
                    "{},{},{},{},{}\n",
                    r.system,
                    fmt_opt(r.signal_frequency),
                    fmt_f64(r.kerr),
                    fmt_f64(s.amplitude_rmse),
                    fmt_f64(s.phase_rmse)
                ));
            }
            Ok(out)
        }
        (PlotKind::StmcVsD, PlotSource::Sweep(summary)) => {
            require_task(summary, TaskKind::Stmc, kind)?;
            let mut out = String::from("system,hold_time,j_train,stmc,realization_id\n");
            for b in &summary.best {
                out.push_str(&format!(
                    "{},{},{},{},{}\n",
                    b.system,
                    fmt_opt(b.hold_time),
                    b.j_train,
                    fmt_f64(b.value),
                    b.realization_id
                ));
            }
            Ok(out)
        }
        (kind, _) => Err(Error::ExportMismatch(format!(
            "plot kind {kind:?} does not match this result type"
        ))),
    }
}

fn require_task(summary: &SweepSummary, expected: TaskKind, kind: PlotKind) -> Result<()> {
    if summary.spec.task == expected {
        Ok(())
    } else {
        Err(Error::ExportMismatch(format!(
            "plot kind {kind:?} needs a {expected:?} sweep"
        )))
    }
}

/// Write one plot CSV next to the others in `out_dir`, recording its
/// checksum in the manifest.
pub fn export_plot_data(
    source: &PlotSource,
    kind: PlotKind,
    out_dir: &Path,
    manifest: &mut RunManifest,
) -> Result<()> {
    let csv = plot_data_csv(source, kind)?;
    let name = kind.file_name();
    write_file(&out_dir.join(name), &csv)?;
    manifest.record_checksum(name, &csv);
    Ok(())
}
