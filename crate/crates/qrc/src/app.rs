//! Command implementations behind the `qrc` binary: load a config file, run
//! the requested work, and persist results plus a run manifest into the
//! output directory. Progress and failures go to standard error; result
//! files (and optionally a JSON copy on standard output) stay machine
//! readable.

use std::path::{Path, PathBuf};

use num_complex::Complex64;

use crate::config::{ConfigFile, PlotKind, SimulateConfig};
use crate::dynamics::{
    sample_classical_output, sample_quantum_output_with, SampleOptions, Trajectory,
};
use crate::error::{Error, Result};
use crate::export::{
    best_case_csv, fmt_f64, plot_data_csv, sweep_csv, PlotSource, ResultsFile, RunManifest,
    TrajectoryRecord,
};
use crate::qudit::DensityMatrix;
use crate::sweep::{run_sweep_with_progress, RealizationOutcome};
use crate::tasks::{run_signal_task, run_stmc_task, ReservoirParams, TaskResult};

/// Common flags shared by every subcommand.
#[derive(Debug, Clone)]
pub struct RunOptions {
    pub config: PathBuf,
    pub out: PathBuf,
    pub seed: Option<u64>,
    pub workers: Option<usize>,
    pub stdout: bool,
}

fn install_pool<T>(workers: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T>
where
    T: Send,
{
    match workers {
        Some(n) if n > 0 => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::SweepFailure(format!("worker pool: {e}")))?;
            Ok(pool.install(f))
        }
        _ => Ok(f()),
    }
}

fn write_result_file(
    out: &Path,
    name: &str,
    contents: &str,
    manifest: &mut RunManifest,
) -> Result<()> {
    std::fs::create_dir_all(out).map_err(|e| Error::Io {
        path: out.display().to_string(),
        source: e,
    })?;
    let path = out.join(name);
    std::fs::write(&path, contents).map_err(|e| Error::Io {
        path: path.display().to_string(),
        source: e,
    })?;
    manifest.record_checksum(name, contents);
    Ok(())
}

fn finish(
    out: &Path,
    manifest: RunManifest,
    results_json: &str,
    stdout: bool,
) -> Result<()> {
    manifest.write(out)?;
    if stdout {
        println!("{results_json}");
    }
    eprintln!("[qrc] wrote results to {}", out.display());
    Ok(())
}

/// `qrc simulate`: one trajectory, samples (and optionally populations) to CSV.
pub fn run_simulate(opts: &RunOptions) -> Result<()> {
    let cfg = ConfigFile::load(&opts.config)?;
    let sim = cfg.resolve_simulate(opts.seed)?;
    eprintln!(
        "[qrc] simulating {} over [{}, {}] with {} samples",
        sim.reservoir.label(),
        sim.window.0,
        sim.window.1,
        sim.num_samples
    );
    let trajectory = install_pool(opts.workers, || simulate_trajectory(&sim))??;

    let mut manifest = RunManifest::new("simulate", sim.seed, &cfg, sim.integrator)?;
    let record = TrajectoryRecord::from(&trajectory);
    let source = PlotSource::Trajectory(record.clone());

    let traj_csv = plot_data_csv(&source, PlotKind::Trajectory)?;
    write_result_file(&opts.out, "trajectory.csv", &traj_csv, &mut manifest)?;
    if record.populations.is_some() {
        let fock_csv = plot_data_csv(&source, PlotKind::Fock)?;
        write_result_file(&opts.out, "fock_populations.csv", &fock_csv, &mut manifest)?;
    }
    let results = ResultsFile::Trajectory {
        trajectory: record,
        manifest: manifest.clone(),
    };
    let json = results.to_json()?;
    write_result_file(&opts.out, "result.json", &json, &mut manifest)?;
    finish(&opts.out, manifest, &json, opts.stdout)
}

fn simulate_trajectory(sim: &SimulateConfig) -> Result<Trajectory> {
    match &sim.reservoir {
        ReservoirParams::Qudit(p) => {
            let rho0 = DensityMatrix::ground_state(p.dim)?;
            sample_quantum_output_with(
                p,
                &sim.drive,
                &rho0,
                sim.window,
                sim.num_samples,
                &sim.integrator,
                SampleOptions {
                    record_populations: sim.record_populations,
                },
            )
        }
        ReservoirParams::Classical(p) => sample_classical_output(
            p,
            &sim.drive,
            Complex64::new(0.0, 0.0),
            sim.window,
            sim.num_samples,
            &sim.integrator,
        ),
    }
}

/// `qrc task signal`: one signal-processing benchmark run.
pub fn run_task_signal(opts: &RunOptions) -> Result<()> {
    let cfg = ConfigFile::load(&opts.config)?;
    let task_cfg = cfg.resolve_signal(opts.seed)?;
    eprintln!(
        "[qrc] signal task: {} K={} omega={} j_train={} j_test={}",
        task_cfg.reservoir.label(),
        task_cfg.reservoir.kerr(),
        task_cfg.signal_frequency,
        task_cfg.j_train,
        task_cfg.j_test
    );
    let result = install_pool(opts.workers, || run_signal_task(&task_cfg))??;
    eprintln!(
        "[qrc] amplitude RMSE {:.6} (gamma {:.0e}), phase RMSE {:.6} (gamma {:.0e}) in {:.1}s",
        result.amplitude_rmse,
        result.best_gamma_amplitude,
        result.phase_rmse,
        result.best_gamma_phase,
        result.wall_time_s
    );

    let mut manifest = RunManifest::new("task signal", task_cfg.seed, &cfg, task_cfg.integrator)?;
    let metrics_csv = format!(
        "system,kerr,reservoir_frequency,signal_frequency,j_train,amplitude_rmse,phase_rmse,\
         best_gamma_amplitude,best_gamma_phase,shared_gamma,amplitude_rmse_shared,phase_rmse_shared\n\
         {},{},{},{},{},{},{},{},{},{},{},{}\n",
        task_cfg.reservoir.label(),
        fmt_f64(task_cfg.reservoir.kerr()),
        fmt_f64(task_cfg.reservoir.omega()),
        fmt_f64(task_cfg.signal_frequency),
        task_cfg.j_train,
        fmt_f64(result.amplitude_rmse),
        fmt_f64(result.phase_rmse),
        fmt_f64(result.best_gamma_amplitude),
        fmt_f64(result.best_gamma_phase),
        fmt_f64(result.shared_gamma),
        fmt_f64(result.amplitude_rmse_shared),
        fmt_f64(result.phase_rmse_shared),
    );
    write_result_file(&opts.out, "metrics.csv", &metrics_csv, &mut manifest)?;
    let results = ResultsFile::Task {
        result: TaskResult::Signal(result),
        manifest: manifest.clone(),
    };
    let json = results.to_json()?;
    write_result_file(&opts.out, "result.json", &json, &mut manifest)?;
    finish(&opts.out, manifest, &json, opts.stdout)
}

/// `qrc task stmc`: one memory-capacity benchmark run.
pub fn run_task_stmc(opts: &RunOptions) -> Result<()> {
    let cfg = ConfigFile::load(&opts.config)?;
    let task_cfg = cfg.resolve_stmc(opts.seed)?;
    eprintln!(
        "[qrc] stmc task: {} K={} dt={} J={} T={} k_max={}",
        task_cfg.reservoir.label(),
        task_cfg.reservoir.kerr(),
        task_cfg.hold_time,
        task_cfg.total_inputs(),
        task_cfg.samples_per_segment,
        task_cfg.k_max
    );
    let result = install_pool(opts.workers, || run_stmc_task(&task_cfg))??;
    eprintln!(
        "[qrc] STMC = {:.4} over k_max = {} in {:.1}s",
        result.stmc, task_cfg.k_max, result.wall_time_s
    );

    let mut manifest = RunManifest::new("task stmc", task_cfg.seed, &cfg, task_cfg.integrator)?;
    let task_result = TaskResult::Stmc(result);
    let r2_csv = plot_data_csv(&PlotSource::Task(task_result.clone()), PlotKind::R2Curve)?;
    write_result_file(&opts.out, "r2_curve.csv", &r2_csv, &mut manifest)?;
    let results = ResultsFile::Task {
        result: task_result,
        manifest: manifest.clone(),
    };
    let json = results.to_json()?;
    write_result_file(&opts.out, "result.json", &json, &mut manifest)?;
    finish(&opts.out, manifest, &json, opts.stdout)
}

/// `qrc sweep`: expand and run every realization, then persist the table,
/// the best-case records, and the JSON summary.
pub fn run_sweep_cmd(opts: &RunOptions) -> Result<()> {
    let cfg = ConfigFile::load(&opts.config)?;
    let spec = cfg.resolve_sweep(opts.seed, opts.workers)?;
    let summary = run_sweep_with_progress(&spec, |row, total| match &row.outcome {
        RealizationOutcome::Ok { .. } => {
            eprintln!(
                "[qrc] realization {}/{total}: {} K={:.4} ok",
                row.id + 1,
                row.system,
                row.kerr
            );
        }
        RealizationOutcome::Failed { reason } => {
            eprintln!(
                "[qrc] realization {}/{total}: {} K={:.4} FAILED: {reason}",
                row.id + 1,
                row.system,
                row.kerr
            );
        }
    })?;

    let mut manifest = RunManifest::new(
        "sweep",
        spec.seed,
        &spec,
        crate::dynamics::IntegratorConfig::default(),
    )?;
    write_result_file(&opts.out, "results.csv", &sweep_csv(&summary), &mut manifest)?;
    write_result_file(&opts.out, "best.csv", &best_case_csv(&summary), &mut manifest)?;
    let results = ResultsFile::Sweep {
        summary,
        manifest: manifest.clone(),
    };
    let json = results.to_json()?;
    write_result_file(&opts.out, "results.json", &json, &mut manifest)?;
    finish(&opts.out, manifest, &json, opts.stdout)
}

/// `qrc export`: re-derive plot CSVs from a previous run's results JSON.
pub fn run_export(opts: &RunOptions) -> Result<()> {
    let cfg = ConfigFile::load(&opts.config)?;
    let section = cfg.resolve_export()?;
    let input = resolve_relative(&opts.config, Path::new(&section.input));
    let results = ResultsFile::load(&input)?;
    let source = PlotSource::from(&results);

    let mut manifest = RunManifest::new(
        "export",
        cfg.master_seed(opts.seed),
        &section,
        crate::dynamics::IntegratorConfig::default(),
    )?;
    for kind in &section.kinds {
        let csv = plot_data_csv(&source, *kind)?;
        write_result_file(&opts.out, kind.file_name(), &csv, &mut manifest)?;
        eprintln!("[qrc] exported {}", kind.file_name());
    }
    manifest.write(&opts.out)?;
    eprintln!("[qrc] wrote plot data to {}", opts.out.display());
    Ok(())
}

/// Interpret `target` relative to the config file's directory when relative.
fn resolve_relative(config: &Path, target: &Path) -> PathBuf {
    if target.is_absolute() {
        target.to_path_buf()
    } else {
        config
            .parent()
            .map(|dir| dir.join(target))
            .unwrap_or_else(|| target.to_path_buf())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write_config(dir: &Path, name: &str, body: &str) -> PathBuf {
        let path = dir.join(name);
        std::fs::write(&path, body).unwrap();
        path
    }

    #[test]
    fn simulate_writes_expected_files() {
        let dir = tempfile::tempdir().unwrap();
        let config = write_config(
            dir.path(),
            "sim.toml",
            r#"
units = "kappa"

[reservoir]
kind = "qudit"
dim = 3
kerr = -7.0

[simulate]
num_samples = 11
window = [0.0, 0.5]
record_populations = true

[simulate.drive]
type = "sinusoidal"
amplitude = 5.0
frequency = 6.0
bias = 10.0
"#,
        );
        let out = dir.path().join("out");
        run_simulate(&RunOptions {
            config,
            out: out.clone(),
            seed: None,
            workers: None,
            stdout: false,
        })
        .unwrap();
        assert!(out.join("trajectory.csv").exists());
        assert!(out.join("fock_populations.csv").exists());
        assert!(out.join("result.json").exists());
        assert!(out.join("manifest.json").exists());
        let csv = std::fs::read_to_string(out.join("trajectory.csv")).unwrap();
        assert_eq!(csv.trim_end().lines().count(), 12);
    }

    #[test]
    fn sweep_and_export_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let sweep_config = write_config(
            dir.path(),
            "sweep.toml",
            r#"
units = "kappa"
seed = 4

[sweep]
task = "signal"
systems = [2]
signal_frequencies = [2.0, 5.0]
kerr = { values = [-1.0, -4.0] }

[sweep.signal]
j_train = 2
j_test = 6
window = 0.3
num_samples = 7
"#,
        );
        let out = dir.path().join("sweep-out");
        run_sweep_cmd(&RunOptions {
            config: sweep_config,
            out: out.clone(),
            seed: None,
            workers: Some(2),
            stdout: false,
        })
        .unwrap();
        assert!(out.join("results.csv").exists());
        assert!(out.join("best.csv").exists());
        assert!(out.join("results.json").exists());

        let export_config = write_config(
            dir.path(),
            "export.toml",
            r#"
units = "kappa"

[export]
input = "sweep-out/results.json"
kinds = ["heatmap", "rmse-vs-jtrain", "rmse-vs-omega"]
"#,
        );
        let plot_out = dir.path().join("plots");
        run_export(&RunOptions {
            config: export_config,
            out: plot_out.clone(),
            seed: None,
            workers: None,
            stdout: false,
        })
        .unwrap();
        assert!(plot_out.join("heatmap.csv").exists());
        assert!(plot_out.join("rmse_vs_jtrain.csv").exists());
        assert!(plot_out.join("rmse_vs_omega.csv").exists());
        let heatmap = std::fs::read_to_string(plot_out.join("heatmap.csv")).unwrap();
        assert_eq!(heatmap.trim_end().lines().count(), 1 + 4);
    }
}
