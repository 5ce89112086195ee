//! One signal-processing benchmark run for a 4-level qudit and the classical
//! Duffing oscillator under identical task settings: estimate the amplitude
//! and phase of u(t) = alpha sin(omega t + phi) + beta from the sampled
//! reservoir output, with the ridge parameter swept over +-10^p.
//!
//! Desk-scale sizes keep this under a minute; raise j_train / j_test toward
//! the published numbers (up to 100 and 3000) for full-accuracy runs.
//!
//!     cargo run --release --example signal_task

use qrc::tasks::{run_signal_task, ReservoirParams, SignalTaskConfig};

fn main() -> qrc::Result<()> {
    let kerr = -5.0;
    let omega = 6.0;

    for reservoir in [
        ReservoirParams::qudit(4, 0.0, kerr)?,
        ReservoirParams::classical(0.0, kerr)?,
    ] {
        let mut cfg = SignalTaskConfig::new(reservoir);
        cfg.signal_frequency = omega;
        cfg.j_train = 10;
        cfg.j_test = 300;
        cfg.seed = 7;

        let result = run_signal_task(&cfg)?;
        println!(
            "{:<10} amplitude RMSE {:.6} (gamma {:+.0e})   phase RMSE {:.6} (gamma {:+.0e})   [{:.1}s]",
            reservoir.label(),
            result.amplitude_rmse,
            result.best_gamma_amplitude,
            result.phase_rmse,
            result.best_gamma_phase,
            result.wall_time_s
        );
        println!(
            "{:<10} shared gamma {:+.0e}: amplitude {:.6}, phase {:.6}",
            "",
            result.shared_gamma,
            result.amplitude_rmse_shared,
            result.phase_rmse_shared
        );
    }
    Ok(())
}
