//! One short-term memory-capacity run: a continuous piecewise-constant
//! random input drives the reservoir, and a separate linear readout per delay
//! k tries to recall the input from k hold times earlier. Prints the r^2_k
//! decay curve and the STMC sum for a 4-level qudit and for the classical
//! oscillator at their respective best-case hold times.
//!
//!     cargo run --release --example stmc_task

use qrc::tasks::{run_stmc_task, ReservoirParams, StmcTaskConfig};

fn main() -> qrc::Result<()> {
    for (reservoir, hold_time) in [
        (ReservoirParams::qudit(4, 1.0, -50.0)?, 0.5),
        (ReservoirParams::classical(0.0, -50.0)?, 5.0),
    ] {
        let mut cfg = StmcTaskConfig::new(reservoir);
        cfg.hold_time = hold_time;
        cfg.j_train = 500;
        cfg.j_test = 500;
        cfg.samples_per_segment = 50;
        cfg.k_max = 20;
        cfg.seed = 7;

        let result = run_stmc_task(&cfg)?;
        println!(
            "{} at dt = {hold_time}: STMC = {:.4}  [{:.1}s]",
            reservoir.label(),
            result.stmc,
            result.wall_time_s
        );
        print!("  r^2_k:");
        for (k, r2) in result.r2_curve.iter().enumerate() {
            if k % 10 == 0 {
                print!("\n    k={:>2}..", k + 1);
            }
            print!(" {r2:.3}");
        }
        println!("\n");
    }
    Ok(())
}
