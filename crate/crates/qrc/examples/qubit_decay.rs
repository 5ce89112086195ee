//! Smallest possible quantum run: an undriven qubit prepared in |1> decays
//! into its ground state. The excited-state population follows exp(-kappa t),
//! which makes this a quick end-to-end check of the Lindblad integrator.
//!
//!     cargo run --release --example qubit_decay

use qrc::dynamics::{sample_quantum_output_with, Drive, IntegratorConfig, SampleOptions};
use qrc::qudit::{DensityMatrix, QuantumParams};

fn main() -> qrc::Result<()> {
    let params = QuantumParams::new(2, 0.0, 0.0)?;
    let rho0 = DensityMatrix::fock_state(2, 1)?;
    let cfg = IntegratorConfig::default();

    let traj = sample_quantum_output_with(
        &params,
        &Drive::constant(0.0),
        &rho0,
        (0.0, 5.0),
        11,
        &cfg,
        SampleOptions {
            record_populations: true,
        },
    )?;

    println!("{:>8} {:>12} {:>12} {:>10}", "t", "p1(t)", "exp(-t)", "error");
    let mut worst: f64 = 0.0;
    for (t, pops) in traj
        .sample_times
        .iter()
        .zip(traj.populations.as_ref().unwrap())
    {
        let exact = (-t).exp();
        let err = (pops[1] - exact).abs();
        worst = worst.max(err);
        println!("{t:>8.2} {:>12.8} {exact:>12.8} {err:>10.2e}", pops[1]);
    }
    let stats = traj.stats.unwrap();
    println!("\nworst deviation from the analytic law: {worst:.2e}");
    println!(
        "state health over the run: |tr-1| <= {:.1e}, hermiticity <= {:.1e}, min eig >= {:.1e}",
        stats.max_trace_dev, stats.max_hermiticity, stats.min_eigenvalue
    );
    Ok(())
}
