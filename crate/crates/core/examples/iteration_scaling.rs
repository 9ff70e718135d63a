//! GMRES iteration counts for a closing tetrahedron and the fitted power
//! law. Writes `iter_scaling.csv` under `out/iter_scaling`.
//!
//! ```bash
//! cargo run --release --example iteration_scaling
//! ```

use stokes_mfs::experiments::{run_iteration_scaling, ExperimentConfig};

fn main() -> stokes_mfs::Result<()> {
    let cfg = ExperimentConfig {
        name: "iter_scaling".into(),
        deltas: vec![1e-1, 1e-2, 1e-3],
        out: "out/iter_scaling".into(),
        ..Default::default()
    };
    let report = run_iteration_scaling(&cfg)?;
    for r in &report.rows {
        println!("delta {:>6} iterations {:>4} ({})", r.delta, r.iterations, r.status.as_str());
    }
    if let Some(p) = report.exponent {
        println!("iterations ~ delta^(-{p:.2})");
    }
    Ok(())
}
