//! Tetrahedron self-convergence: coarse solves with and without images
//! against the fine reference for random rigid motions. Takes several
//! minutes per gap. Writes `tetrahedron.csv` under `out/tetrahedron`.
//!
//! ```bash
//! cargo run --release --example tetrahedron
//! ```

use stokes_mfs::experiments::{run_tetrahedron, ExperimentConfig};

fn main() -> stokes_mfs::Result<()> {
    let cfg = ExperimentConfig {
        name: "tetrahedron".into(),
        deltas: vec![1e-1, 1e-2],
        repetitions: 3,
        out: "out/tetrahedron".into(),
        ..Default::default()
    };
    for row in run_tetrahedron(&cfg)? {
        println!(
            "delta {:>6} rep {} eps_FT images {:.2e} no images {:.2e} ({})",
            row.delta,
            row.rep,
            row.eps_ft_images,
            row.eps_ft_no_images,
            row.status.as_str()
        );
    }
    Ok(())
}
