//! Two spheres squeezed together, compared with the exact bispherical series.
//!
//! ```bash
//! cargo run --release --example squeeze_brenner
//! ```

use stokes_mfs::adaptive::{ImageRule, SolverParams};
use stokes_mfs::experiments::{pair_centers, scene_for_mode, BcMode};
use stokes_mfs::oracle::{brenner_force, BrennerParams};
use stokes_mfs::postprocess::{forces_torques, surface_residual};
use stokes_mfs::system::System;

fn main() -> stokes_mfs::Result<()> {
    println!("{:>8} {:>8} {:>14} {:>12} {:>10} {:>6}", "delta", "rule", "F exact", "F error", "residual", "iters");
    for delta in [1e-1, 1e-2, 1e-3] {
        let exact = brenner_force(&BrennerParams::new(delta))?.force;
        let scene = scene_for_mode(&pair_centers(delta), BcMode::Squeeze, 0, 0.0)?;
        for rule in [ImageRule::None, ImageRule::Adaptive] {
            let params = SolverParams { image_rule: rule, ..Default::default() };
            let res = System::build(&scene, &params)?.solve()?;
            let f = forces_torques(&res.sources, &scene).force[0].x;
            let report = surface_residual(&scene, &res.sources, 500, 0)?;
            let label = if rule == ImageRule::None { "none" } else { "adaptive" };
            println!(
                "{delta:>8.0e} {label:>8} {exact:>14.6e} {:>12.3e} {:>10.3e} {:>6}",
                ((f - exact) / exact).abs(),
                report.max,
                res.iterations
            );
        }
    }
    Ok(())
}
