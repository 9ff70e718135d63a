//! Drag and torque on an isolated sphere against Stokes' law.
//!
//! ```bash
//! cargo run --release --example single_sphere
//! ```

use std::f64::consts::PI;

use nalgebra::Vector3;
use stokes_mfs::boundary::{BackgroundFlow, Scene, SphereState};
use stokes_mfs::geometry::Point3;
use stokes_mfs::postprocess::{forces_torques, surface_residual};
use stokes_mfs::system::solve;
use stokes_mfs::adaptive::SolverParams;

fn main() -> stokes_mfs::Result<()> {
    let mu = 1.0;
    let sphere = SphereState {
        center: Point3::zeros(),
        velocity: Vector3::new(1.0, 0.0, 0.0),
        angular_velocity: Vector3::new(0.0, 0.0, 1.0),
    };
    let scene = Scene::new(mu, BackgroundFlow::None, vec![sphere])?;

    println!("{:>6} {:>14} {:>14} {:>12}", "N", "drag err", "torque err", "residual");
    for n in [100, 200, 400, 686] {
        let params = SolverParams { n_proxy: n, ..Default::default() };
        let res = solve(&scene, &params)?;
        let ft = forces_torques(&res.sources, &scene);
        // Force and torque exerted on the fluid.
        let drag = (ft.force[0] - Vector3::new(6.0 * PI * mu, 0.0, 0.0)).norm() / (6.0 * PI * mu);
        let torque = (ft.torque[0] - Vector3::new(0.0, 0.0, 8.0 * PI * mu)).norm() / (8.0 * PI * mu);
        let report = surface_residual(&scene, &res.sources, 500, 0)?;
        println!("{n:>6} {drag:>14.3e} {torque:>14.3e} {:>12.3e}", report.max);
    }
    Ok(())
}
