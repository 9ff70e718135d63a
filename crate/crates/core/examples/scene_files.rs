//! Scene and parameter files in, result tables out, strengths read back.
//! Writes into a temporary directory.
//!
//! ```bash
//! cargo run --release --example scene_files
//! ```

use stokes_mfs::postprocess::{evaluate_flow, forces_torques, surface_residual};
use stokes_mfs::geometry::Point3;
use stokes_mfs::scene_io::{parse_params, parse_scene, read_strengths, serialize_scene, write_results};
use stokes_mfs::system::System;

const SCENE: &str = r#"{
  "fluid": { "viscosity": 2.0 },
  "background": { "kind": "uniform", "velocity": [0, 0, 1] },
  "spheres": [
    { "center": [0, 0, 0] },
    { "center": [2.5, 0, 0], "velocity": [0, 0, 1] }
  ]
}"#;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let scene = parse_scene(SCENE)?;
    let params = parse_params(r#"{ "n_proxy": 300, "gmres_tol": 1e-8 }"#)?;
    println!("canonical scene:\n{}", serialize_scene(&scene));

    let res = System::build(&scene, &params)?.solve()?;
    let ft = forces_torques(&res.sources, &scene);
    let report = surface_residual(&scene, &res.sources, 500, 7)?;
    let dir = tempfile::tempdir()?;
    let files = write_results(&res, &ft, &report, dir.path())?;
    println!("wrote {}", files.forces_torques.display());
    print!("{}", std::fs::read_to_string(&files.forces_torques)?);

    // The stored strengths reproduce the flow exactly.
    let loaded = read_strengths(&files.strengths)?;
    let probe = [Point3::new(1.25, 1.0, 0.3)];
    let a = evaluate_flow(&probe, &res.sources, &scene, true)?[0];
    let b = evaluate_flow(&probe, &loaded, &scene, true)?[0];
    println!("velocity at probe {a:?}, difference after reload {:.1e}", (a - b).norm());
    Ok(())
}
