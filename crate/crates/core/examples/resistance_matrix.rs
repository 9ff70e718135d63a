//! Grand resistance matrix of a near-touching pair. One system is factored
//! once and reused for all twelve rigid-body motions.
//!
//! ```bash
//! cargo run --release --example resistance_matrix
//! ```

use nalgebra::{DMatrix, Vector3};
use stokes_mfs::adaptive::SolverParams;
use stokes_mfs::boundary::{BackgroundFlow, Scene, SphereState};
use stokes_mfs::experiments::pair_centers;
use stokes_mfs::postprocess::forces_torques;
use stokes_mfs::system::System;

fn main() -> stokes_mfs::Result<()> {
    let centers = pair_centers(1e-2);
    let at_rest: Vec<SphereState> = centers.iter().map(|c| SphereState::fixed(*c)).collect();
    let scene = Scene::new(1.0, BackgroundFlow::None, at_rest.clone())?;
    let sys = System::build(&scene, &SolverParams::default())?;

    // Column j: sphere j / 6 moves with unit component j % 6 of (U, Ω).
    let motions: Vec<Vec<SphereState>> = (0..12)
        .map(|j| {
            let mut m = at_rest.clone();
            let e = Vector3::ith(j % 3, 1.0);
            if j % 6 < 3 {
                m[j / 6].velocity = e;
            } else {
                m[j / 6].angular_velocity = e;
            }
            m
        })
        .collect();
    let data = motions.iter().map(|m| sys.motion_data(m)).collect::<stokes_mfs::Result<Vec<_>>>()?;
    let results = sys.solve_many(&data)?;

    let r = DMatrix::from_fn(12, 12, |i, j| forces_torques(&results[j].sources, &scene).stacked()[i]);
    println!("resistance matrix (force and torque on the fluid):");
    for i in 0..12 {
        let row: Vec<String> = (0..12).map(|j| format!("{:>9.3}", r[(i, j)])).collect();
        println!("{}", row.join(" "));
    }
    let asym = (&r - r.transpose()).abs().max() / r.abs().max();
    println!("relative asymmetry {asym:.2e}");
    println!("iterations per column: {:?}", results.iter().map(|r| r.iterations).collect::<Vec<_>>());
    Ok(())
}
