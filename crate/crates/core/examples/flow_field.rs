//! Velocity field and streamlines around two fixed spheres in shear.
//! Writes `flow_field.csv` and `streamlines.csv` to the working directory.
//!
//! ```bash
//! cargo run --release --example flow_field
//! ```

use std::fs::File;
use std::io::{BufWriter, Write};

use stokes_mfs::adaptive::SolverParams;
use stokes_mfs::experiments::{pair_centers, scene_for_mode, BcMode};
use stokes_mfs::geometry::Point3;
use stokes_mfs::postprocess::{evaluate_flow, trace_streamlines};
use stokes_mfs::system::solve;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    // Shear flow u = (rate * y, 0, 0) past a pair aligned with x.
    let scene = scene_for_mode(&pair_centers(0.05), BcMode::FixedShear, 0, 1.0)?;
    let res = solve(&scene, &SolverParams::default())?;
    println!("solved in {} iterations", res.iterations);

    // Plane z = 0, skipping points inside the spheres.
    let mut points = Vec::new();
    for i in 0..81 {
        for j in 0..41 {
            let p = Point3::new(-4.0 + 0.1 * i as f64, -2.0 + 0.1 * j as f64, 0.0);
            if scene.containing_sphere(&p).is_none() {
                points.push(p);
            }
        }
    }
    let u = evaluate_flow(&points, &res.sources, &scene, true)?;
    let mut w = BufWriter::new(File::create("flow_field.csv")?);
    writeln!(w, "x,y,z,ux,uy,uz")?;
    for (p, v) in points.iter().zip(&u) {
        writeln!(w, "{},{},{},{},{},{}", p.x, p.y, p.z, v.x, v.y, v.z)?;
    }

    let seeds: Vec<Point3> = (0..9).map(|k| Point3::new(-4.0, -1.6 + 0.4 * k as f64, 0.0)).collect();
    let lines = trace_streamlines(&seeds, &res.sources, &scene, 0.05, 400);
    let mut w = BufWriter::new(File::create("streamlines.csv")?);
    writeln!(w, "line,step,x,y,z")?;
    for (l, s) in lines.iter().enumerate() {
        for (k, p) in s.points.iter().enumerate() {
            writeln!(w, "{l},{k},{},{},{}", p.x, p.y, p.z)?;
        }
    }
    println!("{} field points, {} streamlines written", points.len(), lines.len());
    Ok(())
}
