//! How the adaptive discretization grows with the gap: image counts,
//! collocation counts and the image-line geometry of one contact.
//!
//! ```bash
//! cargo run --release --example image_rule
//! ```

use stokes_mfs::adaptive::{collocation_count, n_images, plan_discretization, SolverParams};
use stokes_mfs::experiments::{pair_centers, scene_for_mode, BcMode};
use stokes_mfs::geometry::{accumulation_points, critical_separation, r_acc};

fn main() -> stokes_mfs::Result<()> {
    let params = SolverParams::default();
    println!("critical separation for R_p = {}: {:.4}", params.r_proxy, critical_separation(params.r_proxy)?);
    println!();
    println!("{:>8} {:>6} {:>8} {:>10}", "delta", "n_im", "M", "R_acc");
    for delta in [0.2, 0.1, 5e-2, 1e-2, 1e-3, 1e-4] {
        println!(
            "{delta:>8.0e} {:>6} {:>8} {:>10.5}",
            n_images(delta)?,
            collocation_count(params.n_proxy, &[delta])?,
            r_acc(delta)?
        );
    }

    let c = pair_centers(1e-3);
    let (a, b) = accumulation_points(&c[0], &c[1])?;
    println!("\naccumulation points at delta = 1e-3: x = {:.6}, {:.6}", a.x, b.x);

    let scene = scene_for_mode(&c, BcMode::Squeeze, 0, 0.0)?;
    let plan = plan_discretization(&scene, &params)?;
    for (k, p) in plan.particles.iter().enumerate() {
        println!(
            "particle {k}: {} stokeslets, {} rotlets, {} stresslets, {} dipoles, {} collocation nodes",
            p.n_stokeslet, p.n_rotlet, p.n_stresslet, p.n_dipole, p.m_total
        );
    }
    println!("unknowns {}, equations {}", plan.total_unknowns(), plan.total_equations());
    Ok(())
}
