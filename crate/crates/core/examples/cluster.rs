//! Random clusters: a grown cluster at fixed gap in shear and a dilute
//! layer with random rigid motions. Writes `cluster.csv` under
//! `out/cluster_*`.
//!
//! ```bash
//! cargo run --release --example cluster
//! ```

use stokes_mfs::adaptive::ImageRule;
use stokes_mfs::experiments::{run_cluster, BcMode, ClusterKind, ExperimentConfig};

fn main() -> stokes_mfs::Result<()> {
    let grown = ExperimentConfig {
        name: "grown".into(),
        particles: vec![10],
        deltas: vec![1e-2],
        image_rules: vec![ImageRule::Adaptive, ImageRule::None],
        mode: BcMode::FixedShear,
        cluster_kind: ClusterKind::Grown,
        out: "out/cluster_grown".into(),
        ..Default::default()
    };
    let layer = ExperimentConfig {
        name: "layer".into(),
        particles: vec![5, 10, 20],
        deltas: vec![5e-2],
        mode: BcMode::RandomRigid,
        cluster_kind: ClusterKind::Layer,
        out: "out/cluster_layer".into(),
        ..Default::default()
    };
    for cfg in [grown, layer] {
        println!("{}:", cfg.name);
        for r in run_cluster(&cfg)? {
            println!(
                "  P {:>3} rule {:>8} residual {:.2e} iterations {:>4} max |lambda| {:.2e} images {:?}",
                r.particles,
                r.image_rule,
                r.max_residual,
                r.iterations,
                r.max_strength,
                r.images_per_particle
            );
        }
    }
    Ok(())
}
