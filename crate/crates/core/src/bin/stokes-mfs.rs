use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use stokes_mfs::experiments::{
    run_cluster, run_iteration_scaling, run_tetrahedron, run_two_sphere_sweep, CellStatus, ExperimentConfig,
};
use stokes_mfs::postprocess::{forces_torques, surface_residual};
use stokes_mfs::scene_io::{load_params, load_scene, write_results};
use stokes_mfs::system::System;
use stokes_mfs::Result;

#[derive(Parser)]
#[command(name = "stokes-mfs", version, about = "Stokes resistance solver for rigid spheres")]
struct Cli {
    /// Worker threads for the solver's parallel loops.
    #[arg(long, global = true, env = "STOKES_MFS_THREADS")]
    threads: Option<usize>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Solve one scene and write forces, residuals, metadata and strengths.
    Solve {
        #[arg(long)]
        scene: PathBuf,
        #[arg(long)]
        params: Option<PathBuf>,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// Seed for the residual sample rotations.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 500)]
        samples: usize,
    },
    /// Two-sphere sweep over gap, proxy count, proxy radius and image rule.
    TwoSphere(Exp),
    /// Tetrahedron self-convergence against the fine reference.
    Tetrahedron(Exp),
    /// Random clusters.
    Cluster(Exp),
    /// GMRES iteration growth as the tetrahedron gap closes.
    IterScaling(Exp),
}

#[derive(Args)]
struct Exp {
    /// Experiment configuration (JSON); defaults apply when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Replaces the config's base solver parameters.
    #[arg(long)]
    params: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
}

impl Exp {
    fn load(&self) -> Result<ExperimentConfig> {
        let mut cfg = match &self.config {
            Some(p) => ExperimentConfig::load(p)?,
            None => ExperimentConfig::default(),
        };
        if let Some(p) = &self.params {
            cfg.params = load_params(p)?;
        }
        if let Some(o) = &self.out {
            cfg.out = o.clone();
        }
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn errored(mut statuses: impl Iterator<Item = CellStatus>) -> bool {
    statuses.any(|s| s == CellStatus::Error)
}

/// Returns whether any cell errored.
fn run(cmd: Cmd) -> Result<bool> {
    match cmd {
        Cmd::Solve {
            scene,
            params,
            out,
            seed,
            samples,
        } => {
            let scene = load_scene(&scene)?;
            let params = match params {
                Some(p) => load_params(p)?,
                None => Default::default(),
            };
            let res = System::build(&scene, &params)?.solve()?;
            let ft = forces_torques(&res.sources, &scene);
            let report = surface_residual(&scene, &res.sources, samples, seed)?;
            write_results(&res, &ft, &report, &out)?;
            if !res.converged {
                eprintln!(
                    "warning: GMRES stopped at relative residual {:.3e} after {} iterations",
                    res.final_residual(),
                    res.iterations
                );
            }
            println!(
                "{} iterations, max surface residual {:.3e}, results in {}",
                res.iterations,
                report.max,
                out.display()
            );
            Ok(false)
        }
        Cmd::TwoSphere(e) => {
            let rows = run_two_sphere_sweep(&e.load()?)?;
            Ok(errored(rows.iter().map(|r| r.status)))
        }
        Cmd::Tetrahedron(e) => {
            let rows = run_tetrahedron(&e.load()?)?;
            Ok(errored(rows.iter().map(|r| r.status)))
        }
        Cmd::Cluster(e) => {
            let rows = run_cluster(&e.load()?)?;
            Ok(errored(rows.iter().map(|r| r.status)))
        }
        Cmd::IterScaling(e) => {
            let report = run_iteration_scaling(&e.load()?)?;
            match report.exponent {
                Some(p) => println!("fitted iteration exponent {p:.3}"),
                None => println!("too few converged gaps to fit an exponent"),
            }
            Ok(errored(report.rows.iter().map(|r| r.status)))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::FAILURE;
        }
    }
    match run(cli.cmd) {
        Ok(false) => ExitCode::SUCCESS,
        Ok(true) => {
            eprintln!("one or more cells failed; see the status column");
            ExitCode::FAILURE
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
