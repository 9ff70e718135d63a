use super::{run_cells, scene_for_mode, BcMode, CellStatus, ExperimentConfig, ResumableTable};
use crate::adaptive::{ImageRule, SolverParams};
use crate::boundary::Scene;
use crate::error::Result;
use crate::geometry::Point3;
use crate::postprocess::{force_torque_error, forces_torques, surface_residual, ForceTorque};
use crate::scene_io::fmt_f64;
use crate::system::{SolveResult, System};

const HEADER: [&str; 12] = [
    "delta",
    "rep",
    "seed",
    "eps_ft_images",
    "eps_ft_no_images",
    "max_residual_images",
    "iterations_images",
    "iterations_no_images",
    "iterations_fine",
    "converged",
    "status",
    "message",
];
const KEY_COLS: usize = 3;

/// Regular tetrahedron of unit spheres with edge `2 + delta`, centered at
/// the origin.
pub fn tetrahedron_centers(delta: f64) -> Vec<Point3> {
    let h = (2.0 + delta) / 8f64.sqrt();
    vec![
        Point3::new(h, h, h),
        Point3::new(h, -h, -h),
        Point3::new(-h, h, -h),
        Point3::new(-h, -h, h),
    ]
}

#[derive(Clone, Debug, PartialEq)]
pub struct TetrahedronRow {
    pub delta: f64,
    pub rep: usize,
    pub seed: u64,
    pub eps_ft_images: f64,
    pub eps_ft_no_images: f64,
    pub max_residual_images: f64,
    pub iterations_images: usize,
    pub iterations_no_images: usize,
    pub iterations_fine: usize,
    pub converged: bool,
    pub status: CellStatus,
    pub message: String,
}

impl TetrahedronRow {
    fn record(&self) -> Vec<String> {
        vec![
            self.delta.to_string(),
            self.rep.to_string(),
            self.seed.to_string(),
            fmt_f64(self.eps_ft_images),
            fmt_f64(self.eps_ft_no_images),
            fmt_f64(self.max_residual_images),
            self.iterations_images.to_string(),
            self.iterations_no_images.to_string(),
            self.iterations_fine.to_string(),
            self.converged.to_string(),
            self.status.as_str().into(),
            self.message.clone(),
        ]
    }

    fn parse(r: &[String]) -> Option<Self> {
        Some(TetrahedronRow {
            delta: r[0].parse().ok()?,
            rep: r[1].parse().ok()?,
            seed: r[2].parse().ok()?,
            eps_ft_images: r[3].parse().ok()?,
            eps_ft_no_images: r[4].parse().ok()?,
            max_residual_images: r[5].parse().ok()?,
            iterations_images: r[6].parse().ok()?,
            iterations_no_images: r[7].parse().ok()?,
            iterations_fine: r[8].parse().ok()?,
            converged: r[9].parse().ok()?,
            status: CellStatus::parse(&r[10])?,
            message: r[11].clone(),
        })
    }
}

/// Solves every scene (same geometry, different motions) with one system.
fn solve_all(scenes: &[Scene], params: &SolverParams) -> Result<Vec<SolveResult>> {
    let sys = System::build(&scenes[0], params)?;
    let data = scenes
        .iter()
        .map(|s| sys.motion_data(&s.spheres))
        .collect::<Result<Vec<_>>>()?;
    sys.solve_many(&data)
}

fn solve_delta(cfg: &ExperimentConfig, delta: f64) -> Result<Vec<TetrahedronRow>> {
    let centers = tetrahedron_centers(delta);
    let seeds: Vec<u64> = (0..cfg.repetitions).map(|r| cfg.seed + r as u64).collect();
    let scenes = seeds
        .iter()
        .map(|&s| scene_for_mode(&centers, BcMode::RandomRigid, s, cfg.shear_rate))
        .collect::<Result<Vec<_>>>()?;
    let ft = |rs: &[SolveResult]| -> Vec<ForceTorque> {
        rs.iter().zip(&scenes).map(|(r, s)| forces_torques(&r.sources, s)).collect()
    };
    let coarse = solve_all(&scenes, &cfg.params)?;
    let residuals = coarse
        .iter()
        .zip(&scenes)
        .zip(&seeds)
        .map(|((r, s), &seed)| surface_residual(s, &r.sources, cfg.samples_per_sphere, seed).map(|x| x.max))
        .collect::<Result<Vec<_>>>()?;
    let bare_params = SolverParams {
        image_rule: ImageRule::None,
        ..cfg.params.clone()
    };
    let bare = solve_all(&scenes, &bare_params)?;
    let fine = solve_all(&scenes, &cfg.fine)?;
    let (ft_c, ft_b, ft_f) = (ft(&coarse), ft(&bare), ft(&fine));
    (0..scenes.len())
        .map(|i| {
            let converged = coarse[i].converged && bare[i].converged && fine[i].converged;
            Ok(TetrahedronRow {
                delta,
                rep: i,
                seed: seeds[i],
                eps_ft_images: force_torque_error(&ft_c[i], &ft_f[i])?,
                eps_ft_no_images: force_torque_error(&ft_b[i], &ft_f[i])?,
                max_residual_images: residuals[i],
                iterations_images: coarse[i].iterations,
                iterations_no_images: bare[i].iterations,
                iterations_fine: fine[i].iterations,
                converged,
                status: CellStatus::from_converged(converged),
                message: String::new(),
            })
        })
        .collect()
}

/// Coarse solves with and without images against the fine reference, for
/// random rigid motions of a near-contact tetrahedron. Writes
/// `tetrahedron.csv`.
pub fn run_tetrahedron(cfg: &ExperimentConfig) -> Result<Vec<TetrahedronRow>> {
    cfg.validate()?;
    let table = ResumableTable::open(cfg.out.join("tetrahedron.csv"), &HEADER, KEY_COLS)?;
    let keys = |delta: f64| -> Vec<String> {
        (0..cfg.repetitions)
            .map(|r| format!("{delta},{r},{}", cfg.seed + r as u64))
            .collect()
    };
    let per_delta = run_cells(cfg.deltas.len(), cfg.workers, |i| -> Result<Vec<TetrahedronRow>> {
        let delta = cfg.deltas[i];
        let ks = keys(delta);
        let stored: Option<Vec<TetrahedronRow>> = ks
            .iter()
            .map(|k| table.completed(k).and_then(|r| TetrahedronRow::parse(&r[0])))
            .collect();
        if let Some(rows) = stored {
            return Ok(rows);
        }
        let rows = solve_delta(cfg, delta).unwrap_or_else(|e| {
            (0..cfg.repetitions)
                .map(|r| TetrahedronRow {
                    delta,
                    rep: r,
                    seed: cfg.seed + r as u64,
                    eps_ft_images: f64::NAN,
                    eps_ft_no_images: f64::NAN,
                    max_residual_images: f64::NAN,
                    iterations_images: 0,
                    iterations_no_images: 0,
                    iterations_fine: 0,
                    converged: false,
                    status: CellStatus::Error,
                    message: e.to_string(),
                })
                .collect()
        });
        for (k, r) in ks.iter().zip(&rows) {
            table.record(k, vec![r.record()])?;
        }
        Ok(rows)
    });
    Ok(per_delta.into_iter().collect::<Result<Vec<_>>>()?.into_iter().flatten().collect())
}
