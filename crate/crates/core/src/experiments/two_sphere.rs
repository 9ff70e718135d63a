use nalgebra::Vector3;

use super::{rule_label, run_cells, scene_for_mode, BcMode, CellStatus, ExperimentConfig, ResumableTable};
use crate::adaptive::{ImageRule, SolverParams};
use crate::error::Result;
use crate::geometry::Point3;
use crate::oracle::{brenner_force, BrennerParams};
use crate::postprocess::{force_torque_error, forces_torques, surface_residual, ForceTorque};
use crate::scene_io::fmt_f64;
use crate::system::System;

const HEADER: [&str; 15] = [
    "delta",
    "n_proxy",
    "r_proxy",
    "image_rule",
    "mode",
    "seed",
    "n_im",
    "max_residual",
    "force_error",
    "max_strength",
    "iterations",
    "converged",
    "n_unknowns",
    "status",
    "message",
];
const KEY_COLS: usize = 6;

/// Centers of two unit spheres a gap `delta` apart on the x axis.
pub fn pair_centers(delta: f64) -> [Point3; 2] {
    let d = 1.0 + 0.5 * delta;
    [Point3::new(-d, 0.0, 0.0), Point3::new(d, 0.0, 0.0)]
}

#[derive(Clone, Debug, PartialEq)]
pub struct TwoSphereRow {
    pub delta: f64,
    pub n_proxy: usize,
    pub r_proxy: f64,
    pub image_rule: String,
    pub mode: String,
    pub seed: u64,
    pub n_im: usize,
    pub max_residual: f64,
    /// Force error against the bispherical series (squeezing only).
    pub force_error: Option<f64>,
    pub max_strength: f64,
    pub iterations: usize,
    pub converged: bool,
    pub n_unknowns: usize,
    pub status: CellStatus,
    pub message: String,
}

fn opt(x: Option<f64>) -> String {
    x.map(fmt_f64).unwrap_or_default()
}

impl TwoSphereRow {
    fn record(&self) -> Vec<String> {
        vec![
            self.delta.to_string(),
            self.n_proxy.to_string(),
            self.r_proxy.to_string(),
            self.image_rule.clone(),
            self.mode.clone(),
            self.seed.to_string(),
            self.n_im.to_string(),
            fmt_f64(self.max_residual),
            opt(self.force_error),
            fmt_f64(self.max_strength),
            self.iterations.to_string(),
            self.converged.to_string(),
            self.n_unknowns.to_string(),
            self.status.as_str().into(),
            self.message.clone(),
        ]
    }

    fn parse(r: &[String]) -> Option<Self> {
        Some(TwoSphereRow {
            delta: r[0].parse().ok()?,
            n_proxy: r[1].parse().ok()?,
            r_proxy: r[2].parse().ok()?,
            image_rule: r[3].clone(),
            mode: r[4].clone(),
            seed: r[5].parse().ok()?,
            n_im: r[6].parse().ok()?,
            max_residual: r[7].parse().ok()?,
            force_error: r[8].parse().ok(),
            max_strength: r[9].parse().ok()?,
            iterations: r[10].parse().ok()?,
            converged: r[11].parse().ok()?,
            n_unknowns: r[12].parse().ok()?,
            status: CellStatus::parse(&r[13])?,
            message: r[14].clone(),
        })
    }
}

/// Squeezing reference: forces `±F e_x` from the series, zero torques.
pub(crate) fn brenner_reference(delta: f64) -> Result<ForceTorque> {
    let f = brenner_force(&BrennerParams::new(delta))?.force;
    Ok(ForceTorque {
        force: vec![Vector3::new(f, 0.0, 0.0), Vector3::new(-f, 0.0, 0.0)],
        torque: vec![Vector3::zeros(); 2],
    })
}

struct Cell {
    delta: f64,
    n_proxy: usize,
    r_proxy: f64,
    rule: ImageRule,
    seed: u64,
}

fn solve_cell(cfg: &ExperimentConfig, c: &Cell) -> Result<TwoSphereRow> {
    let params = SolverParams {
        n_proxy: c.n_proxy,
        r_proxy: c.r_proxy,
        image_rule: c.rule,
        ..cfg.params.clone()
    };
    let scene = scene_for_mode(&pair_centers(c.delta), cfg.mode, c.seed, cfg.shear_rate)?;
    let sys = System::build(&scene, &params)?;
    let res = sys.solve()?;
    let report = surface_residual(&scene, &res.sources, cfg.samples_per_sphere, c.seed)?;
    let force_error = if cfg.mode == BcMode::Squeeze {
        let ft = forces_torques(&res.sources, &scene);
        Some(force_torque_error(&ft, &brenner_reference(c.delta)?)?)
    } else {
        None
    };
    Ok(TwoSphereRow {
        delta: c.delta,
        n_proxy: c.n_proxy,
        r_proxy: c.r_proxy,
        image_rule: rule_label(&c.rule),
        mode: cfg.mode.name().into(),
        seed: c.seed,
        n_im: sys.plan.particles[0].contacts.first().map_or(0, |k| k.n_im),
        max_residual: report.max,
        force_error,
        max_strength: res.max_strength,
        iterations: res.iterations,
        converged: res.converged,
        n_unknowns: res.n_unknowns,
        status: CellStatus::from_converged(res.converged),
        message: String::new(),
    })
}

/// Two spheres over every combination of gap, proxy count, proxy radius and
/// image rule, writing `two_sphere.csv` in `cfg.out`.
pub fn run_two_sphere_sweep(cfg: &ExperimentConfig) -> Result<Vec<TwoSphereRow>> {
    cfg.validate()?;
    let table = ResumableTable::open(cfg.out.join("two_sphere.csv"), &HEADER, KEY_COLS)?;
    let mut cells = Vec::new();
    for &delta in &cfg.deltas {
        for &n_proxy in &cfg.n_proxy {
            for &r_proxy in &cfg.r_proxy {
                for rule in &cfg.image_rules {
                    for rep in 0..cfg.repetitions {
                        cells.push(Cell {
                            delta,
                            n_proxy,
                            r_proxy,
                            rule: *rule,
                            seed: cfg.seed + rep as u64,
                        });
                    }
                }
            }
        }
    }
    let rows = run_cells(cells.len(), cfg.workers, |i| -> Result<TwoSphereRow> {
        let c = &cells[i];
        let key = [
            c.delta.to_string(),
            c.n_proxy.to_string(),
            c.r_proxy.to_string(),
            rule_label(&c.rule),
            cfg.mode.name().to_string(),
            c.seed.to_string(),
        ]
        .join(",");
        if let Some(done) = table.completed(&key).and_then(|r| TwoSphereRow::parse(&r[0])) {
            return Ok(done);
        }
        let row = solve_cell(cfg, c).unwrap_or_else(|e| TwoSphereRow {
            delta: c.delta,
            n_proxy: c.n_proxy,
            r_proxy: c.r_proxy,
            image_rule: rule_label(&c.rule),
            mode: cfg.mode.name().into(),
            seed: c.seed,
            n_im: 0,
            max_residual: f64::NAN,
            force_error: None,
            max_strength: f64::NAN,
            iterations: 0,
            converged: false,
            n_unknowns: 0,
            status: CellStatus::Error,
            message: e.to_string(),
        });
        table.record(&key, vec![row.record()])?;
        Ok(row)
    });
    rows.into_iter().collect()
}
