use serde::{Deserialize, Serialize};

use super::{rule_label, run_cells, scene_for_mode, CellStatus, ExperimentConfig, ResumableTable};
use crate::adaptive::{ImageRule, SolverParams};
use crate::error::Result;
use crate::geometry::{grow_cluster, random_layer, Point3};
use crate::postprocess::surface_residual;
use crate::scene_io::fmt_f64;
use crate::system::System;

/// How cluster geometries are generated.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClusterKind {
    /// Each sphere attached to an earlier one at gap exactly `δ`.
    #[default]
    Grown,
    /// Random placement in a thin layer of fixed areal density, gaps at
    /// least `δ`.
    Layer,
}

impl ClusterKind {
    pub fn name(self) -> &'static str {
        match self {
            ClusterKind::Grown => "grown",
            ClusterKind::Layer => "layer",
        }
    }
}

/// Layer area per sphere; about one sphere per 12 units keeps layers dilute.
const LAYER_AREA_PER_SPHERE: f64 = 12.0;

pub fn cluster_centers(kind: ClusterKind, p: usize, delta: f64, seed: u64) -> Result<Vec<Point3>> {
    match kind {
        ClusterKind::Grown => grow_cluster(p, delta, seed),
        ClusterKind::Layer => random_layer(p, (p as f64 * LAYER_AREA_PER_SPHERE).sqrt(), delta, seed),
    }
}

const HEADER: [&str; 18] = [
    "particles",
    "delta",
    "kind",
    "mode",
    "image_rule",
    "rep",
    "seed",
    "max_residual",
    "max_scaled_residual",
    "iterations",
    "max_strength",
    "n_unknowns",
    "n_equations",
    "templates",
    "images_per_particle",
    "colloc_per_particle",
    "status",
    "message",
];
const KEY_COLS: usize = 7;

#[derive(Clone, Debug, PartialEq)]
pub struct ClusterRow {
    pub particles: usize,
    pub delta: f64,
    pub kind: String,
    pub mode: String,
    pub image_rule: String,
    pub rep: usize,
    pub seed: u64,
    pub max_residual: f64,
    pub max_scaled_residual: f64,
    pub iterations: usize,
    pub max_strength: f64,
    pub n_unknowns: usize,
    pub n_equations: usize,
    pub templates: usize,
    pub images_per_particle: Vec<usize>,
    pub colloc_per_particle: Vec<usize>,
    pub status: CellStatus,
    pub message: String,
}

fn join(v: &[usize]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(";")
}

fn split(s: &str) -> Option<Vec<usize>> {
    if s.is_empty() {
        return Some(Vec::new());
    }
    s.split(';').map(|x| x.parse().ok()).collect()
}

impl ClusterRow {
    fn record(&self) -> Vec<String> {
        vec![
            self.particles.to_string(),
            self.delta.to_string(),
            self.kind.clone(),
            self.mode.clone(),
            self.image_rule.clone(),
            self.rep.to_string(),
            self.seed.to_string(),
            fmt_f64(self.max_residual),
            fmt_f64(self.max_scaled_residual),
            self.iterations.to_string(),
            fmt_f64(self.max_strength),
            self.n_unknowns.to_string(),
            self.n_equations.to_string(),
            self.templates.to_string(),
            join(&self.images_per_particle),
            join(&self.colloc_per_particle),
            self.status.as_str().into(),
            self.message.clone(),
        ]
    }

    fn parse(r: &[String]) -> Option<Self> {
        Some(ClusterRow {
            particles: r[0].parse().ok()?,
            delta: r[1].parse().ok()?,
            kind: r[2].clone(),
            mode: r[3].clone(),
            image_rule: r[4].clone(),
            rep: r[5].parse().ok()?,
            seed: r[6].parse().ok()?,
            max_residual: r[7].parse().ok()?,
            max_scaled_residual: r[8].parse().ok()?,
            iterations: r[9].parse().ok()?,
            max_strength: r[10].parse().ok()?,
            n_unknowns: r[11].parse().ok()?,
            n_equations: r[12].parse().ok()?,
            templates: r[13].parse().ok()?,
            images_per_particle: split(&r[14])?,
            colloc_per_particle: split(&r[15])?,
            status: CellStatus::parse(&r[16])?,
            message: r[17].clone(),
        })
    }
}

struct Cell {
    p: usize,
    delta: f64,
    rule: ImageRule,
    rep: usize,
    seed: u64,
}

fn solve_cell(cfg: &ExperimentConfig, c: &Cell) -> Result<ClusterRow> {
    let params = SolverParams {
        image_rule: c.rule,
        ..cfg.params.clone()
    };
    let centers = cluster_centers(cfg.cluster_kind, c.p, c.delta, c.seed)?;
    let scene = scene_for_mode(&centers, cfg.mode, c.seed, cfg.shear_rate)?;
    let sys = System::build(&scene, &params)?;
    let res = sys.solve()?;
    let report = surface_residual(&scene, &res.sources, cfg.samples_per_sphere, c.seed)?;
    Ok(ClusterRow {
        particles: c.p,
        delta: c.delta,
        kind: cfg.cluster_kind.name().into(),
        mode: cfg.mode.name().into(),
        image_rule: rule_label(&c.rule),
        rep: c.rep,
        seed: c.seed,
        max_residual: report.max,
        max_scaled_residual: report.max_scaled,
        iterations: res.iterations,
        max_strength: res.max_strength,
        n_unknowns: res.n_unknowns,
        n_equations: res.n_equations,
        templates: sys.distinct_templates(),
        images_per_particle: sys.plan.particles.iter().map(|p| p.total_images()).collect(),
        colloc_per_particle: sys.plan.particles.iter().map(|p| p.m_total).collect(),
        status: CellStatus::from_converged(res.converged),
        message: String::new(),
    })
}

/// Random clusters over particle counts, gaps and image rules. Writes
/// `cluster.csv`.
pub fn run_cluster(cfg: &ExperimentConfig) -> Result<Vec<ClusterRow>> {
    cfg.validate()?;
    let table = ResumableTable::open(cfg.out.join("cluster.csv"), &HEADER, KEY_COLS)?;
    let mut cells = Vec::new();
    for &p in &cfg.particles {
        for &delta in &cfg.deltas {
            for rule in &cfg.image_rules {
                for rep in 0..cfg.repetitions {
                    cells.push(Cell {
                        p,
                        delta,
                        rule: *rule,
                        rep,
                        seed: cfg.seed + rep as u64,
                    });
                }
            }
        }
    }
    let rows = run_cells(cells.len(), cfg.workers, |i| -> Result<ClusterRow> {
        let c = &cells[i];
        let key = [
            c.p.to_string(),
            c.delta.to_string(),
            cfg.cluster_kind.name().to_string(),
            cfg.mode.name().to_string(),
            rule_label(&c.rule),
            c.rep.to_string(),
            c.seed.to_string(),
        ]
        .join(",");
        if let Some(done) = table.completed(&key).and_then(|r| ClusterRow::parse(&r[0])) {
            return Ok(done);
        }
        let row = solve_cell(cfg, c).unwrap_or_else(|e| ClusterRow {
            particles: c.p,
            delta: c.delta,
            kind: cfg.cluster_kind.name().into(),
            mode: cfg.mode.name().into(),
            image_rule: rule_label(&c.rule),
            rep: c.rep,
            seed: c.seed,
            max_residual: f64::NAN,
            max_scaled_residual: f64::NAN,
            iterations: 0,
            max_strength: f64::NAN,
            n_unknowns: 0,
            n_equations: 0,
            templates: 0,
            images_per_particle: Vec::new(),
            colloc_per_particle: Vec::new(),
            status: CellStatus::Error,
            message: e.to_string(),
        });
        table.record(&key, vec![row.record()])?;
        Ok(row)
    });
    rows.into_iter().collect()
}
