use super::{rule_label, run_cells, scene_for_mode, tetrahedron_centers, BcMode, CellStatus, ExperimentConfig, ResumableTable};
use crate::adaptive::SolverParams;
use crate::error::{Error, Result};
use crate::scene_io::fmt_f64;
use crate::system::System;

const HEADER: [&str; 9] = [
    "delta",
    "image_rule",
    "seed",
    "iterations",
    "final_residual",
    "converged",
    "n_unknowns",
    "status",
    "message",
];
const KEY_COLS: usize = 3;

#[derive(Clone, Debug, PartialEq)]
pub struct IterationRow {
    pub delta: f64,
    pub image_rule: String,
    pub seed: u64,
    pub iterations: usize,
    pub final_residual: f64,
    pub converged: bool,
    pub n_unknowns: usize,
    pub status: CellStatus,
    pub message: String,
}

impl IterationRow {
    fn record(&self) -> Vec<String> {
        vec![
            self.delta.to_string(),
            self.image_rule.clone(),
            self.seed.to_string(),
            self.iterations.to_string(),
            fmt_f64(self.final_residual),
            self.converged.to_string(),
            self.n_unknowns.to_string(),
            self.status.as_str().into(),
            self.message.clone(),
        ]
    }

    fn parse(r: &[String]) -> Option<Self> {
        Some(IterationRow {
            delta: r[0].parse().ok()?,
            image_rule: r[1].clone(),
            seed: r[2].parse().ok()?,
            iterations: r[3].parse().ok()?,
            final_residual: r[4].parse().ok()?,
            converged: r[5].parse().ok()?,
            n_unknowns: r[6].parse().ok()?,
            status: CellStatus::parse(&r[7])?,
            message: r[8].clone(),
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct IterationReport {
    pub rows: Vec<IterationRow>,
    /// `p` in `iterations ~ δ^(-p)`, fitted over rows with status `ok`.
    /// `None` with fewer than two distinct gaps.
    pub exponent: Option<f64>,
}

/// Least-squares slope of `ln y` against `ln(1/x)`.
pub fn fit_power_law(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::InvalidArgument(format!("{} abscissae, {} ordinates", x.len(), y.len())));
    }
    if x.iter().chain(y).any(|v| !(*v > 0.0)) {
        return Err(Error::InvalidArgument("power-law fit needs positive data".into()));
    }
    let n = x.len() as f64;
    let u: Vec<f64> = x.iter().map(|v| -v.ln()).collect();
    let w: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let (mu, mw) = (u.iter().sum::<f64>() / n, w.iter().sum::<f64>() / n);
    let sxx: f64 = u.iter().map(|a| (a - mu).powi(2)).sum();
    if x.len() < 2 || sxx <= 0.0 {
        return Err(Error::InvalidArgument("power-law fit needs two distinct abscissae".into()));
    }
    let sxy: f64 = u.iter().zip(&w).map(|(a, b)| (a - mu) * (b - mw)).sum();
    Ok(sxy / sxx)
}

fn solve_cell(cfg: &ExperimentConfig, params: &SolverParams, delta: f64) -> Result<IterationRow> {
    let scene = scene_for_mode(&tetrahedron_centers(delta), BcMode::RandomRigid, cfg.seed, cfg.shear_rate)?;
    let sys = System::build(&scene, params)?;
    let res = sys.solve()?;
    Ok(IterationRow {
        delta,
        image_rule: rule_label(&params.image_rule),
        seed: cfg.seed,
        iterations: res.iterations,
        final_residual: res.final_residual(),
        converged: res.converged,
        n_unknowns: res.n_unknowns,
        status: CellStatus::from_converged(res.converged),
        message: String::new(),
    })
}

/// GMRES iteration counts for the tetrahedron with fixed random rigid data
/// as the gap shrinks. Writes `iter_scaling.csv`.
pub fn run_iteration_scaling(cfg: &ExperimentConfig) -> Result<IterationReport> {
    cfg.validate()?;
    let table = ResumableTable::open(cfg.out.join("iter_scaling.csv"), &HEADER, KEY_COLS)?;
    let params = SolverParams {
        image_rule: cfg.image_rules[0],
        ..cfg.params.clone()
    };
    let rows = run_cells(cfg.deltas.len(), cfg.workers, |i| -> Result<IterationRow> {
        let delta = cfg.deltas[i];
        let key = format!("{delta},{},{}", rule_label(&params.image_rule), cfg.seed);
        if let Some(done) = table.completed(&key).and_then(|r| IterationRow::parse(&r[0])) {
            return Ok(done);
        }
        let row = solve_cell(cfg, &params, delta).unwrap_or_else(|e| IterationRow {
            delta,
            image_rule: rule_label(&params.image_rule),
            seed: cfg.seed,
            iterations: 0,
            final_residual: f64::NAN,
            converged: false,
            n_unknowns: 0,
            status: CellStatus::Error,
            message: e.to_string(),
        });
        table.record(&key, vec![row.record()])?;
        Ok(row)
    });
    let rows = rows.into_iter().collect::<Result<Vec<_>>>()?;
    let ok: Vec<&IterationRow> = rows.iter().filter(|r| r.status == CellStatus::Ok).collect();
    let x: Vec<f64> = ok.iter().map(|r| r.delta).collect();
    let y: Vec<f64> = ok.iter().map(|r| r.iterations as f64).collect();
    let exponent = fit_power_law(&x, &y).ok();
    Ok(IterationReport { rows, exponent })
}
