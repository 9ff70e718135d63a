//! Scene and parameter files (JSON) and CSV result output.
//!
//! Scene layout:
//!
//! ```json
//! {
//!   "fluid": { "viscosity": 1.0 },
//!   "background": { "kind": "shear", "rate": 5.0 },
//!   "spheres": [
//!     { "center": [0, 0, 0], "velocity": [1, 0, 0], "angular_velocity": [0, 0, 0] }
//!   ]
//! }
//! ```
//!
//! `fluid`, `background`, `velocity` and `angular_velocity` are optional.

use std::fs;
use std::path::{Path, PathBuf};

use nalgebra::Vector3;
use serde_json::{Map, Value};

use crate::adaptive::SolverParams;
use crate::boundary::{BackgroundFlow, Scene, SphereState};
use crate::error::{Error, Result};
use crate::kernels::{SourceEntry, SourceKind, SourceSet};
use crate::postprocess::{ForceTorque, ResidualReport};
use crate::system::SolveResult;

fn schema(path: &str, msg: impl Into<String>) -> Error {
    Error::Schema {
        path: path.into(),
        msg: msg.into(),
    }
}

fn object<'a>(v: &'a Value, path: &str) -> Result<&'a Map<String, Value>> {
    v.as_object().ok_or_else(|| schema(path, "expected an object"))
}

fn check_keys(map: &Map<String, Value>, path: &str, allowed: &[&str]) -> Result<()> {
    for k in map.keys() {
        if !allowed.contains(&k.as_str()) {
            return Err(schema(&format!("{path}.{k}"), "unknown field"));
        }
    }
    Ok(())
}

fn number(v: &Value, path: &str) -> Result<f64> {
    let x = v.as_f64().ok_or_else(|| schema(path, "expected a number"))?;
    if !x.is_finite() {
        return Err(schema(path, "must be finite"));
    }
    Ok(x)
}

fn vector(v: &Value, path: &str) -> Result<Vector3<f64>> {
    let a = v.as_array().ok_or_else(|| schema(path, "expected an array of 3 numbers"))?;
    if a.len() != 3 {
        return Err(schema(path, format!("expected 3 components, found {}", a.len())));
    }
    Ok(Vector3::new(
        number(&a[0], &format!("{path}[0]"))?,
        number(&a[1], &format!("{path}[1]"))?,
        number(&a[2], &format!("{path}[2]"))?,
    ))
}

fn parse_background(v: &Value) -> Result<BackgroundFlow> {
    let map = object(v, "background")?;
    let kind = map
        .get("kind")
        .ok_or_else(|| schema("background.kind", "missing"))?
        .as_str()
        .ok_or_else(|| schema("background.kind", "expected a string"))?;
    match kind {
        "none" => {
            check_keys(map, "background", &["kind"])?;
            Ok(BackgroundFlow::None)
        }
        "uniform" => {
            check_keys(map, "background", &["kind", "velocity"])?;
            let u = map
                .get("velocity")
                .ok_or_else(|| schema("background.velocity", "missing"))?;
            Ok(BackgroundFlow::Uniform {
                velocity: vector(u, "background.velocity")?,
            })
        }
        "shear" => {
            check_keys(map, "background", &["kind", "rate"])?;
            let r = map.get("rate").ok_or_else(|| schema("background.rate", "missing"))?;
            Ok(BackgroundFlow::Shear {
                rate: number(r, "background.rate")?,
            })
        }
        other => Err(schema(
            "background.kind",
            format!("unknown kind `{other}` (expected none, uniform or shear)"),
        )),
    }
}

fn parse_sphere(v: &Value, i: usize) -> Result<SphereState> {
    let path = format!("spheres[{i}]");
    let map = object(v, &path)?;
    check_keys(map, &path, &["center", "velocity", "angular_velocity"])?;
    let center = map
        .get("center")
        .ok_or_else(|| schema(&format!("{path}.center"), "missing"))?;
    let opt = |key: &str| -> Result<Vector3<f64>> {
        map.get(key)
            .map_or(Ok(Vector3::zeros()), |v| vector(v, &format!("{path}.{key}")))
    };
    Ok(SphereState {
        center: vector(center, &format!("{path}.center"))?,
        velocity: opt("velocity")?,
        angular_velocity: opt("angular_velocity")?,
    })
}

pub fn parse_scene(text: &str) -> Result<Scene> {
    let root: Value = serde_json::from_str(text).map_err(|e| Error::Parse {
        line: e.line(),
        msg: e.to_string(),
    })?;
    let map = object(&root, "$")?;
    check_keys(map, "$", &["fluid", "background", "spheres"])?;
    let viscosity = match map.get("fluid") {
        None => 1.0,
        Some(f) => {
            let fm = object(f, "fluid")?;
            check_keys(fm, "fluid", &["viscosity"])?;
            fm.get("viscosity")
                .map_or(Ok(1.0), |v| number(v, "fluid.viscosity"))?
        }
    };
    let background = map.get("background").map_or(Ok(BackgroundFlow::None), parse_background)?;
    let spheres = map
        .get("spheres")
        .ok_or_else(|| schema("spheres", "missing"))?
        .as_array()
        .ok_or_else(|| schema("spheres", "expected an array"))?
        .iter()
        .enumerate()
        .map(|(i, s)| parse_sphere(s, i))
        .collect::<Result<Vec<_>>>()?;
    if spheres.is_empty() {
        return Err(schema("spheres", "at least one sphere is required"));
    }
    Scene::new(viscosity, background, spheres)
}

pub fn load_scene(path: impl AsRef<Path>) -> Result<Scene> {
    let path = path.as_ref();
    parse_scene(&fs::read_to_string(path).map_err(|e| Error::io(path, e))?)
}

/// Full-precision number text that parses back to the same double.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn fmt_vec(v: &Vector3<f64>) -> String {
    format!("[{}, {}, {}]", fmt_f64(v.x), fmt_f64(v.y), fmt_f64(v.z))
}

pub fn serialize_scene(scene: &Scene) -> String {
    let mut s = String::from("{\n");
    s += &format!("  \"fluid\": {{ \"viscosity\": {} }},\n", fmt_f64(scene.viscosity));
    s += &match scene.background {
        BackgroundFlow::None => "  \"background\": { \"kind\": \"none\" },\n".to_string(),
        BackgroundFlow::Uniform { velocity } => format!(
            "  \"background\": {{ \"kind\": \"uniform\", \"velocity\": {} }},\n",
            fmt_vec(&velocity)
        ),
        BackgroundFlow::Shear { rate } => format!(
            "  \"background\": {{ \"kind\": \"shear\", \"rate\": {} }},\n",
            fmt_f64(rate)
        ),
    };
    s += "  \"spheres\": [\n";
    let rows: Vec<String> = scene
        .spheres
        .iter()
        .map(|sp| {
            format!(
                "    {{ \"center\": {}, \"velocity\": {}, \"angular_velocity\": {} }}",
                fmt_vec(&sp.center),
                fmt_vec(&sp.velocity),
                fmt_vec(&sp.angular_velocity)
            )
        })
        .collect();
    s += &rows.join(",\n");
    s += "\n  ]\n}\n";
    s
}

/// Solver parameters; missing fields take their defaults.
pub fn parse_params(text: &str) -> Result<SolverParams> {
    let text = if text.trim().is_empty() { "{}" } else { text };
    let params: SolverParams = serde_json::from_str(text).map_err(|e| Error::Parse {
        line: e.line(),
        msg: e.to_string(),
    })?;
    params.validate()?;
    Ok(params)
}

pub fn load_params(path: impl AsRef<Path>) -> Result<SolverParams> {
    let path = path.as_ref();
    parse_params(&fs::read_to_string(path).map_err(|e| Error::io(path, e))?)
}

pub fn serialize_params(params: &SolverParams) -> String {
    serde_json::to_string_pretty(params).expect("parameters serialize")
}

fn csv_writer(path: &Path) -> Result<csv::Writer<fs::File>> {
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    Ok(csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(file))
}

fn csv_err(path: &Path, e: csv::Error) -> Error {
    Error::io(path, std::io::Error::other(e.to_string()))
}

fn write_rows(path: &Path, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    let mut w = csv_writer(path)?;
    w.write_record(header).map_err(|e| csv_err(path, e))?;
    for r in rows {
        w.write_record(r).map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Paths written by [`write_results`].
#[derive(Clone, Debug)]
pub struct ResultFiles {
    pub forces_torques: PathBuf,
    pub residuals: PathBuf,
    pub solve_meta: PathBuf,
    pub strengths: PathBuf,
}

impl ResultFiles {
    pub fn in_dir(dir: &Path) -> Self {
        ResultFiles {
            forces_torques: dir.join("forces_torques.csv"),
            residuals: dir.join("residuals.csv"),
            solve_meta: dir.join("solve_meta.csv"),
            strengths: dir.join("strengths.csv"),
        }
    }
}

/// Writes the four result tables into `dir`, creating it if needed.
/// Timing columns live only in `solve_meta.csv`.
pub fn write_results(
    result: &SolveResult,
    ft: &ForceTorque,
    report: &ResidualReport,
    dir: impl AsRef<Path>,
) -> Result<ResultFiles> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let files = ResultFiles::in_dir(dir);

    let rows: Vec<Vec<String>> = ft
        .force
        .iter()
        .zip(&ft.torque)
        .enumerate()
        .map(|(k, (f, t))| {
            let mut r = vec![k.to_string()];
            r.extend(f.iter().chain(t.iter()).map(|v| fmt_f64(*v)));
            r
        })
        .collect();
    write_rows(&files.forces_torques, &["particle", "Fx", "Fy", "Fz", "Tx", "Ty", "Tz"], &rows)?;

    let rows: Vec<Vec<String>> = report
        .per_particle_max
        .iter()
        .enumerate()
        .map(|(k, r)| vec![k.to_string(), fmt_f64(*r)])
        .collect();
    write_rows(&files.residuals, &["particle", "max_residual"], &rows)?;

    let meta = vec![vec![
        result.iterations.to_string(),
        fmt_f64(result.final_residual()),
        result.converged.to_string(),
        result.n_unknowns.to_string(),
        result.n_equations.to_string(),
        fmt_f64(result.max_strength),
        fmt_f64(report.max),
        report.samples_per_sphere.to_string(),
        report.seed.to_string(),
        format!("{:.6}", result.wall_time),
        format!("{:.6}", result.setup_time),
        format!("{:.6}", result.gmres_time),
    ]];
    write_rows(
        &files.solve_meta,
        &[
            "iterations",
            "final_residual",
            "converged",
            "n_unknowns",
            "n_equations",
            "max_strength",
            "max_residual",
            "samples_per_sphere",
            "seed",
            "wall_time",
            "setup_time",
            "gmres_time",
        ],
        &meta,
    )?;

    write_strengths(&result.sources, &files.strengths)?;
    Ok(files)
}

pub fn write_strengths(sources: &[SourceSet], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut rows = Vec::new();
    for s in sources {
        for e in &s.entries {
            let q = e.stress_direction.unwrap_or_else(Vector3::zeros);
            let mut r = vec![s.particle.to_string(), e.kind.tag().to_string()];
            r.extend(e.location.iter().chain(e.strength.iter()).chain(q.iter()).map(|v| fmt_f64(*v)));
            rows.push(r);
        }
    }
    write_rows(
        path,
        &["particle", "kind", "x", "y", "z", "sx", "sy", "sz", "qx", "qy", "qz"],
        &rows,
    )
}

/// Reads a strengths table back into per-particle source sets.
pub fn read_strengths(path: impl AsRef<Path>) -> Result<Vec<SourceSet>> {
    let path = path.as_ref();
    let mut rdr = csv::Reader::from_path(path).map_err(|e| csv_err(path, e))?;
    let mut sets: Vec<SourceSet> = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let line = i + 2;
        let rec = rec.map_err(|e| Error::Parse { line, msg: e.to_string() })?;
        if rec.len() != 11 {
            return Err(Error::Parse {
                line,
                msg: format!("expected 11 fields, found {}", rec.len()),
            });
        }
        let particle: usize = rec[0].parse().map_err(|_| Error::Parse {
            line,
            msg: format!("bad particle index `{}`", &rec[0]),
        })?;
        let kind = SourceKind::from_tag(&rec[1]).ok_or_else(|| Error::Parse {
            line,
            msg: format!("unknown source kind `{}`", &rec[1]),
        })?;
        let mut v = [0.0; 9];
        for (j, slot) in v.iter_mut().enumerate() {
            *slot = rec[j + 2].parse().map_err(|_| Error::Parse {
                line,
                msg: format!("bad number `{}`", &rec[j + 2]),
            })?;
        }
        let loc = Vector3::new(v[0], v[1], v[2]);
        let s = Vector3::new(v[3], v[4], v[5]);
        let entry = match kind {
            SourceKind::Stresslet => SourceEntry::stresslet(loc, s, Vector3::new(v[6], v[7], v[8])),
            k => SourceEntry::new(k, loc, s),
        };
        if particle > sets.len() {
            return Err(Error::Parse {
                line,
                msg: format!("particle {particle} appears before particle {}", sets.len()),
            });
        }
        if particle == sets.len() {
            sets.push(SourceSet::new(particle, Vec::new()));
        }
        sets[particle].entries.push(entry);
    }
    Ok(sets)
}
