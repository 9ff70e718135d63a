//! Free-space Stokes singularities and their superposition.
//!
//! Every kernel is written as a 3x3 matrix acting on the strength vector, so
//! the same code fills dense blocks and evaluates fields. The stresslet has
//! its direction `q` folded into the matrix.

use std::f64::consts::PI;

use nalgebra::{Matrix3, Vector3};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Point3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SourceKind {
    Stokeslet,
    Stresslet,
    Rotlet,
    Dipole,
}

impl SourceKind {
    pub const ALL: [SourceKind; 4] = [
        SourceKind::Stokeslet,
        SourceKind::Stresslet,
        SourceKind::Rotlet,
        SourceKind::Dipole,
    ];

    /// One-letter tag used in file output.
    pub fn tag(self) -> &'static str {
        match self {
            SourceKind::Stokeslet => "S",
            SourceKind::Stresslet => "T",
            SourceKind::Rotlet => "R",
            SourceKind::Dipole => "D",
        }
    }

    pub fn from_tag(tag: &str) -> Option<Self> {
        match tag {
            "S" => Some(SourceKind::Stokeslet),
            "T" => Some(SourceKind::Stresslet),
            "R" => Some(SourceKind::Rotlet),
            "D" => Some(SourceKind::Dipole),
            _ => None,
        }
    }
}

/// A single singularity. `strength` is `f`, `h`, `t` or `d` depending on
/// `kind`; stresslets also carry their fixed unit direction `q`.
#[derive(Clone, Debug, PartialEq)]
pub struct SourceEntry {
    pub kind: SourceKind,
    pub location: Point3,
    pub strength: Vector3<f64>,
    pub stress_direction: Option<Vector3<f64>>,
}

impl SourceEntry {
    pub fn new(kind: SourceKind, location: Point3, strength: Vector3<f64>) -> Self {
        Self {
            kind,
            location,
            strength,
            stress_direction: None,
        }
    }

    pub fn stokeslet(location: Point3, f: Vector3<f64>) -> Self {
        Self::new(SourceKind::Stokeslet, location, f)
    }

    pub fn rotlet(location: Point3, t: Vector3<f64>) -> Self {
        Self::new(SourceKind::Rotlet, location, t)
    }

    pub fn dipole(location: Point3, d: Vector3<f64>) -> Self {
        Self::new(SourceKind::Dipole, location, d)
    }

    pub fn stresslet(location: Point3, h: Vector3<f64>, q: Vector3<f64>) -> Self {
        Self {
            kind: SourceKind::Stresslet,
            location,
            strength: h,
            stress_direction: Some(q.normalize()),
        }
    }

    /// Response matrix at `x` to a unit strength of this entry.
    pub fn response(&self, x: &Point3, mu: f64) -> Result<Matrix3<f64>> {
        kernel_matrix(self.kind, &(x - self.location), self.stress_direction.as_ref(), mu)
    }
}

/// All singularities belonging to one particle.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SourceSet {
    pub particle: usize,
    pub entries: Vec<SourceEntry>,
}

impl SourceSet {
    pub fn new(particle: usize, entries: Vec<SourceEntry>) -> Self {
        Self { particle, entries }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn count(&self, kind: SourceKind) -> usize {
        self.entries.iter().filter(|e| e.kind == kind).count()
    }

    /// Strengths stacked as `[s_0x, s_0y, s_0z, s_1x, ...]`.
    pub fn strengths(&self) -> Vec<f64> {
        self.entries
            .iter()
            .flat_map(|e| [e.strength.x, e.strength.y, e.strength.z])
            .collect()
    }

    pub fn set_strengths(&mut self, lambda: &[f64]) {
        assert_eq!(lambda.len(), 3 * self.entries.len(), "strength vector length");
        for (e, s) in self.entries.iter_mut().zip(lambda.chunks_exact(3)) {
            e.strength = Vector3::new(s[0], s[1], s[2]);
        }
    }
}

fn nonzero(r: &Point3) -> Result<f64> {
    let n = r.norm();
    if n == 0.0 || !n.is_finite() {
        return Err(Error::SingularEvaluation(format!(
            "kernel evaluated at separation {n}"
        )));
    }
    Ok(n)
}

fn skew(v: &Vector3<f64>) -> Matrix3<f64> {
    Matrix3::new(0.0, -v.z, v.y, v.z, 0.0, -v.x, -v.y, v.x, 0.0)
}

pub fn stokeslet_matrix(r: &Point3, mu: f64) -> Result<Matrix3<f64>> {
    let n = nonzero(r)?;
    Ok((Matrix3::identity() + r * r.transpose() / (n * n)) / (8.0 * PI * mu * n))
}

pub fn rotlet_matrix(r: &Point3, mu: f64) -> Result<Matrix3<f64>> {
    let n = nonzero(r)?;
    // t x r = -[r]_x t
    Ok(-skew(r) / (8.0 * PI * mu * n * n * n))
}

pub fn stresslet_matrix(r: &Point3, q: &Vector3<f64>) -> Result<Matrix3<f64>> {
    let n = nonzero(r)?;
    let n2 = n * n;
    Ok(r * r.transpose() * (-6.0 * r.dot(q) / (n2 * n2 * n)))
}

pub fn dipole_matrix(r: &Point3) -> Result<Matrix3<f64>> {
    let n = nonzero(r)?;
    let n2 = n * n;
    let n3 = n2 * n;
    Ok((-Matrix3::identity() / n3 + r * r.transpose() * (3.0 / (n3 * n2))) / (4.0 * PI))
}

pub fn stokeslet(r: &Point3, f: &Vector3<f64>, mu: f64) -> Result<Vector3<f64>> {
    Ok(stokeslet_matrix(r, mu)? * f)
}

pub fn rotlet(r: &Point3, t: &Vector3<f64>, mu: f64) -> Result<Vector3<f64>> {
    Ok(rotlet_matrix(r, mu)? * t)
}

pub fn stresslet(r: &Point3, h: &Vector3<f64>, q: &Vector3<f64>) -> Result<Vector3<f64>> {
    Ok(stresslet_matrix(r, q)? * h)
}

pub fn potential_dipole(r: &Point3, d: &Vector3<f64>) -> Result<Vector3<f64>> {
    Ok(dipole_matrix(r)? * d)
}

/// Response matrix of a singularity of `kind` at separation `r = x - y`.
pub fn kernel_matrix(
    kind: SourceKind,
    r: &Point3,
    q: Option<&Vector3<f64>>,
    mu: f64,
) -> Result<Matrix3<f64>> {
    match kind {
        SourceKind::Stokeslet => stokeslet_matrix(r, mu),
        SourceKind::Rotlet => rotlet_matrix(r, mu),
        SourceKind::Dipole => dipole_matrix(r),
        SourceKind::Stresslet => {
            let q = q.ok_or_else(|| {
                Error::InvalidArgument("stresslet entry without a direction".into())
            })?;
            stresslet_matrix(r, q)
        }
    }
}

/// Velocity at `x` induced by every entry of `set`.
pub fn eval_sources(x: &Point3, set: &SourceSet, mu: f64) -> Result<Vector3<f64>> {
    let mut u = Vector3::zeros();
    for (idx, e) in set.entries.iter().enumerate() {
        let m = e.response(x, mu).map_err(|err| match err {
            Error::SingularEvaluation(_) => Error::SingularEvaluation(format!(
                "target coincides with source {idx} of particle {}",
                set.particle
            )),
            other => other,
        })?;
        u += m * e.strength;
    }
    Ok(u)
}

/// Structure-of-arrays copy of one kind of source, for fast summation.
/// Strengths are stored right-hand-side major: `sx[r * n + i]`.
#[derive(Clone, Debug, Default)]
struct Lane {
    x: Vec<f64>,
    y: Vec<f64>,
    z: Vec<f64>,
    sx: Vec<f64>,
    sy: Vec<f64>,
    sz: Vec<f64>,
    // Stresslet directions; empty for the other kinds.
    qx: Vec<f64>,
    qy: Vec<f64>,
    qz: Vec<f64>,
}

impl Lane {
    fn len(&self) -> usize {
        self.x.len()
    }

    fn strengths(&self, r: usize) -> (&[f64], &[f64], &[f64]) {
        let n = self.len();
        let range = r * n..(r + 1) * n;
        (&self.sx[range.clone()], &self.sy[range.clone()], &self.sz[range])
    }
}

/// Sources packed by kind for repeated evaluation at many targets, with
/// one or more strength vectors sharing the same locations.
///
/// Evaluation skips the singularity check; targets must be separated from
/// all sources (true for collocation points outside the proxy surfaces).
#[derive(Clone, Debug, Default)]
pub struct PackedSources {
    nrhs: usize,
    stokeslet: Lane,
    rotlet: Lane,
    stresslet: Lane,
    dipole: Lane,
}

impl PackedSources {
    /// Packs `entries` with strengths taken from the stacked vector
    /// `strengths` (three per entry).
    pub fn new(entries: &[SourceEntry], strengths: &[f64]) -> Self {
        Self::new_many(entries, &[strengths])
    }

    /// Packs `entries` once for several stacked strength vectors.
    pub fn new_many(entries: &[SourceEntry], strengths: &[&[f64]]) -> Self {
        for s in strengths {
            assert_eq!(s.len(), 3 * entries.len(), "strength vector length");
        }
        let mut p = PackedSources {
            nrhs: strengths.len(),
            ..Default::default()
        };
        for e in entries {
            let lane = p.lane_mut(e.kind);
            lane.x.push(e.location.x);
            lane.y.push(e.location.y);
            lane.z.push(e.location.z);
            if e.kind == SourceKind::Stresslet {
                let q = e.stress_direction.unwrap_or_else(Vector3::zeros);
                lane.qx.push(q.x);
                lane.qy.push(q.y);
                lane.qz.push(q.z);
            }
        }
        for s in strengths {
            for (e, v) in entries.iter().zip(s.chunks_exact(3)) {
                let lane = p.lane_mut(e.kind);
                lane.sx.push(v[0]);
                lane.sy.push(v[1]);
                lane.sz.push(v[2]);
            }
        }
        p
    }

    fn lane_mut(&mut self, kind: SourceKind) -> &mut Lane {
        match kind {
            SourceKind::Stokeslet => &mut self.stokeslet,
            SourceKind::Rotlet => &mut self.rotlet,
            SourceKind::Stresslet => &mut self.stresslet,
            SourceKind::Dipole => &mut self.dipole,
        }
    }

    pub fn from_set(set: &SourceSet) -> Self {
        Self::new(&set.entries, &set.strengths())
    }

    pub fn len(&self) -> usize {
        self.stokeslet.len() + self.rotlet.len() + self.stresslet.len() + self.dipole.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn nrhs(&self) -> usize {
        self.nrhs
    }

    /// Velocity at `x` for the first strength vector.
    pub fn velocity(&self, x: &Point3, mu: f64) -> Vector3<f64> {
        let mut out = vec![Vector3::zeros(); self.nrhs.max(1)];
        self.add_velocities(x, mu, &mut out);
        out[0]
    }

    /// Adds the velocity at `x` of every strength vector to `out[r]`.
    pub fn add_velocities(&self, x: &Point3, mu: f64, out: &mut [Vector3<f64>]) {
        assert!(out.len() >= self.nrhs, "one output per strength vector");
        let cs = 1.0 / (8.0 * PI * mu);
        let cd = 1.0 / (4.0 * PI);
        if self.nrhs == 1 {
            out[0] += sum_stokeslets(&self.stokeslet, x) * cs
                + sum_rotlets(&self.rotlet, x) * cs
                + sum_dipoles(&self.dipole, x) * cd
                + sum_stresslets(&self.stresslet, x);
            return;
        }
        SCRATCH.with(|cell| {
            let mut geo = cell.borrow_mut();
            if self.stokeslet.len() > 0 {
                geometry(&self.stokeslet, x, &mut geo);
                for (r, o) in out.iter_mut().take(self.nrhs).enumerate() {
                    *o += stokeslets_from(&self.stokeslet, r, &geo) * cs;
                }
            }
            if self.rotlet.len() > 0 {
                geometry(&self.rotlet, x, &mut geo);
                for (r, o) in out.iter_mut().take(self.nrhs).enumerate() {
                    *o += rotlets_from(&self.rotlet, r, &geo) * cs;
                }
            }
            if self.dipole.len() > 0 {
                geometry(&self.dipole, x, &mut geo);
                for (r, o) in out.iter_mut().take(self.nrhs).enumerate() {
                    *o += dipoles_from(&self.dipole, r, &geo) * cd;
                }
            }
            if self.stresslet.len() > 0 {
                geometry(&self.stresslet, x, &mut geo);
                for (r, o) in out.iter_mut().take(self.nrhs).enumerate() {
                    *o += stresslets_from(&self.stresslet, r, &geo);
                }
            }
        });
    }

    /// Velocities (first strength vector) at all `targets`, in parallel.
    pub fn velocities(&self, targets: &[Point3], mu: f64) -> Vec<Vector3<f64>> {
        targets.par_iter().map(|x| self.velocity(x, mu)).collect()
    }
}

// Separation vectors and inverse distance of one target from every source
// of a lane, shared by all strength vectors.
#[derive(Default)]
struct Geometry {
    rx: Vec<f64>,
    ry: Vec<f64>,
    rz: Vec<f64>,
    inv: Vec<f64>,
}

thread_local! {
    static SCRATCH: std::cell::RefCell<Geometry> = std::cell::RefCell::new(Geometry::default());
}

fn geometry(l: &Lane, x: &Point3, g: &mut Geometry) {
    let n = l.len();
    g.rx.clear();
    g.ry.clear();
    g.rz.clear();
    g.inv.clear();
    g.rx.extend(l.x.iter().map(|v| x.x - v));
    g.ry.extend(l.y.iter().map(|v| x.y - v));
    g.rz.extend(l.z.iter().map(|v| x.z - v));
    g.inv.resize(n, 0.0);
    let (rx, ry, rz) = (&g.rx[..n], &g.ry[..n], &g.rz[..n]);
    for (i, inv) in g.inv.iter_mut().enumerate() {
        *inv = 1.0 / (rx[i] * rx[i] + ry[i] * ry[i] + rz[i] * rz[i]).sqrt();
    }
}

// The loops below keep to plain indexed arithmetic on slices so that the
// compiler can vectorize them.

fn stokeslets_from(l: &Lane, r: usize, g: &Geometry) -> Vector3<f64> {
    let n = l.len();
    let (fx, fy, fz) = l.strengths(r);
    let (rx, ry, rz, inv) = (&g.rx[..n], &g.ry[..n], &g.rz[..n], &g.inv[..n]);
    let (mut ux, mut uy, mut uz) = (0.0, 0.0, 0.0);
    for i in 0..n {
        let inv3 = inv[i] * inv[i] * inv[i];
        let rf = (rx[i] * fx[i] + ry[i] * fy[i] + rz[i] * fz[i]) * inv3;
        ux += fx[i] * inv[i] + rx[i] * rf;
        uy += fy[i] * inv[i] + ry[i] * rf;
        uz += fz[i] * inv[i] + rz[i] * rf;
    }
    Vector3::new(ux, uy, uz)
}

fn rotlets_from(l: &Lane, r: usize, g: &Geometry) -> Vector3<f64> {
    let n = l.len();
    let (tx, ty, tz) = l.strengths(r);
    let (rx, ry, rz, inv) = (&g.rx[..n], &g.ry[..n], &g.rz[..n], &g.inv[..n]);
    let (mut ux, mut uy, mut uz) = (0.0, 0.0, 0.0);
    for i in 0..n {
        let inv3 = inv[i] * inv[i] * inv[i];
        ux += (ty[i] * rz[i] - tz[i] * ry[i]) * inv3;
        uy += (tz[i] * rx[i] - tx[i] * rz[i]) * inv3;
        uz += (tx[i] * ry[i] - ty[i] * rx[i]) * inv3;
    }
    Vector3::new(ux, uy, uz)
}

fn dipoles_from(l: &Lane, r: usize, g: &Geometry) -> Vector3<f64> {
    let n = l.len();
    let (dx, dy, dz) = l.strengths(r);
    let (rx, ry, rz, inv) = (&g.rx[..n], &g.ry[..n], &g.rz[..n], &g.inv[..n]);
    let (mut ux, mut uy, mut uz) = (0.0, 0.0, 0.0);
    for i in 0..n {
        let inv2 = inv[i] * inv[i];
        let inv3 = inv2 * inv[i];
        let rd = 3.0 * (rx[i] * dx[i] + ry[i] * dy[i] + rz[i] * dz[i]) * inv2;
        ux += (rx[i] * rd - dx[i]) * inv3;
        uy += (ry[i] * rd - dy[i]) * inv3;
        uz += (rz[i] * rd - dz[i]) * inv3;
    }
    Vector3::new(ux, uy, uz)
}

fn stresslets_from(l: &Lane, r: usize, g: &Geometry) -> Vector3<f64> {
    let n = l.len();
    let (hx, hy, hz) = l.strengths(r);
    let (qx, qy, qz) = (&l.qx[..n], &l.qy[..n], &l.qz[..n]);
    let (rx, ry, rz, inv) = (&g.rx[..n], &g.ry[..n], &g.rz[..n], &g.inv[..n]);
    let (mut ux, mut uy, mut uz) = (0.0, 0.0, 0.0);
    for i in 0..n {
        let inv2 = inv[i] * inv[i];
        let inv5 = inv2 * inv2 * inv[i];
        let c = -6.0
            * (rx[i] * hx[i] + ry[i] * hy[i] + rz[i] * hz[i])
            * (rx[i] * qx[i] + ry[i] * qy[i] + rz[i] * qz[i])
            * inv5;
        ux += rx[i] * c;
        uy += ry[i] * c;
        uz += rz[i] * c;
    }
    Vector3::new(ux, uy, uz)
}

// Single strength vector: fused loops without the geometry buffer.

fn sum_stokeslets(l: &Lane, x: &Point3) -> Vector3<f64> {
    let n = l.len();
    let (lx, ly, lz) = (&l.x[..n], &l.y[..n], &l.z[..n]);
    let (fx, fy, fz) = l.strengths(0);
    let (mut ux, mut uy, mut uz) = (0.0, 0.0, 0.0);
    for i in 0..n {
        let rx = x.x - lx[i];
        let ry = x.y - ly[i];
        let rz = x.z - lz[i];
        let inv = 1.0 / (rx * rx + ry * ry + rz * rz).sqrt();
        let inv3 = inv * inv * inv;
        let rf = (rx * fx[i] + ry * fy[i] + rz * fz[i]) * inv3;
        ux += fx[i] * inv + rx * rf;
        uy += fy[i] * inv + ry * rf;
        uz += fz[i] * inv + rz * rf;
    }
    Vector3::new(ux, uy, uz)
}

fn sum_rotlets(l: &Lane, x: &Point3) -> Vector3<f64> {
    let n = l.len();
    let (lx, ly, lz) = (&l.x[..n], &l.y[..n], &l.z[..n]);
    let (tx, ty, tz) = l.strengths(0);
    let (mut ux, mut uy, mut uz) = (0.0, 0.0, 0.0);
    for i in 0..n {
        let rx = x.x - lx[i];
        let ry = x.y - ly[i];
        let rz = x.z - lz[i];
        let inv = 1.0 / (rx * rx + ry * ry + rz * rz).sqrt();
        let inv3 = inv * inv * inv;
        ux += (ty[i] * rz - tz[i] * ry) * inv3;
        uy += (tz[i] * rx - tx[i] * rz) * inv3;
        uz += (tx[i] * ry - ty[i] * rx) * inv3;
    }
    Vector3::new(ux, uy, uz)
}

fn sum_dipoles(l: &Lane, x: &Point3) -> Vector3<f64> {
    let n = l.len();
    let (lx, ly, lz) = (&l.x[..n], &l.y[..n], &l.z[..n]);
    let (dx, dy, dz) = l.strengths(0);
    let (mut ux, mut uy, mut uz) = (0.0, 0.0, 0.0);
    for i in 0..n {
        let rx = x.x - lx[i];
        let ry = x.y - ly[i];
        let rz = x.z - lz[i];
        let inv = 1.0 / (rx * rx + ry * ry + rz * rz).sqrt();
        let inv2 = inv * inv;
        let inv3 = inv2 * inv;
        let rd = 3.0 * (rx * dx[i] + ry * dy[i] + rz * dz[i]) * inv2;
        ux += (rx * rd - dx[i]) * inv3;
        uy += (ry * rd - dy[i]) * inv3;
        uz += (rz * rd - dz[i]) * inv3;
    }
    Vector3::new(ux, uy, uz)
}

fn sum_stresslets(l: &Lane, x: &Point3) -> Vector3<f64> {
    let n = l.len();
    let (lx, ly, lz) = (&l.x[..n], &l.y[..n], &l.z[..n]);
    let (hx, hy, hz) = l.strengths(0);
    let (qx, qy, qz) = (&l.qx[..n], &l.qy[..n], &l.qz[..n]);
    let (mut ux, mut uy, mut uz) = (0.0, 0.0, 0.0);
    for i in 0..n {
        let rx = x.x - lx[i];
        let ry = x.y - ly[i];
        let rz = x.z - lz[i];
        let inv = 1.0 / (rx * rx + ry * ry + rz * rz).sqrt();
        let inv2 = inv * inv;
        let inv5 = inv2 * inv2 * inv;
        let c = -6.0
            * (rx * hx[i] + ry * hy[i] + rz * hz[i])
            * (rx * qx[i] + ry * qy[i] + rz * qz[i])
            * inv5;
        ux += rx * c;
        uy += ry * c;
        uz += rz * c;
    }
    Vector3::new(ux, uy, uz)
}
