//! Quantities derived from a solution: forces and torques, flow fields,
//! surface residuals and streamlines.

use nalgebra::Vector3;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::boundary::{background_velocity, rigid_velocity, Scene};
use crate::error::{Error, Result};
use crate::geometry::{fibonacci_sphere, random_rotation, Point3};
use crate::kernels::{PackedSources, SourceEntry, SourceKind, SourceSet};

/// Net force and torque (about the center) exerted on the fluid by each
/// particle.
#[derive(Clone, Debug, PartialEq)]
pub struct ForceTorque {
    pub force: Vec<Vector3<f64>>,
    pub torque: Vec<Vector3<f64>>,
}

impl ForceTorque {
    pub fn len(&self) -> usize {
        self.force.len()
    }

    pub fn is_empty(&self) -> bool {
        self.force.is_empty()
    }

    /// Stacked `(F_1, T_1, F_2, T_2, ...)`.
    pub fn stacked(&self) -> Vec<f64> {
        self.force
            .iter()
            .zip(&self.torque)
            .flat_map(|(f, t)| [f.x, f.y, f.z, t.x, t.y, t.z])
            .collect()
    }
}

/// Force and torque of one particle's sources. Only stokeslets carry net
/// force; rotlets add their strength to the torque.
pub fn net_force_torque(set: &SourceSet, center: &Point3) -> (Vector3<f64>, Vector3<f64>) {
    let mut f = Vector3::zeros();
    let mut t = Vector3::zeros();
    for e in &set.entries {
        match e.kind {
            SourceKind::Stokeslet => {
                f += e.strength;
                t += (e.location - center).cross(&e.strength);
            }
            SourceKind::Rotlet => t += e.strength,
            SourceKind::Stresslet | SourceKind::Dipole => {}
        }
    }
    (f, t)
}

pub fn forces_torques(sources: &[SourceSet], scene: &Scene) -> ForceTorque {
    let (force, torque) = sources
        .iter()
        .zip(&scene.spheres)
        .map(|(s, sph)| net_force_torque(s, &sph.center))
        .unzip();
    ForceTorque { force, torque }
}

/// `‖FT − FT_ref‖_∞ / ‖FT_ref‖_∞` over the stacked vectors.
pub fn force_torque_error(ft: &ForceTorque, reference: &ForceTorque) -> Result<f64> {
    if ft.len() != reference.len() {
        return Err(Error::InvalidArgument(format!(
            "{} particles against a reference of {}",
            ft.len(),
            reference.len()
        )));
    }
    let a = ft.stacked();
    let b = reference.stacked();
    let den = b.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if den == 0.0 {
        return Err(Error::InvalidArgument("reference force/torque vector is zero".into()));
    }
    let num = a.iter().zip(&b).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
    Ok(num / den)
}

/// All sources of a solution packed for field evaluation.
pub fn pack_all(sources: &[SourceSet]) -> PackedSources {
    let entries: Vec<SourceEntry> = sources.iter().flat_map(|s| s.entries.iter().cloned()).collect();
    let strengths: Vec<f64> = entries.iter().flat_map(|e| e.strength.iter().copied()).collect();
    PackedSources::new(&entries, &strengths)
}

/// Disturbance velocity at `points`, plus the background flow when `total`
/// is set. Points inside (or on) a sphere are rejected.
pub fn evaluate_flow(
    points: &[Point3],
    sources: &[SourceSet],
    scene: &Scene,
    total: bool,
) -> Result<Vec<Vector3<f64>>> {
    for (i, x) in points.iter().enumerate() {
        if let Some(k) = scene.containing_sphere(x) {
            return Err(Error::Domain { point: i, particle: k });
        }
    }
    let packed = pack_all(sources);
    Ok(points
        .par_iter()
        .map(|x| {
            let u = packed.velocity(x, scene.viscosity);
            if total {
                u + background_velocity(x, &scene.background)
            } else {
                u
            }
        })
        .collect())
}

#[derive(Clone, Debug, PartialEq)]
pub struct ResidualReport {
    /// Relative residual at every sample, per particle.
    pub residuals: Vec<Vec<f64>>,
    pub per_particle_max: Vec<f64>,
    pub max: f64,
    pub samples_per_sphere: usize,
    pub seed: u64,
    /// Set when the boundary data vanish identically, so the residuals are
    /// absolute rather than relative.
    pub absolute: bool,
    /// Largest pointwise error divided by the largest boundary speed. Unlike
    /// `max` it stays bounded where the data pass through zero.
    pub max_scaled: f64,
}

/// Residual sample points on every sphere: a quasi-uniform grid under a
/// seeded random rotation, drawn independently per sphere.
pub fn residual_samples(scene: &Scene, samples_per_sphere: usize, seed: u64) -> Result<Vec<Vec<Point3>>> {
    if samples_per_sphere == 0 {
        return Err(Error::InvalidArgument("need at least one residual sample per sphere".into()));
    }
    let grid = fibonacci_sphere(samples_per_sphere, 1.0, Point3::zeros())?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(scene
        .spheres
        .iter()
        .map(|s| {
            let q = random_rotation(&mut rng);
            grid.points.iter().map(|x| s.center + q * x).collect()
        })
        .collect())
}

/// Pointwise relative no-slip residual `‖u − u_bc‖ / ‖u_bc‖` on the sphere
/// surfaces. Near-zero data are guarded by the largest sampled `‖u_bc‖`.
pub fn surface_residual(
    scene: &Scene,
    sources: &[SourceSet],
    samples_per_sphere: usize,
    seed: u64,
) -> Result<ResidualReport> {
    let samples = residual_samples(scene, samples_per_sphere, seed)?;
    let packed = pack_all(sources);
    let pairs: Vec<Vec<(f64, f64)>> = samples
        .iter()
        .zip(&scene.spheres)
        .map(|(pts, s)| {
            pts.par_iter()
                .map(|x| {
                    let bc = rigid_velocity(x, s) - background_velocity(x, &scene.background);
                    let u = packed.velocity(x, scene.viscosity);
                    ((u - bc).norm(), bc.norm())
                })
                .collect()
        })
        .collect();
    let bc_max = pairs.iter().flatten().fold(0.0f64, |m, p| m.max(p.1));
    let absolute = bc_max == 0.0;
    let err_max = pairs.iter().flatten().fold(0.0f64, |m, p| m.max(p.0));
    let residuals: Vec<Vec<f64>> = pairs
        .iter()
        .map(|ps| {
            ps.iter()
                .map(|&(err, bc)| {
                    if absolute {
                        err
                    } else if bc < 1e-12 * bc_max {
                        err / bc_max
                    } else {
                        err / bc
                    }
                })
                .collect()
        })
        .collect();
    let per_particle_max: Vec<f64> = residuals
        .iter()
        .map(|r| r.iter().fold(0.0f64, |m, v| m.max(*v)))
        .collect();
    Ok(ResidualReport {
        max: per_particle_max.iter().fold(0.0f64, |m, v| m.max(*v)),
        per_particle_max,
        residuals,
        samples_per_sphere,
        seed,
        absolute,
        max_scaled: if absolute { err_max } else { err_max / bc_max },
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct Streamline {
    pub points: Vec<Point3>,
    /// True when the path entered a sphere before completing all steps.
    pub stopped_early: bool,
}

/// Integrates `dx/dt = u(x)` (total velocity) from each seed with fixed-step
/// classical RK4. A path stops when any stage point enters a sphere.
pub fn trace_streamlines(
    seeds: &[Point3],
    sources: &[SourceSet],
    scene: &Scene,
    step: f64,
    n_steps: usize,
) -> Vec<Streamline> {
    let packed = pack_all(sources);
    let vel = |x: &Point3| -> Option<Vector3<f64>> {
        if scene.containing_sphere(x).is_some() {
            return None;
        }
        Some(packed.velocity(x, scene.viscosity) + background_velocity(x, &scene.background))
    };
    seeds
        .par_iter()
        .map(|seed| {
            let mut points = vec![*seed];
            let mut x = *seed;
            for _ in 0..n_steps {
                let next = (|| {
                    let k1 = vel(&x)?;
                    let k2 = vel(&(x + 0.5 * step * k1))?;
                    let k3 = vel(&(x + 0.5 * step * k2))?;
                    let k4 = vel(&(x + step * k3))?;
                    let y = x + step / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
                    scene.containing_sphere(&y).is_none().then_some(y)
                })();
                match next {
                    Some(y) => {
                        x = y;
                        points.push(y);
                    }
                    None => return Streamline { points, stopped_early: true },
                }
            }
            Streamline { points, stopped_early: false }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boundary::{BackgroundFlow, SphereState};
    use std::f64::consts::PI;

    fn v(x: f64, y: f64, z: f64) -> Vector3<f64> {
        Vector3::new(x, y, z)
    }

    #[test]
    fn force_torque_examples() {
        let c = Point3::zeros();
        let s = SourceSet::new(0, vec![SourceEntry::stokeslet(c, v(1.0, 2.0, 3.0))]);
        assert_eq!(net_force_torque(&s, &c), (v(1.0, 2.0, 3.0), Vector3::zeros()));
        let s = SourceSet::new(0, vec![SourceEntry::stokeslet(v(1.0, 0.0, 0.0), v(0.0, 0.0, 1.0))]);
        assert_eq!(net_force_torque(&s, &c).1, v(0.0, -1.0, 0.0));
        let s = SourceSet::new(
            0,
            vec![
                SourceEntry::rotlet(v(0.3, 0.1, 0.0), v(0.0, 0.0, 5.0)),
                SourceEntry::dipole(v(0.3, 0.1, 0.0), v(1.0, 1.0, 1.0)),
                SourceEntry::stresslet(v(0.3, 0.1, 0.0), v(1.0, 0.0, 0.0), v(0.0, 1.0, 0.0)),
            ],
        );
        assert_eq!(net_force_torque(&s, &c), (Vector3::zeros(), v(0.0, 0.0, 5.0)));
    }

    #[test]
    fn force_torque_error_examples() {
        let r = ForceTorque {
            force: vec![v(2.0 * PI, 0.0, 0.0)],
            torque: vec![Vector3::zeros()],
        };
        assert_eq!(force_torque_error(&r, &r).unwrap(), 0.0);
        let twice = ForceTorque {
            force: vec![2.0 * r.force[0]],
            torque: r.torque.clone(),
        };
        assert!((force_torque_error(&twice, &r).unwrap() - 1.0).abs() < 1e-15);
        let a = ForceTorque {
            force: vec![v(6.28, 0.0, 0.0)],
            torque: vec![Vector3::zeros()],
        };
        let b = ForceTorque {
            force: vec![v(6.283185, 0.0, 0.0)],
            torque: vec![Vector3::zeros()],
        };
        assert!((force_torque_error(&a, &b).unwrap() - 5.069e-4).abs() < 1e-6);
        let zero = ForceTorque {
            force: vec![Vector3::zeros()],
            torque: vec![Vector3::zeros()],
        };
        assert!(force_torque_error(&a, &zero).is_err());
    }

    fn one_sphere(bg: BackgroundFlow) -> Scene {
        Scene::new(1.0, bg, vec![SphereState::fixed(Point3::zeros())]).unwrap()
    }

    #[test]
    fn interior_points_rejected() {
        let scene = one_sphere(BackgroundFlow::None);
        let err = evaluate_flow(&[v(3.0, 0.0, 0.0), v(0.5, 0.0, 0.0)], &[], &scene, false).unwrap_err();
        assert!(matches!(err, Error::Domain { point: 1, particle: 0 }));
    }

    #[test]
    fn flow_is_linear_in_strengths() {
        let scene = one_sphere(BackgroundFlow::None);
        let mk = |s: f64| {
            vec![SourceSet::new(
                0,
                vec![
                    SourceEntry::stokeslet(v(0.1, 0.0, 0.0), v(s, 0.0, 0.0)),
                    SourceEntry::rotlet(v(0.0, 0.2, 0.0), v(0.0, s, 0.0)),
                ],
            )]
        };
        let x = [v(2.0, 1.0, 0.5)];
        let a = evaluate_flow(&x, &mk(1.0), &scene, false).unwrap();
        let b = evaluate_flow(&x, &mk(2.0), &scene, false).unwrap();
        assert_eq!(b[0], 2.0 * a[0]);
    }

    #[test]
    fn constant_field_streamline() {
        let scene = Scene::new(
            1.0,
            BackgroundFlow::Uniform { velocity: v(5.0, 0.0, 0.0) },
            vec![SphereState::fixed(v(0.0, 10.0, 0.0))],
        )
        .unwrap();
        let lines = trace_streamlines(&[Point3::zeros()], &[], &scene, 0.01, 100);
        let end = lines[0].points.last().unwrap();
        assert!((end - v(5.0, 0.0, 0.0)).norm() < 1e-10);
        assert!(!lines[0].stopped_early);
        let still = trace_streamlines(&[v(3.0, 0.0, 0.0)], &[], &one_sphere(BackgroundFlow::None), 0.1, 5);
        assert!(still[0].points.iter().all(|p| *p == v(3.0, 0.0, 0.0)));
    }

    #[test]
    fn residual_sampling_deterministic_and_guarded() {
        let scene = one_sphere(BackgroundFlow::None);
        let a = residual_samples(&scene, 50, 3).unwrap();
        assert_eq!(a, residual_samples(&scene, 50, 3).unwrap());
        assert_ne!(a, residual_samples(&scene, 50, 4).unwrap());
        assert!(a[0].iter().all(|x| (x.norm() - 1.0).abs() < 1e-14));
        let r = surface_residual(&scene, &[SourceSet::new(0, vec![])], 10, 1).unwrap();
        assert!(r.absolute);
        assert_eq!(r.max, 0.0);
        assert_eq!(r.max_scaled, 0.0);
        assert!(surface_residual(&scene, &[], 0, 1).is_err());
        // no sources in shear: every sample misses by its whole datum
        let sheared = one_sphere(BackgroundFlow::Shear { rate: 2.0 });
        let r = surface_residual(&sheared, &[SourceSet::new(0, vec![])], 200, 1).unwrap();
        assert!(!r.absolute);
        assert!((r.max - 1.0).abs() < 1e-14);
        assert!((r.max_scaled - 1.0).abs() < 1e-14);
    }
}
