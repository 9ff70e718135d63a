//! Rigid-body no-slip data and the background flows.

use nalgebra::{Matrix3, Vector3};

use crate::error::{Error, Result};
use crate::geometry::{gap, NodeSet, Point3};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SphereState {
    pub center: Point3,
    pub velocity: Vector3<f64>,
    pub angular_velocity: Vector3<f64>,
}

impl SphereState {
    pub fn fixed(center: Point3) -> Self {
        Self {
            center,
            velocity: Vector3::zeros(),
            angular_velocity: Vector3::zeros(),
        }
    }

    pub fn translating(center: Point3, velocity: Vector3<f64>) -> Self {
        Self {
            center,
            velocity,
            angular_velocity: Vector3::zeros(),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub enum BackgroundFlow {
    #[default]
    None,
    Uniform { velocity: Vector3<f64> },
    /// Simple shear `u = (γ̇ y, 0, 0)`.
    Shear { rate: f64 },
}

impl BackgroundFlow {
    pub fn kind_name(&self) -> &'static str {
        match self {
            BackgroundFlow::None => "none",
            BackgroundFlow::Uniform { .. } => "uniform",
            BackgroundFlow::Shear { .. } => "shear",
        }
    }

    /// Rate-of-strain tensor and vorticity vector of a shear flow.
    pub fn shear_parts(rate: f64) -> (Matrix3<f64>, Vector3<f64>) {
        let e = Matrix3::new(0.0, rate, 0.0, rate, 0.0, 0.0, 0.0, 0.0, 0.0) * 0.5;
        let w = Vector3::new(0.0, 0.0, -0.5 * rate);
        (e, w)
    }
}

/// Unit spheres in a fluid of viscosity `viscosity`.
#[derive(Clone, Debug, PartialEq)]
pub struct Scene {
    pub viscosity: f64,
    pub background: BackgroundFlow,
    pub spheres: Vec<SphereState>,
}

impl Scene {
    /// Builds a scene, rejecting non-finite data and overlapping or touching
    /// spheres.
    pub fn new(viscosity: f64, background: BackgroundFlow, spheres: Vec<SphereState>) -> Result<Self> {
        if !(viscosity > 0.0 && viscosity.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "viscosity must be positive and finite, got {viscosity}"
            )));
        }
        for (k, s) in spheres.iter().enumerate() {
            let finite = s.center.iter().all(|v| v.is_finite())
                && s.velocity.iter().all(|v| v.is_finite())
                && s.angular_velocity.iter().all(|v| v.is_finite());
            if !finite {
                return Err(Error::InvalidArgument(format!(
                    "sphere {k} has non-finite data"
                )));
            }
        }
        for i in 0..spheres.len() {
            for j in i + 1..spheres.len() {
                let g = gap(&spheres[i].center, &spheres[j].center);
                if !(g > 0.0) {
                    return Err(Error::Geometry(format!(
                        "spheres {i} and {j} overlap: gap = {g}"
                    )));
                }
            }
        }
        Ok(Self {
            viscosity,
            background,
            spheres,
        })
    }

    pub fn len(&self) -> usize {
        self.spheres.len()
    }

    pub fn is_empty(&self) -> bool {
        self.spheres.is_empty()
    }

    pub fn centers(&self) -> Vec<Point3> {
        self.spheres.iter().map(|s| s.center).collect()
    }

    /// Smallest pairwise gap, or infinity for fewer than two spheres.
    pub fn min_gap(&self) -> f64 {
        let mut g = f64::INFINITY;
        for i in 0..self.spheres.len() {
            for j in i + 1..self.spheres.len() {
                g = g.min(gap(&self.spheres[i].center, &self.spheres[j].center));
            }
        }
        g
    }

    /// Index of the sphere containing `x` (closed ball), if any.
    pub fn containing_sphere(&self, x: &Point3) -> Option<usize> {
        self.spheres.iter().position(|s| (x - s.center).norm() <= 1.0)
    }
}

pub fn rigid_velocity(x: &Point3, s: &SphereState) -> Vector3<f64> {
    s.velocity + s.angular_velocity.cross(&(x - s.center))
}

pub fn background_velocity(x: &Point3, bg: &BackgroundFlow) -> Vector3<f64> {
    match *bg {
        BackgroundFlow::None => Vector3::zeros(),
        BackgroundFlow::Uniform { velocity } => velocity,
        BackgroundFlow::Shear { rate } => {
            let (e, w) = BackgroundFlow::shear_parts(rate);
            e * x + w.cross(x)
        }
    }
}

/// No-slip data for the disturbance field at every collocation point,
/// particle-major.
pub fn boundary_data(scene: &Scene, colloc: &[NodeSet]) -> Vec<Vector3<f64>> {
    assert_eq!(colloc.len(), scene.len(), "one node set per sphere");
    scene
        .spheres
        .iter()
        .zip(colloc)
        .flat_map(|(s, nodes)| {
            nodes
                .points
                .iter()
                .map(move |x| rigid_velocity(x, s) - background_velocity(x, &scene.background))
        })
        .collect()
}
