//! Batch experiment drivers: parameter sweeps that write resumable CSV
//! tables.
//!
//! Every driver splits its work into cells keyed by their configuration and
//! seed. Rerunning with an existing output file skips cells whose stored
//! status is `ok` or `warn` and recomputes the rest.

mod cluster;
mod iteration;
mod table;
mod tetrahedron;
mod two_sphere;

pub use cluster::{cluster_centers, run_cluster, ClusterKind, ClusterRow};
pub use iteration::{fit_power_law, run_iteration_scaling, IterationReport, IterationRow};
pub use table::{CellStatus, ResumableTable};
pub use tetrahedron::{run_tetrahedron, tetrahedron_centers, TetrahedronRow};
pub use two_sphere::{pair_centers, run_two_sphere_sweep, TwoSphereRow};

use std::path::PathBuf;

use nalgebra::Vector3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::adaptive::{ImageRule, SolverParams};
use crate::boundary::{BackgroundFlow, Scene, SphereState};
use crate::error::{Error, Result};
use crate::geometry::Point3;

/// Boundary conditions applied in an experiment.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BcMode {
    /// Two spheres approaching along their line of centers, unit speed each.
    Squeeze,
    /// Two spheres moving in opposite directions normal to their line of
    /// centers.
    ShearPair,
    /// Two spheres spinning in opposite senses about the z axis.
    CounterRotate,
    /// Both spheres translating with the same velocity along their line of
    /// centers.
    TranslateTogether,
    /// Independent random translational and angular velocities per sphere.
    RandomRigid,
    /// Fixed spheres in a simple shear flow.
    FixedShear,
    /// Fixed spheres in a uniform stream along x.
    FixedUniform,
}

impl BcMode {
    pub fn name(self) -> &'static str {
        match self {
            BcMode::Squeeze => "squeeze",
            BcMode::ShearPair => "shear_pair",
            BcMode::CounterRotate => "counter_rotate",
            BcMode::TranslateTogether => "translate_together",
            BcMode::RandomRigid => "random_rigid",
            BcMode::FixedShear => "fixed_shear",
            BcMode::FixedUniform => "fixed_uniform",
        }
    }

    fn pair_only(self) -> bool {
        matches!(
            self,
            BcMode::Squeeze | BcMode::ShearPair | BcMode::CounterRotate | BcMode::TranslateTogether
        )
    }
}

/// Random rigid motion with components uniform in `[-1, 1]`.
pub fn random_motion(rng: &mut ChaCha8Rng, center: Point3) -> SphereState {
    let mut v = || Vector3::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
    SphereState {
        center,
        velocity: v(),
        angular_velocity: v(),
    }
}

/// Builds the scene for `mode` at the given centers. Pair modes expect
/// exactly two spheres, the first at smaller x.
pub fn scene_for_mode(centers: &[Point3], mode: BcMode, seed: u64, shear_rate: f64) -> Result<Scene> {
    if mode.pair_only() && centers.len() != 2 {
        return Err(Error::InvalidArgument(format!(
            "mode {} needs two spheres, got {}",
            mode.name(),
            centers.len()
        )));
    }
    let fixed = |c: &Point3| SphereState::fixed(*c);
    let (background, spheres) = match mode {
        BcMode::Squeeze | BcMode::ShearPair | BcMode::TranslateTogether => {
            let axis = (centers[1] - centers[0]).normalize();
            let (v0, v1) = match mode {
                BcMode::Squeeze => (axis, -axis),
                BcMode::TranslateTogether => (axis, axis),
                _ => {
                    let n = crate::geometry::perpendicular_basis(&axis).0;
                    (n, -n)
                }
            };
            (
                BackgroundFlow::None,
                vec![
                    SphereState::translating(centers[0], v0),
                    SphereState::translating(centers[1], v1),
                ],
            )
        }
        BcMode::CounterRotate => {
            let spin = |c: &Point3, s: f64| SphereState {
                center: *c,
                velocity: Vector3::zeros(),
                angular_velocity: Vector3::new(0.0, 0.0, s),
            };
            (BackgroundFlow::None, vec![spin(&centers[0], 1.0), spin(&centers[1], -1.0)])
        }
        BcMode::RandomRigid => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (BackgroundFlow::None, centers.iter().map(|c| random_motion(&mut rng, *c)).collect())
        }
        BcMode::FixedShear => (BackgroundFlow::Shear { rate: shear_rate }, centers.iter().map(fixed).collect()),
        BcMode::FixedUniform => (
            BackgroundFlow::Uniform {
                velocity: Vector3::new(1.0, 0.0, 0.0),
            },
            centers.iter().map(fixed).collect(),
        ),
    };
    Scene::new(1.0, background, spheres)
}

/// Label used in CSV key columns.
pub fn rule_label(rule: &ImageRule) -> String {
    match rule {
        ImageRule::Adaptive => "adaptive".into(),
        ImageRule::Fixed(n) => format!("fixed{n}"),
        ImageRule::None => "none".into(),
    }
}

/// Largest cluster the drivers accept. Interactions are summed directly, so
/// cost grows with the square of the particle count.
pub const MAX_PARTICLES: usize = 100;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub name: String,
    pub deltas: Vec<f64>,
    pub n_proxy: Vec<usize>,
    pub r_proxy: Vec<f64>,
    pub image_rules: Vec<ImageRule>,
    pub particles: Vec<usize>,
    pub mode: BcMode,
    pub cluster_kind: ClusterKind,
    pub repetitions: usize,
    pub seed: u64,
    pub samples_per_sphere: usize,
    pub shear_rate: f64,
    /// Number of cells solved concurrently.
    pub workers: usize,
    pub out: PathBuf,
    /// Base parameters; swept fields are overridden per cell.
    pub params: SolverParams,
    /// Reference discretization for self-convergence.
    pub fine: SolverParams,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            name: "experiment".into(),
            deltas: vec![1e-2],
            n_proxy: vec![686],
            r_proxy: vec![0.63],
            image_rules: vec![ImageRule::Adaptive],
            particles: vec![20],
            mode: BcMode::Squeeze,
            cluster_kind: ClusterKind::Grown,
            repetitions: 1,
            seed: 1,
            samples_per_sphere: 500,
            shear_rate: 5.0,
            workers: 1,
            out: PathBuf::from("out"),
            params: SolverParams::default(),
            fine: SolverParams::fine_reference(),
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        let nonempty = |name: &str, len: usize| {
            if len == 0 {
                Err(Error::Range {
                    field: name.into(),
                    msg: "must not be empty".into(),
                })
            } else {
                Ok(())
            }
        };
        nonempty("deltas", self.deltas.len())?;
        nonempty("n_proxy", self.n_proxy.len())?;
        nonempty("r_proxy", self.r_proxy.len())?;
        nonempty("image_rules", self.image_rules.len())?;
        nonempty("particles", self.particles.len())?;
        if let Some(p) = self.particles.iter().find(|p| **p == 0 || **p > MAX_PARTICLES) {
            return Err(Error::Range {
                field: "particles".into(),
                msg: format!("must lie in 1..={MAX_PARTICLES} with direct summation, got {p}"),
            });
        }
        if self.repetitions == 0 {
            return Err(Error::Range {
                field: "repetitions".into(),
                msg: "must be at least 1".into(),
            });
        }
        if self.samples_per_sphere == 0 {
            return Err(Error::Range {
                field: "samples_per_sphere".into(),
                msg: "must be at least 1".into(),
            });
        }
        if let Some(d) = self.deltas.iter().find(|d| !(**d > 0.0)) {
            return Err(Error::Range {
                field: "deltas".into(),
                msg: format!("gaps must be positive, got {d}"),
            });
        }
        self.params.validate()?;
        self.fine.validate()
    }

    pub fn load(path: impl AsRef<std::path::Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = serde_json::from_str(text).map_err(|e| Error::Parse {
            line: e.line(),
            msg: e.to_string(),
        })?;
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Runs `f` on every cell with up to `workers` threads; `f` receives the
/// cell index. Results come back in cell order.
pub(crate) fn run_cells<T: Send>(n: usize, workers: usize, f: impl Fn(usize) -> T + Sync) -> Vec<T> {
    use std::sync::atomic::{AtomicUsize, Ordering};
    use std::sync::Mutex;
    let next = AtomicUsize::new(0);
    let out: Mutex<Vec<Option<T>>> = Mutex::new((0..n).map(|_| None).collect());
    std::thread::scope(|s| {
        for _ in 0..workers.clamp(1, n.max(1)) {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::SeqCst);
                if i >= n {
                    break;
                }
                let r = f(i);
                out.lock().expect("cell results lock")[i] = Some(r);
            });
        }
    });
    out.into_inner()
        .expect("cell results lock")
        .into_iter()
        .map(|r| r.expect("every cell ran"))
        .collect()
}
