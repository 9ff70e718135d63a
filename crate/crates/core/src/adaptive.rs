//! Per-particle discretization: proxy sources, image lines at near
//! contacts, and collocation nodes with their quadrature weights.
//!
//! Each particle is discretized in a local frame whose z axis points along
//! one of its contacts. Particles whose contact geometry agrees in that
//! frame (the two spheres of a pair, the vertices of a regular tetrahedron)
//! then share a single template, and the solver factorizes each template
//! only once.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::path::PathBuf;
use std::sync::Arc;

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use crate::boundary::Scene;
use crate::error::{Error, Result};
use crate::geometry::{
    cap_nodes, fibonacci_sphere, frame_from_axes, image_line_radii, load_node_file, CapPolicy,
    NodeSet, Point3,
};
use crate::kernels::{SourceEntry, SourceKind, SourceSet};
use crate::system::weights::weights_for_groups;

/// Gaps at or above this value get no image sources.
pub const CONTACT_CUTOFF: f64 = 0.15;

/// Fitted number of image nodes needed at gap `delta` for a surface
/// residual of about 1e-3 with the default proxy grid.
pub fn n_images(delta: f64) -> Result<usize> {
    if !(delta > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "gap must be positive, got {delta}"
        )));
    }
    if delta >= CONTACT_CUTOFF {
        return Ok(0);
    }
    Ok((-8.72 * delta.log10() - 6.15).ceil().max(0.0) as usize)
}

/// Collocation count of a particle with the default ratio and caps.
pub fn collocation_count(n_proxy: usize, gaps: &[f64]) -> Result<usize> {
    let n_ims = gaps.iter().map(|&d| n_images(d)).collect::<Result<Vec<_>>>()?;
    Ok(SolverParams {
        n_proxy,
        ..SolverParams::default()
    }
    .collocation_count(&n_ims))
}

/// How many image nodes each near contact receives.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ImageRule {
    /// `n_images(δ)`.
    #[default]
    Adaptive,
    /// The same count at every contact closer than [`CONTACT_CUTOFF`].
    Fixed(usize),
    None,
}

/// What to do with a contact whose image line does not fit between the
/// proxy sphere and the accumulation point.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InfeasibleImages {
    #[default]
    Error,
    /// Drop the contact; the pair is resolved by proxy sources alone.
    Skip,
}

/// Singularity types placed at every image node.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ImageKinds {
    pub stokeslet: bool,
    pub rotlet: bool,
    pub stresslet: bool,
    pub dipole: bool,
}

impl Default for ImageKinds {
    fn default() -> Self {
        Self {
            stokeslet: true,
            rotlet: true,
            stresslet: false,
            dipole: true,
        }
    }
}

impl ImageKinds {
    pub fn kinds(&self) -> Vec<SourceKind> {
        let mut out = Vec::new();
        if self.stokeslet {
            out.push(SourceKind::Stokeslet);
        }
        if self.stresslet {
            out.push(SourceKind::Stresslet);
        }
        if self.rotlet {
            out.push(SourceKind::Rotlet);
        }
        if self.dipole {
            out.push(SourceKind::Dipole);
        }
        out
    }

    pub fn count(&self) -> usize {
        self.kinds().len()
    }

    /// Parses a combination such as "SRD" or "R+T+D".
    pub fn parse(text: &str) -> Result<Self> {
        let mut k = ImageKinds {
            stokeslet: false,
            rotlet: false,
            stresslet: false,
            dipole: false,
        };
        for c in text.chars().filter(|c| !matches!(c, '+' | ' ')) {
            match c.to_ascii_uppercase() {
                'S' => k.stokeslet = true,
                'R' => k.rotlet = true,
                'T' => k.stresslet = true,
                'D' => k.dipole = true,
                other => {
                    return Err(Error::InvalidArgument(format!(
                        "unknown singularity tag `{other}` in `{text}`"
                    )))
                }
            }
        }
        if k.count() == 0 {
            return Err(Error::InvalidArgument("empty singularity combination".into()));
        }
        Ok(k)
    }

    pub fn label(&self) -> String {
        self.kinds().iter().map(|k| k.tag()).collect::<Vec<_>>().join("+")
    }
}

/// Where the proxy nodes come from.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NodeSource {
    #[default]
    Generator,
    /// Unit-sphere node file; its row count must equal `n_proxy`.
    File(PathBuf),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverParams {
    pub n_proxy: usize,
    pub r_proxy: f64,
    pub colloc_ratio: f64,
    pub delta_offset: f64,
    pub alpha1: usize,
    pub alpha2: usize,
    pub beta1: f64,
    pub beta2: f64,
    pub cap_policy: CapPolicy,
    pub eps_trunc: f64,
    pub gmres_tol: f64,
    pub gmres_maxiter: usize,
    pub node_source: NodeSource,
    pub image_rule: ImageRule,
    pub image_kinds: ImageKinds,
    pub infeasible_images: InfeasibleImages,
}

impl Default for SolverParams {
    fn default() -> Self {
        Self {
            n_proxy: 686,
            r_proxy: 0.63,
            colloc_ratio: 1.2,
            delta_offset: 0.05,
            alpha1: 6,
            alpha2: 6,
            beta1: PI / 5.0,
            beta2: PI / 60.0,
            cap_policy: CapPolicy::Span,
            eps_trunc: 5e-12,
            gmres_tol: 1e-6,
            gmres_maxiter: 500,
            node_source: NodeSource::Generator,
            image_rule: ImageRule::Adaptive,
            image_kinds: ImageKinds::default(),
            infeasible_images: InfeasibleImages::Error,
        }
    }
}

fn range_err(field: &str, msg: impl Into<String>) -> Error {
    Error::Range {
        field: field.into(),
        msg: msg.into(),
    }
}

impl SolverParams {
    /// The fine reference discretization used for self-convergence checks.
    pub fn fine_reference() -> Self {
        Self {
            n_proxy: 1353,
            r_proxy: 0.7,
            image_rule: ImageRule::Fixed(30),
            infeasible_images: InfeasibleImages::Skip,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_proxy == 0 {
            return Err(range_err("n_proxy", "must be at least 1"));
        }
        if !(self.r_proxy > 0.0 && self.r_proxy < 1.0) {
            return Err(range_err("r_proxy", format!("must lie in (0, 1), got {}", self.r_proxy)));
        }
        if !(self.colloc_ratio > 0.0 && self.colloc_ratio.is_finite()) {
            return Err(range_err("colloc_ratio", "must be positive"));
        }
        if !(self.delta_offset >= 0.0 && self.r_proxy * (1.0 + self.delta_offset) < 1.0) {
            return Err(range_err(
                "delta_offset",
                "must be nonnegative with r_proxy * (1 + delta_offset) < 1",
            ));
        }
        for (name, b) in [("beta1", self.beta1), ("beta2", self.beta2)] {
            if !(b > 0.0 && b < 0.5 * PI) {
                return Err(range_err(name, format!("must lie in (0, π/2), got {b}")));
            }
        }
        if !(self.eps_trunc > 0.0 && self.eps_trunc < 1.0) {
            return Err(range_err("eps_trunc", "must lie in (0, 1)"));
        }
        if !(self.gmres_tol > 0.0 && self.gmres_tol < 1.0) {
            return Err(range_err("gmres_tol", "must lie in (0, 1)"));
        }
        if self.gmres_maxiter == 0 {
            return Err(range_err("gmres_maxiter", "must be at least 1"));
        }
        if self.image_kinds.count() == 0 {
            return Err(range_err("image_kinds", "at least one kind must be enabled"));
        }
        Ok(())
    }

    /// Base collocation count `round(ratio * N)`.
    pub fn base_collocation(&self) -> usize {
        (self.colloc_ratio * self.n_proxy as f64).round() as usize
    }

    pub fn cap_sizes(&self, n_im: usize) -> (usize, usize) {
        let per = self.image_kinds.count() * n_im;
        (self.alpha1 * per, self.alpha2 * per)
    }

    /// Collocation count for a particle with the given image counts.
    pub fn collocation_count(&self, n_ims: &[usize]) -> usize {
        self.base_collocation()
            + n_ims
                .iter()
                .map(|&n| {
                    let (a, b) = self.cap_sizes(n);
                    a + b
                })
                .sum::<usize>()
    }

    /// Image count at gap `delta` under the active rule, before feasibility.
    pub fn images_for_gap(&self, delta: f64) -> Result<usize> {
        match self.image_rule {
            ImageRule::Adaptive => n_images(delta),
            ImageRule::Fixed(n) => {
                if !(delta > 0.0) {
                    return Err(Error::InvalidArgument(format!(
                        "gap must be positive, got {delta}"
                    )));
                }
                Ok(if delta < CONTACT_CUTOFF { n } else { 0 })
            }
            ImageRule::None => Ok(0),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Contact {
    pub neighbor: usize,
    pub gap: f64,
    /// Unit vector from this particle's center towards the neighbor.
    pub axis: Vector3<f64>,
    pub n_im: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ParticlePlan {
    pub contacts: Vec<Contact>,
    pub n_stokeslet: usize,
    pub n_rotlet: usize,
    pub n_stresslet: usize,
    pub n_dipole: usize,
    pub m_base: usize,
    pub m_total: usize,
}

impl ParticlePlan {
    pub fn n_sources(&self) -> usize {
        self.n_stokeslet + self.n_rotlet + self.n_stresslet + self.n_dipole
    }

    pub fn total_images(&self) -> usize {
        self.contacts.iter().map(|c| c.n_im).sum()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DiscretizationPlan {
    pub particles: Vec<ParticlePlan>,
}

impl DiscretizationPlan {
    pub fn total_unknowns(&self) -> usize {
        3 * self.particles.iter().map(|p| p.n_sources()).sum::<usize>()
    }

    pub fn total_equations(&self) -> usize {
        3 * self.particles.iter().map(|p| p.m_total).sum::<usize>()
    }
}

pub fn plan_discretization(scene: &Scene, params: &SolverParams) -> Result<DiscretizationPlan> {
    params.validate()?;
    let p = scene.len();
    let mut contacts: Vec<Vec<Contact>> = vec![Vec::new(); p];
    for i in 0..p {
        for j in i + 1..p {
            let ci = scene.spheres[i].center;
            let cj = scene.spheres[j].center;
            let dist = (cj - ci).norm();
            let delta = dist - 2.0;
            if !(delta > 0.0) {
                return Err(Error::Geometry(format!(
                    "spheres {i} and {j} overlap: gap = {delta}"
                )));
            }
            let n_im = params.images_for_gap(delta)?;
            if n_im == 0 {
                continue;
            }
            if let Err(e) = image_line_radii(delta, params.r_proxy, n_im, params.delta_offset) {
                match (params.infeasible_images, e) {
                    (InfeasibleImages::Skip, Error::Configuration(_)) => continue,
                    (_, Error::Configuration(msg)) => {
                        return Err(Error::Configuration(format!("pair ({i}, {j}): {msg}")))
                    }
                    (_, other) => return Err(other),
                }
            }
            // A feasible line ends outside R_p, so the pair is closer than
            // the critical separation and the proxy sphere alone would not
            // shield the accumulation point.
            debug_assert!(delta < crate::geometry::critical_separation(params.r_proxy)?);
            let axis = (cj - ci) / dist;
            contacts[i].push(Contact {
                neighbor: j,
                gap: delta,
                axis,
                n_im,
            });
            contacts[j].push(Contact {
                neighbor: i,
                gap: delta,
                axis: -axis,
                n_im,
            });
        }
    }
    let kinds = params.image_kinds;
    let particles = contacts
        .into_iter()
        .map(|contacts| {
            let images: usize = contacts.iter().map(|c| c.n_im).sum();
            let n_ims: Vec<usize> = contacts.iter().map(|c| c.n_im).collect();
            ParticlePlan {
                n_stokeslet: params.n_proxy + if kinds.stokeslet { images } else { 0 },
                n_rotlet: if kinds.rotlet { images } else { 0 },
                n_stresslet: if kinds.stresslet { images } else { 0 },
                n_dipole: if kinds.dipole { images } else { 0 },
                m_base: params.base_collocation(),
                m_total: params.collocation_count(&n_ims),
                contacts,
            }
        })
        .collect();
    Ok(DiscretizationPlan { particles })
}

/// Which block of collocation nodes a row belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NodeGroup {
    Base,
    /// Wide cap of contact `c`.
    Cap1(usize),
    /// Narrow cap of contact `c`.
    Cap2(usize),
}

/// Contact data in a particle's local frame, quantized so that equal
/// geometry gives bitwise-equal templates.
#[derive(Clone, Debug, PartialEq)]
pub struct LocalContact {
    pub gap: f64,
    pub n_im: usize,
    pub axis: Vector3<f64>,
}

/// Discretization of one particle in its local frame, centered at the
/// origin.
#[derive(Clone, Debug)]
pub struct Template {
    pub signature: String,
    pub contacts: Vec<LocalContact>,
    pub sources: Vec<SourceEntry>,
    pub colloc: Vec<Point3>,
    pub weights: Vec<f64>,
    pub groups: Vec<NodeGroup>,
}

impl Template {
    pub fn n_sources(&self) -> usize {
        self.sources.len()
    }

    pub fn n_colloc(&self) -> usize {
        self.colloc.len()
    }
}

/// One particle's discretization in global coordinates.
#[derive(Clone, Debug)]
pub struct ParticleDiscretization {
    pub particle: usize,
    pub center: Point3,
    /// Local-to-global rotation.
    pub frame: Matrix3<f64>,
    pub template: Arc<Template>,
    /// Source locations in global coordinates, strengths zero.
    pub sources: SourceSet,
    pub colloc: NodeSet,
}

impl ParticleDiscretization {
    pub fn weights(&self) -> &[f64] {
        &self.template.weights
    }

    pub fn n_sources(&self) -> usize {
        self.sources.len()
    }

    pub fn n_colloc(&self) -> usize {
        self.colloc.len()
    }
}

fn quantize_gap(gap: f64) -> f64 {
    format!("{gap:.11e}").parse().expect("formatted float parses")
}

const AXIS_QUANTUM: f64 = 1e-9;

fn quantize_axis(a: &Vector3<f64>) -> [i64; 3] {
    [
        (a.x / AXIS_QUANTUM).round() as i64,
        (a.y / AXIS_QUANTUM).round() as i64,
        (a.z / AXIS_QUANTUM).round() as i64,
    ]
}

type ContactKey = (u64, usize, [i64; 3]);

fn local_key(contacts: &[Contact], frame: &Matrix3<f64>) -> Vec<ContactKey> {
    let mut key: Vec<ContactKey> = contacts
        .iter()
        .map(|c| {
            let local = frame.transpose() * c.axis;
            (quantize_gap(c.gap).to_bits(), c.n_im, quantize_axis(&local))
        })
        .collect();
    key.sort();
    key
}

/// Chooses the local frame giving the smallest contact key, so that
/// congruent contact configurations map to the same key.
fn canonical_frame(contacts: &[Contact]) -> (Matrix3<f64>, Vec<ContactKey>) {
    if contacts.is_empty() {
        return (Matrix3::identity(), Vec::new());
    }
    let mut best: Option<(Matrix3<f64>, Vec<ContactKey>)> = None;
    let mut consider = |frame: Matrix3<f64>| {
        let key = local_key(contacts, &frame);
        if best.as_ref().map_or(true, |(_, k)| key < *k) {
            best = Some((frame, key));
        }
    };
    for (i, p) in contacts.iter().enumerate() {
        let mut any_secondary = false;
        for (j, s) in contacts.iter().enumerate() {
            if i == j || p.axis.cross(&s.axis).norm() < 1e-6 {
                continue;
            }
            any_secondary = true;
            consider(frame_from_axes(&p.axis, Some(&s.axis)));
        }
        if !any_secondary {
            consider(frame_from_axes(&p.axis, None));
        }
    }
    best.expect("at least one candidate frame")
}

fn params_signature(params: &SolverParams, mu: f64) -> String {
    format!(
        "N={};Rp={:e};ratio={:e};offset={:e};alpha={},{};beta={:e},{:e};policy={:?};kinds={};nodes={:?};mu={:e}",
        params.n_proxy,
        params.r_proxy,
        params.colloc_ratio,
        params.delta_offset,
        params.alpha1,
        params.alpha2,
        params.beta1,
        params.beta2,
        params.cap_policy,
        params.image_kinds.label(),
        params.node_source,
        mu,
    )
}

fn proxy_nodes(params: &SolverParams) -> Result<NodeSet> {
    match &params.node_source {
        NodeSource::Generator => fibonacci_sphere(params.n_proxy, params.r_proxy, Point3::zeros()),
        NodeSource::File(path) => {
            let nodes = load_node_file(path, params.r_proxy, Point3::zeros())?;
            if nodes.len() != params.n_proxy {
                return Err(Error::Configuration(format!(
                    "node file {} has {} nodes but n_proxy = {}",
                    path.display(),
                    nodes.len(),
                    params.n_proxy
                )));
            }
            Ok(nodes)
        }
    }
}

fn build_template(
    signature: String,
    key: &[ContactKey],
    params: &SolverParams,
    proxy: &NodeSet,
) -> Result<Template> {
    let contacts: Vec<LocalContact> = key
        .iter()
        .map(|(gap_bits, n_im, ax)| LocalContact {
            gap: f64::from_bits(*gap_bits),
            n_im: *n_im,
            axis: Vector3::new(ax[0] as f64, ax[1] as f64, ax[2] as f64).normalize(),
        })
        .collect();

    let mut sources: Vec<SourceEntry> = proxy
        .points
        .iter()
        .map(|y| SourceEntry::stokeslet(*y, Vector3::zeros()))
        .collect();
    for c in &contacts {
        let radii = image_line_radii(c.gap, params.r_proxy, c.n_im, params.delta_offset)?;
        for kind in params.image_kinds.kinds() {
            for t in &radii {
                let loc = *t * c.axis;
                sources.push(match kind {
                    SourceKind::Stresslet => {
                        SourceEntry::stresslet(loc, Vector3::zeros(), c.axis)
                    }
                    k => SourceEntry::new(k, loc, Vector3::zeros()),
                });
            }
        }
    }

    let m_base = params.base_collocation();
    let mut colloc = fibonacci_sphere(m_base, 1.0, Point3::zeros())?.points;
    let mut groups = vec![NodeGroup::Base; m_base];
    for (ci, c) in contacts.iter().enumerate() {
        let (m1, m2) = params.cap_sizes(c.n_im);
        for (m, beta, group) in [
            (m1, params.beta1, NodeGroup::Cap1(ci)),
            (m2, params.beta2, NodeGroup::Cap2(ci)),
        ] {
            if m == 0 {
                continue;
            }
            colloc.extend(cap_nodes(&Point3::zeros(), &c.axis, beta, m, params.cap_policy)?);
            groups.extend(std::iter::repeat(group).take(m));
        }
    }
    let weights = weights_for_groups(&groups, params);
    Ok(Template {
        signature,
        contacts,
        sources,
        colloc,
        weights,
        groups,
    })
}

/// Builds every particle's discretization. Particles with equal signatures
/// share one [`Template`].
pub fn realize_discretization(
    plan: &DiscretizationPlan,
    scene: &Scene,
    params: &SolverParams,
) -> Result<Vec<ParticleDiscretization>> {
    if plan.particles.len() != scene.len() {
        return Err(Error::InvalidArgument(format!(
            "plan has {} particles, scene has {}",
            plan.particles.len(),
            scene.len()
        )));
    }
    let proxy = proxy_nodes(params)?;
    let base_sig = params_signature(params, scene.viscosity);
    let mut templates: BTreeMap<String, Arc<Template>> = BTreeMap::new();
    let mut out = Vec::with_capacity(scene.len());
    for (k, (pp, sphere)) in plan.particles.iter().zip(&scene.spheres).enumerate() {
        let (frame, key) = canonical_frame(&pp.contacts);
        let signature = format!("{base_sig};contacts={key:?}");
        let template = match templates.get(&signature) {
            Some(t) => t.clone(),
            None => {
                let t = Arc::new(build_template(signature.clone(), &key, params, &proxy)?);
                templates.insert(signature, t.clone());
                t
            }
        };
        let c = sphere.center;
        let entries = template
            .sources
            .iter()
            .map(|e| SourceEntry {
                kind: e.kind,
                location: c + frame * e.location,
                strength: Vector3::zeros(),
                stress_direction: e.stress_direction.map(|q| frame * q),
            })
            .collect();
        let colloc = NodeSet {
            points: template.colloc.iter().map(|x| c + frame * x).collect(),
            radius: 1.0,
            center: c,
        };
        out.push(ParticleDiscretization {
            particle: k,
            center: c,
            frame,
            template,
            sources: SourceSet::new(k, entries),
            colloc,
        });
    }
    Ok(out)
}

/// Number of distinct templates among `discs`.
pub fn distinct_templates(discs: &[ParticleDiscretization]) -> usize {
    let mut sigs: Vec<&str> = discs.iter().map(|d| d.template.signature.as_str()).collect();
    sigs.sort_unstable();
    sigs.dedup();
    sigs.len()
}
