//! Point sets on and inside unit spheres.
//!
//! All lengths are in units of the sphere radius. The generators here are
//! pure functions of their arguments (and of the seed, for the randomized
//! ones), so every point set in the solver is reproducible bit for bit.

use std::f64::consts::PI;
use std::path::Path;

use nalgebra::{Matrix3, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Point3 = Vector3<f64>;

pub const GOLDEN_RATIO: f64 = 1.618_033_988_749_894_8;

/// Maximum number of rejected placements per sphere in the random
/// configuration generators.
pub const PLACEMENT_RETRY_CAP: usize = 10_000;

/// Points on a sphere of given radius and center.
#[derive(Clone, Debug, PartialEq)]
pub struct NodeSet {
    pub points: Vec<Point3>,
    pub radius: f64,
    pub center: Point3,
}

impl NodeSet {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Largest relative deviation of any point from the sphere.
    pub fn max_radius_error(&self) -> f64 {
        self.points
            .iter()
            .map(|p| ((p - self.center).norm() - self.radius).abs() / self.radius)
            .fold(0.0, f64::max)
    }
}

/// Quasi-uniform spherical Fibonacci grid with `n` points.
///
/// Point `j` (1-based) has height `1 - (2j - 1)/n` and azimuth
/// `2πj/Φ mod 2π` relative to `center`.
pub fn fibonacci_sphere(n: usize, radius: f64, center: Point3) -> Result<NodeSet> {
    if n == 0 {
        return Err(Error::InvalidArgument(
            "fibonacci_sphere needs at least one point".into(),
        ));
    }
    if !(radius > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "sphere radius must be positive, got {radius}"
        )));
    }
    let nf = n as f64;
    let points = (1..=n)
        .map(|j| {
            let jf = j as f64;
            let z = 1.0 - (2.0 * jf - 1.0) / nf;
            let rho = (1.0 - z * z).max(0.0).sqrt();
            let phi = golden_azimuth(j);
            center + radius * Point3::new(rho * phi.cos(), rho * phi.sin(), z)
        })
        .collect();
    Ok(NodeSet {
        points,
        radius,
        center,
    })
}

/// Azimuth `2πj/Φ mod 2π` of the `j`th node of a Fibonacci grid.
pub fn golden_azimuth(j: usize) -> f64 {
    (2.0 * PI * j as f64 / GOLDEN_RATIO).rem_euclid(2.0 * PI)
}

/// Parses whitespace-separated unit-sphere coordinates, three per line.
/// Blank lines are ignored.
pub fn parse_node_text(text: &str, radius: f64, center: Point3) -> Result<NodeSet> {
    let mut points = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        let fields: Vec<&str> = trimmed.split_whitespace().collect();
        if fields.len() != 3 {
            return Err(Error::Parse {
                line: line_no,
                msg: format!("expected 3 columns, found {}", fields.len()),
            });
        }
        let mut xyz = [0.0; 3];
        for (slot, field) in xyz.iter_mut().zip(&fields) {
            *slot = field.parse::<f64>().map_err(|e| Error::Parse {
                line: line_no,
                msg: format!("`{field}`: {e}"),
            })?;
        }
        let unit = Point3::new(xyz[0], xyz[1], xyz[2]);
        let norm = unit.norm();
        if !norm.is_finite() || (norm - 1.0).abs() > 1e-6 {
            return Err(Error::Data(format!(
                "line {line_no}: node has norm {norm}, expected a unit vector"
            )));
        }
        points.push(center + radius * unit);
    }
    Ok(NodeSet {
        points,
        radius,
        center,
    })
}

/// Loads a node file (e.g. a published spherical design) and maps it onto
/// the sphere of given radius and center.
pub fn load_node_file(path: impl AsRef<Path>, radius: f64, center: Point3) -> Result<NodeSet> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_node_text(&text, radius, center)
}

/// Distance from a sphere center to the accumulation point of repeated
/// reflections in a neighbor at gap `delta`.
pub fn r_acc(delta: f64) -> Result<f64> {
    if !(delta >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "gap must be nonnegative, got {delta}"
        )));
    }
    // 1 + δ/2 - sqrt(δ + δ²/4), written without the cancellation at large δ
    // using (1 + δ/2)² - (δ + δ²/4) = 1.
    Ok(1.0 / (1.0 + 0.5 * delta + (delta + 0.25 * delta * delta).sqrt()))
}

/// Gap at which the accumulation point reaches the proxy sphere.
pub fn critical_separation(r_proxy: f64) -> Result<f64> {
    if !(r_proxy > 0.0 && r_proxy < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "proxy radius must lie in (0, 1), got {r_proxy}"
        )));
    }
    Ok((1.0 - r_proxy).powi(2) / r_proxy)
}

/// Surface-to-surface gap between two unit spheres.
pub fn gap(c1: &Point3, c2: &Point3) -> f64 {
    (c2 - c1).norm() - 2.0
}

/// Accumulation points inside sphere 1 and sphere 2 of a disjoint pair.
pub fn accumulation_points(c1: &Point3, c2: &Point3) -> Result<(Point3, Point3)> {
    let dist = (c2 - c1).norm();
    let delta = dist - 2.0;
    if !(delta > 0.0) {
        return Err(Error::Geometry(format!(
            "spheres overlap or touch (gap {delta})"
        )));
    }
    let axis = (c2 - c1) / dist;
    let mid = 0.5 * (c1 + c2);
    let half = (delta + 0.25 * delta * delta).sqrt();
    Ok((mid - half * axis, mid + half * axis))
}

/// Radial positions `t_j` of the image-line nodes, Chebyshev-clustered
/// towards the accumulation point. The first node sits exactly on it.
pub fn image_line_radii(
    delta: f64,
    r_proxy: f64,
    n_im: usize,
    delta_offset: f64,
) -> Result<Vec<f64>> {
    if n_im == 0 {
        return Err(Error::InvalidArgument("image line needs n_im >= 1".into()));
    }
    if !(delta > 0.0) {
        return Err(Error::Geometry(format!("gap must be positive, got {delta}")));
    }
    let outer = r_acc(delta)?;
    let inner = r_proxy * (1.0 + delta_offset);
    if !(outer > inner) {
        return Err(Error::Configuration(format!(
            "no image line fits at gap {delta}: accumulation radius {outer} <= R_p(1+Δ) = {inner}"
        )));
    }
    let span = outer - inner;
    let n = n_im as f64;
    Ok((0..n_im)
        .map(|j| {
            if j == 0 {
                outer
            } else {
                inner + span * (j as f64 * PI / (2.0 * n)).cos()
            }
        })
        .collect())
}

/// Image-line nodes inside the sphere at `c_self`, on the ray towards
/// `c_neigh`.
pub fn image_line(
    c_self: &Point3,
    c_neigh: &Point3,
    r_proxy: f64,
    n_im: usize,
    delta_offset: f64,
) -> Result<Vec<Point3>> {
    let dist = (c_neigh - c_self).norm();
    let axis = (c_neigh - c_self) / dist;
    let radii = image_line_radii(dist - 2.0, r_proxy, n_im, delta_offset)?;
    Ok(radii.into_iter().map(|t| c_self + t * axis).collect())
}

/// How the polar angles of a collocation cap are spread.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CapPolicy {
    /// `θ_j = arccos(1 - j(1 - cos β)/m)`: the cap opening is exactly β.
    #[default]
    Span,
    /// `θ_j = arccos(1 - j cos β / m)`.
    Verbatim,
}

impl CapPolicy {
    /// Polar angle of the `j`th (1-based) of `m` cap nodes.
    pub fn polar_angle(self, j: usize, m: usize, beta: f64) -> f64 {
        let frac = j as f64 / m as f64;
        match self {
            CapPolicy::Span => (1.0 - frac * (1.0 - beta.cos())).acos(),
            CapPolicy::Verbatim => (1.0 - frac * beta.cos()).acos(),
        }
    }

    /// Largest polar angle produced for opening parameter `beta`.
    pub fn rim_angle(self, beta: f64) -> f64 {
        self.polar_angle(1, 1, beta)
    }

    /// Solid angle of the cap actually covered on the unit sphere.
    pub fn solid_angle(self, beta: f64) -> f64 {
        match self {
            CapPolicy::Span => 2.0 * PI * (1.0 - beta.cos()),
            CapPolicy::Verbatim => 2.0 * PI * beta.cos(),
        }
    }
}

/// Orthonormal vectors `(e1, e2)` completing `axis` to a right-handed frame
/// `(e1, e2, axis)`. Deterministic in `axis`.
pub fn perpendicular_basis(axis: &Point3) -> (Point3, Point3) {
    let a = axis.normalize();
    let helper = if a.x.abs() <= a.y.abs() && a.x.abs() <= a.z.abs() {
        Point3::x()
    } else if a.y.abs() <= a.z.abs() {
        Point3::y()
    } else {
        Point3::z()
    };
    let e1 = (helper - helper.dot(&a) * a).normalize();
    let e2 = a.cross(&e1);
    (e1, e2)
}

/// Fibonacci grid on a spherical cap of the unit sphere about `center`,
/// with polar angle measured from `axis`.
pub fn cap_nodes(
    center: &Point3,
    axis: &Point3,
    beta: f64,
    m: usize,
    policy: CapPolicy,
) -> Result<Vec<Point3>> {
    if m == 0 {
        return Err(Error::InvalidArgument("cap needs at least one node".into()));
    }
    if !(beta > 0.0 && beta < 0.5 * PI) {
        return Err(Error::InvalidArgument(format!(
            "cap angle must lie in (0, π/2), got {beta}"
        )));
    }
    let a = axis.normalize();
    let (e1, e2) = perpendicular_basis(&a);
    Ok((1..=m)
        .map(|j| {
            let theta = policy.polar_angle(j, m, beta);
            let phi = golden_azimuth(j);
            let (st, ct) = theta.sin_cos();
            center + st * phi.cos() * e1 + st * phi.sin() * e2 + ct * a
        })
        .collect())
}

/// Rotation (local to global) whose third column is `primary`. When
/// `secondary` is given and not parallel to `primary`, it lands in the
/// local x-z half plane with positive x.
pub fn frame_from_axes(primary: &Point3, secondary: Option<&Point3>) -> Matrix3<f64> {
    let z = primary.normalize();
    let x = secondary
        .map(|s| s - s.dot(&z) * z)
        .filter(|s| s.norm() > 1e-8)
        .map(|s| s.normalize())
        .unwrap_or_else(|| perpendicular_basis(&z).0);
    let y = z.cross(&x);
    Matrix3::from_columns(&[x, y, z])
}

/// Uniformly distributed random rotation matrix.
pub fn random_rotation<R: Rng + ?Sized>(rng: &mut R) -> Matrix3<f64> {
    // Uniform unit quaternion (Shoemake's subgroup algorithm).
    let u1: f64 = rng.gen();
    let u2: f64 = rng.gen::<f64>() * 2.0 * PI;
    let u3: f64 = rng.gen::<f64>() * 2.0 * PI;
    let (a, b) = ((1.0 - u1).sqrt(), u1.sqrt());
    let q = nalgebra::Quaternion::new(b * u3.cos(), a * u2.sin(), a * u2.cos(), b * u3.sin());
    *nalgebra::UnitQuaternion::from_quaternion(q)
        .to_rotation_matrix()
        .matrix()
}

/// Uniformly distributed random unit vector.
pub fn random_unit_vector<R: Rng + ?Sized>(rng: &mut R) -> Point3 {
    let z: f64 = rng.gen_range(-1.0..=1.0);
    let phi: f64 = rng.gen_range(0.0..2.0 * PI);
    let rho = (1.0 - z * z).max(0.0).sqrt();
    Point3::new(rho * phi.cos(), rho * phi.sin(), z)
}

/// Random sphere centers in the box `[0, L] x [0, L] x [0, 2]` with every
/// pairwise gap at least `min_sep`.
pub fn random_layer(p: usize, box_side: f64, min_sep: f64, seed: u64) -> Result<Vec<Point3>> {
    if p == 0 {
        return Err(Error::InvalidArgument("need at least one sphere".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut centers: Vec<Point3> = Vec::with_capacity(p);
    for k in 0..p {
        let mut placed = false;
        for _ in 0..PLACEMENT_RETRY_CAP {
            let c = Point3::new(
                rng.gen_range(0.0..=box_side),
                rng.gen_range(0.0..=box_side),
                rng.gen_range(0.0..=2.0),
            );
            if centers.iter().all(|o| gap(o, &c) >= min_sep) {
                centers.push(c);
                placed = true;
                break;
            }
        }
        if !placed {
            return Err(Error::InfeasiblePacking(format!(
                "could not place sphere {k} of {p} in a {box_side} x {box_side} x 2 box \
                 with gap >= {min_sep}"
            )));
        }
    }
    Ok(centers)
}

/// Grows a cluster in which every sphere after the first touches a randomly
/// chosen earlier sphere at gap exactly `delta`, and no gap is below
/// `delta`.
pub fn grow_cluster(p: usize, delta: f64, seed: u64) -> Result<Vec<Point3>> {
    if p == 0 {
        return Err(Error::InvalidArgument("need at least one sphere".into()));
    }
    if !(delta > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "cluster gap must be positive, got {delta}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut centers = vec![Point3::zeros()];
    let tol = 1e-12;
    while centers.len() < p {
        let mut placed = false;
        for _ in 0..PLACEMENT_RETRY_CAP {
            let anchor = centers[rng.gen_range(0..centers.len())];
            let dir = random_unit_vector(&mut rng);
            let c = anchor + (2.0 + delta) * dir;
            if centers.iter().all(|o| gap(o, &c) >= delta - tol) {
                centers.push(c);
                placed = true;
                break;
            }
        }
        if !placed {
            return Err(Error::InfeasiblePacking(format!(
                "could not attach sphere {} of {p} at gap {delta}",
                centers.len()
            )));
        }
    }
    Ok(centers)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn fibonacci_two_points() {
        let s = fibonacci_sphere(2, 1.0, Point3::zeros()).unwrap();
        assert_eq!(s.len(), 2);
        assert_relative_eq!(s.points[0].z, 0.5, epsilon = 1e-15);
        assert_relative_eq!(s.points[1].z, -0.5, epsilon = 1e-15);
    }

    #[test]
    fn fibonacci_points_on_sphere() {
        let c = Point3::new(1.0, -2.0, 0.5);
        let s = fibonacci_sphere(100, 1.0, c).unwrap();
        for p in &s.points {
            assert!(((p - c).norm() - 1.0).abs() < 1e-12);
        }
        assert!(s.max_radius_error() < 1e-12);
    }

    #[test]
    fn fibonacci_centroid_small() {
        let s = fibonacci_sphere(1000, 1.0, Point3::zeros()).unwrap();
        let centroid: Point3 = s.points.iter().sum::<Point3>() / 1000.0;
        assert!(centroid.norm() <= 0.01, "centroid {}", centroid.norm());
    }

    #[test]
    fn fibonacci_rejects_zero() {
        assert!(matches!(
            fibonacci_sphere(0, 1.0, Point3::zeros()),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn node_text_parsing() {
        let s = parse_node_text("0 0 1\n", 0.63, Point3::zeros()).unwrap();
        assert_eq!(s.points, vec![Point3::new(0.0, 0.0, 0.63)]);

        let empty = parse_node_text("", 1.0, Point3::zeros()).unwrap();
        assert!(empty.is_empty());

        match parse_node_text("0 0 1\n1 0\n", 1.0, Point3::zeros()) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
        match parse_node_text("0 0 1\n0 x 1\n", 1.0, Point3::zeros()) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(
            parse_node_text("0 0 1.1\n", 1.0, Point3::zeros()),
            Err(Error::Data(_))
        ));
    }

    #[test]
    fn node_file_roundtrip() {
        let grid = fibonacci_sphere(686, 1.0, Point3::zeros()).unwrap();
        let text: String = grid
            .points
            .iter()
            .map(|p| format!("{} {} {}\n", p.x, p.y, p.z))
            .collect();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("nodes.txt");
        std::fs::write(&path, text).unwrap();
        let loaded = load_node_file(&path, 1.0, Point3::zeros()).unwrap();
        assert_eq!(loaded.len(), 686);
        for i in 0..loaded.len() {
            for j in i + 1..loaded.len() {
                assert!((loaded.points[i] - loaded.points[j]).norm() > 1e-6);
            }
        }
        assert!(matches!(
            load_node_file(dir.path().join("missing.txt"), 1.0, Point3::zeros()),
            Err(Error::Io { .. })
        ));
    }

    #[test]
    fn accumulation_radius_values() {
        assert_eq!(r_acc(0.0).unwrap(), 1.0);
        // Direct evaluation of 1 + δ/2 - sqrt(δ + δ²/4).
        let direct = 1.005 - (0.010025f64).sqrt();
        assert_relative_eq!(r_acc(1e-2).unwrap(), direct, epsilon = 1e-14);
        assert_relative_eq!(r_acc(1e-2).unwrap(), 0.904875, epsilon = 1e-6);
        assert_relative_eq!(r_acc(4.0).unwrap(), 3.0 - 8f64.sqrt(), epsilon = 1e-14);
        assert!(matches!(r_acc(-1e-3), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn critical_separation_values() {
        assert_relative_eq!(critical_separation(0.7).unwrap(), 0.1285714, epsilon = 1e-7);
        assert_relative_eq!(critical_separation(0.63).unwrap(), 0.2173016, epsilon = 1e-7);
        assert!(critical_separation(1.0 - 1e-9).unwrap() < 1e-17);
        assert!(critical_separation(1.0).is_err());
        assert!(critical_separation(0.0).is_err());
        for rp in [0.5, 0.63, 0.7, 0.9] {
            let d = critical_separation(rp).unwrap();
            assert!((r_acc(d).unwrap() - rp).abs() < 1e-12);
        }
    }

    #[test]
    fn accumulation_points_pair() {
        let c1 = Point3::zeros();
        let c2 = Point3::new(2.01, 0.0, 0.0);
        let (a1, a2) = accumulation_points(&c1, &c2).unwrap();
        assert_relative_eq!(a1.x, 1.005 - (0.010025f64).sqrt(), epsilon = 1e-14);
        assert_relative_eq!(a1 + a2, c1 + c2, epsilon = 1e-14);

        let c2 = Point3::new(2.0 + 1e-14, 0.0, 0.0);
        let (a1, a2) = accumulation_points(&c1, &c2).unwrap();
        assert!((a1 - a2).norm() < 1e-6);

        assert!(matches!(
            accumulation_points(&c1, &Point3::new(1.5, 0.0, 0.0)),
            Err(Error::Geometry(_))
        ));
    }

    #[test]
    fn image_line_nodes() {
        let c1 = Point3::zeros();
        let c2 = Point3::new(0.0, 2.01, 0.0);
        let single = image_line(&c1, &c2, 0.63, 1, 0.05).unwrap();
        assert_eq!(single.len(), 1);
        assert_eq!(single[0].y, r_acc(2.01 - 2.0).unwrap());

        let t = image_line_radii(1e-2, 0.63, 2, 0.05).unwrap();
        let racc = r_acc(1e-2).unwrap();
        assert_eq!(t[0], racc);
        let expected = 0.6615 + (racc - 0.6615) * (PI / 4.0).cos();
        assert_relative_eq!(t[1], expected, epsilon = 1e-14);
        assert_relative_eq!(t[1], 0.8335922, epsilon = 1e-6);

        let deep = image_line(&c1, &Point3::new(2.001, 0.0, 0.0), 0.63, 20, 0.05).unwrap();
        assert_eq!(deep.len(), 20);
        assert!(deep.iter().all(|p| p.norm() < 1.0));

        assert!(matches!(
            image_line_radii(0.5, 0.63, 3, 0.05),
            Err(Error::Configuration(_))
        ));
    }

    #[test]
    fn cap_angles() {
        let beta = PI / 5.0;
        let axis = Point3::new(1.0, 1.0, 0.0).normalize();
        let nodes = cap_nodes(&Point3::zeros(), &axis, beta, 360, CapPolicy::Span).unwrap();
        let last = nodes[359].dot(&axis).clamp(-1.0, 1.0).acos();
        assert_relative_eq!(last, beta, epsilon = 1e-12);
        for p in &nodes {
            assert!((p.norm() - 1.0).abs() < 1e-12);
        }

        let verb = CapPolicy::Verbatim.polar_angle(360, 360, beta);
        assert_relative_eq!(verb, (1.0 - beta.cos()).acos(), epsilon = 1e-15);
        assert_relative_eq!(verb, 1.378, epsilon = 1e-3);

        assert_relative_eq!(golden_azimuth(1), 3.8832220, epsilon = 1e-7);
    }

    #[test]
    fn frame_is_rotation() {
        let a = Point3::new(0.3, -0.2, 0.9).normalize();
        let b = Point3::new(1.0, 0.4, 0.1);
        let q = frame_from_axes(&a, Some(&b));
        assert_relative_eq!(q.determinant(), 1.0, epsilon = 1e-14);
        assert_relative_eq!(q * Point3::z(), a, epsilon = 1e-14);
        let local_b = q.transpose() * b;
        assert!(local_b.y.abs() < 1e-14 && local_b.x > 0.0);
    }

    #[test]
    fn random_layer_properties() {
        let one = random_layer(1, 10.0, 0.271, 3).unwrap();
        assert!(one[0].x >= 0.0 && one[0].x <= 10.0 && one[0].z <= 2.0);

        let a = random_layer(10, 12.0, 0.271, 42).unwrap();
        let b = random_layer(10, 12.0, 0.271, 42).unwrap();
        assert_eq!(a, b);

        let c = random_layer(50, 30.0, 0.271, 7).unwrap();
        for i in 0..c.len() {
            for j in i + 1..c.len() {
                assert!(gap(&c[i], &c[j]) >= 0.271);
            }
        }
        assert!(matches!(
            random_layer(50, 2.0, 0.271, 7),
            Err(Error::InfeasiblePacking(_))
        ));
    }

    #[test]
    fn grown_cluster_properties() {
        assert_eq!(grow_cluster(1, 1e-3, 0).unwrap(), vec![Point3::zeros()]);
        let pair = grow_cluster(2, 0.25, 9).unwrap();
        assert_relative_eq!((pair[1] - pair[0]).norm(), 2.25, epsilon = 1e-14);

        let delta = 1e-3;
        let c = grow_cluster(20, delta, 11).unwrap();
        assert_eq!(c, grow_cluster(20, delta, 11).unwrap());
        for i in 0..c.len() {
            let mut nearest = f64::INFINITY;
            for j in 0..c.len() {
                if i != j {
                    let g = gap(&c[i], &c[j]);
                    assert!(g >= delta - 1e-12);
                    nearest = nearest.min(g);
                }
            }
            assert!(nearest <= delta + 1e-12);
        }
    }

    proptest! {
        /// The accumulation radius is the fixed point of reflection in the
        /// neighbor, r (2 + δ - r) = 1, and the critical separation inverts it.
        #[test]
        fn accumulation_identities(log_delta in -6.0..1.0f64, rp in 0.05..0.99f64) {
            let delta = 10f64.powf(log_delta);
            let r = r_acc(delta).unwrap();
            prop_assert!((r * (2.0 + delta - r) - 1.0).abs() <= 1e-12);
            prop_assert!((critical_separation(r).unwrap() - delta).abs() <= 1e-12 * delta);
            let d = critical_separation(rp).unwrap();
            prop_assert!((r_acc(d).unwrap() - rp).abs() <= 1e-12);
            let c2 = Point3::new(0.0, 2.0 + delta, 0.0);
            let (a1, a2) = accumulation_points(&Point3::zeros(), &c2).unwrap();
            prop_assert!((a1.norm() - r).abs() <= 1e-12);
            prop_assert!(((c2 - a2).norm() - r).abs() <= 1e-12);
        }
    }
}
