use std::f64::consts::PI;

use nalgebra::Vector3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use stokes_mfs::adaptive::SolverParams;
use stokes_mfs::boundary::{BackgroundFlow, Scene, SphereState};
use stokes_mfs::geometry::{random_unit_vector, Point3};
use stokes_mfs::kernels::stokeslet;
use stokes_mfs::postprocess::{evaluate_flow, forces_torques, residual_samples, surface_residual};
use stokes_mfs::system::{solve, System};

#[test]
fn single_sphere_drag() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for mu in [1.0, 0.25] {
        let v = random_unit_vector(&mut rng) * rng.gen_range(0.5..2.0);
        let center = Point3::new(0.3, -1.0, 2.0);
        let scene = Scene::new(mu, BackgroundFlow::None, vec![SphereState::translating(center, v)]).unwrap();
        let res = solve(&scene, &SolverParams::default()).unwrap();
        let ft = forces_torques(&res.sources, &scene);
        let exact = v * 6.0 * PI * mu;
        assert!((ft.force[0] - exact).norm() <= 1e-6 * exact.norm(), "force {:?}", ft.force[0]);
        assert!(ft.torque[0].norm() <= 1e-6 * exact.norm());
    }
}

/// Boundary data generated by stokeslets inside each sphere are matched by
/// the solver to within the GMRES tolerance.
#[test]
fn manufactured_interior_stokeslets() {
    let params = SolverParams::default();
    let centers = [Point3::zeros(), Point3::new(2.6, 0.4, -0.2)];
    let scene = Scene::new(
        1.0,
        BackgroundFlow::None,
        centers.iter().map(|c| SphereState::fixed(*c)).collect(),
    )
    .unwrap();
    let poles = [
        (centers[0] + Vector3::new(0.1, -0.2, 0.15), Vector3::new(1.0, 0.5, -0.3)),
        (centers[1] + Vector3::new(-0.2, 0.1, 0.1), Vector3::new(-0.4, 1.0, 0.7)),
    ];
    let exact = |x: &Point3| -> Vector3<f64> { poles.iter().map(|(y, f)| stokeslet(&(x - y), f, 1.0).unwrap()).sum() };
    let sys = System::build(&scene, &params).unwrap();
    let data: Vec<Vector3<f64>> = sys.collocation().iter().flat_map(|n| n.points.iter().map(exact)).collect();
    let res = sys.solve_data(&data).unwrap();
    assert!(res.converged);

    // Sample points nudged just outside the closed spheres.
    let off: Vec<Point3> = residual_samples(&scene, 500, 1)
        .unwrap()
        .iter()
        .zip(&centers)
        .flat_map(|(pts, c)| pts.iter().map(move |x| c + (x - c) * (1.0 + 1e-12)))
        .collect();
    let u = evaluate_flow(&off, &res.sources, &scene, false).unwrap();
    let scale = off.iter().fold(0.0f64, |m, x| m.max(exact(x).norm()));
    let err = off.iter().zip(&u).fold(0.0f64, |m, (x, v)| m.max((v - exact(x)).norm()));
    assert!(err <= 10.0 * params.gmres_tol * scale, "relative error {:e}", err / scale);
}

/// A sphere held fixed in a uniform stream feels the Stokes drag, and the
/// residual check reports a small relative error.
#[test]
fn fixed_sphere_in_uniform_stream() {
    let u0 = Vector3::new(0.0, 1.0, 0.0);
    let scene = Scene::new(
        1.0,
        BackgroundFlow::Uniform { velocity: u0 },
        vec![SphereState::fixed(Point3::zeros())],
    )
    .unwrap();
    let res = solve(&scene, &SolverParams::default()).unwrap();
    let ft = forces_torques(&res.sources, &scene);
    // The disturbance pushes the fluid against the stream.
    assert!((ft.force[0] + u0 * 6.0 * PI).norm() <= 1e-6 * 6.0 * PI);
    let report = surface_residual(&scene, &res.sources, 500, 0).unwrap();
    assert!(report.max < 1e-4);
    // The total flow vanishes on the surface and tends to the stream far away.
    let far = evaluate_flow(&[Point3::new(0.0, 0.0, 1e4)], &res.sources, &scene, true).unwrap()[0];
    assert!((far - u0).norm() < 1e-3);
}

#[test]
fn flow_evaluation_rejects_interior_points() {
    let scene = Scene::new(
        1.0,
        BackgroundFlow::None,
        vec![SphereState::translating(Point3::zeros(), Vector3::x())],
    )
    .unwrap();
    let res = solve(&scene, &SolverParams { n_proxy: 100, ..Default::default() }).unwrap();
    assert!(evaluate_flow(&[Point3::new(0.5, 0.0, 0.0)], &res.sources, &scene, false).is_err());
    assert!(evaluate_flow(&[Point3::new(1.0, 0.0, 0.0)], &res.sources, &scene, false).is_err());
    let u = evaluate_flow(&[Point3::new(3.0, 0.0, 0.0)], &res.sources, &scene, false).unwrap();
    // Stokes solution on the axis: u = (3/(2r) − 1/(2r³)) U.
    let exact = 1.5 / 3.0 - 0.5 / 27.0;
    assert!((u[0].x - exact).abs() < 1e-3);
}

/// Solving with the same inputs twice yields identical strengths.
#[test]
fn repeat_solves_are_identical() {
    let scene = Scene::new(
        1.0,
        BackgroundFlow::Shear { rate: 1.0 },
        vec![SphereState::fixed(Point3::zeros()), SphereState::fixed(Point3::new(0.0, 2.1, 0.0))],
    )
    .unwrap();
    let p = SolverParams { n_proxy: 150, ..Default::default() };
    let a = solve(&scene, &p).unwrap();
    let b = solve(&scene, &p).unwrap();
    assert_eq!(a.sources, b.sources);
    assert_eq!(a.iterations, b.iterations);
}
