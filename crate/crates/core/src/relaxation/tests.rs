use nalgebra::Vector2;
use rand::{Rng, SeedableRng};

use super::*;
use crate::geometry::analytic::{AxisBox, Ball};
use crate::geometry::Aabb;

fn field_for<S: crate::geometry::Surface<2>>(surface: &S, lc: f64) -> LevelSetField<2> {
    LevelSetField::build(surface, LevelSetField::default_domain(surface, lc), lc).unwrap()
}

fn unit_square() -> AxisBox<2> {
    AxisBox::new(Vector2::zeros(), Vector2::new(1.0, 1.0))
}

#[test]
fn square_lattice_count() {
    let field = field_for(&unit_square(), 0.4);
    let ps = lattice_seed(&field, 0.1).unwrap();
    assert_eq!(ps.len(), 100);
    assert!((ps.volume - 0.01).abs() < 1e-15);
    assert_eq!(ps.mass, ps.volume);
}

#[test]
fn circle_lattice_count() {
    let field = field_for(&Ball::new(Vector2::zeros(), 1.0), 0.2);
    let ps = lattice_seed(&field, 0.05).unwrap();
    let expected = std::f64::consts::PI / 0.0025;
    assert!((ps.len() as f64 - expected).abs() < 0.02 * expected, "{}", ps.len());
}

#[test]
fn seeding_errors() {
    let field = field_for(&Ball::new(Vector2::zeros(), 0.05), 0.1);
    assert!(matches!(lattice_seed(&field, 5.0), Err(Error::EmptySeed { .. })));
    assert!(matches!(lattice_seed(&field, -1.0), Err(Error::Configuration(_))));
}

#[test]
fn pair_forces_are_opposite() {
    let field = field_for(&Ball::new(Vector2::zeros(), 1.0), 0.1);
    let kernel = Kernel::for_spacing(0.1);
    let mut ps = ParticleSet::new(vec![Vector2::new(0.0, 0.0), Vector2::new(0.1, 0.0)], 0.1);
    ps.update_neighbors(kernel.cutoff());
    compute_forces(&mut ps, &field, &kernel, false, 1.0);
    assert_eq!(ps.forces[0], -ps.forces[1]);
    assert!(ps.forces[0].x < 0.0 && ps.forces[0].y == 0.0);
}

#[test]
fn uniform_lattice_interior_force_vanishes() {
    let dx = 0.05;
    let field = field_for(&AxisBox::new(Vector2::new(-1.0, -1.0), Vector2::new(1.0, 1.0)), 0.2);
    let kernel = Kernel::for_spacing(dx);
    let mut ps = lattice_seed(&field, dx).unwrap();
    ps.update_neighbors(kernel.cutoff());
    compute_forces(&mut ps, &field, &kernel, false, 1.0);
    let centre = (0..ps.len())
        .min_by(|&a, &b| ps.positions[a].norm().total_cmp(&ps.positions[b].norm()))
        .unwrap();
    assert!(ps.forces[centre].norm() < 1e-10 / dx);
}

#[test]
fn interior_cluster_momentum_balance() {
    let dx = 0.05;
    let field = field_for(&Ball::new(Vector2::zeros(), 1.0), 0.2);
    let kernel = Kernel::for_spacing(dx);
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
    let positions = (0..300)
        .map(|_| Vector2::new(rng.gen_range(-0.3..0.3), rng.gen_range(-0.3..0.3)))
        .collect();
    let mut ps = ParticleSet::new(positions, dx);
    ps.update_neighbors(kernel.cutoff());
    compute_forces(&mut ps, &field, &kernel, false, 1.0);
    let net: Vector2<f64> = ps.forces.iter().map(|f| f * ps.mass).sum();
    let scale: f64 = ps.forces.iter().map(|f| f.norm() * ps.mass).sum();
    assert!(net.norm() < 1e-10 * scale);
}

#[test]
fn neighbor_lists_are_symmetric() {
    let field = field_for(&Ball::new(Vector2::zeros(), 1.0), 0.2);
    let mut ps = lattice_seed(&field, 0.05).unwrap();
    ps.positions.iter_mut().enumerate().for_each(|(i, p)| p.x += 0.01 * ((i * 7919) % 13) as f64 / 13.0);
    ps.update_neighbors(0.13);
    for a in 0..ps.len() {
        for &b in &ps.neighbors[a] {
            assert!(ps.neighbors[b].binary_search(&a).is_ok());
        }
    }
}

#[test]
fn time_step_rule() {
    assert!((time_step(0.2, 4.0 * 0.2, 1.0) - 0.125).abs() < 1e-15);
    assert_eq!(time_step(0.2, 0.0, 1.0), 1.0);
    assert_eq!(time_step(0.2, 1e-12, 1.0), 1.0);
}

#[test]
fn bounding_projects_to_half_spacing() {
    let field = field_for(&AxisBox::new(Vector2::new(-1.0, -1.0), Vector2::new(0.0, 1.0)), 0.4);
    let dx = 0.1;
    let mut p = Vector2::new(0.0, 0.3);
    assert!(bound_particle(&field, &mut p, dx).unwrap());
    assert!((p - Vector2::new(-0.05, 0.3)).norm() < 1e-12);
    assert!((field.probe_phi(&p).unwrap() + 0.05).abs() < 1e-12);
    let mut deep = Vector2::new(-0.1, 0.3);
    assert!(!bound_particle(&field, &mut deep, dx).unwrap());
    assert_eq!(deep, Vector2::new(-0.1, 0.3));
}

#[test]
fn escaping_particle_is_reported() {
    let field = field_for(&Ball::new(Vector2::zeros(), 1.0), 0.2);
    let kernel = Kernel::for_spacing(0.05);
    // the step length is bounded by h/32, so only an inconsistent state escapes
    let mut ps = ParticleSet::new(vec![Vector2::zeros(), Vector2::new(9.0, 0.0)], 0.05);
    ps.forces = vec![Vector2::zeros(), Vector2::new(1.0, 0.0)];
    let err = step(&mut ps, &field, &kernel, 1.0).map(|_| ()).unwrap_err();
    assert!(matches!(err, Error::ParticleEscaped { index: 1, .. }), "{err}");
}

#[test]
fn relaxed_circle_stays_bounded_and_is_deterministic() {
    let dx = 0.05;
    let field = field_for(&Ball::new(Vector2::zeros(), 0.5), dx * 4.0);
    let kernel = Kernel::for_spacing(dx);
    let config = RelaxConfig {
        iterations: 60,
        ..RelaxConfig::default()
    };
    let mut a = lattice_seed(&field, dx).unwrap();
    let n = a.len();
    let series = relax(&mut a, &field, &kernel, &config).unwrap();
    assert_eq!(series.len(), 60);
    assert_eq!(a.len(), n);
    for p in &a.positions {
        assert!(field.probe_phi(p).unwrap() <= -0.5 * dx + 0.1 * field.lf());
    }
    let mut b = lattice_seed(&field, dx).unwrap();
    relax(&mut b, &field, &kernel, &config).unwrap();
    assert_eq!(write_csv(&a), write_csv(&b));
    let domain: Aabb<2> = field.domain();
    assert!(a.positions.iter().all(|p| domain.contains_point(p)));
}
