use igabem::nurbs::{KnotVector, NurbsCurve, NurbsSurface, Vec3};
use igabem::patch::{
    build_circular_tunnel, excavation_traction, half_circle, half_cylinder, infinite_shape, InfiniteMode, Patch,
};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

fn unit_square() -> Patch {
    let s = NurbsSurface::new(
        KnotVector::bezier(1),
        KnotVector::bezier(1),
        vec![Vec3::new(0.0, 0.0, 0.0), Vec3::new(1.0, 0.0, 0.0), Vec3::new(0.0, 1.0, 0.0), Vec3::new(1.0, 1.0, 0.0)],
        vec![1.0; 4],
    )
    .unwrap();
    Patch::finite("square", s)
}

fn flat_annulus_strip() -> Patch {
    let outer = NurbsCurve::polyline(vec![Vec3::new(2.0, 0.0, 0.0), Vec3::new(0.0, 2.0, 0.0)]).unwrap();
    let inner = NurbsCurve::polyline(vec![Vec3::new(1.0, 0.0, 0.0), Vec3::new(0.0, 1.0, 0.0)]).unwrap();
    Patch::special("strip", outer, inner).unwrap()
}

fn check_tangents(p: &Patch, rng: &mut StdRng, eta_max: f64) {
    let h = 1e-6;
    for _ in 0..200 {
        let (xi, eta): (f64, f64) = (rng.gen_range(0.01..0.99), rng.gen_range(0.01..eta_max));
        // keep the difference inside one knot span
        if (xi - 0.5).abs() < 1e-4 {
            continue;
        }
        let m = p.map(xi, eta).unwrap();
        let dxi = (p.point(xi + h, eta).unwrap() - p.point(xi - h, eta).unwrap()) / (2.0 * h);
        let deta = (p.point(xi, eta + h).unwrap() - p.point(xi, eta - h).unwrap()) / (2.0 * h);
        assert!((dxi - m.dxi).norm() <= 1e-6 * m.dxi.norm().max(1.0), "{}: dxi {dxi} vs {}", p.label, m.dxi);
        assert!((deta - m.deta).norm() <= 1e-6 * m.deta.norm().max(1.0), "{}: deta {deta} vs {}", p.label, m.deta);
        assert!((m.normal.norm() - 1.0).abs() < 1e-12);
        assert!((m.jac - m.dxi.cross(&m.deta).norm()).abs() <= 1e-12 * m.jac);
    }
}

#[test]
fn flat_square_has_unit_jacobian() {
    let p = unit_square();
    for (xi, eta) in [(0.0, 0.0), (0.3, 0.7), (1.0, 0.5)] {
        let m = p.map(xi, eta).unwrap();
        assert!((m.normal - Vec3::z()).norm() < 1e-15);
        assert!((m.jac - 1.0).abs() < 1e-15);
    }
}

#[test]
fn barrel_is_exactly_circular() {
    let p = Patch::finite("barrel", half_cylinder(1.0, 2.0, true));
    for i in 0..=50 {
        for j in 0..=4 {
            let x = p.point(i as f64 / 50.0, j as f64 / 4.0).unwrap();
            assert!((x.x * x.x + x.z * x.z - 1.0).abs() < 1e-13);
        }
    }
}

#[test]
fn tangents_match_finite_differences() {
    let mut rng = StdRng::seed_from_u64(9);
    for p in build_circular_tunnel(1.0, 2.0, InfiniteMode::PlaneStrain).unwrap() {
        check_tangents(&p, &mut rng, if p.is_infinite() { 0.9 } else { 0.99 });
    }
    let curved = Patch::special("ring", half_circle(2.0, 0.0, true), half_circle(1.0, 0.0, true)).unwrap();
    check_tangents(&curved, &mut rng, 0.99);
    check_tangents(&flat_annulus_strip(), &mut rng, 0.99);
}

#[test]
fn infinite_shape_functions() {
    let (m, _) = infinite_shape(0.0).unwrap();
    assert_eq!(m, [1.0, 0.0]);
    let (m, _) = infinite_shape(0.5).unwrap();
    assert_eq!(m, [0.0, 1.0]);
    for eta in [0.1, 0.37, 0.8, 0.99] {
        let (m, d) = infinite_shape(eta).unwrap();
        assert!((d[0] + d[1]).abs() < 1e-12 * d[1]);
        assert!((m[0] + m[1] - 1.0).abs() < 1e-12 * m[1].max(1.0));
    }
    assert!(infinite_shape(1.0).is_err());
}

#[test]
fn infinite_patch_reaches_second_row_and_grows() {
    let patches = build_circular_tunnel(1.0, 2.0, InfiniteMode::PlaneStrain).unwrap();
    let front = patches.iter().find(|p| p.label == "front-upper").unwrap();
    // second control row sits one radius further along the axis
    let x = front.point(0.5, 0.5).unwrap();
    assert!((x - Vec3::new(0.0, 2.0, 1.0)).norm() < 1e-14);
    for &eps in &[1e-2, 1e-3, 1e-4] {
        let a = front.map(0.3, 1.0 - eps).unwrap().jac;
        let b = front.map(0.3, 1.0 - 2.0 * eps).unwrap().jac;
        assert!(a > b);
    }
}

#[test]
fn special_patch_is_ruled_between_its_curves() {
    let outer = half_circle(2.0, 0.0, true);
    let inner = half_circle(1.0, 0.0, true);
    let p = Patch::special("ring", outer.clone(), inner.clone()).unwrap();
    for i in 0..=10 {
        let xi = i as f64 / 10.0;
        assert!((p.point(xi, 0.0).unwrap() - outer.point(xi).unwrap()).norm() < 1e-15);
        assert!((p.point(xi, 1.0).unwrap() - inner.point(xi).unwrap()).norm() < 1e-15);
        let mid = (outer.point(xi).unwrap() + inner.point(xi).unwrap()) * 0.5;
        assert!((p.point(xi, 0.5).unwrap() - mid).norm() < 1e-15);
    }
    let s = flat_annulus_strip();
    let n0 = s.map(0.2, 0.3).unwrap().normal;
    for (xi, eta) in [(0.5, 0.5), (0.9, 0.1)] {
        let n = s.map(xi, eta).unwrap().normal;
        assert!((n - n0).norm() < 1e-14);
        assert!(n.cross(&Vec3::z()).norm() < 1e-14);
    }
}

#[test]
fn tunnel_normals_point_into_the_opening() {
    for p in build_circular_tunnel(1.0, 2.0, InfiniteMode::PlaneStrain).unwrap() {
        for (xi, eta) in [(0.2, 0.1), (0.5, 0.5), (0.8, 0.3)] {
            let m = p.map(xi, eta).unwrap();
            let radial = Vec3::new(m.x.x, 0.0, m.x.z);
            assert!(m.normal.dot(&radial) < -0.99 * radial.norm(), "{} at ({xi}, {eta})", p.label);
        }
    }
}

#[test]
fn tunnel_ring_control_points() {
    let patches = build_circular_tunnel(1.0, 2.0, InfiniteMode::PlaneStrain).unwrap();
    let finite: usize = patches.iter().filter(|p| !p.is_infinite()).map(|p| p.n_field()).sum();
    // two half cylinders of 5 × 2 functions share their seams: 16 distinct control points
    assert_eq!(finite, 20);
    let mut pts: Vec<Vec3> = Vec::new();
    for p in patches.iter().filter(|p| !p.is_infinite()) {
        for (xi, eta) in p.field_anchors() {
            let x = p.point(xi, eta).unwrap();
            if !pts.iter().any(|q| (q - x).norm() < 1e-9) {
                pts.push(x);
            }
        }
    }
    assert_eq!(pts.len(), 16);
}

#[test]
fn excavation_tractions() {
    let n = Vec3::new(0.6, 0.0, 0.8);
    let t = excavation_traction(&[-2.0, -2.0, -2.0, 0.0, 0.0, 0.0], &n);
    assert!((t - n * 2.0).norm() < 1e-15);
    let t = excavation_traction(&[0.0, 0.0, -1.0, 0.0, 0.0, 0.0], &Vec3::z());
    assert!((t - Vec3::z()).norm() < 1e-15);
    // depth stress with k0 = 0.8 and a shear component, checked by hand
    let sv = [-0.8, -0.8, -1.0, 0.0, 0.0, 0.1];
    for n in [Vec3::x(), Vec3::new(0.0, 0.6, 0.8), Vec3::new(0.6, 0.0, -0.8)] {
        let t = excavation_traction(&sv, &n);
        let by_hand = Vec3::new(0.8 * n.x - 0.1 * n.z, 0.8 * n.y, -0.1 * n.x + 1.0 * n.z);
        assert!((t - by_hand).norm() < 1e-15);
    }
}

#[test]
fn invalid_patches_are_rejected() {
    let a = NurbsCurve::polyline(vec![Vec3::zeros(), Vec3::x()]).unwrap();
    let b = half_circle(1.0, 0.0, true);
    assert!(Patch::special("bad", a.clone(), b).is_err());
    // far row must differ from the edge
    assert!(Patch::infinite("bad", a.clone(), a.points.clone(), InfiniteMode::Decay).is_err());
    assert!(build_circular_tunnel(0.0, 1.0, InfiniteMode::Decay).is_err());
}
