use igabem::nurbs::Vec3;
use igabem::patch::half_cylinder;
use igabem::quadrature::{
    gauss_rule, octree_points, partition_regions, pyramid_singular_rule, quadtree_subdivide, rect_points,
    regular_points, singular_points, triangle_singular_rule, Box3, QuadratureConfig, Rect,
};

fn flat(u: f64, v: f64) -> Vec3 {
    Vec3::new(u, v, 0.0)
}

fn uniform_reference(map: &dyn Fn(f64, f64) -> Vec3, rect: &Rect, f: &dyn Fn(&Vec3) -> f64) -> f64 {
    let mut pts = Vec::new();
    rect_points(rect, 32, 32, &mut pts).unwrap();
    pts.iter().map(|q| f(&map(q.u, q.v)) * q.w).sum()
}

#[test]
fn low_order_gauss_rules() {
    let g1 = gauss_rule(1).unwrap();
    assert_eq!(g1.points, vec![0.0]);
    assert_eq!(g1.weights, vec![2.0]);
    let g2 = gauss_rule(2).unwrap();
    let a = 1.0 / 3f64.sqrt();
    assert!((g2.points[0].abs() - a).abs() < 1e-15 && (g2.points[1].abs() - a).abs() < 1e-15);
    assert!(g2.weights.iter().all(|w| (w - 1.0).abs() < 1e-15));
    let g4 = gauss_rule(4).unwrap();
    let i: f64 = g4.points.iter().zip(&g4.weights).map(|(x, w)| x.powi(6) * w).sum();
    assert!((i - 2.0 / 7.0).abs() < 1e-14);
    assert!(gauss_rule(0).is_err());
}

#[test]
fn high_order_rules_integrate_polynomials() {
    for n in [8, 16, 32, 64] {
        let g = gauss_rule(n).unwrap();
        let deg = 2 * n - 2;
        let i: f64 = g.points.iter().zip(&g.weights).map(|(x, w)| x.powi(deg as i32) * w).sum();
        assert!((i - 2.0 / (deg as f64 + 1.0)).abs() < 1e-13, "n = {n}");
    }
}

#[test]
fn greville_grid_gives_four_regions() {
    let r = partition_regions(&flat, &[0.5], &[0.5], 2.0, &|_| true);
    assert_eq!(r.len(), 4);
    let area: f64 = r.iter().map(|x| x.area()).sum();
    assert!((area - 1.0).abs() < 1e-15);
}

#[test]
fn elongated_barrel_is_split() {
    // half barrel of radius 1: arc length π, length 10
    let s = half_cylinder(1.0, 10.0, true);
    let map = |u: f64, v: f64| s.point(u, v).unwrap();
    let r = partition_regions(&map, &[0.5], &[], 2.0, &|_| true);
    assert!(r.len() > 2, "{} regions", r.len());
    let area: f64 = r.iter().map(|x| x.area()).sum();
    assert!((area - 1.0).abs() < 1e-14);
    for x in &r {
        let lu = (map(x.u1, x.v0) - map(x.u0, x.v0)).norm();
        let lv = (map(x.u0, x.v1) - map(x.u0, x.v0)).norm();
        assert!(lv <= 2.0 * lu * 1.0001 && lu <= 2.0 * lv * 1.0001);
    }
}

#[test]
fn far_source_needs_one_region() {
    let cfg = QuadratureConfig::default();
    let sub = quadtree_subdivide(&flat, &Rect::unit(), &Vec3::new(50.0, 50.0, 100.0), &cfg);
    assert_eq!(sub.len(), 1);
    assert!(sub[0].nu <= 5 && sub[0].nv <= 5);
}

#[test]
fn near_corner_source_refines_towards_the_corner() {
    let cfg = QuadratureConfig::default();
    let y = Vec3::new(-0.01, -0.01, 0.01);
    let sub = quadtree_subdivide(&flat, &Rect::unit(), &y, &cfg);
    assert!(sub.len() > 4);
    let smallest = sub.iter().min_by(|a, b| a.rect.area().partial_cmp(&b.rect.area()).unwrap()).unwrap();
    assert_eq!((smallest.rect.u0, smallest.rect.v0), (0.0, 0.0));
    let total: f64 = sub.iter().map(|s| s.rect.area()).sum();
    assert!((total - 1.0).abs() < 1e-14);
}

/// `∫∫ 1/|x - y|² dA` over the unit square: closed form along `v`, graded
/// Gauss along `u`.
fn inverse_square_oracle(y: &Vec3) -> f64 {
    let g = gauss_rule(64).unwrap();
    let breaks = [0.0, 1e-3, 1e-2, 0.05, 0.2, 0.5, 1.0];
    let mut sum = 0.0;
    for w in breaks.windows(2) {
        for (t, wt) in g.points.iter().zip(&g.weights) {
            let u = w[0] + 0.5 * (1.0 + t) * (w[1] - w[0]);
            let s = ((u - y.x).powi(2) + y.z * y.z).sqrt();
            let inner = (((1.0 - y.y) / s).atan() - ((0.0 - y.y) / s).atan()) / s;
            sum += inner * wt * 0.5 * (w[1] - w[0]);
        }
    }
    sum
}

#[test]
fn near_corner_integral_matches_oracle() {
    let cfg = QuadratureConfig::default();
    for y in [Vec3::new(-0.01, -0.01, 0.01), Vec3::new(0.02, 0.03, 0.02), Vec3::new(0.5, 0.5, 0.05)] {
        let pts = regular_points(&flat, &Rect::unit(), &y, &cfg).unwrap();
        let num: f64 = pts.iter().map(|q| q.w / (flat(q.u, q.v) - y).norm_squared()).sum();
        let exact = inverse_square_oracle(&y);
        assert!(((num - exact) / exact).abs() < 1e-6, "{num} vs {exact}");
    }
}

fn barrel_span_error(cfg: &QuadratureConfig, kernel: bool) -> f64 {
    let s = half_cylinder(1.0, 2.0, true);
    let map = |u: f64, v: f64| s.point(u, v).unwrap();
    // one knot span: the barrel parametrisation has a kink at u = 0.5
    let span = Rect::new(0.0, 0.5, 0.0, 1.0);
    let mut worst: f64 = 0.0;
    for y in [Vec3::new(0.0, 0.0, 0.0), Vec3::new(0.5, 1.0, 1.2), Vec3::new(3.0, 0.0, 0.0)] {
        let f = |x: &Vec3| {
            let smooth = (x.x * 0.7).cos() * (1.0 + x.y * x.z);
            if kernel {
                smooth / (x - y).norm()
            } else {
                smooth
            }
        };
        let reference = uniform_reference(&map, &span, &f);
        let pts = regular_points(&map, &span, &y, cfg).unwrap();
        let num: f64 = pts.iter().map(|q| f(&map(q.u, q.v)) * q.w).sum();
        worst = worst.max(((num - reference) / reference).abs());
    }
    worst
}

#[test]
fn quadtree_matches_uniform_rule_for_smooth_integrands() {
    // the subdivision and mapping are exact; the per-region count decides the
    // accuracy, so the rule is run with a higher base count here
    let cfg = QuadratureConfig { gauss_base: 10.0, ..QuadratureConfig::default() };
    for kernel in [false, true] {
        let e = barrel_span_error(&cfg, kernel);
        assert!(e < 1e-8, "relative error {e:e}");
    }
}

#[test]
fn default_rule_accuracy_on_barrel() {
    let cfg = QuadratureConfig::default();
    for kernel in [false, true] {
        let e = barrel_span_error(&cfg, kernel);
        assert!(e < 1e-6, "relative error {e:e}");
    }
}

#[test]
fn corner_apex_gives_two_triangles() {
    let r = triangle_singular_rule(&Rect::unit(), 0.0, 0.0, 8).unwrap();
    assert_eq!(r.triangles.len(), 2);
    let w: f64 = r.points.iter().map(|q| q.w).sum();
    assert!((w - 1.0).abs() < 1e-14);
}

#[test]
fn edge_apex_gives_three_triangles() {
    let rect = Rect::new(0.0, 2.0, 0.0, 1.0);
    let r = triangle_singular_rule(&rect, 1.0, 0.0, 8).unwrap();
    assert_eq!(r.triangles.len(), 3);
    let area: f64 = r
        .triangles
        .iter()
        .map(|[p, a, b]| 0.5 * ((a[0] - p[0]) * (b[1] - p[1]) - (a[1] - p[1]) * (b[0] - p[0])).abs())
        .sum();
    assert!((area - 2.0).abs() < 1e-14);
    let w: f64 = r.points.iter().map(|q| q.w).sum();
    assert!((w - 2.0).abs() < 1e-13);
}

#[test]
fn weakly_singular_corner_integral() {
    // ∫∫ 1/r over the unit square from a corner = 2 ln(1 + √2)
    let exact = 2.0 * (1.0 + 2f64.sqrt()).ln();
    let r = triangle_singular_rule(&Rect::unit(), 0.0, 0.0, 16).unwrap();
    let num: f64 = r.points.iter().map(|q| q.w / (q.u * q.u + q.v * q.v).sqrt()).sum();
    assert!((num - exact).abs() < 1e-6 * exact, "{num} vs {exact}");
    // the Jacobian vanishes at the apex: weights of the innermost points are tiny
    let near = r.points.iter().map(|q| (q.u * q.u + q.v * q.v).sqrt()).fold(f64::INFINITY, f64::min);
    assert!(near < 1e-2);
}

#[test]
fn singular_points_cover_elongated_region() {
    let cfg = QuadratureConfig::default();
    let map = |u: f64, v: f64| Vec3::new(10.0 * u, v, 0.0);
    let pts = singular_points(&map, &Rect::unit(), (0.3, 0.0), &cfg).unwrap();
    let w: f64 = pts.iter().map(|q| q.w).sum();
    assert!((w - 1.0).abs() < 1e-12);
    let y = map(0.3, 0.0);
    let num: f64 = pts.iter().map(|q| 10.0 * q.w / (map(q.u, q.v) - y).norm()).sum();
    // ∫∫ 1/r over [-3, 7] × [0, 1] from the origin, in closed form
    let f = |a: f64, b: f64| {
        a * (b / a + (1.0 + b * b / (a * a)).sqrt()).ln() + b * (a / b + (1.0 + a * a / (b * b)).sqrt()).ln()
    };
    let exact = f(3.0, 1.0) + f(7.0, 1.0);
    assert!((num - exact).abs() < 1e-6 * exact, "{num} vs {exact}");
}

#[test]
fn box_rules_tile_the_volume() {
    let cfg = QuadratureConfig::default();
    let b = Box3::new([0.0; 3], [1.0, 2.0, 0.5]);
    let map = |s: &[f64; 3]| Vec3::new(s[0], s[1], s[2]);
    let pts = octree_points(&map, &b, &Vec3::new(-0.05, -0.05, -0.05), &cfg).unwrap();
    let w: f64 = pts.iter().map(|q| q.w).sum();
    assert!((w - 1.0).abs() < 1e-13);
    let pyr = pyramid_singular_rule(&b, &[0.0, 1.0, 0.25], 6).unwrap();
    let w: f64 = pyr.iter().map(|q| q.w).sum();
    assert!((w - 1.0).abs() < 1e-13);
}

#[test]
fn config_validation() {
    let mut cfg = QuadratureConfig::default();
    assert!(cfg.validate().is_ok());
    cfg.gauss_cap = 0;
    assert!(cfg.validate().is_err());
    let cfg = QuadratureConfig { max_aspect: 0.5, ..QuadratureConfig::default() };
    assert!(cfg.validate().is_err());
}
