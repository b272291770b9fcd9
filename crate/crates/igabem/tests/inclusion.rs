use std::f64::consts::PI;

use igabem::inclusion::{
    bolt_local_frame, bolt_regular_analytic, bolt_singular_analytic, GeneralInclusion, GridAxis, GridDegree,
    LinearInclusion, SegmentEnd,
};
use igabem::kernels::{kernel_e, ElasticConstants, Matrix3x6};
use igabem::models;
use igabem::nurbs::{KnotVector, NurbsSurface, Vec3};
use igabem::quadrature::{gauss_rule, QuadratureConfig};
use igabem::recovery::{volume_row, Inclusion};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

mod common;
use common::{cone_oracle, line_oracle, rel_err};

#[test]
fn regular_bolt_integrals_match_line_quadrature() {
    let mut rng = StdRng::seed_from_u64(21);
    for _ in 0..50 {
        let h = rng.gen_range(0.2..2.0);
        let radius = rng.gen_range(0.01..0.1);
        let yt = rng.gen_range(0.05..2.0) * h;
        let zt = rng.gen_range(-1.0..2.0) * h;
        let k = ElasticConstants::new(1.0, rng.gen_range(0.0..0.45)).unwrap();
        for l in [1, 2] {
            let exact = bolt_regular_analytic(h, radius, yt, zt, &k, l).unwrap();
            let num = line_oracle(h, radius, yt, zt, &k, l);
            assert!(rel_err(&exact, &num) < 1e-8, "H {h} R {radius} y {yt} z {zt} l {l}: {:e}", rel_err(&exact, &num));
        }
    }
}

#[test]
fn regular_bolt_shape_functions_add_up() {
    // M1 + M2 = 1: the sum equals the unweighted integral
    let k = ElasticConstants::new(1.0, 0.2).unwrap();
    let (h, radius, yt, zt) = (0.7, 0.03, 0.2, 0.35);
    let sum = bolt_regular_analytic(h, radius, yt, zt, &k, 1).unwrap()
        + bolt_regular_analytic(h, radius, yt, zt, &k, 2).unwrap();
    let g = gauss_rule(64).unwrap();
    let y = Vec3::new(0.0, yt, zt);
    let mut whole = Matrix3x6::zeros();
    for half in [(0.0, zt), (zt, h)] {
        for (t, w) in g.points.iter().zip(&g.weights) {
            let z = half.0 + 0.5 * (half.1 - half.0) * (t + 1.0);
            whole += kernel_e(&y, &Vec3::new(0.0, 0.0, z), &k).unwrap()
                * (w * 0.5 * (half.1 - half.0) * PI * radius * radius);
        }
    }
    assert!(rel_err(&sum, &whole) < 1e-9);
}

#[test]
fn regular_bolt_integrals_continue_onto_the_axis() {
    let k = ElasticConstants::new(1.0, 0.3).unwrap();
    let (h, radius) = (1.0, 0.05);
    for zt in [-0.5, 1.8] {
        for l in [1, 2] {
            let on = bolt_regular_analytic(h, radius, 0.0, zt, &k, l).unwrap();
            let near = bolt_regular_analytic(h, radius, 1e-7, zt, &k, l).unwrap();
            assert!(rel_err(&near, &on) < 1e-6, "z {zt} l {l}: {:e}", rel_err(&near, &on));
            let e = rel_err(&on, &line_oracle(h, radius, 1e-12, zt, &k, l));
            assert!(e < 1e-8, "oracle {e:e}");
        }
    }
    assert!(bolt_regular_analytic(h, radius, 0.0, 0.5, &k, 1).is_err());
}

#[test]
fn singular_bolt_integrals_match_cone_quadrature() {
    for (h, radius, nu) in [(1.0, 0.025, 0.0), (0.25, 0.025, 0.3), (0.5, 0.1, 0.2)] {
        let k = ElasticConstants::new(1.0, nu).unwrap();
        for end in [SegmentEnd::Top, SegmentEnd::Bottom] {
            for l in [1, 2] {
                let exact = bolt_singular_analytic(h, radius, &k, l, end).unwrap();
                let num = cone_oracle(h, radius, &k, l, end);
                assert!(rel_err(&exact, &num) < 1e-6, "H {h} R {radius} {end:?} l {l}: {:e}", rel_err(&exact, &num));
            }
        }
    }
}

#[test]
fn singular_bottom_is_negated_top() {
    let k = ElasticConstants::new(1.0, 0.25).unwrap();
    for l in [1, 2] {
        let top = bolt_singular_analytic(0.6, 0.04, &k, l, SegmentEnd::Top).unwrap();
        let bottom = bolt_singular_analytic(0.6, 0.04, &k, l, SegmentEnd::Bottom).unwrap();
        assert_eq!(top, -bottom);
    }
}

#[test]
fn bolt_frame_is_orthonormal() {
    let mut rng = StdRng::seed_from_u64(5);
    for _ in 0..100 {
        let mut v = || Vec3::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
        let (a, b, y) = (v(), v(), v());
        let f = bolt_local_frame(&a, &b, &y).unwrap();
        assert!((f.t.transpose() * f.t - nalgebra::Matrix3::identity()).abs().max() < 1e-13);
        assert!((f.t.determinant() - 1.0).abs() < 1e-13);
        let local = f.t.transpose() * (y - a);
        assert!(local.x.abs() < 1e-12);
        assert!((local.y - f.y_loc).abs() < 1e-12 && (local.z - f.z_loc).abs() < 1e-12);
        let d = b - a;
        let foot = a + d * ((y - a).dot(&d) / d.norm_squared());
        assert!((f.y_loc - (y - foot).norm()).abs() < 1e-12);
    }
}

#[test]
fn bolt_rows_fill_axial_columns_only() {
    let bolt = LinearInclusion::new(vec![Vec3::new(1.0, 0.0, 0.0), Vec3::new(2.0, 0.0, 0.5)], 0.025, 2.0).unwrap();
    let k = ElasticConstants::new(1.0, 0.0).unwrap();
    let row = volume_row(&[Inclusion::Linear(bolt)], &Vec3::new(0.0, 0.3, 0.2), None, &k, &QuadratureConfig::default())
        .unwrap();
    assert_eq!(row.shape(), (3, 12));
    for c in 0..12 {
        let nonzero = row.column(c).amax() > 0.0;
        assert_eq!(nonzero, c % 6 == 2, "column {c}");
    }
}

#[test]
fn wall_grid_points_have_no_volume_row() {
    let m = models::tunnel_bolts().unwrap();
    let a = m.build().unwrap();
    let ops = a.operators().unwrap();
    let on_wall: Vec<usize> = (0..a.n_grid()).filter(|&i| a.grid[i].boundary.is_some()).collect();
    assert_eq!(on_wall.len(), 3);
    for i in on_wall {
        assert_eq!(ops.b0_bar.rows(3 * i, 3).amax(), 0.0);
        assert!(ops.c_bar.rows(3 * i, 3).amax() == 0.0);
    }
}

fn block(lo: [f64; 3], hi: [f64; 3], grid: [GridAxis; 3]) -> GeneralInclusion {
    let face = |z: f64| {
        NurbsSurface::new(
            KnotVector::bezier(1),
            KnotVector::bezier(1),
            vec![
                Vec3::new(lo[0], lo[1], z),
                Vec3::new(hi[0], lo[1], z),
                Vec3::new(lo[0], hi[1], z),
                Vec3::new(hi[0], hi[1], z),
            ],
            vec![1.0; 4],
        )
        .unwrap()
    };
    GeneralInclusion::new(face(lo[2]), face(hi[2]), grid).unwrap()
}

fn quadratic_grid() -> [GridAxis; 3] {
    [GridAxis::new(GridDegree::Quadratic, 1).unwrap(); 3]
}

fn total_e(incl: &GeneralInclusion, y: &Vec3, cfg: &QuadratureConfig) -> Matrix3x6 {
    let k = ElasticConstants::new(1.0, 0.25).unwrap();
    let mut out = vec![Matrix3x6::zeros(); incl.n_nodes()];
    incl.integrate_e(y, incl.locate(y), &k, cfg, &mut out).unwrap();
    out.iter().sum()
}

#[test]
fn small_far_block_acts_like_a_point() {
    let k = ElasticConstants::new(1.0, 0.25).unwrap();
    let b = block([4.9, -0.1, -0.1], [5.1, 0.1, 0.1], quadratic_grid());
    let y = Vec3::zeros();
    let num = total_e(&b, &y, &QuadratureConfig::default());
    let point = kernel_e(&y, &Vec3::new(5.0, 0.0, 0.0), &k).unwrap() * 0.008;
    assert!(rel_err(&num, &point) < 0.05);
}

#[test]
fn mirrored_block_flips_the_integral() {
    let cfg = QuadratureConfig::default();
    let a = total_e(&block([1.0, -0.5, -0.3], [2.0, 0.5, 0.4], quadratic_grid()), &Vec3::zeros(), &cfg);
    let b = total_e(&block([-2.0, -0.5, -0.4], [-1.0, 0.5, 0.3], quadratic_grid()), &Vec3::zeros(), &cfg);
    assert!((a + b).abs().max() < 1e-10 * a.abs().max());
}

fn node_blocks(incl: &GeneralInclusion, y: &Vec3, cfg: &QuadratureConfig) -> Vec<Matrix3x6> {
    let k = ElasticConstants::new(1.0, 0.25).unwrap();
    let mut out = vec![Matrix3x6::zeros(); incl.n_nodes()];
    incl.integrate_e(y, incl.locate(y), &k, cfg, &mut out).unwrap();
    out
}

#[test]
fn singular_volume_integral_converges() {
    let b = block([0.0, 0.0, 0.0], [1.0, 0.6, 0.8], quadratic_grid());
    let fine_cfg =
        QuadratureConfig { singular_order: 16, gauss_cap: 24, gauss_base: 8.0, ..QuadratureConfig::default() };
    for y in [b.point(&[0.5, 0.5, 0.5]), b.point(&[0.3, 0.7, 0.2]), b.point(&[0.0, 0.5, 0.5])] {
        let coarse = node_blocks(&b, &y, &QuadratureConfig::default());
        let fine = node_blocks(&b, &y, &fine_cfg);
        let scale = fine.iter().map(|m| m.abs().max()).fold(0.0, f64::max);
        let diff = coarse.iter().zip(&fine).map(|(a, b)| (a - b).abs().max()).fold(0.0, f64::max);
        assert!(diff < 5e-3 * scale, "at {y}: {:e}", diff / scale);
    }
}

#[test]
fn stress_grid_shapes_are_a_partition_of_unity() {
    let b = block(
        [0.0; 3],
        [1.0; 3],
        [
            GridAxis::new(GridDegree::Quadratic, 3).unwrap(),
            GridAxis::new(GridDegree::Linear, 2).unwrap(),
            GridAxis::new(GridDegree::Constant, 1).unwrap(),
        ],
    );
    let mut rng = StdRng::seed_from_u64(8);
    for _ in 0..200 {
        let s = [rng.gen(), rng.gen(), rng.gen()];
        let sh = b.shape(&s).unwrap();
        let sum: f64 = sh.iter().map(|v| v.1).sum();
        assert!((sum - 1.0).abs() < 1e-13);
        for d in 0..3 {
            let g: f64 = sh.iter().map(|v| v.2[d]).sum();
            assert!(g.abs() < 1e-12);
        }
    }
}

#[test]
fn block_jacobian_and_orientation() {
    let b = block([0.0; 3], [2.0, 1.0, 0.5], quadratic_grid());
    let p = b.map(&[0.3, 0.6, 0.1]).unwrap();
    assert!((p.det - 1.0).abs() < 1e-14);
    // swapping the faces turns the volume inside out
    assert!(GeneralInclusion::new(b.top.clone(), b.bottom.clone(), quadratic_grid()).is_err());
    assert!(b.locate(&Vec3::new(1.0, 0.5, 0.25)).is_some());
    assert!(b.locate(&Vec3::new(3.0, 0.5, 0.25)).is_none());
}
