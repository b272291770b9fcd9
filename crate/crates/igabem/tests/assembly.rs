use igabem::assembly::{assemble, BoundaryMesh, TractionMode};
use igabem::kernels::{kernel_t, kernel_u, ElasticConstants};
use igabem::models;
use igabem::nurbs::{KnotVector, NurbsSurface, Vec3};
use igabem::patch::{excavation_traction, Patch};
use igabem::quadrature::{gauss_rule, QuadratureConfig};
use nalgebra::{DVector, Matrix3};

fn elastic_mesh() -> BoundaryMesh {
    let m = models::tunnel_elastic().unwrap();
    BoundaryMesh::new(m.patches, m.virgin_stress, m.traction, &m.quadrature).unwrap()
}

#[test]
fn bundled_meshes_have_expected_unknowns() {
    assert_eq!(elastic_mesh().n_dof(), 48);
    let m = models::tunnel_bolts_unbolted().unwrap();
    let mesh = BoundaryMesh::new(m.patches, m.virgin_stress, m.traction, &m.quadrature).unwrap();
    assert_eq!(mesh.n_dof(), 108);
}

#[test]
fn traction_kernel_sums_to_jump_term() {
    let mesh = elastic_mesh();
    let k = ElasticConstants::new(1.0, 0.25).unwrap();
    let cfg = QuadratureConfig::default();
    // inside the opening the closed tunnel surface sees the full jump
    for y in [Vec3::new(0.0, 0.0, 0.0), Vec3::new(0.3, 0.5, -0.4), Vec3::new(-0.5, -1.5, 0.2)] {
        let s = mesh.integrate_source(&y, &[], &k, &cfg).unwrap();
        assert!((s.t_sum - Matrix3::identity()).abs().max() < 1e-4, "at {y}: {}", s.t_sum);
    }
    for y in [Vec3::new(0.0, 0.0, 2.0), Vec3::new(2.5, 0.7, 0.0)] {
        let s = mesh.integrate_source(&y, &[], &k, &cfg).unwrap();
        assert!(s.t_sum.abs().max() < 1e-4, "at {y}: {}", s.t_sum);
    }
}

#[test]
fn constant_field_reproduces_itself() {
    let mesh = elastic_mesh();
    let k = ElasticConstants::new(1.0, 0.0).unwrap();
    let sys = assemble(&mesh, &k, &QuadratureConfig::default()).unwrap();
    let c = Vec3::new(0.3, -1.2, 0.7);
    let u = DVector::from_iterator(3 * mesh.n_nodes(), (0..mesh.n_nodes()).flat_map(|_| c.iter().copied()));
    // the regularised integral vanishes for a rigid translation and A = I remains
    let lu = &sys.l * &u;
    assert!((lu - &u).amax() < 1e-10);
}

#[test]
fn zero_virgin_stress_gives_zero_solution() {
    let mut m = models::tunnel_elastic().unwrap();
    m.virgin_stress = [0.0; 6];
    let a = m.build().unwrap();
    let sol = a.solve(&a.operators().unwrap(), &m.solver).unwrap();
    assert_eq!(sol.driver.x.amax(), 0.0);
}

#[test]
fn displacement_kernel_is_reciprocal() {
    let k = ElasticConstants::new(1.0, 0.3).unwrap();
    let (y, x) = (Vec3::new(1.0, 0.2, 0.0), Vec3::new(0.0, 1.5, -0.4));
    let a = kernel_u(&y, &x, &k).unwrap();
    let b = kernel_u(&x, &y, &k).unwrap();
    assert!((a - b.transpose()).abs().max() < 1e-16);
}

#[test]
fn doubling_the_point_cap_barely_moves_the_solution() {
    let m = models::tunnel_elastic().unwrap();
    let crown: Vec<Vec3> = (0..6).map(|i| Vec3::new(0.0, 0.0, 1.0 + 0.5 * i as f64)).collect();
    let run = |quad: QuadratureConfig| {
        let mut m = m.clone();
        m.quadrature = quad;
        let a = m.build().unwrap();
        let sol = a.solve(&a.operators().unwrap(), &m.solver).unwrap();
        a.displacement_at(&sol, &crown).unwrap()
    };
    let base = run(QuadratureConfig::default());
    let fine = run(QuadratureConfig { gauss_cap: 24, ..QuadratureConfig::default() });
    for (a, b) in base.iter().zip(&fine) {
        assert!((a - b).norm() < 1e-3 * b.norm(), "{a} vs {b}");
    }
}

fn square_patch() -> Patch {
    let s = NurbsSurface::new(
        KnotVector::bezier(2),
        KnotVector::bezier(1),
        vec![
            Vec3::new(0.0, 0.0, 0.0),
            Vec3::new(0.5, 0.0, 0.1),
            Vec3::new(1.0, 0.0, 0.0),
            Vec3::new(0.0, 1.0, 0.0),
            Vec3::new(0.5, 1.0, 0.1),
            Vec3::new(1.0, 1.0, 0.0),
        ],
        vec![1.0; 6],
    )
    .unwrap();
    Patch::finite("sheet", s)
}

#[test]
fn far_source_integrals_match_tensor_gauss_reference() {
    let virgin = [-0.8, -0.5, -1.0, 0.1, 0.0, 0.2];
    let cfg = QuadratureConfig::default();
    let mesh = BoundaryMesh::new(vec![square_patch()], virgin, TractionMode::Exact, &cfg).unwrap();
    let p = &mesh.patches[0];
    let k = ElasticConstants::new(1.0, 0.2).unwrap();
    let y = Vec3::new(3.0, -2.0, 4.0);
    let s = mesh.integrate_source(&y, &[], &k, &cfg).unwrap();

    let g = gauss_rule(20).unwrap();
    let mut t_nodes = vec![Matrix3::zeros(); mesh.n_nodes()];
    let mut ut = Vec3::zeros();
    for (a, wa) in g.points.iter().zip(&g.weights) {
        for (b, wb) in g.points.iter().zip(&g.weights) {
            let (u, v) = (0.5 * (a + 1.0), 0.5 * (b + 1.0));
            let m = p.map(u, v).unwrap();
            let w = 0.25 * wa * wb * m.jac;
            let t = kernel_t(&y, &m.x, &m.normal, &k).unwrap() * w;
            for (kk, r) in p.field_basis(u, v).unwrap() {
                t_nodes[mesh.dofs[0][kk]] += t * r;
            }
            ut += kernel_u(&y, &m.x, &k).unwrap() * excavation_traction(&virgin, &m.normal) * w;
        }
    }
    for (a, b) in s.t_nodes.iter().zip(&t_nodes) {
        assert!((a - b).abs().max() < 1e-8 * b.abs().max(), "{a} vs {b}");
    }
    assert!((s.ut - ut).norm() < 1e-8 * ut.norm());
}
