use igabem::nurbs::Vec3;
use igabem::oracles::{duncan_fama, kirsch_displacement};

const G: f64 = 0.5;

/// Plane-strain stress (xx, zz, xz) from central differences of the
/// displacement field in the x-z plane.
fn stress(p0: f64, k0: f64, nu: f64, x: f64, z: f64) -> [f64; 3] {
    let h = 1e-5;
    let u = |x: f64, z: f64| kirsch_displacement(p0, k0, 1.0, G, nu, &Vec3::new(x, 0.0, z)).unwrap();
    let dx = (u(x + h, z) - u(x - h, z)) / (2.0 * h);
    let dz = (u(x, z + h) - u(x, z - h)) / (2.0 * h);
    let (exx, ezz, gxz) = (dx.x, dz.z, dx.z + dz.x);
    let lam = 2.0 * G * nu / (1.0 - 2.0 * nu);
    let tr = exx + ezz;
    [lam * tr + 2.0 * G * exx, lam * tr + 2.0 * G * ezz, G * gxz]
}

#[test]
fn kirsch_field_cancels_the_virgin_traction_on_the_hole() {
    // the field is the excavation-induced part: virgin + induced is traction free
    for (k0, nu) in [(0.0, 0.0), (0.5, 0.25), (1.0, 0.3)] {
        for i in 0..12 {
            let th = i as f64 * std::f64::consts::PI / 6.0 + 0.1;
            let (c, s) = (th.cos(), th.sin());
            // evaluate just outside the wall so the stencil stays in the ground
            let r = 1.0 + 2e-5;
            let [sxx, szz, sxz] = stress(1.0, k0, nu, r * c, r * s);
            let tr = [sxx * c + sxz * s - k0 * c, sxz * c + szz * s - s];
            assert!(tr[0].abs() < 1e-4 && tr[1].abs() < 1e-4, "k0 {k0} θ {th}: {tr:?}");
        }
    }
}

#[test]
fn kirsch_induced_stress_dies_out() {
    let near = stress(1.0, 0.5, 0.2, 1.2, 0.9);
    let far = stress(1.0, 0.5, 0.2, 30.0, 20.0);
    // the perturbation decays like 1/r²
    let size = |s: [f64; 3]| s.iter().map(|v| v.abs()).fold(0.0, f64::max);
    assert!(size(far) < 1e-2 * size(near), "{far:?} vs {near:?}");
}

#[test]
fn kirsch_field_is_in_equilibrium() {
    let h = 1e-3;
    for (x, z) in [(1.3, 0.4), (-0.2, 2.0), (2.5, -1.5)] {
        let s = |x: f64, z: f64| stress(1.0, 0.3, 0.25, x, z);
        let div_x = (s(x + h, z)[0] - s(x - h, z)[0] + s(x, z + h)[2] - s(x, z - h)[2]) / (2.0 * h);
        let div_z = (s(x + h, z)[2] - s(x - h, z)[2] + s(x, z + h)[1] - s(x, z - h)[1]) / (2.0 * h);
        assert!(div_x.abs() < 1e-4 && div_z.abs() < 1e-4, "({x}, {z}): {div_x} {div_z}");
    }
}

#[test]
fn kirsch_hydrostatic_is_lame() {
    for (x, z) in [(1.0, 0.0), (0.0, 2.0), (-1.5, 1.5)] {
        let p = Vec3::new(x, 0.0, z);
        let u = kirsch_displacement(2.0, 1.0, 1.0, G, 0.3, &p).unwrap();
        let r = p.norm();
        let lame = -p / r * (2.0 / (2.0 * G * r));
        assert!((u - lame).norm() < 1e-14, "{u} vs {lame}");
    }
}

#[test]
fn kirsch_decays_and_rejects_hole_points() {
    let far = kirsch_displacement(1.0, 0.0, 1.0, G, 0.0, &Vec3::new(0.0, 0.0, 1e4)).unwrap();
    assert!(far.norm() < 1e-3);
    let crown: Vec<f64> = (0..10)
        .map(|i| kirsch_displacement(1.0, 0.0, 1.0, G, 0.0, &Vec3::new(0.0, 0.0, 1.0 + i as f64)).unwrap().z)
        .collect();
    assert!(crown.windows(2).all(|w| w[1].abs() < w[0].abs()));
    assert!(kirsch_displacement(1.0, 0.0, 1.0, G, 0.0, &Vec3::new(0.5, 0.0, 0.0)).is_err());
}

#[test]
fn duncan_fama_reference_values() {
    let r = duncan_fama(1.0, 0.5, 10f64.to_radians(), 1.0, 0.0, 1.0).unwrap();
    assert!((r.sigma_cm - 1.1917).abs() < 1e-4);
    assert!((r.k - 1.4203).abs() < 1e-4);
    assert!((r.p_cr - 0.3340).abs() < 1e-4);
    assert!((r.r_p - 1.303).abs() < 5e-4);
    // the published wall displacement to four significant figures
    assert!((r.u_p - 1.262).abs() < 1e-3, "{}", r.u_p);
    assert!(r.u_p > 1.0);
}

#[test]
fn duncan_fama_joins_the_elastic_solution() {
    let phi = 10f64.to_radians();
    // σ_cm = 2 p0 puts the onset of yield exactly at the wall
    let c_onset = 2.0 * (1.0 - phi.sin()) / (2.0 * phi.cos());
    let elastic = duncan_fama(1.0, 10.0, phi, 1.0, 0.2, 1.0).unwrap();
    assert_eq!(elastic.r_p, 1.0);
    assert!((elastic.u_p - 1.2).abs() < 1e-15);
    let just_plastic = duncan_fama(1.0, c_onset * (1.0 - 1e-9), phi, 1.0, 0.2, 1.0).unwrap();
    assert!((just_plastic.r_p - 1.0).abs() < 1e-7);
    assert!((just_plastic.u_p - elastic.u_p).abs() < 1e-7);
    let weaker: Vec<f64> =
        [0.8, 0.6, 0.4].iter().map(|f| duncan_fama(1.0, c_onset * f, phi, 1.0, 0.2, 1.0).unwrap().u_p).collect();
    assert!(weaker[0] > elastic.u_p && weaker.windows(2).all(|w| w[1] > w[0]));
}

#[test]
fn duncan_fama_rejects_bad_inputs() {
    assert!(duncan_fama(1.0, 0.0, 0.2, 1.0, 0.0, 1.0).is_err());
    assert!(duncan_fama(1.0, 0.5, 1.6, 1.0, 0.0, 1.0).is_err());
}
