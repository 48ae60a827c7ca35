//! Bilinear forms, loads and a full solve.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sgfem::assembly::{assemble, assemble_load, QuadratureOptions};
use sgfem::element::{default_dof_rules, Geometry, LocalBasis, NDOF};
use sgfem::linalg::dot;
use sgfem::mesh::{Mesh, Point};
use sgfem::quadrature::TriangleRule;
use sgfem::solutions::ManufacturedCase;
use sgfem::space::{interpolate_global, DofLayout, VectorSample};
use sgfem::study::{solve_case, SolveOptions};

fn interpolate<F: Fn(Point) -> VectorSample>(mesh: &Mesh, layout: &DofLayout, f: F) -> Vec<f64> {
    interpolate_global(layout, mesh, f, &default_dof_rules()).unwrap()
}

#[test]
fn rigid_motions_have_zero_energy() {
    for perturb in [0.0, 0.2] {
        let mesh = Mesh::structured_square(5, perturb, 6).unwrap();
        let layout = DofLayout::new(&mesh);
        let sys = assemble(&mesh, &layout, 0.7, 2.0, 1.3, &QuadratureOptions::default()).unwrap();
        let v = interpolate(&mesh, &layout, |x| ([0.3 - 1.1 * x[1], -0.4 + 1.1 * x[0]], [[0.0, -1.1], [1.1, 0.0]]));
        let energy = dot(&v, &sys.a.mul_vec(&v));
        let scale = dot(&v, &v) * sys.a.norm_inf();
        assert!(energy.abs() < 1e-10 * scale.max(1.0), "a(v,v) = {energy:e}");
    }
}

#[test]
fn divergence_free_field_is_in_the_kernel_of_b() {
    let mesh = Mesh::structured_square(6, 0.15, 2).unwrap();
    let layout = DofLayout::new(&mesh);
    let sys = assemble(&mesh, &layout, 0.9, 1.0, 1.0, &QuadratureOptions::default()).unwrap();
    let v = interpolate(&mesh, &layout, |x| ([x[0], -x[1]], [[1.0, 0.0], [0.0, -1.0]]));
    let bv = sys.b.mul_vec(&v);
    assert!(bv.iter().all(|r| r.abs() < 1e-12), "max |Bv| {:e}", bv.iter().fold(0.0f64, |m, r| m.max(r.abs())));
}

/// Interior hat on the uniform mesh: six triangles of area h²/2, so
/// `∫q² = h²/2` and `∫|∇q|² = 4`.
#[test]
fn hat_function_norm_matches_patch_integral() {
    let n = 6;
    let iota = 0.3;
    let mesh = Mesh::structured_square(n, 0.0, 0).unwrap();
    let layout = DofLayout::new(&mesh);
    let sys = assemble(&mesh, &layout, iota, 1.0, 1.0, &QuadratureOptions::default()).unwrap();
    let v = 2 * (n + 1) + 3;
    let h = 1.0 / n as f64;
    let want = h * h / 2.0 + iota * iota * 4.0;
    assert!((sys.c.get(v, v) - want).abs() < 1e-13, "{} vs {want}", sys.c.get(v, v));
    let mean: f64 = sys.pressure_mean_weights.iter().sum();
    assert!((mean - 1.0).abs() < 1e-13);
}

#[test]
fn assembled_systems_are_symmetric() {
    for (case_id, perturb) in [(1u8, 0.0), (3, 0.2)] {
        let mesh = Mesh::structured_square(6, perturb, 4).unwrap();
        let layout = DofLayout::new(&mesh);
        let case = ManufacturedCase::from_number(case_id, 0.4999, 1e-3).unwrap();
        let sys = assemble(&mesh, &layout, case.iota(), case.lambda(), case.mu(), &QuadratureOptions::default()).unwrap();
        let full = sys.full_matrix();
        assert!(full.symmetry_defect() <= 1e-12, "{:e}", full.symmetry_defect());
        assert!(sys.a.symmetry_defect() <= 1e-12 && sys.c.symmetry_defect() <= 1e-12);
    }
}

/// `F·Π_h w` against `∫ f·(Π_h w)` evaluated element by element.
#[test]
fn load_vector_matches_direct_integration() {
    let mesh = Mesh::structured_square(4, 0.1, 5).unwrap();
    let layout = DofLayout::new(&mesh);
    let case = ManufacturedCase::from_number(1, 0.3, 0.5).unwrap();
    let load = assemble_load(&mesh, &layout, &case, &QuadratureOptions::default()).unwrap();
    assert!(load.iter().all(|v| v.is_finite()));
    let rule = TriangleRule::new(14).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..5 {
        let k: [f64; 4] = std::array::from_fn(|_| rng.gen_range(1.0..3.0));
        let w = interpolate(&mesh, &layout, |x| {
            let (s, c) = ((k[0] * x[0] + k[1] * x[1]).sin(), (k[0] * x[0] + k[1] * x[1]).cos());
            let e = (k[2] * x[0] - k[3] * x[1]).exp();
            ([s, e], [[k[0] * c, k[1] * c], [k[2] * e, -k[3] * e]])
        });
        let discrete = dot(&load[..layout.velocity_count()], &w);
        let mut direct = 0.0;
        for t in 0..mesh.num_triangles() {
            let g = Geometry::new(mesh.triangle_points(t)).unwrap();
            let b = LocalBasis::new(&g).unwrap();
            let coeffs = [0, 1].map(|c| layout.local_coefficients(t, &w, c));
            for (l, wq) in rule.iter() {
                let e = b.eval(*l);
                let f = case.load(g.to_cartesian(*l)).unwrap();
                for c in 0..2 {
                    let wc: f64 = (0..NDOF).map(|i| coeffs[c][i] * e.value[i]).sum();
                    direct += 2.0 * g.area * wq * f[c] * wc;
                }
            }
        }
        assert!((discrete - direct).abs() < 1e-10 * (1.0 + direct.abs()), "{discrete} vs {direct}");
    }
}

#[test]
fn smooth_case_solve_meets_the_residual_contract() {
    let mesh = Mesh::structured_square(16, 0.0, 0).unwrap();
    let case = ManufacturedCase::from_number(1, 0.3, 1.0).unwrap();
    let s = solve_case(&mesh, &case, &SolveOptions { keep_system: true, ..Default::default() }).unwrap();
    assert!(s.residual <= 1e-10, "residual {:e}", s.residual);
    let sys = assemble(&mesh, &s.layout, 1.0, case.lambda(), case.mu(), &QuadratureOptions::default()).unwrap();
    assert!(dot(&s.velocity, &sys.a.mul_vec(&s.velocity)) > 0.0);
    assert!(s.reduced.is_some_and(|r| r.dim() == s.reduced_dim));
    assert!(s.norms.relative_energy() < 0.2);
}
