mod common;

use common::{hump, perturbed_mesh};
use cvflow::boundary::{BoundaryKind, BoundaryPolicy, SideBoundaries};
use cvflow::reconstruction::{
    alpha_limit, beta_limit, gradients, reconstruct, surface_level, EdgeReconstruction, FaceState, GradientField,
    Topography,
};
use cvflow::scheme::{assemble_rhs, dissipation_delta, local_speeds, numerical_flux, physical_flux, FluxParams, SemiDiscreteRhs};
use cvflow::sources::diffusion_flux;
use cvflow::state::{desingularize, velocities};
use cvflow::timestepping::Solver;
use cvflow::{FieldState, Point, SchemeConfig};
use proptest::prelude::*;

const G: f64 = 9.81;

fn face_state() -> impl Strategy<Value = FaceState> {
    (0.0..3.0f64, -3.0..3.0f64, -3.0..3.0f64, 0.0..1.0f64).prop_map(|(h, u, v, c)| FaceState {
        h,
        p: h * u,
        q: h * v,
        s: h * c,
        u,
        v,
    })
}

fn unit_normal() -> impl Strategy<Value = Point> {
    (0.0..std::f64::consts::TAU).prop_map(|t| Point::new(t.cos(), t.sin()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn dual_cells_close_and_tile(seed in 0u64..1000, n in 3usize..9, amp in 0.0..0.3f64) {
        let mesh = perturbed_mesh(seed, n, amp);
        prop_assert!((mesh.total_area() - 1.0).abs() < 1e-12);
        for j in 0..mesh.len() {
            let faces = mesh.cell_faces(j);
            let mu: f64 = faces.iter().map(|f| f.mu).sum();
            prop_assert!((mu - 1.0).abs() < 1e-12);
            let (sx, sy) = faces.iter().fold((0.0, 0.0), |(x, y), f| (x + f.length * f.normal.x, y + f.length * f.normal.y));
            prop_assert!(sx.abs() < 1e-12 && sy.abs() < 1e-12);
            for f in faces {
                prop_assert!((f.normal.norm() - 1.0).abs() < 1e-12);
                prop_assert!(f.dist > 0.0 && f.proj_dist > 0.0);
                if let Some(t) = f.twin {
                    let o = &mesh.faces[t];
                    prop_assert_eq!(o.length, f.length);
                    prop_assert!((o.normal + f.normal).norm() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn desingularized_ratio_is_odd_and_exact_when_deep(h in 0.0..5.0f64, phi in -10.0..10.0f64, eps in 1e-12..1e-2f64) {
        prop_assert_eq!(desingularize(h, -phi, eps), -desingularize(h, phi, eps));
        let (u, v) = velocities(h, phi, -phi, eps);
        prop_assert_eq!(u, -v);
        if h.powi(4) >= eps {
            prop_assert!((desingularize(h, phi, eps) - phi / h).abs() <= 1e-12 * (phi / h).abs().max(1.0));
        }
        prop_assert!(desingularize(h, phi, eps).is_finite());
    }

    #[test]
    fn flux_is_consistent_and_conservative(l in face_state(), r in face_state(), n in unit_normal(), nu in 0.0..1.0f64) {
        let (f, _) = numerical_flux(&l, &l, n, G, nu);
        let c = if l.h > 0.0 { l.s / l.h } else { 0.0 };
        let exact = physical_flux(l.h, l.u, l.v, c, n, G);
        for i in 0..4 {
            prop_assert!((f[i] - exact[i]).abs() <= 1e-12 * (1.0 + exact[i].abs()), "component {}: {} vs {}", i, f[i], exact[i]);
        }
        // the same edge seen from the other side carries the opposite flux
        let (a, _) = numerical_flux(&l, &r, n, G, nu);
        let (b, _) = numerical_flux(&r, &l, -n, G, nu);
        for i in 0..4 {
            prop_assert!((a[i] + b[i]).abs() <= 1e-12 * (1.0 + a[i].abs()));
        }
    }

    #[test]
    fn blended_delta_bounds(l in face_state(), r in face_state(), n in unit_normal(), nu in 0.0..1.0f64) {
        let un_l = l.u * n.x + l.v * n.y;
        let un_r = r.u * n.x + r.v * n.y;
        let (a_in, a_out) = local_speeds(l.h, un_l, r.h, un_r, G);
        let d = dissipation_delta(a_in, a_out, un_l, un_r, nu);
        let tol = 1e-12 * (1.0 + a_in * a_out);
        prop_assert!(d >= a_in * un_r - tol);
        prop_assert!(d >= -a_out * un_l - tol);
        prop_assert!(d <= a_in * a_out + tol);
        prop_assert!(dissipation_delta(a_in, a_out, un_l, un_r, 1.0) <= d + tol);
    }

    #[test]
    fn diffusion_flux_is_antisymmetric(len in 0.01..1.0f64, g in 0.0..0.1f64, hl in 0.0..2.0f64, hr in 0.0..2.0f64,
                                       cl in 0.0..1.0f64, cr in 0.0..1.0f64, d in 0.01..1.0f64) {
        prop_assert_eq!(diffusion_flux(len, g, hl, hr, cl, cr, d), -diffusion_flux(len, g, hr, hl, cr, cl, d));
        // flows down the concentration gradient
        prop_assert!(diffusion_flux(len, g, hl, hr, cl, cr, d) * (cr - cl) >= 0.0);
    }

    #[test]
    fn surface_level_inverts_volume(beds in prop::collection::vec(-1.0..1.0f64, 3..9), h in 0.0..2.0f64) {
        let mu = 1.0 / beds.len() as f64;
        let eta = surface_level(h, beds.iter().map(|&b| (mu, b)));
        let vol: f64 = beds.iter().map(|&b| mu * (eta - b).max(0.0)).sum();
        prop_assert!((vol - h).abs() < 1e-12);
    }

    #[test]
    fn alpha_keeps_surface_above_bed(w in 0.0..2.0f64, verts in prop::collection::vec((-3.0..3.0f64, -1.0..0.0f64), 3..9)) {
        let a = alpha_limit(w, verts.iter().copied());
        prop_assert!((0.0..=1.0).contains(&a));
        for &(s, b) in &verts {
            prop_assert!(w + a * s >= b - 1e-12);
        }
    }

    #[test]
    fn beta_keeps_solute_bounded(c in 0.0..1.0f64, h in 0.01..2.0f64,
                                 verts in prop::collection::vec((0.0..2.0f64, -1.0..1.0f64), 3..9),
                                 mids in prop::collection::vec((0.0..2.0f64, -1.0..1.0f64, 0.0..1.0f64, 0.0..1.0f64), 3..9)) {
        let mids: Vec<_> = mids.into_iter().map(|(hf, g, a, b)| (hf, g, c.min(a), c.max(b))).collect();
        let beta = beta_limit(c, h, verts.iter().copied(), mids.iter().copied());
        prop_assert!((0.0..=1.0).contains(&beta));
        for &(hv, g) in &verts {
            prop_assert!(c * hv + beta * h * g >= -1e-12);
        }
        for &(hf, g, lo, hi) in &mids {
            let s = c * hf + beta * h * g;
            prop_assert!(s >= lo * hf - 1e-12 && s <= hi * hf + 1e-12);
        }
    }
}

fn random_state(mesh: &cvflow::mesh::DualMesh, topo: &Topography, seed: u64, dry_fraction: f64) -> FieldState {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut st = FieldState::zeros(mesh.len());
    for j in 0..mesh.len() {
        let wet = rng.gen::<f64>() >= dry_fraction;
        let h = if wet { rng.gen_range(0.0..0.5) + (0.3 - topo.cell[j]).max(0.0) * rng.gen::<f64>() } else { 0.0 };
        let (u, v) = (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        let c: f64 = rng.gen();
        st.h[j] = h;
        st.p[j] = h * u;
        st.q[j] = h * v;
        st.s[j] = h * c;
        st.c[j] = c;
    }
    st
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn reconstruction_is_non_negative(seed in 0u64..10_000, dry in 0.0..0.6f64) {
        let mesh = perturbed_mesh(seed, 8, 0.25);
        let topo = Topography::from_fn(&mesh, hump);
        let st = random_state(&mesh, &topo, seed, dry);
        let mut grads = GradientField::new(mesh.len());
        let mut rec = EdgeReconstruction::new(&mesh);
        gradients(&mesh, &topo, &st, 1e-6, &mut grads);
        reconstruct(&mesh, &topo, &st, &grads, mesh.max_area_squared(), 1e-6, &mut rec);
        for f in &rec.faces {
            prop_assert!(f.h >= 0.0 && f.s >= 0.0);
            prop_assert!(f.h.is_finite() && f.u.is_finite() && f.v.is_finite());
        }
    }

    #[test]
    fn wall_rhs_conserves_water_and_solute(seed in 0u64..10_000, dry in 0.0..0.5f64) {
        let mesh = perturbed_mesh(seed, 8, 0.25);
        let topo = Topography::from_fn(&mesh, hump);
        let st = random_state(&mesh, &topo, seed, dry);
        let mut grads = GradientField::new(mesh.len());
        let mut rec = EdgeReconstruction::new(&mesh);
        gradients(&mesh, &topo, &st, 1e-6, &mut grads);
        reconstruct(&mesh, &topo, &st, &grads, mesh.max_area_squared(), 1e-6, &mut rec);
        let policy = BoundaryPolicy::from_sides(&mesh, &SideBoundaries::uniform(BoundaryKind::Wall));
        let mut rhs = SemiDiscreteRhs::new(&mesh);
        assemble_rhs(&mesh, &topo, &st, &rec, &policy, FluxParams { g: G, nu: 0.5, gamma: 0.01 }, &mut rhs).unwrap();
        let (mut mass, mut solute, mut scale) = (0.0, 0.0, 0.0);
        for (c, r) in mesh.cells.iter().zip(&rhs.cells) {
            mass += c.area * r[0];
            solute += c.area * r[3];
            scale += c.area * (r[0].abs() + r[3].abs());
        }
        prop_assert!(mass.abs() <= 1e-12 * scale.max(1.0));
        prop_assert!(solute.abs() <= 1e-12 * scale.max(1.0));
    }

    #[test]
    fn steps_keep_depth_and_solute_non_negative(seed in 0u64..10_000, dry in 0.0..0.6f64, nu in 0.0..1.0f64) {
        let mesh = perturbed_mesh(seed, 6, 0.25);
        let topo = Topography::from_fn(&mesh, hump);
        let mut st = random_state(&mesh, &topo, seed, dry);
        let policy = BoundaryPolicy::from_sides(&mesh, &SideBoundaries::uniform(BoundaryKind::Wall));
        let cfg = SchemeConfig { nu, gamma: 0.001, manning: 0.02, end_time: 1.0, ..SchemeConfig::default() };
        let mut solver = Solver::new(&mesh, topo, policy, cfg).unwrap();
        solver.prepare(&mut st).unwrap();
        let v0: f64 = mesh.cells.iter().zip(&st.h).map(|(c, h)| c.area * h).sum();
        for _ in 0..10 {
            solver.step(&mut st, 1.0).unwrap();
            prop_assert!(st.h.iter().all(|&h| h >= 0.0));
            prop_assert!(st.s.iter().all(|&s| s >= 0.0));
        }
        let v1: f64 = mesh.cells.iter().zip(&st.h).map(|(c, h)| c.area * h).sum();
        prop_assert!((v1 - v0).abs() <= 1e-12 * v0);
    }
}
