use proptest::prelude::*;

use super::*;
use crate::grid::{build_decomposition, BlendingShape, DecompositionMode};
use crate::kernels::{HorizonKind, KernelFamily, Model};
use crate::presets;

fn parts(cfg: &crate::config::CouplingConfig) -> (Grid1D, Decomposition, Kernel) {
    let p = cfg.prepare().unwrap();
    (p.grid, p.decomposition, p.kernel)
}

fn coupled(cfg: &crate::config::CouplingConfig) -> (Grid1D, LinearSystem) {
    let (g, d, k) = parts(cfg);
    let sys = assemble_coupled_operator(&g, &d, &cfg.method, &k).unwrap();
    (g, sys)
}

fn on(g: &Grid1D, f: impl Fn(f64) -> f64) -> Vec<f64> {
    g.nodes().into_iter().map(f).collect()
}

#[test]
fn nonlocal_rows_reproduce_second_derivative_of_quadratic() {
    for family in [KernelFamily::Constant, KernelFamily::InverseDistance] {
        let g = Grid1D::with_spacing(-0.05, 1.0, 0.0125).unwrap();
        let k = Kernel::new(family, Model::Diffusion, 0.05);
        let sys = assemble_nonlocal_operator(&g, 4..g.n_nodes - 4, &k).unwrap();
        let r = sys.apply(&on(&g, |x| x * x));
        for i in 4..g.n_nodes - 4 {
            assert!((r[i] - 2.0).abs() < 1e-9, "{family:?} row {i}: {}", r[i]);
        }
        for u in [on(&g, |_| 1.0), on(&g, |x| 3.0 * x - 1.0)] {
            let r = sys.apply(&u);
            assert!(r.iter().all(|v| v.abs() < 1e-9));
        }
    }
}

#[test]
fn local_operator_on_cubic() {
    let g = Grid1D::new(0.0, 1.0, 101).unwrap();
    let sys = assemble_local_operator(&g, 0..g.n_nodes, 1.0).unwrap();
    let r = sys.apply(&on(&g, |x| x * x * x));
    let i = g.index_of(0.5).unwrap();
    assert!((r[i] - 3.0).abs() < 1e-9, "{}", r[i]);
    assert!(matches!(assemble_local_operator(&g, 0..2, 1.0), Err(Error::RegionTooSmall { nodes: 2 })));
}

#[test]
fn nonlocal_operator_on_sine_matches_continuum_integral() {
    let (delta, h) = (0.2, 1.0 / 800.0);
    let g = Grid1D::with_spacing(-delta, 1.0 + delta, h).unwrap();
    let k = Kernel::new(KernelFamily::Constant, Model::Diffusion, delta);
    let m = 160;
    let sys = assemble_nonlocal_operator(&g, m..g.n_nodes - m, &k).unwrap();
    let pi = std::f64::consts::PI;
    let r = sys.apply(&on(&g, |x| (pi * x).sin()));
    // int_{-d}^{d} 3/d^3 (sin(pi(x+s)) - sin(pi x)) ds
    let factor = 3.0 / delta.powi(3) * (2.0 * (pi * delta).sin() / pi - 2.0 * delta);
    for i in (m..g.n_nodes - m).step_by(37) {
        let exact = factor * (pi * g.x(i)).sin();
        assert!((r[i] - exact).abs() <= 1e-4 * factor.abs(), "x = {}: {} vs {}", g.x(i), r[i], exact);
    }
}

#[test]
fn volume_layer_constraints() {
    let g = Grid1D::with_spacing(-0.05, 1.0, 0.0125).unwrap();
    let layer = ConstraintRegion::Layer { interval: Interval::new(-0.05, 0.0), delta: 0.05 };
    let sys = apply_dirichlet_constraints(LinearSystem::zeros(g.n_nodes), &g, &layer, |x| x).unwrap();
    let vals: Vec<f64> = sys.constrained.values().copied().collect();
    assert_eq!(sys.constrained.len(), 4);
    for (v, e) in vals.iter().zip([-0.05, -0.0375, -0.025, -0.0125]) {
        assert!((v - e).abs() < 1e-15);
    }
    let thin = ConstraintRegion::Layer { interval: Interval::new(-0.025, 0.0), delta: 0.05 };
    assert!(matches!(
        apply_dirichlet_constraints(LinearSystem::zeros(g.n_nodes), &g, &thin, |x| x),
        Err(Error::IncompleteVolumeConstraint { .. })
    ));
}

#[test]
fn splice_rows_are_pure_rows() {
    let cfg = presets::splice(0.05, 0.0125);
    let (g, sp) = coupled(&cfg);
    let (_, nl) = coupled(&presets::whole(Method::NonlocalOnly, 0.05, 0.0125));
    let (_, lo) = coupled(&presets::whole(Method::LocalOnly, 0.05, 0.0125));
    let regions = cfg.prepare().unwrap().regions;
    for i in sp.free_rows() {
        let reference = if regions[i] == Region::Nonlocal { &nl } else { &lo };
        assert_eq!(sp.matrix.row(i), reference.matrix.row(i), "row {i} at x = {}", g.x(i));
    }
}

#[test]
fn nonlocal_only_constrains_both_layers() {
    let (g, sys) = coupled(&presets::whole(Method::NonlocalOnly, 0.05, 0.0125));
    let n = g.n_nodes;
    assert!(sys.boundary.contains(&0) && sys.boundary.contains(&3) && !sys.boundary.contains(&4));
    assert!(sys.boundary.contains(&(n - 1)) && sys.boundary.contains(&(n - 5)));
    assert!(!sys.boundary.contains(&(n - 6)));
}

#[test]
fn linear_fields_have_no_ghost_forces() {
    let cfgs = [
        presets::splice(0.05, 0.0125),
        presets::blended(Method::Blended, BlendingShape::PiecewiseLinear, 0.05, 0.0125),
        presets::blended(Method::Blended, BlendingShape::CubicSmooth, 0.05, 0.0125),
        presets::qnl(0.04, 0.01),
        presets::variable(Method::PartialStress, HorizonKind::PiecewiseLinear, 0.05, 0.0125, 0.1),
    ];
    for cfg in cfgs {
        let (g, sys) = coupled(&cfg);
        let r = sys.apply(&on(&g, |x| 2.0 - 3.0 * x));
        for i in sys.free_rows() {
            assert!(r[i].abs() < 1e-9, "{:?} row {i}: {}", cfg.method.method, r[i]);
        }
    }
}

#[test]
fn blended_reproduces_quadratics() {
    for shape in [BlendingShape::PiecewiseConstant, BlendingShape::PiecewiseLinear, BlendingShape::CubicSmooth] {
        let (g, sys) = coupled(&presets::blended(Method::Blended, shape, 0.05, 0.0125));
        let r = sys.apply(&on(&g, |x| x * x));
        for i in sys.free_rows() {
            assert!((r[i] - 2.0).abs() < 1e-8, "{shape:?} row {i}: {}", r[i]);
        }
    }
}

#[test]
fn energy_methods_give_symmetric_semidefinite_stiffness() {
    let cfgs = [
        presets::qnl(0.04, 0.01),
        presets::blended(Method::Morphing, BlendingShape::CubicSmooth, 0.05, 0.0125),
        presets::variable(Method::ShrinkingHorizon, HorizonKind::SmoothC2, 0.05, 0.0125, 0.1),
    ];
    for cfg in cfgs {
        let (g, d, k) = parts(&cfg);
        let kmat = stiffness_matrix(&g, &d, &cfg.method, &k).unwrap();
        assert_eq!(kmat, kmat.transpose());
        let ones = DVector::from_element(g.n_nodes, 1.0);
        assert!((&kmat * ones).amax() < 1e-9 * kmat.amax());
        let ev = kmat.clone().symmetric_eigenvalues();
        assert!(ev.min() > -1e-10 * kmat.amax(), "{:?}: {}", cfg.method.method, ev.min());
    }
}

#[test]
fn qnl_energy_equals_nonlocal_energy_left_of_interface() {
    let cfg = presets::qnl(0.04, 0.01);
    let (g, d, k) = parts(&cfg);
    let terms = energy_terms(&g, &d, &cfg.method, &k).unwrap();
    let st = discrete_moments(&k, g.h).unwrap();
    let u = on(&g, |x| (3.0 * x).sin());
    let i = g.index_of(0.2).unwrap();
    let from_terms: f64 = terms
        .iter()
        .filter(|t| !t.cell && (t.origin - g.x(i)).abs() < 1e-12)
        .map(|t| t.value(&u))
        .sum();
    let direct: f64 = (1..=st.m)
        .flat_map(|j| [i + j, i - j])
        .map(|k| {
            let a = st.coef[(k as isize - i as isize).unsigned_abs() - 1];
            0.25 * g.h * a * (u[k] - u[i]).powi(2)
        })
        .sum();
    assert!((from_terms - direct).abs() < 1e-15 * direct.max(1.0));
}

#[test]
fn partial_stress_of_quadratic_is_linear() {
    let cfg = presets::variable(Method::PartialStress, HorizonKind::PiecewiseLinear, 0.05, 0.0125, 0.1);
    let (g, d, k) = parts(&cfg);
    let hf = cfg.method.horizon_function(&d, g.h).unwrap();
    let u = on(&g, |x| x * x);
    for i in (8..g.n_nodes - 8).step_by(5) {
        let nu = partial_stress(&g, &d, &cfg.method, &k, &u, i).unwrap();
        let c = crate::kernels::variable_coefficients(&k, hf.eval(g.x(i)), g.h);
        let brute: f64 = c
            .iter()
            .enumerate()
            .map(|(jj, cj)| {
                let j = jj + 1;
                let xi = j as f64 * g.h;
                0.5 * cj * xi * (u[i + j] - u[i - j])
            })
            .sum();
        assert!((nu - brute).abs() < 1e-12);
        assert!((nu - 2.0 * g.x(i)).abs() < 1e-10, "x = {}: {nu}", g.x(i));
    }
}

#[test]
fn triplets_list_nonzeros() {
    let g = Grid1D::new(0.0, 1.0, 5).unwrap();
    let sys = assemble_local_operator(&g, 0..5, 1.0).unwrap();
    let t = sys.triplets();
    assert_eq!(t.len(), 9);
    assert_eq!(t[0], (1, 0, 16.0));
    assert_eq!(t[1], (1, 1, -32.0));
}

#[test]
fn mode_mismatch_is_reported() {
    let d = build_decomposition(&presets::splice(0.05, 0.0125).decomposition).unwrap();
    assert!(check_mode(Method::Splice, &d).is_ok());
    let err = check_mode(Method::Arlequin, &d).unwrap_err();
    assert!(matches!(err, Error::ModeMismatch { .. }));
    let d = build_decomposition(&presets::spec(DecompositionMode::Overlap, 0.0, 1.0, 0.05));
    assert!(matches!(d, Err(Error::MissingParameter(_))));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn nonlocal_quadratic_consistency(m in 2usize..9, inv in any::<bool>(), pd in any::<bool>(), e in 0.5f64..3.0) {
        let h = 0.01;
        let delta = m as f64 * h;
        let family = if inv { KernelFamily::InverseDistance } else { KernelFamily::Constant };
        let k = if pd { Kernel::new(family, Model::Peridynamic, delta).with_modulus(e) } else { Kernel::new(family, Model::Diffusion, delta) };
        let g = Grid1D::with_spacing(-delta, 0.5, h).unwrap();
        let sys = assemble_nonlocal_operator(&g, m..g.n_nodes - m, &k).unwrap();
        let r = sys.apply(&on(&g, |x| x * x - x));
        for i in m..g.n_nodes - m {
            prop_assert!((r[i] - 2.0 * k.stiffness()).abs() < 1e-8 * k.stiffness());
        }
    }

    #[test]
    fn qnl_hessian_annihilates_constants(m in 2usize..7, xs in 0.3f64..0.7) {
        let h = 0.01;
        let mut cfg = presets::qnl(m as f64 * h, h);
        cfg.decomposition.interface = Some((xs / h).round() * h);
        let (g, d, k) = parts(&cfg);
        let kmat = stiffness_matrix(&g, &d, &cfg.method, &k).unwrap();
        prop_assert_eq!(&kmat, &kmat.transpose());
        let r = &kmat * DVector::from_element(g.n_nodes, 1.0);
        prop_assert!(r.amax() < 1e-9 * kmat.amax());
    }
}
