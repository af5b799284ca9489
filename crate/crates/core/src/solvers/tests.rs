use super::*;
use crate::config::{PartitionMode, Robin, SolverParams};
use crate::presets;

fn sup_diff(a: &[f64], b: impl Fn(usize) -> f64) -> f64 {
    a.iter().enumerate().fold(0.0, |m, (i, v)| m.max((v - b(i)).abs()))
}

#[test]
fn identity_system_returns_rhs() {
    let mut sys = LinearSystem::zeros(3);
    for i in 0..3 {
        sys.constrain(i, i as f64 + 0.5);
    }
    assert_eq!(solve_linear_system(&sys).unwrap(), vec![0.5, 1.5, 2.5]);
}

#[test]
fn singular_system_is_reported() {
    let a = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0]);
    let b = DVector::from_vec(vec![1.0, 0.0]);
    assert!(matches!(solve_dense(&a, &b, 1e-10), Err(Error::SingularSystem)));
}

#[test]
fn local_only_recovers_linear_data() {
    let p = presets::whole(Method::LocalOnly, 0.05, 0.0125).prepare().unwrap();
    let sol = solve(&p, |_| 0.0, |x| x).unwrap();
    assert!(sup_diff(&sol.field.u, |i| sol.field.x[i]) < 1e-12);
}

#[test]
fn nonlocal_only_with_unit_load() {
    // -L u = 1 with u = x (1 - x) / 2 on the constraint layers; quadratics are integrated exactly.
    let p = presets::whole(Method::NonlocalOnly, 0.2, 0.02).prepare().unwrap();
    let exact = |x: f64| 0.5 * x * (1.0 - x);
    let sol = solve(&p, |_| 1.0, exact).unwrap();
    assert!(sup_diff(&sol.field.u, |i| exact(sol.field.x[i])) < 1e-8);
    assert!(sol.residual < 1e-9);
}

#[test]
fn arlequin_zero_load_gives_zero() {
    let p = presets::overlap(Method::Arlequin, 0.4, 0.6, 0.05, 0.0125).prepare().unwrap();
    let sol = solve(&p, |_| 0.0, |_| 0.0).unwrap();
    assert!(sol.field.u.iter().all(|v| v.abs() < 1e-12));
    let blocks = sol.field.arlequin.unwrap();
    assert!(blocks.phi.iter().all(|v| v.abs() < 1e-10));
}

#[test]
fn arlequin_linear_patch_is_compatible() {
    let p = presets::overlap(Method::Arlequin, 0.4, 0.6, 0.05, 0.0125).prepare().unwrap();
    let sol = solve(&p, |_| 0.0, |x| 1.0 + x).unwrap();
    assert!(sup_diff(&sol.field.u, |i| 1.0 + sol.field.x[i]) < 1e-6);
    let b = sol.field.arlequin.unwrap();
    // u1 and u2 agree on the multiplier support.
    for &node in &b.multiplier_nodes {
        let u1 = b.u1[node - b.local_nodes[0]];
        let u2 = b.u2[node];
        assert!((u1 - u2).abs() < 1e-6, "node {node}: {u1} vs {u2}");
    }
}

#[test]
fn obm_linear_patch_has_zero_objective() {
    let p = presets::overlap(Method::OptimizationBased, 0.4, 0.55, 0.05, 0.0125).prepare().unwrap();
    let r = solve_optimization_based(&p, |_| 0.0, |x| 1.0 + x).unwrap();
    assert!(r.objective < 1e-20, "{}", r.objective);
    assert!(sup_diff(&r.field.u, |i| 1.0 + r.field.x[i]) < 1e-10);
}

#[test]
fn obm_controls_reproduce_states() {
    let p = presets::overlap(Method::OptimizationBased, 0.4, 0.55, 0.05, 0.0125).prepare().unwrap();
    let f = |x: f64| (3.0 * x).cos();
    let g = |x: f64| x * x;
    let r = solve_optimization_based(&p, f, g).unwrap();
    let (un, ul) = obm::solve_subproblems(&p, &f, &g, &r.controls).unwrap();
    assert!(sup_diff(&un, |i| r.u_nonlocal[i]) < 1e-10);
    assert!(sup_diff(&ul, |i| r.u_local[i]) < 1e-10);
    let j = obm::overlap_objective(&p, &un, &ul).unwrap();
    // J is a squared difference of O(1) states; its error scales with sqrt(J) * eps.
    assert!((j - r.objective).abs() <= 1e-14 * r.objective.sqrt(), "{j} vs {}", r.objective);
    // Perturbing any control cannot lower the objective.
    for k in 0..r.controls.len() {
        for e in [-1e-4, 1e-4] {
            let mut c = r.controls.clone();
            c[k] += e;
            let (un, ul) = obm::solve_subproblems(&p, &f, &g, &c).unwrap();
            assert!(obm::overlap_objective(&p, &un, &ul).unwrap() >= r.objective);
        }
    }
}

#[test]
fn obm_quadratic_patch() {
    let p = presets::overlap(Method::OptimizationBased, 0.4, 0.55, 0.05, 0.0125).prepare().unwrap();
    let r = solve_optimization_based(&p, |_| -2.0, |x| x * x).unwrap();
    assert!(sup_diff(&r.field.u, |i| r.field.x[i].powi(2)) < 1e-10);
    assert!(r.objective < 1e-20);
}

fn robin(r1: Robin, r2: Robin) -> SolverParams {
    SolverParams { r1, r2, tol: 1e-12, max_iter: 2000, ..SolverParams::default() }
}

#[test]
fn robin_dirichlet_limit_converges_to_patch() {
    let p = presets::overlap(Method::PartitionedRobin, 0.4, 0.55, 0.05, 0.0125).prepare().unwrap();
    let (fld, trace, res) =
        solve_partitioned_robin(&p, |_| 0.0, |x| 1.0 + x, &robin(Robin::Dirichlet, Robin::Dirichlet)).unwrap();
    assert!(trace.converged);
    assert!(res < 1e-10);
    assert!(sup_diff(&fld.u, |i| 1.0 + fld.x[i]) < 1e-10);
}

#[test]
fn robin_linear_patch() {
    let p = presets::overlap(Method::PartitionedRobin, 0.4, 0.55, 0.05, 0.0125).prepare().unwrap();
    let params = robin(Robin::Coefficient(1.0), Robin::Coefficient(1.0));
    let (fld, trace, _) = solve_partitioned_robin(&p, |_| 0.0, |x| 1.0 + x, &params).unwrap();
    assert!(trace.converged);
    assert!(sup_diff(&fld.u, |i| 1.0 + fld.x[i]) < 1e-10);
    assert_eq!(trace.residuals.len(), trace.iterations);
    assert!(trace.reduction_factors[0].is_none());
}

#[test]
fn robin_rejects_bad_coefficients() {
    let p = presets::overlap(Method::PartitionedRobin, 0.4, 0.55, 0.05, 0.0125).prepare().unwrap();
    for (r1, r2) in [
        (Robin::Coefficient(-1.0), Robin::Dirichlet),
        (Robin::Coefficient(0.0), Robin::Coefficient(0.0)),
        (Robin::Coefficient(f64::NAN), Robin::Dirichlet),
    ] {
        let e = solve_partitioned_robin(&p, |_| 0.0, |x| x, &robin(r1, r2)).unwrap_err();
        assert!(matches!(e, Error::InvalidRobin(_)), "{e:?}");
    }
}

#[test]
fn robin_iteration_cap_is_a_solver_failure() {
    let p = presets::overlap(Method::PartitionedRobin, 0.4, 0.55, 0.05, 0.0125).prepare().unwrap();
    let mut params = robin(Robin::Coefficient(1.0), Robin::Coefficient(1.0));
    params.max_iter = 2;
    let e = solve_partitioned_robin(&p, |_| 1.0, |_| 0.0, &params).unwrap_err();
    assert!(e.is_solver_failure());
    let Error::NotConverged { trace, .. } = e else { unreachable!() };
    assert_eq!(trace.iterations, 2);
}

#[test]
fn explicit_mode_runs_fixed_sweeps() {
    let p = presets::overlap(Method::PartitionedRobin, 0.4, 0.55, 0.05, 0.0125).prepare().unwrap();
    let mut params = robin(Robin::Coefficient(1.0), Robin::Coefficient(1.0));
    params.mode = PartitionMode::Explicit;
    params.sweeps = 3;
    let (_, trace, _) = solve_partitioned_robin(&p, |_| 1.0, |_| 0.0, &params).unwrap();
    assert_eq!(trace.iterations, 3);
}

#[test]
fn sweep_reports_reduction_factors() {
    let p = presets::overlap(Method::PartitionedRobin, 0.4, 0.55, 0.05, 0.0125).prepare().unwrap();
    let f = |x: f64| (2.0 * x).sin();
    let g = |_: f64| 0.0;
    let one = sweep_robin_coefficient(&p, &f, &g, &[1.0], 0).unwrap();
    assert_eq!(one.rows.len(), 1);
    assert_eq!(one.best_r, Some(1.0));
    let report = sweep_robin_coefficient(&p, &f, &g, &[0.1, 1.0, 10.0], 2).unwrap();
    for row in &report.rows {
        let t = &row.trace;
        for k in 1..t.mismatches.len() {
            let rf = t.mismatches[k] / t.mismatches[k - 1];
            assert_eq!(t.reduction_factors[k], Some(rf));
        }
    }
    let serial = sweep_robin_coefficient(&p, &f, &g, &[0.1, 1.0, 10.0], 0).unwrap();
    assert_eq!(serial, report);
    assert!(sweep_robin_coefficient(&p, &f, &g, &[], 0).is_err());
}

#[test]
fn mean_reduction_factor_is_geometric() {
    let mut t = IterationTrace::default();
    for m in [1.0, 0.5, 0.125] {
        t.push(m, m);
    }
    assert_eq!(t.reduction_factors, vec![None, Some(0.5), Some(0.25)]);
    assert!((t.mean_reduction_factor().unwrap() - 0.125f64.sqrt()).abs() < 1e-15);
}
