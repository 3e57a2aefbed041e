mod common;

use common::*;
use lastiter::pep::{apply_distance_filter, basis_from_trajectory, build_pep, reconstruct_instance, trajectory_ratio};
use lastiter::sdp::{certify_solution, delta_sign, parse_sdpa, to_sdpa, DeltaSign};
use lastiter::{
    run, solve, InterpolationClass, MethodId, PepObjective, PepSpec, RunConfig, SolveStatus, SolverSettings, Vector,
};

fn tight() -> SolverSettings {
    SolverSettings::default().with_tol(1e-8)
}

#[test]
fn one_step_peg_value_and_certificate() {
    // G̃_PEG(1/3, 1, 1) = 10/9
    let problem = build_pep(&PepSpec::new(MethodId::PEG, 1.0 / 3.0, 1.0, 1)).unwrap();
    let sol = solve(&problem, &tight()).unwrap();
    assert_eq!(sol.status, SolveStatus::Solved);
    assert!((sol.objective - 10.0 / 9.0).abs() < 1e-6);
    let bound = certify_solution(&problem, &sol).unwrap();
    assert!(bound.value >= 10.0 / 9.0 - 1e-9 && bound.value <= 10.0 / 9.0 + 1e-5);
}

#[test]
fn delta_values_for_peg() {
    // Δ_PEG(1/3, 1, N) is 1/72 at N = 1 and 1/162 at N = 2
    for (n, want) in [(1usize, 1.0 / 72.0), (2, 1.0 / 162.0)] {
        let spec = PepSpec::new(MethodId::PEG, 1.0 / 3.0, 1.0, n).with_objective(PepObjective::DeltaNormSq);
        let sol = solve(&build_pep(&spec).unwrap(), &tight()).unwrap();
        assert!((sol.objective - want).abs() < 1e-6, "N={n}: {}", sol.objective);
    }
}

#[test]
fn cross_solver_values_reproduce() {
    for r in CROSS_SOLVER.iter().take(7) {
        let sol = solve(&build_pep(&reference_spec(r.name)).unwrap(), &tight()).unwrap();
        assert!(rel_diff(sol.objective, r.value) <= 1e-5, "{}: {} vs {}", r.name, sol.objective, r.value);
    }
}

#[test]
fn values_dominate_simulated_trajectories() {
    let n = 4;
    let problem = build_pep(&PepSpec::new(MethodId::PEG, 1.0 / 3.0, 1.0, n)).unwrap();
    let value = solve(&problem, &tight()).unwrap().objective;
    for seed in 0..30 {
        let inst = affine_instance(800 + seed);
        // rescale to L = 1 so the PEP normalization applies
        let traj = run(&inst.op, &inst.set, &RunConfig::new(MethodId::PEG, 1.0 / (3.0 * inst.l), n, inst.x0.clone()))
            .unwrap();
        let ratio = traj.gs[n].norm_squared() / (inst.l * inst.l * (&inst.x0 - &inst.x_star).norm_squared());
        assert!(ratio <= value + 1e-6, "seed {seed}: {ratio} > {value}");
    }
}

#[test]
fn trajectory_gram_is_feasible_for_its_pep() {
    let spec = PepSpec::new(MethodId::PEG, 1.0 / 3.0, 1.0, 3);
    let problem = build_pep(&spec).unwrap();
    let mut inst = affine_instance(77);
    // normalize to L = 1 and ||x0 − x*|| = 1
    let s = 1.0 / inst.l;
    let (a, b) = inst.op.affine_parts().unwrap();
    inst.op = lastiter::OperatorSpec::affine(a * s, b * s).unwrap();
    let r = (&inst.x0 - &inst.x_star).norm();
    inst.x0 = &inst.x_star + (&inst.x0 - &inst.x_star) / r;
    let traj = run(&inst.op, &inst.set, &RunConfig::new(MethodId::PEG, 1.0 / 3.0, 3, inst.x0.clone())).unwrap();
    let g_star = Vector::zeros(inst.x_star.len());
    let basis = basis_from_trajectory(&problem, &traj, &inst.x_star, &g_star).unwrap();
    let gram = basis.transpose() * &basis;
    assert!(problem.max_violation(&gram) <= 1e-10);
    let ratio = trajectory_ratio(&problem, &traj, &inst.x_star, &g_star).unwrap();
    assert!((ratio - traj.gs[3].norm_squared()).abs() <= 1e-10);
}

#[test]
fn distance_filter_relaxes_the_problem() {
    let spec = PepSpec::new(MethodId::PEG, 1.0 / 3.0, 1.0, 4);
    let full = build_pep(&spec).unwrap();
    let filtered = apply_distance_filter(&full, 1);
    assert!(filtered.constraints.len() < full.constraints.len());
    let v_full = solve(&full, &tight()).unwrap().objective;
    let v_t = solve(&filtered, &tight()).unwrap().objective;
    assert!(v_t >= v_full - 1e-7);
    let via_spec = solve(&build_pep(&spec.clone().with_distance(1)).unwrap(), &tight()).unwrap().objective;
    assert!((via_spec - v_t).abs() <= 1e-6);
}

#[test]
fn sdpa_round_trip_preserves_value_and_geometry() {
    for name in ["og_g1o3_n2", "peg_deltat_n2", "projog_g1o4_n2"] {
        let problem = build_pep(&reference_spec(name)).unwrap();
        let text = to_sdpa(&problem);
        let back = parse_sdpa(&text).unwrap();
        assert_eq!(back.gram_dim, problem.gram_dim);
        assert_eq!(back.constraints.len(), problem.constraints.len());
        assert_eq!(to_sdpa(&back), text);
        let a = solve(&problem, &tight()).unwrap().objective;
        let b = solve(&back, &tight()).unwrap().objective;
        assert!(rel_diff(b, a) <= 1e-7);
    }
}

#[test]
fn cocoercive_witness_realizes_an_increase() {
    let spec = PepSpec::new(MethodId::PEG, 1.0 / 3.0, 1.0, 2)
        .with_class(InterpolationClass::Cocoercive(1.0))
        .with_objective(PepObjective::DeltaNormSq);
    match delta_sign(&spec, &tight(), 1e-6).unwrap() {
        DeltaSign::PositiveWitnessed { increase, witness, .. } => {
            assert!(increase > 1e-4, "{increase}");
            assert!(witness.max_residual() <= 1e-6);
        }
        other => panic!("expected a witness, got {other:?}"),
    }
}

#[test]
fn reconstruction_matches_the_gram() {
    let problem = build_pep(&reference_spec("peg_g1o3_n3")).unwrap();
    let sol = solve(&problem, &tight()).unwrap();
    let inst = reconstruct_instance(&problem, &sol.g).unwrap();
    assert!(inst.gram_error <= 1e-6);
    assert!((inst.objective - sol.objective).abs() <= 1e-6);
    assert!(inst.rank >= 1 && inst.rank <= problem.gram_dim);
    assert!(inst.points.iter().any(|(l, _)| l == "x*"));
}

#[test]
fn projected_residual_values_are_ordered_in_n() {
    let values: Vec<f64> = [1usize, 2, 3]
        .iter()
        .map(|&n| {
            let spec = PepSpec::new(MethodId::ProjPEG, 0.25, 1.0, n);
            solve(&build_pep(&spec).unwrap(), &tight()).unwrap().objective
        })
        .collect();
    assert!(values.iter().all(|v| v.is_finite() && *v > 0.0));
    assert!(values[2] <= values[0] + 1e-6, "{values:?}");
}
