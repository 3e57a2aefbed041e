mod common;

use common::*;
use lastiter::methods::{og_from_peg, og_recursion_residual, run_eag_demo, vi_residual};
use lastiter::metrics::{metric_series, write_metric_csv, GapMode, METRIC_CSV_HEADER};
use lastiter::potentials::{check_lemma1, check_lemma2, check_theorem_decrease, eval_potential, SLACK_TOL};
use lastiter::{run, Error, FeasibleSet, MethodId, OperatorSpec, PotentialKind, RunConfig, Vector};

#[test]
fn peg_energy_and_residual_potential_decrease() {
    for seed in 0..40 {
        let inst = affine_instance(seed);
        let gamma = 1.0 / (3.0 * inst.l);
        let traj = run(&inst.op, &inst.set, &RunConfig::new(MethodId::PEG, gamma, 50, inst.x0.clone())).unwrap();
        for k in 1..50 {
            let e = check_lemma1(&traj, k, inst.l).unwrap();
            assert!(e.holds(), "seed {seed} k {k}: {e:?}");
        }
        // the residual potential argument is stated for γ ≤ 1/(4L)
        let traj = run(&inst.op, &inst.set, &RunConfig::new(MethodId::PEG, gamma * 0.75, 50, inst.x0.clone())).unwrap();
        for k in 1..50 {
            assert!(check_lemma2(&traj, k, inst.l).unwrap().holds());
        }
    }
}

#[test]
fn energy_is_nonincreasing_within_the_stepsize_range() {
    for seed in 0..20 {
        let inst = affine_instance(100 + seed);
        let gamma = 2f64.sqrt() / (3.0 * inst.l) * 0.999;
        let traj = run(&inst.op, &inst.set, &RunConfig::new(MethodId::PEG, gamma, 60, inst.x0.clone())).unwrap();
        for k in 1..60 {
            let a = eval_potential(PotentialKind::Lemma1Energy, &traj, k, &inst.x_star).unwrap();
            let b = eval_potential(PotentialKind::Lemma1Energy, &traj, k + 1, &inst.x_star).unwrap();
            assert!(b <= a + SLACK_TOL * (1.0 + a), "seed {seed} k {k}: {b} > {a}");
        }
    }
}

#[test]
fn peg_equals_og_and_passes_the_recursion() {
    for seed in 0..20 {
        let inst = affine_instance(500 + seed);
        let cfg = RunConfig::new(MethodId::PEG, 0.3 / inst.l, 40, inst.x0.clone());
        let peg = run(&inst.op, &inst.set, &cfg).unwrap();
        let og = og_from_peg(&peg).unwrap();
        assert!(og_recursion_residual(&og) <= 1e-12);
        let direct = run(&inst.op, &inst.set, &RunConfig { method: MethodId::OG, ..cfg }).unwrap();
        for (a, b) in direct.xts.iter().zip(&og.xts) {
            assert!((a - b).amax() <= 1e-12 * (1.0 + b.amax()));
        }
    }
}

#[test]
fn og_from_peg_rejects_other_methods() {
    let inst = affine_instance(3);
    let eg = run(&inst.op, &inst.set, &RunConfig::new(MethodId::EG, 0.1, 5, inst.x0.clone())).unwrap();
    assert!(og_from_peg(&eg).is_err());
}

#[test]
fn constrained_potential_decreases_on_boxes_and_balls() {
    for seed in 0..20 {
        let inst = constrained_instance(seed, seed % 2 == 0);
        let gamma = 1.0 / (4.0 * inst.l);
        let traj =
            run(&inst.op, &inst.set, &RunConfig::new(MethodId::ProjPEG, gamma, 80, inst.x0.clone())).unwrap();
        let rep = check_theorem_decrease(PotentialKind::ConstrainedPhi, &traj, &inst.x_star, inst.l).unwrap();
        assert!(rep.passed(), "seed {seed}: {rep:?}");
        assert!(!rep.out_of_theorem);
        for x in traj.xs.iter().chain(&traj.xts) {
            assert!(inst.set.distance(x).unwrap() <= 1e-12);
        }
    }
}

#[test]
fn unconstrained_potential_rejects_projected_runs() {
    let inst = constrained_instance(9, true);
    let traj = run(&inst.op, &inst.set, &RunConfig::new(MethodId::ProjPEG, 0.1, 10, inst.x0.clone())).unwrap();
    let err = check_theorem_decrease(PotentialKind::UnconstrainedPhi, &traj, &inst.x_star, inst.l).unwrap_err();
    assert!(matches!(err, Error::WrongSetting(_)));
}

#[test]
fn large_step_is_flagged_outside_the_theorem() {
    let inst = affine_instance(11);
    let gamma = 0.45 / inst.l;
    let traj = run(&inst.op, &inst.set, &RunConfig::new(MethodId::PEG, gamma, 20, inst.x0.clone())).unwrap();
    let rep = check_theorem_decrease(PotentialKind::UnconstrainedPhi, &traj, &inst.x_star, inst.l).unwrap();
    assert!(rep.out_of_theorem);
}

#[test]
fn all_methods_converge_on_a_monotone_affine_problem() {
    let inst = affine_instance(21);
    let gamma = 0.2 / inst.l;
    let start = vi_residual(&inst.op, &inst.set, &inst.x0).unwrap();
    for m in [MethodId::EG, MethodId::ProjEG, MethodId::PEG, MethodId::ProjPEG, MethodId::OG, MethodId::ProjOG, MethodId::EAG]
    {
        let traj = run(&inst.op, &inst.set, &RunConfig::new(m, gamma, 2000, inst.x0.clone())).unwrap();
        let end = vi_residual(&inst.op, &inst.set, traj.xs.last().unwrap()).unwrap();
        assert!(end < 1e-2 * start, "{m}: {end} vs {start}");
    }
}

#[test]
fn gradient_method_cycles_on_rotations() {
    // plain gradient steps spiral outward on a skew operator; extragradient does not
    let op = OperatorSpec::scaled_rotation(1.0, 2).unwrap();
    let x0 = Vector::from_vec(vec![1.0, 0.0]);
    let set = FeasibleSet::Unconstrained;
    let grad = run(&op, &set, &RunConfig::new(MethodId::Gradient, 0.1, 200, x0.clone())).unwrap();
    let peg = run(&op, &set, &RunConfig::new(MethodId::PEG, 0.1, 200, x0)).unwrap();
    assert!(grad.xs[200].norm() > 1.0);
    assert!(peg.xs[200].norm() < 0.5);
}

#[test]
fn metric_series_is_consistent_with_the_trajectory() {
    let inst = affine_instance(44);
    let traj =
        run(&inst.op, &inst.set, &RunConfig::new(MethodId::PEG, 1.0 / (3.0 * inst.l), 30, inst.x0.clone())).unwrap();
    let rows = metric_series(&traj, &inst.x_star, GapMode::Unconstrained, inst.l).unwrap();
    assert_eq!(rows.len(), 31);
    for r in &rows {
        assert_eq!(r.norm_f_sq, traj.gs[r.k].norm_squared());
        assert!(r.ratio.unwrap() <= 1.0);
    }
    let mut buf = Vec::new();
    write_metric_csv(&rows, &mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert_eq!(text.lines().next().unwrap(), METRIC_CSV_HEADER);
    assert_eq!(text.lines().count(), 32);
}

#[test]
fn anchoring_reaches_the_stationary_manifold() {
    let demo = run_eag_demo(0.1, 0.1, 2000).unwrap();
    let s = demo.summaries();
    assert_eq!(s[0].method, MethodId::EAG);
    for row in &s {
        assert!(row.final_dist_manifold.is_finite());
    }
    assert!(s[0].final_dist_manifold < s[0].initial_dist_stationary);
}
