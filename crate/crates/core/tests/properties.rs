use lastiter::certify::{rat, GammaPoly};
use lastiter::{build_pep, random_monotone, solve, FeasibleSet, MethodId, PepSpec, SolverSettings, Vector};
use proptest::prelude::*;

fn vec_of(d: usize) -> impl Strategy<Value = Vector> {
    prop::collection::vec(-5.0f64..5.0, d).prop_map(Vector::from_vec)
}

fn poly() -> impl Strategy<Value = GammaPoly> {
    prop::collection::vec((-20i64..20, 1i64..9), 0..5)
        .prop_map(|c| GammaPoly::from_coeffs(c.into_iter().map(|(a, b)| rat(a, b)).collect()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn random_operators_are_monotone_and_lipschitz(
        seed in 0u64..10_000, d in 2usize..8, l in 0.1f64..10.0, skew in 0.0f64..1.0,
        x in vec_of(8), y in vec_of(8),
    ) {
        let op = random_monotone(seed, d, l, skew).unwrap();
        let (x, y) = (x.rows(0, d).into_owned(), y.rows(0, d).into_owned());
        let fx = op.evaluate(&x).unwrap();
        let fy = op.evaluate(&y).unwrap();
        let dx = &x - &y;
        let df = &fx - &fy;
        prop_assert!(df.dot(&dx) >= -1e-9 * (1.0 + dx.norm_squared() * l));
        prop_assert!(df.norm() <= l * dx.norm() * (1.0 + 1e-9) + 1e-12);
    }

    #[test]
    fn projections_are_idempotent_and_firmly_nonexpansive(
        x in vec_of(4), y in vec_of(4), r in 0.1f64..3.0, which in 0usize..3,
    ) {
        let set = match which {
            0 => FeasibleSet::new_ball(Vector::zeros(4), r).unwrap(),
            1 => FeasibleSet::new_box(Vector::from_element(4, -r), Vector::from_element(4, r)).unwrap(),
            _ => FeasibleSet::new_halfspace(Vector::from_vec(vec![1.0, -2.0, 0.5, r]), r).unwrap(),
        };
        let px = set.project(&x).unwrap();
        let py = set.project(&y).unwrap();
        prop_assert!((set.project(&px).unwrap() - &px).amax() <= 1e-12);
        // ||Px − Py||² ≤ <Px − Py, x − y>
        let dp = &px - &py;
        prop_assert!(dp.norm_squared() <= dp.dot(&(&x - &y)) + 1e-10);
    }

    #[test]
    fn polynomial_division_and_evaluation_agree(a in poly(), b in poly(), n in -6i64..6) {
        let x = rat(n, 3);
        prop_assert_eq!((&a * &b).eval(&x), a.eval(&x) * b.eval(&x));
        prop_assert_eq!((&a + &b).eval(&x), a.eval(&x) + b.eval(&x));
        if !b.is_zero() {
            let (quo, rem) = a.div_rem(&b);
            prop_assert_eq!(&(&quo * &b) + &rem, a.clone());
            prop_assert!(rem.is_zero() || rem.degree() < b.degree());
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn sdp_optimum_is_positively_homogeneous_in_the_objective(c in 0.2f64..5.0, n in 1usize..3) {
        let settings = SolverSettings::default().with_tol(1e-8);
        let base = build_pep(&PepSpec::new(MethodId::PEG, 1.0 / 3.0, 1.0, n)).unwrap();
        let mut scaled = base.clone();
        for e in scaled.objective.entries.iter_mut() {
            e.2 *= c;
        }
        let v1 = solve(&base, &settings).unwrap().objective;
        let v2 = solve(&scaled, &settings).unwrap().objective;
        prop_assert!((v2 - c * v1).abs() <= 1e-5 * (1.0 + c * v1), "{} vs {}", v2, c * v1);
    }
}
