#![allow(dead_code)]

use lastiter::methods::affine_solution;
use lastiter::pep::PepSpec;
use lastiter::{random_monotone, FeasibleSet, InterpolationClass, MethodId, OperatorSpec, PepObjective, Vector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

pub fn gaussian(rng: &mut ChaCha8Rng, d: usize, scale: f64) -> Vector {
    Vector::from_fn(d, |_, _| {
        let z: f64 = StandardNormal.sample(&mut *rng);
        scale * z
    })
}

/// Seeded unconstrained affine instance: operator, start point, solution.
pub struct Instance {
    pub op: OperatorSpec,
    pub set: FeasibleSet,
    pub x0: Vector,
    pub x_star: Vector,
    pub l: f64,
}

/// Dimension in `2..=20`, `L ∈ [0.5, 3)`, skew fraction in `[0.2, 1]`.
///
/// The symmetric part of a random instance can be nearly singular, so the
/// generator nudges the seed until the linear solve certifies.
pub fn affine_instance(seed: u64) -> Instance {
    for attempt in 0..64 {
        let s = seed.wrapping_mul(1000).wrapping_add(attempt);
        let mut rng = ChaCha8Rng::seed_from_u64(s);
        let d = 2 + (seed % 19) as usize;
        let l = 0.5 + 2.5 * rand::Rng::random::<f64>(&mut rng);
        let skew = 0.2 + 0.8 * rand::Rng::random::<f64>(&mut rng);
        let op = random_monotone(s, d, l, skew).expect("valid parameters");
        let set = FeasibleSet::Unconstrained;
        if let Ok(x_star) = affine_solution(&op, &set) {
            let x0 = &x_star + gaussian(&mut rng, d, 1.0);
            return Instance { op, set, x0, x_star, l };
        }
    }
    panic!("no solvable instance near seed {seed}");
}

/// Seeded constrained instance on a ball (`ball = true`) or a box.
pub fn constrained_instance(seed: u64, ball: bool) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let d = 2 + (seed % 19) as usize;
    let l = 0.5 + 2.5 * rand::Rng::random::<f64>(&mut rng);
    let skew = 0.2 + 0.8 * rand::Rng::random::<f64>(&mut rng);
    let op = random_monotone(seed, d, l, skew).expect("valid parameters");
    let set = if ball {
        FeasibleSet::new_ball(gaussian(&mut rng, d, 0.3), 0.5 + rand::Rng::random::<f64>(&mut rng)).unwrap()
    } else {
        let c = gaussian(&mut rng, d, 0.3);
        let w = Vector::from_fn(d, |_, _| 0.2 + rand::Rng::random::<f64>(&mut rng));
        FeasibleSet::new_box(&c - &w, &c + &w).unwrap()
    };
    let x_star = affine_solution(&op, &set).expect("extragradient converges on a compact set");
    let x0 = set.project(&(&x_star + gaussian(&mut rng, d, 1.0))).unwrap();
    Instance { op, set, x0, x_star, l }
}

/// An instance recomputed by the embedded solver and frozen from the
/// external reference solver (CLARABEL through cvxpy, tolerances 1e-9).
pub struct Reference {
    pub name: &'static str,
    pub value: f64,
}

pub fn reference_spec(name: &str) -> PepSpec {
    let t3 = 1.0 / 3.0;
    let peg = |g, n| PepSpec::new(MethodId::PEG, g, 1.0, n);
    let og = |g, n| PepSpec::new(MethodId::OG, g, 1.0, n);
    match name {
        "peg_g1o3_n1" => peg(t3, 1),
        "peg_g1o3_n3" => peg(t3, 3),
        "peg_g1o3_n4" => peg(t3, 4),
        "og_g1o3_n2" => og(t3, 2),
        "og_g1o3_n4" => og(t3, 4),
        "peg_delta_n2" => peg(t3, 2).with_objective(PepObjective::DeltaNormSq),
        "peg_deltat_n2" => peg(t3, 2).with_objective(PepObjective::DeltaNormSqTilde),
        "peg_t1_n4" => peg(t3, 4).with_distance(1),
        "peg_t1_n8" => peg(t3, 8).with_distance(1),
        "peg_t1_n24" => peg(t3, 24).with_distance(1),
        "og_t1_n8" => og(t3, 8).with_distance(1),
        "og_t1_n12" => og(t3, 12).with_distance(1),
        "og_t1_n16" => og(t3, 16).with_distance(1),
        "og_t1_n20" => og(t3, 20).with_distance(1),
        "og_t1_n24" => og(t3, 24).with_distance(1),
        "projog_g1o4_n2" => PepSpec::new(MethodId::ProjOG, 0.25, 1.0, 2),
        "coco_peg_n2" => peg(t3, 2).with_class(InterpolationClass::Cocoercive(1.0)),
        other => panic!("unknown reference instance {other}"),
    }
}

/// Cross-solver instances (all reported `optimal` by the reference solver).
pub const CROSS_SOLVER: [Reference; 12] = [
    Reference { name: "peg_g1o3_n1", value: 1.111111111306e0 },
    Reference { name: "peg_g1o3_n3", value: 9.289099241828e-1 },
    Reference { name: "peg_g1o3_n4", value: 8.054295392958e-1 },
    Reference { name: "og_g1o3_n2", value: 1.049382715736e0 },
    Reference { name: "og_g1o3_n4", value: 8.662703853327e-1 },
    Reference { name: "peg_delta_n2", value: 6.172842475784e-3 },
    Reference { name: "peg_deltat_n2", value: 2.986843536422e-1 },
    Reference { name: "peg_t1_n4", value: 8.840115825648e-1 },
    Reference { name: "peg_t1_n8", value: 6.446143359471e-1 },
    Reference { name: "og_t1_n8", value: 7.383094942982e-1 },
    Reference { name: "og_t1_n12", value: 7.100958441373e-1 },
    Reference { name: "projog_g1o4_n2", value: 2.499999938870e-1 },
];

/// Distance-1 sweep values from the reference solver.
pub const DISTANCE_ONE: [Reference; 7] = [
    Reference { name: "peg_t1_n8", value: 6.446143359471e-1 },
    Reference { name: "peg_t1_n24", value: 2.299275002510e-1 },
    Reference { name: "og_t1_n8", value: 7.383094942982e-1 },
    Reference { name: "og_t1_n12", value: 7.100958441373e-1 },
    Reference { name: "og_t1_n16", value: 7.030304878234e-1 },
    Reference { name: "og_t1_n20", value: 7.010741516912e-1 },
    Reference { name: "og_t1_n24", value: 7.005148385840e-1 },
];

pub fn rel_diff(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-12)
}
