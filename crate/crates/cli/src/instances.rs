//! Seeded operator instances for `simulate` and `potential-check`.

use lastiter::methods::affine_solution;
use lastiter::{random_monotone, FeasibleSet, OperatorSpec, Vector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::config::InstanceConfig;

pub struct Instance {
    pub op: OperatorSpec,
    pub set: FeasibleSet,
    pub x0: Vector,
    pub x_star: Vector,
}

fn gaussian(rng: &mut ChaCha8Rng, d: usize, scale: f64) -> Vector {
    Vector::from_fn(d, |_, _| {
        let z: f64 = StandardNormal.sample(&mut *rng);
        scale * z
    })
}

fn feasible_set(cfg: &InstanceConfig) -> lastiter::Result<FeasibleSet> {
    let d = cfg.dim;
    match cfg.set.as_str() {
        "ball" => FeasibleSet::new_ball(Vector::zeros(d), cfg.radius),
        "box" => FeasibleSet::new_box(Vector::from_element(d, -cfg.radius), Vector::from_element(d, cfg.radius)),
        _ => Ok(FeasibleSet::Unconstrained),
    }
}

/// Random draws whose symmetric part is numerically singular have no
/// reliable solution; those are redrawn from derived seeds.
const REDRAWS: u64 = 64;

pub fn build(cfg: &InstanceConfig, seed: u64) -> lastiter::Result<Instance> {
    let set = feasible_set(cfg)?;
    let d = cfg.dim;
    let mut last_err = None;
    for attempt in 0..REDRAWS {
        let s = if attempt == 0 { seed } else { seed.wrapping_mul(REDRAWS).wrapping_add(attempt) ^ (1 << 63) };
        let mut rng = ChaCha8Rng::seed_from_u64(s ^ 0x5eed_5eed);
        let op = match cfg.operator.as_str() {
            "zero" => OperatorSpec::zero(d)?,
            "rotation" => OperatorSpec::scaled_rotation(cfg.lipschitz, d)?,
            _ => random_monotone(s, d, cfg.lipschitz, cfg.skew)?,
        };
        let x_star = if cfg.operator == "zero" {
            // every point solves the zero VI; anchor at the start point
            set.project(&gaussian(&mut rng, d, cfg.init_scale))?
        } else {
            match affine_solution(&op, &set) {
                Ok(x) => x,
                Err(e) => {
                    last_err = Some(e);
                    continue;
                }
            }
        };
        let x0 = if cfg.operator == "zero" {
            x_star.clone()
        } else {
            set.project(&(&x_star + gaussian(&mut rng, d, cfg.init_scale)))?
        };
        return Ok(Instance { op, set, x0, x_star });
    }
    Err(last_err.expect("at least one attempt"))
}
