//! Convergence measures: residuals, restricted-gap bounds and the rate
//! constants of the last-iterate theorems.

use std::io::Write;

use crate::error::{Error, Result};
use crate::linalg::{spectral_norm, Matrix, Vector};
use crate::operators::{FeasibleSet, OperatorSpec};
use crate::methods::Trajectory;

/// Which last-iterate theory a bound refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GapMode {
    Unconstrained,
    Constrained,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GapEstimate {
    pub upper_bound: f64,
    pub radius: f64,
    pub exact_value: Option<f64>,
}

/// `||x^{k+1} − x^k||²`.
pub fn residual_sq(traj: &Trajectory, k: usize) -> Result<f64> {
    let n = traj.len();
    if k >= n {
        return Err(Error::IndexOutOfRange {
            index: k,
            valid: format!("0..{n}"),
        });
    }
    Ok((&traj.xs[k + 1] - &traj.xs[k]).norm_squared())
}

/// `√41/3 · ||x^0 − x*||`.
pub fn unconstrained_radius(d0: f64) -> f64 {
    41f64.sqrt() / 3.0 * d0
}

/// `√3·||x^0 − x*|| + ||F(x^0)||/(√30·L)`.
pub fn constrained_radius(d0: f64, f0_norm: f64, l: f64) -> f64 {
    3f64.sqrt() * d0 + f0_norm / (30f64.sqrt() * l)
}

/// `H₀² = 3||x^0 − x*||² + ||F(x^0)||²/(30L²)`.
pub fn h0_sq(d0_sq: f64, f0_sq: f64, l: f64) -> f64 {
    3.0 * d0_sq + f0_sq / (30.0 * l * l)
}

/// `H₀,γ² = 2(1 + 3γ²L² + 4γ⁴L⁴)||x^0 − x*||² + (41/12 + 19γ²L²/3)γ²||F(x^0)||²`.
pub fn h0_gamma_sq(d0_sq: f64, f0_sq: f64, gamma: f64, l: f64) -> f64 {
    let q2 = gamma * gamma * l * l;
    2.0 * (1.0 + 3.0 * q2 + 4.0 * q2 * q2) * d0_sq
        + (41.0 / 12.0 + 19.0 / 3.0 * q2) * gamma * gamma * f0_sq
}

/// `3(1 + 32L²γ²)||x^0 − x*||² / (γ²(k + 32))`, the bound on `||F(x^k)||²`.
pub fn theorem1_norm_bound(gamma: f64, l: f64, d0_sq: f64, k: usize) -> f64 {
    3.0 * (1.0 + 32.0 * l * l * gamma * gamma) * d0_sq / (gamma * gamma * (k as f64 + 32.0))
}

/// `123 L²||x^0 − x*||²/(k + 32)`, the norm bound at `γ = 1/(3L)`.
pub fn theorem1_norm_bound_simplified(l: f64, d0_sq: f64, k: usize) -> f64 {
    123.0 * l * l * d0_sq / (k as f64 + 32.0)
}

/// `125 L||x^0 − x*||²/√(3k + 96)`, the gap bound at `γ = 1/(3L)`.
pub fn theorem1_gap_bound(l: f64, d0_sq: f64, k: usize) -> f64 {
    125.0 * l * d0_sq / (3.0 * k as f64 + 96.0).sqrt()
}

/// `24 H₀,γ²/(3k + 32)`, the bound on `||x^k − x^{k−1}||²` for `k ≥ 2`.
pub fn theorem2_residual_bound(h0g_sq: f64, k: usize) -> f64 {
    24.0 * h0g_sq / (3.0 * k as f64 + 32.0)
}

/// `32√3·L·H₀²/√(3k + 32)`, the gap bound at `γ = 1/(4L)`.
pub fn theorem2_gap_bound(l: f64, h0_sq: f64, k: usize) -> f64 {
    32.0 * 3f64.sqrt() * l * h0_sq / (3.0 * k as f64 + 32.0).sqrt()
}

/// `8√3·H₀,γ·H₀/(γ√(3k + 32))`, the general-stepsize gap bound.
pub fn theorem2_gap_bound_general(gamma: f64, h0g_sq: f64, h0_sq: f64, k: usize) -> f64 {
    8.0 * 3f64.sqrt() * h0g_sq.sqrt() * h0_sq.sqrt() / (gamma * (3.0 * k as f64 + 32.0).sqrt())
}

/// Upper bound on the restricted gap at `x^k`.
///
/// Unconstrained: `||F(x^k)||·(||x^k − x*|| + R)` with `R = √41/3·||x^0 − x*||`.
/// Constrained: `(1/γ)||x^k − x^{k−1} − γ(F(x^k) − F(x̃^{k−1}))||·(||x^k − x*|| + H₀)`.
pub fn gap_upper_bound(
    traj: &Trajectory,
    k: usize,
    x_star: &Vector,
    mode: GapMode,
    l: f64,
) -> Result<GapEstimate> {
    let n = traj.len();
    if k > n {
        return Err(Error::IndexOutOfRange {
            index: k,
            valid: format!("0..={n}"),
        });
    }
    if x_star.len() != traj.dim() {
        return Err(Error::DimensionMismatch {
            expected: traj.dim(),
            got: x_star.len(),
        });
    }
    let d0 = (&traj.xs[0] - x_star).norm();
    let dk = (&traj.xs[k] - x_star).norm();
    match mode {
        GapMode::Unconstrained => {
            let radius = unconstrained_radius(d0);
            Ok(GapEstimate {
                upper_bound: traj.gs[k].norm() * (dk + radius),
                radius,
                exact_value: None,
            })
        }
        GapMode::Constrained => {
            if k == 0 {
                return Err(Error::InsufficientHistory {
                    what: "constrained gap bound",
                    k,
                });
            }
            if traj.xts.len() < k {
                return Err(Error::WrongSetting(format!(
                    "{} trajectory has no x̃^{}",
                    traj.method,
                    k - 1
                )));
            }
            let g = traj.gamma;
            let v = &traj.xs[k] - &traj.xs[k - 1] - (&traj.gs[k] - &traj.gts[k - 1]) * g;
            let radius = h0_sq(d0 * d0, traj.gs[0].norm_squared(), l).sqrt();
            Ok(GapEstimate {
                upper_bound: v.norm() / g * (dk + radius),
                radius,
                exact_value: None,
            })
        }
    }
}

/// Restricted gap `max {⟨F(y), x − y⟩ : y ∈ X, ||y − x*|| ≤ R}` for affine
/// monotone `F`, by accelerated projected gradient ascent.
///
/// The inner objective is concave with gradient `Aᵀx − b − (A + Aᵀ)y`; the
/// step is `1/(2·||A + Aᵀ||)`. The returned value is the objective at the
/// best feasible iterate, so it never exceeds the true maximum by more than
/// the feasibility tolerance of the projection.
pub fn exact_gap_affine(
    op: &OperatorSpec,
    set: &FeasibleSet,
    x: &Vector,
    x_star: &Vector,
    radius: f64,
) -> Result<f64> {
    let (a, b) = op
        .affine_parts()
        .ok_or_else(|| Error::WrongSetting("exact gap requires an affine operator".into()))?;
    let d = a.nrows();
    if x.len() != d || x_star.len() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: if x.len() != d { x.len() } else { x_star.len() },
        });
    }
    if !(radius >= 0.0) {
        return Err(Error::InvalidInput(format!("radius must be nonnegative, got {radius}")));
    }
    let sym = &a + a.transpose();
    let l_inner = spectral_norm(&sym);
    let lin = a.transpose() * x - &b;
    let value = |y: &Vector| (&a * y + &b).dot(&(x - y));
    let grad = |y: &Vector| &lin - &sym * y;
    let region = GapRegion { set, center: x_star, radius };

    // a linear objective still needs a finite step; scale it to the region
    let step = if l_inner > 1e-12 {
        0.5 / l_inner
    } else {
        let gn = lin.norm();
        if gn == 0.0 {
            return Ok(value(&region.project(x_star)?));
        }
        radius.max(1.0) / gn
    };

    const MAX_ITERS: usize = 100_000;
    let mut y = region.project(x_star)?;
    let mut z = y.clone();
    let mut t = 1.0f64;
    let mut best = value(&y);
    let mut stall = 0;
    for _ in 0..MAX_ITERS {
        let y_next = region.project(&(&z + grad(&z) * step))?;
        let v_next = value(&y_next);
        let moved = (&y_next - &y).norm();
        if v_next < value(&y) {
            // restart momentum when the objective drops
            t = 1.0;
            z = y.clone();
            continue;
        }
        let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
        z = &y_next + (&y_next - &y) * ((t - 1.0) / t_next);
        t = t_next;
        y = y_next;
        if v_next > best + 1e-14 * (1.0 + best.abs()) {
            stall = 0;
        } else {
            stall += 1;
        }
        best = best.max(v_next);
        if moved <= 1e-13 * (1.0 + y.norm()) || stall > 2000 {
            break;
        }
    }
    Ok(best)
}

/// `{y ∈ X : ||y − c|| ≤ R}` with projection by Dykstra's algorithm.
struct GapRegion<'a> {
    set: &'a FeasibleSet,
    center: &'a Vector,
    radius: f64,
}

impl GapRegion<'_> {
    fn ball(&self, v: &Vector) -> Vector {
        let diff = v - self.center;
        let n = diff.norm();
        if n <= self.radius {
            v.clone()
        } else {
            self.center + diff * (self.radius / n)
        }
    }

    fn project(&self, v: &Vector) -> Result<Vector> {
        if self.set.is_unconstrained() {
            return Ok(self.ball(v));
        }
        let in_set = self.set.project(v)?;
        if (&in_set - self.center).norm() <= self.radius {
            return Ok(in_set);
        }
        let in_ball = self.ball(v);
        if self.set.distance(&in_ball)? <= 1e-14 {
            return Ok(in_ball);
        }
        let mut y = v.clone();
        let mut p = Vector::zeros(v.len());
        let mut q = Vector::zeros(v.len());
        for _ in 0..500 {
            let u = self.ball(&(&y + &p));
            p = &y + &p - &u;
            let y_new = self.set.project(&(&u + &q))?;
            q = &u + &q - &y_new;
            let change = (&y_new - &y).norm();
            y = y_new;
            if change <= 1e-10 * (1.0 + y.norm()) {
                break;
            }
        }
        // finish inside X; the ball constraint is met up to the tolerance
        Ok(y)
    }
}

/// One row of the metric time series.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricRow {
    pub k: usize,
    pub norm_f_sq: f64,
    pub residual_sq: Option<f64>,
    pub gap_upper_bound: Option<f64>,
    /// Theorem bound on the mode's rate quantity at index `k`:
    /// `||F(x^k)||²` unconstrained, `||x^k − x^{k−1}||²` constrained.
    pub theorem_bound: Option<f64>,
    pub ratio: Option<f64>,
}

pub const METRIC_CSV_HEADER: &str = "k,norm_f_sq,residual_sq,gap_upper_bound,theorem_bound,ratio";

/// Metric rows `k = 0..=N` for a trajectory with known solution `x*`.
pub fn metric_series(
    traj: &Trajectory,
    x_star: &Vector,
    mode: GapMode,
    l: f64,
) -> Result<Vec<MetricRow>> {
    let n = traj.len();
    let d0_sq = (&traj.xs[0] - x_star).norm_squared();
    let f0_sq = traj.gs[0].norm_squared();
    let gamma = traj.gamma;
    let h0g = h0_gamma_sq(d0_sq, f0_sq, gamma, l);
    let mut rows = Vec::with_capacity(n + 1);
    for k in 0..=n {
        let residual = if k < n { Some(residual_sq(traj, k)?) } else { None };
        let gap = match mode {
            GapMode::Unconstrained => Some(gap_upper_bound(traj, k, x_star, mode, l)?.upper_bound),
            GapMode::Constrained if k >= 1 && traj.xts.len() >= k => {
                Some(gap_upper_bound(traj, k, x_star, mode, l)?.upper_bound)
            }
            GapMode::Constrained => None,
        };
        let norm_f_sq = traj.gs[k].norm_squared();
        let (bound, ratio) = match mode {
            GapMode::Unconstrained => {
                let b = theorem1_norm_bound(gamma, l, d0_sq, k);
                (Some(b), Some(safe_ratio(norm_f_sq, b)))
            }
            GapMode::Constrained if k >= 2 => {
                let b = theorem2_residual_bound(h0g, k);
                let r = (&traj.xs[k] - &traj.xs[k - 1]).norm_squared();
                (Some(b), Some(safe_ratio(r, b)))
            }
            GapMode::Constrained => (None, None),
        };
        rows.push(MetricRow {
            k,
            norm_f_sq,
            residual_sq: residual,
            gap_upper_bound: gap,
            theorem_bound: bound,
            ratio,
        });
    }
    Ok(rows)
}

fn safe_ratio(num: f64, den: f64) -> f64 {
    if den > 0.0 {
        num / den
    } else if num == 0.0 {
        0.0
    } else {
        f64::INFINITY
    }
}

pub fn write_metric_csv<W: Write>(rows: &[MetricRow], mut w: W) -> Result<()> {
    writeln!(w, "{METRIC_CSV_HEADER}")?;
    let opt = |v: Option<f64>| v.map(|x| format!("{x:e}")).unwrap_or_default();
    for r in rows {
        writeln!(
            w,
            "{},{:e},{},{},{},{}",
            r.k,
            r.norm_f_sq,
            opt(r.residual_sq),
            opt(r.gap_upper_bound),
            opt(r.theorem_bound),
            opt(r.ratio)
        )?;
    }
    Ok(())
}

/// `⟨F(y), x − y⟩` for an affine operator given as `(A, b)`.
pub fn gap_objective(a: &Matrix, b: &Vector, x: &Vector, y: &Vector) -> f64 {
    (a * y + b).dot(&(x - y))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::methods::{affine_solution, run, MethodId, RunConfig};
    use crate::operators::random_monotone;
    use approx::assert_relative_eq;

    fn identity_peg() -> Trajectory {
        let op = OperatorSpec::affine(Matrix::identity(1, 1), Vector::zeros(1)).unwrap();
        let cfg = RunConfig::new(MethodId::PEG, 0.1, 2, Vector::from_element(1, 1.0));
        run(&op, &FeasibleSet::Unconstrained, &cfg).unwrap()
    }

    #[test]
    fn residual_hand_values() {
        let t = identity_peg();
        let r = residual_sq(&t, 1).unwrap();
        assert_relative_eq!(r, 0.0064, max_relative = 1e-12);
        assert_relative_eq!(r, 0.01 * t.gts[1].norm_squared(), max_relative = 1e-12);
        assert!(matches!(residual_sq(&t, 2), Err(Error::IndexOutOfRange { .. })));
    }

    #[test]
    fn bound_vanishes_at_solution() {
        let op = random_monotone(1, 3, 1.0, 0.5).unwrap();
        let xs = affine_solution(&op, &FeasibleSet::Unconstrained).unwrap();
        let t = run(&op, &FeasibleSet::Unconstrained, &RunConfig::new(MethodId::PEG, 0.3, 3, xs.clone())).unwrap();
        let g = gap_upper_bound(&t, 2, &xs, GapMode::Unconstrained, 1.0).unwrap();
        assert!(g.upper_bound < 1e-12);
    }

    #[test]
    fn constrained_needs_history() {
        let t = identity_peg();
        let xs = Vector::zeros(1);
        assert!(matches!(
            gap_upper_bound(&t, 0, &xs, GapMode::Constrained, 1.0),
            Err(Error::InsufficientHistory { .. })
        ));
    }

    #[test]
    fn scalar_exact_gap() {
        let op = OperatorSpec::affine(Matrix::identity(1, 1), Vector::zeros(1)).unwrap();
        let v = exact_gap_affine(
            &op,
            &FeasibleSet::Unconstrained,
            &Vector::from_element(1, 0.5),
            &Vector::zeros(1),
            1.0,
        )
        .unwrap();
        assert_relative_eq!(v, 0.0625, epsilon = 1e-10);
    }

    #[test]
    fn exact_gap_matches_grid_in_2d() {
        for seed in 0..5u64 {
            let op = random_monotone(seed, 2, 1.0, 0.6).unwrap();
            let (a, b) = op.affine_parts().unwrap();
            let xs = Vector::from_row_slice(&[0.1 * seed as f64, -0.2]);
            let x = Vector::from_row_slice(&[0.7, 0.4]);
            let r = 1.0;
            let v = exact_gap_affine(&op, &FeasibleSet::Unconstrained, &x, &xs, r).unwrap();
            // polar grid with 10⁴ points
            let mut best = f64::NEG_INFINITY;
            for i in 0..40 {
                for j in 0..250 {
                    let rho = r * (i as f64 + 1.0) / 40.0;
                    let th = std::f64::consts::TAU * j as f64 / 250.0;
                    let y = &xs + Vector::from_row_slice(&[rho * th.cos(), rho * th.sin()]);
                    best = best.max(gap_objective(&a, &b, &x, &y));
                }
            }
            assert!(v >= best - 1e-9, "ascent {v} below grid {best}");
            assert!((v - best).abs() <= 1e-3, "ascent {v} vs grid {best}");
        }
    }

    #[test]
    fn exact_gap_respects_box() {
        let op = OperatorSpec::scaled_rotation(1.0, 2).unwrap();
        let bx = FeasibleSet::new_box(Vector::from_element(2, -0.3), Vector::from_element(2, 0.3)).unwrap();
        let x = Vector::from_row_slice(&[0.3, 0.3]);
        let v = exact_gap_affine(&op, &bx, &x, &Vector::zeros(2), 1.0).unwrap();
        let (a, b) = op.affine_parts().unwrap();
        let mut best = f64::NEG_INFINITY;
        for i in 0..=200 {
            for j in 0..=200 {
                let y = Vector::from_row_slice(&[-0.3 + 0.6 * i as f64 / 200.0, -0.3 + 0.6 * j as f64 / 200.0]);
                best = best.max(gap_objective(&a, &b, &x, &y));
            }
        }
        assert!((v - best).abs() <= 1e-3);
    }

    #[test]
    fn h0_constants() {
        assert_relative_eq!(h0_sq(1.0, 30.0, 1.0), 4.0);
        let q: f64 = 0.25;
        let expect = 2.0 * (1.0 + 3.0 * q * q + 4.0 * q.powi(4)) + (41.0 / 12.0 + 19.0 / 3.0 * q * q) * q * q;
        assert_relative_eq!(h0_gamma_sq(1.0, 1.0, 0.25, 1.0), expect);
        assert_relative_eq!(theorem1_norm_bound(1.0 / 3.0, 1.0, 1.0, 0) * 32.0, 123.0, max_relative = 1e-12);
    }

    #[test]
    fn metric_csv_header() {
        let t = identity_peg();
        let rows = metric_series(&t, &Vector::zeros(1), GapMode::Unconstrained, 1.0).unwrap();
        let mut buf = Vec::new();
        write_metric_csv(&rows, &mut buf).unwrap();
        let s = String::from_utf8(buf).unwrap();
        assert_eq!(s.lines().next().unwrap(), METRIC_CSV_HEADER);
        assert_eq!(s.lines().count(), 4);
    }
}
