//! Potential functions along trajectories and numeric checks of the lemma
//! and theorem inequalities that drive the last-iterate rates.

use std::io::Write;

use crate::error::{Error, Result};
use crate::linalg::Vector;
use crate::methods::{vi_residual, MethodId, Trajectory};
use crate::metrics::{h0_gamma_sq, theorem1_norm_bound, theorem2_residual_bound};
use crate::operators::{FeasibleSet, OperatorSpec};

/// Absolute slack tolerance, scaled by `1 + |lhs| + |rhs|`.
pub const SLACK_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PotentialKind {
    /// `||F(x^k)||² + 2||F(x^k) − F(x̃^{k−1})||²`.
    Lemma1Energy,
    /// `||x^k − x*||² + (k+32)/3·γ²·(Lemma1Energy)`.
    UnconstrainedPhi,
    /// `||x^k − x^{k−1}||² + ||x^k − x^{k−1} − 2γ(F(x^k) − F(x̃^{k−1}))||²`.
    Psi,
    /// `||x^k − x*||² + ||x̃^{k−1} − x̃^{k−2}||²/16 + (3k+32)/24·Ψ_k`.
    ConstrainedPhi,
}

impl PotentialKind {
    pub fn min_k(self) -> usize {
        match self {
            PotentialKind::Lemma1Energy | PotentialKind::UnconstrainedPhi => 0,
            PotentialKind::Psi => 1,
            PotentialKind::ConstrainedPhi => 2,
        }
    }
}

fn is_peg_family(traj: &Trajectory) -> bool {
    matches!(traj.method, MethodId::PEG | MethodId::ProjPEG)
}

fn require_peg(traj: &Trajectory, what: &str) -> Result<()> {
    if is_peg_family(traj) {
        Ok(())
    } else {
        Err(Error::WrongSetting(format!(
            "{what} needs a PEG or Proj-PEG trajectory, got {}",
            traj.method
        )))
    }
}

fn check_range(traj: &Trajectory, what: &'static str, k: usize, lo: usize, hi: usize) -> Result<()> {
    if k < lo {
        return Err(Error::InsufficientHistory { what, k });
    }
    if k > hi || hi > traj.len() {
        return Err(Error::IndexOutOfRange {
            index: k,
            valid: format!("{lo}..={}", hi.min(traj.len())),
        });
    }
    Ok(())
}

fn energy(traj: &Trajectory, k: usize) -> f64 {
    let g = &traj.gs[k];
    let gt_prev = traj.gt(k as isize - 1);
    g.norm_squared() + 2.0 * (g - gt_prev).norm_squared()
}

fn psi(traj: &Trajectory, k: usize) -> f64 {
    let dx = &traj.xs[k] - &traj.xs[k - 1];
    let corr = (&traj.gs[k] - &traj.gts[k - 1]) * (2.0 * traj.gamma);
    dx.norm_squared() + (&dx - corr).norm_squared()
}

/// Value of a potential at index `k`.
pub fn eval_potential(
    kind: PotentialKind,
    traj: &Trajectory,
    k: usize,
    x_star: &Vector,
) -> Result<f64> {
    require_peg(traj, "potential evaluation")?;
    check_range(traj, "potential", k, kind.min_k(), traj.len())?;
    if x_star.len() != traj.dim() {
        return Err(Error::DimensionMismatch {
            expected: traj.dim(),
            got: x_star.len(),
        });
    }
    let g2 = traj.gamma * traj.gamma;
    let kf = k as f64;
    Ok(match kind {
        PotentialKind::Lemma1Energy => energy(traj, k),
        PotentialKind::UnconstrainedPhi => {
            (&traj.xs[k] - x_star).norm_squared() + (kf + 32.0) / 3.0 * g2 * energy(traj, k)
        }
        PotentialKind::Psi => psi(traj, k),
        PotentialKind::ConstrainedPhi => {
            (&traj.xs[k] - x_star).norm_squared()
                + (&traj.xts[k - 1] - &traj.xts[k - 2]).norm_squared() / 16.0
                + (3.0 * kf + 32.0) / 24.0 * psi(traj, k)
        }
    })
}

/// `Ψ_k` for an unconstrained PEG run written through operator values:
/// `γ²(||F(x̃^{k−1})||² + ||F(x̃^{k−1}) + 2(F(x^k) − F(x̃^{k−1}))||²)`.
pub fn psi_unconstrained_reduced(traj: &Trajectory, k: usize) -> Result<f64> {
    if traj.method != MethodId::PEG {
        return Err(Error::WrongSetting("reduction holds for unconstrained PEG only".into()));
    }
    check_range(traj, "psi", k, 1, traj.len())?;
    let gt = &traj.gts[k - 1];
    let g = &traj.gs[k];
    let g2 = traj.gamma * traj.gamma;
    Ok(g2 * (gt.norm_squared() + (gt + (g - gt) * 2.0).norm_squared()))
}

/// A checked inequality `lhs ≤ rhs`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlackEntry {
    pub k: usize,
    pub lhs: f64,
    pub rhs: f64,
}

impl SlackEntry {
    pub fn slack(&self) -> f64 {
        self.rhs - self.lhs
    }

    /// Slack divided by `1 + |lhs| + |rhs|`.
    pub fn scaled_slack(&self) -> f64 {
        self.slack() / (1.0 + self.lhs.abs() + self.rhs.abs())
    }

    pub fn holds(&self) -> bool {
        self.scaled_slack() >= -SLACK_TOL
    }
}

/// `E_{k+1} ≤ E_k + 3(L²γ² − 2/9)||F(x̃^k) − F(x̃^{k−1})||²` with `E` the
/// Lemma1Energy, for `1 ≤ k ≤ N − 1`.
pub fn check_lemma1(traj: &Trajectory, k: usize, l: f64) -> Result<SlackEntry> {
    if traj.method != MethodId::PEG {
        return Err(Error::WrongSetting(format!(
            "energy decrease is stated for unconstrained PEG, got {}",
            traj.method
        )));
    }
    check_range(traj, "energy decrease", k, 1, traj.len().saturating_sub(1))?;
    let q2 = l * l * traj.gamma * traj.gamma;
    let dgt = (&traj.gts[k] - &traj.gts[k - 1]).norm_squared();
    Ok(SlackEntry {
        k,
        lhs: energy(traj, k + 1),
        rhs: energy(traj, k) + 3.0 * (q2 - 2.0 / 9.0) * dgt,
    })
}

/// `Ψ_{k+1} ≤ Ψ_k − (1 − 5L²γ²)||x^{k+1} − x̃^k||² − γ²||F(x^{k+1}) − F(x̃^k)||²`
/// for `1 ≤ k ≤ N − 1`.
pub fn check_lemma2(traj: &Trajectory, k: usize, l: f64) -> Result<SlackEntry> {
    require_peg(traj, "residual-potential decrease")?;
    check_range(traj, "residual-potential decrease", k, 1, traj.len().saturating_sub(1))?;
    let g = traj.gamma;
    let q2 = l * l * g * g;
    let a = (&traj.xs[k + 1] - &traj.xts[k]).norm_squared();
    let b = (&traj.gs[k + 1] - &traj.gts[k]).norm_squared();
    Ok(SlackEntry {
        k,
        lhs: psi(traj, k + 1),
        rhs: psi(traj, k) - (1.0 - 5.0 * q2) * a - g * g * b,
    })
}

/// Slacks of the two auxiliary Proj-PEG inequalities at `k`:
///
/// * `2γ⟨F(x̃^k), x̃^k − x*⟩ ≤ ||x^k − x*||² − ||x^{k+1} − x*||² − ||x̃^k − x^k||²
///   + γ²L²||x̃^k − x̃^{k−1}||²` (needs `1 ≤ k ≤ N − 1`),
/// * `||x̃^k − x̃^{k−1}||² ≤ 4||x̃^k − x^k||² + 4γ²L²||x̃^{k−1} − x̃^{k−2}||²
///   − ||x̃^k − x̃^{k−1}||²` (needs `k ≥ 2`).
///
/// Each entry is `None` when `k` is outside its range.
pub fn check_gidel_lemmas(
    traj: &Trajectory,
    k: usize,
    l: f64,
    x_star: &Vector,
) -> Result<(Option<SlackEntry>, Option<SlackEntry>)> {
    require_peg(traj, "auxiliary lemmas")?;
    let n = traj.len();
    if k == 0 {
        return Err(Error::InsufficientHistory { what: "auxiliary lemmas", k });
    }
    if k >= traj.xts.len() {
        return Err(Error::IndexOutOfRange {
            index: k,
            valid: format!("1..{}", traj.xts.len()),
        });
    }
    let g = traj.gamma;
    let q2 = g * g * l * l;
    let xt = &traj.xts[k];
    let xk = &traj.xs[k];
    let dt = (xt - &traj.xts[k - 1]).norm_squared();
    let first = (k < n).then(|| SlackEntry {
        k,
        lhs: 2.0 * g * traj.gts[k].dot(&(xt - x_star)),
        rhs: (xk - x_star).norm_squared() - (&traj.xs[k + 1] - x_star).norm_squared()
            - (xt - xk).norm_squared()
            + q2 * dt,
    });
    let second = (k >= 2).then(|| SlackEntry {
        k,
        lhs: dt,
        rhs: 4.0 * (xt - xk).norm_squared()
            + 4.0 * q2 * (&traj.xts[k - 1] - &traj.xts[k - 2]).norm_squared()
            - dt,
    });
    Ok((first, second))
}

/// One row of a decrease report.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecreaseRow {
    pub k: usize,
    pub potential: f64,
    /// `Φ_{k+1} − Φ_k`; absent on the last row.
    pub difference: Option<f64>,
    /// Scaled slack `(Φ_k − Φ_{k+1})/(1 + Φ_k + Φ_{k+1})`.
    pub slack: Option<f64>,
    /// Rate bound at `k` (see [`DecreaseReport::rate_quantity`]).
    pub bound: Option<f64>,
    pub bound_ratio: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecreaseReport {
    pub kind: PotentialKind,
    pub rows: Vec<DecreaseRow>,
    /// Smallest scaled slack over the checked range.
    pub min_slack: f64,
    /// `max(0, −min_slack)`.
    pub max_violation: f64,
    pub worst_k: usize,
    /// Set when `γ` exceeds the stepsize the theorem covers.
    pub out_of_theorem: bool,
    /// `||F(x^N)||²` (unconstrained) or `||x^N − x^{N−1}||²` (constrained).
    pub rate_quantity: f64,
    pub rate_bound: f64,
    /// `Φ_N ≤ Φ_start ≤` the initial-distance bound.
    pub chain_holds: bool,
    /// Constrained only: `Ψ₂ ≤ Ψ₁ ≤ 2(1 + 2γ²L²)γ²||F(x^0)||²`.
    pub warmup_holds: Option<bool>,
}

impl DecreaseReport {
    pub fn decrease_holds(&self) -> bool {
        self.min_slack >= -SLACK_TOL
    }

    pub fn rate_holds(&self) -> bool {
        self.rate_quantity <= self.rate_bound * (1.0 + SLACK_TOL) + SLACK_TOL
    }

    pub fn passed(&self) -> bool {
        self.decrease_holds()
            && self.rate_holds()
            && self.chain_holds
            && self.warmup_holds.unwrap_or(true)
    }

    pub const CSV_HEADER: &'static str = "k,potential,difference,slack,bound,bound_ratio";

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "{}", Self::CSV_HEADER)?;
        let opt = |v: Option<f64>| v.map(|x| format!("{x:e}")).unwrap_or_default();
        for r in &self.rows {
            writeln!(
                w,
                "{},{:e},{},{},{},{}",
                r.k,
                r.potential,
                opt(r.difference),
                opt(r.slack),
                opt(r.bound),
                opt(r.bound_ratio)
            )?;
        }
        Ok(())
    }
}

/// Checks `Φ_{k+1} ≤ Φ_k` over the theorem's range, the final rate bound,
/// and the chain bounds.
///
/// Unconstrained (`UnconstrainedPhi`, PEG): `k = 0..N−1`, stepsize range
/// `γ ≤ 1/(3L)`, final `||F(x^N)||² ≤ 3(1+32L²γ²)||x^0−x*||²/(γ²(N+32))`.
/// Constrained (`ConstrainedPhi`, Proj-PEG or PEG): `k = 2..N−1`, range
/// `γ ≤ 1/(4L)`, final `||x^N − x^{N−1}||² ≤ 24H₀,γ²/(3N+32)`.
pub fn check_theorem_decrease(
    kind: PotentialKind,
    traj: &Trajectory,
    x_star: &Vector,
    l: f64,
) -> Result<DecreaseReport> {
    require_peg(traj, "theorem decrease")?;
    let n = traj.len();
    let g = traj.gamma;
    let d0_sq = (&traj.xs[0] - x_star).norm_squared();
    let f0_sq = traj.gs[0].norm_squared();
    let rel = |a: f64, b: f64| a <= b + SLACK_TOL * (1.0 + a.abs() + b.abs());
    let (start, stepsize_limit) = match kind {
        PotentialKind::UnconstrainedPhi => {
            if traj.method != MethodId::PEG {
                return Err(Error::WrongSetting(
                    "the unconstrained potential needs an unconstrained PEG run".into(),
                ));
            }
            (0, 1.0 / (3.0 * l))
        }
        PotentialKind::ConstrainedPhi => {
            if n < 2 {
                return Err(Error::InsufficientHistory { what: "constrained potential", k: n });
            }
            (2, 1.0 / (4.0 * l))
        }
        other => {
            return Err(Error::InvalidInput(format!(
                "{other:?} is not a theorem potential"
            )))
        }
    };
    let h0g = h0_gamma_sq(d0_sq, f0_sq, g, l);
    let bound_at = |k: usize| -> Option<(f64, f64)> {
        match kind {
            PotentialKind::UnconstrainedPhi => Some((
                traj.gs[k].norm_squared(),
                theorem1_norm_bound(g, l, d0_sq, k),
            )),
            _ if k >= 2 => Some((
                (&traj.xs[k] - &traj.xs[k - 1]).norm_squared(),
                theorem2_residual_bound(h0g, k),
            )),
            _ => None,
        }
    };

    let values: Vec<f64> = (start..=n)
        .map(|k| eval_potential(kind, traj, k, x_star))
        .collect::<Result<_>>()?;
    let mut rows = Vec::with_capacity(values.len());
    let mut min_slack = f64::INFINITY;
    let mut worst_k = start;
    for (i, &phi) in values.iter().enumerate() {
        let k = start + i;
        let (difference, slack) = match values.get(i + 1) {
            Some(&next) => {
                let s = (phi - next) / (1.0 + phi.abs() + next.abs());
                if s < min_slack {
                    min_slack = s;
                    worst_k = k;
                }
                (Some(next - phi), Some(s))
            }
            None => (None, None),
        };
        let (bound, bound_ratio) = match bound_at(k) {
            Some((v, b)) => (Some(b), Some(if b > 0.0 { v / b } else { 0.0 })),
            None => (None, None),
        };
        rows.push(DecreaseRow {
            k,
            potential: phi,
            difference,
            slack,
            bound,
            bound_ratio,
        });
    }
    if !min_slack.is_finite() {
        min_slack = 0.0;
    }
    let (rate_quantity, rate_bound) = bound_at(n).unwrap_or((0.0, f64::INFINITY));

    let phi_last = *values.last().expect("nonempty");
    let (chain_holds, warmup_holds) = match kind {
        PotentialKind::UnconstrainedPhi => {
            let cap = (1.0 + 32.0 * l * l * g * g) * d0_sq;
            (rel(phi_last, values[0]) && rel(values[0], cap), None)
        }
        _ => {
            let psi1 = psi(traj, 1);
            let psi2 = psi(traj, 2);
            let warm = rel(psi2, psi1) && rel(psi1, 2.0 * (1.0 + 2.0 * g * g * l * l) * g * g * f0_sq);
            let chain = rel(phi_last, values[0]) && rel(values[0], h0g);
            (chain, Some(warm))
        }
    };

    Ok(DecreaseReport {
        kind,
        rows,
        min_slack,
        max_violation: (-min_slack).max(0.0),
        worst_k,
        out_of_theorem: g > stepsize_limit * (1.0 + 1e-12),
        rate_quantity,
        rate_bound,
        chain_holds,
        warmup_holds,
    })
}

/// Rejects a claimed solution whose VI natural residual exceeds `1e-10`.
pub fn validate_solution(op: &OperatorSpec, set: &FeasibleSet, x_star: &Vector) -> Result<()> {
    let r = vi_residual(op, set, x_star)?;
    if r > 1e-10 * (1.0 + x_star.norm()) {
        return Err(Error::SolutionNotFound(format!(
            "VI residual {r:e} exceeds 1e-10"
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::Matrix;
    use crate::methods::{affine_solution, run, RunConfig};
    use crate::operators::random_monotone;
    use approx::assert_relative_eq;

    fn identity_peg() -> Trajectory {
        let op = OperatorSpec::affine(Matrix::identity(1, 1), Vector::zeros(1)).unwrap();
        let cfg = RunConfig::new(MethodId::PEG, 0.1, 2, Vector::from_element(1, 1.0));
        run(&op, &FeasibleSet::Unconstrained, &cfg).unwrap()
    }

    #[test]
    fn phi_hand_values() {
        let t = identity_peg();
        let xs = Vector::zeros(1);
        let phi0 = eval_potential(PotentialKind::UnconstrainedPhi, &t, 0, &xs).unwrap();
        assert_relative_eq!(phi0, 1.0 + 32.0 * 0.01, max_relative = 1e-14);
        // Φ₁ = 0.81 + 11·0.01·(0.81 + 2·0.01)
        let phi1 = eval_potential(PotentialKind::UnconstrainedPhi, &t, 1, &xs).unwrap();
        assert_relative_eq!(phi1, 0.9013, max_relative = 1e-13);
    }

    #[test]
    fn zero_operator_potentials_vanish() {
        let op = OperatorSpec::zero(2).unwrap();
        let x0 = Vector::from_row_slice(&[0.2, 0.1]);
        let t = run(&op, &FeasibleSet::Unconstrained, &RunConfig::new(MethodId::PEG, 0.3, 5, x0.clone())).unwrap();
        for kind in [
            PotentialKind::Lemma1Energy,
            PotentialKind::UnconstrainedPhi,
            PotentialKind::Psi,
            PotentialKind::ConstrainedPhi,
        ] {
            for k in kind.min_k()..=5 {
                assert_eq!(eval_potential(kind, &t, k, &x0).unwrap(), 0.0);
            }
        }
        let e = check_lemma1(&t, 1, 1.0).unwrap();
        assert_eq!((e.lhs, e.rhs), (0.0, 0.0));
    }

    #[test]
    fn history_errors() {
        let t = identity_peg();
        let xs = Vector::zeros(1);
        assert!(matches!(
            eval_potential(PotentialKind::ConstrainedPhi, &t, 1, &xs),
            Err(Error::InsufficientHistory { .. })
        ));
        assert!(matches!(check_lemma1(&t, 0, 1.0), Err(Error::InsufficientHistory { .. })));
        assert!(check_lemma2(&t, 2, 1.0).is_err());
    }

    #[test]
    fn psi_reduction_matches() {
        let op = random_monotone(4, 5, 1.0, 0.7).unwrap();
        let t = run(&op, &FeasibleSet::Unconstrained, &RunConfig::new(MethodId::PEG, 0.2, 10, Vector::from_element(5, 1.0))).unwrap();
        for k in 1..=10 {
            let a = psi(&t, k);
            let b = psi_unconstrained_reduced(&t, k).unwrap();
            assert_relative_eq!(a, b, max_relative = 1e-12);
        }
    }

    #[test]
    fn theorem_decrease_on_random_instances() {
        for seed in 0..20 {
            let op = random_monotone(seed, 6, 2.0, 0.8).unwrap();
            let xs = affine_solution(&op, &FeasibleSet::Unconstrained).unwrap();
            let cfg = RunConfig::new(MethodId::PEG, 1.0 / 6.0, 60, Vector::from_element(6, 1.0));
            let t = run(&op, &FeasibleSet::Unconstrained, &cfg).unwrap();
            let rep = check_theorem_decrease(PotentialKind::UnconstrainedPhi, &t, &xs, 2.0).unwrap();
            assert!(rep.passed(), "seed {seed}: {rep:?}");
            assert!(!rep.out_of_theorem);
            for k in 1..60 {
                assert!(check_lemma1(&t, k, 2.0).unwrap().holds());
                assert!(check_lemma2(&t, k, 2.0).unwrap().holds());
            }
        }
    }

    #[test]
    fn constrained_decrease_on_ball() {
        for seed in 0..10 {
            let op = random_monotone(seed, 4, 1.0, 0.5).unwrap();
            let ball = FeasibleSet::new_ball(Vector::zeros(4), 0.5).unwrap();
            let xs = affine_solution(&op, &ball).unwrap();
            validate_solution(&op, &ball, &xs).unwrap();
            let cfg = RunConfig::new(MethodId::ProjPEG, 0.25, 40, Vector::from_element(4, 0.2));
            let t = run(&op, &ball, &cfg).unwrap();
            let rep = check_theorem_decrease(PotentialKind::ConstrainedPhi, &t, &xs, 1.0).unwrap();
            assert!(rep.passed(), "seed {seed}: {rep:?}");
            for k in 1..40 {
                let (a, b) = check_gidel_lemmas(&t, k, 1.0, &xs).unwrap();
                assert!(a.unwrap().holds());
                if let Some(b) = b {
                    assert!(b.holds());
                }
            }
        }
    }

    #[test]
    fn large_step_is_flagged() {
        let op = OperatorSpec::scaled_rotation(1.0, 2).unwrap();
        let cfg = RunConfig::new(MethodId::PEG, 0.9, 30, Vector::from_row_slice(&[1.0, 0.0]));
        let t = run(&op, &FeasibleSet::Unconstrained, &cfg).unwrap();
        let rep = check_theorem_decrease(PotentialKind::UnconstrainedPhi, &t, &Vector::zeros(2), 1.0).unwrap();
        assert!(rep.out_of_theorem);
    }

    #[test]
    fn csv_header() {
        let t = identity_peg();
        let rep = check_theorem_decrease(PotentialKind::UnconstrainedPhi, &t, &Vector::zeros(1), 1.0).unwrap();
        let mut buf = Vec::new();
        rep.write_csv(&mut buf).unwrap();
        let s = String::from_utf8(buf).unwrap();
        assert_eq!(s.lines().next().unwrap(), DecreaseReport::CSV_HEADER);
        assert_eq!(s.lines().count(), 4);
    }
}
