//! Iteration schemes and recorded trajectories.
//!
//! All methods share the convention `F(x̃^{-1}) = 0`. Every operator value
//! used by a method is stored in the trajectory, and `F(x^k)` is recorded
//! for every `k` so that diagnostics never re-evaluate the operator.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::linalg::{all_finite, Matrix, Vector};
use crate::operators::{FeasibleSet, OperatorSpec};

/// Coordinates beyond this magnitude abort a run.
pub const DIVERGENCE_THRESHOLD: f64 = 1e100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MethodId {
    Gradient,
    EG,
    ProjEG,
    PEG,
    ProjPEG,
    OG,
    ProjOG,
    EAG,
}

impl MethodId {
    pub const ALL: [MethodId; 8] = [
        MethodId::Gradient,
        MethodId::EG,
        MethodId::ProjEG,
        MethodId::PEG,
        MethodId::ProjPEG,
        MethodId::OG,
        MethodId::ProjOG,
        MethodId::EAG,
    ];

    pub fn name(self) -> &'static str {
        match self {
            MethodId::Gradient => "gradient",
            MethodId::EG => "eg",
            MethodId::ProjEG => "proj-eg",
            MethodId::PEG => "peg",
            MethodId::ProjPEG => "proj-peg",
            MethodId::OG => "og",
            MethodId::ProjOG => "proj-og",
            MethodId::EAG => "eag",
        }
    }

    pub fn is_projected(self) -> bool {
        matches!(
            self,
            MethodId::Gradient | MethodId::ProjEG | MethodId::ProjPEG | MethodId::ProjOG
        )
    }
}

impl fmt::Display for MethodId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for MethodId {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let norm = s.trim().to_ascii_lowercase().replace('_', "-");
        MethodId::ALL
            .into_iter()
            .find(|m| m.name() == norm)
            .ok_or_else(|| Error::InvalidInput(format!("unknown method '{s}'")))
    }
}

/// Anchoring coefficients `β_k` for EAG.
#[derive(Debug, Clone, PartialEq)]
pub enum AnchorSchedule {
    /// `β_k = 1/(k + 2)`.
    Harmonic,
    Constant(f64),
    Explicit(Vec<f64>),
}

impl Default for AnchorSchedule {
    fn default() -> Self {
        AnchorSchedule::Harmonic
    }
}

impl AnchorSchedule {
    pub fn beta(&self, k: usize) -> f64 {
        match self {
            AnchorSchedule::Harmonic => 1.0 / (k as f64 + 2.0),
            AnchorSchedule::Constant(b) => *b,
            AnchorSchedule::Explicit(v) => v.get(k).copied().unwrap_or(0.0),
        }
    }

    fn validate(&self, n: usize) -> Result<()> {
        for k in 0..n {
            let b = self.beta(k);
            if !(0.0..1.0).contains(&b) {
                return Err(Error::InvalidInput(format!(
                    "anchor beta_{k} = {b} outside [0, 1)"
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub method: MethodId,
    pub gamma: f64,
    pub iterations: usize,
    pub anchor: AnchorSchedule,
    pub x0: Vector,
}

impl RunConfig {
    pub fn new(method: MethodId, gamma: f64, iterations: usize, x0: Vector) -> Self {
        Self {
            method,
            gamma,
            iterations,
            anchor: AnchorSchedule::default(),
            x0,
        }
    }

    pub fn with_anchor(mut self, anchor: AnchorSchedule) -> Self {
        self.anchor = anchor;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.gamma > 0.0) || !self.gamma.is_finite() {
            return Err(Error::InvalidInput(format!(
                "gamma must be positive, got {}",
                self.gamma
            )));
        }
        if self.x0.is_empty() || !all_finite(&self.x0) {
            return Err(Error::InvalidInput("x0 must be a nonempty finite vector".into()));
        }
        if self.method == MethodId::EAG {
            self.anchor.validate(self.iterations)?;
        }
        Ok(())
    }
}

/// A recorded run.
///
/// `xs` holds `x^0..x^N` and `gs[k] = F(x^k)`. `xts[k] = x̃^k` with
/// `gts[k] = F(x̃^k)`; Gradient runs have no extrapolation points, EG and
/// EAG runs have `x̃^0..x̃^{N-1}`, and the PEG/OG family has `x̃^0..x̃^N`.
/// For PEG-family runs `x̃^0 = x^0`.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub method: MethodId,
    pub gamma: f64,
    pub xs: Vec<Vector>,
    pub xts: Vec<Vector>,
    pub gs: Vec<Vector>,
    pub gts: Vec<Vector>,
    /// The stored convention value `F(x̃^{-1}) = 0`.
    pub gt_minus1: Vector,
}

impl Trajectory {
    /// Number of iterations `N`.
    pub fn len(&self) -> usize {
        self.xs.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.xs.len() <= 1
    }

    pub fn dim(&self) -> usize {
        self.xs[0].len()
    }

    /// `F(x̃^k)` with `k = -1` mapped to the stored zero.
    pub fn gt(&self, k: isize) -> &Vector {
        if k < 0 {
            &self.gt_minus1
        } else {
            &self.gts[k as usize]
        }
    }

    /// `x̃^k`, panicking outside the recorded range.
    pub fn xt(&self, k: usize) -> &Vector {
        &self.xts[k]
    }

    /// Writes `k, x^k…, x̃^k…, ||F(x^k)||², ||x^{k+1} − x^k||²`. Missing
    /// entries (no `x̃^k`, or `k = N` for the residual) are left empty.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        let d = self.dim();
        let mut header = vec!["k".to_string()];
        header.extend((0..d).map(|i| format!("x{i}")));
        header.extend((0..d).map(|i| format!("xt{i}")));
        header.push("norm_f_sq".into());
        header.push("residual_sq".into());
        writeln!(w, "{}", header.join(","))?;
        let n = self.len();
        for k in 0..=n {
            let mut row = vec![k.to_string()];
            row.extend(self.xs[k].iter().map(|v| format!("{v:e}")));
            match self.xts.get(k) {
                Some(xt) => row.extend(xt.iter().map(|v| format!("{v:e}"))),
                None => row.extend(std::iter::repeat_n(String::new(), d)),
            }
            row.push(format!("{:e}", self.gs[k].norm_squared()));
            row.push(if k < n {
                format!("{:e}", (&self.xs[k + 1] - &self.xs[k]).norm_squared())
            } else {
                String::new()
            });
            writeln!(w, "{}", row.join(","))?;
        }
        Ok(())
    }
}

struct Recorder<'a> {
    op: &'a OperatorSpec,
    method: MethodId,
}

impl Recorder<'_> {
    fn eval(&self, x: &Vector, index: usize) -> Result<Vector> {
        check_finite(self.method, x, index)?;
        let g = self.op.evaluate(x)?;
        check_finite(self.method, &g, index)?;
        Ok(g)
    }
}

fn check_finite(method: MethodId, v: &Vector, index: usize) -> Result<()> {
    if let Some(c) = v
        .iter()
        .find(|c| !c.is_finite() || c.abs() > DIVERGENCE_THRESHOLD)
    {
        return Err(Error::Divergence {
            method: method.name().into(),
            index,
            detail: format!("coordinate {c:e}"),
        });
    }
    Ok(())
}

/// Runs `cfg.method` on `op` over `set`.
///
/// Projected methods require `x0 ∈ set`; plain EG/PEG/OG/EAG require an
/// unconstrained set. Proj-OG follows `x̃^k = proj[x^k − γF(x̃^{k-1})]`,
/// `x^{k+1} = x̃^k + γ(F(x̃^{k-1}) − F(x̃^k))` with `x^{k+1}` left unprojected.
pub fn run(op: &OperatorSpec, set: &FeasibleSet, cfg: &RunConfig) -> Result<Trajectory> {
    cfg.validate()?;
    let d = op.dim();
    if cfg.x0.len() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: cfg.x0.len(),
        });
    }
    if let Some(sd) = set.dim() {
        if sd != d {
            return Err(Error::DimensionMismatch { expected: d, got: sd });
        }
    }
    let method = cfg.method;
    if !method.is_projected() && !set.is_unconstrained() {
        return Err(Error::WrongSetting(format!(
            "{method} is unconstrained; use the projected variant"
        )));
    }
    if method.is_projected() {
        let dist = set.distance(&cfg.x0)?;
        if dist > 1e-12 * (1.0 + cfg.x0.norm()) {
            return Err(Error::InvalidInput(format!(
                "x0 must lie in the feasible set (distance {dist:e})"
            )));
        }
    }

    let rec = Recorder { op, method };
    let gamma = cfg.gamma;
    let n = cfg.iterations;
    let proj = |v: Vector| set.project(&v);
    let zero = Vector::zeros(d);

    let mut xs = Vec::with_capacity(n + 1);
    let mut gs = Vec::with_capacity(n + 1);
    let mut xts = Vec::new();
    let mut gts = Vec::new();
    let x0 = cfg.x0.clone();
    gs.push(rec.eval(&x0, 0)?);
    xs.push(x0);

    match method {
        MethodId::Gradient => {
            for k in 0..n {
                let next = proj(&xs[k] - &gs[k] * gamma)?;
                gs.push(rec.eval(&next, k + 1)?);
                xs.push(next);
            }
        }
        MethodId::EG | MethodId::ProjEG => {
            for k in 0..n {
                let xt = proj(&xs[k] - &gs[k] * gamma)?;
                let gt = rec.eval(&xt, k)?;
                let next = proj(&xs[k] - &gt * gamma)?;
                xts.push(xt);
                gts.push(gt);
                gs.push(rec.eval(&next, k + 1)?);
                xs.push(next);
            }
        }
        MethodId::PEG | MethodId::ProjPEG => {
            // x̃^0 = x^0 and F(x̃^0) = F(x^0) share the first evaluation
            xts.push(xs[0].clone());
            gts.push(gs[0].clone());
            for k in 0..n {
                let next = proj(&xs[k] - &gts[k] * gamma)?;
                gs.push(rec.eval(&next, k + 1)?);
                let xt = proj(&next - &gts[k] * gamma)?;
                gts.push(rec.eval(&xt, k + 1)?);
                xts.push(xt);
                xs.push(next);
            }
        }
        MethodId::OG => {
            xts.push(xs[0].clone());
            gts.push(gs[0].clone());
            for k in 0..n {
                let prev = if k == 0 { &zero } else { &gts[k - 1] };
                let xt = &xts[k] - &gts[k] * (2.0 * gamma) + prev * gamma;
                let gt = rec.eval(&xt, k + 1)?;
                // companion sequence x^{k+1} = x̃^{k+1} + γ F(x̃^k)
                let next = &xt + &gts[k] * gamma;
                gs.push(rec.eval(&next, k + 1)?);
                xs.push(next);
                xts.push(xt);
                gts.push(gt);
            }
        }
        MethodId::ProjOG => {
            xts.push(xs[0].clone());
            gts.push(gs[0].clone());
            for k in 0..n {
                let prev = if k == 0 { &zero } else { &gts[k - 1] };
                let next = &xts[k] + (prev - &gts[k]) * gamma;
                gs.push(rec.eval(&next, k + 1)?);
                let xt = proj(&next - &gts[k] * gamma)?;
                gts.push(rec.eval(&xt, k + 1)?);
                xts.push(xt);
                xs.push(next);
            }
        }
        MethodId::EAG => {
            for k in 0..n {
                let beta = cfg.anchor.beta(k);
                let anchored = &xs[k] + (&xs[0] - &xs[k]) * beta;
                let xt = &anchored - &gs[k] * gamma;
                let gt = rec.eval(&xt, k)?;
                let next = &anchored - &gt * gamma;
                xts.push(xt);
                gts.push(gt);
                gs.push(rec.eval(&next, k + 1)?);
                xs.push(next);
            }
        }
    }

    Ok(Trajectory {
        method,
        gamma,
        xs,
        xts,
        gs,
        gts,
        gt_minus1: zero,
    })
}

/// Reinterprets an unconstrained PEG run as an OG run on the `x̃` sequence.
pub fn og_from_peg(traj: &Trajectory) -> Result<Trajectory> {
    if traj.method != MethodId::PEG {
        return Err(Error::WrongSetting(format!(
            "expected an unconstrained PEG trajectory, got {}",
            traj.method
        )));
    }
    let mut og = traj.clone();
    og.method = MethodId::OG;
    Ok(og)
}

/// Largest per-step residual of `x̃^{k+1} = x̃^k − 2γF(x̃^k) + γF(x̃^{k-1})`.
pub fn og_recursion_residual(traj: &Trajectory) -> f64 {
    let g = traj.gamma;
    (0..traj.xts.len().saturating_sub(1))
        .map(|k| {
            let pred = &traj.xts[k] - traj.gt(k as isize) * (2.0 * g)
                + traj.gt(k as isize - 1) * g;
            (&traj.xts[k + 1] - pred).amax()
        })
        .fold(0.0, f64::max)
}

/// Solution of an affine VI.
///
/// Unconstrained: solves `A x = −b`. Constrained: runs extragradient with
/// `γ = 1/(2L)` until the natural residual `||x − proj(x − F(x))||` falls
/// below `1e-12·(1 + ||x||)`, then certifies it is at most `1e-10`.
pub fn affine_solution(op: &OperatorSpec, set: &FeasibleSet) -> Result<Vector> {
    let (a, b) = op
        .affine_parts()
        .ok_or_else(|| Error::WrongSetting("affine operator required".into()))?;
    let d = op.dim();
    if set.is_unconstrained() {
        let x = solve_linear(&a, &(-&b))?;
        let res = (&a * &x + &b).norm();
        if res > 1e-10 * (1.0 + x.norm()) {
            return Err(Error::SolutionNotFound(format!(
                "linear system residual {res:e}"
            )));
        }
        return Ok(x);
    }
    let l = op.lipschitz().unwrap_or(1.0).max(1e-12);
    let gamma = 0.5 / l;
    let mut x = set.project(&Vector::zeros(d))?;
    let natural = |x: &Vector| -> Result<f64> {
        let fx = &a * x + &b;
        Ok((x - set.project(&(x - fx))?).norm())
    };
    const MAX_ITERS: usize = 2_000_000;
    for it in 0..MAX_ITERS {
        let fx = &a * &x + &b;
        let xt = set.project(&(&x - &fx * gamma))?;
        let ft = &a * &xt + &b;
        x = set.project(&(&x - &ft * gamma))?;
        if it % 64 == 0 && natural(&x)? <= 1e-12 * (1.0 + x.norm()) {
            break;
        }
    }
    let r = natural(&x)?;
    if r > 1e-10 {
        return Err(Error::SolutionNotFound(format!(
            "VI natural residual {r:e} after {MAX_ITERS} extragradient steps"
        )));
    }
    Ok(x)
}

/// Natural residual `||x − proj(x − F(x))||` of the VI at `x`.
pub fn vi_residual(op: &OperatorSpec, set: &FeasibleSet, x: &Vector) -> Result<f64> {
    let fx = op.evaluate(x)?;
    Ok((x - set.project(&(x - fx))?).norm())
}

fn solve_linear(a: &Matrix, rhs: &Vector) -> Result<Vector> {
    if let Some(x) = a.clone().lu().solve(rhs) {
        if all_finite(&x) {
            return Ok(x);
        }
    }
    // singular but possibly consistent: least-squares solution
    let svd = a.clone().svd(true, true);
    svd.solve(rhs, 1e-12)
        .map_err(|e| Error::SolutionNotFound(e.to_string()))
}

/// Outcome of the deep-linear anchoring experiment.
#[derive(Debug, Clone)]
pub struct EagDemo {
    pub eag: Trajectory,
    pub peg: Trajectory,
    pub eg: Trajectory,
    pub w0: Vector,
}

/// One row of the demo summary.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DemoSummary {
    pub method: MethodId,
    pub initial_dist_stationary: f64,
    pub final_dist_stationary: f64,
    pub final_dist_manifold: f64,
}

impl EagDemo {
    pub fn summaries(&self) -> Vec<DemoSummary> {
        [&self.eag, &self.peg, &self.eg]
            .into_iter()
            .map(|t| DemoSummary {
                method: t.method,
                initial_dist_stationary: t.xs[0].norm(),
                final_dist_stationary: t.xs.last().expect("nonempty").norm(),
                final_dist_manifold: dist_to_product_manifold(t.xs.last().expect("nonempty"), 1.0),
            })
            .collect()
    }
}

/// Runs EAG (β_k = 1/(k+2)), PEG and EG on the deep-linear toy with
/// `x = y = 1`, from `w0 = init_offset·(1, 1, 1)`.
pub fn run_eag_demo(init_offset: f64, gamma: f64, iterations: usize) -> Result<EagDemo> {
    let op = OperatorSpec::deep_linear_toy(1.0, 1.0);
    let w0 = Vector::from_element(3, init_offset);
    let set = FeasibleSet::Unconstrained;
    let go = |m| run(&op, &set, &RunConfig::new(m, gamma, iterations, w0.clone()));
    Ok(EagDemo {
        eag: go(MethodId::EAG)?,
        peg: go(MethodId::PEG)?,
        eg: go(MethodId::EG)?,
        w0,
    })
}

/// Distance from `w ∈ R³` to `{v : v₁v₂v₃ = c}` (`c ≠ 0`).
///
/// Stationarity of the projection gives `v_i(v_i − w_i) = μ c` for a common
/// multiplier `μ`; each coordinate is a root of that quadratic, and the
/// scalar `μ` is found by bisection on the product constraint.
pub fn dist_to_product_manifold(w: &Vector, c: f64) -> f64 {
    assert!(c != 0.0, "manifold requires a nonzero product");
    let mut best = f64::INFINITY;
    // try every sign pattern with product sign equal to sign(c)
    for mask in 0..8u32 {
        let signs: Vec<f64> = (0..3).map(|i| if mask >> i & 1 == 1 { -1.0 } else { 1.0 }).collect();
        if signs.iter().product::<f64>() * c < 0.0 {
            continue;
        }
        // work in the orthant via u_i = s_i v_i > 0, target u₁u₂u₃ = |c|
        let wi: Vec<f64> = (0..3).map(|i| signs[i] * w[i]).collect();
        let target = c.abs();
        // u_i(t) = (wi + sqrt(wi² + 4t))/2 for t > -min(wi²/4 where wi>0)
        let lo_t = wi
            .iter()
            .map(|&x| if x > 0.0 { -x * x / 4.0 } else { 0.0 })
            .fold(f64::NEG_INFINITY, f64::max);
        let u = |t: f64| -> [f64; 3] {
            let mut out = [0.0; 3];
            for i in 0..3 {
                let disc = (wi[i] * wi[i] + 4.0 * t).max(0.0);
                out[i] = 0.5 * (wi[i] + disc.sqrt());
            }
            out
        };
        let prod = |t: f64| u(t).iter().product::<f64>();
        let mut lo = lo_t;
        let mut hi = lo_t.abs().max(1.0);
        while prod(hi) < target {
            hi *= 2.0;
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if prod(mid) < target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let uu = u(hi);
        let d2: f64 = (0..3).map(|i| (uu[i] - wi[i]).powi(2)).sum();
        best = best.min(d2.sqrt());
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::random_monotone;
    use approx::assert_relative_eq;

    fn identity_1d() -> OperatorSpec {
        OperatorSpec::affine(Matrix::identity(1, 1), Vector::zeros(1)).unwrap()
    }

    #[test]
    fn peg_hand_values() {
        let cfg = RunConfig::new(MethodId::PEG, 0.1, 2, Vector::from_element(1, 1.0));
        let t = run(&identity_1d(), &FeasibleSet::Unconstrained, &cfg).unwrap();
        assert_relative_eq!(t.xs[1][0], 0.9, epsilon = 1e-15);
        assert_relative_eq!(t.xts[1][0], 0.8, epsilon = 1e-15);
        assert_relative_eq!(t.xs[2][0], 0.82, epsilon = 1e-15);
        assert_eq!(t.xts[0], t.xs[0]);
        assert_eq!(t.gt(-1), &Vector::zeros(1));
    }

    #[test]
    fn zero_operator_fixes_every_method() {
        let op = OperatorSpec::zero(2).unwrap();
        let x0 = Vector::from_row_slice(&[0.3, -0.4]);
        for m in MethodId::ALL {
            let t = run(&op, &FeasibleSet::Unconstrained, &RunConfig::new(m, 0.5, 5, x0.clone()))
                .unwrap();
            assert!(t.xs.iter().all(|x| *x == x0), "{m}");
        }
    }

    #[test]
    fn proj_peg_matches_peg_when_unconstrained() {
        for seed in 0..100 {
            let op = random_monotone(seed, 4, 1.0, 0.5).unwrap();
            let x0 = Vector::from_fn(4, |i, _| (i as f64 + seed as f64).sin());
            let a = run(&op, &FeasibleSet::Unconstrained, &RunConfig::new(MethodId::PEG, 0.3, 20, x0.clone())).unwrap();
            let b = run(&op, &FeasibleSet::Unconstrained, &RunConfig::new(MethodId::ProjPEG, 0.3, 20, x0)).unwrap();
            for (p, q) in a.xs.iter().zip(&b.xs) {
                assert!((p - q).amax() <= 1e-12);
            }
        }
    }

    #[test]
    fn og_extraction_hand_check() {
        let cfg = RunConfig::new(MethodId::PEG, 0.1, 2, Vector::from_element(1, 1.0));
        let t = run(&identity_1d(), &FeasibleSet::Unconstrained, &cfg).unwrap();
        let og = og_from_peg(&t).unwrap();
        let g = 0.1;
        let lhs = og.xts[2][0];
        let rhs = og.xts[1][0] - 2.0 * g * og.gts[1][0] + g * og.gts[0][0];
        assert!((lhs - rhs).abs() <= 1e-14);
        assert!(og_recursion_residual(&og) <= 1e-14);
    }

    #[test]
    fn og_run_reproduces_peg_extrapolations() {
        let op = random_monotone(11, 5, 2.0, 0.8).unwrap();
        let x0 = Vector::from_element(5, 1.0);
        let peg = run(&op, &FeasibleSet::Unconstrained, &RunConfig::new(MethodId::PEG, 0.15, 30, x0.clone())).unwrap();
        let og = run(&op, &FeasibleSet::Unconstrained, &RunConfig::new(MethodId::OG, 0.15, 30, x0)).unwrap();
        for (a, b) in peg.xts.iter().zip(&og.xts) {
            assert!((a - b).amax() <= 1e-12);
        }
        assert!(og_from_peg(&og).is_err());
    }

    #[test]
    fn eag_with_tiny_gamma_stays_at_anchor() {
        let op = OperatorSpec::zero(3).unwrap();
        let x0 = Vector::from_element(3, 0.2);
        let t = run(&op, &FeasibleSet::Unconstrained, &RunConfig::new(MethodId::EAG, 1e-300, 4, x0.clone())).unwrap();
        assert!(t.xs.iter().all(|x| *x == x0));
    }

    #[test]
    fn invalid_configs() {
        let op = identity_1d();
        let x0 = Vector::from_element(1, 1.0);
        let bad = RunConfig::new(MethodId::PEG, 0.0, 3, x0.clone());
        assert!(matches!(run(&op, &FeasibleSet::Unconstrained, &bad), Err(Error::InvalidInput(_))));
        let eag = RunConfig::new(MethodId::EAG, 0.1, 3, x0.clone()).with_anchor(AnchorSchedule::Constant(1.0));
        assert!(run(&op, &FeasibleSet::Unconstrained, &eag).is_err());
        let ball = FeasibleSet::new_ball(Vector::zeros(1), 0.5).unwrap();
        let outside = RunConfig::new(MethodId::ProjPEG, 0.1, 3, x0.clone());
        assert!(run(&op, &ball, &outside).is_err());
        let plain = RunConfig::new(MethodId::PEG, 0.1, 3, Vector::zeros(1));
        assert!(matches!(run(&op, &ball, &plain), Err(Error::WrongSetting(_))));
    }

    #[test]
    fn divergence_reports_index() {
        // gradient method on a rotation with a huge step blows up
        let op = OperatorSpec::scaled_rotation(1.0, 2).unwrap();
        let cfg = RunConfig::new(MethodId::Gradient, 1e30, 50, Vector::from_row_slice(&[1.0, 0.0]));
        match run(&op, &FeasibleSet::Unconstrained, &cfg) {
            Err(Error::Divergence { index, .. }) => assert!(index > 0 && index < 50),
            other => panic!("expected divergence, got {other:?}"),
        }
    }

    #[test]
    fn runs_are_deterministic() {
        let op = random_monotone(5, 6, 1.0, 0.4).unwrap();
        let ball = FeasibleSet::new_ball(Vector::zeros(6), 1.0).unwrap();
        let cfg = RunConfig::new(MethodId::ProjPEG, 0.25, 40, Vector::zeros(6));
        assert_eq!(run(&op, &ball, &cfg).unwrap(), run(&op, &ball, &cfg).unwrap());
    }

    #[test]
    fn affine_solution_unconstrained_and_constrained() {
        let op = random_monotone(3, 4, 1.0, 0.3).unwrap();
        let xs = affine_solution(&op, &FeasibleSet::Unconstrained).unwrap();
        assert!(op.evaluate(&xs).unwrap().norm() <= 1e-10);

        let ball = FeasibleSet::new_ball(Vector::zeros(4), 0.1).unwrap();
        let xc = affine_solution(&op, &ball).unwrap();
        assert!(vi_residual(&op, &ball, &xc).unwrap() <= 1e-10);
        // VI condition sampled at feasible points
        let f = op.evaluate(&xc).unwrap();
        for i in 0..4 {
            let mut y = Vector::zeros(4);
            y[i] = 0.1;
            for s in [1.0, -1.0] {
                assert!(f.dot(&(&y * s - &xc)) >= -1e-9);
            }
        }
    }

    #[test]
    fn manifold_distance() {
        // points on the manifold have zero distance
        let on = Vector::from_row_slice(&[2.0, 0.5, 1.0]);
        assert!(dist_to_product_manifold(&on, 1.0) < 1e-10);
        let at_origin = dist_to_product_manifold(&Vector::zeros(3), 1.0);
        assert_relative_eq!(at_origin, 3f64.sqrt(), max_relative = 1e-9);
    }

    #[test]
    fn csv_has_expected_shape() {
        let cfg = RunConfig::new(MethodId::PEG, 0.1, 2, Vector::from_element(1, 1.0));
        let t = run(&identity_1d(), &FeasibleSet::Unconstrained, &cfg).unwrap();
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        let s = String::from_utf8(buf).unwrap();
        let lines: Vec<_> = s.lines().collect();
        assert_eq!(lines[0], "k,x0,xt0,norm_f_sq,residual_sq");
        assert_eq!(lines.len(), 4);
    }
}
