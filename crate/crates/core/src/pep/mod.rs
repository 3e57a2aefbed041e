//! Sampled performance-estimation problems compiled to Gram-matrix SDPs.
//!
//! Every iterate is a linear combination of basis symbols: the solution
//! `x*`, the starting point, operator values, and (for projected methods)
//! the outputs of each projection. Interpolation, projection and optimality
//! conditions then become linear constraints on the Gram matrix.

mod reconstruct;

use std::collections::HashSet;
use std::fmt;

use crate::error::{Error, Result};
use crate::linalg::{Matrix, Vector};
use crate::methods::{MethodId, Trajectory};
pub use crate::sdp::problem::{
    BasisSymbol, Constraint, ConstraintTag, InterpKind, SampleExpr, SdpProblem, Sense, SymSparse,
};

pub use reconstruct::{factor_gram, reconstruct_instance, ReconstructedInstance};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SampleLabel {
    Star,
    X(usize),
    Xt(usize),
}

impl SampleLabel {
    /// Iteration index used by the distance filter; `None` for `Star`.
    pub fn index(self) -> Option<usize> {
        match self {
            SampleLabel::Star => None,
            SampleLabel::X(k) | SampleLabel::Xt(k) => Some(k),
        }
    }
}

impl fmt::Display for SampleLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SampleLabel::Star => f.write_str("x*"),
            SampleLabel::X(k) => write!(f, "x^{k}"),
            SampleLabel::Xt(k) => write!(f, "xt^{k}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InterpolationClass {
    MonotoneLipschitz(f64),
    Cocoercive(f64),
}

impl InterpolationClass {
    pub fn lipschitz(self) -> f64 {
        match self {
            InterpolationClass::MonotoneLipschitz(l) | InterpolationClass::Cocoercive(l) => l,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            InterpolationClass::MonotoneLipschitz(_) => "monotone-lipschitz",
            InterpolationClass::Cocoercive(_) => "cocoercive",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PepObjective {
    /// `||g^N||²` (PEG) or `||g̃^N||²` (OG form).
    LastNormSq,
    /// `||g^{N+1}||² − ||g^N||²` with `x^{N+1} = x^N − γg̃^N`.
    DeltaNormSq,
    /// `||g̃^N||² − ||g̃^{N−1}||²`.
    DeltaNormSqTilde,
    /// `||x^N − x^{N−1}||²` (Proj-PEG) or `||x̃^N − x̃^{N−1}||²` (Proj-OG).
    LastResidualSq,
}

impl PepObjective {
    pub fn name(self) -> &'static str {
        match self {
            PepObjective::LastNormSq => "last-norm-sq",
            PepObjective::DeltaNormSq => "delta",
            PepObjective::DeltaNormSqTilde => "delta-tilde",
            PepObjective::LastResidualSq => "last-residual-sq",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PepSpec {
    pub method: MethodId,
    pub gamma: f64,
    pub n: usize,
    pub objective: PepObjective,
    pub class: InterpolationClass,
    pub distance_t: Option<usize>,
}

impl PepSpec {
    pub fn new(method: MethodId, gamma: f64, l: f64, n: usize) -> Self {
        let objective = match method {
            MethodId::ProjPEG | MethodId::ProjOG => PepObjective::LastResidualSq,
            _ => PepObjective::LastNormSq,
        };
        Self {
            method,
            gamma,
            n,
            objective,
            class: InterpolationClass::MonotoneLipschitz(l),
            distance_t: None,
        }
    }

    pub fn with_objective(mut self, objective: PepObjective) -> Self {
        self.objective = objective;
        self
    }

    pub fn with_class(mut self, class: InterpolationClass) -> Self {
        self.class = class;
        self
    }

    pub fn with_distance(mut self, t: usize) -> Self {
        self.distance_t = Some(t);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::InvalidInput("PEP needs N ≥ 1".into()));
        }
        if !(self.gamma > 0.0 && self.gamma.is_finite()) {
            return Err(Error::InvalidInput(format!("gamma must be positive, got {}", self.gamma)));
        }
        let l = self.class.lipschitz();
        if !(l > 0.0 && l.is_finite()) {
            return Err(Error::InvalidInput(format!("L must be positive, got {l}")));
        }
        if self.distance_t == Some(0) {
            return Err(Error::InvalidInput("distance t must be at least 1".into()));
        }
        use PepObjective::*;
        let ok = match self.method {
            MethodId::PEG => matches!(self.objective, LastNormSq | DeltaNormSq | DeltaNormSqTilde),
            MethodId::OG => matches!(self.objective, LastNormSq | DeltaNormSqTilde),
            MethodId::ProjPEG | MethodId::ProjOG => self.objective == LastResidualSq,
            _ => {
                return Err(Error::WrongSetting(format!(
                    "no PEP encoding for {}",
                    self.method
                )))
            }
        };
        if !ok {
            return Err(Error::WrongSetting(format!(
                "objective {} is not available for {}",
                self.objective.name(),
                self.method
            )));
        }
        Ok(())
    }
}

/// Symbol allocation and linear bookkeeping during construction.
struct Builder {
    basis: Vec<BasisSymbol>,
    samples: Vec<(SampleLabel, Vec<f64>, Vec<f64>, Option<Vec<f64>>)>,
}

impl Builder {
    fn new() -> Self {
        Self {
            basis: Vec::new(),
            samples: Vec::new(),
        }
    }

    fn symbol(&mut self, s: BasisSymbol) -> Vec<f64> {
        self.basis.push(s);
        let mut v = vec![0.0; self.basis.len()];
        v[self.basis.len() - 1] = 1.0;
        v
    }

    fn sample(&mut self, label: SampleLabel, point: Vec<f64>, value: Vec<f64>, pre: Option<Vec<f64>>) {
        self.samples.push((label, point, value, pre));
    }

    fn finish(self) -> (Vec<BasisSymbol>, Vec<SampleExpr>) {
        let m = self.basis.len();
        let pad = |v: &[f64]| {
            let mut out = Vector::zeros(m);
            out.rows_mut(0, v.len()).copy_from_slice(v);
            out
        };
        let samples = self
            .samples
            .iter()
            .map(|(label, p, g, pre)| SampleExpr {
                label: *label,
                point: pad(p),
                value: pad(g),
                preimage: pre.as_deref().map(pad),
            })
            .collect();
        (self.basis, samples)
    }
}

/// `a + c·b` on coefficient lists of possibly different length.
fn axpy(a: &[f64], c: f64, b: &[f64]) -> Vec<f64> {
    let n = a.len().max(b.len());
    (0..n)
        .map(|i| a.get(i).copied().unwrap_or(0.0) + c * b.get(i).copied().unwrap_or(0.0))
        .collect()
}

fn zero() -> Vec<f64> {
    Vec::new()
}

/// Compiles a PEP specification into an SDP.
pub fn build_pep(spec: &PepSpec) -> Result<SdpProblem> {
    spec.validate()?;
    let gamma = spec.gamma;
    let n = spec.n;
    let mut b = Builder::new();
    let constrained = matches!(spec.method, MethodId::ProjPEG | MethodId::ProjOG);

    let x_star = b.symbol(BasisSymbol::Point(SampleLabel::Star));
    let g_star = if constrained {
        b.symbol(BasisSymbol::Value(SampleLabel::Star))
    } else {
        zero()
    };
    b.sample(SampleLabel::Star, x_star.clone(), g_star, None);

    let objective_terms: Vec<(f64, Vec<f64>)>;
    let x0: Vec<f64>;

    match spec.method {
        MethodId::PEG => {
            x0 = b.symbol(BasisSymbol::Point(SampleLabel::X(0)));
            let g0 = b.symbol(BasisSymbol::Value(SampleLabel::X(0)));
            b.sample(SampleLabel::X(0), x0.clone(), g0.clone(), None);
            let mut x = x0.clone();
            let mut gt_prev = g0.clone();
            let mut gs = vec![g0];
            let mut gts = vec![gs[0].clone()];
            for k in 1..=n {
                x = axpy(&x, -gamma, &gt_prev);
                let xt = axpy(&x, -gamma, &gt_prev);
                let gt = b.symbol(BasisSymbol::Value(SampleLabel::Xt(k)));
                let g = b.symbol(BasisSymbol::Value(SampleLabel::X(k)));
                b.sample(SampleLabel::Xt(k), xt, gt.clone(), None);
                b.sample(SampleLabel::X(k), x.clone(), g.clone(), None);
                gt_prev = gt.clone();
                gts.push(gt);
                gs.push(g);
            }
            objective_terms = match spec.objective {
                PepObjective::LastNormSq => vec![(1.0, gs[n].clone())],
                PepObjective::DeltaNormSq => {
                    let x_next = axpy(&x, -gamma, &gts[n]);
                    let g_next = b.symbol(BasisSymbol::Value(SampleLabel::X(n + 1)));
                    b.sample(SampleLabel::X(n + 1), x_next, g_next.clone(), None);
                    vec![(1.0, g_next), (-1.0, gs[n].clone())]
                }
                PepObjective::DeltaNormSqTilde => {
                    vec![(1.0, gts[n].clone()), (-1.0, gts[n - 1].clone())]
                }
                PepObjective::LastResidualSq => unreachable!("validated"),
            };
        }
        MethodId::OG => {
            x0 = b.symbol(BasisSymbol::Point(SampleLabel::Xt(0)));
            let g0 = b.symbol(BasisSymbol::Value(SampleLabel::Xt(0)));
            b.sample(SampleLabel::Xt(0), x0.clone(), g0.clone(), None);
            let mut xts = vec![x0.clone()];
            let mut gts = vec![g0];
            for k in 1..=n {
                let xt = if k == 1 {
                    axpy(&xts[0], -gamma, &gts[0])
                } else {
                    axpy(&axpy(&xts[k - 1], -2.0 * gamma, &gts[k - 1]), gamma, &gts[k - 2])
                };
                let gt = b.symbol(BasisSymbol::Value(SampleLabel::Xt(k)));
                b.sample(SampleLabel::Xt(k), xt.clone(), gt.clone(), None);
                xts.push(xt);
                gts.push(gt);
            }
            objective_terms = match spec.objective {
                PepObjective::LastNormSq => vec![(1.0, gts[n].clone())],
                PepObjective::DeltaNormSqTilde => {
                    vec![(1.0, gts[n].clone()), (-1.0, gts[n - 1].clone())]
                }
                _ => unreachable!("validated"),
            };
        }
        MethodId::ProjPEG => {
            x0 = b.symbol(BasisSymbol::Point(SampleLabel::X(0)));
            let g0 = b.symbol(BasisSymbol::Value(SampleLabel::X(0)));
            b.sample(SampleLabel::X(0), x0.clone(), g0.clone(), None);
            let mut xs = vec![x0.clone()];
            let mut gt_prev = g0;
            for k in 1..=n {
                let pre = axpy(&xs[k - 1], -gamma, &gt_prev);
                let x = b.symbol(BasisSymbol::Point(SampleLabel::X(k)));
                let g = b.symbol(BasisSymbol::Value(SampleLabel::X(k)));
                b.sample(SampleLabel::X(k), x.clone(), g, Some(pre));
                if k < n {
                    let pre_t = axpy(&x, -gamma, &gt_prev);
                    let xt = b.symbol(BasisSymbol::Point(SampleLabel::Xt(k)));
                    let gt = b.symbol(BasisSymbol::Value(SampleLabel::Xt(k)));
                    b.sample(SampleLabel::Xt(k), xt, gt.clone(), Some(pre_t));
                    gt_prev = gt;
                }
                xs.push(x);
            }
            objective_terms = vec![(1.0, axpy(&xs[n], -1.0, &xs[n - 1]))];
        }
        MethodId::ProjOG => {
            x0 = b.symbol(BasisSymbol::Point(SampleLabel::Xt(0)));
            let g0 = b.symbol(BasisSymbol::Value(SampleLabel::Xt(0)));
            b.sample(SampleLabel::Xt(0), x0.clone(), g0.clone(), None);
            let mut xts = vec![x0.clone()];
            let mut gts = vec![g0];
            // x^1 = x̃^0 − γ g̃^0, then x^{k+1} = x̃^k + γ(g̃^{k−1} − g̃^k)
            let mut x = axpy(&xts[0], -gamma, &gts[0]);
            for k in 1..=n {
                let pre = axpy(&x, -gamma, &gts[k - 1]);
                let xt = b.symbol(BasisSymbol::Point(SampleLabel::Xt(k)));
                let gt = b.symbol(BasisSymbol::Value(SampleLabel::Xt(k)));
                b.sample(SampleLabel::Xt(k), xt.clone(), gt.clone(), Some(pre));
                x = axpy(&axpy(&xt, gamma, &gts[k - 1]), -gamma, &gt);
                xts.push(xt);
                gts.push(gt);
            }
            objective_terms = vec![(1.0, axpy(&xts[n], -1.0, &xts[n - 1]))];
        }
        _ => unreachable!("validated"),
    }

    let (basis, samples) = b.finish();
    let m = basis.len();
    let pad = |v: &[f64]| {
        let mut out = Vector::zeros(m);
        out.rows_mut(0, v.len()).copy_from_slice(v);
        out
    };

    let mut objective = SymSparse::zeros(m);
    for (c, v) in &objective_terms {
        let v = pad(v);
        objective = objective.add_scaled(&SymSparse::sym_outer(&v, &v), *c);
    }

    let mut rows = Vec::new();
    let l = spec.class.lipschitz();
    for i in 0..samples.len() {
        for j in (i + 1)..samples.len() {
            let (a, c) = (&samples[i], &samples[j]);
            let dx = &a.point - &c.point;
            let dg = &a.value - &c.value;
            let pair = |kind| ConstraintTag::Interp { kind, a: a.label, b: c.label };
            match spec.class {
                InterpolationClass::MonotoneLipschitz(_) => {
                    rows.push(Constraint::le(SymSparse::sym_outer(&dg, &dx).scaled(-1.0), 0.0, pair(InterpKind::Monotone)));
                    let lip = SymSparse::sym_outer(&dg, &dg).add_scaled(&SymSparse::sym_outer(&dx, &dx), -l * l);
                    rows.push(Constraint::le(lip, 0.0, pair(InterpKind::Lipschitz)));
                }
                InterpolationClass::Cocoercive(_) => {
                    let coco = SymSparse::sym_outer(&dg, &dg).add_scaled(&SymSparse::sym_outer(&dg, &dx), -l);
                    rows.push(Constraint::le(coco, 0.0, pair(InterpKind::Cocoercive)));
                }
            }
        }
    }
    if constrained {
        let star = &samples[0];
        for p in samples.iter().filter(|s| s.preimage.is_some()) {
            let z = p.preimage.as_ref().expect("filtered");
            let dz = z - &p.point;
            for y in samples.iter().filter(|y| y.label != p.label) {
                let dy = &y.point - &p.point;
                rows.push(Constraint::le(
                    SymSparse::sym_outer(&dz, &dy),
                    0.0,
                    ConstraintTag::Projection { point: p.label, other: y.label },
                ));
            }
        }
        for y in samples.iter().skip(1) {
            let dy = &y.point - &star.point;
            rows.push(Constraint::le(
                SymSparse::sym_outer(&star.value, &dy).scaled(-1.0),
                0.0,
                ConstraintTag::Optimality { other: y.label },
            ));
        }
    }
    let d0 = pad(&axpy(&x0, -1.0, &x_star));
    rows.push(Constraint::le(SymSparse::sym_outer(&d0, &d0), 1.0, ConstraintTag::Normalization));

    let problem = SdpProblem {
        gram_dim: m,
        objective,
        constraints: dedup_rows(rows),
        basis,
        samples,
    };
    Ok(match spec.distance_t {
        Some(t) => apply_distance_filter(&problem, t),
        None => problem,
    })
}

/// Removes zero rows and exact duplicates, keeping the first occurrence.
fn dedup_rows(rows: Vec<Constraint>) -> Vec<Constraint> {
    let mut seen = HashSet::new();
    rows.into_iter()
        .map(|mut c| {
            c.matrix = c.matrix.pruned(1e-15);
            c
        })
        .filter(|c| !c.matrix.is_zero())
        .filter(|c| {
            let key: Vec<(usize, usize, u64)> = c
                .matrix
                .entries
                .iter()
                .map(|&(i, j, v)| (i, j, v.to_bits()))
                .chain(std::iter::once((usize::MAX, 0, c.rhs.to_bits())))
                .collect();
            seen.insert(key)
        })
        .collect()
}

/// Keeps rows whose sample pair is within iteration distance `t`, plus every
/// row involving `x*` and every row without a pair.
pub fn apply_distance_filter(problem: &SdpProblem, t: usize) -> SdpProblem {
    let keep = |c: &Constraint| match c.tag.pair() {
        None => true,
        Some((a, b)) => match (a.index(), b.index()) {
            (Some(i), Some(j)) => i.abs_diff(j) <= t,
            _ => true,
        },
    };
    SdpProblem {
        constraints: problem.constraints.iter().filter(|c| keep(c)).cloned().collect(),
        ..problem.clone()
    }
}

/// Basis matrix `V` (`d × m`) realized by a concrete run.
///
/// Points and values are read from the trajectory; `x*` and `F(x*)` are
/// supplied by the caller. The PEP objective evaluated at `VᵀV` is then the
/// run's own objective value.
pub fn basis_from_trajectory(
    problem: &SdpProblem,
    traj: &Trajectory,
    x_star: &Vector,
    g_star: &Vector,
) -> Result<Matrix> {
    if problem.basis.is_empty() {
        return Err(Error::WrongSetting("problem carries no basis symbols".into()));
    }
    let d = traj.dim();
    let mut v = Matrix::zeros(d, problem.gram_dim);
    let missing = |s: &BasisSymbol| Error::IndexOutOfRange {
        index: match s {
            BasisSymbol::Point(l) | BasisSymbol::Value(l) => l.index().unwrap_or(0),
        },
        valid: format!("{} trajectory of length {}", traj.method, traj.len()),
    };
    for (col, s) in problem.basis.iter().enumerate() {
        let vec = match s {
            BasisSymbol::Point(SampleLabel::Star) => Some(x_star),
            BasisSymbol::Value(SampleLabel::Star) => Some(g_star),
            BasisSymbol::Point(SampleLabel::X(k)) => traj.xs.get(*k),
            BasisSymbol::Value(SampleLabel::X(k)) => traj.gs.get(*k),
            BasisSymbol::Point(SampleLabel::Xt(k)) => traj.xts.get(*k),
            BasisSymbol::Value(SampleLabel::Xt(k)) => traj.gts.get(*k),
        }
        .ok_or_else(|| missing(s))?;
        if vec.len() != d {
            return Err(Error::DimensionMismatch { expected: d, got: vec.len() });
        }
        v.set_column(col, vec);
    }
    Ok(v)
}

/// Run objective divided by `||x^0 − x*||²`, evaluated through the PEP's
/// objective matrix.
pub fn trajectory_ratio(
    problem: &SdpProblem,
    traj: &Trajectory,
    x_star: &Vector,
    g_star: &Vector,
) -> Result<f64> {
    let v = basis_from_trajectory(problem, traj, x_star, g_star)?;
    let g = v.transpose() * &v;
    let norm = problem
        .normalization_index()
        .map(|i| problem.constraints[i].matrix.dot_dense(&g))
        .ok_or_else(|| Error::WrongSetting("problem has no normalization row".into()))?;
    if norm <= 0.0 {
        return Err(Error::InvalidInput("x^0 coincides with x*".into()));
    }
    Ok(problem.objective_value(&g) / norm)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::methods::{run, RunConfig};
    use crate::operators::{random_monotone, FeasibleSet, OperatorSpec};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn peg(n: usize) -> PepSpec {
        PepSpec::new(MethodId::PEG, 1.0 / 3.0, 1.0, n)
    }

    #[test]
    fn gram_dimension_and_basis() {
        for n in 1..6 {
            let p = build_pep(&peg(n)).unwrap();
            assert_eq!(p.gram_dim, 2 * n + 3);
        }
        let p = build_pep(&peg(2)).unwrap();
        assert_eq!(p.basis_names(), ["x*", "x0", "g0", "gt1", "g1", "gt2", "g2"]);
        let og = build_pep(&PepSpec::new(MethodId::OG, 0.3, 1.0, 3)).unwrap();
        assert_eq!(og.gram_dim, 6);
    }

    #[test]
    fn objective_is_last_norm() {
        let p = build_pep(&peg(3)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let v = Matrix::from_fn(4, p.gram_dim, |_, _| rng.random_range(-1.0..1.0));
        let g = v.transpose() * &v;
        let direct = v.column(p.gram_dim - 1).norm_squared();
        assert!((p.objective_value(&g) - direct).abs() < 1e-12);
    }

    #[test]
    fn distance_one_keeps_consecutive_and_star_pairs() {
        let full = build_pep(&peg(4)).unwrap();
        let p = apply_distance_filter(&full, 1);
        for c in &p.constraints {
            if let Some((a, b)) = c.tag.pair() {
                match (a.index(), b.index()) {
                    (Some(i), Some(j)) => assert!(i.abs_diff(j) <= 1),
                    _ => {}
                }
            }
        }
        let star_rows = |q: &SdpProblem| {
            q.constraints.iter().filter(|c| matches!(c.tag.pair(), Some((SampleLabel::Star, _)))).count()
        };
        assert_eq!(star_rows(&p), star_rows(&full));
        assert!(p.constraints.len() < apply_distance_filter(&full, 2).constraints.len());
        assert_eq!(apply_distance_filter(&full, 4), full);
    }

    #[test]
    fn basis_consistency_on_runs() {
        let op = random_monotone(9, 5, 1.0, 0.6).unwrap();
        let xs = crate::methods::affine_solution(&op, &FeasibleSet::Unconstrained).unwrap();
        let x0 = Vector::from_element(5, 1.0);
        let traj = run(&op, &FeasibleSet::Unconstrained, &RunConfig::new(MethodId::PEG, 1.0 / 3.0, 4, x0)).unwrap();
        let p = build_pep(&peg(4)).unwrap();
        let v = basis_from_trajectory(&p, &traj, &xs, &Vector::zeros(5)).unwrap();
        for s in &p.samples {
            let (pt, val) = (&v * &s.point, &v * &s.value);
            let (want_p, want_g) = match s.label {
                SampleLabel::Star => (xs.clone(), Vector::zeros(5)),
                SampleLabel::X(k) => (traj.xs[k].clone(), traj.gs[k].clone()),
                SampleLabel::Xt(k) => (traj.xts[k].clone(), traj.gts[k].clone()),
            };
            assert!((pt - want_p).amax() < 1e-12, "{}", s.label);
            assert!((val - want_g).amax() < 1e-12);
        }
        // every constraint holds on a genuine monotone 1-Lipschitz instance
        let g = v.transpose() * &v;
        let scale = (&traj.xs[0] - &xs).norm_squared();
        for c in &p.constraints {
            let r = c.matrix.dot_dense(&g) - c.rhs * scale;
            assert!(r <= 1e-10, "{} violated by {r}", c.tag);
        }
    }

    #[test]
    fn constrained_basis_consistency() {
        let op = random_monotone(2, 4, 1.0, 0.5).unwrap();
        let ball = FeasibleSet::new_ball(Vector::zeros(4), 0.3).unwrap();
        let xs = crate::methods::affine_solution(&op, &ball).unwrap();
        let gs = op.evaluate(&xs).unwrap();
        for method in [MethodId::ProjPEG, MethodId::ProjOG] {
            let traj = run(&op, &ball, &RunConfig::new(method, 0.25, 5, Vector::zeros(4))).unwrap();
            let p = build_pep(&PepSpec::new(method, 0.25, 1.0, 5)).unwrap();
            let v = basis_from_trajectory(&p, &traj, &xs, &gs).unwrap();
            let g = v.transpose() * &v;
            let scale = (&traj.xs[0] - &xs).norm_squared();
            for c in &p.constraints {
                let r = c.matrix.dot_dense(&g) - c.rhs * scale;
                assert!(r <= 1e-9, "{method}: {} violated by {r}", c.tag);
            }
            let obj = p.objective_value(&g);
            let want = match method {
                MethodId::ProjPEG => (&traj.xs[5] - &traj.xs[4]).norm_squared(),
                _ => (&traj.xts[5] - &traj.xts[4]).norm_squared(),
            };
            assert!((obj - want).abs() < 1e-12);
        }
    }

    #[test]
    fn invalid_specs() {
        assert!(build_pep(&PepSpec::new(MethodId::EG, 0.1, 1.0, 2)).is_err());
        assert!(build_pep(&peg(0)).is_err());
        assert!(build_pep(&peg(2).with_objective(PepObjective::LastResidualSq)).is_err());
        assert!(build_pep(&peg(2).with_distance(0)).is_err());
    }

    #[test]
    fn no_zero_or_duplicate_rows() {
        let p = build_pep(&peg(3).with_class(InterpolationClass::Cocoercive(1.0))).unwrap();
        assert!(p.constraints.iter().all(|c| !c.matrix.is_zero()));
        let zero = OperatorSpec::zero(1).unwrap();
        let _ = zero;
    }
}
