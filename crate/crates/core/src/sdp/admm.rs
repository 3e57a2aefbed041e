//! Operator-splitting solver for `maximize Tr(M₀G)` subject to linear
//! constraints on `G` and `G ⪰ 0`.
//!
//! Works in `svec` coordinates with the conic form
//! `min qᵀx  s.t.  Ax + s = b,  s ∈ K`, `A = [A_lin; −I]`,
//! `K = R₊^{ineq} × {0}^{eq} × S₊`. Each iteration solves one linear system
//! with a cached inverse of the (fixed) system matrix and projects onto `K`.

use nalgebra::SymmetricEigen;

use crate::error::{Error, Result};
use crate::linalg::{Matrix, Vector};

use super::dense::{spd_inverse, PackedSym};
use super::problem::{smat, svec, svec_len, svec_sparse, SdpProblem, Sense};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    Solved,
    MaxIter,
    Unbounded,
    Infeasible,
}

impl SolveStatus {
    pub fn name(self) -> &'static str {
        match self {
            SolveStatus::Solved => "solved",
            SolveStatus::MaxIter => "max-iter",
            SolveStatus::Unbounded => "unbounded",
            SolveStatus::Infeasible => "infeasible",
        }
    }
}

impl std::fmt::Display for SolveStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverSettings {
    /// Relative tolerance on primal residual, dual residual and duality gap.
    pub tol: f64,
    pub max_iter: usize,
    /// Over-relaxation parameter in `(0, 2)`.
    pub alpha: f64,
    pub sigma: f64,
    pub rho: f64,
    pub adaptive_rho: bool,
    /// Iterations between residual checks.
    pub check_every: usize,
    pub infeasibility_tol: f64,
    /// Anderson acceleration of the iteration.
    pub anderson: bool,
}

impl Default for SolverSettings {
    fn default() -> Self {
        Self {
            tol: 1e-7,
            max_iter: 200_000,
            alpha: 1.5,
            sigma: 1e-6,
            rho: 0.1,
            adaptive_rho: true,
            check_every: 10,
            infeasibility_tol: 1e-6,
            anderson: true,
        }
    }
}

impl SolverSettings {
    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn with_max_iter(mut self, max_iter: usize) -> Self {
        self.max_iter = max_iter;
        self
    }

    fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(Error::InvalidInput(format!("tolerance must be positive, got {}", self.tol)));
        }
        if !(self.alpha > 0.0 && self.alpha < 2.0) {
            return Err(Error::InvalidInput(format!("relaxation must lie in (0, 2), got {}", self.alpha)));
        }
        if self.max_iter == 0 || self.check_every == 0 {
            return Err(Error::InvalidInput("iteration counts must be positive".into()));
        }
        if !(self.sigma > 0.0 && self.rho > 0.0) {
            return Err(Error::InvalidInput("sigma and rho must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct SdpSolution {
    /// Primal Gram matrix, PSD by construction.
    pub g: Matrix,
    /// One multiplier per constraint, in the problem's own row scaling.
    /// Nonnegative for inequalities.
    pub duals: Vec<f64>,
    /// Dual slack `Σλᵢ Mᵢ − M₀` as produced by the iteration (PSD up to
    /// rounding).
    pub dual_slack: Matrix,
    /// `Tr(M₀ G)`.
    pub objective: f64,
    /// `Σλᵢ bᵢ`.
    pub dual_objective: f64,
    pub primal_residual: f64,
    pub dual_residual: f64,
    pub iterations: usize,
    pub status: SolveStatus,
}

/// Sparse rows of the linear block in svec coordinates (CSR layout).
struct LinearBlock {
    ptr: Vec<usize>,
    idx: Vec<u32>,
    val: Vec<f64>,
    b: Vector,
    eq: Vec<bool>,
    /// Scale applied to each original row.
    row_scale: Vec<f64>,
}

impl LinearBlock {
    fn new(problem: &SdpProblem) -> Self {
        let rows = problem.constraints.len();
        let mut ptr = Vec::with_capacity(rows + 1);
        let mut idx = Vec::new();
        let mut val = Vec::new();
        let mut b = Vector::zeros(rows);
        let mut eq = Vec::with_capacity(rows);
        let mut row_scale = Vec::with_capacity(rows);
        ptr.push(0);
        for (i, c) in problem.constraints.iter().enumerate() {
            let mut row = svec_sparse(&c.matrix);
            row.sort_by_key(|e| e.0);
            let norm = row.iter().map(|e| e.1 * e.1).sum::<f64>().sqrt();
            let scale = if norm > 0.0 { 1.0 / norm } else { 1.0 };
            for (j, v) in row {
                idx.push(j as u32);
                val.push(v * scale);
            }
            ptr.push(idx.len());
            b[i] = c.rhs * scale;
            eq.push(c.sense == Sense::Eq);
            row_scale.push(scale);
        }
        Self { ptr, idx, val, b, eq, row_scale }
    }

    fn rows(&self) -> usize {
        self.eq.len()
    }

    fn row(&self, i: usize) -> (&[u32], &[f64]) {
        let (a, b) = (self.ptr[i], self.ptr[i + 1]);
        (&self.idx[a..b], &self.val[a..b])
    }

    fn mul(&self, x: &[f64]) -> Vector {
        Vector::from_fn(self.rows(), |i, _| {
            let (idx, val) = self.row(i);
            idx.iter().zip(val).map(|(&j, &v)| v * x[j as usize]).sum::<f64>()
        })
    }

    fn mul_t(&self, y: &Vector, n: usize) -> Vector {
        let mut out = Vector::zeros(n);
        let o = out.as_mut_slice();
        for i in 0..self.rows() {
            let yi = y[i];
            if yi != 0.0 {
                let (idx, val) = self.row(i);
                for (&j, &v) in idx.iter().zip(val) {
                    o[j as usize] += v * yi;
                }
            }
        }
        out
    }

    /// `A_linᵀ D A_lin` with weight `eq_weight` on equality rows.
    fn gram(&self, n: usize, eq_weight: f64) -> Matrix {
        let mut g = Matrix::zeros(n, n);
        for r in 0..self.rows() {
            let w = if self.eq[r] { eq_weight } else { 1.0 };
            let (idx, val) = self.row(r);
            for (&j, &vj) in idx.iter().zip(val) {
                let wj = w * vj;
                let mut col = g.column_mut(j as usize);
                for (&i, &vi) in idx.iter().zip(val) {
                    if i > j {
                        break;
                    }
                    col[i as usize] += wj * vi;
                }
            }
        }
        g.fill_lower_triangle_with_upper_triangle();
        g
    }
}

/// Projects `v` (svec of a symmetric `m×m` matrix) onto the PSD cone.
fn project_psd(v: &Vector, m: usize) -> Vector {
    let eig = SymmetricEigen::new(smat(v, m));
    if eig.eigenvalues.iter().all(|&l| l >= 0.0) {
        return v.clone();
    }
    let clipped = eig.eigenvalues.map(|l| l.max(0.0));
    let p = &eig.eigenvectors * Matrix::from_diagonal(&clipped) * eig.eigenvectors.transpose();
    svec(&p)
}

fn inf_norm(v: &Vector) -> f64 {
    v.amax()
}

const EQ_WEIGHT: f64 = 1e3;
const RHO_MIN: f64 = 1e-6;
const RHO_MAX: f64 = 1e6;
/// Minimum change factor that justifies a refactorization.
const RHO_SWITCH: f64 = 2.0;

struct Factor {
    rho: f64,
    inv: PackedSym,
}

impl Factor {
    fn solve(&self, rhs: &Vector) -> Vector {
        let mut out = Vector::zeros(rhs.len());
        self.inv.mul_into(rhs.as_slice(), out.as_mut_slice());
        out
    }
}

fn factor(ata: &Matrix, sigma: f64, rho: f64) -> Result<Factor> {
    let n = ata.nrows();
    let mut k = ata * rho;
    for i in 0..n {
        k[(i, i)] += sigma + rho;
    }
    let inv = spd_inverse(&k).ok_or_else(|| Error::InvalidInput("system matrix is not positive definite".into()))?;
    Ok(Factor {
        rho,
        inv: PackedSym::from_dense(&inv),
    })
}

/// Snapshot kept for `MaxIter` returns.
struct Best {
    score: f64,
    s_psd: Vector,
    y: Vector,
    r_p: f64,
    r_d: f64,
}

/// Iterate `(x, s, y)` packed into one vector.
struct Layout {
    n: usize,
    p: usize,
}

impl Layout {
    fn len(&self) -> usize {
        self.n + 2 * (self.p + self.n)
    }
    fn x<'a>(&self, z: &'a Vector) -> nalgebra::DVectorView<'a, f64> {
        z.rows(0, self.n)
    }
    fn s<'a>(&self, z: &'a Vector) -> nalgebra::DVectorView<'a, f64> {
        z.rows(self.n, self.p + self.n)
    }
    fn y<'a>(&self, z: &'a Vector) -> nalgebra::DVectorView<'a, f64> {
        z.rows(self.n + self.p + self.n, self.p + self.n)
    }
}

struct Admm<'a> {
    lin: &'a LinearBlock,
    q: &'a Vector,
    m: usize,
    layout: Layout,
    sigma: f64,
    alpha: f64,
}

impl Admm<'_> {
    fn row_w(&self, i: usize) -> f64 {
        if self.lin.eq[i] {
            EQ_WEIGHT
        } else {
            1.0
        }
    }

    /// One relaxed ADMM iteration.
    fn step(&self, z: &Vector, fac: &Factor) -> Vector {
        let (n, p) = (self.layout.n, self.layout.p);
        let (x, s, y) = (self.layout.x(z), self.layout.s(z), self.layout.y(z));
        let rho = fac.rho;
        let alpha = self.alpha;
        let lin = self.lin;
        // rhs = σx − q + Aᵀ(R(b − s) + y), with the PSD block A = −I, b = 0
        let w_lin = Vector::from_fn(p, |i, _| rho * self.row_w(i) * (lin.b[i] - s[i]) + y[i]);
        let mut rhs = x * self.sigma - self.q + lin.mul_t(&w_lin, n);
        for j in 0..n {
            rhs[j] += rho * s[p + j] - y[p + j];
        }
        let xt = fac.solve(&rhs);
        let ax_lin = lin.mul(xt.as_slice());

        let mut out = Vector::zeros(self.layout.len());
        out.rows_mut(0, n).copy_from(&(&xt * alpha + x * (1.0 - alpha)));
        let mut s_hat = Vector::zeros(p + n);
        for i in 0..p {
            s_hat[i] = alpha * (lin.b[i] - ax_lin[i]) + (1.0 - alpha) * s[i];
        }
        for j in 0..n {
            s_hat[p + j] = alpha * xt[j] + (1.0 - alpha) * s[p + j];
        }
        let mut v = s_hat.clone();
        for i in 0..p {
            v[i] += y[i] / (rho * self.row_w(i));
        }
        for j in 0..n {
            v[p + j] += y[p + j] / rho;
        }
        let mut s_new = Vector::zeros(p + n);
        for i in 0..p {
            s_new[i] = if lin.eq[i] { 0.0 } else { v[i].max(0.0) };
        }
        s_new.rows_mut(p, n).copy_from(&project_psd(&v.rows(p, n).into_owned(), self.m));
        let mut y_new = y.into_owned();
        for i in 0..p {
            y_new[i] += rho * self.row_w(i) * (s_hat[i] - s_new[i]);
        }
        for j in 0..n {
            y_new[p + j] += rho * (s_hat[p + j] - s_new[p + j]);
        }
        out.rows_mut(n, p + n).copy_from(&s_new);
        out.rows_mut(n + p + n, p + n).copy_from(&y_new);
        out
    }
}

/// Type-II Anderson acceleration of a fixed-point map `z ↦ T(z)`.
struct Anderson {
    mem: usize,
    dz: Vec<Vector>,
    dg: Vec<Vector>,
    last: Option<(Vector, Vector)>,
}

impl Anderson {
    fn new(mem: usize) -> Self {
        Self {
            mem,
            dz: Vec::new(),
            dg: Vec::new(),
            last: None,
        }
    }

    fn reset(&mut self) {
        self.dz.clear();
        self.dg.clear();
        self.last = None;
    }

    /// Records `(z, g = T(z) − z)` and proposes the next iterate.
    fn propose(&mut self, z: &Vector, g: &Vector) -> Option<Vector> {
        if self.mem == 0 {
            return None;
        }
        if let Some((z0, g0)) = self.last.take() {
            if self.dz.len() == self.mem {
                self.dz.remove(0);
                self.dg.remove(0);
            }
            self.dz.push(z - z0);
            self.dg.push(g - g0);
        }
        self.last = Some((z.clone(), g.clone()));
        let k = self.dg.len();
        if k == 0 {
            return None;
        }
        let mut gram = Matrix::zeros(k, k);
        let mut rhs = Vector::zeros(k);
        for i in 0..k {
            rhs[i] = self.dg[i].dot(g);
            for j in 0..=i {
                let v = self.dg[i].dot(&self.dg[j]);
                gram[(i, j)] = v;
                gram[(j, i)] = v;
            }
        }
        let reg = 1e-10 * gram.trace().max(1e-300);
        for i in 0..k {
            gram[(i, i)] += reg;
        }
        let coef = gram.cholesky()?.solve(&rhs);
        if !coef.iter().all(|c| c.is_finite()) {
            return None;
        }
        let mut next = z + g;
        for i in 0..k {
            next -= (&self.dz[i] + &self.dg[i]) * coef[i];
        }
        Some(next)
    }
}

const AA_MEMORY: usize = 10;
/// An accelerated point is kept only if its fixed-point residual does not
/// exceed this multiple of the previous one.
const AA_SAFEGUARD: f64 = 1.0;

pub fn solve(problem: &SdpProblem, settings: &SolverSettings) -> Result<SdpSolution> {
    problem.validate()?;
    settings.validate()?;
    let m = problem.gram_dim;
    let n = svec_len(m);
    let lin = LinearBlock::new(problem);
    let p = lin.rows();

    let c_full = {
        let mut c = Vector::zeros(n);
        for (j, v) in svec_sparse(&problem.objective) {
            c[j] += v;
        }
        c
    };
    let c_scale = inf_norm(&c_full).max(1e-300);
    let q = -&c_full / c_scale;

    let ata = lin.gram(n, EQ_WEIGHT);
    let mut fac = factor(&ata, settings.sigma, settings.rho)?;
    let admm = Admm {
        lin: &lin,
        q: &q,
        m,
        layout: Layout { n, p },
        sigma: settings.sigma,
        alpha: settings.alpha,
    };
    let lay = &admm.layout;

    let mut z = Vector::zeros(lay.len());
    let mut aa = Anderson::new(if settings.anderson { AA_MEMORY } else { 0 });
    // last plain iterate and its residual norm, for the safeguard
    let mut fallback: Option<(Vector, f64)> = None;
    let mut from_aa = false;
    let mut best: Option<Best> = None;
    let mut status = SolveStatus::MaxIter;
    let mut iterations = settings.max_iter;
    let mut r_p_last = f64::INFINITY;
    let mut r_d_last = f64::INFINITY;
    let mut last_tz = z.clone();
    let trace = std::env::var_os("LASTITER_ADMM_TRACE").is_some();
    let mut rejected = 0usize;

    for it in 1..=settings.max_iter {
        let rho = fac.rho;
        let tz = admm.step(&z, &fac);
        let g = &tz - &z;
        let g_norm = g.norm();
        if from_aa {
            if let Some((plain, prev_norm)) = fallback.take() {
                if g_norm > AA_SAFEGUARD * prev_norm {
                    rejected += 1;
                    aa.reset();
                    z = plain;
                    from_aa = false;
                    continue;
                }
            }
        }
        last_tz.copy_from(&tz);

        let check = it % settings.check_every == 0 || it == settings.max_iter;
        if check {
            let (x, s, y) = (lay.x(&tz), lay.s(&tz), lay.y(&tz));
            let ax = lin.mul(x.into_owned().as_slice());
            let mut r_p_vec = Vector::zeros(p + n);
            for i in 0..p {
                r_p_vec[i] = ax[i] + s[i] - lin.b[i];
            }
            for j in 0..n {
                r_p_vec[p + j] = -x[j] + s[p + j];
            }
            let y_lin = y.rows(0, p).into_owned();
            let y_psd = y.rows(p, n).into_owned();
            let aty = lin.mul_t(&y_lin, n) - &y_psd;
            let r_p = inf_norm(&r_p_vec);
            let r_d = inf_norm(&(&aty - &q));
            let p_scale = 1.0 + inf_norm(&ax).max(x.amax()).max(s.amax()).max(inf_norm(&lin.b));
            let d_scale = 1.0 + inf_norm(&q).max(inf_norm(&aty));
            let s_psd = s.rows(p, n).into_owned();
            let pobj = -q.dot(&s_psd);
            let dobj = -y_lin.dot(&lin.b);
            let gap = (pobj - dobj).abs();
            let obj_scale = 1.0 + pobj.abs().max(dobj.abs());
            r_p_last = r_p / p_scale;
            r_d_last = r_d / d_scale;
            let score = r_p_last.max(r_d_last).max(gap / obj_scale);
            if best.as_ref().map_or(true, |b| score < b.score) {
                best = Some(Best {
                    score,
                    s_psd,
                    y: y.into_owned(),
                    r_p: r_p_last,
                    r_d: r_d_last,
                });
            }
            if trace && it % 500 == 0 {
                eprintln!(
                    "it {it} rej {rejected} rho {rho:.2e} rp {r_p_last:.2e} rd {r_d_last:.2e} gap {gap:.2e} pobj {pobj:.9} dobj {dobj:.9}"
                );
            }
            if r_p_last <= settings.tol && r_d_last <= settings.tol && gap <= settings.tol * obj_scale {
                status = SolveStatus::Solved;
                iterations = it;
                break;
            }
            if it > 100 {
                if let Some(st) = divergence(&admm, &g, settings.infeasibility_tol) {
                    status = st;
                    iterations = it;
                    break;
                }
            }
            if settings.adaptive_rho && it % (10 * settings.check_every) == 0 {
                let ratio = (r_p_last / r_d_last.max(1e-300)).sqrt();
                let new_rho = (rho * ratio).clamp(RHO_MIN, RHO_MAX);
                if new_rho > RHO_SWITCH * rho || new_rho < rho / RHO_SWITCH {
                    fac = factor(&ata, settings.sigma, new_rho)?;
                    aa.reset();
                    fallback = None;
                    from_aa = false;
                    z = tz;
                    continue;
                }
            }
        }

        match aa.propose(&z, &g) {
            Some(next) => {
                fallback = Some((tz, g_norm));
                z = next;
                from_aa = true;
            }
            None => {
                z = tz;
                from_aa = false;
            }
        }
    }

    let (s_psd, y_out, r_p, r_d) = match (status, best) {
        (SolveStatus::MaxIter, Some(b)) => (b.s_psd, b.y, b.r_p, b.r_d),
        _ => (
            lay.s(&last_tz).rows(p, n).into_owned(),
            lay.y(&last_tz).into_owned(),
            r_p_last,
            r_d_last,
        ),
    };
    let g = smat(&s_psd, m);
    let duals: Vec<f64> = (0..p)
        .map(|i| {
            let lam = -y_out[i] * c_scale * lin.row_scale[i];
            if lin.eq[i] {
                lam
            } else {
                lam.max(0.0)
            }
        })
        .collect();
    let dual_slack = smat(&(-y_out.rows(p, n).into_owned() * c_scale), m);
    let dual_objective = problem
        .constraints
        .iter()
        .zip(&duals)
        .map(|(c, l)| c.rhs * l)
        .sum();
    Ok(SdpSolution {
        objective: problem.objective_value(&g),
        g,
        duals,
        dual_slack,
        dual_objective,
        primal_residual: r_p,
        dual_residual: r_d,
        iterations,
        status,
    })
}

/// Infeasibility and unboundedness certificates from the step `dz`.
fn divergence(admm: &Admm<'_>, dz: &Vector, eps: f64) -> Option<SolveStatus> {
    let lay = &admm.layout;
    let (n, p, m) = (lay.n, lay.p, admm.m);
    let lin = admm.lin;
    let dy = lay.y(dz).into_owned();
    let dy_norm = inf_norm(&dy);
    if dy_norm > 1e-12 {
        let dy_lin = dy.rows(0, p).into_owned();
        let at_dy = lin.mul_t(&dy_lin, n) - dy.rows(p, n);
        let in_polar = (0..p).all(|i| lin.eq[i] || dy_lin[i] <= eps * dy_norm)
            && SymmetricEigen::new(smat(&dy.rows(p, n).into_owned(), m)).eigenvalues.max() <= eps * dy_norm;
        if in_polar && inf_norm(&at_dy) <= eps * dy_norm && lin.b.dot(&dy_lin) > eps * dy_norm {
            return Some(SolveStatus::Infeasible);
        }
    }
    let dx = lay.x(dz).into_owned();
    let dx_norm = inf_norm(&dx);
    if dx_norm > 1e-12 {
        let adx = lin.mul(dx.as_slice());
        let cone_ok = (0..p).all(|i| {
            if lin.eq[i] {
                adx[i].abs() <= eps * dx_norm
            } else {
                adx[i] <= eps * dx_norm
            }
        });
        if cone_ok
            && admm.q.dot(&dx) < -eps * dx_norm
            && SymmetricEigen::new(smat(&dx, m)).eigenvalues.min() >= -eps * dx_norm
        {
            return Some(SolveStatus::Unbounded);
        }
    }
    None
}
