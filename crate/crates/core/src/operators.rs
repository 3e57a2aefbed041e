//! Operators `F` and feasible sets `X`.
//!
//! Every operator is immutable once built. Affine kinds are validated for
//! monotonicity at construction: the smallest eigenvalue of the symmetric
//! part of the linear map must be at least `-MONOTONE_TOL`. Violating
//! matrices are rejected, never repaired.

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal, Uniform};

use crate::error::{Error, Result};
use crate::linalg::{min_sym_eig, spectral_norm, Matrix, Vector};

/// Tolerance on the symmetric-part eigenvalue test.
pub const MONOTONE_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub enum OperatorKind {
    Zero {
        dim: usize,
    },
    /// `F(x) = A x + b`.
    AffineMonotone {
        a: Matrix,
        b: Vector,
    },
    /// Gradient field of the saddle function `uᵀBv + c₁ᵀu − c₂ᵀv` over `(u, v)`:
    /// `F(u, v) = (B v + c₁, −Bᵀu + c₂)`.
    BilinearSaddle {
        b: Matrix,
        c1: Vector,
        c2: Vector,
    },
    /// `F(x) = ω J x` with `J` the block-diagonal rotation `[[0, 1], [−1, 0]]`.
    ScaledRotation {
        omega: f64,
        dim: usize,
    },
    /// Gradient of `f(w) = (y − w₃w₂w₁x)²` over `w ∈ R³`. Not monotone.
    DeepLinearToy {
        x_data: f64,
        y_data: f64,
    },
    /// A finite table of `(point, value)` pairs.
    Sampled {
        samples: Vec<(Vector, Vector)>,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct OperatorSpec {
    kind: OperatorKind,
    lipschitz: Option<f64>,
}

impl OperatorSpec {
    pub fn zero(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidInput("dimension must be positive".into()));
        }
        Ok(Self {
            kind: OperatorKind::Zero { dim },
            lipschitz: Some(0.0),
        })
    }

    /// Affine operator `x ↦ A x + b`; rejects `A` whose symmetric part is indefinite.
    pub fn affine(a: Matrix, b: Vector) -> Result<Self> {
        if a.nrows() == 0 || a.nrows() != a.ncols() {
            return Err(Error::InvalidInput(format!(
                "A must be square and nonempty, got {}x{}",
                a.nrows(),
                a.ncols()
            )));
        }
        if b.len() != a.nrows() {
            return Err(Error::DimensionMismatch {
                expected: a.nrows(),
                got: b.len(),
            });
        }
        if a.iter().chain(b.iter()).any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("non-finite operator data".into()));
        }
        let min_eig = min_sym_eig(&a);
        if min_eig < -MONOTONE_TOL {
            return Err(Error::NotMonotone { min_eig });
        }
        let lipschitz = spectral_norm(&a);
        Ok(Self {
            kind: OperatorKind::AffineMonotone { a, b },
            lipschitz: Some(lipschitz),
        })
    }

    pub fn bilinear_saddle(b: Matrix, c1: Vector, c2: Vector) -> Result<Self> {
        if c1.len() != b.nrows() {
            return Err(Error::DimensionMismatch {
                expected: b.nrows(),
                got: c1.len(),
            });
        }
        if c2.len() != b.ncols() {
            return Err(Error::DimensionMismatch {
                expected: b.ncols(),
                got: c2.len(),
            });
        }
        let lipschitz = spectral_norm(&b);
        Ok(Self {
            kind: OperatorKind::BilinearSaddle { b, c1, c2 },
            lipschitz: Some(lipschitz),
        })
    }

    pub fn scaled_rotation(omega: f64, dim: usize) -> Result<Self> {
        if dim == 0 || dim % 2 != 0 {
            return Err(Error::InvalidInput(format!(
                "rotation needs an even positive dimension, got {dim}"
            )));
        }
        if !omega.is_finite() {
            return Err(Error::InvalidInput("omega must be finite".into()));
        }
        Ok(Self {
            kind: OperatorKind::ScaledRotation { omega, dim },
            lipschitz: Some(omega.abs()),
        })
    }

    pub fn deep_linear_toy(x_data: f64, y_data: f64) -> Self {
        Self {
            kind: OperatorKind::DeepLinearToy { x_data, y_data },
            lipschitz: None,
        }
    }

    /// Operator known only through stored pairs. `lipschitz` is taken on trust.
    pub fn sampled(samples: Vec<(Vector, Vector)>, lipschitz: Option<f64>) -> Result<Self> {
        let Some((p0, _)) = samples.first() else {
            return Err(Error::InvalidInput("no samples".into()));
        };
        let d = p0.len();
        for (p, v) in &samples {
            if p.len() != d || v.len() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    got: if p.len() != d { p.len() } else { v.len() },
                });
            }
        }
        Ok(Self {
            kind: OperatorKind::Sampled { samples },
            lipschitz,
        })
    }

    pub fn kind(&self) -> &OperatorKind {
        &self.kind
    }

    /// Stored Lipschitz constant, if one is known.
    pub fn lipschitz(&self) -> Option<f64> {
        self.lipschitz
    }

    pub fn is_monotone(&self) -> bool {
        !matches!(self.kind, OperatorKind::DeepLinearToy { .. })
    }

    pub fn dim(&self) -> usize {
        match &self.kind {
            OperatorKind::Zero { dim } => *dim,
            OperatorKind::AffineMonotone { a, .. } => a.nrows(),
            OperatorKind::BilinearSaddle { b, .. } => b.nrows() + b.ncols(),
            OperatorKind::ScaledRotation { dim, .. } => *dim,
            OperatorKind::DeepLinearToy { .. } => 3,
            OperatorKind::Sampled { samples } => samples[0].0.len(),
        }
    }

    /// Linear part and offset for the affine-like kinds.
    pub fn affine_parts(&self) -> Option<(Matrix, Vector)> {
        match &self.kind {
            OperatorKind::Zero { dim } => Some((Matrix::zeros(*dim, *dim), Vector::zeros(*dim))),
            OperatorKind::AffineMonotone { a, b } => Some((a.clone(), b.clone())),
            OperatorKind::BilinearSaddle { b, c1, c2 } => {
                let (p, q) = (b.nrows(), b.ncols());
                let mut a = Matrix::zeros(p + q, p + q);
                a.view_mut((0, p), (p, q)).copy_from(b);
                a.view_mut((p, 0), (q, p)).copy_from(&(-b.transpose()));
                let mut off = Vector::zeros(p + q);
                off.rows_mut(0, p).copy_from(c1);
                off.rows_mut(p, q).copy_from(c2);
                Some((a, off))
            }
            OperatorKind::ScaledRotation { omega, dim } => {
                let mut a = Matrix::zeros(*dim, *dim);
                for blk in 0..dim / 2 {
                    a[(2 * blk, 2 * blk + 1)] = *omega;
                    a[(2 * blk + 1, 2 * blk)] = -*omega;
                }
                Some((a, Vector::zeros(*dim)))
            }
            OperatorKind::DeepLinearToy { .. } | OperatorKind::Sampled { .. } => None,
        }
    }

    pub fn evaluate(&self, x: &Vector) -> Result<Vector> {
        let d = self.dim();
        if x.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: x.len(),
            });
        }
        Ok(match &self.kind {
            OperatorKind::Zero { dim } => Vector::zeros(*dim),
            OperatorKind::AffineMonotone { a, b } => a * x + b,
            OperatorKind::BilinearSaddle { b, c1, c2 } => {
                let (p, q) = (b.nrows(), b.ncols());
                let u = x.rows(0, p);
                let v = x.rows(p, q);
                let mut out = Vector::zeros(p + q);
                out.rows_mut(0, p).copy_from(&(b * v + c1));
                out.rows_mut(p, q).copy_from(&(-(b.transpose() * u) + c2));
                out
            }
            OperatorKind::ScaledRotation { omega, dim } => {
                let mut out = Vector::zeros(*dim);
                for blk in 0..dim / 2 {
                    out[2 * blk] = omega * x[2 * blk + 1];
                    out[2 * blk + 1] = -omega * x[2 * blk];
                }
                out
            }
            OperatorKind::DeepLinearToy { x_data, y_data } => {
                let (w1, w2, w3) = (x[0], x[1], x[2]);
                let r = y_data - w3 * w2 * w1 * x_data;
                let s = -2.0 * r * x_data;
                Vector::from_vec(vec![s * w2 * w3, s * w1 * w3, s * w1 * w2])
            }
            OperatorKind::Sampled { samples } => samples
                .iter()
                .find(|(p, _)| p == x)
                .map(|(_, v)| v.clone())
                .ok_or(Error::NotSampled)?,
        })
    }
}

/// Spectral norm of the linear part of an affine-like operator.
pub fn lipschitz_estimate(op: &OperatorSpec) -> Result<f64> {
    match op.kind() {
        OperatorKind::Zero { .. } => Ok(0.0),
        OperatorKind::ScaledRotation { omega, .. } => Ok(omega.abs()),
        OperatorKind::AffineMonotone { a, .. } => Ok(spectral_norm(a)),
        OperatorKind::BilinearSaddle { b, .. } => Ok(spectral_norm(b)),
        OperatorKind::DeepLinearToy { .. } => Err(Error::UnsupportedOperator("deep-linear")),
        OperatorKind::Sampled { .. } => Err(Error::UnsupportedOperator("sampled")),
    }
}

/// Random affine monotone operator `A x + b` with `||A||₂ = lipschitz`.
///
/// `A = s·S + (1 − s)·P` before rescaling, where `S` is skew-symmetric and
/// `P = QΛQᵀ` with `Λ ~ U[0,1]^d` and `Q` a seeded orthogonal matrix. Both
/// parts are normalized to unit spectral norm before mixing. In dimension 1
/// the skew part vanishes, so a pure-skew request falls back to `P`.
/// The offset `b` is standard normal.
pub fn random_monotone(seed: u64, d: usize, lipschitz: f64, skew_fraction: f64) -> Result<OperatorSpec> {
    if d == 0 {
        return Err(Error::InvalidInput("d must be at least 1".into()));
    }
    if !(lipschitz > 0.0) || !lipschitz.is_finite() {
        return Err(Error::InvalidInput(format!("L must be positive, got {lipschitz}")));
    }
    if !(0.0..=1.0).contains(&skew_fraction) {
        return Err(Error::InvalidInput(format!(
            "skew_fraction must lie in [0, 1], got {skew_fraction}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let gauss = |rng: &mut ChaCha8Rng, r: usize, c: usize| {
        DMatrix::from_fn(r, c, |_, _| StandardNormal.sample(&mut *rng))
    };

    let g = gauss(&mut rng, d, d);
    let mut skew: Matrix = (&g - g.transpose()) * 0.5;
    let sn = spectral_norm(&skew);
    if sn > 0.0 {
        skew /= sn;
    }

    let q = gauss(&mut rng, d, d).qr().q();
    let unif = Uniform::new(0.0, 1.0).expect("valid range");
    let lam = Vector::from_fn(d, |_, _| unif.sample(&mut rng));
    let mut psd = &q * Matrix::from_diagonal(&lam) * q.transpose();
    psd = (&psd + psd.transpose()) * 0.5;
    let pn = spectral_norm(&psd);
    if pn > 0.0 {
        psd /= pn;
    }

    let mut a = skew * skew_fraction + &psd * (1.0 - skew_fraction);
    let mut an = spectral_norm(&a);
    if an == 0.0 {
        a = psd;
        an = spectral_norm(&a);
    }
    a *= lipschitz / an;
    if skew_fraction == 1.0 && d > 1 {
        // keep the skew structure exact after rescaling
        a = (&a - a.transpose()) * 0.5;
    }
    if skew_fraction == 0.0 {
        a = (&a + a.transpose()) * 0.5;
    }
    let b = Vector::from_fn(d, |_, _| StandardNormal.sample(&mut rng));
    let mut op = OperatorSpec::affine(a, b)?;
    // exact nominal constant; the computed norm agrees to rounding
    op.lipschitz = Some(lipschitz);
    Ok(op)
}

// ---------------------------------------------------------------------------
// Feasible sets
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq)]
pub enum FeasibleSet {
    Unconstrained,
    Box { lo: Vector, hi: Vector },
    Ball { center: Vector, radius: f64 },
    /// `{x : ⟨normal, x⟩ ≤ offset}`.
    Halfspace { normal: Vector, offset: f64 },
    Product(Vec<FeasibleSet>),
}

impl FeasibleSet {
    pub fn new_box(lo: Vector, hi: Vector) -> Result<Self> {
        if lo.len() != hi.len() || lo.is_empty() {
            return Err(Error::InvalidInput("box bounds must have equal positive length".into()));
        }
        if lo.iter().zip(hi.iter()).any(|(l, h)| l > h || l.is_nan() || h.is_nan()) {
            return Err(Error::InvalidInput("box requires lo <= hi componentwise".into()));
        }
        Ok(FeasibleSet::Box { lo, hi })
    }

    pub fn new_ball(center: Vector, radius: f64) -> Result<Self> {
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(Error::InvalidInput(format!("ball radius must be positive, got {radius}")));
        }
        if center.is_empty() {
            return Err(Error::InvalidInput("ball center must be nonempty".into()));
        }
        Ok(FeasibleSet::Ball { center, radius })
    }

    pub fn new_halfspace(normal: Vector, offset: f64) -> Result<Self> {
        if normal.is_empty() || normal.norm() == 0.0 {
            return Err(Error::InvalidInput("halfspace normal must be nonzero".into()));
        }
        Ok(FeasibleSet::Halfspace { normal, offset })
    }

    /// Product of dimensioned factors; `Unconstrained` factors are rejected
    /// because they carry no dimension (use an infinite box instead).
    pub fn new_product(parts: Vec<FeasibleSet>) -> Result<Self> {
        if parts.is_empty() {
            return Err(Error::InvalidInput("empty product".into()));
        }
        if parts.iter().any(|p| p.dim().is_none()) {
            return Err(Error::InvalidInput(
                "product factors must have a fixed dimension".into(),
            ));
        }
        Ok(FeasibleSet::Product(parts))
    }

    /// Dimension of the ambient space, `None` for `Unconstrained`.
    pub fn dim(&self) -> Option<usize> {
        match self {
            FeasibleSet::Unconstrained => None,
            FeasibleSet::Box { lo, .. } => Some(lo.len()),
            FeasibleSet::Ball { center, .. } => Some(center.len()),
            FeasibleSet::Halfspace { normal, .. } => Some(normal.len()),
            FeasibleSet::Product(parts) => parts.iter().map(|p| p.dim()).sum(),
        }
    }

    pub fn is_unconstrained(&self) -> bool {
        matches!(self, FeasibleSet::Unconstrained)
    }

    pub fn project(&self, x: &Vector) -> Result<Vector> {
        if let Some(d) = self.dim() {
            if d != x.len() {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    got: x.len(),
                });
            }
        }
        Ok(self.project_unchecked(x))
    }

    fn project_unchecked(&self, x: &Vector) -> Vector {
        match self {
            FeasibleSet::Unconstrained => x.clone(),
            FeasibleSet::Box { lo, hi } => {
                Vector::from_fn(x.len(), |i, _| x[i].max(lo[i]).min(hi[i]))
            }
            FeasibleSet::Ball { center, radius } => {
                let diff = x - center;
                let n = diff.norm();
                if n <= *radius {
                    x.clone()
                } else {
                    center + diff * (radius / n)
                }
            }
            FeasibleSet::Halfspace { normal, offset } => {
                let viol = normal.dot(x) - offset;
                if viol <= 0.0 {
                    x.clone()
                } else {
                    x - normal * (viol / normal.norm_squared())
                }
            }
            FeasibleSet::Product(parts) => {
                let mut out = Vector::zeros(x.len());
                let mut off = 0;
                for p in parts {
                    let d = p.dim().expect("product factors are dimensioned");
                    let seg = x.rows(off, d).into_owned();
                    out.rows_mut(off, d).copy_from(&p.project_unchecked(&seg));
                    off += d;
                }
                out
            }
        }
    }

    /// Euclidean distance from `x` to the set.
    pub fn distance(&self, x: &Vector) -> Result<f64> {
        Ok((self.project(x)? - x).norm())
    }
}

/// Free-function form of [`FeasibleSet::project`].
pub fn project(set: &FeasibleSet, x: &Vector) -> Result<Vector> {
    set.project(x)
}

/// Free-function form of [`OperatorSpec::evaluate`].
pub fn evaluate(op: &OperatorSpec, x: &Vector) -> Result<Vector> {
    op.evaluate(x)
}
