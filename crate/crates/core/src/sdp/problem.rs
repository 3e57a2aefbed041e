use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::linalg::{Matrix, Vector};
use crate::pep::SampleLabel;

/// Symmetric matrix stored as its upper triangle (`i ≤ j`), sorted and
/// without duplicates. Entry `(i, j, v)` with `i < j` stands for both
/// `(i, j)` and `(j, i)`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SymSparse {
    pub dim: usize,
    pub entries: Vec<(usize, usize, f64)>,
}

impl SymSparse {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            entries: Vec::new(),
        }
    }

    /// Builds from `(i, j, v)` triplets in any order; `(i, j)` and `(j, i)`
    /// both address the same symmetric entry, and repeats are summed.
    pub fn from_triplets(dim: usize, triplets: impl IntoIterator<Item = (usize, usize, f64)>) -> Self {
        let mut acc: BTreeMap<(usize, usize), f64> = BTreeMap::new();
        for (i, j, v) in triplets {
            assert!(i < dim && j < dim, "entry ({i}, {j}) outside dimension {dim}");
            let key = if i <= j { (i, j) } else { (j, i) };
            *acc.entry(key).or_insert(0.0) += v;
        }
        Self {
            dim,
            entries: acc
                .into_iter()
                .filter(|&(_, v)| v != 0.0)
                .map(|((i, j), v)| (i, j, v))
                .collect(),
        }
    }

    /// Upper triangle of a dense matrix, symmetrized as `(a + aᵀ)/2`.
    pub fn from_dense(a: &Matrix) -> Self {
        let n = a.nrows();
        let mut t = Vec::new();
        for j in 0..n {
            for i in 0..=j {
                let v = 0.5 * (a[(i, j)] + a[(j, i)]);
                if v != 0.0 {
                    t.push((i, j, v));
                }
            }
        }
        Self { dim: n, entries: t }
    }

    /// `(u vᵀ + v uᵀ)/2`, the matrix with `⟨M, VᵀV⟩ = ⟨Vu, Vv⟩`.
    pub fn sym_outer(u: &Vector, v: &Vector) -> Self {
        let n = u.len();
        let mut t = Vec::new();
        for i in 0..n {
            for j in i..n {
                let val = if i == j {
                    u[i] * v[i]
                } else {
                    0.5 * (u[i] * v[j] + u[j] * v[i])
                };
                if val != 0.0 {
                    t.push((i, j, val));
                }
            }
        }
        Self { dim: n, entries: t }
    }

    pub fn to_dense(&self) -> Matrix {
        let mut m = Matrix::zeros(self.dim, self.dim);
        for &(i, j, v) in &self.entries {
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
        m
    }

    /// `Tr(M G)` for symmetric `G`.
    pub fn dot_dense(&self, g: &Matrix) -> f64 {
        self.entries
            .iter()
            .map(|&(i, j, v)| if i == j { v * g[(i, i)] } else { 2.0 * v * g[(i, j)] })
            .sum()
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self {
            dim: self.dim,
            entries: self
                .entries
                .iter()
                .map(|&(i, j, v)| (i, j, c * v))
                .filter(|&(_, _, v)| v != 0.0)
                .collect(),
        }
    }

    /// `self + c·other`.
    pub fn add_scaled(&self, other: &SymSparse, c: f64) -> Self {
        assert_eq!(self.dim, other.dim);
        Self::from_triplets(
            self.dim,
            self.entries
                .iter()
                .copied()
                .chain(other.entries.iter().map(|&(i, j, v)| (i, j, c * v))),
        )
    }

    pub fn max_abs(&self) -> f64 {
        self.entries.iter().map(|e| e.2.abs()).fold(0.0, f64::max)
    }

    /// Drops entries below `tol·max_abs`.
    pub fn pruned(&self, tol: f64) -> Self {
        let cut = tol * self.max_abs();
        Self {
            dim: self.dim,
            entries: self
                .entries
                .iter()
                .copied()
                .filter(|e| e.2.abs() > cut)
                .collect(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sense {
    Le,
    Eq,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum InterpKind {
    /// `⟨g − h, x − y⟩ ≥ 0`.
    Monotone,
    /// `||g − h||² ≤ L²||x − y||²`.
    Lipschitz,
    /// `||g − h||² ≤ L⟨g − h, x − y⟩`.
    Cocoercive,
}

/// Where a constraint row comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ConstraintTag {
    Interp {
        kind: InterpKind,
        a: SampleLabel,
        b: SampleLabel,
    },
    /// `⟨z − p, y − p⟩ ≤ 0` for `p = proj[z]` and `y = other`.
    Projection {
        point: SampleLabel,
        other: SampleLabel,
    },
    /// `⟨g*, y − x*⟩ ≥ 0` at `y = other`.
    Optimality { other: SampleLabel },
    Normalization,
    Generic,
}

impl ConstraintTag {
    /// The labels this row couples, if any.
    pub fn pair(&self) -> Option<(SampleLabel, SampleLabel)> {
        match *self {
            ConstraintTag::Interp { a, b, .. } => Some((a, b)),
            ConstraintTag::Projection { point, other } => Some((point, other)),
            ConstraintTag::Optimality { other } => Some((SampleLabel::Star, other)),
            _ => None,
        }
    }
}

impl fmt::Display for ConstraintTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConstraintTag::Interp { kind, a, b } => write!(f, "{kind:?}({a}, {b})"),
            ConstraintTag::Projection { point, other } => write!(f, "Projection({point}, {other})"),
            ConstraintTag::Optimality { other } => write!(f, "Optimality({other})"),
            ConstraintTag::Normalization => f.write_str("Normalization"),
            ConstraintTag::Generic => f.write_str("Generic"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub matrix: SymSparse,
    pub sense: Sense,
    pub rhs: f64,
    pub tag: ConstraintTag,
}

impl Constraint {
    pub fn le(matrix: SymSparse, rhs: f64, tag: ConstraintTag) -> Self {
        Self {
            matrix,
            sense: Sense::Le,
            rhs,
            tag,
        }
    }

    /// `Tr(M G) − rhs`; feasible when `≤ 0` (or `= 0` for equalities).
    pub fn residual(&self, g: &Matrix) -> f64 {
        self.matrix.dot_dense(g) - self.rhs
    }
}

/// Symbolic sample `(point, value)` as coefficient vectors over the basis.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleExpr {
    pub label: SampleLabel,
    pub point: Vector,
    pub value: Vector,
    /// Set for projection outputs: the pre-projection point `z` with
    /// `point = proj[z]`.
    pub preimage: Option<Vector>,
}

/// One basis symbol of a PEP Gram matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BasisSymbol {
    Point(SampleLabel),
    Value(SampleLabel),
}

impl fmt::Display for BasisSymbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (prefix, label) = match self {
            BasisSymbol::Point(l) => ("x", l),
            BasisSymbol::Value(l) => ("g", l),
        };
        match label {
            SampleLabel::Star => write!(f, "{prefix}*"),
            SampleLabel::X(k) => write!(f, "{prefix}{k}"),
            SampleLabel::Xt(k) => write!(f, "{prefix}t{k}"),
        }
    }
}

/// `maximize Tr(M₀ G)` subject to `Tr(Mᵢ G) ≤ bᵢ` (or `=`) and `G ⪰ 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct SdpProblem {
    pub gram_dim: usize,
    pub objective: SymSparse,
    pub constraints: Vec<Constraint>,
    /// Basis symbols in Gram order; empty for hand-built problems.
    pub basis: Vec<BasisSymbol>,
    pub samples: Vec<SampleExpr>,
}

impl SdpProblem {
    /// A problem without PEP structure.
    pub fn new(gram_dim: usize, objective: SymSparse, constraints: Vec<Constraint>) -> Self {
        Self {
            gram_dim,
            objective,
            constraints,
            basis: Vec::new(),
            samples: Vec::new(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.gram_dim == 0 {
            return Err(Error::InvalidInput("Gram dimension must be positive".into()));
        }
        if !self.basis.is_empty() && self.basis.len() != self.gram_dim {
            return Err(Error::DimensionMismatch {
                expected: self.gram_dim,
                got: self.basis.len(),
            });
        }
        let check = |m: &SymSparse| -> Result<()> {
            if m.dim != self.gram_dim {
                return Err(Error::DimensionMismatch {
                    expected: self.gram_dim,
                    got: m.dim,
                });
            }
            if m.entries.iter().any(|e| !e.2.is_finite() || e.0 > e.1) {
                return Err(Error::InvalidInput("constraint entries must be finite upper-triangular".into()));
            }
            Ok(())
        };
        check(&self.objective)?;
        for c in &self.constraints {
            check(&c.matrix)?;
            if !c.rhs.is_finite() {
                return Err(Error::InvalidInput("constraint rhs must be finite".into()));
            }
        }
        Ok(())
    }

    pub fn basis_names(&self) -> Vec<String> {
        self.basis.iter().map(|s| s.to_string()).collect()
    }

    pub fn objective_value(&self, g: &Matrix) -> f64 {
        self.objective.dot_dense(g)
    }

    /// Largest constraint violation `max(Tr(MᵢG) − bᵢ, 0)` (absolute for
    /// equalities).
    pub fn max_violation(&self, g: &Matrix) -> f64 {
        self.constraints
            .iter()
            .map(|c| {
                let r = c.residual(g);
                match c.sense {
                    Sense::Le => r.max(0.0),
                    Sense::Eq => r.abs(),
                }
            })
            .fold(0.0, f64::max)
    }

    pub fn normalization_index(&self) -> Option<usize> {
        self.constraints
            .iter()
            .position(|c| c.tag == ConstraintTag::Normalization)
    }

    pub fn sample(&self, label: SampleLabel) -> Option<&SampleExpr> {
        self.samples.iter().find(|s| s.label == label)
    }
}

/// Lower-triangle-free vectorization with `√2` off-diagonal scaling, so that
/// `⟨svec(A), svec(B)⟩ = Tr(AB)`. Column-major over the upper triangle.
pub fn svec_index(i: usize, j: usize) -> usize {
    let (i, j) = if i <= j { (i, j) } else { (j, i) };
    j * (j + 1) / 2 + i
}

pub fn svec_len(m: usize) -> usize {
    m * (m + 1) / 2
}

pub fn svec(a: &Matrix) -> Vector {
    let m = a.nrows();
    let mut v = Vector::zeros(svec_len(m));
    for j in 0..m {
        for i in 0..=j {
            v[svec_index(i, j)] = if i == j {
                a[(i, i)]
            } else {
                std::f64::consts::SQRT_2 * a[(i, j)]
            };
        }
    }
    v
}

pub fn smat(v: &Vector, m: usize) -> Matrix {
    let mut a = Matrix::zeros(m, m);
    let r = std::f64::consts::FRAC_1_SQRT_2;
    for j in 0..m {
        for i in 0..=j {
            let x = v[svec_index(i, j)];
            if i == j {
                a[(i, i)] = x;
            } else {
                a[(i, j)] = x * r;
                a[(j, i)] = x * r;
            }
        }
    }
    a
}

/// Sparse `svec(M)` as `(index, value)` pairs.
pub fn svec_sparse(m: &SymSparse) -> Vec<(usize, f64)> {
    m.entries
        .iter()
        .map(|&(i, j, v)| {
            (
                svec_index(i, j),
                if i == j { v } else { std::f64::consts::SQRT_2 * v },
            )
        })
        .collect()
}
