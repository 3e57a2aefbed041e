//! Exact verification of the potential-decrease proofs.
//!
//! Each proof is a [`Certificate`]: nonnegative weights on constraint forms
//! (each form is `≥ 0` on every admissible instance) plus nonnegative
//! multiples of explicit squares that sum to the target form exactly,
//! coefficient by coefficient, as polynomials in `q = γL`. Setting `L = 1`
//! loses nothing: rescaling `F ↦ F/L` maps an `L`-Lipschitz instance with
//! step `γ` to a 1-Lipschitz one with step `γL`, and every statement below is
//! homogeneous under that map. All arithmetic is rational.

mod form;
mod poly;

use std::fmt;

use num_traits::{One, Zero};

use crate::error::{Error, Result};

pub use form::{build_quadform, eval_expr, linear_form, parse_expr, quadform, Expr, LinearForm, QuadForm, SymbolBasis};
pub use poly::{rat, GammaPoly, Rational};

/// A constraint form `C(q) ≥ 0` entering with weight `w(q)`.
#[derive(Debug, Clone)]
pub struct WeightedForm {
    /// What the inequality is, in words.
    pub label: String,
    pub text: String,
    pub form: QuadForm,
    pub weight: GammaPoly,
}

/// `c(q)·||ℓ||²` for a linear form `ℓ`.
#[derive(Debug, Clone)]
pub struct SquareTerm {
    pub label: String,
    pub text: String,
    pub linear: LinearForm,
    pub coeff: GammaPoly,
}

/// A polynomial the lemma statement asserts to be nonnegative on the range,
/// kept apart from the weights (e.g. the coefficient multiplying a term the
/// statement leaves on its right-hand side).
#[derive(Debug, Clone)]
pub struct SignClaim {
    pub label: String,
    pub poly: GammaPoly,
}

#[derive(Debug, Clone)]
pub struct Certificate {
    pub name: String,
    pub basis: SymbolBasis,
    /// The inequality `target ≥ 0`, as written.
    pub target_text: String,
    pub target: QuadForm,
    pub constraints: Vec<WeightedForm>,
    pub squares: Vec<SquareTerm>,
    pub sign_claims: Vec<SignClaim>,
    /// Weights and coefficients must be nonnegative on `q ∈ (0, range]`.
    pub range: Rational,
}

impl Certificate {
    pub fn new<S: Into<String>>(
        name: &str,
        basis: impl IntoIterator<Item = S>,
        target: &str,
        range: Rational,
    ) -> Result<Self> {
        let basis = SymbolBasis::new(basis)?;
        Ok(Self {
            name: name.into(),
            target: quadform(target, &basis)?,
            basis,
            target_text: target.into(),
            constraints: Vec::new(),
            squares: Vec::new(),
            sign_claims: Vec::new(),
            range,
        })
    }

    pub fn constraint(mut self, label: &str, text: &str, weight: GammaPoly) -> Result<Self> {
        self.constraints.push(WeightedForm {
            label: label.into(),
            text: text.into(),
            form: quadform(text, &self.basis)?,
            weight,
        });
        Ok(self)
    }

    pub fn square(mut self, label: &str, text: &str, coeff: GammaPoly) -> Result<Self> {
        self.squares.push(SquareTerm {
            label: label.into(),
            text: text.into(),
            linear: linear_form(text, &self.basis)?,
            coeff,
        });
        Ok(self)
    }

    pub fn sign_claim(mut self, label: &str, poly: GammaPoly) -> Self {
        self.sign_claims.push(SignClaim {
            label: label.into(),
            poly,
        });
        self
    }

    /// `target − Σ wᵢCᵢ − Σ cⱼ||ℓⱼ||²`; zero for a valid certificate.
    pub fn residual(&self) -> QuadForm {
        let mut r = self.target.clone();
        for c in &self.constraints {
            r = r.sub(&c.form.scale(&c.weight));
        }
        for s in &self.squares {
            r = r.sub(&QuadForm::norm_sq(&s.linear).scale(&s.coeff));
        }
        r
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    /// The identity fails at Gram entry `(row, col)`, coefficient of `q^degree`.
    Residual {
        row: String,
        col: String,
        degree: usize,
        coefficient: Rational,
    },
    /// A weight, square coefficient or sign claim is negative somewhere on the range.
    Negative { term: String, poly: GammaPoly },
    Malformed(String),
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Residual {
                row,
                col,
                degree,
                coefficient,
            } => write!(f, "identity fails at <{row}, {col}>, q^{degree} coefficient {coefficient}"),
            Violation::Negative { term, poly } => write!(f, "{term}: {poly} is negative on the range"),
            Violation::Malformed(m) => write!(f, "malformed certificate: {m}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Verdict {
    Valid,
    Invalid(Violation),
}

impl Verdict {
    pub fn is_valid(&self) -> bool {
        *self == Verdict::Valid
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::Valid => write!(f, "Valid"),
            Verdict::Invalid(v) => write!(f, "Invalid ({v})"),
        }
    }
}

/// Checks the exact identity, then nonnegativity of every weight, square
/// coefficient and sign claim on `(0, range]`.
pub fn verify_certificate(cert: &Certificate) -> Verdict {
    let n = cert.basis.len();
    if cert.range <= Rational::zero() {
        return Verdict::Invalid(Violation::Malformed("range must be positive".into()));
    }
    let dims_ok = cert.target.dim() == n
        && cert.constraints.iter().all(|c| c.form.dim() == n)
        && cert.squares.iter().all(|s| s.linear.coeffs.len() == n);
    if !dims_ok {
        return Verdict::Invalid(Violation::Malformed("form dimension differs from the basis".into()));
    }
    if !cert.target.is_symmetric() || !cert.constraints.iter().all(|c| c.form.is_symmetric()) {
        return Verdict::Invalid(Violation::Malformed("asymmetric form".into()));
    }
    if let Some((i, j, p)) = cert.residual().first_nonzero() {
        let degree = p.coeffs().iter().position(|c| !c.is_zero()).unwrap_or(0);
        return Verdict::Invalid(Violation::Residual {
            row: cert.basis.names()[i].clone(),
            col: cert.basis.names()[j].clone(),
            degree,
            coefficient: p.coeff(degree),
        });
    }
    let terms = cert
        .constraints
        .iter()
        .map(|c| (format!("weight on {}", c.label), &c.weight))
        .chain(cert.squares.iter().map(|s| (format!("coefficient of {}", s.label), &s.coeff)))
        .chain(cert.sign_claims.iter().map(|s| (s.label.clone(), &s.poly)));
    for (term, poly) in terms {
        if !poly.nonnegative_on(&cert.range) {
            return Verdict::Invalid(Violation::Negative {
                term,
                poly: poly.clone(),
            });
        }
    }
    Verdict::Valid
}

const LEMMA1_BASIS: [&str; 4] = ["g_k", "g_{k+1}", "gt_k", "gt_{k-1}"];

/// Energy decrease for PEG, with the two interpolation weights exposed.
pub fn lemma1_certificate_with_weights(monotone: Rational, lipschitz: Rational) -> Result<Certificate> {
    let target = "||g_k||^2 + 2*||g_k - gt_{k-1}||^2 + 3*(q^2 - 2/9)*||gt_k - gt_{k-1}||^2 \
                  - ||g_{k+1}||^2 - 2*||g_{k+1} - gt_k||^2";
    Ok(Certificate::new("Lemma 1", LEMMA1_BASIS, target, rat(1, 3))?
        .constraint(
            "monotonicity at (x^{k+1}, x^k), divided by γ",
            "<g_k - g_{k+1}, gt_k>",
            GammaPoly::constant(monotone),
        )?
        .constraint(
            "Lipschitz continuity at (x^{k+1}, xt^k)",
            "q^2*||gt_k - gt_{k-1}||^2 - ||g_{k+1} - gt_k||^2",
            GammaPoly::constant(lipschitz),
        )?
        .square(
            "slack of -||a-b||^2 <= -||a||^2/(1+α) + ||b||^2/α at α = 1/2",
            "(gt_k - gt_{k-1}) - 3(g_k - gt_{k-1})",
            GammaPoly::constant(rat(1, 3)),
        )?
        .sign_claim(
            "2/9 - q^2 (the last term is non-positive)",
            GammaPoly::from_coeffs(vec![rat(2, 9), rat(0, 1), rat(-1, 1)]),
        ))
}

pub fn lemma1_certificate() -> Certificate {
    lemma1_certificate_with_weights(rat(2, 1), rat(3, 1)).expect("fixed certificate text parses")
}

const LEMMA2_BASIS: [&str; 8] = ["x_{k-1}", "x_k", "x_{k+1}", "xt_k", "g_k", "g_{k+1}", "gt_{k-1}", "gt_k"];

/// Decrease of `Ψ` for Proj-PEG.
pub fn lemma2_certificate() -> Certificate {
    let psi = |x1: &str, x0: &str, g: &str, gt: &str| {
        format!("||{x1} - {x0}||^2 + ||{x1} - {x0} - 2q({g} - {gt})||^2")
    };
    let target = format!(
        "{} - ({}) - (1 - 5q^2)*||x_{{k+1}} - xt_k||^2 - q^2*||g_{{k+1}} - gt_k||^2",
        psi("x_k", "x_{k-1}", "g_k", "gt_{k-1}"),
        psi("x_{k+1}", "x_k", "g_{k+1}", "gt_k"),
    );
    let q = GammaPoly::q();
    let build = || -> Result<Certificate> {
        Certificate::new("Lemma 2", LEMMA2_BASIS, &target, rat(1, 4))?
            .constraint(
                "monotonicity at (x^k, x^{k+1})",
                "<g_{k+1} - g_k, x_{k+1} - x_k>",
                &GammaPoly::int(4) * &q,
            )?
            .constraint(
                "Lipschitz continuity at (x^{k+1}, xt^k)",
                "||x_{k+1} - xt_k||^2 - ||g_{k+1} - gt_k||^2",
                &GammaPoly::int(5) * &(&q * &q),
            )?
            .constraint(
                "projection defining x^{k+1}, tested at x^k",
                "-<x_k - q*gt_k - x_{k+1}, x_k - x_{k+1}>",
                GammaPoly::int(4),
            )?
            .constraint(
                "projection defining x^k, tested at x^{k+1}",
                "-<x_{k-1} - q*gt_{k-1} - x_k, x_{k+1} - x_k>",
                GammaPoly::int(2),
            )?
            .constraint(
                "projection defining x^k, tested at xt^k",
                "-<x_{k-1} - q*gt_{k-1} - x_k, xt_k - x_k>",
                GammaPoly::int(2),
            )?
            .constraint(
                "projection defining xt^k, tested at x^{k+1}",
                "-<x_k - q*gt_{k-1} - xt_k, x_{k+1} - xt_k>",
                GammaPoly::int(2),
            )?
            .square(
                "slack of 2<a,b> <= ||a||^2 + ||b||^2",
                "2q(g_k - gt_{k-1}) + x_{k+1} + x_{k-1} - 2x_k",
                GammaPoly::int(1),
            )?
            .square(
                "slack of ||a+b||^2 <= 2||a||^2 + 2||b||^2",
                "(x_{k-1} - x_k) - (x_k - xt_k)",
                GammaPoly::int(1),
            )
    };
    build()
        .expect("fixed certificate text parses")
        .sign_claim("1 - 5q^2", GammaPoly::from_coeffs(vec![rat(1, 1), rat(0, 1), rat(-5, 1)]))
}

fn paren(r: &Rational) -> String {
    format!("({r})")
}

/// The three standard inequalities for symbolic `a, b` at a rational `α > 0`:
/// the polarization identity and the two weighted triangle bounds.
pub fn appendix_a_certificates(alpha: &Rational) -> Result<Vec<Certificate>> {
    if *alpha <= Rational::zero() {
        return Err(Error::InvalidInput(format!("alpha must be positive, got {alpha}")));
    }
    let one = Rational::one();
    let basis = ["a", "b"];
    // any q-independent range works; these statements do not involve q
    let range = one.clone();
    let polar = Certificate::new(
        "polarization",
        basis,
        "||a||^2 + ||b||^2 - ||a - b||^2 - 2<a, b>",
        range.clone(),
    )?;
    let polar_neg = Certificate::new(
        "polarization (reverse)",
        basis,
        "2<a, b> - ||a||^2 - ||b||^2 + ||a - b||^2",
        range.clone(),
    )?;
    let sum_bound = Certificate::new(
        "||a+b||^2 bound",
        basis,
        &format!(
            "{}*||a||^2 + {}*||b||^2 - ||a + b||^2",
            paren(&(&one + alpha)),
            paren(&(&one + &one / alpha))
        ),
        range.clone(),
    )?
    .square(
        "||αa - b||^2",
        &format!("{}a - b", paren(alpha)),
        GammaPoly::constant(&one / alpha),
    )?;
    let diff_bound = Certificate::new(
        "-||a-b||^2 bound",
        basis,
        &format!(
            "-{}*||a||^2 + {}*||b||^2 + ||a - b||^2",
            paren(&(&one / (&one + alpha))),
            paren(&(&one / alpha))
        ),
        range,
    )?
    .square(
        "||a - (1+α)/α b||^2",
        &format!("a - {}b", paren(&((&one + alpha) / alpha))),
        GammaPoly::constant(alpha / (&one + alpha)),
    )?;
    Ok(vec![polar, polar_neg, sum_bound, diff_bound])
}

/// Valid iff all standard-inequality certificates at `α` verify.
pub fn verify_appendix_a(alpha: &Rational) -> Result<Verdict> {
    for c in appendix_a_certificates(alpha)? {
        let v = verify_certificate(&c);
        if !v.is_valid() {
            return Ok(v);
        }
    }
    Ok(Verdict::Valid)
}

/// Verdicts for a batch of certificates, with a text ledger.
pub struct CertifyReport {
    pub entries: Vec<(Certificate, Verdict)>,
    pub appendix_alpha: Rational,
    pub appendix: Verdict,
}

impl CertifyReport {
    pub fn all_valid(&self) -> bool {
        self.entries.iter().all(|(_, v)| v.is_valid()) && self.appendix.is_valid()
    }

    /// `Lemma 1: Valid; Lemma 2: Valid; Appendix A (α=1/2): Valid`.
    pub fn summary(&self) -> String {
        let mut parts: Vec<String> = self
            .entries
            .iter()
            .map(|(c, v)| format!("{}: {}", c.name, if v.is_valid() { "Valid" } else { "Invalid" }))
            .collect();
        parts.push(format!(
            "Appendix A (α={}): {}",
            self.appendix_alpha,
            if self.appendix.is_valid() { "Valid" } else { "Invalid" }
        ));
        parts.join("; ")
    }
}

/// Closed-form positive root of `a + b·q²` with `a > 0 > b`.
fn quadratic_root(p: &GammaPoly) -> Option<String> {
    if p.degree() != Some(2) || !p.coeff(1).is_zero() {
        return None;
    }
    let (a, b) = (p.coeff(0), p.coeff(2));
    if a <= Rational::zero() || b >= Rational::zero() {
        return None;
    }
    let r = -a / b;
    let part = |n: &num_bigint::BigInt| {
        let s = n.sqrt();
        if &(&s * &s) == n {
            s.to_string()
        } else {
            format!("√{n}")
        }
    };
    let (num, den) = (part(r.numer()), part(r.denom()));
    Some(if den == "1" { num } else { format!("{num}/{den}") })
}

fn write_certificate(f: &mut fmt::Formatter<'_>, c: &Certificate, v: &Verdict) -> fmt::Result {
    writeln!(f, "{}: {v}", c.name)?;
    writeln!(f, "  basis: [{}]", c.basis.names().join(", "))?;
    writeln!(f, "  range: 0 < q = γL ≤ {}", c.range)?;
    writeln!(f, "  target (≥ 0): {}", c.target_text)?;
    for w in &c.constraints {
        writeln!(f, "  + ({})  × {}: {} ≥ 0", w.weight, w.label, w.text)?;
    }
    for s in &c.squares {
        writeln!(f, "  + ({})  × ||{}||^2   [{}]", s.coeff, s.text, s.label)?;
    }
    for s in &c.sign_claims {
        write!(f, "  sign: {} = {} ≥ 0 on the range", s.label, s.poly)?;
        if let Some((lo, hi)) = s.poly.first_positive_root(&rat(2, 1), &rat(1, 1_000_000)) {
            write!(f, "; first sign change at q ∈ [{lo}, {hi}]")?;
        }
        if let Some(root) = quadratic_root(&s.poly) {
            write!(f, "; non-negative exactly for q ≤ {root}")?;
        }
        writeln!(f)?;
    }
    Ok(())
}

impl fmt::Display for CertifyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (c, v) in &self.entries {
            write_certificate(f, c, v)?;
            writeln!(f)?;
        }
        writeln!(f, "Appendix A (α={}): {}", self.appendix_alpha, self.appendix)?;
        writeln!(f)?;
        write!(f, "{}", self.summary())
    }
}

/// Lemma 1, Lemma 2 and the standard inequalities at `α = 1/2`.
pub fn default_report() -> CertifyReport {
    let entries = [lemma1_certificate(), lemma2_certificate()]
        .into_iter()
        .map(|c| {
            let v = verify_certificate(&c);
            (c, v)
        })
        .collect();
    let alpha = rat(1, 2);
    let appendix = verify_appendix_a(&alpha).expect("1/2 is positive");
    CertifyReport {
        entries,
        appendix_alpha: alpha,
        appendix,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lemma_certificates_verify() {
        assert_eq!(verify_certificate(&lemma1_certificate()), Verdict::Valid);
        assert_eq!(verify_certificate(&lemma2_certificate()), Verdict::Valid);
    }

    #[test]
    fn perturbed_weight_is_rejected() {
        let c = lemma1_certificate_with_weights(rat(2, 1), rat(31, 10)).unwrap();
        match verify_certificate(&c) {
            Verdict::Invalid(Violation::Residual { coefficient, .. }) => assert!(!coefficient.is_zero()),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn range_violations_are_reported() {
        let mut c = lemma1_certificate();
        c.range = rat(1, 2);
        assert!(matches!(verify_certificate(&c), Verdict::Invalid(Violation::Negative { .. })));
        let mut c = lemma2_certificate();
        c.constraints[0].weight = -&c.constraints[0].weight;
        assert!(!verify_certificate(&c).is_valid());
    }

    #[test]
    fn appendix_a() {
        for alpha in [rat(1, 2), rat(1, 1), rat(7, 3), rat(1, 100)] {
            assert_eq!(verify_appendix_a(&alpha).unwrap(), Verdict::Valid);
        }
        assert!(verify_appendix_a(&rat(0, 1)).is_err());
        assert!(verify_appendix_a(&rat(-1, 2)).is_err());
        // parallelogram law at α = 1
        let c = &appendix_a_certificates(&rat(1, 1)).unwrap()[2];
        assert_eq!(c.squares[0].linear, linear_form("a - b", &c.basis).unwrap());
    }

    #[test]
    fn report_text() {
        let r = default_report();
        assert!(r.all_valid());
        assert_eq!(r.summary(), "Lemma 1: Valid; Lemma 2: Valid; Appendix A (α=1/2): Valid");
        let text = r.to_string();
        assert!(text.contains("× monotonicity at (x^{k+1}, x^k)"));
        assert!(text.contains("first sign change at q ∈"));
        assert!(text.contains("non-negative exactly for q ≤ √2/3"));
        assert!(text.contains("non-negative exactly for q ≤ 1/√5"));
    }
}
