//! Linear and quadratic forms over a symbol basis, and a small parser for
//! written quadratic expressions such as `||g_k - gt_{k-1}||^2 + 2*<a, b>`.

use std::fmt;

use num_traits::{One, Zero};

use crate::error::{Error, Result};

use super::poly::{rat, GammaPoly, Rational};

/// Ordered, distinct vector symbols.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SymbolBasis {
    names: Vec<String>,
}

impl SymbolBasis {
    pub fn new<S: Into<String>>(names: impl IntoIterator<Item = S>) -> Result<Self> {
        let names: Vec<String> = names.into_iter().map(Into::into).collect();
        for (i, n) in names.iter().enumerate() {
            if n == "q" || n == "γ" || n.is_empty() {
                return Err(Error::Expression(format!("reserved symbol name '{n}'")));
            }
            if names[..i].contains(n) {
                return Err(Error::Expression(format!("duplicate symbol '{n}'")));
            }
        }
        Ok(Self { names })
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn index(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }
}

/// `Σ cᵢ(q)·eᵢ` over a basis.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearForm {
    pub coeffs: Vec<GammaPoly>,
}

impl LinearForm {
    pub fn zero(n: usize) -> Self {
        Self {
            coeffs: vec![GammaPoly::zero(); n],
        }
    }

    pub fn unit(n: usize, i: usize) -> Self {
        let mut f = Self::zero(n);
        f.coeffs[i] = GammaPoly::int(1);
        f
    }

    fn zip(&self, o: &Self, op: impl Fn(&GammaPoly, &GammaPoly) -> GammaPoly) -> Self {
        Self {
            coeffs: self.coeffs.iter().zip(&o.coeffs).map(|(a, b)| op(a, b)).collect(),
        }
    }

    pub fn add(&self, o: &Self) -> Self {
        self.zip(o, |a, b| a + b)
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.zip(o, |a, b| a - b)
    }

    pub fn scale(&self, c: &GammaPoly) -> Self {
        Self {
            coeffs: self.coeffs.iter().map(|a| a * c).collect(),
        }
    }

    /// Value on concrete vectors (one per basis symbol) at `q`.
    pub fn eval(&self, vectors: &[Vec<Rational>], q: &Rational) -> Vec<Rational> {
        let d = vectors.first().map_or(0, Vec::len);
        let mut out = vec![Rational::zero(); d];
        for (c, v) in self.coeffs.iter().zip(vectors) {
            let c = c.eval(q);
            if !c.is_zero() {
                for (o, x) in out.iter_mut().zip(v) {
                    *o += &c * x;
                }
            }
        }
        out
    }
}

/// Quadratic form `Σᵢⱼ Mᵢⱼ(q)⟨eᵢ, eⱼ⟩` with `M` symmetric.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadForm {
    n: usize,
    entries: Vec<GammaPoly>,
}

impl QuadForm {
    pub fn zero(n: usize) -> Self {
        Self {
            n,
            entries: vec![GammaPoly::zero(); n * n],
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> &GammaPoly {
        &self.entries[i * self.n + j]
    }

    /// Adds `c` to both `(i, j)` and `(j, i)` (once on the diagonal).
    fn add_sym(&mut self, i: usize, j: usize, c: &GammaPoly) {
        let n = self.n;
        self.entries[i * n + j] = &self.entries[i * n + j] + c;
        if i != j {
            self.entries[j * n + i] = &self.entries[j * n + i] + c;
        }
    }

    /// `⟨a, b⟩` as a symmetric form.
    pub fn inner(a: &LinearForm, b: &LinearForm) -> Self {
        let n = a.coeffs.len();
        let mut out = Self::zero(n);
        let half = GammaPoly::constant(rat(1, 2));
        for i in 0..n {
            for j in 0..n {
                let c = &a.coeffs[i] * &b.coeffs[j];
                if !c.is_zero() {
                    let c = &c * &half;
                    let (r, s) = (i * n + j, j * n + i);
                    out.entries[r] = &out.entries[r] + &c;
                    out.entries[s] = &out.entries[s] + &c;
                }
            }
        }
        out
    }

    pub fn norm_sq(a: &LinearForm) -> Self {
        Self::inner(a, a)
    }

    /// Form with `M[i][j]` (and its mirror) set from triplets.
    pub fn from_entries(n: usize, triplets: impl IntoIterator<Item = (usize, usize, GammaPoly)>) -> Self {
        let mut out = Self::zero(n);
        for (i, j, c) in triplets {
            out.add_sym(i, j, &c);
        }
        out
    }

    pub fn add(&self, o: &Self) -> Self {
        Self {
            n: self.n,
            entries: self.entries.iter().zip(&o.entries).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn sub(&self, o: &Self) -> Self {
        Self {
            n: self.n,
            entries: self.entries.iter().zip(&o.entries).map(|(a, b)| a - b).collect(),
        }
    }

    pub fn scale(&self, c: &GammaPoly) -> Self {
        Self {
            n: self.n,
            entries: self.entries.iter().map(|a| a * c).collect(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(GammaPoly::is_zero)
    }

    pub fn is_symmetric(&self) -> bool {
        (0..self.n).all(|i| (0..i).all(|j| self.get(i, j) == self.get(j, i)))
    }

    /// First nonzero entry in row-major upper-triangular order.
    pub fn first_nonzero(&self) -> Option<(usize, usize, &GammaPoly)> {
        (0..self.n)
            .flat_map(|i| (i..self.n).map(move |j| (i, j)))
            .map(|(i, j)| (i, j, self.get(i, j)))
            .find(|(_, _, c)| !c.is_zero())
    }

    /// Value on concrete vectors at `q`.
    pub fn eval(&self, vectors: &[Vec<Rational>], q: &Rational) -> Rational {
        let mut acc = Rational::zero();
        for i in 0..self.n {
            for j in 0..self.n {
                let c = self.get(i, j);
                if !c.is_zero() {
                    let ip: Rational = vectors[i].iter().zip(&vectors[j]).map(|(a, b)| a * b).sum();
                    acc += c.eval(q) * ip;
                }
            }
        }
        acc
    }
}

/// A written expression over basis symbols and `q`.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(Rational),
    Q,
    Sym(String),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, u32),
    Neg(Box<Expr>),
    NormSq(Box<Expr>),
    Inner(Box<Expr>, Box<Expr>),
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(r) => write!(f, "{r}"),
            Expr::Q => write!(f, "q"),
            Expr::Sym(s) => write!(f, "{s}"),
            Expr::Add(a, b) => write!(f, "({a} + {b})"),
            Expr::Sub(a, b) => write!(f, "({a} - {b})"),
            Expr::Mul(a, b) => write!(f, "{a}*{b}"),
            Expr::Div(a, b) => write!(f, "{a}/{b}"),
            Expr::Pow(a, k) => write!(f, "{a}^{k}"),
            Expr::Neg(a) => write!(f, "-{a}"),
            Expr::NormSq(a) => write!(f, "||{a}||^2"),
            Expr::Inner(a, b) => write!(f, "<{a}, {b}>"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(Rational),
    Ident(String),
    Op(char),
    Bars,
}

fn tokenize(s: &str) -> Result<Vec<Tok>> {
    let chars: Vec<char> = s.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
        } else if c == '|' {
            if chars.get(i + 1) != Some(&'|') {
                return Err(Error::Expression(format!("single '|' at {i}")));
            }
            out.push(Tok::Bars);
            i += 2;
        } else if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let digits: String = chars[start..i].iter().collect();
            let n: num_bigint::BigInt = digits.parse().map_err(|_| Error::Expression(format!("bad number {digits}")))?;
            out.push(Tok::Num(Rational::from_integer(n)));
        } else if c.is_alphabetic() {
            let start = i;
            while i < chars.len() && (chars[i].is_alphabetic() || chars[i].is_ascii_digit() || chars[i] == '_') {
                if chars[i] == '_' && chars.get(i + 1) == Some(&'{') {
                    let close = chars[i..]
                        .iter()
                        .position(|&c| c == '}')
                        .ok_or_else(|| Error::Expression("unclosed '{' in a name".into()))?;
                    i += close + 1;
                } else {
                    i += 1;
                }
            }
            out.push(Tok::Ident(chars[start..i].iter().collect()));
        } else {
            let op = match c {
                '⟨' => '<',
                '⟩' => '>',
                '−' => '-',
                '·' => '*',
                '²' => {
                    out.push(Tok::Op('^'));
                    out.push(Tok::Num(rat(2, 1)));
                    i += 1;
                    continue;
                }
                c if "+-*/^(),<>".contains(c) => c,
                c => return Err(Error::Expression(format!("unexpected character '{c}'"))),
            };
            out.push(Tok::Op(op));
            i += 1;
        }
    }
    Ok(out)
}

struct Parser {
    toks: Vec<Tok>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos)
    }

    fn eat_op(&mut self, c: char) -> bool {
        if self.peek() == Some(&Tok::Op(c)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect_op(&mut self, c: char) -> Result<()> {
        if self.eat_op(c) {
            Ok(())
        } else {
            Err(Error::Expression(format!("expected '{c}' at token {}", self.pos)))
        }
    }

    fn sum(&mut self) -> Result<Expr> {
        let mut e = if self.eat_op('-') {
            Expr::Neg(Box::new(self.product()?))
        } else {
            self.eat_op('+');
            self.product()?
        };
        loop {
            if self.eat_op('+') {
                e = Expr::Add(Box::new(e), Box::new(self.product()?));
            } else if self.eat_op('-') {
                e = Expr::Sub(Box::new(e), Box::new(self.product()?));
            } else {
                return Ok(e);
            }
        }
    }

    fn product(&mut self) -> Result<Expr> {
        let mut e = self.power()?;
        loop {
            if self.eat_op('*') {
                e = Expr::Mul(Box::new(e), Box::new(self.power()?));
            } else if self.eat_op('/') {
                e = Expr::Div(Box::new(e), Box::new(self.power()?));
            } else if matches!(self.peek(), Some(Tok::Num(_) | Tok::Ident(_)) | Some(Tok::Op('(' | '<'))) {
                // juxtaposition, as in `2q` or `q<a, b>`; norms need an explicit `*`
                e = Expr::Mul(Box::new(e), Box::new(self.power()?));
            } else {
                return Ok(e);
            }
        }
    }

    fn power(&mut self) -> Result<Expr> {
        let base = self.atom()?;
        if self.eat_op('^') {
            match self.toks.get(self.pos).cloned() {
                Some(Tok::Num(n)) if n.is_integer() => {
                    self.pos += 1;
                    let k: u32 = n
                        .to_integer()
                        .try_into()
                        .map_err(|_| Error::Expression("exponent too large".into()))?;
                    Ok(Expr::Pow(Box::new(base), k))
                }
                _ => Err(Error::Expression("exponent must be a nonnegative integer".into())),
            }
        } else {
            Ok(base)
        }
    }

    fn atom(&mut self) -> Result<Expr> {
        let tok = self.peek().cloned().ok_or_else(|| Error::Expression("unexpected end of expression".into()))?;
        self.pos += 1;
        match tok {
            Tok::Num(n) => Ok(Expr::Num(n)),
            Tok::Ident(s) if s == "q" || s == "γ" || s == "gamma" => Ok(Expr::Q),
            Tok::Ident(s) => Ok(Expr::Sym(s)),
            Tok::Op('(') => {
                let e = self.sum()?;
                self.expect_op(')')?;
                Ok(e)
            }
            Tok::Op('-') => Ok(Expr::Neg(Box::new(self.power()?))),
            Tok::Op('<') => {
                let a = self.sum()?;
                self.expect_op(',')?;
                let b = self.sum()?;
                self.expect_op('>')?;
                Ok(Expr::Inner(Box::new(a), Box::new(b)))
            }
            Tok::Bars => {
                let a = self.sum()?;
                if self.peek() != Some(&Tok::Bars) {
                    return Err(Error::Expression("unclosed norm".into()));
                }
                self.pos += 1;
                self.expect_op('^')?;
                match self.toks.get(self.pos) {
                    Some(Tok::Num(n)) if *n == rat(2, 1) => self.pos += 1,
                    _ => return Err(Error::Expression("norms must be squared".into())),
                }
                Ok(Expr::NormSq(Box::new(a)))
            }
            other => Err(Error::Expression(format!("unexpected token {other:?}"))),
        }
    }
}

pub fn parse_expr(s: &str) -> Result<Expr> {
    let mut p = Parser {
        toks: tokenize(s)?,
        pos: 0,
    };
    let e = p.sum()?;
    if p.pos != p.toks.len() {
        return Err(Error::Expression(format!("trailing input at token {}", p.pos)));
    }
    Ok(e)
}

/// Compiled value of a subexpression, graded by degree in the vectors.
enum Val {
    Scalar(GammaPoly),
    Linear(LinearForm),
    Quad(QuadForm),
}

fn compile(e: &Expr, basis: &SymbolBasis) -> Result<Val> {
    let n = basis.len();
    let not_quadratic = || Error::Expression(format!("'{e}' is not a quadratic form in the basis"));
    Ok(match e {
        Expr::Num(r) => Val::Scalar(GammaPoly::constant(r.clone())),
        Expr::Q => Val::Scalar(GammaPoly::q()),
        Expr::Sym(s) => {
            let i = basis
                .index(s)
                .ok_or_else(|| Error::Expression(format!("unknown symbol '{s}'")))?;
            Val::Linear(LinearForm::unit(n, i))
        }
        Expr::Neg(a) => match compile(a, basis)? {
            Val::Scalar(p) => Val::Scalar(-p),
            Val::Linear(l) => Val::Linear(l.scale(&GammaPoly::int(-1))),
            Val::Quad(m) => Val::Quad(m.scale(&GammaPoly::int(-1))),
        },
        Expr::Add(a, b) | Expr::Sub(a, b) => {
            let sub = matches!(e, Expr::Sub(..));
            match (compile(a, basis)?, compile(b, basis)?) {
                (Val::Scalar(x), Val::Scalar(y)) => Val::Scalar(if sub { x - y } else { x + y }),
                (Val::Linear(x), Val::Linear(y)) => Val::Linear(if sub { x.sub(&y) } else { x.add(&y) }),
                (Val::Quad(x), Val::Quad(y)) => Val::Quad(if sub { x.sub(&y) } else { x.add(&y) }),
                _ => return Err(not_quadratic()),
            }
        }
        Expr::Mul(a, b) => match (compile(a, basis)?, compile(b, basis)?) {
            (Val::Scalar(x), Val::Scalar(y)) => Val::Scalar(x * y),
            (Val::Scalar(x), Val::Linear(l)) | (Val::Linear(l), Val::Scalar(x)) => Val::Linear(l.scale(&x)),
            (Val::Scalar(x), Val::Quad(m)) | (Val::Quad(m), Val::Scalar(x)) => Val::Quad(m.scale(&x)),
            _ => return Err(not_quadratic()),
        },
        Expr::Div(a, b) => {
            let d = match compile(b, basis)? {
                Val::Scalar(p) => p.as_constant().filter(|c| !c.is_zero()),
                _ => None,
            }
            .ok_or_else(|| Error::Expression(format!("'{b}' is not a nonzero constant divisor")))?;
            let inv = GammaPoly::constant(Rational::one() / d);
            match compile(a, basis)? {
                Val::Scalar(p) => Val::Scalar(p * inv),
                Val::Linear(l) => Val::Linear(l.scale(&inv)),
                Val::Quad(m) => Val::Quad(m.scale(&inv)),
            }
        }
        Expr::Pow(a, k) => match compile(a, basis)? {
            Val::Scalar(p) => Val::Scalar((0..*k).fold(GammaPoly::int(1), |acc, _| &acc * &p)),
            _ => return Err(not_quadratic()),
        },
        Expr::NormSq(a) => match compile(a, basis)? {
            Val::Linear(l) => Val::Quad(QuadForm::norm_sq(&l)),
            _ => return Err(not_quadratic()),
        },
        Expr::Inner(a, b) => match (compile(a, basis)?, compile(b, basis)?) {
            (Val::Linear(x), Val::Linear(y)) => Val::Quad(QuadForm::inner(&x, &y)),
            _ => return Err(not_quadratic()),
        },
    })
}

/// Compiles a quadratic expression to its exact Gram-coefficient matrix.
pub fn build_quadform(expr: &Expr, basis: &SymbolBasis) -> Result<QuadForm> {
    match compile(expr, basis)? {
        Val::Quad(m) => Ok(m),
        Val::Scalar(p) if p.is_zero() => Ok(QuadForm::zero(basis.len())),
        _ => Err(Error::Expression(format!("'{expr}' is not a quadratic form in the basis"))),
    }
}

/// Parses and compiles in one step.
pub fn quadform(text: &str, basis: &SymbolBasis) -> Result<QuadForm> {
    build_quadform(&parse_expr(text)?, basis)
}

/// Parses a vector-valued expression into a linear form.
pub fn linear_form(text: &str, basis: &SymbolBasis) -> Result<LinearForm> {
    match compile(&parse_expr(text)?, basis)? {
        Val::Linear(l) => Ok(l),
        _ => Err(Error::Expression(format!("'{text}' is not linear in the basis"))),
    }
}

/// Evaluated value of an expression node: a scalar or a concrete vector.
enum Concrete {
    Scalar(Rational),
    Vector(Vec<Rational>),
}

/// Direct evaluation of `expr` on concrete vectors, without compiling.
pub fn eval_expr(expr: &Expr, basis: &SymbolBasis, vectors: &[Vec<Rational>], q: &Rational) -> Result<Rational> {
    fn go(e: &Expr, b: &SymbolBasis, v: &[Vec<Rational>], q: &Rational) -> Result<Concrete> {
        use Concrete::*;
        let bad = || Error::Expression(format!("cannot evaluate '{e}'"));
        Ok(match e {
            Expr::Num(r) => Scalar(r.clone()),
            Expr::Q => Scalar(q.clone()),
            Expr::Sym(s) => Vector(v[b.index(s).ok_or_else(bad)?].clone()),
            Expr::Neg(a) => match go(a, b, v, q)? {
                Scalar(x) => Scalar(-x),
                Vector(x) => Vector(x.into_iter().map(|t| -t).collect()),
            },
            Expr::Add(x, y) | Expr::Sub(x, y) => {
                let s = if matches!(e, Expr::Sub(..)) { -Rational::one() } else { Rational::one() };
                match (go(x, b, v, q)?, go(y, b, v, q)?) {
                    (Scalar(x), Scalar(y)) => Scalar(x + s * y),
                    (Vector(x), Vector(y)) => Vector(x.into_iter().zip(y).map(|(a, c)| a + &s * c).collect()),
                    _ => return Err(bad()),
                }
            }
            Expr::Mul(x, y) => match (go(x, b, v, q)?, go(y, b, v, q)?) {
                (Scalar(x), Scalar(y)) => Scalar(x * y),
                (Scalar(c), Vector(x)) | (Vector(x), Scalar(c)) => Vector(x.into_iter().map(|t| t * &c).collect()),
                _ => return Err(bad()),
            },
            Expr::Div(x, y) => match (go(x, b, v, q)?, go(y, b, v, q)?) {
                (_, Scalar(d)) if d.is_zero() => return Err(bad()),
                (Scalar(x), Scalar(d)) => Scalar(x / d),
                (Vector(x), Scalar(d)) => Vector(x.into_iter().map(|t| t / &d).collect()),
                _ => return Err(bad()),
            },
            Expr::Pow(x, k) => match go(x, b, v, q)? {
                Scalar(x) => Scalar((0..*k).fold(Rational::one(), |acc, _| acc * &x)),
                _ => return Err(bad()),
            },
            Expr::NormSq(x) => match go(x, b, v, q)? {
                Vector(x) => Scalar(x.iter().map(|t| t * t).sum()),
                _ => return Err(bad()),
            },
            Expr::Inner(x, y) => match (go(x, b, v, q)?, go(y, b, v, q)?) {
                (Vector(x), Vector(y)) => Scalar(x.iter().zip(&y).map(|(a, c)| a * c).sum()),
                _ => return Err(bad()),
            },
        })
    }
    match go(expr, basis, vectors, q)? {
        Concrete::Scalar(s) => Ok(s),
        Concrete::Vector(_) => Err(Error::Expression(format!("'{expr}' is vector-valued"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn simple_forms() {
        let b = SymbolBasis::new(["g_k"]).unwrap();
        let m = quadform("||g_k||^2", &b).unwrap();
        assert_eq!(m.get(0, 0), &GammaPoly::int(1));

        let b = SymbolBasis::new(["a", "b"]).unwrap();
        let m = quadform("2*<a, b>", &b).unwrap();
        assert!(m.get(0, 0).is_zero() && m.get(1, 1).is_zero());
        assert_eq!(m.get(0, 1), &GammaPoly::int(1));
        assert_eq!(m.get(1, 0), &GammaPoly::int(1));

        let b = SymbolBasis::new(["gt_{k-1}", "gt_k"]).unwrap();
        let m = quadform("||q(gt_{k-1} - gt_k)||^2", &b).unwrap();
        let q2 = GammaPoly::monomial(rat(1, 1), 2);
        assert_eq!(m.get(0, 0), &q2);
        assert_eq!(m.get(1, 1), &q2);
        assert_eq!(m.get(0, 1), &-&q2);
        assert!(m.is_symmetric());
    }

    #[test]
    fn rejects_non_quadratic() {
        let b = SymbolBasis::new(["a", "b"]).unwrap();
        for bad in ["a", "||a||^2 + a", "<a, b>*<a, b>", "||a||^2 + 1", "a/b", "||a||^3", "zz", "(a"] {
            assert!(quadform(bad, &b).is_err(), "{bad}");
        }
        assert!(SymbolBasis::new(["a", "a"]).is_err());
        assert!(SymbolBasis::new(["q"]).is_err());
    }

    #[test]
    fn compiled_matches_direct_evaluation() {
        let b = SymbolBasis::new(["x_{k-1}", "x_k", "gt_k", "g_k"]).unwrap();
        let text = "q^2*||x_k - 2x_{k-1}||^2 - (3/7)<g_k + q gt_k, x_k> + (2/9 - q^2)*||gt_k - g_k||^2 - 5<g_k, g_k>/3";
        let e = parse_expr(text).unwrap();
        let m = build_quadform(&e, &b).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let r = |rng: &mut ChaCha8Rng| rat(rng.random_range(-20..=20), rng.random_range(1..=9));
        for _ in 0..20 {
            let v: Vec<Vec<Rational>> = (0..4).map(|_| (0..3).map(|_| r(&mut rng)).collect()).collect();
            let q = r(&mut rng);
            assert_eq!(m.eval(&v, &q), eval_expr(&e, &b, &v, &q).unwrap());
        }
    }

    #[test]
    fn unicode_spelling() {
        let b = SymbolBasis::new(["a", "b"]).unwrap();
        assert_eq!(quadform("γ²·⟨a, b⟩ − ||b||^2", &b).unwrap(), quadform("q^2*<a,b> - ||b||^2", &b).unwrap());
    }
}
