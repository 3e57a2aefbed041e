//! Univariate polynomials in `q = γL` with exact rational coefficients.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

pub type Rational = BigRational;

/// `a/b` as an exact rational.
pub fn rat(a: i64, b: i64) -> Rational {
    BigRational::new(BigInt::from(a), BigInt::from(b))
}

/// Dense coefficients, lowest degree first, with no trailing zeros.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct GammaPoly {
    coeffs: Vec<Rational>,
}

impl GammaPoly {
    pub fn zero() -> Self {
        Self { coeffs: Vec::new() }
    }

    pub fn constant(c: Rational) -> Self {
        Self::from_coeffs(vec![c])
    }

    pub fn int(c: i64) -> Self {
        Self::constant(rat(c, 1))
    }

    /// `c·qᵏ`.
    pub fn monomial(c: Rational, k: usize) -> Self {
        let mut v = vec![Rational::zero(); k + 1];
        v[k] = c;
        Self::from_coeffs(v)
    }

    /// The variable `q`.
    pub fn q() -> Self {
        Self::monomial(Rational::one(), 1)
    }

    pub fn from_coeffs(mut coeffs: Vec<Rational>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        Self { coeffs }
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    /// Coefficient of `qᵏ` (zero past the degree).
    pub fn coeff(&self, k: usize) -> Rational {
        self.coeffs.get(k).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree, or `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn as_constant(&self) -> Option<Rational> {
        match self.coeffs.len() {
            0 => Some(Rational::zero()),
            1 => Some(self.coeffs[0].clone()),
            _ => None,
        }
    }

    fn lead(&self) -> Rational {
        self.coeffs.last().cloned().unwrap_or_else(Rational::zero)
    }

    pub fn eval(&self, x: &Rational) -> Rational {
        let mut acc = Rational::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * x + c;
        }
        acc
    }

    pub fn scale(&self, c: &Rational) -> Self {
        Self::from_coeffs(self.coeffs.iter().map(|a| a * c).collect())
    }

    pub fn derivative(&self) -> Self {
        Self::from_coeffs(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, c)| c * Rational::from_integer(BigInt::from(k)))
                .collect(),
        )
    }

    /// Quotient and remainder; panics on a zero divisor.
    pub fn div_rem(&self, d: &Self) -> (Self, Self) {
        let dd = d.degree().expect("division by the zero polynomial");
        let lead = d.lead();
        let mut r = self.coeffs.clone();
        let mut quot = vec![Rational::zero(); r.len().saturating_sub(dd).max(1)];
        while r.len() > dd && !r.is_empty() {
            let k = r.len() - 1 - dd;
            let c = r.last().unwrap() / &lead;
            for (i, di) in d.coeffs.iter().enumerate() {
                r[k + i] = &r[k + i] - &c * di;
            }
            quot[k] = c;
            r.pop();
            while r.last().is_some_and(|c| c.is_zero()) {
                r.pop();
            }
        }
        (Self::from_coeffs(quot), Self::from_coeffs(r))
    }

    fn monic(&self) -> Self {
        if self.is_zero() {
            return self.clone();
        }
        self.scale(&(Rational::one() / self.lead()))
    }

    pub fn gcd(&self, other: &Self) -> Self {
        let (mut a, mut b) = (self.clone(), other.clone());
        while !b.is_zero() {
            let r = a.div_rem(&b).1;
            a = b;
            b = r;
        }
        a.monic()
    }

    /// Removes the factor `qᵐ` of largest `m`.
    fn strip_origin(&self) -> Self {
        let m = self.coeffs.iter().take_while(|c| c.is_zero()).count();
        Self::from_coeffs(self.coeffs[m..].to_vec())
    }

    /// Product of the factors of odd multiplicity (Yun's squarefree
    /// decomposition), monic. Its roots are exactly where `self` changes sign.
    pub fn odd_part(&self) -> Self {
        if self.degree().unwrap_or(0) == 0 {
            return Self::int(1);
        }
        let d = self.derivative();
        let mut a = self.gcd(&d);
        let mut b = self.div_rem(&a).0;
        let mut c = d.div_rem(&a).0;
        let mut out = Self::int(1);
        let mut mult = 1;
        loop {
            let c2 = &c - &b.derivative();
            if b.degree().unwrap_or(0) == 0 {
                break;
            }
            a = b.gcd(&c2);
            if mult % 2 == 1 {
                out = &out * &a;
            }
            b = b.div_rem(&a).0;
            c = c2.div_rem(&a).0;
            mult += 1;
        }
        out.monic()
    }

    fn sturm_chain(&self) -> Vec<Self> {
        let mut chain = vec![self.clone(), self.derivative()];
        while !chain.last().unwrap().is_zero() {
            let n = chain.len();
            let r = chain[n - 2].div_rem(&chain[n - 1]).1;
            chain.push(-&r);
        }
        chain.pop();
        chain
    }

    fn sign_changes(chain: &[Self], x: &Rational) -> usize {
        let signs: Vec<bool> = chain
            .iter()
            .map(|p| p.eval(x))
            .filter(|v| !v.is_zero())
            .map(|v| v.is_positive())
            .collect();
        signs.windows(2).filter(|w| w[0] != w[1]).count()
    }

    /// Number of distinct real roots in `(a, b]` (Sturm's theorem).
    pub fn count_roots(&self, a: &Rational, b: &Rational) -> usize {
        if self.degree().unwrap_or(0) == 0 {
            return 0;
        }
        let chain = self.sturm_chain();
        Self::sign_changes(&chain, a).saturating_sub(Self::sign_changes(&chain, b))
    }

    /// Decides `p(q) ≥ 0` for all `q ∈ (0, b]`.
    ///
    /// Coefficientwise when every coefficient is nonnegative; otherwise the
    /// sign near zero is read off the lowest nonzero coefficient and the
    /// sign-changing roots in `(0, b)` are counted exactly.
    pub fn nonnegative_on(&self, b: &Rational) -> bool {
        if self.coeffs.iter().all(|c| !c.is_negative()) {
            return true;
        }
        let p = self.strip_origin();
        if p.coeffs[0].is_negative() {
            return false;
        }
        let odd = p.odd_part();
        let mut crossings = odd.count_roots(&Rational::zero(), b);
        if odd.eval(b).is_zero() {
            crossings -= 1;
        }
        crossings == 0
    }

    /// A rational interval of width at most `width` containing the smallest
    /// positive root, if there is one below `hi`.
    pub fn first_positive_root(&self, hi: &Rational, width: &Rational) -> Option<(Rational, Rational)> {
        let p = self.strip_origin();
        let (mut lo, mut up) = (Rational::zero(), hi.clone());
        if p.count_roots(&lo, &up) == 0 {
            return None;
        }
        while &up - &lo > *width {
            let mid = (&lo + &up) / rat(2, 1);
            if p.count_roots(&lo, &mid) > 0 {
                up = mid;
            } else {
                lo = mid;
            }
        }
        Some((lo, up))
    }
}

impl fmt::Debug for GammaPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for GammaPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (k, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let mag = c.abs();
            if first {
                if c.is_negative() {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if c.is_negative() { '-' } else { '+' })?;
            }
            first = false;
            match k {
                0 => write!(f, "{mag}")?,
                _ => {
                    if !mag.is_one() {
                        write!(f, "{mag}·")?;
                    }
                    write!(f, "q")?;
                    if k > 1 {
                        write!(f, "^{k}")?;
                    }
                }
            }
        }
        Ok(())
    }
}

impl Add for &GammaPoly {
    type Output = GammaPoly;
    fn add(self, o: &GammaPoly) -> GammaPoly {
        let n = self.coeffs.len().max(o.coeffs.len());
        GammaPoly::from_coeffs((0..n).map(|k| self.coeff(k) + o.coeff(k)).collect())
    }
}

impl Sub for &GammaPoly {
    type Output = GammaPoly;
    fn sub(self, o: &GammaPoly) -> GammaPoly {
        let n = self.coeffs.len().max(o.coeffs.len());
        GammaPoly::from_coeffs((0..n).map(|k| self.coeff(k) - o.coeff(k)).collect())
    }
}

impl Mul for &GammaPoly {
    type Output = GammaPoly;
    fn mul(self, o: &GammaPoly) -> GammaPoly {
        if self.is_zero() || o.is_zero() {
            return GammaPoly::zero();
        }
        let mut v = vec![Rational::zero(); self.coeffs.len() + o.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in o.coeffs.iter().enumerate() {
                v[i + j] += a * b;
            }
        }
        GammaPoly::from_coeffs(v)
    }
}

impl Neg for &GammaPoly {
    type Output = GammaPoly;
    fn neg(self) -> GammaPoly {
        GammaPoly::from_coeffs(self.coeffs.iter().map(|c| -c).collect())
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr for GammaPoly {
            type Output = GammaPoly;
            fn $m(self, o: GammaPoly) -> GammaPoly {
                (&self).$m(&o)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl Neg for GammaPoly {
    type Output = GammaPoly;
    fn neg(self) -> GammaPoly {
        -&self
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(c: &[(i64, i64)]) -> GammaPoly {
        GammaPoly::from_coeffs(c.iter().map(|&(a, b)| rat(a, b)).collect())
    }

    #[test]
    fn arithmetic_and_display() {
        let a = p(&[(-2, 9), (0, 1), (1, 1)]);
        assert_eq!(a.to_string(), "q^2 - 2/9");
        assert_eq!((&a * &GammaPoly::int(3)).to_string(), "3·q^2 - 2/3");
        assert_eq!((&a - &a), GammaPoly::zero());
        assert_eq!(a.eval(&rat(1, 3)), rat(-1, 9));
        let (quot, r) = p(&[(-1, 1), (0, 1), (1, 1)]).div_rem(&p(&[(-1, 1), (1, 1)]));
        assert_eq!(quot, p(&[(1, 1), (1, 1)]));
        assert!(r.is_zero());
    }

    #[test]
    fn sign_on_interval() {
        let third = rat(1, 3);
        // 2/9 − q² changes sign at √2/3 ≈ 0.4714
        let a = p(&[(2, 9), (0, 1), (-1, 1)]);
        assert!(a.nonnegative_on(&third));
        assert!(!a.nonnegative_on(&rat(1, 2)));
        // (q − 1/4)² touches zero without crossing
        let sq = &p(&[(-1, 4), (1, 1)]) * &p(&[(-1, 4), (1, 1)]);
        assert!(sq.nonnegative_on(&rat(1, 1)));
        // q(q − 1/4)² (1/2 − q) has a simple root at 1/2
        let c = &(&sq * &GammaPoly::q()) * &p(&[(1, 2), (-1, 1)]);
        assert!(c.nonnegative_on(&rat(1, 2)));
        assert!(!c.nonnegative_on(&rat(3, 4)));
        assert!(!p(&[(-1, 100), (1, 1)]).nonnegative_on(&third));
        assert!(GammaPoly::q().nonnegative_on(&third));
    }

    #[test]
    fn root_bracket() {
        let a = p(&[(2, 9), (0, 1), (-1, 1)]);
        let (lo, hi) = a.first_positive_root(&rat(1, 1), &rat(1, 10000)).unwrap();
        assert!(&lo * &lo < rat(2, 9) && &hi * &hi >= rat(2, 9));
        assert!(p(&[(1, 1), (1, 1)]).first_positive_root(&rat(1, 1), &rat(1, 10)).is_none());
    }

    #[test]
    fn odd_part_of_mixed_multiplicities() {
        // (q−1)²(q−2)³ → odd part q − 2
        let f = |r: i64| p(&[(-r, 1), (1, 1)]);
        let e = &(&(&f(1) * &f(1)) * &(&f(2) * &f(2))) * &f(2);
        assert_eq!(e.odd_part(), f(2));
    }
}
