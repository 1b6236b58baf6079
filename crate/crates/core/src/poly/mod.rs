//! Univariate complex polynomials in the disc coordinate `z`.

mod parse;

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use crate::linalg;
use crate::scalar::{cabs, creal, CMat, Cx, Real};

pub use parse::{parse_poly, parse_poly_with_param, PolyParseError};

/// Polynomial `sum_j c_j z^j` with complex coefficients. Trailing zero
/// coefficients are always trimmed, so the zero polynomial has no coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexPoly<T: Real> {
    coeffs: Vec<Cx<T>>,
}

impl<T: Real> ComplexPoly<T> {
    pub fn new(mut coeffs: Vec<Cx<T>>) -> Self {
        while coeffs.last().is_some_and(|c| c.re == T::zero() && c.im == T::zero()) {
            coeffs.pop();
        }
        Self { coeffs }
    }

    pub fn from_real(coeffs: &[f64]) -> Self {
        Self::new(coeffs.iter().map(|&c| creal(T::lit(c))).collect())
    }

    pub fn zero() -> Self {
        Self { coeffs: Vec::new() }
    }

    pub fn constant(c: Cx<T>) -> Self {
        Self::new(vec![c])
    }

    pub fn one() -> Self {
        Self::constant(creal(T::one()))
    }

    /// The coordinate function `z`.
    pub fn z() -> Self {
        Self::monomial(creal(T::one()), 1)
    }

    /// `c z^k`.
    pub fn monomial(c: Cx<T>, k: usize) -> Self {
        let mut coeffs = vec![Cx::new(T::zero(), T::zero()); k + 1];
        coeffs[k] = c;
        Self::new(coeffs)
    }

    pub fn coeffs(&self) -> &[Cx<T>] {
        &self.coeffs
    }

    /// Coefficient of `z^j` (zero past the degree).
    pub fn coeff(&self, j: usize) -> Cx<T> {
        self.coeffs.get(j).copied().unwrap_or_else(|| Cx::new(T::zero(), T::zero()))
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Order of vanishing at the origin (`None` for the zero polynomial).
    pub fn valuation(&self) -> Option<usize> {
        self.coeffs.iter().position(|c| c.re != T::zero() || c.im != T::zero())
    }

    pub fn eval(&self, z: Cx<T>) -> Cx<T> {
        self.coeffs
            .iter()
            .rev()
            .fold(Cx::new(T::zero(), T::zero()), |acc, &c| acc * z + c)
    }

    pub fn derivative(&self) -> Self {
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(j, &c)| c * creal(T::lit(j as f64)))
                .collect(),
        )
    }

    pub fn scale(&self, s: Cx<T>) -> Self {
        Self::new(self.coeffs.iter().map(|&c| c * s).collect())
    }

    /// `p(z^l)`.
    pub fn compose_power(&self, l: usize) -> Self {
        assert!(l >= 1);
        let mut out = vec![Cx::new(T::zero(), T::zero()); self.coeffs.len().saturating_sub(1) * l + 1];
        for (j, &c) in self.coeffs.iter().enumerate() {
            out[j * l] = c;
        }
        Self::new(out)
    }

    /// `z^k p(z)`.
    pub fn shift_up(&self, k: usize) -> Self {
        if self.is_zero() {
            return Self::zero();
        }
        let mut out = vec![Cx::new(T::zero(), T::zero()); k];
        out.extend_from_slice(&self.coeffs);
        Self::new(out)
    }

    /// Truncates to terms of degree `< n`.
    pub fn truncate(&self, n: usize) -> Self {
        Self::new(self.coeffs.iter().take(n).copied().collect())
    }

    /// Drops coefficients whose modulus is below `tol` times the largest one.
    pub fn chop(&self, rel_tol: T) -> Self {
        let m = self.max_coeff();
        Self::new(
            self.coeffs
                .iter()
                .map(|&c| if cabs(c) <= rel_tol * m { Cx::new(T::zero(), T::zero()) } else { c })
                .collect(),
        )
    }

    pub fn max_coeff(&self) -> T {
        self.coeffs.iter().fold(T::zero(), |a, &c| {
            let x = cabs(c);
            if x > a {
                x
            } else {
                a
            }
        })
    }

    /// Upper bound for `|p(z)|` on `|z| <= radius`.
    pub fn sup_bound(&self, radius: T) -> T {
        let mut acc = T::zero();
        let mut rk = T::one();
        for &c in &self.coeffs {
            acc += cabs(c) * rk;
            rk *= radius;
        }
        acc
    }

    /// Roots via eigenvalues of the companion matrix, each polished by a few
    /// Newton steps. Repeated roots are returned with multiplicity.
    pub fn roots(&self) -> Vec<Cx<T>> {
        let Some(d) = self.degree() else {
            return Vec::new();
        };
        if d == 0 {
            return Vec::new();
        }
        let lead = self.coeffs[d];
        let mut comp = CMat::<T>::zeros(d, d);
        for i in 1..d {
            comp[(i, i - 1)] = creal(T::one());
        }
        for i in 0..d {
            comp[(i, d - 1)] = -self.coeffs[i] / lead;
        }
        let dp = self.derivative();
        linalg::eigenvalues(&comp)
            .into_iter()
            .map(|z0| self.newton_polish(&dp, z0))
            .collect()
    }

    fn newton_polish(&self, dp: &Self, z0: Cx<T>) -> Cx<T> {
        let mut z = z0;
        let mut fz = cabs(self.eval(z));
        for _ in 0..8 {
            let d = dp.eval(z);
            if cabs(d) == T::zero() {
                break;
            }
            let cand = z - self.eval(z) / d;
            let fc = cabs(self.eval(cand));
            if fc < fz {
                z = cand;
                fz = fc;
            } else {
                break;
            }
        }
        z
    }
}

impl<T: Real> Add for &ComplexPoly<T> {
    type Output = ComplexPoly<T>;
    fn add(self, rhs: Self) -> ComplexPoly<T> {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        ComplexPoly::new((0..n).map(|j| self.coeff(j) + rhs.coeff(j)).collect())
    }
}

impl<T: Real> Sub for &ComplexPoly<T> {
    type Output = ComplexPoly<T>;
    fn sub(self, rhs: Self) -> ComplexPoly<T> {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        ComplexPoly::new((0..n).map(|j| self.coeff(j) - rhs.coeff(j)).collect())
    }
}

impl<T: Real> Mul for &ComplexPoly<T> {
    type Output = ComplexPoly<T>;
    fn mul(self, rhs: Self) -> ComplexPoly<T> {
        if self.is_zero() || rhs.is_zero() {
            return ComplexPoly::zero();
        }
        let mut out = vec![Cx::new(T::zero(), T::zero()); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            for (j, &b) in rhs.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        ComplexPoly::new(out)
    }
}

impl<T: Real> Neg for &ComplexPoly<T> {
    type Output = ComplexPoly<T>;
    fn neg(self) -> ComplexPoly<T> {
        ComplexPoly::new(self.coeffs.iter().map(|&c| -c).collect())
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl<T: Real> $tr for ComplexPoly<T> {
            type Output = ComplexPoly<T>;
            fn $m(self, rhs: Self) -> ComplexPoly<T> {
                (&self).$m(&rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl<T: Real> fmt::Display for ComplexPoly<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (j, c) in self.coeffs.iter().enumerate() {
            if c.re == T::zero() && c.im == T::zero() {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            let (re, im) = (c.re.to_f64(), c.im.to_f64());
            let cs = if im == 0.0 {
                format!("{re}")
            } else if re == 0.0 {
                format!("{im}i")
            } else {
                format!("({re}{:+}i)", im)
            };
            match j {
                0 => write!(f, "{cs}")?,
                1 => write!(f, "{cs}*z")?,
                _ => write!(f, "{cs}*z^{j}")?,
            }
        }
        Ok(())
    }
}
