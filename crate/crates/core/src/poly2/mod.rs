//! Sparse bivariate polynomials with exact rational vector coefficients.
//!
//! A [`Poly2`] of dimension `d` maps exponent pairs `(j, k)` to coefficient
//! vectors in Q^d and represents `sum c_jk u^j v^k`. The term map never stores a
//! zero vector, so structural equality is polynomial equality.

pub(crate) mod mat;

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::rational::{format_rational, int, to_f64, Rational};

pub use mat::{Kron4, PolyMat2};

/// Exponent pair `(j, k)` of the monomial `u^j v^k`.
pub type Exp = (u32, u32);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Var {
    U,
    V,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Poly2 {
    dim: usize,
    terms: BTreeMap<Exp, Vec<Rational>>,
}

fn is_zero_vec(v: &[Rational]) -> bool {
    v.iter().all(Zero::is_zero)
}

impl Poly2 {
    pub fn zero(dim: usize) -> Self {
        assert!(dim > 0, "polynomial dimension must be positive");
        Poly2 {
            dim,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(c: Rational) -> Self {
        Self::monomial(0, 0, c)
    }

    /// The scalar monomial `c u^j v^k`.
    pub fn monomial(j: u32, k: u32, c: Rational) -> Self {
        let mut p = Self::zero(1);
        if !c.is_zero() {
            p.terms.insert((j, k), vec![c]);
        }
        p
    }

    pub fn u() -> Self {
        Self::monomial(1, 0, Rational::one())
    }

    pub fn v() -> Self {
        Self::monomial(0, 1, Rational::one())
    }

    /// Builds a polynomial from `(exponent, coefficient vector)` pairs.
    /// Repeated exponents are summed.
    pub fn from_terms<I>(dim: usize, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Exp, Vec<Rational>)>,
    {
        if dim == 0 {
            return Err(Error::ZeroDimension);
        }
        let mut p = Self::zero(dim);
        for (e, c) in terms {
            if c.len() != dim {
                return Err(Error::CoefficientLength {
                    expected: dim,
                    got: c.len(),
                });
            }
            p.accumulate(e, &c, None);
        }
        p.prune();
        Ok(p)
    }

    /// Scalar polynomial from `(exponent, coefficient)` pairs.
    pub fn scalar<I>(terms: I) -> Self
    where
        I: IntoIterator<Item = (Exp, Rational)>,
    {
        Self::from_terms(1, terms.into_iter().map(|(e, c)| (e, vec![c])))
            .expect("scalar terms have length 1")
    }

    /// Stacks scalar polynomials into a vector-valued one.
    pub fn stack(components: &[Poly2]) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::ZeroDimension);
        }
        let dim = components.len();
        let mut out = Self::zero(dim);
        for (i, c) in components.iter().enumerate() {
            if c.dim != 1 {
                return Err(Error::DimensionMismatch(1, c.dim));
            }
            for (e, v) in &c.terms {
                out.terms
                    .entry(*e)
                    .or_insert_with(|| vec![Rational::zero(); dim])[i] = v[0].clone();
            }
        }
        Ok(out)
    }

    pub fn component(&self, i: usize) -> Poly2 {
        assert!(
            i < self.dim,
            "component {i} out of range for dimension {}",
            self.dim
        );
        Poly2::scalar(self.terms.iter().map(|(e, v)| (*e, v[i].clone())))
    }

    pub fn components(&self) -> Vec<Poly2> {
        (0..self.dim).map(|i| self.component(i)).collect()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Exp, &Vec<Rational>)> {
        self.terms.iter()
    }

    pub fn coeff(&self, j: u32, k: u32) -> Option<&[Rational]> {
        self.terms.get(&(j, k)).map(Vec::as_slice)
    }

    /// Coefficient vector of `u^j v^k`, zero-filled when absent.
    pub fn coeff_vec(&self, j: u32, k: u32) -> Vec<Rational> {
        self.coeff(j, k)
            .map(<[Rational]>::to_vec)
            .unwrap_or_else(|| vec![Rational::zero(); self.dim])
    }

    /// Component `i` of the coefficient of `u^j v^k`.
    pub fn coeff_at(&self, j: u32, k: u32, i: usize) -> Rational {
        self.coeff(j, k)
            .map(|c| c[i].clone())
            .unwrap_or_else(Rational::zero)
    }

    /// First-component coefficient; the natural accessor for scalar polynomials.
    pub fn scalar_coeff(&self, j: u32, k: u32) -> Rational {
        self.coeff_at(j, k, 0)
    }

    pub fn max_degree(&self, var: Var) -> u32 {
        self.terms
            .keys()
            .map(|&(j, k)| if var == Var::U { j } else { k })
            .max()
            .unwrap_or(0)
    }

    pub fn total_degree(&self) -> u32 {
        self.terms.keys().map(|&(j, k)| j + k).max().unwrap_or(0)
    }

    fn accumulate(&mut self, e: Exp, c: &[Rational], factor: Option<&Rational>) {
        let dim = self.dim;
        let slot = self
            .terms
            .entry(e)
            .or_insert_with(|| vec![Rational::zero(); dim]);
        for (s, x) in slot.iter_mut().zip(c) {
            match factor {
                Some(f) => *s += x * f,
                None => *s += x,
            }
        }
    }

    fn prune(&mut self) {
        self.terms.retain(|_, v| !is_zero_vec(v));
    }

    pub fn try_add(&self, other: &Poly2) -> Result<Poly2> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch(self.dim, other.dim));
        }
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.accumulate(*e, c, None);
        }
        out.prune();
        Ok(out)
    }

    pub fn try_sub(&self, other: &Poly2) -> Result<Poly2> {
        self.try_add(&-other)
    }

    pub fn scale(&self, s: &Rational) -> Poly2 {
        if s.is_zero() {
            return Poly2::zero(self.dim);
        }
        Poly2 {
            dim: self.dim,
            terms: self
                .terms
                .iter()
                .map(|(e, c)| (*e, c.iter().map(|x| x * s).collect()))
                .collect(),
        }
    }

    /// Product where at least one factor is scalar; scalar times vector acts
    /// componentwise.
    pub fn try_mul(&self, other: &Poly2) -> Result<Poly2> {
        self.mul_truncated(other, None)
    }

    /// Product restricted to monomials of total degree `<= max_total`.
    ///
    /// Every monomial of a product only draws on factor terms of no larger
    /// total degree, so truncating the result is the same as truncating the
    /// exact product.
    pub fn mul_truncated(&self, other: &Poly2, max_total: Option<u32>) -> Result<Poly2> {
        let (s, vec) = match (self.dim, other.dim) {
            (1, _) => (self, other),
            (_, 1) => (other, self),
            (a, b) => return Err(Error::VectorProduct(a, b)),
        };
        let mut out = Poly2::zero(vec.dim);
        for (&(j1, k1), a) in &s.terms {
            for (&(j2, k2), b) in &vec.terms {
                let e = (j1 + j2, k1 + k2);
                if max_total.is_some_and(|m| e.0 + e.1 > m) {
                    continue;
                }
                out.accumulate(e, b, Some(&a[0]));
            }
        }
        out.prune();
        Ok(out)
    }

    pub fn diff(&self, var: Var) -> Poly2 {
        let mut out = Poly2::zero(self.dim);
        for (&(j, k), c) in &self.terms {
            let (n, e) = match var {
                Var::U if j > 0 => (j, (j - 1, k)),
                Var::V if k > 0 => (k, (j, k - 1)),
                _ => continue,
            };
            let n = int(n as i64);
            out.terms.insert(e, c.iter().map(|x| x * &n).collect());
        }
        out
    }

    /// Exact evaluation at `(u, v)`.
    pub fn eval(&self, u: &Rational, v: &Rational) -> Vec<Rational> {
        let upow = powers(u, self.max_degree(Var::U));
        let vpow = powers(v, self.max_degree(Var::V));
        let mut acc = vec![Rational::zero(); self.dim];
        for (&(j, k), c) in &self.terms {
            let m = &upow[j as usize] * &vpow[k as usize];
            for (a, x) in acc.iter_mut().zip(c) {
                *a += x * &m;
            }
        }
        acc
    }

    pub fn eval_scalar(&self, u: &Rational, v: &Rational) -> Rational {
        self.eval(u, v).swap_remove(0)
    }

    /// Keeps only the terms for which `keep(j, k)` holds.
    pub fn filter_terms(&self, mut keep: impl FnMut(u32, u32) -> bool) -> Poly2 {
        Poly2 {
            dim: self.dim,
            terms: self
                .terms
                .iter()
                .filter(|(e, _)| keep(e.0, e.1))
                .map(|(e, c)| (*e, c.clone()))
                .collect(),
        }
    }

    pub fn truncate_total_degree(&self, max_total: u32) -> Poly2 {
        self.filter_terms(|j, k| j + k <= max_total)
    }

    /// Applies a rational matrix to every coefficient vector: `M * p`.
    pub fn map_coeffs(&self, m: &[Vec<Rational>]) -> Result<Poly2> {
        let rows = m.len();
        if rows == 0 {
            return Err(Error::ZeroDimension);
        }
        if let Some(r) = m.iter().find(|r| r.len() != self.dim) {
            return Err(Error::DimensionMismatch(self.dim, r.len()));
        }
        let terms = self.terms.iter().map(|(e, c)| {
            let v = m
                .iter()
                .map(|row| row.iter().zip(c).map(|(a, b)| a * b).sum())
                .collect();
            (*e, v)
        });
        Poly2::from_terms(rows, terms)
    }

    /// Coefficients converted to `f64`, for numerical evaluation.
    pub fn terms_f64(&self) -> Vec<(Exp, Vec<f64>)> {
        self.terms
            .iter()
            .map(|(e, c)| (*e, c.iter().map(to_f64).collect()))
            .collect()
    }
}

fn powers(x: &Rational, n: u32) -> Vec<Rational> {
    let mut out = Vec::with_capacity(n as usize + 1);
    out.push(Rational::one());
    for i in 0..n as usize {
        let next = &out[i] * x;
        out.push(next);
    }
    out
}

impl Neg for &Poly2 {
    type Output = Poly2;
    fn neg(self) -> Poly2 {
        Poly2 {
            dim: self.dim,
            terms: self
                .terms
                .iter()
                .map(|(e, c)| (*e, c.iter().map(|x| -x).collect()))
                .collect(),
        }
    }
}

impl Neg for Poly2 {
    type Output = Poly2;
    fn neg(self) -> Poly2 {
        -&self
    }
}

// Operator forms panic on dimension errors; the `try_*` methods report them.
impl Add for &Poly2 {
    type Output = Poly2;
    fn add(self, rhs: &Poly2) -> Poly2 {
        self.try_add(rhs).expect("Poly2 addition")
    }
}

impl Sub for &Poly2 {
    type Output = Poly2;
    fn sub(self, rhs: &Poly2) -> Poly2 {
        self.try_sub(rhs).expect("Poly2 subtraction")
    }
}

impl Mul for &Poly2 {
    type Output = Poly2;
    fn mul(self, rhs: &Poly2) -> Poly2 {
        self.try_mul(rhs).expect("Poly2 multiplication")
    }
}

impl Add for Poly2 {
    type Output = Poly2;
    fn add(self, rhs: Poly2) -> Poly2 {
        &self + &rhs
    }
}

impl Sub for Poly2 {
    type Output = Poly2;
    fn sub(self, rhs: Poly2) -> Poly2 {
        &self - &rhs
    }
}

impl Mul for Poly2 {
    type Output = Poly2;
    fn mul(self, rhs: Poly2) -> Poly2 {
        &self * &rhs
    }
}

fn fmt_scalar(f: &mut fmt::Formatter<'_>, terms: &[(Exp, &Rational)]) -> fmt::Result {
    if terms.is_empty() {
        return write!(f, "0");
    }
    for (i, ((j, k), c)) in terms.iter().enumerate() {
        let neg = c.is_negative();
        let mag = c.abs();
        match (i, neg) {
            (0, true) => write!(f, "-")?,
            (0, false) => {}
            (_, true) => write!(f, " - ")?,
            (_, false) => write!(f, " + ")?,
        }
        let mono: Vec<String> = [("u", *j), ("v", *k)]
            .iter()
            .filter(|(_, n)| *n > 0)
            .map(|(s, n)| {
                if *n == 1 {
                    s.to_string()
                } else {
                    format!("{s}^{n}")
                }
            })
            .collect();
        if mono.is_empty() {
            write!(f, "{}", format_rational(&mag))?;
        } else if mag.is_one() {
            write!(f, "{}", mono.join("*"))?;
        } else {
            write!(f, "{}*{}", format_rational(&mag), mono.join("*"))?;
        }
    }
    Ok(())
}

impl fmt::Display for Poly2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let comp = |i: usize| -> Vec<(Exp, &Rational)> {
            self.terms
                .iter()
                .filter(|(_, c)| !c[i].is_zero())
                .map(|(e, c)| (*e, &c[i]))
                .collect()
        };
        if self.dim == 1 {
            return fmt_scalar(f, &comp(0));
        }
        write!(f, "(")?;
        for i in 0..self.dim {
            if i > 0 {
                write!(f, ", ")?;
            }
            fmt_scalar(f, &comp(i))?;
        }
        write!(f, ")")
    }
}
