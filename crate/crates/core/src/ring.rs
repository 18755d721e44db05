//! The convolution ring `(Z^n, +, ⊗)` defined by a monic modulus polynomial.
//!
//! A vector `(a_0, ..., a_{n-1})` stands for the polynomial
//! `a_0 + a_1 x + ... + a_{n-1} x^{n-1}` reduced modulo
//! `φ(x) = x^n - φ_{n-1} x^{n-1} - ... - φ_1 x - φ_0`. Coordinates are always
//! stored constant term first.

use std::fmt;
use std::ops::{Add, Neg, Sub};
use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::matrix::IntegerMatrix;
use crate::poly;

/// The monic polynomial `φ(x)` fixing the ring structure.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct ModulusPolynomial {
    phi: Vec<BigInt>,
    cyclotomic_prime: Option<u64>,
}

impl ModulusPolynomial {
    /// `phi_coeffs[i]` is `φ_i` in `x^n = φ_{n-1} x^{n-1} + ... + φ_0`.
    pub fn new(phi_coeffs: Vec<BigInt>) -> Result<Self> {
        if phi_coeffs.len() < 2 {
            return Err(Error::InvalidModulus(format!("degree {} < 2", phi_coeffs.len())));
        }
        if phi_coeffs[0].is_zero() {
            return Err(Error::InvalidModulus("φ_0 must be nonzero".into()));
        }
        Ok(ModulusPolynomial { phi: phi_coeffs, cyclotomic_prime: None })
    }

    pub fn from_i64(phi_coeffs: &[i64]) -> Result<Self> {
        Self::new(phi_coeffs.iter().map(|&c| BigInt::from(c)).collect())
    }

    /// `x^{p-1} + ... + x + 1` for an odd prime `p`.
    pub fn cyclotomic(p: u64) -> Result<Self> {
        if p < 3 || !crate::primes::is_prime(p) {
            return Err(Error::InvalidModulus(format!("{p} is not an odd prime")));
        }
        let n = (p - 1) as usize;
        Ok(ModulusPolynomial { phi: vec![-BigInt::one(); n], cyclotomic_prime: Some(p) })
    }

    /// Re-attaches a cyclotomic tag, checking that the coefficients match.
    pub fn with_cyclotomic_prime(self, p: u64) -> Result<Self> {
        let expected = Self::cyclotomic(p)?;
        if expected.phi != self.phi {
            return Err(Error::InvalidModulus(format!("coefficients are not those of Φ_{p}")));
        }
        Ok(expected)
    }

    pub fn degree(&self) -> usize {
        self.phi.len()
    }

    pub fn phi_coeffs(&self) -> &[BigInt] {
        &self.phi
    }

    pub fn cyclotomic_prime(&self) -> Option<u64> {
        self.cyclotomic_prime
    }

    /// `max |φ_i|`.
    pub fn phi_max(&self) -> BigInt {
        self.phi.iter().map(|c| c.abs()).max().unwrap_or_default()
    }

    /// Coefficients of `φ(x)` itself, constant term first, leading 1 included.
    pub fn as_polynomial(&self) -> Vec<BigInt> {
        let mut p: Vec<BigInt> = self.phi.iter().map(|c| -c).collect();
        p.push(BigInt::one());
        p
    }

    /// The rotation matrix `H`: multiplication by `x`.
    pub fn rotation_matrix(&self) -> IntegerMatrix {
        let n = self.degree();
        let mut h = IntegerMatrix::zeros(n, n);
        for i in 1..n {
            h[(i, i - 1)] = BigInt::one();
        }
        for (i, c) in self.phi.iter().enumerate() {
            h[(i, n - 1)] = c.clone();
        }
        h
    }

    /// Applies `H` to a coordinate vector without materializing the matrix.
    pub(crate) fn shift(&self, v: &[BigInt]) -> Vec<BigInt> {
        let n = self.degree();
        let top = &v[n - 1];
        let mut out = Vec::with_capacity(n);
        out.push(&self.phi[0] * top);
        for i in 1..n {
            out.push(&v[i - 1] + &self.phi[i] * top);
        }
        out
    }
}

impl fmt::Display for ModulusPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let n = self.degree();
        write!(f, "x^{n}")?;
        for i in (0..n).rev() {
            let c = -&self.phi[i];
            if c.is_zero() {
                continue;
            }
            let sign = if c.is_negative() { '-' } else { '+' };
            let a = c.abs();
            let coeff = if a.is_one() && i > 0 { String::new() } else { a.to_string() };
            match i {
                0 => write!(f, " {sign} {a}")?,
                1 => write!(f, " {sign} {coeff}x")?,
                _ => write!(f, " {sign} {coeff}x^{i}")?,
            }
        }
        Ok(())
    }
}

/// Shared handle to a ring context.
pub type Context = Arc<ModulusPolynomial>;

pub(crate) fn same_context(a: &Context, b: &Context) -> bool {
    Arc::ptr_eq(a, b) || a == b
}

/// An element of `(Z^n, +, ⊗)` bound to its modulus polynomial.
#[derive(Clone)]
pub struct RingElement {
    ctx: Context,
    coords: Vec<BigInt>,
}

impl RingElement {
    pub fn new(ctx: &Context, coords: Vec<BigInt>) -> Result<Self> {
        if coords.len() != ctx.degree() {
            return Err(Error::DimensionMismatch { expected: ctx.degree(), actual: coords.len() });
        }
        Ok(RingElement { ctx: ctx.clone(), coords })
    }

    pub fn from_i64(ctx: &Context, coords: &[i64]) -> Result<Self> {
        Self::new(ctx, coords.iter().map(|&c| BigInt::from(c)).collect())
    }

    pub fn zero(ctx: &Context) -> Self {
        RingElement { ctx: ctx.clone(), coords: vec![BigInt::zero(); ctx.degree()] }
    }

    /// The unit `e = (1, 0, ..., 0)`.
    pub fn one(ctx: &Context) -> Self {
        embed_scalar(&BigInt::one(), ctx)
    }

    pub fn context(&self) -> &Context {
        &self.ctx
    }

    pub fn coords(&self) -> &[BigInt] {
        &self.coords
    }

    pub fn into_coords(self) -> Vec<BigInt> {
        self.coords
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(Zero::is_zero)
    }

    /// True for `(a, 0, ..., 0)`.
    pub fn is_scalar(&self) -> bool {
        self.coords[1..].iter().all(Zero::is_zero)
    }

    pub fn same_context(&self, other: &RingElement) -> bool {
        same_context(&self.ctx, &other.ctx)
    }

    fn check(&self, other: &RingElement) {
        assert!(self.same_context(other), "ring elements from different contexts");
    }

    /// `a · self`, which equals `embed_scalar(a) ⊗ self`.
    pub fn scale(&self, a: &BigInt) -> RingElement {
        RingElement { ctx: self.ctx.clone(), coords: self.coords.iter().map(|c| c * a).collect() }
    }

    /// Squared Euclidean norm.
    pub fn norm_squared(&self) -> BigInt {
        self.coords.iter().map(|c| c * c).sum()
    }

    /// The ideal matrix `H*(α) = [α, Hα, ..., H^{n-1}α]`.
    pub fn ideal_matrix(&self) -> IntegerMatrix {
        let n = self.dim();
        let mut cols = Vec::with_capacity(n);
        let mut v = self.coords.clone();
        for _ in 0..n {
            let next = self.ctx.shift(&v);
            cols.push(v);
            v = next;
        }
        IntegerMatrix::from_columns(&cols)
    }

    /// The convolution product `α ⊗ β = H*(α) β`, computed as polynomial
    /// multiplication followed by reduction modulo `φ`.
    pub fn convolve(&self, other: &RingElement) -> RingElement {
        self.check(other);
        let prod = poly::mul(&self.coords, &other.coords);
        RingElement { ctx: self.ctx.clone(), coords: poly::reduce_mod_monic(prod, self.ctx.phi_coeffs()) }
    }

    /// `det H*(α)`, by fraction-free elimination. Zero iff `α` is a zero divisor.
    pub fn ring_determinant(&self) -> BigInt {
        self.ideal_matrix().determinant()
    }

    /// `Res(φ, α)`, equal to `det H*(α)` for monic `φ`.
    pub fn resultant_with_modulus(&self) -> BigInt {
        poly::resultant(&self.ctx.as_polynomial(), &self.coords)
    }

    pub fn pow(&self, mut k: u64) -> RingElement {
        let mut base = self.clone();
        let mut acc = RingElement::one(&self.ctx);
        while k > 0 {
            if k & 1 == 1 {
                acc = acc.convolve(&base);
            }
            k >>= 1;
            if k > 0 {
                base = base.convolve(&base);
            }
        }
        acc
    }
}

/// `a ↦ (a, 0, ..., 0)`.
pub fn embed_scalar(a: &BigInt, ctx: &Context) -> RingElement {
    let mut coords = vec![BigInt::zero(); ctx.degree()];
    coords[0] = a.clone();
    RingElement { ctx: ctx.clone(), coords }
}

impl PartialEq for RingElement {
    fn eq(&self, other: &Self) -> bool {
        self.same_context(other) && self.coords == other.coords
    }
}

impl Eq for RingElement {}

impl fmt::Debug for RingElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for RingElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.coords.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

impl Add<&RingElement> for &RingElement {
    type Output = RingElement;

    fn add(self, rhs: &RingElement) -> RingElement {
        self.check(rhs);
        RingElement { ctx: self.ctx.clone(), coords: self.coords.iter().zip(&rhs.coords).map(|(a, b)| a + b).collect() }
    }
}

impl Sub<&RingElement> for &RingElement {
    type Output = RingElement;

    fn sub(self, rhs: &RingElement) -> RingElement {
        self.check(rhs);
        RingElement { ctx: self.ctx.clone(), coords: self.coords.iter().zip(&rhs.coords).map(|(a, b)| a - b).collect() }
    }
}

impl Neg for &RingElement {
    type Output = RingElement;

    fn neg(self) -> RingElement {
        RingElement { ctx: self.ctx.clone(), coords: self.coords.iter().map(|c| -c).collect() }
    }
}
