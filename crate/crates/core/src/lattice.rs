//! Ideal lattices of `(Z^n, +, ⊗)`, carried in Hermite normal form.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::hnf::{self, hnf_of_generators, hnf_with_transform};
use crate::matrix::IntegerMatrix;
use crate::ring::{same_context, Context, RingElement};

/// A vector of exact rationals, always fully reduced.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct RationalVector(pub Vec<BigRational>);

impl RationalVector {
    pub fn from_integers(v: &[BigInt]) -> Self {
        RationalVector(v.iter().map(|x| BigRational::from_integer(x.clone())).collect())
    }

    pub fn dot(&self, other: &RationalVector) -> BigRational {
        self.0.iter().zip(&other.0).fold(BigRational::zero(), |acc, (a, b)| acc + a * b)
    }

    pub fn norm_squared(&self) -> BigRational {
        self.dot(self)
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(Zero::is_zero)
    }

    fn sub_scaled(&mut self, mu: &BigRational, other: &RationalVector) {
        for (a, b) in self.0.iter_mut().zip(&other.0) {
            *a -= mu * b;
        }
    }
}

/// Exact Gram-Schmidt orthogonalization of `vectors`, in order.
pub fn gram_schmidt_vectors(vectors: &[Vec<BigInt>]) -> Result<Vec<RationalVector>> {
    let mut out: Vec<RationalVector> = Vec::with_capacity(vectors.len());
    let mut norms: Vec<BigRational> = Vec::with_capacity(vectors.len());
    for v in vectors {
        let mut w = RationalVector::from_integers(v);
        let orig = w.clone();
        for (prev, nrm) in out.iter().zip(&norms) {
            let mu = orig.dot(prev) / nrm;
            w.sub_scaled(&mu, prev);
        }
        if w.is_zero() {
            return Err(Error::DependentSet);
        }
        norms.push(w.norm_squared());
        out.push(w);
    }
    Ok(out)
}

/// Gram-Schmidt of `n` ring elements. Fails with `DependentSet` if they are not independent.
pub fn gram_schmidt(s: &[RingElement]) -> Result<Vec<RationalVector>> {
    if let Some(first) = s.first() {
        if s.len() != first.dim() {
            return Err(Error::DimensionMismatch { expected: first.dim(), actual: s.len() });
        }
    }
    gram_schmidt_vectors(&s.iter().map(|x| x.coords().to_vec()).collect::<Vec<_>>())
}

/// Reduces `c` into the parallelepiped spanned by the Gram-Schmidt vectors of an
/// arbitrary basis (columns of `basis`), using exact rational nearest-plane floors.
///
/// Returns `w` with `c - w` in the lattice and every Gram-Schmidt coordinate of `w` in `[0, 1)`.
pub fn reduce_by_gram_schmidt(c: &[BigInt], basis: &IntegerMatrix) -> Result<Vec<BigInt>> {
    let cols = basis.columns();
    let gs = gram_schmidt_vectors(&cols)?;
    let n = cols.len();
    let cr = RationalVector::from_integers(c);
    let mut k = vec![BigInt::zero(); n];
    for i in (0..n).rev() {
        let nrm = gs[i].norm_squared();
        let mut x = cr.dot(&gs[i]) / &nrm;
        for j in i + 1..n {
            x -= BigRational::from_integer(k[j].clone()) * RationalVector::from_integers(&cols[j]).dot(&gs[i]) / &nrm;
        }
        k[i] = x.floor().to_integer();
    }
    let mut w = c.to_vec();
    for (kj, col) in k.iter().zip(&cols) {
        for (wi, bi) in w.iter_mut().zip(col) {
            *wi -= kj * bi;
        }
    }
    Ok(w)
}

/// A full-rank ideal lattice, stored by its unique HNF basis.
#[derive(Clone)]
pub struct IdealLattice {
    ctx: Context,
    hnf: IntegerMatrix,
    generator: Option<RingElement>,
}

impl IdealLattice {
    fn from_hnf(ctx: &Context, hnf: IntegerMatrix, generator: Option<RingElement>) -> Self {
        debug_assert!(hnf::is_hnf(&hnf));
        IdealLattice { ctx: ctx.clone(), hnf, generator }
    }

    /// Canonicalizes an arbitrary nonsingular basis and checks closure under `⊗`.
    pub fn from_basis(ctx: &Context, basis: &IntegerMatrix) -> Result<Self> {
        if basis.rows() != ctx.degree() {
            return Err(Error::DimensionMismatch { expected: ctx.degree(), actual: basis.rows() });
        }
        let lattice = IdealLattice::from_hnf(ctx, hnf::hnf(basis)?, None);
        if !lattice.is_closed_under_rotation() {
            return Err(Error::InvalidParameter("lattice is not closed under multiplication by x".into()));
        }
        Ok(lattice)
    }

    /// Accepts a basis claimed to be in HNF, validating shape and ideal closure.
    pub fn from_hnf_checked(ctx: &Context, hnf_basis: IntegerMatrix, generator: Option<RingElement>) -> Result<Self> {
        if hnf_basis.rows() != ctx.degree() || !hnf::is_hnf(&hnf_basis) {
            return Err(Error::InvalidParameter("basis is not in Hermite normal form".into()));
        }
        let lattice = IdealLattice::from_hnf(ctx, hnf_basis, None);
        if !lattice.is_closed_under_rotation() {
            return Err(Error::InvalidParameter("lattice is not closed under multiplication by x".into()));
        }
        if let Some(g) = generator {
            if !same_context(g.context(), ctx) || principal_ideal(&g)?.hnf != lattice.hnf {
                return Err(Error::InvalidParameter("generator does not generate the lattice".into()));
            }
            return Ok(IdealLattice { generator: Some(g), ..lattice });
        }
        Ok(lattice)
    }

    /// `Z^n` itself.
    pub fn whole_ring(ctx: &Context) -> Self {
        IdealLattice::from_hnf(ctx, IntegerMatrix::identity(ctx.degree()), Some(RingElement::one(ctx)))
    }

    pub fn context(&self) -> &Context {
        &self.ctx
    }

    pub fn dim(&self) -> usize {
        self.ctx.degree()
    }

    pub fn hnf_basis(&self) -> &IntegerMatrix {
        &self.hnf
    }

    pub fn generator(&self) -> Option<&RingElement> {
        self.generator.as_ref()
    }

    pub fn basis_vector(&self, j: usize) -> RingElement {
        RingElement::new(&self.ctx, self.hnf.column(j)).expect("basis column has context length")
    }

    /// Lengths of the Gram-Schmidt vectors of the HNF basis: the diagonal `b_11, ..., b_nn`.
    /// These are also the side lengths of the box `F(I)`.
    pub fn gs_diagonal(&self) -> Vec<BigInt> {
        (0..self.dim()).map(|i| self.hnf[(i, i)].clone()).collect()
    }

    /// `det(I) = Π b_ii`, the index of `I` in `Z^n`.
    pub fn determinant(&self) -> BigInt {
        (0..self.dim()).map(|i| &self.hnf[(i, i)]).product()
    }

    /// The one-dimensional modulus `t(I) = b_11`: the least `t > 0` with `t·e ∈ I`.
    pub fn one_dim_modulus(&self) -> BigInt {
        self.hnf[(0, 0)].clone()
    }

    fn check_ctx(&self, v: &RingElement) {
        assert!(same_context(&self.ctx, v.context()), "vector and lattice from different contexts");
    }

    /// The unique representative of `c` modulo `I` in `F(I) = {0 ≤ x_i < b_ii}`.
    ///
    /// Nearest-plane reduction against the HNF basis. Its Gram-Schmidt vectors
    /// are `b_ii e_i`, so each floor is an exact integer division.
    pub fn reduce(&self, c: &RingElement) -> RingElement {
        self.check_ctx(c);
        let n = self.dim();
        let mut w = c.coords().to_vec();
        for i in (0..n).rev() {
            let k = w[i].div_floor(&self.hnf[(i, i)]);
            if k.is_zero() {
                continue;
            }
            for r in 0..=i {
                w[r] -= &k * &self.hnf[(r, i)];
            }
        }
        RingElement::new(&self.ctx, w).unwrap()
    }

    /// True iff `v` lies in the box `F(I)`.
    pub fn in_fundamental_box(&self, v: &RingElement) -> bool {
        v.coords().iter().enumerate().all(|(i, x)| !x.is_negative() && *x < self.hnf[(i, i)])
    }

    /// Membership by back-substitution on the HNF basis.
    pub fn contains(&self, v: &RingElement) -> bool {
        self.check_ctx(v);
        let n = self.dim();
        let mut w = v.coords().to_vec();
        for i in (0..n).rev() {
            let (k, r) = w[i].div_mod_floor(&self.hnf[(i, i)]);
            if !r.is_zero() {
                return false;
            }
            for row in 0..i {
                w[row] -= &k * &self.hnf[(row, i)];
            }
        }
        true
    }

    fn is_closed_under_rotation(&self) -> bool {
        (0..self.dim()).all(|j| {
            let col = self.hnf.column(j);
            let shifted = RingElement::new(&self.ctx, self.ctx.shift(&col)).unwrap();
            self.contains(&shifted)
        })
    }

    /// Every coset representative of `Z^n / I`, i.e. all points of `F(I)`.
    /// Intended for small determinants only.
    pub fn box_points(&self) -> Vec<RingElement> {
        let dims = self.gs_diagonal();
        let mut out = vec![Vec::<BigInt>::new()];
        for d in &dims {
            let mut next = Vec::new();
            for prefix in &out {
                let mut x = BigInt::zero();
                while &x < d {
                    let mut v = prefix.clone();
                    v.push(x.clone());
                    next.push(v);
                    x += 1;
                }
            }
            out = next;
        }
        out.into_iter().map(|v| RingElement::new(&self.ctx, v).unwrap()).collect()
    }
}

impl PartialEq for IdealLattice {
    fn eq(&self, other: &Self) -> bool {
        same_context(&self.ctx, &other.ctx) && self.hnf == other.hnf
    }
}

impl Eq for IdealLattice {}

impl fmt::Debug for IdealLattice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("IdealLattice")
            .field("hnf", &self.hnf)
            .field("generator", &self.generator)
            .finish()
    }
}

/// HNF canonicalization of a nonsingular basis within a ring context.
pub fn hnf_lattice(basis: &IntegerMatrix, ctx: &Context) -> Result<IdealLattice> {
    IdealLattice::from_basis(ctx, basis)
}

/// The principal ideal `⟨α⟩ = L(H*(α))`.
pub fn principal_ideal(alpha: &RingElement) -> Result<IdealLattice> {
    let basis = alpha.ideal_matrix();
    let det = basis.determinant().abs();
    if det.is_zero() {
        return Err(Error::ZeroDivisorGenerator);
    }
    let h = hnf_of_generators(alpha.dim(), &basis.columns(), Some(&det))?;
    Ok(IdealLattice::from_hnf(alpha.context(), h, Some(alpha.clone())))
}

fn check_pair(i: &IdealLattice, j: &IdealLattice) -> Result<()> {
    if same_context(&i.ctx, &j.ctx) {
        Ok(())
    } else {
        Err(Error::ContextMismatch)
    }
}

/// `I + J`.
pub fn ideal_sum(i: &IdealLattice, j: &IdealLattice) -> Result<IdealLattice> {
    check_pair(i, j)?;
    let d = i.determinant().gcd(&j.determinant());
    let n = i.dim();
    if d.is_one() {
        return Ok(IdealLattice::whole_ring(&i.ctx));
    }
    let mut gens = i.hnf.columns();
    gens.extend(j.hnf.columns());
    let h = hnf_of_generators(n, &gens, Some(&d))?;
    Ok(IdealLattice::from_hnf(&i.ctx, h, None))
}

/// True iff `I + J = Z^n`.
pub fn is_coprime(i: &IdealLattice, j: &IdealLattice) -> Result<bool> {
    let s = ideal_sum(i, j)?;
    Ok(s.hnf == IntegerMatrix::identity(i.dim()))
}

/// For coprime `I`, `J`, returns `(a, b)` with `a ∈ I`, `b ∈ J` and `a + b = e`.
pub fn coprime_split(i: &IdealLattice, j: &IdealLattice) -> Result<(RingElement, RingElement)> {
    check_pair(i, j)?;
    let n = i.dim();
    let mut gens = i.hnf.columns();
    gens.extend(j.hnf.columns());
    let (h, coefs) = hnf_with_transform(n, &gens)?;
    if h != IntegerMatrix::identity(n) {
        return Err(Error::NotCoprime("I + J is a proper ideal".into()));
    }
    let a_coords = i.hnf.mul_vec(&coefs[0][..n]);
    let a = RingElement::new(&i.ctx, a_coords)?;
    let product = ideal_product(&[i.clone(), j.clone()])?;
    let r = product.reduce(&a);
    let one = RingElement::one(&i.ctx);
    let b = &one - &r;
    Ok((r, b))
}

fn product_pair(p: &IdealLattice, q: &IdealLattice) -> IdealLattice {
    let n = p.dim();
    let pb: Vec<RingElement> = (0..n).map(|j| p.basis_vector(j)).collect();
    let qb: Vec<RingElement> = (0..n).map(|j| q.basis_vector(j)).collect();
    let gens: Vec<Vec<BigInt>> = pb
        .iter()
        .flat_map(|a| qb.iter().map(move |b| a.convolve(b).into_coords()))
        .collect();
    // t(P)·Q ⊆ PQ, so t(P)^n det(Q) is a multiple of det(PQ)
    let d = num_traits::pow(p.one_dim_modulus(), n) * q.determinant();
    let h = hnf_of_generators(n, &gens, Some(&d)).expect("product of full-rank ideals is full rank");
    let generator = match (&p.generator, &q.generator) {
        (Some(a), Some(b)) => Some(a.convolve(b)),
        _ => None,
    };
    IdealLattice::from_hnf(&p.ctx, h, generator)
}

/// `I_1 I_2 ⋯ I_k`, folded left.
pub fn ideal_product(ideals: &[IdealLattice]) -> Result<IdealLattice> {
    let (first, rest) = ideals
        .split_first()
        .ok_or_else(|| Error::InvalidParameter("empty ideal list".into()))?;
    rest.iter().try_fold(first.clone(), |acc, next| {
        check_pair(&acc, next)?;
        Ok(product_pair(&acc, next))
    })
}
