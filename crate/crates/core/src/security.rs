//! Norm-growth constants, Gram-Schmidt size, a covering-radius estimator for
//! tiny dimensions, and the knapsack view of the encryption map.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::Rng;

use crate::error::{Error, Result};
use crate::fhe::{Ciphertext, Plaintext};
use crate::hnf::hnf_of_generators;
use crate::keygen::PublicKey;
use crate::lattice::{gram_schmidt, IdealLattice};
use crate::ring::{same_context, Context, ModulusPolynomial, RingElement};

/// Bits of precision for the rational upper bound on an irrational `M`.
const SQRT_PRECISION_BITS: u32 = 40;

/// Constants bounding coordinate growth under convolution.
///
/// `M = sqrt(m_squared)` and `w_upper ≥ (M^n − 1)/(M − 1)`, exact whenever `M` is an integer.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NormConstants {
    pub phi_max: BigInt,
    pub m_squared: BigInt,
    pub w_upper: BigRational,
    /// Whether `w_upper` is the exact value rather than a rounded-up bound.
    pub exact: bool,
}

pub fn norm_constants(phi: &ModulusPolynomial) -> NormConstants {
    let phi_max = phi.phi_max();
    let m_squared = BigInt::from(2) + BigInt::from(2) * &phi_max * &phi_max;
    let root = m_squared.sqrt();
    let (m_upper, exact) = if &root * &root == m_squared {
        (BigRational::from_integer(root), true)
    } else {
        let scale: BigInt = BigInt::one() << SQRT_PRECISION_BITS;
        let scaled = &m_squared * &scale * &scale;
        let mut r = scaled.sqrt();
        if &r * &r < scaled {
            r += 1;
        }
        (BigRational::new(r, scale), false)
    };
    let mut w = BigRational::zero();
    let mut power = BigRational::one();
    for _ in 0..phi.degree() {
        w += &power;
        power *= &m_upper;
    }
    NormConstants { phi_max, m_squared, w_upper: w, exact }
}

/// Tests `‖α ⊗ β‖ ≤ W ‖α‖ ‖β‖` on squares; returns the squared ratio
/// `‖α⊗β‖² / (W² ‖α‖² ‖β‖²)` (zero when either factor is zero).
pub fn check_norm_bound(alpha: &RingElement, beta: &RingElement, k: &NormConstants) -> Result<(bool, BigRational)> {
    if !alpha.same_context(beta) {
        return Err(Error::ContextMismatch);
    }
    let lhs = BigRational::from_integer(alpha.convolve(beta).norm_squared());
    let rhs = &k.w_upper * &k.w_upper * BigRational::from_integer(alpha.norm_squared() * beta.norm_squared());
    if rhs.is_zero() {
        return Ok((lhs.is_zero(), BigRational::zero()));
    }
    let ratio = &lhs / &rhs;
    Ok((lhs <= rhs, ratio))
}

/// Outcome of a batch of randomized norm-bound trials.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NormTrialSummary {
    pub trials: usize,
    pub violations: usize,
    pub max_ratio: BigRational,
}

/// Runs `trials` random pairs with coordinates in `[−bound, bound]`.
pub fn norm_bound_trials<R: Rng + ?Sized>(ctx: &Context, trials: usize, bound: i64, rng: &mut R) -> NormTrialSummary {
    let k = norm_constants(ctx);
    let mut violations = 0;
    let mut max_ratio = BigRational::zero();
    let n = ctx.degree();
    for _ in 0..trials {
        let mut draw = || {
            let coords = (0..n).map(|_| BigInt::from(rng.gen_range(-bound..=bound))).collect();
            RingElement::new(ctx, coords).unwrap()
        };
        let (a, b) = (draw(), draw());
        let (holds, ratio) = check_norm_bound(&a, &b, &k).expect("same context");
        if !holds {
            violations += 1;
        }
        if ratio > max_ratio {
            max_ratio = ratio;
        }
    }
    NormTrialSummary { trials, violations, max_ratio }
}

/// `σ(S)²`, the sum of squared Gram-Schmidt lengths.
pub fn sigma(s: &[RingElement]) -> Result<BigRational> {
    Ok(gram_schmidt(s)?.iter().map(|v| v.norm_squared()).fold(BigRational::zero(), |a, b| a + b))
}

fn round(x: &BigRational) -> BigInt {
    (x + BigRational::new(BigInt::one(), BigInt::from(2))).floor().to_integer()
}

/// Exact squared distance from `target` to the lattice spanned by the HNF columns.
///
/// Depth-first enumeration over the triangular basis, pruned by the best
/// distance found so far, seeded with the nearest-plane estimate.
pub fn closest_vector_distance(hnf: &crate::IntegerMatrix, target: &[BigRational]) -> BigRational {
    let n = hnf.rows();
    let mut coeffs = vec![BigInt::zero(); n];
    // nearest plane (rounding) gives the initial radius
    let mut best = BigRational::zero();
    for i in (0..n).rev() {
        let c = center(hnf, target, &coeffs, i);
        coeffs[i] = round(&c);
        let d = BigRational::from_integer(hnf[(i, i)].clone()) * (BigRational::from_integer(coeffs[i].clone()) - c);
        best += &d * &d;
    }
    let mut work = vec![BigInt::zero(); n];
    search(hnf, target, n, &mut work, BigRational::zero(), &mut best);
    best
}

/// `(x_i − Σ_{j>i} b_ij k_j) / b_ii`
fn center(hnf: &crate::IntegerMatrix, target: &[BigRational], coeffs: &[BigInt], i: usize) -> BigRational {
    let mut acc = target[i].clone();
    for (j, k) in coeffs.iter().enumerate().skip(i + 1) {
        acc -= BigRational::from_integer(&hnf[(i, j)] * k);
    }
    acc / BigRational::from_integer(hnf[(i, i)].clone())
}

fn search(
    hnf: &crate::IntegerMatrix,
    target: &[BigRational],
    level: usize,
    coeffs: &mut [BigInt],
    partial: BigRational,
    best: &mut BigRational,
) {
    if level == 0 {
        if partial < *best {
            *best = partial;
        }
        return;
    }
    let i = level - 1;
    let c = center(hnf, target, coeffs, i);
    let diag = BigRational::from_integer(hnf[(i, i)].clone());
    let cost = |k: &BigInt| {
        let d = &diag * (BigRational::from_integer(k.clone()) - &c);
        &d * &d
    };
    let start = round(&c);
    for step in [BigInt::one(), -BigInt::one()] {
        let mut k = if step.is_positive() { start.clone() } else { &start - 1 };
        loop {
            let total = &partial + cost(&k);
            if total > *best {
                break;
            }
            coeffs[i] = k.clone();
            search(hnf, target, i, coeffs, total, best);
            k += &step;
        }
    }
    coeffs[i] = BigInt::zero();
}

/// Lower bound on `ρ(L)²` from sampled targets in the fundamental box.
///
/// The first target is the box center; the rest are random points on a
/// `2^-16` grid. Targets are drawn in a fixed order, so for a fixed seed the
/// estimate is nondecreasing in `samples`.
pub fn covering_radius_estimate<R: Rng + ?Sized>(lattice: &IdealLattice, samples: usize, rng: &mut R) -> Result<BigRational> {
    let n = lattice.dim();
    if n > 4 {
        return Err(Error::DimensionTooLarge(n));
    }
    if samples == 0 {
        return Err(Error::InvalidParameter("samples must be at least 1".into()));
    }
    let hnf = lattice.hnf_basis();
    let diag = lattice.gs_diagonal();
    let denom = BigInt::from(1u32 << 16);
    let mut best = BigRational::zero();
    for s in 0..samples {
        let target: Vec<BigRational> = diag
            .iter()
            .map(|b| {
                if s == 0 {
                    BigRational::new(b.clone(), BigInt::from(2))
                } else {
                    let scaled: BigInt = b * &denom;
                    let hi = scaled.to_u64().unwrap_or(u64::MAX);
                    BigRational::new(BigInt::from(rng.gen_range(0..hi)), denom.clone())
                }
            })
            .collect();
        let d = closest_vector_distance(hnf, &target);
        if d > best {
            best = d;
        }
    }
    Ok(best)
}

/// `Σ a_i ⊗ x_i = target` with each `x_i` a scalar embedding in `[0, ranges_i)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KnapsackInstance {
    pub ctx: Context,
    pub coefficients: Vec<RingElement>,
    pub target: RingElement,
    pub ranges: Vec<BigInt>,
    /// `max t_i`
    pub bound: BigInt,
}

impl KnapsackInstance {
    pub fn search_space(&self) -> BigInt {
        self.ranges.iter().product()
    }
}

/// Largest search space brute force will attempt.
pub const BRUTE_FORCE_LIMIT: u64 = 10_000_000;

/// The keyless decryption problem for `target` under `pk`.
pub fn scheme_as_knapsack(pk: &PublicKey, target: &RingElement) -> Result<KnapsackInstance> {
    if !same_context(pk.context(), target.context()) {
        return Err(Error::ContextMismatch);
    }
    let bound = pk.moduli().iter().max().cloned().unwrap_or_else(BigInt::one);
    Ok(KnapsackInstance {
        ctx: pk.context().clone(),
        coefficients: pk.crt_vectors().to_vec(),
        target: target.clone(),
        ranges: pk.moduli().to_vec(),
        bound,
    })
}

/// Every tuple in the scalar domain mapping to the target.
pub fn brute_force_knapsack(inst: &KnapsackInstance) -> Result<Vec<Vec<BigInt>>> {
    let space = inst.search_space();
    if space > BigInt::from(BRUTE_FORCE_LIMIT) {
        return Err(Error::SearchSpaceTooLarge(space.to_string()));
    }
    let mut solutions = Vec::new();
    let mut current = Vec::with_capacity(inst.ranges.len());
    enumerate(inst, 0, RingElement::zero(&inst.ctx), &mut current, &mut solutions);
    Ok(solutions)
}

fn enumerate(
    inst: &KnapsackInstance,
    slot: usize,
    sum: RingElement,
    current: &mut Vec<BigInt>,
    out: &mut Vec<Vec<BigInt>>,
) {
    if slot == inst.ranges.len() {
        if sum == inst.target {
            out.push(current.clone());
        }
        return;
    }
    let mut partial = sum;
    let mut u = BigInt::zero();
    while u < inst.ranges[slot] {
        current.push(u.clone());
        enumerate(inst, slot + 1, partial.clone(), current, out);
        current.pop();
        partial = &partial + &inst.coefficients[slot];
        u += 1;
    }
}

/// Ideals `J_i ⊆ I_i` computed from public data alone.
///
/// `J_i` is generated by `A_i − e`, every `A_j` with `j ≠ i`, and `t_i e`,
/// all of which lie in `I_i`.
pub fn public_ideal_sublattices(pk: &PublicKey) -> Result<Vec<IdealLattice>> {
    let ctx = pk.context();
    let n = ctx.degree();
    let e = RingElement::one(ctx);
    (0..pk.slots())
        .map(|i| {
            let t = &pk.moduli()[i];
            let mut seeds = vec![&pk.crt_vectors()[i] - &e, e.scale(t)];
            seeds.extend(pk.crt_vectors().iter().enumerate().filter(|&(j, _)| j != i).map(|(_, a)| a.clone()));
            let gens: Vec<Vec<BigInt>> = seeds.iter().flat_map(|g| g.ideal_matrix().columns()).collect();
            // t Z^n ⊆ J_i, so det(J_i) divides t^n
            let hnf = hnf_of_generators(n, &gens, Some(&num_traits::pow(t.clone(), n)))?;
            IdealLattice::from_hnf_checked(ctx, hnf, None)
        })
        .collect()
}

/// Decrypts with [`public_ideal_sublattices`] in place of the secret ideals.
///
/// Since `J_i ⊆ I_i`, a scalar residue `(w, 0, …, 0)` of `c` modulo `J_i`
/// satisfies `w ≡ u_i (mod t_i)`. Returns `None` if some residue is not scalar.
pub fn public_decrypt(pk: &PublicKey, c: &Ciphertext) -> Result<Option<Plaintext>> {
    if !same_context(pk.context(), c.context()) || c.slots() != pk.slots() {
        return Err(Error::ContextMismatch);
    }
    let mut residues = Vec::with_capacity(pk.slots());
    for j in public_ideal_sublattices(pk)? {
        let w = j.reduce(c.body());
        if !w.is_scalar() {
            return Ok(None);
        }
        residues.push(w.coords()[0].clone());
    }
    Plaintext::new(residues, pk.moduli().to_vec()).map(Some)
}
