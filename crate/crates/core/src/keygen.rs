//! Secret-key generation (general and cyclotomic) and the Chinese-remainder
//! public key.

use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};
use rand::seq::index::sample;
use rand::Rng;

use crate::error::{Error, Result};
use crate::hnf::hnf_with_transform;
use crate::irreducible::probably_irreducible;
use crate::lattice::{coprime_split, ideal_product, is_coprime, principal_ideal, IdealLattice};
use crate::matrix::IntegerMatrix;
use crate::primes::primes_in;
use crate::ring::{same_context, Context, ModulusPolynomial, RingElement};

/// Consecutive rejected candidates tolerated before giving up.
pub const MAX_RESAMPLES: usize = 100;

const IRREDUCIBILITY_TRIALS: usize = 16;

/// How a key was produced.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SchemeParams {
    General,
    /// `φ = Φ_p`, secret ideals `⟨α_q⟩` for the listed primes.
    Cyclotomic { p: u64, primes: Vec<u64> },
}

/// `m ≥ 2` pairwise coprime ideals together with their one-dimensional moduli.
#[derive(Clone, Debug)]
pub struct SecretKey {
    ctx: Context,
    ideals: Vec<IdealLattice>,
    moduli: Vec<BigInt>,
    product: IdealLattice,
    params: SchemeParams,
}

impl SecretKey {
    /// Validates the key invariants: `m ≥ 2`, shared context, `t_i ≥ 2`, pairwise coprimality.
    pub fn new(ideals: Vec<IdealLattice>, params: SchemeParams) -> Result<Self> {
        if ideals.len() < 2 {
            return Err(Error::InvalidParameter(format!("need at least 2 ideals, got {}", ideals.len())));
        }
        let ctx = ideals[0].context().clone();
        if ideals.iter().any(|i| !same_context(i.context(), &ctx)) {
            return Err(Error::ContextMismatch);
        }
        let moduli: Vec<BigInt> = ideals.iter().map(IdealLattice::one_dim_modulus).collect();
        if let Some(k) = moduli.iter().position(|t| *t < BigInt::from(2)) {
            return Err(Error::InvalidParameter(format!("ideal {} has trivial modulus t = 1", k + 1)));
        }
        for a in 0..ideals.len() {
            for b in a + 1..ideals.len() {
                if !is_coprime(&ideals[a], &ideals[b])? {
                    return Err(Error::NotCoprime(format!("ideals {} and {} share a common factor", a + 1, b + 1)));
                }
            }
        }
        if let SchemeParams::Cyclotomic { p, primes } = &params {
            if ctx.cyclotomic_prime() != Some(*p) || primes.len() != ideals.len() {
                return Err(Error::InvalidParameter("cyclotomic parameters do not match the key".into()));
            }
        }
        let product = ideal_product(&ideals)?;
        Ok(SecretKey { ctx, ideals, moduli, product, params })
    }

    pub fn context(&self) -> &Context {
        &self.ctx
    }

    pub fn ideals(&self) -> &[IdealLattice] {
        &self.ideals
    }

    pub fn moduli(&self) -> &[BigInt] {
        &self.moduli
    }

    pub fn slots(&self) -> usize {
        self.ideals.len()
    }

    /// `I_1 I_2 ⋯ I_m`, which equals the intersection for coprime ideals.
    pub fn product_lattice(&self) -> &IdealLattice {
        &self.product
    }

    pub fn params(&self) -> &SchemeParams {
        &self.params
    }

    /// The generators `α_i`, if every ideal is principal.
    pub fn generators(&self) -> Option<Vec<RingElement>> {
        self.ideals.iter().map(|i| i.generator().cloned()).collect()
    }
}

/// The Chinese-remainder vectors `A_i` and the plaintext moduli `t_i`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PublicKey {
    ctx: Context,
    crt_vectors: Vec<RingElement>,
    moduli: Vec<BigInt>,
}

impl PublicKey {
    pub fn new(ctx: &Context, crt_vectors: Vec<RingElement>, moduli: Vec<BigInt>) -> Result<Self> {
        if crt_vectors.len() != moduli.len() || crt_vectors.is_empty() {
            return Err(Error::InvalidParameter("need one modulus per CRT vector".into()));
        }
        if crt_vectors.iter().any(|a| !same_context(a.context(), ctx)) {
            return Err(Error::ContextMismatch);
        }
        if moduli.iter().any(|t| *t < BigInt::one()) {
            return Err(Error::InvalidParameter("moduli must be positive".into()));
        }
        Ok(PublicKey { ctx: ctx.clone(), crt_vectors, moduli })
    }

    pub fn context(&self) -> &Context {
        &self.ctx
    }

    pub fn crt_vectors(&self) -> &[RingElement] {
        &self.crt_vectors
    }

    pub fn moduli(&self) -> &[BigInt] {
        &self.moduli
    }

    pub fn slots(&self) -> usize {
        self.moduli.len()
    }

    /// `p` when the ring is cyclotomic.
    pub fn cyclotomic_prime(&self) -> Option<u64> {
        self.ctx.cyclotomic_prime()
    }
}

fn random_vector<R: Rng + ?Sized>(ctx: &Context, bound: i64, rng: &mut R) -> RingElement {
    loop {
        let coords: Vec<BigInt> = (0..ctx.degree()).map(|_| BigInt::from(rng.gen_range(-bound..=bound))).collect();
        if coords.iter().any(|c| !c.is_zero()) {
            return RingElement::new(ctx, coords).unwrap();
        }
    }
}

/// A principal ideal usable as a key slot: invertible generator and `t ≥ 2`.
fn admissible_ideal(alpha: &RingElement) -> Option<IdealLattice> {
    let ideal = principal_ideal(alpha).ok()?;
    (ideal.one_dim_modulus() >= BigInt::from(2)).then_some(ideal)
}

/// General secret key: `I_1 = ⟨α⟩`, `I_2 = ⟨e − α⟩`, `I_k = ⟨e − α_1 ⊗ ⋯ ⊗ α_{k−1}⟩`
/// with each `α_j` a random nonzero element of `I_j`.
///
/// Candidates with a zero-divisor generator, a trivial modulus, or a failed
/// coprimality check are resampled.
pub fn gen_secret_general<R: Rng + ?Sized>(
    phi: &ModulusPolynomial,
    m: usize,
    rng: &mut R,
    coeff_bound: u64,
) -> Result<SecretKey> {
    if m < 2 {
        return Err(Error::InvalidParameter("m must be at least 2".into()));
    }
    if coeff_bound == 0 || coeff_bound > i64::MAX as u64 {
        return Err(Error::InvalidParameter("coeff_bound must be in [1, 2^63)".into()));
    }
    if !probably_irreducible(&phi.as_polynomial(), IRREDUCIBILITY_TRIALS, rng) {
        return Err(Error::IrreducibilityDoubt);
    }
    let ctx: Context = Arc::new(phi.clone());
    let bound = coeff_bound as i64;
    let e = RingElement::one(&ctx);
    let mut failures = 0;
    let bump = |failures: &mut usize, what: &str| -> Result<()> {
        *failures += 1;
        if *failures >= MAX_RESAMPLES {
            Err(Error::ResampleExhausted(format!("{MAX_RESAMPLES} consecutive rejected candidates for {what}")))
        } else {
            Ok(())
        }
    };

    let mut ideals = loop {
        let alpha = random_vector(&ctx, bound, rng);
        let beta = &e - &alpha;
        match (admissible_ideal(&alpha), admissible_ideal(&beta)) {
            (Some(i1), Some(i2)) if is_coprime(&i1, &i2)? => break vec![i1, i2],
            _ => bump(&mut failures, "the first two ideals")?,
        }
    };

    while ideals.len() < m {
        failures = 0;
        let next = loop {
            let mut prod = e.clone();
            for ideal in &ideals {
                let g = ideal.generator().expect("generated ideals are principal");
                let x = random_vector(&ctx, bound, rng);
                prod = prod.convolve(&g.convolve(&x));
            }
            let gamma = &e - &prod;
            if let Some(candidate) = admissible_ideal(&gamma) {
                let mut ok = true;
                for prev in &ideals {
                    if !is_coprime(prev, &candidate)? {
                        ok = false;
                        break;
                    }
                }
                if ok {
                    break candidate;
                }
            }
            bump(&mut failures, &format!("ideal {}", ideals.len() + 1))?;
        };
        ideals.push(next);
    }
    SecretKey::new(ideals, SchemeParams::General)
}

/// `α_q = (q, 0, ..., 0, 1)`, i.e. `x^{n−1} + q`.
pub fn cyclotomic_generator(ctx: &Context, q: u64) -> RingElement {
    let n = ctx.degree();
    let mut coords = vec![BigInt::zero(); n];
    coords[0] = BigInt::from(q);
    coords[n - 1] += BigInt::one();
    RingElement::new(ctx, coords).unwrap()
}

/// `t_q = q^n − q^{n−1} + ⋯ − q + 1`, the alternating sum `Σ_{k=0}^{n} (−q)^k`.
pub fn cyclotomic_modulus(q: u64, n: usize) -> BigInt {
    let mq = -BigInt::from(q);
    let mut acc = BigInt::zero();
    let mut power = BigInt::one();
    for _ in 0..=n {
        acc += &power;
        power *= &mq;
    }
    acc
}

/// Builds the cyclotomic key for an explicit set of distinct primes.
///
/// Rejects prime sets whose moduli share a factor or whose ideals fail the
/// HNF coprimality check, and checks `t(I_q)` against the closed form.
pub fn secret_from_primes(p: u64, primes: &[u64]) -> Result<SecretKey> {
    let ctx: Context = Arc::new(ModulusPolynomial::cyclotomic(p)?);
    let n = ctx.degree();
    if primes.len() < 2 {
        return Err(Error::InvalidParameter("need at least 2 primes".into()));
    }
    for (k, &q) in primes.iter().enumerate() {
        if !crate::primes::is_prime(q) || q == p {
            return Err(Error::InvalidParameter(format!("q = {q} must be a prime different from p = {p}")));
        }
        if primes[..k].contains(&q) {
            return Err(Error::InvalidParameter(format!("prime {q} repeated")));
        }
    }
    let moduli: Vec<BigInt> = primes.iter().map(|&q| cyclotomic_modulus(q, n)).collect();
    for a in 0..primes.len() {
        for b in a + 1..primes.len() {
            let g = moduli[a].gcd(&moduli[b]);
            if !g.is_one() {
                return Err(Error::NotCoprime(format!(
                    "t({}) = {} and t({}) = {} share the factor {g}",
                    primes[a], moduli[a], primes[b], moduli[b]
                )));
            }
        }
    }
    let mut ideals = Vec::with_capacity(primes.len());
    for (&q, t) in primes.iter().zip(&moduli) {
        let ideal = principal_ideal(&cyclotomic_generator(&ctx, q))?;
        if ideal.one_dim_modulus() != *t {
            return Err(Error::SelfCheck(format!("t(I_{q}) = {} differs from closed form {t}", ideal.one_dim_modulus())));
        }
        ideals.push(ideal);
    }
    SecretKey::new(ideals, SchemeParams::Cyclotomic { p, primes: primes.to_vec() })
}

/// Cyclotomic secret key with `m` distinct primes `q_i ≠ p` drawn uniformly from `[2, q_max]`.
pub fn gen_secret_cyclotomic<R: Rng + ?Sized>(p: u64, m: usize, rng: &mut R, q_max: u64) -> Result<SecretKey> {
    ModulusPolynomial::cyclotomic(p)?;
    if m < 2 {
        return Err(Error::InvalidParameter("m must be at least 2".into()));
    }
    let pool: Vec<u64> = primes_in(2, q_max).into_iter().filter(|&q| q != p).collect();
    if pool.len() < m {
        return Err(Error::ResampleExhausted(format!("only {} primes ≠ {p} below {q_max}", pool.len())));
    }
    for _ in 0..MAX_RESAMPLES {
        let primes: Vec<u64> = sample(rng, pool.len(), m).into_iter().map(|i| pool[i]).collect();
        match secret_from_primes(p, &primes) {
            Ok(sk) => return Ok(sk),
            Err(Error::NotCoprime(_)) => continue,
            Err(e) => return Err(e),
        }
    }
    Err(Error::ResampleExhausted(format!("no admissible set of {m} primes found below {q_max}")))
}

/// `d_i = ⊗_{j≠i} α_j`.
pub fn partial_products(sk: &SecretKey) -> Result<Vec<RingElement>> {
    let gens = sk.generators().ok_or(Error::NotPrincipal)?;
    let one = RingElement::one(sk.context());
    Ok((0..gens.len())
        .map(|i| {
            gens.iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .fold(one.clone(), |acc, (_, g)| acc.convolve(g))
        })
        .collect())
}

/// Finds `D` with `d ⊗ D ≡ e (mod I)`, reduced into `F(I)`.
///
/// Solves `H*(d) x + B_I y = e` by HNF with transform on `[H*(d) | B_I]`.
pub fn invert_mod_ideal(d: &RingElement, ideal: &IdealLattice) -> Result<RingElement> {
    if !same_context(d.context(), ideal.context()) {
        return Err(Error::ContextMismatch);
    }
    let n = ideal.dim();
    let reduced = ideal.reduce(d);
    let mut gens = reduced.ideal_matrix().columns();
    gens.extend(ideal.hnf_basis().columns());
    let (h, coefs) = hnf_with_transform(n, &gens).map_err(|_| Error::NotCoprime("⟨d⟩ + I is singular".into()))?;
    if h != IntegerMatrix::identity(n) {
        return Err(Error::NotCoprime("⟨d⟩ + I ≠ Z^n".into()));
    }
    let x = RingElement::new(d.context(), coefs[0][..n].to_vec())?;
    let inverse = ideal.reduce(&x);
    let one = RingElement::one(d.context());
    if ideal.reduce(&d.convolve(&inverse)) != ideal.reduce(&one) {
        return Err(Error::SelfCheck("modular inverse does not satisfy d ⊗ D ≡ e".into()));
    }
    Ok(inverse)
}

/// Checks `A_i ≡ e (mod I_i)` and `A_i ≡ 0 (mod I_j)` for `j ≠ i`.
pub fn check_crt_congruences(ideals: &[IdealLattice], crt_vectors: &[RingElement]) -> Result<()> {
    if ideals.len() != crt_vectors.len() {
        return Err(Error::InvalidParameter("key slot counts differ".into()));
    }
    for (i, a) in crt_vectors.iter().enumerate() {
        if !same_context(a.context(), ideals[0].context()) {
            return Err(Error::ContextMismatch);
        }
        for (j, ideal) in ideals.iter().enumerate() {
            let residue = ideal.reduce(a);
            let expected = if i == j {
                ideal.reduce(&RingElement::one(a.context()))
            } else {
                RingElement::zero(a.context())
            };
            if residue != expected {
                return Err(Error::SelfCheck(format!("A_{} mod I_{} = {residue}, expected {expected}", i + 1, j + 1)));
            }
        }
    }
    Ok(())
}

/// Public key `A_i = d_i ⊗ D_i`, each reduced into `F(I_1 ⋯ I_m)`.
pub fn gen_public(sk: &SecretKey) -> Result<PublicKey> {
    let ds = partial_products(sk)?;
    let product = sk.product_lattice();
    let mut crt = Vec::with_capacity(ds.len());
    for (d, ideal) in ds.iter().zip(sk.ideals()) {
        let inv = invert_mod_ideal(d, ideal)?;
        crt.push(product.reduce(&d.convolve(&inv)));
    }
    check_crt_congruences(sk.ideals(), &crt)?;
    PublicKey::new(sk.context(), crt, sk.moduli().to_vec())
}

/// CRT basis for arbitrary (not necessarily principal) pairwise coprime ideals:
/// `A_i = b` from a split `a + b = e` with `a ∈ I_i`, `b ∈ Π_{j≠i} I_j`.
pub fn crt_basis(ideals: &[IdealLattice]) -> Result<Vec<RingElement>> {
    for a in 0..ideals.len() {
        for b in a + 1..ideals.len() {
            if !is_coprime(&ideals[a], &ideals[b])? {
                return Err(Error::NotCoprime(format!("ideals {} and {}", a + 1, b + 1)));
            }
        }
    }
    if ideals.len() == 1 {
        return Ok(vec![RingElement::one(ideals[0].context())]);
    }
    let product = ideal_product(ideals)?;
    (0..ideals.len())
        .map(|i| {
            let others: Vec<IdealLattice> =
                ideals.iter().enumerate().filter(|&(j, _)| j != i).map(|(_, x)| x.clone()).collect();
            let rest = ideal_product(&others)?;
            let (_, b) = coprime_split(&ideals[i], &rest)?;
            Ok(product.reduce(&b))
        })
        .collect()
}

/// The unique `x ∈ F(I_1 ⋯ I_m)` with `x ≡ targets_i (mod I_i)` for every `i`.
pub fn crt_solve(ideals: &[IdealLattice], targets: &[RingElement]) -> Result<RingElement> {
    if ideals.len() != targets.len() || ideals.is_empty() {
        return Err(Error::InvalidParameter("need one target per ideal".into()));
    }
    let basis = crt_basis(ideals)?;
    let ctx = ideals[0].context();
    let mut x = RingElement::zero(ctx);
    for (t, a) in targets.iter().zip(&basis) {
        x = &x + &t.convolve(a);
    }
    Ok(ideal_product(ideals)?.reduce(&x))
}
