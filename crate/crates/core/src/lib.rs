//! Noise-free homomorphic encryption over ideal lattices of `Z[x]/⟨φ(x)⟩`.
//!
//! The secret key is a set of pairwise coprime ideal lattices `I_1, ..., I_m`;
//! the public key is a set of Chinese-remainder vectors `A_i ≡ e (mod I_i)`,
//! `A_i ≡ 0 (mod I_j)`. A plaintext `(u_1, ..., u_m) ∈ ⊕ Z_{t_i}` encrypts to
//! `Σ u_i A_i` and decrypts by reducing into the box `F(I_i)` of each ideal.
//! Sums and convolution products of ciphertexts decrypt to slotwise sums and
//! products, with no depth limit.

pub mod error;
pub mod fhe;
pub mod hnf;
pub mod irreducible;
pub mod keygen;
pub mod lattice;
pub mod matrix;
pub mod poly;
pub mod primes;
pub mod ring;
pub mod security;

pub use error::{Error, Result};
pub use fhe::{Ciphertext, Circuit, DecryptMode, Gate, GateOp, Plaintext};
pub use keygen::{PublicKey, SchemeParams, SecretKey};
pub use lattice::{IdealLattice, RationalVector};
pub use matrix::IntegerMatrix;
pub use ring::{embed_scalar, Context, ModulusPolynomial, RingElement};
