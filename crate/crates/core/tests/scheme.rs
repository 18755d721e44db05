use std::sync::Arc;

use num_bigint::BigInt;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use crtfhe::fhe::{compress, decrypt, encrypt_residues, eval_circuit, eval_reference, hom_add, hom_mul, Plaintext};
use crtfhe::keygen::{gen_public, gen_secret_cyclotomic, gen_secret_general, secret_from_primes};
use crtfhe::lattice::is_coprime;
use crtfhe::security::{covering_radius_estimate, public_decrypt};
use crtfhe::{Circuit, Context, DecryptMode, ModulusPolynomial, RingElement};

fn big(v: &[i64]) -> Vec<BigInt> {
    v.iter().map(|&x| BigInt::from(x)).collect()
}

#[test]
fn general_three_slot_key_is_pairwise_coprime() {
    let phi = ModulusPolynomial::from_i64(&[-1, -1]).unwrap();
    let sk = gen_secret_general(&phi, 3, &mut ChaCha20Rng::seed_from_u64(7), 4).unwrap();
    let gens = sk.generators().unwrap();
    let e = RingElement::one(sk.context());
    assert_eq!(&gens[0] + &gens[1], e);
    for i in 0..3 {
        assert_ne!(gens[i].ring_determinant(), BigInt::from(0));
        for j in i + 1..3 {
            assert!(is_coprime(&sk.ideals()[i], &sk.ideals()[j]).unwrap());
        }
    }
}

#[test]
fn depth_twenty_chain_matches_reference() {
    let sk = secret_from_primes(5, &[2, 3, 11]).unwrap();
    let pk = gen_public(&sk).unwrap();
    let mut rng = ChaCha20Rng::seed_from_u64(20);
    let mut text = String::from("INPUT 0 1 2 3 4 5 6 7 8 9 10 11 12 13 14 15 16 17 18 19 20\n");
    for k in 0..20 {
        let (prev, fresh) = (if k == 0 { 0 } else { 20 + k }, k + 1);
        let op = if k % 2 == 0 { "ADD" } else { "MUL" };
        text.push_str(&format!("{op} {prev} {fresh} -> {}\n", 21 + k));
    }
    let circuit: Circuit = text.parse().unwrap();
    let plain: Vec<Plaintext> = (0..21)
        .map(|_| {
            let r = pk.moduli().iter().map(|t| BigInt::from(rng.gen_range(0..u64::MAX)) % t).collect();
            Plaintext::new(r, pk.moduli().to_vec()).unwrap()
        })
        .collect();
    let cts: Vec<_> = plain.iter().map(|u| crtfhe::fhe::encrypt(&pk, u).unwrap()).collect();
    let out = eval_circuit(&circuit, &cts).unwrap();
    assert_eq!(decrypt(&sk, &out, DecryptMode::Strict).unwrap(), eval_reference(&circuit, &plain).unwrap());
}

#[test]
fn square_plus_identity() {
    let sk = secret_from_primes(3, &[2, 7]).unwrap();
    let pk = gen_public(&sk).unwrap();
    let circuit: Circuit = "INPUT 0\nMUL 0 0 -> 1\nADD 1 0 -> 2\n".parse().unwrap();
    for a in 0..3 {
        for b in 0..43 {
            let c = encrypt_residues(&pk, &big(&[a, b])).unwrap();
            let out = eval_circuit(&circuit, &[c]).unwrap();
            let got = decrypt(&sk, &out, DecryptMode::Strict).unwrap();
            assert_eq!(got.residues(), big(&[(a * a + a) % 3, (b * b + b) % 43]).as_slice());
        }
    }
}

#[test]
fn identities_and_compression() {
    let sk = gen_secret_cyclotomic(11, 3, &mut ChaCha20Rng::seed_from_u64(3), 100).unwrap();
    let pk = gen_public(&sk).unwrap();
    let zero = encrypt_residues(&pk, &big(&[0, 0, 0])).unwrap();
    let one = encrypt_residues(&pk, &big(&[1, 1, 1])).unwrap();
    let c = encrypt_residues(&pk, &big(&[2, 5, 9])).unwrap();
    let expected = decrypt(&sk, &c, DecryptMode::Strict).unwrap();
    assert_eq!(decrypt(&sk, &hom_add(&c, &zero).unwrap(), DecryptMode::Strict).unwrap(), expected);
    assert_eq!(decrypt(&sk, &hom_mul(&c, &one).unwrap(), DecryptMode::Strict).unwrap(), expected);
    let mut big_c = c.clone();
    for _ in 0..6 {
        big_c = hom_mul(&big_c, &big_c).unwrap();
    }
    let small = compress(&sk, &big_c).unwrap();
    assert!(sk.product_lattice().in_fundamental_box(small.body()));
    assert_eq!(
        decrypt(&sk, &small, DecryptMode::Strict).unwrap(),
        decrypt(&sk, &big_c, DecryptMode::Strict).unwrap()
    );
}

/// Public data alone spans a sublattice of each secret ideal; at desk scale it
/// decrypts every honest ciphertext.
#[test]
fn public_key_decrypts_without_secret() {
    let mut rng = ChaCha20Rng::seed_from_u64(99);
    let mut keys = Vec::new();
    for p in [3, 5, 7] {
        let sk = gen_secret_cyclotomic(p, 2, &mut rng, 60).unwrap();
        keys.push(gen_public(&sk).unwrap());
    }
    for phi in [vec![-1, -1], vec![-1, -1, 0]] {
        let sk = gen_secret_general(&ModulusPolynomial::from_i64(&phi).unwrap(), 2, &mut rng, 3).unwrap();
        keys.push(gen_public(&sk).unwrap());
    }
    for pk in &keys {
        for _ in 0..20 {
            let u: Vec<BigInt> = pk.moduli().iter().map(|t| BigInt::from(rng.gen_range(0..u64::MAX)) % t).collect();
            let c = encrypt_residues(pk, &u).unwrap();
            let c2 = hom_mul(&c, &c).unwrap();
            let got = public_decrypt(pk, &c2).unwrap().expect("scalar residue");
            let want: Vec<BigInt> = u.iter().zip(pk.moduli()).map(|(x, t)| x * x % t).collect();
            assert_eq!(got.residues(), want.as_slice());
        }
    }
}

/// Circumradius² of the non-obtuse triangle on a Lagrange-reduced basis.
fn exact_covering_radius_2d(b1: (i64, i64), b2: (i64, i64)) -> num_rational::BigRational {
    let dot = |a: (i64, i64), b: (i64, i64)| a.0 * b.0 + a.1 * b.1;
    let (mut u, mut v) = (b1, b2);
    loop {
        if dot(u, u) > dot(v, v) {
            std::mem::swap(&mut u, &mut v);
        }
        if 2 * dot(u, v).abs() <= dot(u, u) {
            break;
        }
        let mu = (dot(u, v) as f64 / dot(u, u) as f64).round() as i64;
        v = (v.0 - mu * u.0, v.1 - mu * u.1);
    }
    if dot(u, v) < 0 {
        v = (-v.0, -v.1);
    }
    let w = (u.0 - v.0, u.1 - v.1);
    let det = u.0 * v.1 - u.1 * v.0;
    num_rational::BigRational::new(
        BigInt::from(dot(u, u) * dot(v, v) * dot(w, w)),
        BigInt::from(4 * det * det),
    )
}

#[test]
fn covering_radius_estimate_never_exceeds_exact_value() {
    let ctx: Context = Arc::new(ModulusPolynomial::cyclotomic(3).unwrap());
    for a in -4i64..=4 {
        for b in -4i64..=4 {
            let Ok(ideal) = crtfhe::lattice::principal_ideal(&RingElement::from_i64(&ctx, &[a, b]).unwrap()) else {
                continue;
            };
            if ideal.determinant() > BigInt::from(20) {
                continue;
            }
            let h = ideal.hnf_basis();
            let col = |j: usize| {
                let c = h.column(j);
                (i64::try_from(&c[0]).unwrap(), i64::try_from(&c[1]).unwrap())
            };
            let exact = exact_covering_radius_2d(col(0), col(1));
            let mut prev = num_rational::BigRational::from_integer(BigInt::from(0));
            for samples in [1, 10, 100] {
                let est = covering_radius_estimate(&ideal, samples, &mut ChaCha20Rng::seed_from_u64(5)).unwrap();
                assert!(est >= prev && est <= exact, "⟨({a},{b})⟩: {est} vs {exact}");
                prev = est;
            }
        }
    }
}
