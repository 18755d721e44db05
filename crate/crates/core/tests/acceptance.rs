//! Acceptance suite. Runs every criterion, prints one line each, and exits
//! nonzero if any fails.

use std::collections::BTreeSet;
use std::sync::Arc;
use std::time::{Duration, Instant};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use crtfhe::fhe::{decrypt, encrypt_residues, eval_circuit};
use crtfhe::keygen::{crt_solve, gen_public, gen_secret_cyclotomic, gen_secret_general, secret_from_primes};
use crtfhe::lattice::{is_coprime, principal_ideal};
use crtfhe::poly;
use crtfhe::security::{brute_force_knapsack, check_norm_bound, norm_constants, scheme_as_knapsack};
use crtfhe::{Circuit, Context, DecryptMode, Error, Gate, GateOp, IdealLattice, ModulusPolynomial, PublicKey, RingElement, SecretKey};

type Outcome = std::result::Result<String, String>;

const PRIMES_P: [u64; 5] = [3, 5, 7, 11, 13];

fn big(v: i64) -> BigInt {
    BigInt::from(v)
}

fn cyclotomic_keys(seed: u64) -> Vec<(SecretKey, PublicKey)> {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut keys = Vec::new();
    for p in PRIMES_P {
        for m in [2, 3] {
            let sk = gen_secret_cyclotomic(p, m, &mut rng, 100).expect("admissible primes below 100");
            let pk = gen_public(&sk).expect("public key");
            keys.push((sk, pk));
        }
    }
    keys
}

fn general_keys(seed: u64) -> Vec<(SecretKey, PublicKey)> {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut keys = Vec::new();
    for phi in [vec![-1, -1], vec![-1, 0], vec![-1, -1, 0], vec![2, 0], vec![-3, 1, 0, 0]] {
        let phi = ModulusPolynomial::from_i64(&phi).unwrap();
        for m in [2, 3] {
            let sk = gen_secret_general(&phi, m, &mut rng, 3).expect("general keygen");
            let pk = gen_public(&sk).expect("public key");
            keys.push((sk, pk));
        }
    }
    keys
}

fn random_residues<R: Rng>(moduli: &[BigInt], rng: &mut R) -> Vec<BigInt> {
    moduli
        .iter()
        .map(|t| {
            // moduli exceed u64 at n = 12; sample from 128 random bits reduced mod t
            let hi: u64 = rng.gen();
            let lo: u64 = rng.gen();
            let wide: BigInt = (BigInt::from(hi) << 64u32) + BigInt::from(lo);
            wide.mod_floor(t)
        })
        .collect()
}

fn random_element<R: Rng>(ctx: &Context, bound: i64, rng: &mut R) -> RingElement {
    let coords = (0..ctx.degree()).map(|_| big(rng.gen_range(-bound..=bound))).collect();
    RingElement::new(ctx, coords).unwrap()
}

/// `q^n − q^{n−1} + ⋯ − q + 1` by Horner's rule.
fn alternating_sum(q: u64, n: usize) -> BigInt {
    let mut acc = BigInt::one();
    for _ in 0..n {
        acc = acc * -big(q as i64) + 1;
    }
    acc
}

fn criterion_1(keys: &[(SecretKey, PublicKey)]) -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha20Rng::seed_from_u64(101);
    let mut total = 0;
    for (sk, pk) in keys {
        for _ in 0..100 {
            let u = random_residues(pk.moduli(), &mut rng);
            let c = encrypt_residues(pk, &u).map_err(|e| e.to_string())?;
            let back = decrypt(sk, &c, DecryptMode::Strict).map_err(|e| e.to_string())?;
            if back.residues() != u.as_slice() {
                return Err(format!("round trip failed for {u:?}"));
            }
            total += 1;
        }
    }
    let elapsed = start.elapsed();
    if elapsed > Duration::from_secs(60) {
        return Err(format!("{total} round trips took {elapsed:?}"));
    }
    Ok(format!("{total} round trips over {} keys, 0 failures, {:.2?}", keys.len(), elapsed))
}

fn random_circuit<R: Rng>(inputs: usize, gates: usize, rng: &mut R) -> Circuit {
    let gates = (0..gates)
        .map(|k| {
            let avail = inputs + k;
            Gate {
                op: if rng.gen_bool(0.5) { GateOp::Add } else { GateOp::Mul },
                lhs: rng.gen_range(0..avail),
                rhs: rng.gen_range(0..avail),
                out: avail,
            }
        })
        .collect();
    Circuit::new((0..inputs).collect(), gates, None).unwrap()
}

/// Independent slotwise interpreter over `⊕ Z_{t_i}`.
fn reference(circuit: &Circuit, inputs: &[Vec<BigInt>], moduli: &[BigInt]) -> Vec<BigInt> {
    let mut wires: Vec<Vec<BigInt>> = inputs.to_vec();
    for g in circuit.gates() {
        let (a, b) = (&wires[g.lhs], &wires[g.rhs]);
        let v = a
            .iter()
            .zip(b)
            .zip(moduli)
            .map(|((x, y), t)| match g.op {
                GateOp::Add => (x + y).mod_floor(t),
                GateOp::Mul => (x * y).mod_floor(t),
            })
            .collect();
        wires.push(v);
    }
    wires[circuit.output()].clone()
}

fn criterion_2(keys: &[(SecretKey, PublicKey)], general: &[(SecretKey, PublicKey)]) -> Outcome {
    let mut rng = ChaCha20Rng::seed_from_u64(202);
    let mut count = 0;
    let mut max_bits = 0;
    for (sk, pk) in keys.iter().chain(general) {
        for _ in 0..20 {
            let circuit = random_circuit(4, 50, &mut rng);
            let plain: Vec<Vec<BigInt>> = (0..4).map(|_| random_residues(pk.moduli(), &mut rng)).collect();
            let cts: Vec<_> = plain.iter().map(|u| encrypt_residues(pk, u).unwrap()).collect();
            let out = eval_circuit(&circuit, &cts).map_err(|e| e.to_string())?;
            max_bits = max_bits.max(out.body().coords().iter().map(|c| c.bits()).max().unwrap_or(0));
            let got = decrypt(sk, &out, DecryptMode::Strict).map_err(|e| e.to_string())?;
            if got.residues() != reference(&circuit, &plain, pk.moduli()).as_slice() {
                return Err(format!("circuit mismatch on key with moduli {:?}", pk.moduli()));
            }
            count += 1;
        }
    }
    Ok(format!("{count} circuits of 50 gates over {} keys, 0 mismatches, largest output coordinate {max_bits} bits", keys.len() + general.len()))
}

fn congruences_hold(sk: &SecretKey, pk: &PublicKey) -> bool {
    let ctx = sk.context();
    let e = RingElement::one(ctx);
    pk.crt_vectors().iter().enumerate().all(|(i, a)| {
        sk.ideals().iter().enumerate().all(|(j, ideal)| {
            // A_i − e ∈ I_i and A_j ∈ I_i, checked by membership rather than reduction
            if i == j {
                ideal.contains(&(a - &e))
            } else {
                ideal.contains(a)
            }
        })
    })
}

fn criterion_3(keys: &[(SecretKey, PublicKey)], general: &[(SecretKey, PublicKey)]) -> Outcome {
    let mut checked = 0;
    for (sk, pk) in keys {
        if !congruences_hold(sk, pk) {
            return Err(format!("cyclotomic key {:?} violates the congruences", sk.params()));
        }
        checked += 1;
    }
    for (sk, pk) in general {
        if !congruences_hold(sk, pk) {
            return Err(format!("general key over {} violates the congruences", sk.context()));
        }
        checked += 1;
    }
    Ok(format!("{checked} keys (cyclotomic and general), all congruences hold"))
}

fn criterion_4() -> Outcome {
    let mut checked = 0;
    for p in [3u64, 5, 7] {
        let ctx: Context = Arc::new(ModulusPolynomial::cyclotomic(p).unwrap());
        let n = ctx.degree();
        let qs: Vec<u64> = (2u64..).filter(|&q| q != p && (2..q).all(|d| q % d != 0)).take(10).collect();
        for q in qs {
            let mut coords = vec![BigInt::zero(); n];
            coords[0] = big(q as i64);
            coords[n - 1] = BigInt::one();
            let ideal = principal_ideal(&RingElement::new(&ctx, coords).unwrap()).map_err(|e| e.to_string())?;
            let expected = alternating_sum(q, n);
            if ideal.one_dim_modulus() != expected {
                return Err(format!("p={p} q={q}: t = {} but closed form gives {expected}", ideal.one_dim_modulus()));
            }
            checked += 1;
        }
    }
    Ok(format!("{checked} (p, q) pairs, HNF modulus equals the alternating sum in every case"))
}

fn criterion_5() -> Outcome {
    let mut rng = ChaCha20Rng::seed_from_u64(505);
    let mut contexts: Vec<ModulusPolynomial> = PRIMES_P.iter().map(|&p| ModulusPolynomial::cyclotomic(p).unwrap()).collect();
    contexts.push(ModulusPolynomial::from_i64(&[2, -1, 0, 1]).unwrap());
    contexts.push(ModulusPolynomial::from_i64(&[-3, 0, 2, 0, 0, 1]).unwrap());
    let mut lines = Vec::new();
    for phi in contexts {
        let ctx: Context = Arc::new(phi);
        let k = norm_constants(&ctx);
        let mut worst = num_rational::BigRational::zero();
        for _ in 0..10_000 {
            let a = random_element(&ctx, 20, &mut rng);
            let b = random_element(&ctx, 20, &mut rng);
            let (holds, ratio) = check_norm_bound(&a, &b, &k).map_err(|e| e.to_string())?;
            if !holds {
                return Err(format!("violation over {ctx}: {a} ⊗ {b}"));
            }
            worst = worst.max(ratio);
        }
        lines.push(format!("n={} max ratio² {:.3e}", ctx.degree(), num_traits::ToPrimitive::to_f64(&worst).unwrap()));
    }
    Ok(format!("7 contexts × 10^4 pairs, 0 violations ({})", lines.join("; ")))
}

fn criterion_6(keys: &[(SecretKey, PublicKey)]) -> Outcome {
    let mut rng = ChaCha20Rng::seed_from_u64(606);
    let mut ideals: Vec<IdealLattice> = keys.iter().flat_map(|(sk, _)| sk.ideals().to_vec()).collect();
    let phi3: Context = Arc::new(ModulusPolynomial::cyclotomic(3).unwrap());
    let gauss: Context = Arc::new(ModulusPolynomial::from_i64(&[-1, 0]).unwrap());
    let mut small = Vec::new();
    for ctx in [&phi3, &gauss] {
        for a in -6i64..=6 {
            for b in -6i64..=6 {
                if let Ok(ideal) = principal_ideal(&RingElement::from_i64(ctx, &[a, b]).unwrap()) {
                    if ideal.determinant() <= big(200) {
                        small.push(ideal);
                    }
                }
            }
        }
    }
    ideals.extend(small.iter().step_by(7).cloned());
    let mut vectors = 0;
    for ideal in &ideals {
        for _ in 0..1000 {
            let c = random_element(ideal.context(), 1_000_000, &mut rng);
            let r = ideal.reduce(&c);
            if !ideal.in_fundamental_box(&r) || !ideal.contains(&(&c - &r)) {
                return Err(format!("reduction of {c} failed"));
            }
            vectors += 1;
        }
    }
    // brute force at n = 2: a window of side det contains a full residue system
    let mut enumerated = 0;
    for ideal in small.iter().step_by(5) {
        let det = ideal.determinant();
        let side: i64 = num_traits::ToPrimitive::to_i64(&det).unwrap();
        let mut reps = BTreeSet::new();
        for x in -side..side {
            for y in -side..side {
                reps.insert(ideal.reduce(&RingElement::from_i64(ideal.context(), &[x, y]).unwrap()).into_coords());
            }
        }
        if BigInt::from(reps.len()) != det {
            return Err(format!("{} representatives for determinant {det}", reps.len()));
        }
        let reps: Vec<_> = reps.into_iter().map(|v| RingElement::new(ideal.context(), v).unwrap()).collect();
        for (i, a) in reps.iter().enumerate() {
            if reps[i + 1..].iter().any(|b| ideal.contains(&(a - b))) {
                return Err(format!("congruent representatives modulo {:?}", ideal.hnf_basis()));
            }
        }
        enumerated += 1;
    }
    Ok(format!("{vectors} reductions over {} ideals; {enumerated} n=2 ideals enumerated to exactly det(I) classes", ideals.len()))
}

fn criterion_7() -> Outcome {
    let mut rng = ChaCha20Rng::seed_from_u64(707);
    let mut contexts: Vec<ModulusPolynomial> = PRIMES_P.iter().map(|&p| ModulusPolynomial::cyclotomic(p).unwrap()).collect();
    contexts.push(ModulusPolynomial::from_i64(&[1, 1, 0]).unwrap());
    contexts.push(ModulusPolynomial::from_i64(&[-2, 3, 0, -1]).unwrap());
    let mut triples = 0;
    let mut dets = 0;
    for phi in contexts {
        let ctx: Context = Arc::new(phi);
        for _ in 0..1000 {
            let a = random_element(&ctx, 50, &mut rng);
            let b = random_element(&ctx, 50, &mut rng);
            let c = random_element(&ctx, 50, &mut rng);
            let ok = a.convolve(&b) == b.convolve(&a)
                && a.convolve(&b).convolve(&c) == a.convolve(&b.convolve(&c))
                && a.convolve(&(&b + &c)) == &a.convolve(&b) + &a.convolve(&c)
                && a.ideal_matrix().mul_vec(b.coords()) == a.convolve(&b).coords()
                && a.convolve(&b).ideal_matrix() == a.ideal_matrix().mul(&b.ideal_matrix());
            if !ok {
                return Err(format!("ring axiom failed over {ctx} for {a}, {b}, {c}"));
            }
            triples += 1;
        }
        for _ in 0..200 {
            let a = random_element(&ctx, 9, &mut rng);
            let by_elimination = a.ideal_matrix().determinant();
            let by_resultant = poly::resultant(&ctx.as_polynomial(), a.coords());
            if by_elimination != by_resultant {
                return Err(format!("det {by_elimination} ≠ resultant {by_resultant} for {a} over {ctx}"));
            }
            dets += 1;
        }
    }
    Ok(format!("{triples} triples satisfy the ring identities; {dets} determinants match the resultant"))
}

fn criterion_8() -> Outcome {
    match secret_from_primes(3, &[2, 5]) {
        Err(Error::NotCoprime(msg)) => {
            let ctx: Context = Arc::new(ModulusPolynomial::cyclotomic(3).unwrap());
            let i2 = principal_ideal(&RingElement::from_i64(&ctx, &[2, 1]).unwrap()).unwrap();
            let i5 = principal_ideal(&RingElement::from_i64(&ctx, &[5, 1]).unwrap()).unwrap();
            if is_coprime(&i2, &i5).unwrap() {
                return Err("⟨(2,1)⟩ and ⟨(5,1)⟩ reported coprime".into());
            }
            let sk = secret_from_primes(3, &[2, 7]).map_err(|e| format!("q=(2,7) rejected: {e}"))?;
            if sk.moduli() != [big(3), big(43)] {
                return Err(format!("q=(2,7) moduli {:?}", sk.moduli()));
            }
            Ok(format!("q=(2,5) rejected ({msg}); q=(2,7) accepted with t = (3, 43)"))
        }
        Err(e) => Err(format!("q=(2,5) rejected with the wrong error: {e}")),
        Ok(_) => Err("q=(2,5) accepted".into()),
    }
}

fn criterion_9() -> Outcome {
    let mut rng = ChaCha20Rng::seed_from_u64(909);
    let contexts = [vec![-1, -1], vec![-1, 0], vec![2, 0], vec![1, 1]];
    let mut solved = 0;
    for phi in contexts {
        let ctx: Context = Arc::new(ModulusPolynomial::from_i64(&phi).unwrap());
        let mut ideals = Vec::new();
        for a in -4i64..=4 {
            for b in 1i64..=3 {
                if let Ok(ideal) = principal_ideal(&RingElement::from_i64(&ctx, &[a, b]).unwrap()) {
                    if ideal.determinant() >= big(2) && !ideals.contains(&ideal) {
                        ideals.push(ideal);
                    }
                }
            }
        }
        for (x, i1) in ideals.iter().enumerate() {
            for i2 in &ideals[x + 1..] {
                if i1.determinant() * i2.determinant() > big(200) || !is_coprime(i1, i2).unwrap() {
                    continue;
                }
                let pair = [i1.clone(), i2.clone()];
                let targets = [random_element(&ctx, 30, &mut rng), random_element(&ctx, 30, &mut rng)];
                let x_crt = crt_solve(&pair, &targets).map_err(|e| e.to_string())?;
                let product = crtfhe::lattice::ideal_product(&pair).unwrap();
                let goal: Vec<_> = pair.iter().zip(&targets).map(|(i, t)| i.reduce(t)).collect();
                let hits: Vec<_> = product
                    .box_points()
                    .into_iter()
                    .filter(|y| pair.iter().zip(&goal).all(|(i, g)| &i.reduce(y) == g))
                    .collect();
                if hits != vec![x_crt.clone()] {
                    return Err(format!("crt_solve gave {x_crt}, exhaustive search found {hits:?}"));
                }
                solved += 1;
            }
        }
    }
    Ok(format!("{solved} coprime pairs with det(product) ≤ 200, crt_solve matches exhaustive search"))
}

fn criterion_10() -> Outcome {
    let sk = secret_from_primes(3, &[2, 7]).map_err(|e| e.to_string())?;
    let pk = gen_public(&sk).map_err(|e| e.to_string())?;
    let mut count = 0;
    for a in 0..3 {
        for b in 0..43 {
            let u = vec![big(a), big(b)];
            let c = encrypt_residues(&pk, &u).unwrap();
            let inst = scheme_as_knapsack(&pk, c.body()).map_err(|e| e.to_string())?;
            if inst.search_space() != big(129) {
                return Err(format!("search space {}", inst.search_space()));
            }
            let sols = brute_force_knapsack(&inst).map_err(|e| e.to_string())?;
            if sols != vec![u.clone()] {
                return Err(format!("u = {u:?} gave solutions {sols:?}"));
            }
            count += 1;
        }
    }
    Ok(format!("all {count} plaintexts recovered uniquely from the 129-tuple space"))
}

fn main() {
    let keys = cyclotomic_keys(2024);
    let general = general_keys(2025);
    let criteria: Vec<(&str, Box<dyn Fn() -> Outcome + '_>)> = vec![
        ("round-trip correctness", Box::new(|| criterion_1(&keys))),
        ("unbounded homomorphism", Box::new(|| criterion_2(&keys, &general))),
        ("key congruences", Box::new(|| criterion_3(&keys, &general))),
        ("cyclotomic one-dimensional modulus", Box::new(criterion_4)),
        ("convolution norm bound", Box::new(criterion_5)),
        ("reduction into the fundamental box", Box::new(|| criterion_6(&keys))),
        ("ring axioms and determinants", Box::new(criterion_7)),
        ("coprimality regression", Box::new(criterion_8)),
        ("CRT uniqueness", Box::new(criterion_9)),
        ("knapsack framing", Box::new(criterion_10)),
    ];
    let mut failures = 0;
    for (k, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = run();
        let elapsed = start.elapsed();
        match outcome {
            Ok(detail) => println!("criterion {:>2} PASS  {name}: {detail} [{elapsed:.2?}]", k + 1),
            Err(detail) => {
                failures += 1;
                println!("criterion {:>2} FAIL  {name}: {detail} [{elapsed:.2?}]", k + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failures} failed", criteria.len() - failures);
    if failures > 0 {
        std::process::exit(1);
    }
}
