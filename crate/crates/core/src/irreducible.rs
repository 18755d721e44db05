//! Probabilistic irreducibility gate for the modulus polynomial.
//!
//! For each sampled prime `ℓ` where `φ mod ℓ` is squarefree, the degrees of its
//! irreducible factors over `F_ℓ` are found by distinct-degree factorization.
//! Any factorization over `Z` must refine to each of these, so the possible
//! degrees of a proper integer factor are the subset sums common to all
//! primes. If none remain, `φ` is certainly irreducible.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::ToPrimitive;
use rand::Rng;

use crate::primes::{is_prime, mul_mod, pow_mod};

type Fp = Vec<u64>;

fn trim(mut a: Fp) -> Fp {
    while a.last() == Some(&0) {
        a.pop();
    }
    a
}

fn deg(a: &Fp) -> Option<usize> {
    a.iter().rposition(|&c| c != 0)
}

fn inv(a: u64, l: u64) -> u64 {
    pow_mod(a, l - 2, l)
}

fn rem(a: &Fp, b: &Fp, l: u64) -> Fp {
    let db = deg(b).expect("division by zero polynomial");
    let lead_inv = inv(b[db], l);
    let mut r = trim(a.clone());
    while let Some(dr) = deg(&r) {
        if dr < db {
            break;
        }
        let f = mul_mod(r[dr], lead_inv, l);
        let shift = dr - db;
        for (i, &bc) in b.iter().enumerate().take(db + 1) {
            r[i + shift] = (r[i + shift] + l - mul_mod(f, bc, l)) % l;
        }
        r = trim(r);
    }
    r
}

fn mul_rem(a: &Fp, b: &Fp, m: &Fp, l: u64) -> Fp {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![0u64; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            out[i + j] = (out[i + j] + mul_mod(x, y, l)) % l;
        }
    }
    rem(&out, m, l)
}

fn gcd(a: &Fp, b: &Fp, l: u64) -> Fp {
    let (mut a, mut b) = (trim(a.clone()), trim(b.clone()));
    while deg(&b).is_some() {
        let r = rem(&a, &b, l);
        a = b;
        b = r;
    }
    a
}

fn sub(a: &Fp, b: &Fp, l: u64) -> Fp {
    let n = a.len().max(b.len());
    let out = (0..n)
        .map(|i| {
            let x = a.get(i).copied().unwrap_or(0);
            let y = b.get(i).copied().unwrap_or(0);
            (x + l - y) % l
        })
        .collect();
    trim(out)
}

fn div_exact(a: &Fp, b: &Fp, l: u64) -> Fp {
    let db = deg(b).unwrap();
    let lead_inv = inv(b[db], l);
    let mut r = trim(a.clone());
    let da = deg(&r).unwrap_or(0);
    let mut q = vec![0u64; da.saturating_sub(db) + 1];
    while let Some(dr) = deg(&r) {
        if dr < db {
            break;
        }
        let f = mul_mod(r[dr], lead_inv, l);
        let shift = dr - db;
        q[shift] = f;
        for (i, &bc) in b.iter().enumerate().take(db + 1) {
            r[i + shift] = (r[i + shift] + l - mul_mod(f, bc, l)) % l;
        }
        r = trim(r);
    }
    trim(q)
}

fn derivative(a: &Fp, l: u64) -> Fp {
    trim(a.iter().enumerate().skip(1).map(|(i, &c)| mul_mod(c, i as u64 % l, l)).collect())
}

/// Degrees of the irreducible factors of a squarefree monic `f` over `F_l`,
/// or `None` if `f` is not squarefree.
fn factor_degrees(f: &Fp, l: u64) -> Option<Vec<usize>> {
    let g = gcd(f, &derivative(f, l), l);
    if deg(&g) != Some(0) {
        return None;
    }
    let mut degrees = Vec::new();
    let mut rest = f.clone();
    let mut h = vec![0u64, 1];
    let mut i = 0;
    while let Some(dr) = deg(&rest) {
        if dr == 0 {
            break;
        }
        i += 1;
        if 2 * i > dr {
            degrees.push(dr);
            break;
        }
        h = pow_x_compose(&h, &rest, l);
        let x = vec![0u64, 1];
        let g = gcd(&rest, &sub(&h, &x, l), l);
        if let Some(dg) = deg(&g) {
            if dg > 0 {
                degrees.extend(std::iter::repeat_n(i, dg / i));
                rest = div_exact(&rest, &g, l);
                h = rem(&h, &rest, l);
            }
        }
    }
    Some(degrees)
}

/// `h^l mod m`, i.e. `x^{l^{i+1}}` given `h = x^{l^i}`.
fn pow_x_compose(h: &Fp, m: &Fp, l: u64) -> Fp {
    let mut acc = vec![1u64];
    let mut base = rem(h, m, l);
    let mut e = l;
    while e > 0 {
        if e & 1 == 1 {
            acc = mul_rem(&acc, &base, m, l);
        }
        base = mul_rem(&base, &base, m, l);
        e >>= 1;
    }
    acc
}

fn subset_sums(degrees: &[usize], n: usize) -> Vec<bool> {
    let mut reach = vec![false; n + 1];
    reach[0] = true;
    for &d in degrees {
        for s in (d..=n).rev() {
            if reach[s - d] {
                reach[s] = true;
            }
        }
    }
    reach
}

/// Runs the factor-degree test over up to `trials` random primes.
///
/// `poly` is monic with constant term first. Returns `true` only when
/// irreducibility over `Z` is certified.
pub fn probably_irreducible<R: Rng + ?Sized>(poly: &[BigInt], trials: usize, rng: &mut R) -> bool {
    let n = poly.len() - 1;
    if n <= 1 {
        return true;
    }
    let mut possible = vec![true; n + 1];
    let mut tried = 0;
    let mut attempts = 0;
    while tried < trials && attempts < 20 * trials {
        attempts += 1;
        let l: u64 = rng.gen_range(3..20_000);
        if !is_prime(l) {
            continue;
        }
        let lb = BigInt::from(l);
        let f: Fp = poly.iter().map(|c| c.mod_floor(&lb).to_u64().unwrap()).collect();
        let Some(degrees) = factor_degrees(&f, l) else {
            continue;
        };
        tried += 1;
        let sums = subset_sums(&degrees, n);
        for (p, s) in possible.iter_mut().zip(sums) {
            *p &= s;
        }
        if possible[1..n].iter().all(|&p| !p) {
            return true;
        }
    }
    false
}
