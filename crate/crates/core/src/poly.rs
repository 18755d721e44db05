//! Dense integer polynomials, constant term first, and the subresultant
//! resultant used to cross-check ideal-matrix determinants.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

/// Drops trailing zero coefficients. The zero polynomial becomes `[]`.
pub fn trim(mut p: Vec<BigInt>) -> Vec<BigInt> {
    while p.last().is_some_and(Zero::is_zero) {
        p.pop();
    }
    p
}

/// Degree, or `None` for the zero polynomial.
pub fn degree(p: &[BigInt]) -> Option<usize> {
    p.iter().rposition(|c| !c.is_zero())
}

pub fn mul(a: &[BigInt], b: &[BigInt]) -> Vec<BigInt> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![BigInt::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    trim(out)
}

/// gcd of the coefficients, non-negative.
pub fn content(p: &[BigInt]) -> BigInt {
    p.iter().fold(BigInt::zero(), |g, c| g.gcd(c))
}

/// Pseudo-remainder: `lc(b)^(deg a - deg b + 1) * a = q*b + r` with `deg r < deg b`.
pub fn pseudo_rem(a: &[BigInt], b: &[BigInt]) -> Vec<BigInt> {
    let db = degree(b).expect("pseudo-remainder by zero polynomial");
    let mut r = trim(a.to_vec());
    let da = match degree(&r) {
        Some(d) => d,
        None => return r,
    };
    if da < db {
        return r;
    }
    let lb = b[db].clone();
    let mut e = da - db + 1;
    while let Some(dr) = degree(&r) {
        if dr < db {
            break;
        }
        let lr = r[dr].clone();
        let shift = dr - db;
        for c in r.iter_mut() {
            *c *= &lb;
        }
        for (i, bc) in b.iter().enumerate().take(db + 1) {
            r[i + shift] -= &lr * bc;
        }
        r = trim(r);
        e -= 1;
    }
    let scale = num_traits::pow(lb, e);
    trim(r.into_iter().map(|c| c * &scale).collect())
}

/// Resultant of two integer polynomials via the subresultant remainder sequence.
pub fn resultant(a: &[BigInt], b: &[BigInt]) -> BigInt {
    let (mut a, mut b) = (trim(a.to_vec()), trim(b.to_vec()));
    let (Some(mut da), Some(mut db)) = (degree(&a), degree(&b)) else {
        return BigInt::zero();
    };
    let mut sign = false;
    if da < db {
        std::mem::swap(&mut a, &mut b);
        std::mem::swap(&mut da, &mut db);
        if da % 2 == 1 && db % 2 == 1 {
            sign = true;
        }
    }
    if db == 0 {
        let r = num_traits::pow(b[0].clone(), da);
        return if sign { -r } else { r };
    }

    let ca = content(&a);
    let cb = content(&b);
    a.iter_mut().for_each(|c| *c /= &ca);
    b.iter_mut().for_each(|c| *c /= &cb);
    let t = num_traits::pow(ca, db) * num_traits::pow(cb, da);

    let mut g = BigInt::one();
    let mut h = BigInt::one();
    loop {
        let da = degree(&a).unwrap();
        let db = degree(&b).unwrap();
        let delta = da - db;
        if da % 2 == 1 && db % 2 == 1 {
            sign = !sign;
        }
        let r = pseudo_rem(&a, &b);
        a = b;
        let divisor = &g * num_traits::pow(h.clone(), delta);
        b = r.into_iter().map(|c| c / &divisor).collect();
        g = a[degree(&a).unwrap()].clone();
        // h <- g^delta / h^(delta-1)
        h = if delta == 0 {
            h
        } else {
            num_traits::pow(g.clone(), delta) / num_traits::pow(h, delta - 1)
        };
        match degree(&b) {
            None => return BigInt::zero(),
            Some(0) => break,
            Some(_) => {}
        }
    }
    let da = degree(&a).unwrap();
    let lb = b[0].clone();
    let h = num_traits::pow(lb, da) / num_traits::pow(h, da - 1);
    let r = t * h;
    if sign {
        -r
    } else {
        r
    }
}

/// Reduces `p` modulo the monic polynomial `x^n - sum(phi_i x^i)`, returning `n` coefficients.
pub fn reduce_mod_monic(mut p: Vec<BigInt>, phi: &[BigInt]) -> Vec<BigInt> {
    let n = phi.len();
    while p.len() > n {
        let top = p.pop().unwrap();
        if top.is_zero() {
            continue;
        }
        let shift = p.len() - n;
        for (i, f) in phi.iter().enumerate() {
            if !f.is_zero() {
                p[shift + i] += &top * f;
            }
        }
    }
    p.resize(n, BigInt::zero());
    p
}

pub fn is_negative_lc(p: &[BigInt]) -> bool {
    degree(p).is_some_and(|d| p[d].is_negative())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(v: &[i64]) -> Vec<BigInt> {
        v.iter().map(|&x| BigInt::from(x)).collect()
    }

    #[test]
    fn pseudo_remainder_identity() {
        // 2^(3-1+1) * (x^3 + 1) = q * (2x + 1) + r, r = -8 + 8 = lc^3 * f(-1/2)
        let r = pseudo_rem(&p(&[1, 0, 0, 1]), &p(&[1, 2]));
        assert_eq!(r, p(&[7]));
    }

    #[test]
    fn resultant_known_values() {
        // Res(x^2+x+1, 2+x) = (2+w)(2+w') = 4 - 2 + 1
        assert_eq!(resultant(&p(&[1, 1, 1]), &p(&[2, 1])), BigInt::from(3));
        assert_eq!(resultant(&p(&[-1, 0, 1]), &p(&[1, 1])), BigInt::zero());
        assert_eq!(resultant(&p(&[1, 1, 1]), &p(&[5])), BigInt::from(25));
        // Res(x^2 - 2, x^2 - 3) = (2-3)^2 = 1
        assert_eq!(resultant(&p(&[-2, 0, 1]), &p(&[-3, 0, 1])), BigInt::one());
        // antisymmetry for odd degrees: Res(x, x-1) = -1, Res(x-1, x) = 1
        assert_eq!(resultant(&p(&[0, 1]), &p(&[-1, 1])), BigInt::from(-1));
        assert_eq!(resultant(&p(&[-1, 1]), &p(&[0, 1])), BigInt::from(1));
    }

    #[test]
    fn reduction_mod_cyclotomic() {
        // x^2 mod x^2+x+1 = -x - 1
        let phi = p(&[-1, -1]);
        assert_eq!(reduce_mod_monic(p(&[0, 0, 1]), &phi), p(&[-1, -1]));
        assert_eq!(reduce_mod_monic(p(&[0, 0, 0, 1]), &phi), p(&[1, 0]));
    }
}
