//! Hermite normal form of full-rank integer lattices.
//!
//! Convention: columns are basis vectors, the basis is upper triangular with
//! positive diagonal, and every entry right of the diagonal in row `i` lies in
//! `[0, b_ii)`.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::matrix::IntegerMatrix;

struct Column {
    v: Vec<BigInt>,
    coef: Option<Vec<BigInt>>,
}

impl Column {
    fn is_zero(&self) -> bool {
        self.v.iter().all(Zero::is_zero)
    }

    fn negate(&mut self) {
        self.v.iter_mut().for_each(|x| *x = -&*x);
        if let Some(c) = &mut self.coef {
            c.iter_mut().for_each(|x| *x = -&*x);
        }
    }

    /// `self -= q * other`
    fn sub_mul(&mut self, q: &BigInt, other: &Column) {
        if q.is_zero() {
            return;
        }
        for (a, b) in self.v.iter_mut().zip(&other.v) {
            *a -= q * b;
        }
        if let (Some(a), Some(b)) = (&mut self.coef, &other.coef) {
            for (x, y) in a.iter_mut().zip(b) {
                *x -= q * y;
            }
        }
    }
}

fn combine(x: &[BigInt], y: &[BigInt], s: &BigInt, t: &BigInt, u: &BigInt, w: &BigInt) -> (Vec<BigInt>, Vec<BigInt>) {
    let a = x.iter().zip(y).map(|(p, q)| s * p + t * q).collect();
    let b = x.iter().zip(y).map(|(p, q)| u * p + w * q).collect();
    (a, b)
}

/// Replaces `(p, c)` by `(s p + t c, (a/g) c - (b/g) p)`, which zeroes row `i` of `c`.
fn eliminate(p: &mut Column, c: &mut Column, i: usize) {
    let a = p.v[i].clone();
    let b = c.v[i].clone();
    let ext = a.extended_gcd(&b);
    let (g, s, t) = (ext.gcd, ext.x, ext.y);
    let ag = &a / &g;
    let bg = &b / &g;
    let (nv, mv) = combine(&p.v, &c.v, &s, &t, &-&bg, &ag);
    p.v = nv;
    c.v = mv;
    if let (Some(pc), Some(cc)) = (&p.coef, &c.coef) {
        let (np, nc) = combine(pc, cc, &s, &t, &-&bg, &ag);
        p.coef = Some(np);
        c.coef = Some(nc);
    }
}

fn run(n: usize, mut work: Vec<Column>, modulus: Option<&BigInt>) -> Result<Vec<Column>> {
    let mut basis: Vec<Option<Column>> = (0..n).map(|_| None).collect();
    for i in (0..n).rev() {
        if let Some(d) = modulus {
            let mut v = vec![BigInt::zero(); n];
            v[i] = d.clone();
            work.push(Column { v, coef: None });
        }
        let mut pivot: Option<Column> = None;
        let mut rest = Vec::with_capacity(work.len());
        for mut col in work.drain(..) {
            if col.v[i].is_zero() {
                rest.push(col);
                continue;
            }
            match pivot.as_mut() {
                None => pivot = Some(col),
                Some(p) => {
                    eliminate(p, &mut col, i);
                    rest.push(col);
                }
            }
        }
        let mut pivot = pivot.ok_or(Error::SingularBasis)?;
        if pivot.v[i].is_negative() {
            pivot.negate();
        }
        if let Some(d) = modulus {
            for col in rest.iter_mut().chain(std::iter::once(&mut pivot)) {
                for x in col.v[..i].iter_mut() {
                    *x = x.mod_floor(d);
                }
            }
        }
        work = rest.into_iter().filter(|c| !c.is_zero()).collect();
        basis[i] = Some(pivot);
    }
    debug_assert!(work.iter().all(Column::is_zero));
    let mut basis: Vec<Column> = basis.into_iter().map(|c| c.unwrap()).collect();
    for i in (0..n).rev() {
        let (left, right) = basis.split_at_mut(i + 1);
        let pivot = &left[i];
        for col in right.iter_mut() {
            let q = col.v[i].div_floor(&pivot.v[i]);
            col.sub_mul(&q, pivot);
        }
    }
    Ok(basis)
}

fn check_rows(n: usize, gens: &[Vec<BigInt>]) -> Result<()> {
    match gens.iter().find(|g| g.len() != n) {
        Some(g) => Err(Error::DimensionMismatch { expected: n, actual: g.len() }),
        None => Ok(()),
    }
}

/// HNF of the lattice spanned by `gens` (each of length `n`).
///
/// When `modulus` is a positive multiple of the lattice determinant, entries
/// are kept reduced modulo it during elimination.
pub fn hnf_of_generators(n: usize, gens: &[Vec<BigInt>], modulus: Option<&BigInt>) -> Result<IntegerMatrix> {
    check_rows(n, gens)?;
    if let Some(d) = modulus {
        if !d.is_positive() {
            return Err(Error::InvalidParameter("HNF modulus must be positive".into()));
        }
    }
    let work = gens.iter().map(|g| Column { v: g.clone(), coef: None }).collect();
    let basis = run(n, work, modulus)?;
    Ok(IntegerMatrix::from_columns(&basis.into_iter().map(|c| c.v).collect::<Vec<_>>()))
}

/// HNF of a square nonsingular basis.
pub fn hnf(basis: &IntegerMatrix) -> Result<IntegerMatrix> {
    if !basis.is_square() {
        return Err(Error::DimensionMismatch { expected: basis.rows(), actual: basis.cols() });
    }
    let det = basis.determinant().abs();
    if det.is_zero() {
        return Err(Error::SingularBasis);
    }
    hnf_of_generators(basis.rows(), &basis.columns(), Some(&det))
}

/// HNF together with, for each HNF column `j`, integer coefficients `c_j`
/// such that `Σ_k c_j[k] · gens[k]` equals that column.
pub fn hnf_with_transform(n: usize, gens: &[Vec<BigInt>]) -> Result<(IntegerMatrix, Vec<Vec<BigInt>>)> {
    check_rows(n, gens)?;
    let k = gens.len();
    let work = gens
        .iter()
        .enumerate()
        .map(|(idx, g)| {
            let mut coef = vec![BigInt::zero(); k];
            coef[idx] = BigInt::one();
            Column { v: g.clone(), coef: Some(coef) }
        })
        .collect();
    let basis = run(n, work, None)?;
    let (cols, coefs): (Vec<_>, Vec<_>) = basis.into_iter().map(|c| (c.v, c.coef.unwrap())).unzip();
    Ok((IntegerMatrix::from_columns(&cols), coefs))
}

/// Checks the HNF shape conditions.
pub fn is_hnf(b: &IntegerMatrix) -> bool {
    if !b.is_square() {
        return false;
    }
    let n = b.rows();
    for i in 0..n {
        if !b[(i, i)].is_positive() {
            return false;
        }
        for j in 0..i {
            if !b[(i, j)].is_zero() {
                return false;
            }
        }
        for j in i + 1..n {
            if b[(i, j)].is_negative() || b[(i, j)] >= b[(i, i)] {
                return false;
            }
        }
    }
    true
}
