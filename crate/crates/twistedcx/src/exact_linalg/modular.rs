//! Kernels over ℚ through prime fields: the normalized kernel basis is computed
//! modulo several primes, lifted by CRT and rational reconstruction, and kept only
//! if it is annihilated exactly.

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::matrix::{Matrix, SparseRow};
use super::scalar::{Field, Scalar};

/// Gives up after this many primes; the caller then eliminates over ℚ.
const MAX_PRIMES: usize = 256;

fn is_prime(p: u64) -> bool {
    p >= 2 && (2..).take_while(|d| d * d <= p).all(|d| p % d != 0)
}

fn primes() -> impl Iterator<Item = u64> {
    (0..).map(|k| (1u64 << 31) - 1 - 2 * k).filter(|&p| is_prime(p))
}

fn reduce(a: &Matrix, p: u64) -> Option<Matrix> {
    let mut rows = Vec::with_capacity(a.rows());
    for r in 0..a.rows() {
        let mut row = Vec::new();
        for (c, x) in a.row(r) {
            let x = x.reduce_mod(p)?;
            if !x.is_zero() {
                row.push((*c, x));
            }
        }
        rows.push(row);
    }
    Some(Matrix::from_sparse_rows(Field::Prime(p), a.cols(), rows))
}

/// `a/b ≡ u (mod m)` with `|a|, b ≤ sqrt(m/2)`, if it exists.
fn reconstruct(u: &BigInt, m: &BigInt, bound: &BigInt) -> Option<(BigInt, BigInt)> {
    if u.is_zero() {
        return Some((BigInt::zero(), BigInt::one()));
    }
    let (mut r0, mut r1) = (m.clone(), u.clone());
    let (mut s0, mut s1) = (BigInt::zero(), BigInt::one());
    while &r1 > bound {
        let q = &r0 / &r1;
        let r2 = &r0 - &q * &r1;
        let s2 = &s0 - &q * &s1;
        (r0, r1, s0, s1) = (r1, r2, s1, s2);
    }
    if s1.is_zero() || s1.abs() > *bound || !r1.gcd(&s1).is_one() {
        return None;
    }
    if s1.sign() == Sign::Minus {
        Some((-r1, -s1))
    } else {
        Some((r1, s1))
    }
}

/// Kernel basis of a rational matrix with an identity block on the free columns,
/// the same basis `Matrix::nullspace` produces by elimination.
pub(super) fn nullspace(a: &Matrix) -> Option<Matrix> {
    let n = a.cols();
    // pivot flags of the prime in use and, per pivot column, residues of its kernel row
    let mut pivots: Option<Vec<bool>> = None;
    let mut residues: Vec<Vec<BigInt>> = Vec::new();
    let mut modulus = BigInt::one();
    for p in primes().take(MAX_PRIMES) {
        let Some(am) = reduce(a, p) else { continue };
        let (k, flags) = am.kernel_with_pivots();
        let free = k.cols();
        match &pivots {
            Some(old) if *old == flags => {}
            Some(old) if flags.iter().filter(|x| **x).count() <= old.iter().filter(|x| **x).count() => continue,
            _ => {
                // first prime, or one of higher rank: the earlier ones were unlucky
                pivots = Some(flags.clone());
                residues = vec![vec![BigInt::zero(); free]; n];
                modulus = BigInt::one();
            }
        }
        let pb = BigInt::from(p);
        let inv = Scalar::F { v: (&modulus % &pb).to_u64().unwrap(), p }.inv().expect("distinct primes");
        let Scalar::F { v: inv, .. } = inv else { unreachable!() };
        for r in (0..n).filter(|r| flags[*r]) {
            let mut dense = vec![0u64; free];
            for (c, x) in k.row(r) {
                let Scalar::F { v, .. } = x else { unreachable!() };
                dense[*c] = *v;
            }
            for (res, x) in residues[r].iter_mut().zip(dense) {
                let cur = (&*res % &pb).to_u64().unwrap();
                let t = (x + p - cur) % p * inv % p;
                if t != 0 {
                    *res += &modulus * t;
                }
            }
        }
        modulus *= pb;
        if let Some(k) = lift(a, pivots.as_ref().unwrap(), &residues, &modulus) {
            return Some(k);
        }
    }
    None
}

fn lift(a: &Matrix, pivots: &[bool], residues: &[Vec<BigInt>], modulus: &BigInt) -> Option<Matrix> {
    let n = a.cols();
    let bound = (modulus / BigInt::from(2)).sqrt();
    let free: Vec<usize> = (0..n).filter(|c| !pivots[*c]).collect();
    let mut rows: Vec<SparseRow> = Vec::with_capacity(n);
    let mut next_free = 0;
    for r in 0..n {
        if !pivots[r] {
            debug_assert_eq!(free[next_free], r);
            rows.push(vec![(next_free, Field::Rational.one())]);
            next_free += 1;
            continue;
        }
        let mut row = Vec::new();
        for (j, u) in residues[r].iter().enumerate() {
            let (num, den) = reconstruct(u, modulus, &bound)?;
            if !num.is_zero() {
                row.push((j, Field::Rational.from_fraction(num, den)));
            }
        }
        rows.push(row);
    }
    let k = Matrix::from_sparse_rows(Field::Rational, free.len(), rows);
    a.mul(&k).is_zero().then_some(k)
}
