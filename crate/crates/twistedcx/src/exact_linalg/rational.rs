use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive};

/// Rational number kept in lowest terms with a positive denominator. Values that fit
/// in `i64` are always stored small, so derived equality and hashing are semantic.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Rat {
    Small(i64, i64),
    Big(BigRational),
}

fn gcd128(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

impl Rat {
    pub fn from_i64(v: i64) -> Rat {
        Rat::Small(v, 1)
    }

    pub fn new(num: BigInt, den: BigInt) -> Rat {
        Rat::from_big(BigRational::new(num, den))
    }

    fn from_i128(num: i128, den: i128) -> Rat {
        let g = gcd128(num.unsigned_abs(), den.unsigned_abs()) as i128;
        let (mut n, mut d) = (num / g, den / g);
        if d < 0 {
            (n, d) = (-n, -d);
        }
        match (i64::try_from(n), i64::try_from(d)) {
            (Ok(n), Ok(d)) => Rat::Small(n, d),
            _ => Rat::Big(BigRational::new(n.into(), d.into())),
        }
    }

    fn from_big(q: BigRational) -> Rat {
        match (q.numer().to_i64(), q.denom().to_i64()) {
            (Some(n), Some(d)) => Rat::Small(n, d),
            _ => Rat::Big(q),
        }
    }

    fn big(&self) -> BigRational {
        match self {
            Rat::Small(n, d) => BigRational::new_raw((*n).into(), (*d).into()),
            Rat::Big(q) => q.clone(),
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Rat::Small(0, _))
    }

    pub fn is_one(&self) -> bool {
        matches!(self, Rat::Small(1, 1))
    }

    pub fn is_negative(&self) -> bool {
        match self {
            Rat::Small(n, _) => *n < 0,
            Rat::Big(q) => q.is_negative(),
        }
    }

    pub fn add(&self, o: &Rat) -> Rat {
        match (self, o) {
            (Rat::Small(a, b), Rat::Small(c, d)) => {
                let (a, b, c, d) = (*a as i128, *b as i128, *c as i128, *d as i128);
                if b == d {
                    return Rat::from_i128(a + c, b);
                }
                // |a*d + c*b| < 2^127 and b*d < 2^126
                Rat::from_i128(a * d + c * b, b * d)
            }
            _ => Rat::from_big(self.big() + o.big()),
        }
    }

    pub fn neg(&self) -> Rat {
        match self {
            Rat::Small(n, d) => Rat::from_i128(-(*n as i128), *d as i128),
            Rat::Big(q) => Rat::from_big(-q),
        }
    }

    pub fn sub(&self, o: &Rat) -> Rat {
        self.add(&o.neg())
    }

    pub fn mul(&self, o: &Rat) -> Rat {
        match (self, o) {
            (Rat::Small(a, b), Rat::Small(c, d)) => {
                // cross-reduce first so the product usually stays small
                let g1 = a.unsigned_abs().gcd(&d.unsigned_abs()).max(1) as i128;
                let g2 = c.unsigned_abs().gcd(&b.unsigned_abs()).max(1) as i128;
                let (a, b, c, d) = (*a as i128, *b as i128, *c as i128, *d as i128);
                Rat::from_i128((a / g1) * (c / g2), (b / g2) * (d / g1))
            }
            _ => Rat::from_big(self.big() * o.big()),
        }
    }

    /// Reciprocal of a nonzero value.
    pub fn recip(&self) -> Rat {
        match self {
            Rat::Small(n, d) => Rat::from_i128(*d as i128, *n as i128),
            Rat::Big(q) => Rat::from_big(q.recip()),
        }
    }

    /// Image in `F_p`, if the denominator is a unit there.
    pub fn mod_p(&self, p: u64) -> Option<u64> {
        let (n, d) = match self {
            Rat::Small(n, d) => ((*n as i128).rem_euclid(p as i128) as u64, (*d as i128).rem_euclid(p as i128) as u64),
            Rat::Big(q) => {
                let m = BigInt::from(p);
                (q.numer().mod_floor(&m).to_u64()?, q.denom().mod_floor(&m).to_u64()?)
            }
        };
        (d != 0).then(|| n * super::scalar::pow_mod(d, p - 2, p) % p)
    }

    pub fn to_big(&self) -> BigRational {
        self.big()
    }
}

impl fmt::Display for Rat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Rat::Small(n, 1) => write!(f, "{n}"),
            Rat::Small(n, d) => write!(f, "{n}/{d}"),
            Rat::Big(q) if q.denom().is_one() => write!(f, "{}", q.numer()),
            Rat::Big(q) => write!(f, "{}/{}", q.numer(), q.denom()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matches_big_rationals_across_the_overflow_boundary() {
        let vals = [0, 1, -1, 2, 3, -7, i64::MAX, i64::MIN, i64::MAX - 1, i64::MIN + 1, 1 << 40, -(1 << 33)];
        let mut rats = Vec::new();
        for &n in &vals {
            for &d in &[1i64, 2, -3, i64::MAX, i64::MIN, 1 << 35] {
                rats.push(Rat::new(n.into(), d.into()));
            }
        }
        for x in &rats {
            for y in &rats {
                let (bx, by) = (x.to_big(), y.to_big());
                assert_eq!(x.add(y), Rat::from_big(&bx + &by));
                assert_eq!(x.sub(y), Rat::from_big(&bx - &by));
                assert_eq!(x.mul(y), Rat::from_big(&bx * &by));
                if !y.is_zero() {
                    assert_eq!(y.recip(), Rat::from_big(by.recip()));
                }
            }
        }
    }

    #[test]
    fn zero_is_canonical() {
        let a = Rat::from_i64(5);
        assert_eq!(a.sub(&a), Rat::from_i64(0));
        assert!(a.sub(&a).is_zero());
        assert_eq!(Rat::new(BigInt::from(0), BigInt::from(-9)), Rat::Small(0, 1));
    }
}
