use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};

use super::rational::Rat;
use thiserror::Error;

/// Base field: the rationals or a prime field.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Field {
    Rational,
    Prime(u64),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FieldError {
    #[error("modulus {0} is not a prime below 2^31")]
    NotPrime(u64),
    #[error("cannot parse {0:?} as a field element")]
    BadScalar(String),
    #[error("unknown field spec {0:?} (expected q or fp:<prime>)")]
    BadFieldSpec(String),
    #[error("denominator not invertible in F_{0}")]
    NotInvertible(u64),
}

fn is_prime(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2u64;
    while d * d <= p {
        if p % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

impl Field {
    /// Prime field, modulus kept below 2^31 so products fit in a u64.
    pub fn prime(p: u64) -> Result<Field, FieldError> {
        if p >= (1 << 31) || !is_prime(p) {
            return Err(FieldError::NotPrime(p));
        }
        Ok(Field::Prime(p))
    }

    /// Parses `q` or `fp:<prime>`.
    pub fn parse(spec: &str) -> Result<Field, FieldError> {
        let s = spec.trim();
        if s == "q" || s == "Q" {
            return Ok(Field::Rational);
        }
        if let Some(rest) = s.strip_prefix("fp:") {
            let p: u64 = rest
                .parse()
                .map_err(|_| FieldError::BadFieldSpec(spec.to_string()))?;
            return Field::prime(p);
        }
        Err(FieldError::BadFieldSpec(spec.to_string()))
    }

    pub fn spec(&self) -> String {
        match self {
            Field::Rational => "q".to_string(),
            Field::Prime(p) => format!("fp:{p}"),
        }
    }

    pub fn zero(&self) -> Scalar {
        self.from_i64(0)
    }

    pub fn one(&self) -> Scalar {
        self.from_i64(1)
    }

    pub fn from_i64(&self, v: i64) -> Scalar {
        match *self {
            Field::Rational => Scalar::Q(Rat::from_i64(v)),
            Field::Prime(p) => Scalar::F {
                v: v.rem_euclid(p as i64) as u64,
                p,
            },
        }
    }

    /// `num/den` in this field; `den` must be nonzero there.
    pub fn from_fraction(&self, num: BigInt, den: BigInt) -> Scalar {
        match *self {
            Field::Rational => Scalar::Q(Rat::new(num, den)),
            Field::Prime(p) => {
                let m = BigInt::from(p);
                let n = Scalar::F { v: num.mod_floor(&m).to_u64().unwrap(), p };
                let d = Scalar::F { v: den.mod_floor(&m).to_u64().unwrap(), p };
                &n * &d.inv().expect("denominator is a unit")
            }
        }
    }

    pub fn sign(&self, odd: bool) -> Scalar {
        if odd {
            self.from_i64(-1)
        } else {
            self.one()
        }
    }

    /// Parses an integer or a fraction `a/b`.
    pub fn parse_scalar(&self, text: &str) -> Result<Scalar, FieldError> {
        let bad = || FieldError::BadScalar(text.to_string());
        let t = text.trim();
        let (num, den) = match t.split_once('/') {
            Some((a, b)) => (a.trim(), b.trim()),
            None => (t, "1"),
        };
        let num: BigInt = num.parse().map_err(|_| bad())?;
        let den: BigInt = den.parse().map_err(|_| bad())?;
        if den.is_zero() {
            return Err(bad());
        }
        if let Field::Prime(p) = *self {
            if den.mod_floor(&BigInt::from(p)).is_zero() {
                return Err(FieldError::NotInvertible(p));
            }
        }
        Ok(self.from_fraction(num, den))
    }
}

/// An exact field element.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Scalar {
    Q(Rat),
    F { v: u64, p: u64 },
}

pub(super) fn pow_mod(mut b: u64, mut e: u64, p: u64) -> u64 {
    let mut r = 1u64;
    b %= p;
    while e > 0 {
        if e & 1 == 1 {
            r = r * b % p;
        }
        b = b * b % p;
        e >>= 1;
    }
    r
}

impl Scalar {
    pub fn field(&self) -> Field {
        match self {
            Scalar::Q(_) => Field::Rational,
            Scalar::F { p, .. } => Field::Prime(*p),
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Scalar::Q(q) => q.is_zero(),
            Scalar::F { v, .. } => *v == 0,
        }
    }

    pub fn is_one(&self) -> bool {
        match self {
            Scalar::Q(q) => q.is_one(),
            Scalar::F { v, .. } => *v == 1,
        }
    }

    /// Reduction of a rational into `F_p`; `None` if the denominator vanishes there.
    pub fn reduce_mod(&self, p: u64) -> Option<Scalar> {
        match self {
            Scalar::Q(q) => Some(Scalar::F { v: q.mod_p(p)?, p }),
            Scalar::F { .. } => None,
        }
    }

    pub fn inv(&self) -> Option<Scalar> {
        if self.is_zero() {
            return None;
        }
        Some(match self {
            Scalar::Q(q) => Scalar::Q(q.recip()),
            Scalar::F { v, p } => Scalar::F {
                v: pow_mod(*v, p - 2, *p),
                p: *p,
            },
        })
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scalar::Q(q) => write!(f, "{q}"),
            // symmetric representative reads better for signs
            Scalar::F { v, p } => {
                if *v > p / 2 {
                    write!(f, "-{}", p - v)
                } else {
                    write!(f, "{v}")
                }
            }
        }
    }
}

macro_rules! mixed {
    () => {
        panic!("arithmetic between different fields")
    };
}

impl Add for &Scalar {
    type Output = Scalar;
    fn add(self, o: &Scalar) -> Scalar {
        match (self, o) {
            (Scalar::Q(a), Scalar::Q(b)) => Scalar::Q(a.add(b)),
            (Scalar::F { v: a, p }, Scalar::F { v: b, p: q }) if p == q => Scalar::F {
                v: (a + b) % p,
                p: *p,
            },
            _ => mixed!(),
        }
    }
}

impl Sub for &Scalar {
    type Output = Scalar;
    fn sub(self, o: &Scalar) -> Scalar {
        match (self, o) {
            (Scalar::Q(a), Scalar::Q(b)) => Scalar::Q(a.sub(b)),
            (Scalar::F { v: a, p }, Scalar::F { v: b, p: q }) if p == q => Scalar::F {
                v: (a + p - b) % p,
                p: *p,
            },
            _ => mixed!(),
        }
    }
}

impl Mul for &Scalar {
    type Output = Scalar;
    fn mul(self, o: &Scalar) -> Scalar {
        match (self, o) {
            (Scalar::Q(a), Scalar::Q(b)) => Scalar::Q(a.mul(b)),
            (Scalar::F { v: a, p }, Scalar::F { v: b, p: q }) if p == q => Scalar::F {
                v: a * b % p,
                p: *p,
            },
            _ => mixed!(),
        }
    }
}

impl Neg for &Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        match self {
            Scalar::Q(a) => Scalar::Q(a.neg()),
            Scalar::F { v, p } => Scalar::F {
                v: (p - v) % p,
                p: *p,
            },
        }
    }
}

impl Add for Scalar {
    type Output = Scalar;
    fn add(self, o: Scalar) -> Scalar {
        &self + &o
    }
}

impl Sub for Scalar {
    type Output = Scalar;
    fn sub(self, o: Scalar) -> Scalar {
        &self - &o
    }
}

impl Mul for Scalar {
    type Output = Scalar;
    fn mul(self, o: Scalar) -> Scalar {
        &self * &o
    }
}

impl Neg for Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        -&self
    }
}

impl Scalar {
    /// Numerator and denominator as text, used by serializers.
    pub fn to_text(&self) -> String {
        match self {
            Scalar::Q(q) => q.to_string(),
            Scalar::F { v, .. } => v.to_string(),
        }
    }

    pub fn is_negative(&self) -> bool {
        match self {
            Scalar::Q(q) => q.is_negative(),
            Scalar::F { .. } => false,
        }
    }
}
