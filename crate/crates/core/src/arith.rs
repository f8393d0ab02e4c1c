//! Exact rational helpers shared by every module: p-adic valuations, residues
//! of p-integral rationals, and the `"num/den"` string encoding.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

pub type Rational = BigRational;

/// p-adic valuation with a distinguished value for zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Valuation {
    Finite(i64),
    Infinite,
}

impl Valuation {
    pub fn finite(self) -> Option<i64> {
        match self {
            Valuation::Finite(v) => Some(v),
            Valuation::Infinite => None,
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, Valuation::Infinite)
    }
}

impl fmt::Display for Valuation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Valuation::Finite(v) => write!(f, "{v}"),
            Valuation::Infinite => write!(f, "inf"),
        }
    }
}

pub fn rat(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn ratio(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

/// `p^e` as an exact rational, `e` of either sign.
pub fn p_pow(p: u64, e: i64) -> Rational {
    let base = BigInt::from(p);
    let mag = num_traits::pow(base, e.unsigned_abs() as usize);
    if e >= 0 {
        Rational::from_integer(mag)
    } else {
        Rational::new(BigInt::one(), mag)
    }
}

pub fn int_pow(p: u64, e: u32) -> u64 {
    p.checked_pow(e).expect("prime power overflows u64")
}

fn int_valuation(n: &BigInt, p: u64) -> i64 {
    debug_assert!(!n.is_zero());
    let pb = BigInt::from(p);
    let mut v = 0;
    let mut cur = n.clone();
    loop {
        let (q, r) = cur.div_rem(&pb);
        if !r.is_zero() {
            return v;
        }
        cur = q;
        v += 1;
    }
}

pub fn valuation(x: &Rational, p: u64) -> Valuation {
    if x.is_zero() {
        return Valuation::Infinite;
    }
    Valuation::Finite(int_valuation(x.numer(), p) - int_valuation(x.denom(), p))
}

/// Valuation of a nonzero rational; panics on zero.
pub fn val(x: &Rational, p: u64) -> i64 {
    valuation(x, p)
        .finite()
        .expect("valuation of zero requested where a nonzero value was required")
}

/// Minimum valuation of the entries (the valuation of the vector's sup-norm).
pub fn min_valuation<'a, I>(xs: I, p: u64) -> Valuation
where
    I: IntoIterator<Item = &'a Rational>,
{
    xs.into_iter()
        .map(|x| valuation(x, p))
        .min()
        .unwrap_or(Valuation::Infinite)
}

/// `x / p^{val(x)}`, a p-adic unit.
pub fn unit_part(x: &Rational, p: u64) -> Rational {
    let v = val(x, p);
    x * p_pow(p, -v)
}

/// Residue of a p-integral rational modulo `modulus` (a power of p).
pub fn residue(x: &Rational, modulus: u64) -> Result<u64> {
    if modulus == 1 {
        return Ok(0);
    }
    let m = BigInt::from(modulus);
    let den = x.denom().mod_floor(&m);
    let inv = mod_inverse(&den, &m).ok_or_else(|| {
        Error::InvalidInput(format!("{x} is not integral at the prime dividing {modulus}"))
    })?;
    let r = (x.numer().mod_floor(&m) * inv).mod_floor(&m);
    Ok(r.to_u64().expect("residue fits in u64"))
}

pub fn mod_inverse(a: &BigInt, m: &BigInt) -> Option<BigInt> {
    let e = a.extended_gcd(m);
    if e.gcd.is_one() {
        Some(e.x.mod_floor(m))
    } else {
        None
    }
}

pub fn mod_pow(base: u64, mut exp: u64, m: u64) -> u64 {
    let mut result = 1u128 % m as u128;
    let mut b = base as u128 % m as u128;
    while exp > 0 {
        if exp & 1 == 1 {
            result = result * b % m as u128;
        }
        b = b * b % m as u128;
        exp >>= 1;
    }
    result as u64
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

/// Legendre symbol of a p-adic unit (given as a rational) modulo an odd prime.
pub fn legendre_unit(u: &Rational, p: u64) -> Result<i32> {
    let r = residue(u, p)?;
    if r == 0 {
        return Err(Error::InvalidInput(format!("{u} is not a unit at {p}")));
    }
    Ok(if mod_pow(r, (p - 1) / 2, p) == 1 { 1 } else { -1 })
}

pub fn rational_to_string(x: &Rational) -> String {
    if x.denom().is_one() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

pub fn parse_rational(s: &str) -> Result<Rational> {
    let t = s.trim();
    let r = Rational::from_str(t).map_err(|_| Error::InvalidInput(format!("bad rational {s:?}")))?;
    Ok(r)
}

pub fn abs_p(x: &Rational, p: u64) -> Rational {
    match valuation(x, p) {
        Valuation::Infinite => Rational::zero(),
        Valuation::Finite(v) => p_pow(p, -v),
    }
}

pub fn is_p_integral(x: &Rational, p: u64) -> bool {
    valuation(x, p) >= Valuation::Finite(0)
}

pub fn sign(x: &Rational) -> i32 {
    if x.is_negative() {
        -1
    } else if x.is_zero() {
        0
    } else {
        1
    }
}

/// Serde adapter: rationals travel as `"num/den"` strings.
pub mod serde_rational {
    use super::*;

    pub fn serialize<S: Serializer>(x: &Rational, s: S) -> std::result::Result<S::Ok, S::Error> {
        rational_to_string(x).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Rational, D::Error> {
        let s = String::deserialize(d)?;
        parse_rational(&s).map_err(serde::de::Error::custom)
    }
}

pub mod serde_rational_vec {
    use super::*;

    pub fn serialize<S: Serializer>(xs: &[Rational], s: S) -> std::result::Result<S::Ok, S::Error> {
        xs.iter().map(rational_to_string).collect::<Vec<_>>().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Vec<Rational>, D::Error> {
        let v = Vec::<String>::deserialize(d)?;
        v.iter()
            .map(|s| parse_rational(s).map_err(serde::de::Error::custom))
            .collect()
    }
}
