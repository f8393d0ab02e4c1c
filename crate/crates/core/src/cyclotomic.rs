//! Exact arithmetic in ℚ(ζ_N), N = 4p^K, on the power basis reduced modulo the
//! N-th cyclotomic polynomial.
//!
//! With M = p^{K-1} that polynomial is Σ_{r<p} (-1)^r x^{2rM}, of degree
//! φ(N) = 2(p-1)M.  Elements are stored as integer numerators over one common
//! positive denominator, always in lowest terms, so structural equality is
//! equality in the field.

use std::fmt;
use std::ops::{AddAssign, SubAssign};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::arith::{int_pow, is_prime, parse_rational, rational_to_string, residue, valuation, Rational, Valuation};
use crate::error::{Error, Result};

/// The ring ℚ(ζ_{4p^depth}).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct CycRing {
    pub p: u64,
    pub depth: u32,
}

impl CycRing {
    pub fn new(p: u64, depth: u32) -> Result<Self> {
        if p == 2 {
            return Err(Error::UnsupportedPrime(2));
        }
        if !is_prime(p) {
            return Err(Error::InvalidInput(format!("{p} is not prime")));
        }
        if depth == 0 {
            return Err(Error::InvalidInput("cyclotomic depth must be at least 1".into()));
        }
        Ok(CycRing { p, depth })
    }

    /// Root order N = 4p^K.
    pub fn order(&self) -> usize {
        4 * int_pow(self.p, self.depth) as usize
    }

    /// Dimension of the power basis.
    pub fn degree(&self) -> usize {
        2 * (self.p as usize - 1) * int_pow(self.p, self.depth - 1) as usize
    }

    pub fn zero(&self) -> CycValue {
        CycValue { ring: *self, num: vec![BigInt::zero(); self.degree()], den: BigInt::one() }
    }

    pub fn one(&self) -> CycValue {
        self.from_rational(&Rational::one())
    }

    pub fn from_rational(&self, x: &Rational) -> CycValue {
        let mut num = vec![BigInt::zero(); self.degree()];
        num[0] = x.numer().clone();
        CycValue { ring: *self, num, den: x.denom().clone() }
    }

    pub fn from_int(&self, x: i64) -> CycValue {
        self.from_rational(&Rational::from_integer(x.into()))
    }

    /// ζ_N^e for any integer e.
    pub fn zeta_pow(&self, e: i64) -> CycValue {
        let n = self.order() as i64;
        let mut buf = vec![BigInt::zero(); self.order()];
        buf[e.rem_euclid(n) as usize] = BigInt::one();
        CycValue::from_buffer(*self, buf, BigInt::one())
    }

    /// i^k, with i = ζ_N^{N/4}.
    pub fn i_pow(&self, k: i64) -> CycValue {
        self.zeta_pow(k * (self.order() as i64 / 4))
    }

    /// ζ_{p^s}^r, a p^s-th root of unity (s ≤ depth).
    pub fn p_root(&self, r: u64, s: u32) -> Result<CycValue> {
        if s > self.depth {
            return Err(Error::PrecisionExceeded(format!(
                "p^{s}-th roots need depth {s}, ring has depth {}",
                self.depth
            )));
        }
        let step = 4 * int_pow(self.p, self.depth - s);
        let r = r % int_pow(self.p, s);
        Ok(self.zeta_pow((r * step) as i64))
    }

    /// The unramified additive character: ψ(u/p^s) = ζ_{p^s}^{u mod p^s}.
    pub fn psi(&self, x: &Rational) -> Result<CycValue> {
        let s = match valuation(x, self.p) {
            Valuation::Infinite => return Ok(self.one()),
            Valuation::Finite(v) if v >= 0 => return Ok(self.one()),
            Valuation::Finite(v) => (-v) as u32,
        };
        if s > self.depth {
            return Err(Error::PrecisionExceeded(format!(
                "psi({}) needs depth {s}, ring has depth {}",
                rational_to_string(x),
                self.depth
            )));
        }
        let ps = int_pow(self.p, s);
        let u = x * Rational::from_integer(BigInt::from(ps));
        let r = residue(&u, ps)?;
        self.p_root(r, s)
    }

    /// The quadratic Gauss sum Σ_{a mod p} (a/p) ζ_p^a.
    pub fn gauss_sum(&self) -> CycValue {
        let p = self.p;
        let terms = (1..p).map(|a| {
            let leg = if crate::arith::mod_pow(a, (p - 1) / 2, p) == 1 { 1 } else { -1 };
            (a * 4 * int_pow(p, self.depth - 1), leg)
        });
        self.sum_of_roots(terms)
    }

    /// The positive square root of p.
    pub fn sqrt_p(&self) -> CycValue {
        let g = self.gauss_sum();
        if self.p % 4 == 1 {
            g
        } else {
            self.i_pow(3).mul(&g)
        }
    }

    /// Σ c·ζ_N^e over (e, c) pairs.
    pub fn sum_of_roots(&self, terms: impl IntoIterator<Item = (u64, i64)>) -> CycValue {
        let n = self.order() as u64;
        let mut buf = vec![0i128; self.order()];
        for (e, c) in terms {
            buf[(e % n) as usize] += c as i128;
        }
        CycValue::from_buffer(*self, buf.into_iter().map(BigInt::from).collect(), BigInt::one())
    }
}

/// Reduce a length-N coefficient buffer (exponents mod N) to the power basis.
fn reduce<T>(ring: CycRing, buf: &mut Vec<T>)
where
    T: Clone + Zero + for<'a> AddAssign<&'a T> + for<'a> SubAssign<&'a T>,
{
    reduce_in_place(ring, buf);
    buf.truncate(ring.degree());
}

/// As `reduce`, leaving the result in the first φ(N) slots and zeros after.
pub(crate) fn reduce_in_place<T>(ring: CycRing, buf: &mut [T])
where
    T: Clone + Zero + for<'a> AddAssign<&'a T> + for<'a> SubAssign<&'a T>,
{
    let n = ring.order();
    let half = n / 2;
    let m = int_pow(ring.p, ring.depth - 1) as usize;
    let phi = ring.degree();
    debug_assert_eq!(buf.len(), n);
    // ζ^{N/2} = -1
    for e in half..n {
        if !buf[e].is_zero() {
            let c = std::mem::replace(&mut buf[e], T::zero());
            buf[e - half] -= &c;
        }
    }
    // x^φ = -Σ_{r ≤ p-2} (-1)^r x^{2rM}
    for e in (phi..half).rev() {
        if buf[e].is_zero() {
            continue;
        }
        let c = std::mem::replace(&mut buf[e], T::zero());
        let base = e - phi;
        for r in 0..=(ring.p as usize - 2) {
            if r % 2 == 0 {
                buf[base + 2 * r * m] -= &c;
            } else {
                buf[base + 2 * r * m] += &c;
            }
        }
    }
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct CycValue {
    ring: CycRing,
    num: Vec<BigInt>,
    den: BigInt,
}

impl CycValue {
    fn from_buffer(ring: CycRing, mut buf: Vec<BigInt>, den: BigInt) -> Self {
        reduce(ring, &mut buf);
        CycValue::normalized(ring, buf, den)
    }

    fn normalized(ring: CycRing, mut num: Vec<BigInt>, mut den: BigInt) -> Self {
        assert!(!den.is_zero(), "zero denominator");
        if den.is_negative() {
            den = -den;
            for x in &mut num {
                *x = -std::mem::take(x);
            }
        }
        let mut g = den.clone();
        for x in &num {
            if g.is_one() {
                break;
            }
            if !x.is_zero() {
                g = g.gcd(x);
            }
        }
        if num.iter().all(Zero::is_zero) {
            return CycValue { ring, num, den: BigInt::one() };
        }
        if !g.is_one() {
            for x in &mut num {
                *x = &*x / &g;
            }
            den /= &g;
        }
        CycValue { ring, num, den }
    }

    /// Build from numerators over a common denominator in the power basis.
    pub fn from_parts(ring: CycRing, num: Vec<BigInt>, den: BigInt) -> Result<Self> {
        if num.len() != ring.degree() {
            return Err(Error::InvalidInput(format!(
                "expected {} coefficients, got {}",
                ring.degree(),
                num.len()
            )));
        }
        if den.is_zero() {
            return Err(Error::InvalidInput("zero denominator".into()));
        }
        Ok(CycValue::normalized(ring, num, den))
    }

    /// Build from an unreduced buffer indexed by exponents mod N.
    pub fn from_exponent_buffer(ring: CycRing, buf: Vec<BigInt>, den: BigInt) -> Self {
        assert_eq!(buf.len(), ring.order());
        CycValue::from_buffer(ring, buf, den)
    }

    pub fn ring(&self) -> CycRing {
        self.ring
    }

    pub fn numerators(&self) -> &[BigInt] {
        &self.num
    }

    pub fn denominator(&self) -> &BigInt {
        &self.den
    }

    pub fn coeffs(&self) -> Vec<Rational> {
        self.num.iter().map(|x| Rational::new(x.clone(), self.den.clone())).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.num.iter().all(Zero::is_zero)
    }

    pub fn is_one(&self) -> bool {
        self.den.is_one() && self.num[0].is_one() && self.num[1..].iter().all(Zero::is_zero)
    }

    /// The rational this value equals, if it is rational.
    pub fn to_rational(&self) -> Option<Rational> {
        if self.num[1..].iter().all(Zero::is_zero) {
            Some(Rational::new(self.num[0].clone(), self.den.clone()))
        } else {
            None
        }
    }

    fn check(&self, other: &CycValue) -> Result<()> {
        if self.ring != other.ring {
            return Err(Error::DepthMismatch { left: self.ring.depth, right: other.ring.depth });
        }
        Ok(())
    }

    pub fn try_add(&self, other: &CycValue) -> Result<CycValue> {
        self.check(other)?;
        if other.is_zero() {
            return Ok(self.clone());
        }
        if self.is_zero() {
            return Ok(other.clone());
        }
        if self.den == other.den {
            let num = self.num.iter().zip(&other.num).map(|(a, b)| a + b).collect();
            return Ok(CycValue::normalized(self.ring, num, self.den.clone()));
        }
        let num = self
            .num
            .iter()
            .zip(&other.num)
            .map(|(a, b)| a * &other.den + b * &self.den)
            .collect();
        Ok(CycValue::normalized(self.ring, num, &self.den * &other.den))
    }

    pub fn try_sub(&self, other: &CycValue) -> Result<CycValue> {
        self.try_add(&other.neg())
    }

    pub fn try_mul(&self, other: &CycValue) -> Result<CycValue> {
        self.check(other)?;
        if self.is_zero() || other.is_zero() {
            return Ok(self.ring.zero());
        }
        if let Some(r) = other.to_rational() {
            return Ok(self.scale(&r));
        }
        if let Some(r) = self.to_rational() {
            return Ok(other.scale(&r));
        }
        let mut buf = vec![BigInt::zero(); self.ring.order()];
        for (i, a) in self.num.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.num.iter().enumerate() {
                if !b.is_zero() {
                    buf[i + j] += a * b;
                }
            }
        }
        Ok(CycValue::from_buffer(self.ring, buf, &self.den * &other.den))
    }

    pub fn try_eq(&self, other: &CycValue) -> Result<bool> {
        self.check(other)?;
        Ok(self == other)
    }

    /// Panicking variants for values known to share a ring.
    pub fn add(&self, other: &CycValue) -> CycValue {
        self.try_add(other).expect("cyclotomic ring mismatch")
    }

    pub fn sub(&self, other: &CycValue) -> CycValue {
        self.try_sub(other).expect("cyclotomic ring mismatch")
    }

    pub fn mul(&self, other: &CycValue) -> CycValue {
        self.try_mul(other).expect("cyclotomic ring mismatch")
    }

    pub fn neg(&self) -> CycValue {
        CycValue { ring: self.ring, num: self.num.iter().map(|x| -x).collect(), den: self.den.clone() }
    }

    pub fn scale(&self, r: &Rational) -> CycValue {
        if r.is_zero() {
            return self.ring.zero();
        }
        let num = self.num.iter().map(|x| x * r.numer()).collect();
        CycValue::normalized(self.ring, num, &self.den * r.denom())
    }

    /// Multiply by ζ_N^e.
    pub fn mul_zeta(&self, e: i64) -> CycValue {
        let n = self.ring.order();
        let e = e.rem_euclid(n as i64) as usize;
        if e == 0 || self.is_zero() {
            return self.clone();
        }
        let mut buf = vec![BigInt::zero(); n];
        for (i, a) in self.num.iter().enumerate() {
            if !a.is_zero() {
                buf[(i + e) % n] = a.clone();
            }
        }
        CycValue::from_buffer(self.ring, buf, self.den.clone())
    }

    pub fn pow(&self, mut e: u32) -> CycValue {
        let mut acc = self.ring.one();
        let mut base = self.clone();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            base = base.mul(&base);
            e >>= 1;
        }
        acc
    }

    /// Complex conjugation ζ ↦ ζ^{-1}.
    pub fn conj(&self) -> CycValue {
        let n = self.ring.order();
        let mut buf = vec![BigInt::zero(); n];
        for (i, a) in self.num.iter().enumerate() {
            buf[(n - i) % n] = a.clone();
        }
        CycValue::from_buffer(self.ring, buf, self.den.clone())
    }

    /// |x|², i.e. x·conj(x).
    pub fn norm_sq(&self) -> CycValue {
        self.mul(&self.conj())
    }

    /// Image in a deeper ring via ζ_N ↦ ζ_{N'}^{N'/N}.
    pub fn embed(&self, depth: u32) -> Result<CycValue> {
        if depth < self.ring.depth {
            return Err(Error::DepthMismatch { left: self.ring.depth, right: depth });
        }
        let target = CycRing { p: self.ring.p, depth };
        let step = int_pow(self.ring.p, depth - self.ring.depth) as usize;
        let mut buf = vec![BigInt::zero(); target.order()];
        for (i, a) in self.num.iter().enumerate() {
            buf[i * step] = a.clone();
        }
        Ok(CycValue::from_buffer(target, buf, self.den.clone()))
    }

    /// Inverse of `embed`, available when the value lies in the smaller ring.
    pub fn restrict(&self, depth: u32) -> Result<CycValue> {
        if depth > self.ring.depth {
            return self.embed(depth);
        }
        if depth == 0 {
            return Err(Error::InvalidInput("cyclotomic depth must be at least 1".into()));
        }
        let target = CycRing { p: self.ring.p, depth };
        let step = int_pow(self.ring.p, self.ring.depth - depth) as usize;
        let mut num = vec![BigInt::zero(); target.degree()];
        for (i, a) in self.num.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            if i % step != 0 {
                return Err(Error::PrecisionExceeded(format!(
                    "value does not lie in the depth-{depth} subfield"
                )));
            }
            num[i / step] = a.clone();
        }
        Ok(CycValue::normalized(target, num, self.den.clone()))
    }

    /// Numerators rescaled to the denominator `den`, which must be a multiple
    /// of this value's denominator.  Used by accumulation loops.
    pub fn numerators_over(&self, den: &BigInt) -> Vec<i128> {
        let f = den / &self.den;
        debug_assert!((&f * &self.den) == *den);
        self.num
            .iter()
            .map(|x| (x * &f).to_i128().expect("cyclotomic coefficient exceeds i128"))
            .collect()
    }

    /// Floating-point value, for display only.
    pub fn to_complex(&self) -> (f64, f64) {
        let n = self.ring.order() as f64;
        let den = self.den.to_f64().unwrap_or(f64::NAN);
        let mut re = 0.0;
        let mut im = 0.0;
        for (i, a) in self.num.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            let c = a.to_f64().unwrap_or(f64::NAN) / den;
            let th = std::f64::consts::TAU * i as f64 / n;
            re += c * th.cos();
            im += c * th.sin();
        }
        (re, im)
    }
}

impl fmt::Debug for CycValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for CycValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(r) = self.to_rational() {
            return write!(f, "{}", rational_to_string(&r));
        }
        let mut first = true;
        for (i, a) in self.num.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            let c = rational_to_string(&Rational::new(a.clone(), self.den.clone()));
            match i {
                0 => write!(f, "{c}")?,
                _ => write!(f, "({c})z^{i}")?,
            }
        }
        write!(f, " [z = zeta_{}]", self.ring.order())
    }
}

#[derive(Serialize, Deserialize)]
struct CycJson {
    order: u64,
    coeffs: Vec<String>,
}

impl Serialize for CycValue {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        CycJson {
            order: self.ring.order() as u64,
            coeffs: self.coeffs().iter().map(rational_to_string).collect(),
        }
        .serialize(s)
    }
}

/// Recover (p, K) from N = 4p^K.
pub fn ring_from_order(order: u64) -> Result<CycRing> {
    if !order.is_multiple_of(4) || order < 12 {
        return Err(Error::InvalidInput(format!("root order {order} is not 4p^K")));
    }
    let mut rest = order / 4;
    let p = (3..=rest).find(|q| rest.is_multiple_of(*q)).expect("rest > 1");
    let mut depth = 0;
    while rest.is_multiple_of(p) {
        rest /= p;
        depth += 1;
    }
    if rest != 1 {
        return Err(Error::InvalidInput(format!("root order {order} is not 4p^K")));
    }
    CycRing::new(p, depth)
}

impl<'de> Deserialize<'de> for CycValue {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let j = CycJson::deserialize(d)?;
        let ring = ring_from_order(j.order).map_err(D::Error::custom)?;
        let coeffs = j
            .coeffs
            .iter()
            .map(|s| parse_rational(s))
            .collect::<Result<Vec<_>>>()
            .map_err(D::Error::custom)?;
        if coeffs.len() != ring.degree() {
            return Err(D::Error::custom(format!(
                "expected {} coefficients for order {}, got {}",
                ring.degree(),
                j.order,
                coeffs.len()
            )));
        }
        let den = coeffs.iter().fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
        let num = coeffs.iter().map(|c| c.numer() * (&den / c.denom())).collect();
        Ok(CycValue::normalized(ring, num, den))
    }
}
