//! p-adic context, quadratic spaces, Hilbert symbols, quadratic characters and
//! Weil indices.

use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::arith::{
    int_pow, is_prime, legendre_unit, p_pow, rat, residue, unit_part, val, valuation, Rational, Valuation,
};
use crate::cyclotomic::{CycRing, CycValue};
use crate::error::{Error, Result};
use crate::linalg::Mat;

/// Largest number of lattice points summed directly when computing a Weil index.
const DIRECT_GAUSS_LIMIT: u64 = 1 << 20;
/// Stationarity search gives up past this level.
const MAX_GAUSS_LEVEL: u32 = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PAdicContext {
    pub p: u64,
    /// Character values live in ℚ(ζ_{4p^depth}).
    pub depth: u32,
    /// Cap on the number of cosets a Schwartz window may enumerate.
    pub max_cosets: usize,
}

impl PAdicContext {
    pub fn new(p: u64, depth: u32) -> Result<Self> {
        if p == 2 {
            return Err(Error::UnsupportedPrime(2));
        }
        if !is_prime(p) {
            return Err(Error::InvalidInput(format!("{p} is not prime")));
        }
        if depth == 0 {
            return Err(Error::InvalidInput("depth must be at least 1".into()));
        }
        Ok(PAdicContext { p, depth, max_cosets: 1 << 20 })
    }

    pub fn with_max_cosets(mut self, n: usize) -> Self {
        self.max_cosets = n;
        self
    }

    pub fn ring(&self) -> CycRing {
        CycRing { p: self.p, depth: self.depth }
    }

    pub fn valuation(&self, x: &Rational) -> Valuation {
        valuation(x, self.p)
    }

    pub fn hilbert_symbol(&self, a: &Rational, b: &Rational) -> Result<i32> {
        hilbert_symbol(a, b, self.p)
    }

    pub fn chi_q(&self, a: &Rational, v: &QuadraticSpace) -> Result<i32> {
        chi_q(a, v, self.p)
    }

    pub fn weil_index(&self, v: &QuadraticSpace) -> Result<CycValue> {
        weil_index(v, self)
    }
}

pub fn hilbert_symbol(a: &Rational, b: &Rational, p: u64) -> Result<i32> {
    if p == 2 {
        return Err(Error::UnsupportedPrime(2));
    }
    if a.is_zero() || b.is_zero() {
        return Err(Error::ZeroInput);
    }
    let (al, be) = (val(a, p), val(b, p));
    let (u, v) = (unit_part(a, p), unit_part(b, p));
    let mut s = 1;
    if (al * be).rem_euclid(2) == 1 && ((p - 1) / 2) % 2 == 1 {
        s = -s;
    }
    if be.rem_euclid(2) == 1 {
        s *= legendre_unit(&u, p)?;
    }
    if al.rem_euclid(2) == 1 {
        s *= legendre_unit(&v, p)?;
    }
    Ok(s)
}

/// χ_Q(a) = (a, (-1)^{d/2} det J).
pub fn chi_q(a: &Rational, v: &QuadraticSpace, p: u64) -> Result<i32> {
    hilbert_symbol(a, &v.discriminant(), p)
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct QuadraticSpace {
    d: usize,
    j: Vec<Vec<i64>>,
    jm: Mat,
}

impl QuadraticSpace {
    pub fn new(j: Vec<Vec<i64>>) -> Result<Self> {
        let d = j.len();
        if d == 0 || d % 2 == 1 {
            return Err(Error::InvalidInput(format!("quadratic space dimension {d} must be even and positive")));
        }
        if j.iter().any(|r| r.len() != d) {
            return Err(Error::InvalidInput("Gram matrix is not square".into()));
        }
        let jm = Mat::from_fn(d, d, |a, b| rat(j[a][b]));
        if !jm.is_symmetric() {
            return Err(Error::InvalidInput("Gram matrix is not symmetric".into()));
        }
        if jm.det().is_zero() {
            return Err(Error::InvalidInput("Gram matrix is degenerate".into()));
        }
        Ok(QuadraticSpace { d, j, jm })
    }

    /// The hyperbolic plane, Q(x, y) = xy.
    pub fn hyperbolic() -> Self {
        QuadraticSpace::new(vec![vec![0, 1], vec![1, 0]]).expect("valid form")
    }

    pub fn diagonal(entries: &[i64]) -> Result<Self> {
        let d = entries.len();
        QuadraticSpace::new((0..d).map(|i| (0..d).map(|k| if i == k { entries[i] } else { 0 }).collect()).collect())
    }

    /// Orthogonal direct sum.
    pub fn direct_sum(&self, other: &QuadraticSpace) -> QuadraticSpace {
        let d = self.d + other.d;
        let j = (0..d)
            .map(|a| {
                (0..d)
                    .map(|b| match (a < self.d, b < self.d) {
                        (true, true) => self.j[a][b],
                        (false, false) => other.j[a - self.d][b - self.d],
                        _ => 0,
                    })
                    .collect()
            })
            .collect();
        QuadraticSpace::new(j).expect("direct sum of valid forms")
    }

    /// J ↦ c·J.
    pub fn scaled(&self, c: i64) -> Result<QuadraticSpace> {
        QuadraticSpace::new(self.j.iter().map(|r| r.iter().map(|x| x * c).collect()).collect())
    }

    /// J ↦ ᵗA J A.
    pub fn change_basis(&self, a: &Mat) -> Result<QuadraticSpace> {
        let m = a.transpose().mul(&self.jm).mul(a);
        let j = (0..self.d)
            .map(|r| {
                (0..self.d)
                    .map(|c| {
                        let x = &m[(r, c)];
                        if !x.is_integer() {
                            return Err(Error::InvalidInput("change of basis leaves integral forms".into()));
                        }
                        x.to_integer().to_i64().ok_or_else(|| Error::InvalidInput("entry too large".into()))
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        QuadraticSpace::new(j)
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn gram(&self) -> &Mat {
        &self.jm
    }

    pub fn gram_i64(&self) -> &[Vec<i64>] {
        &self.j
    }

    pub fn det(&self) -> Rational {
        self.jm.det()
    }

    /// (-1)^{d/2} det J.
    pub fn discriminant(&self) -> Rational {
        let sign = if (self.d / 2).is_multiple_of(2) { 1 } else { -1 };
        self.det() * rat(sign)
    }

    pub fn is_unimodular(&self, p: u64) -> bool {
        valuation(&self.det(), p) == Valuation::Finite(0)
    }

    /// ⟨x, y⟩ = ᵗx J y.
    pub fn pairing(&self, x: &[Rational], y: &[Rational]) -> Rational {
        assert_eq!(x.len(), self.d);
        assert_eq!(y.len(), self.d);
        let mut acc = Rational::zero();
        for a in 0..self.d {
            if x[a].is_zero() {
                continue;
            }
            for b in 0..self.d {
                if self.j[a][b] != 0 && !y[b].is_zero() {
                    acc += &x[a] * &y[b] * rat(self.j[a][b]);
                }
            }
        }
        acc
    }

    /// Q(x) = ½ ᵗx J x.
    pub fn eval(&self, x: &[Rational]) -> Rational {
        self.pairing(x, x) / rat(2)
    }

    /// ᵗx J x for integer vectors.
    pub fn pairing_i64(&self, x: &[i64], y: &[i64]) -> i128 {
        let mut acc = 0i128;
        for a in 0..self.d {
            for b in 0..self.d {
                acc += x[a] as i128 * self.j[a][b] as i128 * y[b] as i128;
            }
        }
        acc
    }

    /// |det J|_p^{1/2} as a cyclotomic value.
    pub fn half_volume(&self, ring: CycRing) -> CycValue {
        sqrt_abs(&self.det(), ring)
    }
}

/// |x|_p^{1/2} in the given ring.
pub fn sqrt_abs(x: &Rational, ring: CycRing) -> CycValue {
    let v = val(x, ring.p);
    if v % 2 == 0 {
        ring.from_rational(&p_pow(ring.p, -v / 2))
    } else {
        // p^{-v/2} = p^{-(v+1)/2} · √p
        ring.sqrt_p().scale(&p_pow(ring.p, -(v + 1) / 2))
    }
}

#[derive(Serialize, Deserialize)]
struct QuadJson {
    d: usize,
    #[serde(rename = "J")]
    j: Vec<Vec<i64>>,
}

impl Serialize for QuadraticSpace {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        QuadJson { d: self.d, j: self.j.clone() }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for QuadraticSpace {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let q = QuadJson::deserialize(d)?;
        if q.j.len() != q.d {
            return Err(D::Error::custom(format!("d = {} but J has {} rows", q.d, q.j.len())));
        }
        QuadraticSpace::new(q.j).map_err(D::Error::custom)
    }
}

/// Three quadratic spaces with total form Q(v) = Σ Q_i(v_i).
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct QuadTriple {
    pub spaces: [QuadraticSpace; 3],
}

impl QuadTriple {
    pub fn new(a: QuadraticSpace, b: QuadraticSpace, c: QuadraticSpace) -> Self {
        QuadTriple { spaces: [a, b, c] }
    }

    pub fn dims(&self) -> [usize; 3] {
        [self.spaces[0].dim(), self.spaces[1].dim(), self.spaces[2].dim()]
    }

    pub fn values(&self, v: &[Vec<Rational>; 3]) -> [Rational; 3] {
        [self.spaces[0].eval(&v[0]), self.spaces[1].eval(&v[1]), self.spaces[2].eval(&v[2])]
    }

    pub fn eval(&self, v: &[Vec<Rational>; 3]) -> Rational {
        let [a, b, c] = self.values(v);
        a + b + c
    }

    pub fn check_shape(&self, v: &[Vec<Rational>; 3]) -> Result<()> {
        for i in 0..3 {
            if v[i].len() != self.spaces[i].dim() {
                return Err(Error::InvalidInput(format!(
                    "component {} has length {}, expected {}",
                    i + 1,
                    v[i].len(),
                    self.spaces[i].dim()
                )));
            }
        }
        Ok(())
    }

    /// Q₁(v₁) = Q₂(v₂) = Q₃(v₃).
    pub fn in_y(&self, v: &[Vec<Rational>; 3]) -> bool {
        let [a, b, c] = self.values(v);
        a == b && b == c
    }

    /// In Y and at most one component zero.
    pub fn in_y_smooth(&self, v: &[Vec<Rational>; 3]) -> bool {
        self.in_y(v) && zero_components(v) <= 1
    }
}

pub fn zero_components(v: &[Vec<Rational>; 3]) -> usize {
    v.iter().filter(|x| x.iter().all(Zero::is_zero)).count()
}

/// Returns λ with g J⁻¹ ᵗg J = λ·I when g is a similitude of the form.
pub fn similitude_check(g: &Mat, v: &QuadraticSpace) -> Result<Option<Rational>> {
    if g.rows() != v.dim() || g.cols() != v.dim() {
        return Err(Error::InvalidInput("matrix size does not match the form".into()));
    }
    if g.det().is_zero() {
        return Err(Error::SingularMatrix);
    }
    let jinv = v.gram().inverse()?;
    let m = g.mul(&jinv).mul(&g.transpose()).mul(v.gram());
    let lambda = m[(0, 0)].clone();
    if m == Mat::identity(v.dim()).scale(&lambda) {
        Ok(Some(lambda))
    } else {
        Ok(None)
    }
}

/// Diagonalise a symmetric p-integral matrix by congruence over ℤ_(p).
/// Returns the diagonal entries.
pub fn diagonalize_form(j: &Mat, p: u64) -> Vec<Rational> {
    let n = j.rows();
    let mut a = j.clone();
    let mut out = Vec::with_capacity(n);
    for k in 0..n {
        // pivot of minimal valuation in the trailing block
        let mut best: Option<(Valuation, usize, usize)> = None;
        for r in k..n {
            for c in r..n {
                let v = valuation(&a[(r, c)], p);
                let better = match best {
                    None => true,
                    Some((bv, br, bc)) => v < bv || (v == bv && r == c && br != bc),
                };
                if better {
                    best = Some((v, r, c));
                }
            }
        }
        let (_, r, c) = best.expect("nonempty block");
        if r != c {
            // e_r ← e_r + e_c makes the diagonal entry carry the minimal valuation
            for t in 0..n {
                let x = a[(c, t)].clone();
                a[(r, t)] += x;
            }
            for t in 0..n {
                let x = a[(t, c)].clone();
                a[(t, r)] += x;
            }
        }
        swap_sym(&mut a, k, r);
        let piv = a[(k, k)].clone();
        assert!(!piv.is_zero(), "degenerate form");
        for r2 in k + 1..n {
            if a[(r2, k)].is_zero() {
                continue;
            }
            let f = &a[(r2, k)] / &piv;
            for t in 0..n {
                let x = &a[(k, t)] * &f;
                a[(r2, t)] -= x;
            }
            for t in 0..n {
                let x = &a[(t, k)] * &f;
                a[(t, r2)] -= x;
            }
        }
        out.push(piv);
    }
    out
}

fn swap_sym(a: &mut Mat, i: usize, j: usize) {
    if i == j {
        return;
    }
    a.swap_rows(i, j);
    let n = a.rows();
    for t in 0..n {
        let x = a[(t, i)].clone();
        let y = a[(t, j)].clone();
        a[(t, i)] = y;
        a[(t, j)] = x;
    }
}

/// p^{-kd}·|det J|^{1/2}·Σ_{x ∈ (ℤ/p^{2k})^d} ψ(Q(x)/p^{2k}) by direct enumeration.
pub fn weil_index_direct(v: &QuadraticSpace, p: u64, k: u32) -> Result<CycValue> {
    let d = v.dim();
    let modulus = int_pow(p, 2 * k);
    let total = (modulus as u128).pow(d as u32);
    if total > DIRECT_GAUSS_LIMIT as u128 * 16 {
        return Err(Error::ResourceBound(format!("{total} lattice points")));
    }
    let ring = CycRing::new(p, 2 * k)?;
    let inv2 = (modulus as i128 + 1) / 2;
    let mut hist = vec![0i64; modulus as usize];
    let mut x = vec![0i64; d];
    loop {
        let q = v.pairing_i64(&x, &x).rem_euclid(modulus as i128) * inv2 % modulus as i128;
        hist[q as usize] += 1;
        let mut i = 0;
        loop {
            if i == d {
                let step = 4 * int_pow(p, ring.depth - 2 * k);
                let sum = ring.sum_of_roots(hist.iter().enumerate().map(|(r, &c)| (r as u64 * step, c)));
                return Ok(sum.scale(&p_pow(p, -((k as usize * d) as i64))).mul(&v.half_volume(ring)));
            }
            x[i] += 1;
            if x[i] < modulus as i64 {
                break;
            }
            x[i] = 0;
            i += 1;
        }
    }
}

/// Weil index of the one-dimensional form x ↦ a x²/2, a p-integral.
fn weil_index_rank_one(a: &Rational, p: u64) -> Result<CycValue> {
    let alpha = val(a, p);
    debug_assert!(alpha >= 0);
    let level = |k: u32| -> Result<CycValue> {
        let modulus = int_pow(p, 2 * k);
        let depth = (2 * k as i64 - alpha).max(1) as u32;
        let ring = CycRing::new(p, depth)?;
        let half_a = a / rat(2);
        let mut hist = std::collections::BTreeMap::<u64, i64>::new();
        for x in 0..modulus {
            let q = &half_a * rat((x * x) as i64) / Rational::from_integer(BigInt::from(modulus));
            let e = match valuation(&q, p) {
                Valuation::Finite(s) if s < 0 => {
                    let ps = int_pow(p, (-s) as u32);
                    let r = residue(&(&q * Rational::from_integer(ps.into())), ps)?;
                    r * 4 * int_pow(p, depth - (-s) as u32)
                }
                _ => 0,
            };
            *hist.entry(e).or_default() += 1;
        }
        let sum = ring.sum_of_roots(hist);
        Ok(sum.scale(&p_pow(p, -(k as i64))).mul(&sqrt_abs(a, ring)))
    };
    let mut prev = level(1)?;
    for k in 2..=MAX_GAUSS_LEVEL {
        let cur = level(k)?;
        let depth = cur.ring().depth;
        if prev.embed(depth)? == cur {
            return Ok(cur);
        }
        prev = cur;
    }
    Err(Error::PrecisionExceeded("Gauss sum did not stabilise".into()))
}

/// γ(Q): the stabilised normalised Gauss sum, as an element of the context ring.
pub fn weil_index(v: &QuadraticSpace, ctx: &PAdicContext) -> Result<CycValue> {
    let p = ctx.p;
    let d = v.dim() as u32;
    let mut k = 1;
    while (int_pow(p, 2 * (k + 1)) as u128).pow(d) <= DIRECT_GAUSS_LIMIT as u128 {
        let a = weil_index_direct(v, p, k)?;
        let b = weil_index_direct(v, p, k + 1)?;
        if a.embed(b.ring().depth)? == b {
            return b.restrict(ctx.depth);
        }
        k += 1;
        if k > MAX_GAUSS_LEVEL {
            break;
        }
    }
    weil_index_diagonal(v, ctx)
}

/// γ(Q) as a product of rank-one indices over a diagonalisation of J.
pub fn weil_index_diagonal(v: &QuadraticSpace, ctx: &PAdicContext) -> Result<CycValue> {
    let ring = ctx.ring();
    let mut acc = ring.one();
    for a in diagonalize_form(v.gram(), ctx.p) {
        let g = weil_index_rank_one(&a, ctx.p)?;
        let depth = g.ring().depth.max(acc.ring().depth);
        let g = g.embed(depth)?;
        acc = acc.embed(depth)?.mul(&g);
    }
    acc.restrict(ctx.depth)
}

/// Whether x lies in ℤ_p^d.
pub fn is_integral_vector(x: &[Rational], p: u64) -> bool {
    x.iter().all(|c| valuation(c, p) >= Valuation::Finite(0))
}

/// ord of a vector: the minimum valuation of its entries.
pub fn ord(x: &[Rational], p: u64) -> Valuation {
    crate::arith::min_valuation(x, p)
}

/// Brute-force Hilbert symbol: search for a primitive solution of
/// z² ≡ a x² + b y² (mod p³).
pub fn hilbert_symbol_search(a: i64, b: i64, p: u64) -> i32 {
    // Scale out squares so a, b have valuation 0 or 1.
    let strip = |mut x: i64| {
        let p2 = (p * p) as i64;
        while x % p2 == 0 {
            x /= p2;
        }
        x
    };
    let (a, b) = (strip(a), strip(b));
    let m = int_pow(p, 3) as i64;
    let pi = p as i64;
    let mut squares = vec![false; m as usize];
    let mut unit_squares = vec![false; m as usize];
    for z in 0..m {
        squares[(z * z % m) as usize] = true;
        if z % pi != 0 {
            unit_squares[(z * z % m) as usize] = true;
        }
    }
    for x in 0..m {
        for y in 0..m {
            let t = (a * (x * x % m) + b * (y * y % m)).rem_euclid(m) as usize;
            let found = if x % pi != 0 || y % pi != 0 { squares[t] } else { unit_squares[t] };
            if found {
                return 1;
            }
        }
    }
    -1
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::ratio;
    use proptest::prelude::*;

    fn ctx(p: u64) -> PAdicContext {
        PAdicContext::new(p, 2).unwrap()
    }

    fn non_residue(p: u64) -> i64 {
        (2..p as i64).find(|&u| crate::arith::mod_pow(u as u64, (p - 1) / 2, p) != 1).unwrap()
    }

    #[test]
    fn rejects_two() {
        assert_eq!(PAdicContext::new(2, 1), Err(Error::UnsupportedPrime(2)));
        assert_eq!(hilbert_symbol(&rat(1), &rat(1), 2), Err(Error::UnsupportedPrime(2)));
    }

    #[test]
    fn hilbert_trivial_cases() {
        for p in [3, 5, 7] {
            for a in [1i64, 2, 3, 5, 7, 10, -3, 15] {
                assert_eq!(hilbert_symbol(&rat(1), &rat(a), p).unwrap(), 1);
                assert_eq!(hilbert_symbol(&rat(a), &rat(-a), p).unwrap(), 1);
            }
        }
    }

    #[test]
    fn hilbert_matches_search() {
        for p in [3u64, 5, 7] {
            let u = non_residue(p);
            assert_eq!(hilbert_symbol(&rat(p as i64), &rat(u), p).unwrap(), -1);
            assert_eq!(hilbert_symbol_search(p as i64, u, p), -1);
            for a in [1i64, 2, 3, 5, 6, 7, 10, 14, 15, -1, -3, -5, 9, 45] {
                for b in [1i64, 2, 3, 5, 6, 7, 10, -1, -2, -3, -5, -7, 21] {
                    if a % (p * p) as i64 == 0 || b % (p * p) as i64 == 0 {
                        continue;
                    }
                    assert_eq!(
                        hilbert_symbol(&rat(a), &rat(b), p).unwrap(),
                        hilbert_symbol_search(a, b, p),
                        "({a},{b})_{p}"
                    );
                }
            }
        }
    }

    #[test]
    fn chi_examples() {
        let h = QuadraticSpace::hyperbolic();
        for p in [3u64, 5] {
            for a in [1i64, 2, 3, 5, 6, 9, -7] {
                assert_eq!(chi_q(&rat(a), &h, p).unwrap(), 1);
                assert_eq!(chi_q(&rat(a * a), &QuadraticSpace::diagonal(&[1, 2]).unwrap(), p).unwrap(), 1);
            }
            let u = non_residue(p);
            let f = QuadraticSpace::diagonal(&[1, -u]).unwrap();
            assert_eq!(chi_q(&rat(p as i64), &f, p).unwrap(), -1);
            assert_eq!(hilbert_symbol_search(p as i64, u, p), -1);
        }
    }

    #[test]
    fn weil_index_hyperbolic_is_one() {
        let h = QuadraticSpace::hyperbolic();
        for p in [3u64, 5] {
            assert!(weil_index_direct(&h, p, 1).unwrap().is_one());
            if p == 3 {
                assert!(weil_index_direct(&h, p, 2).unwrap().is_one());
            }
            assert!(weil_index(&h, &ctx(p)).unwrap().is_one());
        }
    }

    #[test]
    fn weil_index_routes_agree() {
        for p in [3u64, 5, 7] {
            let c = ctx(p);
            let u = non_residue(p);
            let forms = [
                QuadraticSpace::diagonal(&[1, 1]).unwrap(),
                QuadraticSpace::diagonal(&[1, p as i64]).unwrap(),
                QuadraticSpace::diagonal(&[u, p as i64]).unwrap(),
                QuadraticSpace::diagonal(&[p as i64, p as i64]).unwrap(),
                QuadraticSpace::diagonal(&[1, (p * p) as i64]).unwrap(),
                QuadraticSpace::new(vec![vec![2, 1], vec![1, 2]]).unwrap(),
            ];
            for f in &forms {
                let a = weil_index(f, &c).unwrap();
                let b = weil_index_diagonal(f, &c).unwrap();
                assert_eq!(a, b, "{f:?} at {p}");
                assert!(a.pow(4).is_one(), "{f:?}: {a}");
                let neg = f.scaled(-1).unwrap();
                assert!(a.mul(&weil_index(&neg, &c).unwrap()).is_one());
            }
        }
    }

    #[test]
    fn weil_index_rank_two_nonunimodular() {
        // γ(diag(1, p)) = (2/p)·ε_p, ε_p = 1 or i
        for p in [3u64, 5, 7, 11] {
            let c = ctx(p);
            let f = QuadraticSpace::diagonal(&[1, p as i64]).unwrap();
            let leg2 = if p % 8 == 1 || p % 8 == 7 { 1 } else { -1 };
            let eps = if p % 4 == 1 { c.ring().one() } else { c.ring().i_pow(1) };
            assert_eq!(weil_index(&f, &c).unwrap(), eps.scale(&rat(leg2)));
        }
    }

    #[test]
    fn similitudes() {
        let f = QuadraticSpace::diagonal(&[1, 1]).unwrap();
        assert_eq!(similitude_check(&Mat::identity(2).scale(&rat(3)), &f).unwrap(), Some(rat(9)));
        let rot = Mat::from_i64(&[&[0, -1], &[1, 0]]);
        assert_eq!(similitude_check(&rot, &f).unwrap(), Some(rat(1)));
        let g = Mat::from_i64(&[&[1, 2], &[-2, 1]]);
        assert_eq!(similitude_check(&g, &f).unwrap(), Some(rat(5)));
        let bad = Mat::from_i64(&[&[1, 1], &[0, 1]]);
        assert_eq!(similitude_check(&bad, &f).unwrap(), None);
        // direct check of the product
        let m = bad.mul(&f.gram().inverse().unwrap()).mul(&bad.transpose()).mul(f.gram());
        assert_ne!(m[(0, 1)], rat(0));
        assert_eq!(similitude_check(&Mat::zeros(2, 2), &f), Err(Error::SingularMatrix));
    }

    #[test]
    fn json_schema() {
        let f: QuadraticSpace = serde_json::from_str(r#"{"d": 2, "J": [[0, 1], [1, 0]]}"#).unwrap();
        assert_eq!(f, QuadraticSpace::hyperbolic());
        assert!(serde_json::from_str::<QuadraticSpace>(r#"{"d": 3, "J": [[1,0,0],[0,1,0],[0,0,1]]}"#).is_err());
        assert_eq!(serde_json::to_string(&f).unwrap(), r#"{"d":2,"J":[[0,1],[1,0]]}"#);
    }

    #[test]
    fn polarization() {
        let f = QuadraticSpace::new(vec![vec![2, 1], vec![1, -4]]).unwrap();
        let x = vec![ratio(1, 3), rat(2)];
        let y = vec![rat(-5), ratio(7, 2)];
        let s: Vec<_> = x.iter().zip(&y).map(|(a, b)| a + b).collect();
        assert_eq!(f.eval(&s) - f.eval(&x) - f.eval(&y), f.pairing(&x, &y));
    }

    fn nonzero() -> impl Strategy<Value = Rational> {
        (-60i64..60, 1i64..30, -2i32..3).prop_filter_map("nonzero", |(n, d, e)| {
            if n == 0 {
                None
            } else {
                Some(ratio(n, d) * p_pow(3, e as i64))
            }
        })
    }

    proptest! {
        #[test]
        fn hilbert_bimultiplicative(a in nonzero(), b in nonzero(), c in nonzero()) {
            for p in [3u64, 5] {
                let ab = hilbert_symbol(&a, &(&b * &c), p).unwrap();
                prop_assert_eq!(ab, hilbert_symbol(&a, &b, p).unwrap() * hilbert_symbol(&a, &c, p).unwrap());
                prop_assert_eq!(hilbert_symbol(&a, &b, p).unwrap(), hilbert_symbol(&b, &a, p).unwrap());
            }
        }

        #[test]
        fn chi_multiplicative(a in nonzero(), b in nonzero()) {
            let f = QuadraticSpace::diagonal(&[1, 3]).unwrap();
            prop_assert_eq!(chi_q(&(&a * &b), &f, 3).unwrap(), chi_q(&a, &f, 3).unwrap() * chi_q(&b, &f, 3).unwrap());
        }

        #[test]
        fn weil_index_basis_invariant(a in -4i64..5, b in -4i64..5, c in -4i64..5) {
            // A = [[1, a], [b, 1 + ab]] ∘ [[1, 0], [c, 1]] is unimodular over ℤ
            let a1 = Mat::from_i64(&[&[1, a], &[b, 1 + a * b]]);
            let a2 = Mat::from_i64(&[&[1, 0], &[c, 1]]);
            let m = a1.mul(&a2);
            for p in [3u64, 5] {
                let c = ctx(p);
                for f in [QuadraticSpace::diagonal(&[1, 2]).unwrap(), QuadraticSpace::diagonal(&[1, p as i64]).unwrap()] {
                    let g = f.change_basis(&m).unwrap();
                    prop_assert_eq!(weil_index(&f, &c).unwrap(), weil_index(&g, &c).unwrap());
                }
            }
        }
    }
}
