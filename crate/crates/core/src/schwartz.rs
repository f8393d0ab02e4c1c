//! Schwartz functions on ℚ_p^d modelled on finite lattice windows, and the
//! Weil representation of SL₂ attached to an even-dimensional quadratic space.
//!
//! A window (m, n) holds functions supported in p^{-m}ℤ_p^d and constant on
//! cosets of p^nℤ_p^d.  With L = m + n the cosets are indexed by
//! k ∈ (ℤ/p^L)^d (little-endian flattening), the coset of k being
//! p^{-m}k + p^nℤ_p^d.
//!
//! Values are kept as one flat table of power-basis numerators (one row of
//! φ(N) entries per coset) over a single positive denominator, reduced to
//! lowest terms after every operation.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::arith::{int_pow, min_valuation, p_pow, parse_rational, rat, rational_to_string, residue, val, Rational, Valuation};
use crate::cyclotomic::{reduce_in_place, CycRing, CycValue};
use crate::error::{Error, Result};
use crate::linalg::{Mat, Sl2};
use crate::padic::{chi_q, similitude_check, weil_index, PAdicContext, QuadTriple, QuadraticSpace};

/// Stored numerators and denominators stay below this magnitude.
const MAG_LIMIT: u128 = 1 << 100;
/// Cap on cosets × φ(N), the size of the coefficient table.
const MAX_COEFFS: u128 = 1 << 25;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LatticeWindow {
    pub d: usize,
    pub m: i64,
    pub n: i64,
}

impl LatticeWindow {
    pub fn new(d: usize, m: i64, n: i64) -> Result<Self> {
        if m + n < 0 {
            return Err(Error::InvalidInput(format!("window ({m}, {n}) has m + n < 0")));
        }
        Ok(LatticeWindow { d, m, n })
    }

    pub fn level(&self) -> u32 {
        (self.m + self.n) as u32
    }

    pub fn coset_count(&self, p: u64) -> usize {
        (int_pow(p, self.level()) as usize).pow(self.d as u32)
    }

    /// Coordinates of coset number `idx`.
    pub fn decode(&self, p: u64, mut idx: usize) -> Vec<u64> {
        let side = int_pow(p, self.level()) as usize;
        (0..self.d)
            .map(|_| {
                let k = idx % side;
                idx /= side;
                k as u64
            })
            .collect()
    }

    pub fn encode(&self, p: u64, k: &[u64]) -> usize {
        let side = int_pow(p, self.level()) as usize;
        k.iter().rev().fold(0, |acc, &x| acc * side + x as usize)
    }

    /// The representative p^{-m}k of coset number `idx`.
    pub fn representative(&self, p: u64, idx: usize) -> Vec<Rational> {
        let scale = p_pow(p, -self.m);
        self.decode(p, idx).into_iter().map(|k| rat(k as i64) * &scale).collect()
    }
}

fn check_budget(ctx: &PAdicContext, w: &LatticeWindow) -> Result<()> {
    let side = int_pow(ctx.p, w.level()) as u128;
    let total = side.checked_pow(w.d as u32).unwrap_or(u128::MAX);
    let coeffs = total.saturating_mul(ctx.ring().degree() as u128);
    if total > ctx.max_cosets as u128 || coeffs > MAX_COEFFS {
        return Err(Error::PrecisionExceeded(format!(
            "window (m={}, n={}, d={}) needs {total} cosets, cap is {}",
            w.m, w.n, w.d, ctx.max_cosets
        )));
    }
    Ok(())
}

/// Little-endian odometer over (ℤ/side)^d.
fn step(k: &mut [u64], side: u64) {
    for x in k.iter_mut() {
        *x += 1;
        if *x < side {
            return;
        }
        *x = 0;
    }
}

fn overflow() -> Error {
    Error::PrecisionExceeded("cyclotomic coefficients exceed the 100-bit working range".into())
}

fn to_i128(x: &BigInt) -> Result<i128> {
    x.to_i128().filter(|v| v.unsigned_abs() < MAG_LIMIT).ok_or_else(overflow)
}

/// Write ζ^e·row into buf[..φ] (buf has length N).
fn rotate_row(ring: CycRing, row: &[i128], e: usize, buf: &mut [i128]) {
    let n = buf.len();
    buf.fill(0);
    for (i, &a) in row.iter().enumerate() {
        if a != 0 {
            buf[(i + e) % n] = a;
        }
    }
    reduce_in_place(ring, buf);
}

#[derive(Clone, Debug)]
pub struct SchwartzFn {
    ctx: PAdicContext,
    window: LatticeWindow,
    den: i128,
    nums: Vec<i128>,
}

impl SchwartzFn {
    pub fn new(ctx: &PAdicContext, window: LatticeWindow, values: Vec<CycValue>) -> Result<Self> {
        check_budget(ctx, &window)?;
        if values.len() != window.coset_count(ctx.p) {
            return Err(Error::InvalidInput(format!(
                "window needs {} values, got {}",
                window.coset_count(ctx.p),
                values.len()
            )));
        }
        let ring = ctx.ring();
        if let Some(v) = values.iter().find(|v| v.ring() != ring) {
            return Err(Error::DepthMismatch { left: ctx.depth, right: v.ring().depth });
        }
        let den = values.iter().fold(BigInt::one(), |acc, v| acc.lcm(v.denominator()));
        let phi = ring.degree();
        let mut nums = Vec::with_capacity(values.len() * phi);
        for v in &values {
            let f = &den / v.denominator();
            for x in v.numerators() {
                nums.push(to_i128(&(x * &f))?);
            }
        }
        SchwartzFn { ctx: *ctx, window, den: to_i128(&den)?, nums }.finish()
    }

    pub fn zero(ctx: &PAdicContext, d: usize) -> Self {
        let phi = ctx.ring().degree();
        SchwartzFn { ctx: *ctx, window: LatticeWindow { d, m: 0, n: 0 }, den: 1, nums: vec![0; phi] }
    }

    fn constant_one(ctx: &PAdicContext, d: usize) -> Self {
        let mut f = SchwartzFn::zero(ctx, d);
        f.nums[0] = 1;
        f
    }

    /// Build from a function of the coset representative.
    pub fn from_fn(
        ctx: &PAdicContext,
        window: LatticeWindow,
        f: impl Fn(&[Rational]) -> CycValue,
    ) -> Result<Self> {
        check_budget(ctx, &window)?;
        let values = (0..window.coset_count(ctx.p)).map(|i| f(&window.representative(ctx.p, i))).collect();
        SchwartzFn::new(ctx, window, values)
    }

    pub fn ctx(&self) -> &PAdicContext {
        &self.ctx
    }

    pub fn window(&self) -> LatticeWindow {
        self.window
    }

    pub fn dim(&self) -> usize {
        self.window.d
    }

    fn ring(&self) -> CycRing {
        self.ctx.ring()
    }

    fn phi(&self) -> usize {
        self.ring().degree()
    }

    fn row(&self, i: usize) -> &[i128] {
        let phi = self.phi();
        &self.nums[i * phi..(i + 1) * phi]
    }

    fn row_is_zero(&self, i: usize) -> bool {
        self.row(i).iter().all(|&x| x == 0)
    }

    fn cosets(&self) -> usize {
        self.nums.len() / self.phi()
    }

    /// Value on coset number `i`.
    pub fn value(&self, i: usize) -> CycValue {
        let num = self.row(i).iter().map(|&x| BigInt::from(x)).collect();
        CycValue::from_parts(self.ring(), num, BigInt::from(self.den)).expect("row has φ entries")
    }

    pub fn values(&self) -> Vec<CycValue> {
        (0..self.cosets()).map(|i| self.value(i)).collect()
    }

    /// Lowest terms and the magnitude guard.
    fn finish(mut self) -> Result<SchwartzFn> {
        if self.den < 0 {
            self.den = -self.den;
            self.nums.iter_mut().for_each(|x| *x = -*x);
        }
        let mut g = self.den;
        let mut max = 0u128;
        for &x in &self.nums {
            if x != 0 {
                max = max.max(x.unsigned_abs());
                if g != 1 {
                    g = g.gcd(&x);
                }
            }
        }
        if max == 0 {
            self.den = 1;
            return Ok(self);
        }
        if g != 1 {
            self.den /= g;
            self.nums.iter_mut().for_each(|x| *x /= g);
        }
        if max / g.unsigned_abs() >= MAG_LIMIT || self.den.unsigned_abs() >= MAG_LIMIT {
            return Err(overflow());
        }
        Ok(self)
    }

    /// New function on `out_w` whose coset k takes the value of row map(k) (or 0).
    fn gather(&self, out_w: LatticeWindow, mut map: impl FnMut(&[u64]) -> Option<usize>) -> SchwartzFn {
        let p = self.ctx.p;
        let phi = self.phi();
        let count = out_w.coset_count(p);
        let side = int_pow(p, out_w.level());
        let mut nums = vec![0i128; count * phi];
        let mut k = vec![0u64; out_w.d];
        for i in 0..count {
            if let Some(j) = map(&k) {
                nums[i * phi..(i + 1) * phi].copy_from_slice(self.row(j));
            }
            step(&mut k, side);
        }
        SchwartzFn { ctx: self.ctx, window: out_w, den: self.den, nums }
    }

    /// Index of the coset containing x, or None when x lies outside the support window.
    pub fn coset_of(&self, x: &[Rational]) -> Result<Option<usize>> {
        if x.len() != self.window.d {
            return Err(Error::InvalidInput("point dimension mismatch".into()));
        }
        let p = self.ctx.p;
        if min_valuation(x, p) < Valuation::Finite(-self.window.m) {
            return Ok(None);
        }
        let side = int_pow(p, self.window.level());
        let scale = p_pow(p, self.window.m);
        let k = x.iter().map(|c| residue(&(c * &scale), side)).collect::<Result<Vec<_>>>()?;
        Ok(Some(self.window.encode(p, &k)))
    }

    pub fn eval(&self, x: &[Rational]) -> Result<CycValue> {
        Ok(match self.coset_of(x)? {
            Some(i) => self.value(i),
            None => self.ring().zero(),
        })
    }

    pub fn is_zero(&self) -> bool {
        self.nums.iter().all(|&x| x == 0)
    }

    /// The same function on a finer window.
    pub fn refine(&self, m: i64, n: i64) -> Result<SchwartzFn> {
        let w = self.window;
        if m < w.m || n < w.n {
            return Err(Error::InvalidInput(format!("({m}, {n}) does not refine ({}, {})", w.m, w.n)));
        }
        if m == w.m && n == w.n {
            return Ok(self.clone());
        }
        let target = LatticeWindow { d: w.d, m, n };
        check_budget(&self.ctx, &target)?;
        let p = self.ctx.p;
        let shift = int_pow(p, (m - w.m) as u32);
        let side = int_pow(p, w.level()) as usize;
        Ok(self.gather(target, |k| {
            let mut idx = 0;
            for &x in k.iter().rev() {
                if x % shift != 0 {
                    return None;
                }
                idx = idx * side + ((x / shift) as usize % side);
            }
            Some(idx)
        }))
    }

    /// Shrink to the smallest window representing the same function.
    pub fn compact(&self) -> SchwartzFn {
        let p = self.ctx.p;
        if self.is_zero() {
            return SchwartzFn::zero(&self.ctx, self.window.d);
        }
        let mut f = self.clone();
        loop {
            let w = f.window;
            if w.level() == 0 {
                return f;
            }
            let side = int_pow(p, w.level());
            let mut k = vec![0u64; w.d];
            let mut support_shrinks = true;
            for i in 0..f.cosets() {
                if k.iter().any(|&x| x % p != 0) && !f.row_is_zero(i) {
                    support_shrinks = false;
                    break;
                }
                step(&mut k, side);
            }
            if support_shrinks {
                let small = LatticeWindow { d: w.d, m: w.m - 1, n: w.n };
                f = f.gather(small, |k| {
                    Some(k.iter().rev().fold(0usize, |acc, &x| acc * side as usize + (x * p) as usize))
                });
                continue;
            }
            let sub = side / p;
            let mut k = vec![0u64; w.d];
            let mut invariant = true;
            for i in 0..f.cosets() {
                let j = k.iter().rev().fold(0usize, |acc, &x| acc * side as usize + (x % sub) as usize);
                if j != i && f.row(i) != f.row(j) {
                    invariant = false;
                    break;
                }
                step(&mut k, side);
            }
            if invariant {
                let coarse = LatticeWindow { d: w.d, m: w.m, n: w.n - 1 };
                f = f.gather(coarse, |k| Some(w.encode(p, k)));
                continue;
            }
            return f;
        }
    }

    /// Bring two functions to a common window.
    pub fn align(&self, other: &SchwartzFn) -> Result<(SchwartzFn, SchwartzFn)> {
        if self.window.d != other.window.d || self.ctx.ring() != other.ctx.ring() {
            return Err(Error::InvalidInput("functions live on different spaces".into()));
        }
        let m = self.window.m.max(other.window.m);
        let n = self.window.n.max(other.window.n);
        Ok((self.refine(m, n)?, other.refine(m, n)?))
    }

    pub fn add(&self, other: &SchwartzFn) -> Result<SchwartzFn> {
        let (a, b) = self.align(other)?;
        let den = a.den.lcm(&b.den);
        let (fa, fb) = (den / a.den, den / b.den);
        let nums = a
            .nums
            .iter()
            .zip(&b.nums)
            .map(|(&x, &y)| x.checked_mul(fa).and_then(|x| y.checked_mul(fb).and_then(|y| x.checked_add(y))))
            .collect::<Option<Vec<_>>>()
            .ok_or_else(overflow)?;
        Ok(SchwartzFn { ctx: a.ctx, window: a.window, den, nums }.finish()?.compact())
    }

    pub fn sub(&self, other: &SchwartzFn) -> Result<SchwartzFn> {
        self.add(&other.scale_rational(&rat(-1))?)
    }

    pub fn scale(&self, c: &CycValue) -> Result<SchwartzFn> {
        if c.ring() != self.ring() {
            return Err(Error::DepthMismatch { left: self.ctx.depth, right: c.ring().depth });
        }
        if let Some(r) = c.to_rational() {
            return self.scale_rational(&r);
        }
        let ring = self.ring();
        let phi = self.phi();
        let terms: Vec<(usize, i128)> = c
            .numerators()
            .iter()
            .enumerate()
            .filter(|(_, x)| !x.is_zero())
            .map(|(j, x)| Ok((j, to_i128(x)?)))
            .collect::<Result<_>>()?;
        let cmax = terms.iter().map(|t| t.1.unsigned_abs()).max().unwrap_or(0);
        let rmax = self.nums.iter().map(|x| x.unsigned_abs()).max().unwrap_or(0);
        if rmax.saturating_mul(cmax).saturating_mul(2 * phi as u128 * ring.p as u128) >= 1 << 126 {
            return Err(overflow());
        }
        let den = self.den.checked_mul(to_i128(c.denominator())?).ok_or_else(overflow)?;
        let mut nums = vec![0i128; self.nums.len()];
        let mut buf = vec![0i128; ring.order()];
        for (row, out) in self.nums.chunks(phi).zip(nums.chunks_mut(phi)) {
            if row.iter().all(|&x| x == 0) {
                continue;
            }
            buf.fill(0);
            for (i, &a) in row.iter().enumerate() {
                if a != 0 {
                    for &(j, b) in &terms {
                        buf[i + j] += a * b;
                    }
                }
            }
            reduce_in_place(ring, &mut buf);
            out.copy_from_slice(&buf[..phi]);
        }
        SchwartzFn { ctx: self.ctx, window: self.window, den, nums }.finish()
    }

    pub fn scale_rational(&self, c: &Rational) -> Result<SchwartzFn> {
        if c.is_zero() {
            return Ok(SchwartzFn::zero(&self.ctx, self.window.d));
        }
        let num = to_i128(c.numer())?;
        let den = self.den.checked_mul(to_i128(c.denom())?).ok_or_else(overflow)?;
        let nums = self
            .nums
            .iter()
            .map(|&x| x.checked_mul(num))
            .collect::<Option<Vec<_>>>()
            .ok_or_else(overflow)?;
        SchwartzFn { ctx: self.ctx, window: self.window, den, nums }.finish()
    }

    /// f(x) ↦ f(-x).
    pub fn reflect(&self) -> SchwartzFn {
        let w = self.window;
        let side = int_pow(self.ctx.p, w.level());
        self.gather(w, |k| {
            Some(k.iter().rev().fold(0usize, |acc, &x| acc * side as usize + ((side - x) % side) as usize))
        })
    }

    fn row_sum(&self, mut term: impl FnMut(usize) -> CycValue) -> CycValue {
        (0..self.cosets())
            .filter(|&i| !self.row_is_zero(i))
            .fold(self.ring().zero(), |acc, i| acc.add(&term(i)))
    }

    /// ∫ f with vol(ℤ_p^d) = 1.
    pub fn integral(&self) -> CycValue {
        let phi = self.phi();
        let mut acc = vec![BigInt::zero(); phi];
        for row in self.nums.chunks(phi) {
            for (a, &x) in acc.iter_mut().zip(row) {
                *a += x;
            }
        }
        let sum = CycValue::from_parts(self.ring(), acc, BigInt::from(self.den)).expect("row has φ entries");
        sum.scale(&p_pow(self.ctx.p, -(self.window.n * self.window.d as i64)))
    }

    /// ∫ |f|² for the measure giving ℤ_p^d volume |det J|^{1/2}.
    pub fn l2_norm_sq(&self, space: &QuadraticSpace) -> CycValue {
        let sum = self.row_sum(|i| self.value(i).norm_sq());
        sum.scale(&p_pow(self.ctx.p, -(self.window.n * self.window.d as i64)))
            .mul(&space.half_volume(self.ring()))
    }

    /// Nonzero values keyed by coset representatives.
    pub fn support(&self) -> Vec<(Vec<Rational>, CycValue)> {
        (0..self.cosets())
            .filter(|&i| !self.row_is_zero(i))
            .map(|i| (self.window.representative(self.ctx.p, i), self.value(i)))
            .collect()
    }
}

impl PartialEq for SchwartzFn {
    fn eq(&self, other: &SchwartzFn) -> bool {
        if self.ctx.ring() != other.ctx.ring() {
            return false;
        }
        let a = self.compact();
        let b = other.compact();
        a.window == b.window && a.den == b.den && a.nums == b.nums
    }
}

/// The indicator of ℤ_p^d, presented on the given window.
pub fn indicator_lattice(ctx: &PAdicContext, window: LatticeWindow) -> Result<SchwartzFn> {
    if window.m < 0 || window.n < 0 {
        return Err(Error::InvalidInput("window too coarse to hold the lattice indicator".into()));
    }
    SchwartzFn::constant_one(ctx, window.d).refine(window.m, window.n)
}

/// The indicator of v₀ + p^nℤ_p^d.
pub fn coset_indicator(ctx: &PAdicContext, v0: &[Rational], n: i64) -> Result<SchwartzFn> {
    let p = ctx.p;
    let m = match min_valuation(v0, p) {
        Valuation::Infinite => -n,
        Valuation::Finite(v) => (-v).max(-n),
    };
    let window = LatticeWindow::new(v0.len(), m, n)?;
    check_budget(ctx, &window)?;
    let phi = ctx.ring().degree();
    let mut f = SchwartzFn { ctx: *ctx, window, den: 1, nums: vec![0; window.coset_count(p) * phi] };
    let idx = f.coset_of(v0)?.expect("v0 lies in its own window");
    f.nums[idx * phi] = 1;
    Ok(f)
}

/// Exponent δ with J⁻¹ℤ_p^d ⊆ p^{-δ}ℤ_p^d.
fn dual_shift(space: &QuadraticSpace, p: u64) -> Result<i64> {
    let inv = space.gram().inverse()?;
    Ok(match min_valuation(inv.entries(), p) {
        Valuation::Finite(v) => (-v).max(0),
        Valuation::Infinite => 0,
    })
}

trait Coeff:
    Copy + Zero + std::ops::AddAssign + for<'a> std::ops::AddAssign<&'a Self> + for<'a> std::ops::SubAssign<&'a Self>
{
    fn from_i128(x: i128) -> Self;
    fn to_i128(self) -> i128;
}

impl Coeff for i64 {
    fn from_i128(x: i128) -> Self {
        x as i64
    }
    fn to_i128(self) -> i128 {
        self as i128
    }
}

impl Coeff for i128 {
    fn from_i128(x: i128) -> Self {
        x
    }
    fn to_i128(self) -> i128 {
        self
    }
}

/// out += ζ^s·y on length-N buffers.
fn rot_add<T: Coeff>(out: &mut [T], y: &[T], s: usize) {
    let n = out.len();
    let (lo, hi) = out.split_at_mut(s);
    for (o, &v) in hi.iter_mut().zip(&y[..n - s]) {
        *o += v;
    }
    for (o, &v) in lo.iter_mut().zip(&y[n - s..]) {
        *o += v;
    }
}

/// Radix-p FFT X[j] = Σ_k x[k] ζ_N^{unit·jk} over `len` rows of length N,
/// reading row k at `input[(offset + k·stride)·N ..]`.  `scratch` needs
/// room for `len` rows at every recursion level.
#[allow(clippy::too_many_arguments)]
fn fft_rows<T: Coeff>(
    input: &[T],
    offset: usize,
    stride: usize,
    len: usize,
    p: usize,
    unit: usize,
    out: &mut [T],
    scratch: &mut [T],
) {
    let n = out.len() / len;
    if len == 1 {
        out.copy_from_slice(&input[offset * n..(offset + 1) * n]);
        return;
    }
    let sub = len / p;
    let (parts, rest) = scratch.split_at_mut(len * n);
    for r in 0..p {
        let part = &mut parts[r * sub * n..(r + 1) * sub * n];
        fft_rows(input, offset + r * stride, stride * p, sub, p, unit * p, part, rest);
    }
    out.fill(T::zero());
    for j in 0..len {
        let o = &mut out[j * n..(j + 1) * n];
        for r in 0..p {
            let y = &parts[(r * sub + j % sub) * n..(r * sub + j % sub + 1) * n];
            rot_add(o, y, ((j * r) % len) * unit % n);
        }
    }
}

/// In-place d-dimensional DFT G[j] = Σ_k f_k ζ_{p^L}^{j·k} of the numerator table.
fn dft_table<T: Coeff>(ring: CycRing, w: LatticeWindow, nums: &mut [i128]) {
    let p = ring.p as usize;
    let side = int_pow(ring.p, w.level()) as usize;
    let n = ring.order();
    let phi = ring.degree();
    if side == 1 {
        return;
    }
    let total = nums.len() / phi;
    let mut line = vec![T::zero(); side * n];
    let mut out = vec![T::zero(); side * n];
    let mut scratch = vec![T::zero(); 2 * side * n];
    let mut stride = 1;
    for _axis in 0..w.d {
        for base in 0..total {
            if (base / stride) % side != 0 {
                continue;
            }
            let mut any = false;
            for k in 0..side {
                let r = base + k * stride;
                let src = &nums[r * phi..(r + 1) * phi];
                let dst = &mut line[k * n..(k + 1) * n];
                for (d, &s) in dst.iter_mut().zip(src) {
                    any |= s != 0;
                    *d = T::from_i128(s);
                }
                dst[phi..].fill(T::zero());
            }
            if !any {
                continue;
            }
            fft_rows(&line, 0, 1, side, p, n / side, &mut out, &mut scratch);
            for j in 0..side {
                let buf = &mut out[j * n..(j + 1) * n];
                reduce_in_place(ring, buf);
                let r = base + j * stride;
                for (d, &s) in nums[r * phi..(r + 1) * phi].iter_mut().zip(&buf[..phi]) {
                    *d = s.to_i128();
                }
            }
        }
        stride *= side;
    }
}

/// f̂(v) = ∫ f(t) ψ(ᵗv J t) dt, with vol(ℤ_p^d) = |det J|^{1/2}.
pub fn fourier(f: &SchwartzFn, space: &QuadraticSpace) -> Result<SchwartzFn> {
    fourier_scaled(f, space, None)
}

fn fourier_scaled(f: &SchwartzFn, space: &QuadraticSpace, extra: Option<&CycValue>) -> Result<SchwartzFn> {
    if space.dim() != f.dim() {
        return Err(Error::InvalidInput("form and function dimensions differ".into()));
    }
    let ctx = f.ctx;
    let p = ctx.p;
    let ring = ctx.ring();
    let w = f.window;
    let level = w.level();
    if level > ctx.depth {
        return Err(Error::PrecisionExceeded(format!(
            "Fourier transform on a level-{level} window needs depth {level}, context has {}",
            ctx.depth
        )));
    }
    let delta = dual_shift(space, p)?;
    let out_w = LatticeWindow { d: w.d, m: w.n + delta, n: w.m };
    check_budget(&ctx, &out_w)?;
    if f.is_zero() {
        return Ok(SchwartzFn::zero(&ctx, w.d));
    }
    let side = int_pow(p, level);
    // each axis multiplies the sup norm by at most side·2p
    let growth = (2 * p as u128 * side as u128).checked_pow(w.d as u32).unwrap_or(u128::MAX);
    let max_in = f.nums.iter().map(|x| x.unsigned_abs()).max().unwrap_or(0);
    let bound = max_in.saturating_mul(growth);
    let mut g = SchwartzFn { ctx, window: w, den: f.den, nums: f.nums.clone() };
    if bound < 1 << 62 {
        dft_table::<i64>(ring, w, &mut g.nums);
    } else if bound < 1 << 126 {
        dft_table::<i128>(ring, w, &mut g.nums);
    } else {
        return Err(overflow());
    }
    let mut scalar = space.half_volume(ring).scale(&p_pow(p, -(w.n * w.d as i64)));
    if let Some(c) = extra {
        scalar = scalar.mul(c);
    }
    let g = g.finish()?.scale(&scalar)?;
    let pd = int_pow(p, delta as u32) as i128;
    let jm = space.gram_i64();
    let sidei = side as i128;
    let out = g.gather(out_w, |k| {
        let mut idx = 0usize;
        for row in jm.iter().rev() {
            let s: i128 = row.iter().zip(k).map(|(&a, &b)| a as i128 * b as i128).sum();
            if s.rem_euclid(pd) != 0 {
                return None;
            }
            idx = idx * side as usize + (s / pd).rem_euclid(sidei) as usize;
        }
        Some(idx)
    });
    Ok(out.compact())
}

/// The Weil representation of SL₂ on Schwartz functions of one quadratic space.
#[derive(Debug, Clone)]
pub struct WeilRep {
    ctx: PAdicContext,
    space: QuadraticSpace,
    gamma: CycValue,
}

impl WeilRep {
    pub fn new(ctx: &PAdicContext, space: &QuadraticSpace) -> Result<Self> {
        let gamma = weil_index(space, ctx)?;
        Ok(WeilRep { ctx: *ctx, space: space.clone(), gamma })
    }

    pub fn space(&self) -> &QuadraticSpace {
        &self.space
    }

    pub fn ctx(&self) -> &PAdicContext {
        &self.ctx
    }

    pub fn gamma(&self) -> &CycValue {
        &self.gamma
    }

    fn check(&self, f: &SchwartzFn) -> Result<()> {
        if f.dim() != self.space.dim() {
            return Err(Error::InvalidInput("function and form dimensions differ".into()));
        }
        if f.ctx.ring() != self.ctx.ring() {
            return Err(Error::DepthMismatch { left: self.ctx.depth, right: f.ctx.depth });
        }
        Ok(())
    }

    /// ρ(w) f = γ(Q)·f̂.
    pub fn w(&self, f: &SchwartzFn) -> Result<SchwartzFn> {
        self.check(f)?;
        fourier_scaled(f, &self.space, Some(&self.gamma))
    }

    /// ρ(n(t)) f(v) = ψ(t Q(v)) f(v).
    pub fn n(&self, t: &Rational, f: &SchwartzFn) -> Result<SchwartzFn> {
        self.check(f)?;
        if t.is_zero() || f.is_zero() {
            return Ok(f.clone());
        }
        let p = self.ctx.p;
        let vt = val(t, p);
        let w = f.window;
        let n2 = w.n.max(w.m - vt).max((-vt + 1).div_euclid(2));
        let g = f.refine(w.m, n2)?;
        let w = g.window;
        // t·Q(p^{-m}k) = u·(ᵗkJk/2)·p^{vt-2m}
        let s = 2 * w.m - vt;
        if s <= 0 {
            return Ok(g.compact());
        }
        let depth = self.ctx.depth as i64;
        let ps = (p as i128).checked_pow(s as u32).ok_or_else(|| {
            Error::PrecisionExceeded(format!("psi(tQ) denominator p^{s} out of range"))
        })?;
        let u = residue(&(t * p_pow(p, -vt)), ps as u64)? as i128;
        let inv2 = (ps + 1) / 2;
        // only cosets where f is nonzero need ψ(tQ) to be representable
        let excess = (p as i128).pow((s - depth).max(0) as u32);
        let step_e = 4 * int_pow(p, (depth - s).max(0) as u32) as i128;
        let ring = g.ring();
        let phi = g.phi();
        let side = int_pow(p, w.level());
        let mut out = g.clone();
        let mut buf = vec![0i128; ring.order()];
        let mut k = vec![0u64; w.d];
        let mut ki = vec![0i64; w.d];
        for i in 0..g.cosets() {
            if !g.row_is_zero(i) {
                for (a, &b) in ki.iter_mut().zip(&k) {
                    *a = b as i64;
                }
                let q = self.space.pairing_i64(&ki, &ki).rem_euclid(ps) * inv2 % ps * u % ps;
                if q % excess != 0 {
                    return Err(Error::PrecisionExceeded(format!(
                        "psi(tQ) on window (m={}, n={}) needs depth {s}, context has {depth}",
                        w.m, w.n
                    )));
                }
                let e = (q / excess * step_e) as usize;
                if e != 0 {
                    rotate_row(ring, g.row(i), e, &mut buf);
                    out.nums[i * phi..(i + 1) * phi].copy_from_slice(&buf[..phi]);
                }
            }
            step(&mut k, side);
        }
        Ok(out.finish()?.compact())
    }

    /// ρ(diag(a, 1/a)) f(v) = χ_Q(a)|a|^{d/2} f(av).
    pub fn torus(&self, a: &Rational, f: &SchwartzFn) -> Result<SchwartzFn> {
        self.check(f)?;
        if a.is_zero() {
            return Err(Error::ZeroInput);
        }
        let p = self.ctx.p;
        let alpha = val(a, p);
        let d = self.space.dim() as i64;
        let chi = chi_q(a, &self.space, p)?;
        let scalar = p_pow(p, -alpha * d / 2) * rat(chi as i64);
        let w = f.window;
        let out_w = LatticeWindow { d: w.d, m: w.m + alpha, n: w.n - alpha };
        let side = int_pow(p, w.level());
        let u = residue(&(a * p_pow(p, -alpha)), side)?;
        let sidei = side as usize;
        let g = f.gather(out_w, |k| {
            Some(k.iter().rev().fold(0usize, |acc, &x| {
                acc * sidei + ((x as u128 * u as u128) % side as u128) as usize
            }))
        });
        g.scale_rational(&scalar)
    }

    /// ρ(g) via g = n(a/c)·m(-1/c)·w·n(d/c) when c ≠ 0, g = m(a)·n(b/a) otherwise.
    pub fn apply(&self, g: &Sl2, f: &SchwartzFn) -> Result<SchwartzFn> {
        self.check(f)?;
        if &g.a * &g.d - &g.b * &g.c != Rational::one() {
            return Err(Error::NotSpecialLinear);
        }
        if g.c.is_zero() {
            let f1 = self.n(&(&g.b / &g.a), f)?;
            return Ok(self.torus(&g.a, &f1)?.compact());
        }
        let f1 = self.n(&(&g.d / &g.c), f)?;
        let f2 = self.w(&f1)?;
        let f3 = self.torus(&(-g.c.recip()), &f2)?.compact();
        self.n(&(&g.a / &g.c), &f3)
    }

    /// L(h) f(v) = f(h⁻¹ v) for a similitude h.
    pub fn translate(&self, h: &Mat, f: &SchwartzFn) -> Result<SchwartzFn> {
        self.check(f)?;
        translate(h, f, &self.space)
    }
}

/// L(h) f(v) = f(h⁻¹ v).
pub fn translate(h: &Mat, f: &SchwartzFn, space: &QuadraticSpace) -> Result<SchwartzFn> {
    if similitude_check(h, space)?.is_none() {
        return Err(Error::NotSimilitude);
    }
    let p = f.ctx.p;
    let hinv = h.inverse()?;
    let minval = |m: &Mat| min_valuation(m.entries(), p).finite().expect("invertible matrix is nonzero");
    let w = f.window;
    let out_w = LatticeWindow { d: w.d, m: w.m - minval(h), n: w.n - minval(&hinv) };
    check_budget(&f.ctx, &out_w)?;
    // p^m·h⁻¹·(p^{-m'}k') = H k' / p^e with H integral
    let hm = hinv.scale(&p_pow(p, w.m - out_w.m));
    let e = (-minval(&hm)).max(0);
    let hm = hm.scale(&p_pow(p, e));
    let modulus = int_pow(p, w.level() + e as u32);
    let pe = int_pow(p, e as u32) as u128;
    let side = int_pow(p, w.level()) as u128;
    let hres = hm.entries().iter().map(|x| residue(x, modulus)).collect::<Result<Vec<_>>>()?;
    let d = w.d;
    let sidei = side as usize;
    let out = f.gather(out_w, |k| {
        let mut idx = 0usize;
        for r in (0..d).rev() {
            let y = (0..d).fold(0u128, |acc, c| (acc + hres[r * d + c] as u128 * k[c] as u128) % modulus as u128);
            if y % pe != 0 {
                return None;
            }
            idx = idx * sidei + ((y / pe) % side) as usize;
        }
        Some(idx)
    });
    Ok(out.compact())
}

pub fn weil_w(f: &SchwartzFn, space: &QuadraticSpace) -> Result<SchwartzFn> {
    WeilRep::new(f.ctx(), space)?.w(f)
}

pub fn weil_n(t: &Rational, f: &SchwartzFn, space: &QuadraticSpace) -> Result<SchwartzFn> {
    WeilRep::new(f.ctx(), space)?.n(t, f)
}

pub fn weil_torus(a: &Rational, f: &SchwartzFn, space: &QuadraticSpace) -> Result<SchwartzFn> {
    WeilRep::new(f.ctx(), space)?.torus(a, f)
}

pub fn weil_apply(g: &Sl2, f: &SchwartzFn, space: &QuadraticSpace) -> Result<SchwartzFn> {
    WeilRep::new(f.ctx(), space)?.apply(g, f)
}

/// A finite sum of pure tensors f₁ ⊗ f₂ ⊗ f₃ on V₁ × V₂ × V₃.
#[derive(Debug, Clone)]
pub struct ProductFn {
    pub terms: Vec<[SchwartzFn; 3]>,
}

impl ProductFn {
    pub fn pure(f: [SchwartzFn; 3]) -> Self {
        ProductFn { terms: vec![f] }
    }

    pub fn indicator(ctx: &PAdicContext, triple: &QuadTriple) -> Result<Self> {
        let d = triple.dims();
        Ok(ProductFn::pure([
            indicator_lattice(ctx, LatticeWindow::new(d[0], 0, 0)?)?,
            indicator_lattice(ctx, LatticeWindow::new(d[1], 0, 0)?)?,
            indicator_lattice(ctx, LatticeWindow::new(d[2], 0, 0)?)?,
        ]))
    }

    pub fn eval(&self, v: &[Vec<Rational>; 3]) -> Result<CycValue> {
        let ring = self.terms.first().map(|t| t[0].ctx.ring());
        let mut acc: Option<CycValue> = None;
        for t in &self.terms {
            let x = t[0].eval(&v[0])?.mul(&t[1].eval(&v[1])?).mul(&t[2].eval(&v[2])?);
            acc = Some(match acc {
                None => x,
                Some(a) => a.add(&x),
            });
        }
        match (acc, ring) {
            (Some(a), _) => Ok(a),
            _ => Err(Error::InvalidInput("empty product function".into())),
        }
    }
}

/// Componentwise action of (g₁, g₂, g₃) on a product function.
pub fn rho_triple(gs: &[Sl2; 3], f: &ProductFn, triple: &QuadTriple, ctx: &PAdicContext) -> Result<ProductFn> {
    let reps = [
        WeilRep::new(ctx, &triple.spaces[0])?,
        WeilRep::new(ctx, &triple.spaces[1])?,
        WeilRep::new(ctx, &triple.spaces[2])?,
    ];
    rho_triple_with(&reps, gs, f)
}

pub fn rho_triple_with(reps: &[WeilRep; 3], gs: &[Sl2; 3], f: &ProductFn) -> Result<ProductFn> {
    let terms = f
        .terms
        .iter()
        .map(|t| {
            Ok([reps[0].apply(&gs[0], &t[0])?, reps[1].apply(&gs[1], &t[1])?, reps[2].apply(&gs[2], &t[2])?])
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ProductFn { terms })
}

#[derive(Serialize, Deserialize)]
struct WindowJson {
    p: u64,
    depth: u32,
    m: i64,
    n: i64,
    d: usize,
}

#[derive(Serialize, Deserialize)]
struct ValueJson {
    coset: Vec<String>,
    value: CycValue,
}

#[derive(Serialize, Deserialize)]
struct SchwartzJson {
    window: WindowJson,
    values: Vec<ValueJson>,
}

impl Serialize for SchwartzFn {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        SchwartzJson {
            window: WindowJson {
                p: self.ctx.p,
                depth: self.ctx.depth,
                m: self.window.m,
                n: self.window.n,
                d: self.window.d,
            },
            values: self
                .support()
                .into_iter()
                .map(|(x, v)| ValueJson { coset: x.iter().map(rational_to_string).collect(), value: v })
                .collect(),
        }
        .serialize(s)
    }
}

impl SchwartzFn {
    pub fn from_json(s: &str) -> Result<SchwartzFn> {
        let j: SchwartzJson = serde_json::from_str(s).map_err(|e| Error::InvalidInput(e.to_string()))?;
        let ctx = PAdicContext::new(j.window.p, j.window.depth)?;
        let window = LatticeWindow::new(j.window.d, j.window.m, j.window.n)?;
        check_budget(&ctx, &window)?;
        let ring = ctx.ring();
        let mut values = vec![ring.zero(); window.coset_count(ctx.p)];
        let shell = SchwartzFn { ctx, window, den: 1, nums: Vec::new() };
        for v in j.values {
            let x = v.coset.iter().map(|c| parse_rational(c)).collect::<Result<Vec<_>>>()?;
            let idx = shell
                .coset_of(&x)?
                .ok_or_else(|| Error::InvalidInput("coset outside the window".into()))?;
            if v.value.ring() != ring {
                return Err(Error::DepthMismatch { left: ring.depth, right: v.value.ring().depth });
            }
            values[idx] = v.value;
        }
        SchwartzFn::new(&ctx, window, values)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::ratio;

    fn ctx3() -> PAdicContext {
        PAdicContext::new(3, 3).unwrap()
    }

    fn v(xs: &[(i64, i64)]) -> Vec<Rational> {
        xs.iter().map(|&(a, b)| ratio(a, b)).collect()
    }

    #[test]
    fn indicator_values() {
        let c = ctx3();
        let f = indicator_lattice(&c, LatticeWindow::new(2, 1, 1).unwrap()).unwrap();
        assert!(f.eval(&v(&[(0, 1), (0, 1)])).unwrap().is_one());
        assert!(f.eval(&v(&[(1, 3), (0, 1)])).unwrap().is_zero());
        assert!(f.eval(&v(&[(5, 1), (1, 7)])).unwrap().is_one());
        assert!(f.integral().is_one());
        assert_eq!(f.compact().window(), LatticeWindow { d: 2, m: 0, n: 0 });
    }

    #[test]
    fn refine_preserves_function() {
        let c = ctx3();
        let f = coset_indicator(&c, &v(&[(1, 3), (2, 1)]), 1).unwrap();
        let g = f.refine(2, 2).unwrap();
        assert_eq!(f, g);
        for pt in [v(&[(1, 3), (2, 1)]), v(&[(1, 3), (5, 1)]), v(&[(4, 3), (2, 1)]), v(&[(1, 9), (2, 1)])] {
            assert_eq!(f.eval(&pt).unwrap(), g.eval(&pt).unwrap());
        }
    }

    #[test]
    fn fourier_of_lattice_indicator() {
        let c = ctx3();
        for space in [QuadraticSpace::hyperbolic(), QuadraticSpace::diagonal(&[1, 2]).unwrap()] {
            let f = indicator_lattice(&c, LatticeWindow::new(2, 0, 0).unwrap()).unwrap();
            assert_eq!(fourier(&f, &space).unwrap(), f);
        }
    }

    #[test]
    fn fourier_of_coset_indicator() {
        // v ↦ p^{-nd} ψ(ᵗv J v₀) on p^{-n}ℤ_p^d
        let c = ctx3();
        let space = QuadraticSpace::diagonal(&[1, 1]).unwrap();
        let v0 = v(&[(1, 3), (2, 1)]);
        let f = coset_indicator(&c, &v0, 1).unwrap();
        let g = fourier(&f, &space).unwrap();
        let ring = c.ring();
        let expected = SchwartzFn::from_fn(&c, LatticeWindow::new(2, 1, 1).unwrap(), |x| {
            ring.psi(&space.pairing(x, &v0)).unwrap().scale(&p_pow(3, -2))
        })
        .unwrap();
        assert_eq!(g, expected);
    }

    #[test]
    fn fourier_inversion() {
        let c = ctx3();
        let ring = c.ring();
        let spaces = [
            QuadraticSpace::hyperbolic(),
            QuadraticSpace::diagonal(&[1, 3]).unwrap(),
            QuadraticSpace::diagonal(&[1, 9]).unwrap(),
        ];
        for space in &spaces {
            let f = SchwartzFn::from_fn(&c, LatticeWindow::new(2, 1, 0).unwrap(), |x| {
                ring.psi(&(&x[0] * rat(2) + &x[1] * &x[1])).unwrap().add(&ring.from_rational(&x[0]))
            })
            .unwrap();
            let ff = fourier(&fourier(&f, space).unwrap(), space).unwrap();
            assert_eq!(ff, f.reflect(), "{space:?}");
        }
    }

    #[test]
    fn generator_relations() {
        let c = ctx3();
        let ring = c.ring();
        for space in [
            QuadraticSpace::hyperbolic(),
            QuadraticSpace::diagonal(&[1, 1]).unwrap(),
            QuadraticSpace::diagonal(&[1, 3]).unwrap(),
        ] {
            let r = WeilRep::new(&c, &space).unwrap();
            let f = SchwartzFn::from_fn(&c, LatticeWindow::new(2, 1, 0).unwrap(), |x| {
                ring.psi(&(&x[0] + &x[1] * rat(2))).unwrap()
            })
            .unwrap();
            // w² = m(-1)
            let ww = r.w(&r.w(&f).unwrap()).unwrap();
            assert_eq!(ww, r.torus(&rat(-1), &f).unwrap(), "{space:?}");
            // (w n(1))³ = 1
            let mut g = f.clone();
            for _ in 0..3 {
                g = r.w(&r.n(&rat(1), &g).unwrap()).unwrap();
            }
            assert_eq!(g, f, "{space:?}");
        }
    }

    #[test]
    fn trivial_actions() {
        let c = ctx3();
        let space = QuadraticSpace::hyperbolic();
        let r = WeilRep::new(&c, &space).unwrap();
        let one = indicator_lattice(&c, LatticeWindow::new(2, 0, 0).unwrap()).unwrap();
        assert_eq!(r.n(&rat(5), &one).unwrap(), one);
        assert_eq!(r.torus(&rat(1), &one).unwrap(), one);
        assert_eq!(r.apply(&Sl2::identity(), &one).unwrap(), one);
        let h = Mat::identity(2).scale(&rat(3));
        let got = r.translate(&h, &one).unwrap();
        assert!(got.eval(&v(&[(3, 1), (0, 1)])).unwrap().is_one());
        assert!(got.eval(&v(&[(1, 1), (0, 1)])).unwrap().is_zero());
        assert_eq!(got.integral(), ring_val(&c, ratio(1, 9)));
        assert!(matches!(
            r.translate(&Mat::from_i64(&[&[1, 1], &[0, 1]]), &one),
            Err(Error::NotSimilitude)
        ));
        assert!(matches!(
            r.apply(&Sl2 { a: rat(2), b: rat(0), c: rat(0), d: rat(1) }, &one),
            Err(Error::NotSpecialLinear)
        ));
    }

    fn ring_val(c: &PAdicContext, x: Rational) -> CycValue {
        c.ring().from_rational(&x)
    }

    #[test]
    fn json_roundtrip() {
        let c = ctx3();
        let f = coset_indicator(&c, &v(&[(1, 3), (2, 1)]), 1).unwrap();
        let s = serde_json::to_string(&f).unwrap();
        let g = SchwartzFn::from_json(&s).unwrap();
        assert_eq!(f, g);
    }

    #[test]
    fn precision_cap() {
        let c = PAdicContext::new(3, 1).unwrap();
        let space = QuadraticSpace::hyperbolic();
        let f = indicator_lattice(&c, LatticeWindow::new(2, 0, 0).unwrap()).unwrap();
        assert!(matches!(weil_n(&ratio(1, 9), &f, &space), Err(Error::PrecisionExceeded(_))));
        let tiny = c.with_max_cosets(10);
        assert!(matches!(
            indicator_lattice(&tiny, LatticeWindow::new(2, 1, 1).unwrap()),
            Err(Error::PrecisionExceeded(_))
        ));
    }
}
