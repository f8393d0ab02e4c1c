//! The unramified local integral of the basic function against 𝟙_{V(ℤ_p)}:
//! a closed-form evaluator, a brute-force evaluator over Iwasawa coordinates,
//! and the absolute-value bound.
//!
//! Coordinates for the brute force: N₀\G is parametrised by
//! (n(σ)·m(a₁⁻¹), m(a₂⁻¹), m(a₃⁻¹)) with m(x) = diag(x, x⁻¹), measure
//! dσ·∏|a_i|² d^×a_i.  The unit parts of a_i are dropped: every factor
//! depends on them only through an unramified character.

use std::collections::{BTreeMap, HashMap};

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::arith::{
    is_p_integral, p_pow, parse_rational, rat, rational_to_string, val, valuation, Rational, Valuation,
};
use crate::cyclotomic::{CycRing, CycValue};
use crate::error::{Error, Result};
use crate::linalg::{Mat, Sl2};
use crate::padic::{chi_q, ord, similitude_check, zero_components, PAdicContext, QuadTriple, QuadraticSpace};
use crate::schwartz::{indicator_lattice, LatticeWindow, WeilRep};
use crate::symplectic::{basic_b_cell, embed_sl2_triple, gamma_rep, iwasawa_cell, plucker, OrbitLabel, Sp6};

/// Largest exponent box the brute force will walk.
const MAX_BOX: usize = 1 << 16;

/// A point (v₁, v₂, v₃) of V₁ × V₂ × V₃.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PointV {
    pub v: [Vec<Rational>; 3],
}

impl PointV {
    pub fn new(v: [Vec<Rational>; 3]) -> Self {
        PointV { v }
    }

    pub fn from_ints(v: [&[i64]; 3]) -> Self {
        PointV { v: v.map(|x| x.iter().map(|&a| rat(a)).collect()) }
    }

    pub fn ords(&self, p: u64) -> [Valuation; 3] {
        [ord(&self.v[0], p), ord(&self.v[1], p), ord(&self.v[2], p)]
    }

    pub fn is_integral(&self, p: u64) -> bool {
        self.v.iter().flatten().all(|x| is_p_integral(x, p))
    }

    pub fn zero_count(&self) -> usize {
        zero_components(&self.v)
    }

    pub fn in_v_prime(&self) -> bool {
        self.zero_count() <= 1
    }

    pub fn in_y(&self, t: &QuadTriple) -> bool {
        t.check_shape(&self.v).is_ok() && t.in_y(&self.v)
    }

    pub fn in_y_smooth(&self, t: &QuadTriple) -> bool {
        t.check_shape(&self.v).is_ok() && t.in_y_smooth(&self.v)
    }

    /// Componentwise h_i⁻¹ v_i.
    pub fn act_inverse(&self, h: &[Mat; 3]) -> Result<PointV> {
        let mut out = self.v.clone();
        for i in 0..3 {
            out[i] = h[i].inverse()?.mul_vec(&self.v[i]);
        }
        Ok(PointV { v: out })
    }

    pub fn scaled(&self, c: &Rational) -> PointV {
        PointV { v: self.v.clone().map(|x| x.iter().map(|a| a * c).collect()) }
    }
}

impl Serialize for PointV {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let v: Vec<Vec<String>> = self.v.iter().map(|x| x.iter().map(rational_to_string).collect()).collect();
        v.serialize(s)
    }
}

impl<'de> Deserialize<'de> for PointV {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw: Vec<Vec<String>> = Vec::deserialize(d)?;
        if raw.len() != 3 {
            return Err(serde::de::Error::custom("a point has three components"));
        }
        let mut parts = raw
            .into_iter()
            .map(|x| x.iter().map(|s| parse_rational(s)).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()
            .map_err(serde::de::Error::custom)?;
        let c = parts.pop().unwrap_or_default();
        let b = parts.pop().unwrap_or_default();
        let a = parts.pop().unwrap_or_default();
        Ok(PointV { v: [a, b, c] })
    }
}

/// Σ coeff_c · 𝟙_c over finitely many Iwasawa cells c.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct CellFunction {
    coeffs: BTreeMap<i64, Rational>,
}

impl CellFunction {
    pub fn new(coeffs: impl IntoIterator<Item = (i64, Rational)>) -> Self {
        let mut map = BTreeMap::new();
        for (c, x) in coeffs {
            *map.entry(c).or_insert_with(Rational::zero) += x;
        }
        map.retain(|_, x| !x.is_zero());
        CellFunction { coeffs: map }
    }

    pub fn single(c: i64) -> Self {
        CellFunction::new([(c, Rational::one())])
    }

    /// The basic function on cells 0..=cutoff.
    pub fn basic(p: u64, cutoff: i64) -> Self {
        CellFunction::new((0..=cutoff).map(|c| (c, basic_b_cell(c, p))))
    }

    pub fn eval(&self, c: i64) -> Rational {
        self.coeffs.get(&c).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn min_cell(&self) -> Option<i64> {
        self.coeffs.keys().next().copied()
    }

    pub fn max_cell(&self) -> Option<i64> {
        self.coeffs.keys().next_back().copied()
    }

    pub fn support(&self) -> impl Iterator<Item = (i64, &Rational)> {
        self.coeffs.iter().map(|(c, x)| (*c, x))
    }

    pub fn abs(&self) -> CellFunction {
        CellFunction { coeffs: self.coeffs.iter().map(|(c, x)| (*c, x.abs())).collect() }
    }
}

impl Serialize for CellFunction {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let m: BTreeMap<String, String> =
            self.coeffs.iter().map(|(c, x)| (c.to_string(), rational_to_string(x))).collect();
        m.serialize(s)
    }
}

impl<'de> Deserialize<'de> for CellFunction {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw: BTreeMap<String, String> = BTreeMap::deserialize(d)?;
        let mut out = Vec::with_capacity(raw.len());
        for (c, x) in raw {
            let c: i64 = c.parse().map_err(serde::de::Error::custom)?;
            out.push((c, parse_rational(&x).map_err(serde::de::Error::custom)?));
        }
        Ok(CellFunction::new(out))
    }
}

/// ∏ |a_i|².
pub fn modulus_weight(a: &[Rational; 3], p: u64) -> Result<Rational> {
    let mut e = 0;
    for x in a {
        if x.is_zero() {
            return Err(Error::ZeroInput);
        }
        e += val(x, p);
    }
    Ok(p_pow(p, -2 * e))
}

fn check_forms(t: &QuadTriple, p: u64) -> Result<()> {
    for (i, s) in t.spaces.iter().enumerate() {
        if !s.is_unimodular(p) {
            return Err(Error::UnsupportedForm(format!("form {} is not unimodular at {p}", i + 1)));
        }
    }
    Ok(())
}

fn check_y_smooth(v: &PointV, t: &QuadTriple) -> Result<()> {
    t.check_shape(&v.v)?;
    if !t.in_y(&v.v) {
        return Err(Error::NotInDomain("the three quadratic values differ".into()));
    }
    if v.zero_count() > 1 {
        return Err(Error::NotInDomain("more than one component is zero".into()));
    }
    Ok(())
}

/// The common value Q₁(v₁) = Q₂(v₂) = Q₃(v₃) of a point of Y.
pub fn common_value(v: &PointV, t: &QuadTriple) -> Rational {
    t.spaces[0].eval(&v.v[0])
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ClosedTerm {
    pub j: i64,
    pub e: [i64; 3],
    #[serde(with = "crate::arith::serde_rational")]
    pub value: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ClosedEvaluation {
    #[serde(with = "crate::arith::serde_rational")]
    pub value: Rational,
    pub terms: Vec<ClosedTerm>,
}

/// Closed form with its individual terms.
pub fn i_closed_terms(v: &PointV, t: &QuadTriple, ctx: &PAdicContext) -> Result<ClosedEvaluation> {
    let p = ctx.p;
    t.check_shape(&v.v)?;
    check_forms(t, p)?;
    check_y_smooth(v, t)?;
    let empty = ClosedEvaluation { value: Rational::zero(), terms: vec![] };
    if !v.is_integral(p) {
        return Ok(empty);
    }
    let ords = v.ords(p);
    let q_val = valuation(&common_value(v, t), p);
    let chis = [
        chi_q(&rat(p as i64), &t.spaces[0], p)?,
        chi_q(&rat(p as i64), &t.spaces[1], p)?,
        chi_q(&rat(p as i64), &t.spaces[2], p)?,
    ];
    let dims = t.dims().map(|d| d as i64);
    let finite: Vec<i64> = ords.iter().filter_map(|o| o.finite()).collect();
    let min_ord = *finite.iter().min().expect("at most one component is zero");
    let max_ord = *finite.iter().max().expect("at most one component is zero");
    let mut terms = Vec::new();
    let mut value = Rational::zero();
    for j in 0..=min_ord / 2 {
        // e_i ≤ ord_i − 2j, and a zero component is bounded through the triangle inequality
        let cap: [i64; 3] = ords.map(|o| o.finite().map_or(2 * (max_ord - 2 * j), |x| x - 2 * j));
        for e0 in 0..=cap[0] {
            for e1 in 0..=cap[1] {
                for e2 in 0..=cap[2] {
                    let e = [e0, e1, e2];
                    if e0 > e1 + e2 || e1 > e0 + e2 || e2 > e0 + e1 {
                        continue;
                    }
                    let total = e0 + e1 + e2 + 4 * j;
                    if let Valuation::Finite(q) = q_val {
                        if total > q {
                            continue;
                        }
                    }
                    let mut sign = 1;
                    let mut exp = 0;
                    for i in 0..3 {
                        let k = e[i] + 2 * j;
                        if k % 2 == 1 {
                            sign *= chis[i];
                        }
                        exp += k * (dims[i] / 2 - 1);
                    }
                    let x = p_pow(p, exp) * rat(sign as i64);
                    value += &x;
                    terms.push(ClosedTerm { j, e, value: x });
                }
            }
        }
    }
    Ok(ClosedEvaluation { value, terms })
}

pub fn i_closed(v: &PointV, t: &QuadTriple, ctx: &PAdicContext) -> Result<Rational> {
    Ok(i_closed_terms(v, t, ctx)?.value)
}

/// The largest cell reached by γ₀·g on the support of ρ(g)𝟙(v).
pub fn basic_cutoff(v: &PointV, p: u64) -> i64 {
    v.ords(p).iter().filter_map(|o| o.finite()).min().unwrap_or(0).max(0)
}

/// γ₀ · (n(σ)m(p^{−e₁}), m(p^{−e₂}), m(p^{−e₃})).
pub fn iwasawa_point(sigma: &Rational, e: [i64; 3], p: u64) -> Result<Sp6> {
    let sl = |k: usize, s: &Rational| {
        let a = p_pow(p, e[k]);
        Sl2::new(a.recip(), s * &a, Rational::zero(), a)
    };
    let gs = [sl(0, sigma)?, sl(1, &Rational::zero())?, sl(2, &Rational::zero())?];
    Ok(gamma_rep(OrbitLabel::L000).mul(&embed_sl2_triple(&gs)?))
}

/// Plücker coordinates are affine in σ; returns (min val of the constant parts,
/// min val of the σ-coefficients), after checking no coordinate mixes both.
fn sigma_profile(e: [i64; 3], p: u64) -> Result<(i64, i64)> {
    let c0 = plucker(&iwasawa_point(&Rational::zero(), e, p)?);
    let c1 = plucker(&iwasawa_point(&Rational::one(), e, p)?);
    let mut a = Valuation::Infinite;
    let mut b = Valuation::Infinite;
    for (x0, x1) in c0.coords().iter().zip(c1.coords()) {
        let beta = x1 - x0;
        if !x0.is_zero() && !beta.is_zero() {
            return Err(Error::PrecisionExceeded("Plücker coordinate depends on the unit part of σ".into()));
        }
        a = a.min(valuation(x0, p));
        b = b.min(valuation(&beta, p));
    }
    match (a, b) {
        (Valuation::Finite(a), Valuation::Finite(b)) => Ok((a, b)),
        _ => Err(Error::InvalidInput("degenerate Plücker profile".into())),
    }
}

/// ∫_{p^s ℤ_p} ψ(σx) dσ, as a character sum over σ mod p^{s+L}.
pub fn ball_character_integral(x: &Rational, s: i64, p: u64) -> Result<Rational> {
    let vol = p_pow(p, -s);
    let vx = match valuation(x, p) {
        Valuation::Infinite => return Ok(vol),
        Valuation::Finite(v) => v,
    };
    let level = (-(s + vx)).max(0);
    // Σ_{u mod p^L} ψ(p^s u x) = ∏_{i<L} Σ_{u_i mod p} ψ(p^{s+i} u_i x)
    let mut prod = Rational::one();
    for i in (0..level).rev() {
        let y = x * p_pow(p, s + i);
        let depth = (-val(&y, p)).max(1) as u32;
        let ring = CycRing::new(p, depth)?;
        let mut acc = ring.zero();
        for u in 0..p {
            acc = acc.add(&ring.psi(&(&y * rat(u as i64)))?);
        }
        let sum = acc
            .to_rational()
            .ok_or_else(|| Error::PrecisionExceeded("character sum is not rational".into()))?;
        prod *= sum;
        if prod.is_zero() {
            break;
        }
    }
    Ok(vol * prod * p_pow(p, -level))
}

#[derive(Debug, Clone, Serialize)]
pub struct OracleTerm {
    pub e: [i64; 3],
    #[serde(with = "crate::arith::serde_rational")]
    pub weight: Rational,
    #[serde(with = "crate::arith::serde_rational")]
    pub torus_factor: Rational,
    #[serde(with = "crate::arith::serde_rational")]
    pub sigma_integral: Rational,
    pub sigma_shells: (i64, i64),
}

#[derive(Debug, Clone, Serialize)]
pub struct OracleReport {
    #[serde(with = "crate::arith::serde_rational")]
    pub value: Rational,
    /// Inclusive exponent ranges walked for e₁, e₂, e₃.
    pub e_box: [(i64, i64); 3],
    pub terms: Vec<OracleTerm>,
}

struct OracleSetup {
    reps: [WeilRep; 3],
    one: [crate::schwartz::SchwartzFn; 3],
}

fn oracle_setup(t: &QuadTriple, p: u64) -> Result<OracleSetup> {
    let ctx = PAdicContext::new(p, 1)?;
    let d = t.dims();
    Ok(OracleSetup {
        reps: [
            WeilRep::new(&ctx, &t.spaces[0])?,
            WeilRep::new(&ctx, &t.spaces[1])?,
            WeilRep::new(&ctx, &t.spaces[2])?,
        ],
        one: [
            indicator_lattice(&ctx, LatticeWindow::new(d[0], 0, 0)?)?,
            indicator_lattice(&ctx, LatticeWindow::new(d[1], 0, 0)?)?,
            indicator_lattice(&ctx, LatticeWindow::new(d[2], 0, 0)?)?,
        ],
    })
}

/// ∏ [ρ(m(p^{−e_i}))𝟙](v_i).
fn torus_factor(setup: &OracleSetup, v: &PointV, e: [i64; 3], p: u64) -> Result<Rational> {
    let mut out = Rational::one();
    for i in 0..3 {
        let f = setup.reps[i].torus(&p_pow(p, -e[i]), &setup.one[i])?;
        let x = f.eval(&v.v[i])?;
        let x = x.to_rational().ok_or_else(|| Error::PrecisionExceeded("torus value is not rational".into()))?;
        if x.is_zero() {
            return Ok(x);
        }
        out *= x;
    }
    Ok(out)
}

fn exponent_box(v: &PointV, c_min: i64, p: u64) -> Result<[(i64, i64); 3]> {
    let ords = v.ords(p);
    let mut hi = [0i64; 3];
    for i in 0..3 {
        if let Valuation::Finite(o) = ords[i] {
            hi[i] = o;
        }
    }
    for i in 0..3 {
        if ords[i].is_infinite() {
            let (j, k) = ((i + 1) % 3, (i + 2) % 3);
            hi[i] = hi[j] + hi[k] - c_min;
        }
    }
    let size: usize = hi.iter().map(|h| (h - c_min + 1).max(0) as usize).product();
    if size > MAX_BOX {
        return Err(Error::PrecisionExceeded(format!("exponent box of {size} triples")));
    }
    Ok(hi.map(|h| (c_min, h)))
}

fn walk<F>(v: &PointV, t: &QuadTriple, f1: &CellFunction, p: u64, mut sigma_part: F) -> Result<OracleReport>
where
    F: FnMut(&dyn Fn(i64) -> Result<Rational>, i64, i64) -> Result<Rational>,
{
    t.check_shape(&v.v)?;
    if v.zero_count() > 1 {
        return Err(Error::NotInDomain("more than one component is zero".into()));
    }
    let c_min = match f1.min_cell() {
        None => return Ok(OracleReport { value: Rational::zero(), e_box: [(0, -1); 3], terms: vec![] }),
        Some(c) => c,
    };
    let setup = oracle_setup(t, p)?;
    let e_box = exponent_box(v, c_min, p)?;
    let mut value = Rational::zero();
    let mut terms = Vec::new();
    let mut cells: HashMap<([i64; 3], i64), i64> = HashMap::new();
    for e0 in e_box[0].0..=e_box[0].1 {
        for e1 in e_box[1].0..=e_box[1].1 {
            for e2 in e_box[2].0..=e_box[2].1 {
                let e = [e0, e1, e2];
                let tf = torus_factor(&setup, v, e, p)?;
                if tf.is_zero() {
                    continue;
                }
                let (a, b) = sigma_profile(e, p)?;
                if a < c_min {
                    continue;
                }
                // cell(σ) = min(a, b + val σ): below s_lo it leaves the support, from s_hi on it is a
                let s_lo = c_min - b;
                let s_hi = (a - b).max(s_lo);
                let mut cell_at = |s: i64| -> Result<i64> {
                    if let Some(c) = cells.get(&(e, s)) {
                        return Ok(*c);
                    }
                    let c = iwasawa_cell(&iwasawa_point(&p_pow(p, s), e, p)?, p);
                    cells.insert((e, s), c);
                    Ok(c)
                };
                let mut shell_cells = Vec::new();
                for s in s_lo..=s_hi {
                    shell_cells.push(cell_at(s)?);
                }
                let lookup = move |s: i64| -> Result<Rational> {
                    let c = shell_cells[(s.min(s_hi) - s_lo) as usize];
                    Ok(f1.eval(c))
                };
                let si = sigma_part(&lookup, s_lo, s_hi)?;
                let weight = modulus_weight(&e.map(|x| p_pow(p, x)), p)?;
                value += &weight * &tf * &si;
                terms.push(OracleTerm { e, weight, torus_factor: tf, sigma_integral: si, sigma_shells: (s_lo, s_hi) });
            }
        }
    }
    Ok(OracleReport { value, e_box, terms })
}

/// Brute-force evaluation of ∫ f₁(γ₀g) ρ(g)𝟙(v) dg over N₀\G.
pub fn i_oracle_report(v: &PointV, t: &QuadTriple, f1: &CellFunction, ctx: &PAdicContext) -> Result<OracleReport> {
    let p = ctx.p;
    t.check_shape(&v.v)?;
    check_forms(t, p)?;
    check_y_smooth(v, t)?;
    let q = common_value(v, t);
    walk(v, t, f1, p, |f, s_lo, s_hi| {
        let mut acc = Rational::zero();
        let mut upper = ball_character_integral(&q, s_lo, p)?;
        for s in s_lo..s_hi {
            let lower = ball_character_integral(&q, s + 1, p)?;
            let c = f(s)?;
            if !c.is_zero() {
                acc += c * (&upper - &lower);
            }
            upper = lower;
        }
        Ok(acc + f(s_hi)? * upper)
    })
}

pub fn i_oracle(v: &PointV, t: &QuadTriple, f1: &CellFunction, ctx: &PAdicContext) -> Result<CycValue> {
    let r = i_oracle_report(v, t, f1, ctx)?;
    Ok(ctx.ring().from_rational(&r.value))
}

/// ∫ |b(γ₀g) ρ(g)𝟙(v)| dg for v ∈ V′.
pub fn abs_integral(v: &PointV, t: &QuadTriple, p: u64) -> Result<OracleReport> {
    let f1 = CellFunction::basic(p, basic_cutoff(v, p)).abs();
    let mut r = walk(v, t, &f1, p, |f, s_lo, s_hi| {
        let mut acc = Rational::zero();
        let shell = Rational::one() - p_pow(p, -1);
        for s in s_lo..s_hi {
            acc += f(s)? * p_pow(p, -s) * &shell;
        }
        Ok(acc + f(s_hi)? * p_pow(p, -s_hi))
    })?;
    r.value = Rational::zero();
    for term in &mut r.terms {
        term.torus_factor = term.torus_factor.abs();
        r.value += &term.weight * &term.torus_factor * &term.sigma_integral;
    }
    Ok(r)
}

/// The bound on the absolute integral: ∏(ord_i+1)³|v_i|^{1−d_i/2} off the zero
/// locus, ∏_{i≠z}(ord_i+1)⁴|v_i|^{2−d_i/2−d_z/2} when v_z = 0.
pub fn abs_integral_bound(v: &PointV, t: &QuadTriple, p: u64) -> Result<Rational> {
    t.check_shape(&v.v)?;
    if v.zero_count() > 1 {
        return Err(Error::NotInDomain("more than one component is zero".into()));
    }
    if !v.is_integral(p) {
        return Ok(Rational::zero());
    }
    let ords = v.ords(p);
    let dims = t.dims().map(|d| d as i64);
    let zero = ords.iter().position(|o| o.is_infinite());
    let mut out = Rational::one();
    for i in 0..3 {
        let o = match ords[i] {
            Valuation::Finite(o) => o,
            Valuation::Infinite => continue,
        };
        let base = rat(o + 1);
        out *= match zero {
            None => num_traits::pow(base, 3) * p_pow(p, o * (dims[i] / 2 - 1)),
            // |v_i|^{2−d_i/2−d_z/2} with |v_i| = p^{−o}; the exponent is kept doubled to stay integral
            Some(z) => {
                let twice = 4 - dims[i] - dims[z];
                debug_assert!(twice % 2 == 0);
                num_traits::pow(base, 4) * p_pow(p, -o * twice / 2)
            }
        };
    }
    Ok(out)
}

#[derive(Debug, Clone, Serialize)]
pub struct BoundReport {
    #[serde(with = "crate::arith::serde_rational")]
    pub integral: Rational,
    #[serde(with = "crate::arith::serde_rational")]
    pub bound: Rational,
    pub holds: bool,
}

pub fn abs_integral_bound_check(v: &PointV, t: &QuadTriple, ctx: &PAdicContext) -> Result<BoundReport> {
    let p = ctx.p;
    check_forms(t, p)?;
    let bound = abs_integral_bound(v, t, p)?;
    let integral = abs_integral(v, t, p)?.value;
    Ok(BoundReport { holds: integral <= bound, integral, bound })
}

/// Integral similitudes of the form with entries in [−bound, bound] and unit
/// determinant at p, keyed by their multiplier.  Forms of dimension four that
/// split as two planes are handled blockwise.
pub fn similitude_search(space: &QuadraticSpace, p: u64, bound: i64) -> Vec<(Mat, Rational)> {
    match space.dim() {
        2 => plane_similitudes(space, p, bound),
        4 => {
            let j = space.gram_i64();
            let split = (0..2).all(|a| (2..4).all(|b| j[a][b] == 0));
            if !split {
                return vec![];
            }
            let top = QuadraticSpace::new(vec![j[0][..2].to_vec(), j[1][..2].to_vec()]);
            let bot = QuadraticSpace::new(vec![j[2][2..].to_vec(), j[3][2..].to_vec()]);
            let (Ok(top), Ok(bot)) = (top, bot) else { return vec![] };
            let a = plane_similitudes(&top, p, bound);
            let b = plane_similitudes(&bot, p, bound);
            let mut out = Vec::new();
            for (ga, la) in &a {
                for (gb, lb) in &b {
                    if la == lb {
                        out.push((Mat::block_diag(&[ga, gb]), la.clone()));
                    }
                }
            }
            out
        }
        _ => vec![],
    }
}

fn plane_similitudes(space: &QuadraticSpace, p: u64, bound: i64) -> Vec<(Mat, Rational)> {
    let mut out = Vec::new();
    let r = -bound..=bound;
    for a in r.clone() {
        for b in r.clone() {
            for c in r.clone() {
                for d in r.clone() {
                    let det = a * d - b * c;
                    if det == 0 || det.rem_euclid(p as i64) == 0 {
                        continue;
                    }
                    let g = Mat::from_i64(&[&[a, b], &[c, d]]);
                    if let Ok(Some(l)) = similitude_check(&g, space) {
                        if is_p_integral(&l, p) && val(&l, p) == 0 {
                            out.push((g, l));
                        }
                    }
                }
            }
        }
    }
    out
}

/// Small integral points of Y^sm with prescribed component orders.
///
/// Vectors p^o·w with w primitive and |w_k| ≤ `radius` are bucketed by their
/// quadratic value; a pattern is matched by values common to all three
/// buckets.  At most `per_pattern` points are returned per pattern, spread
/// over distinct valuations of the common value.  Components of dimension
/// above two search with radius at most 4.
pub fn battery(
    t: &QuadTriple,
    p: u64,
    patterns: &[[i64; 3]],
    radius: i64,
    per_pattern: usize,
) -> Vec<PointV> {
    let mut buckets: HashMap<(usize, i64), BTreeMap<Rational, Vec<Rational>>> = HashMap::new();
    let mut out = Vec::new();
    for pat in patterns {
        for i in 0..3 {
            buckets.entry((i, pat[i])).or_insert_with(|| bucket(&t.spaces[i], p, pat[i], radius));
        }
        let b = [&buckets[&(0, pat[0])], &buckets[&(1, pat[1])], &buckets[&(2, pat[2])]];
        let mut by_val: BTreeMap<Valuation, Vec<&Rational>> = BTreeMap::new();
        for q in b[0].keys() {
            if b[1].contains_key(q) && b[2].contains_key(q) {
                by_val.entry(valuation(q, p)).or_default().push(q);
            }
        }
        let mut chosen = Vec::new();
        // one value per valuation first, then fill
        let mut round = 0;
        while chosen.len() < per_pattern {
            let mut added = false;
            for qs in by_val.values() {
                if let Some(q) = qs.get(round) {
                    if chosen.len() < per_pattern {
                        chosen.push((*q).clone());
                        added = true;
                    }
                }
            }
            if !added {
                break;
            }
            round += 1;
        }
        for q in chosen {
            out.push(PointV { v: [b[0][&q].clone(), b[1][&q].clone(), b[2][&q].clone()] });
        }
    }
    out
}

/// Component orders used by the standard battery.
pub const ORD_PATTERNS: [[i64; 3]; 6] = [[0, 0, 0], [1, 0, 0], [1, 1, 0], [1, 1, 1], [2, 1, 1], [2, 2, 2]];

/// Three triples unimodular at every odd prime: hyperbolic planes, unit
/// diagonal planes, and a mixed triple with a four-dimensional component.
pub fn standard_triples() -> Vec<(&'static str, QuadTriple)> {
    let h = QuadraticSpace::hyperbolic;
    let dg = |e: &[i64]| QuadraticSpace::diagonal(e).expect("nondegenerate");
    vec![
        ("hyperbolic", QuadTriple::new(h(), h(), h())),
        ("diagonal", QuadTriple::new(dg(&[1, 1]), dg(&[1, 2]), dg(&[1, 1]))),
        ("mixed", QuadTriple::new(h(), dg(&[1, 2]), dg(&[1, 1, 1, 1]))),
    ]
}

/// The standard battery at p: every standard triple against every pattern.
pub fn standard_battery(p: u64) -> Vec<(&'static str, QuadTriple, PointV)> {
    let mut out = Vec::new();
    for (name, t) in standard_triples() {
        for v in battery(&t, p, &ORD_PATTERNS, 30, 3) {
            out.push((name, t.clone(), v));
        }
    }
    out
}

/// Points with v₁ = 0 and the other two components of small order, five per
/// standard triple.
pub fn zero_first_points(p: u64) -> Vec<(&'static str, QuadTriple, PointV)> {
    let x = p as i64;
    let mut out = Vec::new();
    for (name, t) in standard_triples() {
        let d = t.dims();
        let mk = |o: i64, k: usize, s: i64| {
            let mut w = vec![0i64; d[k]];
            w[0] = x.pow(o as u32);
            w[d[k] - 1] = s * x.pow(o as u32);
            w
        };
        for (o2, o3) in [(0, 0), (1, 0), (1, 1), (2, 1), (0, 2)] {
            let zero = vec![0i64; d[0]];
            let (a, b) = (mk(o2, 1, 1), mk(o3, 2, 2));
            out.push((name, t.clone(), PointV::from_ints([&zero, &a, &b])));
        }
    }
    out
}

fn bucket(space: &QuadraticSpace, p: u64, o: i64, radius: i64) -> BTreeMap<Rational, Vec<Rational>> {
    let d = space.dim();
    let radius = if d > 2 { radius.min(4) } else { radius };
    let scale = p_pow(p, o);
    let mut out: BTreeMap<Rational, Vec<Rational>> = BTreeMap::new();
    let side = (2 * radius + 1) as usize;
    let total = side.pow(d as u32);
    for idx in 0..total {
        let mut k = idx;
        let mut w = Vec::with_capacity(d);
        for _ in 0..d {
            w.push((k % side) as i64 - radius);
            k /= side;
        }
        if w.iter().all(|x| x.rem_euclid(p as i64) == 0) {
            continue;
        }
        let v: Vec<Rational> = w.iter().map(|&x| rat(x) * &scale).collect();
        let q = space.eval(&v);
        out.entry(q).or_insert(v);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hhh() -> QuadTriple {
        QuadTriple::new(QuadraticSpace::hyperbolic(), QuadraticSpace::hyperbolic(), QuadraticSpace::hyperbolic())
    }

    #[test]
    fn modulus_weight_examples() {
        let p = 3;
        assert_eq!(modulus_weight(&[rat(1), rat(1), rat(1)], p).unwrap(), rat(1));
        assert_eq!(modulus_weight(&[rat(3), rat(1), rat(1)], p).unwrap(), p_pow(3, -2));
        assert_eq!(modulus_weight(&[rat(3), rat(3), rat(3)], p).unwrap(), p_pow(3, -6));
        assert_eq!(modulus_weight(&[rat(0), rat(3), rat(3)], p), Err(Error::ZeroInput));
    }

    #[test]
    fn ball_integral_matches_orthogonality() {
        let p = 5;
        for s in -3..3 {
            for (x, vx) in [(rat(7), 0), (rat(25), 2), (crate::arith::ratio(2, 5), -1)] {
                let got = ball_character_integral(&x, s, p).unwrap();
                let want = if s + vx >= 0 { p_pow(p, -s) } else { Rational::zero() };
                assert_eq!(got, want, "x={x} s={s}");
            }
        }
    }

    #[test]
    fn unit_point_is_one() {
        let ctx = PAdicContext::new(3, 1).unwrap();
        let v = PointV::from_ints([&[1, 1], &[1, 1], &[1, 1]]);
        assert_eq!(i_closed(&v, &hhh(), &ctx).unwrap(), rat(1));
        let b = CellFunction::basic(3, basic_cutoff(&v, 3));
        assert_eq!(i_oracle_report(&v, &hhh(), &b, &ctx).unwrap().value, rat(1));
    }

    #[test]
    fn domain_errors() {
        let ctx = PAdicContext::new(3, 1).unwrap();
        let v = PointV::from_ints([&[1, 1], &[1, 2], &[1, 1]]);
        assert!(matches!(i_closed(&v, &hhh(), &ctx), Err(Error::NotInDomain(_))));
        let t = QuadTriple::new(
            QuadraticSpace::diagonal(&[1, 3]).unwrap(),
            QuadraticSpace::hyperbolic(),
            QuadraticSpace::hyperbolic(),
        );
        let v = PointV::from_ints([&[1, 0], &[1, 1], &[1, 1]]);
        assert!(matches!(i_closed(&v, &t, &ctx), Err(Error::UnsupportedForm(_))));
    }
}
