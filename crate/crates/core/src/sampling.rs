//! Seeded samplers for group elements and test data.

use num_traits::Zero;
use rand::Rng;

use crate::arith::{p_pow, rat, val, valuation, Rational, Valuation};
use crate::linalg::{Mat, Sl2};
use crate::symplectic::{embed_sl2_triple, levi, omega, unipotent, Sp6};

/// A random nonzero rational u·p^e with u a small p-adic unit fraction and
/// lo ≤ e ≤ hi.
pub fn unit_times_power<R: Rng>(rng: &mut R, p: u64, lo: i64, hi: i64) -> Rational {
    let pi = p as i64;
    let pick = |rng: &mut R| loop {
        let x: i64 = rng.gen_range(-(4 * pi)..=(4 * pi));
        if x % pi != 0 {
            return x;
        }
    };
    let num = pick(rng);
    let den = pick(rng).abs();
    Rational::new(num.into(), den.into()) * p_pow(p, rng.gen_range(lo..=hi))
}

/// Random p-adic integer with occasional zeros.
pub fn integral<R: Rng>(rng: &mut R, p: u64, max_val: i64) -> Rational {
    if rng.gen_ratio(1, 8) {
        return Rational::zero();
    }
    unit_times_power(rng, p, 0, max_val)
}

fn is_above(g: &Sl2, p: u64, max_val: i64) -> bool {
    [&g.a, &g.b, &g.c, &g.d]
        .iter()
        .any(|x| matches!(valuation(x, p), Valuation::Finite(v) if v > max_val))
}

fn sl2_entries_ok(g: &Sl2, p: u64, min_val: i64) -> bool {
    [&g.a, &g.b, &g.c, &g.d].iter().all(|x| valuation(x, p) >= Valuation::Finite(min_val))
}

/// Random element of SL₂(ℚ) whose entries have valuation in [min_val, max_val].
pub fn sl2<R: Rng>(rng: &mut R, p: u64, min_val: i64, max_val: i64) -> Sl2 {
    loop {
        let kind = rng.gen_range(0..4);
        let g = match kind {
            0 => {
                // upper triangular
                let a = unit_times_power(rng, p, min_val.max(-1).min(0), 0.max(-min_val).min(1));
                let b = unit_times_power(rng, p, min_val, max_val);
                Sl2::m(a).unwrap().mul(&Sl2::n(b))
            }
            _ => {
                let c = unit_times_power(rng, p, min_val, max_val);
                let a = if rng.gen_ratio(1, 6) { Rational::zero() } else { unit_times_power(rng, p, min_val, max_val) };
                let d = unit_times_power(rng, p, min_val, max_val);
                let b = (&a * &d - rat(1)) / &c;
                Sl2 { a, b, c, d }
            }
        };
        if sl2_entries_ok(&g, p, min_val) && !is_above(&g, p, max_val) {
            return g;
        }
    }
}

/// Random element of SL₂(ℤ_p) with lower-left valuation at most `max_c_val`.
pub fn sl2_integral<R: Rng>(rng: &mut R, p: u64, max_c_val: i64) -> Sl2 {
    loop {
        let g = sl2(rng, p, 0, max_c_val.max(1));
        if g.c.is_zero() || val(&g.c, p) <= max_c_val {
            return g;
        }
    }
}

/// Smallest valuation among the parameters of the Bruhat factorisation used
/// by the Weil representation.
pub fn bruhat_valuation(g: &Sl2, p: u64) -> i64 {
    let params: Vec<Rational> = if g.c.is_zero() {
        vec![&g.b / &g.a, g.a.clone(), g.a.recip()]
    } else {
        vec![&g.a / &g.c, &g.d / &g.c, g.c.recip()]
    };
    params
        .iter()
        .filter_map(|x| valuation(x, p).finite())
        .min()
        .unwrap_or(0)
}

/// A pair (g₁, g₂) such that g₁, g₂ and g₁g₂ all factor with parameters of
/// valuation ≥ min_val and have lower-left entry of valuation ≥ min_c_val.
pub fn sl2_pair<R: Rng>(rng: &mut R, p: u64, min_val: i64, min_c_val: i64) -> (Sl2, Sl2) {
    loop {
        let g1 = sl2(rng, p, min_val, 1);
        let g2 = sl2(rng, p, min_val, 1);
        let g12 = g1.mul(&g2);
        let ok = |g: &Sl2| {
            bruhat_valuation(g, p) >= min_val && valuation(&g.c, p) >= Valuation::Finite(min_c_val)
        };
        if ok(&g1) && ok(&g2) && ok(&g12) {
            return (g1, g2);
        }
    }
}

/// A word of `len` random generators of Sp₆(ℤ_p): embedded SL₂(ℤ_p)³
/// elements, integral unipotents of both Siegel radicals, integral Levi
/// elements and the Weyl element Ω.
pub fn sp6_integral<R: Rng>(rng: &mut R, p: u64, len: usize) -> Sp6 {
    let mut g = Sp6::identity();
    for _ in 0..len {
        let h = match rng.gen_range(0..5) {
            0 => {
                let gs = [sl2_integral(rng, p, 2), sl2_integral(rng, p, 2), sl2_integral(rng, p, 2)];
                embed_sl2_triple(&gs).expect("determinant one")
            }
            1 | 2 => {
                let mut z = Mat::zeros(3, 3);
                for i in 0..3 {
                    for j in i..3 {
                        let x = integral(rng, p, 2);
                        z[(i, j)] = x.clone();
                        z[(j, i)] = x;
                    }
                }
                let u = unipotent(&z).expect("symmetric");
                if rng.gen_bool(0.5) {
                    u
                } else {
                    // lower unipotent Ω u Ω⁻¹
                    let om = Sp6::new(omega()).expect("Ω is symplectic");
                    om.mul(&u).mul(&om.inverse())
                }
            }
            3 => {
                let mut a = Mat::identity(3);
                for i in 0..3 {
                    a[(i, i)] = unit_times_power(rng, p, 0, 0);
                }
                let (i, j) = (rng.gen_range(0..3), rng.gen_range(0..3));
                if i != j {
                    a[(i, j)] = integral(rng, p, 1);
                }
                levi(&a).expect("integral Levi element with unit determinant")
            }
            _ => Sp6::new(omega()).expect("Ω is symplectic"),
        };
        g = g.mul(&h);
    }
    g
}

/// A rational symplectic matrix spread over several Iwasawa cells: a Siegel
/// unipotent, a Levi element and a cocharacter, times an integral word.
pub fn sp6_spread<R: Rng>(rng: &mut R, p: u64) -> Sp6 {
    let mut z = Mat::zeros(3, 3);
    for i in 0..3 {
        for j in i..3 {
            let x = unit_times_power(rng, p, -2, 2);
            z[(i, j)] = x.clone();
            z[(j, i)] = x;
        }
    }
    let mut a = Mat::identity(3);
    for i in 0..3 {
        a[(i, i)] = unit_times_power(rng, p, -2, 2);
    }
    a[(0, 2)] = unit_times_power(rng, p, -1, 1);
    let c = rng.gen_range(-3..6);
    let g = unipotent(&z)
        .expect("symmetric")
        .mul(&levi(&a).expect("invertible"))
        .mul(&crate::symplectic::cocharacter(&rat(p as i64), c).expect("nonzero"));
    g.mul(&sp6_integral(rng, p, 6))
}
