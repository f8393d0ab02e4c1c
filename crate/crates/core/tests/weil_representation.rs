use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use weiltriple::arith::{rat, Rational};
use weiltriple::padic::{chi_q, hilbert_symbol, similitude_check, QuadTriple};
use weiltriple::sampling;
use weiltriple::schwartz::{fourier, indicator_lattice, rho_triple, LatticeWindow, ProductFn, SchwartzFn, WeilRep};
use weiltriple::{Mat, PAdicContext, QuadraticSpace};

fn random_fn(ctx: &PAdicContext, d: usize, m: i64, n: i64, rng: &mut ChaCha8Rng) -> SchwartzFn {
    let w = LatticeWindow::new(d, m, n).unwrap();
    let ring = ctx.ring();
    let vals = (0..w.coset_count(ctx.p)).map(|_| ring.from_int(rng.gen_range(-2..3))).collect();
    SchwartzFn::new(ctx, w, vals).unwrap()
}

fn hh() -> QuadraticSpace {
    QuadraticSpace::hyperbolic().direct_sum(&QuadraticSpace::hyperbolic())
}

fn dg(e: &[i64]) -> QuadraticSpace {
    QuadraticSpace::diagonal(e).unwrap()
}

#[test]
fn representation_property() {
    // (p, depth, form, lowest Bruhat valuation of the sampled pairs)
    let cases = [
        (3u64, 3u32, dg(&[1, 3]), 0),
        (3, 3, dg(&[1, 1]), -1),
        (3, 3, QuadraticSpace::hyperbolic(), -1),
        (5, 3, dg(&[1, 2]), -1),
        (3, 3, dg(&[1, 1, 1, 1]), 0),
        (3, 3, hh(), 0),
    ];
    for (p, depth, space, lo) in cases {
        let ctx = PAdicContext::new(p, depth).unwrap();
        let r = WeilRep::new(&ctx, &space).unwrap();
        let results: Vec<bool> = (0..100u64)
            .into_par_iter()
            .map(|i| {
                let mut rng = ChaCha8Rng::seed_from_u64(1000 * p + i);
                let f = random_fn(&ctx, space.dim(), 0, rng.gen_range(0..2), &mut rng);
                let (g1, g2) = sampling::sl2_pair(&mut rng, p, lo, 0);
                let lhs = r.apply(&g1, &r.apply(&g2, &f).unwrap()).unwrap();
                let rhs = r.apply(&g1.mul(&g2), &f).unwrap();
                lhs == rhs
            })
            .collect();
        assert!(results.iter().all(|&x| x), "{space:?} at {p}");
    }
}

#[test]
fn generator_relations() {
    for (p, space) in [(3u64, dg(&[1, 1])), (5, QuadraticSpace::hyperbolic()), (3, dg(&[1, 3]))] {
        let ctx = PAdicContext::new(p, 3).unwrap();
        let r = WeilRep::new(&ctx, &space).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(p);
        for _ in 0..5 {
            let f = random_fn(&ctx, 2, 0, 0, &mut rng);
            // w² = m(−1)
            let ww = r.w(&r.w(&f).unwrap()).unwrap();
            assert_eq!(ww, r.torus(&rat(-1), &f).unwrap());
            // (w n(1))³ = 1
            let mut g = f.clone();
            for _ in 0..3 {
                g = r.w(&r.n(&rat(1), &g).unwrap()).unwrap();
            }
            assert_eq!(g, f);
        }
    }
}

#[test]
fn integral_elements_fix_the_lattice_indicator() {
    let forms = [
        QuadTriple::new(QuadraticSpace::hyperbolic(), QuadraticSpace::hyperbolic(), QuadraticSpace::hyperbolic()),
        QuadTriple::new(dg(&[1, 1]), dg(&[1, 2]), dg(&[1, 1])),
        QuadTriple::new(QuadraticSpace::hyperbolic(), dg(&[1, 2]), dg(&[1, 1, 1, 1])),
    ];
    let mut count = 0;
    for p in [3u64, 5] {
        let ctx = PAdicContext::new(p, 1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(p + 40);
        for t in &forms {
            let one = ProductFn::indicator(&ctx, t).unwrap();
            for _ in 0..10 {
                let ks = [
                    sampling::sl2_integral(&mut rng, p, 2),
                    sampling::sl2_integral(&mut rng, p, 2),
                    sampling::sl2_integral(&mut rng, p, 2),
                ];
                let out = rho_triple(&ks, &one, t, &ctx).unwrap();
                for (a, b) in out.terms[0].iter().zip(&one.terms[0]) {
                    assert_eq!(a, b, "{ks:?}");
                }
                count += 1;
            }
        }
    }
    assert!(count >= 50);
}

#[test]
fn fourier_inversion() {
    let mut count = 0;
    for (p, space) in [
        (3u64, dg(&[1, 1])),
        (3, dg(&[1, 3])),
        (5, QuadraticSpace::hyperbolic()),
        (3, dg(&[1, 1, 1, 1])),
        (3, hh()),
    ] {
        let ctx = PAdicContext::new(p, 3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(p * 7 + space.dim() as u64);
        for _ in 0..5 {
            let (m, n) = if space.dim() == 2 { (rng.gen_range(-1..2), rng.gen_range(0..2)) } else { (0, 1) };
            let f = random_fn(&ctx, space.dim(), m, n, &mut rng);
            let ff = fourier(&fourier(&f, &space).unwrap(), &space).unwrap();
            assert_eq!(ff, f.reflect());
            count += 1;
        }
    }
    assert!(count >= 20);
}

#[test]
fn indicator_is_self_dual_for_unimodular_forms() {
    let ctx = PAdicContext::new(5, 1).unwrap();
    for space in [dg(&[1, 2]), QuadraticSpace::hyperbolic(), hh()] {
        let one = indicator_lattice(&ctx, LatticeWindow::new(space.dim(), 0, 0).unwrap()).unwrap();
        assert_eq!(fourier(&one, &space).unwrap(), one);
    }
}

/// Similitudes of a plane with small integer entries.
fn plane_similitudes(space: &QuadraticSpace, bound: i64) -> Vec<(Mat, Rational)> {
    let mut out = Vec::new();
    for a in -bound..=bound {
        for b in -bound..=bound {
            for c in -bound..=bound {
                for d in -bound..=bound {
                    if a * d == b * c {
                        continue;
                    }
                    let g = Mat::from_i64(&[&[a, b], &[c, d]]);
                    if let Some(l) = similitude_check(&g, space).unwrap() {
                        out.push((g, l));
                    }
                }
            }
        }
    }
    out
}

fn similitudes(space: &QuadraticSpace) -> Vec<(Mat, Rational)> {
    if space.dim() == 2 {
        return plane_similitudes(space, 4);
    }
    let j = space.gram_i64();
    let top = QuadraticSpace::new(vec![j[0][..2].to_vec(), j[1][..2].to_vec()]).unwrap();
    let bot = QuadraticSpace::new(vec![j[2][2..].to_vec(), j[3][2..].to_vec()]).unwrap();
    let a = plane_similitudes(&top, 2);
    let b = plane_similitudes(&bot, 2);
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

fn is_square(x: &Rational, p: u64) -> bool {
    // x is a square in ℚ_p iff (x, y) = 1 for all y; testing y ∈ {p, non-residue} suffices
    let nr = (2..p as i64).find(|&u| hilbert_symbol(&rat(u), &rat(p as i64), p).unwrap() == -1).unwrap();
    hilbert_symbol(x, &rat(p as i64), p).unwrap() == 1 && hilbert_symbol(x, &rat(nr), p).unwrap() == 1
}

#[test]
fn similitude_multipliers_are_trivial_for_the_character() {
    for p in [3u64, 5, 7] {
        for space in [QuadraticSpace::hyperbolic(), dg(&[1, 1]), dg(&[1, 2]), dg(&[1, 3]), dg(&[1, 1, 1, 1]), hh()] {
            let sims = similitudes(&space);
            assert!(sims.len() >= 50, "{space:?}: {}", sims.len());
            let mut nonsquare = 0;
            for (g, l) in &sims {
                assert_eq!(chi_q(l, &space, p).unwrap(), 1, "{space:?} {g:?} λ={l}");
                if !is_square(l, p) {
                    nonsquare += 1;
                }
            }
            assert!(nonsquare > 0, "{space:?} at {p}");
        }
    }
}

#[test]
fn isometries_commute_with_translations() {
    // L(h) commutes with ρ(n(t)) when h is an isometry
    let p = 3;
    let ctx = PAdicContext::new(p, 2).unwrap();
    let space = dg(&[1, 2]);
    let r = WeilRep::new(&ctx, &space).unwrap();
    let iso: Vec<Mat> = plane_similitudes(&space, 2)
        .into_iter()
        .filter(|(_, l)| *l == rat(1))
        .map(|(g, _)| g)
        .collect();
    assert!(!iso.is_empty());
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for h in iso {
        let f = random_fn(&ctx, 2, 0, 1, &mut rng);
        let t = rat(rng.gen_range(1..9)) / rat(9);
        let a = r.translate(&h, &r.n(&t, &f).unwrap()).unwrap();
        let b = r.n(&t, &r.translate(&h, &f).unwrap()).unwrap();
        assert_eq!(a, b);
    }
}
