use std::sync::OnceLock;
use std::time::Instant;

use proptest::prelude::*;
use weiltriple::arith::{p_pow, rat, ratio};
use weiltriple::local_integral::*;
use weiltriple::schwartz::{indicator_lattice, LatticeWindow, WeilRep};
use weiltriple::{PAdicContext, QuadTriple, QuadraticSpace, Rational};

fn ctx(p: u64) -> PAdicContext {
    PAdicContext::new(p, 1).unwrap()
}

fn oracle_b(v: &PointV, t: &QuadTriple, p: u64) -> Rational {
    let b = CellFunction::basic(p, basic_cutoff(v, p));
    i_oracle_report(v, t, &b, &ctx(p)).unwrap().value
}

fn cached_battery(p: u64) -> &'static [(&'static str, QuadTriple, PointV)] {
    static B3: OnceLock<Vec<(&'static str, QuadTriple, PointV)>> = OnceLock::new();
    static B5: OnceLock<Vec<(&'static str, QuadTriple, PointV)>> = OnceLock::new();
    match p {
        3 => B3.get_or_init(|| standard_battery(3)),
        _ => B5.get_or_init(|| standard_battery(5)),
    }
}

fn hhh() -> QuadTriple {
    standard_triples()[0].1.clone()
}

#[test]
fn closed_form_matches_oracle_on_battery() {
    let start = Instant::now();
    let mut count = 0;
    let mut nontrivial = 0;
    for p in [3, 5] {
        let battery = standard_battery(p);
        for name in ["hyperbolic", "diagonal", "mixed"] {
            assert!(battery.iter().filter(|b| b.0 == name).count() >= 6, "{name} at {p}");
        }
        for (name, t, v) in &battery {
            let closed = i_closed(v, t, &ctx(p)).unwrap();
            let oracle = oracle_b(v, t, p);
            assert_eq!(closed, oracle, "{name} p={p} v={}", serde_json::to_string(v).unwrap());
            count += 1;
            if closed != rat(1) {
                nontrivial += 1;
            }
        }
    }
    assert!(count >= 40);
    assert!(nontrivial >= 20);
    assert!(start.elapsed().as_secs() < 300);
}

#[test]
fn battery_spans_quadratic_valuations() {
    // within one pattern the common value should take more than one valuation
    let t = hhh();
    let pts = battery(&t, 3, &[[1, 1, 1]], 30, 3);
    let mut vals: Vec<_> = pts.iter().map(|v| ctx(3).valuation(&common_value(v, &t))).collect();
    vals.dedup();
    assert!(vals.len() >= 3, "{vals:?}");
}

#[test]
fn frozen_values() {
    // hyperbolic triple, v_i = (p, p): terms e = 0 and the three pairs (1,1,0)
    for p in [3u64, 5, 7] {
        let x = p as i64;
        let v = PointV::from_ints([&[x, x], &[x, x], &[x, x]]);
        let closed = i_closed_terms(&v, &hhh(), &ctx(p)).unwrap();
        assert_eq!(closed.value, rat(4));
        assert_eq!(closed.terms.len(), 4);
        assert_eq!(oracle_b(&v, &hhh(), p), rat(4));
    }
    // v_i = (p, p²) at p = 3: ord 1, val Q = 3
    let v = PointV::from_ints([&[3, 9], &[3, 9], &[3, 9]]);
    assert_eq!(i_closed(&v, &hhh(), &ctx(3)).unwrap(), rat(5));
    assert_eq!(oracle_b(&v, &hhh(), 3), rat(5));
    // ord 2 everywhere, val Q = 4, 5, 6
    for (w, want) in [([9, 9], 12), ([9, 27], 15), ([9, 81], 16)] {
        let v = PointV::from_ints([&w, &w, &w]);
        assert_eq!(i_closed(&v, &hhh(), &ctx(3)).unwrap(), rat(want));
        assert_eq!(oracle_b(&v, &hhh(), 3), rat(want));
    }
}

#[test]
fn unit_point_and_single_cell() {
    for p in [3u64, 5] {
        for (_, t) in standard_triples() {
            let pts = battery(&t, p, &[[0, 0, 0]], 30, 2);
            for v in pts {
                assert_eq!(i_closed(&v, &t, &ctx(p)).unwrap(), rat(1));
                let single = i_oracle_report(&v, &t, &CellFunction::single(0), &ctx(p)).unwrap();
                assert_eq!(single.value, rat(1));
                assert_eq!(single.terms.len(), 1);
                assert_eq!(single.terms[0].e, [0, 0, 0]);
                // cell 1 is never reached from an ord-0 point
                let c1 = i_oracle_report(&v, &t, &CellFunction::single(1), &ctx(p)).unwrap();
                assert_eq!(c1.value, rat(0));
            }
        }
    }
}

#[test]
fn single_cells_sum_to_basic() {
    let p = 3;
    let t = hhh();
    let v = PointV::from_ints([&[9, 9], &[9, 27], &[9, 9]]);
    if !v.in_y(&t) {
        return;
    }
    let mut total = Rational::from_integer(0.into());
    for c in 0..=2 {
        let one = i_oracle_report(&v, &t, &CellFunction::single(c), &ctx(p)).unwrap().value;
        total += one * weiltriple::symplectic::basic_b_cell(c, p);
    }
    assert_eq!(total, oracle_b(&v, &t, p));
}

#[test]
fn supported_on_integral_points() {
    let mut count = 0;
    for p in [3u64, 5] {
        for (name, t, v) in standard_battery(p).into_iter().step_by(3) {
            let w = v.scaled(&p_pow(p, -basic_cutoff(&v, p) - 1));
            assert!(w.in_y_smooth(&t));
            assert!(!w.is_integral(p));
            assert_eq!(i_closed(&w, &t, &ctx(p)).unwrap(), rat(0), "{name}");
            assert_eq!(oracle_b(&w, &t, p), rat(0), "{name}");
            count += 1;
        }
    }
    assert!(count >= 10);
}

#[test]
fn absolute_integral_bound() {
    for p in [3u64, 5] {
        for (name, t, v) in standard_battery(p) {
            let r = abs_integral_bound_check(&v, &t, &ctx(p)).unwrap();
            assert!(r.holds, "{name} p={p} v={} {} > {}", serde_json::to_string(&v).unwrap(), r.integral, r.bound);
            let closed = i_closed(&v, &t, &ctx(p)).unwrap();
            assert!(r.integral >= closed && r.integral >= -closed);
        }
        let zeros = zero_first_points(p);
        assert!(zeros.len() >= 5);
        for (_, t, v) in zeros {
            let r = abs_integral_bound_check(&v, &t, &ctx(p)).unwrap();
            assert!(r.holds, "p={p} v={} {} > {}", serde_json::to_string(&v).unwrap(), r.integral, r.bound);
            assert!(r.integral > rat(0));
        }
    }
}

#[test]
fn bound_examples() {
    let p = 3;
    let v = PointV::from_ints([&[1, 1], &[1, 1], &[1, 1]]);
    let r = abs_integral_bound_check(&v, &hhh(), &ctx(p)).unwrap();
    assert_eq!((r.integral, r.bound), (rat(1), rat(1)));
    let v = PointV::from_ints([&[0, 0], &[1, 1], &[1, 2]]);
    let r = abs_integral_bound_check(&v, &hhh(), &ctx(p)).unwrap();
    assert_eq!(r.bound, rat(1));
    assert!(r.holds);
    let v = v.scaled(&ratio(1, 3));
    let r = abs_integral_bound_check(&v, &hhh(), &ctx(p)).unwrap();
    assert_eq!((r.integral, r.bound), (rat(0), rat(0)));
    let v = PointV::from_ints([&[0, 0], &[0, 0], &[1, 2]]);
    assert!(abs_integral_bound_check(&v, &hhh(), &ctx(p)).is_err());
}

#[test]
fn invariant_under_integral_similitudes() {
    for p in [3u64, 5] {
        for (name, t) in standard_triples() {
            let sims: Vec<_> = t.spaces.iter().map(|s| similitude_search(s, p, 1)).collect();
            assert!(sims.iter().all(|s| !s.is_empty()), "{name}");
            for v in battery(&t, p, &ORD_PATTERNS, 30, 1) {
                let base = i_closed(&v, &t, &ctx(p)).unwrap();
                let mut checked = 0;
                for (g0, l) in &sims[0] {
                    let Some((g1, _)) = sims[1].iter().find(|(_, m)| m == l) else { continue };
                    let Some((g2, _)) = sims[2].iter().find(|(_, m)| m == l) else { continue };
                    let w = v.act_inverse(&[g0.clone(), g1.clone(), g2.clone()]).unwrap();
                    assert!(w.in_y_smooth(&t));
                    assert_eq!(i_closed(&w, &t, &ctx(p)).unwrap(), base, "{name}");
                    checked += 1;
                    if checked == 4 {
                        break;
                    }
                }
                assert!(checked > 0, "{name}");
            }
        }
    }
}

#[test]
fn torus_factor_ignores_units() {
    // ρ(m(u p^{-e}))𝟙 evaluated on integral vectors does not see the unit u
    let p = 3u64;
    let ctx = ctx(p);
    for s in [QuadraticSpace::hyperbolic(), QuadraticSpace::diagonal(&[1, 1]).unwrap()] {
        let rep = WeilRep::new(&ctx, &s).unwrap();
        let one = indicator_lattice(&ctx, LatticeWindow::new(2, 0, 0).unwrap()).unwrap();
        for e in 0..3 {
            let base = rep.torus(&p_pow(p, -e), &one).unwrap();
            for u in 1..(p * p) as i64 {
                if u % p as i64 == 0 {
                    continue;
                }
                let f = rep.torus(&(rat(u) * p_pow(p, -e)), &one).unwrap();
                assert_eq!(f, base, "u={u} e={e}");
            }
        }
    }
}

#[test]
fn domain_and_form_errors() {
    let c = ctx(3);
    let v = PointV::from_ints([&[0, 0], &[0, 0], &[1, 0]]);
    assert!(matches!(i_closed(&v, &hhh(), &c), Err(weiltriple::Error::NotInDomain(_))));
    let v = PointV::from_ints([&[1, 1], &[1, 1], &[1, 2]]);
    assert!(matches!(i_closed(&v, &hhh(), &c), Err(weiltriple::Error::NotInDomain(_))));
    assert!(matches!(
        i_oracle_report(&v, &hhh(), &CellFunction::basic(3, 0), &c),
        Err(weiltriple::Error::NotInDomain(_))
    ));
    let ramified = QuadTriple::new(
        QuadraticSpace::diagonal(&[1, 3]).unwrap(),
        QuadraticSpace::hyperbolic(),
        QuadraticSpace::hyperbolic(),
    );
    let v = PointV::from_ints([&[1, 0], &[1, 1], &[1, 1]]);
    assert!(matches!(i_closed(&v, &ramified, &c), Err(weiltriple::Error::UnsupportedForm(_))));
}

#[test]
fn point_json_round_trip() {
    let v = PointV::new([vec![ratio(1, 3), rat(2)], vec![rat(0), rat(-5)], vec![rat(7), ratio(-2, 9)]]);
    let s = serde_json::to_string(&v).unwrap();
    assert_eq!(s, r#"[["1/3","2"],["0","-5"],["7","-2/9"]]"#);
    assert_eq!(serde_json::from_str::<PointV>(&s).unwrap(), v);
    let f = CellFunction::basic(3, 3);
    let s = serde_json::to_string(&f).unwrap();
    assert_eq!(serde_json::from_str::<CellFunction>(&s).unwrap(), f);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn closed_form_sees_only_units_up_to_scaling(idx in 0usize..40, u in 1i64..40) {
        let p = 5u64;
        prop_assume!(u % 5 != 0);
        let battery = cached_battery(p);
        let (_, t, v) = &battery[idx % battery.len()];
        let w = v.scaled(&rat(u));
        prop_assert_eq!(i_closed(&w, t, &ctx(p)).unwrap(), i_closed(v, t, &ctx(p)).unwrap());
    }

    #[test]
    fn closed_form_scales_out_of_support(idx in 0usize..40, k in 1i64..3) {
        let p = 3u64;
        let battery = cached_battery(p);
        let (_, t, v) = &battery[idx % battery.len()];
        let w = v.scaled(&p_pow(p, -basic_cutoff(v, p) - k));
        prop_assert_eq!(i_closed(&w, t, &ctx(p)).unwrap(), rat(0));
    }
}
