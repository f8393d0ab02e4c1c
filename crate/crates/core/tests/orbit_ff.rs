use std::collections::BTreeMap;
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use weiltriple::orbit_ff::*;
use weiltriple::symplectic::OrbitLabel;
use weiltriple::Error;

fn sizes(r: &OrbitReport) -> BTreeMap<OrbitLabel, (u64, u64)> {
    r.orbits.iter().map(|o| (o.label, (o.size, o.stabilizer_order))).collect()
}

#[test]
fn q2_orbits() {
    let t = Instant::now();
    let r = orbit_decompose(2).unwrap();
    assert_eq!(r.lagrangian_count, 135);
    assert_eq!(r.group_order, 216);
    let s = sizes(&r);
    assert_eq!(s[&OrbitLabel::L000], (54, 4));
    assert_eq!(s[&OrbitLabel::L100], (18, 12));
    assert_eq!(s[&OrbitLabel::L010], (18, 12));
    assert_eq!(s[&OrbitLabel::L001], (18, 12));
    assert_eq!(s[&OrbitLabel::L111], (27, 8));
    assert!(r.consistent());
    assert!(t.elapsed().as_secs() < 120);
}

#[test]
fn q3_orbits() {
    let r = orbit_decompose(3).unwrap();
    assert_eq!(r.lagrangian_count, 1120);
    assert_eq!(r.orbits.len(), 5);
    let s = sizes(&r);
    assert_eq!(s[&OrbitLabel::L000].0, 768);
    assert_eq!(s[&OrbitLabel::L100].0, 96);
    assert_eq!(s[&OrbitLabel::L111].0, 64);
    assert!(r.consistent());
    for o in &r.orbits {
        assert_eq!(o.direct_stabilizer_order, Some(o.stabilizer_order));
    }
}

#[test]
fn q5_orbits() {
    let r = orbit_decompose(5).unwrap();
    assert_eq!(r.lagrangian_count, 19656);
    assert_eq!(r.orbits.len(), 5);
    assert!(r.consistent());
}

#[test]
fn labels_do_not_depend_on_enumeration_order() {
    let mut pts = enumerate_lagrangians(3).unwrap();
    let base = sizes(&orbit_decompose_from(&pts, 3).unwrap());
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..3 {
        pts.shuffle(&mut rng);
        assert_eq!(sizes(&orbit_decompose_from(&pts, 3).unwrap()), base);
    }
}

#[test]
fn x_points_match_double_cosets() {
    for (q, count) in [(2u8, 135u64), (3, 2240)] {
        let r = xpoints_decompose(q).unwrap();
        assert_eq!(r.x_count, count);
        assert_eq!(r.x_orbits.len(), 5);
        assert_eq!(r.lagrangian_orbits, 5);
        assert!(r.bijective);
        let g = group_order(q as u64);
        for o in &r.x_orbits {
            assert_eq!(o.size * o.stabilizer_order, g);
            assert_eq!(o.parametric_order, o.stabilizer_order, "{}", o.label);
        }
    }
}

#[test]
fn x_limited_to_small_q() {
    assert!(matches!(xpoints_decompose(5), Err(Error::ResourceBound(_))));
}

#[test]
fn standard_subspaces_are_lagrangian_mod_q() {
    for q in [2u8, 3, 5] {
        let all = enumerate_lagrangians(q).unwrap();
        for l in OrbitLabel::ALL {
            let w = standard_lagrangian(l, q).unwrap();
            assert!(all.binary_search(&w).is_ok());
        }
    }
}

#[test]
fn non_lagrangian_rejected() {
    let rows = [[1, 0, 0, 0, 0, 0], [0, 0, 0, 1, 0, 0], [0, 1, 0, 0, 0, 0]];
    assert!(FqLagrangian::from_i64(3, rows).is_err());
    let rank2 = [[1, 0, 0, 0, 0, 0], [2, 0, 0, 0, 0, 0], [0, 1, 0, 0, 0, 0]];
    assert!(FqLagrangian::from_i64(3, rank2).is_err());
}

#[test]
fn cache_round_trip() {
    let dir = std::env::temp_dir().join(format!("weiltriple-cache-test-{}", std::process::id()));
    std::env::set_var(CACHE_ENV, &dir);
    let a = enumerate_lagrangians(2).unwrap();
    assert!(dir.join("lagrangians-q2.json").exists());
    let b = enumerate_lagrangians(2).unwrap();
    std::env::remove_var(CACHE_ENV);
    assert_eq!(a, b);
    let _ = std::fs::remove_dir_all(&dir);
}
