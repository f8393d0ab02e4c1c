//! One PASS/FAIL line per acceptance criterion.  Run with `--nocapture` to see them.

use std::process::Command;
use std::time::Instant;

use serde_json::Value;
use weiltriple::arith::valuation;
use weiltriple::local_integral::{basic_cutoff, common_value, i_closed, i_oracle, standard_battery, CellFunction};
use weiltriple::orbit_ff::{orbit_decompose, xpoints_decompose};
use weiltriple::symplectic::OrbitLabel;
use weiltriple::{PAdicContext, Valuation};

struct Outcome {
    id: u32,
    pass: bool,
    summary: String,
}

fn report(outcomes: &[Outcome]) {
    for o in outcomes {
        println!("criterion {}: {} - {}", o.id, if o.pass { "PASS" } else { "FAIL" }, o.summary);
    }
}

fn verify_run(threads: usize) -> (String, i32) {
    let out = Command::new(env!("CARGO_BIN_EXE_weiltriple"))
        .args(["verify", "--seed", "7", "--threads", &threads.to_string()])
        .output()
        .expect("binary runs");
    (String::from_utf8(out.stdout).expect("utf-8"), out.status.code().unwrap_or(-1))
}

fn checks<'a>(r: &'a Value, suite: &str) -> Vec<&'a Value> {
    r["suites"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|s| s["suite"] == suite)
        .flat_map(|s| s["checks"].as_array().unwrap())
        .collect()
}

fn named<'a>(cs: &[&'a Value], prefix: &str) -> Vec<&'a Value> {
    cs.iter().copied().filter(|c| c["name"].as_str().unwrap().starts_with(prefix)).collect()
}

fn cases(c: &Value) -> u64 {
    c["cases"].as_u64().unwrap()
}

fn passed(cs: &[&Value]) -> bool {
    !cs.is_empty() && cs.iter().all(|c| c["passed"] == true)
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let (mut count, mut equal, mut above, mut below) = (0, 0, 0, 0);
    let mut triples = std::collections::BTreeSet::new();
    for p in [3u64, 5] {
        let ctx = PAdicContext::new(p, 1).unwrap();
        for (name, t, v) in standard_battery(p) {
            let closed = i_closed(&v, &t, &ctx).unwrap();
            let oracle = i_oracle(&v, &t, &CellFunction::basic(p, basic_cutoff(&v, p)), &ctx).unwrap();
            count += 1;
            triples.insert(name);
            if oracle.to_rational() == Some(closed) {
                equal += 1;
            }
            let ord_sum: i64 = v.ords(p).iter().map(|o| o.finite().unwrap()).sum();
            let vq = valuation(&common_value(&v, &t), p);
            above += (vq > Valuation::Finite(ord_sum)) as usize;
            below += (vq < Valuation::Finite(ord_sum)) as usize;
        }
    }
    let secs = start.elapsed().as_secs_f64();
    Outcome {
        id: 1,
        pass: count >= 40 && equal == count && triples.len() == 3 && above > 0 && below > 0 && secs < 300.0,
        summary: format!(
            "{equal}/{count} battery points agree over {} triples; val Q above/below the ord sum on {above}/{below} points; {secs:.1}s",
            triples.len()
        ),
    }
}

fn criterion_6() -> Outcome {
    let start = Instant::now();
    let r2 = orbit_decompose(2).unwrap();
    let want = [(OrbitLabel::L000, 54, 4), (OrbitLabel::L100, 18, 12), (OrbitLabel::L010, 18, 12), (OrbitLabel::L001, 18, 12), (OrbitLabel::L111, 27, 8)];
    let q2 = r2.orbits.len() == 5
        && r2.orbits.iter().zip(want).all(|(o, w)| (o.label, o.size, o.stabilizer_order) == w)
        && r2.lagrangian_count == 135
        && r2.group_order == 216;
    let r3 = orbit_decompose(3).unwrap();
    let q3 = r3.orbits.len() == 5 && r3.orbits.iter().map(|o| o.size).sum::<u64>() == 1120;
    let param = r2.consistent() && r3.consistent();
    let x2 = xpoints_decompose(2).unwrap();
    let x3 = xpoints_decompose(3).unwrap();
    let xs = [&x2, &x3]
        .iter()
        .all(|x| x.bijective && x.x_orbits.len() == 5 && x.x_orbits.iter().all(|o| o.parametric_order == o.stabilizer_order));
    let secs = start.elapsed().as_secs_f64();
    Outcome {
        id: 6,
        pass: q2 && q3 && param && xs && x2.x_count == 135 && x3.x_count == 2240 && secs < 120.0,
        summary: format!(
            "q=2 sizes {:?}; q=3 {} orbits over {} Lagrangians; parametric stabilisers {}; |X(F_2)|={}, |X(F_3)|={}, bijection {}; {secs:.1}s",
            r2.orbits.iter().map(|o| o.size).collect::<Vec<_>>(),
            r3.orbits.len(),
            r3.lagrangian_count,
            if param { "match" } else { "differ" },
            x2.x_count,
            x3.x_count,
            x2.bijective && x3.bijective
        ),
    }
}

#[test]
fn acceptance() {
    let mut out = vec![criterion_1()];

    let (a, code_a) = verify_run(1);
    let (b, code_b) = verify_run(4);
    let r: Value = serde_json::from_str(&a).expect("verify prints JSON");

    let support = checks(&r, "support");
    out.push(Outcome {
        id: 2,
        pass: passed(&support) && cases(support[0]) >= 10,
        summary: format!("{} non-integral points, closed and oracle both 0", cases(support[0])),
    });

    let weil = checks(&r, "weil-rep");
    let rep = named(&weil, "representation-property");
    let ind = named(&weil, "integral-elements-fix-indicator");
    let four = named(&weil, "fourier-inversion");
    out.push(Outcome {
        id: 3,
        pass: passed(&rep)
            && rep.iter().all(|c| cases(c) >= 100)
            && passed(&ind)
            && cases(ind[0]) >= 50
            && passed(&four)
            && cases(four[0]) >= 20,
        summary: format!(
            "{} forms x >=100 pairs; {} integral k fix the indicator; {} Fourier inversions",
            rep.len(),
            cases(ind[0]),
            cases(four[0])
        ),
    });

    let sim = checks(&r, "similitude");
    let nonsquare: u64 = sim.iter().map(|c| c["detail"]["non_square_multipliers"].as_u64().unwrap_or(0)).sum();
    out.push(Outcome {
        id: 4,
        pass: passed(&sim) && sim.iter().all(|c| cases(c) >= 50) && nonsquare > 0,
        summary: format!(
            "{} (form, p) pairs, min {} similitudes each, {nonsquare} non-square multipliers",
            sim.len(),
            sim.iter().map(|c| cases(c)).min().unwrap_or(0)
        ),
    });

    let bf = checks(&r, "basic-function");
    let inv = named(&bf, "right-invariance");
    out.push(Outcome {
        id: 5,
        pass: passed(&bf) && cases(inv[0]) >= 100 && bf.len() == 3,
        summary: format!(
            "{} right translates, cell values, decay: {}",
            cases(inv[0]),
            bf.iter().map(|c| format!("{}={}", c["name"].as_str().unwrap(), c["passed"])).collect::<Vec<_>>().join(", ")
        ),
    });

    out.push(criterion_6());

    let bound = checks(&r, "bound");
    let zeros = bound[0]["detail"]["zero_component_points"].as_u64().unwrap_or(0);
    out.push(Outcome {
        id: 7,
        pass: passed(&bound) && zeros >= 5,
        summary: format!("{} points including {zeros} with v1 = 0", cases(bound[0])),
    });

    let gamma = checks(&r, "gamma");
    out.push(Outcome {
        id: 8,
        pass: passed(&gamma) && gamma.len() == 2,
        summary: format!(
            "{} representatives checked, {} conjugation cases",
            cases(gamma[0]),
            cases(gamma[1])
        ),
    });

    out.push(Outcome {
        id: 9,
        pass: a == b && !a.is_empty() && code_a == code_b,
        summary: format!("1 vs 4 threads: {} bytes, identical = {}, exit codes {code_a}/{code_b}", a.len(), a == b),
    });

    out.sort_by_key(|o| o.id);
    report(&out);
    assert_eq!(r["passed"], true, "verify reported a failure");
    assert!(out.iter().all(|o| o.pass));
}
