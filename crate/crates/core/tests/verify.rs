use weiltriple::verify::{case_rng, run, Suite, VerifyConfig};

use rand::Rng;

fn in_pool<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> T {
    rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap().install(f)
}

#[test]
fn reports_do_not_depend_on_thread_count() {
    let cfg = VerifyConfig {
        seed: 11,
        suites: vec![Suite::BasicFunction, Suite::Gamma, Suite::Bound],
        primes: Some(vec![3, 5]),
    };
    let a = in_pool(1, || run(&cfg).to_json());
    let b = in_pool(4, || run(&cfg).to_json());
    assert_eq!(a, b);
    assert!(run(&cfg).passed);
}

#[test]
fn seeds_change_samples() {
    let x: u64 = case_rng(1, "a", 0).gen();
    let y: u64 = case_rng(2, "a", 0).gen();
    let z: u64 = case_rng(1, "a", 1).gen();
    let w: u64 = case_rng(1, "b", 0).gen();
    assert!(x != y && x != z && x != w);
    assert_eq!(x, case_rng(1, "a", 0).gen::<u64>());
}

#[test]
fn weil_suite_at_single_prime() {
    let cfg = VerifyConfig { seed: 7, suites: vec![Suite::WeilRep], primes: Some(vec![3]) };
    let r = run(&cfg);
    assert!(r.passed, "{}", r.to_json());
    let rep: Vec<_> = r.suites[0].checks.iter().filter(|c| c.name.starts_with("representation-property")).collect();
    assert!(rep.len() >= 4 && rep.iter().all(|c| c.cases >= 100));
}

#[test]
fn unknown_suite_rejected() {
    assert!("nope".parse::<Suite>().is_err());
    assert_eq!("weil-rep".parse::<Suite>().unwrap(), Suite::WeilRep);
}
