use super::*;
use crate::instance::demo6;

#[test]
fn small_matrix_passes() {
    let report = run_property_suites(0, 3).unwrap();
    assert_eq!(report.suites.iter().map(|s| s.name.as_str()).collect::<Vec<_>>(), SUITES);
    for s in &report.suites {
        assert!(s.ok(), "{}: {:?}", s.name, s.failures);
        assert!(s.passed > 0, "{} compared nothing", s.name);
    }
    assert!(report.all_pass);
}

#[test]
fn same_seed_same_matrix() {
    let a = run_suite("ambiguity", 7, 2).unwrap();
    let b = run_suite("ambiguity", 7, 2).unwrap();
    assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    assert!(run_suite("nope", 0, 1).is_err());
}

#[test]
fn lossy_storage_above_unity_fails_the_ess_sweep() {
    let mut inst = demo6();
    let e = inst.pses[0].ess.as_mut().unwrap();
    e.mu_ch = 1.05;
    let check = ess_exactness(&inst, &default_solve_options()).unwrap();
    assert!(matches!(check, Check::Fail(_)), "{check:?}");
}

#[test]
fn k4_has_sixteen_trees_both_ways() {
    let k4 = complete_graph(4);
    assert_eq!(enumerate_radial_topologies(&k4, 1000).unwrap().len(), 16);
    assert_eq!(topology_sets_agree(&k4, &default_solve_options()).unwrap(), Check::Error(0.0, 0.0));
}

#[test]
fn failing_check_is_recorded() {
    let mut s = SuiteResult::new("x");
    s.record("a".into(), Ok(Check::Error(1e-3, 1e-6)));
    s.record("b".into(), Ok(Check::Error(1e-9, 1e-6)));
    s.record("c".into(), Ok(Check::Skip));
    assert_eq!((s.cases, s.passed, s.skipped, s.failures.len()), (3, 1, 1, 1));
    assert!(!s.ok());
}
