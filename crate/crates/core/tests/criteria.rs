use std::collections::HashSet;

use hamsys::criteria::{self, ClaimScope, CriteriaOptions, IndexClaim, VerdictStatus};
use hamsys::fixtures;
use hamsys::system::Problem;
use hamsys::HamsysError;

fn problem(id: &str) -> Problem {
    fixtures::find(id).unwrap().problem().unwrap()
}

#[test]
fn registry_ids_are_unique_and_explained() {
    let mut seen = HashSet::new();
    for c in criteria::registry() {
        assert!(seen.insert(c.id), "duplicate id {}", c.id);
        let text = criteria::explain(c.id).unwrap();
        assert!(text.contains(c.title));
        assert!(!c.hypotheses.is_empty(), "{} has no hypotheses", c.id);
    }
    assert!(seen.len() >= 10);
}

#[test]
fn unknown_criterion_is_an_error() {
    assert!(criteria::info("no-such-criterion").is_err());
    assert!(criteria::evaluate_criterion("no-such-criterion", &problem("kac-krein"), &CriteriaOptions::default()).is_err());
}

#[test]
fn criteria_refuse_problems_they_do_not_cover() {
    // a first-order system criterion applied to a Sturm–Liouville problem
    let sl = problem("sl-quartic");
    let system_only = criteria::registry()
        .iter()
        .find(|c| !criteria::applicable(c, &sl))
        .expect("some criterion does not cover Sturm–Liouville problems");
    let r = criteria::evaluate_criterion(system_only.id, &sl, &CriteriaOptions::default());
    assert!(matches!(r, Err(HamsysError::Precondition(_))));
}

#[test]
fn trace_dichotomy_on_canonical_systems() {
    let o = CriteriaOptions::default();
    let holds = criteria::evaluate_criterion("canonical-maximal", &problem("canonical-decay"), &o).unwrap();
    assert_eq!(holds.status, VerdictStatus::Holds);
    assert!(holds.claim.unwrap().admits(2, 2));
    let fails = criteria::evaluate_criterion("canonical-maximal", &problem("kac-krein"), &o).unwrap();
    assert_eq!(fails.status, VerdictStatus::Fails);
    let claim = fails.claim.unwrap();
    assert!(claim.admits(1, 1));
    assert!(!claim.admits(2, 2));
}

#[test]
fn every_verdict_is_consistent_with_measured_indices() {
    for id in ["ex3.1", "ex3.2", "kac-krein", "canonical-decay", "ex3.6"] {
        let f = fixtures::find(id).unwrap();
        let out = hamsys::report::run_example(&f, &Default::default()).unwrap();
        assert!(out.passed, "{id}: {:?}", out.mismatches);
        assert!(out.report.consistency.iter().all(|c| c.consistent), "{id}: inconsistent verdict");
    }
}

#[test]
fn not_both_maximal_claim() {
    let c = IndexClaim::not_both_maximal(ClaimScope::HalfLine, [0, 2], [0, 2]);
    assert!(c.admits(1, 2));
    assert!(c.admits(2, 1));
    assert!(c.admits(1, 1));
    assert!(!c.admits(2, 2));
}

#[test]
fn evaluate_all_covers_applicable_criteria() {
    let p = problem("ex3.6");
    let verdicts = criteria::evaluate_all(&p, &CriteriaOptions::default());
    let applicable = criteria::registry().iter().filter(|c| criteria::applicable(c, &p)).count();
    assert_eq!(verdicts.len(), applicable);
}
