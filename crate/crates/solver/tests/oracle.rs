use std::time::Instant;

use abdl_core::check::check_model;
use abdl_core::syntax::{parse_concept, parse_ontology};
use abdl_core::{Concept, Ontology, Semantics};
use abdl_solver::oracle::{brute_force_find_model, equisatisfiable_within, find_model, Agreement, OracleConfig, OracleOutcome};

fn fixture(name: &str) -> Ontology {
    let path = format!("{}/../../fixtures/{name}", env!("CARGO_MANIFEST_DIR"));
    parse_ontology(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn empty_ontology_one_element() {
    let a = Concept::name("A");
    let out = find_model(&Ontology::default(), Some((&a, "L")), &OracleConfig::new(1)).unwrap();
    let m = out.model().unwrap();
    assert_eq!(m.element_count(), 1);
    assert_eq!(m.levels["L"].concepts["A"].len(), 1);
}

#[test]
fn f1_loop_model_under_standard_semantics() {
    let o = fixture("f1.abdl");
    let out = find_model(&o, Some((&Concept::Top, "L2")), &OracleConfig::new(3)).unwrap();
    let m = out.model().expect("a one-element r-loop is a model");
    assert!(check_model(&o, m, Semantics::Standard).unwrap().is_model());
}

#[test]
fn f1_loop_escapes_abstraction_under_repetition_free_semantics() {
    // the loop match (d, d) repeats d, so no ensemble is demanded for it
    let o = fixture("f1.abdl");
    let t = Instant::now();
    let cfg = OracleConfig::new(3).with_variant(Semantics::RepetitionFree);
    let out = find_model(&o, Some((&Concept::Top, "L2")), &cfg).unwrap();
    let m = out.model().expect("model");
    assert!(check_model(&o, m, Semantics::RepetitionFree).unwrap().is_model());
    assert!(t.elapsed().as_secs() < 60);
}

#[test]
fn repetition_free_abstraction_sees_distinct_matches_only() {
    let o = parse_ontology("ci L2: top sqsubseteq exists r. top .\ncabs L1: bot abstracts L2: vars x, y { r(x, y) } .").unwrap();
    let goal = Some((&Concept::Top, "L2"));
    let cfg = OracleConfig::new(2);
    assert_eq!(find_model(&o, goal, &cfg).unwrap(), OracleOutcome::Exhausted { cap: 2 });
    let m = find_model(&o, goal, &cfg.with_variant(Semantics::RepetitionFree)).unwrap();
    let m = m.model().unwrap();
    assert!(m.levels["L2"].roles["r"].iter().all(|(a, b)| a == b));
}

#[test]
fn arm_model_has_four_elements() {
    let o = fixture("arm.abdl");
    let arm = Concept::name("Arm");
    let out = find_model(&o, Some((&arm, "L1")), &OracleConfig::new(4)).unwrap();
    let m = out.model().unwrap();
    assert_eq!(m.levels["L1"].domain.len(), 1);
    assert_eq!(m.rho.values().next().unwrap().len(), 3);
}

#[test]
fn contradiction_exhausted() {
    let o = fixture("contradiction.abdl");
    let a0 = Concept::name("A0");
    assert_eq!(find_model(&o, Some((&a0, "L")), &OracleConfig::new(3)).unwrap(), OracleOutcome::Exhausted { cap: 3 });
}

#[test]
fn equisatisfiability_cases() {
    let o = fixture("arm.abdl");
    let arm = Concept::name("Arm");
    let cfg = OracleConfig::new(3);
    assert_eq!(equisatisfiable_within(&o, &o, Some((&arm, "L1")), &cfg), Agreement::Agree);
    let bot = parse_ontology("ci L1: Arm sqsubseteq bot .").unwrap();
    assert_eq!(equisatisfiable_within(&bot, &Ontology::default(), Some((&arm, "L1")), &cfg), Agreement::Disagree);
}

#[test]
fn brute_force_agrees_on_small_inputs() {
    let cases = [
        ("ci L: A sqsubseteq exists r. not A .", "A", "L"),
        ("ci L: A sqsubseteq forall r. bot .\nci L: A sqsubseteq exists r. top .", "A", "L"),
        ("cref L2: vars x { B(x) } refines L1: A .\nci L2: B sqsubseteq bot .", "A", "L1"),
        ("cabs L1: A abstracts L2: vars x { B(x) } .\nci L1: A sqsubseteq bot .", "B", "L2"),
        ("cabs L1: A abstracts L2: vars x, y { r(x, y) } .", "top", "L2"),
    ];
    for (text, goal, level) in cases {
        let o = parse_ontology(text).unwrap();
        let g = parse_concept(goal).unwrap();
        for cap in 1..=2 {
            let sat = find_model(&o, Some((&g, level)), &OracleConfig::new(cap)).unwrap().model().is_some();
            let brute = brute_force_find_model(&o, Some((&g, level)), cap, Semantics::Standard).is_some();
            assert_eq!(sat, brute, "{text} at cap {cap}");
        }
    }
}
