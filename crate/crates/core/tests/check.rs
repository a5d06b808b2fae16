//! Model checking: concept evaluation against a set-based evaluator, and
//! the fixture interpretations.

mod common;

use std::collections::BTreeSet;
use std::fs;

use abdl_core::check::{check_model, derepetition, eval_concept, is_model_with_goal, CheckError};
use abdl_core::structure::Structure;
use abdl_core::syntax::{parse_concept, parse_interpretation, parse_ontology};
use abdl_core::{AInterpretation, Concept, Ontology, Role, Rule, Semantics};
use proptest::prelude::*;

fn fixture(name: &str) -> String {
    fs::read_to_string(std::path::PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name)).unwrap()
}

fn ontology(name: &str) -> Ontology {
    parse_ontology(&fixture(name)).unwrap()
}

fn interpretation(name: &str) -> AInterpretation {
    parse_interpretation(&fixture(name)).unwrap()
}

fn pairs(s: &Structure, r: &Role) -> BTreeSet<(usize, usize)> {
    s.role_pairs(&r.name).map(|(a, b)| if r.inverse { (b, a) } else { (a, b) }).collect()
}

/// Extensions as element sets, straight from the definitions.
fn naive(c: &Concept, s: &Structure) -> BTreeSet<usize> {
    let all: BTreeSet<usize> = (0..s.size()).collect();
    match c {
        Concept::Name(a) => all.iter().copied().filter(|&d| s.has_concept(a, d)).collect(),
        Concept::Top => all,
        Concept::Bot => BTreeSet::new(),
        Concept::Not(c) => all.difference(&naive(c, s)).copied().collect(),
        Concept::And(a, b) => naive(a, s).intersection(&naive(b, s)).copied().collect(),
        Concept::Or(a, b) => naive(a, s).union(&naive(b, s)).copied().collect(),
        Concept::Exists(r, c) => {
            let inner = naive(c, s);
            pairs(s, r).into_iter().filter(|(_, e)| inner.contains(e)).map(|(d, _)| d).collect()
        }
        Concept::Forall(r, c) => {
            let inner = naive(c, s);
            let p = pairs(s, r);
            all.into_iter().filter(|d| p.iter().filter(|(a, _)| a == d).all(|(_, e)| inner.contains(e))).collect()
        }
    }
}

#[test]
fn arm_model_satisfies_both_directions() {
    let i = interpretation("arm_model.abint");
    for f in ["arm.abdl", "arm_abs.abdl"] {
        for v in [Semantics::Standard, Semantics::RepetitionFree] {
            let rep = check_model(&ontology(f), &i, v).unwrap();
            assert!(rep.is_model(), "{f} {v:?}: {:?}", rep.violations);
        }
    }
    let arm = parse_concept("Arm").unwrap();
    assert!(is_model_with_goal(&ontology("arm.abdl"), &i, Semantics::Standard, Some((&arm, "L1"))));
    assert!(!is_model_with_goal(&ontology("arm.abdl"), &i, Semantics::Standard, Some((&arm, "L2"))));
}

#[test]
fn missing_part_breaks_the_refinement() {
    let mut i = interpretation("arm_model.abint");
    i.levels.get_mut("L2").unwrap().concepts.get_mut("Hand").unwrap().clear();
    let rep = check_model(&ontology("arm.abdl"), &i, Semantics::Standard).unwrap();
    assert_eq!(rep.violations.len(), 1);
    assert_eq!(rep.violations[0].counterexample.elements(), vec!["arm"]);
}

#[test]
fn loose_parts_break_the_abstraction_only() {
    let mut i = interpretation("arm_model.abint");
    let l2 = i.level_mut("L2");
    for (c, d) in [("UArm", "u2"), ("LArm", "l2"), ("Hand", "h2")] {
        l2.domain.push(d.into());
        l2.add_concept(c, d);
    }
    l2.add_role("joins", "u2", "l2");
    l2.add_role("joins", "l2", "h2");
    assert!(check_model(&ontology("arm.abdl"), &i, Semantics::Standard).unwrap().is_model());
    let rep = check_model(&ontology("arm_abs.abdl"), &i, Semantics::Standard).unwrap();
    assert_eq!(rep.violations.len(), 1);
    assert_eq!(rep.violations[0].counterexample.elements(), vec!["u2", "l2", "h2"]);
}

#[test]
fn f1_path_is_not_a_model() {
    let o = ontology("f1.abdl");
    let i = interpretation("f1_path.abint");
    // the middle element sits in two ensembles, so this is not even an
    // A-interpretation
    let Err(CheckError::Invalid(diags)) = check_model(&o, &i, Semantics::Standard) else { panic!("expected (*) to fail") };
    assert!(diags.iter().all(|d| d.rule.is_semantic()));
    assert!(diags.iter().any(|d| d.rule == Rule::Star));
    assert!(!is_model_with_goal(&o, &i, Semantics::Standard, None));
    // dropping one ensemble repairs (*); the path end then has no r-successor
    let mut j = i.clone();
    j.rho.remove(&("b".to_string(), "L2".to_string()));
    let rep = check_model(&o, &j, Semantics::Standard).unwrap();
    assert!(rep.violations.iter().any(|v| v.statement == 0));
}

#[test]
fn derepetition_removes_repeated_ensemble_members() {
    let o = parse_ontology("cref L2: vars x, y { r(x, y) } refines L1: A .").unwrap();
    let i = parse_interpretation(
        "level L1 { a } .\nlevel L2 { d } .\nfiner L2 < L1 .\nconcept L1 A { a } .\nrole L2 r { (d,d) } .\nrho (a, L2) = [d, d] .",
    )
    .unwrap();
    assert!(check_model(&o, &i, Semantics::Standard).unwrap().is_model());
    let j = derepetition(&i, &o).unwrap();
    let tuple = &j.rho[&("a".to_string(), "L2".to_string())];
    assert_ne!(tuple[0], tuple[1]);
    assert!(check_model(&o, &j, Semantics::RepetitionFree).unwrap().is_model());
    let abs = parse_ontology("cabs L1: A abstracts L2: vars x, y { r(x, y) } .").unwrap();
    assert_eq!(derepetition(&i, &abs), Err(CheckError::HasAbstractions));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn eval_matches_naive(c in common::concept(), s in common::structure(4)) {
        let fast: BTreeSet<usize> = eval_concept(&c, &s).iter().enumerate().filter(|(_, b)| **b).map(|(d, _)| d).collect();
        prop_assert_eq!(fast, naive(&c, &s));
    }

    #[test]
    fn nnf_preserves_extensions(c in common::concept(), s in common::structure(3)) {
        prop_assert_eq!(eval_concept(&c.nnf(), &s), eval_concept(&c, &s));
    }
}

#[test]
fn dag_level_graphs_only_under_the_dag_variant() {
    let o = parse_ontology("semantics dag .\ncref L: vars x { A(x) } refines L1: B .\ncref L: vars x { A(x) } refines L2: B .").unwrap();
    let i = parse_interpretation(
        "level L1 { a } .\nlevel L2 { b } .\nlevel L { d, e } .\nfiner L < L1 .\nfiner L < L2 .\n\
         concept L1 B { a } .\nconcept L2 B { b } .\nconcept L A { d, e } .\nrho (a, L) = [d] .\nrho (b, L) = [e] .",
    )
    .unwrap();
    assert!(check_model(&o, &i, Semantics::Dag).unwrap().is_model());
    let Err(CheckError::Invalid(diags)) = check_model(&o, &i, Semantics::Standard) else { panic!("a DAG is not a tree") };
    assert!(diags.iter().any(|d| d.rule == Rule::NotTree));
}
