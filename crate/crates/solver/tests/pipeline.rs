//! Preprocessing against the model finder: normalization preserves
//! satisfiability, and derepetition turns models of refinement-only
//! ontologies into repetition-free ones.

use abdl_core::check::{check_model, derepetition, is_model_with_goal};
use abdl_core::normalize::prepare;
use abdl_core::syntax::parse_ontology;
use abdl_core::{Concept, Semantics, Statement};
use abdl_gadgets::random::{corpus, Shape};
use abdl_solver::oracle::{find_model, OracleConfig};

#[test]
fn normalization_is_equisatisfiable() {
    let cfg = OracleConfig::new(2);
    let (mut sat, mut unsat) = (0, 0);
    for inst in corpus(&Shape::tiny_full(), 7100, 100) {
        let before = find_model(&inst.ontology, Some((&inst.goal, &inst.level)), &cfg).unwrap();
        let (n, a0) = prepare(&inst.ontology, &inst.goal, &inst.level);
        let after = find_model(&n, Some((&Concept::name(a0), &inst.level)), &cfg).unwrap();
        assert_eq!(before.model().is_some(), after.model().is_some(), "seed {}", inst.seed);
        if before.model().is_some() {
            sat += 1;
        } else {
            unsat += 1;
        }
    }
    // both outcomes are exercised
    assert!(sat > 0 && unsat > 0, "{sat} sat, {unsat} unsat");
}

/// Refinements of arity two and three that every goal element must realize.
const FORCED: [&str; 4] = [
    "cref L2: vars x1, x2 { r(x1, x2) } refines L1: G .",
    "cref L2: vars x1, x2 { A(x1), r(x1, x2), B(x2) } refines L1: G .",
    "cref L2: vars x1, x2, x3 { r(x1, x2), r(x2, x3) } refines L1: G .",
    "rref L2: vars x1; y1 { r(x1, y1) } refines L1: G, r, top .",
];

#[test]
fn derepetition_yields_repetition_free_models() {
    let mut checked = 0;
    let mut repaired = 0;
    for inst in corpus(&Shape::tiny_cr(), 9000, 400) {
        if inst.ontology.statements.iter().any(Statement::is_abstraction) {
            continue;
        }
        let mut o = inst.ontology.clone();
        o.statements.extend(parse_ontology(FORCED[inst.seed as usize % FORCED.len()]).unwrap().statements);
        let g = Concept::name("G");
        let goal = Some((&g, "L1"));
        // one element per level forces repeated ensembles
        let found = [1, 2].into_iter().find_map(|cap| find_model(&o, goal, &OracleConfig::new(cap)).unwrap().model().cloned());
        let Some(m) = found else { continue };
        let repeated = m.rho.values().any(|t| (1..t.len()).any(|i| t[..i].contains(&t[i])));
        let d = derepetition(&m, &o).unwrap();
        assert!(check_model(&o, &d, Semantics::Standard).unwrap().is_model(), "seed {}", inst.seed);
        assert!(is_model_with_goal(&o, &d, Semantics::RepetitionFree, goal), "seed {}", inst.seed);
        checked += 1;
        repaired += usize::from(repeated);
        if checked == 50 {
            break;
        }
    }
    assert_eq!(checked, 50);
    assert!(repaired >= 25, "only {repaired} models had repeated ensembles");
}
