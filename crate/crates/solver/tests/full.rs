use std::collections::{BTreeMap, BTreeSet};

use abdl_core::check::is_model_with_goal;
use abdl_core::cq::subqueries_for_forbidden;
use abdl_core::normalize::prepare;
use abdl_core::syntax::parse_ontology;
use abdl_core::{Concept, Cq, Ontology, Semantics};
use abdl_gadgets::random::{corpus, instance, Shape};
use abdl_solver::cr::sat_cr;
use abdl_solver::full::{
    check_edge_candidate, check_mosaic_conditions, derive_f_out, generate, is_good_full, mirror, sat_full, CrossEdge,
    EdgeCandidate, FullConfig, FullMosaic, FullOutcome, FullProblem,
};
use abdl_solver::oracle::{find_model, OracleConfig};
use abdl_solver::Verdict;
use proptest::prelude::*;

fn fixture(name: &str) -> Ontology {
    let path = format!("{}/../../fixtures/{name}", env!("CARGO_MANIFEST_DIR"));
    parse_ontology(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn decide(o: &Ontology, goal: &Concept, level: &str, domain: usize) -> FullOutcome {
    let (p, a0) = prepare(o, goal, level);
    sat_full(&p, &a0, level, &FullConfig::new(domain)).unwrap()
}

fn problem(text: &str) -> FullProblem {
    FullProblem::new(&parse_ontology(text).unwrap(), None).unwrap()
}

fn set(names: &[&str]) -> BTreeSet<String> {
    names.iter().map(|n| n.to_string()).collect()
}

fn conditions(ds: &[abdl_solver::full::Diagnostic]) -> Vec<&str> {
    ds.iter().map(|d| d.condition.as_str()).collect()
}

/// e0 -r-> e1 at L2, abstracted by e2 at L1.
fn abstracted_edge(p: &FullProblem) -> FullMosaic {
    let (l1, l2) = (p.level_index("L1").unwrap(), p.level_index("L2").unwrap());
    let mut m = FullMosaic::default();
    let (a, b) = (m.add_elem(l2, set(&[])), m.add_elem(l2, set(&[])));
    m.add_pair(&abdl_core::Role::new("r"), a, b);
    let c = m.add_elem(l1, set(&["A"]));
    m.rho.insert((c, l2), vec![a, b]);
    m
}

#[test]
fn no_abstractions_only_condition_one() {
    let p = problem("ci L: A sqsubseteq not B .");
    let l = p.level_index("L").unwrap();
    let mut m = FullMosaic::single(l, set(&["A", "B"]));
    m.add_elem(l, set(&["A"]));
    assert_eq!(conditions(&check_mosaic_conditions(&p, &m)), ["1"]);
}

#[test]
fn partial_abstraction_match_must_be_forbidden() {
    let p = problem("cabs L1: A abstracts L2: vars x, y { r(x, y) } .");
    let mut m = abstracted_edge(&p);
    let ds = check_mosaic_conditions(&p, &m);
    // q restricted to {x} (or {y}) has no atoms: both elements match it,
    // and each such match leaves the component r(x, y) open
    assert_eq!(conditions(&ds), ["2", "2", "2", "2"]);
    m.f_out = derive_f_out(&p, &m).unwrap();
    assert_eq!(m.f_out.len(), 4);
    assert!(check_mosaic_conditions(&p, &m).is_empty());
}

#[test]
fn forbidden_incoming_propagates() {
    let p = problem("cabs L1: A abstracts L2: vars x, y { r(x, y) } .");
    let l2 = p.level_index("L2").unwrap();
    let q = Cq::new(&["x", "y"], vec![abdl_core::Atom::Role(abdl_core::Role::new("r"), "x".into(), "y".into())]);
    let mut m = abstracted_edge(&p);
    // e1 has no r-successor, so forbidding r(e1, ·) extends only to V = {x}
    m.f_in.insert(p.key(l2, &q, &BTreeMap::from([("x".to_string(), 1)])));
    m.f_out = derive_f_out(&p, &m).unwrap();
    assert!(check_mosaic_conditions(&p, &m).is_empty());
    let dropped = p.key(l2, &q, &BTreeMap::from([("x".to_string(), 1)]));
    m.f_out.remove(&dropped);
    assert!(conditions(&check_mosaic_conditions(&p, &m)).contains(&"4"));
    // forbidding r(e0, ·) is impossible: it matches completely
    let mut m = abstracted_edge(&p);
    m.f_in.insert(p.key(l2, &q, &BTreeMap::from([("x".to_string(), 0)])));
    assert!(derive_f_out(&p, &m).is_err());
}

#[test]
fn empty_edge_candidate_is_clean() {
    let p = problem("ri L: r sqsubseteq s .");
    let m = FullMosaic::single(p.level_index("L").unwrap(), set(&[]));
    assert!(check_edge_candidate(&p, &EdgeCandidate::new(), &m, &m).is_empty());
}

#[test]
fn role_inclusion_across_edge() {
    let p = problem("ri L: r sqsubseteq s .");
    let m = FullMosaic::single(p.level_index("L").unwrap(), set(&[]));
    let r = CrossEdge { role: "r".into(), from: (0, 0), to: (1, 0) };
    let mut e = EdgeCandidate::from([r]);
    assert_eq!(conditions(&check_edge_candidate(&p, &e, &m, &m)), ["1"]);
    e.insert(CrossEdge { role: "s".into(), from: (0, 0), to: (1, 0) });
    assert!(check_edge_candidate(&p, &e, &m, &m).is_empty());
}

#[test]
fn role_refinement_needs_ensembles() {
    let p = problem("rref L2: vars x; y { B(x), C(y) } refines L1: A, r, A .");
    let m = FullMosaic::single(p.level_index("L1").unwrap(), set(&["A"]));
    let e = EdgeCandidate::from([CrossEdge { role: "r".into(), from: (0, 0), to: (1, 0) }]);
    assert_eq!(conditions(&check_edge_candidate(&p, &e, &m, &m)), ["4(a)"]);
    let back = EdgeCandidate::from([CrossEdge { role: "r".into(), from: (1, 0), to: (0, 0) }]);
    assert_eq!(conditions(&check_edge_candidate(&p, &back, &m, &m)), ["4'(a)"]);
}

#[test]
fn goodness_examples() {
    let p = problem("ci L: A sqsubseteq exists r. B .");
    let l = p.level_index("L").unwrap();
    let m = FullMosaic::single(l, set(&["A"]));
    let partner = FullMosaic::single(l, set(&["B"]));
    assert!(is_good_full(&p, &m, &[partner]));
    assert!(!is_good_full(&p, &m, &[]));
    // a mosaic may serve as its own partner (as a disjoint copy)
    let mut both = m.clone();
    both.add_elem(l, set(&["B"]));
    assert!(is_good_full(&p, &both, &[both.clone()]));
}

#[test]
fn two_coarser_levels_unsat_without_search() {
    let o = parse_ontology(
        "cref L2: vars x { A(x) } refines L1: top .
         cabs L3: B abstracts L2: vars x { A(x) } .",
    )
    .unwrap();
    let out = decide(&o, &Concept::Top, "L2", 4);
    assert_eq!(out.verdict, Verdict::Unsat);
    assert!(out.bounds.exact);
}

#[test]
fn contradiction_is_unknown_not_unsat() {
    let out = decide(&fixture("contradiction.abdl"), &Concept::name("A0"), "L", 8);
    assert_eq!(out.verdict, Verdict::Unknown);
    assert!(!out.bounds.exact);
}

#[test]
fn arm_abstraction_sat_with_witness() {
    let o = fixture("arm_abs.abdl");
    let out = decide(&o, &Concept::name("Arm"), "L1", 8);
    assert_eq!(out.verdict, Verdict::Sat);
    let i = out.witness.unwrap().to_interpretation();
    assert!(is_model_with_goal(&o, &i, Semantics::Standard, Some((&Concept::name("Arm"), "L1"))));
}

/// F1 has a one-element loop model under the standard semantics, so a
/// sound procedure finds it (see the acceptance report).
#[test]
fn f1_loop_model_found() {
    let o = fixture("f1.abdl");
    let out = decide(&o, &Concept::Top, "L2", 8);
    assert_eq!(out.verdict, Verdict::Sat);
    let i = out.witness.unwrap().to_interpretation();
    assert!(is_model_with_goal(&o, &i, Semantics::Standard, Some((&Concept::Top, "L2"))));
}

#[test]
fn agrees_with_cr_procedure() {
    let mut decided = 0;
    for inst in corpus(&Shape::tiny_cr(), 0, 200) {
        let (o, a0) = prepare(&inst.ontology, &inst.goal, &inst.level);
        let cr = sat_cr(&o, &a0, &inst.level, 3).unwrap().verdict;
        let full = sat_full(&o, &a0, &inst.level, &FullConfig::new(8)).unwrap().verdict;
        let conflict = matches!((cr, full), (Verdict::Sat, Verdict::Unsat) | (Verdict::Unsat, Verdict::Sat));
        assert!(!conflict, "seed {}: cr {cr}, full {full}", inst.seed);
        decided += (cr == full) as usize;
    }
    assert!(decided > 150, "{decided}");
}

/// Every SAT witness assembles into a checked model, and every instance
/// with a small model found by the oracle is answered SAT.
#[test]
fn witnesses_are_models_and_small_models_are_found() {
    let shape = Shape { levels: 3, max_size: 20, inverse: true, ..Shape::tiny_full() };
    let mut sat = 0;
    for inst in corpus(&shape, 0, 150) {
        let (o, a0) = prepare(&inst.ontology, &inst.goal, &inst.level);
        let out = sat_full(&o, &a0, &inst.level, &FullConfig::new(8)).unwrap();
        if let Some(w) = &out.witness {
            sat += 1;
            let goal = Concept::name(a0.clone());
            let i = w.to_interpretation();
            assert!(is_model_with_goal(&o, &i, Semantics::Standard, Some((&goal, &inst.level))), "seed {}", inst.seed);
        }
        let oracle = find_model(&inst.ontology, Some((&inst.goal, &inst.level)), &OracleConfig::new(2)).unwrap();
        if oracle.model().is_some() {
            assert_eq!(out.verdict, Verdict::Sat, "seed {}", inst.seed);
        } else {
            assert_ne!(out.verdict, Verdict::Sat, "seed {}: oracle exhausted cap 2", inst.seed);
        }
    }
    assert!(sat > 100, "{sat}");
}

#[test]
fn forbidden_queries_stay_in_universe() {
    for inst in corpus(&Shape::tiny_full(), 300, 60) {
        let (o, a0) = prepare(&inst.ontology, &inst.goal, &inst.level);
        let p = FullProblem::new(&o, Some((&a0, &inst.level))).unwrap();
        let universe = subqueries_for_forbidden(&o);
        let cfg = FullConfig { max_mosaics: 300, ..FullConfig::new(6) };
        let g = generate(&p, &cfg, Some((p.level_index(&inst.level).unwrap(), &a0)));
        for m in &g.mosaics {
            for f in m.f_in.iter().chain(&m.f_out) {
                assert!(universe.contains(&f.query), "seed {}: {f}", inst.seed);
            }
        }
    }
}

fn swap_primes(c: &str) -> String {
    match c.find('\'') {
        Some(i) => format!("{}{}", &c[..i], &c[i + 1..]),
        None => match c.find('(') {
            Some(i) if c.starts_with(['2', '3', '4', '5']) => format!("{}'{}", &c[..i], &c[i..]),
            _ if c.starts_with(['2', '3', '4', '5']) => format!("{c}'"),
            _ => c.to_string(),
        },
    }
}

/// Pools of generated mosaics for the mirror property.
fn pools() -> Vec<(FullProblem, Vec<FullMosaic>)> {
    let shape = Shape { levels: 2, max_size: 20, inverse: true, ..Shape::tiny_full() };
    (0..40)
        .filter_map(|seed| {
            let inst = instance(&shape, 700 + seed);
            let (o, a0) = prepare(&inst.ontology, &inst.goal, &inst.level);
            let p = FullProblem::new(&o, Some((&a0, &inst.level))).ok()?;
            let cfg = FullConfig { max_mosaics: 40, ..FullConfig::new(6) };
            let g = generate(&p, &cfg, Some((p.level_index(&inst.level).unwrap(), &a0)));
            (g.mosaics.len() >= 2).then_some((p, g.mosaics))
        })
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn edge_conditions_mirror(k in 0usize..1000, i in 0usize..1000, j in 0usize..1000, picks in prop::collection::vec((0usize..8, 0usize..8, 0usize..3, any::<bool>()), 0..5)) {
        thread_local!(static POOLS: Vec<(FullProblem, Vec<FullMosaic>)> = pools());
        POOLS.with(|pools| {
            let (p, ms) = &pools[k % pools.len()];
            let (m, m2) = (&ms[i % ms.len()], &ms[j % ms.len()]);
            let roles = ["r", "s", "t"];
            let mut e = EdgeCandidate::new();
            for (a, b, r, fwd) in picks {
                let (a, b) = (a % m.len(), b % m2.len());
                if m.level[a] != m2.level[b] {
                    continue;
                }
                let (from, to) = if fwd { ((0, a), (1, b)) } else { ((1, b), (0, a)) };
                e.insert(CrossEdge { role: roles[r].into(), from, to });
            }
            let mut here: Vec<String> = check_edge_candidate(p, &e, m, m2).iter().map(|d| swap_primes(&d.condition)).collect();
            let mut there: Vec<String> = check_edge_candidate(p, &mirror(&e), m2, m).iter().map(|d| d.condition.clone()).collect();
            here.sort();
            there.sort();
            prop_assert_eq!(here, there);
            Ok(())
        })?;
    }
}
