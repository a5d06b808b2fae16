use abdl_core::normalize::prepare;
use abdl_core::syntax::parse_ontology;
use abdl_core::{Concept, Ontology};
use abdl_gadgets::random::{corpus, Shape};
use abdl_solver::cr::{
    eliminate_cr, enumerate_cr_mosaics, is_good_cr, sat_cr, verdict_from_mosaics, CrMosaic, CrOutcome, CrProblem,
};
use abdl_solver::oracle::{find_model, OracleConfig};
use abdl_solver::Verdict;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn fixture(name: &str) -> Ontology {
    let path = format!("{}/../../fixtures/{name}", env!("CARGO_MANIFEST_DIR"));
    parse_ontology(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn decide(o: &Ontology, goal: &Concept, level: &str, bound: usize) -> CrOutcome {
    let (p, a0) = prepare(o, goal, level);
    sat_cr(&p, &a0, level, bound).unwrap()
}

fn problem(text: &str) -> CrProblem {
    CrProblem::new(&parse_ontology(text).unwrap(), None).unwrap()
}

fn mosaic(p: &CrProblem, level: &str, labels: &[&[&str]]) -> CrMosaic {
    let ld = &p.levels[level];
    let bit = |n: &str| 1u64 << ld.names.iter().position(|x| x == n).unwrap();
    CrMosaic {
        level: level.into(),
        labels: labels.iter().map(|ns| ns.iter().fold(0, |t, n| t | bit(n))).collect(),
        edges: Default::default(),
    }
}

#[test]
fn top_inclusion_single_mosaic() {
    let p = problem("ci L: top sqsubseteq A .");
    let ms = enumerate_cr_mosaics(&p, 1).unwrap();
    assert_eq!(ms.len(), 1);
    assert_eq!(ms[0].labels, vec![1]);
}

#[test]
fn self_contradictory_name_never_holds() {
    let p = problem("ci L: A sqsubseteq not A .");
    let ms = enumerate_cr_mosaics(&p, 2).unwrap();
    assert!(!ms.is_empty());
    assert!(ms.iter().all(|m| m.labels.iter().all(|&t| t == 0)));
}

#[test]
fn existential_needs_partner_in_pool() {
    let p = problem("ci L: A sqsubseteq exists r. B .");
    let m = mosaic(&p, "L", &[&["A"]]);
    let partner = mosaic(&p, "L", &[&["B"]]);
    assert!(is_good_cr(&p, &m, &[partner]));
    assert!(!is_good_cr(&p, &m, &[]));
}

#[test]
fn jointly_unanswerable_refinements() {
    let p = problem(
        "cref L2: vars x1 { B(x1) } refines L1: A .
         cref L2: vars x1 { C(x1) } refines L1: A .
         ci L2: B sqsubseteq not C .",
    );
    let pool = enumerate_cr_mosaics(&p, 2).unwrap();
    let m = mosaic(&p, "L1", &[&["A"]]);
    assert!(!is_good_cr(&p, &m, &pool));
    let single = problem("cref L2: vars x1 { B(x1) } refines L1: A . ci L2: B sqsubseteq not C .");
    let pool = enumerate_cr_mosaics(&single, 1).unwrap();
    assert!(is_good_cr(&single, &mosaic(&single, "L1", &[&["A"]]), &pool));
}

#[test]
fn elimination_without_refinements_keeps_consistent_mosaics() {
    let p = problem("ci L: A and A sqsubseteq B . ci L: B sqsubseteq not C .");
    assert_eq!(eliminate_cr(&p, 2).unwrap(), enumerate_cr_mosaics(&p, 2).unwrap());
}

#[test]
fn unwitnessable_existential_eliminated() {
    let p = problem("ci L: A sqsubseteq exists r. B . ci L: B sqsubseteq not B .");
    let bit = 1u64 << p.levels["L"].names.iter().position(|n| n == "A").unwrap();
    let mstar = eliminate_cr(&p, 2).unwrap();
    assert!(!mstar.is_empty());
    assert!(mstar.iter().all(|m| m.labels.iter().all(|t| t & bit == 0)));
}

#[test]
fn two_coarser_levels_unsat_without_search() {
    let o = parse_ontology(
        "cref L2: vars x { A(x) } refines L1: top .
         cref L2: vars x { A(x) } refines L3: top .",
    )
    .unwrap();
    let out = decide(&o, &Concept::Top, "L2", 1);
    assert_eq!(out.verdict, Verdict::Unsat);
    assert!(out.bounds.exact);
}

#[test]
fn empty_ontology_sat() {
    let out = decide(&Ontology::default(), &Concept::name("A"), "L", 1);
    assert_eq!(out.verdict, Verdict::Sat);
}

#[test]
fn contradiction_unsat_at_complete_bound() {
    let o = fixture("contradiction.abdl");
    let out = decide(&o, &Concept::name("A0"), "L", 2);
    assert_eq!(out.verdict, Verdict::Unsat);
    assert!(out.bounds.exact);
}

#[test]
fn arm_sat_with_witness() {
    let o = fixture("arm.abdl");
    let out = decide(&o, &Concept::name("Arm"), "L1", 3);
    assert_eq!(out.verdict, Verdict::Sat);
    let w = out.witness.unwrap();
    assert!(w.labels["L1"].iter().any(|t| t.contains("Arm")));
    assert!(w.labels["L2"].iter().any(|t| t.contains("Hand")));
}

#[test]
fn short_bound_failure_is_unknown() {
    // a two-element ensemble whose elements must differ
    let o = parse_ontology(
        "cref L2: vars x, y { B(x), C(y) } refines L1: A .
         ci L2: B sqsubseteq not C .
         ci L1: top sqsubseteq A .
         ci L2: top sqsubseteq B .",
    )
    .unwrap();
    assert_eq!(decide(&o, &Concept::name("A"), "L1", 1).verdict, Verdict::Unknown);
    assert_eq!(decide(&o, &Concept::name("A"), "L1", 2).verdict, Verdict::Unsat);
}

/// Tiny corpus instances small enough for the explicit engine.
fn explicit_cases() -> Vec<(CrProblem, String, String)> {
    let mut out = vec![];
    for inst in corpus(&Shape::tiny_cr(), 1000, 400) {
        let (o, a0) = prepare(&inst.ontology, &inst.goal, &inst.level);
        let Ok(p) = CrProblem::new(&o, Some((&a0, &inst.level))) else { continue };
        let small = p.levels.keys().all(|l| p.consistent_labels(l).map(|ls| ls.len() <= 12).unwrap_or(false));
        if small && p.levels.values().all(|ld| ld.roles.len() <= 1) {
            out.push((p, a0, inst.level));
        }
    }
    out
}

#[test]
fn label_engine_matches_explicit_engine() {
    let cases = explicit_cases();
    assert!(cases.len() >= 50, "only {} cases", cases.len());
    for (p, a0, l0) in &cases {
        for n in 1..=2 {
            let explicit = verdict_from_mosaics(p, &eliminate_cr(p, n).unwrap(), a0, l0);
            let labels = abdl_solver::cr::eliminate_labels(p, n).unwrap();
            let bit = 1u64 << p.levels[l0].names.iter().position(|x| x == a0).unwrap();
            let label = labels[l0].iter().any(|t| t & bit != 0) && labels.values().all(|ls| !ls.is_empty());
            assert_eq!(explicit, label, "{a0}@{l0} at n={n}: {p:?}");
        }
    }
}

#[test]
fn elimination_is_confluent_and_post_fixpoint_good() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for (p, _, _) in explicit_cases().iter().take(40) {
        let mstar = eliminate_cr(p, 2).unwrap();
        assert!(mstar.iter().all(|m| is_good_cr(p, m, &mstar)));
        // remove one bad mosaic at a time, in random order
        let mut pool = enumerate_cr_mosaics(p, 2).unwrap();
        loop {
            let bad: Vec<usize> = (0..pool.len()).filter(|&i| !is_good_cr(p, &pool[i], &pool)).collect();
            let Some(&i) = bad.choose(&mut rng) else { break };
            pool.remove(i);
        }
        assert_eq!(pool, mstar);
    }
}

#[test]
fn oracle_models_imply_sat() {
    let (mut found, mut unsat) = (0, 0);
    for inst in corpus(&Shape::tiny_cr(), 0, 120) {
        let (o, a0) = prepare(&inst.ontology, &inst.goal, &inst.level);
        let out = sat_cr(&o, &a0, &inst.level, 3).unwrap();
        let oracle = find_model(&inst.ontology, Some((&inst.goal, &inst.level)), &OracleConfig::new(3)).unwrap();
        if oracle.model().is_some() {
            found += 1;
            assert_eq!(out.verdict, Verdict::Sat, "seed {}", inst.seed);
        }
        if out.verdict == Verdict::Unsat {
            unsat += 1;
            assert!(oracle.model().is_none(), "seed {}", inst.seed);
        }
    }
    assert!(found > 30 && unsat > 0, "found {found}, unsat {unsat}");
}
