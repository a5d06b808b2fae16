//! Acceptance run: one PASS/FAIL line per criterion. Exits nonzero if any
//! criterion fails.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::PathBuf;
use std::time::{Duration, Instant};

use abdl_core::check::{check_model, derepetition, is_model_with_goal};
use abdl_core::cq::{answers, components_wrt, homomorphisms, is_connected};
use abdl_core::normalize::{is_normal, normalize, prepare};
use abdl_core::structure::Structure;
use abdl_core::syntax::{
    parse_concept, parse_cq, parse_interpretation, parse_ontology, serialize_interpretation, serialize_ontology,
};
use abdl_core::{ontology_size, Atom, Concept, Cq, Ontology, Role, Semantics, Statement, Var};
use abdl_gadgets::random::{corpus, Instance, Shape};
use abdl_gadgets::*;
use abdl_solver::cr::sat_cr;
use abdl_solver::full::{sat_full, FullConfig};
use abdl_solver::oracle::{equisatisfiable_within, find_model, Agreement, OracleConfig};
use abdl_solver::Verdict;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const F1_LIMIT: Duration = Duration::from_secs(60);
const CORPUS_LIMIT: Duration = Duration::from_secs(600);

fn root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn fixture(name: &str) -> String {
    fs::read_to_string(root().join("fixtures").join(name)).unwrap()
}

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

// 1 ---------------------------------------------------------------------

fn f1_unsat() -> Outcome {
    let o = parse_ontology(&fixture("f1.abdl")).unwrap();
    let top = Concept::Top;
    let start = Instant::now();
    let std = find_model(&o, Some((&top, "L2")), &OracleConfig::new(3)).unwrap();
    let elapsed = start.elapsed();
    let rf = find_model(&o, Some((&top, "L2")), &OracleConfig::new(3).with_variant(Semantics::RepetitionFree)).unwrap();
    let (p, a0) = prepare(&o, &top, "L2");
    let verdicts: Vec<Verdict> = (1..=3).map(|d| sat_full(&p, &a0, "L2", &FullConfig::new(d)).unwrap().verdict).collect();
    let exhausted = std.model().is_none() && elapsed < F1_LIMIT;
    let never_sat = !verdicts.contains(&Verdict::Sat);
    let shape = |m: Option<&abdl_core::AInterpretation>| match m {
        Some(i) => format!("model found ({} elements)", i.element_count()),
        None => "exhausted".into(),
    };
    outcome(
        exhausted && never_sat,
        format!(
            "oracle cap 3: {} in {:.1?}; repetition-free: {}; sat_full at domain 1..3: {:?}",
            shape(std.model()),
            elapsed,
            shape(rf.model()),
            verdicts
        ),
    )
}

// 2, 3 ------------------------------------------------------------------

struct CorpusRun {
    instances: usize,
    oracle_models: usize,
    disagreements: Vec<u64>,
    conflicts: Vec<u64>,
    decided_both: usize,
    elapsed: Duration,
}

fn cr_corpus() -> CorpusRun {
    let start = Instant::now();
    let shape = Shape::tiny_cr();
    let mut run =
        CorpusRun { instances: 0, oracle_models: 0, disagreements: vec![], conflicts: vec![], decided_both: 0, elapsed: Duration::ZERO };
    for inst in corpus(&shape, 20_000, 200) {
        let (o, a0) = prepare(&inst.ontology, &inst.goal, &inst.level);
        // the complete bound ||O|| of the normalized input
        let cr = sat_cr(&o, &a0, &inst.level, ontology_size(&o)).unwrap().verdict;
        let oracle = find_model(&inst.ontology, Some((&inst.goal, &inst.level)), &OracleConfig::new(3)).unwrap();
        if oracle.model().is_some() {
            run.oracle_models += 1;
            if cr != Verdict::Sat {
                run.disagreements.push(inst.seed);
            }
        }
        let full = sat_full(&o, &a0, &inst.level, &FullConfig::new(3)).unwrap().verdict;
        if matches!((cr, full), (Verdict::Sat, Verdict::Unsat) | (Verdict::Unsat, Verdict::Sat)) {
            run.conflicts.push(inst.seed);
        }
        if cr != Verdict::Unknown && full != Verdict::Unknown {
            run.decided_both += 1;
        }
        run.instances += 1;
    }
    run.elapsed = start.elapsed();
    run
}

// 4, 5 ------------------------------------------------------------------

const NAMES: [&str; 2] = ["A", "B"];
const ROLES: [&str; 2] = ["r", "s"];

fn random_cq(rng: &mut ChaCha8Rng, max_vars: usize, max_atoms: usize) -> Cq {
    let n = rng.gen_range(1..=max_vars);
    let vars: Vec<Var> = (0..n).map(|i| format!("v{i}")).collect();
    let var = |rng: &mut ChaCha8Rng| vars[rng.gen_range(0..n)].clone();
    let mut atoms = vec![];
    for _ in 0..rng.gen_range(1..=max_atoms) {
        if rng.gen_bool(0.4) {
            let c = if rng.gen_bool(0.2) { Concept::Top } else { Concept::name(NAMES[rng.gen_range(0..2)]) };
            atoms.push(Atom::Concept(c, var(rng)));
        } else {
            let mut r = Role::new(ROLES[rng.gen_range(0..2)]);
            if rng.gen_bool(0.3) {
                r = r.inv();
            }
            atoms.push(Atom::Role(r, var(rng), var(rng)));
        }
    }
    let k = rng.gen_range(0..=n);
    let mut q = Cq { vars: vars[..k].to_vec(), split: None, exvars: vars[k..].to_vec(), atoms };
    q.cover_vars();
    q
}

fn random_structure(rng: &mut ChaCha8Rng, max: usize) -> Structure {
    let n = rng.gen_range(1..=max);
    let mut s = Structure::new(n);
    for c in NAMES {
        s.declare_concept(c);
        for d in 0..n {
            if rng.gen_bool(0.5) {
                s.add_concept(c, d);
            }
        }
    }
    for r in ROLES {
        s.declare_role(r);
        for a in 0..n {
            for b in 0..n {
                if rng.gen_bool(0.35) {
                    s.add_edge(r, a, b);
                }
            }
        }
    }
    s
}

/// Every total assignment of the query variables, filtered atom by atom.
fn brute_homomorphisms(q: &Cq, s: &Structure) -> BTreeSet<Vec<usize>> {
    let vars = q.all_vars();
    let n = s.size();
    let mut out = BTreeSet::new();
    for code in 0..n.pow(vars.len() as u32) {
        let h: BTreeMap<&Var, usize> = vars.iter().enumerate().map(|(i, v)| (v, code / n.pow(i as u32) % n)).collect();
        let ok = q.atoms.iter().all(|a| match a {
            Atom::Concept(Concept::Top, _) => true,
            Atom::Concept(c, v) => s.has_concept(c.as_name().unwrap(), h[v]),
            Atom::Role(r, x, y) => {
                let (a, b) = if r.inverse { (h[y], h[x]) } else { (h[x], h[y]) };
                s.role_pairs(&r.name).any(|p| p == (a, b))
            }
        });
        if ok {
            out.insert(vars.iter().map(|v| h[v]).collect());
        }
    }
    out
}

fn cq_engine() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut mismatches = 0;
    let mut nonempty = 0;
    for _ in 0..500 {
        let q = random_cq(&mut rng, 4, 5);
        let s = random_structure(&mut rng, 4);
        let brute = brute_homomorphisms(&q, &s);
        let homs: BTreeSet<Vec<usize>> = homomorphisms(&q, &s, &BTreeMap::new()).into_iter().collect();
        let k = q.vars.len();
        let projected: BTreeSet<Vec<usize>> = brute.iter().map(|h| h[..k].to_vec()).collect();
        if homs != brute || answers(&q, &s) != projected {
            mismatches += 1;
        }
        nonempty += usize::from(!brute.is_empty());
    }
    outcome(mismatches == 0, format!("500 pairs, {mismatches} mismatches ({nonempty} with matches)"))
}

fn components() -> Outcome {
    let q = parse_cq("vars x, y, u, v { r(x, y), r(u, x), r(y, v), r(u, v), r(v, u) }").unwrap();
    let v: BTreeSet<Var> = ["x", "y"].map(String::from).into();
    let comps = components_wrt(&q, &v).unwrap();
    let e = parse_cq("vars x, y, u, v { r(u, x), r(y, v) }").unwrap().atoms;
    let p0 = parse_cq("vars u, v { r(u, v), r(v, u) }").unwrap().atoms;
    let example = comps.len() == 1 && comps[0].crossing == e && comps[0].p0.atoms == p0;

    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut broken = 0;
    for _ in 0..500 {
        let q = random_cq(&mut rng, 5, 6);
        let all = q.all_vars();
        let v: BTreeSet<Var> = all.iter().filter(|_| rng.gen_bool(0.4)).cloned().collect();
        let comps = components_wrt(&q, &v).unwrap();
        let inside = |a: &Atom| a.vars().iter().all(|x| v.contains(*x));
        let outside = |a: &Atom| a.vars().iter().all(|x| !v.contains(*x));
        let mut covered: Vec<Atom> = vec![];
        let mut ok = true;
        for c in &comps {
            ok &= is_connected(&c.p0) && c.p0.atoms.iter().all(outside);
            ok &= c.crossing.iter().all(|a| !inside(a) && !outside(a));
            covered.extend(c.crossing.iter().chain(&c.p0.atoms).cloned());
        }
        let mut expected: Vec<Atom> = q.atoms.iter().filter(|a| !inside(a)).cloned().collect();
        covered.sort();
        expected.sort();
        ok &= covered == expected;
        broken += usize::from(!ok);
    }
    outcome(example && broken == 0, format!("running example {}; partition broken on {broken}/500", if example { "exact" } else { "differs" }))
}

// 6 ---------------------------------------------------------------------

fn normal_form() -> Outcome {
    let insts = corpus(&Shape::tiny_full(), 6_000, 100);
    let mut not_normal = 0;
    let (mut agree, mut inconclusive, mut disagree) = (0, 0, 0);
    let cfg = OracleConfig::new(2);
    for inst in &insts {
        let n = normalize(&inst.ontology);
        not_normal += usize::from(!is_normal(&n));
        match equisatisfiable_within(&inst.ontology, &n, Some((&inst.goal, &inst.level)), &cfg) {
            Agreement::Agree => agree += 1,
            Agreement::Inconclusive => inconclusive += 1,
            Agreement::Disagree => disagree += 1,
        }
    }
    outcome(
        not_normal == 0 && disagree == 0,
        format!("{} inputs: {not_normal} not normal; oracle agree {agree}, inconclusive {inconclusive}, disagree {disagree}", insts.len()),
    )
}

// 7 ---------------------------------------------------------------------

/// Refinements of arity two and three aimed at a fresh goal name, so that
/// every model has ensembles.
const FORCED: [&str; 4] = [
    "cref L2: vars x1, x2 { r(x1, x2) } refines L1: G .",
    "cref L2: vars x1, x2 { A(x1), r(x1, x2), B(x2) } refines L1: G .",
    "cref L2: vars x1, x2, x3 { r(x1, x2), r(x2, x3) } refines L1: G .",
    "rref L2: vars x1; y1 { r(x1, y1) } refines L1: G, r, top .",
];

fn derepetition_pairs() -> Outcome {
    let (mut pairs, mut repeated, mut failed) = (0, 0, 0);
    let g = Concept::name("G");
    for inst in corpus(&Shape::tiny_cr(), 7_000, 400) {
        if pairs == 50 {
            break;
        }
        let mut o = inst.ontology.clone();
        o.statements.extend(parse_ontology(FORCED[inst.seed as usize % FORCED.len()]).unwrap().statements);
        let goal = Some((&g, "L1"));
        let found = [1, 2].into_iter().find_map(|cap| find_model(&o, goal, &OracleConfig::new(cap)).unwrap().model().cloned());
        let Some(m) = found else { continue };
        pairs += 1;
        repeated += usize::from(m.rho.values().any(|t| (1..t.len()).any(|i| t[..i].contains(&t[i]))));
        let ok = derepetition(&m, &o).is_ok_and(|d| is_model_with_goal(&o, &d, Semantics::RepetitionFree, goal));
        failed += usize::from(!ok);
    }
    outcome(pairs == 50 && failed == 0, format!("{pairs} pairs ({repeated} with repeated ensembles), {failed} failures"))
}

// 8 ---------------------------------------------------------------------

fn contexts() -> Vec<Instance> {
    corpus(&Shape::tiny_full(), 8_000, 20)
}

fn simulations() -> Outcome {
    let cfg = OracleConfig::new(2);
    let sat = |o: &Ontology, inst: &Instance, v: Semantics| {
        find_model(o, Some((&inst.goal, inst.level.as_str())), &cfg.with_variant(v)).unwrap().model().is_some()
    };
    let (mut bot_std, mut bot_rf, mut forall) = (0, 0, 0);
    for (k, inst) in contexts().iter().enumerate() {
        let (c, d) = if k % 2 == 0 { ("A", "B") } else { ("B", "A") };
        let (c, d) = (Concept::name(c), Concept::name(d));
        let l = &inst.level;

        let mut direct = inst.ontology.clone();
        direct.push(Statement::Ci { level: l.clone(), lhs: c.clone(), rhs: Concept::Bot });
        let mut sim = inst.ontology.clone();
        sim.statements.extend(gen_bot_simulation(&c, l, None, &inst.ontology));
        bot_std += usize::from(sat(&direct, inst, Semantics::Standard) != sat(&sim, inst, Semantics::Standard));
        bot_rf += usize::from(sat(&direct, inst, Semantics::RepetitionFree) != sat(&sim, inst, Semantics::RepetitionFree));

        let r = Role::new("r");
        let mut direct = inst.ontology.clone();
        direct.push(Statement::Ci { level: l.clone(), lhs: c.clone(), rhs: Concept::forall(r.clone(), d.clone()) });
        let mut sim = inst.ontology.clone();
        sim.statements.extend(gen_forall_simulation(&c, &r, &d, l, &inst.ontology));
        forall += usize::from(sat(&direct, inst, Semantics::Standard) != sat(&sim, inst, Semantics::Standard));
    }
    outcome(
        bot_std == 0 && forall == 0,
        format!("20 contexts each: ⊥ disagreements {bot_std} (repetition-free {bot_rf}), ∀ disagreements {forall}"),
    )
}

// 9 ---------------------------------------------------------------------

fn goldens() -> Outcome {
    let golden = |f: &str| fs::read_to_string(root().join("crates/gadgets/tests/golden").join(format!("{f}.txt"))).unwrap();
    let atm = parse_atm(&fixture("atm2.machine")).unwrap();
    let dtm = parse_dtm(&fixture("dtm2.machine")).unwrap();
    let sym_in = parse_ontology("ci L: A sqsubseteq exists s. B .").unwrap();
    let gadgets = [
        ("rr_atm", gen_rr_atm(&atm, &["a".into(), "a".into()]).unwrap()),
        ("ca_sym", gen_ca_sym_reduction(&sym_in, "A", &parse_cq("exvars x, y { s(x, y), B(y) }").unwrap()).unwrap()),
        ("repfree_dtm", gen_repfree_dtm(&dtm).unwrap()),
        ("dag_dtm", gen_dag_dtm(&dtm).unwrap()),
        ("quantified_dtm", gen_quantified_dtm(&dtm).unwrap()),
    ];
    let differing: Vec<&str> = gadgets.iter().filter(|(n, g)| g.report() != golden(n)).map(|(n, _)| *n).collect();
    let o = gen_repfree_dtm(&dtm).unwrap().ontology;
    let grid = grid_fixture(4, &dtm).unwrap();
    let rep = check_model(&o, &grid.interpretation, Semantics::RepetitionFree).unwrap();
    let interior = rep.violations.iter().filter(|v| v.counterexample.elements().iter().all(|d| !grid.is_boundary(d))).count();
    outcome(
        differing.is_empty() && interior == 0,
        format!(
            "goldens differing: {differing:?}; grid k=4: {} violations, {interior} away from the boundary",
            rep.violations.len()
        ),
    )
}

// 10 --------------------------------------------------------------------

fn round_trip() -> Outcome {
    let mut files = 0;
    let mut broken = vec![];
    for entry in fs::read_dir(root().join("fixtures")).unwrap() {
        let p = entry.unwrap().path();
        let text = fs::read_to_string(&p).unwrap();
        let ok = match p.extension().and_then(|e| e.to_str()) {
            Some("abdl") => parse_ontology(&text).is_ok_and(|o| parse_ontology(&serialize_ontology(&o)).as_ref() == Ok(&o)),
            Some("abint") => {
                parse_interpretation(&text).is_ok_and(|i| parse_interpretation(&serialize_interpretation(&i)).as_ref() == Ok(&i))
            }
            _ => continue,
        };
        files += 1;
        if !ok {
            broken.push(p.file_name().unwrap().to_string_lossy().into_owned());
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let crashes = (0..10_000)
        .filter(|_| {
            let len = rng.gen_range(0..96);
            let bytes: Vec<u8> = (0..len).map(|_| rng.gen()).collect();
            let text = String::from_utf8_lossy(&bytes).into_owned();
            std::panic::catch_unwind(|| {
                let _ = parse_ontology(&text);
                let _ = parse_interpretation(&text);
                let _ = parse_concept(&text);
                let _ = parse_cq(&text);
            })
            .is_err()
        })
        .count();
    outcome(broken.is_empty() && crashes == 0, format!("{files} fixtures, round trip broken: {broken:?}; 10000 fuzz inputs, {crashes} crashes"))
}

fn main() {
    std::panic::set_hook(Box::new(|_| {}));
    let corpus = cr_corpus();
    let c2 = outcome(
        corpus.disagreements.is_empty() && corpus.instances >= 200 && corpus.elapsed < CORPUS_LIMIT,
        format!(
            "{} instances, {} oracle models, disagreements at seeds {:?}, {:.1?}",
            corpus.instances, corpus.oracle_models, corpus.disagreements, corpus.elapsed
        ),
    );
    let c3 = outcome(
        corpus.conflicts.is_empty(),
        format!("{} instances, {} decided by both, conflicts at seeds {:?}", corpus.instances, corpus.decided_both, corpus.conflicts),
    );
    let results = [
        ("F1 has no model", f1_unsat()),
        ("oracle-solver agreement", c2),
        ("cr/full consistency", c3),
        ("CQ engine vs brute force", cq_engine()),
        ("component decomposition", components()),
        ("normal form", normal_form()),
        ("de-repetition", derepetition_pairs()),
        ("simulation gadgets", simulations()),
        ("gadget goldens and grid", goldens()),
        ("round trip and fuzzing", round_trip()),
    ];
    let mut failed = 0;
    for (k, (name, o)) in results.iter().enumerate() {
        println!("criterion {:>2}: {} {name}: {}", k + 1, if o.pass { "PASS" } else { "FAIL" }, o.detail);
        failed += usize::from(!o.pass);
    }
    println!("acceptance: {}/{} criteria pass", results.len() - failed, results.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
