//! The query engine against exhaustive enumeration of assignments, and the
//! component decomposition w.r.t. a variable set.

mod common;

use std::collections::{BTreeMap, BTreeSet};

use abdl_core::cq::{answers, canonical, components_wrt, is_answer, is_connected, mccs, CqError};
use abdl_core::structure::Structure;
use abdl_core::syntax::parse_cq;
use abdl_core::{Atom, Concept, Cq, Var};
use proptest::prelude::*;

/// Every assignment of all variables, checked atom by atom.
fn brute_answers(q: &Cq, s: &Structure) -> BTreeSet<Vec<usize>> {
    let vars = q.all_vars();
    let n = s.size();
    let mut out = BTreeSet::new();
    let total = n.pow(vars.len() as u32);
    for code in 0..total {
        let mut h = BTreeMap::new();
        let mut c = code;
        for v in &vars {
            h.insert(v.clone(), c % n);
            c /= n;
        }
        let holds = q.atoms.iter().all(|a| match a {
            Atom::Concept(Concept::Top, _) => true,
            Atom::Concept(Concept::Name(name), v) => s.has_concept(name, h[v]),
            Atom::Concept(..) => unreachable!("plain queries only"),
            Atom::Role(r, x, y) => {
                let (a, b) = if r.inverse { (h[y], h[x]) } else { (h[x], h[y]) };
                s.role_pairs(&r.name).any(|p| p == (a, b))
            }
        });
        if holds {
            out.insert(q.vars.iter().map(|v| h[v]).collect());
        }
    }
    out
}

fn vars(names: &[&str]) -> BTreeSet<Var> {
    names.iter().map(|v| v.to_string()).collect()
}

#[test]
fn components_of_the_running_example() {
    let q = parse_cq("vars x, y, u, v { r(x, y), r(u, x), r(y, v), r(u, v), r(v, u) }").unwrap();
    let comps = components_wrt(&q, &vars(&["x", "y"])).unwrap();
    assert_eq!(comps.len(), 1);
    let c = &comps[0];
    let e = parse_cq("vars x, y, u, v { r(u, x), r(y, v) }").unwrap();
    let p0 = parse_cq("vars u, v { r(u, v), r(v, u) }").unwrap();
    assert_eq!(c.crossing, e.atoms);
    assert_eq!(c.p0.atoms, p0.atoms);
    assert_eq!(c.query.atoms.len(), 4);
    assert!(!c.query.atoms.iter().any(|a| a == &q.atoms[0]));
}

#[test]
fn unknown_variable_is_an_error() {
    let q = parse_cq("vars x { A(x) }").unwrap();
    assert_eq!(components_wrt(&q, &vars(&["y"])), Err(CqError::UnknownVariable("y".into())));
}

#[test]
fn boolean_and_connected() {
    let q = parse_cq("exvars z, w { r(z, w), A(w) }").unwrap();
    assert!(is_connected(&q));
    let mut s = Structure::new(2);
    s.add_edge("r", 0, 1);
    assert!(answers(&q, &s).is_empty());
    s.add_concept("A", 1);
    assert_eq!(answers(&q, &s), BTreeSet::from([vec![]]));
    let split = parse_cq("vars x, y { A(x), B(y) }").unwrap();
    assert!(!is_connected(&split));
    assert_eq!(mccs(&split).len(), 2);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn answers_match_enumeration(q in common::cq(4, 5), s in common::structure(4)) {
        let expected = brute_answers(&q, &s);
        prop_assert_eq!(&answers(&q, &s), &expected);
        for t in &expected {
            prop_assert!(is_answer(&q, &s, t));
        }
    }

    #[test]
    fn components_partition_the_atoms(q in common::cq(4, 6), mask in 0u8..16) {
        let all = q.all_vars();
        let v: BTreeSet<Var> = all.iter().enumerate().filter(|(i, _)| mask & (1 << i) != 0).map(|(_, x)| x.clone()).collect();
        let comps = components_wrt(&q, &v).unwrap();
        let inside = |a: &Atom| a.vars().iter().all(|x| v.contains(*x));
        let outside = |a: &Atom| a.vars().iter().all(|x| !v.contains(*x));
        let mut seen: Vec<Atom> = vec![];
        for c in &comps {
            prop_assert!(is_connected(&c.p0));
            prop_assert!(c.p0.atoms.iter().all(outside));
            prop_assert!(c.crossing.iter().all(|a| !inside(a) && !outside(a)));
            let mut parts: Vec<Atom> = c.crossing.iter().chain(&c.p0.atoms).cloned().collect();
            parts.sort();
            let mut query = c.query.atoms.clone();
            query.sort();
            prop_assert_eq!(parts, query);
            seen.extend(c.query.atoms.iter().cloned());
        }
        // components are disjoint and cover every atom not inside V, as a multiset
        let mut expected: Vec<Atom> = q.atoms.iter().filter(|a| !inside(a)).cloned().collect();
        seen.sort();
        expected.sort();
        prop_assert_eq!(seen, expected);
        let vbar: BTreeSet<Var> = all.iter().filter(|x| !v.contains(*x)).cloned().collect();
        prop_assert_eq!(comps.len(), mccs(&abdl_core::cq::restrict(&q, &vbar)).len());
    }

    #[test]
    fn canonical_ignores_names_and_order(q in common::cq(4, 5), rot in 0usize..8) {
        let rename = |v: &Var| format!("w_{v}");
        let mut atoms: Vec<Atom> = q
            .atoms
            .iter()
            .map(|a| match a {
                Atom::Concept(c, v) => Atom::Concept(c.clone(), rename(v)),
                Atom::Role(r, x, y) => Atom::Role(r.clone(), rename(x), rename(y)),
            })
            .collect();
        let k = rot % atoms.len();
        atoms.rotate_left(k);
        let p = Cq {
            vars: q.vars.iter().map(rename).collect(),
            split: q.split,
            exvars: q.exvars.iter().map(rename).collect(),
            atoms,
        };
        prop_assert_eq!(canonical(&p).query, canonical(&q).query);
    }
}
