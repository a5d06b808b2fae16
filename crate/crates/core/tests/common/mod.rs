//! Small random ontologies, queries and structures shared by the tests.

#![allow(dead_code)]

use abdl_core::structure::Structure;
use abdl_core::{Atom, Concept, Cq, Ontology, Role, RoleTriple, Semantics, Statement};
use proptest::prelude::*;

pub const CONCEPTS: [&str; 3] = ["A", "B", "C"];
pub const ROLES: [&str; 2] = ["r", "s"];

pub fn role() -> impl Strategy<Value = Role> {
    (0..ROLES.len(), any::<bool>()).prop_map(|(i, inv)| {
        let r = Role::new(ROLES[i]);
        if inv {
            r.inv()
        } else {
            r
        }
    })
}

pub fn concept() -> impl Strategy<Value = Concept> {
    let leaf = prop_oneof![
        4 => (0..CONCEPTS.len()).prop_map(|i| Concept::name(CONCEPTS[i])),
        1 => Just(Concept::Top),
        1 => Just(Concept::Bot),
    ];
    leaf.prop_recursive(3, 16, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(Concept::not),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Concept::and(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Concept::or(a, b)),
            (role(), inner.clone()).prop_map(|(r, c)| Concept::exists(r, c)),
            (role(), inner).prop_map(|(r, c)| Concept::forall(r, c)),
        ]
    })
}

pub fn plain_concept() -> impl Strategy<Value = Concept> {
    prop_oneof![
        4 => (0..CONCEPTS.len()).prop_map(|i| Concept::name(CONCEPTS[i])),
        1 => Just(Concept::Top),
    ]
}

/// Atoms over variables `v0..v{n-1}`; every variable is mentioned.
fn atoms(n: usize, max: usize, atom_concept: BoxedStrategy<Concept>) -> impl Strategy<Value = Vec<Atom>> {
    let var = move || (0..n).prop_map(|i| format!("v{i}"));
    let atom = prop_oneof![
        (atom_concept, var()).prop_map(|(c, v)| Atom::Concept(c, v)),
        (role(), var(), var()).prop_map(|(r, x, y)| Atom::Role(r, x, y)),
    ];
    prop::collection::vec(atom, 1..=max).prop_map(move |mut atoms| {
        for i in 0..n {
            let v = format!("v{i}");
            if !atoms.iter().any(|a| a.mentions(&v)) {
                atoms.push(Atom::Concept(Concept::Top, v));
            }
        }
        atoms
    })
}

/// A query over at most `max_vars` variables; the first `answer` of them
/// (clamped) are answer variables.
pub fn cq_with(max_vars: usize, max_atoms: usize, atom_concept: BoxedStrategy<Concept>) -> impl Strategy<Value = Cq> {
    (1..=max_vars)
        .prop_flat_map(move |n| (Just(n), 0..=n, atoms(n, max_atoms, atom_concept.clone())))
        .prop_map(|(n, k, atoms)| {
            let vars: Vec<String> = (0..n).map(|i| format!("v{i}")).collect();
            Cq { vars: vars[..k].to_vec(), split: None, exvars: vars[k..].to_vec(), atoms }
        })
}

pub fn cq(max_vars: usize, max_atoms: usize) -> impl Strategy<Value = Cq> {
    cq_with(max_vars, max_atoms, plain_concept().boxed())
}

/// A query with at least one answer variable.
fn answer_cq() -> impl Strategy<Value = Cq> {
    cq_with(3, 3, concept().boxed()).prop_filter("needs an answer variable", |q| !q.vars.is_empty())
}

fn level() -> impl Strategy<Value = (String, String)> {
    prop_oneof![Just(("L2".to_string(), "L1".to_string())), Just(("L3".to_string(), "L1".to_string()))]
}

pub fn statement() -> impl Strategy<Value = Statement> {
    prop_oneof![
        (concept(), concept()).prop_map(|(lhs, rhs)| Statement::Ci { level: "L1".into(), lhs, rhs }),
        (role(), role()).prop_map(|(lhs, rhs)| Statement::Ri { level: "L2".into(), lhs, rhs }),
        (level(), answer_cq(), concept())
            .prop_map(|((fine, coarse), cq, concept)| Statement::ConceptRef { fine, cq, coarse, concept }),
        (level(), answer_cq(), concept())
            .prop_map(|((fine, coarse), cq, concept)| Statement::ConceptAbs { coarse, concept, fine, cq }),
        (level(), cq_with(4, 4, concept().boxed()), concept(), role(), concept()).prop_filter_map(
            "role refinements need x̄ and ȳ",
            |((fine, coarse), mut cq, cx, role, cy)| {
                let all = cq.all_vars();
                if all.len() < 2 {
                    return None;
                }
                let k = 1 + all.len() / 3;
                cq.vars = all.clone();
                cq.exvars = vec![];
                cq.split = Some(k.min(all.len() - 1));
                Some(Statement::RoleRef { fine, cq, coarse, qr: RoleTriple { cx, role, cy } })
            }
        ),
        (level(), role(), answer_cq()).prop_filter_map("role abstractions need two answer variables", |((fine, coarse), role, mut cq)| {
            let all = cq.all_vars();
            if all.len() < 2 {
                return None;
            }
            cq.vars = all[..2].to_vec();
            cq.split = Some(1);
            cq.exvars = all[2..].to_vec();
            Some(Statement::RoleAbs { coarse, role, fine, cq })
        }),
    ]
}

pub fn ontology() -> impl Strategy<Value = Ontology> {
    let sem = prop_oneof![
        Just(Semantics::Standard),
        Just(Semantics::RepetitionFree),
        Just(Semantics::Dag),
        Just(Semantics::Quantified)
    ];
    (prop::collection::vec(statement(), 0..6), sem).prop_map(|(mut statements, semantics)| {
        // quantified variables only exist under the quantified variant
        if semantics != Semantics::Quantified {
            for st in &mut statements {
                if let Statement::ConceptRef { cq, .. }
                | Statement::ConceptAbs { cq, .. }
                | Statement::RoleRef { cq, .. }
                | Statement::RoleAbs { cq, .. } = st
                {
                    let ex = std::mem::take(&mut cq.exvars);
                    cq.vars.extend(ex);
                }
            }
        }
        Ontology { statements, semantics }
    })
}

/// A structure over `CONCEPTS` and `ROLES` with at most `max` elements.
pub fn structure(max: usize) -> impl Strategy<Value = Structure> {
    (1..=max).prop_flat_map(|n| {
        let bits = prop::collection::vec(any::<bool>(), n * CONCEPTS.len() + n * n * ROLES.len());
        (Just(n), bits)
    })
    .prop_map(|(n, bits)| {
        let mut s = Structure::new(n);
        let mut it = bits.into_iter();
        for c in CONCEPTS {
            s.declare_concept(c);
            for d in 0..n {
                if it.next().unwrap() {
                    s.add_concept(c, d);
                }
            }
        }
        for r in ROLES {
            s.declare_role(r);
            for a in 0..n {
                for b in 0..n {
                    if it.next().unwrap() {
                        s.add_edge(r, a, b);
                    }
                }
            }
        }
        s
    })
}
