//! Normal form: shape, idempotence and serializability.

mod common;

use abdl_core::normalize::{close_role_hierarchy, is_normal, is_normal_ci, normalize, prepare};
use abdl_core::syntax::{parse_concept, parse_ontology, serialize_ontology};
use abdl_core::{Statement, RESERVED_PREFIX};
use proptest::prelude::*;

#[test]
fn fixtures_normalize() {
    let dir = std::path::PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures");
    for f in ["arm.abdl", "arm_abs.abdl", "bike.abdl", "contradiction.abdl", "f1.abdl", "empty.abdl"] {
        let o = parse_ontology(&std::fs::read_to_string(dir.join(f)).unwrap()).unwrap();
        let n = normalize(&o);
        assert!(is_normal(&n), "{f}");
        assert_eq!(normalize(&n), n, "{f}");
    }
}

#[test]
fn goal_is_a_fresh_reserved_name() {
    let o = parse_ontology("ci L: A sqsubseteq exists r. (B and not C) .").unwrap();
    let (p, a0) = prepare(&o, &parse_concept("A or B").unwrap(), "L");
    assert!(a0.starts_with(RESERVED_PREFIX));
    assert!(is_normal(&p));
    assert!(p.concept_names().contains(&a0));
}

#[test]
fn six_shapes() {
    let c = |s: &str| parse_concept(s).unwrap();
    for (l, r) in [("top", "A"), ("A", "exists r. B"), ("exists inv(r). B", "A"), ("A and B", "C"), ("A", "not B"), ("not B", "A")] {
        assert!(is_normal_ci(&c(l), &c(r)), "{l} ⊑ {r}");
    }
    for (l, r) in [("A", "B or C"), ("A", "forall r. B"), ("A and B and C", "D"), ("A", "top"), ("bot", "A"), ("A", "exists r. top")] {
        assert!(!is_normal_ci(&c(l), &c(r)), "{l} ⊑ {r}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn normal_and_idempotent(o in common::ontology()) {
        let n = normalize(&o);
        prop_assert!(is_normal(&n));
        for s in &n.statements {
            if let Statement::Ci { lhs, rhs, .. } = s {
                prop_assert!(is_normal_ci(lhs, rhs), "{lhs:?} ⊑ {rhs:?}");
            }
        }
        prop_assert_eq!(normalize(&n), n.clone());
        prop_assert_eq!(n.semantics, o.semantics);
        let closed = close_role_hierarchy(&n);
        prop_assert_eq!(close_role_hierarchy(&closed), closed.clone());
        prop_assert_eq!(parse_ontology(&serialize_ontology(&closed)).unwrap(), closed);
    }

    #[test]
    fn signature_only_grows_by_reserved_names(o in common::ontology()) {
        let n = normalize(&o);
        let (before, _) = o.signature();
        for c in n.concept_names() {
            prop_assert!(before.contains(&c) || c.starts_with(RESERVED_PREFIX), "{c}");
        }
    }
}
