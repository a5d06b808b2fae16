//! Text formats: fixtures and random ontologies survive a round trip, and
//! no input makes the parsers panic.

mod common;

use std::fs;
use std::path::PathBuf;

use abdl_core::syntax::{
    concept_to_string, cq_to_string, parse_concept, parse_cq, parse_interpretation, parse_ontology, serialize_interpretation,
    serialize_ontology,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn fixtures() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

fn fixture_texts(ext: &str) -> Vec<(String, String)> {
    let mut out: Vec<(String, String)> = fs::read_dir(fixtures())
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == ext))
        .map(|p| (p.display().to_string(), fs::read_to_string(&p).unwrap()))
        .collect();
    out.sort();
    out
}

#[test]
fn fixture_ontologies_round_trip() {
    let texts = fixture_texts("abdl");
    assert!(texts.len() >= 5);
    for (path, text) in texts {
        let o = parse_ontology(&text).unwrap_or_else(|e| panic!("{path}: {e}"));
        let back = parse_ontology(&serialize_ontology(&o)).unwrap();
        assert_eq!(back, o, "{path}");
    }
}

#[test]
fn fixture_interpretations_round_trip() {
    let texts = fixture_texts("abint");
    assert!(!texts.is_empty());
    for (path, text) in texts {
        let i = parse_interpretation(&text).unwrap_or_else(|e| panic!("{path}: {e}"));
        assert_eq!(parse_interpretation(&serialize_interpretation(&i)).unwrap(), i, "{path}");
    }
}

#[test]
fn precedence_and_inverses() {
    let c = parse_concept("A and not B or exists inv(r). (C and top)").unwrap();
    assert_eq!(concept_to_string(&c), "A and not B or exists inv(r) . (C and top)");
    let q = parse_cq("exvars z { r(z, z), A(z) }").unwrap();
    assert!(q.vars.is_empty());
    assert_eq!(parse_cq(&cq_to_string(&q)).unwrap(), q);
}

#[test]
fn reserved_names_need_the_header() {
    let text = "ci L: _nf1 sqsubseteq A .";
    assert!(parse_ontology(text).is_err());
    let o = parse_ontology(&format!("normalized .\n{text}")).unwrap();
    assert_eq!(parse_ontology(&serialize_ontology(&o)).unwrap(), o);
}

#[test]
fn errors_carry_positions() {
    let e = parse_ontology("ci L: A sqsubseteq .\n").unwrap_err().to_string();
    assert!(e.contains("1:"), "{e}");
}

/// Random bytes biased towards the characters of the grammar.
fn noise(rng: &mut ChaCha8Rng) -> String {
    const ALPHABET: &[u8] = b"ABCLrsxyz_'-.,:;(){}[]<=# \n\tcirefabsvarsexvarsnotandorexistsforalltopbotsqsubseteqinvlevelfinerconceptrolerho";
    let len = rng.gen_range(0..80);
    let bytes: Vec<u8> = (0..len)
        .map(|_| if rng.gen_bool(0.9) { ALPHABET[rng.gen_range(0..ALPHABET.len())] } else { rng.gen() })
        .collect();
    String::from_utf8_lossy(&bytes).into_owned()
}

#[test]
fn fuzz_parsers_do_not_panic() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xabd1);
    let seeds: Vec<String> = fixture_texts("abdl").into_iter().chain(fixture_texts("abint")).map(|(_, t)| t).collect();
    for round in 0..10_000 {
        let text = if round % 2 == 0 {
            noise(&mut rng)
        } else {
            // mutate a fixture: splice noise at a random char boundary
            let base = &seeds[rng.gen_range(0..seeds.len())];
            let cut: Vec<usize> = base.char_indices().map(|(i, _)| i).collect();
            let at = cut[rng.gen_range(0..cut.len())];
            let end = cut[rng.gen_range(0..cut.len())].max(at);
            format!("{}{}{}", &base[..at], noise(&mut rng), &base[end..])
        };
        let _ = parse_ontology(&text);
        let _ = parse_interpretation(&text);
        let _ = parse_concept(&text);
        let _ = parse_cq(&text);
    }
}

proptest! {
    #[test]
    fn concepts_round_trip(c in common::concept()) {
        prop_assert_eq!(parse_concept(&concept_to_string(&c)).unwrap(), c);
    }

    #[test]
    fn ontologies_round_trip(o in common::ontology()) {
        let text = serialize_ontology(&o);
        let back = parse_ontology(&text).map_err(|e| TestCaseError::fail(format!("{e}\n{text}")))?;
        prop_assert_eq!(back, o);
    }
}
