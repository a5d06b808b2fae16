//! Generators for the reduction and simulation ontologies, plus seeded
//! random corpora for tests.
//!
//! Every generator is a pure function of its inputs. Machine-derived names
//! are built from state, symbol and index, and never use the `_nf` prefix
//! reserved for the normalizer.

use std::collections::{BTreeMap, BTreeSet};

use abdl_core::{Concept, Name, Ontology, Statement, RESERVED_PREFIX};

pub mod cqeval;
pub mod dtm;
pub mod machine;
pub mod random;
pub mod rr;
pub mod simulation;
pub mod sym;

pub use cqeval::{alci_normal_form, gen_ca_simple, gen_ra_reduction, NfCi};
pub use dtm::{gen_dag_dtm, gen_quantified_dtm, gen_repfree_dtm, grid_fixture, Grid};
pub use machine::{parse_atm, parse_dtm, AtmSpec, DtmSpec, Move};
pub use rr::{computation_tree, gen_rr_atm};
pub use simulation::{gen_bot_simulation, gen_forall_simulation};
pub use sym::{closure, gen_ca_sym_reduction};

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum GadgetError {
    #[error("the query must be Boolean (no answer variables)")]
    NotBoolean,
    #[error("the query is not connected")]
    Disconnected,
    #[error("the input must be a plain ontology of concept inclusions, found a {0}")]
    NotPlain(&'static str),
    #[error("expected a single role name, found {0}")]
    Roles(String),
    #[error("invalid machine: {0}")]
    Machine(String),
    #[error("machine parse error on line {line}: {message}")]
    MachineSyntax { line: usize, message: String },
    #[error("{0}")]
    Parameter(String),
}

/// A generated ontology together with its goal and the number of
/// statements emitted per family, in emission order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Gadget {
    pub ontology: Ontology,
    pub goal: Concept,
    pub level: Name,
    pub families: Vec<(String, usize)>,
}

impl Gadget {
    pub fn family(&self, name: &str) -> usize {
        self.families.iter().find(|(f, _)| f == name).map(|(_, n)| *n).unwrap_or(0)
    }

    /// `family count` lines followed by the total; stable for golden files.
    pub fn report(&self) -> String {
        let mut s = String::new();
        for (f, n) in &self.families {
            s.push_str(&format!("{f} {n}\n"));
        }
        s.push_str(&format!("total {}\n", self.ontology.statements.len()));
        s
    }
}

/// Collects statements and counts them per family.
#[derive(Default)]
pub(crate) struct Emitter {
    pub statements: Vec<Statement>,
    families: Vec<(String, usize)>,
}

impl Emitter {
    pub fn emit(&mut self, family: &str, s: Statement) {
        self.statements.push(s);
        match self.families.iter_mut().find(|(f, _)| f == family) {
            Some((_, n)) => *n += 1,
            None => self.families.push((family.to_string(), 1)),
        }
    }

    pub fn ci(&mut self, family: &str, level: &str, lhs: Concept, rhs: Concept) {
        self.emit(family, Statement::Ci { level: level.to_string(), lhs, rhs });
    }

    /// `lhs ≡ rhs` as two inclusions.
    pub fn equiv(&mut self, family: &str, level: &str, lhs: Concept, rhs: Concept) {
        self.ci(family, level, lhs.clone(), rhs.clone());
        self.ci(family, level, rhs, lhs);
    }

    pub fn finish(self, semantics: abdl_core::Semantics, goal: Concept, level: &str) -> Gadget {
        let mut ontology = Ontology::new(self.statements);
        ontology.semantics = semantics;
        Gadget { ontology, goal, level: level.to_string(), families: self.families }
    }
}

/// Allocates names that clash neither with each other nor with a given
/// signature.
#[derive(Clone, Debug, Default)]
pub struct Fresh {
    taken: BTreeSet<Name>,
    counters: BTreeMap<Name, usize>,
}

impl Fresh {
    /// Avoids every concept, role and level name of `o`.
    pub fn new(o: &Ontology) -> Self {
        let (c, r) = o.signature();
        let mut taken: BTreeSet<Name> = c.into_iter().chain(r).collect();
        taken.extend(o.levels());
        Fresh { taken, counters: BTreeMap::new() }
    }

    pub fn reserve(&mut self, n: &str) {
        self.taken.insert(n.to_string());
    }

    /// `base` itself if free, otherwise `base_2`, `base_3`, ...
    pub fn name(&mut self, base: &str) -> Name {
        let base = sanitize(base);
        let mut n = base.clone();
        let mut k = 1;
        while self.taken.contains(&n) {
            k += 1;
            n = format!("{base}_{k}");
        }
        self.taken.insert(n.clone());
        n
    }

    /// `base1`, `base2`, ... skipping taken names.
    pub fn numbered(&mut self, base: &str) -> Name {
        let base = sanitize(base);
        let k = self.counters.entry(base.clone()).or_insert(0);
        loop {
            *k += 1;
            let n = format!("{base}{k}");
            if self.taken.insert(n.clone()) {
                return n;
            }
        }
    }
}

fn sanitize(base: &str) -> Name {
    if base.starts_with(RESERVED_PREFIX) {
        format!("g{base}")
    } else {
        base.to_string()
    }
}

pub(crate) fn name(n: &str) -> Concept {
    Concept::name(n)
}
