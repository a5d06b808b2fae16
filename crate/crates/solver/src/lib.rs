//! Satisfiability for ontologies with abstraction and refinement: the
//! single-level mosaic procedure for concept refinements only, the
//! multi-level mosaic procedure for the full language, and a bounded
//! model finder used as ground truth.

use std::fmt;

use abdl_core::{Name, Semantics};

pub mod cr;
pub mod dispatch;
pub mod full;
pub mod oracle;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Verdict {
    Sat,
    Unsat,
    Unknown,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Sat => "SAT",
            Verdict::Unsat => "UNSAT",
            Verdict::Unknown => "UNKNOWN",
        })
    }
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum SolveError {
    #[error("statement {0} is not allowed in this fragment ({1})")]
    Fragment(usize, &'static str),
    #[error("the {0} semantics is not supported by the decision procedures")]
    Variant(Semantics),
    #[error("goal level {0} does not occur in the ontology")]
    UnknownGoalLevel(Name),
    #[error("ontology is not in normal form")]
    NotNormal,
    #[error("instance too large: {0}")]
    TooLarge(String),
}

/// Which bound a verdict was obtained under.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Bounds {
    pub domain: usize,
    pub tuple: Option<usize>,
    /// The bound under which the procedure is complete, as text
    /// (it may be astronomically large).
    pub complete_at: String,
    /// Whether a negative answer at this bound is exact.
    pub exact: bool,
}
