//! One entry point for satisfiability: goal wrapping, normalization and
//! the choice between the two procedures.

use std::fmt;

use abdl_core::normalize::prepare;
use abdl_core::{Concept, Name, Ontology, Semantics, Statement};

use crate::cr::{sat_cr, CrWitness};
use crate::full::{sat_full, FullConfig, FullWitness};
use crate::{Bounds, SolveError, Verdict};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub enum Fragment {
    /// `Cr` if the only refinements are concept refinements, else `Full`.
    #[default]
    Auto,
    Cr,
    Full,
}

impl fmt::Display for Fragment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Fragment::Auto => "auto",
            Fragment::Cr => "cr",
            Fragment::Full => "full",
        })
    }
}

impl Fragment {
    pub fn resolve(self, o: &Ontology) -> Fragment {
        match self {
            Fragment::Auto if o.is_cr_only() => Fragment::Cr,
            Fragment::Auto => Fragment::Full,
            f => f,
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct SatConfig {
    pub fragment: Fragment,
    /// Elements per mosaic. Defaults to the largest refinement arity for
    /// `cr` (where negative answers are then exact) and to 2 for `full`.
    pub domain: Option<usize>,
    pub tuple: Option<usize>,
    /// Completion-step budget of the full procedure.
    pub budget: Option<usize>,
}

#[derive(Clone, Debug)]
pub enum SatWitness {
    Cr(CrWitness),
    Full(FullWitness),
}

#[derive(Clone, Debug)]
pub struct SatOutcome {
    pub fragment: Fragment,
    pub verdict: Verdict,
    pub bounds: Bounds,
    pub reason: String,
    /// The fresh name standing for the goal concept.
    pub goal_name: Name,
    /// Mosaics generated and surviving (full procedure only).
    pub mosaics: Option<(usize, usize)>,
    pub witness: Option<SatWitness>,
}

fn max_arity(o: &Ontology) -> usize {
    o.statements
        .iter()
        .filter_map(|s| match s {
            Statement::ConceptRef { cq, .. } => Some(cq.vars.len()),
            _ => None,
        })
        .max()
        .unwrap_or(1)
}

/// Decides whether `goal` is satisfiable at `level` w.r.t. `o`.
pub fn sat(o: &Ontology, goal: &Concept, level: &str, cfg: &SatConfig) -> Result<SatOutcome, SolveError> {
    if o.semantics != Semantics::Standard {
        return Err(SolveError::Variant(o.semantics));
    }
    let fragment = cfg.fragment.resolve(o);
    let (p, a0) = prepare(o, goal, level);
    match fragment {
        Fragment::Cr => {
            let bound = cfg.domain.unwrap_or_else(|| max_arity(&p));
            let out = sat_cr(&p, &a0, level, bound)?;
            Ok(SatOutcome {
                fragment,
                verdict: out.verdict,
                bounds: out.bounds,
                reason: out.reason,
                goal_name: a0,
                mosaics: None,
                witness: out.witness.map(SatWitness::Cr),
            })
        }
        _ => {
            let mut fc = FullConfig::new(cfg.domain.unwrap_or(2));
            fc.tuple = cfg.tuple;
            if let Some(b) = cfg.budget {
                fc.max_steps = b;
            }
            let out = sat_full(&p, &a0, level, &fc)?;
            Ok(SatOutcome {
                fragment,
                verdict: out.verdict,
                bounds: out.bounds,
                reason: out.reason,
                goal_name: a0,
                mosaics: Some((out.generated, out.surviving)),
                witness: out.witness.map(SatWitness::Full),
            })
        }
    }
}
