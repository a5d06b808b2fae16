//! Model checking of A-interpretations against ontologies, under the
//! standard semantics and the repetition-free, dag and quantified variants,
//! plus the element-duplication construction that removes repetitions from
//! ensembles.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::cq;
use crate::model::{
    validate_interpretation, AInterpretation, Concept, Diagnostic, LevelInterp, Name, Ontology, Role, Semantics,
    Statement,
};
use crate::structure::Structure;

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum CheckError {
    #[error("level {0} is referenced by the statement but absent from the interpretation")]
    MissingLevel(Name),
    #[error("interpretation is not well-formed: {}", .0.iter().map(|d| d.to_string()).collect::<Vec<_>>().join("; "))]
    Invalid(Vec<Diagnostic>),
    #[error("the ontology contains abstraction statements")]
    HasAbstractions,
}

pub fn eval_concept(c: &Concept, s: &Structure) -> Vec<bool> {
    let n = s.size();
    match c {
        Concept::Name(a) => s.concept_ext(a).cloned().unwrap_or_else(|| vec![false; n]),
        Concept::Top => vec![true; n],
        Concept::Bot => vec![false; n],
        Concept::Not(c) => eval_concept(c, s).into_iter().map(|b| !b).collect(),
        Concept::And(a, b) => {
            let (x, y) = (eval_concept(a, s), eval_concept(b, s));
            x.iter().zip(&y).map(|(p, q)| *p && *q).collect()
        }
        Concept::Or(a, b) => {
            let (x, y) = (eval_concept(a, s), eval_concept(b, s));
            x.iter().zip(&y).map(|(p, q)| *p || *q).collect()
        }
        Concept::Exists(r, c) => {
            let inner = eval_concept(c, s);
            (0..n).map(|d| s.successors(r, d).iter().any(|&e| inner[e])).collect()
        }
        Concept::Forall(r, c) => {
            let inner = eval_concept(c, s);
            (0..n).map(|d| s.successors(r, d).iter().all(|&e| inner[e])).collect()
        }
    }
}

/// The element-set view of [`eval_concept`] on a named level.
pub fn eval_concept_level(c: &Concept, li: &LevelInterp) -> BTreeSet<Name> {
    let s = Structure::from_level(li);
    eval_concept(c, &s).iter().enumerate().filter(|(_, b)| **b).map(|(i, _)| li.domain[i].clone()).collect()
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Counterexample {
    LevelAbsent(Name),
    NotFiner { fine: Name, coarse: Name },
    Element { level: Name, elem: Name },
    Pair { level: Name, from: Name, to: Name },
    Tuple { level: Name, elems: Vec<Name> },
    TuplePair { level: Name, left: Vec<Name>, right: Vec<Name> },
}

impl Counterexample {
    pub fn elements(&self) -> Vec<&Name> {
        match self {
            Counterexample::LevelAbsent(_) | Counterexample::NotFiner { .. } => vec![],
            Counterexample::Element { elem, .. } => vec![elem],
            Counterexample::Pair { from, to, .. } => vec![from, to],
            Counterexample::Tuple { elems, .. } => elems.iter().collect(),
            Counterexample::TuplePair { left, right, .. } => left.iter().chain(right).collect(),
        }
    }
}

impl fmt::Display for Counterexample {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Counterexample::LevelAbsent(l) => write!(f, "level {l} absent"),
            Counterexample::NotFiner { fine, coarse } => write!(f, "{fine} is not finer than {coarse}"),
            Counterexample::Element { level, elem } => write!(f, "{elem}@{level}"),
            Counterexample::Pair { level, from, to } => write!(f, "({from}, {to})@{level}"),
            Counterexample::Tuple { level, elems } => write!(f, "[{}]@{level}", elems.join(", ")),
            Counterexample::TuplePair { level, left, right } => {
                write!(f, "[{}; {}]@{level}", left.join(", "), right.join(", "))
            }
        }
    }
}

/// An A-interpretation with every level indexed.
pub struct Indexed<'a> {
    pub interp: &'a AInterpretation,
    pub levels: BTreeMap<Name, Structure>,
    /// element name → (level, index)
    pub index: BTreeMap<Name, (Name, usize)>,
    /// Under the repetition-free variant abstractions only see
    /// repetition-free answers.
    pub variant: Semantics,
}

impl<'a> Indexed<'a> {
    pub fn new(interp: &'a AInterpretation) -> Self {
        let mut levels = BTreeMap::new();
        let mut index = BTreeMap::new();
        for (l, li) in &interp.levels {
            levels.insert(l.clone(), Structure::from_level(li));
            for (i, d) in li.domain.iter().enumerate() {
                index.insert(d.clone(), (l.clone(), i));
            }
        }
        Indexed { interp, levels, index, variant: Semantics::Standard }
    }

    pub fn with_variant(mut self, variant: Semantics) -> Self {
        self.variant = variant;
        self
    }

    fn abstracted(&self, t: &[usize]) -> bool {
        self.variant != Semantics::RepetitionFree || t.iter().collect::<BTreeSet<_>>().len() == t.len()
    }

    fn level(&self, l: &str) -> Result<&Structure, CheckError> {
        self.levels.get(l).ok_or_else(|| CheckError::MissingLevel(l.to_string()))
    }

    fn names(&self, l: &str, tuple: &[usize]) -> Vec<Name> {
        let dom = &self.interp.levels[l].domain;
        tuple.iter().map(|&i| dom[i].clone()).collect()
    }

    /// ρ(d, target) as indices into the target level.
    fn rho(&self, level: &str, d: usize, target: &str) -> Option<Vec<usize>> {
        let name = &self.interp.levels[level].domain[d];
        let tuple = self.interp.rho.get(&(name.clone(), target.to_string()))?;
        tuple.iter().map(|e| self.index.get(e).filter(|(l, _)| l == target).map(|(_, i)| *i)).collect()
    }

    /// Inverse of ρ restricted to elements of `coarse` refining into `fine`.
    fn rho_inverse(&self, coarse: &str, fine: &str) -> BTreeMap<Vec<usize>, Vec<usize>> {
        let mut out: BTreeMap<Vec<usize>, Vec<usize>> = BTreeMap::new();
        if let Some(li) = self.interp.levels.get(coarse) {
            for d in 0..li.domain.len() {
                if let Some(t) = self.rho(coarse, d, fine) {
                    out.entry(t).or_default().push(d);
                }
            }
        }
        out
    }
}

/// Every violation of `s` in deterministic order. Under the
/// repetition-free variant, answers with a repeated element are exempt
/// from abstractions (they could never be ensembles).
pub fn statement_violations(s: &Statement, ix: &Indexed<'_>) -> Result<Vec<Counterexample>, CheckError> {
    let mut out = vec![];
    match s {
        Statement::Ci { level, lhs, rhs } => {
            let Some(st) = ix.levels.get(level) else {
                return Ok(vec![Counterexample::LevelAbsent(level.clone())]);
            };
            let (l, r) = (eval_concept(lhs, st), eval_concept(rhs, st));
            for d in 0..st.size() {
                if l[d] && !r[d] {
                    out.push(Counterexample::Element { level: level.clone(), elem: ix.names(level, &[d]).remove(0) });
                }
            }
        }
        Statement::Ri { level, lhs, rhs } => {
            let Some(st) = ix.levels.get(level) else {
                return Ok(vec![Counterexample::LevelAbsent(level.clone())]);
            };
            for d in 0..st.size() {
                for &e in st.successors(lhs, d) {
                    if !st.has_edge(rhs, d, e) {
                        let n = ix.names(level, &[d, e]);
                        out.push(Counterexample::Pair { level: level.clone(), from: n[0].clone(), to: n[1].clone() });
                    }
                }
            }
        }
        _ => {
            let (fine, coarse) = s.level_pair().unwrap();
            let (fs, cs) = (ix.level(fine)?, ix.level(coarse)?);
            if !ix.interp.prec.contains(&(fine.clone(), coarse.clone())) {
                return Ok(vec![Counterexample::NotFiner { fine: fine.clone(), coarse: coarse.clone() }]);
            }
            match s {
                Statement::ConceptRef { cq, concept, .. } => {
                    let ext = eval_concept(concept, cs);
                    for d in (0..cs.size()).filter(|&d| ext[d]) {
                        let ok = ix.rho(coarse, d, fine).map(|t| cq::is_answer(cq, fs, &t)).unwrap_or(false);
                        if !ok {
                            out.push(Counterexample::Element {
                                level: coarse.clone(),
                                elem: ix.names(coarse, &[d]).remove(0),
                            });
                        }
                    }
                }
                Statement::ConceptAbs { concept, cq, .. } => {
                    let ext = eval_concept(concept, cs);
                    let inv = ix.rho_inverse(coarse, fine);
                    for t in cq::answers(cq, fs).into_iter().filter(|t| ix.abstracted(t)) {
                        let ok = inv.get(&t).map(|ds| ds.iter().any(|&d| ext[d])).unwrap_or(false);
                        if !ok {
                            out.push(Counterexample::Tuple { level: fine.clone(), elems: ix.names(fine, &t) });
                        }
                    }
                }
                Statement::RoleRef { cq, qr, .. } => {
                    let (cx, cy) = (eval_concept(&qr.cx, cs), eval_concept(&qr.cy, cs));
                    for d1 in (0..cs.size()).filter(|&d| cx[d]) {
                        for &d2 in cs.successors(&qr.role, d1) {
                            if !cy[d2] {
                                continue;
                            }
                            let ok = match (ix.rho(coarse, d1, fine), ix.rho(coarse, d2, fine)) {
                                (Some(mut t1), Some(t2)) => {
                                    t1.extend(t2);
                                    cq::is_answer(cq, fs, &t1)
                                }
                                _ => false,
                            };
                            if !ok {
                                let n = ix.names(coarse, &[d1, d2]);
                                out.push(Counterexample::Pair {
                                    level: coarse.clone(),
                                    from: n[0].clone(),
                                    to: n[1].clone(),
                                });
                            }
                        }
                    }
                }
                Statement::RoleAbs { role, cq, .. } => {
                    let inv = ix.rho_inverse(coarse, fine);
                    let k = cq.xs().len();
                    for t in cq::answers(cq, fs).into_iter().filter(|t| ix.abstracted(t)) {
                        let (t1, t2) = t.split_at(k);
                        let ok = match (inv.get(t1), inv.get(t2)) {
                            (Some(a), Some(b)) => a.iter().any(|&d1| b.iter().any(|&d2| cs.has_edge(role, d1, d2))),
                            _ => false,
                        };
                        if !ok {
                            out.push(Counterexample::TuplePair {
                                level: fine.clone(),
                                left: ix.names(fine, t1),
                                right: ix.names(fine, t2),
                            });
                        }
                    }
                }
                _ => unreachable!(),
            }
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StatementCheck {
    pub satisfied: bool,
    pub counterexample: Option<Counterexample>,
}

pub fn check_statement(s: &Statement, i: &AInterpretation) -> Result<StatementCheck, CheckError> {
    let ix = Indexed::new(i);
    let v = statement_violations(s, &ix)?;
    Ok(StatementCheck { satisfied: v.is_empty(), counterexample: v.into_iter().next() })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    pub statement: usize,
    pub counterexample: Counterexample,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "statement {}: {}", self.statement, self.counterexample)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct ModelReport {
    pub violations: Vec<Violation>,
}

impl ModelReport {
    pub fn is_model(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks every statement. The interpretation must be well-formed for the
/// variant; otherwise the structural diagnostics are returned as an error.
pub fn check_model(o: &Ontology, i: &AInterpretation, variant: Semantics) -> Result<ModelReport, CheckError> {
    let diags = validate_interpretation(i, variant);
    if !diags.is_empty() {
        return Err(CheckError::Invalid(diags));
    }
    let ix = Indexed::new(i).with_variant(variant);
    let mut violations = vec![];
    for (k, s) in o.statements.iter().enumerate() {
        for c in statement_violations(s, &ix)? {
            violations.push(Violation { statement: k, counterexample: c });
        }
    }
    Ok(ModelReport { violations })
}

/// Convenience: true iff `i` is a model of `o` and the goal concept is
/// nonempty at the goal level.
pub fn is_model_with_goal(o: &Ontology, i: &AInterpretation, variant: Semantics, goal: Option<(&Concept, &str)>) -> bool {
    let Ok(rep) = check_model(o, i, variant) else { return false };
    if !rep.is_model() {
        return false;
    }
    match goal {
        None => true,
        Some((c, l)) => i.levels.get(l).map(|li| !eval_concept_level(c, li).is_empty()).unwrap_or(false),
    }
}

fn fresh_name(taken: &mut BTreeSet<Name>, base: &str) -> Name {
    for k in 1.. {
        let cand = format!("{base}'{k}");
        if taken.insert(cand.clone()) {
            return cand;
        }
    }
    unreachable!()
}

/// Adds a copy of `e` to its level: same concept names, every edge of `e`
/// duplicated (a loop on `e` yields a loop on the copy and edges both ways),
/// and fresh copies of its ensembles, recursively.
fn copy_deep(i: &mut AInterpretation, taken: &mut BTreeSet<Name>, level: &str, e: &str) -> Name {
    let copy = fresh_name(taken, e);
    let li = i.levels.get_mut(level).unwrap();
    li.domain.push(copy.clone());
    for ext in li.concepts.values_mut() {
        if ext.contains(e) {
            ext.insert(copy.clone());
        }
    }
    for ext in li.roles.values_mut() {
        let mut add = vec![];
        for (a, b) in ext.iter() {
            match (a == e, b == e) {
                (true, true) => {
                    add.push((copy.clone(), copy.clone()));
                    add.push((copy.clone(), e.to_string()));
                    add.push((e.to_string(), copy.clone()));
                }
                (true, false) => add.push((copy.clone(), b.clone())),
                (false, true) => add.push((a.clone(), copy.clone())),
                _ => {}
            }
        }
        ext.extend(add);
    }
    let ensembles: Vec<(Name, Vec<Name>)> = i
        .rho
        .iter()
        .filter(|((d, _), _)| d == e)
        .map(|((_, t), tuple)| (t.clone(), tuple.clone()))
        .collect();
    for (target, tuple) in ensembles {
        let copies: Vec<Name> = tuple.iter().map(|f| copy_deep(i, taken, &target, f)).collect();
        i.rho.insert((copy.clone(), target), copies);
    }
    copy
}

/// Removes repeated elements from ensembles by duplicating elements, so a
/// model of an ontology without abstractions becomes a model under the
/// repetition-free semantics.
pub fn derepetition(i: &AInterpretation, o: &Ontology) -> Result<AInterpretation, CheckError> {
    if o.has_abstractions() {
        return Err(CheckError::HasAbstractions);
    }
    let mut out = i.clone();
    let mut taken: BTreeSet<Name> = out.levels.values().flat_map(|l| l.domain.iter().cloned()).collect();
    loop {
        let found = out.rho.iter().find_map(|(key, tuple)| {
            tuple.iter().find(|e| tuple.iter().filter(|x| x == e).count() > 1).map(|e| (key.clone(), e.clone()))
        });
        let Some(((d0, target), e0)) = found else { break };
        let tuple = out.rho[&(d0.clone(), target.clone())].clone();
        let mut new_tuple = tuple.clone();
        for (pos, x) in tuple.iter().enumerate() {
            if *x == e0 {
                new_tuple[pos] = copy_deep(&mut out, &mut taken, &target, &e0);
            }
        }
        out.rho.insert((d0, target), new_tuple);
    }
    Ok(out)
}

/// Role edges of a named level as index pairs, inverse resolved.
pub fn role_pairs(s: &Structure, r: &Role) -> Vec<(usize, usize)> {
    (0..s.size()).flat_map(|d| s.successors(r, d).iter().map(move |&e| (d, e))).collect()
}
