//! Abstract syntax: roles, concepts, conjunctive queries, statements,
//! ontologies, and A-interpretations, plus their structural validation.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::cq;

pub type Name = String;
pub type Var = String;

/// Names starting with this prefix are reserved for the normalizer.
pub const RESERVED_PREFIX: &str = "_nf";

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Role {
    pub name: Name,
    pub inverse: bool,
}

impl Role {
    pub fn new(name: impl Into<Name>) -> Self {
        Role { name: name.into(), inverse: false }
    }

    pub fn inv(&self) -> Self {
        Role { name: self.name.clone(), inverse: !self.inverse }
    }
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.inverse {
            write!(f, "inv({})", self.name)
        } else {
            f.write_str(&self.name)
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Concept {
    Name(Name),
    Top,
    Bot,
    Not(Box<Concept>),
    And(Box<Concept>, Box<Concept>),
    Or(Box<Concept>, Box<Concept>),
    Exists(Role, Box<Concept>),
    Forall(Role, Box<Concept>),
}

impl Concept {
    pub fn name(n: impl Into<Name>) -> Self {
        Concept::Name(n.into())
    }

    pub fn not(c: Concept) -> Self {
        Concept::Not(Box::new(c))
    }

    pub fn and(a: Concept, b: Concept) -> Self {
        Concept::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Concept, b: Concept) -> Self {
        Concept::Or(Box::new(a), Box::new(b))
    }

    pub fn exists(r: Role, c: Concept) -> Self {
        Concept::Exists(r, Box::new(c))
    }

    pub fn forall(r: Role, c: Concept) -> Self {
        Concept::Forall(r, Box::new(c))
    }

    /// Left-nested conjunction; `Top` for an empty iterator.
    pub fn and_all(cs: impl IntoIterator<Item = Concept>) -> Self {
        cs.into_iter().reduce(Concept::and).unwrap_or(Concept::Top)
    }

    /// Left-nested disjunction; `Bot` for an empty iterator.
    pub fn or_all(cs: impl IntoIterator<Item = Concept>) -> Self {
        cs.into_iter().reduce(Concept::or).unwrap_or(Concept::Bot)
    }

    pub fn as_name(&self) -> Option<&str> {
        match self {
            Concept::Name(n) => Some(n),
            _ => None,
        }
    }

    pub fn size(&self) -> usize {
        match self {
            Concept::Name(_) | Concept::Top | Concept::Bot => 1,
            Concept::Not(c) => 1 + c.size(),
            Concept::And(a, b) | Concept::Or(a, b) => 1 + a.size() + b.size(),
            Concept::Exists(r, c) | Concept::Forall(r, c) => 1 + role_size(r) + c.size(),
        }
    }

    pub fn collect_names(&self, concepts: &mut BTreeSet<Name>, roles: &mut BTreeSet<Name>) {
        match self {
            Concept::Name(n) => {
                concepts.insert(n.clone());
            }
            Concept::Top | Concept::Bot => {}
            Concept::Not(c) => c.collect_names(concepts, roles),
            Concept::And(a, b) | Concept::Or(a, b) => {
                a.collect_names(concepts, roles);
                b.collect_names(concepts, roles);
            }
            Concept::Exists(r, c) | Concept::Forall(r, c) => {
                roles.insert(r.name.clone());
                c.collect_names(concepts, roles);
            }
        }
    }

    /// Negation normal form.
    pub fn nnf(&self) -> Concept {
        match self {
            Concept::Name(_) | Concept::Top | Concept::Bot => self.clone(),
            Concept::And(a, b) => Concept::and(a.nnf(), b.nnf()),
            Concept::Or(a, b) => Concept::or(a.nnf(), b.nnf()),
            Concept::Exists(r, c) => Concept::exists(r.clone(), c.nnf()),
            Concept::Forall(r, c) => Concept::forall(r.clone(), c.nnf()),
            Concept::Not(inner) => match inner.as_ref() {
                Concept::Name(_) => self.clone(),
                Concept::Top => Concept::Bot,
                Concept::Bot => Concept::Top,
                Concept::Not(c) => c.nnf(),
                Concept::And(a, b) => {
                    Concept::or(Concept::not((**a).clone()).nnf(), Concept::not((**b).clone()).nnf())
                }
                Concept::Or(a, b) => {
                    Concept::and(Concept::not((**a).clone()).nnf(), Concept::not((**b).clone()).nnf())
                }
                Concept::Exists(r, c) => Concept::forall(r.clone(), Concept::not((**c).clone()).nnf()),
                Concept::Forall(r, c) => Concept::exists(r.clone(), Concept::not((**c).clone()).nnf()),
            },
        }
    }
}

fn role_size(r: &Role) -> usize {
    if r.inverse {
        2
    } else {
        1
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Atom {
    Concept(Concept, Var),
    Role(Role, Var, Var),
}

impl Atom {
    pub fn vars(&self) -> Vec<&Var> {
        match self {
            Atom::Concept(_, v) => vec![v],
            Atom::Role(_, a, b) => vec![a, b],
        }
    }

    pub fn mentions(&self, v: &str) -> bool {
        self.vars().iter().any(|x| x.as_str() == v)
    }
}

/// A conjunctive query. `vars` are the answer variables in declaration
/// order; for role statements `split` gives the length of the x̄ prefix.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Cq {
    pub vars: Vec<Var>,
    pub split: Option<usize>,
    pub exvars: Vec<Var>,
    pub atoms: Vec<Atom>,
}

impl Cq {
    pub fn new(vars: &[&str], atoms: Vec<Atom>) -> Self {
        Cq { vars: vars.iter().map(|v| v.to_string()).collect(), split: None, exvars: vec![], atoms }
    }

    pub fn new_split(xs: &[&str], ys: &[&str], atoms: Vec<Atom>) -> Self {
        let mut vars: Vec<Var> = xs.iter().map(|v| v.to_string()).collect();
        vars.extend(ys.iter().map(|v| v.to_string()));
        Cq { vars, split: Some(xs.len()), exvars: vec![], atoms }
    }

    /// All variables: answer variables first, then quantified ones.
    pub fn all_vars(&self) -> Vec<Var> {
        self.vars.iter().chain(self.exvars.iter()).cloned().collect()
    }

    pub fn xs(&self) -> &[Var] {
        &self.vars[..self.split.unwrap_or(self.vars.len())]
    }

    pub fn ys(&self) -> &[Var] {
        &self.vars[self.split.unwrap_or(self.vars.len())..]
    }

    pub fn is_full(&self) -> bool {
        self.exvars.is_empty()
    }

    /// Adds `⊤(x)` for every variable that occurs in no atom.
    pub fn cover_vars(&mut self) {
        for v in self.all_vars() {
            if !self.atoms.iter().any(|a| a.mentions(&v)) {
                self.atoms.push(Atom::Concept(Concept::Top, v));
            }
        }
    }

    pub fn size(&self) -> usize {
        let atoms: usize = self
            .atoms
            .iter()
            .map(|a| match a {
                Atom::Concept(c, _) => 1 + c.size() + 1,
                Atom::Role(r, _, _) => 1 + role_size(r) + 2,
            })
            .sum();
        atoms + self.vars.len() + self.exvars.len()
    }
}

/// The query `C1(x) ∧ R(x,y) ∧ C2(y)` on the coarse side of a role refinement.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RoleTriple {
    pub cx: Concept,
    pub role: Role,
    pub cy: Concept,
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Statement {
    Ci { level: Name, lhs: Concept, rhs: Concept },
    Ri { level: Name, lhs: Role, rhs: Role },
    ConceptRef { fine: Name, cq: Cq, coarse: Name, concept: Concept },
    ConceptAbs { coarse: Name, concept: Concept, fine: Name, cq: Cq },
    RoleRef { fine: Name, cq: Cq, coarse: Name, qr: RoleTriple },
    RoleAbs { coarse: Name, role: Role, fine: Name, cq: Cq },
}

impl Statement {
    pub fn levels(&self) -> Vec<&Name> {
        match self {
            Statement::Ci { level, .. } | Statement::Ri { level, .. } => vec![level],
            Statement::ConceptRef { fine, coarse, .. }
            | Statement::ConceptAbs { coarse, fine, .. }
            | Statement::RoleRef { fine, coarse, .. }
            | Statement::RoleAbs { coarse, fine, .. } => vec![fine, coarse],
        }
    }

    /// `(fine, coarse)` for refinement and abstraction statements.
    pub fn level_pair(&self) -> Option<(&Name, &Name)> {
        match self {
            Statement::Ci { .. } | Statement::Ri { .. } => None,
            Statement::ConceptRef { fine, coarse, .. }
            | Statement::ConceptAbs { coarse, fine, .. }
            | Statement::RoleRef { fine, coarse, .. }
            | Statement::RoleAbs { coarse, fine, .. } => Some((fine, coarse)),
        }
    }

    pub fn cq(&self) -> Option<&Cq> {
        match self {
            Statement::ConceptRef { cq, .. }
            | Statement::ConceptAbs { cq, .. }
            | Statement::RoleRef { cq, .. }
            | Statement::RoleAbs { cq, .. } => Some(cq),
            _ => None,
        }
    }

    pub fn is_abstraction(&self) -> bool {
        matches!(self, Statement::ConceptAbs { .. } | Statement::RoleAbs { .. })
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Statement::Ci { .. } => "ci",
            Statement::Ri { .. } => "ri",
            Statement::ConceptRef { .. } => "cref",
            Statement::ConceptAbs { .. } => "cabs",
            Statement::RoleRef { .. } => "rref",
            Statement::RoleAbs { .. } => "rabs",
        }
    }

    pub fn size(&self) -> usize {
        match self {
            Statement::Ci { lhs, rhs, .. } => 2 + lhs.size() + rhs.size(),
            Statement::Ri { lhs, rhs, .. } => 2 + role_size(lhs) + role_size(rhs),
            Statement::ConceptRef { cq, concept, .. } | Statement::ConceptAbs { concept, cq, .. } => {
                3 + cq.size() + concept.size()
            }
            Statement::RoleRef { cq, qr, .. } => {
                // the coarse query C1(x) ∧ R(x,y) ∧ C2(y): three atoms, two variables
                3 + cq.size() + (3 + qr.cx.size() + qr.cy.size() + role_size(&qr.role) + 4 + 2)
            }
            Statement::RoleAbs { role, cq, .. } => 3 + cq.size() + role_size(role),
        }
    }

    pub fn collect_names(&self, concepts: &mut BTreeSet<Name>, roles: &mut BTreeSet<Name>) {
        let cq_names = |cq: &Cq, concepts: &mut BTreeSet<Name>, roles: &mut BTreeSet<Name>| {
            for a in &cq.atoms {
                match a {
                    Atom::Concept(c, _) => c.collect_names(concepts, roles),
                    Atom::Role(r, _, _) => {
                        roles.insert(r.name.clone());
                    }
                }
            }
        };
        match self {
            Statement::Ci { lhs, rhs, .. } => {
                lhs.collect_names(concepts, roles);
                rhs.collect_names(concepts, roles);
            }
            Statement::Ri { lhs, rhs, .. } => {
                roles.insert(lhs.name.clone());
                roles.insert(rhs.name.clone());
            }
            Statement::ConceptRef { cq, concept, .. } | Statement::ConceptAbs { concept, cq, .. } => {
                concept.collect_names(concepts, roles);
                cq_names(cq, concepts, roles);
            }
            Statement::RoleRef { cq, qr, .. } => {
                qr.cx.collect_names(concepts, roles);
                qr.cy.collect_names(concepts, roles);
                roles.insert(qr.role.name.clone());
                cq_names(cq, concepts, roles);
            }
            Statement::RoleAbs { role, cq, .. } => {
                roles.insert(role.name.clone());
                cq_names(cq, concepts, roles);
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub enum Semantics {
    #[default]
    Standard,
    RepetitionFree,
    Dag,
    Quantified,
}

impl Semantics {
    pub fn keyword(self) -> &'static str {
        match self {
            Semantics::Standard => "standard",
            Semantics::RepetitionFree => "repetition-free",
            Semantics::Dag => "dag",
            Semantics::Quantified => "quantified",
        }
    }

    pub fn from_keyword(s: &str) -> Option<Self> {
        Some(match s {
            "standard" => Semantics::Standard,
            "repetition-free" => Semantics::RepetitionFree,
            "dag" => Semantics::Dag,
            "quantified" => Semantics::Quantified,
            _ => return None,
        })
    }
}

impl fmt::Display for Semantics {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.keyword())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Ontology {
    pub statements: Vec<Statement>,
    pub semantics: Semantics,
}

impl Ontology {
    pub fn new(statements: Vec<Statement>) -> Self {
        Ontology { statements, semantics: Semantics::Standard }
    }

    pub fn push(&mut self, s: Statement) {
        self.statements.push(s);
    }

    /// The level set A_O.
    pub fn levels(&self) -> BTreeSet<Name> {
        self.statements.iter().flat_map(|s| s.levels()).cloned().collect()
    }

    pub fn concept_names(&self) -> BTreeSet<Name> {
        self.signature().0
    }

    pub fn role_names(&self) -> BTreeSet<Name> {
        self.signature().1
    }

    pub fn signature(&self) -> (BTreeSet<Name>, BTreeSet<Name>) {
        let mut c = BTreeSet::new();
        let mut r = BTreeSet::new();
        for s in &self.statements {
            s.collect_names(&mut c, &mut r);
        }
        (c, r)
    }

    /// True when the only refinement/abstraction statements are concept refinements.
    pub fn is_cr_only(&self) -> bool {
        self.statements
            .iter()
            .all(|s| matches!(s, Statement::Ci { .. } | Statement::Ri { .. } | Statement::ConceptRef { .. }))
    }

    pub fn has_abstractions(&self) -> bool {
        self.statements.iter().any(|s| s.is_abstraction())
    }
}

/// ||O|| under the node-count metric.
pub fn ontology_size(o: &Ontology) -> usize {
    o.statements.iter().map(Statement::size).sum()
}

/// Smallest relation with `(fine, coarse)` for every refinement and abstraction.
pub fn derived_prec(o: &Ontology) -> BTreeSet<(Name, Name)> {
    o.statements
        .iter()
        .filter_map(|s| s.level_pair())
        .map(|(f, c)| (f.clone(), c.clone()))
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Rule {
    Disconnected,
    QuantifiedVars,
    UncoveredVar,
    UndeclaredVar,
    DuplicateVar,
    SplitShape,
    EmptyTuple,
    SameLevel,
    DuplicateElement,
    UnknownElement,
    UnknownLevel,
    NotTree,
    Cyclic,
    RhoLevel,
    RhoEmpty,
    Star,
    Repetition,
}

impl Rule {
    /// Conditions that a well-typed structure can fail as an
    /// A-interpretation (tree/DAG shape, (*), repetitions), as opposed to
    /// dangling references.
    pub fn is_semantic(self) -> bool {
        matches!(self, Rule::NotTree | Rule::Cyclic | Rule::Star | Rule::Repetition)
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Rule::Disconnected => "abstraction CQ is not connected",
            Rule::QuantifiedVars => "quantified variables outside the quantified variant",
            Rule::UncoveredVar => "answer variable occurs in no atom",
            Rule::UndeclaredVar => "atom uses an undeclared variable",
            Rule::DuplicateVar => "variable declared twice",
            Rule::SplitShape => "answer tuple split does not fit the statement kind",
            Rule::EmptyTuple => "empty answer tuple",
            Rule::SameLevel => "fine and coarse level coincide",
            Rule::DuplicateElement => "element occurs twice (domains must be disjoint)",
            Rule::UnknownElement => "reference to an unknown element",
            Rule::UnknownLevel => "reference to an unknown level",
            Rule::NotTree => "level graph is not a tree",
            Rule::Cyclic => "level graph has a cycle",
            Rule::RhoLevel => "rho target level is not finer than the element's level",
            Rule::RhoEmpty => "rho maps to the empty tuple",
            Rule::Star => "element occurs in two ensembles (condition (*))",
            Rule::Repetition => "ensemble repeats an element",
        };
        f.write_str(s)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Diagnostic {
    /// Statement index for ontology diagnostics.
    pub statement: Option<usize>,
    pub rule: Rule,
    pub detail: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.statement {
            Some(i) => write!(f, "statement {i}: {}", self.rule)?,
            None => write!(f, "{}", self.rule)?,
        }
        if !self.detail.is_empty() {
            write!(f, " ({})", self.detail)?;
        }
        Ok(())
    }
}

fn diag(statement: Option<usize>, rule: Rule, detail: impl Into<String>) -> Diagnostic {
    Diagnostic { statement, rule, detail: detail.into() }
}

pub fn validate_ontology(o: &Ontology) -> Vec<Diagnostic> {
    let mut out = vec![];
    for (i, s) in o.statements.iter().enumerate() {
        if let Some((fine, coarse)) = s.level_pair() {
            if fine == coarse {
                out.push(diag(Some(i), Rule::SameLevel, fine.clone()));
            }
        }
        let Some(q) = s.cq() else { continue };
        let role_stmt = matches!(s, Statement::RoleRef { .. } | Statement::RoleAbs { .. });
        validate_cq(i, q, role_stmt, o.semantics, &mut out);
        if s.is_abstraction() && !cq::is_connected(q) {
            out.push(diag(Some(i), Rule::Disconnected, ""));
        }
    }
    out
}

fn validate_cq(i: usize, q: &Cq, role_stmt: bool, sem: Semantics, out: &mut Vec<Diagnostic>) {
    let all = q.all_vars();
    let mut seen = BTreeSet::new();
    for v in &all {
        if !seen.insert(v) {
            out.push(diag(Some(i), Rule::DuplicateVar, v.clone()));
        }
    }
    match (role_stmt, q.split) {
        (true, Some(k)) if k >= 1 && k < q.vars.len() => {}
        (true, _) => out.push(diag(Some(i), Rule::SplitShape, "role statements need x̄;ȳ, both nonempty")),
        (false, None) => {}
        (false, Some(_)) => out.push(diag(Some(i), Rule::SplitShape, "concept statements take one tuple")),
    }
    if q.vars.is_empty() {
        out.push(diag(Some(i), Rule::EmptyTuple, ""));
    }
    if !q.exvars.is_empty() && sem != Semantics::Quantified {
        out.push(diag(Some(i), Rule::QuantifiedVars, q.exvars.join(",")));
    }
    for a in &q.atoms {
        for v in a.vars() {
            if !seen.contains(v) {
                out.push(diag(Some(i), Rule::UndeclaredVar, v.clone()));
            }
        }
    }
    for v in &all {
        if !q.atoms.iter().any(|a| a.mentions(v)) {
            out.push(diag(Some(i), Rule::UncoveredVar, v.clone()));
        }
    }
}

/// One level of an A-interpretation. Elements are named; names are unique
/// across the whole A-interpretation, which keeps domains disjoint.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct LevelInterp {
    pub domain: Vec<Name>,
    pub concepts: BTreeMap<Name, BTreeSet<Name>>,
    pub roles: BTreeMap<Name, BTreeSet<(Name, Name)>>,
}

impl LevelInterp {
    pub fn with_domain<S: Into<Name>>(elems: impl IntoIterator<Item = S>) -> Self {
        LevelInterp { domain: elems.into_iter().map(Into::into).collect(), ..Default::default() }
    }

    pub fn add_concept(&mut self, c: &str, d: &str) {
        self.concepts.entry(c.to_string()).or_default().insert(d.to_string());
    }

    pub fn add_role(&mut self, r: &str, d: &str, e: &str) {
        self.roles.entry(r.to_string()).or_default().insert((d.to_string(), e.to_string()));
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct AInterpretation {
    pub levels: BTreeMap<Name, LevelInterp>,
    /// Pairs `(L, L')` meaning `L ≺ L'` (L is finer).
    pub prec: BTreeSet<(Name, Name)>,
    /// `ρ(d, L)`, keyed by element name and target level.
    pub rho: BTreeMap<(Name, Name), Vec<Name>>,
}

impl AInterpretation {
    pub fn level_of(&self, d: &str) -> Option<&Name> {
        self.levels.iter().find(|(_, li)| li.domain.iter().any(|e| e == d)).map(|(l, _)| l)
    }

    pub fn level_mut(&mut self, l: &str) -> &mut LevelInterp {
        self.levels.entry(l.to_string()).or_default()
    }

    pub fn element_count(&self) -> usize {
        self.levels.values().map(|l| l.domain.len()).sum()
    }
}

/// Shape of the level graph `(levels, {(L', L) | L ≺ L'})`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LevelGraphShape {
    pub cyclic: bool,
    /// Levels with more than one coarser level.
    pub multi_parent: Vec<Name>,
    pub roots: usize,
}

impl LevelGraphShape {
    pub fn is_tree(&self) -> bool {
        self.is_forest() && self.roots <= 1
    }

    pub fn is_forest(&self) -> bool {
        !self.cyclic && self.multi_parent.is_empty()
    }
}

pub fn level_graph_shape<'a>(
    levels: impl IntoIterator<Item = &'a Name>,
    prec: &'a BTreeSet<(Name, Name)>,
) -> LevelGraphShape {
    let levels: BTreeSet<&Name> = levels.into_iter().chain(prec.iter().flat_map(|(a, b)| [a, b])).collect();
    let mut parents: BTreeMap<&Name, usize> = BTreeMap::new();
    for (fine, _) in prec {
        *parents.entry(fine).or_default() += 1;
    }
    // iterated removal of levels without remaining finer levels
    let mut remaining = levels.clone();
    loop {
        let removable: Vec<&Name> = remaining
            .iter()
            .copied()
            .filter(|l| !prec.iter().any(|(f, c)| c == *l && remaining.contains(f)))
            .collect();
        if removable.is_empty() {
            break;
        }
        for l in removable {
            remaining.remove(l);
        }
    }
    LevelGraphShape {
        cyclic: !remaining.is_empty(),
        multi_parent: parents.iter().filter(|(_, n)| **n > 1).map(|(l, _)| (*l).clone()).collect(),
        roots: levels.iter().filter(|l| !parents.contains_key(*l)).count(),
    }
}

fn check_level_graph(levels: &BTreeSet<&Name>, prec: &BTreeSet<(Name, Name)>, dag: bool) -> Vec<Diagnostic> {
    let shape = level_graph_shape(levels.iter().copied(), prec);
    let mut out = vec![];
    if shape.cyclic {
        out.push(diag(None, Rule::Cyclic, ""));
        return out;
    }
    if dag {
        return out;
    }
    for l in &shape.multi_parent {
        out.push(diag(None, Rule::NotTree, format!("{l} has several coarser levels")));
    }
    if shape.roots > 1 {
        out.push(diag(None, Rule::NotTree, format!("{} roots", shape.roots)));
    }
    out
}

pub fn validate_interpretation(i: &AInterpretation, variant: Semantics) -> Vec<Diagnostic> {
    let mut out = vec![];
    let mut owner: BTreeMap<&Name, &Name> = BTreeMap::new();
    for (l, li) in &i.levels {
        for d in &li.domain {
            if let Some(prev) = owner.insert(d, l) {
                out.push(diag(None, Rule::DuplicateElement, format!("{d} in {prev} and {l}")));
            }
        }
    }
    for (l, li) in &i.levels {
        let local: BTreeSet<&Name> = li.domain.iter().collect();
        for (c, ext) in &li.concepts {
            for d in ext {
                if !local.contains(d) {
                    out.push(diag(None, Rule::UnknownElement, format!("{d} in {c}@{l}")));
                }
            }
        }
        for (r, ext) in &li.roles {
            for (d, e) in ext {
                for x in [d, e] {
                    if !local.contains(x) {
                        out.push(diag(None, Rule::UnknownElement, format!("{x} in {r}@{l}")));
                    }
                }
            }
        }
    }
    let levels: BTreeSet<&Name> = i.levels.keys().collect();
    for (f, c) in &i.prec {
        for l in [f, c] {
            if !levels.contains(l) {
                out.push(diag(None, Rule::UnknownLevel, l.clone()));
            }
        }
    }
    out.extend(check_level_graph(&levels, &i.prec, variant == Semantics::Dag));

    // (*): per element, at most one ensemble containing it; under the dag
    // variant the count is taken per coarse level.
    let mut occurs: BTreeMap<(&Name, Option<&Name>), BTreeSet<&Name>> = BTreeMap::new();
    for ((d, target), tuple) in &i.rho {
        let Some(ld) = owner.get(d) else {
            out.push(diag(None, Rule::UnknownElement, format!("rho source {d}")));
            continue;
        };
        if !i.prec.contains(&(target.clone(), (*ld).clone())) {
            out.push(diag(None, Rule::RhoLevel, format!("rho({d}, {target})")));
        }
        if tuple.is_empty() {
            out.push(diag(None, Rule::RhoEmpty, format!("rho({d}, {target})")));
        }
        for e in tuple {
            if owner.get(e).map(|l| *l != target).unwrap_or(true) {
                out.push(diag(None, Rule::UnknownElement, format!("{e} in rho({d}, {target}) is not in {target}")));
            }
            let scope = if variant == Semantics::Dag { Some(*ld) } else { None };
            occurs.entry((e, scope)).or_default().insert(d);
        }
        if variant == Semantics::RepetitionFree {
            let distinct: BTreeSet<&Name> = tuple.iter().collect();
            if distinct.len() != tuple.len() {
                out.push(diag(None, Rule::Repetition, format!("rho({d}, {target})")));
            }
        }
    }
    for ((e, _), sources) in occurs {
        if sources.len() > 1 {
            let s: Vec<&str> = sources.iter().map(|s| s.as_str()).collect();
            out.push(diag(None, Rule::Star, format!("{e} occurs in ensembles of {}", s.join(","))));
        }
    }
    out
}

