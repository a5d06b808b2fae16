//! Mosaic elimination for the full language: concept and role refinements
//! and abstractions across a forest of levels.
//!
//! A mosaic is a small slice through an A-interpretation spanning all
//! levels, together with sets `f_in`/`f_out` of forbidden (partial) query
//! matches that stop abstraction queries from matching across mosaics.
//! Enumerating every mosaic up to the complete bound is hopeless (the
//! bound is doubly exponential), so mosaics are generated on demand:
//!
//! * seeds (the goal, one element per level, partners for existentials not
//!   witnessed internally) are completed under the local rules: concept
//!   and role inclusions, fresh ensembles for refinements, abstracting
//!   elements for abstraction matches. Completion branches on `¬B ⊑ A`
//!   and on which ensemble positions coincide;
//! * `f_out` always holds every component, the most restrictive choice;
//! * `f_in` grows when an edge candidate demands it, giving variants.
//!
//! Elimination then runs over the generated set. Every mosaic is checked
//! against the mosaic conditions and every edge candidate against the edge
//! conditions before use, and the soundness argument only needs each
//! survivor to be good within the survivors, so a positive answer holds
//! at any bound. A negative answer only means no witness set was found.

use std::cell::RefCell;
use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt;
use std::rc::Rc;

use abdl_core::check::{statement_violations, Indexed};
use abdl_core::cq::{self, canonical, components_wrt, restrict, subqueries_for_forbidden};
use abdl_core::normalize::is_normal;
use abdl_core::structure::Structure;
use abdl_core::syntax::cq_to_string;
use abdl_core::{
    derived_prec, level_graph_shape, ontology_size, AInterpretation, Atom, Concept, Cq, LevelInterp, Name, Ontology,
    Role, Semantics, Statement, Var,
};

use crate::cr::set_partitions;
use crate::{Bounds, SolveError, Verdict};

#[derive(Clone, Debug, Default)]
struct LevelRules {
    top: Vec<Name>,
    conj: Vec<(Name, Name, Name)>,
    /// A ⊑ ¬B as (A, B)
    neg_r: Vec<(Name, Name)>,
    /// ¬B ⊑ A as (B, A)
    neg_l: Vec<(Name, Name)>,
    /// A ⊑ ∃R.B
    ex_r: Vec<(Name, Role, Name)>,
    /// ∃S.A ⊑ B as (S, A, B)
    ex_l: Vec<(Role, Name, Name)>,
    /// transitive and inverse-closed, without the reflexive pairs
    ris: BTreeSet<(Role, Role)>,
}

impl LevelRules {
    fn sub(&self, r: &Role, s: &Role) -> bool {
        r == s || self.ris.contains(&(r.clone(), s.clone()))
    }
}

#[derive(Clone, Debug)]
struct ConceptRule {
    stmt: usize,
    fine: usize,
    coarse: usize,
    concept: Name,
    cq: Cq,
}

#[derive(Clone, Debug)]
struct RoleRef {
    stmt: usize,
    fine: usize,
    coarse: usize,
    cx: Name,
    role: Role,
    cy: Name,
    cq: Cq,
}

#[derive(Clone, Debug)]
struct RoleAbs {
    stmt: usize,
    fine: usize,
    coarse: usize,
    role: Role,
    cq: Cq,
}

type CanonEntry = Rc<(Cq, Vec<Var>, Vec<Vec<usize>>)>;

/// A normalized, role-closed ontology, preprocessed per level.
#[derive(Debug)]
pub struct FullProblem {
    pub levels: Vec<Name>,
    level_ix: BTreeMap<Name, usize>,
    /// (fine, coarse) level indices
    pub prec: BTreeSet<(usize, usize)>,
    /// ρ tuples are at most this long
    pub tuple_bound: usize,
    statements: Vec<Statement>,
    rules: Vec<LevelRules>,
    crefs: Vec<ConceptRule>,
    cabs: Vec<ConceptRule>,
    rrefs: Vec<RoleRef>,
    rabs: Vec<RoleAbs>,
    universe: BTreeSet<Cq>,
    canon: RefCell<HashMap<Cq, CanonEntry>>,
}

fn fragment_check(o: &Ontology) -> Result<(), SolveError> {
    if o.semantics != Semantics::Standard {
        return Err(SolveError::Variant(o.semantics));
    }
    if !is_normal(o) {
        return Err(SolveError::NotNormal);
    }
    for (k, s) in o.statements.iter().enumerate() {
        if s.cq().is_some_and(|q| !q.exvars.is_empty()) {
            return Err(SolveError::Fragment(k, "quantified variables"));
        }
    }
    Ok(())
}

fn name_of(c: &Concept) -> Name {
    c.as_name().expect("normal form").to_string()
}

impl FullProblem {
    pub fn new(o: &Ontology, goal: Option<(&str, &str)>) -> Result<Self, SolveError> {
        fragment_check(o)?;
        let mut names = o.levels();
        if let Some((_, l)) = goal {
            names.insert(l.to_string());
        }
        let levels: Vec<Name> = names.into_iter().collect();
        let level_ix: BTreeMap<Name, usize> = levels.iter().enumerate().map(|(i, l)| (l.clone(), i)).collect();
        let ix = |l: &Name| level_ix[l];
        let prec = derived_prec(o).iter().map(|(f, c)| (ix(f), ix(c))).collect();
        let mut rules = vec![LevelRules::default(); levels.len()];
        let (mut crefs, mut cabs, mut rrefs, mut rabs) = (vec![], vec![], vec![], vec![]);
        for (stmt, s) in o.statements.iter().enumerate() {
            match s {
                Statement::Ci { level, lhs, rhs } => {
                    let r = &mut rules[ix(level)];
                    match (lhs, rhs) {
                        (Concept::Top, b) => r.top.push(name_of(b)),
                        (Concept::Name(a), Concept::Exists(role, b)) => r.ex_r.push((a.clone(), role.clone(), name_of(b))),
                        (Concept::Exists(role, a), b) => r.ex_l.push((role.clone(), name_of(a), name_of(b))),
                        (Concept::And(a, b), c) => r.conj.push((name_of(a), name_of(b), name_of(c))),
                        (Concept::Name(a), Concept::Not(b)) => r.neg_r.push((a.clone(), name_of(b))),
                        (Concept::Not(b), a) => r.neg_l.push((name_of(b), name_of(a))),
                        _ => unreachable!("checked normal"),
                    }
                }
                Statement::Ri { level, lhs, rhs } => {
                    let r = &mut rules[ix(level)];
                    r.ris.insert((lhs.clone(), rhs.clone()));
                    r.ris.insert((lhs.inv(), rhs.inv()));
                }
                Statement::ConceptRef { fine, cq, coarse, concept } => crefs.push(ConceptRule {
                    stmt,
                    fine: ix(fine),
                    coarse: ix(coarse),
                    concept: name_of(concept),
                    cq: cq.clone(),
                }),
                Statement::ConceptAbs { coarse, concept, fine, cq } => cabs.push(ConceptRule {
                    stmt,
                    fine: ix(fine),
                    coarse: ix(coarse),
                    concept: name_of(concept),
                    cq: cq.clone(),
                }),
                Statement::RoleRef { fine, cq, coarse, qr } => rrefs.push(RoleRef {
                    stmt,
                    fine: ix(fine),
                    coarse: ix(coarse),
                    cx: name_of(&qr.cx),
                    role: qr.role.clone(),
                    cy: name_of(&qr.cy),
                    cq: cq.clone(),
                }),
                Statement::RoleAbs { coarse, role, fine, cq } => {
                    rabs.push(RoleAbs { stmt, fine: ix(fine), coarse: ix(coarse), role: role.clone(), cq: cq.clone() })
                }
            }
        }
        for r in &mut rules {
            loop {
                let add: Vec<(Role, Role)> = r
                    .ris
                    .iter()
                    .flat_map(|(a, b)| r.ris.iter().filter(move |(b2, _)| b2 == b).map(move |(_, c)| (a.clone(), c.clone())))
                    .filter(|(a, c)| a != c && !r.ris.contains(&(a.clone(), c.clone())))
                    .collect();
                if add.is_empty() {
                    break;
                }
                r.ris.extend(add);
            }
            r.ris.retain(|(a, b)| a != b);
        }
        Ok(FullProblem {
            levels,
            level_ix,
            prec,
            tuple_bound: ontology_size(o).max(1),
            statements: o.statements.clone(),
            rules,
            crefs,
            cabs,
            rrefs,
            rabs,
            universe: subqueries_for_forbidden(o),
            canon: RefCell::new(HashMap::new()),
        })
    }

    pub fn level_index(&self, l: &str) -> Option<usize> {
        self.level_ix.get(l).copied()
    }

    fn canonical(&self, q: &Cq) -> CanonEntry {
        if let Some(e) = self.canon.borrow().get(q) {
            return e.clone();
        }
        let c = canonical(q);
        let autos = automorphisms(&c.query);
        let e = Rc::new((c.query, c.renaming, autos));
        self.canon.borrow_mut().insert(q.clone(), e.clone());
        e
    }

    /// The forbidden-match key for `(q, h)`: the query in canonical form
    /// and `h` minimal over the automorphisms of that form.
    pub fn key(&self, level: usize, q: &Cq, h: &BTreeMap<Var, usize>) -> Forbidden {
        let e = self.canonical(q);
        let (query, renaming, autos) = &*e;
        let base: Vec<Option<usize>> = renaming.iter().map(|v| h.get(v).copied()).collect();
        let best = autos
            .iter()
            .map(|perm| {
                let mut v = vec![None; base.len()];
                for (i, &p) in perm.iter().enumerate() {
                    v[p] = base[i];
                }
                v
            })
            .min()
            .unwrap_or(base);
        let h = best.into_iter().enumerate().filter_map(|(i, e)| e.map(|e| (format!("v{i}"), e))).collect();
        Forbidden { level, query: query.clone(), h }
    }
}

fn rename_atom(a: &Atom, f: &dyn Fn(&Var) -> Var) -> Atom {
    match a {
        Atom::Concept(c, v) => Atom::Concept(c.clone(), f(v)),
        Atom::Role(r, x, y) => Atom::Role(r.clone(), f(x), f(y)),
    }
}

fn permutations(items: &[usize]) -> Vec<Vec<usize>> {
    if items.len() <= 1 {
        return vec![items.to_vec()];
    }
    let mut out = vec![];
    for i in 0..items.len() {
        let mut rest = items.to_vec();
        let x = rest.remove(i);
        for mut p in permutations(&rest) {
            p.insert(0, x);
            out.push(p);
        }
    }
    out
}

/// Variable permutations (`perm[i]` = image of `v{i}`) mapping the atoms of
/// a canonical query onto themselves; only the identity beyond 7 variables.
fn automorphisms(q: &Cq) -> Vec<Vec<usize>> {
    let n = q.vars.len();
    let id: Vec<usize> = (0..n).collect();
    if n > 7 {
        return vec![id];
    }
    let atoms: BTreeSet<Atom> = q.atoms.iter().cloned().collect();
    let ix = |v: &Var| v[1..].parse::<usize>().unwrap();
    permutations(&id)
        .into_iter()
        .filter(|perm| {
            let f = |v: &Var| format!("v{}", perm[ix(v)]);
            q.atoms.iter().all(|a| atoms.contains(&rename_atom(a, &f)))
        })
        .collect()
}

/// A forbidden (partial) match: a query in canonical form at a level and a
/// partial assignment of its variables to mosaic elements.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Forbidden {
    pub level: usize,
    pub query: Cq,
    pub h: BTreeMap<Var, usize>,
}

impl fmt::Display for Forbidden {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}@{} {}", cq_to_string(&self.query), self.level, show_h(&self.h))
    }
}

/// A mosaic. Elements are numbered globally; `level[d]` is the level index
/// of `d`, `edges` holds role-name pairs, `rho` maps `(d, finer level)` to
/// the tuple `d` refines into.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FullMosaic {
    pub level: Vec<usize>,
    pub labels: Vec<BTreeSet<Name>>,
    pub edges: BTreeSet<(Name, usize, usize)>,
    pub rho: BTreeMap<(usize, usize), Vec<usize>>,
    pub f_in: BTreeSet<Forbidden>,
    pub f_out: BTreeSet<Forbidden>,
}

fn orient(r: &Role, a: usize, b: usize) -> (Name, usize, usize) {
    if r.inverse {
        (r.name.clone(), b, a)
    } else {
        (r.name.clone(), a, b)
    }
}

/// One level of a mosaic as a structure; `ids[local] = global`.
struct View {
    s: Structure,
    ids: Vec<usize>,
    local: HashMap<usize, usize>,
}

impl View {
    fn homs(&self, q: &Cq, seed: &BTreeMap<Var, usize>) -> Vec<BTreeMap<Var, usize>> {
        let mut local = BTreeMap::new();
        for (v, e) in seed {
            match self.local.get(e) {
                Some(&i) => local.insert(v.clone(), i),
                None => return vec![],
            };
        }
        let vars = q.all_vars();
        cq::homomorphisms(q, &self.s, &local)
            .into_iter()
            .map(|h| vars.iter().cloned().zip(h.into_iter().map(|i| self.ids[i])).collect())
            .collect()
    }

    fn answers(&self, q: &Cq) -> Vec<Vec<usize>> {
        cq::answers(q, &self.s).into_iter().map(|t| t.into_iter().map(|i| self.ids[i]).collect()).collect()
    }
}

impl FullMosaic {
    pub fn len(&self) -> usize {
        self.level.len()
    }

    pub fn is_empty(&self) -> bool {
        self.level.is_empty()
    }

    /// A mosaic with one element at `level`, labelled `label`.
    pub fn single(level: usize, label: impl IntoIterator<Item = Name>) -> Self {
        let mut m = FullMosaic::default();
        m.add_elem(level, label.into_iter().collect());
        m
    }

    pub fn elems_at(&self, l: usize) -> impl Iterator<Item = usize> + '_ {
        (0..self.len()).filter(move |&d| self.level[d] == l)
    }

    pub fn add_elem(&mut self, l: usize, label: BTreeSet<Name>) -> usize {
        self.level.push(l);
        self.labels.push(label);
        self.level.len() - 1
    }

    pub fn has(&self, d: usize, c: &str) -> bool {
        self.labels[d].contains(c)
    }

    pub fn has_pair(&self, r: &Role, a: usize, b: usize) -> bool {
        self.edges.contains(&orient(r, a, b))
    }

    pub fn add_pair(&mut self, r: &Role, a: usize, b: usize) -> bool {
        self.edges.insert(orient(r, a, b))
    }

    /// All `r`-pairs, for a possibly inverse role.
    pub fn pairs(&self, r: &Role) -> Vec<(usize, usize)> {
        self.edges
            .iter()
            .filter(|(n, _, _)| *n == r.name)
            .map(|&(_, a, b)| if r.inverse { (b, a) } else { (a, b) })
            .collect()
    }

    fn view(&self, l: usize) -> View {
        let ids: Vec<usize> = self.elems_at(l).collect();
        let local: HashMap<usize, usize> = ids.iter().enumerate().map(|(i, &d)| (d, i)).collect();
        let mut s = Structure::new(ids.len());
        for (i, &d) in ids.iter().enumerate() {
            for c in &self.labels[d] {
                s.add_concept(c, i);
            }
        }
        for (r, a, b) in &self.edges {
            if let (Some(&i), Some(&j)) = (local.get(a), local.get(b)) {
                s.add_edge(r, i, j);
            }
        }
        View { s, ids, local }
    }

    /// The elements abstracting `t` from `fine`.
    fn abstracting(&self, fine: usize, t: &[usize]) -> Option<usize> {
        self.rho.iter().find(|((_, l), u)| *l == fine && u.as_slice() == t).map(|((d, _), _)| *d)
    }

    /// Could `t` become ρ of a new element without breaking (*) or the
    /// tuple bound?
    fn can_abstract(&self, fine: usize, t: &[usize], bound: usize) -> bool {
        t.len() <= bound && !self.rho.iter().any(|((_, l), u)| *l == fine && u.iter().any(|e| t.contains(e)))
    }

    /// The mosaic as an A-interpretation, elements named `e0, e1, ...`.
    pub fn to_interpretation(&self, p: &FullProblem) -> AInterpretation {
        let name = |d: usize| format!("e{d}");
        let mut i = AInterpretation::default();
        for (l, ln) in p.levels.iter().enumerate() {
            let mut li = LevelInterp::with_domain(self.elems_at(l).map(name));
            for d in self.elems_at(l) {
                for c in &self.labels[d] {
                    li.add_concept(c, &name(d));
                }
            }
            i.levels.insert(ln.clone(), li);
        }
        for (r, a, b) in &self.edges {
            let l = &p.levels[self.level[*a]];
            i.level_mut(l).add_role(r, &name(*a), &name(*b));
        }
        i.prec = p.prec.iter().map(|&(f, c)| (p.levels[f].clone(), p.levels[c].clone())).collect();
        for ((d, l), t) in &self.rho {
            i.rho.insert((name(*d), p.levels[*l].clone()), t.iter().map(|&e| name(e)).collect());
        }
        i
    }
}

impl fmt::Display for FullMosaic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for d in 0..self.len() {
            let ls: Vec<&str> = self.labels[d].iter().map(String::as_str).collect();
            write!(f, "e{d}@{}{{{}}} ", self.level[d], ls.join(","))?;
        }
        for (r, a, b) in &self.edges {
            write!(f, "{r}(e{a},e{b}) ")?;
        }
        for ((d, l), t) in &self.rho {
            let t: Vec<String> = t.iter().map(|e| format!("e{e}")).collect();
            write!(f, "rho(e{d},{l})=[{}] ", t.join(","))?;
        }
        write!(f, "|f_in|={} |f_out|={}", self.f_in.len(), self.f_out.len())
    }
}

/// A violated mosaic or edge-candidate condition.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Diagnostic {
    /// "structure", "universe", or the condition number (primed for the
    /// mirrored edge conditions)
    pub condition: String,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "condition {}: {}", self.condition, self.message)
    }
}

fn diag(condition: impl Into<String>, message: impl Into<String>) -> Diagnostic {
    Diagnostic { condition: condition.into(), message: message.into() }
}

/// A partial match that has to be forbidden: one of `options` (its
/// components) must be in `f_out`; no options means it cannot be.
struct Requirement {
    condition: &'static str,
    what: String,
    options: Vec<Forbidden>,
}

fn subsets(vars: &[Var]) -> impl Iterator<Item = BTreeSet<Var>> + '_ {
    (0u32..(1 << vars.len()))
        .map(move |mask| vars.iter().enumerate().filter(|(i, _)| mask & (1 << i) != 0).map(|(_, v)| v.clone()).collect())
}

fn components_of(p: &FullProblem, level: usize, q: &Cq, v: &BTreeSet<Var>, h: &BTreeMap<Var, usize>) -> Vec<Forbidden> {
    components_wrt(q, v)
        .expect("variables of q")
        .into_iter()
        .map(|c| {
            let vars: BTreeSet<Var> = c.query.all_vars().into_iter().collect();
            let hc = h.iter().filter(|(x, _)| vars.contains(*x)).map(|(x, e)| (x.clone(), *e)).collect();
            p.key(level, &c.query, &hc)
        })
        .collect()
}

fn show_h(h: &BTreeMap<Var, usize>) -> String {
    let parts: Vec<String> = h.iter().map(|(v, e)| format!("{v}->e{e}")).collect();
    format!("[{}]", parts.join(", "))
}

/// The partial matches conditions 2–4 require to be forbidden.
fn requirements(p: &FullProblem, m: &FullMosaic) -> Vec<Requirement> {
    let mut out = vec![];
    let mut views: HashMap<usize, View> = HashMap::new();
    let mut abs: Vec<(&'static str, usize, usize, &Cq)> =
        p.cabs.iter().map(|a| ("2", a.stmt, a.fine, &a.cq)).collect();
    abs.extend(p.rabs.iter().map(|a| ("3", a.stmt, a.fine, &a.cq)));
    for (condition, stmt, fine, q) in abs {
        let view = views.entry(fine).or_insert_with(|| m.view(fine));
        let vars = q.all_vars();
        let xs: BTreeSet<Var> = q.xs().iter().cloned().collect();
        let ys: BTreeSet<Var> = q.ys().iter().cloned().collect();
        for v in subsets(&vars) {
            if v.is_empty() || v.len() == vars.len() || (condition == "3" && (v == xs || v == ys)) {
                continue;
            }
            let qv = restrict(q, &v);
            for h in view.homs(&qv, &BTreeMap::new()) {
                out.push(Requirement {
                    condition,
                    what: format!("statement {stmt}, partial match {}", show_h(&h)),
                    options: components_of(p, fine, q, &v, &h),
                });
            }
        }
    }
    for f in &m.f_in {
        let view = views.entry(f.level).or_insert_with(|| m.view(f.level));
        let vars = f.query.all_vars();
        for v in subsets(&vars) {
            if !f.h.keys().all(|x| v.contains(x)) {
                continue;
            }
            let qv = restrict(&f.query, &v);
            for g in view.homs(&qv, &f.h) {
                let options =
                    if v.len() == vars.len() { vec![] } else { components_of(p, f.level, &f.query, &v, &g) };
                out.push(Requirement {
                    condition: "4",
                    what: format!("forbidden incoming {f} extends to {}", show_h(&g)),
                    options,
                });
            }
        }
    }
    out
}

/// The most restrictive `f_out`: every component of every requirement.
/// Fails if some match cannot be forbidden (an `f_in` query matches
/// completely).
pub fn derive_f_out(p: &FullProblem, m: &FullMosaic) -> Result<BTreeSet<Forbidden>, String> {
    let mut out = BTreeSet::new();
    for r in requirements(p, m) {
        if r.options.is_empty() {
            return Err(r.what);
        }
        out.extend(r.options);
    }
    Ok(out)
}

/// Every violated mosaic condition of `m`. Condition 1 is checked by the
/// model checker on the mosaic as an A-interpretation, skipping the CIs
/// `A ⊑ ∃R.B`, whose witnesses may lie in other mosaics.
pub fn check_mosaic_conditions(p: &FullProblem, m: &FullMosaic) -> Vec<Diagnostic> {
    let mut out = vec![];
    let n = m.len();
    if m.labels.len() != n {
        return vec![diag("structure", "labels and levels differ in length")];
    }
    if let Some(d) = (0..n).find(|&d| m.level[d] >= p.levels.len()) {
        return vec![diag("structure", format!("e{d} has no level"))];
    }
    for (r, a, b) in &m.edges {
        if *a >= n || *b >= n || m.level[*a] != m.level[*b] {
            return vec![diag("structure", format!("edge {r}(e{a},e{b}) is not within one level"))];
        }
    }
    let mut owner: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    for ((d, l), t) in &m.rho {
        if *d >= n || !p.prec.contains(&(*l, m.level[*d])) {
            out.push(diag("structure", format!("rho(e{d}, {l}) does not point to a finer level")));
            continue;
        }
        if t.is_empty() || t.len() > p.tuple_bound || t.iter().any(|&e| e >= n || m.level[e] != *l) {
            out.push(diag("structure", format!("rho(e{d}, {l}) is not a tuple over level {l} of length <= {}", p.tuple_bound)));
            continue;
        }
        for &e in t {
            if let Some(d2) = owner.insert((e, *l), *d) {
                if d2 != *d {
                    out.push(diag("structure", format!("e{e} is refined from both e{d2} and e{d}")));
                }
            }
        }
    }
    if !out.is_empty() {
        return out;
    }
    let interp = m.to_interpretation(p);
    let ix = Indexed::new(&interp);
    for (k, s) in p.statements.iter().enumerate() {
        if matches!(s, Statement::Ci { rhs: Concept::Exists(..), .. }) {
            continue;
        }
        match statement_violations(s, &ix) {
            Ok(cs) => out.extend(cs.into_iter().map(|c| diag("1", format!("statement {k} violated at {c}")))),
            Err(e) => out.push(diag("1", format!("statement {k}: {e}"))),
        }
    }
    for r in requirements(p, m) {
        if !r.options.iter().any(|f| m.f_out.contains(f)) {
            out.push(diag(r.condition, format!("{}: no component in f_out", r.what)));
        }
    }
    for f in m.f_in.iter().chain(&m.f_out) {
        if !p.universe.contains(&f.query) || f.level >= p.levels.len() || f.h.values().any(|&e| e >= n) {
            out.push(diag("universe", format!("{f} is not a subquery match of an abstraction")));
        }
    }
    out
}

/// An element of one of the two mosaics of an edge candidate: side 0 is
/// `M`, side 1 is `M'`.
pub type Node = (u8, usize);

/// A role-name pair between the two mosaics.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CrossEdge {
    pub role: Name,
    pub from: Node,
    pub to: Node,
}

pub type EdgeCandidate = BTreeSet<CrossEdge>;

fn cross(r: &Role, a: Node, b: Node) -> CrossEdge {
    if r.inverse {
        CrossEdge { role: r.name.clone(), from: b, to: a }
    } else {
        CrossEdge { role: r.name.clone(), from: a, to: b }
    }
}

fn cross_pairs(e: &EdgeCandidate, r: &Role) -> Vec<(Node, Node)> {
    e.iter().filter(|x| x.role == r.name).map(|x| if r.inverse { (x.to, x.from) } else { (x.from, x.to) }).collect()
}

pub fn mirror(e: &EdgeCandidate) -> EdgeCandidate {
    e.iter()
        .map(|x| CrossEdge { role: x.role.clone(), from: (1 - x.from.0, x.from.1), to: (1 - x.to.0, x.to.1) })
        .collect()
}

fn primed(base: &str, side: u8) -> String {
    if side == 0 {
        base.to_string()
    } else {
        format!("{base}'")
    }
}

struct Pair<'a> {
    p: &'a FullProblem,
    m: [&'a FullMosaic; 2],
}

impl Pair<'_> {
    fn level(&self, n: Node) -> usize {
        self.m[n.0 as usize].level[n.1]
    }

    fn has(&self, n: Node, c: &str) -> bool {
        self.m[n.0 as usize].has(n.1, c)
    }

    fn rho(&self, n: Node, fine: usize) -> Option<Vec<Node>> {
        self.m[n.0 as usize].rho.get(&(n.1, fine)).map(|t| t.iter().map(|&e| (n.0, e)).collect())
    }

    /// Role-inclusion consequences missing from `e` (condition 1).
    fn ri_demands(&self, e: &EdgeCandidate) -> BTreeSet<CrossEdge> {
        let mut out = BTreeSet::new();
        for x in e {
            let rules = &self.p.rules[self.level(x.from)];
            for (r, s) in &rules.ris {
                if r.name != x.role {
                    continue;
                }
                let (a, b) = if r.inverse { (x.to, x.from) } else { (x.from, x.to) };
                let y = cross(s, a, b);
                if !e.contains(&y) {
                    out.insert(y);
                }
            }
        }
        out
    }

    /// Conditions 4/4': edges forced by role refinements over edges of `e`.
    fn rref_demands(&self, e: &EdgeCandidate, out: &mut Vec<(CrossEdge, String)>, diags: &mut Vec<Diagnostic>) {
        for rr in &self.p.rrefs {
            for (u, v) in cross_pairs(e, &rr.role) {
                if self.level(u) != rr.coarse || !self.has(u, &rr.cx) || !self.has(v, &rr.cy) {
                    continue;
                }
                let c = |x: &str| format!("{}({x})", primed("4", u.0));
                let what = format!("statement {} over {}(e{}, e{})", rr.stmt, rr.role, u.1, v.1);
                let (Some(tu), Some(tv)) = (self.rho(u, rr.fine), self.rho(v, rr.fine)) else {
                    diags.push(diag(c("a"), format!("{what}: rho undefined")));
                    continue;
                };
                let (xs, ys) = (rr.cq.xs(), rr.cq.ys());
                if tu.len() != xs.len() || tv.len() != ys.len() {
                    diags.push(diag(c("a"), format!("{what}: rho has the wrong length")));
                    continue;
                }
                let h: BTreeMap<&Var, Node> = xs.iter().zip(tu).chain(ys.iter().zip(tv)).collect();
                let mut ok = true;
                for a in &rr.cq.atoms {
                    match a {
                        Atom::Concept(Concept::Name(cn), x) => ok &= self.has(h[x], cn),
                        Atom::Concept(..) => {}
                        Atom::Role(r, x, y) => {
                            let (nx, ny) = (h[x], h[y]);
                            if nx.0 == ny.0 {
                                ok &= self.m[nx.0 as usize].has_pair(r, nx.1, ny.1);
                            } else {
                                let want = cross(r, nx, ny);
                                if !e.contains(&want) {
                                    out.push((want, c("c")));
                                }
                            }
                        }
                    }
                }
                if !ok {
                    diags.push(diag(c("b"), format!("{what}: rho tuples are not matches of the query halves")));
                }
            }
        }
    }

    /// Conditions 5/5': edges forced by role abstractions of matches that
    /// cross through `e`.
    fn rabs_demands(&self, e: &EdgeCandidate, out: &mut Vec<(CrossEdge, String)>, diags: &mut Vec<Diagnostic>) {
        for ra in &self.p.rabs {
            let (xs, ys) = (ra.cq.xs(), ra.cq.ys());
            let qx = restrict(&ra.cq, &xs.iter().cloned().collect());
            let qy = restrict(&ra.cq, &ys.iter().cloned().collect());
            let crossing: Vec<(&Role, &Var, &Var)> = ra
                .cq
                .atoms
                .iter()
                .filter_map(|a| match a {
                    Atom::Role(r, x, y) if xs.contains(x) != xs.contains(y) => Some((r, x, y)),
                    _ => None,
                })
                .collect();
            for sx in [0u8, 1] {
                let sy = 1 - sx;
                let hx = self.m[sx as usize].view(ra.fine).homs(&qx, &BTreeMap::new());
                let hy = self.m[sy as usize].view(ra.fine).homs(&qy, &BTreeMap::new());
                for h in &hx {
                    for g in &hy {
                        let node = |v: &Var| h.get(v).map(|&d| (sx, d)).unwrap_or_else(|| (sy, g[v]));
                        if !crossing.iter().all(|(r, x, y)| e.contains(&cross(r, node(x), node(y)))) {
                            continue;
                        }
                        let tx: Vec<usize> = xs.iter().map(|v| h[v]).collect();
                        let ty: Vec<usize> = ys.iter().map(|v| g[v]).collect();
                        let d = self.m[sx as usize].abstracting(ra.fine, &tx);
                        let d2 = self.m[sy as usize].abstracting(ra.fine, &ty);
                        match (d, d2) {
                            (Some(d), Some(d2)) if self.m[sx as usize].level[d] == ra.coarse => {
                                let want = cross(&ra.role, (sx, d), (sy, d2));
                                if !e.contains(&want) {
                                    out.push((want, primed("5", sx)));
                                }
                            }
                            _ => diags.push(diag(
                                primed("5", sx),
                                format!("statement {}: crossing match {tx:?}/{ty:?} has no abstracting elements", ra.stmt),
                            )),
                        }
                    }
                }
            }
        }
    }

    /// Conditions 2/2': `∃S.A ⊑ B` over the edges of `e`.
    fn exists_violations(&self, e: &EdgeCandidate) -> Vec<Diagnostic> {
        let mut out = vec![];
        for (l, rules) in self.p.rules.iter().enumerate() {
            for (s, a, b) in &rules.ex_l {
                for (u, v) in cross_pairs(e, s) {
                    if self.level(u) == l && self.has(v, a) && !self.has(u, b) {
                        out.push(diag(primed("2", u.0), format!("e{} lacks {b} over {s}(e{}, e{})", u.1, u.1, v.1)));
                    }
                }
            }
        }
        out
    }

    /// Conditions 3/3': forbidden outgoing matches of one side that `e`
    /// continues into the other side must be forbidden incoming there.
    fn transfers(&self, e: &EdgeCandidate) -> [BTreeSet<Forbidden>; 2] {
        let mut need = [BTreeSet::new(), BTreeSet::new()];
        for sx in [0u8, 1] {
            let sy = 1 - sx;
            let other = self.m[sy as usize];
            for f in &self.m[sx as usize].f_out {
                let vars = f.query.all_vars();
                let vbar: BTreeSet<Var> = vars.iter().filter(|v| !f.h.contains_key(*v)).cloned().collect();
                let eq: Vec<(&Role, &Var, &Var)> = f
                    .query
                    .atoms
                    .iter()
                    .filter_map(|a| match a {
                        Atom::Role(r, x, y) if f.h.contains_key(x) != f.h.contains_key(y) => Some((r, x, y)),
                        _ => None,
                    })
                    .collect();
                let w: Vec<&Var> =
                    vbar.iter().filter(|v| eq.iter().any(|(_, x, y)| x == v || y == v)).collect();
                let cands: Vec<usize> = other.elems_at(f.level).collect();
                let rest = restrict(&f.query, &vbar);
                let mut g = vec![0usize; w.len()];
                loop {
                    if w.len() > 0 && cands.is_empty() {
                        break;
                    }
                    let asg: BTreeMap<Var, usize> = w.iter().map(|v| (*v).clone()).zip(g.iter().map(|&i| cands[i])).collect();
                    let node = |v: &Var| f.h.get(v).map(|&d| (sx, d)).unwrap_or_else(|| (sy, asg[v]));
                    if eq.iter().all(|(r, x, y)| e.contains(&cross(r, node(x), node(y)))) {
                        need[sy as usize].insert(self.p.key(f.level, &rest, &asg));
                    }
                    // next assignment
                    let mut k = 0;
                    while k < g.len() {
                        g[k] += 1;
                        if g[k] < cands.len() {
                            break;
                        }
                        g[k] = 0;
                        k += 1;
                    }
                    if k == g.len() {
                        break;
                    }
                }
            }
        }
        need
    }
}

/// Every violated edge-candidate condition of `e` between `m` and `m2`.
pub fn check_edge_candidate(p: &FullProblem, e: &EdgeCandidate, m: &FullMosaic, m2: &FullMosaic) -> Vec<Diagnostic> {
    let pair = Pair { p, m: [m, m2] };
    let valid = |n: Node| n.0 < 2 && n.1 < pair.m[n.0 as usize].len();
    for x in e {
        if !valid(x.from) || !valid(x.to) || x.from.0 == x.to.0 || pair.level(x.from) != pair.level(x.to) {
            return vec![diag("structure", format!("{x:?} does not join two elements of one level across the mosaics"))];
        }
    }
    let mut out = vec![];
    for x in pair.ri_demands(e) {
        out.push(diag("1", format!("missing {}(({}, e{}), ({}, e{}))", x.role, x.from.0, x.from.1, x.to.0, x.to.1)));
    }
    out.extend(pair.exists_violations(e));
    let need = pair.transfers(e);
    for side in 0..2 {
        for f in need[side].difference(&pair.m[side].f_in) {
            out.push(diag(primed("3", 1 - side as u8), format!("{f} missing from f_in")));
        }
    }
    let mut forced = vec![];
    pair.rref_demands(e, &mut forced, &mut out);
    pair.rabs_demands(e, &mut forced, &mut out);
    for (x, c) in forced {
        out.push(diag(c, format!("missing {}(({}, e{}), ({}, e{}))", x.role, x.from.0, x.from.1, x.to.0, x.to.1)));
    }
    out.sort();
    out
}

/// The least edge candidate containing `seed` that is closed under the
/// forcing conditions (1, 4/4', 5/5'), with the `f_in` entries each side
/// needs (3/3'). Fails if no edge candidate contains `seed`.
pub fn close_edge_candidate(
    p: &FullProblem,
    m: &FullMosaic,
    m2: &FullMosaic,
    seed: CrossEdge,
) -> Result<(EdgeCandidate, [BTreeSet<Forbidden>; 2]), Diagnostic> {
    let pair = Pair { p, m: [m, m2] };
    let mut e: EdgeCandidate = BTreeSet::from([seed]);
    loop {
        let mut forced = vec![];
        let mut diags = vec![];
        pair.rref_demands(&e, &mut forced, &mut diags);
        pair.rabs_demands(&e, &mut forced, &mut diags);
        if let Some(d) = diags.into_iter().next() {
            return Err(d);
        }
        let mut add = pair.ri_demands(&e);
        add.extend(forced.into_iter().map(|(x, _)| x));
        if add.is_empty() {
            break;
        }
        e.extend(add);
    }
    if let Some(d) = pair.exists_violations(&e).into_iter().next() {
        return Err(d);
    }
    let need = pair.transfers(&e);
    Ok((e, need))
}

/// `d` at its level carries `A` but no internal `R`-successor in `B`,
/// for some `A ⊑ ∃R.B`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Obligation {
    pub elem: usize,
    pub role: Role,
    pub target: Name,
}

pub fn obligations(p: &FullProblem, m: &FullMosaic) -> Vec<Obligation> {
    let mut out = BTreeSet::new();
    for d in 0..m.len() {
        for (a, r, b) in &p.rules[m.level[d]].ex_r {
            if m.has(d, a) && !m.pairs(r).iter().any(|&(x, y)| x == d && m.has(y, b)) {
                out.insert(Obligation { elem: d, role: r.clone(), target: b.clone() });
            }
        }
    }
    out.into_iter().collect()
}

/// An edge candidate discharging an obligation: partner mosaic (an index
/// into the pool), the partner element, and the edges.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Witness {
    pub partner: usize,
    pub elem: usize,
    pub edges: EdgeCandidate,
}

type Need = [BTreeSet<Forbidden>; 2];

/// A partner element and edge candidate for `ob`, or the `f_in` entries
/// the first closable candidate lacks.
fn find_witness(p: &FullProblem, m: &FullMosaic, ob: &Obligation, m2: &FullMosaic) -> Result<(usize, EdgeCandidate), Option<Need>> {
    let mut missing = None;
    let l = m.level[ob.elem];
    for d2 in m2.elems_at(l).filter(|&d2| m2.has(d2, &ob.target)) {
        let Ok((e, need)) = close_edge_candidate(p, m, m2, cross(&ob.role, (0, ob.elem), (1, d2))) else { continue };
        if need[0].is_subset(&m.f_in) && need[1].is_subset(&m2.f_in) {
            return Ok((d2, e));
        }
        missing.get_or_insert(need);
    }
    Err(missing)
}

/// Is every obligation of `m` discharged by an edge candidate to some
/// mosaic of `pool`?
pub fn is_good_full(p: &FullProblem, m: &FullMosaic, pool: &[FullMosaic]) -> bool {
    obligations(p, m).iter().all(|ob| pool.iter().any(|m2| find_witness(p, m, ob, m2).is_ok()))
}

enum Step {
    Changed,
    Done,
    Dead,
    Split(Vec<FullMosaic>),
}

/// Copies of `m` where `d` refines into a fresh tuple of arity `k` at
/// `fine`, one per way of letting positions coincide (up to arity 3).
fn fresh_ensembles(m: &FullMosaic, d: usize, fine: usize, k: usize) -> Vec<FullMosaic> {
    let parts = if k <= 3 { set_partitions(k, k) } else { vec![(0..k).collect()] };
    parts
        .into_iter()
        .map(|blocks| {
            let mut m2 = m.clone();
            let nb = blocks.iter().max().map_or(0, |b| b + 1);
            let ids: Vec<usize> = (0..nb).map(|_| m2.add_elem(fine, BTreeSet::new())).collect();
            m2.rho.insert((d, fine), blocks.iter().map(|&b| ids[b]).collect());
            m2
        })
        .collect()
}

fn add_atoms(m: &mut FullMosaic, q: &Cq, h: &BTreeMap<&Var, usize>) -> bool {
    let mut changed = false;
    for a in &q.atoms {
        match a {
            Atom::Concept(Concept::Name(c), x) => changed |= m.labels[h[x]].insert(c.clone()),
            Atom::Concept(..) => {}
            Atom::Role(r, x, y) => changed |= m.add_pair(r, h[x], h[y]),
        }
    }
    changed
}

fn label_step(p: &FullProblem, m: &mut FullMosaic) -> Option<Step> {
    for d in 0..m.len() {
        let rules = &p.rules[m.level[d]];
        let mut add: Vec<Name> = rules.top.iter().filter(|a| !m.has(d, a)).cloned().collect();
        for (a, b, c) in &rules.conj {
            if m.has(d, a) && m.has(d, b) && !m.has(d, c) {
                add.push(c.clone());
            }
        }
        for (s, a, b) in &rules.ex_l {
            if !m.has(d, b) && m.pairs(s).iter().any(|&(x, y)| x == d && m.has(y, a)) {
                add.push(b.clone());
            }
        }
        if !add.is_empty() {
            m.labels[d].extend(add);
            return Some(Step::Changed);
        }
        if rules.neg_r.iter().any(|(a, b)| m.has(d, a) && m.has(d, b)) {
            return Some(Step::Dead);
        }
        if let Some((b, a)) = rules.neg_l.iter().find(|(b, a)| !m.has(d, b) && !m.has(d, a)) {
            let (mut m1, mut m2) = (m.clone(), m.clone());
            m1.labels[d].insert(b.clone());
            m2.labels[d].insert(a.clone());
            return Some(Step::Split(vec![m1, m2]));
        }
    }
    let mut changed = false;
    for (r, a, b) in m.edges.clone() {
        for (lhs, rhs) in &p.rules[m.level[a]].ris {
            if lhs.name == r {
                let (x, y) = if lhs.inverse { (b, a) } else { (a, b) };
                changed |= m.add_pair(rhs, x, y);
            }
        }
    }
    changed.then_some(Step::Changed)
}

fn refinement_step(p: &FullProblem, bound: usize, m: &mut FullMosaic) -> Option<Step> {
    let mut changed = false;
    for d in 0..m.len() {
        let trig: Vec<&ConceptRule> = p.crefs.iter().filter(|r| r.coarse == m.level[d] && m.has(d, &r.concept)).collect();
        for r in &trig {
            let k = r.cq.vars.len();
            let Some(t) = m.rho.get(&(d, r.fine)).cloned() else {
                if k > bound || trig.iter().any(|r2| r2.fine == r.fine && r2.cq.vars.len() != k) {
                    return Some(Step::Dead);
                }
                return Some(Step::Split(fresh_ensembles(m, d, r.fine, k)));
            };
            if t.len() != k {
                return Some(Step::Dead);
            }
            changed |= add_atoms(m, &r.cq, &r.cq.vars.iter().zip(t).collect());
        }
    }
    for rr in &p.rrefs {
        for (u, v) in m.pairs(&rr.role) {
            if m.level[u] != rr.coarse || !m.has(u, &rr.cx) || !m.has(v, &rr.cy) {
                continue;
            }
            let (xs, ys) = (rr.cq.xs(), rr.cq.ys());
            for (e, k) in [(u, xs.len()), (v, ys.len())] {
                match m.rho.get(&(e, rr.fine)) {
                    None if k > bound => return Some(Step::Dead),
                    None => return Some(Step::Split(fresh_ensembles(m, e, rr.fine, k))),
                    Some(t) if t.len() != k => return Some(Step::Dead),
                    Some(_) => {}
                }
            }
            let h: BTreeMap<&Var, usize> = xs
                .iter()
                .zip(m.rho[&(u, rr.fine)].clone())
                .chain(ys.iter().zip(m.rho[&(v, rr.fine)].clone()))
                .collect();
            changed |= add_atoms(m, &rr.cq, &h);
        }
    }
    changed.then_some(Step::Changed)
}

/// Finds or creates the element abstracting `t`; None if (*) or the tuple
/// bound forbid a new one.
fn abstract_tuple(m: &mut FullMosaic, coarse: usize, fine: usize, t: &[usize], bound: usize) -> Option<usize> {
    if let Some(d) = m.abstracting(fine, t) {
        return (m.level[d] == coarse).then_some(d);
    }
    if !m.can_abstract(fine, t, bound) {
        return None;
    }
    let d = m.add_elem(coarse, BTreeSet::new());
    m.rho.insert((d, fine), t.to_vec());
    Some(d)
}

fn abstraction_step(p: &FullProblem, bound: usize, m: &mut FullMosaic) -> Option<Step> {
    for a in &p.cabs {
        for t in m.view(a.fine).answers(&a.cq) {
            let n = m.len();
            let Some(d) = abstract_tuple(m, a.coarse, a.fine, &t, bound) else { return Some(Step::Dead) };
            if m.labels[d].insert(a.concept.clone()) || m.len() > n {
                return Some(Step::Changed);
            }
        }
    }
    for a in &p.rabs {
        let k = a.cq.xs().len();
        for t in m.view(a.fine).answers(&a.cq) {
            let Some(d1) = abstract_tuple(m, a.coarse, a.fine, &t[..k], bound) else { return Some(Step::Dead) };
            let Some(d2) = abstract_tuple(m, a.coarse, a.fine, &t[k..], bound) else { return Some(Step::Dead) };
            if m.add_pair(&a.role, d1, d2) {
                return Some(Step::Changed);
            }
        }
    }
    None
}

fn step(p: &FullProblem, cfg: &FullConfig, m: &mut FullMosaic) -> Step {
    if m.len() > cfg.domain {
        return Step::Dead;
    }
    let bound = p.tuple_bound.min(cfg.tuple.unwrap_or(usize::MAX));
    label_step(p, m)
        .or_else(|| refinement_step(p, bound, m))
        .or_else(|| abstraction_step(p, bound, m))
        .unwrap_or(Step::Done)
}

/// Canonical numbering: colour refinement on levels, labels, edges and ρ,
/// then the least relabelling over permutations within colour classes
/// (when there are few enough of them).
fn canonicalize(p: &FullProblem, m: &FullMosaic) -> FullMosaic {
    let n = m.len();
    fn rank<T: Ord + Clone>(sigs: &[T]) -> Vec<usize> {
        let mut sorted = sigs.to_vec();
        sorted.sort();
        sorted.dedup();
        sigs.iter().map(|s| sorted.binary_search(s).unwrap()).collect()
    }
    let mut col = rank(&(0..n).map(|d| (m.level[d], m.labels[d].clone())).collect::<Vec<_>>());
    for _ in 0..n {
        let sigs: Vec<_> = (0..n)
            .map(|d| {
                let mut out: Vec<(&Name, usize)> =
                    m.edges.iter().filter(|(_, a, _)| *a == d).map(|(r, _, b)| (r, col[*b])).collect();
                let mut inc: Vec<(&Name, usize)> =
                    m.edges.iter().filter(|(_, _, b)| *b == d).map(|(r, a, _)| (r, col[*a])).collect();
                let own: Vec<(usize, Vec<usize>)> =
                    m.rho.iter().filter(|((x, _), _)| *x == d).map(|((_, l), t)| (*l, t.iter().map(|&e| col[e]).collect())).collect();
                let mut mem: Vec<(usize, usize, usize)> = m
                    .rho
                    .iter()
                    .flat_map(|((x, l), t)| {
                        let cx = col[*x];
                        t.iter().enumerate().filter(|(_, &e)| e == d).map(move |(i, _)| (*l, i, cx))
                    })
                    .collect();
                out.sort();
                inc.sort();
                mem.sort();
                (col[d], out, inc, own, mem)
            })
            .collect();
        let next = rank(&sigs);
        let classes = |c: &[usize]| c.iter().collect::<BTreeSet<_>>().len();
        let done = classes(&next) == classes(&col);
        col = next;
        if done {
            break;
        }
    }
    let mut classes: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for d in 0..n {
        classes.entry(col[d]).or_default().push(d);
    }
    let classes: Vec<Vec<usize>> = classes.into_values().collect();
    let count = classes.iter().try_fold(1usize, |acc, c| acc.checked_mul((1..=c.len()).product::<usize>()));
    let orders: Vec<Vec<usize>> = match count {
        Some(k) if k <= 720 => classes.iter().fold(vec![vec![]], |acc, c| {
            let perms = permutations(c);
            acc.iter()
                .flat_map(|prefix| {
                    perms.iter().map(move |pm| {
                        let mut o = prefix.clone();
                        o.extend(pm);
                        o
                    })
                })
                .collect()
        }),
        _ => vec![classes.concat()],
    };
    orders.iter().map(|o| relabel(p, m, o)).min().expect("at least one order")
}

/// `m` renumbered so that new element `i` is old element `order[i]`.
fn relabel(p: &FullProblem, m: &FullMosaic, order: &[usize]) -> FullMosaic {
    let mut new_of = vec![0; order.len()];
    for (i, &old) in order.iter().enumerate() {
        new_of[old] = i;
    }
    let f = |x: &Forbidden| p.key(x.level, &x.query, &x.h.iter().map(|(v, &e)| (v.clone(), new_of[e])).collect());
    FullMosaic {
        level: order.iter().map(|&o| m.level[o]).collect(),
        labels: order.iter().map(|&o| m.labels[o].clone()).collect(),
        edges: m.edges.iter().map(|(r, a, b)| (r.clone(), new_of[*a], new_of[*b])).collect(),
        rho: m.rho.iter().map(|((d, l), t)| ((new_of[*d], *l), t.iter().map(|&e| new_of[e]).collect())).collect(),
        f_in: m.f_in.iter().map(f).collect(),
        f_out: m.f_out.iter().map(f).collect(),
    }
}

/// Bounds for the generation of mosaics.
#[derive(Clone, Debug)]
pub struct FullConfig {
    /// elements per mosaic
    pub domain: usize,
    /// ρ tuple length; defaults to ||O||
    pub tuple: Option<usize>,
    pub max_mosaics: usize,
    /// completion steps over the whole run
    pub max_steps: usize,
}

impl FullConfig {
    pub fn new(domain: usize) -> Self {
        FullConfig { domain, tuple: None, max_mosaics: 2000, max_steps: 500_000 }
    }
}

/// The generated pool, with the obligations of every mosaic and the
/// witnesses found for them.
#[derive(Clone, Debug, Default)]
pub struct Generated {
    pub mosaics: Vec<FullMosaic>,
    pub obligations: Vec<Vec<Obligation>>,
    pub witnesses: Vec<Vec<Vec<Witness>>>,
    /// a budget ran out before the pool was closed
    pub truncated: bool,
}

struct Gen<'a> {
    p: &'a FullProblem,
    cfg: &'a FullConfig,
    out: Generated,
    index: HashMap<FullMosaic, usize>,
    steps: usize,
}

impl Gen<'_> {
    /// All completions of `m`, added to the pool.
    fn complete(&mut self, m: FullMosaic) {
        let mut stack = vec![m];
        while let Some(mut m) = stack.pop() {
            loop {
                self.steps += 1;
                if self.steps > self.cfg.max_steps {
                    self.out.truncated = true;
                    return;
                }
                match step(self.p, self.cfg, &mut m) {
                    Step::Changed => continue,
                    Step::Dead => break,
                    Step::Split(v) => {
                        stack.extend(v);
                        break;
                    }
                    Step::Done => {
                        self.finish(m);
                        break;
                    }
                }
            }
        }
    }

    /// Derives `f_out`, verifies and adds the mosaic.
    fn finish(&mut self, mut m: FullMosaic) -> Option<usize> {
        m.f_out = derive_f_out(self.p, &m).ok()?;
        let m = canonicalize(self.p, &m);
        if let Some(&i) = self.index.get(&m) {
            return Some(i);
        }
        if !check_mosaic_conditions(self.p, &m).is_empty() {
            return None;
        }
        if self.out.mosaics.len() >= self.cfg.max_mosaics {
            self.out.truncated = true;
            return None;
        }
        let i = self.out.mosaics.len();
        let obs = obligations(self.p, &m);
        self.out.witnesses.push(vec![vec![]; obs.len()]);
        self.out.obligations.push(obs);
        self.index.insert(m.clone(), i);
        self.out.mosaics.push(m);
        Some(i)
    }

    fn with_f_in(&mut self, i: usize, extra: &BTreeSet<Forbidden>) {
        let mut m = self.out.mosaics[i].clone();
        m.f_in.extend(extra.iter().cloned());
        self.finish(m);
    }

    /// Partner seeds and internal witnesses for obligation `o` of `i`.
    fn expand(&mut self, i: usize, o: usize) {
        let m = self.out.mosaics[i].clone();
        let ob = self.out.obligations[i][o].clone();
        let l = m.level[ob.elem];
        let mut label = BTreeSet::from([ob.target.clone()]);
        for (s, a, b) in &self.p.rules[l].ex_l {
            if self.p.rules[l].sub(&ob.role.inv(), s) && m.has(ob.elem, a) {
                label.insert(b.clone());
            }
        }
        self.complete(FullMosaic::single(l, label));
        let mut base = m.clone();
        base.f_out.clear();
        let targets: Vec<usize> = base.elems_at(l).collect();
        for e in targets {
            let mut m2 = base.clone();
            m2.add_pair(&ob.role, ob.elem, e);
            m2.labels[e].insert(ob.target.clone());
            self.complete(m2);
        }
        let mut m2 = base;
        let e = m2.add_elem(l, BTreeSet::from([ob.target.clone()]));
        m2.add_pair(&ob.role, ob.elem, e);
        self.complete(m2);
    }

    fn try_partner(&mut self, i: usize, o: usize, j: usize) {
        let (m, m2) = (&self.out.mosaics[i], &self.out.mosaics[j]);
        let ob = &self.out.obligations[i][o];
        let found = find_witness(self.p, m, ob, m2);
        let (in_i, in_j) = (m.f_in.clone(), m2.f_in.clone());
        match found {
            Ok((elem, edges)) => {
                self.out.witnesses[i][o].push(Witness { partner: j, elem, edges });
            }
            Err(Some(need)) if i == j => {
                let all = need[0].union(&need[1]).cloned().collect();
                self.with_f_in(i, &all);
            }
            Err(Some(need)) => {
                if !need[0].is_subset(&in_i) {
                    self.with_f_in(i, &need[0]);
                }
                if !need[1].is_subset(&in_j) {
                    self.with_f_in(j, &need[1]);
                }
            }
            Err(None) => {}
        }
    }
}

/// Generates mosaics on demand from the goal and one seed per level, until
/// no new mosaic appears or a budget runs out.
pub fn generate(p: &FullProblem, cfg: &FullConfig, goal: Option<(usize, &str)>) -> Generated {
    let mut g = Gen { p, cfg, out: Generated::default(), index: HashMap::new(), steps: 0 };
    if let Some((l, a)) = goal {
        g.complete(FullMosaic::single(l, [a.to_string()]));
    }
    for l in 0..p.levels.len() {
        g.complete(FullMosaic::single(l, []));
    }
    let mut expanded: HashSet<(usize, usize)> = HashSet::new();
    let mut tried: HashSet<(usize, usize, usize)> = HashSet::new();
    loop {
        let before = g.out.mosaics.len();
        let mut i = 0;
        while i < g.out.mosaics.len() {
            for o in 0..g.out.obligations[i].len() {
                if expanded.insert((i, o)) {
                    g.expand(i, o);
                }
                for j in 0..g.out.mosaics.len() {
                    if tried.insert((i, o, j)) {
                        g.try_partner(i, o, j);
                    }
                }
                if g.out.truncated {
                    return g.out;
                }
            }
            i += 1;
        }
        if g.out.mosaics.len() == before {
            return g.out;
        }
    }
}

/// Greatest fixpoint: mosaics whose obligations all have a witness into a
/// surviving mosaic.
pub fn eliminate_full(g: &Generated) -> Vec<bool> {
    let mut alive = vec![true; g.mosaics.len()];
    loop {
        let mut changed = false;
        for i in 0..alive.len() {
            if alive[i] && !g.witnesses[i].iter().all(|ws| ws.iter().any(|w| alive[w.partner])) {
                alive[i] = false;
                changed = true;
            }
        }
        if !changed {
            return alive;
        }
    }
}

/// A discharged obligation: mosaic and element (indices into the
/// witness's mosaics), the partner, and the edges used.
#[derive(Clone, Debug)]
pub struct Certificate {
    pub mosaic: usize,
    pub obligation: Obligation,
    pub witness: Witness,
}

/// The surviving mosaics and one certificate per obligation.
#[derive(Clone, Debug)]
pub struct FullWitness {
    pub levels: Vec<Name>,
    /// the level order, roots linked into a tree
    pub prec: BTreeSet<(Name, Name)>,
    pub mosaics: Vec<FullMosaic>,
    pub certificates: Vec<Certificate>,
}

impl FullWitness {
    /// A model assembled from two disjoint copies of every mosaic joined
    /// by the certificate edges; an edge to the mosaic itself goes to the
    /// other copy. Elements are named `m{mosaic}c{copy}e{element}`.
    pub fn to_interpretation(&self) -> AInterpretation {
        let name = |m: usize, c: usize, d: usize| format!("m{m}c{c}e{d}");
        let mut i = AInterpretation { prec: self.prec.clone(), ..Default::default() };
        for l in &self.levels {
            i.level_mut(l);
        }
        for (k, m) in self.mosaics.iter().enumerate() {
            for c in 0..2 {
                for d in 0..m.len() {
                    let li = i.level_mut(&self.levels[m.level[d]]);
                    li.domain.push(name(k, c, d));
                    for a in &m.labels[d] {
                        li.add_concept(a, &name(k, c, d));
                    }
                }
                for (r, a, b) in &m.edges {
                    i.level_mut(&self.levels[m.level[*a]]).add_role(r, &name(k, c, *a), &name(k, c, *b));
                }
                for ((d, l), t) in &m.rho {
                    i.rho.insert((name(k, c, *d), self.levels[*l].clone()), t.iter().map(|&e| name(k, c, e)).collect());
                }
            }
        }
        for cert in &self.certificates {
            let (k, k2) = (cert.mosaic, cert.witness.partner);
            for c in 0..2 {
                let c2 = if k == k2 { 1 - c } else { c };
                let node = |n: Node| if n.0 == 0 { name(k, c, n.1) } else { name(k2, c2, n.1) };
                for x in &cert.witness.edges {
                    let l = &self.levels[self.mosaics[k].level[if x.from.0 == 0 { x.from.1 } else { x.to.1 }]];
                    i.level_mut(l).add_role(&x.role, &node(x.from), &node(x.to));
                }
            }
        }
        i
    }
}

#[derive(Clone, Debug)]
pub struct FullOutcome {
    pub verdict: Verdict,
    pub bounds: Bounds,
    pub reason: String,
    pub generated: usize,
    pub surviving: usize,
    pub witness: Option<FullWitness>,
}

fn tree_check(o: &Ontology) -> Option<String> {
    let prec = derived_prec(o);
    let levels = o.levels();
    let shape = level_graph_shape(levels.iter(), &prec);
    if shape.is_forest() {
        None
    } else if shape.cyclic {
        Some("the level order induced by the ontology is cyclic".into())
    } else {
        Some(format!("levels with several coarser levels: {}", shape.multi_parent.join(", ")))
    }
}

/// Decides whether `a0` is `l0`-satisfiable w.r.t. `o`, which must be
/// normalized and role-closed. Only the level-order check yields UNSAT;
/// when no witness set is found the answer is UNKNOWN.
pub fn sat_full(o: &Ontology, a0: &str, l0: &str, cfg: &FullConfig) -> Result<FullOutcome, SolveError> {
    let p = FullProblem::new(o, Some((a0, l0)))?;
    let bounds = Bounds {
        domain: cfg.domain,
        tuple: Some(p.tuple_bound.min(cfg.tuple.unwrap_or(usize::MAX))),
        complete_at: format!("doubly exponential in ||O|| = {}", ontology_size(o)),
        exact: false,
    };
    if let Some(reason) = tree_check(o) {
        let bounds = Bounds { exact: true, ..bounds };
        return Ok(FullOutcome { verdict: Verdict::Unsat, bounds, reason, generated: 0, surviving: 0, witness: None });
    }
    let l0i = p.level_index(l0).ok_or_else(|| SolveError::UnknownGoalLevel(l0.to_string()))?;
    let g = generate(&p, cfg, Some((l0i, a0)));
    let alive = eliminate_full(&g);
    let keep: Vec<usize> = (0..g.mosaics.len()).filter(|&i| alive[i]).collect();
    let goal_ok = keep.iter().any(|&i| {
        let m = &g.mosaics[i];
        m.elems_at(l0i).any(|d| m.has(d, a0))
    });
    let empty = (0..p.levels.len()).find(|&l| !keep.iter().any(|&i| g.mosaics[i].elems_at(l).next().is_some()));
    let budget = if g.truncated { " (generation budget exhausted)" } else { "" };
    let (generated, surviving) = (g.mosaics.len(), keep.len());
    if !goal_ok || empty.is_some() {
        let reason = match empty {
            Some(l) if goal_ok => format!("no surviving mosaic has an element at {}{budget}", p.levels[l]),
            _ => format!("no surviving mosaic contains {a0} at {l0}{budget}"),
        };
        return Ok(FullOutcome { verdict: Verdict::Unknown, bounds, reason, generated, surviving, witness: None });
    }
    let renum: HashMap<usize, usize> = keep.iter().enumerate().map(|(k, &i)| (i, k)).collect();
    let mut certificates = vec![];
    for &i in &keep {
        for (o, ob) in g.obligations[i].iter().enumerate() {
            let w = g.witnesses[i][o].iter().find(|w| alive[w.partner]).expect("survivor is good");
            certificates.push(Certificate {
                mosaic: renum[&i],
                obligation: ob.clone(),
                witness: Witness { partner: renum[&w.partner], ..w.clone() },
            });
        }
    }
    let (_, prec) = crate::oracle::search_levels(o, Some(l0), Semantics::Standard).expect("forest");
    let witness = FullWitness {
        levels: p.levels.clone(),
        prec,
        mosaics: keep.iter().map(|&i| g.mosaics[i].clone()).collect(),
        certificates,
    };
    Ok(FullOutcome {
        verdict: Verdict::Sat,
        bounds,
        reason: format!("{surviving} of {generated} generated mosaics survive elimination and cover the goal and every level"),
        generated,
        surviving,
        witness: Some(witness),
    })
}
