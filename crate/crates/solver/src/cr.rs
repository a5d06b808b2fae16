//! Mosaic elimination for ontologies whose only refinement statements are
//! concept refinements.
//!
//! Two engines share one preprocessed problem:
//!
//! * the explicit engine enumerates all mosaics up to isomorphism and
//!   eliminates bad ones exactly as defined; it is only feasible for tiny
//!   domain bounds and serves as a reference;
//! * the label engine works on element labels (sets of concept names).
//!   Goodness of an element depends only on its label and on the labels
//!   present in the pool, and a mosaic survives elimination iff all its
//!   labels survive: an internally witnessed existential gives a compatible
//!   partner label inside the same mosaic, and a joint refinement answer
//!   inside a pool mosaic can be copied out into a mosaic that holds only
//!   the answer tuple (positions identified as in the original, edges the
//!   role-inclusion closure of the query's role atoms). So the greatest
//!   fixpoint over labels decides exactly the same thing as the fixpoint
//!   over mosaics, for every domain bound.
//!
//! Since a joint answer never needs more elements than the refinement
//! arity, bounds at or above the largest arity give the same answer as the
//! complete bound ||O||.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use abdl_core::normalize::is_normal_ci;
use abdl_core::{derived_prec, level_graph_shape, Atom, Concept, Cq, Name, Ontology, Role, Semantics, Statement};

use crate::{Bounds, SolveError, Verdict};

pub type Label = u64;

const MAX_NAMES: usize = 64;
const MAX_LABELS: usize = 1 << 20;

#[derive(Clone, Debug, Default)]
pub struct LevelData {
    pub names: Vec<Name>,
    index: BTreeMap<Name, usize>,
    pub roles: Vec<Name>,
    top: Label,
    conj: Vec<(usize, usize, usize)>,
    /// A ⊑ ¬B as (A, B)
    neg_r: Vec<(usize, usize)>,
    /// ¬B ⊑ A as (B, A)
    neg_l: Vec<(usize, usize)>,
    /// A ⊑ ∃R.B as (A, R, B)
    ex_r: Vec<(usize, Role, usize)>,
    /// ∃S.A ⊑ B as (S, A, B)
    ex_l: Vec<(Role, usize, usize)>,
    /// reflexive, transitive, inverse-closed
    ris: BTreeSet<(Role, Role)>,
}

impl LevelData {
    fn bit(&self, n: &str) -> Label {
        1 << self.index[n]
    }

    fn sub(&self, r: &Role, s: &Role) -> bool {
        r == s || self.ris.contains(&(r.clone(), s.clone()))
    }

    pub fn locally_consistent(&self, t: Label) -> bool {
        let has = |i: usize| t & (1 << i) != 0;
        t & self.top == self.top
            && self.conj.iter().all(|&(a, b, c)| !(has(a) && has(b)) || has(c))
            && self.neg_r.iter().all(|&(a, b)| !(has(a) && has(b)))
            && self.neg_l.iter().all(|&(b, a)| has(b) || has(a))
    }

    pub fn label_names(&self, t: Label) -> BTreeSet<Name> {
        (0..self.names.len()).filter(|i| t & (1 << i) != 0).map(|i| self.names[i].clone()).collect()
    }

    /// Constraint on a partner label τ' for an R-edge from a τ-element:
    /// `must ⊆ τ'` and `τ' ∩ forbid = ∅`.
    fn partner_constraint(&self, t: Label, r: &Role) -> (Label, Label) {
        let mut must = 0;
        let mut forbid = 0;
        for (s, a, b) in &self.ex_l {
            if self.sub(&r.inv(), s) && t & (1 << a) != 0 {
                must |= 1 << b;
            }
            if self.sub(r, s) && t & (1 << b) == 0 {
                forbid |= 1 << a;
            }
        }
        (must, forbid)
    }

    fn ri_closure(&self, edges: &mut BTreeSet<(Name, usize, usize)>) {
        loop {
            let mut add = vec![];
            for (r, p, q) in edges.iter() {
                let fwd = Role::new(r.clone());
                for (a, s) in &self.ris {
                    let (x, y) = if *a == fwd {
                        (*p, *q)
                    } else if *a == fwd.inv() {
                        (*q, *p)
                    } else {
                        continue;
                    };
                    let e = if s.inverse { (s.name.clone(), y, x) } else { (s.name.clone(), x, y) };
                    if !edges.contains(&e) {
                        add.push(e);
                    }
                }
            }
            if add.is_empty() {
                return;
            }
            edges.extend(add);
        }
    }

    /// Do the labels satisfy every ∃S.A ⊑ B over the given edges
    /// (restricted to positions that are assigned)?
    fn edges_ok(&self, edges: &BTreeSet<(Name, usize, usize)>, lab: &[Option<Label>]) -> bool {
        for (r, p, q) in edges {
            let (Some(tp), Some(tq)) = (lab[*p], lab[*q]) else { continue };
            for (s, a, b) in &self.ex_l {
                if s.name != *r {
                    continue;
                }
                // r(p,q) = r⁻(q,p)
                let (from, to) = if s.inverse { (tq, tp) } else { (tp, tq) };
                if to & (1 << a) != 0 && from & (1 << b) == 0 {
                    return false;
                }
            }
        }
        true
    }
}

#[derive(Clone, Debug)]
pub struct Refinement {
    pub fine: Name,
    pub coarse: Name,
    pub concept: Name,
    pub cq: Cq,
}

/// A normalized, role-closed cr ontology, preprocessed per level.
#[derive(Clone, Debug)]
pub struct CrProblem {
    pub levels: BTreeMap<Name, LevelData>,
    pub refinements: Vec<Refinement>,
    pub max_arity: usize,
}

fn fragment_check(o: &Ontology) -> Result<(), SolveError> {
    if o.semantics != Semantics::Standard {
        return Err(SolveError::Variant(o.semantics));
    }
    for (k, s) in o.statements.iter().enumerate() {
        match s {
            Statement::Ci { lhs, rhs, .. } if !is_normal_ci(lhs, rhs) => return Err(SolveError::NotNormal),
            Statement::Ci { .. } | Statement::Ri { .. } => {}
            Statement::ConceptRef { cq, concept, .. } => {
                let atoms_ok = cq.atoms.iter().all(|a| match a {
                    Atom::Concept(c, _) => matches!(c, Concept::Name(_) | Concept::Top),
                    Atom::Role(..) => true,
                });
                if concept.as_name().is_none() || !atoms_ok {
                    return Err(SolveError::NotNormal);
                }
                if !cq.exvars.is_empty() {
                    return Err(SolveError::Fragment(k, "quantified variables"));
                }
            }
            _ => return Err(SolveError::Fragment(k, "only concept refinements are allowed")),
        }
    }
    Ok(())
}

impl CrProblem {
    pub fn new(o: &Ontology, goal: Option<(&str, &str)>) -> Result<Self, SolveError> {
        fragment_check(o)?;
        let mut names: BTreeMap<Name, BTreeSet<Name>> = BTreeMap::new();
        let mut roles: BTreeMap<Name, BTreeSet<Name>> = BTreeMap::new();
        for l in o.levels() {
            names.entry(l.clone()).or_default();
            roles.entry(l).or_default();
        }
        if let Some((a, l)) = goal {
            names.entry(l.to_string()).or_default().insert(a.to_string());
            roles.entry(l.to_string()).or_default();
        }
        let mut refinements = vec![];
        for s in &o.statements {
            match s {
                Statement::Ci { level, .. } | Statement::Ri { level, .. } => {
                    let (mut c, mut r) = (BTreeSet::new(), BTreeSet::new());
                    s.collect_names(&mut c, &mut r);
                    names.get_mut(level).unwrap().extend(c);
                    roles.get_mut(level).unwrap().extend(r);
                }
                Statement::ConceptRef { fine, cq, coarse, concept } => {
                    let concept = concept.as_name().unwrap().to_string();
                    names.get_mut(coarse).unwrap().insert(concept.clone());
                    for a in &cq.atoms {
                        match a {
                            Atom::Concept(Concept::Name(n), _) => {
                                names.get_mut(fine).unwrap().insert(n.clone());
                            }
                            Atom::Role(r, _, _) => {
                                roles.get_mut(fine).unwrap().insert(r.name.clone());
                            }
                            _ => {}
                        }
                    }
                    refinements.push(Refinement { fine: fine.clone(), coarse: coarse.clone(), concept, cq: cq.clone() });
                }
                _ => unreachable!(),
            }
        }
        let mut levels = BTreeMap::new();
        for (l, ns) in names {
            if ns.len() > MAX_NAMES {
                return Err(SolveError::TooLarge(format!("{} concept names at level {l}", ns.len())));
            }
            let names: Vec<Name> = ns.into_iter().collect();
            let index = names.iter().enumerate().map(|(i, n)| (n.clone(), i)).collect();
            let mut ld = LevelData { names, index, roles: roles[&l].iter().cloned().collect(), ..Default::default() };
            let all_roles: Vec<Role> =
                ld.roles.iter().flat_map(|r| [Role::new(r.clone()), Role::new(r.clone()).inv()]).collect();
            for r in &all_roles {
                ld.ris.insert((r.clone(), r.clone()));
            }
            for s in &o.statements {
                match s {
                    Statement::Ci { level, lhs, rhs } if *level == l => {
                        let ix = |c: &Concept| ld.index[c.as_name().unwrap()];
                        match (lhs, rhs) {
                            (Concept::Top, b) => ld.top |= 1 << ix(b),
                            (Concept::Name(_), Concept::Exists(r, b)) => ld.ex_r.push((ix(lhs), r.clone(), ix(b))),
                            (Concept::Exists(r, a), b) => ld.ex_l.push((r.clone(), ix(a), ix(b))),
                            (Concept::And(a, b), c) => ld.conj.push((ix(a), ix(b), ix(c))),
                            (Concept::Name(_), Concept::Not(b)) => ld.neg_r.push((ix(lhs), ix(b))),
                            (Concept::Not(b), a) => ld.neg_l.push((ix(b), ix(a))),
                            _ => unreachable!("checked normal"),
                        }
                    }
                    Statement::Ri { level, lhs, rhs } if *level == l => {
                        ld.ris.insert((lhs.clone(), rhs.clone()));
                        ld.ris.insert((lhs.inv(), rhs.inv()));
                    }
                    _ => {}
                }
            }
            loop {
                let mut add = vec![];
                for (r, s) in &ld.ris {
                    for (s2, t) in &ld.ris {
                        if s == s2 && !ld.ris.contains(&(r.clone(), t.clone())) {
                            add.push((r.clone(), t.clone()));
                        }
                    }
                }
                if add.is_empty() {
                    break;
                }
                ld.ris.extend(add);
            }
            levels.insert(l, ld);
        }
        let max_arity = refinements.iter().map(|r| r.cq.vars.len()).max().unwrap_or(0);
        Ok(CrProblem { levels, refinements, max_arity })
    }

    /// All locally consistent labels of a level, in increasing order.
    pub fn consistent_labels(&self, l: &str) -> Result<Vec<Label>, SolveError> {
        let ld = &self.levels[l];
        let n = ld.names.len();
        let mut out = vec![];
        fn go(ld: &LevelData, i: usize, n: usize, t: Label, out: &mut Vec<Label>) -> bool {
            if out.len() > MAX_LABELS {
                return false;
            }
            // clauses whose largest index is < i are decided
            let mask: Label = if i >= 64 { !0 } else { (1 << i) - 1 };
            let has = |k: usize| t & (1 << k) != 0;
            let decided = |ks: &[usize]| ks.iter().all(|&k| k < i);
            let ok = (ld.top & mask) & !t == 0
                && ld.conj.iter().all(|&(a, b, c)| !decided(&[a, b, c]) || !(has(a) && has(b)) || has(c))
                && ld.neg_r.iter().all(|&(a, b)| !decided(&[a, b]) || !(has(a) && has(b)))
                && ld.neg_l.iter().all(|&(b, a)| !decided(&[a, b]) || has(b) || has(a));
            if !ok {
                return true;
            }
            if i == n {
                out.push(t);
                return true;
            }
            go(ld, i + 1, n, t, out) && go(ld, i + 1, n, t | (1 << i), out)
        }
        if !go(ld, 0, n, 0, &mut out) {
            return Err(SolveError::TooLarge(format!("more than {MAX_LABELS} labels at level {l}")));
        }
        out.sort_unstable();
        Ok(out)
    }

    /// Refinements triggered by a label at `coarse`, grouped by fine level.
    fn triggered(&self, coarse: &str, t: Label) -> BTreeMap<&Name, Vec<usize>> {
        let ld = &self.levels[coarse];
        let mut out: BTreeMap<&Name, Vec<usize>> = BTreeMap::new();
        for (i, r) in self.refinements.iter().enumerate() {
            if r.coarse == coarse && t & ld.bit(&r.concept) != 0 {
                out.entry(&r.fine).or_default().push(i);
            }
        }
        out
    }

    /// Is there a mosaic at `fine` with at most `bound` elements, all
    /// labels in `pool`, holding one tuple that answers every query in `qs`?
    fn joint_answer(&self, fine: &str, qs: &[usize], pool: &[Label], bound: usize) -> bool {
        let ld = &self.levels[fine];
        let k = self.refinements[qs[0]].cq.vars.len();
        if qs.iter().any(|&i| self.refinements[i].cq.vars.len() != k) {
            return false;
        }
        let mut req = vec![0 as Label; k];
        let mut edges: Vec<(Name, usize, usize)> = vec![];
        for &i in qs {
            let q = &self.refinements[i].cq;
            let p = |v: &str| q.vars.iter().position(|x| x == v).unwrap();
            for a in &q.atoms {
                match a {
                    Atom::Concept(Concept::Name(n), v) => req[p(v)] |= ld.bit(n),
                    Atom::Concept(..) => {}
                    Atom::Role(r, x, y) => {
                        let (a, b) = if r.inverse { (p(y), p(x)) } else { (p(x), p(y)) };
                        edges.push((r.name.clone(), a, b));
                    }
                }
            }
        }
        for blocks in set_partitions(k, bound) {
            let m = blocks.iter().max().map(|b| b + 1).unwrap_or(0);
            let mut r = vec![0 as Label; m];
            for (p, &b) in blocks.iter().enumerate() {
                r[b] |= req[p];
            }
            let mut es: BTreeSet<(Name, usize, usize)> =
                edges.iter().map(|(n, a, b)| (n.clone(), blocks[*a], blocks[*b])).collect();
            ld.ri_closure(&mut es);
            let doms: Vec<Vec<Label>> = r.iter().map(|&rq| pool.iter().copied().filter(|t| t & rq == rq).collect()).collect();
            if doms.iter().any(|d| d.is_empty()) {
                continue;
            }
            let mut lab = vec![None; m];
            if assign(ld, &es, &doms, 0, &mut lab) {
                return true;
            }
        }
        false
    }
}

fn assign(ld: &LevelData, es: &BTreeSet<(Name, usize, usize)>, doms: &[Vec<Label>], i: usize, lab: &mut Vec<Option<Label>>) -> bool {
    if i == doms.len() {
        return true;
    }
    for &t in &doms[i] {
        lab[i] = Some(t);
        if ld.edges_ok(es, lab) && assign(ld, es, doms, i + 1, lab) {
            return true;
        }
    }
    lab[i] = None;
    false
}

/// Set partitions of `0..k` into at most `max` blocks, as restricted growth
/// strings (block index per position).
pub fn set_partitions(k: usize, max: usize) -> Vec<Vec<usize>> {
    let mut out = vec![];
    fn go(p: &mut Vec<usize>, k: usize, max: usize, used: usize, out: &mut Vec<Vec<usize>>) {
        if p.len() == k {
            out.push(p.clone());
            return;
        }
        for b in 0..(used + 1).min(max) {
            p.push(b);
            go(p, k, max, used.max(b + 1), out);
            p.pop();
        }
    }
    go(&mut vec![], k, max, 0, &mut out);
    out
}

/// Surviving labels per level.
pub type LabelSets = BTreeMap<Name, Vec<Label>>;

/// Greatest fixpoint of label goodness at domain bound `bound`.
pub fn eliminate_labels(p: &CrProblem, bound: usize) -> Result<LabelSets, SolveError> {
    let mut g: LabelSets = BTreeMap::new();
    for l in p.levels.keys() {
        g.insert(l.clone(), p.consistent_labels(l)?);
    }
    loop {
        let mut next: LabelSets = BTreeMap::new();
        let mut changed = false;
        let mut joint_memo: HashMap<(Name, Vec<usize>), bool> = HashMap::new();
        for (l, labels) in &g {
            let ld = &p.levels[l];
            let mut partner_memo: HashMap<(Label, Label), bool> = HashMap::new();
            let keep: Vec<Label> = labels
                .iter()
                .copied()
                .filter(|&t| {
                    let c1 = ld.ex_r.iter().all(|(a, r, b)| {
                        if t & (1 << a) == 0 {
                            return true;
                        }
                        let (must, forbid) = ld.partner_constraint(t, r);
                        let must = must | (1 << b);
                        *partner_memo
                            .entry((must, forbid))
                            .or_insert_with(|| labels.iter().any(|&u| u & must == must && u & forbid == 0))
                    });
                    c1 && p.triggered(l, t).into_iter().all(|(fine, qs)| {
                        *joint_memo
                            .entry((fine.clone(), qs.clone()))
                            .or_insert_with(|| p.joint_answer(fine, &qs, &g[fine], bound))
                    })
                })
                .collect();
            changed |= keep.len() != labels.len();
            next.insert(l.clone(), keep);
        }
        g = next;
        if !changed {
            return Ok(g);
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CrWitness {
    /// Surviving labels per level; each is realized by a one-element mosaic.
    pub labels: BTreeMap<Name, Vec<BTreeSet<Name>>>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CrOutcome {
    pub verdict: Verdict,
    pub bounds: Bounds,
    pub reason: String,
    pub witness: Option<CrWitness>,
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
/// normalized and role-closed. With `bound` below the largest refinement
/// arity a negative result is reported as unknown.
pub fn sat_cr(o: &Ontology, a0: &str, l0: &str, bound: usize) -> Result<CrOutcome, SolveError> {
    let bound = bound.max(1);
    let p = CrProblem::new(o, Some((a0, l0)))?;
    let exact = bound >= p.max_arity;
    let bounds = Bounds {
        domain: bound,
        tuple: None,
        complete_at: format!("{} (any bound >= {})", abdl_core::ontology_size(o), p.max_arity.max(1)),
        exact,
    };
    if let Some(reason) = tree_check(o) {
        return Ok(CrOutcome { verdict: Verdict::Unsat, bounds: Bounds { exact: true, ..bounds }, reason, witness: None });
    }
    let g = eliminate_labels(&p, bound)?;
    let goal_ok = g.get(l0).is_some_and(|ls| {
        let bit = p.levels[l0].bit(a0);
        ls.iter().any(|t| t & bit != 0)
    });
    let empty: Vec<&Name> = g.iter().filter(|(_, ls)| ls.is_empty()).map(|(l, _)| l).collect();
    if goal_ok && empty.is_empty() {
        let labels = g
            .iter()
            .map(|(l, ls)| (l.clone(), ls.iter().map(|&t| p.levels[l].label_names(t)).collect()))
            .collect();
        return Ok(CrOutcome {
            verdict: Verdict::Sat,
            bounds,
            reason: "surviving mosaics satisfy the goal and cover every level".into(),
            witness: Some(CrWitness { labels }),
        });
    }
    let reason = if !goal_ok {
        format!("no surviving mosaic at {l0} contains {a0}")
    } else {
        format!("no surviving mosaic at level {}", empty[0])
    };
    Ok(CrOutcome { verdict: if exact { Verdict::Unsat } else { Verdict::Unknown }, bounds, reason, witness: None })
}

/// A single-level mosaic: labels per element and role edges
/// `(role index into LevelData::roles, from, to)`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CrMosaic {
    pub level: Name,
    pub labels: Vec<Label>,
    pub edges: BTreeSet<(usize, usize, usize)>,
}

impl CrMosaic {
    fn has_edge(&self, ld: &LevelData, r: &Role, a: usize, b: usize) -> bool {
        let Some(ri) = ld.roles.iter().position(|x| *x == r.name) else { return false };
        if r.inverse {
            self.edges.contains(&(ri, b, a))
        } else {
            self.edges.contains(&(ri, a, b))
        }
    }

    fn canonical(mut self) -> Self {
        let n = self.labels.len();
        let mut best: Option<(Vec<Label>, BTreeSet<(usize, usize, usize)>)> = None;
        let mut perm: Vec<usize> = (0..n).collect();
        permute(&mut perm, 0, &mut |p| {
            let mut labels = vec![0; n];
            for i in 0..n {
                labels[p[i]] = self.labels[i];
            }
            let edges: BTreeSet<_> = self.edges.iter().map(|&(r, a, b)| (r, p[a], p[b])).collect();
            let cand = (labels, edges);
            if best.as_ref().map_or(true, |b| cand < *b) {
                best = Some(cand);
            }
        });
        let (labels, edges) = best.unwrap();
        self.labels = labels;
        self.edges = edges;
        self
    }
}

fn permute(p: &mut Vec<usize>, k: usize, f: &mut dyn FnMut(&[usize])) {
    if k == p.len() {
        f(p);
        return;
    }
    for i in k..p.len() {
        p.swap(k, i);
        permute(p, k + 1, f);
        p.swap(k, i);
    }
}

fn mosaic_ok(ld: &LevelData, m: &CrMosaic) -> bool {
    let n = m.labels.len();
    for (r, s) in &ld.ris {
        for a in 0..n {
            for b in 0..n {
                if m.has_edge(ld, r, a, b) && !m.has_edge(ld, s, a, b) {
                    return false;
                }
            }
        }
    }
    for (s, a, b) in &ld.ex_l {
        for d in 0..n {
            if m.labels[d] & (1 << b) == 0 && (0..n).any(|e| m.has_edge(ld, s, d, e) && m.labels[e] & (1 << a) != 0) {
                return false;
            }
        }
    }
    true
}

/// Every mosaic with 1..=`n` elements, up to isomorphism. The CIs are
/// respected except those of the form A ⊑ ∃R.B.
pub fn enumerate_cr_mosaics(p: &CrProblem, n: usize) -> Result<Vec<CrMosaic>, SolveError> {
    let mut out = BTreeSet::new();
    for (l, ld) in &p.levels {
        let labels = p.consistent_labels(l)?;
        for size in 1..=n {
            let slots = ld.roles.len() * size * size;
            if slots > 20 {
                return Err(SolveError::TooLarge(format!("{slots} edge slots at level {l}")));
            }
            for lab in crate::oracle::tuples(labels.len(), size) {
                for mask in 0u32..(1 << slots) {
                    let mut edges = BTreeSet::new();
                    for bit in 0..slots {
                        if mask & (1 << bit) != 0 {
                            edges.insert((bit / (size * size), (bit / size) % size, bit % size));
                        }
                    }
                    let m = CrMosaic { level: l.clone(), labels: lab.iter().map(|&i| labels[i]).collect(), edges };
                    if mosaic_ok(ld, &m) {
                        out.insert(m.canonical());
                    }
                }
            }
        }
    }
    Ok(out.into_iter().collect())
}

fn answers_all(p: &CrProblem, m: &CrMosaic, qs: &[usize], t: &[usize]) -> bool {
    let ld = &p.levels[&m.level];
    qs.iter().all(|&i| {
        let q = &p.refinements[i].cq;
        q.vars.len() == t.len()
            && q.atoms.iter().all(|a| {
                let at = |v: &str| t[q.vars.iter().position(|x| x == v).unwrap()];
                match a {
                    Atom::Concept(Concept::Name(n), v) => m.labels[at(v)] & ld.bit(n) != 0,
                    Atom::Concept(..) => true,
                    Atom::Role(r, x, y) => m.has_edge(ld, r, at(x), at(y)),
                }
            })
    })
}

/// Goodness of a mosaic in a pool, as defined (both conditions, every
/// element).
pub fn is_good_cr(p: &CrProblem, m: &CrMosaic, pool: &[CrMosaic]) -> bool {
    let ld = &p.levels[&m.level];
    let n = m.labels.len();
    for d in 0..n {
        let t = m.labels[d];
        for (a, r, b) in &ld.ex_r {
            if t & (1 << a) == 0 {
                continue;
            }
            if (0..n).any(|e| m.has_edge(ld, r, d, e) && m.labels[e] & (1 << b) != 0) {
                continue;
            }
            let ok = pool.iter().filter(|m2| m2.level == m.level).any(|m2| {
                m2.labels.iter().any(|&u| {
                    u & (1 << b) != 0
                        && ld.ex_l.iter().all(|(s, a2, b2)| {
                            (!ld.sub(r, s) || u & (1 << a2) == 0 || t & (1 << b2) != 0)
                                && (!ld.sub(&r.inv(), s) || t & (1 << a2) == 0 || u & (1 << b2) != 0)
                        })
                })
            });
            if !ok {
                return false;
            }
        }
        for (fine, qs) in p.triggered(&m.level, t) {
            let k = p.refinements[qs[0]].cq.vars.len();
            let ok = pool.iter().filter(|m2| m2.level == *fine).any(|m2| {
                crate::oracle::tuples(m2.labels.len(), k).iter().any(|tu| answers_all(p, m2, &qs, tu))
            });
            if !ok {
                return false;
            }
        }
    }
    true
}

/// Exhaustive elimination over the enumerated universe.
pub fn eliminate_cr(p: &CrProblem, n: usize) -> Result<Vec<CrMosaic>, SolveError> {
    let mut pool = enumerate_cr_mosaics(p, n)?;
    loop {
        let keep: Vec<CrMosaic> = pool.iter().filter(|m| is_good_cr(p, m, &pool)).cloned().collect();
        if keep.len() == pool.len() {
            return Ok(pool);
        }
        pool = keep;
    }
}

/// The verdict of the explicit engine on a fixpoint.
pub fn verdict_from_mosaics(p: &CrProblem, mstar: &[CrMosaic], a0: &str, l0: &str) -> bool {
    let goal = mstar.iter().any(|m| m.level == l0 && m.labels.iter().any(|t| t & p.levels[l0].bit(a0) != 0));
    goal && p.levels.keys().all(|l| mstar.iter().any(|m| m.level == *l))
}
