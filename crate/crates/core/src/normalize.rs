//! Normal form: structural transformation with fresh `_nf` names, role
//! hierarchy closure, and goal naming.
//!
//! Every compound concept is replaced by a fresh name constrained in one
//! direction only, chosen by polarity: `pos(C)` yields `P` with `P ⊑ C`,
//! `neg(C)` yields `N` with `C ⊑ N`. Interpreting each fresh name as the
//! extension of the concept it stands for turns any model of the input into
//! a model of the output, so the result is a conservative extension.

use std::collections::{BTreeMap, BTreeSet};

use crate::model::{Atom, Concept, Cq, Name, Ontology, Role, RoleTriple, Statement, RESERVED_PREFIX};

struct Namer {
    next: usize,
    /// (level, positive?, concept) → fresh name
    memo: BTreeMap<(Name, bool, Concept), Name>,
    out: Vec<Statement>,
}

fn name(n: &str) -> Concept {
    Concept::name(n)
}

fn ci(level: &str, lhs: Concept, rhs: Concept) -> Statement {
    Statement::Ci { level: level.to_string(), lhs, rhs }
}

/// First `k` such that no `_nf{j}` with `j >= k` occurs in `o`.
fn first_free_index(o: &Ontology) -> usize {
    o.concept_names()
        .iter()
        .chain(o.role_names().iter())
        .filter_map(|n| n.strip_prefix(RESERVED_PREFIX)?.parse::<usize>().ok())
        .map(|k| k + 1)
        .max()
        .unwrap_or(0)
}

impl Namer {
    fn fresh(&mut self) -> Name {
        let n = format!("{RESERVED_PREFIX}{}", self.next);
        self.next += 1;
        n
    }

    fn emit(&mut self, s: Statement) {
        if !self.out.contains(&s) {
            self.out.push(s);
        }
    }

    /// A name `P` with `P ⊑_L c`.
    fn pos(&mut self, l: &str, c: &Concept) -> Name {
        if let Concept::Name(a) = c {
            return a.clone();
        }
        let key = (l.to_string(), true, c.clone());
        if let Some(n) = self.memo.get(&key) {
            return n.clone();
        }
        let p = self.fresh();
        self.memo.insert(key, p.clone());
        self.sub_pos(l, &p, c);
        p
    }

    /// A name `N` with `c ⊑_L N`.
    fn neg(&mut self, l: &str, c: &Concept) -> Name {
        if let Concept::Name(a) = c {
            return a.clone();
        }
        let key = (l.to_string(), false, c.clone());
        if let Some(n) = self.memo.get(&key) {
            return n.clone();
        }
        let x = self.fresh();
        self.memo.insert(key, x.clone());
        self.sub_neg(l, c, &x);
        x
    }

    /// Emits normal CIs entailing `p ⊑_L c`.
    fn sub_pos(&mut self, l: &str, p: &str, c: &Concept) {
        match c {
            Concept::Top => {}
            Concept::Name(a) => self.emit(ci(l, Concept::and(name(p), name(p)), name(a))),
            Concept::Bot => self.emit(ci(l, name(p), Concept::not(name(p)))),
            Concept::And(a, b) => {
                self.sub_pos(l, p, a);
                self.sub_pos(l, p, b);
            }
            Concept::Or(a, b) => {
                // p ⊓ ¬P1 ⊑ P2, with Q ≡ ¬P1
                let p1 = self.pos(l, a);
                let p2 = self.pos(l, b);
                let q = self.fresh();
                self.emit(ci(l, name(&q), Concept::not(name(&p1))));
                self.emit(ci(l, Concept::not(name(&p1)), name(&q)));
                self.emit(ci(l, Concept::and(name(p), name(&q)), name(&p2)));
            }
            Concept::Not(a) => {
                let n = self.neg(l, a);
                self.emit(ci(l, name(p), Concept::not(name(&n))));
            }
            Concept::Exists(r, a) => {
                let p1 = self.pos(l, a);
                self.emit(ci(l, name(p), Concept::exists(r.clone(), name(&p1))));
            }
            Concept::Forall(r, a) => {
                // p ⊑ ∀R.C  iff  ∃R⁻.p ⊑ C
                let p1 = self.pos(l, a);
                self.emit(ci(l, Concept::exists(r.inv(), name(p)), name(&p1)));
            }
        }
    }

    /// Emits normal CIs entailing `c ⊑_L x`.
    fn sub_neg(&mut self, l: &str, c: &Concept, x: &str) {
        match c {
            Concept::Bot => {}
            Concept::Top => self.emit(ci(l, Concept::Top, name(x))),
            Concept::Name(a) => self.emit(ci(l, Concept::and(name(a), name(a)), name(x))),
            Concept::And(a, b) => {
                let n1 = self.neg(l, a);
                let n2 = self.neg(l, b);
                self.emit(ci(l, Concept::and(name(&n1), name(&n2)), name(x)));
            }
            Concept::Or(a, b) => {
                self.sub_neg(l, a, x);
                self.sub_neg(l, b, x);
            }
            Concept::Not(a) => {
                let p = self.pos(l, a);
                self.emit(ci(l, Concept::not(name(&p)), name(x)));
            }
            Concept::Exists(r, a) => {
                let n = self.neg(l, a);
                self.emit(ci(l, Concept::exists(r.clone(), name(&n)), name(x)));
            }
            Concept::Forall(r, a) => {
                // ¬x ⊑ ∃R.¬C
                let n = self.neg(l, a);
                let y = self.fresh();
                let z = self.fresh();
                self.emit(ci(l, Concept::not(name(x)), name(&y)));
                self.emit(ci(l, name(&y), Concept::exists(r.clone(), name(&z))));
                self.emit(ci(l, name(&z), Concept::not(name(&n))));
            }
        }
    }

    fn ci(&mut self, l: &str, lhs: &Concept, rhs: &Concept) {
        match (lhs, rhs) {
            (_, Concept::Top) | (Concept::Bot, _) => {}
            (Concept::Name(a), _) => self.sub_pos(l, a, rhs),
            (Concept::Top, _) => {
                let p = self.pos(l, rhs);
                self.emit(ci(l, Concept::Top, name(&p)));
            }
            (_, Concept::Name(b)) => self.sub_neg(l, lhs, b),
            _ => {
                let p = self.pos(l, rhs);
                self.sub_neg(l, lhs, &p);
            }
        }
    }

    /// Replaces every concept atom by a name; `positive` atoms get `P ⊑ D`
    /// (the query must hold), negative ones `D ⊑ N` (the query is matched).
    fn cq(&mut self, l: &str, q: &Cq, positive: bool) -> Cq {
        let mut out = q.clone();
        for a in &mut out.atoms {
            if let Atom::Concept(c, _) = a {
                if !matches!(c, Concept::Name(_) | Concept::Top) {
                    let n = if positive { self.pos(l, c) } else { self.neg(l, c) };
                    *c = name(&n);
                }
            }
        }
        out
    }

    fn statement(&mut self, s: &Statement) {
        match s {
            Statement::Ci { level, lhs, rhs } => self.ci(level, lhs, rhs),
            Statement::Ri { .. } => self.emit(s.clone()),
            Statement::ConceptRef { fine, cq, coarse, concept } => {
                let c = self.neg(coarse, concept);
                let q = self.cq(fine, cq, true);
                self.emit(Statement::ConceptRef { fine: fine.clone(), cq: q, coarse: coarse.clone(), concept: name(&c) });
            }
            Statement::ConceptAbs { coarse, concept, fine, cq } => {
                let c = self.pos(coarse, concept);
                let q = self.cq(fine, cq, false);
                self.emit(Statement::ConceptAbs { coarse: coarse.clone(), concept: name(&c), fine: fine.clone(), cq: q });
            }
            Statement::RoleRef { fine, cq, coarse, qr } => {
                let cx = self.neg(coarse, &qr.cx);
                let cy = self.neg(coarse, &qr.cy);
                let q = self.cq(fine, cq, true);
                self.emit(Statement::RoleRef {
                    fine: fine.clone(),
                    cq: q,
                    coarse: coarse.clone(),
                    qr: RoleTriple { cx: name(&cx), role: qr.role.clone(), cy: name(&cy) },
                });
            }
            Statement::RoleAbs { coarse, role, fine, cq } => {
                let q = self.cq(fine, cq, false);
                self.emit(Statement::RoleAbs { coarse: coarse.clone(), role: role.clone(), fine: fine.clone(), cq: q });
            }
        }
    }
}

/// Converts `o` into normal form. Already-normal statements come out
/// unchanged, so the transformation is idempotent.
pub fn normalize(o: &Ontology) -> Ontology {
    let mut nm = Namer { next: first_free_index(o), memo: BTreeMap::new(), out: vec![] };
    for s in &o.statements {
        nm.statement(s);
    }
    Ontology { statements: nm.out, semantics: o.semantics }
}

/// True iff `lhs ⊑ rhs` has one of the six normal shapes.
pub fn is_normal_ci(lhs: &Concept, rhs: &Concept) -> bool {
    use Concept::*;
    let is_name = |c: &Concept| matches!(c, Name(_));
    match (lhs, rhs) {
        (Top, Name(_)) => true,
        (Name(_), Exists(_, b)) => is_name(b),
        (Exists(_, b), Name(_)) => is_name(b),
        (And(a1, a2), Name(_)) => is_name(a1) && is_name(a2),
        (Name(_), Not(b)) => is_name(b),
        (Not(b), Name(_)) => is_name(b),
        _ => false,
    }
}

fn cq_is_normal(q: &Cq) -> bool {
    q.atoms.iter().all(|a| !matches!(a, Atom::Concept(c, _) if !matches!(c, Concept::Name(_) | Concept::Top)))
}

/// True iff every CI is normal and every concept in a refinement or
/// abstraction (including query atoms; `⊤` atoms are allowed) is a name.
pub fn is_normal(o: &Ontology) -> bool {
    o.statements.iter().all(|s| match s {
        Statement::Ci { lhs, rhs, .. } => is_normal_ci(lhs, rhs),
        Statement::Ri { .. } => true,
        Statement::ConceptRef { cq, concept, .. } | Statement::ConceptAbs { concept, cq, .. } => {
            concept.as_name().is_some() && cq_is_normal(cq)
        }
        Statement::RoleRef { cq, qr, .. } => {
            qr.cx.as_name().is_some() && qr.cy.as_name().is_some() && cq_is_normal(cq)
        }
        Statement::RoleAbs { cq, .. } => cq_is_normal(cq),
    })
}

/// Per-level RI sets, as (lhs, rhs) pairs.
pub fn role_inclusions(o: &Ontology) -> BTreeMap<Name, BTreeSet<(Role, Role)>> {
    let mut out: BTreeMap<Name, BTreeSet<(Role, Role)>> = BTreeMap::new();
    for s in &o.statements {
        if let Statement::Ri { level, lhs, rhs } = s {
            out.entry(level.clone()).or_default().insert((lhs.clone(), rhs.clone()));
        }
    }
    out
}

/// Adds the RIs needed for reflexivity over all roles of `o` (and their
/// inverses) at every level, transitivity and closure under inversion.
/// New RIs are appended in sorted order.
pub fn close_role_hierarchy(o: &Ontology) -> Ontology {
    let roles: Vec<Role> = o.role_names().into_iter().flat_map(|r| [Role::new(r.clone()), Role::new(r).inv()]).collect();
    let existing = role_inclusions(o);
    let mut out = o.clone();
    for l in o.levels() {
        let mut set: BTreeSet<(Role, Role)> = existing.get(&l).cloned().unwrap_or_default();
        for r in &roles {
            set.insert((r.clone(), r.clone()));
        }
        loop {
            let mut add = vec![];
            for (r, s) in &set {
                add.push((r.inv(), s.inv()));
                for (s2, t) in &set {
                    if s == s2 {
                        add.push((r.clone(), t.clone()));
                    }
                }
            }
            let before = set.len();
            set.extend(add);
            if set.len() == before {
                break;
            }
        }
        let have = existing.get(&l);
        for (r, s) in set {
            if !have.is_some_and(|h| h.contains(&(r.clone(), s.clone()))) {
                out.push(Statement::Ri { level: l.clone(), lhs: r, rhs: s });
            }
        }
    }
    out
}

/// Extends `o` with `A0 ⊑_L c` for a fresh name `A0`, which is returned.
/// The goal is wrapped even when `c` is already a name.
pub fn introduce_goal_name(o: &Ontology, c: &Concept, level: &str) -> (Ontology, Name) {
    let mut k = first_free_index(o);
    let mut cs = BTreeSet::new();
    let mut rs = BTreeSet::new();
    c.collect_names(&mut cs, &mut rs);
    for n in cs.iter().chain(&rs) {
        if let Some(j) = n.strip_prefix(RESERVED_PREFIX).and_then(|s| s.parse::<usize>().ok()) {
            k = k.max(j + 1);
        }
    }
    let a0 = format!("{RESERVED_PREFIX}{k}");
    let mut out = o.clone();
    out.push(ci(level, name(&a0), c.clone()));
    (out, a0)
}

/// The full solver pipeline: goal naming, normalization, role closure.
pub fn prepare(o: &Ontology, goal: &Concept, level: &str) -> (Ontology, Name) {
    let (o1, a0) = introduce_goal_name(o, goal, level);
    (close_role_hierarchy(&normalize(&o1)), a0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(s: &str) -> Concept {
        crate::syntax::parse_concept(s).unwrap()
    }

    #[test]
    fn normal_input_is_fixed_point() {
        let o = Ontology::new(vec![
            ci("L", c("A"), c("exists r. B")),
            ci("L", c("A and B"), c("C")),
            ci("L", c("not B"), c("A")),
            ci("L", Concept::Top, c("A")),
        ]);
        assert!(is_normal(&o));
        assert_eq!(normalize(&o), o);
    }

    #[test]
    fn nested_existential() {
        let o = Ontology::new(vec![ci("L", c("C"), c("exists r. (A and B)"))]);
        let n = normalize(&o);
        assert!(is_normal(&n));
        assert_eq!(normalize(&n), n);
        assert!(n.statements.len() >= 3);
    }

    #[test]
    fn role_closure_conditions() {
        let o = Ontology::new(vec![
            Statement::Ri { level: "L".into(), lhs: Role::new("r"), rhs: Role::new("s") },
            Statement::Ri { level: "L".into(), lhs: Role::new("s"), rhs: Role::new("t") },
        ]);
        let c = close_role_hierarchy(&o);
        let ris = &role_inclusions(&c)["L"];
        assert!(ris.contains(&(Role::new("r"), Role::new("t"))));
        assert!(ris.contains(&(Role::new("r").inv(), Role::new("s").inv())));
        assert!(ris.contains(&(Role::new("t").inv(), Role::new("t").inv())));
        assert_eq!(close_role_hierarchy(&c), c);
    }

    #[test]
    fn goal_always_wrapped() {
        let (o, a0) = introduce_goal_name(&Ontology::default(), &c("A"), "L");
        assert_eq!(o.statements, vec![ci("L", name(&a0), c("A"))]);
        assert!(a0.starts_with(RESERVED_PREFIX));
    }
}
