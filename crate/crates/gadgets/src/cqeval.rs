//! Reductions from simple CQ evaluation on ALCI ontologies: the direct
//! one through a ⊥-abstraction, and the three-level one that simulates
//! inverse roles with role abstractions.

use std::collections::{BTreeMap, BTreeSet};

use abdl_core::cq::is_connected;
use abdl_core::{Atom, Concept, Cq, Name, Ontology, Role, Semantics, Statement, Var};

use crate::{name, Emitter, Fresh, Gadget, GadgetError};

/// A CI in ALCI normal form.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum NfCi {
    /// `A1 ⊓ … ⊓ An ⊑ B1 ⊔ … ⊔ Bm` (empty sides read as ⊤ and ⊥).
    Clause(Vec<Name>, Vec<Name>),
    Exists(Name, Role, Name),
    Forall(Name, Role, Name),
    Not(Name, Name),
}

impl NfCi {
    pub fn to_concepts(&self) -> (Concept, Concept) {
        match self {
            NfCi::Clause(l, r) => (Concept::and_all(l.iter().map(|a| name(a))), Concept::or_all(r.iter().map(|b| name(b)))),
            NfCi::Exists(a, r, b) => (name(a), Concept::exists(r.clone(), name(b))),
            NfCi::Forall(a, r, b) => (name(a), Concept::forall(r.clone(), name(b))),
            NfCi::Not(a, b) => (name(a), Concept::not(name(b))),
        }
    }
}

fn conjuncts(c: &Concept, out: &mut Vec<Name>) -> bool {
    match c {
        Concept::Top => true,
        Concept::Name(a) => {
            out.push(a.clone());
            true
        }
        Concept::And(a, b) => conjuncts(a, out) && conjuncts(b, out),
        _ => false,
    }
}

fn disjuncts(c: &Concept, out: &mut Vec<Name>) -> bool {
    match c {
        Concept::Bot => true,
        Concept::Name(a) => {
            out.push(a.clone());
            true
        }
        Concept::Or(a, b) => disjuncts(a, out) && disjuncts(b, out),
        _ => false,
    }
}

/// Recognizes CIs that are already in normal form.
fn as_normal(lhs: &Concept, rhs: &Concept) -> Option<NfCi> {
    if let (Concept::Name(a), Some(inner)) = (lhs, rhs_inner(rhs)) {
        return Some(match (rhs, inner) {
            (Concept::Exists(r, _), b) => NfCi::Exists(a.clone(), r.clone(), b),
            (Concept::Forall(r, _), b) => NfCi::Forall(a.clone(), r.clone(), b),
            (_, b) => NfCi::Not(a.clone(), b),
        });
    }
    let (mut l, mut r) = (vec![], vec![]);
    (conjuncts(lhs, &mut l) && disjuncts(rhs, &mut r)).then_some(NfCi::Clause(l, r))
}

fn rhs_inner(c: &Concept) -> Option<Name> {
    match c {
        Concept::Exists(_, b) | Concept::Forall(_, b) | Concept::Not(b) => b.as_name().map(str::to_string),
        _ => None,
    }
}

struct Tseitin<'a> {
    fresh: &'a mut Fresh,
    memo: BTreeMap<Concept, Name>,
    out: Vec<NfCi>,
}

impl Tseitin<'_> {
    /// A name `X` with `X ⊑ c`, for `c` in NNF.
    fn pos(&mut self, c: &Concept) -> Name {
        if let Concept::Name(a) = c {
            return a.clone();
        }
        if let Some(n) = self.memo.get(c) {
            return n.clone();
        }
        let x = self.fresh.numbered("X");
        self.memo.insert(c.clone(), x.clone());
        let ci = match c {
            Concept::Top => None,
            Concept::Bot => Some(NfCi::Clause(vec![x.clone()], vec![])),
            Concept::Not(a) => {
                let a = self.pos_name(a);
                Some(NfCi::Not(x.clone(), a))
            }
            Concept::And(a, b) => {
                let (a, b) = (self.pos(a), self.pos(b));
                self.out.push(NfCi::Clause(vec![x.clone()], vec![a]));
                Some(NfCi::Clause(vec![x.clone()], vec![b]))
            }
            Concept::Or(a, b) => {
                let (a, b) = (self.pos(a), self.pos(b));
                Some(NfCi::Clause(vec![x.clone()], vec![a, b]))
            }
            Concept::Exists(r, a) => {
                let a = self.pos(a);
                Some(NfCi::Exists(x.clone(), r.clone(), a))
            }
            Concept::Forall(r, a) => {
                let a = self.pos(a);
                Some(NfCi::Forall(x.clone(), r.clone(), a))
            }
            Concept::Name(_) => unreachable!(),
        };
        self.out.extend(ci);
        x
    }

    /// Negation in NNF only applies to names.
    fn pos_name(&mut self, c: &Concept) -> Name {
        match c {
            Concept::Name(a) => a.clone(),
            other => self.pos(&Concept::not(other.clone()).nnf()),
        }
    }
}

/// Converts the CIs of `o` (levels ignored) into ALCI normal form; CIs
/// already in that form are kept. Fresh names come from `fresh`.
pub fn alci_normal_form(o: &Ontology, fresh: &mut Fresh) -> Result<Vec<NfCi>, GadgetError> {
    let mut t = Tseitin { fresh, memo: BTreeMap::new(), out: vec![] };
    for s in &o.statements {
        let Statement::Ci { lhs, rhs, .. } = s else { return Err(GadgetError::NotPlain(s.kind())) };
        if let Some(ci) = as_normal(lhs, rhs) {
            t.out.push(ci);
            continue;
        }
        let e = Concept::or(Concept::not(lhs.clone()), rhs.clone()).nnf();
        let x = t.pos(&e);
        t.out.push(NfCi::Clause(vec![], vec![x]));
    }
    let mut seen = BTreeSet::new();
    Ok(t.out.into_iter().filter(|c| seen.insert(c.clone())).collect())
}

fn plain_cis(o: &Ontology) -> Result<Vec<(Concept, Concept)>, GadgetError> {
    o.statements
        .iter()
        .map(|s| match s {
            Statement::Ci { lhs, rhs, .. } => Ok((lhs.clone(), rhs.clone())),
            other => Err(GadgetError::NotPlain(other.kind())),
        })
        .collect()
}

/// All variables of `q` as answer variables.
fn dequantify(q: &Cq) -> Cq {
    Cq { vars: q.all_vars(), split: None, exvars: vec![], atoms: q.atoms.clone() }
}

/// `O` at level `L` plus `L':⊥ abstracts L:q̂`; the goal is `A0@L`.
pub fn gen_ca_simple(o: &Ontology, a0: &str, q: &Cq) -> Result<Gadget, GadgetError> {
    if !q.vars.is_empty() {
        return Err(GadgetError::NotBoolean);
    }
    if !is_connected(q) {
        return Err(GadgetError::Disconnected);
    }
    let mut e = Emitter::default();
    for (lhs, rhs) in plain_cis(o)? {
        e.ci("ci", "L", lhs, rhs);
    }
    let stmt = Statement::ConceptAbs { coarse: "L'".into(), concept: Concept::Bot, fine: "L".into(), cq: dequantify(q) };
    e.emit("query-trap", stmt);
    Ok(e.finish(Semantics::Standard, name(a0), "L"))
}

fn var(s: &str) -> Var {
    s.to_string()
}

/// The role-abstraction reduction over levels `L1 ≺ L2 ≺ L3`; the goal is
/// `A0@L1`. The query trap abstracts level `L2`, where the inverse edges
/// are materialized.
pub fn gen_ra_reduction(o: &Ontology, a0: &str, q: &Cq) -> Result<Gadget, GadgetError> {
    let mut fresh = Fresh::new(o);
    fresh.reserve(a0);
    for a in &q.atoms {
        match a {
            Atom::Concept(c, _) => {
                let (mut cs, mut rs) = (BTreeSet::new(), BTreeSet::new());
                c.collect_names(&mut cs, &mut rs);
                cs.iter().for_each(|n| fresh.reserve(n));
            }
            Atom::Role(r, _, _) => fresh.reserve(&r.name),
        }
    }
    for l in ["L1", "L2", "L3"] {
        fresh.reserve(l);
    }
    let nf = alci_normal_form(o, &mut fresh)?;

    // ∀r⁻ elimination
    let mut no_inv_forall = vec![];
    let mut e = Emitter::default();
    for ci in nf {
        match ci {
            NfCi::Forall(a, r, b) if r.inverse => {
                let b_bar = fresh.name(&format!("{b}_bar"));
                let a_bar = fresh.name(&format!("{a}_bar"));
                no_inv_forall.push(("inverse-forall", NfCi::Clause(vec![], vec![b.clone(), b_bar.clone()])));
                no_inv_forall.push(("inverse-forall", NfCi::Forall(b_bar, Role::new(r.name.clone()), a_bar.clone())));
                no_inv_forall.push(("inverse-forall", NfCi::Not(a_bar, a)));
            }
            other => no_inv_forall.push(("alc", other)),
        }
    }

    let roles: BTreeSet<Name> = o.role_names().into_iter().chain(q.atoms.iter().filter_map(|a| match a {
        Atom::Role(r, _, _) => Some(r.name.clone()),
        _ => None,
    })).collect();
    let hat: BTreeMap<Name, Name> = roles.iter().map(|r| (r.clone(), fresh.name(&format!("{r}_hat")))).collect();

    // O_ALC at L1
    let mut concepts = BTreeSet::from([a0.to_string()]);
    for a in &q.atoms {
        if let Atom::Concept(c, _) = a {
            c.collect_names(&mut concepts, &mut BTreeSet::new());
        }
    }
    let mut push_alc = |e: &mut Emitter, family: &str, lhs: Concept, rhs: Concept| {
        let (mut cs, mut rs) = (BTreeSet::new(), BTreeSet::new());
        lhs.collect_names(&mut cs, &mut rs);
        rhs.collect_names(&mut cs, &mut rs);
        concepts.extend(cs);
        e.ci(family, "L1", lhs, rhs);
    };
    for (family, ci) in &no_inv_forall {
        match ci {
            NfCi::Exists(a, r, b) if r.inverse => {
                push_alc(&mut e, family, name(a), Concept::exists(Role::new(hat[&r.name].clone()), name(b)));
            }
            NfCi::Forall(a, r, b) => {
                let (l, rr) = ci.to_concepts();
                push_alc(&mut e, family, l, rr);
                push_alc(&mut e, "hat-forall", Concept::exists(Role::new(hat[&r.name].clone()), name(a)), name(b));
            }
            _ => {
                let (l, r) = ci.to_concepts();
                push_alc(&mut e, family, l, r);
            }
        }
    }

    for r in &roles {
        let xy = Cq::new_split(&["x"], &["y"], vec![Atom::Role(Role::new(r.clone()), var("x"), var("y"))]);
        let yx = Cq::new_split(&["x"], &["y"], vec![Atom::Role(Role::new(hat[r].clone()), var("y"), var("x"))]);
        for cq in [xy, yx] {
            e.emit(
                "role-copy",
                Statement::RoleAbs { coarse: "L2".into(), role: Role::new(r.clone()), fine: "L1".into(), cq },
            );
        }
    }
    let copies: Vec<(Name, Name)> = concepts.iter().map(|a| (a.clone(), fresh.name(&format!("r_{a}")))).collect();
    for (a, ra) in &copies {
        for l in ["L1", "L2"] {
            e.equiv("concept-copy", l, name(a), Concept::exists(Role::new(ra.clone()), Concept::Top));
        }
    }
    for (_, ra) in &copies {
        let cq = Cq::new_split(&["x"], &["y"], vec![Atom::Role(Role::new(ra.clone()), var("x"), var("y"))]);
        e.emit("concept-copy-abs", Statement::RoleAbs { coarse: "L2".into(), role: Role::new(ra.clone()), fine: "L1".into(), cq });
    }

    let rq = fresh.name("r_q");
    let vars = q.all_vars();
    let mut z = "z".to_string();
    while vars.contains(&z) {
        z.push('\'');
    }
    let mut atoms = q.atoms.clone();
    atoms.push(Atom::Concept(Concept::Top, z.clone()));
    let mut qv = vars.clone();
    qv.push(z);
    let qhat = Cq { vars: qv, split: Some(vars.len()), exvars: vec![], atoms };
    e.emit("query-trap", Statement::RoleAbs { coarse: "L3".into(), role: Role::new(rq.clone()), fine: "L2".into(), cq: qhat });
    e.ci("query-trap", "L3", Concept::exists(Role::new(rq), Concept::Top), Concept::Bot);
    Ok(e.finish(Semantics::Standard, name(a0), "L1"))
}
