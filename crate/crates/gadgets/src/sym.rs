//! Concept-abstraction reduction from simple CQ evaluation in ALC with a
//! single reflexive symmetric role `s`, represented as the composition
//! `r⁻;r` inside ensembles.

use std::collections::{BTreeMap, BTreeSet};

use abdl_core::cq::is_connected;
use abdl_core::{Atom, Concept, Cq, Name, Ontology, Role, Semantics, Statement};

use crate::{name, Emitter, Fresh, Gadget, GadgetError};

/// Every subconcept of `c`, including `c`.
fn subconcepts(c: &Concept, out: &mut Vec<Concept>) {
    out.push(c.clone());
    match c {
        Concept::Not(a) | Concept::Exists(_, a) | Concept::Forall(_, a) => subconcepts(a, out),
        Concept::And(a, b) | Concept::Or(a, b) => {
            subconcepts(a, out);
            subconcepts(b, out);
        }
        _ => {}
    }
}

/// `C̄`: the NNF of `¬C`.
pub fn complement(c: &Concept) -> Concept {
    Concept::not(c.clone()).nnf()
}

/// cl(O): the concepts of `o` (in NNF) and `extra`, closed under
/// subconcepts and complement.
pub fn closure(o: &Ontology, extra: &[Concept]) -> BTreeSet<Concept> {
    let mut todo: Vec<Concept> = extra.iter().map(Concept::nnf).collect();
    for s in &o.statements {
        if let Statement::Ci { lhs, rhs, .. } = s {
            todo.push(lhs.nnf());
            todo.push(rhs.nnf());
        }
    }
    let mut cl = BTreeSet::new();
    while let Some(c) = todo.pop() {
        if cl.contains(&c) {
            continue;
        }
        let mut subs = vec![];
        subconcepts(&c, &mut subs);
        for d in subs {
            if cl.insert(d.clone()) {
                todo.push(complement(&d));
            }
        }
    }
    cl
}

fn single_role(o: &Ontology, q: &Cq) -> Result<Option<Name>, GadgetError> {
    let mut roles = o.role_names();
    for a in &q.atoms {
        match a {
            Atom::Role(r, _, _) => {
                roles.insert(r.name.clone());
            }
            Atom::Concept(c, _) => c.collect_names(&mut BTreeSet::new(), &mut roles),
        }
    }
    match roles.len() {
        0 | 1 => Ok(roles.into_iter().next()),
        _ => Err(GadgetError::Roles(roles.into_iter().collect::<Vec<_>>().join(", "))),
    }
}

/// Replaces the symmetric role by the plain role `r` (inverses of `s`
/// are `s` itself).
fn strip_inverse(c: &Concept) -> Concept {
    match c {
        Concept::Exists(r, a) => Concept::exists(Role::new(r.name.clone()), strip_inverse(a)),
        Concept::Forall(r, a) => Concept::forall(Role::new(r.name.clone()), strip_inverse(a)),
        Concept::Not(a) => Concept::not(strip_inverse(a)),
        Concept::And(a, b) => Concept::and(strip_inverse(a), strip_inverse(b)),
        Concept::Or(a, b) => Concept::or(strip_inverse(a), strip_inverse(b)),
        _ => c.clone(),
    }
}

fn role(r: &str) -> Role {
    Role::new(r)
}

/// The reduction over levels `L ≺ L'`; the goal is `A0 ⊓ (E0 ⊔ E1)` at `L`.
pub fn gen_ca_sym_reduction(o: &Ontology, a0: &str, q: &Cq) -> Result<Gadget, GadgetError> {
    if !q.vars.is_empty() {
        return Err(GadgetError::NotBoolean);
    }
    if !is_connected(q) {
        return Err(GadgetError::Disconnected);
    }
    let mut cis = vec![];
    for s in &o.statements {
        let Statement::Ci { lhs, rhs, .. } = s else { return Err(GadgetError::NotPlain(s.kind())) };
        cis.push((strip_inverse(&lhs.nnf()), strip_inverse(&rhs.nnf())));
    }
    let s_role = single_role(o, q)?;
    let plain = Ontology::new(cis.iter().map(|(l, r)| Statement::Ci { level: "L".into(), lhs: l.clone(), rhs: r.clone() }).collect());
    let mut extra = vec![name(a0)];
    for a in &q.atoms {
        if let Atom::Concept(c, _) = a {
            extra.push(strip_inverse(c));
        }
    }
    let cl = closure(&plain, &extra);

    let mut fresh = Fresh::new(o);
    fresh.reserve(a0);
    for c in &cl {
        c.collect_names(&mut BTreeSet::new(), &mut BTreeSet::new());
        if let Concept::Name(b) = c {
            fresh.reserve(b);
        }
    }
    let mut a: BTreeMap<&Concept, Name> = BTreeMap::new();
    for c in &cl {
        let base = match c {
            Concept::Name(b) => format!("A_{b}"),
            Concept::Top => "A_top".into(),
            Concept::Bot => "A_bot".into(),
            _ => "A_c".into(),
        };
        let n = if matches!(c, Concept::Name(_) | Concept::Top | Concept::Bot) { fresh.name(&base) } else { fresh.numbered(&base) };
        a.insert(c, n);
    }
    let ac = |c: &Concept| name(&a[&c.nnf()]);
    let exists_s: Vec<&Concept> = cl.iter().filter(|c| matches!(c, Concept::Exists(..))).collect();
    let forall_s: Vec<&Concept> = cl.iter().filter(|c| matches!(c, Concept::Forall(..))).collect();
    let n = exists_s.len();

    let r = fresh.name("r");
    let rhat = fresh.name("r_hat");
    let u = fresh.name("u");
    let e_name: Vec<Name> = (0..2).map(|i| fresh.name(&format!("E{i}"))).collect();
    let n_name: Vec<Vec<Name>> = (0..2).map(|i| (0..=n).map(|j| fresh.name(&format!("N{i}_{j}"))).collect()).collect();
    // m_name[i][j][k] for 1 ≤ k ≤ j
    let m_name: Vec<Vec<Vec<Name>>> = (0..2)
        .map(|i| (0..=n).map(|j| (0..=j).map(|k| if k == 0 { String::new() } else { fresh.name(&format!("M{i}_{j}_{k}")) }).collect()).collect())
        .collect();
    let (l, lp) = ("L", "L'");

    let mut e = Emitter::default();
    for c in &cl {
        if matches!(c, Concept::Name(_) | Concept::Top | Concept::Bot) {
            e.equiv("1", l, ac(c), (*c).clone());
        }
    }
    for c in &cl {
        e.equiv("2", l, ac(&complement(c)), Concept::not(ac(c)));
    }
    for c in &cl {
        if let Concept::And(x, y) = c {
            e.equiv("3", l, ac(c), Concept::and(ac(x), ac(y)));
        }
    }
    for c in &cl {
        if let Concept::Or(x, y) = c {
            e.equiv("4", l, ac(c), Concept::or(ac(x), ac(y)));
        }
    }
    for (lhs, rhs) in &cis {
        e.ci("5", l, ac(lhs), ac(rhs));
    }
    for i in 0..2 {
        e.ci("6", l, name(&e_name[i]), Concept::or_all(n_name[i].iter().map(|x| name(x))));
    }
    for i in 0..2 {
        for j in 1..=n {
            let rhs = Concept::and_all((1..=j).map(|k| Concept::exists(role(&rhat), name(&m_name[i][j][k]))));
            e.ci("7", l, name(&n_name[i][j]), rhs);
        }
    }
    for i in 0..2 {
        for j in 1..=n {
            for k in 1..=j {
                let rhs = Concept::and(Concept::exists(role(&r), name(&e_name[0])), Concept::exists(role(&r), name(&e_name[1])));
                e.ci("8", l, name(&m_name[i][j][k]), rhs);
            }
        }
    }
    for ex in &exists_s {
        let Concept::Exists(_, c) = ex else { unreachable!() };
        for i in 0..2 {
            for j in 0..=n {
                let lhs = Concept::and(ac(ex), name(&n_name[i][j]));
                let via = (1..=j).map(|k| {
                    let inner = Concept::or(Concept::not(name(&e_name[1 - i])), ac(c));
                    Concept::forall(
                        role(&rhat),
                        Concept::or(Concept::not(name(&m_name[i][j][k])), Concept::forall(role(&r), inner)),
                    )
                });
                e.ci("9", l, lhs, Concept::or_all(std::iter::once(ac(c)).chain(via)));
            }
        }
    }
    for all in &forall_s {
        let Concept::Forall(_, c) = all else { unreachable!() };
        e.ci("10", l, ac(all), ac(c));
    }
    for all in &forall_s {
        let Concept::Forall(_, c) = all else { unreachable!() };
        e.ci("11", l, Concept::exists(role(&r), ac(all)), Concept::forall(role(&r), ac(c)));
    }
    for i in 0..2 {
        for j in 2..=n {
            for k in 1..j {
                e.ci("12", l, name(&m_name[i][j][k]), Concept::exists(role(&u), name(&m_name[i][j][k + 1])));
            }
        }
    }
    let x = |k: usize| format!("x{k}");
    for i in 0..2 {
        for j in 1..=n {
            let mut atoms = vec![Atom::Concept(name(&n_name[i][j]), x(0))];
            for k in 1..=j {
                atoms.push(Atom::Role(role(&rhat), x(0), x(k)));
                atoms.push(Atom::Concept(name(&m_name[i][j][k]), x(k)));
            }
            let vars: Vec<String> = (0..=j).map(x).collect();
            let cq = Cq { vars, split: None, exvars: vec![], atoms };
            e.emit("13", Statement::ConceptAbs { coarse: lp.into(), concept: Concept::Top, fine: l.into(), cq });
        }
    }
    for i in 0..2 {
        for j in 1..=n {
            for back in 1..=j {
                let mut atoms = vec![Atom::Concept(name(&e_name[i]), x(0)), Atom::Role(role(&r), x(back), x(0))];
                for k in 1..=j {
                    atoms.push(Atom::Concept(name(&m_name[i][j][k]), x(k)));
                    if k < j {
                        atoms.push(Atom::Role(role(&u), x(k), x(k + 1)));
                    }
                }
                let vars: Vec<String> = (0..=j).map(x).collect();
                let cq = Cq { vars, split: None, exvars: vec![], atoms };
                e.emit("14", Statement::ConceptAbs { coarse: lp.into(), concept: Concept::Top, fine: l.into(), cq });
            }
        }
    }
    let qhat = sym_query(q, s_role.as_deref(), &r, &|c| ac(&strip_inverse(c)), &e_name);
    e.emit("15", Statement::ConceptAbs { coarse: lp.into(), concept: Concept::Bot, fine: l.into(), cq: qhat });

    let goal = Concept::and(name(a0), Concept::or(name(&e_name[0]), name(&e_name[1])));
    Ok(e.finish(Semantics::Standard, goal, l))
}

/// q̂: concept atoms renamed to their `A_C`, every variable typed as an
/// endpoint, and each `s(x,y)` replaced by `r(z,x) ∧ r(z,y)`.
fn sym_query(q: &Cq, s: Option<&str>, r: &str, ac: &dyn Fn(&Concept) -> Concept, e: &[Name]) -> Cq {
    let vars = q.all_vars();
    let mut out = Cq { vars: vars.clone(), ..Default::default() };
    let mut k = 0;
    let mut fresh_var = |out: &Cq| loop {
        k += 1;
        let z = format!("z{k}");
        if !vars.contains(&z) && !out.vars.contains(&z) {
            return z;
        }
    };
    for a in &q.atoms {
        match a {
            Atom::Concept(c, x) => out.atoms.push(Atom::Concept(ac(c), x.clone())),
            Atom::Role(role, x, y) => {
                debug_assert_eq!(Some(role.name.as_str()), s);
                let z = fresh_var(&out);
                out.atoms.push(Atom::Role(Role::new(r), z.clone(), x.clone()));
                out.atoms.push(Atom::Role(Role::new(r), z.clone(), y.clone()));
                out.vars.push(z);
            }
        }
    }
    for v in &vars {
        out.atoms.push(Atom::Concept(Concept::or(name(&e[0]), name(&e[1])), v.clone()));
    }
    out
}
