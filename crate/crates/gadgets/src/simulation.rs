//! Simulating `C ⊑_L ⊥` and `C ⊑_L ∀r.D` with refinement and abstraction
//! statements only, over fresh names.

use abdl_core::{derived_prec, Atom, Concept, Cq, Ontology, Role, RoleTriple, Statement};

use crate::Fresh;

fn base(prefix: &str, c: &Concept) -> String {
    match c {
        Concept::Name(n) => format!("{prefix}_{n}"),
        _ => prefix.to_string(),
    }
}

/// `C ⊑_L ∃r_C.∃r_C.⊤` and `L':⊤ abstracts L: r_C(x,y)`. `L'` is `coarse`
/// if given, else the unique level directly above `L` in `context`, else
/// a fresh level.
pub fn gen_bot_simulation(c: &Concept, level: &str, coarse: Option<&str>, context: &Ontology) -> [Statement; 2] {
    let mut fresh = Fresh::new(context);
    fresh.reserve(level);
    let mut names = Default::default();
    c.collect_names(&mut names, &mut Default::default());
    names.iter().for_each(|n| fresh.reserve(n));
    let r = fresh.name(&base("r", c));
    let coarse = coarse.map(str::to_string).unwrap_or_else(|| {
        let above: Vec<String> = derived_prec(context).into_iter().filter(|(f, _)| f == level).map(|(_, c)| c).collect();
        match above.as_slice() {
            [one] => one.clone(),
            _ => fresh.name(&format!("{level}'")),
        }
    });
    let rc = Role::new(r.clone());
    let path = Concept::exists(rc.clone(), Concept::exists(rc.clone(), Concept::Top));
    let cq = Cq::new(&["x", "y"], vec![Atom::Role(rc, "x".into(), "y".into())]);
    [
        Statement::Ci { level: level.into(), lhs: c.clone(), rhs: path },
        Statement::ConceptAbs { coarse, concept: Concept::Top, fine: level.into(), cq },
    ]
}

/// `L': r(x,y) ∧ A(y) refines L: C(x) ∧ r(x,y)` and `L: D abstracts L': A(x)`
/// with a fresh level `L' ≺ L` and a fresh concept name `A`.
pub fn gen_forall_simulation(c: &Concept, r: &Role, d: &Concept, level: &str, context: &Ontology) -> [Statement; 2] {
    let mut fresh = Fresh::new(context);
    fresh.reserve(level);
    let mut names = Default::default();
    c.collect_names(&mut names, &mut Default::default());
    d.collect_names(&mut names, &mut Default::default());
    names.iter().for_each(|n| fresh.reserve(n));
    let a = fresh.name("A");
    let fine = fresh.name(&format!("{level}'"));
    let refined = Cq::new_split(
        &["x"],
        &["y"],
        vec![Atom::Role(r.clone(), "x".into(), "y".into()), Atom::Concept(Concept::name(a.clone()), "y".into())],
    );
    let qr = RoleTriple { cx: c.clone(), role: r.clone(), cy: Concept::Top };
    let marked = Cq::new(&["x"], vec![Atom::Concept(Concept::name(a), "x".into())]);
    [
        Statement::RoleRef { fine: fine.clone(), cq: refined, coarse: level.into(), qr },
        Statement::ConceptAbs { coarse: level.into(), concept: d.clone(), fine, cq: marked },
    ]
}
