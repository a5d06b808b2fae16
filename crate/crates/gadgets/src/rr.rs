//! Role-refinement encoding of an exponentially space bounded ATM: the
//! tape doubles in length on every level, so level `L_n` holds
//! configurations of length `2^n`.

use abdl_core::{AInterpretation, Atom, Concept, Cq, LevelInterp, Role, RoleTriple, Semantics, Statement};

use crate::machine::{AtmSpec, Move};
use crate::{name, Emitter, Gadget, GadgetError};

fn role(r: &str) -> Role {
    Role::new(r)
}

fn forall_n(r: &str, k: usize, c: Concept) -> Concept {
    (0..k).fold(c, |c, _| Concept::forall(role(r), c))
}

/// Concept-name scheme shared by the machine gadgets.
pub(crate) struct MachineNames;

impl MachineNames {
    pub fn state(&self, q: &str) -> Concept {
        name(&format!("A_{q}"))
    }

    pub fn symbol(&self, s: &str) -> Concept {
        name(&format!("A_{s}"))
    }

    pub fn choice(&self, q: &str, s: &str, m: Move) -> Concept {
        name(&format!("B_{q}_{s}_{m}"))
    }
}

pub(crate) const H_LEFT: &str = "H_left";
pub(crate) const H_RIGHT: &str = "H_right";
pub(crate) const B_RIGHT: &str = "B_right";

/// Transition, head-marker, frame and uniqueness CIs shared by the ATM
/// and DTM encodings; `steps` are the roles to successor configurations.
pub(crate) fn machine_tail(
    e: &mut Emitter,
    level: &str,
    states: &[String],
    work: &[String],
    t: &str,
    steps: &[&str],
    nm: &MachineNames,
) {
    for q in states {
        for s in work {
            for m in [Move::L, Move::R] {
                e.ci("transition", level, nm.choice(q, s, m), nm.symbol(s));
            }
            e.ci("transition", level, Concept::exists(role(t), nm.choice(q, s, Move::L)), nm.state(q));
            e.ci("transition", level, nm.choice(q, s, Move::R), Concept::forall(role(t), nm.state(q)));
        }
    }
    for q in states {
        e.ci("head", level, nm.state(q), Concept::forall(role(t), name(H_LEFT)));
        e.ci("head", level, Concept::exists(role(t), nm.state(q)), name(H_RIGHT));
    }
    e.ci("head", level, name(H_LEFT), Concept::forall(role(t), name(H_LEFT)));
    e.ci("head", level, Concept::exists(role(t), name(H_RIGHT)), name(H_RIGHT));
    let off_head = || Concept::or(name(H_LEFT), name(H_RIGHT));
    for s in work {
        for c in steps {
            e.ci("frame", level, Concept::and(off_head(), nm.symbol(s)), Concept::forall(role(c), nm.symbol(s)));
        }
    }
    for q in states {
        for q2 in states.iter().filter(|q2| *q2 != q) {
            e.ci("unique-state", level, Concept::and(nm.state(q), nm.state(q2)), Concept::Bot);
        }
    }
    for s in work {
        for s2 in work.iter().filter(|s2| *s2 != s) {
            e.ci("unique-symbol", level, Concept::and(nm.symbol(s), nm.symbol(s2)), Concept::Bot);
        }
    }
    for q in states {
        e.ci("unique-head", level, Concept::and(off_head(), nm.state(q)), Concept::Bot);
    }
}

/// The ontology over levels `L1..Ln` (`n = |w|`, `L_{i+1} ≺ L_i`) whose
/// goal `S @ L1` is satisfiable iff the machine accepts `w`.
pub fn gen_rr_atm(m: &AtmSpec, w: &[String]) -> Result<Gadget, GadgetError> {
    m.validate()?;
    let n = w.len();
    if n == 0 {
        return Err(GadgetError::Parameter("the input word must be nonempty".into()));
    }
    if let Some(s) = w.iter().find(|s| !m.input.contains(s)) {
        return Err(GadgetError::Parameter(format!("{s} is not an input symbol")));
    }
    let nm = MachineNames;
    let level = |i: usize| format!("L{i}");
    let (t, c1, c2) = ("t", "c1", "c2");
    let (s, nn) = (name("S"), name("N"));
    let mut e = Emitter::default();

    let seed = Concept::and(Concept::exists(role(c1), nn.clone()), Concept::exists(role(c2), nn.clone()));
    e.ci("seed", &level(1), s.clone(), seed.clone());
    e.ci("seed", &level(1), nn, seed);

    let tr = |a: &str, x: &str, y: &str| Atom::Role(role(a), x.into(), y.into());
    let split = |atoms| Cq::new_split(&["x1", "x2"], &["y1", "y2"], atoms);
    let top_triple = |r: &str| RoleTriple { cx: Concept::Top, role: role(r), cy: Concept::Top };
    for i in 1..n {
        let (fine, coarse) = (level(i + 1), level(i));
        let q = split(vec![tr(t, "x1", "x2"), tr(t, "x2", "y1"), tr(t, "y1", "y2")]);
        e.emit("refine-t", Statement::RoleRef { fine: fine.clone(), cq: q, coarse: coarse.clone(), qr: top_triple(t) });
        for c in [c1, c2] {
            let q = split(vec![tr(t, "x1", "x2"), tr(t, "y1", "y2"), tr(c, "x1", "y1"), tr(c, "x2", "y2")]);
            e.emit("refine-c", Statement::RoleRef { fine: fine.clone(), cq: q, coarse: coarse.clone(), qr: top_triple(c) });
        }
        let q = split(vec![Atom::Concept(s.clone(), "x1".into()), tr(c1, "x1", "y1"), tr(c1, "x2", "y2")]);
        let qr = RoleTriple { cx: s.clone(), role: role(c1), cy: Concept::Top };
        e.emit("copy-s", Statement::RoleRef { fine, cq: q, coarse, qr });
    }

    let ln = level(n);
    let mut cells: Vec<Concept> = vec![nm.state(&m.start), nm.symbol(&w[0])];
    for (k, sym) in w.iter().enumerate().skip(1) {
        cells.push(forall_n(t, k, nm.symbol(sym)));
    }
    // the last cell also starts the blank suffix
    let last = Concept::and(nm.symbol(&w[n - 1]), name(B_RIGHT));
    cells[n] = forall_n(t, n - 1, last);
    e.ci("initial", &ln, s.clone(), Concept::and_all(cells));
    e.ci("initial", &ln, name(B_RIGHT), Concept::forall(role(t), Concept::and(nm.symbol(&m.blank), name(B_RIGHT))));

    for ((q, sym), ts) in &m.delta {
        let succ = |k: usize, c: &str| {
            let (q2, s2, mv) = &ts[k];
            Concept::forall(role(c), nm.choice(q2, s2, *mv))
        };
        let lhs = Concept::and(nm.state(q), nm.symbol(sym));
        if m.is_existential(q) {
            e.ci("existential", &ln, lhs, Concept::or(succ(0, c1), succ(1, c2)));
        } else {
            e.ci("universal", &ln, lhs, Concept::and(succ(0, c1), succ(1, c2)));
        }
    }
    machine_tail(&mut e, &ln, &m.states(), &m.work, t, &[c1, c2], &nm);
    e.ci("reject", &ln, nm.state(&m.reject), Concept::Bot);
    Ok(e.finish(Semantics::Standard, s, &level(1)))
}

fn word_name(w: &[u8], j: usize) -> String {
    let digits: String = w.iter().map(|b| char::from(b'0' + b)).collect();
    format!("p{digits}_{j}")
}

/// The `m`-computation tree truncated to branch words of length ≤
/// `cutoff`, as a single level `L`. Element `p{w}_{j}` is node `w·j`;
/// `c1` leads to the `0`-child and `c2` to the `1`-child.
pub fn computation_tree(m: usize, cutoff: usize) -> AInterpretation {
    let mut words: Vec<Vec<u8>> = vec![vec![]];
    let mut frontier = vec![vec![]];
    for _ in 0..cutoff {
        let next: Vec<Vec<u8>> = frontier
            .iter()
            .flat_map(|w: &Vec<u8>| (0..2u8).map(move |b| [w.as_slice(), &[b]].concat()))
            .collect();
        words.extend(next.iter().cloned());
        frontier = next;
    }
    let mut li = LevelInterp::with_domain(words.iter().flat_map(|w| (1..=m).map(move |j| word_name(w, j))));
    for w in &words {
        for j in 1..m {
            li.add_role("t", &word_name(w, j), &word_name(w, j + 1));
        }
        if w.len() < cutoff {
            for (b, c) in [(0u8, "c1"), (1, "c2")] {
                let child = [w.as_slice(), &[b]].concat();
                for j in 1..=m {
                    li.add_role(c, &word_name(w, j), &word_name(&child, j));
                }
            }
        }
    }
    let mut i = AInterpretation::default();
    i.levels.insert("L".into(), li);
    i
}
