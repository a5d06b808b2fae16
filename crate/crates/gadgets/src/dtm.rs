//! DTM encodings for the three undecidable variants (repetition-free
//! ensembles, DAG-shaped level graphs, quantified CQ variables), and a
//! finite truncation of the intended grid model.
//!
//! The computation lives on level `L`: `t` is the next tape cell, `c`
//! the next configuration. All three share the same tail of CIs.

use std::collections::BTreeMap;

use abdl_core::{AInterpretation, Atom, Concept, Cq, LevelInterp, Role, Semantics, Statement};

use crate::machine::{DtmSpec, Move};
use crate::rr::{machine_tail, MachineNames, B_RIGHT, H_LEFT, H_RIGHT};
use crate::{name, Emitter, Gadget, GadgetError};

const L: &str = "L";

fn role(r: &str) -> Role {
    Role::new(r)
}

fn ra(r: &str, x: &str, y: &str) -> Atom {
    Atom::Role(role(r), x.into(), y.into())
}

fn ca(c: &str, x: &str) -> Atom {
    Atom::Concept(name(c), x.into())
}

/// Answer variables in order of first occurrence.
fn full_cq(atoms: Vec<Atom>) -> Cq {
    let mut vars: Vec<String> = vec![];
    for a in &atoms {
        for v in a.vars() {
            if !vars.contains(v) {
                vars.push(v.clone());
            }
        }
    }
    Cq { vars, split: None, exvars: vec![], atoms }
}

/// Initial configuration, transition markers, the shared machine tail and
/// the halting trap.
fn tail(e: &mut Emitter, m: &DtmSpec) {
    let nm = MachineNames;
    e.ci("initial", L, name("S"), Concept::and_all([nm.state(&m.start), nm.symbol(&m.blank), name(B_RIGHT)]));
    e.ci("initial", L, name(B_RIGHT), Concept::forall(role("t"), Concept::and(nm.symbol(&m.blank), name(B_RIGHT))));
    for ((q, s), (q2, s2, mv)) in &m.delta {
        e.ci("step", L, Concept::and(nm.state(q), nm.symbol(s)), Concept::forall(role("c"), nm.choice(q2, s2, *mv)));
    }
    machine_tail(e, L, &m.states, &m.work, "t", &["c"], &nm);
    e.ci("halt", L, nm.state(&m.halt), Concept::Bot);
}

/// Grid via repetition-free ensembles; levels `L ≺ L'`, goal `S @ L`.
pub fn gen_repfree_dtm(m: &DtmSpec) -> Result<Gadget, GadgetError> {
    m.validate()?;
    let mut e = Emitter::default();
    e.ci("grid", L, Concept::Top, Concept::and(Concept::exists(role("t"), Concept::Top), Concept::exists(role("c"), Concept::Top)));
    let bot = |e: &mut Emitter, family: &str, atoms| {
        e.emit(family, Statement::ConceptAbs { coarse: "L'".into(), concept: Concept::Bot, fine: L.into(), cq: full_cq(atoms) })
    };
    bot(&mut e, "cell", vec![ra("c", "x1", "x2"), ra("t", "x1", "x3"), ra("c", "x3", "x4"), ra("t", "x2", "x4'")]);
    for atoms in [
        vec![ra("t", "x1", "x2"), ra("c", "x1", "x2")],
        vec![ra("t", "x1", "x2"), ra("c", "x2", "x1")],
        vec![ra("t", "x1", "x2"), ra("c", "x1", "x3"), ra("t", "x3", "x2")],
        vec![ra("c", "x1", "x1")],
        vec![ra("t", "x1", "x2"), ra("c", "x1", "x3"), ra("c", "x2", "x3")],
        vec![ra("t", "x1", "x1")],
    ] {
        bot(&mut e, "exclusion", atoms);
    }
    tail(&mut e, m);
    Ok(e.finish(Semantics::RepetitionFree, name("S"), L))
}

/// A `t`-path with `c`-paths below every node, labelled by `X1..X4`
/// according to the parity of the grid position.
fn path_and_labels(e: &mut Emitter) {
    let (s, at, ac) = (name("S"), name("A_t"), name("A_c"));
    e.ci("seed", L, s.clone(), at.clone());
    e.ci("seed", L, at.clone(), Concept::exists(role("t"), at.clone()));
    e.ci("seed", L, at, Concept::exists(role("c"), ac.clone()));
    e.ci("seed", L, ac.clone(), Concept::exists(role("c"), ac));
    let x = |i: usize| name(&format!("X{i}"));
    let all = |r: &str, c| Concept::forall(role(r), c);
    e.ci("label", L, x(1), Concept::and(all("c", x(3)), all("t", x(2))));
    e.ci("label", L, x(2), Concept::and(all("c", x(4)), all("t", x(1))));
    e.ci("label", L, x(3), all("c", x(1)));
    e.ci("label", L, x(4), all("c", x(2)));
    e.ci("label", L, s, x(1));
}

/// Grid via four coarser levels `L1..L4` above `L` (a DAG); goal `S @ L`.
pub fn gen_dag_dtm(m: &DtmSpec) -> Result<Gadget, GadgetError> {
    m.validate()?;
    let mut e = Emitter::default();
    path_and_labels(&mut e);
    for i in 1..=4 {
        let q = |extra: Vec<Atom>| {
            let mut atoms =
                vec![ca(&format!("X{i}"), "x1"), ra("c", "x1", "x3"), ra("t", "x1", "x2"), ra("c", "x2", "x4")];
            atoms.extend(extra);
            Cq::new(&["x1", "x2", "x3", "x4"], atoms)
        };
        let (li, u) = (format!("L{i}"), name(&format!("U{i}")));
        e.emit("cell", Statement::ConceptAbs { coarse: li.clone(), concept: u.clone(), fine: L.into(), cq: q(vec![]) });
        e.emit(
            "cell",
            Statement::ConceptRef { fine: L.into(), cq: q(vec![ra("t", "x3", "x4")]), coarse: li, concept: u },
        );
    }
    tail(&mut e, m);
    Ok(e.finish(Semantics::Dag, name("S"), L))
}

/// `q(x1,x2) = ∃y…`: a `t`-edge between `y1`, `y2` carried down `c`-paths
/// to `x1`, `x2`, with the given labels along each path.
fn carried(top: [usize; 2], path: &[[usize; 2]]) -> Cq {
    let mut ys = vec!["y1".to_string(), "y2".to_string()];
    let mut atoms = vec![ca(&format!("X{}", top[0]), "y1"), ca(&format!("X{}", top[1]), "y2"), ra("t", "y1", "y2")];
    let mut prev = ["y1".to_string(), "y2".to_string()];
    for (k, labels) in path.iter().enumerate() {
        let last = k + 1 == path.len();
        let cur = if last {
            ["x1".to_string(), "x2".to_string()]
        } else {
            let n = ys.len();
            [format!("y{}", n + 1), format!("y{}", n + 2)]
        };
        if !last {
            ys.extend(cur.iter().cloned());
        }
        for side in 0..2 {
            atoms.push(ca(&format!("X{}", labels[side]), &cur[side]));
            atoms.push(ra("c", &prev[side], &cur[side]));
        }
        prev = cur;
    }
    Cq { vars: vec!["x1".into(), "x2".into()], split: None, exvars: ys, atoms }
}

/// Every other grid cell closed through quantified variables; levels
/// `L ≺ L'`, goal `S @ L`. Missing `t`-edges are bridged by `c;t;c⁻`.
pub fn gen_quantified_dtm(m: &DtmSpec) -> Result<Gadget, GadgetError> {
    m.validate()?;
    let mut e = Emitter::default();
    path_and_labels(&mut e);
    let queries = [
        carried([1, 2], &[[3, 4]]),
        carried([3, 4], &[[1, 2], [3, 4]]),
        carried([2, 1], &[[4, 3], [2, 1]]),
    ];
    for (i, q) in queries.into_iter().enumerate() {
        let u = name(&format!("U{}", i + 1));
        let mut refined = q.clone();
        refined.atoms.push(ra("t", "x1", "x2"));
        e.emit("cell", Statement::ConceptAbs { coarse: "L'".into(), concept: u.clone(), fine: L.into(), cq: q });
        e.emit("cell", Statement::ConceptRef { fine: L.into(), cq: refined, coarse: "L'".into(), concept: u });
    }
    tail(&mut e, m);
    let nm = MachineNames;
    let bridge = || [role("c"), role("t"), role("c").inv()];
    let all = |c: Concept| bridge().into_iter().rev().fold(c, |c, r| Concept::forall(r, c));
    let some = |c: Concept| bridge().into_iter().rev().fold(c, |c, r| Concept::exists(r, c));
    for q in &m.states {
        for s in &m.work {
            e.ci("bridge", L, some(nm.choice(q, s, Move::L)), nm.state(q));
            e.ci("bridge", L, nm.choice(q, s, Move::R), all(nm.state(q)));
        }
    }
    for q in &m.states {
        e.ci("bridge", L, nm.state(q), all(name(H_LEFT)));
        e.ci("bridge", L, some(nm.state(q)), name(H_RIGHT));
    }
    e.ci("bridge", L, name(H_LEFT), all(name(H_LEFT)));
    e.ci("bridge", L, some(name(H_RIGHT)), name(H_RIGHT));
    Ok(e.finish(Semantics::Quantified, name("S"), L))
}

/// The intended model of [`gen_repfree_dtm`] cut to a `k × k` grid.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Grid {
    pub k: usize,
    pub interpretation: AInterpretation,
}

impl Grid {
    /// Element after `i` steps and at tape cell `j`.
    pub fn element(i: usize, j: usize) -> String {
        format!("c{i}t{j}")
    }

    /// Elements of the last row or column, which lack successors.
    pub fn is_boundary(&self, d: &str) -> bool {
        (0..self.k).any(|x| d == Self::element(self.k - 1, x) || d == Self::element(x, self.k - 1))
    }
}

/// Level `L` holds the first `k` configurations of the run on the empty
/// tape, restricted to the first `k` cells; level `L'` is a single
/// element and ρ is empty.
pub fn grid_fixture(k: usize, m: &DtmSpec) -> Result<Grid, GadgetError> {
    m.validate()?;
    if k < 2 {
        return Err(GadgetError::Parameter("the grid needs k ≥ 2".into()));
    }
    let run = m.run(k - 1)?;
    let nm = MachineNames;
    let label = |c: Concept| c.as_name().unwrap().to_string();
    let el = Grid::element;
    let mut li = LevelInterp::with_domain((0..k).flat_map(|i| (0..k).map(move |j| el(i, j))));
    li.add_concept("S", &el(0, 0));
    for (i, (q, head, tape)) in run.iter().enumerate() {
        for j in 0..k {
            let d = el(i, j);
            let sym = tape.get(j).unwrap_or(&m.blank);
            li.add_concept(&label(nm.symbol(sym)), &d);
            if j == *head {
                li.add_concept(&label(nm.state(q)), &d);
            } else if j < *head {
                li.add_concept(H_RIGHT, &d);
            } else {
                li.add_concept(H_LEFT, &d);
            }
            if i == 0 {
                li.add_concept(B_RIGHT, &d);
            }
            if i + 1 < k {
                li.add_role("c", &d, &el(i + 1, j));
            }
            if j + 1 < k {
                li.add_role("t", &d, &el(i, j + 1));
            }
        }
        if i > 0 {
            let (pq, ph, ptape) = &run[i - 1];
            let ps = ptape.get(*ph).unwrap_or(&m.blank);
            let (q2, s2, mv) = &m.delta[&(pq.clone(), ps.clone())];
            if *ph < k {
                li.add_concept(&label(nm.choice(q2, s2, *mv)), &el(i, *ph));
            }
        }
    }
    let mut levels = BTreeMap::new();
    levels.insert(L.to_string(), li);
    levels.insert("L'".to_string(), LevelInterp::with_domain(["d"]));
    let interpretation = AInterpretation { levels, prec: [(L.to_string(), "L'".to_string())].into(), rho: BTreeMap::new() };
    Ok(Grid { k, interpretation })
}
