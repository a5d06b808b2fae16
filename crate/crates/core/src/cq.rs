//! Conjunctive queries: homomorphisms, answers, connectivity, maximally
//! connected components and the decomposition into components w.r.t. a
//! variable set.

use std::collections::{BTreeMap, BTreeSet};

use crate::check::eval_concept;
use crate::model::{Atom, Concept, Cq, Name, Ontology, Role, Statement, Var};
use crate::structure::Structure;

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum CqError {
    #[error("variable {0} does not occur in the query")]
    UnknownVariable(Var),
}

/// A partial assignment of query variables to elements of one level.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct PartialMatch {
    pub assignment: BTreeMap<Var, usize>,
    pub level: Name,
}

enum Check {
    Unary(usize, Vec<bool>),
    Binary(Role, usize, usize),
}

struct Compiled {
    nvars: usize,
    /// checks[k] holds the atoms whose last variable (in search order) is k
    checks: Vec<Vec<Check>>,
}

fn compile(q: &Cq, s: &Structure) -> Compiled {
    let vars = q.all_vars();
    let idx: BTreeMap<&Var, usize> = vars.iter().enumerate().map(|(i, v)| (v, i)).collect();
    let mut checks: Vec<Vec<Check>> = (0..vars.len()).map(|_| vec![]).collect();
    let mut cache: BTreeMap<&Concept, Vec<bool>> = BTreeMap::new();
    for a in &q.atoms {
        match a {
            Atom::Concept(c, v) => {
                let Some(&i) = idx.get(v) else { continue };
                let ext = cache.entry(c).or_insert_with(|| eval_concept(c, s)).clone();
                checks[i].push(Check::Unary(i, ext));
            }
            Atom::Role(r, a, b) => {
                let (Some(&i), Some(&j)) = (idx.get(a), idx.get(b)) else { continue };
                checks[i.max(j)].push(Check::Binary(r.clone(), i, j));
            }
        }
    }
    Compiled { nvars: vars.len(), checks }
}

fn search(c: &Compiled, s: &Structure, seed: &[Option<usize>], f: &mut dyn FnMut(&[usize]) -> bool) {
    let mut asg = vec![0usize; c.nvars];
    fn go(
        k: usize,
        c: &Compiled,
        s: &Structure,
        seed: &[Option<usize>],
        asg: &mut Vec<usize>,
        f: &mut dyn FnMut(&[usize]) -> bool,
    ) -> bool {
        if k == c.nvars {
            return f(asg);
        }
        let range: Vec<usize> = match seed[k] {
            Some(d) if d < s.size() => vec![d],
            Some(_) => vec![],
            None => (0..s.size()).collect(),
        };
        'cand: for d in range {
            asg[k] = d;
            for chk in &c.checks[k] {
                let ok = match chk {
                    Check::Unary(i, ext) => ext[asg[*i]],
                    Check::Binary(r, i, j) => s.has_edge(r, asg[*i], asg[*j]),
                };
                if !ok {
                    continue 'cand;
                }
            }
            if !go(k + 1, c, s, seed, asg, f) {
                return false;
            }
        }
        true
    }
    go(0, c, s, seed, &mut asg, f);
}

fn seed_vector(q: &Cq, seed: &BTreeMap<Var, usize>) -> Vec<Option<usize>> {
    q.all_vars().iter().map(|v| seed.get(v).copied()).collect()
}

/// Calls `f` on every homomorphism extending `seed` (values indexed like
/// `q.all_vars()`), in lexicographic order; stops when `f` returns false.
pub fn for_each_homomorphism(
    q: &Cq,
    s: &Structure,
    seed: &BTreeMap<Var, usize>,
    mut f: impl FnMut(&[usize]) -> bool,
) {
    let c = compile(q, s);
    search(&c, s, &seed_vector(q, seed), &mut f);
}

pub fn homomorphisms(q: &Cq, s: &Structure, seed: &BTreeMap<Var, usize>) -> Vec<Vec<usize>> {
    let mut out = vec![];
    for_each_homomorphism(q, s, seed, |h| {
        out.push(h.to_vec());
        true
    });
    out
}

pub fn has_homomorphism(q: &Cq, s: &Structure, seed: &BTreeMap<Var, usize>) -> bool {
    let mut found = false;
    for_each_homomorphism(q, s, seed, |_| {
        found = true;
        false
    });
    found
}

/// q(I): homomorphisms projected to the answer variables.
pub fn answers(q: &Cq, s: &Structure) -> BTreeSet<Vec<usize>> {
    let k = q.vars.len();
    let mut out = BTreeSet::new();
    for_each_homomorphism(q, s, &BTreeMap::new(), |h| {
        out.insert(h[..k].to_vec());
        true
    });
    out
}

/// Whether `tuple` (over the answer variables) is an answer.
pub fn is_answer(q: &Cq, s: &Structure, tuple: &[usize]) -> bool {
    if tuple.len() != q.vars.len() {
        return false;
    }
    let seed: BTreeMap<Var, usize> = q.vars.iter().cloned().zip(tuple.iter().copied()).collect();
    // repeated variables are not allowed, so the seed is faithful
    has_homomorphism(q, s, &seed)
}

fn var_components(q: &Cq, vars: &[Var]) -> Vec<Vec<Var>> {
    let idx: BTreeMap<&Var, usize> = vars.iter().enumerate().map(|(i, v)| (v, i)).collect();
    let mut parent: Vec<usize> = (0..vars.len()).collect();
    fn find(p: &mut Vec<usize>, x: usize) -> usize {
        let mut r = x;
        while p[r] != r {
            r = p[r];
        }
        let mut y = x;
        while p[y] != r {
            let next = p[y];
            p[y] = r;
            y = next;
        }
        r
    }
    for a in &q.atoms {
        if let Atom::Role(_, x, y) = a {
            if let (Some(&i), Some(&j)) = (idx.get(x), idx.get(y)) {
                let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                if ri != rj {
                    parent[ri.max(rj)] = ri.min(rj);
                }
            }
        }
    }
    let mut groups: BTreeMap<usize, Vec<Var>> = BTreeMap::new();
    for (i, v) in vars.iter().enumerate() {
        let r = find(&mut parent, i);
        groups.entry(r).or_default().push(v.clone());
    }
    groups.into_values().collect()
}

pub fn is_connected(q: &Cq) -> bool {
    var_components(q, &q.all_vars()).len() <= 1
}

/// `q|_V`: the atoms whose variables all lie in `V`, over the variables `V`.
pub fn restrict(q: &Cq, v: &BTreeSet<Var>) -> Cq {
    Cq {
        vars: q.vars.iter().filter(|x| v.contains(*x)).cloned().collect(),
        split: None,
        exvars: q.exvars.iter().filter(|x| v.contains(*x)).cloned().collect(),
        atoms: q.atoms.iter().filter(|a| a.vars().iter().all(|x| v.contains(*x))).cloned().collect(),
    }
}

/// Maximally connected components, in order of their first variable.
pub fn mccs(q: &Cq) -> Vec<Cq> {
    var_components(q, &q.all_vars())
        .into_iter()
        .map(|vs| restrict(q, &vs.into_iter().collect()))
        .collect()
}

/// A component `p = E ⊎ p0` of a query w.r.t. a variable set.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Component {
    pub crossing: Vec<Atom>,
    pub p0: Cq,
    pub query: Cq,
}

pub fn components_wrt(q: &Cq, v: &BTreeSet<Var>) -> Result<Vec<Component>, CqError> {
    let all = q.all_vars();
    if let Some(x) = v.iter().find(|x| !all.contains(x)) {
        return Err(CqError::UnknownVariable(x.clone()));
    }
    let vbar: BTreeSet<Var> = all.iter().filter(|x| !v.contains(*x)).cloned().collect();
    let rest = restrict(q, &vbar);
    let mut out = vec![];
    for p0 in mccs(&rest) {
        let pvars: BTreeSet<Var> = p0.all_vars().into_iter().collect();
        let crossing: Vec<Atom> = q
            .atoms
            .iter()
            .filter(|a| match a {
                Atom::Role(_, x, y) => {
                    (v.contains(x) && pvars.contains(y)) || (v.contains(y) && pvars.contains(x))
                }
                Atom::Concept(..) => false,
            })
            .cloned()
            .collect();
        let mut qv: BTreeSet<Var> = pvars.clone();
        for a in &crossing {
            qv.extend(a.vars().into_iter().cloned());
        }
        let query = Cq {
            vars: q.vars.iter().filter(|x| qv.contains(*x)).cloned().collect(),
            split: None,
            exvars: q.exvars.iter().filter(|x| qv.contains(*x)).cloned().collect(),
            atoms: q.atoms.iter().filter(|a| crossing.contains(a) || p0.atoms.contains(a)).cloned().collect(),
        };
        out.push(Component { crossing, p0, query });
    }
    Ok(out)
}

/// All atom subsets of `q` (2^|atoms| queries, before deduplication); every
/// variable is kept, orphaned ones get a `⊤` atom.
pub fn subqueries(q: &Cq) -> Vec<Cq> {
    let n = q.atoms.len();
    assert!(n < 24, "too many atoms for subquery enumeration");
    (0u32..(1 << n))
        .map(|mask| {
            let mut sub = Cq {
                vars: q.all_vars(),
                split: None,
                exvars: vec![],
                atoms: (0..n).filter(|i| mask & (1 << i) != 0).map(|i| q.atoms[i].clone()).collect(),
            };
            sub.cover_vars();
            sub
        })
        .collect()
}

/// A query in canonical form together with the renaming used: `renaming[i]`
/// is the original name of canonical variable `v{i}`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Canonical {
    pub query: Cq,
    pub renaming: Vec<Var>,
}

/// Canonical form up to variable renaming. Redundant `⊤` atoms are dropped,
/// orphaned variables get one; variables become `v0..vk`, and the sorted
/// atom list is minimal over all renamings (exact for up to 8 variables,
/// first-occurrence order beyond that).
pub fn canonical(q: &Cq) -> Canonical {
    let vars = q.all_vars();
    let mut atoms: Vec<Atom> = vec![];
    for a in &q.atoms {
        let redundant = matches!(a, Atom::Concept(Concept::Top, v)
            if q.atoms.iter().any(|b| b != a && b.mentions(v)));
        if !redundant && !atoms.contains(a) {
            atoms.push(a.clone());
        }
    }
    for v in &vars {
        if !atoms.iter().any(|a| a.mentions(v)) {
            atoms.push(Atom::Concept(Concept::Top, v.clone()));
        }
    }
    let rename = |perm: &[usize]| -> Vec<Atom> {
        // perm[i] = canonical index of original variable i
        let name = |v: &Var| format!("v{}", perm[vars.iter().position(|x| x == v).unwrap()]);
        let mut out: Vec<Atom> = atoms
            .iter()
            .map(|a| match a {
                Atom::Concept(c, v) => Atom::Concept(c.clone(), name(v)),
                Atom::Role(r, x, y) => Atom::Role(r.clone(), name(x), name(y)),
            })
            .collect();
        out.sort_by(atom_key_cmp);
        out
    };
    let n = vars.len();
    let best_perm: Vec<usize> = if n <= 8 {
        let mut perm: Vec<usize> = (0..n).collect();
        let mut best = (rename(&perm), perm.clone());
        permute(&mut perm, 0, &mut |p| {
            let cand = rename(p);
            if atoms_cmp(&cand, &best.0) == std::cmp::Ordering::Less {
                best = (cand, p.to_vec());
            }
        });
        best.1
    } else {
        first_occurrence(&vars, &atoms)
    };
    let mut renaming = vec![String::new(); n];
    for (i, &c) in best_perm.iter().enumerate() {
        renaming[c] = vars[i].clone();
    }
    let query = Cq { vars: (0..n).map(|i| format!("v{i}")).collect(), split: None, exvars: vec![], atoms: rename(&best_perm) };
    Canonical { query, renaming }
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

fn first_occurrence(vars: &[Var], atoms: &[Atom]) -> Vec<usize> {
    let mut sorted = atoms.to_vec();
    sorted.sort_by(atom_key_cmp);
    let mut order: Vec<&Var> = vec![];
    for a in &sorted {
        for v in a.vars() {
            if !order.contains(&v) {
                order.push(v);
            }
        }
    }
    vars.iter().map(|v| order.iter().position(|x| *x == v).unwrap()).collect()
}

/// Variable names compare by numeric suffix so that v10 sorts after v9.
fn var_key(v: &str) -> (usize, &str) {
    (v.trim_start_matches('v').parse().unwrap_or(usize::MAX), v)
}

fn atom_key_cmp(a: &Atom, b: &Atom) -> std::cmp::Ordering {
    match (a, b) {
        (Atom::Concept(c1, v1), Atom::Concept(c2, v2)) => (c1, var_key(v1)).cmp(&(c2, var_key(v2))),
        (Atom::Concept(..), Atom::Role(..)) => std::cmp::Ordering::Less,
        (Atom::Role(..), Atom::Concept(..)) => std::cmp::Ordering::Greater,
        (Atom::Role(r1, x1, y1), Atom::Role(r2, x2, y2)) => {
            (r1, var_key(x1), var_key(y1)).cmp(&(r2, var_key(x2), var_key(y2)))
        }
    }
}

fn atoms_cmp(a: &[Atom], b: &[Atom]) -> std::cmp::Ordering {
    for (x, y) in a.iter().zip(b) {
        let o = atom_key_cmp(x, y);
        if o != std::cmp::Ordering::Equal {
            return o;
        }
    }
    a.len().cmp(&b.len())
}

/// The CQs of all abstraction statements.
pub fn abstraction_cqs(o: &Ontology) -> Vec<&Cq> {
    o.statements
        .iter()
        .filter_map(|s| match s {
            Statement::ConceptAbs { cq, .. } | Statement::RoleAbs { cq, .. } => Some(cq),
            _ => None,
        })
        .collect()
}

/// Canonical forms of every subquery (restriction to a variable subset,
/// then any atom subset) of every abstraction CQ.
pub fn subqueries_for_forbidden(o: &Ontology) -> BTreeSet<Cq> {
    let mut out = BTreeSet::new();
    for q in abstraction_cqs(o) {
        let vars = q.all_vars();
        assert!(vars.len() < 16, "abstraction CQ too large for the forbidden-query universe");
        for wmask in 1u32..(1 << vars.len()) {
            let w: BTreeSet<Var> =
                vars.iter().enumerate().filter(|(i, _)| wmask & (1 << i) != 0).map(|(_, v)| v.clone()).collect();
            for sub in subqueries(&restrict(q, &w)) {
                out.insert(canonical(&sub).query);
            }
        }
    }
    out
}
