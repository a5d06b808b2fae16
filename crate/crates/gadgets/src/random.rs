//! Seeded random ontologies for differential and oracle tests.
//!
//! Everything is a pure function of the seed, so a failing case can be
//! reproduced from the seed printed by the test.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use abdl_core::{validate_ontology, Atom, Concept, Cq, Name, Ontology, Role, RoleTriple, Statement};

/// Shape of the generated ontologies.
#[derive(Clone, Debug)]
pub struct Shape {
    pub levels: usize,
    pub concepts: usize,
    pub roles: usize,
    pub max_atoms: usize,
    pub max_vars: usize,
    pub max_size: usize,
    /// Also draw concept/role abstractions and role refinements.
    pub full: bool,
    pub inverse: bool,
}

impl Shape {
    /// Two levels, two concept names, one role, queries of at most three
    /// atoms, total size at most twelve; concept refinements only.
    pub fn tiny_cr() -> Self {
        Shape { levels: 2, concepts: 2, roles: 1, max_atoms: 3, max_vars: 3, max_size: 12, full: false, inverse: false }
    }

    pub fn tiny_full() -> Self {
        Shape { full: true, max_size: 16, ..Self::tiny_cr() }
    }
}

/// One test instance: an ontology with a goal concept at a level.
#[derive(Clone, Debug)]
pub struct Instance {
    pub seed: u64,
    pub ontology: Ontology,
    pub goal: Concept,
    pub level: Name,
}

struct Gen<'a> {
    rng: ChaCha8Rng,
    shape: &'a Shape,
}

fn level(i: usize) -> Name {
    format!("L{}", i + 1)
}

impl Gen<'_> {
    fn name(&mut self) -> Concept {
        let names = ["A", "B", "C", "D"];
        Concept::name(names[self.rng.gen_range(0..self.shape.concepts.clamp(1, 4))])
    }

    fn role(&mut self) -> Role {
        let names = ["r", "s", "t"];
        let r = Role::new(names[self.rng.gen_range(0..self.shape.roles.clamp(1, 3))]);
        if self.shape.inverse && self.rng.gen_bool(0.25) {
            r.inv()
        } else {
            r
        }
    }

    fn concept(&mut self, depth: usize) -> Concept {
        if depth == 0 || self.rng.gen_bool(0.45) {
            return match self.rng.gen_range(0..10) {
                0 => Concept::Top,
                1 => Concept::Bot,
                _ => self.name(),
            };
        }
        match self.rng.gen_range(0..5) {
            0 => Concept::not(self.concept(depth - 1)),
            1 => Concept::and(self.concept(depth - 1), self.concept(depth - 1)),
            2 => Concept::or(self.concept(depth - 1), self.concept(depth - 1)),
            3 => {
                let r = self.role();
                Concept::exists(r, self.concept(depth - 1))
            }
            _ => {
                let r = self.role();
                Concept::forall(r, self.concept(depth - 1))
            }
        }
    }

    /// A query over `vars` variables; every variable is covered and, if
    /// `connected`, the role atoms connect all of them.
    fn cq(&mut self, nvars: usize, split: Option<usize>, connected: bool) -> Cq {
        let vars: Vec<String> = (0..nvars).map(|i| format!("x{}", i + 1)).collect();
        let mut atoms = vec![];
        if connected {
            // a random spanning tree over the variables
            for i in 1..nvars {
                let j = self.rng.gen_range(0..i);
                let r = self.role();
                let (a, b) = if self.rng.gen_bool(0.5) { (i, j) } else { (j, i) };
                atoms.push(Atom::Role(r, vars[a].clone(), vars[b].clone()));
            }
        }
        let extra = self.rng.gen_range(0..=self.shape.max_atoms.saturating_sub(atoms.len()));
        for _ in 0..extra {
            let a = vars.choose(&mut self.rng).unwrap().clone();
            if self.rng.gen_bool(0.6) {
                let c = if self.rng.gen_bool(0.15) { Concept::Top } else { self.name() };
                atoms.push(Atom::Concept(c, a));
            } else {
                let b = vars.choose(&mut self.rng).unwrap().clone();
                atoms.push(Atom::Role(self.role(), a, b));
            }
        }
        atoms.dedup();
        let mut q = Cq { vars, split, exvars: vec![], atoms };
        q.cover_vars();
        q
    }

    fn statement(&mut self) -> Statement {
        let nl = self.shape.levels.max(1);
        let l = level(self.rng.gen_range(0..nl));
        let kinds: &[u8] = match (nl > 1, self.shape.full) {
            (false, _) => &[0, 0, 0, 1],
            (true, false) => &[0, 0, 1, 2, 2],
            (true, true) => &[0, 0, 1, 2, 3, 4, 5],
        };
        // the finer level always has the larger index, so ≺ stays a chain
        let fine_coarse = |g: &mut Self| {
            let f = g.rng.gen_range(1..nl);
            let c = g.rng.gen_range(0..f);
            (level(f), level(c))
        };
        match *kinds.choose(&mut self.rng).unwrap() {
            0 => Statement::Ci { level: l, lhs: self.concept(2), rhs: self.concept(2) },
            1 => Statement::Ri { level: l, lhs: self.role(), rhs: self.role() },
            2 => {
                let (fine, coarse) = fine_coarse(self);
                let n = self.rng.gen_range(1..=self.shape.max_vars.max(1));
                Statement::ConceptRef { fine, cq: self.cq(n, None, false), coarse, concept: self.concept(1) }
            }
            3 => {
                let (fine, coarse) = fine_coarse(self);
                let n = self.rng.gen_range(1..=self.shape.max_vars.max(1));
                Statement::ConceptAbs { coarse, concept: self.concept(1), fine, cq: self.cq(n, None, true) }
            }
            4 => {
                let (fine, coarse) = fine_coarse(self);
                let n = self.rng.gen_range(2..=self.shape.max_vars.max(2));
                let k = self.rng.gen_range(1..n);
                let qr = RoleTriple { cx: self.concept(0), role: self.role(), cy: self.concept(0) };
                Statement::RoleRef { fine, cq: self.cq(n, Some(k), false), coarse, qr }
            }
            _ => {
                let (fine, coarse) = fine_coarse(self);
                let n = self.rng.gen_range(2..=self.shape.max_vars.max(2));
                let k = self.rng.gen_range(1..n);
                Statement::RoleAbs { coarse, role: self.role(), fine, cq: self.cq(n, Some(k), true) }
            }
        }
    }
}

/// A random valid ontology of the given shape, with a goal.
pub fn instance(shape: &Shape, seed: u64) -> Instance {
    let mut g = Gen { rng: ChaCha8Rng::seed_from_u64(seed), shape };
    let mut statements = vec![];
    let mut size = 0;
    for _ in 0..64 {
        let s = g.statement();
        if size + s.size() > shape.max_size {
            if statements.len() >= 3 {
                break;
            }
            continue;
        }
        let o = Ontology::new(vec![s.clone()]);
        if !validate_ontology(&o).is_empty() {
            continue;
        }
        size += s.size();
        statements.push(s);
    }
    let ontology = Ontology::new(statements);
    let levels: Vec<Name> = ontology.levels().into_iter().collect();
    let level = levels.choose(&mut g.rng).cloned().unwrap_or_else(|| level(0));
    let goal = if g.rng.gen_bool(0.7) { g.name() } else { g.concept(1) };
    Instance { seed, ontology, goal, level }
}

/// `count` instances from consecutive seeds starting at `seed`.
pub fn corpus(shape: &Shape, seed: u64, count: usize) -> Vec<Instance> {
    (0..count as u64).map(|i| instance(shape, seed.wrapping_add(i))).collect()
}
