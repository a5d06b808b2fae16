//! Indexed single-level interpretations: elements are `0..n`, extensions
//! are bit vectors and adjacency lists. This is what the query engine and
//! the checkers work on.

use std::collections::{BTreeMap, BTreeSet};

use crate::model::{LevelInterp, Name, Role};

#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
struct RoleExt {
    pairs: BTreeSet<(usize, usize)>,
    out: Vec<Vec<usize>>,
    inc: Vec<Vec<usize>>,
}

impl RoleExt {
    fn new(n: usize) -> Self {
        RoleExt { pairs: BTreeSet::new(), out: vec![vec![]; n], inc: vec![vec![]; n] }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Structure {
    n: usize,
    concepts: BTreeMap<Name, Vec<bool>>,
    roles: BTreeMap<Name, RoleExt>,
}

impl Structure {
    pub fn new(n: usize) -> Self {
        Structure { n, ..Default::default() }
    }

    /// Indexes a level; element `i` is `li.domain[i]`. Unknown names in
    /// extensions are skipped (validation reports them).
    pub fn from_level(li: &LevelInterp) -> Self {
        let idx: BTreeMap<&Name, usize> = li.domain.iter().enumerate().map(|(i, d)| (d, i)).collect();
        let mut s = Structure::new(li.domain.len());
        for (c, ext) in &li.concepts {
            s.declare_concept(c);
            for d in ext {
                if let Some(&i) = idx.get(d) {
                    s.add_concept(c, i);
                }
            }
        }
        for (r, ext) in &li.roles {
            s.declare_role(r);
            for (d, e) in ext {
                if let (Some(&i), Some(&j)) = (idx.get(d), idx.get(e)) {
                    s.add_edge(r, i, j);
                }
            }
        }
        s
    }

    /// Writes the structure back as a level with the given element names.
    pub fn to_level(&self, names: &[Name]) -> LevelInterp {
        let mut li = LevelInterp::with_domain(names.iter().cloned());
        for (c, ext) in &self.concepts {
            let set: BTreeSet<Name> = (0..self.n).filter(|&i| ext[i]).map(|i| names[i].clone()).collect();
            if !set.is_empty() {
                li.concepts.insert(c.clone(), set);
            }
        }
        for (r, ext) in &self.roles {
            let set: BTreeSet<(Name, Name)> =
                ext.pairs.iter().map(|&(a, b)| (names[a].clone(), names[b].clone())).collect();
            if !set.is_empty() {
                li.roles.insert(r.clone(), set);
            }
        }
        li
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn add_element(&mut self) -> usize {
        self.n += 1;
        for ext in self.concepts.values_mut() {
            ext.push(false);
        }
        for ext in self.roles.values_mut() {
            ext.out.push(vec![]);
            ext.inc.push(vec![]);
        }
        self.n - 1
    }

    pub fn declare_concept(&mut self, c: &str) {
        if !self.concepts.contains_key(c) {
            self.concepts.insert(c.to_string(), vec![false; self.n]);
        }
    }

    pub fn declare_role(&mut self, r: &str) {
        if !self.roles.contains_key(r) {
            self.roles.insert(r.to_string(), RoleExt::new(self.n));
        }
    }

    /// Returns true if `d` was not yet in `c`.
    pub fn add_concept(&mut self, c: &str, d: usize) -> bool {
        self.declare_concept(c);
        let ext = self.concepts.get_mut(c).unwrap();
        !std::mem::replace(&mut ext[d], true)
    }

    pub fn remove_concept(&mut self, c: &str, d: usize) {
        if let Some(ext) = self.concepts.get_mut(c) {
            ext[d] = false;
        }
    }

    /// Adds `(a, b)` to role name `r`; returns true if new.
    pub fn add_edge(&mut self, r: &str, a: usize, b: usize) -> bool {
        self.declare_role(r);
        let ext = self.roles.get_mut(r).unwrap();
        if !ext.pairs.insert((a, b)) {
            return false;
        }
        ext.out[a].push(b);
        ext.out[a].sort_unstable();
        ext.inc[b].push(a);
        ext.inc[b].sort_unstable();
        true
    }

    /// Adds an edge for a possibly inverse role.
    pub fn add_role_edge(&mut self, r: &Role, a: usize, b: usize) -> bool {
        if r.inverse {
            self.add_edge(&r.name, b, a)
        } else {
            self.add_edge(&r.name, a, b)
        }
    }

    pub fn has_concept(&self, c: &str, d: usize) -> bool {
        self.concepts.get(c).map(|e| e[d]).unwrap_or(false)
    }

    pub fn concept_ext(&self, c: &str) -> Option<&Vec<bool>> {
        self.concepts.get(c)
    }

    pub fn has_edge(&self, r: &Role, a: usize, b: usize) -> bool {
        let Some(ext) = self.roles.get(&r.name) else { return false };
        if r.inverse {
            ext.pairs.contains(&(b, a))
        } else {
            ext.pairs.contains(&(a, b))
        }
    }

    /// R-successors of `a`, sorted.
    pub fn successors(&self, r: &Role, a: usize) -> &[usize] {
        match self.roles.get(&r.name) {
            None => &[],
            Some(ext) if r.inverse => &ext.inc[a],
            Some(ext) => &ext.out[a],
        }
    }

    pub fn role_pairs(&self, r: &str) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.roles.get(r).into_iter().flat_map(|e| e.pairs.iter().copied())
    }

    pub fn concept_names(&self) -> impl Iterator<Item = &Name> {
        self.concepts.keys()
    }

    pub fn role_names(&self) -> impl Iterator<Item = &Name> {
        self.roles.keys()
    }

    /// Concept names containing `d`.
    pub fn label(&self, d: usize) -> BTreeSet<&Name> {
        self.concepts.iter().filter(|(_, e)| e[d]).map(|(c, _)| c).collect()
    }

    /// Sub-structure induced by `elems` (in that order).
    pub fn restrict(&self, elems: &[usize]) -> Structure {
        let pos: BTreeMap<usize, usize> = elems.iter().enumerate().map(|(i, &d)| (d, i)).collect();
        let mut s = Structure::new(elems.len());
        for (c, ext) in &self.concepts {
            s.declare_concept(c);
            for (i, &d) in elems.iter().enumerate() {
                if ext[d] {
                    s.add_concept(c, i);
                }
            }
        }
        for (r, ext) in &self.roles {
            s.declare_role(r);
            for &(a, b) in &ext.pairs {
                if let (Some(&i), Some(&j)) = (pos.get(&a), pos.get(&b)) {
                    s.add_edge(r, i, j);
                }
            }
        }
        s
    }
}
