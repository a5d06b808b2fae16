//! Bounded model finder. An A-interpretation with at most `n` elements per
//! level is encoded as a propositional formula and handed to a CDCL solver;
//! every model found is re-checked with the model checker before it is
//! returned.
//!
//! The level order is the relation induced by the ontology's refinement and
//! abstraction statements, with the roots of a forest linked under one root
//! (extra ≺ edges never falsify a statement). ρ tuples only take lengths
//! that some statement between the two levels can use: entries of other
//! lengths can be dropped from any model.

use std::collections::{BTreeMap, BTreeSet};

use abdl_core::check::{check_model, is_model_with_goal};
use abdl_core::{
    derived_prec, level_graph_shape, validate_ontology, AInterpretation, Atom, Concept, Cq, Diagnostic, LevelInterp,
    Name, Ontology, Role, Semantics, Statement,
};
use varisat::{CnfFormula, ExtendFormula, Lit, Solver};

#[derive(Debug, thiserror::Error)]
pub enum OracleError {
    #[error("encoding for cap {cap} needs more than {budget} clauses (caps below {cap} exhausted)")]
    Budget { budget: usize, cap: usize },
    #[error("ontology is not valid: {}", .0.iter().map(|d| d.to_string()).collect::<Vec<_>>().join("; "))]
    Invalid(Vec<Diagnostic>),
    #[error("solver failure: {0}")]
    Solver(String),
    #[error("internal error: decoded interpretation is not a model ({0})")]
    SelfCheck(String),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum OracleOutcome {
    Found(AInterpretation),
    /// No model with at most `cap` elements per level.
    Exhausted { cap: usize },
}

impl OracleOutcome {
    pub fn model(&self) -> Option<&AInterpretation> {
        match self {
            OracleOutcome::Found(i) => Some(i),
            OracleOutcome::Exhausted { .. } => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct OracleConfig {
    pub cap: usize,
    pub variant: Semantics,
    /// Maximum number of clauses per encoding.
    pub budget: Option<usize>,
}

impl OracleConfig {
    pub fn new(cap: usize) -> Self {
        OracleConfig { cap, variant: Semantics::Standard, budget: None }
    }

    pub fn with_variant(mut self, v: Semantics) -> Self {
        self.variant = v;
        self
    }
}

/// Level set and order used by the search, or `None` if no order can
/// contain the required pairs.
pub fn search_levels(o: &Ontology, goal_level: Option<&str>, variant: Semantics) -> Option<(Vec<Name>, BTreeSet<(Name, Name)>)> {
    let mut levels = o.levels();
    if let Some(l) = goal_level {
        levels.insert(l.to_string());
    }
    let mut prec = derived_prec(o);
    let shape = level_graph_shape(levels.iter(), &prec);
    if shape.cyclic {
        return None;
    }
    if variant != Semantics::Dag {
        if !shape.multi_parent.is_empty() {
            return None;
        }
        let roots: Vec<Name> = levels.iter().filter(|l| !prec.iter().any(|(f, _)| f == *l)).cloned().collect();
        for r in roots.iter().skip(1) {
            prec.insert((r.clone(), roots[0].clone()));
        }
    }
    Some((levels.into_iter().collect(), prec))
}

/// ρ tuple lengths usable between `fine` and `coarse`.
pub fn rho_arities(o: &Ontology, fine: &str, coarse: &str) -> BTreeSet<usize> {
    let mut out = BTreeSet::new();
    for s in &o.statements {
        if s.level_pair() != Some((&fine.to_string(), &coarse.to_string())) {
            continue;
        }
        match s {
            Statement::ConceptRef { cq, .. } | Statement::ConceptAbs { cq, .. } => {
                out.insert(cq.vars.len());
            }
            Statement::RoleRef { cq, .. } | Statement::RoleAbs { cq, .. } => {
                out.insert(cq.xs().len());
                out.insert(cq.ys().len());
            }
            _ => {}
        }
    }
    out.remove(&0);
    out
}

fn element_name(level: &str, i: usize) -> Name {
    format!("{level}-{i}")
}

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Debug)]
struct L(usize, bool);

impl L {
    fn neg(self) -> L {
        L(self.0, !self.1)
    }
}

struct Enc<'a> {
    n: usize,
    variant: Semantics,
    nvars: usize,
    clauses: Vec<Vec<L>>,
    budget: Option<usize>,
    over: bool,
    t: L,
    exist: BTreeMap<(Name, usize), L>,
    conc: BTreeMap<(Name, Name, usize), L>,
    role: BTreeMap<(Name, Name, usize, usize), L>,
    evals: BTreeMap<(Name, Concept, usize), L>,
    /// (coarse elem, fine level, k) → def literal
    def: BTreeMap<(Name, usize, Name, usize), L>,
    /// (coarse elem, fine level, k, position, fine elem)
    pos: BTreeMap<(Name, usize, Name, usize, usize, usize), L>,
    eqs: BTreeMap<(Name, usize, Name, Vec<usize>), L>,
    o: &'a Ontology,
}

impl<'a> Enc<'a> {
    fn var(&mut self) -> L {
        self.nvars += 1;
        L(self.nvars - 1, true)
    }

    fn clause(&mut self, c: Vec<L>) {
        if let Some(b) = self.budget {
            if self.clauses.len() >= b {
                self.over = true;
                return;
            }
        }
        self.clauses.push(c);
    }

    fn f(&self) -> L {
        self.t.neg()
    }

    fn exist(&self, l: &str, i: usize) -> L {
        self.exist[&(l.to_string(), i)]
    }

    fn conc(&mut self, l: &str, a: &str, i: usize) -> L {
        let key = (l.to_string(), a.to_string(), i);
        if let Some(&v) = self.conc.get(&key) {
            return v;
        }
        let v = self.var();
        let e = self.exist(l, i);
        self.clause(vec![v.neg(), e]);
        self.conc.insert(key, v);
        v
    }

    fn edge(&mut self, l: &str, r: &Role, i: usize, j: usize) -> L {
        let (a, b) = if r.inverse { (j, i) } else { (i, j) };
        let key = (l.to_string(), r.name.clone(), a, b);
        if let Some(&v) = self.role.get(&key) {
            return v;
        }
        let v = self.var();
        let (ea, eb) = (self.exist(l, a), self.exist(l, b));
        self.clause(vec![v.neg(), ea]);
        self.clause(vec![v.neg(), eb]);
        self.role.insert(key, v);
        v
    }

    fn and_gate(&mut self, lits: Vec<L>) -> L {
        if lits.len() == 1 {
            return lits[0];
        }
        let g = self.var();
        let mut back = vec![g];
        for &x in &lits {
            self.clause(vec![g.neg(), x]);
            back.push(x.neg());
        }
        self.clause(back);
        g
    }

    fn or_gate(&mut self, lits: Vec<L>) -> L {
        let g = self.and_gate(lits.into_iter().map(L::neg).collect());
        g.neg()
    }

    fn eval(&mut self, l: &str, c: &Concept, i: usize) -> L {
        let key = (l.to_string(), c.clone(), i);
        if let Some(&v) = self.evals.get(&key) {
            return v;
        }
        let v = match c {
            Concept::Name(a) => self.conc(l, a, i),
            Concept::Top => self.t,
            Concept::Bot => self.f(),
            Concept::Not(a) => self.eval(l, a, i).neg(),
            Concept::And(a, b) => {
                let (x, y) = (self.eval(l, a, i), self.eval(l, b, i));
                self.and_gate(vec![x, y])
            }
            Concept::Or(a, b) => {
                let (x, y) = (self.eval(l, a, i), self.eval(l, b, i));
                self.or_gate(vec![x, y])
            }
            Concept::Exists(r, a) => {
                let mut ds = vec![];
                for j in 0..self.n {
                    let e = self.edge(l, r, i, j);
                    let x = self.eval(l, a, j);
                    ds.push(self.and_gate(vec![e, x]));
                }
                self.or_gate(ds)
            }
            Concept::Forall(r, a) => {
                let ex = Concept::exists(r.clone(), Concept::not((**a).clone()));
                self.eval(l, &ex, i).neg()
            }
        };
        self.evals.insert(key, v);
        v
    }

    /// Literals whose conjunction says that `asg` (indexed like
    /// `q.all_vars()`) is a homomorphism from `q` into level `l`.
    fn body(&mut self, l: &str, q: &Cq, asg: &[usize]) -> Vec<L> {
        let vars = q.all_vars();
        let at = |v: &str| asg[vars.iter().position(|x| x == v).unwrap()];
        let mut out: Vec<L> = asg.iter().map(|&e| self.exist(l, e)).collect();
        for a in &q.atoms {
            let lit = match a {
                Atom::Concept(c, v) => self.eval(l, c, at(v)),
                Atom::Role(r, x, y) => self.edge(l, r, at(x), at(y)),
            };
            out.push(lit);
        }
        out.sort();
        out.dedup();
        out
    }

    /// Literal for "q has a homomorphism into `l` mapping the answer
    /// variables to `t`"; existential variables are ranged over.
    fn answer(&mut self, l: &str, q: &Cq, t: &[usize]) -> L {
        let ys = q.exvars.len();
        let mut alts = vec![];
        for ext in tuples(self.n, ys) {
            let mut asg = t.to_vec();
            asg.extend(ext);
            let b = self.body(l, q, &asg);
            alts.push(self.and_gate(b));
        }
        self.or_gate(alts)
    }

    /// "ρ(d, fine) = t".
    fn eq(&mut self, coarse: &str, d: usize, fine: &str, t: &[usize]) -> L {
        let key = (coarse.to_string(), d, fine.to_string(), t.to_vec());
        if let Some(&v) = self.eqs.get(&key) {
            return v;
        }
        let k = t.len();
        let v = match self.def.get(&(coarse.to_string(), d, fine.to_string(), k)) {
            None => self.f(),
            Some(&def) => {
                let mut lits = vec![def];
                for (p, &e) in t.iter().enumerate() {
                    lits.push(self.pos[&(coarse.to_string(), d, fine.to_string(), k, p, e)]);
                }
                self.and_gate(lits)
            }
        };
        self.eqs.insert(key, v);
        v
    }


    fn statement(&mut self, s: &Statement) {
        let n = self.n;
        let v = self.variant;
        let ok = move |t: &[usize]| tuple_ok(v, t);
        match s {
            Statement::Ci { level, lhs, rhs } => {
                for i in 0..n {
                    let e = self.exist(level, i);
                    let (a, b) = (self.eval(level, lhs, i), self.eval(level, rhs, i));
                    self.clause(vec![e.neg(), a.neg(), b]);
                }
            }
            Statement::Ri { level, lhs, rhs } => {
                for i in 0..n {
                    for j in 0..n {
                        let (a, b) = (self.edge(level, lhs, i, j), self.edge(level, rhs, i, j));
                        self.clause(vec![a.neg(), b]);
                    }
                }
            }
            Statement::ConceptRef { fine, cq, coarse, concept } => {
                let k = cq.vars.len();
                for d in 0..n {
                    let e = self.exist(coarse, d);
                    let c = self.eval(coarse, concept, d);
                    let mut cl = vec![e.neg(), c.neg()];
                    for t in tuples(n, k).into_iter().filter(|t| ok(t)) {
                        let eq = self.eq(coarse, d, fine, &t);
                        if eq == self.f() {
                            continue;
                        }
                        let ans = self.answer(fine, cq, &t);
                        cl.push(self.and_gate(vec![eq, ans]));
                    }
                    self.clause(cl);
                }
            }
            Statement::ConceptAbs { coarse, concept, fine, cq } => {
                let k = cq.vars.len();
                let m = cq.all_vars().len();
                for asg in tuples(n, m).into_iter().filter(|a| ok(&a[..k])) {
                    let mut cl: Vec<L> = self.body(fine, cq, &asg).into_iter().map(L::neg).collect();
                    for d in 0..n {
                        let eq = self.eq(coarse, d, fine, &asg[..k]);
                        if eq == self.f() {
                            continue;
                        }
                        let c = self.eval(coarse, concept, d);
                        cl.push(self.and_gate(vec![eq, c]));
                    }
                    self.clause(cl);
                }
            }
            Statement::RoleRef { fine, cq, coarse, qr } => {
                let (k1, k2) = (cq.xs().len(), cq.ys().len());
                for d1 in 0..n {
                    for d2 in 0..n {
                        let pre = vec![
                            self.exist(coarse, d1),
                            self.exist(coarse, d2),
                            self.eval(coarse, &qr.cx, d1),
                            self.edge(coarse, &qr.role, d1, d2),
                            self.eval(coarse, &qr.cy, d2),
                        ];
                        let mut cl: Vec<L> = pre.into_iter().map(L::neg).collect();
                        for t1 in tuples(n, k1).into_iter().filter(|t| ok(t)) {
                            let e1 = self.eq(coarse, d1, fine, &t1);
                            if e1 == self.f() {
                                continue;
                            }
                            for t2 in tuples(n, k2).into_iter().filter(|t| ok(t)) {
                                let e2 = self.eq(coarse, d2, fine, &t2);
                                if e2 == self.f() {
                                    continue;
                                }
                                let mut t = t1.clone();
                                t.extend(&t2);
                                let ans = self.answer(fine, cq, &t);
                                cl.push(self.and_gate(vec![e1, e2, ans]));
                            }
                        }
                        self.clause(cl);
                    }
                }
            }
            Statement::RoleAbs { coarse, role, fine, cq } => {
                let (k1, k) = (cq.xs().len(), cq.vars.len());
                let m = cq.all_vars().len();
                for asg in tuples(n, m).into_iter().filter(|a| ok(&a[..k])) {
                    let (t1, t2) = (&asg[..k1], &asg[k1..k]);
                    let mut cl: Vec<L> = self.body(fine, cq, &asg).into_iter().map(L::neg).collect();
                    for d1 in 0..n {
                        let e1 = self.eq(coarse, d1, fine, t1);
                        if e1 == self.f() {
                            continue;
                        }
                        for d2 in 0..n {
                            let e2 = self.eq(coarse, d2, fine, t2);
                            if e2 == self.f() {
                                continue;
                            }
                            let r = self.edge(coarse, role, d1, d2);
                            cl.push(self.and_gate(vec![e1, e2, r]));
                        }
                    }
                    self.clause(cl);
                }
            }
        }
    }
}

fn tuple_ok(v: Semantics, t: &[usize]) -> bool {
    v != Semantics::RepetitionFree || t.iter().collect::<BTreeSet<_>>().len() == t.len()
}

/// All `k`-tuples over `0..n` in lexicographic order.
pub fn tuples(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = vec![vec![]];
    for _ in 0..k {
        out = out.into_iter().flat_map(|t| (0..n).map(move |e| [t.clone(), vec![e]].concat())).collect();
    }
    out
}

fn pairwise_at_most_one(enc: &mut Enc<'_>, lits: &[L]) {
    for i in 0..lits.len() {
        for j in i + 1..lits.len() {
            enc.clause(vec![lits[i].neg(), lits[j].neg()]);
        }
    }
}

fn solve_at(
    o: &Ontology,
    goal: Option<(&Concept, &str)>,
    n: usize,
    cfg: &OracleConfig,
    levels: &[Name],
    prec: &BTreeSet<(Name, Name)>,
) -> Result<Option<AInterpretation>, OracleError> {
    let mut enc = Enc {
        n,
        variant: cfg.variant,
        nvars: 0,
        clauses: vec![],
        budget: cfg.budget,
        over: false,
        t: L(0, true),
        exist: BTreeMap::new(),
        conc: BTreeMap::new(),
        role: BTreeMap::new(),
        evals: BTreeMap::new(),
        def: BTreeMap::new(),
        pos: BTreeMap::new(),
        eqs: BTreeMap::new(),
        o,
    };
    enc.t = enc.var();
    enc.clause(vec![enc.t]);
    for l in levels {
        for i in 0..n {
            let v = enc.var();
            enc.exist.insert((l.clone(), i), v);
        }
        let e0 = enc.exist(l, 0);
        enc.clause(vec![e0]);
        for i in 1..n {
            let (a, b) = (enc.exist(l, i), enc.exist(l, i - 1));
            enc.clause(vec![a.neg(), b]);
        }
    }
    // ρ
    for (fine, coarse) in prec {
        let ks = rho_arities(enc.o, fine, coarse);
        if ks.is_empty() {
            continue;
        }
        let mut member: BTreeMap<(usize, usize), Vec<L>> = BTreeMap::new();
        for d in 0..n {
            let mut defs = vec![];
            for &k in &ks {
                let def = enc.var();
                let ed = enc.exist(coarse, d);
                enc.clause(vec![def.neg(), ed]);
                enc.def.insert((coarse.clone(), d, fine.clone(), k), def);
                defs.push(def);
                for p in 0..k {
                    let mut ps = vec![];
                    for e in 0..n {
                        let v = enc.var();
                        let ee = enc.exist(fine, e);
                        enc.clause(vec![v.neg(), def]);
                        enc.clause(vec![v.neg(), ee]);
                        enc.pos.insert((coarse.clone(), d, fine.clone(), k, p, e), v);
                        member.entry((d, e)).or_default().push(v);
                        ps.push(v);
                    }
                    let mut some = vec![def.neg()];
                    some.extend(&ps);
                    enc.clause(some);
                    pairwise_at_most_one(&mut enc, &ps);
                }
                if cfg.variant == Semantics::RepetitionFree {
                    for e in 0..n {
                        let ps: Vec<L> =
                            (0..k).map(|p| enc.pos[&(coarse.clone(), d, fine.clone(), k, p, e)]).collect();
                        pairwise_at_most_one(&mut enc, &ps);
                    }
                }
            }
            pairwise_at_most_one(&mut enc, &defs);
        }
        // (*): each fine element lies in the ensembles of at most one coarse element
        for e in 0..n {
            let ins: Vec<L> = (0..n)
                .map(|d| {
                    let lits = member.get(&(d, e)).cloned().unwrap_or_default();
                    enc.or_gate(lits)
                })
                .collect();
            pairwise_at_most_one(&mut enc, &ins);
        }
    }
    for s in &o.statements {
        enc.statement(s);
        if enc.over {
            break;
        }
    }
    if let Some((c, l)) = goal {
        let mut alts = vec![];
        for i in 0..n {
            let e = enc.exist(l, i);
            let x = enc.eval(l, c, i);
            alts.push(enc.and_gate(vec![e, x]));
        }
        enc.clause(alts);
    }
    if enc.over {
        return Err(OracleError::Budget { budget: cfg.budget.unwrap_or(0), cap: n });
    }

    let mut formula = CnfFormula::new();
    for c in &enc.clauses {
        let lits: Vec<Lit> = c.iter().map(|l| Lit::from_index(l.0, l.1)).collect();
        formula.add_clause(&lits);
    }
    let mut solver = Solver::new();
    solver.add_formula(&formula);
    if !solver.solve().map_err(|e| OracleError::Solver(e.to_string()))? {
        return Ok(None);
    }
    let model = solver.model().ok_or_else(|| OracleError::Solver("no model".into()))?;
    let mut val = vec![false; enc.nvars];
    for l in model {
        if l.index() < val.len() {
            val[l.index()] = l.is_positive();
        }
    }
    let truth = |l: L| val[l.0] == l.1;

    let mut i = AInterpretation { prec: prec.clone(), ..Default::default() };
    for l in levels {
        let dom: Vec<usize> = (0..n).filter(|&d| truth(enc.exist(l, d))).collect();
        let mut li = LevelInterp::with_domain(dom.iter().map(|&d| element_name(l, d)));
        for ((lv, a, d), v) in &enc.conc {
            if lv == l && truth(*v) {
                li.add_concept(a, &element_name(l, *d));
            }
        }
        for ((lv, r, a, b), v) in &enc.role {
            if lv == l && truth(*v) {
                li.add_role(r, &element_name(l, *a), &element_name(l, *b));
            }
        }
        i.levels.insert(l.clone(), li);
    }
    for ((coarse, d, fine, k), def) in &enc.def {
        if !truth(*def) {
            continue;
        }
        let t: Vec<Name> = (0..*k)
            .map(|p| {
                let e = (0..n).find(|&e| truth(enc.pos[&(coarse.clone(), *d, fine.clone(), *k, p, e)])).unwrap();
                element_name(fine, e)
            })
            .collect();
        i.rho.insert((element_name(coarse, *d), fine.clone()), t);
    }
    match check_model(o, &i, cfg.variant) {
        Err(e) => return Err(OracleError::SelfCheck(e.to_string())),
        Ok(r) if !r.is_model() => {
            return Err(OracleError::SelfCheck(r.violations.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; ")))
        }
        Ok(_) => {}
    }
    if !is_model_with_goal(o, &i, cfg.variant, goal) {
        return Err(OracleError::SelfCheck("goal concept empty".into()));
    }
    Ok(Some(i))
}

/// Searches for a model with at most `cfg.cap` elements per level in which
/// the goal concept (if any) is nonempty at the goal level. Smaller caps are
/// tried first, so the returned model is small.
pub fn find_model(o: &Ontology, goal: Option<(&Concept, &str)>, cfg: &OracleConfig) -> Result<OracleOutcome, OracleError> {
    let diags = validate_ontology(o);
    if !diags.is_empty() {
        return Err(OracleError::Invalid(diags));
    }
    let Some((levels, prec)) = search_levels(o, goal.map(|g| g.1), cfg.variant) else {
        return Ok(OracleOutcome::Exhausted { cap: cfg.cap });
    };
    for n in 1..=cfg.cap {
        if let Some(i) = solve_at(o, goal, n, cfg, &levels, &prec)? {
            return Ok(OracleOutcome::Found(i));
        }
    }
    Ok(OracleOutcome::Exhausted { cap: cfg.cap })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Agreement {
    Agree,
    Disagree,
    Inconclusive,
}

/// Runs the oracle on both ontologies with the same goal and cap.
pub fn equisatisfiable_within(
    o1: &Ontology,
    o2: &Ontology,
    goal: Option<(&Concept, &str)>,
    cfg: &OracleConfig,
) -> Agreement {
    match (find_model(o1, goal, cfg), find_model(o2, goal, cfg)) {
        (Ok(a), Ok(b)) => {
            if a.model().is_some() == b.model().is_some() {
                Agreement::Agree
            } else {
                Agreement::Disagree
            }
        }
        _ => Agreement::Inconclusive,
    }
}

/// Straight-line enumeration of every A-interpretation with at most `cap`
/// elements per level over the same level order and ρ lengths, without
/// symmetry breaking. Only usable on minuscule inputs; it exists to
/// cross-check [`find_model`].
pub fn brute_force_find_model(
    o: &Ontology,
    goal: Option<(&Concept, &str)>,
    cap: usize,
    variant: Semantics,
) -> Option<AInterpretation> {
    let (levels, prec) = search_levels(o, goal.map(|g| g.1), variant)?;
    let (mut cnames, rnames) = o.signature();
    if let Some((c, _)) = goal {
        let mut rs = BTreeSet::new();
        c.collect_names(&mut cnames, &mut rs);
    }
    let cnames: Vec<Name> = cnames.into_iter().collect();
    let rnames: Vec<Name> = rnames.into_iter().collect();
    let rho_slots: Vec<(Name, Name, Vec<usize>)> = prec
        .iter()
        .map(|(f, c)| (f.clone(), c.clone(), rho_arities(o, f, c).into_iter().collect()))
        .filter(|(_, _, ks): &(Name, Name, Vec<usize>)| !ks.is_empty())
        .collect();

    for sizes in tuples(cap, levels.len()) {
        let sizes: Vec<usize> = sizes.iter().map(|s| s + 1).collect();
        let size_of = |l: &Name| sizes[levels.iter().position(|x| x == l).unwrap()];
        // one bit per (level, concept, elem) and (level, role, elem, elem)
        let mut bits: Vec<(usize, usize, usize, usize, bool)> = vec![];
        for (li, _) in levels.iter().enumerate() {
            for ci in 0..cnames.len() {
                for d in 0..sizes[li] {
                    bits.push((li, ci, d, 0, true));
                }
            }
            for ri in 0..rnames.len() {
                for d in 0..sizes[li] {
                    for e in 0..sizes[li] {
                        bits.push((li, ri, d, e, false));
                    }
                }
            }
        }
        // ρ choices per (slot, coarse elem): none, or (k, tuple)
        let mut rho_choices: Vec<(usize, usize, Vec<Option<Vec<usize>>>)> = vec![];
        for (si, (f, c, ks)) in rho_slots.iter().enumerate() {
            for d in 0..size_of(c) {
                let mut opts = vec![None];
                for &k in ks {
                    opts.extend(tuples(size_of(f), k).into_iter().map(Some));
                }
                rho_choices.push((si, d, opts));
            }
        }
        assert!(bits.len() < 40, "brute force enumeration too large");
        let mut rho_idx = vec![0usize; rho_choices.len()];
        loop {
            for mask in 0u64..(1u64 << bits.len()) {
                let mut i = AInterpretation { prec: prec.clone(), ..Default::default() };
                for (li, l) in levels.iter().enumerate() {
                    i.levels.insert(l.clone(), LevelInterp::with_domain((0..sizes[li]).map(|d| element_name(l, d))));
                }
                for (b, &(li, x, d, e, is_c)) in bits.iter().enumerate() {
                    if mask & (1 << b) == 0 {
                        continue;
                    }
                    let l = &levels[li];
                    let lv = i.levels.get_mut(l).unwrap();
                    if is_c {
                        lv.add_concept(&cnames[x], &element_name(l, d));
                    } else {
                        lv.add_role(&rnames[x], &element_name(l, d), &element_name(l, e));
                    }
                }
                for (ci, &(si, d, ref opts)) in rho_choices.iter().enumerate() {
                    if let Some(t) = &opts[rho_idx[ci]] {
                        let (f, c, _) = &rho_slots[si];
                        i.rho.insert((element_name(c, d), f.clone()), t.iter().map(|&e| element_name(f, e)).collect());
                    }
                }
                if is_model_with_goal(o, &i, variant, goal) {
                    return Some(i);
                }
            }
            // advance the ρ odometer
            let mut k = 0;
            loop {
                if k == rho_idx.len() {
                    break;
                }
                rho_idx[k] += 1;
                if rho_idx[k] < rho_choices[k].2.len() {
                    break;
                }
                rho_idx[k] = 0;
                k += 1;
            }
            if k == rho_idx.len() {
                break;
            }
        }
    }
    None
}
