//! Turing-machine specifications and their keyword file format.
//!
//! ```text
//! states q0 q1 qh        # DTM only (ATM states come from the four lists)
//! existential q0        # ATM only
//! universal q1          # ATM only
//! accept qa             # ATM only
//! reject qr             # ATM only
//! halt qh               # DTM only
//! start q0
//! alphabet a b          # input alphabet
//! work a b _            # work alphabet, must contain the blank
//! blank _
//! trans q0 a -> q1 b R
//! ```
//!
//! `#` starts a comment. Missing `work` means input alphabet plus blank.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::GadgetError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Move {
    L,
    R,
}

impl fmt::Display for Move {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Move::L => "L",
            Move::R => "R",
        })
    }
}

pub type Transition = (String, String, Move);

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AtmSpec {
    pub existential: Vec<String>,
    pub universal: Vec<String>,
    pub accept: String,
    pub reject: String,
    pub start: String,
    pub input: Vec<String>,
    pub work: Vec<String>,
    pub blank: String,
    /// Δ(q,σ), in file order.
    pub delta: BTreeMap<(String, String), Vec<Transition>>,
}

impl AtmSpec {
    /// Q = existential ∪ universal ∪ {q_a, q_r}, in that order.
    pub fn states(&self) -> Vec<String> {
        let mut q: Vec<String> = self.existential.iter().chain(&self.universal).cloned().collect();
        q.push(self.accept.clone());
        q.push(self.reject.clone());
        q
    }

    pub fn is_existential(&self, q: &str) -> bool {
        self.existential.iter().any(|s| s == q)
    }

    pub fn validate(&self) -> Result<(), GadgetError> {
        let states = self.states();
        check_common(&states, &self.start, &self.input, &self.work, &self.blank)?;
        for q in self.existential.iter().chain(&self.universal) {
            for s in &self.work {
                match self.delta.get(&(q.clone(), s.clone())).map(Vec::len) {
                    Some(2) => {}
                    n => {
                        return Err(GadgetError::Machine(format!(
                            "|Δ({q},{s})| must be 2, found {}",
                            n.unwrap_or(0)
                        )))
                    }
                }
            }
        }
        for ((q, s), ts) in &self.delta {
            if *q == self.accept || *q == self.reject {
                return Err(GadgetError::Machine(format!("halting state {q} has transitions")));
            }
            check_transitions(q, s, ts, &states, &self.work)?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DtmSpec {
    pub states: Vec<String>,
    pub start: String,
    pub halt: String,
    pub input: Vec<String>,
    pub work: Vec<String>,
    pub blank: String,
    pub delta: BTreeMap<(String, String), Transition>,
}

impl DtmSpec {
    pub fn validate(&self) -> Result<(), GadgetError> {
        check_common(&self.states, &self.start, &self.input, &self.work, &self.blank)?;
        if !self.states.contains(&self.halt) {
            return Err(GadgetError::Machine(format!("halting state {} is not a state", self.halt)));
        }
        for q in self.states.iter().filter(|q| **q != self.halt) {
            for s in &self.work {
                if !self.delta.contains_key(&(q.clone(), s.clone())) {
                    return Err(GadgetError::Machine(format!("δ({q},{s}) is undefined")));
                }
            }
        }
        for ((q, s), t) in &self.delta {
            if *q == self.halt {
                return Err(GadgetError::Machine(format!("halting state {q} has transitions")));
            }
            check_transitions(q, s, std::slice::from_ref(t), &self.states, &self.work)?;
        }
        Ok(())
    }

    /// The first `steps + 1` configurations (state, head, tape) of the run
    /// on the empty tape; an error if the machine halts or moves left of
    /// cell 0 before that.
    pub fn run(&self, steps: usize) -> Result<Vec<(String, usize, Vec<String>)>, GadgetError> {
        let mut conf = (self.start.clone(), 0usize, vec![]);
        let mut out = vec![];
        for _ in 0..=steps {
            if conf.0 == self.halt {
                return Err(GadgetError::Parameter(format!("the machine halts after {} steps", out.len().saturating_sub(1))));
            }
            out.push(conf.clone());
            let (q, h, mut tape) = conf;
            let s = tape.get(h).cloned().unwrap_or_else(|| self.blank.clone());
            let (q2, s2, m) = &self.delta[&(q, s)];
            if tape.len() <= h {
                tape.resize(h + 1, self.blank.clone());
            }
            tape[h] = s2.clone();
            let h2 = match m {
                Move::R => h + 1,
                Move::L if h == 0 => return Err(GadgetError::Machine("the head moves left of cell 0".into())),
                Move::L => h - 1,
            };
            conf = (q2.clone(), h2, tape);
        }
        Ok(out)
    }
}

fn check_common(states: &[String], start: &str, input: &[String], work: &[String], blank: &str) -> Result<(), GadgetError> {
    let bad = |m: String| Err(GadgetError::Machine(m));
    let qs: BTreeSet<&String> = states.iter().collect();
    if qs.len() != states.len() {
        return bad("duplicate state".into());
    }
    if !qs.contains(&start.to_string()) {
        return bad(format!("start state {start} is not a state"));
    }
    if !work.iter().any(|s| s == blank) {
        return bad(format!("blank {blank} is not in the work alphabet"));
    }
    if input.iter().any(|s| s == blank) {
        return bad("the input alphabet contains the blank".into());
    }
    if let Some(s) = input.iter().find(|s| !work.contains(s)) {
        return bad(format!("input symbol {s} is not in the work alphabet"));
    }
    if let Some(s) = work.iter().find(|s| qs.contains(s)) {
        return bad(format!("{s} is both a state and a symbol"));
    }
    Ok(())
}

fn check_transitions(q: &str, s: &str, ts: &[Transition], states: &[String], work: &[String]) -> Result<(), GadgetError> {
    if !states.iter().any(|x| x == q) {
        return Err(GadgetError::Machine(format!("unknown state {q}")));
    }
    if !work.iter().any(|x| x == s) {
        return Err(GadgetError::Machine(format!("unknown symbol {s}")));
    }
    for (q2, s2, _) in ts {
        if !states.contains(q2) {
            return Err(GadgetError::Machine(format!("unknown state {q2}")));
        }
        if !work.contains(s2) {
            return Err(GadgetError::Machine(format!("unknown symbol {s2}")));
        }
    }
    Ok(())
}

#[derive(Default)]
struct Raw {
    fields: BTreeMap<&'static str, (usize, Vec<String>)>,
    trans: Vec<(usize, String, String, Transition)>,
}

const KEYWORDS: [&str; 11] =
    ["states", "existential", "universal", "accept", "reject", "halt", "start", "alphabet", "work", "blank", "trans"];

fn is_ident(s: &str) -> bool {
    s.chars().all(|c| c.is_alphanumeric() || c == '_') && !s.is_empty()
}

fn lex(text: &str) -> Result<Raw, GadgetError> {
    let mut raw = Raw::default();
    for (i, line) in text.lines().enumerate() {
        let line_no = i + 1;
        let err = |m: String| GadgetError::MachineSyntax { line: line_no, message: m };
        let words: Vec<&str> = line.split('#').next().unwrap().split_whitespace().collect();
        let Some((&kw, rest)) = words.split_first() else { continue };
        let Some(kw) = KEYWORDS.iter().find(|k| **k == kw) else { return Err(err(format!("unknown keyword {kw}"))) };
        if let Some(w) = rest.iter().find(|w| !is_ident(w) && **w != "->") {
            return Err(err(format!("bad name {w}")));
        }
        if *kw == "trans" {
            let [q, s, "->", q2, s2, m] = rest else { return Err(err("expected trans q σ -> q' σ' L|R".into())) };
            let m = match *m {
                "L" => Move::L,
                "R" => Move::R,
                m => return Err(err(format!("bad move {m}"))),
            };
            raw.trans.push((line_no, q.to_string(), s.to_string(), (q2.to_string(), s2.to_string(), m)));
            continue;
        }
        if rest.contains(&"->") {
            return Err(err("unexpected ->".into()));
        }
        if raw.fields.insert(kw, (line_no, rest.iter().map(|w| w.to_string()).collect())).is_some() {
            return Err(err(format!("duplicate {kw}")));
        }
    }
    Ok(raw)
}

impl Raw {
    fn list(&self, kw: &str) -> Vec<String> {
        self.fields.get(kw).map(|(_, v)| v.clone()).unwrap_or_default()
    }

    fn one(&self, kw: &'static str) -> Result<String, GadgetError> {
        match self.fields.get(kw) {
            Some((_, v)) if v.len() == 1 => Ok(v[0].clone()),
            Some((line, _)) => Err(GadgetError::MachineSyntax { line: *line, message: format!("{kw} takes one name") }),
            None => Err(GadgetError::MachineSyntax { line: 0, message: format!("missing {kw}") }),
        }
    }

    fn forbid(&self, kws: &[&str]) -> Result<(), GadgetError> {
        for kw in kws {
            if let Some((line, _)) = self.fields.get(kw) {
                return Err(GadgetError::MachineSyntax { line: *line, message: format!("{kw} does not apply here") });
            }
        }
        Ok(())
    }

    fn alphabets(&self) -> Result<(Vec<String>, Vec<String>, String), GadgetError> {
        let input = self.list("alphabet");
        let blank = self.one("blank")?;
        let work = if self.fields.contains_key("work") {
            self.list("work")
        } else {
            input.iter().cloned().chain([blank.clone()]).collect()
        };
        Ok((input, work, blank))
    }
}

pub fn parse_atm(text: &str) -> Result<AtmSpec, GadgetError> {
    let raw = lex(text)?;
    raw.forbid(&["halt", "states"])?;
    let (input, work, blank) = raw.alphabets()?;
    let mut delta: BTreeMap<(String, String), Vec<Transition>> = BTreeMap::new();
    for (_, q, s, t) in &raw.trans {
        delta.entry((q.clone(), s.clone())).or_default().push(t.clone());
    }
    let m = AtmSpec {
        existential: raw.list("existential"),
        universal: raw.list("universal"),
        accept: raw.one("accept")?,
        reject: raw.one("reject")?,
        start: raw.one("start")?,
        input,
        work,
        blank,
        delta,
    };
    m.validate()?;
    Ok(m)
}

pub fn parse_dtm(text: &str) -> Result<DtmSpec, GadgetError> {
    let raw = lex(text)?;
    raw.forbid(&["existential", "universal", "accept", "reject"])?;
    let (input, work, blank) = raw.alphabets()?;
    let mut delta = BTreeMap::new();
    for (line, q, s, t) in &raw.trans {
        if delta.insert((q.clone(), s.clone()), t.clone()).is_some() {
            return Err(GadgetError::MachineSyntax { line: *line, message: format!("δ({q},{s}) defined twice") });
        }
    }
    let m = DtmSpec { states: raw.list("states"), start: raw.one("start")?, halt: raw.one("halt")?, input, work, blank, delta };
    m.validate()?;
    Ok(m)
}
