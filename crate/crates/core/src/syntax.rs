//! Text formats: `.abdl` ontologies and `.abint` A-interpretations.
//!
//! Both are token streams separated by whitespace; `#` starts a comment
//! running to the end of the line and every item ends with `.`. The grammar
//! is documented in `docs/syntax.md`.

use std::collections::BTreeSet;
use std::fmt::{self, Write as _};

use crate::model::{
    AInterpretation, Atom, Concept, Cq, Name, Ontology, Role, RoleTriple, Semantics, Statement, RESERVED_PREFIX,
};

#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct SourceSpan {
    pub file: Option<String>,
    pub line: usize,
    pub col_start: usize,
    pub col_end: usize,
}

impl fmt::Display for SourceSpan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(file) = &self.file {
            write!(f, "{file}:")?;
        }
        write!(f, "{}:{}", self.line, self.col_start)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("{span}: {message}{}", expected_suffix(.expected))]
pub struct ParseError {
    pub span: SourceSpan,
    pub message: String,
    pub expected: Vec<String>,
}

fn expected_suffix(e: &[String]) -> String {
    if e.is_empty() {
        String::new()
    } else {
        format!(" (expected {})", e.join(" or "))
    }
}

impl ParseError {
    pub fn with_file(mut self, file: &str) -> Self {
        self.span.file = Some(file.to_string());
        self
    }
}

const KEYWORDS: &[&str] = &[
    "ci", "ri", "cref", "cabs", "rref", "rabs", "semantics", "normalized", "top", "bot", "not", "and", "or", "exists",
    "forall", "inv", "sqsubseteq", "refines", "abstracts", "vars", "exvars", "level", "finer", "concept", "role", "rho",
];

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Punct(char),
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "'{s}'"),
            Tok::Punct(c) => write!(f, "'{c}'"),
            Tok::Eof => f.write_str("end of input"),
        }
    }
}

#[derive(Clone, Debug)]
struct Token {
    tok: Tok,
    span: SourceSpan,
}

fn is_ident_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_' || c == '\'' || c == '-'
}

fn lex(text: &str) -> Result<Vec<Token>, ParseError> {
    let mut out = vec![];
    let (mut line, mut col) = (1usize, 1usize);
    let mut chars = text.chars().peekable();
    while let Some(&c) = chars.peek() {
        let span = |len: usize| SourceSpan { file: None, line, col_start: col, col_end: col + len };
        if c == '\n' {
            chars.next();
            line += 1;
            col = 1;
        } else if c.is_whitespace() {
            chars.next();
            col += 1;
        } else if c == '#' {
            while let Some(&c) = chars.peek() {
                if c == '\n' {
                    break;
                }
                chars.next();
            }
        } else if c.is_ascii_alphanumeric() || c == '_' {
            let mut s = String::new();
            while let Some(&c) = chars.peek() {
                if !is_ident_char(c) {
                    break;
                }
                s.push(c);
                chars.next();
            }
            let len = s.chars().count();
            out.push(Token { tok: Tok::Ident(s), span: span(len) });
            col += len;
        } else if ".,;:(){}[]<=".contains(c) {
            chars.next();
            out.push(Token { tok: Tok::Punct(c), span: span(1) });
            col += 1;
        } else {
            return Err(ParseError {
                span: span(1),
                message: format!("unexpected character {c:?}"),
                expected: vec![],
            });
        }
    }
    out.push(Token { tok: Tok::Eof, span: SourceSpan { file: None, line, col_start: col, col_end: col } });
    Ok(out)
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
    semantics: Semantics,
    /// Standalone queries may be Boolean (`exvars ... { ... }`).
    allow_boolean: bool,
    allow_reserved: bool,
}

type PResult<T> = Result<T, ParseError>;

impl Parser {
    fn new(text: &str) -> PResult<Self> {
        Ok(Parser { toks: lex(text)?, pos: 0, semantics: Semantics::Standard, allow_reserved: false, allow_boolean: false })
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn span(&self) -> SourceSpan {
        self.toks[self.pos].span.clone()
    }

    fn err<T>(&self, expected: &[&str]) -> PResult<T> {
        Err(ParseError {
            span: self.span(),
            message: format!("unexpected {}", self.peek()),
            expected: expected.iter().map(|s| s.to_string()).collect(),
        })
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn at_kw(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == kw)
    }

    fn at_punct(&self, c: char) -> bool {
        *self.peek() == Tok::Punct(c)
    }

    fn kw(&mut self, kw: &str) -> PResult<()> {
        if self.at_kw(kw) {
            self.bump();
            Ok(())
        } else {
            self.err(&[&format!("'{kw}'")])
        }
    }

    fn punct(&mut self, c: char) -> PResult<()> {
        if self.at_punct(c) {
            self.bump();
            Ok(())
        } else {
            self.err(&[&format!("'{c}'")])
        }
    }

    /// A non-keyword identifier.
    fn ident(&mut self, what: &str) -> PResult<String> {
        match self.peek() {
            Tok::Ident(s) if !KEYWORDS.contains(&s.as_str()) => {
                let s = s.clone();
                self.bump();
                Ok(s)
            }
            _ => self.err(&[what]),
        }
    }

    /// A concept or role name; reserved names need the `normalized` header.
    fn symbol(&mut self, what: &str) -> PResult<String> {
        let span = self.span();
        let s = self.ident(what)?;
        if s.starts_with(RESERVED_PREFIX) && !self.allow_reserved {
            return Err(ParseError {
                span,
                message: format!("name {s} uses the reserved prefix {RESERVED_PREFIX}"),
                expected: vec![],
            });
        }
        Ok(s)
    }

    fn role(&mut self) -> PResult<Role> {
        if self.at_kw("inv") {
            self.bump();
            self.punct('(')?;
            let r = self.symbol("role name")?;
            self.punct(')')?;
            Ok(Role { name: r, inverse: true })
        } else {
            Ok(Role::new(self.symbol("role name")?))
        }
    }

    fn concept(&mut self) -> PResult<Concept> {
        let mut c = self.conj()?;
        while self.at_kw("or") {
            self.bump();
            c = Concept::or(c, self.conj()?);
        }
        Ok(c)
    }

    fn conj(&mut self) -> PResult<Concept> {
        let mut c = self.unary()?;
        while self.at_kw("and") {
            self.bump();
            c = Concept::and(c, self.unary()?);
        }
        Ok(c)
    }

    fn unary(&mut self) -> PResult<Concept> {
        const EXPECTED: &[&str] = &["concept"];
        match self.peek().clone() {
            Tok::Ident(s) => match s.as_str() {
                "top" => {
                    self.bump();
                    Ok(Concept::Top)
                }
                "bot" => {
                    self.bump();
                    Ok(Concept::Bot)
                }
                "not" => {
                    self.bump();
                    Ok(Concept::not(self.unary()?))
                }
                "exists" | "forall" => {
                    self.bump();
                    let r = self.role()?;
                    self.punct('.')?;
                    let c = self.unary()?;
                    Ok(if s == "exists" { Concept::exists(r, c) } else { Concept::forall(r, c) })
                }
                _ if KEYWORDS.contains(&s.as_str()) => self.err(EXPECTED),
                _ => Ok(Concept::Name(self.symbol("concept")?)),
            },
            Tok::Punct('(') => {
                self.bump();
                let c = self.concept()?;
                self.punct(')')?;
                Ok(c)
            }
            _ => self.err(EXPECTED),
        }
    }

    fn var_list(&mut self) -> PResult<Vec<String>> {
        let mut vs = vec![self.ident("variable")?];
        while self.at_punct(',') {
            self.bump();
            vs.push(self.ident("variable")?);
        }
        Ok(vs)
    }

    fn atom(&mut self) -> PResult<Atom> {
        let var1 = |p: &mut Parser| -> PResult<String> {
            p.punct('(')?;
            let v = p.ident("variable")?;
            p.punct(')')?;
            Ok(v)
        };
        match self.peek().clone() {
            Tok::Punct('(') => {
                self.bump();
                let c = self.concept()?;
                self.punct(')')?;
                Ok(Atom::Concept(c, var1(self)?))
            }
            Tok::Ident(s) if s == "top" || s == "bot" => {
                self.bump();
                let c = if s == "top" { Concept::Top } else { Concept::Bot };
                Ok(Atom::Concept(c, var1(self)?))
            }
            Tok::Ident(s) if s == "inv" => {
                let r = self.role()?;
                self.punct('(')?;
                let x = self.ident("variable")?;
                self.punct(',')?;
                let y = self.ident("variable")?;
                self.punct(')')?;
                Ok(Atom::Role(r, x, y))
            }
            Tok::Ident(_) => {
                let n = self.symbol("atom")?;
                self.punct('(')?;
                let x = self.ident("variable")?;
                if self.at_punct(',') {
                    self.bump();
                    let y = self.ident("variable")?;
                    self.punct(')')?;
                    Ok(Atom::Role(Role::new(n), x, y))
                } else {
                    self.punct(')')?;
                    Ok(Atom::Concept(Concept::Name(n), x))
                }
            }
            _ => self.err(&["atom"]),
        }
    }

    fn cq(&mut self, split: bool) -> PResult<Cq> {
        let xs = if self.at_kw("exvars") && self.allow_boolean {
            vec![]
        } else {
            self.kw("vars")?;
            self.var_list()?
        };
        let mut q = Cq { vars: xs, ..Default::default() };
        if split {
            self.punct(';')?;
            q.split = Some(q.vars.len());
            let ys = self.var_list()?;
            q.vars.extend(ys);
        }
        if self.at_kw("exvars") {
            if self.semantics != Semantics::Quantified && !self.allow_boolean {
                return Err(ParseError {
                    span: self.span(),
                    message: "quantified variables need the header 'semantics quantified .'".into(),
                    expected: vec![],
                });
            }
            self.bump();
            q.exvars = self.var_list()?;
        }
        self.punct('{')?;
        if !self.at_punct('}') {
            q.atoms.push(self.atom()?);
            while self.at_punct(',') {
                self.bump();
                q.atoms.push(self.atom()?);
            }
        }
        self.punct('}')?;
        q.cover_vars();
        Ok(q)
    }

    fn level(&mut self) -> PResult<String> {
        self.ident("level name")
    }

    fn statement(&mut self) -> PResult<Statement> {
        let head = match self.peek() {
            Tok::Ident(s) => s.clone(),
            _ => return self.err(&["statement"]),
        };
        let st = match head.as_str() {
            "ci" | "ri" => {
                self.bump();
                let level = self.level()?;
                self.punct(':')?;
                if head == "ci" {
                    let lhs = self.concept()?;
                    self.kw("sqsubseteq")?;
                    let rhs = self.concept()?;
                    Statement::Ci { level, lhs, rhs }
                } else {
                    let lhs = self.role()?;
                    self.kw("sqsubseteq")?;
                    let rhs = self.role()?;
                    Statement::Ri { level, lhs, rhs }
                }
            }
            "cref" | "rref" => {
                self.bump();
                let fine = self.level()?;
                self.punct(':')?;
                let cq = self.cq(head == "rref")?;
                self.kw("refines")?;
                let coarse = self.level()?;
                self.punct(':')?;
                if head == "cref" {
                    let concept = self.concept()?;
                    Statement::ConceptRef { fine, cq, coarse, concept }
                } else {
                    let cx = self.concept()?;
                    self.punct(',')?;
                    let role = self.role()?;
                    self.punct(',')?;
                    let cy = self.concept()?;
                    Statement::RoleRef { fine, cq, coarse, qr: RoleTriple { cx, role, cy } }
                }
            }
            "cabs" => {
                self.bump();
                let coarse = self.level()?;
                self.punct(':')?;
                let concept = self.concept()?;
                self.kw("abstracts")?;
                let fine = self.level()?;
                self.punct(':')?;
                let cq = self.cq(false)?;
                Statement::ConceptAbs { coarse, concept, fine, cq }
            }
            "rabs" => {
                self.bump();
                let coarse = self.level()?;
                self.punct(':')?;
                let role = self.role()?;
                self.kw("abstracts")?;
                let fine = self.level()?;
                self.punct(':')?;
                let cq = self.cq(true)?;
                Statement::RoleAbs { coarse, role, fine, cq }
            }
            _ => return self.err(&["'ci'", "'ri'", "'cref'", "'cabs'", "'rref'", "'rabs'"]),
        };
        self.punct('.')?;
        Ok(st)
    }

    fn ontology(&mut self) -> PResult<Ontology> {
        let mut o = Ontology::default();
        loop {
            if self.at_kw("semantics") {
                self.bump();
                let span = self.span();
                let kw = self.ident("semantics variant")?;
                self.semantics = Semantics::from_keyword(&kw).ok_or(ParseError {
                    span,
                    message: format!("unknown semantics {kw}"),
                    expected: vec!["standard, repetition-free, dag or quantified".into()],
                })?;
                self.punct('.')?;
            } else if self.at_kw("normalized") {
                self.bump();
                self.allow_reserved = true;
                self.punct('.')?;
            } else {
                break;
            }
        }
        o.semantics = self.semantics;
        while *self.peek() != Tok::Eof {
            o.statements.push(self.statement()?);
        }
        Ok(o)
    }

    fn element_list(&mut self, close: char) -> PResult<Vec<String>> {
        let mut out = vec![];
        if self.at_punct(close) {
            return Ok(out);
        }
        out.push(self.ident("element")?);
        while self.at_punct(',') {
            self.bump();
            out.push(self.ident("element")?);
        }
        Ok(out)
    }

    fn interpretation(&mut self) -> PResult<AInterpretation> {
        let mut i = AInterpretation::default();
        while *self.peek() != Tok::Eof {
            let head = match self.peek() {
                Tok::Ident(s) => s.clone(),
                _ => return self.err(&["'level'", "'finer'", "'concept'", "'role'", "'rho'"]),
            };
            match head.as_str() {
                "level" => {
                    self.bump();
                    let l = self.level()?;
                    self.punct('{')?;
                    let elems = self.element_list('}')?;
                    self.punct('}')?;
                    i.level_mut(&l).domain.extend(elems);
                }
                "finer" => {
                    self.bump();
                    let a = self.level()?;
                    self.punct('<')?;
                    let b = self.level()?;
                    i.prec.insert((a, b));
                }
                "concept" | "role" => {
                    self.bump();
                    let l = self.level()?;
                    let n = self.symbol("name")?;
                    self.punct('{')?;
                    let li = i.level_mut(&l);
                    if head == "concept" {
                        let elems = self.element_list('}')?;
                        li.concepts.entry(n).or_default().extend(elems);
                    } else {
                        let ext = li.roles.entry(n).or_default();
                        if !self.at_punct('}') {
                            loop {
                                self.punct('(')?;
                                let a = self.ident("element")?;
                                self.punct(',')?;
                                let b = self.ident("element")?;
                                self.punct(')')?;
                                ext.insert((a, b));
                                if !self.at_punct(',') {
                                    break;
                                }
                                self.bump();
                            }
                        }
                    }
                    self.punct('}')?;
                }
                "rho" => {
                    self.bump();
                    self.punct('(')?;
                    let d = self.ident("element")?;
                    self.punct(',')?;
                    let l = self.level()?;
                    self.punct(')')?;
                    self.punct('=')?;
                    self.punct('[')?;
                    let t = self.element_list(']')?;
                    self.punct(']')?;
                    i.rho.insert((d, l), t);
                }
                "normalized" => {
                    self.bump();
                    self.allow_reserved = true;
                }
                _ => return self.err(&["'level'", "'finer'", "'concept'", "'role'", "'rho'"]),
            }
            self.punct('.')?;
        }
        Ok(i)
    }
}

pub fn parse_ontology(text: &str) -> Result<Ontology, ParseError> {
    Parser::new(text)?.ontology()
}

pub fn parse_interpretation(text: &str) -> Result<AInterpretation, ParseError> {
    Parser::new(text)?.interpretation()
}

/// Parses a single concept (used for command-line goals).
pub fn parse_concept(text: &str) -> Result<Concept, ParseError> {
    let mut p = Parser::new(text)?;
    p.allow_reserved = true;
    let c = p.concept()?;
    if *p.peek() != Tok::Eof {
        return p.err(&["end of concept"]);
    }
    Ok(c)
}

/// Parses a standalone query, `vars x̄ [; ȳ] [exvars z̄] { atoms }` or the
/// Boolean form `exvars z̄ { atoms }`.
pub fn parse_cq(text: &str) -> Result<Cq, ParseError> {
    let mut p = Parser::new(text)?;
    p.allow_boolean = true;
    let split = text.contains(';');
    let q = p.cq(split)?;
    if *p.peek() != Tok::Eof {
        return p.err(&["end of query"]);
    }
    Ok(q)
}

pub fn concept_to_string(c: &Concept) -> String {
    let mut s = String::new();
    write_concept(&mut s, c, 0);
    s
}

/// Binding strength: `or` 1, `and` 2, unary constructors and names 3.
fn write_concept(out: &mut String, c: &Concept, ctx: u8) {
    let (prec, body) = match c {
        Concept::Name(n) => (3, n.clone()),
        Concept::Top => (3, "top".to_string()),
        Concept::Bot => (3, "bot".to_string()),
        Concept::Not(inner) => {
            let mut s = "not ".to_string();
            write_concept(&mut s, inner, 3);
            (3, s)
        }
        Concept::Exists(r, inner) => {
            let mut s = format!("exists {r} . ");
            write_concept(&mut s, inner, 3);
            (3, s)
        }
        Concept::Forall(r, inner) => {
            let mut s = format!("forall {r} . ");
            write_concept(&mut s, inner, 3);
            (3, s)
        }
        Concept::And(a, b) | Concept::Or(a, b) => {
            let (p, op) = if matches!(c, Concept::And(..)) { (2, "and") } else { (1, "or") };
            let mut s = String::new();
            write_concept(&mut s, a, p);
            let _ = write!(s, " {op} ");
            write_concept(&mut s, b, p + 1);
            (p, s)
        }
    };
    if prec < ctx {
        let _ = write!(out, "({body})");
    } else {
        out.push_str(&body);
    }
}

fn atom_to_string(a: &Atom) -> String {
    match a {
        Atom::Concept(Concept::Name(n), v) => format!("{n}({v})"),
        Atom::Concept(Concept::Top, v) => format!("top({v})"),
        Atom::Concept(Concept::Bot, v) => format!("bot({v})"),
        Atom::Concept(c, v) => format!("({})({v})", concept_to_string(c)),
        Atom::Role(r, x, y) => format!("{r}({x},{y})"),
    }
}

pub fn cq_to_string(q: &Cq) -> String {
    let mut s = String::new();
    match q.split {
        Some(k) => {
            let _ = write!(s, "vars {}; {}", q.vars[..k].join(", "), q.vars[k..].join(", "));
        }
        None if q.vars.is_empty() => {}
        None => s.push_str(&format!("vars {}", q.vars.join(", "))),
    }
    if !q.exvars.is_empty() {
        let sep = if s.is_empty() { "" } else { " " };
        let _ = write!(s, "{sep}exvars {}", q.exvars.join(", "));
    }
    let atoms: Vec<String> = q.atoms.iter().map(atom_to_string).collect();
    let _ = write!(s, " {{ {} }}", atoms.join(", "));
    s
}

pub fn statement_to_string(st: &Statement) -> String {
    let c = concept_to_string;
    match st {
        Statement::Ci { level, lhs, rhs } => format!("ci {level}: {} sqsubseteq {} .", c(lhs), c(rhs)),
        Statement::Ri { level, lhs, rhs } => format!("ri {level}: {lhs} sqsubseteq {rhs} ."),
        Statement::ConceptRef { fine, cq, coarse, concept } => {
            format!("cref {fine}: {} refines {coarse}: {} .", cq_to_string(cq), c(concept))
        }
        Statement::ConceptAbs { coarse, concept, fine, cq } => {
            format!("cabs {coarse}: {} abstracts {fine}: {} .", c(concept), cq_to_string(cq))
        }
        Statement::RoleRef { fine, cq, coarse, qr } => format!(
            "rref {fine}: {} refines {coarse}: {}, {}, {} .",
            cq_to_string(cq),
            c(&qr.cx),
            qr.role,
            c(&qr.cy)
        ),
        Statement::RoleAbs { coarse, role, fine, cq } => {
            format!("rabs {coarse}: {role} abstracts {fine}: {} .", cq_to_string(cq))
        }
    }
}

fn uses_reserved(o: &Ontology) -> bool {
    let (c, r) = o.signature();
    c.iter().chain(r.iter()).any(|n| n.starts_with(RESERVED_PREFIX))
}

pub fn serialize_ontology(o: &Ontology) -> String {
    let mut s = String::from("# abdl ontology\n");
    if o.semantics != Semantics::Standard {
        let _ = writeln!(s, "semantics {} .", o.semantics);
    }
    if uses_reserved(o) {
        s.push_str("normalized .\n");
    }
    for st in &o.statements {
        s.push_str(&statement_to_string(st));
        s.push('\n');
    }
    s
}

pub fn serialize_interpretation(i: &AInterpretation) -> String {
    let mut s = String::from("# abdl interpretation\n");
    let reserved = i.levels.values().any(|l| {
        l.concepts.keys().chain(l.roles.keys()).any(|n| n.starts_with(RESERVED_PREFIX))
    });
    if reserved {
        s.push_str("normalized .\n");
    }
    for (l, li) in &i.levels {
        let _ = writeln!(s, "level {l} {{ {} }} .", li.domain.join(", "));
    }
    for (a, b) in &i.prec {
        let _ = writeln!(s, "finer {a} < {b} .");
    }
    for (l, li) in &i.levels {
        for (c, ext) in &li.concepts {
            let elems: Vec<&str> = ext.iter().map(|e| e.as_str()).collect();
            let _ = writeln!(s, "concept {l} {c} {{ {} }} .", elems.join(", "));
        }
        for (r, ext) in &li.roles {
            let pairs: Vec<String> = ext.iter().map(|(a, b)| format!("({a},{b})")).collect();
            let _ = writeln!(s, "role {l} {r} {{ {} }} .", pairs.join(", "));
        }
    }
    for ((d, l), t) in &i.rho {
        let _ = writeln!(s, "rho ({d}, {l}) = [{}] .", t.join(", "));
    }
    s
}

/// Element names used anywhere in an interpretation file.
pub fn mentioned_elements(i: &AInterpretation) -> BTreeSet<Name> {
    let mut out = BTreeSet::new();
    for li in i.levels.values() {
        out.extend(li.domain.iter().cloned());
        for ext in li.concepts.values() {
            out.extend(ext.iter().cloned());
        }
        for ext in li.roles.values() {
            for (a, b) in ext {
                out.insert(a.clone());
                out.insert(b.clone());
            }
        }
    }
    for ((d, _), t) in &i.rho {
        out.insert(d.clone());
        out.extend(t.iter().cloned());
    }
    out
}
