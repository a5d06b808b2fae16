//! `abdl gen`: parameter files and dispatch to the gadget generators.
//!
//! Parameters are `key = value` lines (`#` comments). Keys per gadget:
//!
//! | gadget | keys |
//! |---|---|
//! | ca-simple, ra-reduction, ca-sym | `ontology`, `goal` (concept name), `query` |
//! | rr-atm | `machine`, `word` (space separated) |
//! | repfree-dtm, dag-dtm, quantified-dtm | `machine` |
//! | grid-fixture | `machine`, `k` |
//! | computation-tree | `m`, `cutoff` |
//! | botsim | `concept`, `level`, optional `coarse`, optional `context` |
//! | forallsim | `concept`, `role`, `filler`, `level`, optional `context` |

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use abdl_core::syntax::{parse_concept, parse_cq, parse_ontology, serialize_interpretation, serialize_ontology};
use abdl_core::{Concept, Ontology, Role};
use abdl_gadgets::{
    computation_tree, gen_bot_simulation, gen_ca_simple, gen_ca_sym_reduction, gen_dag_dtm, gen_forall_simulation,
    gen_quantified_dtm, gen_ra_reduction, gen_repfree_dtm, gen_rr_atm, grid_fixture, parse_atm, parse_dtm, Gadget,
};
use clap::ValueEnum;

use crate::{read, CliError, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum GadgetName {
    CaSimple,
    RaReduction,
    CaSym,
    RrAtm,
    Botsim,
    Forallsim,
    RepfreeDtm,
    DagDtm,
    QuantifiedDtm,
    ComputationTree,
    GridFixture,
}

struct Params {
    values: BTreeMap<String, String>,
    base: PathBuf,
}

fn parse_pairs(text: &str, origin: &str, into: &mut BTreeMap<String, String>) -> Result<()> {
    for (n, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap().trim();
        if line.is_empty() {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return Err(CliError::Input { path: origin.into(), message: format!("line {}: expected key=value", n + 1) });
        };
        into.insert(k.trim().to_string(), v.trim().to_string());
    }
    Ok(())
}

impl Params {
    fn load(file: Option<&Path>, set: &[String]) -> Result<Self> {
        let mut values = BTreeMap::new();
        let mut base = PathBuf::from(".");
        if let Some(f) = file {
            parse_pairs(&read(f)?, &f.display().to_string(), &mut values)?;
            base = f.parent().map(Path::to_path_buf).unwrap_or(base);
        }
        for s in set {
            let Some((k, v)) = s.split_once('=') else {
                return Err(CliError::Usage(format!("--set {s}: expected KEY=VALUE")));
            };
            values.insert(k.trim().to_string(), v.trim().to_string());
        }
        Ok(Params { values, base })
    }

    fn get(&self, k: &str) -> Result<&str> {
        self.values.get(k).map(String::as_str).ok_or_else(|| CliError::Usage(format!("missing parameter {k}")))
    }

    fn opt(&self, k: &str) -> Option<&str> {
        self.values.get(k).map(String::as_str)
    }

    /// Paths from a params file are relative to that file; `--set` paths
    /// are relative to the working directory only when there is no file.
    fn path(&self, k: &str) -> Result<PathBuf> {
        let p = PathBuf::from(self.get(k)?);
        Ok(if p.is_absolute() { p } else { self.base.join(p) })
    }

    fn number(&self, k: &str) -> Result<usize> {
        self.get(k)?.parse().map_err(|_| CliError::Usage(format!("parameter {k} must be a number")))
    }

    fn concept(&self, k: &str) -> Result<Concept> {
        parse_concept(self.get(k)?).map_err(|e| CliError::Usage(format!("parameter {k}: {e}")))
    }

    fn ontology(&self, k: &str) -> Result<Ontology> {
        let p = self.path(k)?;
        parse_ontology(&read(&p)?).map_err(|e| CliError::Input { path: p.display().to_string(), message: e.to_string() })
    }

    fn context(&self) -> Result<Ontology> {
        match self.opt("context") {
            Some(_) => self.ontology("context"),
            None => Ok(Ontology::default()),
        }
    }

    fn machine_text(&self) -> Result<String> {
        read(&self.path("machine")?)
    }
}

fn gadget_text(g: &Gadget, report: bool) -> String {
    if report {
        return g.report();
    }
    let goal = abdl_core::syntax::concept_to_string(&g.goal);
    format!("# goal {goal}@{}\n{}", g.level, serialize_ontology(&g.ontology))
}

/// Runs a generator and returns the text to emit.
pub fn run(name: GadgetName, file: Option<&Path>, set: &[String], report: bool) -> Result<String> {
    let p = Params::load(file, set)?;
    let cq_input = || -> Result<(Ontology, String, abdl_core::Cq)> {
        let q = parse_cq(p.get("query")?).map_err(|e| CliError::Usage(format!("parameter query: {e}")))?;
        Ok((p.ontology("ontology")?, p.get("goal")?.to_string(), q))
    };
    let simulated = |stmts: [abdl_core::Statement; 2], mut context: Ontology| {
        context.statements.extend(stmts);
        if report {
            format!("simulation 2\ntotal {}\n", context.statements.len())
        } else {
            serialize_ontology(&context)
        }
    };
    Ok(match name {
        GadgetName::CaSimple => {
            let (o, a0, q) = cq_input()?;
            gadget_text(&gen_ca_simple(&o, &a0, &q)?, report)
        }
        GadgetName::RaReduction => {
            let (o, a0, q) = cq_input()?;
            gadget_text(&gen_ra_reduction(&o, &a0, &q)?, report)
        }
        GadgetName::CaSym => {
            let (o, a0, q) = cq_input()?;
            gadget_text(&gen_ca_sym_reduction(&o, &a0, &q)?, report)
        }
        GadgetName::RrAtm => {
            let m = parse_atm(&p.machine_text()?)?;
            let w: Vec<String> = p.get("word")?.split_whitespace().map(str::to_string).collect();
            gadget_text(&gen_rr_atm(&m, &w)?, report)
        }
        GadgetName::RepfreeDtm => gadget_text(&gen_repfree_dtm(&parse_dtm(&p.machine_text()?)?)?, report),
        GadgetName::DagDtm => gadget_text(&gen_dag_dtm(&parse_dtm(&p.machine_text()?)?)?, report),
        GadgetName::QuantifiedDtm => gadget_text(&gen_quantified_dtm(&parse_dtm(&p.machine_text()?)?)?, report),
        GadgetName::GridFixture => {
            let g = grid_fixture(p.number("k")?, &parse_dtm(&p.machine_text()?)?)?;
            serialize_interpretation(&g.interpretation)
        }
        GadgetName::ComputationTree => serialize_interpretation(&computation_tree(p.number("m")?, p.number("cutoff")?)),
        GadgetName::Botsim => {
            let context = p.context()?;
            let stmts = gen_bot_simulation(&p.concept("concept")?, p.get("level")?, p.opt("coarse"), &context);
            simulated(stmts, context)
        }
        GadgetName::Forallsim => {
            let context = p.context()?;
            let role = p.get("role")?;
            let role = match role.strip_prefix("inv(").and_then(|r| r.strip_suffix(')')) {
                Some(r) => Role::new(r.trim()).inv(),
                None => Role::new(role),
            };
            let stmts = gen_forall_simulation(&p.concept("concept")?, &role, &p.concept("filler")?, p.get("level")?, &context);
            simulated(stmts, context)
        }
    })
}
