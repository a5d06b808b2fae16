//! `abdl`: satisfiability, model checking, normalization, model search and
//! gadget generation from the command line.
//!
//! Exit codes: 0 SAT / model / success, 1 UNSAT / not a model, 2 UNKNOWN or
//! inconclusive, 64 usage, 65 parse or validation error.

mod gen;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use abdl_core::check::{check_model, eval_concept_level, CheckError};
use abdl_core::normalize::{close_role_hierarchy, normalize, prepare};
use abdl_core::syntax::{
    concept_to_string, parse_concept, parse_interpretation, parse_ontology, serialize_interpretation, serialize_ontology,
};
use abdl_core::{validate_interpretation, validate_ontology, AInterpretation, Concept, Diagnostic, Name, Ontology, Semantics};
use abdl_solver::dispatch::{sat, Fragment, SatConfig, SatOutcome, SatWitness};
use abdl_solver::oracle::{find_model, OracleConfig, OracleError, OracleOutcome};
use abdl_solver::{SolveError, Verdict};
use clap::{Parser, Subcommand, ValueEnum};

const VARIANTS_DOC: &str = "docs/variants.md";

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {message}")]
    Input { path: String, message: String },
    #[error("{path}: invalid:\n{}", list(.diagnostics))]
    Invalid { path: String, diagnostics: Vec<Diagnostic> },
    #[error("{0}")]
    Gadget(#[from] abdl_gadgets::GadgetError),
}

fn list(ds: &[Diagnostic]) -> String {
    ds.iter().map(|d| format!("  {d}")).collect::<Vec<_>>().join("\n")
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 64,
            _ => 65,
        }
    }
}

type Result<T> = std::result::Result<T, CliError>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum FragmentArg {
    Auto,
    Cr,
    Full,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum SemanticsArg {
    Standard,
    RepetitionFree,
    Dag,
    Quantified,
}

impl From<SemanticsArg> for Semantics {
    fn from(s: SemanticsArg) -> Self {
        match s {
            SemanticsArg::Standard => Semantics::Standard,
            SemanticsArg::RepetitionFree => Semantics::RepetitionFree,
            SemanticsArg::Dag => Semantics::Dag,
            SemanticsArg::Quantified => Semantics::Quantified,
        }
    }
}

#[derive(Parser, Debug)]
#[command(name = "abdl", version, about = "Reasoning with abstraction levels in ALCHI")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Decide whether a concept is satisfiable at a level.
    Sat {
        ontology: PathBuf,
        /// Goal as CONCEPT@LEVEL; compound concepts are allowed.
        #[arg(long)]
        goal: String,
        #[arg(long, value_enum, default_value = "auto")]
        fragment: FragmentArg,
        /// Elements per mosaic.
        #[arg(long)]
        max_domain: Option<usize>,
        /// Maximum ρ tuple length (full fragment).
        #[arg(long)]
        max_tuple: Option<usize>,
        #[arg(long, value_enum)]
        semantics: Option<SemanticsArg>,
        /// Completion-step budget of the full procedure.
        #[arg(long, env = "ABDL_BUDGET")]
        budget: Option<usize>,
        /// Print key=value lines instead of prose.
        #[arg(long)]
        report: bool,
        /// Write the witness (surviving labels or mosaics) here on SAT.
        #[arg(long)]
        witness: Option<PathBuf>,
    },
    /// Check an interpretation against an ontology.
    CheckModel {
        #[arg(long)]
        ontology: PathBuf,
        #[arg(long)]
        model: PathBuf,
        #[arg(long, value_enum)]
        semantics: Option<SemanticsArg>,
        /// Also require CONCEPT@LEVEL to be nonempty.
        #[arg(long)]
        goal: Option<String>,
        /// List every violation instead of the first per statement.
        #[arg(long)]
        all: bool,
    },
    /// Print the normal form (role hierarchy closed).
    Normalize {
        ontology: PathBuf,
        /// Wrap CONCEPT@LEVEL into a fresh goal name first.
        #[arg(long)]
        goal: Option<String>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Search for a finite model with a bounded number of elements per level.
    Oracle {
        ontology: PathBuf,
        #[arg(long)]
        goal: Option<String>,
        #[arg(long, default_value_t = 3)]
        max_per_level: usize,
        #[arg(long, value_enum)]
        semantics: Option<SemanticsArg>,
        /// Maximum number of clauses per encoding.
        #[arg(long, env = "ABDL_BUDGET")]
        budget: Option<usize>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Generate a reduction or simulation ontology, or a fixture interpretation.
    Gen {
        #[arg(value_enum)]
        gadget: gen::GadgetName,
        /// key=value file; relative paths are resolved against its directory.
        #[arg(long)]
        params: Option<PathBuf>,
        /// Extra key=value parameters, overriding the file.
        #[arg(long = "set", value_name = "KEY=VALUE")]
        set: Vec<String>,
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Print the per-family statement counts instead of the ontology.
        #[arg(long)]
        report: bool,
    },
    /// Parse and validate an ontology (.abdl) or interpretation (.abint).
    Validate {
        file: PathBuf,
        #[arg(long, value_enum)]
        semantics: Option<SemanticsArg>,
    },
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| CliError::Input { path: path.display().to_string(), message: e.to_string() })
}

fn load_ontology(path: &Path) -> Result<Ontology> {
    let o = parse_ontology(&read(path)?)
        .map_err(|e| CliError::Input { path: path.display().to_string(), message: e.to_string() })?;
    let diagnostics = validate_ontology(&o);
    if !diagnostics.is_empty() {
        return Err(CliError::Invalid { path: path.display().to_string(), diagnostics });
    }
    Ok(o)
}

fn load_interpretation(path: &Path) -> Result<AInterpretation> {
    parse_interpretation(&read(path)?).map_err(|e| CliError::Input { path: path.display().to_string(), message: e.to_string() })
}

fn parse_goal(text: &str) -> Result<(Concept, Name)> {
    let Some((c, l)) = text.rsplit_once('@') else {
        return Err(CliError::Usage(format!("goal {text:?} is not of the form CONCEPT@LEVEL")));
    };
    let c = parse_concept(c.trim()).map_err(|e| CliError::Usage(format!("goal concept: {e}")))?;
    let l = l.trim();
    if l.is_empty() {
        return Err(CliError::Usage("goal level is empty".into()));
    }
    Ok((c, l.to_string()))
}

/// The variant to work under: the file's header, or `--semantics` when
/// the file does not declare a variant of its own.
fn effective(o: &Ontology, flag: Option<SemanticsArg>) -> Result<Semantics> {
    match flag.map(Semantics::from) {
        None => Ok(o.semantics),
        Some(s) if o.semantics == Semantics::Standard || o.semantics == s => Ok(s),
        Some(s) => Err(CliError::Usage(format!("the file declares the {} semantics but --semantics is {s}", o.semantics))),
    }
}

fn write_out(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| CliError::Input { path: p.display().to_string(), message: e.to_string() }),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn verdict_code(v: Verdict) -> u8 {
    match v {
        Verdict::Sat => 0,
        Verdict::Unsat => 1,
        Verdict::Unknown => 2,
    }
}

fn report_lines(out: &SatOutcome, goal: &str) -> String {
    let b = &out.bounds;
    let mut lines = vec![
        format!("verdict={}", out.verdict),
        format!("fragment={}", out.fragment),
        format!("goal={goal}"),
        format!("domain_bound={}", b.domain),
        format!("tuple_bound={}", b.tuple.map(|t| t.to_string()).unwrap_or_else(|| "-".into())),
        format!("exact={}", b.exact),
        format!("complete_at={}", b.complete_at),
        format!("reason={}", out.reason),
    ];
    if let Some((g, s)) = out.mosaics {
        lines.push(format!("mosaics_generated={g}"));
        lines.push(format!("mosaics_surviving={s}"));
    }
    lines.join("\n") + "\n"
}

fn witness_text(w: &SatWitness) -> String {
    let mut s = String::new();
    match w {
        SatWitness::Cr(w) => {
            for (l, labels) in &w.labels {
                for t in labels {
                    let names: Vec<&str> = t.iter().map(|n| n.as_str()).collect();
                    s.push_str(&format!("label {l} {{ {} }}\n", names.join(", ")));
                }
            }
        }
        SatWitness::Full(w) => {
            for (k, m) in w.mosaics.iter().enumerate() {
                s.push_str(&format!("# mosaic {k}\n{m}\n"));
            }
            for c in &w.certificates {
                s.push_str(&format!(
                    "# certificate mosaic {} partner {} edges {}\n",
                    c.mosaic,
                    c.witness.partner,
                    c.witness.edges.len()
                ));
            }
            s.push_str("# assembled interpretation\n");
            s.push_str(&serialize_interpretation(&w.to_interpretation()));
        }
    }
    s
}

#[allow(clippy::too_many_arguments)]
fn cmd_sat(
    path: &Path,
    goal: &str,
    fragment: FragmentArg,
    max_domain: Option<usize>,
    max_tuple: Option<usize>,
    semantics: Option<SemanticsArg>,
    budget: Option<usize>,
    report: bool,
    witness: Option<&Path>,
) -> Result<u8> {
    let o = load_ontology(path)?;
    let variant = effective(&o, semantics)?;
    if variant != Semantics::Standard {
        return Err(CliError::Usage(format!(
            "satisfiability under the {variant} semantics is undecidable; see {VARIANTS_DOC}"
        )));
    }
    let (c, l) = parse_goal(goal)?;
    let fragment = match fragment {
        FragmentArg::Auto => Fragment::Auto,
        FragmentArg::Cr => Fragment::Cr,
        FragmentArg::Full => Fragment::Full,
    };
    let cfg = SatConfig { fragment, domain: max_domain, tuple: max_tuple, budget };
    let out = sat(&o, &c, &l, &cfg).map_err(|e| match e {
        SolveError::Fragment(..) | SolveError::Variant(_) | SolveError::UnknownGoalLevel(_) => CliError::Usage(e.to_string()),
        _ => CliError::Input { path: path.display().to_string(), message: e.to_string() },
    })?;
    let goal_text = format!("{}@{l}", concept_to_string(&c));
    if report {
        print!("{}", report_lines(&out, &goal_text));
    } else {
        println!("{}", out.verdict);
        let b = &out.bounds;
        let tuple = b.tuple.map(|t| format!(", tuple length {t}")).unwrap_or_default();
        let exact = if b.exact { "exact" } else { "not exact" };
        println!("fragment {}; bound {} elements{tuple} ({exact}; complete at {})", out.fragment, b.domain, b.complete_at);
        println!("{}", out.reason);
    }
    if let (Some(p), Some(w)) = (witness, &out.witness) {
        write_out(Some(p), &witness_text(w))?;
    }
    Ok(verdict_code(out.verdict))
}

fn cmd_check(o_path: &Path, m_path: &Path, semantics: Option<SemanticsArg>, goal: Option<&str>, all: bool) -> Result<u8> {
    let o = load_ontology(o_path)?;
    let i = load_interpretation(m_path)?;
    let variant = effective(&o, semantics)?;
    let goal = goal.map(parse_goal).transpose()?;
    let report = match check_model(&o, &i, variant) {
        Ok(r) => r,
        // shape conditions are part of being an A-interpretation
        Err(CheckError::Invalid(ds)) if ds.iter().all(|d| d.rule.is_semantic()) => {
            println!("not a model: not an A-interpretation under the {variant} semantics");
            for d in &ds {
                println!("  {d}");
            }
            return Ok(1);
        }
        Err(CheckError::Invalid(diagnostics)) => {
            let diagnostics = diagnostics.into_iter().filter(|d| !d.rule.is_semantic()).collect();
            return Err(CliError::Invalid { path: m_path.display().to_string(), diagnostics });
        }
        Err(e) => return Err(CliError::Input { path: m_path.display().to_string(), message: e.to_string() }),
    };
    let mut ok = report.is_model();
    if !ok {
        println!("not a model");
        let mut seen = std::collections::BTreeSet::new();
        for v in &report.violations {
            if all || seen.insert(v.statement) {
                println!("  {v}");
            }
        }
    }
    if let Some((c, l)) = &goal {
        let nonempty = i.levels.get(l).is_some_and(|li| !eval_concept_level(c, li).is_empty());
        if !nonempty {
            if ok {
                println!("not a model of the goal");
            }
            println!("  goal {}@{l} is empty", concept_to_string(c));
            ok = false;
        }
    }
    if ok {
        println!("model");
    }
    Ok(if ok { 0 } else { 1 })
}

fn cmd_normalize(path: &Path, goal: Option<&str>, output: Option<&Path>) -> Result<u8> {
    let o = load_ontology(path)?;
    let n = match goal.map(parse_goal).transpose()? {
        Some((c, l)) => {
            let (n, a0) = prepare(&o, &c, &l);
            eprintln!("goal name: {a0}@{l}");
            n
        }
        None => close_role_hierarchy(&normalize(&o)),
    };
    write_out(output, &serialize_ontology(&n))?;
    Ok(0)
}

fn cmd_oracle(
    path: &Path,
    goal: Option<&str>,
    cap: usize,
    semantics: Option<SemanticsArg>,
    budget: Option<usize>,
    output: Option<&Path>,
) -> Result<u8> {
    if cap == 0 {
        return Err(CliError::Usage("--max-per-level must be at least 1".into()));
    }
    let o = load_ontology(path)?;
    let variant = effective(&o, semantics)?;
    let goal = goal.map(parse_goal).transpose()?;
    let mut cfg = OracleConfig::new(cap).with_variant(variant);
    cfg.budget = budget;
    match find_model(&o, goal.as_ref().map(|(c, l)| (c, l.as_str())), &cfg) {
        Ok(OracleOutcome::Found(i)) => {
            write_out(output, &serialize_interpretation(&i))?;
            Ok(0)
        }
        Ok(OracleOutcome::Exhausted { cap }) => {
            println!("no model with at most {cap} elements per level");
            Ok(2)
        }
        Err(e @ OracleError::Budget { .. }) => {
            println!("inconclusive: {e}");
            Ok(2)
        }
        Err(e) => Err(CliError::Input { path: path.display().to_string(), message: e.to_string() }),
    }
}

fn cmd_validate(path: &Path, semantics: Option<SemanticsArg>) -> Result<u8> {
    let text = read(path)?;
    let is_interp = path.extension().is_some_and(|e| e == "abint");
    let input = |e: abdl_core::syntax::ParseError| CliError::Input { path: path.display().to_string(), message: e.to_string() };
    let diagnostics = if is_interp {
        let i = parse_interpretation(&text).map_err(input)?;
        validate_interpretation(&i, semantics.map(Semantics::from).unwrap_or_default())
    } else {
        let o = parse_ontology(&text).map_err(input)?;
        effective(&o, semantics)?;
        validate_ontology(&o)
    };
    if !diagnostics.is_empty() {
        return Err(CliError::Invalid { path: path.display().to_string(), diagnostics });
    }
    println!("ok");
    Ok(0)
}

fn run(cli: Cli) -> Result<u8> {
    match cli.command {
        Command::Sat { ontology, goal, fragment, max_domain, max_tuple, semantics, budget, report, witness } => {
            cmd_sat(&ontology, &goal, fragment, max_domain, max_tuple, semantics, budget, report, witness.as_deref())
        }
        Command::CheckModel { ontology, model, semantics, goal, all } => {
            cmd_check(&ontology, &model, semantics, goal.as_deref(), all)
        }
        Command::Normalize { ontology, goal, output } => cmd_normalize(&ontology, goal.as_deref(), output.as_deref()),
        Command::Oracle { ontology, goal, max_per_level, semantics, budget, output } => {
            cmd_oracle(&ontology, goal.as_deref(), max_per_level, semantics, budget, output.as_deref())
        }
        Command::Gen { gadget, params, set, output, report } => {
            let text = gen::run(gadget, params.as_deref(), &set, report)?;
            write_out(output.as_deref(), &text)?;
            Ok(0)
        }
        Command::Validate { file, semantics } => cmd_validate(&file, semantics),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 64 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("abdl: {e}");
            ExitCode::from(e.code())
        }
    }
}
