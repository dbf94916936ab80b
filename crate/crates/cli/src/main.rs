//! `efmct`: well-formedness, rule application, admissibility, conflict
//! analysis and configuration checks for extended feature models.
//!
//! Exit codes: 0 for a clean verdict, 1 for a negative verdict, 2 for usage,
//! I/O and parse errors.

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Parser, Subcommand};
use efmct_core::conflict::{analyze_pair, analyze_ruleset, AnalysisOptions, Verdict};
use efmct_core::efm::{check_configuration, check_wellformed};
use efmct_core::io::report::{render_matrix, ConflictReport};
use efmct_core::io::{parse_assignment, parse_model, parse_rule, serialize_model};
use efmct_core::rule::{
    apply, check_admissibility, find_rule_matches, Admissibility, ApplicationStatus,
};
use efmct_core::smt::{ProcessSolver, SolverConfig, DEFAULT_TIMEOUT_MS, SOLVER_ENV};
use efmct_core::{Morphism, ObjId, SymbolicRule};

#[derive(Parser, Debug)]
#[command(
    name = "efmct",
    version,
    about = "Conflict analysis for edits of extended feature models"
)]
struct Cli {
    /// Solver command line, e.g. "z3 -in".
    #[arg(long, global = true, env = SOLVER_ENV)]
    solver_cmd: Option<String>,

    /// Per-query solver timeout in milliseconds.
    #[arg(long, global = true, default_value_t = DEFAULT_TIMEOUT_MS)]
    timeout_ms: u64,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check a model against the well-formedness constraints.
    CheckWf { model: PathBuf },

    /// Apply a rule to a model and print the result.
    Apply {
        rule: PathBuf,
        model: PathBuf,
        /// Pins an LHS object to a host object, as `lhs=host`. Repeatable.
        #[arg(long = "match", value_name = "K=V")]
        matches: Vec<String>,
        /// Write the resulting model here instead of standard output.
        #[arg(long)]
        out: Option<PathBuf>,
    },

    /// Check that a rule's effect can always be met.
    Admissible { rule: PathBuf },

    /// Classify rule pairs as conflicting or non-conflicting.
    Analyze {
        #[arg(required = true)]
        rules: Vec<PathBuf>,
        /// `all`, or `i,j` with 0-based positions in the rule list.
        #[arg(long, default_value = "all")]
        pairs: String,
        /// Stop after the structural filter.
        #[arg(long)]
        cpa_only: bool,
        /// Include per-context traces in the report.
        #[arg(long)]
        trace: bool,
        /// Write the JSON report here.
        #[arg(long)]
        out: Option<PathBuf>,
    },

    /// Check whether an assignment is a valid configuration of a model.
    ConfigCheck { model: PathBuf, assignment: PathBuf },
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn load_rule(path: &Path) -> Result<SymbolicRule> {
    parse_rule(&read(path)?).with_context(|| format!("{}", path.display()))
}

/// Writes via a temporary sibling and a rename so readers never see a
/// partial file.
fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let dir = path
        .parent()
        .filter(|p| !p.as_os_str().is_empty())
        .unwrap_or(Path::new("."));
    let name = path
        .file_name()
        .ok_or_else(|| anyhow!("{} is not a file path", path.display()))?;
    let tmp = dir.join(format!(
        ".{}.{}.tmp",
        name.to_string_lossy(),
        std::process::id()
    ));
    let result = (|| {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(contents.as_bytes())?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    })();
    if result.is_err() {
        let _ = fs::remove_file(&tmp);
    }
    result.with_context(|| format!("cannot write {}", path.display()))
}

fn solver_config(cli: &Cli) -> SolverConfig {
    let mut cfg = SolverConfig::default();
    if let Some(cmd) = &cli.solver_cmd {
        cfg.set_command(cmd);
    }
    cfg.timeout_ms = cli.timeout_ms;
    cfg
}

fn parse_pins(pins: &[String]) -> Result<Vec<(ObjId, ObjId)>> {
    pins.iter()
        .map(|p| {
            let (k, v) = p
                .split_once('=')
                .ok_or_else(|| anyhow!("--match expects lhs=host, got `{p}`"))?;
            Ok((ObjId::from(k.trim()), ObjId::from(v.trim())))
        })
        .collect()
}

fn select_match(candidates: Vec<Morphism>, pins: &[(ObjId, ObjId)]) -> Option<Morphism> {
    candidates
        .into_iter()
        .find(|m| pins.iter().all(|(k, v)| m.objects.get(k) == Some(v)))
}

fn cmd_check_wf(model: &Path) -> Result<bool> {
    let g = parse_model(&read(model)?).with_context(|| format!("{}", model.display()))?;
    let violations = check_wellformed(&g)?;
    if violations.is_empty() {
        println!("well-formed");
        return Ok(true);
    }
    for v in &violations {
        let objs: Vec<&str> = v.morphism.objects.values().map(|o| o.as_str()).collect();
        println!("{}: {}", v.constraint, objs.join(", "));
    }
    Ok(false)
}

fn cmd_apply(
    solver: &ProcessSolver,
    rule: &Path,
    model: &Path,
    pins: &[String],
    out: Option<&Path>,
) -> Result<bool> {
    let r = load_rule(rule)?;
    let host = parse_model(&read(model)?).with_context(|| format!("{}", model.display()))?;
    let pins = parse_pins(pins)?;
    for (k, v) in &pins {
        if r.lhs.object(k).is_none() {
            bail!("rule `{}` has no LHS object `{k}`", r.name);
        }
        if host.object(v).is_none() {
            bail!("model has no object `{v}`");
        }
    }
    let Some(m) = select_match(find_rule_matches(&r, &host)?, &pins) else {
        eprintln!("no match of `{}` in the model", r.name);
        return Ok(false);
    };
    let res = apply(&r, &m, &host, solver)?;
    match &res.status {
        ApplicationStatus::Applied => {
            let text = serialize_model(res.graph.as_ref().expect("applied result has a graph"));
            match out {
                Some(path) => write_atomic(path, &text)?,
                None => print!("{text}"),
            }
            Ok(true)
        }
        ApplicationStatus::InvalidDangling(links) => {
            let ids: Vec<&str> = links.iter().map(|l| l.as_str()).collect();
            eprintln!("invalid application: dangling links {}", ids.join(", "));
            Ok(false)
        }
        ApplicationStatus::InvalidUnsat => {
            eprintln!("invalid application: the resulting formula is unsatisfiable");
            Ok(false)
        }
        ApplicationStatus::UnknownSat(r) => {
            eprintln!("invalid application: the solver could not decide the result ({r:?})");
            Ok(false)
        }
    }
}

fn cmd_admissible(solver: &ProcessSolver, rule: &Path) -> Result<bool> {
    let r = load_rule(rule)?;
    let report = check_admissibility(&r, solver);
    for c in &report.phi_app {
        println!("app: {c}");
    }
    for c in &report.phi_eff {
        println!("eff: {c}");
    }
    if let Some(q) = &report.query {
        println!("query: {q}");
    }
    let (word, ok) = match report.verdict {
        Admissibility::Admissible => ("admissible", true),
        Admissibility::Inadmissible => ("inadmissible", false),
        Admissibility::Unknown => ("unknown", false),
    };
    println!("{}: {word}", r.name);
    Ok(ok)
}

fn parse_pair(spec: &str, n: usize) -> Result<Option<(usize, usize)>> {
    if spec == "all" {
        return Ok(None);
    }
    let (a, b) = spec
        .split_once(',')
        .ok_or_else(|| anyhow!("--pairs expects `all` or `i,j`, got `{spec}`"))?;
    let idx = |s: &str| -> Result<usize> {
        let i: usize = s
            .trim()
            .parse()
            .with_context(|| format!("bad rule index `{s}`"))?;
        if i >= n {
            bail!("rule index {i} out of range (0..{n})");
        }
        Ok(i)
    };
    Ok(Some((idx(a)?, idx(b)?)))
}

fn cmd_analyze(
    solver: &ProcessSolver,
    paths: &[PathBuf],
    pairs: &str,
    opts: AnalysisOptions,
    trace: bool,
    out: Option<&Path>,
) -> Result<bool> {
    let rules = paths
        .iter()
        .map(|p| load_rule(p))
        .collect::<Result<Vec<_>>>()?;
    let cfg = solver.config();
    let report = match parse_pair(pairs, rules.len())? {
        None => {
            let matrix = analyze_ruleset(&rules, solver, opts)?;
            print!("{}", render_matrix(&matrix));
            ConflictReport::new(&matrix, cfg, opts.cpa_only, trace)
        }
        Some((i, j)) => {
            let p = analyze_pair(&rules[i], &rules[j], solver, opts)?;
            let names: Vec<String> = rules.iter().map(|r| r.name.clone()).collect();
            let report = ConflictReport::from_pairs(&names, &[p], cfg, opts.cpa_only, trace);
            let pr = &report.pairs[0];
            let word = match pr.verdict {
                Verdict::NonConflicting => "non-conflicting".to_owned(),
                Verdict::Conflicting => format!("conflicting ({})", pr.reasons.join(", ")),
            };
            println!("{} × {}: {word}", pr.first, pr.second);
            report
        }
    };
    if let Some(path) = out {
        write_atomic(path, &report.to_json())?;
    }
    Ok(report.totals.conflicting == 0)
}

fn cmd_config_check(solver: &ProcessSolver, model: &Path, assignment: &Path) -> Result<bool> {
    let g = parse_model(&read(model)?).with_context(|| format!("{}", model.display()))?;
    let a = parse_assignment(&read(assignment)?, &g)
        .with_context(|| format!("{}", assignment.display()))?;
    let valid = check_configuration(&g, &a, Some(solver))?;
    println!("{}", if valid { "valid" } else { "invalid" });
    Ok(valid)
}

fn run(cli: &Cli) -> Result<bool> {
    let solver = ProcessSolver::new(solver_config(cli));
    match &cli.command {
        Command::CheckWf { model } => cmd_check_wf(model),
        Command::Apply {
            rule,
            model,
            matches,
            out,
        } => cmd_apply(&solver, rule, model, matches, out.as_deref()),
        Command::Admissible { rule } => cmd_admissible(&solver, rule),
        Command::Analyze {
            rules,
            pairs,
            cpa_only,
            trace,
            out,
        } => cmd_analyze(
            &solver,
            rules,
            pairs,
            AnalysisOptions {
                cpa_only: *cpa_only,
            },
            *trace,
            out.as_deref(),
        ),
        Command::ConfigCheck { model, assignment } => cmd_config_check(&solver, model, assignment),
    }
}

fn main() -> ExitCode {
    env_logger::init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
