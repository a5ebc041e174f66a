//! Command-line front end. `run` is the whole program minus process exit, so
//! tests can drive it directly.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use qmgraph::autos::{aut0_generators, enum_labelled_graph_autos, AutError, DEFAULT_AUT_BOUND};
use qmgraph::codes::{CodeError, HomogParams, Partition};
use qmgraph::decision::{self, DecisionError, DirectFactor, Status, Verdict};
use qmgraph::graph::{ClassType, GraphError};
use qmgraph::invariant::{Evaluator, QmError, QmKind, QmValue};
use qmgraph::rational::{fmt_rational, parse_rational};
use qmgraph::scl::{self, SclError};
use qmgraph::word::WordError;
use qmgraph::{LabeledGraph, NormalWord, Side, VertexSet};
use serde_json::json;
use thiserror::Error;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_PARSE: i32 = 2;
pub const EXIT_MATH: i32 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Parse(String),
    #[error("{0}")]
    Math(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Parse(_) => EXIT_PARSE,
            CliError::Math(_) => EXIT_MATH,
        }
    }
}

impl From<GraphError> for CliError {
    fn from(e: GraphError) -> Self {
        match e {
            GraphError::NotExpanded => CliError::Math(e.to_string()),
            _ => CliError::Parse(e.to_string()),
        }
    }
}

impl From<WordError> for CliError {
    fn from(e: WordError) -> Self {
        match e {
            WordError::Syntax(_) | WordError::UnknownVertex(_) => CliError::Parse(e.to_string()),
            _ => CliError::Math(e.to_string()),
        }
    }
}

impl From<CodeError> for CliError {
    fn from(e: CodeError) -> Self {
        match e {
            CodeError::Word(w) => w.into(),
            CodeError::BadTuple | CodeError::BadHomogParams => CliError::Usage(e.to_string()),
            _ => CliError::Math(e.to_string()),
        }
    }
}

impl From<AutError> for CliError {
    fn from(e: AutError) -> Self {
        CliError::Math(e.to_string())
    }
}

impl From<QmError> for CliError {
    fn from(e: QmError) -> Self {
        match e {
            QmError::Word(w) => w.into(),
            QmError::Code(c) => c.into(),
            _ => CliError::Math(e.to_string()),
        }
    }
}

impl From<DecisionError> for CliError {
    fn from(e: DecisionError) -> Self {
        match e {
            DecisionError::Graph(g) => g.into(),
            _ => CliError::Math(e.to_string()),
        }
    }
}

impl From<SclError> for CliError {
    fn from(e: SclError) -> Self {
        match e {
            SclError::Graph(g) => g.into(),
            SclError::Qm(q) => q.into(),
            _ => CliError::Math(e.to_string()),
        }
    }
}

#[derive(Parser, Debug)]
#[command(name = "qmgraph", version, about = "Automorphism-invariant quasimorphisms on graph products of cyclic groups")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Print the expanded graph (finite labels split into primary parts).
    Expand { file: PathBuf },
    /// Print the ~τ classes of the expanded graph and their order.
    Classes { file: PathBuf },
    /// List the lower cones of the expanded graph.
    Cones {
        file: PathBuf,
        /// Stop after this many cones.
        #[arg(long, default_value_t = 1000)]
        limit: usize,
    },
    /// Decide whether unbounded invariant quasimorphisms exist.
    Decide {
        file: PathBuf,
        /// Use the right-angled Artin procedure (all labels must be Z).
        #[arg(long)]
        raag: bool,
        /// Print the branches taken.
        #[arg(long)]
        trace: bool,
        #[arg(long)]
        json: bool,
    },
    /// Print the labelled-graph automorphisms of the expanded graph.
    Autos {
        file: PathBuf,
        /// Refuse graphs with more automorphisms than this.
        #[arg(long, default_value_t = DEFAULT_AUT_BOUND)]
        bound: usize,
        /// Also print the generators of the finite-index subgroup.
        #[arg(long)]
        generators: bool,
    },
    /// Evaluate a quasimorphism on a word.
    Eval {
        file: PathBuf,
        #[command(flatten)]
        qm: QmArgs,
        /// Sum over all labelled-graph automorphisms.
        #[arg(long)]
        avg: bool,
        #[arg(long)]
        word: String,
        #[arg(long)]
        json: bool,
    },
    /// Homogenise the base quasimorphism on a word, without averaging.
    Homog {
        file: PathBuf,
        #[command(flatten)]
        qm: QmArgs,
        #[arg(long)]
        word: String,
    },
    /// Print the witness quasimorphism and word of a constructive verdict.
    Witness {
        file: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Estimate the defect of a quasimorphism from below.
    Defect {
        file: PathBuf,
        #[command(flatten)]
        qm: QmArgs,
        #[arg(long)]
        avg: bool,
        #[command(flatten)]
        sampling: SamplingArgs,
        /// Use every pair from the ball of radius --max-len instead of sampling.
        #[arg(long)]
        exhaustive: bool,
        /// Largest |exponent| of infinite cyclic letters in the exhaustive ball.
        #[arg(long, default_value_t = 1)]
        exp_bound: u64,
    },
    /// Lower bound for invariant stable commutator length. Without
    /// quasimorphism flags the witness of `decide` is used.
    Scl {
        file: PathBuf,
        #[arg(long)]
        word: String,
        /// Proven upper bound for the defect; without it the bound is heuristic.
        #[arg(long)]
        defect_bound: Option<String>,
        #[command(flatten)]
        sampling: SamplingArgs,
        #[command(flatten)]
        qm: QmArgs,
        #[arg(long)]
        json: bool,
    },
    /// Recompute the verdict table of a corpus directory and compare it with
    /// its expected.tsv.
    Examples {
        #[arg(long, default_value = "corpus")]
        dir: PathBuf,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum KindArg {
    Code,
    Wz,
    Sum,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum SideArg {
    #[value(name = "A", alias = "a")]
    A,
    #[value(name = "B", alias = "b")]
    B,
}

#[derive(Args, Debug)]
struct QmArgs {
    /// Lower cone, comma-separated ids [default: all vertices].
    #[arg(long)]
    cone: Option<String>,
    /// Side A of the partition, comma-separated ids.
    #[arg(long = "partA")]
    part_a: Option<String>,
    /// Side B of the partition, comma-separated ids.
    #[arg(long = "partB")]
    part_b: Option<String>,
    #[arg(long, value_enum, default_value_t = KindArg::Code)]
    kind: KindArg,
    /// Side whose code is used by --kind code.
    #[arg(long, value_enum, default_value_t = SideArg::A)]
    side: SideArg,
    /// Counted tuple, comma-separated positive integers.
    #[arg(long, default_value = "1,2,3")]
    z: String,
    #[arg(long, env = "QMGRAPH_MAX_N", default_value_t = 64)]
    max_n: usize,
    #[arg(long, default_value_t = 8)]
    max_period: usize,
}

#[derive(Args, Debug)]
struct SamplingArgs {
    #[arg(long, default_value_t = 200)]
    samples: usize,
    /// Longest sampled word; also the ball radius for --exhaustive.
    #[arg(long, default_value_t = 24)]
    max_len: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

/// Exit code and captured output of one invocation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

pub fn run<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            return if code == EXIT_OK {
                Outcome { code, stdout: text, stderr: String::new() }
            } else {
                Outcome { code, stdout: String::new(), stderr: text }
            };
        }
    };
    let mut out = String::new();
    match dispatch(cli.command, &mut out) {
        Ok(code) => Outcome { code, stdout: out, stderr: String::new() },
        Err(e) => Outcome { code: e.exit_code(), stdout: out, stderr: format!("error: {e}\n") },
    }
}

fn read_graph(path: &Path) -> Result<LabeledGraph, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Parse(format!("cannot read {}: {e}", path.display())))?;
    Ok(LabeledGraph::parse(&text)?)
}

fn read_expanded(path: &Path) -> Result<Arc<LabeledGraph>, CliError> {
    Ok(Arc::new(read_graph(path)?.expand()?))
}

fn id_list(s: &str) -> Vec<&str> {
    s.split(',').map(str::trim).filter(|t| !t.is_empty()).collect()
}

fn parse_z(s: &str) -> Result<Vec<u64>, CliError> {
    let z: Vec<u64> = id_list(s)
        .into_iter()
        .map(|t| t.parse::<u64>().map_err(|_| CliError::Usage(format!("bad tuple entry `{t}`"))))
        .collect::<Result<_, _>>()?;
    if z.is_empty() || z.contains(&0) {
        return Err(CliError::Usage("--z needs positive comma-separated integers".into()));
    }
    Ok(z)
}

fn fmt_set(g: &LabeledGraph, s: VertexSet) -> String {
    format!("{{{}}}", g.names(s).join(","))
}

fn has_qm_flags(qm: &QmArgs) -> bool {
    qm.part_a.is_some() || qm.part_b.is_some() || qm.cone.is_some()
}

fn build_evaluator(g: &Arc<LabeledGraph>, qm: &QmArgs, avg: bool) -> Result<Evaluator, CliError> {
    let z = parse_z(&qm.z)?;
    let (Some(a), Some(b)) = (&qm.part_a, &qm.part_b) else {
        return Err(CliError::Usage("--partA and --partB are required".into()));
    };
    let cone = match &qm.cone {
        Some(c) => g.set_of(&id_list(c))?,
        None => g.all(),
    };
    let part = Partition::new(g, g.set_of(&id_list(a))?, g.set_of(&id_list(b))?)?;
    let kind = match qm.kind {
        KindArg::Code => QmKind::Code { side: if matches!(qm.side, SideArg::A) { Side::A } else { Side::B }, z },
        KindArg::Wz => QmKind::WeightedZ { z },
        KindArg::Sum => QmKind::SumBothSides { z },
    };
    let params = HomogParams { max_n: qm.max_n, max_period: qm.max_period, defect_estimate: None };
    if params.max_period < 1 || params.max_n < 2 * params.max_period {
        return Err(CliError::Usage("--max-n must be at least 2 * --max-period and --max-period at least 1".into()));
    }
    let e = Evaluator::build(g.clone(), cone, part, kind, params)?;
    Ok(if avg { e.averaged()? } else { e })
}

fn value_line(v: &QmValue) -> String {
    format!("value={} exact={} err<={}", fmt_rational(&v.value), v.exact, fmt_rational(&v.error_bound))
}

fn value_json(v: &QmValue) -> serde_json::Value {
    json!({
        "value": fmt_rational(&v.value),
        "exact": v.exact,
        "error_bound": fmt_rational(&v.error_bound),
    })
}

fn evaluator_json(e: &Evaluator) -> serde_json::Value {
    let g = e.graph();
    let p = e.partition();
    json!({
        "cone": g.names(e.cone()),
        "partA": g.names(p.a),
        "partB": g.names(p.b),
        "kind": e.kind().to_string(),
        "averaged": e.is_averaged(),
    })
}

fn evaluator_line(e: &Evaluator) -> String {
    let g = e.graph();
    let p = e.partition();
    format!(
        "qm={} cone={} partA={} partB={} averaged={}",
        e.kind(),
        fmt_set(g, e.cone()),
        fmt_set(g, p.a),
        fmt_set(g, p.b),
        e.is_averaged()
    )
}

fn factor_string(g: &LabeledGraph, f: &DirectFactor) -> String {
    match f {
        DirectFactor::Abelian(s) => format!("abelian{}", fmt_set(g, *s)),
        DirectFactor::FreeZ2(s) => format!("free_z2{}", fmt_set(g, *s)),
    }
}

fn run_decide(path: &Path, raag: bool) -> Result<Verdict, CliError> {
    let g = read_graph(path)?;
    Ok(if raag { decision::decide_raag(&g)? } else { decision::decide(&g)? })
}

fn dispatch(cmd: Command, out: &mut String) -> Result<i32, CliError> {
    match cmd {
        Command::Expand { file } => {
            out.push_str(&read_expanded(&file)?.to_text());
        }
        Command::Classes { file } => {
            let g = read_expanded(&file)?;
            let poset = g.tau_classes()?;
            for (i, c) in poset.classes.iter().enumerate() {
                let ty = match c.class_type {
                    ClassType::FiniteAbelian => "finite-abelian".to_string(),
                    ClassType::FreeAbelian(k) => format!("free-abelian({k})"),
                    ClassType::Free(k) => format!("free({k})"),
                };
                let above: Vec<String> = (0..poset.classes.len())
                    .filter(|&j| j != i && poset.leq[i][j])
                    .map(|j| j.to_string())
                    .collect();
                writeln!(
                    out,
                    "class {i} {} type={ty} minimal={} below=[{}]",
                    fmt_set(&g, c.members),
                    poset.is_minimal(i),
                    above.join(",")
                )
                .unwrap();
            }
        }
        Command::Cones { file, limit } => {
            let g = read_expanded(&file)?;
            for c in decision::lower_cones(&g, limit)? {
                writeln!(out, "{}", fmt_set(&g, c)).unwrap();
            }
        }
        Command::Decide { file, raag, trace, json } => {
            let v = run_decide(&file, raag)?;
            let g = &v.graph;
            if json {
                let witness = v.witness.as_ref().map(|w| {
                    json!({
                        "word": w.word.to_string(),
                        "route": w.route,
                        "evaluator": evaluator_json(&w.evaluator),
                        "value": value_json(&w.value),
                    })
                });
                let doc = json!({
                    "status": v.status.to_string(),
                    "expanded_graph": g.to_text(),
                    "decomposition": v.decomposition.iter().map(|f| factor_string(g, f)).collect::<Vec<_>>(),
                    "witness": witness,
                    "trace": v.trace,
                });
                writeln!(out, "{}", serde_json::to_string_pretty(&doc).unwrap()).unwrap();
            } else {
                writeln!(out, "status={}", v.status).unwrap();
                if let Some(w) = &v.witness {
                    writeln!(out, "witness={} {}", w.word, value_line(&w.value)).unwrap();
                    writeln!(out, "{}", evaluator_line(&w.evaluator)).unwrap();
                }
                if trace {
                    for t in &v.trace {
                        writeln!(out, "trace: {t}").unwrap();
                    }
                }
            }
        }
        Command::Autos { file, bound, generators } => {
            let g = read_expanded(&file)?;
            for perm in enum_labelled_graph_autos(&g, bound)? {
                let pairs: Vec<String> =
                    perm.iter().enumerate().map(|(i, &t)| format!("{}:{}", g.id(i), g.id(t))).collect();
                writeln!(out, "{}", pairs.join(" ")).unwrap();
            }
            if generators {
                for gen in aut0_generators(&g)? {
                    writeln!(out, "gen {}", gen.describe(&g)).unwrap();
                }
            }
        }
        Command::Eval { file, qm, avg, word, json } => {
            let g = read_expanded(&file)?;
            let e = build_evaluator(&g, &qm, avg)?;
            let x = NormalWord::parse(g.clone(), &word)?;
            let v = e.evaluate(&x)?;
            if json {
                let mut doc = value_json(&v);
                doc["word"] = json!(x.to_string());
                doc["evaluator"] = evaluator_json(&e);
                writeln!(out, "{}", serde_json::to_string_pretty(&doc).unwrap()).unwrap();
            } else {
                writeln!(out, "{}", value_line(&v)).unwrap();
            }
        }
        Command::Homog { file, qm, word } => {
            let g = read_expanded(&file)?;
            let e = build_evaluator(&g, &qm, false)?;
            let x = NormalWord::parse(g.clone(), &word)?;
            writeln!(out, "{}", value_line(&e.term(&x)?)).unwrap();
        }
        Command::Witness { file, json } => {
            let v = run_decide(&file, false)?;
            let Some(w) = &v.witness else {
                return Err(CliError::Math(format!("no constructive witness (status={})", v.status)));
            };
            if json {
                let doc = json!({
                    "word": w.word.to_string(),
                    "route": w.route,
                    "evaluator": evaluator_json(&w.evaluator),
                    "value": value_json(&w.value),
                });
                writeln!(out, "{}", serde_json::to_string_pretty(&doc).unwrap()).unwrap();
            } else {
                writeln!(out, "word={}", w.word).unwrap();
                writeln!(out, "{}", value_line(&w.value)).unwrap();
                writeln!(out, "{}", evaluator_line(&w.evaluator)).unwrap();
                writeln!(out, "route={}", w.route).unwrap();
            }
        }
        Command::Defect { file, qm, avg, sampling, exhaustive, exp_bound } => {
            let g = read_expanded(&file)?;
            let e = build_evaluator(&g, &qm, avg)?;
            let d = if exhaustive {
                scl::exhaustive_defect(&e, sampling.max_len, exp_bound)?
            } else {
                scl::estimate_defect(&e, sampling.samples, sampling.max_len, sampling.seed)?
            };
            writeln!(
                out,
                "defect>={} samples={} skipped={}{}",
                fmt_rational(&d.empirical_max),
                d.samples,
                d.skipped,
                if d.is_vacuous() { " vacuous" } else { "" }
            )
            .unwrap();
        }
        Command::Scl { file, word, defect_bound, sampling, qm, json } => {
            let user_bound = match &defect_bound {
                Some(s) => Some(parse_rational(s).ok_or_else(|| CliError::Usage(format!("bad rational `{s}`")))?),
                None => None,
            };
            let raw = read_graph(&file)?;
            let condition = scl::commutator_conditions(&raw)?;
            let g = Arc::new(raw.expand()?);
            let e = if has_qm_flags(&qm) {
                build_evaluator(&g, &qm, true)?
            } else {
                let v = decision::decide(&raw)?;
                match v.witness {
                    Some(w) => w.evaluator,
                    None => {
                        return Err(CliError::Math(format!(
                            "no constructive quasimorphism (status={}); pass --partA/--partB",
                            v.status
                        )))
                    }
                }
            };
            let x = NormalWord::parse(g.clone(), &word)?;
            let mut d = scl::estimate_defect(&e, sampling.samples, sampling.max_len, sampling.seed)?;
            if let Some(b) = user_bound {
                d = d.with_user_bound(b)?;
            }
            let bound = scl::scl_aut_lower_bound(&e, &x, &d)?;
            if json {
                let doc = json!({
                    "scl_aut_lb": fmt_rational(&bound.value),
                    "mode": bound.mode.to_string(),
                    "defect_empirical": fmt_rational(&d.empirical_max),
                    "defect_bound": d.user_bound.as_ref().map(fmt_rational),
                    "samples": d.samples,
                    "skipped": d.skipped,
                    "commutator_subgroup": condition.to_string(),
                    "evaluator": evaluator_json(&e),
                });
                writeln!(out, "{}", serde_json::to_string_pretty(&doc).unwrap()).unwrap();
            } else {
                writeln!(out, "scl_aut_lb={} mode={}", fmt_rational(&bound.value), bound.mode).unwrap();
                writeln!(
                    out,
                    "defect_empirical={} samples={} skipped={} commutator_subgroup={}",
                    fmt_rational(&d.empirical_max),
                    d.samples,
                    d.skipped,
                    condition
                )
                .unwrap();
            }
        }
        Command::Examples { dir } => return run_examples(&dir, out),
    }
    Ok(EXIT_OK)
}

/// One row of the regenerated verdict table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExampleRow {
    pub file: String,
    pub expected: Option<Status>,
    pub got: Result<Status, String>,
}

impl ExampleRow {
    pub fn matches(&self) -> bool {
        matches!((&self.expected, &self.got), (Some(e), Ok(g)) if e == g)
    }
}

fn read_expected(dir: &Path) -> Result<Vec<(String, Status)>, CliError> {
    let path = dir.join("expected.tsv");
    let text = std::fs::read_to_string(&path)
        .map_err(|e| CliError::Parse(format!("cannot read {}: {e}", path.display())))?;
    let mut rows = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (file, status) = line
            .split_once('\t')
            .ok_or_else(|| CliError::Parse(format!("expected.tsv line {}: need `file<TAB>status`", i + 1)))?;
        let status = status
            .trim()
            .parse()
            .map_err(|e| CliError::Parse(format!("expected.tsv line {}: {e}", i + 1)))?;
        rows.push((file.trim().to_string(), status));
    }
    Ok(rows)
}

/// Decides every `.graph` file in `dir` and pairs it with its expected status.
pub fn example_rows(dir: &Path) -> Result<Vec<ExampleRow>, CliError> {
    let entries = std::fs::read_dir(dir)
        .map_err(|e| CliError::Parse(format!("cannot read {}: {e}", dir.display())))?;
    let mut files: Vec<String> = entries
        .filter_map(|e| e.ok())
        .map(|e| e.file_name().to_string_lossy().into_owned())
        .filter(|n| n.ends_with(".graph"))
        .collect();
    if files.is_empty() {
        return Err(CliError::Parse(format!("no .graph files in {}", dir.display())));
    }
    files.sort();
    let expected = read_expected(dir)?;
    let mut rows: Vec<ExampleRow> = files
        .iter()
        .map(|f| ExampleRow {
            file: f.clone(),
            expected: expected.iter().find(|(n, _)| n == f).map(|(_, s)| *s),
            got: run_decide(&dir.join(f), false).map(|v| v.status).map_err(|e| e.to_string()),
        })
        .collect();
    for (name, status) in &expected {
        if !files.contains(name) {
            rows.push(ExampleRow { file: name.clone(), expected: Some(*status), got: Err("missing file".into()) });
        }
    }
    Ok(rows)
}

fn run_examples(dir: &Path, out: &mut String) -> Result<i32, CliError> {
    let rows = example_rows(dir)?;
    let mut bad = 0;
    for r in &rows {
        let expected = r.expected.map(|s| s.to_string()).unwrap_or_else(|| "(none)".into());
        let got = match &r.got {
            Ok(s) => s.to_string(),
            Err(e) => format!("error: {e}"),
        };
        let mark = if r.matches() { "ok" } else { "MISMATCH" };
        if !r.matches() {
            bad += 1;
        }
        writeln!(out, "{}\texpected={expected}\tgot={got}\t{mark}", r.file).unwrap();
    }
    writeln!(out, "{} of {} match", rows.len() - bad, rows.len()).unwrap();
    Ok(if bad == 0 { EXIT_OK } else { EXIT_MATH })
}

/// Shorthand used by tests: runs with the program name prepended.
pub fn run_args(args: &[&str]) -> Outcome {
    run(std::iter::once("qmgraph").chain(args.iter().copied()))
}

