//! The `coexplore` command line tool.

use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use coexplore_core::context::FormalContext;
use coexplore_core::cxt::{self, ContextJson};
use coexplore_core::exploration::{run, ExplorationState, SimulationRun};
use coexplore_core::expert::{group_join, validate_expert, StandardInteraction};
use coexplore_core::implication::{parse_line, ImplicationJson};
use coexplore_core::oracle::{check_context, exhaustive_sweep_upto, OracleReport};
use coexplore_core::strategy::{refine, OrderSpec};
use coexplore_core::{
    synth, Collaboration, Error, Exec, ExpertKnowledge, IncompleteContext, StrategyConfig, StrategyKind, Theory,
};

pub mod compare;

pub const EXIT_VALIDATION: u8 = 1;
pub const EXIT_CAPACITY: u8 = 2;
pub const EXIT_INTERNAL: u8 = 3;

#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    pub fn validation(m: impl Into<String>) -> Self {
        CliError {
            code: EXIT_VALIDATION,
            message: m.into(),
        }
    }

    pub fn internal(m: impl Into<String>) -> Self {
        CliError {
            code: EXIT_INTERNAL,
            message: m.into(),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Capacity { .. } => EXIT_CAPACITY,
            Error::State(_) => EXIT_INTERNAL,
            _ => EXIT_VALIDATION,
        };
        CliError {
            code,
            message: e.to_string(),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::validation(e.to_string())
    }
}

pub type CliResult<T> = Result<T, CliError>;

#[derive(Parser, Debug)]
#[command(name = "coexplore", version, about = "Attribute exploration with a group of experts")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Run a simulated exploration and write its artifacts.
    Explore(ExploreArgs),
    /// Run several strategies over the same group and tabulate the outcome.
    Compare(compare::CompareArgs),
    /// Check the row-wise validity tests against all completions.
    Oracle(OracleArgs),
    /// Convert between CXT, JSON contexts and implication lists.
    Convert(ConvertArgs),
    /// Serve live sessions over HTTP.
    Serve(ServeArgs),
}

#[derive(Args, Debug, Clone)]
pub struct GroupArgs {
    /// Complete context the experts are checked against.
    #[arg(long)]
    pub universe: Option<PathBuf>,
    /// Expert document; repeat for each expert, in roster order.
    #[arg(long = "expert", required = true)]
    pub experts: Vec<PathBuf>,
}

#[derive(Args, Debug, Clone)]
pub struct StrategyArgs {
    #[arg(long, default_value = "iterative")]
    pub strategy: String,
    /// `fixed`, `shuffled`, or a comma-separated expert order.
    #[arg(long)]
    pub order: Option<String>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Comma-separated selection weights for random_selection.
    #[arg(long, value_delimiter = ',')]
    pub weights: Option<Vec<f64>>,
    /// Comma-separated attribute names, most significant first.
    #[arg(long, value_delimiter = ',')]
    pub lectic_order: Option<Vec<String>>,
}

#[derive(Args, Debug)]
pub struct ExploreArgs {
    #[command(flatten)]
    pub group: GroupArgs,
    #[command(flatten)]
    pub strategy: StrategyArgs,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct OracleArgs {
    /// Context file to check.
    #[arg(long, required_unless_present = "exhaustive")]
    pub context: Option<PathBuf>,
    /// Most unknown cells to expand.
    #[arg(long, default_value_t = coexplore_core::context::DEFAULT_COMPLETION_BOUND)]
    pub bound: usize,
    /// Check every context up to `G:M` objects and attributes instead.
    #[arg(long, conflicts_with = "context")]
    pub exhaustive: Option<String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Cxt,
    Json,
    Imp,
    ImpJson,
}

#[derive(Args, Debug)]
pub struct ConvertArgs {
    pub input: PathBuf,
    #[arg(long, value_enum)]
    pub to: Format,
    /// Input format; guessed from the extension when absent.
    #[arg(long, value_enum)]
    pub from: Option<Format>,
    /// Refuse unknown cells in CXT output.
    #[arg(long)]
    pub formal: bool,
    /// Context whose attribute order implication lists use.
    #[arg(long)]
    pub attributes: Option<PathBuf>,
    /// Output file; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct ServeArgs {
    #[arg(long, env = "COEXPLORE_ADDR", default_value = "127.0.0.1:8080")]
    pub addr: String,
    #[arg(long, env = "COEXPLORE_DATA", default_value = "sessions")]
    pub data: PathBuf,
    #[arg(long, env = "COEXPLORE_LOG", default_value = "info")]
    pub log_level: String,
}

pub fn run_cli(cli: Cli, out: &mut dyn Write) -> CliResult<()> {
    match cli.command {
        Command::Explore(a) => explore(&a, out),
        Command::Compare(a) => compare::compare(&a, out),
        Command::Oracle(a) => oracle(&a, out),
        Command::Convert(a) => convert(&a, out),
        Command::Serve(a) => serve(&a),
    }
}

fn read(path: &Path) -> CliResult<String> {
    std::fs::read_to_string(path).map_err(|e| CliError::validation(format!("{}: {e}", path.display())))
}

fn in_file(path: &Path, e: Error) -> CliError {
    let mut c = CliError::from(e);
    c.message = format!("{}: {}", path.display(), c.message);
    c
}

pub fn load_context(path: &Path) -> CliResult<IncompleteContext> {
    let text = read(path)?;
    if path.extension().is_some_and(|x| x == "json") {
        let j: ContextJson = serde_json::from_str(&text)
            .map_err(|e| CliError::validation(format!("{}: line {}, column {}: {e}", path.display(), e.line(), e.column())))?;
        j.to_context().map_err(|e| in_file(path, e))
    } else {
        cxt::parse(&text).map_err(|e| in_file(path, e))
    }
}

/// Expert group plus optional universe, validated.
pub struct Group {
    pub universe: Option<IncompleteContext>,
    pub experts: Vec<ExpertKnowledge>,
}

impl Group {
    pub fn attributes(&self) -> &[String] {
        self.experts[0].attributes()
    }
}

pub fn load_group(args: &GroupArgs) -> CliResult<Group> {
    let mut experts = Vec::new();
    for p in &args.experts {
        experts.push(ExpertKnowledge::load(p).map_err(|e| in_file(p, e))?);
    }
    let universe = match &args.universe {
        Some(p) => Some(load_context(p)?),
        None => None,
    };
    check_group(universe, experts)
}

pub fn check_group(universe: Option<IncompleteContext>, experts: Vec<ExpertKnowledge>) -> CliResult<Group> {
    let Some(first) = experts.first() else {
        return Err(CliError::validation("no experts given"));
    };
    let attrs = universe
        .as_ref()
        .map_or(first.attributes().to_vec(), |u| u.attributes().to_vec());
    let formal = match &universe {
        Some(u) => Some(FormalContext::try_from(u.clone()).map_err(|e| {
            CliError::validation(format!("universe must be complete: {e}"))
        })?),
        None => None,
    };
    let mut problems = Vec::new();
    for e in &experts {
        if e.attributes() != attrs.as_slice() {
            problems.push(format!("{}: attributes differ from the universe", e.name));
            continue;
        }
        let r = validate_expert(e, formal.as_ref())?;
        for v in &r.violations {
            problems.push(format!(
                "{}: {}",
                e.name,
                serde_json::to_string(v).expect("violations serialize")
            ));
        }
    }
    if !problems.is_empty() {
        return Err(CliError::validation(format!(
            "invalid experts:\n  {}",
            problems.join("\n  ")
        )));
    }
    Ok(Group { universe, experts })
}

pub fn strategy_config(a: &StrategyArgs) -> CliResult<StrategyConfig> {
    let mut c = StrategyConfig::new(StrategyKind::parse(&a.strategy)?);
    if let Some(o) = &a.order {
        let spec = match o.as_str() {
            "fixed" | "shuffled" | "per_question_shuffled" => OrderSpec::Named(o.clone()),
            list => OrderSpec::Explicit(list.split(',').map(|s| s.trim().to_string()).collect()),
        };
        c = c.with_order(spec);
    }
    if let Some(s) = a.seed {
        c = c.with_seed(s);
    }
    if let Some(w) = &a.weights {
        c = c.with_weights(w.clone());
    }
    Ok(c)
}

/// One simulated exploration with the group.
pub fn simulate(
    group: &Group,
    config: StrategyConfig,
    lectic_order: Option<&[String]>,
) -> CliResult<SimulationRun> {
    let experts: Vec<ExpertKnowledge> = if config.kind == StrategyKind::Single && group.experts.len() > 1 {
        vec![group_join(&group.experts)?]
    } else {
        group.experts.clone()
    };
    let roster = experts.iter().map(|e| e.name.clone()).collect();
    let mut collab = Collaboration::new(config, roster)?.with_knowledge(&experts);
    let mut state = ExplorationState::new(group.attributes().to_vec(), None, None)?;
    if let Some(o) = lectic_order {
        state.set_lectic_order(o)?;
    }
    let r = run(state, &mut collab, &experts, &StandardInteraction, Exec::Sequential)?;
    if let Some(u) = &group.universe {
        for imp in r.result.accepted.iter() {
            if !imp.certainly_valid_in(u) {
                return Err(CliError::internal(format!(
                    "accepted `{}` does not hold in the universe",
                    imp.to_text(u.attributes())
                )));
            }
        }
    }
    Ok(r)
}

/// Writes `bytes` to `path` through a temporary file and a rename.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> CliResult<()> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    std::fs::write(&tmp, bytes)?;
    std::fs::rename(&tmp, path)?;
    Ok(())
}

fn json_pretty<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}

/// The explore artifacts, by file name.
pub fn explore_artifacts(r: &SimulationRun) -> Vec<(&'static str, String)> {
    let result = &r.result;
    let attrs = result.attributes();
    let mut history = String::new();
    for h in result.history_json() {
        history.push_str(&serde_json::to_string(&h).expect("history serializes"));
        history.push('\n');
    }
    let fict: Vec<_> = result.fictitious.iter().map(|f| f.to_json(attrs)).collect();
    vec![
        ("accepted.imp", result.accepted.to_text()),
        ("result.cxt", cxt::write(&result.examples.clone().with_name("result"))),
        ("fictitious.json", json_pretty(&fict)),
        ("history.jsonl", history),
        ("ledger.json", json_pretty(&r.ledger)),
    ]
}

fn explore(a: &ExploreArgs, out: &mut dyn Write) -> CliResult<()> {
    let group = load_group(&a.group)?;
    let config = strategy_config(&a.strategy)?;
    let r = simulate(&group, config, a.strategy.lectic_order.as_deref())?;
    std::fs::create_dir_all(&a.out)?;
    for (name, body) in explore_artifacts(&r) {
        write_atomic(&a.out.join(name), body.as_bytes())?;
    }
    let res = &r.result;
    writeln!(
        out,
        "{} implications accepted, {} real and {} fictitious rows, {} questions, {} expert interactions",
        res.accepted.len(),
        res.real_counterexamples.object_count(),
        res.fictitious_counterexamples.object_count(),
        res.history.len(),
        r.ledger.total
    )?;
    write!(out, "{}", res.accepted.to_text())?;
    Ok(())
}

pub fn parse_shape(s: &str) -> CliResult<(usize, usize)> {
    let (g, m) = s
        .split_once(':')
        .ok_or_else(|| CliError::validation(format!("expected G:M, got `{s}`")))?;
    let p = |x: &str| {
        x.trim()
            .parse::<usize>()
            .map_err(|_| CliError::validation(format!("expected a number, got `{x}`")))
    };
    Ok((p(g)?, p(m)?))
}

fn print_oracle(out: &mut dyn Write, r: &OracleReport) -> CliResult<()> {
    writeln!(out, "{} contexts, {} checks, {} mismatches", r.contexts, r.checks, r.mismatches.len())?;
    for m in &r.mismatches {
        writeln!(out, "{}", serde_json::to_string(m).expect("mismatch serializes"))?;
    }
    if r.mismatches.is_empty() {
        Ok(())
    } else {
        Err(CliError::internal("validity tests disagree with the completions"))
    }
}

fn oracle(a: &OracleArgs, out: &mut dyn Write) -> CliResult<()> {
    if let Some(shape) = &a.exhaustive {
        let (g, m) = parse_shape(shape)?;
        if g * m > 12 {
            return Err(CliError {
                code: EXIT_CAPACITY,
                message: format!("{g}x{m} has too many contexts to enumerate"),
            });
        }
        return print_oracle(out, &exhaustive_sweep_upto(g, m, Exec::default()));
    }
    let path = a.context.as_ref().expect("clap requires one of the two");
    let ctx = load_context(path)?;
    let r = check_context(&ctx, a.bound)?;
    print_oracle(out, &r)
}

fn guess_format(p: &Path) -> CliResult<Format> {
    match p.extension().and_then(|x| x.to_str()) {
        Some("cxt") => Ok(Format::Cxt),
        Some("json") => Ok(Format::Json),
        Some("imp") | Some("txt") => Ok(Format::Imp),
        _ => Err(CliError::validation(format!(
            "cannot tell the format of {}; pass --from",
            p.display()
        ))),
    }
}

/// Attribute names in order of first appearance.
fn names_in(imps: &[ImplicationJson]) -> Vec<String> {
    let mut v: Vec<String> = Vec::new();
    for i in imps {
        for n in i.premise.iter().chain(&i.conclusion) {
            if !v.contains(n) {
                v.push(n.clone());
            }
        }
    }
    v
}

/// Attribute names mentioned in implication text, in order of appearance.
fn scan_text(text: &str) -> CliResult<Vec<String>> {
    let mut attrs: Vec<String> = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let t = line.trim();
        if t.is_empty() || t.starts_with('#') {
            continue;
        }
        let (p, c) = parse_line(line, i + 1)?;
        for n in p.into_iter().chain(c) {
            if !attrs.contains(&n) {
                attrs.push(n);
            }
        }
    }
    Ok(attrs)
}

fn convert(a: &ConvertArgs, out: &mut dyn Write) -> CliResult<()> {
    let from = match a.from {
        Some(f) => f,
        None => guess_format(&a.input)?,
    };
    let text = read(&a.input)?;
    let order = match &a.attributes {
        Some(p) => Some(load_context(p)?.attributes().to_vec()),
        None => None,
    };
    let rendered = match (from, a.to) {
        (Format::Cxt | Format::Json, Format::Cxt | Format::Json) => {
            let ctx = if from == Format::Cxt {
                cxt::parse(&text).map_err(|e| in_file(&a.input, e))?
            } else {
                load_context_json(&a.input, &text)?
            };
            match a.to {
                Format::Cxt if a.formal => cxt::write_formal(&ctx)?,
                Format::Cxt => cxt::write(&ctx),
                _ => json_pretty(&ContextJson::from(&ctx)),
            }
        }
        (Format::Imp | Format::ImpJson, Format::Imp | Format::ImpJson) => {
            let theory = if from == Format::Imp {
                let attrs = match &order {
                    Some(o) => o.clone(),
                    None => scan_text(&text)?,
                };
                Theory::parse_text(attrs, &text).map_err(|e| in_file(&a.input, e))?
            } else {
                let imps: Vec<ImplicationJson> = serde_json::from_str(&text).map_err(|e| {
                    CliError::validation(format!("{}: line {}, column {}: {e}", a.input.display(), e.line(), e.column()))
                })?;
                let attrs = order.clone().unwrap_or_else(|| names_in(&imps));
                Theory::from_json(attrs, &imps)?
            };
            match a.to {
                Format::Imp => theory.to_text(),
                _ => json_pretty(&theory.to_json()),
            }
        }
        _ => {
            return Err(CliError::validation(
                "contexts and implication lists do not convert into each other",
            ))
        }
    };
    match &a.out {
        Some(p) => write_atomic(p, rendered.as_bytes()),
        None => Ok(out.write_all(rendered.as_bytes())?),
    }
}

fn load_context_json(path: &Path, text: &str) -> CliResult<IncompleteContext> {
    let j: ContextJson = serde_json::from_str(text)
        .map_err(|e| CliError::validation(format!("{}: line {}, column {}: {e}", path.display(), e.line(), e.column())))?;
    j.to_context().map_err(|e| in_file(path, e))
}

fn serve(a: &ServeArgs) -> CliResult<()> {
    let filter = tracing_subscriber::EnvFilter::try_new(&a.log_level)
        .map_err(|e| CliError::validation(format!("bad log level: {e}")))?;
    tracing_subscriber::fmt().with_env_filter(filter).init();
    let rt = tokio::runtime::Runtime::new()?;
    rt.block_on(coexplore_service::serve(&a.addr, &a.data))
        .map_err(|e| CliError::internal(e.to_string()))
}

/// The chain instance as a group, for compare and the acceptance run.
pub fn chain_group(m: usize, n: usize) -> CliResult<(Group, coexplore_core::Implication)> {
    let (u, experts, target) = synth::chain(m, n)?;
    Ok((
        Group {
            universe: Some(u),
            experts,
        },
        target,
    ))
}

/// Interactions needed to settle `target` with the group under `config`.
pub fn target_asks(group: &Group, target: coexplore_core::Implication, config: StrategyConfig) -> CliResult<u64> {
    let r = refine(target, config, &group.experts, &StandardInteraction, Exec::Sequential)?;
    Ok(r.ledger.total)
}
