use std::io::Write;
use std::path::PathBuf;

use clap::Args;
use serde::Serialize;

use coexplore_core::expert::group_join;
use coexplore_core::{Exec, Implication, StrategyConfig, StrategyKind, Theory};

use crate::{
    chain_group, check_group, parse_shape, simulate, strategy_config, target_asks, write_atomic,
    CliError, CliResult, Group, GroupArgs, StrategyArgs,
};

#[derive(Args, Debug)]
pub struct CompareArgs {
    #[arg(long)]
    pub universe: Option<PathBuf>,
    #[arg(long = "expert")]
    pub experts: Vec<PathBuf>,
    /// Use the synthetic chain with `M:N` experts and steps instead.
    #[arg(long, conflicts_with_all = ["universe", "experts"])]
    pub chain: Option<String>,
    /// Comma-separated strategy names; all of them by default.
    #[arg(long, value_delimiter = ',')]
    pub strategies: Option<Vec<String>>,
    #[arg(long, value_delimiter = ',', default_value = "0")]
    pub seeds: Vec<u64>,
    /// Expert order for iterative: `fixed`, `shuffled` or a name list.
    #[arg(long)]
    pub order: Option<String>,
    /// Also count the asks needed to settle this implication, `p, q -> r`.
    #[arg(long)]
    pub target: Option<String>,
    /// Write the table as CSV here as well.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Row {
    pub strategy: String,
    pub seed: u64,
    pub accepted: usize,
    /// Share of the join-of-all-knowledge basis the accepted theory entails.
    pub coverage: f64,
    pub real_rows: usize,
    pub fictitious_rows: usize,
    pub questions: usize,
    pub asks: u64,
    pub max_depth: u64,
    pub target_asks: Option<u64>,
}

fn coverage(theory: &Theory, max: &Theory) -> f64 {
    if max.is_empty() {
        return 1.0;
    }
    let hit = max.iter().filter(|i| theory.entails(i)).count();
    hit as f64 / max.len() as f64
}

fn parse_target(group: &Group, text: &str) -> CliResult<Implication> {
    let t = Theory::parse_text(group.attributes().to_vec(), text)?;
    match t.implications() {
        [one] => Ok(*one),
        _ => Err(CliError::validation("--target needs exactly one non-trivial implication")),
    }
}

/// Runs every strategy and seed over `group`.
pub fn rows(
    group: &Group,
    kinds: &[StrategyKind],
    seeds: &[u64],
    order: Option<&str>,
    target: Option<Implication>,
    exec: Exec,
) -> CliResult<Vec<Row>> {
    let max = simulate(group, StrategyConfig::new(StrategyKind::Single), None)?;
    let cells: Vec<(StrategyKind, u64)> = kinds
        .iter()
        .flat_map(|k| seeds.iter().map(move |s| (*k, *s)))
        .collect();
    let results = exec.map(&cells, |&(kind, seed)| -> CliResult<Row> {
        let cfg = strategy_config(&StrategyArgs {
            strategy: kind.as_str().to_string(),
            order: if kind == StrategyKind::Iterative {
                order.map(str::to_string)
            } else {
                None
            },
            seed: Some(seed),
            weights: None,
            lectic_order: None,
        })?;
        let r = simulate(group, cfg.clone(), None)?;
        let t = match target {
            Some(t) => {
                let g = if kind == StrategyKind::Single && group.experts.len() > 1 {
                    Group {
                        universe: None,
                        experts: vec![group_join(&group.experts)?],
                    }
                } else {
                    Group {
                        universe: None,
                        experts: group.experts.clone(),
                    }
                };
                Some(target_asks(&g, t, cfg)?)
            }
            None => None,
        };
        let res = &r.result;
        Ok(Row {
            strategy: kind.as_str().to_string(),
            seed,
            accepted: res.accepted.len(),
            coverage: coverage(&res.accepted, &max.result.accepted),
            real_rows: res.real_counterexamples.object_count(),
            fictitious_rows: res.fictitious_counterexamples.object_count(),
            questions: res.history.len(),
            asks: r.ledger.total,
            max_depth: r.ledger.max_depth(),
            target_asks: t,
        })
    });
    results.into_iter().collect()
}

const HEADER: [&str; 10] = [
    "strategy",
    "seed",
    "accepted",
    "coverage",
    "real",
    "fictitious",
    "questions",
    "asks",
    "max_depth",
    "target_asks",
];

fn fields(r: &Row) -> [String; 10] {
    [
        r.strategy.clone(),
        r.seed.to_string(),
        r.accepted.to_string(),
        format!("{:.3}", r.coverage),
        r.real_rows.to_string(),
        r.fictitious_rows.to_string(),
        r.questions.to_string(),
        r.asks.to_string(),
        r.max_depth.to_string(),
        r.target_asks.map_or("-".into(), |t| t.to_string()),
    ]
}

pub fn table(rows: &[Row]) -> String {
    let body: Vec<[String; 10]> = rows.iter().map(fields).collect();
    let mut width = HEADER.map(str::len);
    for f in &body {
        for (w, s) in width.iter_mut().zip(f) {
            *w = (*w).max(s.chars().count());
        }
    }
    let line = |cols: &[String]| {
        let mut s = String::new();
        for (i, c) in cols.iter().enumerate() {
            if i == 0 {
                s.push_str(&format!("{:<w$}", c, w = width[i]));
            } else {
                s.push_str(&format!("  {:>w$}", c, w = width[i]));
            }
        }
        s.push('\n');
        s
    };
    let mut out = line(&HEADER.map(String::from));
    for f in &body {
        out.push_str(&line(f));
    }
    out
}

pub fn csv_text(rows: &[Row]) -> CliResult<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(HEADER).map_err(|e| CliError::internal(e.to_string()))?;
    for r in rows {
        let mut f = fields(r);
        if r.target_asks.is_none() {
            f[9].clear();
        }
        w.write_record(&f).map_err(|e| CliError::internal(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::internal(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv of utf-8 fields"))
}

pub fn compare(a: &CompareArgs, out: &mut dyn Write) -> CliResult<()> {
    let (group, chain_target) = match &a.chain {
        Some(shape) => {
            let (m, n) = parse_shape(shape)?;
            if m == 0 || n == 0 {
                return Err(CliError::validation("the chain needs at least one expert and one step"));
            }
            let (g, t) = chain_group(m, n)?;
            (check_group(g.universe, g.experts)?, Some(t))
        }
        None => {
            if a.experts.is_empty() {
                return Err(CliError::validation("pass --expert files or --chain M:N"));
            }
            let g = crate::load_group(&GroupArgs {
                universe: a.universe.clone(),
                experts: a.experts.clone(),
            })?;
            (g, None)
        }
    };
    let kinds = match &a.strategies {
        Some(names) => names
            .iter()
            .map(|n| StrategyKind::parse(n.trim()))
            .collect::<Result<Vec<_>, _>>()?,
        None => StrategyKind::ALL.to_vec(),
    };
    let target = match (&a.target, chain_target) {
        (Some(t), _) => Some(parse_target(&group, t)?),
        (None, t) => t,
    };
    let rows = rows(&group, &kinds, &a.seeds, a.order.as_deref(), target, Exec::default())?;
    out.write_all(table(&rows).as_bytes())?;
    if let Some(p) = &a.out {
        write_atomic(p, csv_text(&rows)?.as_bytes())?;
    }
    Ok(())
}
