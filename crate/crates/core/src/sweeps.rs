//! Seeded randomized checks over many small instances. Each returns a
//! report listing every violation it found; an empty list means the
//! property held on all cases.

use rand::Rng;
use serde::Serialize;

use crate::attrs::AttrSet;
use crate::cell::Cell;
use crate::context::IncompleteContext;
use crate::error::Result;
use crate::exploration::{run, ExplorationState, SimulationRun};
use crate::expert::{group_join, ExpertKnowledge, StandardInteraction};
use crate::implication::Theory;
use crate::oracle::{imp_enumerate, DEFAULT_IMP_BOUND};
use crate::par::Exec;
use crate::strategy::{refine, Collaboration, OrderSpec, StrategyConfig, StrategyKind};
use crate::synth;

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct SweepReport {
    pub cases: u64,
    pub failures: Vec<String>,
}

impl SweepReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }

    fn merge(mut self, other: SweepReport) -> SweepReport {
        self.cases += other.cases;
        self.failures.extend(other.failures);
        self
    }
}

fn collect(exec: Exec, n: usize, f: impl Fn(usize) -> SweepReport + Sync + Send) -> SweepReport {
    exec.map_range(n, f)
        .into_iter()
        .fold(SweepReport::default(), SweepReport::merge)
}

/// Explores with one strategy over simulated experts, sequentially inside.
pub fn simulate(kind: StrategyKind, experts: &[ExpertKnowledge], attributes: &[String]) -> Result<SimulationRun> {
    simulate_with(StrategyConfig::new(kind), experts, attributes)
}

pub fn simulate_with(
    config: StrategyConfig,
    experts: &[ExpertKnowledge],
    attributes: &[String],
) -> Result<SimulationRun> {
    let roster = experts.iter().map(|e| e.name.clone()).collect();
    let mut collab = Collaboration::new(config, roster)?.with_knowledge(experts);
    let state = ExplorationState::new(attributes.to_vec(), None, None)?;
    run(state, &mut collab, experts, &StandardInteraction, Exec::Sequential)
}

/// `a ≤ b` straight from the cell table, for contexts over the same rows.
fn leq_cells(a: &IncompleteContext, b: &IncompleteContext) -> bool {
    a.cells()
        .iter()
        .zip(b.cells())
        .all(|(x, y)| *x == Cell::Unknown || x == y)
}

fn conflict_free(a: &IncompleteContext, b: &IncompleteContext) -> bool {
    a.cells()
        .iter()
        .zip(b.cells())
        .all(|(x, y)| *x == Cell::Unknown || *y == Cell::Unknown || x == y)
}

fn lattice_case(seed: u64) -> SweepReport {
    let mut rng = synth::rng(seed);
    let g = rng.random_range(1..=5);
    let m = rng.random_range(1..=5);
    let mut fail = Vec::new();
    let mut check = |ok: bool, what: &str| {
        if !ok {
            fail.push(format!("seed {seed}: {what}"));
        }
    };
    // Half the pairs come from a shared complete context, so most of them
    // are conflict-free and some are comparable.
    let base = synth::random_universe(&mut rng, g, m, 0.5);
    let (a, b) = match rng.random_range(0..4) {
        0 => (synth::random_incomplete(&mut rng, g, m), synth::random_incomplete(&mut rng, g, m)),
        1 => {
            let b = synth::weaken(&mut rng, &base, 0.4);
            (synth::weaken(&mut rng, &b, 0.4), b)
        }
        _ => (synth::weaken(&mut rng, &base, 0.5), synth::weaken(&mut rng, &base, 0.5)),
    };
    let meet = a.meet(&b).expect("same attributes");
    check(meet == b.meet(&a).unwrap(), "meet commutes");
    check(a.meet(&a).unwrap() == a, "meet idempotent");
    check(leq_cells(&meet, &a) && leq_cells(&meet, &b), "meet is a lower bound");
    let leq = a.info_leq(&b).unwrap();
    check(leq == leq_cells(&a, &b), "info_leq agrees with cell table");
    check(leq == (meet == a), "a ≤ b iff a ∧ b = a");
    check(a.join(&a).unwrap() == a, "join idempotent");
    if conflict_free(&a, &b) {
        let join = a.join(&b).expect("conflict-free");
        check(join == b.join(&a).unwrap(), "join commutes");
        check(leq_cells(&a, &join) && leq_cells(&b, &join), "join is an upper bound");
        check(leq == (join == b), "a ≤ b iff a ∨ b = b");
        check(a.meet(&join).unwrap() == a, "a ∧ (a ∨ b) = a");
        check(a.join(&meet).unwrap() == a, "a ∨ (a ∧ b) = a");
    } else {
        check(a.join(&b).is_err(), "conflicting join errors");
        check(!a.conflicts(&b).unwrap().is_empty(), "conflicts reported");
    }
    // Everything derived from one complete context stays below it.
    let c = synth::weaken(&mut rng, &base, 0.3);
    let d = synth::weaken(&mut rng, &base, 0.3);
    let cm = c.meet(&d).unwrap();
    let cj = c.join(&d).unwrap();
    check(cm.info_leq(&base).unwrap() && cj.info_leq(&base).unwrap(), "derived stay ≤ K0");
    SweepReport { cases: 1, failures: fail }
}

/// Lattice laws on `pairs` seeded random context pairs.
pub fn lattice_sweep(pairs: usize, seed: u64, exec: Exec) -> SweepReport {
    collect(exec, pairs, |i| lattice_case(seed.wrapping_add(i as u64)))
}

fn max_expert_case(seed: u64) -> Result<SweepReport> {
    let mut rng = synth::rng(seed);
    let g = rng.random_range(1..=5);
    let m = rng.random_range(1..=4);
    let k = rng.random_range(2..=3);
    let u = synth::random_universe(&mut rng, g, m, 0.5);
    let group = synth::random_group(&mut rng, &u, k)?;
    let attrs = u.attributes().to_vec();
    let mut fail = Vec::new();

    let max = simulate(StrategyKind::MaxKnowledge, &group, &attrs)?;
    let joined = group_join(&group)?;
    let single = simulate(StrategyKind::Single, std::slice::from_ref(&joined), &attrs)?;
    let max_l = &max.result.accepted;
    if !max_l.cons_equivalent(&single.result.accepted) {
        fail.push(format!("seed {seed}: max_knowledge differs from single on the group join"));
    }
    if !max.result.examples.equivalent(&single.result.examples) {
        fail.push(format!("seed {seed}: max_knowledge examples differ from single on the group join"));
    }
    for kind in [StrategyKind::Iterative, StrategyKind::Broadcast, StrategyKind::Ignorant] {
        let other = simulate(kind, &group, &attrs)?;
        if !max_l.entails_all(&other.result.accepted) {
            fail.push(format!("seed {seed}: {} knows more than max_knowledge", kind.as_str()));
        }
        for imp in other.result.accepted.iter() {
            if !imp.certainly_valid_in(&u) {
                fail.push(format!("seed {seed}: {} accepted an invalid implication", kind.as_str()));
            }
        }
        if kind == StrategyKind::Ignorant && !other.result.accepted.is_empty() {
            fail.push(format!("seed {seed}: ignorant accepted something"));
        }
    }
    Ok(SweepReport { cases: 1, failures: fail })
}

/// The maximal expert dominates every other strategy on `universes`
/// seeded instances.
pub fn max_expert_sweep(universes: usize, seed: u64, exec: Exec) -> SweepReport {
    collect(exec, universes, |i| {
        let s = seed.wrapping_add(i as u64);
        max_expert_case(s).unwrap_or_else(|e| SweepReport {
            cases: 1,
            failures: vec![format!("seed {s}: {e}")],
        })
    })
}

/// Closure under the universe, computed from its rows: the attributes
/// shared by every object that has all of `seed`.
fn universe_closure(u: &IncompleteContext, seed: AttrSet) -> AttrSet {
    let m = u.attribute_count();
    let mut acc = AttrSet::full(m);
    for g in 0..u.object_count() {
        let row: AttrSet = AttrSet::from_indices((0..m).filter(|&j| u.cell(g, j) == Cell::Cross));
        if seed.is_subset(row) {
            acc = acc.intersection(row);
        }
    }
    acc
}

fn omniscient_case(seed: u64) -> Result<SweepReport> {
    let mut rng = synth::rng(seed);
    let g = rng.random_range(1..=4);
    let m = rng.random_range(1..=4);
    let u = synth::random_universe(&mut rng, g, m, 0.5);
    let e = ExpertKnowledge::omniscient("omniscient", &u)?;
    let r = simulate(StrategyKind::Single, std::slice::from_ref(&e), u.attributes())?;
    let mut fail = Vec::new();
    let imp = imp_enumerate(&u, DEFAULT_IMP_BOUND)?;
    if !r.result.accepted.cons_equivalent(&imp) {
        fail.push(format!("seed {seed}: accepted theory differs from Imp(universe)"));
    }
    for bits in 0..(1u64 << m) {
        let a = AttrSet::from_bits(bits);
        if r.result.accepted.closure(a) != universe_closure(&u, a) {
            fail.push(format!("seed {seed}: closure of {a:?} differs from the universe"));
            break;
        }
    }
    if !r.result.fictitious.is_empty() {
        fail.push(format!("seed {seed}: omniscient expert answered unknown"));
    }
    Ok(SweepReport { cases: 1, failures: fail })
}

/// A complete expert leads to the full implication theory of the universe.
pub fn omniscient_sweep(universes: usize, seed: u64, exec: Exec) -> SweepReport {
    collect(exec, universes, |i| {
        let s = seed.wrapping_add(i as u64);
        omniscient_case(s).unwrap_or_else(|e| SweepReport {
            cases: 1,
            failures: vec![format!("seed {s}: {e}")],
        })
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ChainCounts {
    pub experts: usize,
    pub steps: usize,
    pub broadcast: u64,
    pub iterative_worst: u64,
    pub accepted: bool,
}

/// Interaction counts for settling the chain target with broadcast and
/// with iterative in its worst order.
pub fn chain_counts(m: usize, n: usize) -> Result<ChainCounts> {
    let (_, experts, target) = synth::chain(m, n)?;
    let b = refine(
        target,
        StrategyConfig::new(StrategyKind::Broadcast),
        &experts,
        &StandardInteraction,
        Exec::Sequential,
    )?;
    let order = OrderSpec::Explicit(synth::chain_worst_order(m, n));
    let i = refine(
        target,
        StrategyConfig::new(StrategyKind::Iterative).with_order(order),
        &experts,
        &StandardInteraction,
        Exec::Sequential,
    )?;
    use crate::expert::AnswerKind;
    Ok(ChainCounts {
        experts: m,
        steps: n,
        broadcast: b.ledger.total,
        iterative_worst: i.ledger.total,
        accepted: b.outcome == AnswerKind::Accept && i.outcome == AnswerKind::Accept,
    })
}

/// Theory check used by property tests: every member of `t` is valid in `u`.
pub fn sound_in(t: &Theory, u: &IncompleteContext) -> bool {
    t.iter().all(|i| i.certainly_valid_in(u))
}
