//! Seeded synthetic universes and expert groups for sweeps, benches and
//! property tests.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::attrs::AttrSet;
use crate::cell::Cell;
use crate::context::IncompleteContext;
use crate::error::Result;
use crate::expert::ExpertKnowledge;
use crate::implication::{Implication, Theory};
use crate::oracle::{imp_enumerate, DEFAULT_IMP_BOUND};

pub fn attribute_names(m: usize) -> Vec<String> {
    (0..m).map(|i| format!("m{i}")).collect()
}

pub fn object_names(g: usize) -> Vec<String> {
    (0..g).map(|i| format!("g{i}")).collect()
}

/// A complete context with each cell crossed with probability `density`.
pub fn random_universe(rng: &mut impl Rng, g: usize, m: usize, density: f64) -> IncompleteContext {
    let cells = (0..g * m)
        .map(|_| if rng.random_bool(density) { Cell::Cross } else { Cell::Blank })
        .collect();
    IncompleteContext::from_cells(String::new(), object_names(g), attribute_names(m), cells)
        .expect("generated context is well formed")
}

/// Any three-valued context over the given shape.
pub fn random_incomplete(rng: &mut impl Rng, g: usize, m: usize) -> IncompleteContext {
    let cells = (0..g * m)
        .map(|_| match rng.random_range(0..3) {
            0 => Cell::Cross,
            1 => Cell::Blank,
            _ => Cell::Unknown,
        })
        .collect();
    IncompleteContext::from_cells(String::new(), object_names(g), attribute_names(m), cells)
        .expect("generated context is well formed")
}

/// A context below `base` in the information order: every row is kept and
/// each cell is forgotten with probability `forget`.
pub fn weaken(rng: &mut impl Rng, base: &IncompleteContext, forget: f64) -> IncompleteContext {
    let cells = base
        .cells()
        .iter()
        .map(|&c| if rng.random_bool(forget) { Cell::Unknown } else { c })
        .collect();
    IncompleteContext::from_cells(
        base.name().to_owned(),
        base.objects().to_vec(),
        base.attributes().to_vec(),
        cells,
    )
    .expect("same shape as base")
}

/// Splits the knowledge of a complete `universe` among `k` experts.
///
/// Each universe row goes to a random subset of experts with some
/// cells forgotten, and each implication of the universe's reduced basis
/// goes to at most one expert. Every expert is valid for the universe.
pub fn random_group(rng: &mut impl Rng, universe: &IncompleteContext, k: usize) -> Result<Vec<ExpertKnowledge>> {
    let attrs = universe.attributes().to_vec();
    let mut rows: Vec<Vec<usize>> = vec![Vec::new(); k];
    for g in 0..universe.object_count() {
        for r in rows.iter_mut() {
            if rng.random_bool(0.4) {
                r.push(g);
            }
        }
    }
    let basis = imp_enumerate(universe, DEFAULT_IMP_BOUND)?;
    let mut known: Vec<Theory> = (0..k).map(|_| Theory::new(attrs.clone())).collect();
    for imp in basis.iter() {
        let slot = rng.random_range(0..=k);
        if slot < k {
            known[slot].push(*imp)?;
        }
    }
    let mut out = Vec::with_capacity(k);
    for (e, (r, l)) in rows.into_iter().zip(known).enumerate() {
        let examples = weaken(rng, &universe.restrict_indices(&r), 0.2);
        out.push(ExpertKnowledge::new(format!("E{}", e + 1), examples, l)?);
    }
    Ok(out)
}

/// The chain instance with attributes `a0..an` and `m` experts.
///
/// The universe has objects `g_j = {a_i : i >= j}` for `j` in `0..=n`, so
/// `a_{i-1} ⇒ a_i` holds for every `i`. Expert `(i - 1) mod m` knows just
/// that step and no examples. The returned target is `a0 ⇒ a1..an`.
pub fn chain(m: usize, n: usize) -> Result<(IncompleteContext, Vec<ExpertKnowledge>, Implication)> {
    let attrs: Vec<String> = (0..=n).map(|i| format!("a{i}")).collect();
    let mut universe = IncompleteContext::empty(attrs.clone())?;
    for j in 0..=n {
        let row = (0..=n).map(|i| if i >= j { Cell::Cross } else { Cell::Blank }).collect();
        universe.push_row(format!("g{j}"), row)?;
    }
    let mut known: Vec<Theory> = (0..m).map(|_| Theory::new(attrs.clone())).collect();
    for i in 1..=n {
        known[(i - 1) % m].push(Implication::new(AttrSet::singleton(i - 1), AttrSet::singleton(i)))?;
    }
    let experts = known
        .into_iter()
        .enumerate()
        .map(|(e, l)| ExpertKnowledge::new(format!("E{}", e + 1), IncompleteContext::empty(attrs.clone())?, l))
        .collect::<Result<Vec<_>>>()?;
    let target = Implication::new(AttrSet::singleton(0), AttrSet::from_indices(1..=n));
    Ok((universe, experts, target))
}

/// Roster order for the chain that makes iterative pay the most: the expert
/// holding the last step is asked last, the others keep roster order.
pub fn chain_worst_order(m: usize, n: usize) -> Vec<String> {
    let last = (n - 1) % m;
    let mut order: Vec<usize> = (0..m).filter(|&e| e != last).collect();
    order.push(last);
    order.into_iter().map(|e| format!("E{}", e + 1)).collect()
}

/// A seeded generator for the sweeps.
pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A uniformly shuffled copy of `items`.
pub fn shuffled<T: Clone>(rng: &mut impl Rng, items: &[T]) -> Vec<T> {
    let mut v = items.to_vec();
    v.shuffle(rng);
    v
}
