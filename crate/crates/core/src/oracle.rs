//! Brute-force ground truth for small instances: validity over all
//! completions, enumeration of `Imp(K)`, and closure by intersecting models.

use serde::Serialize;

use crate::attrs::AttrSet;
use crate::cell::Cell;
use crate::context::IncompleteContext;
use crate::error::{Error, Result};
use crate::implication::{Implication, Theory};
use crate::par::Exec;

/// Default cap on `|M|` for [`imp_enumerate`].
pub const DEFAULT_IMP_BOUND: usize = 12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum OracleMode {
    Certain,
    Satisfiable,
}

fn valid_in_formal(ctx: &IncompleteContext, imp: &Implication) -> bool {
    (0..ctx.object_count()).all(|g| {
        let row = ctx.row(g);
        let has = |m: usize| row[m] == Cell::Cross;
        !imp.premise.iter().all(has) || imp.conclusion.iter().all(has)
    })
}

/// Evaluates `imp` in every completion of `ctx`.
pub fn kripke_oracle(
    ctx: &IncompleteContext,
    imp: &Implication,
    mode: OracleMode,
    bound: usize,
) -> Result<bool> {
    if !imp.fits(ctx.attribute_count()) {
        return Err(Error::IncompatibleUniverse);
    }
    let mut completions = ctx.completions(bound)?;
    Ok(match mode {
        OracleMode::Certain => completions.all(|c| valid_in_formal(&c, imp)),
        OracleMode::Satisfiable => completions.any(|c| valid_in_formal(&c, imp)),
    })
}

/// All certainly valid implications in reduced form `A ⇒ A^◊□ \ A`, one per
/// premise with a non-empty conclusion, premises in binary counting order.
pub fn imp_enumerate(ctx: &IncompleteContext, bound: usize) -> Result<Theory> {
    let n = ctx.attribute_count();
    let limit = bound.min(20);
    if n > limit {
        return Err(Error::Capacity {
            what: "attribute count",
            actual: n,
            limit,
        });
    }
    let mut t = Theory::new(ctx.attributes().to_vec());
    for bits in 0..(1u64 << n) {
        let a = AttrSet::from_bits(bits);
        let rest = ctx.diamond_box(a) - a;
        if !rest.is_empty() {
            t.push(Implication::new(a, rest))?;
        }
    }
    Ok(t)
}

/// `⟨seed⟩` as the intersection of all models of `theory` above `seed`.
pub fn closure_by_models(theory: &Theory, seed: AttrSet) -> AttrSet {
    let n = theory.attributes().len();
    assert!(n <= 20, "closure_by_models is for small attribute lists");
    let mut acc = AttrSet::full(n);
    for bits in 0..(1u64 << n) {
        let b = AttrSet::from_bits(bits);
        if seed.is_subset(b) && theory.iter().all(|i| i.respected_by(b)) {
            acc = acc & b;
        }
    }
    acc
}

/// One disagreement between the row-wise tests and the completions oracle.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Mismatch {
    pub context: String,
    pub premise: Vec<String>,
    pub attribute: String,
    pub mode: OracleMode,
    pub row_test: bool,
    pub oracle: bool,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct OracleReport {
    pub contexts: u64,
    pub checks: u64,
    pub mismatches: Vec<Mismatch>,
}

impl OracleReport {
    fn absorb(&mut self, other: OracleReport) {
        self.contexts += other.contexts;
        self.checks += other.checks;
        self.mismatches.extend(other.mismatches);
    }
}

/// For every premise `A` (as a bitmask index), the attributes `m` such that
/// `A ⇒ m` holds in all completions and in at least one completion.
///
/// Works directly on the cell matrix, without the derivation operators.
fn completion_truth(ctx: &IncompleteContext) -> (Vec<u64>, Vec<u64>) {
    let n = ctx.attribute_count();
    let g = ctx.object_count();
    let unknown: Vec<usize> = ctx
        .cells()
        .iter()
        .enumerate()
        .filter(|(_, c)| **c == Cell::Unknown)
        .map(|(i, _)| i)
        .collect();
    let base: Vec<u64> = (0..g)
        .map(|r| {
            ctx.row(r)
                .iter()
                .enumerate()
                .filter(|(_, c)| **c == Cell::Cross)
                .fold(0u64, |acc, (m, _)| acc | (1 << m))
        })
        .collect();
    let full = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
    let premises = 1usize << n;
    let mut all = vec![full; premises];
    let mut some = vec![0u64; premises];
    let mut rows = base.clone();
    for k in 0..(1u64 << unknown.len()) {
        rows.copy_from_slice(&base);
        for (i, &pos) in unknown.iter().enumerate() {
            if (k >> i) & 1 == 1 {
                rows[pos / n] |= 1 << (pos % n);
            }
        }
        for a in 0..premises as u64 {
            // A'' in this completion
            let closed = rows
                .iter()
                .filter(|&&r| a & !r == 0)
                .fold(full, |acc, &r| acc & r);
            all[a as usize] &= closed;
            some[a as usize] |= closed;
        }
    }
    (all, some)
}

/// Compares the row-wise validity tests with the completions oracle for
/// every premise and every single attribute conclusion.
pub fn check_context(ctx: &IncompleteContext, bound: usize) -> Result<OracleReport> {
    ctx.check_capacity()?;
    let unknowns = ctx.unknown_count();
    let limit = bound.min(24);
    if unknowns > limit {
        return Err(Error::Capacity {
            what: "unknown cells",
            actual: unknowns,
            limit,
        });
    }
    if ctx.attribute_count() > 16 {
        return Err(Error::Capacity {
            what: "attribute count",
            actual: ctx.attribute_count(),
            limit: 16,
        });
    }
    Ok(check_unchecked(ctx, true))
}

fn check_unchecked(ctx: &IncompleteContext, describe: bool) -> OracleReport {
    let n = ctx.attribute_count();
    let (all, some) = completion_truth(ctx);
    let mut report = OracleReport {
        contexts: 1,
        ..Default::default()
    };
    for bits in 0..(1u64 << n) {
        let a = AttrSet::from_bits(bits);
        for m in 0..n {
            let imp = Implication::new(a, AttrSet::singleton(m));
            for (mode, row_test, oracle) in [
                (
                    OracleMode::Certain,
                    imp.certainly_valid_in(ctx),
                    all[bits as usize] >> m & 1 == 1,
                ),
                (
                    OracleMode::Satisfiable,
                    imp.satisfiable_in(ctx),
                    some[bits as usize] >> m & 1 == 1,
                ),
            ] {
                report.checks += 1;
                if row_test != oracle {
                    report.mismatches.push(Mismatch {
                        context: if describe {
                            crate::cxt::write(ctx)
                        } else {
                            String::new()
                        },
                        premise: ctx.attribute_names(a),
                        attribute: ctx.attributes()[m].clone(),
                        mode,
                        row_test,
                        oracle,
                    });
                }
            }
        }
    }
    report
}

/// Decodes context number `code` (base 3, one digit per cell, row-major)
/// over `g` objects and `m` attributes.
pub fn context_from_code(g: usize, m: usize, mut code: u64) -> IncompleteContext {
    let mut cells = Vec::with_capacity(g * m);
    for _ in 0..g * m {
        cells.push(Cell::ALL[(code % 3) as usize]);
        code /= 3;
    }
    IncompleteContext::from_cells(
        "",
        (0..g).map(|i| format!("g{i}")).collect(),
        (0..m).map(|i| format!("m{i}")).collect(),
        cells,
    )
    .expect("generated names are unique")
}

/// Runs [`check_context`] on every incomplete context with exactly `g`
/// objects and `m` attributes.
pub fn exhaustive_sweep(g: usize, m: usize, exec: Exec) -> OracleReport {
    let total = 3u64.pow((g * m) as u32);
    const CHUNK: u64 = 512;
    let chunks = total.div_ceil(CHUNK);
    let parts = exec.map_range(chunks as usize, |c| {
        let mut part = OracleReport::default();
        let lo = c as u64 * CHUNK;
        for code in lo..(lo + CHUNK).min(total) {
            part.absorb(check_unchecked(&context_from_code(g, m, code), false));
        }
        part
    });
    let mut report = OracleReport::default();
    for p in parts {
        report.absorb(p);
    }
    for mm in &mut report.mismatches {
        mm.context = format!("{g}x{m}");
    }
    report
}

/// [`exhaustive_sweep`] over every shape up to `max_g` × `max_m`.
pub fn exhaustive_sweep_upto(max_g: usize, max_m: usize, exec: Exec) -> OracleReport {
    let mut report = OracleReport::default();
    for g in 0..=max_g {
        for m in 1..=max_m {
            report.absorb(exhaustive_sweep(g, m, exec));
        }
    }
    report
}
