//! Three-valued contexts, derivation operators and the information orders.

use std::collections::{HashMap, HashSet};
use std::ops::Deref;

use crate::attrs::{AttrSet, MAX_ATTRIBUTES};
use crate::cell::Cell;
use crate::error::{ConflictCell, Error, Result};

/// Default cap on the number of unknown cells [`IncompleteContext::completions`]
/// will enumerate.
pub const DEFAULT_COMPLETION_BOUND: usize = 20;

/// Which derivation operator to apply.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    /// Relations known to hold (cells that are crosses).
    Certain,
    /// Relations not known to fail (cells that are not blanks).
    Possible,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    /// Derive from a set of objects to a set of attributes.
    Objects,
    /// Derive from a set of attributes to a set of objects.
    Attributes,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
struct RowMask {
    certain: AttrSet,
    possible: AttrSet,
}

/// Named objects × named attributes with cells in {cross, blank, unknown}.
///
/// Values are immutable once built, except for appending rows. Contexts with
/// more than [`MAX_ATTRIBUTES`] attributes can be stored, parsed and
/// converted, but the set-valued operations (derivations, validity checks)
/// require the attribute list to fit an [`AttrSet`]; the checked entry points
/// return [`Error::Capacity`] and the index-based helpers panic.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IncompleteContext {
    name: String,
    objects: Vec<String>,
    attributes: Vec<String>,
    cells: Vec<Cell>,
    masks: Vec<RowMask>,
}

fn check_unique(kind: &'static str, names: &[String]) -> Result<()> {
    let mut seen = HashSet::with_capacity(names.len());
    for n in names {
        if !seen.insert(n.as_str()) {
            return Err(Error::Duplicate {
                kind,
                name: n.clone(),
            });
        }
    }
    Ok(())
}

fn row_mask(row: &[Cell]) -> RowMask {
    let mut certain = AttrSet::EMPTY;
    let mut possible = AttrSet::EMPTY;
    for (m, c) in row.iter().enumerate() {
        match c {
            Cell::Cross => {
                certain.insert(m);
                possible.insert(m);
            }
            Cell::Unknown => possible.insert(m),
            Cell::Blank => {}
        }
    }
    RowMask { certain, possible }
}

impl IncompleteContext {
    /// Builds a context from a flat row-major cell vector.
    pub fn from_cells(
        name: impl Into<String>,
        objects: Vec<String>,
        attributes: Vec<String>,
        cells: Vec<Cell>,
    ) -> Result<Self> {
        check_unique("object", &objects)?;
        check_unique("attribute", &attributes)?;
        if cells.len() != objects.len() * attributes.len() {
            return Err(Error::Protocol(format!(
                "cell matrix has {} entries, expected {} × {}",
                cells.len(),
                objects.len(),
                attributes.len()
            )));
        }
        let mut ctx = IncompleteContext {
            name: name.into(),
            objects,
            attributes,
            cells,
            masks: Vec::new(),
        };
        ctx.rebuild_masks();
        Ok(ctx)
    }

    pub fn new(
        name: impl Into<String>,
        objects: Vec<String>,
        attributes: Vec<String>,
        rows: Vec<Vec<Cell>>,
    ) -> Result<Self> {
        let width = attributes.len();
        if let Some((g, _)) = rows.iter().enumerate().find(|(_, r)| r.len() != width) {
            return Err(Error::Protocol(format!(
                "row {} has {} cells, expected {}",
                g,
                rows[g].len(),
                width
            )));
        }
        if rows.len() != objects.len() {
            return Err(Error::Protocol(format!(
                "{} rows for {} objects",
                rows.len(),
                objects.len()
            )));
        }
        Self::from_cells(name, objects, attributes, rows.concat())
    }

    /// A context with the given attributes and no objects.
    pub fn empty(attributes: Vec<String>) -> Result<Self> {
        Self::from_cells("", Vec::new(), attributes, Vec::new())
    }

    /// Convenience constructor from `(object, "X.?")` row strings.
    pub fn from_rows<A: AsRef<str>>(attributes: &[A], rows: &[(&str, &str)]) -> Result<Self> {
        let attributes: Vec<String> = attributes.iter().map(|a| a.as_ref().to_owned()).collect();
        let mut objects = Vec::with_capacity(rows.len());
        let mut cells = Vec::with_capacity(rows.len() * attributes.len());
        for (line, (obj, row)) in rows.iter().enumerate() {
            objects.push((*obj).to_owned());
            let parsed: Vec<Cell> = row
                .chars()
                .enumerate()
                .map(|(col, ch)| {
                    Cell::from_char(ch)
                        .ok_or_else(|| Error::parse(line + 1, col + 1, format!("bad cell `{ch}`")))
                })
                .collect::<Result<_>>()?;
            if parsed.len() != attributes.len() {
                return Err(Error::parse(
                    line + 1,
                    parsed.len() + 1,
                    format!("expected {} cells", attributes.len()),
                ));
            }
            cells.extend(parsed);
        }
        Self::from_cells("", objects, attributes, cells)
    }

    fn rebuild_masks(&mut self) {
        self.masks.clear();
        if self.attributes.len() <= MAX_ATTRIBUTES {
            let w = self.attributes.len();
            for g in 0..self.objects.len() {
                let m = row_mask(&self.cells[g * w..(g + 1) * w]);
                self.masks.push(m);
            }
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn objects(&self) -> &[String] {
        &self.objects
    }

    pub fn attributes(&self) -> &[String] {
        &self.attributes
    }

    pub fn object_count(&self) -> usize {
        self.objects.len()
    }

    pub fn attribute_count(&self) -> usize {
        self.attributes.len()
    }

    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    pub fn cell(&self, g: usize, m: usize) -> Cell {
        self.cells[g * self.attributes.len() + m]
    }

    pub fn row(&self, g: usize) -> &[Cell] {
        let w = self.attributes.len();
        &self.cells[g * w..(g + 1) * w]
    }

    pub fn row_string(&self, g: usize) -> String {
        self.row(g).iter().map(|c| c.to_char()).collect()
    }

    pub fn object_index(&self, name: &str) -> Option<usize> {
        self.objects.iter().position(|o| o == name)
    }

    pub fn attribute_index(&self, name: &str) -> Option<usize> {
        self.attributes.iter().position(|a| a == name)
    }

    /// Fails with [`Error::Capacity`] when the attribute list does not fit
    /// an [`AttrSet`].
    pub fn check_capacity(&self) -> Result<()> {
        if self.attributes.len() > MAX_ATTRIBUTES {
            return Err(Error::Capacity {
                what: "attribute count",
                actual: self.attributes.len(),
                limit: MAX_ATTRIBUTES,
            });
        }
        Ok(())
    }

    pub fn resolve_objects<S: AsRef<str>>(&self, names: &[S]) -> Result<Vec<usize>> {
        let index: HashMap<&str, usize> = self
            .objects
            .iter()
            .enumerate()
            .map(|(i, o)| (o.as_str(), i))
            .collect();
        names
            .iter()
            .map(|n| {
                index
                    .get(n.as_ref())
                    .copied()
                    .ok_or_else(|| Error::UnknownObject(n.as_ref().to_owned()))
            })
            .collect()
    }

    pub fn resolve_attributes<S: AsRef<str>>(&self, names: &[S]) -> Result<AttrSet> {
        self.check_capacity()?;
        resolve_attribute_names(&self.attributes, names)
    }

    pub fn attribute_names(&self, set: AttrSet) -> Vec<String> {
        set.iter().map(|m| self.attributes[m].clone()).collect()
    }

    fn mask(&self, g: usize) -> RowMask {
        assert!(
            self.attributes.len() <= MAX_ATTRIBUTES,
            "context has more than {MAX_ATTRIBUTES} attributes"
        );
        self.masks[g]
    }

    /// `g^□`: attributes the object certainly has.
    pub fn row_certain(&self, g: usize) -> AttrSet {
        self.mask(g).certain
    }

    /// `g^◊`: attributes the object possibly has.
    pub fn row_possible(&self, g: usize) -> AttrSet {
        self.mask(g).possible
    }

    pub fn full_attributes(&self) -> AttrSet {
        AttrSet::full(self.attributes.len())
    }

    pub fn certain_intent(&self, objects: &[usize]) -> AttrSet {
        objects
            .iter()
            .fold(self.full_attributes(), |acc, &g| acc & self.row_certain(g))
    }

    pub fn possible_intent(&self, objects: &[usize]) -> AttrSet {
        objects
            .iter()
            .fold(self.full_attributes(), |acc, &g| acc & self.row_possible(g))
    }

    pub fn certain_extent(&self, attrs: AttrSet) -> Vec<usize> {
        (0..self.objects.len())
            .filter(|&g| attrs.is_subset(self.row_certain(g)))
            .collect()
    }

    pub fn possible_extent(&self, attrs: AttrSet) -> Vec<usize> {
        (0..self.objects.len())
            .filter(|&g| attrs.is_subset(self.row_possible(g)))
            .collect()
    }

    /// `A^□◊`: possible intent of the certain extent of `premise`.
    pub fn box_diamond(&self, premise: AttrSet) -> AttrSet {
        let mut acc = self.full_attributes();
        for mask in &self.masks {
            if premise.is_subset(mask.certain) {
                acc = acc & mask.possible;
            }
        }
        acc
    }

    /// `A^◊□`: certain intent of the possible extent of `premise`.
    pub fn diamond_box(&self, premise: AttrSet) -> AttrSet {
        let mut acc = self.full_attributes();
        for mask in &self.masks {
            if premise.is_subset(mask.possible) {
                acc = acc & mask.certain;
            }
        }
        acc
    }

    /// Name-based derivation in either direction.
    pub fn derive<S: AsRef<str>>(&self, side: Side, subset: &[S], mode: Mode) -> Result<Vec<String>> {
        self.check_capacity()?;
        match side {
            Side::Objects => {
                let objs = self.resolve_objects(subset)?;
                let set = match mode {
                    Mode::Certain => self.certain_intent(&objs),
                    Mode::Possible => self.possible_intent(&objs),
                };
                Ok(self.attribute_names(set))
            }
            Side::Attributes => {
                let attrs = self.resolve_attributes(subset)?;
                let objs = match mode {
                    Mode::Certain => self.certain_extent(attrs),
                    Mode::Possible => self.possible_extent(attrs),
                };
                Ok(objs.into_iter().map(|g| self.objects[g].clone()).collect())
            }
        }
    }

    /// Restriction to the named objects, kept in this context's order.
    pub fn restrict<S: AsRef<str>>(&self, objects: &[S]) -> Result<Self> {
        let mut idx = self.resolve_objects(objects)?;
        idx.sort_unstable();
        idx.dedup();
        Ok(self.restrict_indices(&idx))
    }

    /// Restriction to object indices, in the order given.
    pub fn restrict_indices(&self, objects: &[usize]) -> Self {
        let w = self.attributes.len();
        let mut cells = Vec::with_capacity(objects.len() * w);
        let mut names = Vec::with_capacity(objects.len());
        let mut masks = Vec::with_capacity(objects.len());
        for &g in objects {
            names.push(self.objects[g].clone());
            cells.extend_from_slice(self.row(g));
            if !self.masks.is_empty() {
                masks.push(self.masks[g]);
            }
        }
        IncompleteContext {
            name: self.name.clone(),
            objects: names,
            attributes: self.attributes.clone(),
            cells,
            masks,
        }
    }

    fn require_same_attributes(&self, other: &Self) -> Result<()> {
        if self.attributes != other.attributes {
            return Err(Error::IncompatibleContexts);
        }
        Ok(())
    }

    /// Generalized information order: `self ≤_g other`.
    ///
    /// Holds when every object of `self` occurs in `other` and each of its
    /// cells is below the matching cell of `other`. On equal object sets this
    /// is the plain information order.
    pub fn info_leq(&self, other: &Self) -> Result<bool> {
        self.require_same_attributes(other)?;
        let index = other.object_index_map();
        for (g, name) in self.objects.iter().enumerate() {
            let Some(&h) = index.get(name.as_str()) else {
                return Ok(false);
            };
            if !self
                .row(g)
                .iter()
                .zip(other.row(h))
                .all(|(a, b)| a.info_leq(*b))
            {
                return Ok(false);
            }
        }
        Ok(true)
    }

    fn object_index_map(&self) -> HashMap<&str, usize> {
        self.objects
            .iter()
            .enumerate()
            .map(|(i, o)| (o.as_str(), i))
            .collect()
    }

    /// Cells of shared objects where one side has a cross and the other a
    /// blank, in this context's object and attribute order.
    pub fn conflicts(&self, other: &Self) -> Result<Vec<ConflictCell>> {
        self.require_same_attributes(other)?;
        let index = other.object_index_map();
        let mut out = Vec::new();
        for (g, name) in self.objects.iter().enumerate() {
            if let Some(&h) = index.get(name.as_str()) {
                for (m, (a, b)) in self.row(g).iter().zip(other.row(h)).enumerate() {
                    if a.conflicts_with(*b) {
                        out.push(ConflictCell {
                            object: name.clone(),
                            attribute: self.attributes[m].clone(),
                        });
                    }
                }
            }
        }
        Ok(out)
    }

    /// Generalized infimum: shared objects (in this context's order), cells
    /// met component-wise.
    pub fn meet(&self, other: &Self) -> Result<Self> {
        self.require_same_attributes(other)?;
        let index = other.object_index_map();
        let mut objects = Vec::new();
        let mut cells = Vec::new();
        for (g, name) in self.objects.iter().enumerate() {
            if let Some(&h) = index.get(name.as_str()) {
                objects.push(name.clone());
                cells.extend(self.row(g).iter().zip(other.row(h)).map(|(a, b)| a.meet(*b)));
            }
        }
        Self::from_cells(self.name.clone(), objects, self.attributes.clone(), cells)
    }

    /// Generalized supremum. Objects of `self` come first, then the objects
    /// only `other` has, in `other`'s order. A row missing on one side counts
    /// as all-unknown there.
    pub fn join(&self, other: &Self) -> Result<Self> {
        self.require_same_attributes(other)?;
        let conflicts = self.conflicts(other)?;
        if !conflicts.is_empty() {
            return Err(Error::Conflict(conflicts));
        }
        let index = other.object_index_map();
        let mut objects = self.objects.clone();
        let mut cells = Vec::with_capacity(self.cells.len() + other.cells.len());
        for (g, name) in self.objects.iter().enumerate() {
            match index.get(name.as_str()) {
                Some(&h) => cells.extend(
                    self.row(g)
                        .iter()
                        .zip(other.row(h))
                        .map(|(a, b)| a.join(*b).expect("conflicts checked")),
                ),
                None => cells.extend_from_slice(self.row(g)),
            }
        }
        let mine = self.object_index_map();
        for (h, name) in other.objects.iter().enumerate() {
            if !mine.contains_key(name.as_str()) {
                objects.push(name.clone());
                cells.extend_from_slice(other.row(h));
            }
        }
        Self::from_cells(self.name.clone(), objects, self.attributes.clone(), cells)
    }

    /// Same attributes, same object set and the same row for every object;
    /// object order and context name are ignored.
    pub fn equivalent(&self, other: &Self) -> bool {
        if self.attributes != other.attributes || self.objects.len() != other.objects.len() {
            return false;
        }
        let index = other.object_index_map();
        self.objects.iter().enumerate().all(|(g, name)| {
            index
                .get(name.as_str())
                .is_some_and(|&h| self.row(g) == other.row(h))
        })
    }

    /// Appends a row; the object name must be new.
    pub fn push_row(&mut self, object: impl Into<String>, row: Vec<Cell>) -> Result<()> {
        let object = object.into();
        if row.len() != self.attributes.len() {
            return Err(Error::Protocol(format!(
                "row for `{object}` has {} cells, expected {}",
                row.len(),
                self.attributes.len()
            )));
        }
        if self.object_index(&object).is_some() {
            return Err(Error::Duplicate {
                kind: "object",
                name: object,
            });
        }
        if self.attributes.len() <= MAX_ATTRIBUTES {
            self.masks.push(row_mask(&row));
        }
        self.objects.push(object);
        self.cells.extend(row);
        Ok(())
    }

    /// Same context with its columns permuted into `order`, which must be a
    /// permutation of the current attribute list.
    pub fn reorder_attributes<S: AsRef<str>>(&self, order: &[S]) -> Result<Self> {
        if order.len() != self.attributes.len() {
            return Err(Error::IncompatibleContexts);
        }
        let mut perm = Vec::with_capacity(order.len());
        for name in order {
            let m = self
                .attribute_index(name.as_ref())
                .ok_or(Error::IncompatibleContexts)?;
            perm.push(m);
        }
        let attributes: Vec<String> = order.iter().map(|s| s.as_ref().to_owned()).collect();
        check_unique("attribute", &attributes)?;
        let mut cells = Vec::with_capacity(self.cells.len());
        for g in 0..self.objects.len() {
            let row = self.row(g);
            cells.extend(perm.iter().map(|&m| row[m]));
        }
        Self::from_cells(self.name.clone(), self.objects.clone(), attributes, cells)
    }

    pub fn unknown_count(&self) -> usize {
        self.cells.iter().filter(|c| **c == Cell::Unknown).count()
    }

    pub fn is_complete(&self) -> bool {
        self.unknown_count() == 0
    }

    /// Enumerates every formal context above this one.
    ///
    /// Unknown cells are numbered in row-major order. The k-th completion
    /// reads k as a binary number whose most significant bit belongs to the
    /// first unknown cell, with 1 meaning cross.
    pub fn completions(&self, bound: usize) -> Result<Completions<'_>> {
        let unknown: Vec<usize> = self
            .cells
            .iter()
            .enumerate()
            .filter(|(_, c)| **c == Cell::Unknown)
            .map(|(i, _)| i)
            .collect();
        let limit = bound.min(63);
        if unknown.len() > limit {
            return Err(Error::Capacity {
                what: "unknown cells",
                actual: unknown.len(),
                limit,
            });
        }
        Ok(Completions {
            base: self,
            total: 1u64 << unknown.len(),
            unknown,
            next: 0,
        })
    }
}

pub(crate) fn resolve_attribute_names<S: AsRef<str>>(attributes: &[String], names: &[S]) -> Result<AttrSet> {
    let mut set = AttrSet::EMPTY;
    for n in names {
        let m = attributes
            .iter()
            .position(|a| a == n.as_ref())
            .ok_or_else(|| Error::UnknownAttribute(n.as_ref().to_owned()))?;
        set.insert(m);
    }
    Ok(set)
}

pub struct Completions<'a> {
    base: &'a IncompleteContext,
    unknown: Vec<usize>,
    total: u64,
    next: u64,
}

impl Iterator for Completions<'_> {
    type Item = FormalContext;

    fn next(&mut self) -> Option<FormalContext> {
        if self.next >= self.total {
            return None;
        }
        let k = self.next;
        self.next += 1;
        let n = self.unknown.len();
        let mut cells = self.base.cells.clone();
        for (i, &pos) in self.unknown.iter().enumerate() {
            let bit = (k >> (n - 1 - i)) & 1;
            cells[pos] = if bit == 1 { Cell::Cross } else { Cell::Blank };
        }
        let mut ctx = IncompleteContext {
            name: self.base.name.clone(),
            objects: self.base.objects.clone(),
            attributes: self.base.attributes.clone(),
            cells,
            masks: Vec::new(),
        };
        ctx.rebuild_masks();
        Some(FormalContext(ctx))
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let left = (self.total - self.next) as usize;
        (left, Some(left))
    }
}

/// An incomplete context without unknown cells.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FormalContext(IncompleteContext);

impl FormalContext {
    pub fn into_inner(self) -> IncompleteContext {
        self.0
    }

    pub fn as_incomplete(&self) -> &IncompleteContext {
        &self.0
    }

    /// Ordinary derivation `A'` (both modes coincide on complete contexts).
    pub fn intent(&self, objects: &[usize]) -> AttrSet {
        self.0.certain_intent(objects)
    }

    pub fn extent(&self, attrs: AttrSet) -> Vec<usize> {
        self.0.certain_extent(attrs)
    }
}

impl TryFrom<IncompleteContext> for FormalContext {
    type Error = Error;

    fn try_from(ctx: IncompleteContext) -> Result<Self> {
        if let Some(i) = ctx.cells.iter().position(|c| *c == Cell::Unknown) {
            let w = ctx.attributes.len();
            return Err(Error::Incomplete {
                object: ctx.objects[i / w].clone(),
                attribute: ctx.attributes[i % w].clone(),
            });
        }
        Ok(FormalContext(ctx))
    }
}

impl Deref for FormalContext {
    type Target = IncompleteContext;
    fn deref(&self) -> &IncompleteContext {
        &self.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const ABCDE: [&str; 5] = ["a", "b", "c", "d", "e"];

    /// The Olympic example with Taekwondo partially known.
    fn fig2() -> IncompleteContext {
        IncompleteContext::from_rows(
            &ABCDE,
            &[
                ("Aquatics – Swimming", "XXXXX"),
                ("Badminton", ".XXXX"),
                ("Gymnastics – Rhythmic", "..X.X"),
                ("Taekwondo", "??XX?"),
            ],
        )
        .unwrap()
    }

    fn taekwondo(row: &str) -> IncompleteContext {
        IncompleteContext::from_rows(&ABCDE, &[("Taekwondo", row)]).unwrap()
    }

    #[test]
    fn possible_and_certain_intent() {
        let k = fig2();
        let objs = ["Taekwondo", "Badminton"];
        assert_eq!(
            k.derive(Side::Objects, &objs, Mode::Possible).unwrap(),
            vec!["b", "c", "d", "e"]
        );
        assert_eq!(
            k.derive(Side::Objects, &objs, Mode::Certain).unwrap(),
            vec!["c", "d"]
        );
    }

    #[test]
    fn empty_subset_derives_everything() {
        let k = fig2();
        let none: [&str; 0] = [];
        for mode in [Mode::Certain, Mode::Possible] {
            assert_eq!(k.derive(Side::Objects, &none, mode).unwrap(), ABCDE.to_vec());
            assert_eq!(k.derive(Side::Attributes, &none, mode).unwrap(), k.objects().to_vec());
        }
    }

    #[test]
    fn derive_rejects_unknown_names() {
        let k = fig2();
        assert_eq!(
            k.derive(Side::Objects, &["Curling"], Mode::Certain),
            Err(Error::UnknownObject("Curling".into()))
        );
        assert_eq!(
            k.derive(Side::Attributes, &["z"], Mode::Possible),
            Err(Error::UnknownAttribute("z".into()))
        );
    }

    #[test]
    fn restriction() {
        let k = fig2();
        let one = k.restrict(&["Taekwondo"]).unwrap();
        assert_eq!(one.object_count(), 1);
        assert_eq!(one.row_string(0), "??XX?");
        assert_eq!(k.restrict(k.objects()).unwrap(), k);
        let none: [&str; 0] = [];
        let zero = k.restrict(&none).unwrap();
        assert_eq!(zero.object_count(), 0);
        assert_eq!(zero.attributes(), k.attributes());
        assert!(k.restrict(&["Curling"]).is_err());
    }

    #[test]
    fn information_order_example() {
        let k1 = taekwondo("??X??");
        let k2 = taekwondo("??XX?");
        let k3 = taekwondo(".XX??");
        let k4 = taekwondo(".XXX?");
        assert!(k1.info_leq(&k4).unwrap());
        assert!(!k2.info_leq(&k3).unwrap());
        assert!(!k3.info_leq(&k2).unwrap());
        assert!(k2.info_leq(&k2).unwrap());
        assert_eq!(k2.meet(&k3).unwrap(), k1);
        assert_eq!(k2.join(&k3).unwrap(), k4);
    }

    #[test]
    fn info_leq_requires_same_attributes() {
        let a = taekwondo("??X??");
        let b = IncompleteContext::from_rows(&["a", "b"], &[("Taekwondo", "??")]).unwrap();
        assert_eq!(a.info_leq(&b), Err(Error::IncompatibleContexts));
        assert_eq!(a.conflicts(&b), Err(Error::IncompatibleContexts));
    }

    #[test]
    fn conflicts_between_rows() {
        assert!(taekwondo("??XX?")
            .conflicts(&taekwondo(".XX??"))
            .unwrap()
            .is_empty());
        let c = taekwondo("??X??").conflicts(&taekwondo("??.??")).unwrap();
        assert_eq!(
            c,
            vec![ConflictCell {
                object: "Taekwondo".into(),
                attribute: "c".into()
            }]
        );
        let other = IncompleteContext::from_rows(&ABCDE, &[("Judo", "..X..")]).unwrap();
        assert!(taekwondo("XXXXX").conflicts(&other).unwrap().is_empty());
    }

    #[test]
    fn join_of_disjoint_experts() {
        let k3 = IncompleteContext::from_rows(&["a", "b"], &[("Aquatics – Swimming", "XX")]).unwrap();
        let k4 = IncompleteContext::from_rows(&["a", "b"], &[("Badminton", ".X")]).unwrap();
        let j = k3.join(&k4).unwrap();
        assert_eq!(j.objects(), ["Aquatics – Swimming", "Badminton"]);
        assert_eq!(j.row_string(0), "XX");
        assert_eq!(j.row_string(1), ".X");
    }

    #[test]
    fn join_conflict_is_an_error() {
        let err = taekwondo("X????").join(&taekwondo(".????")).unwrap_err();
        assert!(matches!(err, Error::Conflict(ref c) if c.len() == 1));
    }

    #[test]
    fn meet_of_disjoint_is_empty() {
        let a = taekwondo("XXXXX");
        let b = IncompleteContext::from_rows(&ABCDE, &[("Judo", "XXXXX")]).unwrap();
        assert_eq!(a.meet(&b).unwrap().object_count(), 0);
        assert_eq!(a.meet(&a).unwrap(), a);
    }

    #[test]
    fn completions_counts() {
        let k = fig2();
        let all: Vec<_> = k.completions(DEFAULT_COMPLETION_BOUND).unwrap().collect();
        assert_eq!(all.len(), 8);
        for c in &all {
            assert!(k.info_leq(c).unwrap());
            assert!(c.is_complete());
        }
        // First completion sets every unknown to blank, last to cross.
        assert_eq!(all[0].row_string(3), "..XX.");
        assert_eq!(all[7].row_string(3), "XXXXX");
        assert_eq!(all[1].row_string(3), "..XXX");

        let complete = k.restrict(&["Badminton"]).unwrap();
        let only: Vec<_> = complete.completions(0).unwrap().collect();
        assert_eq!(only.len(), 1);
        assert_eq!(*only[0], complete);

        let one = taekwondo("XXXX?");
        assert_eq!(one.completions(1).unwrap().count(), 2);
        assert!(matches!(k.completions(2), Err(Error::Capacity { .. })));
    }

    #[test]
    fn box_diamond_matches_derivations() {
        let k = fig2();
        let b = k.resolve_attributes(&["b"]).unwrap();
        let ext = k.certain_extent(b);
        assert_eq!(ext, vec![0, 1]);
        assert_eq!(k.box_diamond(b), k.possible_intent(&ext));
        assert_eq!(k.attribute_names(k.box_diamond(b)), vec!["b", "c", "d", "e"]);
    }

    #[test]
    fn formal_context_rejects_unknowns() {
        assert!(FormalContext::try_from(fig2()).is_err());
        let ok = FormalContext::try_from(fig2().restrict(&["Badminton"]).unwrap()).unwrap();
        assert_eq!(ok.intent(&[0]), ok.resolve_attributes(&["b", "c", "d", "e"]).unwrap());
    }

    #[test]
    fn duplicate_names_rejected() {
        let err = IncompleteContext::from_rows(&["a", "a"], &[]).unwrap_err();
        assert!(matches!(err, Error::Duplicate { kind: "attribute", .. }));
        let err = IncompleteContext::from_rows(&["a"], &[("g", "X"), ("g", ".")]).unwrap_err();
        assert!(matches!(err, Error::Duplicate { kind: "object", .. }));
    }

    #[test]
    fn reorder_columns() {
        let k = fig2();
        let r = k.reorder_attributes(&["e", "d", "c", "b", "a"]).unwrap();
        assert_eq!(r.row_string(3), "?XX??");
        assert_eq!(r.row_string(1), "XXXX.");
        assert!(k.reorder_attributes(&["a", "b"]).is_err());
    }
}
