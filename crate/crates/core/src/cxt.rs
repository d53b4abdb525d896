//! Burmeister CXT files ("B3" variant with `?` for unknown cells) and the
//! JSON context form.

use serde::{Deserialize, Serialize};

use crate::cell::Cell;
use crate::context::IncompleteContext;
use crate::error::{Error, Result};

/// Parses CXT text. Line and column numbers in errors are 1-based.
///
/// A single trailing newline is accepted; CR characters are rejected so that
/// round-trips stay byte-exact.
pub fn parse(text: &str) -> Result<IncompleteContext> {
    let body = text.strip_suffix('\n').unwrap_or(text);
    let lines: Vec<&str> = if body.is_empty() && text.is_empty() {
        Vec::new()
    } else {
        body.split('\n').collect()
    };
    if let Some((i, l)) = lines.iter().enumerate().find(|(_, l)| l.contains('\r')) {
        return Err(Error::parse(i + 1, l.find('\r').unwrap() + 1, "CR line ending"));
    }
    let get = |i: usize, what: &str| -> Result<&str> {
        lines
            .get(i)
            .copied()
            .ok_or_else(|| Error::parse(i + 1, 1, format!("unexpected end of file, expected {what}")))
    };
    if get(0, "magic `B3`")? != "B3" {
        return Err(Error::parse(1, 1, "expected magic `B3`"));
    }
    let name = get(1, "context name")?.to_owned();
    let count = |i: usize, what: &str| -> Result<usize> {
        let l = get(i, what)?;
        l.parse::<usize>()
            .map_err(|_| Error::parse(i + 1, 1, format!("expected {what}, found `{l}`")))
    };
    let g = count(2, "object count")?;
    let m = count(3, "attribute count")?;
    let mut at = 4;
    let mut objects = Vec::with_capacity(g);
    for _ in 0..g {
        objects.push(get(at, "object name")?.to_owned());
        at += 1;
    }
    let mut attributes = Vec::with_capacity(m);
    for _ in 0..m {
        attributes.push(get(at, "attribute name")?.to_owned());
        at += 1;
    }
    let mut cells = Vec::with_capacity(g * m);
    for _ in 0..g {
        let line = get(at, "data row")?;
        let mut n = 0;
        for (col, ch) in line.chars().enumerate() {
            let c = Some(ch)
                .filter(|c| matches!(c, 'X' | '.' | '?'))
                .and_then(Cell::from_char)
                .ok_or_else(|| Error::parse(at + 1, col + 1, format!("invalid cell character `{ch}`")))?;
            if col >= m {
                return Err(Error::parse(at + 1, col + 1, format!("row longer than {m} cells")));
            }
            cells.push(c);
            n += 1;
        }
        if n != m {
            return Err(Error::parse(at + 1, n + 1, format!("row has {n} cells, expected {m}")));
        }
        at += 1;
    }
    if at < lines.len() {
        return Err(Error::parse(at + 1, 1, "trailing content after last data row"));
    }
    if let Some(i) = second_occurrence(&objects) {
        return Err(Error::parse(5 + i, 1, format!("duplicate object `{}`", objects[i])));
    }
    if let Some(i) = second_occurrence(&attributes) {
        return Err(Error::parse(5 + g + i, 1, format!("duplicate attribute `{}`", attributes[i])));
    }
    IncompleteContext::from_cells(name, objects, attributes, cells)
}

fn second_occurrence(names: &[String]) -> Option<usize> {
    let mut seen = std::collections::HashSet::new();
    names.iter().position(|n| !seen.insert(n.as_str()))
}

/// Writes CXT text, LF-terminated.
pub fn write(ctx: &IncompleteContext) -> String {
    let mut out = String::new();
    out.push_str("B3\n");
    out.push_str(ctx.name());
    out.push('\n');
    out.push_str(&format!("{}\n{}\n", ctx.object_count(), ctx.attribute_count()));
    for o in ctx.objects() {
        out.push_str(o);
        out.push('\n');
    }
    for a in ctx.attributes() {
        out.push_str(a);
        out.push('\n');
    }
    for g in 0..ctx.object_count() {
        out.push_str(&ctx.row_string(g));
        out.push('\n');
    }
    out
}

/// Writes a complete context; fails on the first unknown cell.
pub fn write_formal(ctx: &IncompleteContext) -> Result<String> {
    let w = ctx.attribute_count();
    if let Some(i) = ctx.cells().iter().position(|c| *c == Cell::Unknown) {
        return Err(Error::Incomplete {
            object: ctx.objects()[i / w].clone(),
            attribute: ctx.attributes()[i % w].clone(),
        });
    }
    Ok(write(ctx))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContextRowJson {
    pub name: String,
    /// One character per attribute from `X`, `.`, `?`.
    pub row: String,
}

/// JSON form of a context, used by the HTTP API and `convert`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContextJson {
    #[serde(default)]
    pub name: String,
    #[serde(default)]
    pub attributes: Vec<String>,
    #[serde(default)]
    pub objects: Vec<ContextRowJson>,
}

impl From<&IncompleteContext> for ContextJson {
    fn from(ctx: &IncompleteContext) -> Self {
        ContextJson {
            name: ctx.name().to_owned(),
            attributes: ctx.attributes().to_vec(),
            objects: (0..ctx.object_count())
                .map(|g| ContextRowJson {
                    name: ctx.objects()[g].clone(),
                    row: ctx.row_string(g),
                })
                .collect(),
        }
    }
}

impl ContextJson {
    pub fn to_context(&self) -> Result<IncompleteContext> {
        let rows: Vec<(&str, &str)> = self
            .objects
            .iter()
            .map(|r| (r.name.as_str(), r.row.as_str()))
            .collect();
        Ok(IncompleteContext::from_rows(&self.attributes, &rows)?.with_name(self.name.clone()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = "B3\nsample\n2\n3\ng1\ng 2\na\nb c\nd\nX.?\n..X\n";

    #[test]
    fn round_trip() {
        let ctx = parse(SAMPLE).unwrap();
        assert_eq!(ctx.name(), "sample");
        assert_eq!(ctx.objects(), ["g1", "g 2"]);
        assert_eq!(ctx.row_string(0), "X.?");
        assert_eq!(write(&ctx), SAMPLE);
    }

    #[test]
    fn empty_object_context() {
        let text = "B3\n\n0\n2\na\nb\n";
        let ctx = parse(text).unwrap();
        assert_eq!(ctx.object_count(), 0);
        assert_eq!(write(&ctx), text);
    }

    #[test]
    fn errors_carry_positions() {
        let bad = SAMPLE.replace("..X", "..Y");
        assert_eq!(
            parse(&bad).unwrap_err(),
            Error::Parse {
                line: 11,
                column: 3,
                message: "invalid cell character `Y`".into()
            }
        );
        assert!(matches!(parse("B2\n"), Err(Error::Parse { line: 1, .. })));
        assert!(matches!(
            parse("B3\nx\nthree\n"),
            Err(Error::Parse { line: 3, .. })
        ));
        let short = SAMPLE.replace("X.?", "X.");
        assert!(matches!(
            parse(&short),
            Err(Error::Parse { line: 10, column: 3, .. })
        ));
        let truncated = "B3\n\n1\n1\ng\na\n";
        assert!(matches!(
            parse(truncated),
            Err(Error::Parse { line: 7, .. })
        ));
        assert!(matches!(
            parse(&SAMPLE.replace('\n', "\r\n")),
            Err(Error::Parse { .. })
        ));
    }

    #[test]
    fn formal_output_refuses_unknowns() {
        let ctx = parse(SAMPLE).unwrap();
        assert!(matches!(write_formal(&ctx), Err(Error::Incomplete { .. })));
        let complete = ctx.restrict(&["g 2"]).unwrap();
        assert!(write_formal(&complete).is_ok());
    }

    #[test]
    fn json_round_trip() {
        let ctx = parse(SAMPLE).unwrap();
        let json = serde_json::to_string(&ContextJson::from(&ctx)).unwrap();
        let back: ContextJson = serde_json::from_str(&json).unwrap();
        assert_eq!(back.to_context().unwrap(), ctx);
    }
}
