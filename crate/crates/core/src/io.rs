//! Instance file formats.
//!
//! Text grammar (`#` starts a comment, blank lines are ignored, tokens are whitespace separated):
//!
//! ```text
//! n m c                      header: vertices, edges, parts
//! u v w                      m edge lines, 0-based ids, w >= 0
//! size k id_1 .. id_size     c part lines: part size, budget, members
//! matroid uniform k          optional matroid section, one of:
//! matroid partition p        + p lines `size cap id_1 .. id_size`
//! matroid graphic            + n lines `a b` (ground element v is the edge a-b)
//! matroid explicit t         + t lines `size id_1 .. id_size` (maximal independent sets)
//! ```
//!
//! The JSON mirror is the serde form of [`InstanceFile`]. A three-dimensional matching file
//! holds lines `x y z` with an optional leading `size q` line (otherwise `q` is one more than
//! the largest element).

use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::forge::ThreeDMInstance;
use crate::graph::{ConstrainedInstance, VertexSet, WeightedGraph};
use crate::matroid::Matroid;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InstanceFile {
    pub instance: ConstrainedInstance,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matroid: Option<Matroid>,
}

impl InstanceFile {
    pub fn new(instance: ConstrainedInstance) -> Self {
        InstanceFile { instance, matroid: None }
    }

    /// Same instance with weights rescaled to sum to one.
    pub fn normalized(&self) -> Result<Self> {
        Ok(InstanceFile {
            instance: self.instance.with_graph(self.instance.graph().normalize())?,
            matroid: self.matroid.clone(),
        })
    }
}

struct Token<'a> {
    text: &'a str,
    column: usize,
}

struct Line<'a> {
    number: usize,
    tokens: Vec<Token<'a>>,
}

impl Line<'_> {
    fn err(&self, column: usize, message: impl Into<String>) -> Error {
        Error::Parse { line: self.number, column, message: message.into() }
    }

    fn expect_len(&self, len: usize, what: &str) -> Result<()> {
        if self.tokens.len() != len {
            let column = self.tokens.get(len).map_or(self.end_column(), |t| t.column);
            return Err(self.err(column, format!("{what}: expected {len} fields, found {}", self.tokens.len())));
        }
        Ok(())
    }

    fn end_column(&self) -> usize {
        self.tokens.last().map_or(1, |t| t.column + t.text.chars().count())
    }

    fn field<T: FromStr>(&self, idx: usize, what: &str) -> Result<T> {
        let tok = self
            .tokens
            .get(idx)
            .ok_or_else(|| self.err(self.end_column(), format!("missing {what}")))?;
        tok.text
            .parse()
            .map_err(|_| self.err(tok.column, format!("invalid {what} `{}`", tok.text)))
    }

    /// `size` followed by `size` ids starting at field `from`; checks the count.
    fn id_list(&self, from: usize, size: usize, n: usize) -> Result<Vec<usize>> {
        self.expect_len(from + size, "id list")?;
        (from..from + size)
            .map(|i| {
                let v: usize = self.field(i, "vertex id")?;
                if v >= n {
                    return Err(self.err(self.tokens[i].column, format!("vertex id {v} out of range for n = {n}")));
                }
                Ok(v)
            })
            .collect()
    }
}

fn lines(text: &str) -> Vec<Line<'_>> {
    text.lines()
        .enumerate()
        .filter_map(|(i, raw)| {
            let body = raw.split('#').next().unwrap_or("");
            let mut tokens = Vec::new();
            let mut start = None;
            for (col, (bi, ch)) in body.char_indices().enumerate() {
                match (ch.is_whitespace(), start) {
                    (false, None) => start = Some((bi, col)),
                    (true, Some((b0, c0))) => {
                        tokens.push(Token { text: &body[b0..bi], column: c0 + 1 });
                        start = None;
                    }
                    _ => {}
                }
            }
            if let Some((b0, c0)) = start {
                tokens.push(Token { text: &body[b0..], column: c0 + 1 });
            }
            (!tokens.is_empty()).then_some(Line { number: i + 1, tokens })
        })
        .collect()
}

struct Cursor<'b, 'a> {
    lines: &'b [Line<'a>],
    pos: usize,
    last_line: usize,
}

impl<'b, 'a> Cursor<'b, 'a> {
    fn next(&mut self, what: &str) -> Result<&'b Line<'a>> {
        let line = self.lines.get(self.pos).ok_or_else(|| Error::Parse {
            line: self.last_line + 1,
            column: 1,
            message: format!("unexpected end of input, expected {what}"),
        })?;
        self.pos += 1;
        Ok(line)
    }
}

pub fn parse_instance(text: &str) -> Result<InstanceFile> {
    let all = lines(text);
    let mut cur = Cursor { last_line: text.lines().count(), lines: &all, pos: 0 };
    let header = cur.next("header `n m c`")?;
    header.expect_len(3, "header `n m c`")?;
    let n: usize = header.field(0, "vertex count")?;
    let m: usize = header.field(1, "edge count")?;
    let c: usize = header.field(2, "part count")?;
    let header_no = header.number;

    let mut edges = Vec::with_capacity(m);
    for _ in 0..m {
        let line = cur.next("edge line `u v w`")?;
        line.expect_len(3, "edge line `u v w`")?;
        let u: usize = line.field(0, "endpoint")?;
        let v: usize = line.field(1, "endpoint")?;
        let w: f64 = line.field(2, "weight")?;
        for (idx, x) in [(0, u), (1, v)] {
            if x >= n {
                return Err(line.err(line.tokens[idx].column, format!("endpoint {x} out of range for n = {n}")));
            }
        }
        if u == v {
            return Err(line.err(line.tokens[1].column, "self loop"));
        }
        if !(w.is_finite() && w >= 0.0) {
            return Err(line.err(line.tokens[2].column, format!("weight {w} must be finite and nonnegative")));
        }
        edges.push((u, v, w));
    }
    let graph = WeightedGraph::new(n, edges)?;

    let mut parts = Vec::with_capacity(c);
    let mut budgets = Vec::with_capacity(c);
    for _ in 0..c {
        let line = cur.next("part line `size k ids...`")?;
        let size: usize = line.field(0, "part size")?;
        let k: usize = line.field(1, "budget")?;
        parts.push(VertexSet::from(line.id_list(2, size, n)?));
        budgets.push(k);
    }
    let instance = ConstrainedInstance::new(graph, parts, budgets).map_err(|e| Error::Parse {
        line: header_no,
        column: 1,
        message: e.to_string(),
    })?;

    let matroid = match cur.lines.get(cur.pos) {
        None => None,
        Some(_) => Some(parse_matroid(&mut cur, n)?),
    };
    if let Some(extra) = cur.lines.get(cur.pos) {
        return Err(extra.err(extra.tokens[0].column, "unexpected trailing content"));
    }
    Ok(InstanceFile { instance, matroid })
}

fn parse_matroid(cur: &mut Cursor<'_, '_>, n: usize) -> Result<Matroid> {
    let head = cur.next("matroid section")?;
    if head.tokens[0].text != "matroid" {
        return Err(head.err(head.tokens[0].column, format!("expected `matroid`, found `{}`", head.tokens[0].text)));
    }
    let kind = head
        .tokens
        .get(1)
        .ok_or_else(|| head.err(head.end_column(), "missing matroid kind"))?;
    let wrap = |line: usize, column: usize, e: Error| Error::Parse { line, column, message: e.to_string() };
    let (head_no, kind_col) = (head.number, kind.column);
    match kind.text {
        "uniform" => {
            head.expect_len(3, "`matroid uniform k`")?;
            let k: usize = head.field(2, "rank")?;
            Matroid::uniform(n, k).map_err(|e| wrap(head_no, kind_col, e))
        }
        "partition" => {
            head.expect_len(3, "`matroid partition p`")?;
            let p: usize = head.field(2, "block count")?;
            let mut parts = Vec::with_capacity(p);
            let mut caps = Vec::with_capacity(p);
            for _ in 0..p {
                let line = cur.next("partition block `size cap ids...`")?;
                let size: usize = line.field(0, "block size")?;
                caps.push(line.field(1, "capacity")?);
                parts.push(VertexSet::from(line.id_list(2, size, n)?));
            }
            Matroid::partition(parts, caps).map_err(|e| wrap(head_no, kind_col, e))
        }
        "graphic" => {
            head.expect_len(2, "`matroid graphic`")?;
            let mut ends = Vec::with_capacity(n);
            for _ in 0..n {
                let line = cur.next("graphic element `a b`")?;
                line.expect_len(2, "graphic element `a b`")?;
                ends.push((line.field(0, "node")?, line.field(1, "node")?));
            }
            Ok(Matroid::graphic(ends))
        }
        "explicit" => {
            head.expect_len(3, "`matroid explicit t`")?;
            let t: usize = head.field(2, "set count")?;
            let mut sets = Vec::with_capacity(t);
            for _ in 0..t {
                let line = cur.next("independent set `size ids...`")?;
                let size: usize = line.field(0, "set size")?;
                sets.push(VertexSet::from(line.id_list(1, size, n)?));
            }
            Matroid::explicit(n, sets).map_err(|e| wrap(head_no, kind_col, e))
        }
        other => Err(head.err(kind_col, format!("unknown matroid kind `{other}`"))),
    }
}

fn ids(s: &VertexSet) -> String {
    s.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(" ")
}

pub fn format_instance(file: &InstanceFile) -> String {
    let inst = &file.instance;
    let g = inst.graph();
    let mut out = format!("{} {} {}\n", g.n(), g.edges().len(), inst.num_parts());
    for e in g.edges() {
        out += &format!("{} {} {}\n", e.u, e.v, e.w);
    }
    for (p, k) in inst.parts().iter().zip(inst.budgets()) {
        out += &format!("{} {} {}\n", p.len(), k, ids(p));
    }
    match &file.matroid {
        None => {}
        Some(Matroid::Uniform { k, .. }) => out += &format!("matroid uniform {k}\n"),
        Some(Matroid::Partition { parts, capacities }) => {
            out += &format!("matroid partition {}\n", parts.len());
            for (p, k) in parts.iter().zip(capacities) {
                out += &format!("{} {} {}\n", p.len(), k, ids(p));
            }
        }
        Some(Matroid::Graphic { ends }) => {
            out += "matroid graphic\n";
            for (a, b) in ends {
                out += &format!("{a} {b}\n");
            }
        }
        Some(Matroid::Explicit { sets, .. }) => {
            out += &format!("matroid explicit {}\n", sets.len());
            for s in sets {
                out += &format!("{} {}\n", s.len(), ids(s));
            }
        }
    }
    out.lines().map(str::trim_end).collect::<Vec<_>>().join("\n") + "\n"
}

/// Reads either format: `.json` files (or text starting with `{`) as JSON, anything else as text.
pub fn read_instance(path: &Path) -> Result<InstanceFile> {
    let text = std::fs::read_to_string(path)?;
    let is_json = path.extension().is_some_and(|e| e == "json") || text.trim_start().starts_with('{');
    if is_json {
        serde_json::from_str(&text).map_err(|e| Error::Parse {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })
    } else {
        parse_instance(&text)
    }
}

pub fn write_instance(path: &Path, file: &InstanceFile) -> Result<()> {
    let text = if path.extension().is_some_and(|e| e == "json") {
        serde_json::to_string_pretty(file)? + "\n"
    } else {
        format_instance(file)
    };
    std::fs::write(path, text)?;
    Ok(())
}

pub fn parse_3dm(text: &str) -> Result<ThreeDMInstance> {
    let mut size = None;
    let mut triples = Vec::new();
    let mut largest = None::<usize>;
    for line in lines(text) {
        if line.tokens[0].text == "size" {
            if size.is_some() || !triples.is_empty() {
                return Err(line.err(1, "`size` must come once, before the triples"));
            }
            line.expect_len(2, "`size q`")?;
            size = Some(line.field::<usize>(1, "size")?);
            continue;
        }
        line.expect_len(3, "triple `x y z`")?;
        let t: (usize, usize, usize) = (line.field(0, "x")?, line.field(1, "y")?, line.field(2, "z")?);
        if let Some(q) = size {
            for (i, x) in [t.0, t.1, t.2].into_iter().enumerate() {
                if x >= q {
                    return Err(line.err(line.tokens[i].column, format!("element {x} outside 0..{q}")));
                }
            }
        }
        largest = largest.max(Some(t.0.max(t.1).max(t.2)));
        triples.push(t);
    }
    let size = size.unwrap_or(largest.map_or(0, |l| l + 1));
    ThreeDMInstance::new(size, triples)
}

pub fn format_3dm(tdm: &ThreeDMInstance) -> String {
    let mut out = format!("size {}\n", tdm.size);
    for (x, y, z) in &tdm.triples {
        out += &format!("{x} {y} {z}\n");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const K3: &str = "# triangle, pick one\n3 3 1\n0 1 1\n1 2 1\n0 2 1\n3 1 0 1 2\n";

    #[test]
    fn parses_text() {
        let f = parse_instance(K3).unwrap();
        assert_eq!(f.instance.graph().n(), 3);
        assert_eq!(f.instance.budgets(), &[1]);
        assert!(f.matroid.is_none());
        let back = parse_instance(&format_instance(&f)).unwrap();
        assert_eq!(back, f);
    }

    #[test]
    fn parses_matroid_sections() {
        let base = "4 2 1\n0 1 1\n2 3 1\n4 2 0 1 2 3\n";
        for section in [
            "matroid uniform 2\n",
            "matroid partition 2\n2 1 0 1\n2 1 2 3\n",
            "matroid graphic\n0 1\n1 2\n2 0\n2 3\n",
            "matroid explicit 2\n2 0 2\n2 1 3\n",
        ] {
            let f = parse_instance(&format!("{base}{section}")).unwrap();
            assert!(f.matroid.is_some());
            assert_eq!(parse_instance(&format_instance(&f)).unwrap(), f);
            let json = serde_json::to_string(&f).unwrap();
            assert_eq!(serde_json::from_str::<InstanceFile>(&json).unwrap(), f);
        }
    }

    #[test]
    fn reports_positions() {
        let bad = "3 3 1\n0 1 1\n1 x 1\n0 2 1\n3 1 0 1 2\n";
        match parse_instance(bad) {
            Err(Error::Parse { line, column, .. }) => assert_eq!((line, column), (3, 3)),
            other => panic!("{other:?}"),
        }
        match parse_instance("3 3 1\n0 1 1\n") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
        match parse_instance("2 1 1\n0 5 1\n2 1 0 1\n") {
            Err(Error::Parse { line, column, .. }) => assert_eq!((line, column), (2, 3)),
            other => panic!("{other:?}"),
        }
        assert!(matches!(parse_instance("2 0 1\n2 1 0 1\nmatroid weird\n"), Err(Error::Parse { line: 3, column: 9, .. })));
    }

    #[test]
    fn three_dm_files() {
        let t = parse_3dm("# two triples\n0 0 0\n1 1 1\n").unwrap();
        assert_eq!(t.size, 2);
        assert_eq!(parse_3dm(&format_3dm(&t)).unwrap(), t);
        assert!(parse_3dm("size 1\n0 0 1\n").is_err());
    }
}
