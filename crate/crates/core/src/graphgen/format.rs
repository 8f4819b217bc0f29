//! Text format for geometric graphs.
//!
//! ```text
//! geograph v1 <kind> <side> <n> <m>
//! <id> <x> <y>        (n lines, ids 0..n in order)
//! <u> <v>             (m lines, u < v)
//! ```
//!
//! Reals are written in scientific notation with 17 significant digits, which
//! round-trips every `f64` exactly.

use std::fmt;
use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use thiserror::Error;

use crate::geometry::{GroundSpace, Point, SpaceKind};
use crate::graph::{GeometricGraph, GraphError};

const MAGIC: &str = "geograph";
const VERSION: &str = "v1";

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParseErrorKind {
    MalformedHeader(String),
    MalformedVertex(String),
    MalformedEdge(String),
    CoordinateOutOfRange,
    DuplicateEdge(usize, usize),
    DanglingEndpoint(usize),
    SelfLoop(usize),
    UnexpectedEof,
    TrailingData,
}

impl fmt::Display for ParseErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParseErrorKind::MalformedHeader(why) => write!(f, "malformed header: {why}"),
            ParseErrorKind::MalformedVertex(why) => write!(f, "malformed vertex line: {why}"),
            ParseErrorKind::MalformedEdge(why) => write!(f, "malformed edge line: {why}"),
            ParseErrorKind::CoordinateOutOfRange => f.write_str("coordinate out of range"),
            ParseErrorKind::DuplicateEdge(u, v) => write!(f, "duplicate edge {u}-{v}"),
            ParseErrorKind::DanglingEndpoint(v) => write!(f, "edge endpoint {v} is not a vertex"),
            ParseErrorKind::SelfLoop(v) => write!(f, "self-loop at {v}"),
            ParseErrorKind::UnexpectedEof => f.write_str("unexpected end of file"),
            ParseErrorKind::TrailingData => f.write_str("data after the last edge"),
        }
    }
}

#[derive(Debug, Error)]
pub enum ParseError {
    #[error("line {line}: {kind}")]
    Syntax { line: usize, kind: ParseErrorKind },
    #[error(transparent)]
    Io(#[from] io::Error),
}

impl ParseError {
    pub fn kind(&self) -> Option<&ParseErrorKind> {
        match self {
            ParseError::Syntax { kind, .. } => Some(kind),
            ParseError::Io(_) => None,
        }
    }

    pub fn line(&self) -> Option<usize> {
        match self {
            ParseError::Syntax { line, .. } => Some(*line),
            ParseError::Io(_) => None,
        }
    }
}

fn real(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn write_graph_to<W: Write>(g: &GeometricGraph, mut out: W) -> io::Result<()> {
    writeln!(out, "{MAGIC} {VERSION} {} {} {} {}", g.space().kind(), real(g.space().side()), g.n(), g.m())?;
    for (i, p) in g.coords().iter().enumerate() {
        writeln!(out, "{i} {} {}", real(p.x), real(p.y))?;
    }
    for (u, v) in g.edges() {
        writeln!(out, "{u} {v}")?;
    }
    out.flush()
}

pub fn write_graph(g: &GeometricGraph, path: impl AsRef<Path>) -> io::Result<()> {
    write_graph_to(g, BufWriter::new(File::create(path)?))
}

pub fn read_graph(path: impl AsRef<Path>) -> Result<GeometricGraph, ParseError> {
    read_graph_from(BufReader::new(File::open(path)?))
}

struct Lines<R> {
    inner: io::Lines<R>,
    line: usize,
}

impl<R: BufRead> Lines<R> {
    fn next_line(&mut self) -> Result<Option<String>, ParseError> {
        for l in self.inner.by_ref() {
            self.line += 1;
            let l = l?;
            if !l.trim().is_empty() {
                return Ok(Some(l));
            }
        }
        Ok(None)
    }

    fn expect(&mut self) -> Result<String, ParseError> {
        self.next_line()?.ok_or(ParseError::Syntax { line: self.line + 1, kind: ParseErrorKind::UnexpectedEof })
    }

    fn err(&self, kind: ParseErrorKind) -> ParseError {
        ParseError::Syntax { line: self.line, kind }
    }
}

pub fn read_graph_from<R: BufRead>(reader: R) -> Result<GeometricGraph, ParseError> {
    let mut lines = Lines { inner: reader.lines(), line: 0 };
    let header = lines.expect()?;
    let bad_header = |why: &str| ParseErrorKind::MalformedHeader(why.to_owned());
    let fields: Vec<&str> = header.split_whitespace().collect();
    if fields.len() != 6 || fields[0] != MAGIC || fields[1] != VERSION {
        return Err(lines.err(bad_header("expected `geograph v1 <kind> <side> <n> <m>`")));
    }
    let kind: SpaceKind = fields[2].parse().map_err(|e: String| lines.err(ParseErrorKind::MalformedHeader(e)))?;
    let side: f64 = fields[3].parse().map_err(|_| lines.err(bad_header("side is not a number")))?;
    let n: usize = fields[4].parse().map_err(|_| lines.err(bad_header("n is not an integer")))?;
    let m: usize = fields[5].parse().map_err(|_| lines.err(bad_header("m is not an integer")))?;
    let space = GroundSpace::new(kind, side).map_err(|e| lines.err(ParseErrorKind::MalformedHeader(e.to_string())))?;

    let mut coords = Vec::with_capacity(n);
    for i in 0..n {
        let l = lines.expect()?;
        let f: Vec<&str> = l.split_whitespace().collect();
        let bad = |why: String| ParseErrorKind::MalformedVertex(why);
        if f.len() != 3 {
            return Err(lines.err(bad("expected `<id> <x> <y>`".into())));
        }
        if f[0].parse::<usize>().ok() != Some(i) {
            return Err(lines.err(bad(format!("expected vertex id {i}, got `{}`", f[0]))));
        }
        let x: f64 = f[1].parse().map_err(|_| lines.err(bad(format!("bad x `{}`", f[1]))))?;
        let y: f64 = f[2].parse().map_err(|_| lines.err(bad(format!("bad y `{}`", f[2]))))?;
        let p = Point::new(x, y);
        if !space.contains(p) {
            return Err(lines.err(ParseErrorKind::CoordinateOutOfRange));
        }
        coords.push(p);
    }

    let mut edges = Vec::with_capacity(m);
    let mut seen = std::collections::HashSet::with_capacity(m);
    for _ in 0..m {
        let l = lines.expect()?;
        let f: Vec<&str> = l.split_whitespace().collect();
        let parse = |s: &str| s.parse::<usize>().ok();
        let (u, v) = match f.as_slice() {
            [a, b] => match (parse(a), parse(b)) {
                (Some(u), Some(v)) => (u, v),
                _ => return Err(lines.err(ParseErrorKind::MalformedEdge(l.clone()))),
            },
            _ => return Err(lines.err(ParseErrorKind::MalformedEdge(l.clone()))),
        };
        for w in [u, v] {
            if w >= n {
                return Err(lines.err(ParseErrorKind::DanglingEndpoint(w)));
            }
        }
        if u == v {
            return Err(lines.err(ParseErrorKind::SelfLoop(u)));
        }
        let key = (u.min(v), u.max(v));
        if !seen.insert(key) {
            return Err(lines.err(ParseErrorKind::DuplicateEdge(key.0, key.1)));
        }
        edges.push((u, v));
    }
    if lines.next_line()?.is_some() {
        return Err(lines.err(ParseErrorKind::TrailingData));
    }
    GeometricGraph::from_edges(space, coords, &edges, None).map_err(|e| match e {
        GraphError::Geometry(_) => lines.err(ParseErrorKind::CoordinateOutOfRange),
        other => lines.err(ParseErrorKind::MalformedEdge(other.to_string())),
    })
}
