//! Plain-text formats shared by the command-line tool and the tests.
//!
//! Blank lines and lines starting with `#` are ignored everywhere.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::str::FromStr;

use num_rational::BigRational;
use thiserror::Error;

use crate::complex::Complex2;
use crate::contraction::{ContractionStep, ReductionSchedule};
use crate::placement::{LocationSet, PlacementCertificate};
use crate::rigidity::{Framework, Graph, MotionWitness};
use crate::Vertex;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("unexpected end of input: {0}")]
    Truncated(String),
    #[error("{0}")]
    Invalid(String),
}

type Lines<'a> = std::iter::Peekable<std::vec::IntoIter<(usize, Vec<&'a str>)>>;

fn lines(text: &str) -> Lines<'_> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
        .map(|(i, l)| (i, l.split_whitespace().collect()))
        .collect::<Vec<_>>()
        .into_iter()
        .peekable()
}

fn num<T: FromStr>(line: usize, tok: &str) -> Result<T, ParseError> {
    tok.parse().map_err(|_| ParseError::Syntax { line, msg: format!("bad number {tok:?}") })
}

fn fixed<T: FromStr>(line: usize, toks: &[&str], n: usize) -> Result<Vec<T>, ParseError> {
    if toks.len() != n {
        return Err(ParseError::Syntax { line, msg: format!("expected {n} fields, got {}", toks.len()) });
    }
    toks.iter().map(|t| num(line, t)).collect()
}

fn header(it: &mut Lines, what: &str) -> Result<(usize, usize, usize), ParseError> {
    let (line, toks) = it.next().ok_or_else(|| ParseError::Truncated(format!("{what} header")))?;
    let v: Vec<usize> = fixed(line, &toks, 2)?;
    Ok((line, v[0], v[1]))
}

fn take_rows(it: &mut Lines, rows: usize, width: usize, what: &str) -> Result<Vec<Vec<Vertex>>, ParseError> {
    (0..rows)
        .map(|_| {
            let (line, toks) = it.next().ok_or_else(|| ParseError::Truncated(what.to_string()))?;
            fixed(line, &toks, width)
        })
        .collect()
}

fn read_triangulation(it: &mut Lines) -> Result<Complex2, ParseError> {
    let (line, nv, nt) = header(it, "triangulation")?;
    let rows = take_rows(it, nt, 3, "triangle list")?;
    let c = Complex2::new(rows.into_iter().map(|r| [r[0], r[1], r[2]])).map_err(|e| ParseError::Invalid(e.to_string()))?;
    if c.num_vertices() != nv {
        return Err(ParseError::Syntax { line, msg: format!("header says {nv} vertices, triangles use {}", c.num_vertices()) });
    }
    Ok(c)
}

/// `nv nt`, then `nt` lines `i j k`.
pub fn parse_triangulation(text: &str) -> Result<Complex2, ParseError> {
    let mut it = lines(text);
    let c = read_triangulation(&mut it)?;
    expect_end(&mut it)?;
    Ok(c)
}

pub fn write_triangulation(c: &Complex2) -> String {
    let mut s = format!("{} {}\n", c.num_vertices(), c.triangles().len());
    for [a, b, d] in c.triangles() {
        writeln!(s, "{a} {b} {d}").unwrap();
    }
    s
}

/// `nv ne`, then `ne` lines `i j`. Vertices are the edge endpoints.
pub fn parse_graph(text: &str) -> Result<Graph, ParseError> {
    let mut it = lines(text);
    let g = read_graph(&mut it)?;
    expect_end(&mut it)?;
    Ok(g)
}

fn read_graph(it: &mut Lines) -> Result<Graph, ParseError> {
    let (line, nv, ne) = header(it, "graph")?;
    let rows = take_rows(it, ne, 2, "edge list")?;
    let mut vs: Vec<Vertex> = rows.iter().flatten().copied().collect();
    vs.sort_unstable();
    vs.dedup();
    if vs.len() != nv {
        return Err(ParseError::Syntax { line, msg: format!("header says {nv} vertices, edges use {}", vs.len()) });
    }
    Graph::new(vs, rows.into_iter().map(|r| (r[0], r[1]))).map_err(|e| ParseError::Invalid(e.to_string()))
}

pub fn write_graph(g: &Graph) -> String {
    let mut s = format!("{} {}\n", g.num_vertices(), g.edges().len());
    for [a, b] in g.edges() {
        writeln!(s, "{a} {b}").unwrap();
    }
    s
}

/// Either structure format; the width of the first row decides which.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Structure {
    Triangulation(Complex2),
    Graph(Graph),
}

impl Structure {
    pub fn graph(&self) -> Graph {
        match self {
            Structure::Triangulation(c) => Graph::from_complex(c),
            Structure::Graph(g) => g.clone(),
        }
    }
}

fn read_structure(it: &mut Lines) -> Result<Structure, ParseError> {
    let rows = it.clone().nth(1).map(|(_, t)| t.len());
    match rows {
        Some(3) => read_triangulation(it).map(Structure::Triangulation),
        Some(2) => read_graph(it).map(Structure::Graph),
        Some(k) => Err(ParseError::Invalid(format!("rows of width {k} are neither edges nor triangles"))),
        None => Err(ParseError::Truncated("structure".into())),
    }
}

pub fn parse_structure(text: &str) -> Result<Structure, ParseError> {
    let mut it = lines(text);
    let s = read_structure(&mut it)?;
    expect_end(&mut it)?;
    Ok(s)
}

fn read_points(it: &mut Lines) -> Result<BTreeMap<Vertex, Vec<BigRational>>, ParseError> {
    let mut out = BTreeMap::new();
    let mut dim = None;
    for (line, toks) in it {
        if toks.len() < 2 {
            return Err(ParseError::Syntax { line, msg: "expected `v x ...`".into() });
        }
        if *dim.get_or_insert(toks.len() - 1) != toks.len() - 1 {
            return Err(ParseError::Syntax { line, msg: "coordinate count changes".into() });
        }
        let v: Vertex = num(line, toks[0])?;
        let p = toks[1..].iter().map(|t| num::<BigRational>(line, t)).collect::<Result<Vec<_>, _>>()?;
        if out.insert(v, p).is_some() {
            return Err(ParseError::Syntax { line, msg: format!("vertex {v} placed twice") });
        }
    }
    Ok(out)
}

/// `v x y z` per line; coordinates are integers or `p/q`.
pub fn parse_points(text: &str) -> Result<BTreeMap<Vertex, Vec<BigRational>>, ParseError> {
    read_points(&mut lines(text))
}

pub fn write_points(points: &BTreeMap<Vertex, Vec<BigRational>>) -> String {
    let mut s = String::new();
    for (v, p) in points {
        write!(s, "{v}").unwrap();
        for x in p {
            write!(s, " {x}").unwrap();
        }
        s.push('\n');
    }
    s
}

fn framework(structure: Structure, points: BTreeMap<Vertex, Vec<BigRational>>) -> Result<Framework, ParseError> {
    let dim = points.values().next().map(Vec::len).ok_or_else(|| ParseError::Truncated("placement".into()))?;
    Framework::new(structure.graph(), dim, points).map_err(|e| ParseError::Invalid(e.to_string()))
}

/// A structure followed by its placement lines in one file.
pub fn parse_framework(text: &str) -> Result<(Structure, Framework), ParseError> {
    let mut it = lines(text);
    let s = read_structure(&mut it)?;
    let pts = read_points(&mut it)?;
    Ok((s.clone(), framework(s, pts)?))
}

pub fn framework_from_parts(structure: &str, points: &str) -> Result<(Structure, Framework), ParseError> {
    let s = parse_structure(structure)?;
    let pts = parse_points(points)?;
    Ok((s.clone(), framework(s, pts)?))
}

pub fn write_framework(s: &Structure, f: &Framework) -> String {
    let head = match s {
        Structure::Triangulation(c) => write_triangulation(c),
        Structure::Graph(g) => write_graph(g),
    };
    head + &write_points(f.placement())
}

/// `c d`, then `c` rows of `d` integers.
pub fn parse_locations(text: &str) -> Result<LocationSet, ParseError> {
    let mut it = lines(text);
    let (_, c, d) = header(&mut it, "location set")?;
    let rows = (0..c)
        .map(|_| {
            let (line, toks) = it.next().ok_or_else(|| ParseError::Truncated("location rows".into()))?;
            fixed::<i64>(line, &toks, d)
        })
        .collect::<Result<Vec<_>, _>>()?;
    expect_end(&mut it)?;
    LocationSet::new(rows, d).map_err(|e| ParseError::Invalid(e.to_string()))
}

pub fn write_locations(a: &LocationSet) -> String {
    let mut s = format!("{} {}\n", a.len(), a.dim);
    for p in &a.points {
        let row: Vec<String> = p.iter().map(i64::to_string).collect();
        writeln!(s, "{}", row.join(" ")).unwrap();
    }
    s
}

/// The `key: value` block printed after placements and by `check`/`verify`.
pub fn certificate_block(c: &PlacementCertificate) -> String {
    format!(
        "rigid: {}\nrank: {}/{}\ncondition: {} {}\nlocations_used: {} of {}\n",
        c.rigid,
        c.rank,
        c.required_rank,
        c.condition_mode,
        if c.condition_ok { "ok" } else { "violated" },
        c.locations_used,
        c.locations_total
    )
}

/// `v location_index` lines followed by the certificate block.
pub fn write_placement(assignment: &BTreeMap<Vertex, usize>, cert: &PlacementCertificate) -> String {
    let mut s = String::new();
    for (v, i) in assignment {
        writeln!(s, "{v} {i}").unwrap();
    }
    s + &certificate_block(cert)
}

/// Reads the assignment lines; the certificate block (any line with a colon) is skipped.
pub fn parse_placement(text: &str) -> Result<BTreeMap<Vertex, usize>, ParseError> {
    let mut out = BTreeMap::new();
    for (line, toks) in lines(text) {
        if toks.iter().any(|t| t.ends_with(':')) {
            continue;
        }
        let v: Vertex = num(line, toks.first().copied().unwrap_or(""))?;
        if toks.len() != 2 {
            return Err(ParseError::Syntax { line, msg: "expected `v location_index`".into() });
        }
        if out.insert(v, num(line, toks[1])?).is_some() {
            return Err(ParseError::Syntax { line, msg: format!("vertex {v} assigned twice") });
        }
    }
    Ok(out)
}

/// One `v u deg: c1 ... ck` line per step, then the base triangulation.
pub fn write_schedule(s: &ReductionSchedule) -> String {
    let mut out = String::new();
    for st in &s.steps {
        let link: Vec<String> = st.link.iter().map(|x| x.to_string()).collect();
        writeln!(out, "{} {} {}: {}", st.removed, st.target, st.degree, link.join(" ")).unwrap();
    }
    out + &write_triangulation(&s.base)
}

pub fn parse_schedule(text: &str) -> Result<ReductionSchedule, ParseError> {
    let mut it = lines(text);
    let mut steps = Vec::new();
    while let Some((line, toks)) = it.next_if(|(_, t)| t.len() >= 3 && t[2].ends_with(':')) {
        let head: Vec<usize> = fixed(line, &[toks[0], toks[1], toks[2].trim_end_matches(':')], 3)?;
        let link = toks[3..].iter().map(|t| num::<Vertex>(line, t)).collect::<Result<Vec<_>, _>>()?;
        if link.len() != head[2] {
            return Err(ParseError::Syntax { line, msg: format!("degree {} but {} link vertices", head[2], link.len()) });
        }
        steps.push(ContractionStep { removed: head[0] as Vertex, target: head[1] as Vertex, degree: head[2], link });
    }
    let base = read_triangulation(&mut it)?;
    expect_end(&mut it)?;
    Ok(ReductionSchedule { steps, base })
}

/// `violated: a b` (or `violated: none`), then `v x y z` velocity lines.
pub fn write_witness(w: &MotionWitness) -> String {
    let head = match w.violated_pair {
        Some((a, b)) => format!("violated: {a} {b}\n"),
        None => "violated: none\n".to_string(),
    };
    head + &write_points(&w.velocities)
}

pub fn parse_witness(text: &str) -> Result<MotionWitness, ParseError> {
    let mut it = lines(text);
    let (line, toks) = it.next().ok_or_else(|| ParseError::Truncated("witness".into()))?;
    let violated_pair = match toks.as_slice() {
        ["violated:", "none"] => None,
        ["violated:", a, b] => Some((num(line, a)?, num(line, b)?)),
        _ => return Err(ParseError::Syntax { line, msg: "expected `violated: a b` or `violated: none`".into() }),
    };
    Ok(MotionWitness { velocities: read_points(&mut it)?, violated_pair })
}

/// `w: g1 g2 ...` per apex.
pub fn write_apex_index(index: &BTreeMap<Vec<Vertex>, Vertex>) -> String {
    let mut s = String::new();
    for (group, w) in index {
        let g: Vec<String> = group.iter().map(|x| x.to_string()).collect();
        writeln!(s, "{w}: {}", g.join(" ")).unwrap();
    }
    s
}

pub fn parse_apex_index(text: &str) -> Result<BTreeMap<Vec<Vertex>, Vertex>, ParseError> {
    let mut out = BTreeMap::new();
    for (line, toks) in lines(text) {
        let w = toks
            .first()
            .and_then(|t| t.strip_suffix(':'))
            .ok_or_else(|| ParseError::Syntax { line, msg: "expected `w: g1 g2 ...`".into() })?;
        let w: Vertex = num(line, w)?;
        let mut group = toks[1..].iter().map(|t| num::<Vertex>(line, t)).collect::<Result<Vec<_>, _>>()?;
        group.sort_unstable();
        out.insert(group, w);
    }
    Ok(out)
}

fn expect_end(it: &mut Lines) -> Result<(), ParseError> {
    match it.next() {
        None => Ok(()),
        Some((line, _)) => Err(ParseError::Syntax { line, msg: "trailing content".into() }),
    }
}
