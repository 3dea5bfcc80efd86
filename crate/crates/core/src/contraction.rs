//! Edge contractions, vertex splits and reduction schedules on closed surfaces.

use thiserror::Error;

use crate::complex::{sort3, Complex2, ComplexError, Triangle};
use crate::Vertex;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ContractionError {
    #[error("{0} and {1} are not adjacent")]
    NotAnEdge(Vertex, Vertex),
    #[error("contracting {v} into {u} would collapse missing triangle {missing:?}")]
    LinkCondition { v: Vertex, u: Vertex, missing: Triangle },
    #[error("contraction would leave fewer than 4 vertices")]
    TooSmall,
    #[error("inconsistent split step: {0}")]
    InconsistentStep(String),
    #[error(transparent)]
    Complex(#[from] ComplexError),
}

/// One contraction of `removed` into `target`, with enough data to undo it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContractionStep {
    pub removed: Vertex,
    pub target: Vertex,
    /// Link of `removed` in cyclic order, rotated to start at `target`.
    pub link: Vec<Vertex>,
    pub degree: usize,
}

/// Contractions in the order applied, and what was left.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReductionSchedule {
    pub steps: Vec<ContractionStep>,
    pub base: Complex2,
}

impl ReductionSchedule {
    /// Rebuilds the original complex by splitting in reverse order.
    pub fn replay(&self) -> Result<Complex2, ContractionError> {
        let mut c = self.base.clone();
        for step in self.steps.iter().rev() {
            c = vertex_split(&c, step)?;
        }
        Ok(c)
    }
}

/// `Ok` iff `u` and `v` have exactly the two common neighbors spanning the
/// triangles on `uv`; otherwise returns a missing triangle through `uv`.
pub fn link_condition(c: &Complex2, v: Vertex, u: Vertex) -> Result<(), ContractionError> {
    if !c.has_edge(u, v) {
        return Err(ContractionError::NotAnEdge(v, u));
    }
    let nu = c.neighbors(u);
    for &w in c.neighbors(v) {
        if w != u && nu.binary_search(&w).is_ok() && !c.has_triangle([u, v, w]) {
            return Err(ContractionError::LinkCondition { v, u, missing: sort3([u, v, w]) });
        }
    }
    if c.num_vertices() <= 4 {
        return Err(ContractionError::TooSmall);
    }
    Ok(())
}

/// Smallest vertex of degree at most `max_degree` with a contractible edge,
/// paired with its smallest valid neighbor.
pub fn find_reducible_vertex(c: &Complex2, max_degree: usize) -> Option<(Vertex, Vertex)> {
    if c.num_vertices() <= 4 {
        return None;
    }
    c.vertices()
        .iter()
        .filter(|&&v| c.degree(v) <= max_degree)
        .find_map(|&v| c.neighbors(v).iter().find(|&&u| link_condition(c, v, u).is_ok()).map(|&u| (v, u)))
}

fn rotate_to(link: &mut [Vertex], u: Vertex) {
    let pos = link.iter().position(|&x| x == u).expect("target in link");
    link.rotate_left(pos);
}

/// Contracts `v` into `u`, returning the smaller complex and the step record.
pub fn contract_edge_with_step(c: &Complex2, v: Vertex, u: Vertex) -> Result<(Complex2, ContractionStep), ContractionError> {
    link_condition(c, v, u)?;
    let mut link = c.link_cycle(v)?;
    rotate_to(&mut link, u);
    let tris = c.triangles().iter().filter_map(|t| {
        if !t.contains(&v) {
            Some(*t)
        } else if t.contains(&u) {
            None
        } else {
            Some(t.map(|x| if x == v { u } else { x }))
        }
    });
    let out = Complex2::new(tris)?;
    let degree = link.len();
    Ok((out, ContractionStep { removed: v, target: u, link, degree }))
}

pub fn contract_edge(c: &Complex2, v: Vertex, u: Vertex) -> Result<Complex2, ContractionError> {
    contract_edge_with_step(c, v, u).map(|(c, _)| c)
}

/// Reinserts `step.removed`; inverse of the contraction that produced `step`.
pub fn vertex_split(c: &Complex2, step: &ContractionStep) -> Result<Complex2, ContractionError> {
    let bad = |m: String| ContractionError::InconsistentStep(m);
    let (v, u, link) = (step.removed, step.target, &step.link);
    let k = link.len();
    if k < 3 || step.degree != k {
        return Err(bad(format!("link of length {k} with degree {}", step.degree)));
    }
    if link[0] != u {
        return Err(bad(format!("link does not start at target {u}")));
    }
    if c.contains_vertex(v) {
        return Err(bad(format!("vertex {v} already present")));
    }
    let mut sorted = link.clone();
    sorted.sort_unstable();
    if sorted.windows(2).any(|w| w[0] == w[1]) {
        return Err(bad("repeated vertex in link".into()));
    }
    let fan: Vec<Triangle> = (1..k - 1).map(|i| sort3([u, link[i], link[i + 1]])).collect();
    if let Some(t) = fan.iter().find(|t| !c.has_triangle(**t)) {
        return Err(bad(format!("triangle {t:?} not present around {u}")));
    }
    let mut tris: Vec<[Vertex; 3]> = c.triangles().iter().filter(|t| !fan.contains(t)).copied().collect();
    tris.extend((1..k - 1).map(|i| [v, link[i], link[i + 1]]));
    tris.push([v, u, link[1]]);
    tris.push([v, u, link[k - 1]]);
    Ok(Complex2::new(tris)?)
}

/// Contracts reducible vertices of degree at most `max_degree` until none is
/// left or the complex has `floor` vertices.
pub fn reduction_schedule(c: &Complex2, max_degree: usize, floor: Option<usize>) -> ReductionSchedule {
    let mut cur = c.clone();
    let mut steps = Vec::new();
    while floor.map_or(true, |f| cur.num_vertices() > f) {
        let Some((v, u)) = find_reducible_vertex(&cur, max_degree) else { break };
        let (next, step) = contract_edge_with_step(&cur, v, u).expect("reducible pair contracts");
        steps.push(step);
        cur = next;
    }
    ReductionSchedule { steps, base: cur }
}
