//! Abstract simplicial 2-complexes given by their triangles.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};

use num_bigint::BigInt;
use thiserror::Error;

use crate::linalg;
use crate::Vertex;

pub type Triangle = [Vertex; 3];
pub type Edge = [Vertex; 2];

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ComplexError {
    #[error("empty triangle list")]
    Empty,
    #[error("degenerate triangle {0:?} repeats a vertex")]
    DegenerateTriangle([Vertex; 3]),
    #[error("duplicate triangle {0:?}")]
    DuplicateTriangle(Triangle),
    #[error("vertex {0} is not in the complex")]
    UnknownVertex(Vertex),
    #[error("link of vertex {0} is not a single cycle")]
    NotSurfaceAt(Vertex),
}

/// A finite simplicial 2-complex. Immutable once built.
///
/// Triangles are stored with ascending vertices and in lexicographic order,
/// so two complexes with the same triangle set compare equal.
#[derive(Debug, Clone)]
pub struct Complex2 {
    vertices: Vec<Vertex>,
    triangles: Vec<Triangle>,
    edges: Vec<Edge>,
    neighbors: BTreeMap<Vertex, Vec<Vertex>>,
    star: BTreeMap<Vertex, Vec<usize>>,
    edge_triangles: HashMap<Edge, Vec<usize>>,
}

impl PartialEq for Complex2 {
    fn eq(&self, other: &Self) -> bool {
        self.triangles == other.triangles
    }
}

impl Eq for Complex2 {}

/// Combinatorial and topological summary of a complex.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SurfaceReport {
    pub is_closed_surface: bool,
    pub euler_characteristic: i64,
    /// Only meaningful when `is_closed_surface` holds.
    pub orientable: bool,
    /// Orientable genus `(2 - chi) / 2` or non-orientable genus `2 - chi`; zero when not a connected closed surface.
    pub genus: u32,
    pub connected: bool,
}

/// Result of the rational boundary-kernel check.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CycleReport {
    pub is_cycle: bool,
    pub is_minimal: bool,
    pub kernel_dim: usize,
    /// Integer generator indexed like [`Complex2::triangles`], present when the kernel is one-dimensional.
    pub generator: Option<Vec<BigInt>>,
}

pub(crate) fn sort3(t: [Vertex; 3]) -> Triangle {
    let mut t = t;
    t.sort_unstable();
    t
}

pub(crate) fn edge(a: Vertex, b: Vertex) -> Edge {
    if a < b {
        [a, b]
    } else {
        [b, a]
    }
}

impl Complex2 {
    /// Builds a complex from any triangle list; surface-ness is not required.
    pub fn new<I>(triangles: I) -> Result<Self, ComplexError>
    where
        I: IntoIterator<Item = [Vertex; 3]>,
    {
        let mut tris = Vec::new();
        for t in triangles {
            if t[0] == t[1] || t[1] == t[2] || t[0] == t[2] {
                return Err(ComplexError::DegenerateTriangle(t));
            }
            tris.push(sort3(t));
        }
        if tris.is_empty() {
            return Err(ComplexError::Empty);
        }
        tris.sort_unstable();
        if let Some(w) = tris.windows(2).find(|w| w[0] == w[1]) {
            return Err(ComplexError::DuplicateTriangle(w[0]));
        }
        Ok(Self::from_sorted(tris))
    }

    fn from_sorted(triangles: Vec<Triangle>) -> Self {
        let mut star: BTreeMap<Vertex, Vec<usize>> = BTreeMap::new();
        let mut edge_triangles: HashMap<Edge, Vec<usize>> = HashMap::new();
        let mut neighbor_sets: BTreeMap<Vertex, BTreeSet<Vertex>> = BTreeMap::new();
        for (i, t) in triangles.iter().enumerate() {
            for k in 0..3 {
                star.entry(t[k]).or_default().push(i);
                let (a, b) = (t[k], t[(k + 1) % 3]);
                edge_triangles.entry(edge(a, b)).or_default().push(i);
                neighbor_sets.entry(a).or_default().insert(b);
                neighbor_sets.entry(b).or_default().insert(a);
            }
        }
        let mut edges: Vec<Edge> = edge_triangles.keys().copied().collect();
        edges.sort_unstable();
        let neighbors = neighbor_sets.into_iter().map(|(v, s)| (v, s.into_iter().collect())).collect();
        Complex2 {
            vertices: star.keys().copied().collect(),
            triangles,
            edges,
            neighbors,
            star,
            edge_triangles,
        }
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }

    pub fn triangles(&self) -> &[Triangle] {
        &self.triangles
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn contains_vertex(&self, v: Vertex) -> bool {
        self.star.contains_key(&v)
    }

    pub fn has_edge(&self, a: Vertex, b: Vertex) -> bool {
        self.edge_triangles.contains_key(&edge(a, b))
    }

    pub fn has_triangle(&self, t: [Vertex; 3]) -> bool {
        self.triangles.binary_search(&sort3(t)).is_ok()
    }

    /// Sorted neighbors of `v` in the 1-skeleton (empty for unknown vertices).
    pub fn neighbors(&self, v: Vertex) -> &[Vertex] {
        self.neighbors.get(&v).map_or(&[], Vec::as_slice)
    }

    pub fn degree(&self, v: Vertex) -> usize {
        self.neighbors(v).len()
    }

    /// Indices of the triangles containing `v`.
    pub fn star(&self, v: Vertex) -> &[usize] {
        self.star.get(&v).map_or(&[], Vec::as_slice)
    }

    /// Indices of the triangles containing the edge `ab`.
    pub fn edge_star(&self, a: Vertex, b: Vertex) -> &[usize] {
        self.edge_triangles.get(&edge(a, b)).map_or(&[], Vec::as_slice)
    }

    pub fn max_vertex(&self) -> Vertex {
        *self.vertices.last().expect("complex is nonempty")
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.vertices.len() as i64 - self.edges.len() as i64 + self.triangles.len() as i64
    }

    pub fn is_connected(&self) -> bool {
        let start = self.vertices[0];
        let mut seen = BTreeSet::from([start]);
        let mut queue = VecDeque::from([start]);
        while let Some(v) = queue.pop_front() {
            for &w in self.neighbors(v) {
                if seen.insert(w) {
                    queue.push_back(w);
                }
            }
        }
        seen.len() == self.vertices.len()
    }

    /// Neighbors of `v` in their cyclic order around `v`.
    ///
    /// Starts at the smallest neighbor and continues toward the smaller of its
    /// two link neighbors.
    pub fn link_cycle(&self, v: Vertex) -> Result<Vec<Vertex>, ComplexError> {
        let star = self.star.get(&v).ok_or(ComplexError::UnknownVertex(v))?;
        let mut adj: BTreeMap<Vertex, Vec<Vertex>> = BTreeMap::new();
        for &ti in star {
            let t = self.triangles[ti];
            let mut other = t.iter().copied().filter(|&x| x != v);
            let (a, b) = (other.next().unwrap(), other.next().unwrap());
            adj.entry(a).or_default().push(b);
            adj.entry(b).or_default().push(a);
        }
        if adj.values().any(|n| n.len() != 2) {
            return Err(ComplexError::NotSurfaceAt(v));
        }
        let (&first, first_adj) = adj.iter().next().unwrap();
        let mut cycle = vec![first];
        let mut prev = first;
        let mut cur = *first_adj.iter().min().unwrap();
        while cur != first {
            cycle.push(cur);
            let n = &adj[&cur];
            let next = if n[0] == prev { n[1] } else { n[0] };
            prev = cur;
            cur = next;
            if cycle.len() > adj.len() {
                return Err(ComplexError::NotSurfaceAt(v));
            }
        }
        if cycle.len() != adj.len() {
            return Err(ComplexError::NotSurfaceAt(v));
        }
        Ok(cycle)
    }

    /// All 3-cliques of the 1-skeleton that are not triangles.
    pub fn missing_triangles(&self) -> BTreeSet<Triangle> {
        let mut out = BTreeSet::new();
        for &[a, b] in &self.edges {
            let (na, nb) = (self.neighbors(a), self.neighbors(b));
            for &c in na.iter().filter(|&&c| c > b) {
                if nb.binary_search(&c).is_ok() && !self.has_triangle([a, b, c]) {
                    out.insert([a, b, c]);
                }
            }
        }
        out
    }

    /// Combinatorial surface test, Euler characteristic, orientability and genus.
    pub fn surface_report(&self) -> SurfaceReport {
        let edges_ok = self.edge_triangles.values().all(|ts| ts.len() == 2);
        let links_ok = edges_ok && self.vertices.iter().all(|&v| self.link_cycle(v).is_ok());
        let connected = self.is_connected();
        let is_closed_surface = edges_ok && links_ok && connected;
        let chi = self.euler_characteristic();
        let orientable = edges_ok && self.orientation().is_some();
        let genus = if is_closed_surface {
            if orientable {
                ((2 - chi) / 2) as u32
            } else {
                (2 - chi) as u32
            }
        } else {
            0
        };
        SurfaceReport { is_closed_surface, euler_characteristic: chi, orientable, genus, connected }
    }

    /// Signs `s_t` such that orienting each triangle as `s_t * (a,b,c)` (sorted order)
    /// makes every shared edge appear with opposite directions; `None` on conflict.
    pub fn orientation(&self) -> Option<Vec<i8>> {
        let mut sign = vec![0i8; self.triangles.len()];
        for seed in 0..self.triangles.len() {
            if sign[seed] != 0 {
                continue;
            }
            sign[seed] = 1;
            let mut queue = VecDeque::from([seed]);
            while let Some(t) = queue.pop_front() {
                let tri = self.triangles[t];
                for k in 0..3 {
                    let (a, b) = (tri[k], tri[(k + 1) % 3]);
                    let e = edge(a, b);
                    let dir_t = sign[t] * edge_direction(&tri, e);
                    for &s in &self.edge_triangles[&e] {
                        if s == t {
                            continue;
                        }
                        let want = -dir_t * edge_direction(&self.triangles[s], e);
                        if sign[s] == 0 {
                            sign[s] = want;
                            queue.push_back(s);
                        } else if sign[s] != want {
                            return None;
                        }
                    }
                }
            }
        }
        Some(sign)
    }

    /// Rational kernel of the boundary map from triangles to edges.
    pub fn minimal_cycle_check(&self) -> CycleReport {
        let edge_index: HashMap<Edge, usize> = self.edges.iter().enumerate().map(|(i, &e)| (e, i)).collect();
        let mut rows = vec![vec![BigInt::from(0); self.triangles.len()]; self.edges.len()];
        for (j, &[a, b, c]) in self.triangles.iter().enumerate() {
            rows[edge_index[&[b, c]]][j] += 1;
            rows[edge_index[&[a, c]]][j] -= 1;
            rows[edge_index[&[a, b]]][j] += 1;
        }
        let kernel = linalg::integer_kernel(rows, self.triangles.len());
        let kernel_dim = kernel.len();
        let generator = (kernel_dim == 1).then(|| kernel.into_iter().next().unwrap());
        let is_minimal = generator.as_ref().is_some_and(|g| g.iter().all(|x| x != &BigInt::from(0)));
        CycleReport { is_cycle: kernel_dim >= 1, is_minimal, kernel_dim, generator }
    }
}

/// +1 if `e` runs along the cyclic order of the sorted triangle, -1 otherwise.
fn edge_direction(t: &Triangle, e: Edge) -> i8 {
    let [a, b, c] = *t;
    if e == [a, b] || e == [b, c] {
        1
    } else {
        debug_assert_eq!(e, [a, c]);
        -1
    }
}

/// Validates a triangle list and summarizes it.
pub fn build_and_validate<I>(triangles: I) -> Result<(Complex2, SurfaceReport), ComplexError>
where
    I: IntoIterator<Item = [Vertex; 3]>,
{
    let c = Complex2::new(triangles)?;
    let report = c.surface_report();
    Ok((c, report))
}
