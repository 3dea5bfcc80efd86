//! Rigidity matrices, infinitesimal rigidity decisions and exact witnesses.
//!
//! The rigidity matrix has one row per (vertex, coordinate), vertices in id
//! order, and one column per edge in lexicographic order. Its left kernel is
//! the space of infinitesimal motions and its right kernel the space of
//! stresses.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use thiserror::Error;

use crate::complex::{edge, Complex2, Edge};
use crate::linalg::{self, ModMatrix, PrimeField, RankCertificate, RankMethod, RankMode, RationalMatrix, Side};
use crate::Vertex;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RigidityError {
    #[error("dimension must be 2 or 3, got {0}")]
    BadDimension(usize),
    #[error("vertex {0} is not placed")]
    UnplacedVertex(Vertex),
    #[error("vertex {vertex} has {got} coordinates, expected {expected}")]
    WrongArity { vertex: Vertex, expected: usize, got: usize },
    #[error("edge {0:?} has an endpoint outside the vertex set")]
    DanglingEdge(Edge),
    #[error("self-loop at vertex {0}")]
    SelfLoop(Vertex),
    #[error("need at least {need} vertices in dimension {dim}, have {have}")]
    TooFewVertices { need: usize, have: usize, dim: usize },
}

/// A simple undirected graph with sorted vertices and sorted, deduplicated edges.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    vertices: Vec<Vertex>,
    edges: Vec<Edge>,
}

impl Graph {
    pub fn new(vertices: impl IntoIterator<Item = Vertex>, edges: impl IntoIterator<Item = (Vertex, Vertex)>) -> Result<Self, RigidityError> {
        let mut vertices: Vec<Vertex> = vertices.into_iter().collect();
        vertices.sort_unstable();
        vertices.dedup();
        let mut es = Vec::new();
        for (a, b) in edges {
            if a == b {
                return Err(RigidityError::SelfLoop(a));
            }
            let e = edge(a, b);
            if vertices.binary_search(&a).is_err() || vertices.binary_search(&b).is_err() {
                return Err(RigidityError::DanglingEdge(e));
            }
            es.push(e);
        }
        es.sort_unstable();
        es.dedup();
        Ok(Graph { vertices, edges: es })
    }

    /// The 1-skeleton of a complex.
    pub fn from_complex(c: &Complex2) -> Self {
        Graph { vertices: c.vertices().to_vec(), edges: c.edges().to_vec() }
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn index_of(&self, v: Vertex) -> Option<usize> {
        self.vertices.binary_search(&v).ok()
    }

    pub fn neighbors(&self, v: Vertex) -> Vec<Vertex> {
        self.edges
            .iter()
            .filter_map(|&[a, b]| if a == v { Some(b) } else if b == v { Some(a) } else { None })
            .collect()
    }
}

pub type Point = Vec<BigRational>;

/// A graph with every vertex placed at an exact rational point in `dim`-space.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Framework {
    graph: Graph,
    dim: usize,
    placement: BTreeMap<Vertex, Point>,
}

impl Framework {
    pub fn new(graph: Graph, dim: usize, placement: BTreeMap<Vertex, Point>) -> Result<Self, RigidityError> {
        if dim != 2 && dim != 3 {
            return Err(RigidityError::BadDimension(dim));
        }
        for &v in graph.vertices() {
            let p = placement.get(&v).ok_or(RigidityError::UnplacedVertex(v))?;
            if p.len() != dim {
                return Err(RigidityError::WrongArity { vertex: v, expected: dim, got: p.len() });
            }
        }
        let placement = placement.into_iter().filter(|(v, _)| graph.index_of(*v).is_some()).collect();
        Ok(Framework { graph, dim, placement })
    }

    /// Convenience constructor from integer coordinates.
    pub fn from_integer_points(graph: Graph, dim: usize, points: &BTreeMap<Vertex, Vec<i64>>) -> Result<Self, RigidityError> {
        let placement = points
            .iter()
            .map(|(&v, p)| (v, p.iter().map(|&x| BigRational::from_integer(x.into())).collect()))
            .collect();
        Self::new(graph, dim, placement)
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn placement(&self) -> &BTreeMap<Vertex, Point> {
        &self.placement
    }

    pub fn point(&self, v: Vertex) -> &Point {
        &self.placement[&v]
    }

    /// `d n - binom(d+1, 2)`.
    pub fn required_rank(&self) -> usize {
        required_rank(self.graph.num_vertices(), self.dim)
    }

    /// Dimension of the affine span of the placed points (exact).
    pub fn affine_span_dim(&self) -> usize {
        let pts: Vec<&Point> = self.placement.values().collect();
        let Some(first) = pts.first() else { return 0 };
        let rows: Vec<Vec<BigRational>> =
            pts[1..].iter().map(|p| p.iter().zip(first.iter()).map(|(a, b)| a - b).collect()).collect();
        if rows.is_empty() {
            return 0;
        }
        linalg::rank(&RationalMatrix::from_rows(&rows), RankMode::Exact).rank_lower_bound
    }
}

pub fn required_rank(n: usize, d: usize) -> usize {
    (d * n).saturating_sub(d * (d + 1) / 2)
}

fn diff(a: &Point, b: &Point) -> Point {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

fn dot(a: &[BigRational], b: &[BigRational]) -> BigRational {
    a.iter().zip(b).fold(BigRational::zero(), |acc, (x, y)| acc + x * y)
}

/// The exact `d|V| x |E|` rigidity matrix.
pub fn rigidity_matrix(f: &Framework) -> RationalMatrix {
    let d = f.dim;
    let g = &f.graph;
    let mut m = RationalMatrix::zeros(d * g.num_vertices(), g.edges.len());
    for (col, &[u, v]) in g.edges.iter().enumerate() {
        let (iu, iv) = (g.index_of(u).unwrap(), g.index_of(v).unwrap());
        let duv = diff(f.point(u), f.point(v));
        for k in 0..d {
            m.set(iu * d + k, col, duv[k].clone());
            m.set(iv * d + k, col, -duv[k].clone());
        }
    }
    m
}

/// The rigidity matrix reduced modulo `field`'s prime, or `None` if some
/// coordinate denominator vanishes there.
pub fn rigidity_matrix_mod(f: &Framework, field: &PrimeField) -> Option<ModMatrix> {
    let d = f.dim;
    let g = &f.graph;
    let mut coords = Vec::with_capacity(g.num_vertices());
    for v in g.vertices() {
        let p: Option<Vec<u64>> = f.point(*v).iter().map(|x| field.from_rational(x)).collect();
        coords.push(p?);
    }
    let mut m = ModMatrix::zeros(d * g.num_vertices(), g.edges.len());
    for (col, &[u, v]) in g.edges.iter().enumerate() {
        let (iu, iv) = (g.index_of(u).unwrap(), g.index_of(v).unwrap());
        for k in 0..d {
            let x = field.sub(coords[iu][k], coords[iv][k]);
            m.set(iu * d + k, col, x);
            m.set(iv * d + k, col, field.neg(x));
        }
    }
    Some(m)
}

/// An infinitesimal motion, given by one velocity per vertex.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MotionWitness {
    pub velocities: BTreeMap<Vertex, Point>,
    /// A vertex pair whose distance the motion changes to first order.
    /// `None` only when the placement does not affinely span its space, in
    /// which case the motion is instead outside the span of rigid motions.
    pub violated_pair: Option<(Vertex, Vertex)>,
}

fn pair_rate(f: &Framework, vel: &BTreeMap<Vertex, Point>, u: Vertex, v: Vertex) -> BigRational {
    let dv = diff(&vel[&v], &vel[&u]);
    let dp = diff(f.point(v), f.point(u));
    dot(&dv, &dp)
}

/// First vertex pair (lexicographic) on which the velocities change a distance.
pub fn first_violated_pair(f: &Framework, vel: &BTreeMap<Vertex, Point>) -> Option<(Vertex, Vertex)> {
    let vs = f.graph.vertices();
    for (i, &u) in vs.iter().enumerate() {
        for &v in &vs[i + 1..] {
            if !pair_rate(f, vel, u, v).is_zero() {
                return Some((u, v));
            }
        }
    }
    None
}

impl MotionWitness {
    /// Checks the edge equations exactly and the claimed violation.
    pub fn verify(&self, f: &Framework) -> bool {
        let d = f.dim();
        let vs = f.graph().vertices();
        if vs.iter().any(|v| self.velocities.get(v).map_or(true, |a| a.len() != d)) {
            return false;
        }
        if f.graph().edges().iter().any(|&[u, v]| !pair_rate(f, &self.velocities, u, v).is_zero()) {
            return false;
        }
        match self.violated_pair {
            Some((u, v)) => {
                f.graph().index_of(u).is_some()
                    && f.graph().index_of(v).is_some()
                    && !pair_rate(f, &self.velocities, u, v).is_zero()
            }
            None => {
                // A flexing of a degenerate placement: the motion must not be a rigid motion.
                f.affine_span_dim() < d && !is_isometry(f, &self.velocities)
            }
        }
    }

    pub fn support(&self) -> Vec<Vertex> {
        self.velocities.iter().filter(|(_, a)| a.iter().any(|x| !x.is_zero())).map(|(&v, _)| v).collect()
    }
}

/// Basis of the infinitesimal isometries (translations and rotations) as flat vectors.
fn isometry_basis(f: &Framework) -> Vec<Vec<BigRational>> {
    let d = f.dim();
    let pts: Vec<&Point> = f.graph().vertices().iter().map(|v| f.point(*v)).collect();
    let n = pts.len();
    let zero = BigRational::zero();
    let one = BigRational::from_integer(1.into());
    let mut basis = Vec::new();
    for k in 0..d {
        let mut t = vec![zero.clone(); d * n];
        for i in 0..n {
            t[i * d + k] = one.clone();
        }
        basis.push(t);
    }
    for a in 0..d {
        for b in a + 1..d {
            let mut r = vec![zero.clone(); d * n];
            for (i, p) in pts.iter().enumerate() {
                r[i * d + a] = -p[b].clone();
                r[i * d + b] = p[a].clone();
            }
            basis.push(r);
        }
    }
    basis
}

fn flatten(f: &Framework, vel: &BTreeMap<Vertex, Point>) -> Vec<BigRational> {
    f.graph().vertices().iter().flat_map(|v| vel[v].iter().cloned()).collect()
}

fn is_isometry(f: &Framework, vel: &BTreeMap<Vertex, Point>) -> bool {
    let basis = isometry_basis(f);
    let r0 = linalg::rank(&RationalMatrix::from_rows(&basis), RankMode::Exact).rank_lower_bound;
    let mut ext = basis;
    ext.push(flatten(f, vel));
    linalg::rank(&RationalMatrix::from_rows(&ext), RankMode::Exact).rank_lower_bound == r0
}

/// An equilibrium stress: edge coefficients balancing at every vertex.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StressVector {
    pub coefficients: BTreeMap<Edge, BigRational>,
}

impl StressVector {
    pub fn verify(&self, f: &Framework) -> bool {
        let d = f.dim();
        let mut balance: BTreeMap<Vertex, Point> =
            f.graph().vertices().iter().map(|&v| (v, vec![BigRational::zero(); d])).collect();
        for (&[u, v], w) in &self.coefficients {
            if f.graph().edges().binary_search(&[u, v]).is_err() {
                return false;
            }
            let duv = diff(f.point(v), f.point(u));
            for k in 0..d {
                let t = w * &duv[k];
                balance.get_mut(&u).unwrap()[k] += &t;
                balance.get_mut(&v).unwrap()[k] -= t;
            }
        }
        self.coefficients.values().any(|w| !w.is_zero()) && balance.values().all(|b| b.iter().all(Zero::is_zero))
    }
}

/// Outcome of [`is_infinitesimally_rigid`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RigidityReport {
    pub rigid: bool,
    /// Certified lower bound when `rigid`; the exact rank when the exact path ran.
    pub rank: usize,
    pub required_rank: usize,
    pub certificate: RankCertificate,
    pub witness: Option<MotionWitness>,
    pub degenerate_span: bool,
}

/// Decides infinitesimal rigidity with the default prime seed.
pub fn is_infinitesimally_rigid(f: &Framework) -> Result<RigidityReport, RigidityError> {
    is_infinitesimally_rigid_seeded(f, 0)
}

/// Rigid answers carry a modular (or exact) full-rank certificate; flexible
/// answers carry an exact motion witness.
pub fn is_infinitesimally_rigid_seeded(f: &Framework, seed: u64) -> Result<RigidityReport, RigidityError> {
    let d = f.dim();
    let n = f.graph().num_vertices();
    if n < d + 1 {
        return Err(RigidityError::TooFewVertices { need: d + 1, have: n, dim: d });
    }
    let required = f.required_rank();
    let degenerate = f.affine_span_dim() < d;
    let mut best: Option<RankCertificate> = None;
    if !degenerate {
        // A couple of primes before paying for exact arithmetic.
        let mut field = PrimeField::from_seed(seed);
        for _ in 0..3 {
            if let Some(m) = rigidity_matrix_mod(f, &field) {
                let cert = linalg::rank_mod(m, &field);
                if cert.rank_lower_bound == required {
                    return Ok(RigidityReport {
                        rigid: true,
                        rank: required,
                        required_rank: required,
                        certificate: cert,
                        witness: None,
                        degenerate_span: false,
                    });
                }
                if best.as_ref().map_or(true, |b| b.rank_lower_bound < cert.rank_lower_bound) {
                    best = Some(cert);
                }
            }
            field = field.next_in_table();
        }
        if let Some(w) = local_witness(f) {
            let cert = best.unwrap_or(RankCertificate {
                rank_lower_bound: 0,
                method: RankMethod::ModularPrime(field.modulus()),
                witness_minor: None,
            });
            return Ok(RigidityReport {
                rigid: false,
                rank: cert.rank_lower_bound,
                required_rank: required,
                certificate: cert,
                witness: Some(w),
                degenerate_span: false,
            });
        }
    }
    let r = rigidity_matrix(f);
    let cert = linalg::rank(&r, RankMode::Exact);
    let rank = cert.rank_lower_bound;
    if !degenerate && rank == required {
        return Ok(RigidityReport { rigid: true, rank, required_rank: required, certificate: cert, witness: None, degenerate_span: false });
    }
    let witness = kernel_witness(f, &r, degenerate);
    debug_assert!(witness.is_some(), "rank deficiency must yield a witness");
    Ok(RigidityReport { rigid: false, rank, required_rank: required, certificate: cert, witness, degenerate_span: degenerate })
}

/// A velocity at a single vertex whose incident edge directions fail to span.
fn local_witness(f: &Framework) -> Option<MotionWitness> {
    let d = f.dim();
    let g = f.graph();
    let mut incident: BTreeMap<Vertex, Vec<Vertex>> = g.vertices().iter().map(|&v| (v, Vec::new())).collect();
    for &[a, b] in g.edges() {
        incident.get_mut(&a).unwrap().push(b);
        incident.get_mut(&b).unwrap().push(a);
    }
    for (&v, nbrs) in &incident {
        let dirs: Vec<Point> = nbrs.iter().map(|&u| diff(f.point(u), f.point(v))).collect();
        let deficient = nbrs.len() < d
            || linalg::rank(&RationalMatrix::from_rows(&dirs), RankMode::Exact).rank_lower_bound < d;
        if !deficient {
            continue;
        }
        let perp = if dirs.is_empty() {
            (0..d)
                .map(|k| (0..d).map(|j| BigRational::from_integer(BigInt::from((j == k) as i64))).collect())
                .collect()
        } else {
            linalg::kernel_basis(&RationalMatrix::from_rows(&dirs), Side::Right)
        };
        for a in perp {
            let velocities = single_vertex_velocity(g, d, v, a);
            if let Some(pair) = first_violated_pair(f, &velocities) {
                return Some(MotionWitness { velocities, violated_pair: Some(pair) });
            }
        }
    }
    None
}

pub(crate) fn single_vertex_velocity(g: &Graph, d: usize, v: Vertex, a: Point) -> BTreeMap<Vertex, Point> {
    let mut vel: BTreeMap<Vertex, Point> = g.vertices().iter().map(|&w| (w, vec![BigRational::zero(); d])).collect();
    vel.insert(v, a);
    vel
}

fn kernel_witness(f: &Framework, r: &RationalMatrix, degenerate: bool) -> Option<MotionWitness> {
    let d = f.dim();
    let vs = f.graph().vertices();
    let kernel = linalg::kernel_basis(r, Side::Left);
    let to_map = |k: &[BigRational]| -> BTreeMap<Vertex, Point> {
        vs.iter().enumerate().map(|(i, &v)| (v, k[i * d..(i + 1) * d].to_vec())).collect()
    };
    for k in &kernel {
        let vel = to_map(k);
        if let Some(pair) = first_violated_pair(f, &vel) {
            return Some(MotionWitness { velocities: vel, violated_pair: Some(pair) });
        }
    }
    if degenerate {
        for k in &kernel {
            let vel = to_map(k);
            if !is_isometry(f, &vel) {
                return Some(MotionWitness { velocities: vel, violated_pair: None });
            }
        }
    }
    None
}

/// The first nontrivial kernel motion, or `None` if every motion is trivial.
pub fn motion_witness(f: &Framework) -> Option<MotionWitness> {
    let degenerate = f.affine_span_dim() < f.dim();
    if !degenerate {
        if let Some(w) = local_witness(f) {
            return Some(w);
        }
    }
    kernel_witness(f, &rigidity_matrix(f), degenerate)
}

/// Exact basis of the stress space; empty iff the edges are independent.
pub fn stress_basis(f: &Framework) -> Vec<StressVector> {
    let field = PrimeField::from_seed(0);
    if let Some(m) = rigidity_matrix_mod(f, &field) {
        if linalg::rank_mod(m, &field).rank_lower_bound == f.graph().edges().len() {
            return Vec::new();
        }
    }
    let edges = f.graph().edges();
    linalg::kernel_basis(&rigidity_matrix(f), Side::Right)
        .into_iter()
        .map(|w| StressVector { coefficients: edges.iter().copied().zip(w).collect() })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Normalizes a nonzero vector to integers with content one.
    fn primitive(v: &[BigRational]) -> Vec<BigRational> {
        use num_integer::Integer;
        use num_traits::Signed;
        let lcm = v.iter().fold(BigInt::from(1), |l, x| l.lcm(x.denom()));
        let ints: Vec<BigInt> = v.iter().map(|x| x.numer() * (&lcm / x.denom())).collect();
        let g = ints.iter().fold(BigInt::zero(), |g, x| g.gcd(x));
        if g.is_zero() {
            return v.to_vec();
        }
        let flip = ints.iter().find(|x| !x.is_zero()).is_some_and(|x| x.is_negative());
        ints.into_iter()
            .map(|x| {
                let q = x / &g;
                BigRational::from_integer(if flip { -q } else { q })
            })
            .collect()
    }
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn q(x: i64) -> BigRational {
        BigRational::from_integer(x.into())
    }

    fn complete(n: u32) -> Graph {
        let edges = (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b)));
        Graph::new(0..n, edges).unwrap()
    }

    fn random_points(n: u32, d: usize, seed: u64) -> BTreeMap<Vertex, Vec<i64>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n).map(|v| (v, (0..d).map(|_| rng.gen_range(-1_000_000..=1_000_000)).collect())).collect()
    }

    #[test]
    fn single_edge_column() {
        let g = Graph::new([0, 1], [(0, 1)]).unwrap();
        let pts = BTreeMap::from([(0, vec![0, 0, 0]), (1, vec![1, 0, 0])]);
        let f = Framework::from_integer_points(g, 3, &pts).unwrap();
        let m = rigidity_matrix(&f);
        let col: Vec<BigRational> = (0..6).map(|r| m.get(r, 0).clone()).collect();
        assert_eq!(col, [-1, 0, 0, 1, 0, 0].map(q).to_vec());
    }

    #[test]
    fn unplaced_vertex_is_rejected() {
        let g = Graph::new([0, 1], [(0, 1)]).unwrap();
        let pts = BTreeMap::from([(0, vec![0, 0, 0])]);
        assert_eq!(Framework::from_integer_points(g, 3, &pts).unwrap_err(), RigidityError::UnplacedVertex(1));
    }

    #[test]
    fn k4_generic_is_rigid() {
        let f = Framework::from_integer_points(complete(4), 3, &random_points(4, 3, 1)).unwrap();
        let rep = is_infinitesimally_rigid(&f).unwrap();
        assert!(rep.rigid);
        assert_eq!((rep.rank, rep.required_rank), (6, 6));
        assert!(rep.certificate.verify(&rigidity_matrix(&f)));
        assert!(motion_witness(&f).is_none());
    }

    #[test]
    fn k4_with_coincident_vertices_flexes() {
        let mut pts = random_points(4, 3, 2);
        pts.insert(3, pts[&2].clone());
        let f = Framework::from_integer_points(complete(4), 3, &pts).unwrap();
        let rep = is_infinitesimally_rigid(&f).unwrap();
        assert!(!rep.rigid);
        assert!(rep.witness.unwrap().verify(&f));
    }

    #[test]
    fn collinear_path_in_plane_flexes() {
        let g = Graph::new(0..3, [(0, 1), (1, 2)]).unwrap();
        let pts = BTreeMap::from([(0, vec![0, 0]), (1, vec![1, 0]), (2, vec![2, 0])]);
        let f = Framework::from_integer_points(g, 2, &pts).unwrap();
        let rep = is_infinitesimally_rigid(&f).unwrap();
        assert!(!rep.rigid && rep.degenerate_span);
        assert!(rep.witness.unwrap().verify(&f));
    }

    #[test]
    fn k5_has_one_stress() {
        let f = Framework::from_integer_points(complete(5), 3, &random_points(5, 3, 3)).unwrap();
        let s = stress_basis(&f);
        assert_eq!(s.len(), 1);
        assert!(s[0].verify(&f));
    }

    #[test]
    fn triangle_in_plane_has_no_stress() {
        let f = Framework::from_integer_points(complete(3), 2, &random_points(3, 2, 4)).unwrap();
        assert!(stress_basis(&f).is_empty());
        assert!(is_infinitesimally_rigid(&f).unwrap().rigid);
    }

    #[test]
    fn too_few_vertices() {
        let f = Framework::from_integer_points(complete(2), 2, &random_points(2, 2, 4)).unwrap();
        assert!(matches!(is_infinitesimally_rigid(&f), Err(RigidityError::TooFewVertices { .. })));
    }

    #[test]
    fn primitive_vectors() {
        let v = vec![BigRational::new((-2).into(), 3.into()), BigRational::new(4.into(), 3.into())];
        assert_eq!(primitive(&v), vec![q(1), q(-2)]);
    }
}
