//! Test families: canonical surfaces, random spheres and surfaces, and the
//! two impossibility constructions with their explicit motions.

use std::collections::BTreeMap;

use num_rational::BigRational;
use num_traits::Zero;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::complex::{sort3, Complex2, Triangle};
use crate::contraction::{vertex_split, ContractionStep};
use crate::linalg::{self, PrimeField, RationalMatrix, Side};
use crate::placement::{dual_distance, generate_locations};
use crate::rigidity::{
    first_violated_pair, required_rank, rigidity_matrix_mod, single_vertex_velocity, Framework, Graph, MotionWitness,
};
use crate::Vertex;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GeneratorError {
    #[error("unknown primitive {0}")]
    UnknownPrimitive(String),
    #[error("need at least {need} vertices, asked for {asked}")]
    TooFewVertices { need: usize, asked: usize },
    #[error("graph is not minimally rigid in dimension {dim}: {reason}")]
    NotMinimallyRigid { dim: usize, reason: String },
    #[error("dimension must be 2 or 3, got {0}")]
    BadDimension(usize),
    #[error("no collision among apex groups; the assignment uses too many locations")]
    NoCollision,
    #[error("input is not a minimal 2-cycle")]
    NotMinimalCycle,
    #[error("could not build the requested surface: {0}")]
    Construction(String),
}

pub const PRIMITIVES: [&str; 4] = ["tetrahedron", "octahedron", "moebius_torus", "rp2_6"];

/// Canonical small triangulations.
pub fn primitive(name: &str) -> Result<Complex2, GeneratorError> {
    let tris: Vec<[Vertex; 3]> = match name {
        "tetrahedron" => vec![[0, 1, 2], [0, 1, 3], [0, 2, 3], [1, 2, 3]],
        // Antipodal pairs (0,1), (2,3), (4,5).
        "octahedron" => {
            let mut t = Vec::new();
            for a in [0, 1] {
                for b in [2, 3] {
                    for c in [4, 5] {
                        t.push([a, b, c]);
                    }
                }
            }
            t
        }
        "moebius_torus" => (0..7).flat_map(|i| [[i, (i + 1) % 7, (i + 3) % 7], [i, (i + 2) % 7, (i + 3) % 7]]).collect(),
        "rp2_6" => vec![
            [0, 1, 2],
            [0, 2, 3],
            [0, 3, 4],
            [0, 4, 5],
            [0, 1, 5],
            [1, 2, 4],
            [1, 3, 4],
            [1, 3, 5],
            [2, 3, 5],
            [2, 4, 5],
        ],
        other => return Err(GeneratorError::UnknownPrimitive(other.to_string())),
    };
    Ok(Complex2::new(tris).expect("primitive face lists are valid"))
}

/// Repeated face subdivision of the tetrahedron.
pub fn stacked_sphere(n: usize, seed: u64) -> Result<Complex2, GeneratorError> {
    if n < 4 {
        return Err(GeneratorError::TooFewVertices { need: 4, asked: n });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut tris: Vec<Triangle> = primitive("tetrahedron")?.triangles().to_vec();
    for v in 4..n as Vertex {
        let i = rng.gen_range(0..tris.len());
        let [a, b, c] = tris.swap_remove(i);
        tris.extend([[a, b, v], [a, c, v], [b, c, v]]);
    }
    Ok(Complex2::new(tris).expect("stacking keeps a valid complex"))
}

/// One random vertex split adding vertex `v`: a random vertex `u` gives a
/// random arc of at least two link vertices to `v`.
fn random_split(c: &Complex2, v: Vertex, rng: &mut ChaCha8Rng) -> Complex2 {
    let u = *c.vertices().choose(rng).unwrap();
    let link = c.link_cycle(u).expect("surface");
    let d = link.len();
    let start = rng.gen_range(0..d);
    let m = rng.gen_range(2..=d);
    let mut step_link = vec![u];
    step_link.extend((0..m).map(|j| link[(start + j) % d]));
    let step = ContractionStep { removed: v, target: u, degree: step_link.len(), link: step_link };
    vertex_split(c, &step).expect("arc splits are always valid")
}

fn refine(mut c: Complex2, n: usize, rng: &mut ChaCha8Rng) -> Complex2 {
    while c.num_vertices() < n {
        let v = c.max_vertex() + 1;
        c = random_split(&c, v, rng);
    }
    c
}

/// Sphere built from the tetrahedron by `n - 4` random vertex splits.
pub fn random_sphere(n: usize, seed: u64) -> Result<Complex2, GeneratorError> {
    if n < 4 {
        return Err(GeneratorError::TooFewVertices { need: 4, asked: n });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(refine(primitive("tetrahedron")?, n, &mut rng))
}

/// Removes triangles `t1`, `t2` and glues a 6-triangle tube between their boundaries.
fn attach_tube(c: &Complex2, t1: Triangle, t2: [Vertex; 3]) -> Option<Complex2> {
    let [a, b, cc] = t1;
    let [d, e, f] = t2;
    let mut tris: Vec<[Vertex; 3]> = c.triangles().iter().filter(|&&t| t != t1 && t != sort3(t2)).copied().collect();
    tris.extend(tube(a, b, cc, d, e, f));
    Complex2::new(tris).ok()
}

/// Attaches one handle (orientable or twisted) between two far-apart triangles.
fn add_handle(c: &Complex2, orientable: bool, rng: &mut ChaCha8Rng) -> Option<Complex2> {
    let tris = c.triangles();
    let mut order: Vec<usize> = (0..tris.len()).collect();
    order.shuffle(rng);
    for &i in order.iter().take(8) {
        let t1 = tris[i];
        let dist = dual_distance(c, i);
        let mut far: Vec<usize> = (0..tris.len())
            .filter(|&j| dist[j] >= 2 && tris[j].iter().all(|&x| t1.iter().all(|&y| x != y && !c.has_edge(x, y))))
            .collect();
        far.shuffle(rng);
        for &j in far.iter().take(4) {
            let [d, e, f] = tris[j];
            for t2 in [[d, e, f], [d, f, e]] {
                if let Some(out) = attach_tube(c, t1, t2) {
                    let r = out.surface_report();
                    if r.is_closed_surface && r.orientable == orientable {
                        return Some(out);
                    }
                }
            }
        }
    }
    None
}

/// A closed surface of the given genus (orientable genus, or number of
/// crosscaps), refined to `n` vertices by random splits.
pub fn genus_surface(g: u32, orientable: bool, n: usize, seed: u64) -> Result<Complex2, GeneratorError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut c, mut handles, mut twisted) = if orientable {
        (random_sphere(12, rng.gen())?, g, 0)
    } else if g == 0 {
        return Err(GeneratorError::Construction("non-orientable genus must be at least 1".into()));
    } else if g % 2 == 1 {
        (refine(primitive("rp2_6")?, 12, &mut rng), (g - 1) / 2, 0)
    } else {
        (random_sphere(12, rng.gen())?, (g - 2) / 2, 1)
    };
    let mut attempts = 0;
    while handles + twisted > 0 {
        let want_orientable = orientable;
        let twist = twisted > 0;
        // A twisted handle on an orientable surface makes it non-orientable.
        let target = if twist { false } else { want_orientable };
        match add_handle(&c, target, &mut rng) {
            Some(next) => {
                c = next;
                if twist {
                    twisted -= 1;
                } else {
                    handles -= 1;
                }
            }
            None => {
                attempts += 1;
                if attempts > 20 {
                    return Err(GeneratorError::Construction("no far-apart triangle pair found".into()));
                }
                let m = c.num_vertices() + 6;
                c = refine(c, m, &mut rng);
            }
        }
    }
    if n < c.num_vertices() {
        return Err(GeneratorError::TooFewVertices { need: c.num_vertices(), asked: n });
    }
    let c = refine(c, n, &mut rng);
    let r = c.surface_report();
    let chi = if orientable { 2 - 2 * g as i64 } else { 2 - g as i64 };
    if !r.is_closed_surface || r.orientable != orientable || r.euler_characteristic != chi {
        return Err(GeneratorError::Construction(format!("validation failed: {r:?}")));
    }
    Ok(c)
}

/// Henneberg type-I sequence from a single edge: each new vertex joins two old ones.
pub fn random_laman_graph(n: usize, seed: u64) -> Result<Graph, GeneratorError> {
    if n < 2 {
        return Err(GeneratorError::TooFewVertices { need: 2, asked: n });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = vec![(0, 1)];
    for v in 2..n as Vertex {
        let a = rng.gen_range(0..v);
        let mut b = rng.gen_range(0..v - 1);
        if b >= a {
            b += 1;
        }
        edges.push((a, v));
        edges.push((b, v));
    }
    Ok(Graph::new(0..n as Vertex, edges).expect("valid graph"))
}

/// Checks `|E| = d|V| - binom(d+1,2)` and full rank on a random placement.
pub fn check_minimally_rigid(g: &Graph, d: usize, seed: u64) -> Result<(), GeneratorError> {
    let n = g.num_vertices();
    let need = required_rank(n, d);
    if g.edges().len() != need {
        return Err(GeneratorError::NotMinimallyRigid { dim: d, reason: format!("{} edges, expected {need}", g.edges().len()) });
    }
    let a = generate_locations(n, d, seed);
    let pts: BTreeMap<Vertex, Vec<i64>> = g.vertices().iter().copied().zip(a.points).collect();
    let f = Framework::from_integer_points(g.clone(), d, &pts).map_err(|e| GeneratorError::NotMinimallyRigid { dim: d, reason: e.to_string() })?;
    let field = PrimeField::from_seed(seed);
    let m = rigidity_matrix_mod(&f, &field).expect("integer coordinates");
    let rank = linalg::rank_mod(m, &field).rank_lower_bound;
    if rank != need {
        return Err(GeneratorError::NotMinimallyRigid { dim: d, reason: format!("generic rank {rank}, expected {need}") });
    }
    Ok(())
}

/// A base graph plus one apex per vertex group, each apex joined to exactly its group.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LamanInstance {
    pub dim: usize,
    pub base: Graph,
    pub augmented: Graph,
    /// Sorted vertex group of the base graph -> apex vertex.
    pub apex_index: BTreeMap<Vec<Vertex>, Vertex>,
}

fn subsets(vs: &[Vertex], k: usize) -> Vec<Vec<Vertex>> {
    if k == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for (i, &v) in vs.iter().enumerate() {
        for mut rest in subsets(&vs[i + 1..], k - 1) {
            rest.insert(0, v);
            out.push(rest);
        }
    }
    out
}

/// Adds an apex for every pair (`d = 2`) or triple (`d = 3`) of base vertices.
pub fn laman_counterexample(g: &Graph, d: usize, seed: u64) -> Result<LamanInstance, GeneratorError> {
    if d != 2 && d != 3 {
        return Err(GeneratorError::BadDimension(d));
    }
    check_minimally_rigid(g, d, seed)?;
    let mut next = g.vertices().last().map_or(0, |&v| v + 1);
    let mut vertices: Vec<Vertex> = g.vertices().to_vec();
    let mut edges: Vec<(Vertex, Vertex)> = g.edges().iter().map(|&[a, b]| (a, b)).collect();
    let mut apex_index = BTreeMap::new();
    for group in subsets(g.vertices(), d) {
        vertices.push(next);
        edges.extend(group.iter().map(|&x| (x, next)));
        apex_index.insert(group, next);
        next += 1;
    }
    let augmented = Graph::new(vertices, edges).expect("valid graph");
    Ok(LamanInstance { dim: d, base: g.clone(), augmented, apex_index })
}

/// The cone over `g`: one new vertex joined to every vertex.
pub fn cone(g: &Graph) -> Graph {
    let apex = g.vertices().last().map_or(0, |&v| v + 1);
    let edges = g.edges().iter().map(|&[a, b]| (a, b)).chain(g.vertices().iter().map(|&v| (v, apex)));
    Graph::new(g.vertices().iter().copied().chain([apex]), edges).expect("valid graph")
}

/// An explicit motion supported on one apex whose edge directions fail to
/// span, found by scanning groups in lexicographic order.
pub fn collision_motion_witness(f: &Framework, apex_index: &BTreeMap<Vec<Vertex>, Vertex>) -> Result<MotionWitness, GeneratorError> {
    let d = f.dim();
    for (group, &apex) in apex_index {
        let dirs: Vec<Vec<BigRational>> =
            group.iter().map(|x| f.point(*x).iter().zip(f.point(apex)).map(|(p, q)| p - q).collect()).collect();
        if linalg::rank(&RationalMatrix::from_rows(&dirs), linalg::RankMode::Exact).rank_lower_bound >= d {
            continue;
        }
        for a in linalg::kernel_basis(&RationalMatrix::from_rows(&dirs), Side::Right) {
            debug_assert!(a.iter().any(|x| !x.is_zero()));
            let velocities = single_vertex_velocity(f.graph(), d, apex, a);
            if let Some(pair) = first_violated_pair(f, &velocities) {
                let w = MotionWitness { velocities, violated_pair: Some(pair) };
                if w.verify(f) {
                    return Ok(w);
                }
            }
        }
    }
    Err(GeneratorError::NoCollision)
}

/// The result of gluing apex gadgets onto the vertex triples of a minimal cycle.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MinimalCycleInstance {
    pub base: Complex2,
    pub result: Complex2,
    /// Vertex triple of the last round's input -> apex `w` (joined to exactly that triple).
    pub apex_index: BTreeMap<Vec<Vertex>, Vertex>,
    /// Triples of the last round for which no gadget kept the cycle minimal.
    pub skipped: Vec<Vec<Vertex>>,
}

/// Six triangles joining the 3-cycles `(a,b,c)` and `(d,e,f)`.
fn tube(a: Vertex, b: Vertex, c: Vertex, d: Vertex, e: Vertex, f: Vertex) -> [[Vertex; 3]; 6] {
    [[a, b, d], [b, d, e], [b, c, e], [c, e, f], [c, a, f], [a, f, d]]
}

/// One gadget for `triple`: the cone from `w` over the triple and the ring of
/// the subdivided opposite face (its central triangle left out), with the
/// hole joined by a tube to a hole cut at `hole`. A face on the triple itself
/// is removed. When `hole` meets the triple the tube passes through three
/// extra vertices so no edge is created twice.
fn glue_gadget(cur: &Complex2, triple: [Vertex; 3], hole: Triangle, first: Vertex, flip: bool) -> Option<Complex2> {
    let [t1, t2, t3] = triple;
    let (w, a, b, c) = (first, first + 1, first + 2, first + 3);
    let face = sort3(triple);
    let mut tris: Vec<[Vertex; 3]> = cur.triangles().iter().filter(|&&t| t != face && t != hole).copied().collect();
    tris.extend([[w, t1, t2], [w, t1, t3], [w, t2, t3]]);
    tris.extend([[t1, t2, a], [t2, a, b], [t2, t3, b], [t3, b, c], [t3, t1, c], [t1, c, a]]);
    let [d, mut e, mut f] = hole;
    if flip {
        std::mem::swap(&mut e, &mut f);
    }
    if hole.iter().any(|x| triple.contains(x)) {
        let (x, y, z) = (first + 4, first + 5, first + 6);
        tris.extend(tube(a, b, c, x, y, z));
        tris.extend(tube(x, y, z, d, e, f));
    } else {
        tris.extend(tube(a, b, c, d, e, f));
    }
    let out = Complex2::new(tris).ok()?;
    out.minimal_cycle_check().is_minimal.then_some(out)
}

/// For every vertex triple `T` of the cycle (lexicographic order), add an
/// apex `w` joined to exactly `T`, keeping the complex a minimal cycle.
///
/// Holes are tried in lexicographic order among the current triangles other
/// than the triple's own face and those through an earlier apex; every candidate is validated with the
/// boundary-kernel check before it is kept.
pub fn minimal_cycle_counterexample(mu: &Complex2, rounds: usize) -> Result<MinimalCycleInstance, GeneratorError> {
    if !mu.minimal_cycle_check().is_minimal {
        return Err(GeneratorError::NotMinimalCycle);
    }
    let mut cur = mu.clone();
    let mut apex_index = BTreeMap::new();
    let mut skipped = Vec::new();
    let mut apexes = std::collections::BTreeSet::new();
    for _ in 0..rounds {
        apex_index.clear();
        skipped.clear();
        let old_vertices = cur.vertices().to_vec();
        for triple in subsets(&old_vertices, 3) {
            let t = [triple[0], triple[1], triple[2]];
            let first = cur.max_vertex() + 1;
            let face = sort3(t);
            let glued = cur
                .triangles()
                .iter()
                .filter(|&&h| h != face && h.iter().all(|x| !apexes.contains(x)))
                .flat_map(|&h| [(h, false), (h, true)])
                .find_map(|(h, flip)| glue_gadget(&cur, t, h, first, flip));
            match glued {
                Some(next) => {
                    cur = next;
                    apexes.insert(first);
                    apex_index.insert(triple, first);
                }
                None => skipped.push(triple),
            }
        }
    }
    Ok(MinimalCycleInstance { base: mu.clone(), result: cur, apex_index, skipped })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn primitives_validate() {
        let t = primitive("tetrahedron").unwrap();
        assert_eq!((t.num_vertices(), t.triangles().len()), (4, 4));
        let o = primitive("octahedron").unwrap();
        assert_eq!((o.num_vertices(), o.edges().len(), o.triangles().len()), (6, 12, 8));
        assert!(!o.has_edge(0, 1) && !o.has_edge(2, 3) && !o.has_edge(4, 5));
        let r = primitive("rp2_6").unwrap().surface_report();
        assert!(r.is_closed_surface && !r.orientable);
        assert_eq!((r.euler_characteristic, r.genus), (1, 1));
        assert!(primitive("klein").is_err());
    }

    #[test]
    fn stacked_small_cases() {
        assert_eq!(stacked_sphere(4, 0).unwrap(), primitive("tetrahedron").unwrap());
        let s = stacked_sphere(5, 3).unwrap();
        assert_eq!(s.edges().len(), 9);
        assert!(s.surface_report().is_closed_surface);
        assert_eq!(s.degree(4), 3);
    }

    #[test]
    fn random_spheres_are_spheres() {
        for seed in 0..20 {
            let c = random_sphere(30, seed).unwrap();
            let r = c.surface_report();
            assert!(r.is_closed_surface && r.orientable);
            assert_eq!(r.euler_characteristic, 2);
            assert_eq!(c.edges().len(), 3 * 30 - 6);
        }
    }

    #[test]
    fn octahedron_among_six_vertex_spheres() {
        let oct = (0..200).any(|s| {
            let c = random_sphere(6, s).unwrap();
            c.vertices().iter().all(|&v| c.degree(v) == 4)
        });
        assert!(oct);
    }

    #[test]
    fn genus_surfaces() {
        for (g, orientable, chi) in [(1, true, 0), (2, true, -2), (1, false, 1), (2, false, 0)] {
            let c = genus_surface(g, orientable, 50, 4).unwrap();
            let r = c.surface_report();
            assert!(r.is_closed_surface);
            assert_eq!((r.orientable, r.euler_characteristic, r.genus), (orientable, chi, g));
            assert_eq!(c.num_vertices(), 50);
        }
    }

    #[test]
    fn laman_on_triangle() {
        let k3 = Graph::new(0..3, [(0, 1), (0, 2), (1, 2)]).unwrap();
        let inst = laman_counterexample(&k3, 2, 1).unwrap();
        assert_eq!((inst.augmented.num_vertices(), inst.augmented.edges().len()), (6, 9));
        check_minimally_rigid(&inst.augmented, 2, 5).unwrap();
        for (pair, &apex) in &inst.apex_index {
            assert_eq!(inst.augmented.neighbors(apex), *pair);
        }
        let k4 = cone(&k3);
        assert_eq!(k4.edges().len(), 6);
        check_minimally_rigid(&k4, 3, 2).unwrap();
    }

    #[test]
    fn non_laman_is_refused() {
        let path = Graph::new(0..3, [(0, 1), (1, 2)]).unwrap();
        assert!(matches!(laman_counterexample(&path, 2, 0), Err(GeneratorError::NotMinimallyRigid { .. })));
    }

    #[test]
    fn minimal_cycle_from_tetrahedron() {
        let inst = minimal_cycle_counterexample(&primitive("tetrahedron").unwrap(), 1).unwrap();
        let r = inst.result.minimal_cycle_check();
        assert!(r.is_cycle && r.is_minimal);
        assert!(inst.result.num_vertices() > 12);
        // The four cones over the triples of one K4 would close up into a
        // sphere of their own, so one triple must go without an apex.
        assert_eq!(inst.apex_index.len(), 3);
        assert_eq!(inst.skipped.len(), 1);
        for &[a, b] in inst.base.edges() {
            assert!(inst.result.has_edge(a, b));
        }
        for (t, &w) in &inst.apex_index {
            assert_eq!(inst.result.neighbors(w), t.as_slice());
        }
    }
}
