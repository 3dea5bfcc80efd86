//! Placing triangulated surfaces into a small fixed set of generic points.
//!
//! A surface is reduced by edge contractions to a small base, the base is
//! placed injectively, and the contracted vertices are reinserted in reverse
//! order. Each reinserted vertex takes the first location (in index order)
//! outside its avoidance set that keeps the framework infinitesimally rigid.

mod incremental;

use std::collections::{BTreeMap, BTreeSet, HashSet, VecDeque};
use std::fmt;

use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::complex::{Complex2, Triangle};
use crate::contraction::{reduction_schedule, vertex_split, ContractionStep};
use crate::linalg::PrimeField;
use crate::rigidity::{is_infinitesimally_rigid_seeded, Framework, Graph, MotionWitness, RigidityError};
use crate::Vertex;

pub(crate) use incremental::{RigidityTracker, SplitMove};

/// Default half-width of the coordinate box, `2^40`.
pub const DEFAULT_COORDINATE_BOUND: i64 = 1 << 40;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PlacementError {
    #[error("insufficient locations, need >= {need}, have {have}")]
    InsufficientLocations { need: usize, have: usize },
    #[error("location set not generic enough at vertex {vertex}, resample")]
    NotGenericEnough { vertex: Vertex },
    #[error("complex does not reduce to the tetrahedron by contracting vertices of degree <= {max_degree} (stuck at {stuck_at} vertices)")]
    NotReducible { max_degree: usize, stuck_at: usize },
    #[error("invalid complex for this strategy: {0}")]
    InvalidComplex(String),
    #[error("locations are {got}-dimensional, placement needs 3")]
    WrongDimension { got: usize },
    #[error("duplicate location {0:?}")]
    DuplicateLocation(Vec<i64>),
    #[error("assignment misses vertex {0}")]
    Unassigned(Vertex),
    #[error("location index {index} out of range for {size} locations")]
    BadIndex { index: usize, size: usize },
}

/// An indexed set of distinct integer points.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LocationSet {
    pub points: Vec<Vec<i64>>,
    pub dim: usize,
    pub seed: Option<u64>,
    pub coordinate_bound: i64,
}

impl LocationSet {
    /// Wraps explicit points, rejecting duplicates.
    pub fn new(points: Vec<Vec<i64>>, dim: usize) -> Result<Self, PlacementError> {
        let mut seen = HashSet::new();
        for p in &points {
            if p.len() != dim {
                return Err(PlacementError::WrongDimension { got: p.len() });
            }
            if !seen.insert(p.clone()) {
                return Err(PlacementError::DuplicateLocation(p.clone()));
            }
        }
        let bound = points.iter().flatten().map(|x| x.unsigned_abs()).max().unwrap_or(0).min(i64::MAX as u64) as i64;
        Ok(LocationSet { points, dim, seed: None, coordinate_bound: bound })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// `c` distinct points with coordinates uniform in `[-2^40, 2^40]`.
pub fn generate_locations(c: usize, d: usize, seed: u64) -> LocationSet {
    generate_locations_bounded(c, d, seed, DEFAULT_COORDINATE_BOUND)
}

pub fn generate_locations_bounded(c: usize, d: usize, seed: u64, bound: i64) -> LocationSet {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut seen = HashSet::new();
    let mut points = Vec::with_capacity(c);
    while points.len() < c {
        let p: Vec<i64> = (0..d).map(|_| rng.gen_range(-bound..=bound)).collect();
        if seen.insert(p.clone()) {
            points.push(p);
        }
    }
    LocationSet { points, dim: d, seed: Some(seed), coordinate_bound: bound }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Strategy {
    Sphere76,
    Surface,
    Stacked,
    Q10,
}

impl Strategy {
    pub fn max_degree(self) -> usize {
        match self {
            Strategy::Sphere76 => 5,
            Strategy::Surface => 6,
            Strategy::Stacked => 3,
            Strategy::Q10 => 4,
        }
    }

    pub fn condition_mode(self) -> ConditionMode {
        match self {
            Strategy::Sphere76 => ConditionMode::C,
            Strategy::Surface => ConditionMode::CDoublePrime,
            Strategy::Stacked => ConditionMode::None,
            Strategy::Q10 => ConditionMode::CPrime,
        }
    }

    /// Smallest location set the strategy accepts.
    pub fn min_locations(self) -> usize {
        match self {
            Strategy::Sphere76 => 76,
            Strategy::Surface => 132,
            Strategy::Stacked => 4,
            Strategy::Q10 => 10,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Strategy::Sphere76 => "sphere76",
            Strategy::Surface => "surface",
            Strategy::Stacked => "stacked",
            Strategy::Q10 => "q10",
        }
    }
}

impl std::str::FromStr for Strategy {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "sphere76" => Ok(Strategy::Sphere76),
            "surface" => Ok(Strategy::Surface),
            "stacked" => Ok(Strategy::Stacked),
            "q10" => Ok(Strategy::Q10),
            other => Err(format!("unknown strategy {other}")),
        }
    }
}

/// Local injectivity conditions on small discs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ConditionMode {
    /// Discs of at most 3 triangles.
    C,
    /// Discs of 2 triangles.
    CPrime,
    /// Fans of at most 4 triangles around a vertex.
    CDoublePrime,
    None,
}

impl ConditionMode {
    /// Number of triangle rings around the star whose vertices must be avoided.
    fn rings(self) -> usize {
        match self {
            ConditionMode::None => 0,
            ConditionMode::CPrime => 1,
            ConditionMode::C => 2,
            ConditionMode::CDoublePrime => 3,
        }
    }
}

impl fmt::Display for ConditionMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ConditionMode::C => "C",
            ConditionMode::CPrime => "C'",
            ConditionMode::CDoublePrime => "C''",
            ConditionMode::None => "none",
        })
    }
}

impl std::str::FromStr for ConditionMode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "C" => Ok(ConditionMode::C),
            "C'" => Ok(ConditionMode::CPrime),
            "C''" => Ok(ConditionMode::CDoublePrime),
            "none" => Ok(ConditionMode::None),
            other => Err(format!("unknown condition mode {other}")),
        }
    }
}

/// Vertices of the star of `v` and of the first `rings` rings of triangles
/// around it (each ring: triangles sharing an edge with the previous ones).
fn ring_vertices(c: &Complex2, v: Vertex, rings: usize) -> BTreeSet<Vertex> {
    let tris = c.triangles();
    let mut seen: BTreeSet<usize> = c.star(v).iter().copied().collect();
    let mut frontier: Vec<usize> = seen.iter().copied().collect();
    let mut out: BTreeSet<Vertex> = c.neighbors(v).iter().copied().collect();
    for _ in 0..rings {
        let mut next = Vec::new();
        for &t in &frontier {
            let [a, b, d] = tris[t];
            for (x, y) in [(a, b), (b, d), (a, d)] {
                for &s in c.edge_star(x, y) {
                    if seen.insert(s) {
                        next.push(s);
                        out.extend(tris[s]);
                    }
                }
            }
        }
        frontier = next;
    }
    out.remove(&v);
    out
}

/// Location indices used by the rings around `v` that `mode` asks `v` to avoid.
pub fn avoidance_set(c: &Complex2, v: Vertex, assignment: &BTreeMap<Vertex, usize>, mode: ConditionMode) -> BTreeSet<usize> {
    ring_vertices(c, v, mode.rings()).iter().filter_map(|w| assignment.get(w).copied()).collect()
}

/// Outcome of [`check_condition_c`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConditionReport {
    pub ok: bool,
    pub violating_disc: Option<Vec<Triangle>>,
}

fn injective_on(assignment: &BTreeMap<Vertex, usize>, tris: &[Triangle]) -> bool {
    let verts: BTreeSet<Vertex> = tris.iter().flatten().copied().collect();
    let locs: BTreeSet<usize> = verts.iter().filter_map(|v| assignment.get(v)).copied().collect();
    locs.len() == verts.len()
}

/// Disc test for a small triangle set: one boundary cycle and Euler characteristic 1.
fn is_disc(tris: &[Triangle]) -> bool {
    let mut edge_count: BTreeMap<[Vertex; 2], usize> = BTreeMap::new();
    let mut verts = BTreeSet::new();
    for t in tris {
        verts.extend(t.iter().copied());
        for (a, b) in [(t[0], t[1]), (t[1], t[2]), (t[0], t[2])] {
            *edge_count.entry([a, b]).or_default() += 1;
        }
    }
    let chi = verts.len() as i64 - edge_count.len() as i64 + tris.len() as i64;
    if chi != 1 {
        return false;
    }
    let boundary: Vec<[Vertex; 2]> = edge_count.iter().filter(|(_, &n)| n == 1).map(|(e, _)| *e).collect();
    let mut adj: BTreeMap<Vertex, Vec<Vertex>> = BTreeMap::new();
    for [a, b] in &boundary {
        adj.entry(*a).or_default().push(*b);
        adj.entry(*b).or_default().push(*a);
    }
    if adj.values().any(|n| n.len() != 2) {
        return false;
    }
    // Walk one cycle and require it to use every boundary edge.
    let Some((&start, _)) = adj.iter().next() else { return false };
    let (mut prev, mut cur, mut len) = (start, adj[&start][0], 1);
    while cur != start {
        let n = &adj[&cur];
        let next = if n[0] == prev { n[1] } else { n[0] };
        prev = cur;
        cur = next;
        len += 1;
    }
    len == boundary.len()
}

fn dual_neighbors(c: &Complex2, t: usize) -> Vec<usize> {
    let [a, b, d] = c.triangles()[t];
    let mut out = Vec::new();
    for (x, y) in [(a, b), (b, d), (a, d)] {
        out.extend(c.edge_star(x, y).iter().copied().filter(|&s| s != t));
    }
    out
}

/// Checks local injectivity on every disc the mode names.
pub fn check_condition_c(c: &Complex2, assignment: &BTreeMap<Vertex, usize>, mode: ConditionMode) -> ConditionReport {
    let tris = c.triangles();
    let fail = |disc: Vec<Triangle>| ConditionReport { ok: false, violating_disc: Some(disc) };
    if mode == ConditionMode::None {
        return ConditionReport { ok: true, violating_disc: None };
    }
    for &t in tris {
        if !injective_on(assignment, &[t]) {
            return fail(vec![t]);
        }
    }
    match mode {
        ConditionMode::C | ConditionMode::CPrime => {
            for i in 0..tris.len() {
                let nbrs = dual_neighbors(c, i);
                for &j in nbrs.iter().filter(|&&j| j > i) {
                    if !injective_on(assignment, &[tris[i], tris[j]]) {
                        return fail(vec![tris[i], tris[j]]);
                    }
                }
                if mode == ConditionMode::C {
                    for (x, &j) in nbrs.iter().enumerate() {
                        for &k in &nbrs[x + 1..] {
                            let disc = [tris[j], tris[i], tris[k]];
                            if is_disc(&disc) && !injective_on(assignment, &disc) {
                                return fail(disc.to_vec());
                            }
                        }
                    }
                }
            }
        }
        ConditionMode::CDoublePrime => {
            for &w in c.vertices() {
                let Ok(link) = c.link_cycle(w) else { continue };
                let k = link.len();
                for start in 0..k {
                    for len in 2..=k.min(4) {
                        let disc: Vec<Triangle> = (0..len)
                            .map(|j| crate::complex::sort3([w, link[(start + j) % k], link[(start + j + 1) % k]]))
                            .collect();
                        if !injective_on(assignment, &disc) {
                            return fail(disc);
                        }
                    }
                }
            }
        }
        ConditionMode::None => {}
    }
    ConditionReport { ok: true, violating_disc: None }
}

/// Independently recomputed certificate for an assignment.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlacementCertificate {
    pub rigid: bool,
    pub rank: usize,
    pub required_rank: usize,
    pub condition_mode: ConditionMode,
    pub condition_ok: bool,
    pub locations_used: usize,
    pub locations_total: usize,
    pub witness: Option<MotionWitness>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlacementResult {
    pub strategy: Strategy,
    pub assignment: BTreeMap<Vertex, usize>,
    pub certificate: PlacementCertificate,
    /// Rank-failing candidates tried before success, per reinserted vertex.
    pub failure_counts: BTreeMap<Vertex, usize>,
    /// Size of the ring avoidance set, per reinserted vertex.
    pub avoidance_sizes: BTreeMap<Vertex, usize>,
    /// Locations avoided on top of the ring set because of later splits, per reinserted vertex.
    pub lookahead_sizes: BTreeMap<Vertex, usize>,
    pub base_vertices: usize,
    /// Length of the location prefix this run actually needed.
    pub locations_needed: usize,
}

impl PlacementResult {
    pub fn max_failures(&self) -> usize {
        self.failure_counts.values().copied().max().unwrap_or(0)
    }

    pub fn max_avoidance(&self) -> usize {
        self.avoidance_sizes.values().copied().max().unwrap_or(0)
    }

    pub fn max_lookahead(&self) -> usize {
        self.lookahead_sizes.values().copied().max().unwrap_or(0)
    }
}

/// Vertex pairs sharing a fan of at most `max_tris` consecutive triangles around `w`.
fn fan_pairs(c: &Complex2, w: Vertex, max_tris: usize, out: &mut BTreeMap<Vertex, BTreeSet<Vertex>>) {
    let Ok(link) = c.link_cycle(w) else { return };
    let k = link.len();
    let span = (max_tris + 1).min(k);
    for start in 0..k {
        let mut window: Vec<Vertex> = (0..span).map(|j| link[(start + j) % k]).collect();
        window.push(w);
        for (i, &x) in window.iter().enumerate() {
            for &y in &window[i + 1..] {
                out.entry(x).or_default().insert(y);
                out.entry(y).or_default().insert(x);
            }
        }
    }
}

/// Every pair that shares a condition disc in some complex of the replay.
///
/// A degree-5 split compresses the link of its target, so two old vertices
/// can land in a common small disc without involving the new vertex. Ring
/// avoidance around the new vertex cannot see that; the later-placed vertex
/// of each such pair has to avoid the other one.
fn disc_partners(base: &Complex2, steps: &[ContractionStep], mode: ConditionMode) -> BTreeMap<Vertex, BTreeSet<Vertex>> {
    let max_tris = match mode {
        ConditionMode::None => return BTreeMap::new(),
        ConditionMode::CPrime => 2,
        ConditionMode::C => 3,
        ConditionMode::CDoublePrime => 4,
    };
    let mut out = BTreeMap::new();
    let mut cur = base.clone();
    for step in steps.iter().rev() {
        cur = vertex_split(&cur, step).expect("schedule replays");
        for &w in &step.link {
            fan_pairs(&cur, w, max_tris, &mut out);
        }
        fan_pairs(&cur, step.removed, max_tris, &mut out);
    }
    out
}

fn framework_for(c: &Complex2, a: &LocationSet, assignment: &BTreeMap<Vertex, usize>) -> Result<Framework, PlacementError> {
    let mut placement = BTreeMap::new();
    for &v in c.vertices() {
        let &idx = assignment.get(&v).ok_or(PlacementError::Unassigned(v))?;
        let p = a.points.get(idx).ok_or(PlacementError::BadIndex { index: idx, size: a.len() })?;
        placement.insert(v, p.iter().map(|&x| BigRational::from_integer(x.into())).collect());
    }
    Framework::new(Graph::from_complex(c), a.dim, placement).map_err(|e| match e {
        RigidityError::BadDimension(d) => PlacementError::WrongDimension { got: d },
        other => PlacementError::InvalidComplex(other.to_string()),
    })
}

/// Rebuilds the framework and re-checks rigidity and the local condition from scratch.
pub fn certify_placement(
    c: &Complex2,
    a: &LocationSet,
    assignment: &BTreeMap<Vertex, usize>,
    mode: ConditionMode,
    seed: u64,
) -> Result<PlacementCertificate, PlacementError> {
    let f = framework_for(c, a, assignment)?;
    let rep = is_infinitesimally_rigid_seeded(&f, seed).map_err(|e| PlacementError::InvalidComplex(e.to_string()))?;
    let cond = check_condition_c(c, assignment, mode);
    let used: BTreeSet<usize> = assignment.iter().filter(|(v, _)| c.contains_vertex(**v)).map(|(_, &i)| i).collect();
    Ok(PlacementCertificate {
        rigid: rep.rigid,
        rank: rep.rank,
        required_rank: rep.required_rank,
        condition_mode: mode,
        condition_ok: cond.ok,
        locations_used: used.len(),
        locations_total: a.len(),
        witness: rep.witness,
    })
}

fn validate(c: &Complex2, strategy: Strategy) -> Result<(), PlacementError> {
    let r = c.surface_report();
    if !r.is_closed_surface {
        return Err(PlacementError::InvalidComplex("not a closed connected surface".into()));
    }
    if strategy != Strategy::Surface && r.euler_characteristic != 2 {
        return Err(PlacementError::InvalidComplex(format!(
            "strategy {} needs a sphere, got Euler characteristic {}",
            strategy.name(),
            r.euler_characteristic
        )));
    }
    Ok(())
}

/// Places `c` into `a` with the given strategy and certifies the result.
pub fn place(c: &Complex2, a: &LocationSet, strategy: Strategy, seed: u64) -> Result<PlacementResult, PlacementError> {
    if a.dim != 3 {
        return Err(PlacementError::WrongDimension { got: a.dim });
    }
    validate(c, strategy)?;
    if a.len() < strategy.min_locations() {
        return Err(PlacementError::InsufficientLocations { need: strategy.min_locations(), have: a.len() });
    }
    let floor = (strategy == Strategy::Sphere76).then_some(76);
    let schedule = reduction_schedule(c, strategy.max_degree(), floor);
    let base = &schedule.base;
    let n_base = base.num_vertices();
    match strategy {
        Strategy::Stacked | Strategy::Q10 if n_base != 4 => {
            return Err(PlacementError::NotReducible { max_degree: strategy.max_degree(), stuck_at: n_base })
        }
        Strategy::Sphere76 if n_base > 76 => {
            return Err(PlacementError::NotReducible { max_degree: strategy.max_degree(), stuck_at: n_base })
        }
        _ => {}
    }
    if n_base > a.len() {
        return Err(PlacementError::InsufficientLocations { need: n_base, have: a.len() });
    }
    let mode = strategy.condition_mode();
    let mut assignment: BTreeMap<Vertex, usize> = base.vertices().iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let points: BTreeMap<Vertex, Vec<i64>> = assignment.iter().map(|(&v, &i)| (v, a.points[i].clone())).collect();
    let field = PrimeField::from_seed(seed);
    let mut tracker = RigidityTracker::new(field, base.vertices(), base.edges(), &points, c.num_vertices())
        .ok_or(PlacementError::NotGenericEnough { vertex: base.vertices()[0] })?;

    let partners = disc_partners(base, &schedule.steps, mode);
    let mut failure_counts = BTreeMap::new();
    let mut avoidance_sizes = BTreeMap::new();
    let mut lookahead_sizes = BTreeMap::new();
    let mut locations_needed = n_base;
    let mut cur = base.clone();
    for step in schedule.steps.iter().rev() {
        let next = vertex_split(&cur, step).map_err(|e| PlacementError::InvalidComplex(e.to_string()))?;
        let v = step.removed;
        let mut avoid = avoidance_set(&next, v, &assignment, mode);
        let ring = avoid.len();
        avoid.extend(partners.get(&v).into_iter().flatten().filter_map(|y| assignment.get(y).copied()));
        let (idx, failures) = extend(&mut tracker, step, &avoid, a)?;
        assignment.insert(v, idx);
        failure_counts.insert(v, failures);
        avoidance_sizes.insert(v, ring);
        lookahead_sizes.insert(v, avoid.len() - ring);
        locations_needed = locations_needed.max(idx + 1);
        cur = next;
    }
    debug_assert_eq!(&cur, c);
    let certificate = certify_placement(c, a, &assignment, mode, seed)?;
    Ok(PlacementResult {
        strategy,
        assignment,
        certificate,
        failure_counts,
        avoidance_sizes,
        lookahead_sizes,
        base_vertices: n_base,
        locations_needed,
    })
}

/// First admissible location for the reinserted vertex; returns it with the
/// number of rank-failing candidates tried before it.
fn extend(
    tracker: &mut RigidityTracker,
    step: &ContractionStep,
    avoid: &BTreeSet<usize>,
    a: &LocationSet,
) -> Result<(usize, usize), PlacementError> {
    let mv = SplitMove::from_link(step.removed, &step.link);
    let prep = tracker.prepare(&mv);
    let mut failures = 0;
    for (idx, p) in a.points.iter().enumerate() {
        if avoid.contains(&idx) {
            continue;
        }
        if let Some(pending) = tracker.try_point(&prep, p) {
            tracker.commit(&mv, prep, pending);
            return Ok((idx, failures));
        }
        failures += 1;
    }
    Err(PlacementError::NotGenericEnough { vertex: step.removed })
}

/// Breadth-first order of the dual graph from triangle 0; used by generators.
pub(crate) fn dual_distance(c: &Complex2, from: usize) -> Vec<usize> {
    let mut dist = vec![usize::MAX; c.triangles().len()];
    dist[from] = 0;
    let mut q = VecDeque::from([from]);
    while let Some(t) = q.pop_front() {
        for s in dual_neighbors(c, t) {
            if dist[s] == usize::MAX {
                dist[s] = dist[t] + 1;
                q.push_back(s);
            }
        }
    }
    dist
}
