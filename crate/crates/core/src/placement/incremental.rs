//! Incremental rank maintenance for vertex splits in 3-space, modulo a prime.
//!
//! The rigidity matrix restricted to all but six pinned coordinates has full
//! row rank exactly when the framework is infinitesimally rigid (the pins are
//! chosen so the trivial motions restricted to them are independent). We keep
//! a column basis `B` of that restricted matrix together with its dual
//! vectors `m_e` (`<m_e, col_g> = [e = g]` for `g` in `B`).
//!
//! A split removes some edges and adds a vertex with new edges. The kept basis
//! columns span a subspace whose annihilator is spanned by the duals of the
//! removed basis edges plus the three coordinate vectors of the new vertex.
//! The new framework is rigid iff the remaining columns (added and redundant)
//! restricted to that annihilator have full rank, which is a tiny matrix per
//! candidate location.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use crate::complex::{edge, Edge};
use crate::linalg::{ModMatrix, PrimeField};
use crate::Vertex;

/// Edge changes made by reinserting `v` next to `u`.
#[derive(Debug, Clone)]
pub(crate) struct SplitMove {
    pub v: Vertex,
    pub removed: Vec<Edge>,
    /// Other endpoints of the new edges at `v`.
    pub new_neighbors: Vec<Vertex>,
}

impl SplitMove {
    /// From a link `[u, l1, ..., l(k-1)]` rotated to start at the target.
    pub fn from_link(v: Vertex, link: &[Vertex]) -> Self {
        let u = link[0];
        let k = link.len();
        let removed = (2..k - 1).map(|i| edge(u, link[i])).collect();
        SplitMove { v, removed, new_neighbors: link.to_vec() }
    }
}

enum Row {
    Dual(usize),
    Unit(usize),
}

enum Col {
    Added(Vertex),
    Redundant(Edge),
}

/// Candidate-independent data for one split.
pub(crate) struct PreparedSplit {
    rows: Vec<Row>,
    cols: Vec<Col>,
    /// `q0[i][j]` is the part of `Q[i][j]` that does not depend on `f(v)`.
    q0: Vec<Vec<u64>>,
    /// For dual rows and added columns at `w`: the block `m[w]`, so `Q -= <m[w], f(v)>`.
    lin: Vec<Vec<[u64; 3]>>,
    new_slot: usize,
}

pub(crate) struct Pending {
    q: ModMatrix,
    pivots: Vec<usize>,
    point: [u64; 3],
}

#[derive(Debug, Clone)]
pub(crate) struct RigidityTracker {
    field: PrimeField,
    slot: HashMap<Vertex, usize>,
    coords: Vec<[u64; 3]>,
    capacity: usize,
    basis: Vec<Edge>,
    duals: Vec<Vec<u64>>,
    basis_index: HashMap<Edge, usize>,
    redundant: BTreeSet<Edge>,
}

impl RigidityTracker {
    /// Starts from a framework; `None` unless it is infinitesimally rigid mod p.
    pub fn new(
        field: PrimeField,
        vertices: &[Vertex],
        edges: &[Edge],
        points: &BTreeMap<Vertex, Vec<i64>>,
        capacity_vertices: usize,
    ) -> Option<Self> {
        let n = vertices.len();
        if n < 4 {
            return None;
        }
        let capacity = 3 * capacity_vertices.max(n);
        let slot: HashMap<Vertex, usize> = vertices.iter().enumerate().map(|(i, &v)| (v, i)).collect();
        let coords: Vec<[u64; 3]> = vertices
            .iter()
            .map(|v| {
                let p = &points[v];
                [field.from_i64(p[0]), field.from_i64(p[1]), field.from_i64(p[2])]
            })
            .collect();
        let pinned = choose_pins(&field, &coords)?;
        let free: Vec<usize> = (0..3 * n).filter(|c| !pinned.contains(c)).collect();
        let mut row_of = vec![usize::MAX; 3 * n];
        for (r, &c) in free.iter().enumerate() {
            row_of[c] = r;
        }
        let mut s = ModMatrix::zeros(free.len(), edges.len());
        for (j, &[a, b]) in edges.iter().enumerate() {
            let (sa, sb) = (slot[&a], slot[&b]);
            for k in 0..3 {
                let d = field.sub(coords[sa][k], coords[sb][k]);
                if row_of[3 * sa + k] != usize::MAX {
                    s.set(row_of[3 * sa + k], j, d);
                }
                if row_of[3 * sb + k] != usize::MAX {
                    s.set(row_of[3 * sb + k], j, field.neg(d));
                }
            }
        }
        let elim = s.clone().eliminate(&field);
        if elim.rank != free.len() {
            return None;
        }
        let mut sb = ModMatrix::zeros(free.len(), free.len());
        for r in 0..free.len() {
            for (k, &c) in elim.pivot_cols.iter().enumerate() {
                sb.set(r, k, s.get(r, c));
            }
        }
        let inv = sb.inverse(&field)?;
        let basis: Vec<Edge> = elim.pivot_cols.iter().map(|&c| edges[c]).collect();
        let duals: Vec<Vec<u64>> = (0..basis.len())
            .map(|k| {
                let mut m = vec![0u64; capacity];
                for (r, &c) in free.iter().enumerate() {
                    m[c] = inv.get(k, r);
                }
                m
            })
            .collect();
        let basis_index = basis.iter().enumerate().map(|(i, &e)| (e, i)).collect();
        let in_basis: BTreeSet<Edge> = basis.iter().copied().collect();
        let redundant = edges.iter().copied().filter(|e| !in_basis.contains(e)).collect();
        Some(RigidityTracker { field, slot, coords, capacity, basis, duals, basis_index, redundant })
    }

    pub fn num_vertices(&self) -> usize {
        self.coords.len()
    }

    fn block(&self, m: &[u64], w: Vertex) -> [u64; 3] {
        let s = 3 * self.slot[&w];
        [m[s], m[s + 1], m[s + 2]]
    }

    fn dot3(&self, a: [u64; 3], b: [u64; 3]) -> u64 {
        let f = &self.field;
        f.add(f.add(f.mul(a[0], b[0]), f.mul(a[1], b[1])), f.mul(a[2], b[2]))
    }

    fn diff3(&self, a: [u64; 3], b: [u64; 3]) -> [u64; 3] {
        let f = &self.field;
        [f.sub(a[0], b[0]), f.sub(a[1], b[1]), f.sub(a[2], b[2])]
    }

    fn point(&self, w: Vertex) -> [u64; 3] {
        self.coords[self.slot[&w]]
    }

    /// `<m, col(a,b)>` for an edge not touching the new vertex.
    fn dual_on_edge(&self, m: &[u64], [a, b]: Edge) -> u64 {
        let dm = self.diff3(self.block(m, a), self.block(m, b));
        self.dot3(dm, self.diff3(self.point(a), self.point(b)))
    }

    pub fn prepare(&self, mv: &SplitMove) -> PreparedSplit {
        assert!(self.num_vertices() < self.capacity / 3, "tracker capacity exceeded");
        let removed: BTreeSet<Edge> = mv.removed.iter().copied().collect();
        let mut rows: Vec<Row> = mv
            .removed
            .iter()
            .filter_map(|e| self.basis_index.get(e).map(|&i| Row::Dual(i)))
            .collect();
        rows.extend((0..3).map(Row::Unit));
        let mut cols: Vec<Col> = mv.new_neighbors.iter().map(|&w| Col::Added(w)).collect();
        cols.extend(self.redundant.iter().filter(|e| !removed.contains(*e)).map(|&e| Col::Redundant(e)));
        let mut q0 = vec![vec![0u64; cols.len()]; rows.len()];
        let mut lin = vec![vec![[0u64; 3]; cols.len()]; rows.len()];
        for (i, row) in rows.iter().enumerate() {
            for (j, col) in cols.iter().enumerate() {
                match (row, col) {
                    (Row::Dual(k), Col::Added(w)) => {
                        let mw = self.block(&self.duals[*k], *w);
                        q0[i][j] = self.dot3(mw, self.point(*w));
                        lin[i][j] = mw;
                    }
                    (Row::Dual(k), Col::Redundant(e)) => q0[i][j] = self.dual_on_edge(&self.duals[*k], *e),
                    (Row::Unit(c), Col::Added(w)) => q0[i][j] = self.field.neg(self.point(*w)[*c]),
                    (Row::Unit(_), Col::Redundant(_)) => {}
                }
            }
        }
        PreparedSplit { rows, cols, q0, lin, new_slot: self.num_vertices() }
    }

    /// `Some` iff placing the new vertex at `x` keeps the framework rigid.
    pub fn try_point(&self, prep: &PreparedSplit, x: &[i64]) -> Option<Pending> {
        let f = &self.field;
        let point = [f.from_i64(x[0]), f.from_i64(x[1]), f.from_i64(x[2])];
        let mut q = ModMatrix::zeros(prep.rows.len(), prep.cols.len());
        for (i, row) in prep.rows.iter().enumerate() {
            for (j, col) in prep.cols.iter().enumerate() {
                let val = match (row, col) {
                    (Row::Dual(_), Col::Added(_)) => f.sub(prep.q0[i][j], self.dot3(prep.lin[i][j], point)),
                    (Row::Unit(c), Col::Added(_)) => f.add(prep.q0[i][j], point[*c]),
                    _ => prep.q0[i][j],
                };
                q.set(i, j, val);
            }
        }
        let elim = q.clone().eliminate(f);
        (elim.rank == prep.rows.len()).then_some(Pending { q, pivots: elim.pivot_cols, point })
    }

    /// Applies an accepted split and updates the basis and duals.
    pub fn commit(&mut self, mv: &SplitMove, prep: PreparedSplit, pending: Pending) {
        let f = self.field;
        let z = prep.rows.len();
        let mut qp = ModMatrix::zeros(z, z);
        for i in 0..z {
            for (k, &c) in pending.pivots.iter().enumerate() {
                qp.set(i, k, pending.q.get(i, c));
            }
        }
        let qinv = qp.inverse(&f).expect("pivot block is invertible");
        let vslot = prep.new_slot;
        self.slot.insert(mv.v, vslot);
        self.coords.push(pending.point);
        let active = 3 * (vslot + 1);

        let removed_rows: Vec<usize> = prep
            .rows
            .iter()
            .filter_map(|r| match r {
                Row::Dual(k) => Some(*k),
                Row::Unit(_) => None,
            })
            .collect();
        // Old duals of the removed basis edges, restricted to the active prefix.
        let zs: Vec<Option<Vec<u64>>> = prep
            .rows
            .iter()
            .map(|r| match r {
                Row::Dual(k) => Some(self.duals[*k][..active].to_vec()),
                Row::Unit(_) => None,
            })
            .collect();
        // New duals for the pivot columns: m'_k = sum_i qinv[k][i] z_i.
        let mut fresh: Vec<Vec<u64>> = Vec::with_capacity(z);
        for k in 0..z {
            let mut m = vec![0u64; self.capacity];
            for i in 0..z {
                let coef = qinv.get(k, i);
                if coef == 0 {
                    continue;
                }
                match prep.rows[i] {
                    Row::Dual(_) => axpy(&f, &mut m[..active], coef, zs[i].as_ref().unwrap()),
                    Row::Unit(c) => m[3 * vslot + c] = f.add(m[3 * vslot + c], coef),
                }
            }
            fresh.push(m);
        }
        let pivot_cols: Vec<&Col> = pending.pivots.iter().map(|&c| &prep.cols[c]).collect();
        // Kept duals: m_e -= sum_i alpha_i z_i with alpha = c_e * qinv.
        let removed_set: BTreeSet<usize> = removed_rows.iter().copied().collect();
        for e in 0..self.duals.len() {
            if removed_set.contains(&e) {
                continue;
            }
            let c: Vec<u64> = pivot_cols
                .iter()
                .map(|col| match col {
                    Col::Added(w) => {
                        let mw = self.block(&self.duals[e], *w);
                        self.dot3(mw, self.diff3(self.point(*w), pending.point))
                    }
                    Col::Redundant(edge) => self.dual_on_edge(&self.duals[e], *edge),
                })
                .collect();
            if c.iter().all(|&x| x == 0) {
                continue;
            }
            for i in 0..z {
                let mut alpha = 0;
                for (k, &ck) in c.iter().enumerate() {
                    alpha = f.add(alpha, f.mul(ck, qinv.get(k, i)));
                }
                if alpha == 0 {
                    continue;
                }
                let neg = f.neg(alpha);
                match prep.rows[i] {
                    Row::Dual(_) => axpy(&f, &mut self.duals[e][..active], neg, zs[i].as_ref().unwrap()),
                    Row::Unit(cc) => {
                        let slot = 3 * vslot + cc;
                        self.duals[e][slot] = f.add(self.duals[e][slot], neg);
                    }
                }
            }
        }

        // Rebuild the basis: drop removed edges, append pivot columns.
        let new_edges: Vec<Edge> = pivot_cols
            .iter()
            .map(|col| match col {
                Col::Added(w) => edge(mv.v, *w),
                Col::Redundant(e) => *e,
            })
            .collect();
        let mut basis = Vec::with_capacity(self.basis.len() + 3);
        let mut duals = Vec::with_capacity(self.basis.len() + 3);
        for (i, (e, m)) in std::mem::take(&mut self.basis).into_iter().zip(std::mem::take(&mut self.duals)).enumerate() {
            if !removed_set.contains(&i) {
                basis.push(e);
                duals.push(m);
            }
        }
        basis.extend(new_edges.iter().copied());
        duals.extend(fresh);
        let chosen: BTreeSet<Edge> = new_edges.into_iter().collect();
        for col in &prep.cols {
            if let Col::Added(w) = col {
                let e = edge(mv.v, *w);
                if !chosen.contains(&e) {
                    self.redundant.insert(e);
                }
            }
        }
        for e in &mv.removed {
            self.redundant.remove(e);
        }
        for e in &chosen {
            self.redundant.remove(e);
        }
        self.basis_index = basis.iter().enumerate().map(|(i, &e)| (e, i)).collect();
        self.basis = basis;
        self.duals = duals;
    }

    #[cfg(test)]
    pub fn check_duals(&self) -> bool {
        // <m_e, col_g> = [e = g] over the basis.
        for (i, m) in self.duals.iter().enumerate() {
            for (j, &g) in self.basis.iter().enumerate() {
                let want = if i == j { self.field.one() } else { 0 };
                if self.dual_on_edge(m, g) != want {
                    return false;
                }
            }
        }
        true
    }
}

fn axpy(f: &PrimeField, y: &mut [u64], a: u64, x: &[u64]) {
    for (yi, &xi) in y.iter_mut().zip(x) {
        if xi != 0 {
            *yi = f.add(*yi, f.mul(a, xi));
        }
    }
}

/// Six coordinates on which the trivial motions are independent.
fn choose_pins(f: &PrimeField, coords: &[[u64; 3]]) -> Option<Vec<usize>> {
    let n = coords.len();
    let trivial = |c: usize| -> [u64; 6] {
        let (s, k) = (c / 3, c % 3);
        let [x, y, z] = coords[s];
        let one = f.one();
        let mut t = [0u64; 6];
        t[k] = one;
        // Rotations (0,-z,y), (z,0,-x), (-y,x,0).
        t[3] = [0, f.neg(z), y][k];
        t[4] = [z, 0, f.neg(x)][k];
        t[5] = [f.neg(y), x, 0][k];
        t
    };
    let candidates: Vec<usize> = (0..3 * n.min(4)).collect();
    let mut pick = Vec::new();
    // Greedy: keep a coordinate if it raises the rank of the chosen rows.
    for &c in &candidates {
        let mut m = ModMatrix::zeros(pick.len() + 1, 6);
        for (r, &p) in pick.iter().chain(std::iter::once(&c)).enumerate() {
            for (k, &x) in trivial(p).iter().enumerate() {
                m.set(r, k, x);
            }
        }
        if m.eliminate(f).rank == pick.len() + 1 {
            pick.push(c);
            if pick.len() == 6 {
                return Some(pick);
            }
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::contraction::reduction_schedule;
    use crate::linalg::rank_mod;
    use crate::rigidity::{rigidity_matrix_mod, Framework, Graph};
    use crate::Complex2;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn octa() -> Complex2 {
        let mut t = Vec::new();
        for a in [0, 1] {
            for b in [2, 3] {
                for c in [4, 5] {
                    t.push([a, b, c]);
                }
            }
        }
        Complex2::new(t).unwrap()
    }

    fn full_rank(c: &Complex2, pts: &BTreeMap<Vertex, Vec<i64>>) -> bool {
        let f = Framework::from_integer_points(Graph::from_complex(c), 3, pts).unwrap();
        let field = PrimeField::new(crate::linalg::PRIMES[0]);
        let m = rigidity_matrix_mod(&f, &field).unwrap();
        rank_mod(m, &field).rank_lower_bound == 3 * c.num_vertices() - 6
    }

    #[test]
    fn tracker_agrees_with_full_rank() {
        let target = octa();
        let sched = reduction_schedule(&target, 5, None);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let small: Vec<Vec<i64>> = (0..4).map(|_| (0..3).map(|_| rng.gen_range(-50..=50)).collect()).collect();
        let base = &sched.base;
        let mut pts: BTreeMap<Vertex, Vec<i64>> =
            base.vertices().iter().zip(&small).map(|(&v, p)| (v, p.clone())).collect();
        let field = PrimeField::new(crate::linalg::PRIMES[0]);
        let mut tr = RigidityTracker::new(field, base.vertices(), base.edges(), &pts, 6).unwrap();
        assert!(tr.check_duals());
        let mut cur = base.clone();
        for step in sched.steps.iter().rev() {
            let next = crate::contraction::vertex_split(&cur, step).unwrap();
            let mv = SplitMove::from_link(step.removed, &step.link);
            let prep = tr.prepare(&mv);
            // A few candidate points, including degenerate ones on existing vertices.
            let mut cands: Vec<Vec<i64>> = pts.values().cloned().collect();
            cands.push((0..3).map(|_| rng.gen_range(-50..=50)).collect());
            let mut accepted = None;
            for x in cands {
                let mut trial = pts.clone();
                trial.insert(step.removed, x.clone());
                let quick = tr.try_point(&prep, &x);
                assert_eq!(quick.is_some(), full_rank(&next, &trial));
                if accepted.is_none() {
                    if let Some(p) = quick {
                        accepted = Some((x, p));
                    }
                }
            }
            let (x, pending) = accepted.expect("a generic point works");
            tr.commit(&mv, prep, pending);
            pts.insert(step.removed, x);
            assert!(tr.check_duals());
            cur = next;
        }
        assert_eq!(cur, target);
    }
}
