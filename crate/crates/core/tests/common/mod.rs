#![allow(dead_code)]

use std::collections::BTreeMap;

use num_rational::BigRational;
use num_traits::Zero;

use fewloc::{Complex2, Framework, Graph, Vertex};

/// Plain Gauss-Jordan over the rationals; independent of the library's elimination.
pub fn oracle_rank(rows: &[Vec<BigRational>]) -> usize {
    let mut m: Vec<Vec<BigRational>> = rows.to_vec();
    let cols = m.first().map_or(0, Vec::len);
    let mut r = 0;
    for c in 0..cols {
        let Some(p) = (r..m.len()).find(|&i| !m[i][c].is_zero()) else { continue };
        m.swap(r, p);
        for i in 0..m.len() {
            if i != r && !m[i][c].is_zero() {
                let f = &m[i][c] / &m[r][c];
                for j in c..cols {
                    let d = &f * &m[r][j];
                    m[i][j] -= d;
                }
            }
        }
        r += 1;
    }
    r
}

/// Rigidity matrix rows written out directly from the definition: one row per edge.
pub fn oracle_edge_rows(f: &Framework) -> Vec<Vec<BigRational>> {
    let g = f.graph();
    let d = f.dim();
    let n = g.num_vertices();
    g.edges()
        .iter()
        .map(|&[u, v]| {
            let mut row = vec![BigRational::zero(); d * n];
            let (iu, iv) = (g.index_of(u).unwrap(), g.index_of(v).unwrap());
            for k in 0..d {
                let diff = &f.point(u)[k] - &f.point(v)[k];
                row[iu * d + k] = diff.clone();
                row[iv * d + k] = -diff;
            }
            row
        })
        .collect()
}

pub fn oracle_framework_rank(f: &Framework) -> usize {
    oracle_rank(&oracle_edge_rows(f))
}

/// The velocity condition on a single pair.
pub fn pair_holds(f: &Framework, vel: &BTreeMap<Vertex, Vec<BigRational>>, u: Vertex, v: Vertex) -> bool {
    let zero = vec![BigRational::zero(); f.dim()];
    let (a, b) = (vel.get(&u).unwrap_or(&zero), vel.get(&v).unwrap_or(&zero));
    let s: BigRational = (0..f.dim()).map(|k| (&b[k] - &a[k]) * (&f.point(v)[k] - &f.point(u)[k])).sum();
    s.is_zero()
}

pub fn points_from(assign: &BTreeMap<Vertex, usize>, locs: &[Vec<i64>]) -> BTreeMap<Vertex, Vec<i64>> {
    assign.iter().map(|(&v, &i)| (v, locs[i].clone())).collect()
}

pub fn framework(g: &Graph, d: usize, pts: &BTreeMap<Vertex, Vec<i64>>) -> Framework {
    Framework::from_integer_points(g.clone(), d, pts).unwrap()
}

pub fn counts(c: &Complex2) -> (usize, usize, usize) {
    (c.num_vertices(), c.edges().len(), c.triangles().len())
}
