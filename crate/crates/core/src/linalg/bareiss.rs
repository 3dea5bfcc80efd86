//! Fraction-free elimination over the integers.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

/// Rank plus the pivot minor found by forward Bareiss elimination.
pub(crate) struct ExactElimination {
    pub rank: usize,
    pub pivot_rows: Vec<usize>,
    pub pivot_cols: Vec<usize>,
}

fn exact_div(num: BigInt, den: &BigInt) -> BigInt {
    let (q, r) = num.div_rem(den);
    debug_assert!(r.is_zero(), "Bareiss division must be exact");
    q
}

/// Forward Bareiss elimination; every intermediate entry is a minor of the input.
pub(crate) fn bareiss_rank(mut a: Vec<Vec<BigInt>>) -> ExactElimination {
    let rows = a.len();
    let cols = a.first().map_or(0, Vec::len);
    let mut order: Vec<usize> = (0..rows).collect();
    let mut prev = BigInt::one();
    let mut pivot_rows = Vec::new();
    let mut pivot_cols = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(found) = (r..rows).find(|&i| !a[i][c].is_zero()) else {
            continue;
        };
        a.swap(found, r);
        order.swap(found, r);
        let (head, tail) = a.split_at_mut(r + 1);
        let pivot_row = &head[r];
        let piv = pivot_row[c].clone();
        for row in tail.iter_mut() {
            let factor = row[c].clone();
            for j in c + 1..cols {
                let t = &piv * &row[j] - &factor * &pivot_row[j];
                row[j] = exact_div(t, &prev);
            }
            row[c] = BigInt::zero();
        }
        prev = piv;
        pivot_rows.push(order[r]);
        pivot_cols.push(c);
        r += 1;
    }
    ExactElimination { rank: r, pivot_rows, pivot_cols }
}

/// Integer basis of `{x : A x = 0}` via fraction-free Gauss-Jordan.
///
/// Each vector is primitive (content 1) with its first nonzero entry positive.
pub(crate) fn integer_kernel(mut a: Vec<Vec<BigInt>>, cols: usize) -> Vec<Vec<BigInt>> {
    let rows = a.len();
    let mut prev = BigInt::one();
    let mut pivots: Vec<usize> = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(found) = (r..rows).find(|&i| !a[i][c].is_zero()) else {
            continue;
        };
        a.swap(found, r);
        let pivot_row = a[r].clone();
        let piv = pivot_row[c].clone();
        for (i, row) in a.iter_mut().enumerate() {
            if i == r {
                continue;
            }
            let factor = row[c].clone();
            for j in 0..cols {
                if factor.is_zero() {
                    if !row[j].is_zero() {
                        row[j] = exact_div(&piv * &row[j], &prev);
                    }
                } else {
                    let t = &piv * &row[j] - &factor * &pivot_row[j];
                    row[j] = exact_div(t, &prev);
                }
            }
        }
        prev = piv;
        pivots.push(c);
        r += 1;
    }
    let d = prev;
    let mut basis = Vec::new();
    let is_pivot: Vec<bool> = {
        let mut v = vec![false; cols];
        for &c in &pivots {
            v[c] = true;
        }
        v
    };
    for free in (0..cols).filter(|&j| !is_pivot[j]) {
        let mut x = vec![BigInt::zero(); cols];
        x[free] = d.clone();
        for (k, &pc) in pivots.iter().enumerate() {
            x[pc] = -a[k][free].clone();
        }
        basis.push(normalize(x));
    }
    basis
}

fn normalize(mut x: Vec<BigInt>) -> Vec<BigInt> {
    let g = x.iter().fold(BigInt::zero(), |g, v| g.gcd(v));
    if g.is_zero() {
        return x;
    }
    let flip = x.iter().find(|v| !v.is_zero()).is_some_and(|v| v.is_negative());
    for v in x.iter_mut() {
        *v = &*v / &g;
        if flip {
            *v = -&*v;
        }
    }
    x
}
