//! Exact rational and modular-prime linear algebra.
//!
//! Two routes to a rank are offered. The modular route eliminates over a
//! 62-bit prime and reports a pivot minor that is nonzero mod `p`; a minor
//! that is nonzero mod `p` has a nonzero rational value, so the modular rank
//! is always a sound lower bound on the rational rank. The exact route runs
//! fraction-free (Bareiss) elimination on integers and is exact.

mod bareiss;
pub mod modular;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};

pub use modular::{Elimination, ModMatrix, PrimeField, PRIMES};

/// Dense matrix of normalized rationals, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RationalMatrix {
    rows: usize,
    cols: usize,
    data: Vec<BigRational>,
}

impl RationalMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        RationalMatrix { rows, cols, data: vec![BigRational::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, BigRational::one());
        }
        m
    }

    /// Panics if the rows are ragged.
    pub fn from_rows<T: Into<BigRational> + Clone>(rows: &[Vec<T>]) -> Self {
        let cols = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(rows.len() * cols);
        for row in rows {
            assert_eq!(row.len(), cols, "ragged rows");
            data.extend(row.iter().cloned().map(Into::into));
        }
        RationalMatrix { rows: rows.len(), cols, data }
    }

    pub fn from_i64_rows(rows: &[Vec<i64>]) -> Self {
        let converted: Vec<Vec<BigRational>> = rows
            .iter()
            .map(|r| r.iter().map(|&v| BigRational::from_integer(v.into())).collect())
            .collect();
        Self::from_rows(&converted)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> &BigRational {
        &self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: BigRational) {
        self.data[r * self.cols + c] = v;
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                t.set(c, r, self.get(r, c).clone());
            }
        }
        t
    }

    /// `self * v`, exactly.
    pub fn mul_vec(&self, v: &[BigRational]) -> Vec<BigRational> {
        assert_eq!(v.len(), self.cols);
        (0..self.rows)
            .map(|r| {
                let mut acc = BigRational::zero();
                for (c, x) in v.iter().enumerate() {
                    let a = self.get(r, c);
                    if !a.is_zero() && !x.is_zero() {
                        acc += a * x;
                    }
                }
                acc
            })
            .collect()
    }

    /// Each row scaled by the lcm of its denominators; row scaling preserves rank and kernels.
    fn integer_rows(&self) -> Vec<Vec<BigInt>> {
        (0..self.rows)
            .map(|r| {
                let row = &self.data[r * self.cols..(r + 1) * self.cols];
                let lcm = row.iter().fold(BigInt::one(), |l, x| l.lcm(x.denom()));
                row.iter().map(|x| x.numer() * (&lcm / x.denom())).collect()
            })
            .collect()
    }

    /// Residues modulo the field's prime (after clearing row denominators).
    pub fn to_mod(&self, f: &PrimeField) -> ModMatrix {
        let mut m = ModMatrix::zeros(self.rows, self.cols);
        for (r, row) in self.integer_rows().iter().enumerate() {
            for (c, x) in row.iter().enumerate() {
                if !x.is_zero() {
                    m.set(r, c, f.from_bigint(x));
                }
            }
        }
        m
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RankMode {
    /// Elimination modulo a prime drawn from [`PRIMES`] by `seed`.
    Modular { seed: u64 },
    /// Fraction-free elimination over the integers.
    Exact,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RankMethod {
    ModularPrime(u64),
    ExactRational,
}

/// A rank lower bound together with the minor that proves it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RankCertificate {
    pub rank_lower_bound: usize,
    pub method: RankMethod,
    /// Row and column index sets of a nonsingular minor of size `rank_lower_bound`.
    pub witness_minor: Option<(Vec<usize>, Vec<usize>)>,
}

impl RankCertificate {
    /// Recomputes the witness minor and checks it is nonzero.
    pub fn verify(&self, m: &RationalMatrix) -> bool {
        let Some((rows, cols)) = &self.witness_minor else {
            return self.rank_lower_bound == 0;
        };
        if rows.len() != self.rank_lower_bound || cols.len() != self.rank_lower_bound {
            return false;
        }
        if rows.iter().any(|&r| r >= m.rows()) || cols.iter().any(|&c| c >= m.cols()) {
            return false;
        }
        match self.method {
            RankMethod::ModularPrime(p) => {
                let f = PrimeField::new(p);
                m.to_mod(&f).minor_det(&f, rows, cols) != 0
            }
            RankMethod::ExactRational => {
                let sub: Vec<Vec<BigRational>> = rows
                    .iter()
                    .map(|&r| cols.iter().map(|&c| m.get(r, c).clone()).collect())
                    .collect();
                let sub = RationalMatrix::from_rows(&sub);
                bareiss::bareiss_rank(sub.integer_rows()).rank == rows.len()
            }
        }
    }
}

/// Rank of `m`: a certified lower bound (modular) or the exact value.
pub fn rank(m: &RationalMatrix, mode: RankMode) -> RankCertificate {
    match mode {
        RankMode::Modular { seed } => {
            let f = PrimeField::from_seed(seed);
            rank_mod(m.to_mod(&f), &f)
        }
        RankMode::Exact => {
            let e = bareiss::bareiss_rank(m.integer_rows());
            RankCertificate {
                rank_lower_bound: e.rank,
                method: RankMethod::ExactRational,
                witness_minor: (e.rank > 0).then_some((e.pivot_rows, e.pivot_cols)),
            }
        }
    }
}

/// Modular rank of a matrix already reduced into `f`.
pub fn rank_mod(m: ModMatrix, f: &PrimeField) -> RankCertificate {
    let e = m.eliminate(f);
    RankCertificate {
        rank_lower_bound: e.rank,
        method: RankMethod::ModularPrime(f.modulus()),
        witness_minor: (e.rank > 0).then_some((e.pivot_rows, e.pivot_cols)),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    /// `{v : M v = 0}`.
    Right,
    /// `{v : v^T M = 0}`.
    Left,
}

/// Exact basis of the requested null space.
pub fn kernel_basis(m: &RationalMatrix, side: Side) -> Vec<Vec<BigRational>> {
    let target = match side {
        Side::Right => m.clone(),
        Side::Left => m.transpose(),
    };
    bareiss::integer_kernel(target.integer_rows(), target.cols())
        .into_iter()
        .map(|v| v.into_iter().map(BigRational::from_integer).collect())
        .collect()
}

/// Exact integer kernel of an integer matrix given by rows.
pub(crate) fn integer_kernel(rows: Vec<Vec<BigInt>>, cols: usize) -> Vec<Vec<BigInt>> {
    bareiss::integer_kernel(rows, cols)
}
