//! Arithmetic modulo a 62-bit prime and dense elimination over it.
//!
//! Residues are kept in Montgomery form throughout; zero is zero in both
//! representations, so pivot searches never need to convert.

use num_bigint::{BigInt, Sign};
use num_rational::BigRational;
use num_traits::ToPrimitive;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// The ten largest primes below 2^62.
pub const PRIMES: [u64; 10] = [
    4611686018427387847,
    4611686018427387817,
    4611686018427387787,
    4611686018427387761,
    4611686018427387751,
    4611686018427387737,
    4611686018427387733,
    4611686018427387709,
    4611686018427387701,
    4611686018427387631,
];

/// The prime field `Z/pZ` with Montgomery multiplication (`R = 2^64`).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PrimeField {
    p: u64,
    neg_inv: u64,
    r2: u64,
}

impl PrimeField {
    /// Panics unless `p` is odd and below `2^62`.
    pub fn new(p: u64) -> Self {
        assert!(p % 2 == 1 && p < (1 << 62) && p > 2, "modulus must be an odd prime below 2^62");
        let mut inv: u64 = p;
        for _ in 0..6 {
            inv = inv.wrapping_mul(2u64.wrapping_sub(p.wrapping_mul(inv)));
        }
        let r = ((1u128 << 64) % p as u128) as u64;
        let r2 = ((r as u128 * r as u128) % p as u128) as u64;
        PrimeField { p, neg_inv: inv.wrapping_neg(), r2 }
    }

    /// Draws one prime from [`PRIMES`] uniformly, deterministically in `seed`.
    pub fn from_seed(seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        PrimeField::new(PRIMES[rng.gen_range(0..PRIMES.len())])
    }

    /// The field whose table position follows this one (wrapping).
    pub fn next_in_table(&self) -> Self {
        let pos = PRIMES.iter().position(|&q| q == self.p).unwrap_or(0);
        PrimeField::new(PRIMES[(pos + 1) % PRIMES.len()])
    }

    pub fn modulus(&self) -> u64 {
        self.p
    }

    #[inline]
    fn redc(&self, t: u128) -> u64 {
        let m = (t as u64).wrapping_mul(self.neg_inv);
        let u = ((t + m as u128 * self.p as u128) >> 64) as u64;
        if u >= self.p {
            u - self.p
        } else {
            u
        }
    }

    #[inline]
    pub fn mul(&self, a: u64, b: u64) -> u64 {
        self.redc(a as u128 * b as u128)
    }

    #[inline]
    pub fn add(&self, a: u64, b: u64) -> u64 {
        let s = a + b;
        if s >= self.p {
            s - self.p
        } else {
            s
        }
    }

    #[inline]
    pub fn sub(&self, a: u64, b: u64) -> u64 {
        if a >= b {
            a - b
        } else {
            a + self.p - b
        }
    }

    #[inline]
    pub fn neg(&self, a: u64) -> u64 {
        if a == 0 {
            0
        } else {
            self.p - a
        }
    }

    pub fn one(&self) -> u64 {
        self.from_u64(1)
    }

    pub fn from_u64(&self, x: u64) -> u64 {
        self.mul(x % self.p, self.r2)
    }

    pub fn from_i64(&self, x: i64) -> u64 {
        let r = self.from_u64(x.unsigned_abs());
        if x < 0 {
            self.neg(r)
        } else {
            r
        }
    }

    pub fn from_bigint(&self, x: &BigInt) -> u64 {
        let m = BigInt::from(self.p);
        let mut r = x % &m;
        if r.sign() == Sign::Minus {
            r += &m;
        }
        self.from_u64(r.to_u64().expect("residue fits in u64"))
    }

    /// Residue of a rational, or `None` when `p` divides its denominator.
    pub fn from_rational(&self, x: &BigRational) -> Option<u64> {
        let den = self.from_bigint(x.denom());
        let inv = self.inv(den)?;
        Some(self.mul(self.from_bigint(x.numer()), inv))
    }

    /// Back to the canonical representative in `[0, p)`.
    pub fn to_u64(&self, a: u64) -> u64 {
        self.redc(a as u128)
    }

    pub fn pow(&self, mut base: u64, mut exp: u64) -> u64 {
        let mut acc = self.one();
        while exp > 0 {
            if exp & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            exp >>= 1;
        }
        acc
    }

    pub fn inv(&self, a: u64) -> Option<u64> {
        if a == 0 {
            None
        } else {
            Some(self.pow(a, self.p - 2))
        }
    }
}

/// Outcome of row-echelon elimination: rank and a nonsingular minor.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Elimination {
    pub rank: usize,
    /// Original indices of the pivot rows, in pivot order.
    pub pivot_rows: Vec<usize>,
    /// Pivot columns, increasing.
    pub pivot_cols: Vec<usize>,
}

/// Dense row-major matrix of residues (Montgomery form).
#[derive(Debug, Clone)]
pub struct ModMatrix {
    rows: usize,
    cols: usize,
    data: Vec<u64>,
}

impl ModMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        ModMatrix { rows, cols, data: vec![0; rows * cols] }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> u64 {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: u64) {
        self.data[r * self.cols + c] = v;
    }

    /// Gaussian elimination with row swaps, consuming the matrix.
    pub fn eliminate(mut self, f: &PrimeField) -> Elimination {
        let (rows, cols) = (self.rows, self.cols);
        let mut order: Vec<usize> = (0..rows).collect();
        let mut pivot_rows = Vec::new();
        let mut pivot_cols = Vec::new();
        let mut r = 0;
        for c in 0..cols {
            if r == rows {
                break;
            }
            let Some(found) = (r..rows).find(|&i| self.data[i * cols + c] != 0) else {
                continue;
            };
            if found != r {
                for j in c..cols {
                    self.data.swap(found * cols + j, r * cols + j);
                }
                order.swap(found, r);
            }
            let inv = f.inv(self.data[r * cols + c]).expect("nonzero pivot");
            for j in c..cols {
                let x = self.data[r * cols + j];
                self.data[r * cols + j] = f.mul(x, inv);
            }
            let (head, tail) = self.data.split_at_mut((r + 1) * cols);
            let pivot = &head[r * cols..];
            for row in tail.chunks_exact_mut(cols) {
                let factor = row[c];
                if factor == 0 {
                    continue;
                }
                for j in c..cols {
                    if pivot[j] != 0 {
                        row[j] = f.sub(row[j], f.mul(factor, pivot[j]));
                    }
                }
            }
            pivot_rows.push(order[r]);
            pivot_cols.push(c);
            r += 1;
        }
        Elimination { rank: r, pivot_rows, pivot_cols }
    }

    /// Inverse of a square matrix, or `None` if singular.
    pub fn inverse(&self, f: &PrimeField) -> Option<ModMatrix> {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        let w = 2 * n;
        let mut a = vec![0u64; n * w];
        let one = f.one();
        for i in 0..n {
            a[i * w..i * w + n].copy_from_slice(&self.data[i * n..(i + 1) * n]);
            a[i * w + n + i] = one;
        }
        for c in 0..n {
            let found = (c..n).find(|&i| a[i * w + c] != 0)?;
            if found != c {
                for j in 0..w {
                    a.swap(found * w + j, c * w + j);
                }
            }
            let inv = f.inv(a[c * w + c]).expect("nonzero pivot");
            for j in 0..w {
                a[c * w + j] = f.mul(a[c * w + j], inv);
            }
            let pivot: Vec<u64> = a[c * w..(c + 1) * w].to_vec();
            for i in 0..n {
                if i == c {
                    continue;
                }
                let factor = a[i * w + c];
                if factor == 0 {
                    continue;
                }
                for j in 0..w {
                    if pivot[j] != 0 {
                        a[i * w + j] = f.sub(a[i * w + j], f.mul(factor, pivot[j]));
                    }
                }
            }
        }
        let mut out = ModMatrix::zeros(n, n);
        for i in 0..n {
            out.data[i * n..(i + 1) * n].copy_from_slice(&a[i * w + n..(i + 1) * w]);
        }
        Some(out)
    }

    /// Determinant of the minor on the given rows and columns.
    pub fn minor_det(&self, f: &PrimeField, rows: &[usize], cols: &[usize]) -> u64 {
        assert_eq!(rows.len(), cols.len());
        let n = rows.len();
        let mut a: Vec<u64> = Vec::with_capacity(n * n);
        for &r in rows {
            for &c in cols {
                a.push(self.get(r, c));
            }
        }
        let mut det = f.one();
        for c in 0..n {
            let Some(found) = (c..n).find(|&i| a[i * n + c] != 0) else {
                return 0;
            };
            if found != c {
                for j in 0..n {
                    a.swap(found * n + j, c * n + j);
                }
                det = f.neg(det);
            }
            let piv = a[c * n + c];
            det = f.mul(det, piv);
            let inv = f.inv(piv).expect("nonzero pivot");
            for i in c + 1..n {
                let factor = f.mul(a[i * n + c], inv);
                if factor == 0 {
                    continue;
                }
                for j in c..n {
                    a[i * n + j] = f.sub(a[i * n + j], f.mul(factor, a[c * n + j]));
                }
            }
        }
        det
    }
}
