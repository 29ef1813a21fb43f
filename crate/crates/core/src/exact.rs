//! Exact scalars and the small amount of integer linear algebra the rest of
//! the crate needs: rank over the rationals and Smith normal form.
//!
//! Everything here is exact. Matrices stay small (a few hundred rows at
//! most), so entries are promoted to [`BigInt`] inside the eliminations.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

/// Arbitrary precision fraction, always in lowest terms with positive
/// denominator.
pub type Rational = num_rational::BigRational;

/// Builds `num / den`. Panics if `den == 0`.
pub fn rat(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

pub fn int(value: i64) -> Rational {
    Rational::from_integer(BigInt::from(value))
}

/// Parses `p/q` or `p`.
pub fn parse_rational(text: &str) -> Option<Rational> {
    let text = text.trim();
    let (num, den) = match text.split_once('/') {
        Some((n, d)) => (n.trim().parse::<BigInt>().ok()?, d.trim().parse::<BigInt>().ok()?),
        None => (text.parse::<BigInt>().ok()?, BigInt::one()),
    };
    if den.is_zero() {
        return None;
    }
    Some(Rational::new(num, den))
}

/// A point of a face realization in its own `(c, q)` frame.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FaceCoord {
    pub c: Rational,
    pub q: Rational,
}

impl FaceCoord {
    pub fn new(c: Rational, q: Rational) -> Self {
        Self { c, q }
    }

    /// Membership in the reference triangle `0 <= q <= c <= 1`.
    pub fn in_reference_triangle(&self) -> bool {
        !self.q.is_negative() && self.q <= self.c && self.c <= Rational::one()
    }
}

impl fmt::Display for FaceCoord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(c={}, q={})", self.c, self.q)
    }
}

/// Dense integer matrix in row-major order.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IntMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<i64>,
}

impl IntMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, entries: vec![0; rows * cols] }
    }

    pub fn identity(size: usize) -> Self {
        let mut m = Self::zeros(size, size);
        for i in 0..size {
            m.set(i, i, 1);
        }
        m
    }

    /// Builds a matrix from rows; all rows must have the same length.
    pub fn from_rows(rows: &[Vec<i64>]) -> Self {
        let cols = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|r| r.len() == cols), "ragged rows");
        Self { rows: rows.len(), cols, entries: rows.concat() }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, row: usize, col: usize) -> i64 {
        self.entries[row * self.cols + col]
    }

    pub fn set(&mut self, row: usize, col: usize, value: i64) {
        self.entries[row * self.cols + col] = value;
    }

    pub fn add_to(&mut self, row: usize, col: usize, value: i64) {
        self.entries[row * self.cols + col] += value;
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                t.set(c, r, self.get(r, c));
            }
        }
        t
    }

    pub fn mul(&self, other: &IntMatrix) -> IntMatrix {
        assert_eq!(self.cols, other.rows, "dimension mismatch");
        let mut out = IntMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a == 0 {
                    continue;
                }
                for j in 0..other.cols {
                    out.add_to(i, j, a * other.get(k, j));
                }
            }
        }
        out
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(|&e| e == 0)
    }

    fn to_big(&self) -> Vec<Vec<BigInt>> {
        (0..self.rows)
            .map(|r| (0..self.cols).map(|c| BigInt::from(self.get(r, c))).collect())
            .collect()
    }
}

/// Rank over the rationals by fraction-free (Bareiss) elimination.
#[allow(clippy::needless_range_loop)]
pub fn rank_over_rationals(matrix: &IntMatrix) -> usize {
    let mut a = matrix.to_big();
    let (rows, cols) = (matrix.rows(), matrix.cols());
    let mut prev_pivot = BigInt::one();
    let mut rank = 0;
    for col in 0..cols {
        if rank == rows {
            break;
        }
        let Some(pivot_row) = (rank..rows).find(|&r| !a[r][col].is_zero()) else {
            continue;
        };
        a.swap(rank, pivot_row);
        let pivot = a[rank][col].clone();
        for r in rank + 1..rows {
            let factor = a[r][col].clone();
            for c in col..cols {
                // Exact division: Bareiss keeps every intermediate a minor.
                let value = (&pivot * &a[r][c] - &factor * &a[rank][c]) / &prev_pivot;
                a[r][c] = value;
            }
            for c in 0..col {
                a[r][c] = BigInt::zero();
            }
        }
        prev_pivot = pivot;
        rank += 1;
    }
    rank
}

/// Invariant factors `d1 | d2 | ...` of `matrix` over the integers; only the
/// nonzero factors are returned.
#[allow(clippy::needless_range_loop)]
pub fn smith_normal_form(matrix: &IntMatrix) -> Vec<BigInt> {
    let mut a = matrix.to_big();
    let (rows, cols) = (matrix.rows(), matrix.cols());
    let mut diagonal = Vec::new();
    let mut t = 0;
    // Each pass either finishes pivot `t` or strictly shrinks |a[t][t]|.
    while t < rows.min(cols) {
        let mut best: Option<(usize, usize)> = None;
        for r in t..rows {
            for c in t..cols {
                if !a[r][c].is_zero()
                    && best.is_none_or(|(br, bc)| a[r][c].abs() < a[br][bc].abs())
                {
                    best = Some((r, c));
                }
            }
        }
        let Some((pr, pc)) = best else { break };
        a.swap(t, pr);
        for row in a.iter_mut() {
            row.swap(t, pc);
        }

        for r in t + 1..rows {
            if a[r][t].is_zero() {
                continue;
            }
            let q = a[r][t].div_floor(&a[t][t]);
            for c in t..cols {
                let delta = &q * &a[t][c];
                a[r][c] -= delta;
            }
        }
        for c in t + 1..cols {
            if a[t][c].is_zero() {
                continue;
            }
            let q = a[t][c].div_floor(&a[t][t]);
            for r in t..rows {
                let delta = &q * &a[r][t];
                a[r][c] -= delta;
            }
        }
        let residue = (t + 1..rows).any(|r| !a[r][t].is_zero())
            || (t + 1..cols).any(|c| !a[t][c].is_zero());
        if residue {
            continue;
        }
        let offender = (t + 1..rows).find(|&r| {
            (t + 1..cols).any(|c| !(&a[r][c] % &a[t][t]).is_zero())
        });
        if let Some(r) = offender {
            for c in t..cols {
                let v = a[r][c].clone();
                a[t][c] += v;
            }
            continue;
        }
        diagonal.push(a[t][t].abs());
        t += 1;
    }
    diagonal
}
