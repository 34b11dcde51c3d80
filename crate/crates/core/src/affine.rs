//! Affine states, affine operators and weighting.
//!
//! A state is a rational vector summing to 1; an operator is a square matrix whose
//! columns each sum to 1, so it maps states to states. Weighting turns a state into the
//! distribution `|v_j| / ||v||_1`; collapsing to `e_j` is left to the caller.

use std::fmt;

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::rational::{format_rational, serde_rational_matrix, Rational};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AffineError {
    #[error("state entries sum to {0}, not 1")]
    Normalization(String),
    #[error("empty state")]
    Empty,
    #[error("dimension mismatch: {left} vs {right}")]
    Dimension { left: usize, right: usize },
    #[error("matrix is not square ({rows} rows, row {row} has {len} entries)")]
    NotSquare { rows: usize, row: usize, len: usize },
    #[error("column {column} sums to {sum}, not 1")]
    ColumnSum { column: usize, sum: String },
    #[error("operator is singular")]
    Singular,
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct AffineState {
    entries: Vec<Rational>,
}

impl AffineState {
    /// Builds a state, insisting that the entries sum to exactly 1.
    pub fn new(entries: Vec<Rational>) -> Result<Self, AffineError> {
        if entries.is_empty() {
            return Err(AffineError::Empty);
        }
        let sum: Rational = entries.iter().sum();
        if !sum.is_one() {
            return Err(AffineError::Normalization(format_rational(&sum)));
        }
        Ok(Self { entries })
    }

    /// Basis state `e_j` (0-based `j`).
    pub fn basis(dim: usize, j: usize) -> Self {
        assert!(j < dim, "basis index {j} out of range for dimension {dim}");
        let mut entries = vec![Rational::zero(); dim];
        entries[j] = Rational::one();
        Self { entries }
    }

    pub fn dim(&self) -> usize {
        self.entries.len()
    }

    pub fn entries(&self) -> &[Rational] {
        &self.entries
    }

    pub fn entry(&self, j: usize) -> &Rational {
        &self.entries[j]
    }

    pub fn l1_norm(&self) -> Rational {
        self.entries.iter().map(|e| e.abs()).sum()
    }

    pub fn weight(&self) -> WeightDistribution {
        let l1 = self.l1_norm();
        let probabilities = self.entries.iter().map(|e| e.abs() / &l1).collect();
        WeightDistribution {
            probabilities,
            l1_norm: l1,
        }
    }

    pub fn is_basis(&self, j: usize) -> bool {
        self.entries
            .iter()
            .enumerate()
            .all(|(i, e)| if i == j { e.is_one() } else { e.is_zero() })
    }
}

impl fmt::Debug for AffineState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.entries.iter().map(format_rational).collect();
        write!(f, "({})", parts.join(", "))
    }
}

impl Serialize for AffineState {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        crate::rational::serde_rational_vec::serialize(&self.entries, s)
    }
}

impl<'de> Deserialize<'de> for AffineState {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let entries = crate::rational::serde_rational_vec::deserialize(d)?;
        AffineState::new(entries).map_err(serde::de::Error::custom)
    }
}

/// Exact distribution over basis outcomes from weighting a state.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WeightDistribution {
    pub probabilities: Vec<Rational>,
    pub l1_norm: Rational,
}

/// Square matrix acting on column vectors, stored row-major.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct AffineOperator {
    dim: usize,
    entries: Vec<Rational>,
}

impl AffineOperator {
    /// Builds an operator from rows and checks every column sum.
    pub fn new(rows: Vec<Vec<Rational>>) -> Result<Self, AffineError> {
        let op = Self::new_unchecked(rows)?;
        if let Some((column, sum)) = op.column_sum_violations().into_iter().next() {
            return Err(AffineError::ColumnSum {
                column,
                sum: format_rational(&sum),
            });
        }
        Ok(op)
    }

    /// Builds a square matrix without checking column sums. Used when loading files so
    /// that bad matrices can be reported by validation instead of failing the parse.
    pub fn new_unchecked(rows: Vec<Vec<Rational>>) -> Result<Self, AffineError> {
        let dim = rows.len();
        if dim == 0 {
            return Err(AffineError::Empty);
        }
        let mut entries = Vec::with_capacity(dim * dim);
        for (row, r) in rows.into_iter().enumerate() {
            if r.len() != dim {
                return Err(AffineError::NotSquare {
                    rows: dim,
                    row,
                    len: r.len(),
                });
            }
            entries.extend(r);
        }
        Ok(Self { dim, entries })
    }

    pub fn from_i64_rows(rows: &[&[i64]]) -> Result<Self, AffineError> {
        Self::new(
            rows.iter()
                .map(|r| r.iter().map(|&x| Rational::from_integer(x.into())).collect())
                .collect(),
        )
    }

    pub fn identity(dim: usize) -> Self {
        let mut entries = vec![Rational::zero(); dim * dim];
        for i in 0..dim {
            entries[i * dim + i] = Rational::one();
        }
        Self { dim, entries }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entry(&self, row: usize, col: usize) -> &Rational {
        &self.entries[row * self.dim + col]
    }

    pub fn rows(&self) -> Vec<Vec<Rational>> {
        self.entries.chunks(self.dim).map(|r| r.to_vec()).collect()
    }

    /// Columns whose sum differs from 1, with the offending sum.
    pub fn column_sum_violations(&self) -> Vec<(usize, Rational)> {
        (0..self.dim)
            .filter_map(|c| {
                let sum: Rational = (0..self.dim).map(|r| self.entry(r, c)).sum();
                (!sum.is_one()).then_some((c, sum))
            })
            .collect()
    }

    pub fn is_identity(&self) -> bool {
        (0..self.dim).all(|r| {
            (0..self.dim).all(|c| {
                let e = self.entry(r, c);
                if r == c {
                    e.is_one()
                } else {
                    e.is_zero()
                }
            })
        })
    }

    pub fn apply(&self, v: &AffineState) -> Result<AffineState, AffineError> {
        if v.dim() != self.dim {
            return Err(AffineError::Dimension {
                left: self.dim,
                right: v.dim(),
            });
        }
        let mut out = Vec::with_capacity(self.dim);
        for r in 0..self.dim {
            let mut acc = Rational::zero();
            for (c, x) in v.entries.iter().enumerate() {
                let a = self.entry(r, c);
                if !a.is_zero() && !x.is_zero() {
                    acc += a * x;
                }
            }
            out.push(acc);
        }
        Ok(AffineState { entries: out })
    }

    /// Matrix product `g * f`: apply `f` first, then `g`.
    pub fn compose(g: &AffineOperator, f: &AffineOperator) -> Result<AffineOperator, AffineError> {
        if g.dim != f.dim {
            return Err(AffineError::Dimension {
                left: g.dim,
                right: f.dim,
            });
        }
        let n = g.dim;
        let mut entries = vec![Rational::zero(); n * n];
        for r in 0..n {
            for k in 0..n {
                let a = g.entry(r, k);
                if a.is_zero() {
                    continue;
                }
                for c in 0..n {
                    let b = f.entry(k, c);
                    if !b.is_zero() {
                        entries[r * n + c] += a * b;
                    }
                }
            }
        }
        Ok(AffineOperator { dim: n, entries })
    }

    /// Composes a sequence of operators listed in application order.
    pub fn chain(ops: &[&AffineOperator]) -> Result<AffineOperator, AffineError> {
        let (first, rest) = ops.split_first().ok_or(AffineError::Empty)?;
        let mut acc = (*first).clone();
        for op in rest {
            acc = AffineOperator::compose(op, &acc)?;
        }
        Ok(acc)
    }

    /// Gauss-Jordan inverse over the rationals.
    pub fn inverse(&self) -> Result<AffineOperator, AffineError> {
        let n = self.dim;
        let mut a = self.rows();
        let mut inv = AffineOperator::identity(n).rows();
        for col in 0..n {
            let pivot = (col..n)
                .find(|&r| !a[r][col].is_zero())
                .ok_or(AffineError::Singular)?;
            a.swap(col, pivot);
            inv.swap(col, pivot);
            let p = a[col][col].clone();
            for c in 0..n {
                a[col][c] = &a[col][c] / &p;
                inv[col][c] = &inv[col][c] / &p;
            }
            for r in 0..n {
                if r == col || a[r][col].is_zero() {
                    continue;
                }
                let factor = a[r][col].clone();
                for c in 0..n {
                    let t = &factor * &a[col][c];
                    a[r][c] -= t;
                    let t = &factor * &inv[col][c];
                    inv[r][c] -= t;
                }
            }
        }
        AffineOperator::new_unchecked(inv)
    }
}

impl fmt::Debug for AffineOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for row in self.entries.chunks(self.dim) {
            let parts: Vec<String> = row.iter().map(format_rational).collect();
            writeln!(f, "[{}]", parts.join(", "))?;
        }
        Ok(())
    }
}

impl Serialize for AffineOperator {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        serde_rational_matrix::serialize(&self.rows(), s)
    }
}

impl<'de> Deserialize<'de> for AffineOperator {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let rows = serde_rational_matrix::deserialize(d)?;
        AffineOperator::new_unchecked(rows).map_err(serde::de::Error::custom)
    }
}

/// Operator on the layout `(x_1..x_n, y, bal)` that overwrites `y` with
/// `c_1 x_1 + ... + c_n x_n`, keeps every `x_i`, and rebalances the last entry.
pub fn linear_combination_gadget(
    n: usize,
    coefficients: &[Rational],
) -> Result<AffineOperator, AffineError> {
    if coefficients.len() != n {
        return Err(AffineError::Dimension {
            left: n,
            right: coefficients.len(),
        });
    }
    let dim = n + 2;
    let mut rows = AffineOperator::identity(dim).rows();
    rows[n][n] = Rational::zero();
    for (j, c) in coefficients.iter().enumerate() {
        rows[n][j] = c.clone();
        rows[n + 1][j] = -c.clone();
    }
    // Column y: the old y value moves into the balancing entry.
    rows[n + 1][n] = Rational::one();
    AffineOperator::new(rows)
}
