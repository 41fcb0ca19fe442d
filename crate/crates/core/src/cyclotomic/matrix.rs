use std::fmt;
use std::sync::Arc;

use super::field::{CycloField, CycloNum, FieldExt};
use crate::error::{invalid, Result};

/// Dense row-major matrix over a single cyclotomic field.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct CycloMatrix {
    field: Arc<CycloField>,
    rows: usize,
    cols: usize,
    entries: Vec<CycloNum>,
}

impl CycloMatrix {
    pub fn new(
        field: Arc<CycloField>,
        rows: usize,
        cols: usize,
        entries: Vec<CycloNum>,
    ) -> Result<Self> {
        if entries.len() != rows * cols {
            return Err(invalid(format!(
                "expected {} entries for a {rows}x{cols} matrix, got {}",
                rows * cols,
                entries.len()
            )));
        }
        if entries.iter().any(|e| e.field().order() != field.order()) {
            return Err(invalid("matrix entries must share one field"));
        }
        Ok(Self {
            field,
            rows,
            cols,
            entries,
        })
    }

    pub fn from_rows(field: Arc<CycloField>, cols: usize, rows: Vec<Vec<CycloNum>>) -> Result<Self> {
        if rows.iter().any(|r| r.len() != cols) {
            return Err(invalid("ragged rows"));
        }
        let n = rows.len();
        Self::new(field, n, cols, rows.into_iter().flatten().collect())
    }

    pub fn zeros(field: Arc<CycloField>, rows: usize, cols: usize) -> Self {
        let entries = vec![field.zero(); rows * cols];
        Self {
            field,
            rows,
            cols,
            entries,
        }
    }

    pub fn identity(field: Arc<CycloField>, n: usize) -> Self {
        let mut m = Self::zeros(field.clone(), n, n);
        for i in 0..n {
            m.entries[i * n + i] = field.one();
        }
        m
    }

    pub fn field(&self) -> &Arc<CycloField> {
        &self.field
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &CycloNum {
        &self.entries[i * self.cols + j]
    }

    pub fn row(&self, i: usize) -> &[CycloNum] {
        &self.entries[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_iter(&self) -> impl Iterator<Item = &[CycloNum]> {
        (0..self.rows).map(move |i| self.row(i))
    }

    /// A copy of `self` with `row` appended.
    pub fn with_row(&self, row: &[CycloNum]) -> Result<Self> {
        if row.len() != self.cols {
            return Err(invalid("row length does not match column count"));
        }
        let mut entries = self.entries.clone();
        entries.extend_from_slice(row);
        Self::new(self.field.clone(), self.rows + 1, self.cols, entries)
    }

    pub fn mul(&self, other: &CycloMatrix) -> Result<CycloMatrix> {
        if self.cols != other.rows {
            return Err(invalid("matrix dimensions do not agree"));
        }
        let mut out = Self::zeros(self.field.clone(), self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = other.get(k, j);
                    if !b.is_zero() {
                        let idx = i * other.cols + j;
                        out.entries[idx] = out.entries[idx].try_add(&a.try_mul(b)?)?;
                    }
                }
            }
        }
        Ok(out)
    }

    /// Reduced row-echelon form with zero rows dropped, together with the rank.
    pub fn echelon(&self) -> (CycloMatrix, usize) {
        let mut rows: Vec<Vec<CycloNum>> = self.row_iter().map(<[_]>::to_vec).collect();
        let mut pivot_row = 0;
        for col in 0..self.cols {
            let Some(p) = (pivot_row..rows.len()).find(|&i| !rows[i][col].is_zero()) else {
                continue;
            };
            rows.swap(pivot_row, p);
            let inv = rows[pivot_row][col].inv().expect("pivot is nonzero");
            for x in rows[pivot_row].iter_mut().skip(col) {
                *x = &*x * &inv;
            }
            let pivot = rows[pivot_row].clone();
            for (i, row) in rows.iter_mut().enumerate() {
                if i == pivot_row || row[col].is_zero() {
                    continue;
                }
                let factor = row[col].clone();
                for j in col..self.cols {
                    if !pivot[j].is_zero() {
                        row[j] = &row[j] - &(&factor * &pivot[j]);
                    }
                }
            }
            pivot_row += 1;
            if pivot_row == rows.len() {
                break;
            }
        }
        rows.truncate(pivot_row);
        let rank = rows.len();
        let m = Self::from_rows(self.field.clone(), self.cols, rows).expect("shape preserved");
        (m, rank)
    }

    pub fn rank(&self) -> usize {
        self.echelon().1
    }

    /// Pivot columns, assuming `self` is in reduced row-echelon form.
    pub fn pivots(&self) -> Vec<usize> {
        self.row_iter()
            .map(|row| {
                row.iter()
                    .position(|x| !x.is_zero())
                    .expect("echelon rows are nonzero")
            })
            .collect()
    }

    /// Residual of `v` after eliminating against the rows of `self`, which
    /// must be in reduced row-echelon form. Zero iff `v` is in the row space.
    pub fn reduce_vector(&self, v: &[CycloNum]) -> Vec<CycloNum> {
        let mut out = v.to_vec();
        for (row, pivot) in self.row_iter().zip(self.pivots()) {
            let c = out[pivot].clone();
            if c.is_zero() {
                continue;
            }
            for (o, x) in out.iter_mut().zip(row) {
                if !x.is_zero() {
                    *o = &*o - &(&c * x);
                }
            }
        }
        out
    }

    /// Row-space membership test; `self` must be in reduced row-echelon form.
    pub fn contains_row(&self, v: &[CycloNum]) -> bool {
        self.reduce_vector(v).iter().all(CycloNum::is_zero)
    }

    /// Whether the row space of `other` lies inside the row space of `self`;
    /// `self` must be in reduced row-echelon form.
    pub fn contains_row_space(&self, other: &CycloMatrix) -> bool {
        other.row_iter().all(|r| self.contains_row(r))
    }
}

impl fmt::Display for CycloMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for row in self.row_iter() {
            let cells: Vec<String> = row.iter().map(ToString::to_string).collect();
            writeln!(f, "[{}]", cells.join(", "))?;
        }
        Ok(())
    }
}
