//! Exact rational sparse linear algebra.
//!
//! Elimination pivots strictly by column order: a row's pivot is its lowest nonzero
//! column. Kernels and particular solutions are read off the reduced row echelon form,
//! which depends only on the column order, so results are deterministic.

use std::collections::BTreeMap;

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::rational::Rational;

/// Sparse vector as `(index, value)` pairs, indices strictly ascending, no zeros.
pub type SparseVec = Vec<(usize, Rational)>;

pub fn normalize(mut v: Vec<(usize, Rational)>) -> SparseVec {
    v.sort_by_key(|(i, _)| *i);
    let mut out: SparseVec = Vec::with_capacity(v.len());
    for (i, x) in v {
        match out.last_mut() {
            Some((j, y)) if *j == i => *y += x,
            _ => out.push((i, x)),
        }
    }
    out.retain(|(_, x)| !x.is_zero());
    out
}

/// `a - f * b`.
fn axpy(a: &[(usize, Rational)], f: &Rational, b: &[(usize, Rational)]) -> SparseVec {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() || j < b.len() {
        let ca = a.get(i).map(|e| e.0).unwrap_or(usize::MAX);
        let cb = b.get(j).map(|e| e.0).unwrap_or(usize::MAX);
        if ca < cb {
            out.push(a[i].clone());
            i += 1;
        } else if cb < ca {
            out.push((cb, -(f * &b[j].1)));
            j += 1;
        } else {
            let v = &a[i].1 - f * &b[j].1;
            if !v.is_zero() {
                out.push((ca, v));
            }
            i += 1;
            j += 1;
        }
    }
    out
}

fn scale_to_monic(v: &mut SparseVec) {
    let lead = v[0].1.clone();
    if !lead.is_one() {
        let inv = lead.recip();
        for (_, x) in v.iter_mut() {
            *x *= &inv;
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SparseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<SparseVec>,
}

impl SparseMatrix {
    pub fn new(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![Vec::new(); rows] }
    }

    /// Empty matrix with `cols` columns; grow it with [`SparseMatrix::push_row`].
    pub fn with_cols(cols: usize) -> Self {
        Self { rows: 0, cols, data: Vec::new() }
    }

    pub fn from_rows(cols: usize, rows: Vec<Vec<(usize, Rational)>>) -> Result<Self> {
        let mut m = Self::with_cols(cols);
        for r in rows {
            m.push_row(r)?;
        }
        Ok(m)
    }

    pub fn from_dense(rows: &[Vec<Rational>]) -> Self {
        let cols = rows.first().map_or(0, Vec::len);
        let data = rows
            .iter()
            .map(|r| r.iter().enumerate().filter(|(_, x)| !x.is_zero()).map(|(c, x)| (c, x.clone())).collect())
            .collect();
        Self { rows: rows.len(), cols, data }
    }

    pub fn identity(n: usize) -> Self {
        Self { rows: n, cols: n, data: (0..n).map(|i| vec![(i, Rational::one())]).collect() }
    }

    pub fn push_row(&mut self, row: Vec<(usize, Rational)>) -> Result<usize> {
        let row = normalize(row);
        if let Some((c, _)) = row.last() {
            if *c >= self.cols {
                return Err(Error::Usage(format!("column {c} out of bounds ({} columns)", self.cols)));
            }
        }
        self.data.push(row);
        self.rows += 1;
        Ok(self.rows - 1)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, r: usize) -> &[(usize, Rational)] {
        &self.data[r]
    }

    pub fn nnz(&self) -> usize {
        self.data.iter().map(Vec::len).sum()
    }

    pub fn get(&self, r: usize, c: usize) -> Rational {
        self.data[r]
            .binary_search_by_key(&c, |e| e.0)
            .map(|p| self.data[r][p].1.clone())
            .unwrap_or_else(|_| Rational::zero())
    }

    pub fn mul_vec(&self, x: &[Rational]) -> Result<Vec<Rational>> {
        if x.len() != self.cols {
            return Err(Error::Usage(format!("vector of length {} against {} columns", x.len(), self.cols)));
        }
        Ok(self
            .data
            .iter()
            .map(|row| row.iter().fold(Rational::zero(), |acc, (c, v)| acc + v * &x[*c]))
            .collect())
    }

    pub fn mul_sparse(&self, x: &[(usize, Rational)]) -> Vec<Rational> {
        let dense: BTreeMap<usize, &Rational> = x.iter().map(|(c, v)| (*c, v)).collect();
        self.data
            .iter()
            .map(|row| {
                row.iter()
                    .filter_map(|(c, v)| dense.get(c).map(|y| v * *y))
                    .fold(Rational::zero(), |a, b| a + b)
            })
            .collect()
    }

    /// Row visiting order for elimination: by last nonzero column, then leading column.
    /// The reduced form does not depend on it; fill-in does, drastically.
    fn elimination_order(&self) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.rows).collect();
        order.sort_by_key(|&r| {
            let row = &self.data[r];
            (row.last().map(|e| e.0), row.first().map(|e| e.0))
        });
        order
    }

    fn echelon(&self) -> Echelon {
        let mut ech = Echelon::default();
        for r in self.elimination_order() {
            ech.insert(self.data[r].clone());
        }
        ech
    }
}

/// Row echelon form built incrementally. Each stored row is monic at its pivot.
#[derive(Clone, Debug, Default)]
pub struct Echelon {
    pivots: BTreeMap<usize, SparseVec>,
    reduced: bool,
}

impl Echelon {
    pub fn rank(&self) -> usize {
        self.pivots.len()
    }

    pub fn pivot_columns(&self) -> impl Iterator<Item = usize> + '_ {
        self.pivots.keys().copied()
    }

    pub fn pivot_row(&self, col: usize) -> Option<&SparseVec> {
        self.pivots.get(&col)
    }

    /// Eliminates leading entries until the leading column is not a pivot.
    pub fn reduce(&self, mut row: SparseVec) -> SparseVec {
        while let Some((c, f)) = row.first() {
            match self.pivots.get(c) {
                Some(p) => {
                    let f = f.clone();
                    row = axpy(&row, &f, p);
                }
                None => break,
            }
        }
        row
    }

    /// Eliminates every entry sitting on a pivot column.
    pub fn reduce_fully(&self, mut row: SparseVec) -> SparseVec {
        let mut pos = 0;
        while pos < row.len() {
            let c = row[pos].0;
            match self.pivots.get(&c) {
                Some(p) => {
                    let f = row[pos].1.clone();
                    row = axpy(&row, &f, p);
                }
                None => pos += 1,
            }
        }
        row
    }

    /// Inserts a row that has already been through [`Echelon::reduce`]. Returns the new
    /// pivot column, or `None` for a zero row.
    pub fn insert_reduced(&mut self, mut row: SparseVec) -> Option<usize> {
        if row.is_empty() {
            return None;
        }
        debug_assert!(!self.pivots.contains_key(&row[0].0));
        scale_to_monic(&mut row);
        let c = row[0].0;
        self.pivots.insert(c, row);
        self.reduced = false;
        Some(c)
    }

    pub fn insert(&mut self, row: SparseVec) -> Option<usize> {
        let r = self.reduce(row);
        self.insert_reduced(r)
    }

    pub fn contains(&self, row: SparseVec) -> bool {
        self.reduce(row).is_empty()
    }

    /// Back-substitution to reduced row echelon form.
    pub fn make_reduced(&mut self) {
        if self.reduced {
            return;
        }
        let cols: Vec<usize> = self.pivots.keys().rev().copied().collect();
        for c in cols {
            let mut row = self.pivots.remove(&c).expect("pivot present");
            let mut pos = 1;
            while pos < row.len() {
                let c2 = row[pos].0;
                match self.pivots.get(&c2) {
                    Some(p) => {
                        let f = row[pos].1.clone();
                        row = axpy(&row, &f, p);
                    }
                    None => pos += 1,
                }
            }
            self.pivots.insert(c, row);
        }
        self.reduced = true;
    }

    pub fn into_rows(mut self) -> Vec<SparseVec> {
        self.make_reduced();
        self.pivots.into_values().collect()
    }
}

/// Basis of `ker M` in reduced form: one vector per free column (ascending), with a 1
/// at that column and zeros at every other free column.
pub fn kernel_basis(m: &SparseMatrix) -> Vec<SparseVec> {
    let mut ech = m.echelon();
    ech.make_reduced();
    let mut column_entries: BTreeMap<usize, Vec<(usize, Rational)>> = BTreeMap::new();
    for (pc, row) in &ech.pivots {
        for (c, v) in row.iter().skip(1) {
            column_entries.entry(*c).or_default().push((*pc, -v.clone()));
        }
    }
    (0..m.cols)
        .filter(|c| !ech.pivots.contains_key(c))
        .map(|f| {
            let mut v = column_entries.remove(&f).unwrap_or_default();
            v.push((f, Rational::one()));
            normalize(v)
        })
        .collect()
}

pub fn rank(m: &SparseMatrix) -> usize {
    m.echelon().rank()
}

fn augmented_echelon(m: &SparseMatrix, b: &[Rational]) -> Result<Echelon> {
    if b.len() != m.rows {
        return Err(Error::Usage(format!("right-hand side of length {} for {} rows", b.len(), m.rows)));
    }
    let mut ech = Echelon::default();
    for i in m.elimination_order() {
        let (row, rhs) = (&m.data[i], &b[i]);
        let mut r = row.clone();
        if !rhs.is_zero() {
            r.push((m.cols, rhs.clone()));
        }
        ech.insert(r);
    }
    Ok(ech)
}

/// One solution of `M x = b` with every free variable zero, or `None` if inconsistent.
pub fn solve(m: &SparseMatrix, b: &[Rational]) -> Result<Option<SparseVec>> {
    let mut ech = augmented_echelon(m, b)?;
    if ech.pivots.contains_key(&m.cols) {
        return Ok(None);
    }
    ech.make_reduced();
    let x = ech
        .pivots
        .iter()
        .filter_map(|(c, row)| row.last().filter(|(col, _)| *col == m.cols).map(|(_, v)| (*c, v.clone())))
        .collect();
    Ok(Some(x))
}

/// Whether `v` lies in the column space of `M`.
pub fn in_span(m: &SparseMatrix, v: &[Rational]) -> Result<bool> {
    Ok(!augmented_echelon(m, v)?.pivots.contains_key(&m.cols))
}

pub fn to_dense(v: &[(usize, Rational)], len: usize) -> Vec<Rational> {
    let mut out = vec![Rational::zero(); len];
    for (i, x) in v {
        out[*i] = x.clone();
    }
    out
}
