//! Real sparse operators on small Hilbert spaces and the superoperators built
//! from them.

use std::ops::{Add, AddAssign, Mul, Sub};

use num_complex::Complex64;
use rayon::prelude::*;

/// Field the engines run over: real for steady-state solves, complex for
/// general evolution.
pub trait Scalar:
    Copy
    + Send
    + Sync
    + Default
    + PartialEq
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<f64, Output = Self>
    + AddAssign
    + std::fmt::Debug
{
    fn modulus(self) -> f64;
    fn finite(self) -> bool;
}

impl Scalar for f64 {
    fn modulus(self) -> f64 {
        self.abs()
    }
    fn finite(self) -> bool {
        self.is_finite()
    }
}

impl Scalar for Complex64 {
    fn modulus(self) -> f64 {
        self.norm()
    }
    fn finite(self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }
}

/// Row-sparse real square matrix. Products of these are exact products of the
/// truncated matrices, which keeps every dissipator in Lindblad form.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseOp {
    rows: Vec<Vec<(usize, f64)>>,
}

impl SparseOp {
    pub fn zeros(n: usize) -> Self {
        Self {
            rows: vec![Vec::new(); n],
        }
    }

    pub fn identity(n: usize) -> Self {
        Self {
            rows: (0..n).map(|i| vec![(i, 1.0)]).collect(),
        }
    }

    /// Truncated annihilation operator: a|k⟩ = √k |k−1⟩.
    pub fn destroy(n: usize) -> Self {
        Self {
            rows: (0..n)
                .map(|i| if i + 1 < n { vec![(i + 1, ((i + 1) as f64).sqrt())] } else { vec![] })
                .collect(),
        }
    }

    pub fn create(n: usize) -> Self {
        Self::destroy(n).transpose()
    }

    pub fn dim(&self) -> usize {
        self.rows.len()
    }

    pub fn row(&self, i: usize) -> &[(usize, f64)] {
        &self.rows[i]
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.rows[i]
            .iter()
            .find(|(c, _)| *c == j)
            .map_or(0.0, |(_, v)| *v)
    }

    fn from_unsorted(rows: Vec<Vec<(usize, f64)>>) -> Self {
        Self {
            rows: rows.into_iter().map(merge_row).collect(),
        }
    }

    pub fn transpose(&self) -> Self {
        let mut rows = vec![Vec::new(); self.dim()];
        for (i, row) in self.rows.iter().enumerate() {
            for &(j, v) in row {
                rows[j].push((i, v));
            }
        }
        Self::from_unsorted(rows)
    }

    pub fn matmul(&self, other: &SparseOp) -> Self {
        let rows = self
            .rows
            .iter()
            .map(|row| {
                let mut out = Vec::new();
                for &(k, a) in row {
                    for &(j, b) in &other.rows[k] {
                        out.push((j, a * b));
                    }
                }
                out
            })
            .collect();
        Self::from_unsorted(rows)
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            rows: self
                .rows
                .iter()
                .map(|r| r.iter().map(|&(j, v)| (j, s * v)).collect())
                .collect(),
        }
    }

    pub fn plus(&self, other: &SparseOp) -> Self {
        let rows = self
            .rows
            .iter()
            .zip(&other.rows)
            .map(|(a, b)| a.iter().chain(b).copied().collect())
            .collect();
        Self::from_unsorted(rows)
    }

    pub fn minus(&self, other: &SparseOp) -> Self {
        self.plus(&other.scale(-1.0))
    }

    /// self ⊗ other, with index i_self · dim(other) + i_other.
    pub fn kron(&self, other: &SparseOp) -> Self {
        let m = other.dim();
        let mut rows = Vec::with_capacity(self.dim() * m);
        for ra in &self.rows {
            for rb in &other.rows {
                let mut out = Vec::with_capacity(ra.len() * rb.len());
                for &(ja, va) in ra {
                    for &(jb, vb) in rb {
                        out.push((ja * m + jb, va * vb));
                    }
                }
                rows.push(out);
            }
        }
        Self { rows }
    }

    /// tr(O ρ) for ρ stored column-stacked, ρ_ij at i + d·j.
    pub fn expect<T: Scalar>(&self, rho: &[T]) -> T {
        let d = self.dim();
        let mut acc = T::default();
        for (j, row) in self.rows.iter().enumerate() {
            for &(i, o) in row {
                acc += rho[i + d * j] * o;
            }
        }
        acc
    }
}

fn merge_row(mut row: Vec<(usize, f64)>) -> Vec<(usize, f64)> {
    row.sort_by_key(|e| e.0);
    let mut out: Vec<(usize, f64)> = Vec::with_capacity(row.len());
    for (j, v) in row {
        match out.last_mut() {
            Some(last) if last.0 == j => last.1 += v,
            _ => out.push((j, v)),
        }
    }
    out.retain(|e| e.1 != 0.0);
    out
}

/// Compressed sparse rows with real entries.
#[derive(Debug, Clone)]
pub struct CsrMatrix {
    n: usize,
    indptr: Vec<usize>,
    indices: Vec<u32>,
    values: Vec<f64>,
}

const ROW_CHUNK: usize = 4096;

impl CsrMatrix {
    /// Builds an n×n matrix row by row; `fill` pushes (column, value) pairs
    /// for one row, duplicates are summed and exact zeros dropped.
    pub fn from_row_fn<F>(n: usize, fill: F) -> Self
    where
        F: Fn(usize, &mut Vec<(usize, f64)>) + Sync,
    {
        assert!(n <= u32::MAX as usize);
        let chunks: Vec<(Vec<usize>, Vec<u32>, Vec<f64>)> = (0..n.div_ceil(ROW_CHUNK))
            .into_par_iter()
            .map(|c| {
                let lo = c * ROW_CHUNK;
                let hi = (lo + ROW_CHUNK).min(n);
                let mut counts = Vec::with_capacity(hi - lo);
                let mut idx = Vec::new();
                let mut val = Vec::new();
                let mut buf = Vec::new();
                for row in lo..hi {
                    buf.clear();
                    fill(row, &mut buf);
                    let merged = merge_row(std::mem::take(&mut buf));
                    counts.push(merged.len());
                    for (j, v) in &merged {
                        idx.push(*j as u32);
                        val.push(*v);
                    }
                    buf = merged;
                }
                (counts, idx, val)
            })
            .collect();
        let mut indptr = Vec::with_capacity(n + 1);
        indptr.push(0);
        let nnz: usize = chunks.iter().map(|c| c.1.len()).sum();
        let mut indices = Vec::with_capacity(nnz);
        let mut values = Vec::with_capacity(nnz);
        for (counts, idx, val) in chunks {
            for c in counts {
                indptr.push(indptr.last().unwrap() + c);
            }
            indices.extend(idx);
            values.extend(val);
        }
        Self {
            n,
            indptr,
            indices,
            values,
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let (lo, hi) = (self.indptr[i], self.indptr[i + 1]);
        self.indices[lo..hi]
            .iter()
            .zip(&self.values[lo..hi])
            .map(|(j, v)| (*j as usize, *v))
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.row(i).find(|e| e.0 == j).map_or(0.0, |e| e.1)
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.get(i, i)).collect()
    }

    pub fn matvec<T: Scalar>(&self, x: &[T], y: &mut [T]) {
        assert_eq!(x.len(), self.n);
        assert_eq!(y.len(), self.n);
        y.par_chunks_mut(ROW_CHUNK).enumerate().for_each(|(c, out)| {
            let base = c * ROW_CHUNK;
            for (k, yi) in out.iter_mut().enumerate() {
                let i = base + k;
                let mut acc = T::default();
                for p in self.indptr[i]..self.indptr[i + 1] {
                    acc += x[self.indices[p] as usize] * self.values[p];
                }
                *yi = acc;
            }
        });
    }
}

/// One term c · A ρ B of a superoperator.
pub struct SuperTerm {
    pub coef: f64,
    pub left: SparseOp,
    pub right: SparseOp,
}

impl SuperTerm {
    pub fn new(coef: f64, left: SparseOp, right: SparseOp) -> Self {
        Self { coef, left, right }
    }
}

/// Superoperator of Σ c·AρB on column-stacked vectors: (AρB)_kl sits at k + d·l.
pub fn superoperator(d: usize, terms: &[SuperTerm]) -> CsrMatrix {
    let prepared: Vec<(f64, &SparseOp, SparseOp)> = terms
        .iter()
        .filter(|t| t.coef != 0.0)
        .map(|t| (t.coef, &t.left, t.right.transpose()))
        .collect();
    CsrMatrix::from_row_fn(d * d, |row, out| {
        let (k, l) = (row % d, row / d);
        for (c, a, bt) in &prepared {
            for &(i, av) in a.row(k) {
                for &(j, bv) in bt.row(l) {
                    out.push((i + d * j, c * av * bv));
                }
            }
        }
    })
}

/// Lindblad dissipator D[L]ρ = LρL† − ½{L†L, ρ} for real L.
pub fn dissipator_terms(rate: f64, l: &SparseOp) -> Vec<SuperTerm> {
    let ld = l.transpose();
    let ldl = ld.matmul(l);
    let id = SparseOp::identity(l.dim());
    vec![
        SuperTerm::new(rate, l.clone(), ld),
        SuperTerm::new(-0.5 * rate, ldl.clone(), id.clone()),
        SuperTerm::new(-0.5 * rate, id, ldl),
    ]
}

/// Terms of c·[X, ρ].
pub fn commutator_terms(coef: f64, x: &SparseOp) -> Vec<SuperTerm> {
    let id = SparseOp::identity(x.dim());
    vec![
        SuperTerm::new(coef, x.clone(), id.clone()),
        SuperTerm::new(-coef, id, x.clone()),
    ]
}
