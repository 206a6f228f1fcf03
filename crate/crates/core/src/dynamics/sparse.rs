// SPDX-License-Identifier: Apache-2.0

//! Compressed-row operators acting on dense row-major matrices.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use super::hilbert::{HilbertLayout, Subsystem};
use crate::error::{Error, Result};

const ZERO: C64 = C64::new(0.0, 0.0);

#[derive(Debug, Clone, PartialEq)]
pub struct SparseOp {
    dim: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<C64>,
}

impl SparseOp {
    pub fn zeros(dim: usize) -> Self {
        Self { dim, row_ptr: vec![0; dim + 1], cols: Vec::new(), vals: Vec::new() }
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            dim,
            row_ptr: (0..=dim).collect(),
            cols: (0..dim).collect(),
            vals: vec![C64::new(1.0, 0.0); dim],
        }
    }

    pub fn from_dense(m: &DMatrix<C64>) -> Self {
        let dim = m.nrows();
        let mut row_ptr = Vec::with_capacity(dim + 1);
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        row_ptr.push(0);
        for i in 0..dim {
            for j in 0..m.ncols() {
                let v = m[(i, j)];
                if v != ZERO {
                    cols.push(j);
                    vals.push(v);
                }
            }
            row_ptr.push(cols.len());
        }
        Self { dim, row_ptr, cols, vals }
    }

    pub fn to_dense(&self) -> DMatrix<C64> {
        let mut m = DMatrix::from_element(self.dim, self.dim, ZERO);
        for i in 0..self.dim {
            for p in self.row_ptr[i]..self.row_ptr[i + 1] {
                m[(i, self.cols[p])] += self.vals[p];
            }
        }
        m
    }

    /// `local` acting on subsystem `s`, identity elsewhere.
    pub fn embed(layout: &HilbertLayout, s: Subsystem, local: &DMatrix<C64>) -> Result<Self> {
        let p = layout
            .position(s)
            .ok_or_else(|| Error::param(format!("{s:?} not in layout")))?;
        let mut total = DMatrix::from_element(1, 1, C64::new(1.0, 0.0));
        for (k, &d) in layout.dims().iter().enumerate() {
            let factor = if k == p {
                if local.nrows() != d {
                    return Err(Error::DimensionMismatch { expected: d, found: local.nrows() });
                }
                local.clone()
            } else {
                DMatrix::identity(d, d)
            };
            total = total.kronecker(&factor);
        }
        Ok(Self::from_dense(&total))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn adjoint(&self) -> Self {
        Self::from_dense(&self.to_dense().adjoint())
    }

    pub fn mul(&self, other: &SparseOp) -> Self {
        Self::from_dense(&(self.to_dense() * other.to_dense()))
    }

    pub fn add(&self, other: &SparseOp) -> Self {
        Self::from_dense(&(self.to_dense() + other.to_dense()))
    }

    pub fn scale(&self, c: C64) -> Self {
        Self { vals: self.vals.iter().map(|v| v * c).collect(), ..self.clone() }
    }

    pub fn is_zero(&self) -> bool {
        self.vals.iter().all(|v| *v == ZERO)
    }

    /// `out = self · x` for a dense row-major `dim × dim` matrix `x`.
    pub fn apply_left(&self, x: &[C64], out: &mut [C64]) {
        let d = self.dim;
        out.iter_mut().for_each(|o| *o = ZERO);
        for i in 0..d {
            let row_out = &mut out[i * d..(i + 1) * d];
            for p in self.row_ptr[i]..self.row_ptr[i + 1] {
                let v = self.vals[p];
                let row_x = &x[self.cols[p] * d..(self.cols[p] + 1) * d];
                for (o, xv) in row_out.iter_mut().zip(row_x) {
                    *o += v * xv;
                }
            }
        }
    }

    /// `out += x · self†` for a dense row-major `dim × dim` matrix `x`.
    pub fn add_apply_right_adjoint(&self, x: &[C64], out: &mut [C64], scale: C64) {
        let d = self.dim;
        for j in 0..d {
            for p in self.row_ptr[j]..self.row_ptr[j + 1] {
                let v = self.vals[p].conj() * scale;
                let k = self.cols[p];
                for i in 0..d {
                    out[i * d + j] += x[i * d + k] * v;
                }
            }
        }
    }

    /// `⟨x, self⟩`-type trace `Tr(self · x)`.
    pub fn trace_product(&self, x: &[C64]) -> C64 {
        let d = self.dim;
        let mut acc = ZERO;
        for i in 0..d {
            for p in self.row_ptr[i]..self.row_ptr[i + 1] {
                acc += self.vals[p] * x[self.cols[p] * d + i];
            }
        }
        acc
    }
}

/// Linear combination `Σ_k c_k A_k` of fixed operators on a shared sparsity
/// pattern, re-assembled cheaply for new coefficients.
#[derive(Debug, Clone)]
pub struct OpSum {
    pattern: SparseOp,
    term_vals: Vec<Vec<C64>>,
}

impl OpSum {
    pub fn new(dim: usize, terms: &[SparseOp]) -> Result<Self> {
        let mut slots: BTreeMap<(usize, usize), usize> = BTreeMap::new();
        for t in terms {
            if t.dim != dim {
                return Err(Error::DimensionMismatch { expected: dim, found: t.dim });
            }
            for i in 0..dim {
                for p in t.row_ptr[i]..t.row_ptr[i + 1] {
                    slots.entry((i, t.cols[p])).or_insert(0);
                }
            }
        }
        let mut row_ptr = vec![0; dim + 1];
        let mut cols = Vec::with_capacity(slots.len());
        for (n, ((i, j), slot)) in slots.iter_mut().enumerate() {
            *slot = n;
            cols.push(*j);
            row_ptr[i + 1] += 1;
        }
        for i in 0..dim {
            row_ptr[i + 1] += row_ptr[i];
        }
        let term_vals = terms
            .iter()
            .map(|t| {
                let mut v = vec![ZERO; cols.len()];
                for i in 0..dim {
                    for p in t.row_ptr[i]..t.row_ptr[i + 1] {
                        v[slots[&(i, t.cols[p])]] += t.vals[p];
                    }
                }
                v
            })
            .collect();
        let n = cols.len();
        Ok(Self { pattern: SparseOp { dim, row_ptr, cols, vals: vec![ZERO; n] }, term_vals })
    }

    pub fn n_terms(&self) -> usize {
        self.term_vals.len()
    }

    /// Writes `Σ_k coeffs[k] A_k` into `out`, which must come from [`OpSum::empty`].
    pub fn assemble_into(&self, coeffs: &[C64], out: &mut SparseOp) {
        debug_assert_eq!(coeffs.len(), self.term_vals.len());
        out.vals.iter_mut().for_each(|v| *v = ZERO);
        for (c, vals) in coeffs.iter().zip(&self.term_vals) {
            if *c == ZERO {
                continue;
            }
            for (o, v) in out.vals.iter_mut().zip(vals) {
                *o += c * v;
            }
        }
    }

    pub fn empty(&self) -> SparseOp {
        self.pattern.clone()
    }

    pub fn assemble(&self, coeffs: &[C64]) -> SparseOp {
        let mut out = self.empty();
        self.assemble_into(coeffs, &mut out);
        out
    }
}

/// Row-major copy of a dense matrix.
pub fn to_row_major(m: &DMatrix<C64>) -> Vec<C64> {
    let d = m.nrows();
    let mut v = Vec::with_capacity(d * d);
    for i in 0..d {
        for j in 0..d {
            v.push(m[(i, j)]);
        }
    }
    v
}

pub fn from_row_major(d: usize, v: &[C64]) -> DMatrix<C64> {
    DMatrix::from_row_slice(d, d, v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::hilbert::lowering;

    fn random_dense(d: usize, seed: u64) -> DMatrix<C64> {
        let mut s = seed;
        DMatrix::from_fn(d, d, |_, _| {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            let a = ((s >> 33) as f64) / (1u64 << 31) as f64 - 0.5;
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            let b = ((s >> 33) as f64) / (1u64 << 31) as f64 - 0.5;
            C64::new(a, b)
        })
    }

    #[test]
    fn products_match_dense() {
        let layout = HilbertLayout::transfer(3, false).unwrap();
        let a = SparseOp::embed(&layout, Subsystem::Resonator, &lowering(3)).unwrap();
        let d = layout.dim();
        let x = random_dense(d, 7);
        let xr = to_row_major(&x);
        let mut out = vec![ZERO; d * d];
        a.apply_left(&xr, &mut out);
        let expected = a.to_dense() * &x;
        assert!((from_row_major(d, &out) - expected).norm() < 1e-12);
        let mut out2 = vec![ZERO; d * d];
        a.add_apply_right_adjoint(&xr, &mut out2, C64::new(1.0, 0.0));
        let expected2 = &x * a.to_dense().adjoint();
        assert!((from_row_major(d, &out2) - expected2).norm() < 1e-12);
        let tr = a.trace_product(&xr);
        assert!((tr - (a.to_dense() * &x).trace()).norm() < 1e-12);
    }

    #[test]
    fn opsum_assembles_linear_combination() {
        let layout = HilbertLayout::transfer(3, true).unwrap();
        let a = SparseOp::embed(&layout, Subsystem::Resonator, &lowering(3)).unwrap();
        let c = SparseOp::embed(&layout, Subsystem::SourceCavity, &lowering(2)).unwrap();
        let ad = a.adjoint();
        let sum = OpSum::new(layout.dim(), &[a.clone(), c.clone(), ad.mul(&c)]).unwrap();
        let coeffs = [C64::new(0.5, 0.1), C64::new(-1.0, 2.0), C64::new(0.0, 3.0)];
        let got = sum.assemble(&coeffs).to_dense();
        let expected = a.to_dense() * coeffs[0] + c.to_dense() * coeffs[1] + ad.mul(&c).to_dense() * coeffs[2];
        assert!((got - expected).norm() < 1e-14);
    }
}
