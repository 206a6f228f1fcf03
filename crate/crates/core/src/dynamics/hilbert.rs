// SPDX-License-Identifier: Apache-2.0

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Subsystem {
    SourceCavity,
    Transmon,
    Resonator,
    SinkCavity,
}

/// Ordered tensor-product layout; the last subsystem varies fastest.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HilbertLayout {
    subsystems: Vec<Subsystem>,
    dims: Vec<usize>,
}

impl HilbertLayout {
    pub fn new(parts: &[(Subsystem, usize)]) -> Result<Self> {
        if parts.is_empty() {
            return Err(Error::param("layout needs at least one subsystem"));
        }
        let mut subsystems = Vec::new();
        let mut dims = Vec::new();
        for &(s, d) in parts {
            if d < 2 {
                return Err(Error::param(format!("{s:?} dimension must be at least 2")));
            }
            if subsystems.contains(&s) {
                return Err(Error::param(format!("{s:?} listed twice")));
            }
            subsystems.push(s);
            dims.push(d);
        }
        Ok(Self { subsystems, dims })
    }

    /// Source cavity, transmon qutrit, resonator and optionally the sink cavity.
    pub fn transfer(n_fock: usize, with_sink: bool) -> Result<Self> {
        let mut parts = vec![
            (Subsystem::SourceCavity, 2),
            (Subsystem::Transmon, 3),
            (Subsystem::Resonator, n_fock),
        ];
        if with_sink {
            parts.push((Subsystem::SinkCavity, 2));
        }
        Self::new(&parts)
    }

    /// Source cavity alone, for release checks without a receiver.
    pub fn source_only() -> Self {
        Self { subsystems: vec![Subsystem::SourceCavity], dims: vec![2] }
    }

    pub fn dim(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn subsystems(&self) -> &[Subsystem] {
        &self.subsystems
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn position(&self, s: Subsystem) -> Option<usize> {
        self.subsystems.iter().position(|&x| x == s)
    }

    pub fn contains(&self, s: Subsystem) -> bool {
        self.position(s).is_some()
    }

    pub fn dim_of(&self, s: Subsystem) -> Option<usize> {
        self.position(s).map(|p| self.dims[p])
    }

    fn strides(&self) -> Vec<usize> {
        let mut strides = vec![1; self.dims.len()];
        for k in (0..self.dims.len().saturating_sub(1)).rev() {
            strides[k] = strides[k + 1] * self.dims[k + 1];
        }
        strides
    }

    /// Flat index of a product basis state.
    pub fn index(&self, levels: &[usize]) -> Result<usize> {
        if levels.len() != self.dims.len() {
            return Err(Error::DimensionMismatch { expected: self.dims.len(), found: levels.len() });
        }
        let mut idx = 0;
        for ((&l, &d), s) in levels.iter().zip(&self.dims).zip(self.strides()) {
            if l >= d {
                return Err(Error::param(format!("level {l} outside dimension {d}")));
            }
            idx += l * s;
        }
        Ok(idx)
    }

    /// Inverse of [`HilbertLayout::index`].
    pub fn levels(&self, mut index: usize) -> Vec<usize> {
        let strides = self.strides();
        strides
            .iter()
            .map(|&s| {
                let l = index / s;
                index %= s;
                l
            })
            .collect()
    }
}

/// Lowering operator truncated to `dim` levels.
pub fn lowering(dim: usize) -> DMatrix<C64> {
    let mut m = DMatrix::from_element(dim, dim, C64::new(0.0, 0.0));
    for n in 1..dim {
        m[(n - 1, n)] = C64::new((n as f64).sqrt(), 0.0);
    }
    m
}

/// `|i⟩⟨j|` on `dim` levels.
pub fn projector(dim: usize, i: usize, j: usize) -> DMatrix<C64> {
    let mut m = DMatrix::from_element(dim, dim, C64::new(0.0, 0.0));
    m[(i, j)] = C64::new(1.0, 0.0);
    m
}

/// Diagonal operator `Σ f(n) |n⟩⟨n|`.
pub fn diagonal(dim: usize, f: impl Fn(usize) -> f64) -> DMatrix<C64> {
    DMatrix::from_fn(dim, dim, |i, j| if i == j { C64::new(f(i), 0.0) } else { C64::new(0.0, 0.0) })
}

pub const HERMITICITY_TOL: f64 = 1e-10;
pub const TRACE_TOL: f64 = 1e-8;
pub const POSITIVITY_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityMatrix {
    layout: HilbertLayout,
    entries: DMatrix<C64>,
}

impl DensityMatrix {
    /// Checks Hermiticity, unit trace and positivity.
    pub fn new(layout: HilbertLayout, entries: DMatrix<C64>) -> Result<Self> {
        let rho = Self::new_unchecked(layout, entries)?;
        let herm = rho.hermiticity_error();
        if herm > HERMITICITY_TOL {
            return Err(Error::InvalidState(format!("not Hermitian: {herm:e}")));
        }
        let tr = rho.trace();
        if (tr.re - 1.0).abs() > TRACE_TOL || tr.im.abs() > TRACE_TOL {
            return Err(Error::InvalidState(format!("trace {tr} differs from 1")));
        }
        let min = rho.min_eigenvalue();
        if min < -POSITIVITY_TOL {
            return Err(Error::InvalidState(format!("negative eigenvalue {min:e}")));
        }
        Ok(rho)
    }

    /// Checks only the shape; used for operator-valued propagation.
    pub fn new_unchecked(layout: HilbertLayout, entries: DMatrix<C64>) -> Result<Self> {
        let d = layout.dim();
        if entries.nrows() != d || entries.ncols() != d {
            return Err(Error::DimensionMismatch { expected: d, found: entries.nrows() });
        }
        Ok(Self { layout, entries })
    }

    /// Product state; subsystems not listed start in their ground state.
    pub fn product(layout: &HilbertLayout, locals: &[(Subsystem, DMatrix<C64>)]) -> Result<Self> {
        let mut total = DMatrix::from_element(1, 1, C64::new(1.0, 0.0));
        for (&s, &d) in layout.subsystems.iter().zip(&layout.dims) {
            let local = match locals.iter().find(|(x, _)| *x == s) {
                Some((_, m)) => {
                    if m.nrows() != d || m.ncols() != d {
                        return Err(Error::DimensionMismatch { expected: d, found: m.nrows() });
                    }
                    m.clone()
                }
                None => projector(d, 0, 0),
            };
            total = total.kronecker(&local);
        }
        Self::new(layout.clone(), total)
    }

    /// Ground state of every subsystem.
    pub fn vacuum(layout: &HilbertLayout) -> Self {
        Self::product(layout, &[]).expect("vacuum is a valid state")
    }

    pub fn layout(&self) -> &HilbertLayout {
        &self.layout
    }

    pub fn entries(&self) -> &DMatrix<C64> {
        &self.entries
    }

    pub fn into_entries(self) -> DMatrix<C64> {
        self.entries
    }

    pub fn trace(&self) -> C64 {
        self.entries.trace()
    }

    pub fn hermiticity_error(&self) -> f64 {
        let d = self.entries.nrows();
        let mut worst = 0.0f64;
        for i in 0..d {
            for j in i..d {
                worst = worst.max((self.entries[(i, j)] - self.entries[(j, i)].conj()).norm());
            }
        }
        worst
    }

    pub fn min_eigenvalue(&self) -> f64 {
        min_eigenvalue(&self.entries)
    }

    /// Partial trace onto one subsystem.
    pub fn reduced(&self, s: Subsystem) -> Result<DMatrix<C64>> {
        let p = self
            .layout
            .position(s)
            .ok_or_else(|| Error::param(format!("{s:?} not in layout")))?;
        let d = self.layout.dims[p];
        let mut out = DMatrix::from_element(d, d, C64::new(0.0, 0.0));
        let n = self.layout.dim();
        let levels: Vec<Vec<usize>> = (0..n).map(|i| self.layout.levels(i)).collect();
        for i in 0..n {
            for j in 0..n {
                let (li, lj) = (&levels[i], &levels[j]);
                let same_rest = li.iter().zip(lj).enumerate().all(|(k, (a, b))| k == p || a == b);
                if same_rest {
                    out[(li[p], lj[p])] += self.entries[(i, j)];
                }
            }
        }
        Ok(out)
    }

    /// Occupation probabilities of each level of one subsystem.
    pub fn level_populations(&self, s: Subsystem) -> Result<Vec<f64>> {
        let r = self.reduced(s)?;
        Ok((0..r.nrows()).map(|i| r[(i, i)].re).collect())
    }
}

/// Smallest eigenvalue of the Hermitian part of `m`.
pub fn min_eigenvalue(m: &DMatrix<C64>) -> f64 {
    let herm = (m + m.adjoint()) * C64::new(0.5, 0.0);
    nalgebra::SymmetricEigen::new(herm)
        .eigenvalues
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min)
}

/// Pure-state projector `|ψ⟩⟨ψ|` for a normalised amplitude vector.
pub fn pure_state(amplitudes: &[C64]) -> Result<DMatrix<C64>> {
    let norm: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
    if (norm - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidState(format!("state norm {norm} differs from 1")));
    }
    let n = amplitudes.len();
    Ok(DMatrix::from_fn(n, n, |i, j| amplitudes[i] * amplitudes[j].conj()))
}
