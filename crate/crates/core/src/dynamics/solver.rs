// SPDX-License-Identifier: Apache-2.0

//! Fixed-step RK4 integration of the master equation.
//!
//! One step spans two waveform samples, so the stage midpoint falls exactly on
//! a stored sample and no envelope interpolation is needed. Steps across a
//! drive switching on or off hold each sample over its neighbourhood instead.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use super::hilbert::{min_eigenvalue, DensityMatrix, Subsystem};
use super::model::MasterEquation;
use super::sparse::{from_row_major, to_row_major, SparseOp};
use crate::error::{Error, Result};
use crate::grid::TimeGrid;

const ZERO: C64 = C64::new(0.0, 0.0);

/// Trace drift that aborts a run.
pub const TRACE_ABORT: f64 = 1e-4;

/// RK4 substeps per waveform sample across a drive switching on or off.
const HELD_SUBSTEPS: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvolveOptions {
    /// Record points between positivity checks (0 disables them).
    pub positivity_stride: usize,
    /// Record points between stored density-matrix snapshots (0 stores none).
    pub snapshot_stride: usize,
}

impl Default for EvolveOptions {
    fn default() -> Self {
        Self { positivity_stride: 25, snapshot_stride: 0 }
    }
}

/// Time series and diagnostics of one run. Record points are every second
/// waveform sample.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SimulationRecord {
    pub label: String,
    pub record_grid: TimeGrid,
    /// `⟨L_0† L_0⟩`, photons per second.
    pub i_out: Vec<f64>,
    /// `⟨L_0⟩`.
    pub field_mean: Vec<C64>,
    /// Expectation of the conserved excitation operator.
    pub excitation: Vec<f64>,
    /// Excitation removed by loss and decoherence jumps (running integral).
    pub dissipated: Vec<f64>,
    /// Level populations per subsystem at the end of the run.
    pub final_populations: Vec<(Subsystem, Vec<f64>)>,
    pub final_state: DensityMatrix,
    pub max_trace_error: f64,
    /// Smallest eigenvalue seen at positivity checkpoints.
    pub min_eigenvalue: f64,
    #[serde(skip)]
    pub snapshots: Vec<(usize, Vec<C64>)>,
    #[serde(skip)]
    pub snapshot_stride: usize,
}

impl SimulationRecord {
    /// `∫ I_out dt` by the trapezoidal rule on the record grid.
    pub fn output_energy(&self) -> f64 {
        crate::grid::trapezoid(&self.i_out, self.record_grid.dt())
    }

    pub fn initial_excitation(&self) -> f64 {
        self.excitation[0]
    }

    /// `∫ I_out + ⟨N⟩_final + dissipated - ⟨N⟩_initial`.
    pub fn energy_budget_error(&self) -> f64 {
        self.output_energy() + self.excitation.last().unwrap() + self.dissipated.last().unwrap()
            - self.excitation[0]
    }
}

/// Scratch buffers and assembled operators for right-hand-side evaluation.
pub(crate) struct Workspace {
    d: usize,
    gen: SparseOp,
    jumps: Vec<SparseOp>,
    coeff: Vec<C64>,
    tmp: Vec<C64>,
    k: [Vec<C64>; 4],
    stage: Vec<C64>,
}

impl Workspace {
    pub(crate) fn new(eq: &MasterEquation) -> Self {
        let d = eq.dim();
        Self {
            d,
            gen: eq.generator.empty(),
            jumps: eq.jumps.iter().map(|j| j.op.empty()).collect(),
            coeff: Vec::new(),
            tmp: vec![ZERO; d * d],
            k: [vec![ZERO; d * d], vec![ZERO; d * d], vec![ZERO; d * d], vec![ZERO; d * d]],
            stage: vec![ZERO; d * d],
        }
    }

    fn assemble(&mut self, eq: &MasterEquation, sample: usize) {
        eq.generator.assemble_into(sample, &mut self.coeff, &mut self.gen);
        for (j, op) in eq.jumps.iter().zip(self.jumps.iter_mut()) {
            j.op.assemble_into(sample, &mut self.coeff, op);
        }
    }

    /// `out = M x + x M† + Σ L x L†` with operators assembled at `sample`.
    fn rhs(&mut self, eq: &MasterEquation, sample: usize, x: &[C64], which: usize) {
        self.assemble(eq, sample);
        self.apply(x, which);
    }

    /// Right-hand side with the operators already assembled.
    fn apply(&mut self, x: &[C64], which: usize) {
        let out = &mut self.k[which];
        self.gen.apply_left(x, out);
        self.gen.add_apply_right_adjoint(x, out, C64::new(1.0, 0.0));
        for l in &self.jumps {
            if l.nnz() == 0 {
                continue;
            }
            l.apply_left(x, &mut self.tmp);
            l.add_apply_right_adjoint(&self.tmp, out, C64::new(1.0, 0.0));
        }
    }

    /// One RK4 step from waveform sample `k0` to `k0 + 2`.
    pub(crate) fn step(&mut self, eq: &MasterEquation, k0: usize, x: &mut [C64]) {
        if eq.generator.switches(k0, k0 + 2) || eq.jumps.iter().any(|j| j.op.switches(k0, k0 + 2)) {
            self.step_held(eq, k0, x);
            return;
        }
        let h = 2.0 * eq.grid.dt();
        let n = self.d * self.d;
        self.rhs(eq, k0, x, 0);
        for i in 0..n {
            self.stage[i] = x[i] + self.k[0][i] * (0.5 * h);
        }
        let stage = std::mem::take(&mut self.stage);
        self.rhs(eq, k0 + 1, &stage, 1);
        let mut stage = stage;
        for i in 0..n {
            stage[i] = x[i] + self.k[1][i] * (0.5 * h);
        }
        self.rhs(eq, k0 + 1, &stage, 2);
        for i in 0..n {
            stage[i] = x[i] + self.k[2][i] * h;
        }
        self.rhs(eq, k0 + 2, &stage, 3);
        self.stage = stage;
        for i in 0..n {
            x[i] += (self.k[0][i] + 2.0 * self.k[1][i] + 2.0 * self.k[2][i] + self.k[3][i]) * (h / 6.0);
        }
    }

    /// Step across a drive switching on or off. The quadratic that plain RK4
    /// implies through a jump overshoots and costs positivity, so each sample's
    /// coefficients are held over its half-sample neighbourhood and the
    /// constant pieces are integrated with fine RK4 substeps.
    fn step_held(&mut self, eq: &MasterEquation, k0: usize, x: &mut [C64]) {
        const SUB: usize = HELD_SUBSTEPS;
        let dt = eq.grid.dt();
        for (sample, span) in [(k0, 0.5), (k0 + 1, 1.0), (k0 + 2, 0.5)] {
            self.assemble(eq, sample);
            let n_sub = (span * SUB as f64) as usize;
            let h = span * dt / n_sub as f64;
            for _ in 0..n_sub {
                self.rk4_constant(x, h);
            }
        }
    }

    /// RK4 step of length `h` with the currently assembled operators.
    fn rk4_constant(&mut self, x: &mut [C64], h: f64) {
        let n = self.d * self.d;
        let mut stage = std::mem::take(&mut self.stage);
        self.apply(x, 0);
        for i in 0..n {
            stage[i] = x[i] + self.k[0][i] * (0.5 * h);
        }
        self.apply(&stage, 1);
        for i in 0..n {
            stage[i] = x[i] + self.k[1][i] * (0.5 * h);
        }
        self.apply(&stage, 2);
        for i in 0..n {
            stage[i] = x[i] + self.k[2][i] * h;
        }
        self.apply(&stage, 3);
        self.stage = stage;
        for i in 0..n {
            x[i] += (self.k[0][i] + 2.0 * self.k[1][i] + 2.0 * self.k[2][i] + self.k[3][i]) * (h / 6.0);
        }
    }

    /// `Tr(L x L†)` and `Tr(L x)` for the assembled field operator.
    fn field_moments(&mut self, eq: &MasterEquation, sample: usize, x: &[C64]) -> (f64, C64) {
        let mut field = eq.field.empty();
        eq.field.assemble_into(sample, &mut self.coeff, &mut field);
        field.apply_left(x, &mut self.tmp);
        let intensity = trace_with_adjoint(&field, &self.tmp, self.d);
        (intensity.re, field.trace_product(x))
    }

    fn dissipation_rate(&mut self, eq: &MasterEquation, sample: usize, x: &[C64]) -> f64 {
        let mut total = 0.0;
        for (j, jump) in eq.jumps.iter().enumerate().skip(1) {
            if jump.excitation == 0.0 {
                continue;
            }
            jump.op.assemble_into(sample, &mut self.coeff, &mut self.jumps[j]);
            self.jumps[j].apply_left(x, &mut self.tmp);
            total += jump.excitation * trace_with_adjoint(&self.jumps[j], &self.tmp, self.d).re;
        }
        total
    }
}

/// `Tr(t · op†)` for a dense row-major `t`.
fn trace_with_adjoint(op: &SparseOp, t: &[C64], d: usize) -> C64 {
    let dense = op.to_dense();
    let mut acc = ZERO;
    for i in 0..d {
        for k in 0..d {
            let v = dense[(i, k)];
            if v != ZERO {
                acc += t[i * d + k] * v.conj();
            }
        }
    }
    acc
}

fn trace(x: &[C64], d: usize) -> C64 {
    (0..d).map(|i| x[i * d + i]).sum()
}

/// Number of RK4 steps available on a grid of `n` samples.
pub fn n_steps(grid: &TimeGrid) -> usize {
    (grid.len() - 1) / 2
}

/// Integrates `rho0` across the whole grid.
pub fn evolve(rho0: &DensityMatrix, eq: &MasterEquation, opts: &EvolveOptions, label: &str) -> Result<SimulationRecord> {
    if rho0.layout() != &eq.layout {
        return Err(Error::DimensionMismatch { expected: eq.dim(), found: rho0.layout().dim() });
    }
    let d = eq.dim();
    let steps = n_steps(&eq.grid);
    let record_grid = TimeGrid::new(eq.grid.t_start(), 2.0 * eq.grid.dt(), steps + 1)?;
    let mut ws = Workspace::new(eq);
    let mut x = to_row_major(rho0.entries());
    let excitation_op = &eq.excitation;

    let mut i_out = Vec::with_capacity(steps + 1);
    let mut field_mean = Vec::with_capacity(steps + 1);
    let mut excitation = Vec::with_capacity(steps + 1);
    let mut dissipated = Vec::with_capacity(steps + 1);
    let mut snapshots = Vec::new();
    let mut max_trace_error = 0.0f64;
    let mut min_eig = f64::INFINITY;
    let mut diss_acc = 0.0;
    let mut last_diss_rate = 0.0;

    for s in 0..=steps {
        let k = 2 * s;
        let (intensity, mean) = ws.field_moments(eq, k, &x);
        i_out.push(intensity);
        field_mean.push(mean);
        excitation.push(excitation_op.trace_product(&x).re);
        let rate = ws.dissipation_rate(eq, k, &x);
        if s > 0 {
            diss_acc += 0.5 * (rate + last_diss_rate) * record_grid.dt();
        }
        last_diss_rate = rate;
        dissipated.push(diss_acc);

        let tr_err = (trace(&x, d) - C64::new(1.0, 0.0)).norm();
        max_trace_error = max_trace_error.max(tr_err);
        if tr_err > TRACE_ABORT {
            return Err(Error::TraceDrift { time: record_grid.time(s), drift: tr_err });
        }
        if opts.positivity_stride > 0 && (s % opts.positivity_stride == 0 || s == steps) {
            min_eig = min_eig.min(min_eigenvalue(&from_row_major(d, &x)));
        }
        if opts.snapshot_stride > 0 && s % opts.snapshot_stride == 0 {
            snapshots.push((s, x.clone()));
        }
        if s < steps {
            ws.step(eq, k, &mut x);
        }
    }

    let final_state = DensityMatrix::new_unchecked(eq.layout.clone(), from_row_major(d, &x))?;
    let final_populations = eq
        .layout
        .subsystems()
        .iter()
        .map(|&sub| Ok((sub, final_state.level_populations(sub)?)))
        .collect::<Result<_>>()?;
    Ok(SimulationRecord {
        label: label.to_string(),
        record_grid,
        i_out,
        field_mean,
        excitation,
        dissipated,
        final_populations,
        final_state,
        max_trace_error,
        min_eigenvalue: if min_eig.is_finite() { min_eig } else { 0.0 },
        snapshots,
        snapshot_stride: opts.snapshot_stride,
    })
}

/// Propagates an arbitrary operator `x` from record point `from` for
/// `n_record_steps` record intervals, calling `visit` after every interval.
pub(crate) fn propagate(
    eq: &MasterEquation,
    ws: &mut Workspace,
    x: &mut [C64],
    from: usize,
    n_record_steps: usize,
    mut visit: impl FnMut(usize, &[C64]),
) {
    for s in from..from + n_record_steps {
        ws.step(eq, 2 * s, x);
        visit(s + 1, x);
    }
}
